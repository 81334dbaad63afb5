#pragma once

#include <Eigen/Dense>
#include <optional>

#include "oucl/levy_measure.hpp"

namespace oucl {

// Generating triplet of the driving noise: Gaussian covariance Q (d x d,
// symmetric PSD), drift b, and jump measure nu.
struct LevyTriplet {
    Eigen::MatrixXd Q;
    Eigen::VectorXd b;
    LevyMeasure nu;
    int dim = 1;

    static LevyTriplet make(Eigen::MatrixXd Q, Eigen::VectorXd b, LevyMeasure nu);
    static LevyTriplet pure_jump(LevyMeasure nu);
    static LevyTriplet gaussian1d(double q);
};

// dX = AX dt + B dZ with an n-dimensional state and d-dimensional driver.
struct OUModel {
    Eigen::MatrixXd A;  // n x n
    Eigen::MatrixXd B;  // n x d
    LevyTriplet triplet;
    int n = 1, d = 1;
    int rank_B = 0;
    // Right inverse with B * B_pinv = I_n; present iff rank(B) = n.
    std::optional<Eigen::MatrixXd> B_pinv;

    static OUModel make(Eigen::MatrixXd A, Eigen::MatrixXd B, LevyTriplet triplet);
    static OUModel scalar(double a, double b_coef, LevyTriplet triplet);

    Eigen::MatrixXd flow(double t) const;  // e^{tA}
};

}  // namespace oucl
