#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "oucl/ou_model.hpp"
#include "oucl/rng.hpp"

namespace oucl {

// Total-variation estimates use the total-mass convention: values lie in
// [0, 2] and disjoint supports give 2.
struct TVEstimate {
    double tv_hat = 0.0;
    double std_err = 0.0;
};

struct TVRow {
    double t = 0.0;
    double tv_hat = 0.0;
    double std_err = 0.0;
    double bound_sqrt = 0.0;                 // fitted C / sqrt(t) envelope
    std::optional<double> bound_gradient;    // symbol-based bound when available
};

using TVCurve = std::vector<TVRow>;

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;  // value of log tv at log t = 0
    double r_squared = 0.0;
    int used_rows = 0;
};

// Histogram L1 distance over a common box spanned by the pooled 2%..98%
// quantiles per axis; samples outside are counted in the nearest edge bin.
// std_err is the binomial propagation bound sqrt(2 * cells / N); when
// bootstrap_reps > 0 a multinomial bootstrap standard error is reported
// instead (requires an RngStream).
TVEstimate tv_histogram(const std::vector<Eigen::VectorXd>& samples_x,
                        const std::vector<Eigen::VectorXd>& samples_y, int bins_per_axis,
                        int bootstrap_reps = 0, RngStream* rng = nullptr);

TVEstimate tv_histogram1d(const std::vector<double>& samples_x,
                          const std::vector<double>& samples_y, int bins_per_axis);

// Exact (quadrature) total variation between the time-t laws started at x
// and y for one-dimensional models whose time-t law has a density.
double tv_exact_1d(const OUModel& model, double t, double x, double y);

// Least-squares fit of log tv against log t; rows saturated near the cap
// (tv > 1.9) or inside the noise floor (tv < 3 std_err) are dropped.
FitResult fit_decay(const TVCurve& curve);

struct LatticeSpec {
    double lo = -5.0;
    double hi = 5.0;
    int points = 81;
};

struct GradientEstimate {
    double sup_grad = 0.0;
    double h = 0.0;  // probe spacing used by the central differences
};

// Max over the probe lattice of the central finite-difference gradient of
// P_t f, with P_t f evaluated by density quadrature; 1-d and 2-d models.
GradientEstimate gradient_sup_norm(const OUModel& model, double t,
                                   const std::function<double(const Eigen::VectorXd&)>& f,
                                   const LatticeSpec& probe);

}  // namespace oucl
