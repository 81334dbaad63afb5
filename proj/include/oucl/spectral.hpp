#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace oucl {

// e^{tA} (scaling-and-squaring with Pade approximants).
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A, double t);

// Operator 2-norm (largest singular value).
double operator_norm(const Eigen::MatrixXd& M);

enum class Stability {
    AllNegative,            // every eigenvalue has Re < 0
    NonpositiveSemisimple,  // Re <= 0, purely imaginary ones semisimple
    HasPositive,            // some eigenvalue with Re > 0
    NonpositiveDefective,   // Re <= 0 but a defective purely imaginary one
};

const char* stability_name(Stability s);

struct SpectralReport {
    std::vector<std::complex<double>> eigenvalues;  // one entry per cluster
    std::vector<int> alg_mult;
    std::vector<int> geom_mult;
    bool semisimple_imaginary = true;
    Stability stability = Stability::AllNegative;
    double spectral_abscissa = 0.0;  // max Re
    double c_a = 0.0;                // sup_{t>=0} ||e^{tA}||, +inf when unbounded
    double eigvec_condition = 0.0;   // kappa_2 of the eigenvector matrix, +inf if defective

    bool gate_passes() const {
        return stability == Stability::AllNegative ||
               stability == Stability::NonpositiveSemisimple;
    }
};

SpectralReport spectral_report(const Eigen::MatrixXd& A, double time_horizon = 200.0,
                               int grid = 512);

// Throws GateError unless the semigroup norms sup_t ||e^{tA}|| stay bounded.
void require_bounded_semigroup(const SpectralReport& r);

}  // namespace oucl
