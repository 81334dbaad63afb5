#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "oucl/ou_model.hpp"

namespace oucl {

// Characteristic exponent Phi(xi) = <Q xi, xi>/2 + i<b, xi>
// + int (1 - e^{i<xi,z>} + i<xi,z> 1_{|z|<1}) nu(dz), with the strict open
// unit ball in the compensator.  E e^{i<xi, Z_t>} = e^{-t Phi(xi)}.
std::complex<double> characteristic_exponent(const LevyTriplet& triplet,
                                             const Eigen::VectorXd& xi);

// Exponent of the driver pushed through the noise matrix: Phi(B^T xi).
std::complex<double> pushforward_exponent(const OUModel& model, const Eigen::VectorXd& xi);

// Exponent of the time-t marginal: int_0^t Phi(B^T e^{sA^T} xi) ds.
std::complex<double> time_integrated_exponent(const OUModel& model, double t,
                                              const Eigen::VectorXd& xi);

// Triplet (0, b_t, nu_t) of the time-t marginal, with nu_t realized as a
// quadrature mixture of flow-mapped copies of nu.  Requires Q = 0 and an
// atomic or (scalar) rotation-invariant power-tail driver.
LevyTriplet ou_pushforward_triplet(const OUModel& model, double t, int s_nodes = 64);

// sup over |xi| <= rho of the real part of the time-integrated exponent;
// t = +infinity selects the un-integrated form sup Re Phi(B^T xi).
double phi_sup(const OUModel& model, double t, double rho, int sphere_samples = 64);

// inf { rho > 0 : phi_sup(model, t, rho) >= level }, by bisection.
double phi_inverse(const OUModel& model, double t, double level, int sphere_samples = 64);

struct ConditionReport {
    // growth of the integrated symbol against (2n+2) log(1+|xi|)
    double growth_ratio_min = 0.0;      // min over the top decade of the xi grid
    double growth_threshold = 0.0;      // 2n+2
    bool growth_ok = false;
    // boundedness of int_0^T Re Phi(B^T e^{sA^T} xi) ds as T grows
    bool time_integral_bounded = false;
    double horizon_increment = 0.0;     // last doubling increment (max over xi probes)
    // both together give the density/smoothing regime at large times
    bool smoothing_regime = false;
    std::vector<std::pair<double, double>> ratio_grid;      // (|xi|, ratio)
    std::vector<std::pair<double, double>> horizon_values;  // (T, max_xi integral)
};

ConditionReport check_conditions(const OUModel& model, double t0, double xi_range);

struct DensityGrid {
    double x0 = 0.0;
    double dx = 0.0;
    int count = 0;
    // With wrap = true the window [x0, x0 + count*dx) is treated as one full
    // period: mass outside folds in, so the window sums to 1 regardless of
    // tail weight.  With wrap = false the window is auto-enlarged internally
    // until the fold-in bias at the edges is below 1e-7.
    bool wrap = false;
};

std::vector<double> density_via_fourier(const OUModel& model, double t, const DensityGrid& grid);

// Two-dimensional version on a tensor grid (direct inversion; small grids).
Eigen::MatrixXd density_via_fourier_2d(const OUModel& model, double t, const DensityGrid& gx,
                                       const DensityGrid& gy);

struct BoundReport {
    double t = 0.0;
    double phi_t_inverse = 0.0;
    double tv_bound = 0.0;              // |e^{tA}(x-y)| * phi_t^{-1}(1) * C
    double gradient_bound_small_t = 0.0;  // c * phi^{-1}(1/(t ^ 1))
    double gradient_bound_large_t = 0.0;  // c * ||e^{tA}|| * phi_t^{-1}(1)
    ConditionReport conditions;
};

BoundReport bound_report(const OUModel& model, double t, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y, double constant = 1.0);

}  // namespace oucl
