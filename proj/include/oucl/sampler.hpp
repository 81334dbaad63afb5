#pragma once

#include <Eigen/Dense>
#include <vector>

#include "oucl/ou_model.hpp"
#include "oucl/rng.hpp"

namespace oucl {

struct EndpointSample {
    Eigen::VectorXd value;
    int jump_count = 0;
    std::vector<double> jump_times;  // strictly increasing, in [0, t]
};

// Which time kernel weights jump k: Forward uses e^{tau_k A} (the series
// representation of the time-t law), Backward uses e^{(t - tau_k) A} (the
// pathwise solution).  Both give the same distribution.
enum class JumpKernel { Forward, Backward };

// Endpoint sampler for the epsilon-truncated jump part of the driver.
class CompoundPoissonSampler {
public:
    CompoundPoissonSampler(const OUModel& model, double epsilon);

    EndpointSample endpoint(double t, const Eigen::VectorXd& x, RngStream& rng,
                            JumpKernel kernel = JumpKernel::Forward) const;

    double rate() const { return nu_eps_.total_mass; }
    const FiniteMeasure& jump_law() const { return nu_eps_; }
    double neglected_quadratic_mass() const { return neglected_; }

private:
    OUModel model_;
    FiniteMeasure nu_eps_;
    MeasureSampler jumps_;
    double neglected_ = 0.0;
};

EndpointSample sample_compound_poisson_ou(const OUModel& model, double epsilon, double t,
                                          const Eigen::VectorXd& x, RngStream& rng);

struct DriverSpec {
    enum class Mode { CpTruncated, StableExact, GaussianExact, PathEuler };
    Mode mode = Mode::CpTruncated;
    double epsilon = 0.1;  // CpTruncated / PathEuler jump cut
    int steps = 1000;      // PathEuler
};

Eigen::VectorXd sample_ou_endpoint(const OUModel& model, double t, const Eigen::VectorXd& x,
                                   const DriverSpec& driver, RngStream& rng);

// Standard symmetric stable draw with E e^{iuS} = e^{-|u|^alpha}
// (Chambers-Mallows-Stuck); alpha = 2 gives Normal(0, 2).
double sample_stable(double alpha, RngStream& rng);

// Covariance int_0^t e^{sA} B Q B^T e^{sA^T} ds of the Gaussian part.
Eigen::MatrixXd gaussian_endpoint_covariance(const OUModel& model, double t);

// Deterministic drift contribution -int_0^t e^{sA} B b ds of the endpoint.
Eigen::VectorXd drift_endpoint_shift(const OUModel& model, double t);

}  // namespace oucl
