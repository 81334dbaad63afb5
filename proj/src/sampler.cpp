#include "oucl/sampler.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <memory>

#include "oucl/common.hpp"
#include "oucl/spectral.hpp"

namespace oucl {
namespace {

// e^{sA} v, with a scalar fast path
Eigen::VectorXd flow_apply(const Eigen::MatrixXd& A, double s, const Eigen::VectorXd& v) {
    if (A.rows() == 1) return std::exp(s * A(0, 0)) * v;
    return matrix_exponential(A, s) * v;
}

template <typename F>
double panel_integral(double t, F&& f) {
    using G = boost::math::quadrature::gauss<double, 30>;
    double acc = 0.0;
    double a = 0.0;
    while (a < t) {
        const double b = std::min(t, a + 1.0);
        acc += G::integrate(f, a, b);
        a = b;
    }
    return acc;
}

}  // namespace

CompoundPoissonSampler::CompoundPoissonSampler(const OUModel& model, double epsilon)
    : model_(model),
      nu_eps_(truncate(model.triplet.nu, epsilon)),
      jumps_(nu_eps_),
      neglected_(nu_eps_.trunc_radius > 0.0
                     ? small_jump_quadratic_mass(model.triplet.nu, epsilon)
                     : 0.0) {
    if (!(nu_eps_.total_mass > 0.0))
        throw PreconditionError("no jump activity above the truncation radius");
}

EndpointSample CompoundPoissonSampler::endpoint(double t, const Eigen::VectorXd& x,
                                                RngStream& rng, JumpKernel kernel) const {
    if (t < 0.0) throw ConfigError("time must be nonnegative");
    if (x.size() != model_.n) throw ConfigError("state dimension mismatch");
    EndpointSample out;
    out.value = flow_apply(model_.A, t, x);
    double s = 0.0;
    for (;;) {
        s += rng.exponential(rate());
        if (s > t) break;
        out.jump_times.push_back(s);
        const Eigen::VectorXd u = jumps_.draw(rng);
        const double arg = kernel == JumpKernel::Forward ? s : t - s;
        out.value += flow_apply(model_.A, arg, model_.B * u);
    }
    out.jump_count = static_cast<int>(out.jump_times.size());
    return out;
}

EndpointSample sample_compound_poisson_ou(const OUModel& model, double epsilon, double t,
                                          const Eigen::VectorXd& x, RngStream& rng) {
    return CompoundPoissonSampler(model, epsilon).endpoint(t, x, rng);
}

double sample_stable(double alpha, RngStream& rng) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("stable index must lie in (0,2]");
    const double v = M_PI * (rng.uniform() - 0.5);
    const double e = rng.exponential(1.0);
    const double num = std::sin(alpha * v);
    const double den = std::pow(std::cos(v), 1.0 / alpha);
    const double tail = std::pow(std::cos((1.0 - alpha) * v) / e, (1.0 - alpha) / alpha);
    return num / den * tail;
}

Eigen::MatrixXd gaussian_endpoint_covariance(const OUModel& model, double t) {
    const Eigen::MatrixXd BQBt = model.B * model.triplet.Q * model.B.transpose();
    if (model.n == 1) {
        const double a = model.A(0, 0);
        const double w = std::abs(a) < 1e-14 ? t : (std::exp(2.0 * a * t) - 1.0) / (2.0 * a);
        return BQBt * w;
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(model.n, model.n);
    for (int i = 0; i < model.n; ++i)
        for (int j = i; j < model.n; ++j) {
            const double v = panel_integral(t, [&](double s) {
                const Eigen::MatrixXd E = matrix_exponential(model.A, s);
                return (E * BQBt * E.transpose())(i, j);
            });
            out(i, j) = v;
            out(j, i) = v;
        }
    return out;
}

namespace {

// -int_0^t e^{sA} v ds, the endpoint image of a unit deterministic drift.
Eigen::VectorXd integrated_backward_drift(const OUModel& model, const Eigen::VectorXd& v,
                                          double t) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(model.n);
    if (v.lpNorm<Eigen::Infinity>() == 0.0) return out;
    for (int i = 0; i < model.n; ++i)
        out(i) = panel_integral(t, [&](double s) { return -flow_apply(model.A, s, v)(i); });
    return out;
}

}  // namespace

Eigen::VectorXd drift_endpoint_shift(const OUModel& model, double t) {
    return integrated_backward_drift(model, model.B * model.triplet.b, t);
}

Eigen::VectorXd sample_ou_endpoint(const OUModel& model, double t, const Eigen::VectorXd& x,
                                   const DriverSpec& driver, RngStream& rng) {
    if (t < 0.0) throw ConfigError("time must be nonnegative");
    if (x.size() != model.n) throw ConfigError("state dimension mismatch");
    if (t == 0.0) return x;

    switch (driver.mode) {
        case DriverSpec::Mode::CpTruncated: {
            CompoundPoissonSampler cp(model, driver.epsilon);
            Eigen::VectorXd v = cp.endpoint(t, x, rng).value;
            return v + drift_endpoint_shift(model, t) +
                   integrated_backward_drift(model, model.B * open_ball_mean(cp.jump_law()), t);
        }
        case DriverSpec::Mode::StableExact: {
            const auto* st = std::get_if<StableMeasure>(&model.triplet.nu.rep);
            if (!st || model.n != 1 || model.d != 1 ||
                model.triplet.Q.lpNorm<Eigen::Infinity>() > 0.0)
                throw PreconditionError(
                    "exact power-tail sampling needs a scalar pure-jump stable driver");
            const double a = model.A(0, 0), Bc = model.B(0, 0);
            const double scale_t =
                st->scale * panel_integral(t, [&](double s) {
                    return std::pow(std::abs(Bc * std::exp(a * s)), st->alpha);
                });
            Eigen::VectorXd v = flow_apply(model.A, t, x);
            v(0) += std::pow(scale_t, 1.0 / st->alpha) * sample_stable(st->alpha, rng);
            return v + drift_endpoint_shift(model, t);
        }
        case DriverSpec::Mode::GaussianExact: {
            if (!model.triplet.nu.is_zero())
                throw PreconditionError("exact Gaussian sampling needs a jump-free driver");
            const Eigen::MatrixXd cov = gaussian_endpoint_covariance(model, t);
            Eigen::LLT<Eigen::MatrixXd> llt(cov +
                                            1e-14 * Eigen::MatrixXd::Identity(model.n, model.n));
            if (llt.info() != Eigen::Success)
                throw AccuracyError("endpoint covariance is not positive definite");
            Eigen::VectorXd g(model.n);
            for (int i = 0; i < model.n; ++i) g(i) = rng.gaussian();
            return flow_apply(model.A, t, x) + drift_endpoint_shift(model, t) +
                   llt.matrixL() * g;
        }
        case DriverSpec::Mode::PathEuler: {
            const int steps = std::max(1, driver.steps);
            const double h = t / steps;
            Eigen::MatrixXd sqrtQ;
            const bool has_gauss = model.triplet.Q.lpNorm<Eigen::Infinity>() > 0.0;
            if (has_gauss) {
                Eigen::LLT<Eigen::MatrixXd> llt(
                    model.triplet.Q + 1e-14 * Eigen::MatrixXd::Identity(model.d, model.d));
                if (llt.info() != Eigen::Success)
                    throw AccuracyError("driver covariance is not positive definite");
                sqrtQ = llt.matrixL();
            }
            const auto* st = std::get_if<StableMeasure>(&model.triplet.nu.rep);
            const bool has_cp = !model.triplet.nu.is_zero() && !st;
            double cp_rate = 0.0;
            std::unique_ptr<MeasureSampler> cp_jumps;
            FiniteMeasure nu_eps;
            Eigen::VectorXd compensated = Eigen::VectorXd::Zero(model.d);
            if (has_cp) {
                nu_eps = truncate(model.triplet.nu, driver.epsilon);
                cp_rate = nu_eps.total_mass;
                cp_jumps = std::make_unique<MeasureSampler>(nu_eps);
                compensated = open_ball_mean(nu_eps);
            }
            Eigen::VectorXd X = x;
            double next_jump = has_cp ? rng.exponential(cp_rate) : 2.0 * t;
            for (int k = 0; k < steps; ++k) {
                Eigen::VectorXd dz = -(model.triplet.b + compensated) * h;
                if (has_gauss) {
                    Eigen::VectorXd g(model.d);
                    for (int i = 0; i < model.d; ++i) g(i) = rng.gaussian();
                    dz += std::sqrt(h) * (sqrtQ * g);
                }
                if (st) {
                    if (model.d != 1)
                        throw PreconditionError("path stepping supports scalar stable drivers");
                    dz(0) += std::pow(st->scale * h, 1.0 / st->alpha) *
                             sample_stable(st->alpha, rng);
                }
                while (has_cp && next_jump <= (k + 1) * h) {
                    dz += cp_jumps->draw(rng);
                    next_jump += rng.exponential(cp_rate);
                }
                X = X + h * (model.A * X) + model.B * dz;
            }
            return X;
        }
    }
    throw ConfigError("unknown driver mode");
}

}  // namespace oucl
