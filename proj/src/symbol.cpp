#include "oucl/symbol.hpp"

#include <unsupported/Eigen/FFT>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "oucl/common.hpp"
#include "oucl/rng.hpp"
#include "oucl/spectral.hpp"

namespace oucl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Complex = std::complex<double>;

double gk_integrate(const std::function<double(double)>& f, double a, double b) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, a, b, 15, 1e-10, &err);
    if (!(err <= 1e-6 * (1.0 + std::abs(v))))
        throw AccuracyError("exponent quadrature did not converge");
    return v;
}

// closed form of int_a^b (1 - e^{iuz} + iuz*inside) h dz
Complex constant_piece_exponent(double u, double a, double b, double h, bool inside) {
    if (u == 0.0) return {0.0, 0.0};
    const double re = h * ((b - a) - (std::sin(u * b) - std::sin(u * a)) / u);
    double im = -h * (std::cos(u * a) - std::cos(u * b)) / u;
    if (inside) im += h * u * (b * b - a * a) / 2.0;
    return {re, im};
}

std::vector<double> split_points(double a, double b, std::initializer_list<double> cuts) {
    std::vector<double> pts{a, b};
    for (double c : cuts)
        if (c > a && c < b) pts.push_back(c);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

Complex density_exponent(const DensityMeasure& d, double u) {
    Complex out(0.0, 0.0);
    for (const auto& iv : d.support.intervals()) {
        const auto pts = split_points(iv.first, iv.second, {-1.0, 1.0, d.profile.center});
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double a = pts[i], b = pts[i + 1];
            const bool inside = std::abs(0.5 * (a + b)) < 1.0;
            if (d.profile.kind == DensityProfile::Kind::Constant) {
                out += constant_piece_exponent(u, a, b, d.profile.height, inside);
                continue;
            }
            if (u == 0.0) continue;
            const auto& rho = d.profile;
            out += Complex(
                gk_integrate([&](double z) { return (1.0 - std::cos(u * z)) * rho(z); }, a, b),
                gk_integrate(
                    [&](double z) {
                        return ((inside ? u * z : 0.0) - std::sin(u * z)) * rho(z);
                    },
                    a, b));
        }
    }
    return out;
}

Complex radial_piece_exponent(double c, double lo, double hi, double tail_index) {
    // int_lo^hi (1 - e^{irc} + irc*1_{r<1}) r^{-1-index} dr
    auto dens = [tail_index](double r) { return std::pow(r, -1.0 - tail_index); };
    Complex out(0.0, 0.0);
    for (auto piece : {std::pair<double, double>{lo, std::clamp(1.0, lo, hi)},
                       std::pair<double, double>{std::clamp(1.0, lo, hi), hi}}) {
        const double a = piece.first, b = piece.second;
        if (!(b > a)) continue;
        const bool inside = 0.5 * (a + std::min(b, 3.0)) < 1.0;
        out += Complex(
            gk_integrate([&](double r) { return (1.0 - std::cos(c * r)) * dens(r); }, a, b),
            gk_integrate(
                [&](double r) { return ((inside ? c * r : 0.0) - std::sin(c * r)) * dens(r); },
                a, b));
    }
    return out;
}

Complex spherical_exponent(const SphericalStableMeasure& sp, const Eigen::VectorXd& xi) {
    Complex out(0.0, 0.0);
    for (const auto& at : sp.atoms) {
        const double c = xi.dot(at.direction);
        Complex term = radial_piece_exponent(c, 0.0, sp.r0, sp.alpha);
        if (std::isfinite(sp.beta)) term += radial_piece_exponent(c, sp.r0, kInf, sp.beta);
        out += at.weight * term;
    }
    return out;
}

// s in (0,t) where |e^{sA} B z_j| crosses the unit sphere for some atom z_j;
// the compensator indicator of the time-integrated exponent jumps there.
std::vector<double> indicator_crossings(const OUModel& m, double t) {
    const auto* at = std::get_if<AtomicMeasure>(&m.triplet.nu.rep);
    if (!at || at->masses.empty() || t <= 0.0) return {};
    std::vector<double> out;
    const int scan = 256;
    std::vector<double> prev(at->locations.size());
    for (std::size_t j = 0; j < at->locations.size(); ++j)
        prev[j] = (m.B * at->locations[j]).norm() - 1.0;
    for (int i = 1; i <= scan; ++i) {
        const double s = t * i / scan;
        const Eigen::MatrixXd E = matrix_exponential(m.A, s);
        for (std::size_t j = 0; j < at->locations.size(); ++j) {
            const double v = (E * m.B * at->locations[j]).norm() - 1.0;
            if ((prev[j] < 0.0) != (v < 0.0)) {
                double lo = t * (i - 1) / scan, hi = s;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double vm =
                        (matrix_exponential(m.A, mid) * m.B * at->locations[j]).norm() - 1.0;
                    if ((vm < 0.0) == (prev[j] < 0.0))
                        lo = mid;
                    else
                        hi = mid;
                }
                out.push_back(0.5 * (lo + hi));
            }
            prev[j] = v;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Eigen::VectorXd> sphere_dirs(int n, int count) {
    std::vector<Eigen::VectorXd> dirs;
    if (n == 1) {
        Eigen::VectorXd p(1), q(1);
        p << 1.0;
        q << -1.0;
        return {p, q};
    }
    count = std::max(count, 4);
    if (n == 2) {
        for (int i = 0; i < count; ++i) {
            const double th = 2.0 * M_PI * i / count;
            Eigen::VectorXd v(2);
            v << std::cos(th), std::sin(th);
            dirs.push_back(v);
        }
        return dirs;
    }
    if (n == 3) {
        const double ga = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            Eigen::VectorXd v(3);
            v << r * std::cos(ga * i), r * std::sin(ga * i), z;
            dirs.push_back(v);
        }
        return dirs;
    }
    RngStream rng(0x5D1CE5u, static_cast<std::uint64_t>(n));
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd v(n);
        do {
            for (int k = 0; k < n; ++k) v[k] = rng.gaussian();
        } while (v.norm() == 0.0);
        dirs.push_back(v.normalized());
    }
    return dirs;
}

bool radial_monotone(const LevyTriplet& tr) {
    return std::holds_alternative<StableMeasure>(tr.nu.rep) || tr.nu.is_zero();
}

// Re Phi is even in xi, so suprema of the real part only need half the sphere.
std::vector<Eigen::VectorXd> real_part_dirs(int n, int count) {
    if (n == 1) {
        Eigen::VectorXd p(1);
        p << 1.0;
        return {p};
    }
    if (n == 2) {
        const int m = std::max(count / 2, 4);
        std::vector<Eigen::VectorXd> dirs;
        for (int i = 0; i < m; ++i) {
            const double th = M_PI * i / m;
            Eigen::VectorXd v(2);
            v << std::cos(th), std::sin(th);
            dirs.push_back(v);
        }
        return dirs;
    }
    return sphere_dirs(n, count);
}

// Fixed Gauss-Legendre panelization of s -> Phi(B^T e^{sA^T} xi) over [0, t],
// shared across a xi-lattice.  Panels are split at compensator crossings.
class PhiTEval {
public:
    PhiTEval(const OUModel& m, double t) : model_(m) {
        if (m.n == 1 && m.d == 1) {
            const auto* st = std::get_if<StableMeasure>(&m.triplet.nu.rep);
            if (st || m.triplet.nu.is_zero()) {
                scalar_fast_ = true;
                const double a = m.A(0, 0), Bc = m.B(0, 0);
                const double q = m.triplet.Q(0, 0), b = m.triplet.b(0);
                alpha_ = st ? st->alpha : 2.0;
                auto pw = [&](double p) {
                    return gk_integrate(
                        [&](double s) { return std::pow(std::abs(Bc * std::exp(a * s)), p); },
                        0.0, t);
                };
                c_stable_ = st ? st->scale * pw(st->alpha) : 0.0;
                c_gauss_ = 0.5 * q * pw(2.0);
                c_drift_ = b * gk_integrate(
                                   [&](double s) { return Bc * std::exp(a * s); }, 0.0, t);
                return;
            }
        }
        std::vector<double> edges{0.0};
        for (double c : indicator_crossings(m, t)) edges.push_back(c);
        edges.push_back(t);
        std::sort(edges.begin(), edges.end());
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            double a = edges[i];
            const double b = edges[i + 1];
            while (b - a > 1e-12) {
                const double c = std::min(b, a + 1.0);
                add_panel(a, c);
                a = c;
            }
        }
    }

    Complex operator()(const Eigen::VectorXd& xi) const {
        if (scalar_fast_) {
            const double u = xi(0);
            return {c_gauss_ * u * u + c_stable_ * std::pow(std::abs(u), alpha_),
                    c_drift_ * u};
        }
        Complex acc(0.0, 0.0);
        for (std::size_t q = 0; q < w_.size(); ++q)
            acc += w_[q] * characteristic_exponent(model_.triplet, M_[q] * xi);
        return acc;
    }

private:
    void add_panel(double a, double b) {
        using G = boost::math::quadrature::gauss<double, 30>;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
            const double xa = G::abscissa()[i];
            const double wa = G::weights()[i] * half;
            for (double node : {mid + half * xa, mid - half * xa}) {
                w_.push_back(wa);
                M_.push_back((matrix_exponential(model_.A, node) * model_.B).transpose());
                if (xa == 0.0) break;  // center node appears once
            }
        }
    }

    const OUModel& model_;
    std::vector<double> w_;
    std::vector<Eigen::MatrixXd> M_;
    bool scalar_fast_ = false;
    double alpha_ = 2.0, c_stable_ = 0.0, c_gauss_ = 0.0, c_drift_ = 0.0;
};

}  // namespace

std::complex<double> characteristic_exponent(const LevyTriplet& tr, const Eigen::VectorXd& xi) {
    if (xi.size() != tr.dim) throw ConfigError("frequency dimension does not match the triplet");
    Complex out(0.5 * xi.dot(tr.Q * xi), tr.b.dot(xi));
    if (const auto* at = std::get_if<AtomicMeasure>(&tr.nu.rep)) {
        for (std::size_t j = 0; j < at->masses.size(); ++j) {
            const double arg = xi.dot(at->locations[j]);
            Complex term(1.0 - std::cos(arg), -std::sin(arg));
            if (at->locations[j].norm() < 1.0) term += Complex(0.0, arg);
            out += at->masses[j] * term;
        }
    } else if (const auto* d = std::get_if<DensityMeasure>(&tr.nu.rep)) {
        out += density_exponent(*d, xi(0));
    } else if (const auto* st = std::get_if<StableMeasure>(&tr.nu.rep)) {
        out += Complex(st->scale * std::pow(xi.norm(), st->alpha), 0.0);
    } else if (const auto* sp = std::get_if<SphericalStableMeasure>(&tr.nu.rep)) {
        out += spherical_exponent(*sp, xi);
    }
    return out;
}

std::complex<double> pushforward_exponent(const OUModel& model, const Eigen::VectorXd& xi) {
    if (xi.size() != model.n) throw ConfigError("frequency dimension does not match the state");
    return characteristic_exponent(model.triplet, model.B.transpose() * xi);
}

std::complex<double> time_integrated_exponent(const OUModel& model, double t,
                                              const Eigen::VectorXd& xi) {
    if (xi.size() != model.n) throw ConfigError("frequency dimension does not match the state");
    if (t < 0.0) throw ConfigError("time must be nonnegative");
    if (t == 0.0) return {0.0, 0.0};
    auto at_s = [&](double s) {
        const Eigen::VectorXd eta =
            model.B.transpose() * (matrix_exponential(model.A, s).transpose() * xi);
        return characteristic_exponent(model.triplet, eta);
    };
    std::vector<double> edges{0.0};
    for (double c : indicator_crossings(model, t)) edges.push_back(c);
    edges.push_back(t);
    Complex out(0.0, 0.0);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i + 1] > edges[i])) continue;
        out += Complex(
            gk_integrate([&](double s) { return at_s(s).real(); }, edges[i], edges[i + 1]),
            gk_integrate([&](double s) { return at_s(s).imag(); }, edges[i], edges[i + 1]));
    }
    return out;
}

namespace {

// Real part only: the compensator term is purely imaginary, so the integrand
// is smooth in s and no crossing splits are needed.
double time_integrated_exponent_re(const OUModel& model, double t, const Eigen::VectorXd& xi) {
    auto at_s = [&](double s) {
        const Eigen::VectorXd eta =
            model.B.transpose() * (matrix_exponential(model.A, s).transpose() * xi);
        return characteristic_exponent(model.triplet, eta).real();
    };
    return gk_integrate(at_s, 0.0, t);
}

}  // namespace

LevyTriplet ou_pushforward_triplet(const OUModel& model, double t, int s_nodes) {
    if (model.triplet.Q.lpNorm<Eigen::Infinity>() > 1e-12)
        throw PreconditionError("marginal triplet extraction requires a purely non-Gaussian driver");
    if (t < 0.0) throw ConfigError("time must be nonnegative");
    const int n = model.n;
    if (t == 0.0)
        return LevyTriplet::make(Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n),
                                 LevyMeasure::zero(n));

    if (const auto* at = std::get_if<AtomicMeasure>(&model.triplet.nu.rep)) {
        std::vector<double> edges{0.0};
        for (double c : indicator_crossings(model, t)) edges.push_back(c);
        edges.push_back(t);

        using G = boost::math::quadrature::gauss<double, 30>;
        std::vector<std::pair<double, double>> nodes;  // (s, w)
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            double a = edges[i];
            const double b = edges[i + 1];
            const int chunks = std::max(1, static_cast<int>(std::ceil(
                                               (b - a) / std::max(1e-9, t / std::max(1, s_nodes / 30)))));
            for (int cidx = 0; cidx < chunks; ++cidx) {
                const double ca = a + (b - a) * cidx / chunks;
                const double cb = a + (b - a) * (cidx + 1) / chunks;
                const double mid = 0.5 * (ca + cb), half = 0.5 * (cb - ca);
                for (std::size_t q = 0; q < G::abscissa().size(); ++q) {
                    const double xa = G::abscissa()[q], wa = G::weights()[q] * half;
                    nodes.emplace_back(mid + half * xa, wa);
                    if (xa != 0.0) nodes.emplace_back(mid - half * xa, wa);
                }
            }
        }

        Eigen::VectorXd b_t = Eigen::VectorXd::Zero(n);
        std::vector<Eigen::VectorXd> locs;
        std::vector<double> masses;
        for (const auto& [s, w] : nodes) {
            const Eigen::MatrixXd E = matrix_exponential(model.A, s);
            b_t += w * (E * model.B * model.triplet.b);
            for (std::size_t j = 0; j < at->masses.size(); ++j) {
                const Eigen::VectorXd img = E * model.B * at->locations[j];
                const double in_before = at->locations[j].norm() < 1.0 ? 1.0 : 0.0;
                const double in_after = img.norm() < 1.0 ? 1.0 : 0.0;
                b_t += w * at->masses[j] * (in_before - in_after) * img;
                locs.push_back(img);
                masses.push_back(w * at->masses[j]);
            }
        }
        return LevyTriplet::make(Eigen::MatrixXd::Zero(n, n), b_t,
                                 LevyMeasure::atomic(std::move(locs), std::move(masses)));
    }

    if (const auto* st = std::get_if<StableMeasure>(&model.triplet.nu.rep)) {
        if (n != 1 || model.d != 1)
            throw PreconditionError(
                "power-tail marginal triplets are supported for scalar models only");
        const double a = model.A(0, 0), Bc = model.B(0, 0);
        const double scale_t =
            st->scale * gk_integrate(
                            [&](double s) {
                                return std::pow(std::abs(Bc * std::exp(a * s)), st->alpha);
                            },
                            0.0, t);
        Eigen::VectorXd b_t(1);
        b_t << model.triplet.b(0) *
                   gk_integrate([&](double s) { return Bc * std::exp(a * s); }, 0.0, t);
        return LevyTriplet::make(Eigen::MatrixXd::Zero(1, 1), b_t,
                                 LevyMeasure::stable(st->alpha, scale_t, 1));
    }
    throw PreconditionError(
        "marginal triplet extraction supports atomic and scalar power-tail drivers");
}

double phi_sup(const OUModel& model, double t, double rho, int sphere_samples) {
    if (!(rho > 0.0)) throw ConfigError("radius must be positive");
    if (!(t > 0.0)) throw ConfigError("time must be positive (or the static flag)");
    const bool static_phi = std::isinf(t);
    const auto dirs = real_part_dirs(model.n, sphere_samples);
    std::vector<double> radii;
    if (radial_monotone(model.triplet))
        radii.push_back(rho);
    else
        for (int j = 1; j <= 32; ++j) radii.push_back(rho * j / 32.0);
    double sup = 0.0;
    for (const auto& dir : dirs)
        for (double r : radii) {
            const Eigen::VectorXd xi = r * dir;
            const double v = static_phi ? pushforward_exponent(model, xi).real()
                                        : time_integrated_exponent_re(model, t, xi);
            sup = std::max(sup, v);
        }
    return sup;
}

double phi_inverse(const OUModel& model, double t, double level, int sphere_samples) {
    if (!(level > 0.0)) throw ConfigError("level must be positive");
    const bool static_phi = std::isinf(t);
    const auto dirs = real_part_dirs(model.n, sphere_samples);
    const bool monotone = radial_monotone(model.triplet);

    // Radius evaluations are cached: since the ball sup is monotone in rho,
    // phi(rho) is the running max of every evaluated radius below rho.
    std::map<double, double> cache;
    auto eval = [&](double r) {
        const auto it = cache.find(r);
        if (it != cache.end()) return it->second;
        double m = 0.0;
        for (const auto& dir : dirs) {
            const Eigen::VectorXd xi = r * dir;
            m = std::max(m, static_phi ? pushforward_exponent(model, xi).real()
                                       : time_integrated_exponent_re(model, t, xi));
        }
        cache.emplace(r, m);
        return m;
    };
    auto phi = [&](double rho) {
        double s = eval(rho);
        if (!monotone)
            for (auto it = cache.begin(); it != cache.end() && it->first <= rho; ++it)
                s = std::max(s, it->second);
        return s;
    };

    double hi = 1.0;
    while (phi(hi) < level) {
        hi *= 2.0;
        if (hi > 1e12)
            throw AccuracyError(
                "level not reached below radius 1e12; the integrated symbol appears bounded");
    }
    double lo = hi / 2.0;
    while (lo > 1e-15 && phi(lo) >= level) {
        hi = lo;
        lo /= 2.0;
    }
    if (!monotone)
        for (int j = 1; j < 24; ++j) eval(hi * j / 24.0);
    for (int it = 0; it < 80 && hi - lo > 1e-8 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) >= level ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

ConditionReport check_conditions(const OUModel& model, double t0, double xi_range) {
    if (!(t0 > 0.0)) throw ConfigError("probe time must be positive");
    if (!(xi_range > 1.0)) throw ConfigError("frequency range must exceed 1");
    ConditionReport rep;
    rep.growth_threshold = 2.0 * model.n + 2.0;

    const auto dirs = real_part_dirs(model.n, 8);
    auto max_re = [&](double t, double r) {
        double m = 0.0;
        for (const auto& dir : dirs)
            m = std::max(m, time_integrated_exponent_re(model, t, r * dir));
        return m;
    };

    const int pts = 48;
    const double r_lo = std::max(1e-2, xi_range * 1e-4);
    rep.growth_ratio_min = kInf;
    for (int i = 0; i < pts; ++i) {
        const double r = r_lo * std::pow(xi_range / r_lo, double(i) / (pts - 1));
        const double ratio = max_re(t0, r) / std::log1p(r);
        rep.ratio_grid.emplace_back(r, ratio);
        if (r >= xi_range / 10.0) rep.growth_ratio_min = std::min(rep.growth_ratio_min, ratio);
    }
    rep.growth_ok = rep.growth_ratio_min > rep.growth_threshold;

    double prev = 0.0;
    for (double T : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
        const double v = max_re(T, 1.0);
        rep.horizon_values.emplace_back(T, v);
        rep.horizon_increment = v - prev;
        prev = v;
    }
    rep.time_integral_bounded = rep.horizon_increment <= 1e-4 * (1.0 + prev);
    rep.smoothing_regime = rep.growth_ok && rep.time_integral_bounded;
    return rep;
}

namespace {

// Smallest |xi| with Re Phi_t >= 40 along the first axis (e^{-40} < 5e-18).
double integrable_cutoff(const PhiTEval& phi, int n) {
    double xi = 1.0;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int guard = 0; guard < 46; ++guard) {
        v(0) = xi;
        if (phi(v).real() >= 40.0) return xi;
        xi *= 2.0;
    }
    throw PreconditionError(
        "the time-t characteristic function does not decay; no density is available");
}

}  // namespace

std::vector<double> density_via_fourier(const OUModel& model, double t, const DensityGrid& grid) {
    if (model.n != 1)
        throw PreconditionError("lattice density inversion is one-dimensional here");
    if (!(t > 0.0)) throw ConfigError("time must be positive");
    if (grid.count < 1 || !(grid.dx > 0.0) || !std::isfinite(grid.x0))
        throw ConfigError("bad lattice specification");

    const PhiTEval phi(model, t);
    const double cutoff = 1.25 * integrable_cutoff(phi, 1);

    int refine = 0;
    while (M_PI / (grid.dx / double(1 << refine)) < cutoff && refine < 24) ++refine;
    const double dxi_ = grid.dx / double(1 << refine);
    const double x_lo = grid.x0, x_hi = grid.x0 + grid.dx * (grid.count - 1);
    const double W = std::max({std::abs(x_lo), std::abs(x_hi), x_hi - x_lo, 1.0});

    std::size_t N = std::size_t(grid.count) << refine;
    if (!grid.wrap) {
        // power-of-two lengths: the fft falls back to a quadratic butterfly on
        // large prime factors, and the output lattice does not constrain N
        std::size_t p2 = 1;
        while (p2 < N || p2 * dxi_ < 8.0 * W) p2 <<= 1;
        N = p2;
    }

    Eigen::FFT<double> fft;
    std::vector<double> dens;
    double xstart = 0.0;
    for (int attempt = 0;; ++attempt) {
        const double L = N * dxi_;
        const double dxi = 2.0 * M_PI / L;
        if (grid.wrap) {
            xstart = x_lo;
        } else {
            const double xc = 0.5 * (x_lo + x_hi);
            xstart = x_lo - std::floor((0.5 * L - (xc - x_lo)) / dxi_) * dxi_;
        }

        std::vector<Complex> spec(N);
        Eigen::VectorXd v(1);
        std::vector<Complex> psi(N / 2 + 1);
        for (std::size_t k = 0; k <= N / 2; ++k) {
            v(0) = k * dxi;
            const Complex e = phi(v);
            psi[k] = std::exp(-e.real()) * Complex(std::cos(e.imag()), -std::sin(e.imag()));
        }
        double top_mag = 0.0;
        for (std::size_t k = N / 2 - N / 20; k <= N / 2; ++k)
            top_mag = std::max(top_mag, std::abs(psi[k]));
        if (top_mag > 1e-12)
            throw PreconditionError(
                "the time-t characteristic function does not decay; no density is available");
        for (std::size_t m = 0; m < N; ++m) {
            const long k = m <= N / 2 ? long(m) : long(m) - long(N);
            const Complex p = k >= 0 ? psi[k] : std::conj(psi[-k]);
            const double ph = -xstart * k * dxi;
            spec[m] = p * Complex(std::cos(ph), std::sin(ph));
        }
        std::vector<Complex> out;
        fft.fwd(out, spec);
        dens.assign(N, 0.0);
        for (std::size_t j = 0; j < N; ++j) dens[j] = out[j].real() / L;
        if (grid.wrap) break;

        double edge = 0.0;
        for (std::size_t j = 0; j < 16; ++j)
            edge = std::max({edge, std::abs(dens[j]), std::abs(dens[N - 1 - j])});
        if (edge <= 1e-7 || N >= (std::size_t(1) << 21)) {
            if (edge > 1e-6)
                throw AccuracyError("density mass could not be localized in the window");
            break;
        }
        N <<= 1;
    }

    std::vector<double> out(grid.count);
    for (int j = 0; j < grid.count; ++j) {
        const double x = grid.x0 + j * grid.dx;
        const auto idx = static_cast<std::size_t>(std::llround((x - xstart) / dxi_));
        double val = dens.at(idx);
        if (val < -1e-8) throw AccuracyError("density inversion produced a negative value");
        out[j] = std::max(val, 0.0);
    }
    return out;
}

Eigen::MatrixXd density_via_fourier_2d(const OUModel& model, double t, const DensityGrid& gx,
                                       const DensityGrid& gy) {
    if (model.n != 2) throw PreconditionError("tensor lattice inversion needs a planar state");
    if (!(t > 0.0)) throw ConfigError("time must be positive");
    if (gx.count < 1 || gy.count < 1 || !(gx.dx > 0.0) || !(gy.dx > 0.0))
        throw ConfigError("bad lattice specification");
    const PhiTEval phi(model, t);

    double cutoff = 0.0;
    for (const auto& dir : sphere_dirs(2, 8)) {
        double xi = 1.0;
        int guard = 0;
        while (phi(xi * dir).real() < 40.0) {
            xi *= 2.0;
            if (++guard > 40)
                throw PreconditionError(
                    "the time-t characteristic function does not decay; no density is available");
        }
        cutoff = std::max(cutoff, xi);
    }
    cutoff *= 1.25;

    auto plan = [&](const DensityGrid& g) {
        int refine = 0;
        while (M_PI / (g.dx / double(1 << refine)) < cutoff && refine < 16) ++refine;
        const double dxr = g.dx / double(1 << refine);
        const double lo = g.x0, hi = g.x0 + g.dx * (g.count - 1);
        const double W = std::max({std::abs(lo), std::abs(hi), hi - lo, 1.0});
        std::size_t N = 1;
        while (N * dxr < 8.0 * W || N < std::size_t(g.count) << refine) N <<= 1;
        N = std::min<std::size_t>(N, 1 << 11);
        return std::tuple<int, double, std::size_t>(refine, dxr, N);
    };
    const auto [rx, dxr, Nx] = plan(gx);
    const auto [ry, dyr, Ny] = plan(gy);
    const double Lx = Nx * dxr, Ly = Ny * dyr;
    const double dxix = 2.0 * M_PI / Lx, dxiy = 2.0 * M_PI / Ly;
    const double xstart =
        gx.x0 - std::floor((0.5 * Lx - (0.5 * (gx.dx * (gx.count - 1))) ) / dxr) * dxr;
    const double ystart =
        gy.x0 - std::floor((0.5 * Ly - (0.5 * (gy.dx * (gy.count - 1))) ) / dyr) * dyr;

    Eigen::MatrixXcd spec(Nx, Ny);
    Eigen::VectorXd v(2);
    for (std::size_t mx = 0; mx < Nx; ++mx) {
        const long kx = mx <= Nx / 2 ? long(mx) : long(mx) - long(Nx);
        for (std::size_t my = 0; my < Ny; ++my) {
            const long ky = my <= Ny / 2 ? long(my) : long(my) - long(Ny);
            v << kx * dxix, ky * dxiy;
            const Complex e = phi(v);
            const double ph = -(xstart * kx * dxix + ystart * ky * dxiy) - e.imag();
            spec(mx, my) = std::exp(-e.real()) * Complex(std::cos(ph), std::sin(ph));
        }
    }
    Eigen::FFT<double> fft;
    for (std::size_t my = 0; my < Ny; ++my) {
        std::vector<Complex> col(Nx), out;
        for (std::size_t mx = 0; mx < Nx; ++mx) col[mx] = spec(mx, my);
        fft.fwd(out, col);
        for (std::size_t mx = 0; mx < Nx; ++mx) spec(mx, my) = out[mx];
    }
    for (std::size_t mx = 0; mx < Nx; ++mx) {
        std::vector<Complex> row(Ny), out;
        for (std::size_t my = 0; my < Ny; ++my) row[my] = spec(mx, my);
        fft.fwd(out, row);
        for (std::size_t my = 0; my < Ny; ++my) spec(mx, my) = out[my];
    }

    Eigen::MatrixXd result(gx.count, gy.count);
    for (int j = 0; j < gx.count; ++j)
        for (int l = 0; l < gy.count; ++l) {
            const auto ix = static_cast<std::size_t>(
                std::llround((gx.x0 + j * gx.dx - xstart) / dxr));
            const auto iy = static_cast<std::size_t>(
                std::llround((gy.x0 + l * gy.dx - ystart) / dyr));
            if (ix >= Nx || iy >= Ny) throw AccuracyError("lattice window too small");
            result(j, l) = std::max(spec(ix, iy).real() / (Lx * Ly), 0.0);
        }
    return result;
}

BoundReport bound_report(const OUModel& model, double t, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y, double constant) {
    if (!(t > 0.0)) throw ConfigError("time must be positive");
    if (x.size() != model.n || y.size() != model.n)
        throw ConfigError("state dimension mismatch");
    BoundReport rep;
    rep.t = t;
    rep.conditions = check_conditions(model, std::min(t, 1.0), 1e4);
    rep.phi_t_inverse = phi_inverse(model, t, 1.0);
    const Eigen::MatrixXd E = matrix_exponential(model.A, t);
    rep.tv_bound = constant * (E * (x - y)).norm() * rep.phi_t_inverse;
    rep.gradient_bound_small_t = constant * phi_inverse(model, kInf, 1.0 / std::min(t, 1.0));
    rep.gradient_bound_large_t = constant * operator_norm(E) * rep.phi_t_inverse;
    return rep;
}

}  // namespace oucl
