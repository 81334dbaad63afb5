#include "oucl/levy_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "oucl/common.hpp"
#include "oucl/rng.hpp"

namespace oucl {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const DensityProfile& p, double z, double nudge) {
    double v = p(z);
    if (!std::isfinite(v)) v = p(z + nudge);
    return v;
}

// Antiderivative of |z - c|^p on either side of c.
double power_antiderivative(double z, double c, double p) {
    const double u = z - c;
    const double s = u < 0 ? -1.0 : 1.0;
    if (p == -1.0) return s * std::log(std::abs(u));
    return s * std::pow(std::abs(u), p + 1.0) / (p + 1.0);
}

double integrate_profile(const DensityProfile& prof, double a, double b, int cells) {
    if (b <= a) return 0.0;
    switch (prof.kind) {
        case DensityProfile::Kind::Constant:
            return prof.height * (b - a);
        case DensityProfile::Kind::Power: {
            if (prof.exponent <= -1.0 && a <= prof.center && prof.center <= b)
                return kInf;
            return prof.coeff *
                   (power_antiderivative(b, prof.center, prof.exponent) -
                    power_antiderivative(a, prof.center, prof.exponent));
        }
        case DensityProfile::Kind::Callable: {
            const int n = std::max(4, cells);
            const double h = (b - a) / n;
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += safe_eval(prof, a + (i + 0.5) * h, h / 4);
            return s * h;
        }
    }
    return 0.0;
}

const AtomicMeasure* as_atomic(const FiniteMeasure& m) {
    return std::get_if<AtomicMeasure>(&m.rep);
}
const DensityMeasure* as_density(const FiniteMeasure& m) {
    return std::get_if<DensityMeasure>(&m.rep);
}

// Segments of support(m1) ∪ support(m2) split at every interval endpoint of
// either union; all L1-type functionals of the pair are integrated on these.
std::vector<std::pair<double, double>> refined_segments(const IntervalUnion& u1,
                                                        const IntervalUnion& u2) {
    std::vector<double> pts;
    for (const auto& iv : u1.intervals()) {
        pts.push_back(iv.first);
        pts.push_back(iv.second);
    }
    for (const auto& iv : u2.intervals()) {
        pts.push_back(iv.first);
        pts.push_back(iv.second);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<std::pair<double, double>> segs;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        if (a >= b) continue;
        const double mid = 0.5 * (a + b);
        if (u1.contains(mid) || u2.contains(mid)) segs.emplace_back(a, b);
    }
    return segs;
}

double pair_functional(const DensityMeasure& m1, const DensityMeasure& m2,
                       double (*combine)(double, double)) {
    const bool both_const = m1.profile.kind == DensityProfile::Kind::Constant &&
                            m2.profile.kind == DensityProfile::Kind::Constant;
    const auto segs = refined_segments(m1.support, m2.support);
    double total_len = 0.0;
    for (const auto& s : segs) total_len += s.second - s.first;
    const int total_cells = std::max(m1.quad_cells, m2.quad_cells);
    double out = 0.0;
    for (const auto& s : segs) {
        const double a = s.first, b = s.second;
        const double mid = 0.5 * (a + b);
        const bool in1 = m1.support.contains(mid);
        const bool in2 = m2.support.contains(mid);
        int n = 1;
        if (!both_const)
            n = std::max(4, static_cast<int>(std::ceil(total_cells * (b - a) / total_len)));
        const double h = (b - a) / n;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = a + (i + 0.5) * h;
            const double f = in1 ? safe_eval(m1.profile, z, h / 4) : 0.0;
            const double g = in2 ? safe_eval(m2.profile, z, h / 4) : 0.0;
            acc += combine(f, g);
        }
        out += acc * h;
    }
    return out;
}

double atom_pair_reduce(const AtomicMeasure& a, const AtomicMeasure& b,
                        double (*combine)(double, double)) {
    // combine(ma, mb) over matched atoms plus combine with 0 for unmatched.
    constexpr double kTol = 1e-12;
    std::vector<bool> used(b.masses.size(), false);
    double out = 0.0;
    for (std::size_t i = 0; i < a.masses.size(); ++i) {
        double mb = 0.0;
        for (std::size_t j = 0; j < b.masses.size(); ++j) {
            if (used[j]) continue;
            if ((a.locations[i] - b.locations[j]).lpNorm<Eigen::Infinity>() <= kTol) {
                mb = b.masses[j];
                used[j] = true;
                break;
            }
        }
        out += combine(a.masses[i], mb);
    }
    for (std::size_t j = 0; j < b.masses.size(); ++j)
        if (!used[j]) out += combine(0.0, b.masses[j]);
    return out;
}

void validate_levy(const LevyMeasure& nu) {
    if (const auto* a = std::get_if<AtomicMeasure>(&nu.rep)) {
        if (a->locations.size() != a->masses.size())
            throw ConfigError("atom locations and masses differ in length");
        for (std::size_t i = 0; i < a->masses.size(); ++i) {
            if (!(a->masses[i] > 0)) throw ConfigError("atom masses must be positive");
            if (a->locations[i].norm() == 0.0)
                throw ConfigError("measure must not charge the origin");
        }
    } else if (const auto* d = std::get_if<DensityMeasure>(&nu.rep)) {
        if (d->profile.kind == DensityProfile::Kind::Power) {
            const bool at_center = d->support.contains(d->profile.center);
            if (d->profile.exponent <= -1.0 && at_center && d->profile.center != 0.0)
                throw ConfigError("non-integrable density singularity away from the origin");
            if (d->profile.exponent <= -3.0 && at_center)
                throw ConfigError("density fails the small-jump square-integrability test");
        }
    } else if (const auto* s = std::get_if<StableMeasure>(&nu.rep)) {
        if (!(s->alpha > 0.0 && s->alpha < 2.0))
            throw ConfigError("stable index must lie in (0,2)");
        if (!(s->scale > 0.0)) throw ConfigError("stable scale must be positive");
    } else if (const auto* sp = std::get_if<SphericalStableMeasure>(&nu.rep)) {
        if (!(sp->alpha > 0.0 && sp->alpha < 2.0))
            throw ConfigError("spherical radial index must lie in (0,2)");
        if (!(sp->beta > 0.0)) throw ConfigError("spherical tail index must be positive");
        if (!(sp->r0 > 0.0)) throw ConfigError("spherical crossover radius must be positive");
        for (const auto& at : sp->atoms)
            if (!(at.weight > 0.0)) throw ConfigError("spherical weights must be positive");
    }
}

}  // namespace

double DensityProfile::operator()(double z) const {
    switch (kind) {
        case Kind::Constant:
            return height;
        case Kind::Power:
            return coeff * std::pow(std::abs(z - center), exponent);
        case Kind::Callable:
            return fn(z);
    }
    return 0.0;
}

DensityProfile DensityProfile::constant(double h) {
    DensityProfile p;
    p.kind = Kind::Constant;
    p.height = h;
    return p;
}

DensityProfile DensityProfile::power(double center, double exponent, double coeff) {
    DensityProfile p;
    p.kind = Kind::Power;
    p.center = center;
    p.exponent = exponent;
    p.coeff = coeff;
    return p;
}

DensityProfile DensityProfile::callable(std::function<double(double)> f) {
    DensityProfile p;
    p.kind = Kind::Callable;
    p.fn = std::move(f);
    return p;
}

LevyMeasure LevyMeasure::atomic(std::vector<Eigen::VectorXd> locs, std::vector<double> masses) {
    LevyMeasure nu;
    const int d = locs.empty() ? 1 : static_cast<int>(locs.front().size());
    nu.rep = AtomicMeasure{std::move(locs), std::move(masses)};
    nu.dim = d;
    validate_levy(nu);
    return nu;
}

LevyMeasure LevyMeasure::atomic1d(const std::vector<double>& locs,
                                  const std::vector<double>& masses) {
    std::vector<Eigen::VectorXd> v;
    v.reserve(locs.size());
    for (double z : locs) {
        Eigen::VectorXd x(1);
        x << z;
        v.push_back(x);
    }
    return atomic(std::move(v), masses);
}

LevyMeasure LevyMeasure::density(IntervalUnion support, DensityProfile profile, int quad_cells) {
    LevyMeasure nu;
    nu.rep = DensityMeasure{std::move(support), std::move(profile), quad_cells};
    nu.dim = 1;
    validate_levy(nu);
    return nu;
}

LevyMeasure LevyMeasure::stable(double alpha, double scale, int dim) {
    LevyMeasure nu;
    nu.rep = StableMeasure{alpha, scale, dim};
    nu.dim = dim;
    validate_levy(nu);
    return nu;
}

LevyMeasure LevyMeasure::spherical(double alpha, double beta, double r0,
                                   std::vector<SphericalAtom> atoms) {
    LevyMeasure nu;
    const int d = atoms.empty() ? 1 : static_cast<int>(atoms.front().direction.size());
    for (auto& a : atoms) a.direction.normalize();
    nu.rep = SphericalStableMeasure{alpha, beta, r0, std::move(atoms), d};
    nu.dim = d;
    validate_levy(nu);
    return nu;
}

LevyMeasure LevyMeasure::zero(int dim) {
    LevyMeasure nu;
    nu.rep = AtomicMeasure{{}, {}};
    nu.dim = dim;
    return nu;
}

bool LevyMeasure::is_zero() const {
    const auto* a = std::get_if<AtomicMeasure>(&rep);
    return a != nullptr && a->masses.empty();
}

bool LevyMeasure::finite_total_mass() const {
    if (std::holds_alternative<AtomicMeasure>(rep)) return true;
    if (const auto* d = std::get_if<DensityMeasure>(&rep)) {
        if (d->profile.kind == DensityProfile::Kind::Power && d->profile.exponent <= -1.0 &&
            d->support.contains(d->profile.center))
            return false;
        return true;
    }
    return false;  // stable and spherical tails at the origin are infinite
}

double stable_density_constant(double alpha, int dim) {
    // Normalization of the |z|^{-d-alpha} kernel whose exponent is |xi|^alpha.
    return std::pow(4.0, alpha / 2.0) * std::tgamma((dim + alpha) / 2.0) /
           (std::pow(kPi, dim / 2.0) * std::abs(std::tgamma(-alpha / 2.0)));
}

double surface_area_unit_sphere(int dim) {
    return 2.0 * std::pow(kPi, dim / 2.0) / std::tgamma(dim / 2.0);
}

FiniteMeasure truncate(const LevyMeasure& nu, double eps) {
    if (!(eps > 0.0)) throw ConfigError("truncation radius must be positive");
    FiniteMeasure out;
    out.dim = nu.dim;
    if (const auto* a = std::get_if<AtomicMeasure>(&nu.rep)) {
        out.rep = *a;
        out.total_mass = 0.0;
        for (double m : a->masses) out.total_mass += m;
        return out;
    }
    if (const auto* d = std::get_if<DensityMeasure>(&nu.rep)) {
        DensityMeasure dm = *d;
        if (!nu.finite_total_mass()) {
            dm.support = dm.support.subtract_open(-eps, eps);
            out.trunc_radius = eps;
        }
        out.rep = dm;
        out.total_mass = density_total_mass(dm);
        if (!std::isfinite(out.total_mass))
            throw AccuracyError("density mass did not converge after truncation");
        return out;
    }
    if (const auto* s = std::get_if<StableMeasure>(&nu.rep)) {
        out.rep = *s;
        out.trunc_radius = eps;
        out.total_mass = s->scale * stable_density_constant(s->alpha, s->dim) *
                         surface_area_unit_sphere(s->dim) * std::pow(eps, -s->alpha) / s->alpha;
        return out;
    }
    const auto& sp = std::get<SphericalStableMeasure>(nu.rep);
    out.rep = sp;
    out.trunc_radius = eps;
    double radial = 0.0;
    if (eps < sp.r0)
        radial += (std::pow(eps, -sp.alpha) - std::pow(sp.r0, -sp.alpha)) / sp.alpha;
    if (std::isfinite(sp.beta)) radial += std::pow(std::max(eps, sp.r0), -sp.beta) / sp.beta;
    double wsum = 0.0;
    for (const auto& at : sp.atoms) wsum += at.weight;
    out.total_mass = wsum * radial;
    return out;
}

FiniteMeasure normalize(const FiniteMeasure& mu) {
    if (!(mu.total_mass > 0.0)) throw PreconditionError("cannot normalize a null measure");
    FiniteMeasure out = mu;
    const double c = 1.0 / mu.total_mass;
    if (auto* a = std::get_if<AtomicMeasure>(&out.rep)) {
        for (double& m : a->masses) m *= c;
    } else if (auto* d = std::get_if<DensityMeasure>(&out.rep)) {
        switch (d->profile.kind) {
            case DensityProfile::Kind::Constant:
                d->profile.height *= c;
                break;
            case DensityProfile::Kind::Power:
                d->profile.coeff *= c;
                break;
            case DensityProfile::Kind::Callable: {
                auto f = d->profile.fn;
                d->profile.fn = [f, c](double z) { return c * f(z); };
                break;
            }
        }
    } else if (auto* s = std::get_if<StableMeasure>(&out.rep)) {
        s->scale *= c;
    } else if (auto* sp = std::get_if<SphericalStableMeasure>(&out.rep)) {
        for (auto& at : sp->atoms) at.weight *= c;
    }
    out.total_mass = 1.0;
    return out;
}

FiniteMeasure shift_measure(const FiniteMeasure& mu, const Eigen::VectorXd& a) {
    FiniteMeasure out = mu;
    if (auto* at = std::get_if<AtomicMeasure>(&out.rep)) {
        for (auto& loc : at->locations) loc += a;
        return out;
    }
    if (auto* d = std::get_if<DensityMeasure>(&out.rep)) {
        if (a.size() != 1) throw PreconditionError("density measures are one-dimensional");
        const double s = a[0];
        d->support = d->support.shifted(s);
        switch (d->profile.kind) {
            case DensityProfile::Kind::Constant:
                break;
            case DensityProfile::Kind::Power:
                d->profile.center += s;
                break;
            case DensityProfile::Kind::Callable: {
                auto f = d->profile.fn;
                d->profile.fn = [f, s](double z) { return f(z - s); };
                break;
            }
        }
        return out;
    }
    throw PreconditionError("shift is only defined for atomic and density representations");
}

FiniteMeasure shift_measure1d(const FiniteMeasure& mu, double a) {
    Eigen::VectorXd v(1);
    v << a;
    return shift_measure(mu, v);
}

double overlap_mass(const FiniteMeasure& mu, const FiniteMeasure& nu) {
    if (mu.dim != nu.dim) throw PreconditionError("dimension mismatch in overlap");
    if (const auto* a = as_atomic(mu)) {
        const auto* b = as_atomic(nu);
        if (!b) throw PreconditionError("overlap requires comparable representations");
        return atom_pair_reduce(*a, *b, [](double x, double y) { return std::min(x, y); });
    }
    if (const auto* d1 = as_density(mu)) {
        const auto* d2 = as_density(nu);
        if (!d2) throw PreconditionError("overlap requires comparable representations");
        if (d1->profile.kind == DensityProfile::Kind::Constant &&
            d2->profile.kind == DensityProfile::Kind::Constant) {
            return std::min(d1->profile.height, d2->profile.height) *
                   d1->support.intersect(d2->support).total_length();
        }
        return pair_functional(*d1, *d2, [](double x, double y) { return std::min(x, y); });
    }
    throw PreconditionError("overlap requires comparable representations");
}

double variation_distance(const FiniteMeasure& mu, const FiniteMeasure& nu) {
    if (mu.dim != nu.dim) throw PreconditionError("dimension mismatch in variation distance");
    if (const auto* a = as_atomic(mu)) {
        const auto* b = as_atomic(nu);
        if (!b) throw PreconditionError("variation distance requires comparable representations");
        return atom_pair_reduce(*a, *b, [](double x, double y) { return std::abs(x - y); });
    }
    if (const auto* d1 = as_density(mu)) {
        const auto* d2 = as_density(nu);
        if (!d2) throw PreconditionError("variation distance requires comparable representations");
        return pair_functional(*d1, *d2, [](double x, double y) { return std::abs(x - y); });
    }
    throw PreconditionError("variation distance requires comparable representations");
}

static std::vector<Eigen::VectorXd> shift_grid_points(int dim, double delta, int shift_grid) {
    if (shift_grid < 3) shift_grid = 3;
    if (shift_grid % 2 == 0) ++shift_grid;  // keep 0 on the grid
    std::vector<Eigen::VectorXd> pts;
    if (dim == 1) {
        for (int i = 0; i < shift_grid; ++i) {
            Eigen::VectorXd z(1);
            z << -delta + 2.0 * delta * i / (shift_grid - 1);
            pts.push_back(z);
        }
        return pts;
    }
    if (dim == 2) {
        for (int i = 0; i < shift_grid; ++i)
            for (int j = 0; j < shift_grid; ++j) {
                Eigen::VectorXd z(2);
                z << -delta + 2.0 * delta * i / (shift_grid - 1),
                    -delta + 2.0 * delta * j / (shift_grid - 1);
                if (z.norm() <= delta + 1e-15) pts.push_back(z);
            }
        return pts;
    }
    throw PreconditionError("shift grids are supported in dimensions 1 and 2");
}

OverlapCertificate shifted_overlap_certificate(const FiniteMeasure& nu_eps, double delta,
                                               int shift_grid) {
    if (!(delta > 0.0)) throw ConfigError("shift radius must be positive");
    OverlapCertificate cert;
    cert.delta = delta;
    cert.shift_grid = shift_grid;
    double best = kInf;
    double arg = 0.0;
    for (const auto& z : shift_grid_points(nu_eps.dim, delta, shift_grid)) {
        const double v = overlap_mass(nu_eps, shift_measure(nu_eps, z));
        if (v < best) {
            best = v;
            arg = z.norm();
        }
    }
    cert.grid_min = best;
    cert.argmin_shift = arg;
    if (const auto* d = as_density(nu_eps)) {
        const double spacing = 2.0 * delta / (std::max(3, shift_grid | 1) - 1);
        cert.lipschitz_slack = profile_total_variation(*d) * 0.5 * spacing;
    }
    return cert;
}

double shifted_overlap_infimum(const FiniteMeasure& nu_eps, double delta, int shift_grid) {
    return shifted_overlap_certificate(nu_eps, delta, shift_grid).grid_min;
}

double density_total_mass(const DensityMeasure& m) {
    double s = 0.0;
    for (const auto& iv : m.support.intervals())
        s += integrate_profile(m.profile, iv.first, iv.second, m.quad_cells);
    return s;
}

double density_value(const FiniteMeasure& mu, double z) {
    const auto* d = as_density(mu);
    if (!d) throw PreconditionError("density_value requires a density representation");
    if (!d->support.contains(z)) return 0.0;
    return d->profile(z);
}

namespace {

// Antiderivative of z * |z - c|^p.
double first_moment_antiderivative(double z, double c, double p) {
    const double u = z - c;
    const double au = std::abs(u);
    const double head = p == -2.0 ? std::log(au) : std::pow(au, p + 2.0) / (p + 2.0);
    return head + c * power_antiderivative(z, c, p);
}

double integrate_profile_z(const DensityProfile& prof, double a, double b, int cells) {
    if (b <= a) return 0.0;
    switch (prof.kind) {
        case DensityProfile::Kind::Constant:
            return prof.height * 0.5 * (b * b - a * a);
        case DensityProfile::Kind::Power:
            if (prof.exponent <= -1.0 && a <= prof.center && prof.center <= b)
                throw PreconditionError("first moment diverges at the profile center");
            return prof.coeff * (first_moment_antiderivative(b, prof.center, prof.exponent) -
                                 first_moment_antiderivative(a, prof.center, prof.exponent));
        case DensityProfile::Kind::Callable: {
            const int n = std::max(4, cells);
            const double h = (b - a) / n;
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                const double z = a + (i + 0.5) * h;
                s += z * safe_eval(prof, z, h / 4);
            }
            return s * h;
        }
    }
    return 0.0;
}

// Integral of s * s^{-1-alpha} over [lo, hi].
double radial_first_moment(double lo, double hi, double alpha) {
    if (hi <= lo) return 0.0;
    if (alpha == 1.0) return std::log(hi / lo);
    return (std::pow(hi, 1.0 - alpha) - std::pow(lo, 1.0 - alpha)) / (1.0 - alpha);
}

}  // namespace

Eigen::VectorXd open_ball_mean(const FiniteMeasure& mu) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(mu.dim);
    if (const auto* a = std::get_if<AtomicMeasure>(&mu.rep)) {
        for (std::size_t i = 0; i < a->locations.size(); ++i)
            if (a->locations[i].norm() < 1.0) out += a->masses[i] * a->locations[i];
        return out;
    }
    if (const auto* d = std::get_if<DensityMeasure>(&mu.rep)) {
        const IntervalUnion ball = d->support.intersect(IntervalUnion({{-1.0, 1.0}}));
        double m1 = 0.0;
        for (const auto& iv : ball.intervals())
            m1 += integrate_profile_z(d->profile, iv.first, iv.second, d->quad_cells);
        out(0) = m1;
        return out;
    }
    if (std::get_if<StableMeasure>(&mu.rep)) return out;  // rotationally symmetric
    const auto& sp = std::get<SphericalStableMeasure>(mu.rep);
    const double lo = std::max(mu.trunc_radius, 0.0);
    if (lo >= 1.0) return out;
    if (lo <= 0.0 && sp.alpha >= 1.0)
        throw PreconditionError("untruncated radial first moment diverges at the origin");
    double radial = radial_first_moment(lo, std::min(1.0, sp.r0), sp.alpha);
    if (sp.r0 < 1.0 && std::isfinite(sp.beta))
        radial += radial_first_moment(std::max(lo, sp.r0), 1.0, sp.beta);
    for (const SphericalAtom& atom : sp.atoms) out += atom.weight * radial * atom.direction;
    return out;
}

double profile_total_variation(const DensityMeasure& m) {
    double tv = 0.0;
    for (const auto& iv : m.support.intervals()) {
        const double a = iv.first, b = iv.second;
        switch (m.profile.kind) {
            case DensityProfile::Kind::Constant:
                tv += 2.0 * m.profile.height;
                break;
            case DensityProfile::Kind::Power: {
                const double c = m.profile.center;
                const double fa = m.profile(a), fb = m.profile(b);
                if (a < c && c < b) {
                    const double fc = m.profile(c);
                    tv += fa + fb + std::abs(fc - fa) + std::abs(fc - fb);
                } else {
                    tv += fa + fb + std::abs(fb - fa);
                }
                break;
            }
            case DensityProfile::Kind::Callable: {
                const int n = 512;
                const double h = (b - a) / n;
                double prev = 0.0, var = 0.0, first = 0.0, last = 0.0;
                for (int i = 0; i <= n; ++i) {
                    const double v = safe_eval(m.profile, a + i * h, h / 4);
                    if (i == 0)
                        first = v;
                    else
                        var += std::abs(v - prev);
                    prev = v;
                    last = v;
                }
                tv += first + last + var;
                break;
            }
        }
    }
    return tv;
}

DensityOverlapRegion density_overlap_region(const DensityMeasure& rho0, double z0, double eps,
                                            int probe_grid) {
    if (!(eps > 0.0)) throw ConfigError("overlap-region radius must be positive");
    const IntervalUnion ball({{z0 - eps, z0 + eps}});
    // The reciprocal must be integrable over the whole ball, so the density
    // must live on all of it.
    const double gap = eps * 2.0 - ball.intersect(rho0.support).total_length();
    if (gap > 1e-12 * std::max(1.0, eps))
        throw PreconditionError("density vanishes on part of the probe ball");
    if (rho0.profile.kind == DensityProfile::Kind::Power && rho0.profile.exponent >= 1.0 &&
        z0 - eps <= rho0.profile.center && rho0.profile.center <= z0 + eps)
        throw PreconditionError("reciprocal density is not integrable on the probe ball");
    if (rho0.profile.kind == DensityProfile::Kind::Callable) {
        // refinement check on int 1/rho0
        auto recip = [&](int cells) {
            double s = 0.0;
            const double h = 2.0 * eps / cells;
            for (int i = 0; i < cells; ++i) {
                const double z = z0 - eps + (i + 0.5) * h;
                const double v = safe_eval(rho0.profile, z, h / 4);
                s += 1.0 / std::max(v, 1e-300);
            }
            return s * h;
        };
        const double c1 = recip(rho0.quad_cells), c2 = recip(2 * rho0.quad_cells);
        if (!std::isfinite(c2) || c2 > c1 * 1.05 + 1e-9)
            throw PreconditionError("reciprocal density integral did not converge on the ball");
    }

    DensityOverlapRegion out;
    IntervalUnion F = ball.intersect(rho0.support);
    if (F.contains(0.0) || (F.lo() <= 0.0 && F.hi() >= 0.0)) {
        double eta = eps / 16.0;
        IntervalUnion cand = F.subtract_open(-eta, eta);
        double K_full = 0.0;
        for (const auto& iv : F.intervals())
            K_full += integrate_profile(rho0.profile, iv.first, iv.second, rho0.quad_cells);
        auto mass_of = [&](const IntervalUnion& u) {
            double s = 0.0;
            for (const auto& iv : u.intervals())
                s += integrate_profile(rho0.profile, iv.first, iv.second, rho0.quad_cells);
            return s;
        };
        int guard = 0;
        while (mass_of(cand) < 0.25 * K_full && guard++ < 40) {
            eta *= 0.5;
            cand = F.subtract_open(-eta, eta);
        }
        F = cand;
    }
    if (F.empty()) throw PreconditionError("no admissible region away from the origin");

    double K = 0.0;
    for (const auto& iv : F.intervals())
        K += integrate_profile(rho0.profile, iv.first, iv.second, rho0.quad_cells);
    if (!(K > 0.0)) throw PreconditionError("region carries no mass");

    const int cells_per_unit = std::max(256, rho0.quad_cells);
    auto l1_shift = [&](double x) {
        // int_F |rho0(z) - rho0(z - x)| dz, with rho0 vanishing off its support
        double s = 0.0;
        for (const auto& iv : F.intervals()) {
            const double len = iv.second - iv.first;
            const int n = std::max(8, static_cast<int>(std::ceil(cells_per_unit * len /
                                                                 std::max(1e-12, 2.0 * eps))));
            const double h = len / n;
            for (int i = 0; i < n; ++i) {
                const double z = iv.first + (i + 0.5) * h;
                const double f = safe_eval(rho0.profile, z, h / 4);
                const double g = rho0.support.contains(z - x)
                                     ? safe_eval(rho0.profile, z - x, h / 4)
                                     : 0.0;
                s += std::abs(f - g) * h;
            }
        }
        return s;
    };

    double delta = std::min(eps, 1.0) / 2.0;
    double sup = 0.0;
    for (int iter = 0;; ++iter) {
        if (iter > 60) throw AccuracyError("shift radius underflow while shrinking");
        sup = 0.0;
        const int g = std::max(3, probe_grid | 1);
        for (int i = 0; i < g; ++i) {
            const double x = -delta + 2.0 * delta * i / (g - 1);
            sup = std::max(sup, l1_shift(x));
        }
        if (sup <= 0.75 * K) break;
        delta *= 0.5;
    }

    out.F = F;
    out.delta = delta;
    out.K = K;
    out.sup_l1_shift = sup;
    out.lower_bound = 0.5 * (K - sup);
    return out;
}

double small_jump_quadratic_mass(const LevyMeasure& nu, double eps) {
    if (!(eps > 0.0)) throw ConfigError("truncation radius must be positive");
    if (const auto* a = std::get_if<AtomicMeasure>(&nu.rep)) {
        double s = 0.0;
        for (std::size_t i = 0; i < a->masses.size(); ++i) {
            const double r = a->locations[i].norm();
            if (r < eps) s += a->masses[i] * r * r;
        }
        return s;
    }
    if (const auto* d = std::get_if<DensityMeasure>(&nu.rep)) {
        const IntervalUnion inner = d->support.intersect(IntervalUnion({{-eps, eps}}));
        double s = 0.0;
        for (const auto& iv : inner.intervals()) {
            const int n = std::max(64, d->quad_cells / 8);
            const double h = (iv.second - iv.first) / n;
            for (int i = 0; i < n; ++i) {
                const double z = iv.first + (i + 0.5) * h;
                s += z * z * safe_eval(d->profile, z, h / 4) * h;
            }
        }
        return s;
    }
    if (const auto* st = std::get_if<StableMeasure>(&nu.rep)) {
        const double k = st->scale * stable_density_constant(st->alpha, st->dim) *
                         surface_area_unit_sphere(st->dim);
        return k * std::pow(eps, 2.0 - st->alpha) / (2.0 - st->alpha);
    }
    const auto& sp = std::get<SphericalStableMeasure>(nu.rep);
    double wsum = 0.0;
    for (const auto& at : sp.atoms) wsum += at.weight;
    const double r1 = std::min(eps, sp.r0);
    double radial = std::pow(r1, 2.0 - sp.alpha) / (2.0 - sp.alpha);
    if (eps > sp.r0 && std::isfinite(sp.beta)) {
        if (std::abs(sp.beta - 2.0) < 1e-12)
            radial += std::log(eps / sp.r0);
        else
            radial += (std::pow(eps, 2.0 - sp.beta) - std::pow(sp.r0, 2.0 - sp.beta)) /
                      (2.0 - sp.beta);
    }
    return wsum * radial;
}

MeasureSampler::MeasureSampler(const FiniteMeasure& mu) : mu_(mu) {
    if (!(mu.total_mass > 0.0)) throw PreconditionError("cannot sample from a null measure");
    if (const auto* a = as_atomic(mu_)) {
        double acc = 0.0;
        for (double m : a->masses) cum_.push_back(acc += m);
        return;
    }
    if (const auto* d = as_density(mu_)) {
        if (d->profile.kind == DensityProfile::Kind::Constant ||
            d->profile.kind == DensityProfile::Kind::Power) {
            double acc = 0.0;
            for (const auto& iv : d->support.intervals()) {
                cell_lo_.push_back(iv.first);
                cell_hi_.push_back(iv.second);
                cum_.push_back(acc += integrate_profile(d->profile, iv.first, iv.second, 0));
            }
            return;
        }
        // generic density: per-cell weights with in-cell rejection
        rejection_ = true;
        double acc = 0.0;
        for (const auto& iv : d->support.intervals()) {
            const int n = std::max(16, d->quad_cells);
            const double h = (iv.second - iv.first) / n;
            for (int i = 0; i < n; ++i) {
                const double lo = iv.first + i * h, hi = lo + h;
                const double m = 0.5 * (lo + hi);
                const double fm = safe_eval(d->profile, m, h / 4);
                const double env =
                    1.5 * std::max({fm, safe_eval(d->profile, lo + h / 64, h / 4),
                                    safe_eval(d->profile, hi - h / 64, h / 4)});
                cell_lo_.push_back(lo);
                cell_hi_.push_back(hi);
                cell_max_.push_back(std::max(env, 1e-300));
                cum_.push_back(acc += fm * h);
            }
        }
        return;
    }
}

double MeasureSampler::draw1d(RngStream& rng) const {
    Eigen::VectorXd v = draw(rng);
    return v[0];
}

Eigen::VectorXd MeasureSampler::draw(RngStream& rng) const {
    if (const auto* a = as_atomic(mu_)) {
        const double u = rng.uniform() * cum_.back();
        const std::size_t idx =
            std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
        return a->locations[std::min(idx, a->locations.size() - 1)];
    }
    if (const auto* d = as_density(mu_)) {
        Eigen::VectorXd out(1);
        const double u = rng.uniform() * cum_.back();
        const std::size_t idx = std::min<std::size_t>(
            std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin(), cum_.size() - 1);
        const double lo = cell_lo_[idx], hi = cell_hi_[idx];
        if (!rejection_) {
            if (d->profile.kind == DensityProfile::Kind::Constant) {
                out[0] = lo + (hi - lo) * rng.uniform();
                return out;
            }
            // exact inverse CDF for power profiles
            const double c = d->profile.center, p = d->profile.exponent;
            const double Ga = power_antiderivative(lo, c, p);
            const double Gb = power_antiderivative(hi, c, p);
            const double t = Ga + (Gb - Ga) * rng.uniform();
            if (p == -1.0) {
                const double side = 0.5 * (lo + hi) >= c ? 1.0 : -1.0;
                out[0] = std::clamp(c + side * std::exp(side * t), lo, hi);
                return out;
            }
            const double q = p + 1.0;
            const double s = (t < 0 ? -1.0 : 1.0) * (q < 0 ? -1.0 : 1.0);
            const double z = c + s * std::pow(std::abs(t * q), 1.0 / q);
            out[0] = std::clamp(z, lo, hi);
            return out;
        }
        for (int tries = 0; tries < 10000; ++tries) {
            const double z = lo + (hi - lo) * rng.uniform();
            const double f = safe_eval(d->profile, z, (hi - lo) / 64);
            if (rng.uniform() * cell_max_[idx] <= f) {
                out[0] = z;
                return out;
            }
        }
        throw AccuracyError("density rejection sampler failed to accept");
    }
    if (const auto* s = std::get_if<StableMeasure>(&mu_.rep)) {
        const double r = mu_.trunc_radius * std::pow(rng.uniform_pos(), -1.0 / s->alpha);
        if (s->dim == 1) {
            Eigen::VectorXd out(1);
            out[0] = rng.uniform() < 0.5 ? -r : r;
            return out;
        }
        Eigen::VectorXd dir(s->dim);
        do {
            for (int i = 0; i < s->dim; ++i) dir[i] = rng.gaussian();
        } while (dir.norm() == 0.0);
        return r * dir.normalized();
    }
    const auto& sp = std::get<SphericalStableMeasure>(mu_.rep);
    // atom choice proportional to weight (shared radial law), then the radius
    double wsum = 0.0;
    for (const auto& at : sp.atoms) wsum += at.weight;
    double u = rng.uniform() * wsum;
    std::size_t j = 0;
    for (; j + 1 < sp.atoms.size(); ++j) {
        if (u < sp.atoms[j].weight) break;
        u -= sp.atoms[j].weight;
    }
    const double eps = mu_.trunc_radius;
    double m_inner = 0.0;
    if (eps < sp.r0)
        m_inner = (std::pow(eps, -sp.alpha) - std::pow(sp.r0, -sp.alpha)) / sp.alpha;
    double m_tail = std::isfinite(sp.beta)
                        ? std::pow(std::max(eps, sp.r0), -sp.beta) / sp.beta
                        : 0.0;
    double r;
    if (rng.uniform() * (m_inner + m_tail) < m_inner) {
        const double a = std::pow(eps, -sp.alpha), b = std::pow(sp.r0, -sp.alpha);
        r = std::pow(a - rng.uniform() * (a - b), -1.0 / sp.alpha);
    } else {
        r = std::max(eps, sp.r0) * std::pow(rng.uniform_pos(), -1.0 / sp.beta);
    }
    return r * sp.atoms[j].direction;
}

}  // namespace oucl
