#include "oucl/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "oucl/common.hpp"
#include "oucl/spectral.hpp"

namespace oucl {

namespace {

constexpr int kMaxRejectionIters = 200000;

bool is_probability(const FiniteMeasure& mu) { return std::abs(mu.total_mass - 1.0) <= 1e-9; }

// Row-conditional atom tables for one shift a.  Row "+a" carries the per-atom
// masses of nu ∧ (delta_{-a} * nu), row "-a" those of nu ∧ (delta_{a} * nu),
// row "0" the remainder.
struct AtomRows {
    std::vector<double> cum_plus, cum_minus, cum_stay;
    double tot_plus = 0.0, tot_minus = 0.0, tot_stay = 0.0;
};

double atom_mass_at(const AtomicMeasure& am, const Eigen::VectorXd& z) {
    for (std::size_t j = 0; j < am.locations.size(); ++j) {
        if ((am.locations[j] - z).norm() <= 1e-12 * (1.0 + z.norm())) return am.masses[j];
    }
    return 0.0;
}

AtomRows build_atom_rows(const AtomicMeasure& am, const Eigen::VectorXd& a) {
    AtomRows rows;
    const std::size_t m = am.locations.size();
    rows.cum_plus.resize(m);
    rows.cum_minus.resize(m);
    rows.cum_stay.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double mj = am.masses[j];
        const double w_plus = std::min(mj, atom_mass_at(am, am.locations[j] + a));
        const double w_minus = std::min(mj, atom_mass_at(am, am.locations[j] - a));
        const double w_stay = std::max(0.0, mj - 0.5 * w_plus - 0.5 * w_minus);
        rows.tot_plus += w_plus;
        rows.tot_minus += w_minus;
        rows.tot_stay += w_stay;
        rows.cum_plus[j] = rows.tot_plus;
        rows.cum_minus[j] = rows.tot_minus;
        rows.cum_stay[j] = rows.tot_stay;
    }
    return rows;
}

std::size_t pick_from_cum(const std::vector<double>& cum, double total, RngStream& rng) {
    const double w = rng.uniform() * total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), w);
    return std::min<std::size_t>(std::distance(cum.begin(), it), cum.size() - 1);
}

// Shared machinery for the paired draw; keeps the proposal sampler and the
// last shift's overlap table so that runs with a constant shift pay for the
// overlap computation only once.
class MinekaContext {
public:
    explicit MinekaContext(const FiniteMeasure& nu_bar) : nu_(nu_bar), proposal_(nu_bar) {
        if (!is_probability(nu_bar))
            throw PreconditionError("paired jump sampling requires a probability measure");
        if (!std::holds_alternative<AtomicMeasure>(nu_.rep) &&
            !std::holds_alternative<DensityMeasure>(nu_.rep))
            throw PreconditionError(
                "paired jump sampling supports atomic and density jump laws only");
    }

    double overlap(const Eigen::VectorXd& a) {
        prepare(a);
        return q_;
    }

    MinekaDraw draw(const Eigen::VectorXd& a, RngStream& rng) {
        if (a.size() != nu_.dim)
            throw PreconditionError("shift vector dimension does not match the jump law");
        if (a.norm() == 0.0) {
            MinekaDraw out;
            out.u = proposal_.draw(rng);
            out.delta_u = Eigen::VectorXd::Zero(nu_.dim);
            out.direction = 0;
            return out;
        }
        prepare(a);
        const double w = rng.uniform();
        int dir = 0;
        if (w < 0.5 * q_)
            dir = +1;
        else if (w < q_)
            dir = -1;
        MinekaDraw out;
        out.direction = dir;
        out.delta_u = double(dir) * a;
        if (const auto* am = std::get_if<AtomicMeasure>(&nu_.rep))
            out.u = draw_atomic(*am, dir, rng);
        else
            out.u = draw_density(dir, rng);
        return out;
    }

private:
    void prepare(const Eigen::VectorXd& a) {
        if (cached_a_ && cached_a_->size() == a.size() && *cached_a_ == a) return;
        cached_a_ = a;
        q_ = overlap_mass(nu_, shift_measure(nu_, -a));
        if (const auto* am = std::get_if<AtomicMeasure>(&nu_.rep)) rows_ = build_atom_rows(*am, a);
        if (q_ > 1.0 + 1e-9)
            throw PreconditionError("overlap mass exceeds the total mass of the jump law");
        q_ = std::min(q_, 1.0);
    }

    Eigen::VectorXd draw_atomic(const AtomicMeasure& am, int dir, RngStream& rng) const {
        const std::vector<double>* cum = &rows_.cum_stay;
        double total = rows_.tot_stay;
        if (dir > 0) {
            cum = &rows_.cum_plus;
            total = rows_.tot_plus;
        } else if (dir < 0) {
            cum = &rows_.cum_minus;
            total = rows_.tot_minus;
        }
        if (total <= 0.0) throw AccuracyError("selected pairing row has zero mass");
        return am.locations[pick_from_cum(*cum, total, rng)];
    }

    Eigen::VectorXd draw_density(int dir, RngStream& rng) const {
        const double a1 = (*cached_a_)(0);
        for (int iter = 0; iter < kMaxRejectionIters; ++iter) {
            const double z = proposal_.draw1d(rng);
            const double rho = density_value(nu_, z);
            if (!(rho > 0.0)) continue;
            double target = 0.0;
            if (dir > 0) {
                target = std::min(rho, density_value(nu_, z + a1));
            } else if (dir < 0) {
                target = std::min(rho, density_value(nu_, z - a1));
            } else {
                target = rho - 0.5 * std::min(rho, density_value(nu_, z + a1)) -
                         0.5 * std::min(rho, density_value(nu_, z - a1));
            }
            if (rng.uniform() * rho <= target) {
                Eigen::VectorXd out(1);
                out(0) = z;
                return out;
            }
        }
        throw AccuracyError("rejection sampling for the paired jump law did not terminate");
    }

    FiniteMeasure nu_;
    MeasureSampler proposal_;
    std::optional<Eigen::VectorXd> cached_a_;
    double q_ = 0.0;
    AtomRows rows_;
};

}  // namespace

MinekaDraw mineka_pair(const FiniteMeasure& nu_bar, const Eigen::VectorXd& a, RngStream& rng) {
    MinekaContext ctx(nu_bar);
    return ctx.draw(a, rng);
}

RotationOp rotation_to_e1(const Eigen::VectorXd& target) {
    const int n = int(target.size());
    const double norm = target.norm();
    if (!(norm > 0.0)) throw PreconditionError("rotation target must be nonzero");
    RotationOp op;
    op.target = target;
    if (n == 1) {
        op.matrix = Eigen::MatrixXd::Constant(1, 1, target(0) > 0.0 ? 1.0 : -1.0);
        return op;
    }
    const Eigen::VectorXd v = target / norm;
    Eigen::VectorXd w = v - Eigen::VectorXd::Unit(n, 0);
    const double wn2 = w.squaredNorm();
    if (wn2 <= 1e-28) {
        op.matrix = Eigen::MatrixXd::Identity(n, n);
        return op;
    }
    op.matrix = Eigen::MatrixXd::Identity(n, n) - (2.0 / wn2) * (w * w.transpose());
    return op;
}

CouplingRun run_coupled_walks(const OUModel& model, double epsilon, double t,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              RngStream& rng) {
    if (x.size() != model.n || y.size() != model.n)
        throw PreconditionError("start points must have the state dimension");
    if (!(t > 0.0)) throw PreconditionError("time horizon must be positive");
    const SpectralReport spec = spectral_report(model.A);
    require_bounded_semigroup(spec);
    if (!model.B_pinv)
        throw PreconditionError("noise matrix must have full row rank for the coupled walks");

    const FiniteMeasure nu_eps = truncate(model.triplet.nu, epsilon);
    if (!(nu_eps.total_mass > 0.0))
        throw PreconditionError("truncated jump measure carries no mass");
    const FiniteMeasure nu_bar = normalize(nu_eps);
    const double rate = nu_eps.total_mass;

    CouplingRun run;
    run.t = t;
    const Eigen::MatrixXd& bbar = *model.B_pinv;
    const Eigen::VectorXd diff = x - y;
    const Eigen::VectorXd gap_vec = model.flow(t) * diff;
    run.gap = gap_vec.norm();
    const double budget = spec.c_a * operator_norm(bbar) * diff.norm();

    const bool scalar = (model.n == 1 && model.d == 1);
    const double a_scalar = scalar ? model.A(0, 0) : 0.0;
    const RotationOp rot = run.gap > 0.0
                               ? rotation_to_e1(gap_vec)
                               : RotationOp{gap_vec, Eigen::MatrixXd::Identity(model.n, model.n)};

    double s = rng.exponential(rate);
    while (s <= t) {
        run.jump_times.push_back(s);
        s += rng.exponential(rate);
    }

    if (run.gap == 0.0) run.coupling_step = 0;

    MinekaContext ctx(nu_bar);
    MeasureSampler plain(nu_bar);
    double walk = 0.0;
    long lattice = 0;
    for (std::size_t i = 0; i < run.jump_times.size(); ++i) {
        const double tau = run.jump_times[i];
        Eigen::VectorXd a_i;
        Eigen::VectorXd jump_weighted;
        if (scalar) {
            a_i = bbar * (std::exp(a_scalar * (t - tau)) * diff);
        } else {
            a_i = bbar * (matrix_exponential(model.A, t - tau) * diff);
        }
        if (a_i.norm() > budget * (1.0 + 1e-9) + 1e-300)
            throw AccuracyError("per-step shift exceeded its uniform bound");

        const bool glued = run.coupling_step >= 0;
        MinekaDraw pair;
        if (glued) {
            pair.u = plain.draw(rng);
            pair.delta_u = Eigen::VectorXd::Zero(model.d);
            pair.direction = 0;
        } else {
            pair = ctx.draw(a_i, rng);
        }
        const double p_i = 1.0 - ctx.overlap(a_i);

        if (scalar) {
            jump_weighted = std::exp(a_scalar * tau) * (model.B * pair.u);
        } else {
            jump_weighted = matrix_exponential(model.A, tau) * (model.B * pair.u);
        }
        walk += (rot.matrix * jump_weighted)(0);
        lattice += pair.direction;

        run.a_list.push_back(a_i);
        run.stay_probs.push_back(p_i);
        run.directions.push_back(pair.direction);
        run.walk.push_back(walk);
        run.walk_mirror.push_back(walk + double(lattice) * run.gap);
        if (run.coupling_step < 0 && lattice == -1) run.coupling_step = int(i) + 1;
    }
    return run;
}

double gamma_delta(const FiniteMeasure& nu_bar, double delta, int grid) {
    if (!(delta > 0.0)) throw PreconditionError("shift radius must be positive");
    const FiniteMeasure prob = normalize(nu_bar);
    return shifted_overlap_certificate(prob, delta, grid).grid_min;
}

double coupling_tail_bound(double gamma, int k, double c_clt) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw PreconditionError("gamma must lie in (0, 1]");
    if (k < 1) throw PreconditionError("step count must be positive");
    return c_clt / std::sqrt(double(k)) + 4.0 * (1.0 - gamma) / (gamma * double(k));
}

}  // namespace oucl
