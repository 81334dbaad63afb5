#include "oucl/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oucl/common.hpp"
#include "oucl/symbol.hpp"

namespace oucl {

namespace {

double pooled_quantile(std::vector<double>& v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * double(v.size() - 1);
    const std::size_t lo = std::size_t(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double w = pos - double(lo);
    return (1.0 - w) * v[lo] + w * v[hi];
}

struct HistogramBox {
    std::vector<double> lo, width;
    int bins = 0;
    int dim = 0;

    std::size_t cell_of(const Eigen::VectorXd& v) const {
        std::size_t idx = 0;
        for (int k = 0; k < dim; ++k) {
            int b = 0;
            if (width[k] > 0.0)
                b = std::clamp(int(std::floor((v(k) - lo[k]) / width[k] * bins)), 0, bins - 1);
            idx = idx * std::size_t(bins) + std::size_t(b);
        }
        return idx;
    }
};

double l1_from_counts(const std::vector<double>& cx, const std::vector<double>& cy, double n) {
    double tv = 0.0;
    for (std::size_t c = 0; c < cx.size(); ++c) tv += std::abs(cx[c] - cy[c]) / n;
    return tv;
}

std::vector<double> multinomial_resample(const std::vector<double>& counts, double n,
                                         RngStream& rng) {
    std::vector<double> cum(counts.size());
    std::partial_sum(counts.begin(), counts.end(), cum.begin());
    std::vector<double> out(counts.size(), 0.0);
    const double total = cum.back();
    for (long i = 0; i < long(n); ++i) {
        const double w = rng.uniform() * total;
        const auto it = std::upper_bound(cum.begin(), cum.end(), w);
        out[std::min<std::size_t>(std::distance(cum.begin(), it), counts.size() - 1)] += 1.0;
    }
    return out;
}

}  // namespace

TVEstimate tv_histogram(const std::vector<Eigen::VectorXd>& samples_x,
                        const std::vector<Eigen::VectorXd>& samples_y, int bins_per_axis,
                        int bootstrap_reps, RngStream* rng) {
    if (samples_x.empty() || samples_y.empty())
        throw PreconditionError("total-variation estimation needs samples");
    if (samples_x.size() != samples_y.size())
        throw PreconditionError("the two sample lists must have equal length");
    const double n = double(samples_x.size());
    if (n < 1000) throw PreconditionError("statistical estimators need at least 1000 samples");
    if (bins_per_axis < 2) throw PreconditionError("need at least two bins per axis");

    HistogramBox box;
    box.dim = int(samples_x.front().size());
    if (box.dim < 1 || box.dim > 3)
        throw PreconditionError("histogram total variation supports dimensions 1..3");
    box.bins = bins_per_axis;
    box.lo.resize(box.dim);
    box.width.resize(box.dim);
    for (int k = 0; k < box.dim; ++k) {
        std::vector<double> pooled;
        pooled.reserve(samples_x.size() * 2);
        for (const auto& v : samples_x) pooled.push_back(v(k));
        for (const auto& v : samples_y) pooled.push_back(v(k));
        const double qlo = pooled_quantile(pooled, 0.02);
        const double qhi = pooled_quantile(pooled, 0.98);
        box.lo[k] = qlo;
        box.width[k] = std::max(qhi - qlo, 0.0);
    }

    std::size_t cells = 1;
    for (int k = 0; k < box.dim; ++k) cells *= std::size_t(box.bins);
    std::vector<double> cx(cells, 0.0), cy(cells, 0.0);
    for (const auto& v : samples_x) cx[box.cell_of(v)] += 1.0;
    for (const auto& v : samples_y) cy[box.cell_of(v)] += 1.0;

    TVEstimate est;
    est.tv_hat = l1_from_counts(cx, cy, n);
    est.std_err = std::sqrt(2.0 * double(cells) / n);
    if (bootstrap_reps > 0) {
        if (rng == nullptr) throw PreconditionError("bootstrap needs a random stream");
        double mean = 0.0, m2 = 0.0;
        for (int b = 0; b < bootstrap_reps; ++b) {
            const auto rx = multinomial_resample(cx, n, *rng);
            const auto ry = multinomial_resample(cy, n, *rng);
            const double tv = l1_from_counts(rx, ry, n);
            const double d = tv - mean;
            mean += d / double(b + 1);
            m2 += d * (tv - mean);
        }
        est.std_err = std::sqrt(m2 / std::max(1, bootstrap_reps - 1));
    }
    return est;
}

TVEstimate tv_histogram1d(const std::vector<double>& samples_x,
                          const std::vector<double>& samples_y, int bins_per_axis) {
    std::vector<Eigen::VectorXd> vx(samples_x.size(), Eigen::VectorXd(1));
    std::vector<Eigen::VectorXd> vy(samples_y.size(), Eigen::VectorXd(1));
    for (std::size_t i = 0; i < samples_x.size(); ++i) vx[i](0) = samples_x[i];
    for (std::size_t i = 0; i < samples_y.size(); ++i) vy[i](0) = samples_y[i];
    return tv_histogram(vx, vy, bins_per_axis);
}

namespace {

// Piecewise-linear L1 distance along one wrap period: trapezoid cells, with
// the sign-crossing cells integrated exactly for the interpolant.
double l1_periodic(const std::vector<double>& p1, const std::vector<double>& p2, double dx) {
    const std::size_t n = p1.size();
    double tv = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double g0 = p1[j] - p2[j];
        const double g1 = p1[(j + 1) % n] - p2[(j + 1) % n];
        if (g0 == 0.0 || g1 == 0.0 || (g0 > 0.0) == (g1 > 0.0)) {
            tv += 0.5 * (std::abs(g0) + std::abs(g1)) * dx;
        } else {
            tv += 0.5 * (g0 * g0 + g1 * g1) * dx / (std::abs(g0) + std::abs(g1));
        }
    }
    return tv;
}

}  // namespace

double tv_exact_1d(const OUModel& model, double t, double x, double y) {
    if (model.n != 1) throw PreconditionError("exact total variation is one-dimensional");
    if (!(t > 0.0)) throw PreconditionError("time must be positive");
    Eigen::VectorXd vx(1), vy(1);
    vx(0) = x;
    vy(0) = y;
    const double m = (model.flow(t) * (vx - vy))(0);
    if (m == 0.0) return 0.0;

    const double h_t = 1.0 / phi_inverse(model, t, 1.0);
    double W = 64.0 * h_t + 8.0 * std::abs(m);
    double prev = -1.0;
    for (int attempt = 0; attempt < 14; ++attempt) {
        double dx = std::max(W / double(std::size_t(1) << 22), h_t / 600.0);
        std::size_t count = 64;
        while (count * dx < W) count <<= 1;
        dx = W / double(count);

        DensityGrid g1, g2;
        g1.dx = g2.dx = dx;
        g1.count = g2.count = int(count);
        g1.wrap = g2.wrap = true;
        g1.x0 = -0.5 * W - (m > 0.0 ? m : 0.0);
        g2.x0 = g1.x0 + m;
        const auto p1 = density_via_fourier(model, t, g1);
        const auto p2 = density_via_fourier(model, t, g2);
        const double tv = std::clamp(l1_periodic(p1, p2, dx), 0.0, 2.0);
        if (prev >= 0.0 && std::abs(tv - prev) <= std::max(2e-7, 1e-3 * tv)) return tv;
        prev = tv;
        W *= 2.0;
    }
    throw AccuracyError("total-variation quadrature did not stabilize");
}

FitResult fit_decay(const TVCurve& curve) {
    std::vector<double> u, v;
    for (const auto& row : curve) {
        if (!(row.t > 0.0)) continue;
        if (row.tv_hat > 1.9) continue;
        if (row.tv_hat <= 3.0 * row.std_err || !(row.tv_hat > 0.0)) continue;
        u.push_back(std::log(row.t));
        v.push_back(std::log(row.tv_hat));
    }
    const int n = int(u.size());
    if (n < 4)
        throw AccuracyError("degenerate decay fit: fewer than 4 rows above the noise floor");
    const double um = std::accumulate(u.begin(), u.end(), 0.0) / n;
    const double vm = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double suu = 0.0, suv = 0.0, svv = 0.0;
    for (int i = 0; i < n; ++i) {
        suu += (u[i] - um) * (u[i] - um);
        suv += (u[i] - um) * (v[i] - vm);
        svv += (v[i] - vm) * (v[i] - vm);
    }
    if (suu <= 0.0) throw AccuracyError("degenerate decay fit: all rows share one time");
    FitResult fit;
    fit.slope = suv / suu;
    fit.intercept = vm - fit.slope * um;
    fit.used_rows = n;
    double ssres = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = v[i] - (fit.intercept + fit.slope * u[i]);
        ssres += r * r;
    }
    fit.r_squared = svv > 0.0 ? std::clamp(1.0 - ssres / svv, 0.0, 1.0) : 1.0;
    return fit;
}

namespace {

struct DensityTable1d {
    std::vector<double> z, p;
    double dx = 0.0;
};

// Periodized window; widened until both edges are negligible against the
// peak, so the fold-in aliasing cannot distort the tabulated values.
DensityTable1d tabulate_density(const OUModel& model, double t) {
    const double h_t = 1.0 / phi_inverse(model, t, 1.0);
    double half = 40.0 * h_t;
    for (int attempt = 0;; ++attempt) {
        DensityGrid g;
        g.wrap = true;
        g.dx = std::max(h_t / 100.0, 2.0 * half / double(std::size_t(1) << 19));
        g.count = int(std::ceil(2.0 * half / g.dx));
        g.x0 = -0.5 * g.dx * double(g.count);
        const auto p = density_via_fourier(model, t, g);
        const double peak = *std::max_element(p.begin(), p.end());
        const double edge = std::min(p.front(), p.back());
        if (edge <= 1e-4 * peak || attempt >= 8) {
            if (edge > 1e-3 * peak)
                throw AccuracyError("density tails could not be captured for the probe window");
            DensityTable1d tab;
            tab.dx = g.dx;
            tab.p = p;
            tab.z.resize(p.size());
            for (std::size_t j = 0; j < p.size(); ++j) tab.z[j] = g.x0 + double(j) * g.dx;
            return tab;
        }
        half *= 2.0;
    }
}

}  // namespace

GradientEstimate gradient_sup_norm(const OUModel& model, double t,
                                   const std::function<double(const Eigen::VectorXd&)>& f,
                                   const LatticeSpec& probe) {
    if (!(t > 0.0)) throw PreconditionError("time must be positive");
    if (probe.points < 3 || !(probe.hi > probe.lo))
        throw PreconditionError("the probe lattice needs at least three increasing points");

    const double h = (probe.hi - probe.lo) / double(probe.points - 1);
    GradientEstimate out;
    out.h = h;

    if (model.n == 1) {
        const DensityTable1d tab = tabulate_density(model, t);
        const double flow = model.flow(t)(0, 0);
        std::vector<double> ptf(probe.points, 0.0);
        Eigen::VectorXd arg(1);
        for (int i = 0; i < probe.points; ++i) {
            const double xi = probe.lo + i * h;
            double acc = 0.0;
            for (std::size_t j = 0; j < tab.z.size(); ++j) {
                arg(0) = flow * xi + tab.z[j];
                acc += f(arg) * tab.p[j];
            }
            ptf[i] = acc * tab.dx;
        }
        for (int i = 1; i + 1 < probe.points; ++i)
            out.sup_grad = std::max(out.sup_grad, std::abs(ptf[i + 1] - ptf[i - 1]) / (2.0 * h));
        return out;
    }

    if (model.n == 2) {
        const double h_t = 1.0 / phi_inverse(model, t, 1.0);
        const double half = 30.0 * h_t;
        DensityGrid g;
        g.x0 = -half;
        g.count = 256;
        g.dx = 2.0 * half / double(g.count - 1);
        const Eigen::MatrixXd dens = density_via_fourier_2d(model, t, g, g);
        const Eigen::MatrixXd flow = model.flow(t);
        Eigen::MatrixXd ptf(probe.points, probe.points);
        Eigen::VectorXd xv(2), arg(2);
        for (int i = 0; i < probe.points; ++i) {
            for (int j = 0; j < probe.points; ++j) {
                xv(0) = probe.lo + i * h;
                xv(1) = probe.lo + j * h;
                const Eigen::VectorXd base = flow * xv;
                double acc = 0.0;
                for (int a = 0; a < g.count; ++a) {
                    for (int b = 0; b < g.count; ++b) {
                        arg(0) = base(0) + g.x0 + a * g.dx;
                        arg(1) = base(1) + g.x0 + b * g.dx;
                        acc += f(arg) * dens(a, b);
                    }
                }
                ptf(i, j) = acc * g.dx * g.dx;
            }
        }
        for (int i = 1; i + 1 < probe.points; ++i) {
            for (int j = 1; j + 1 < probe.points; ++j) {
                const double gx = (ptf(i + 1, j) - ptf(i - 1, j)) / (2.0 * h);
                const double gy = (ptf(i, j + 1) - ptf(i, j - 1)) / (2.0 * h);
                out.sup_grad = std::max(out.sup_grad, std::hypot(gx, gy));
            }
        }
        return out;
    }

    throw PreconditionError("gradient probing supports one- and two-dimensional models");
}

}  // namespace oucl
