#include "oucl/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

#include "oucl/common.hpp"

namespace oucl {
namespace {

// Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}
double kolmogorov_tail(double lambda) {
    if (lambda < 0.1) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_p_value(double d, double n_eff) {
    const double rn = std::sqrt(n_eff);
    return kolmogorov_tail((rn + 0.12 + 0.11 / rn) * d);
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw PreconditionError("empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        d = std::max({d, F - i / n, (i + 1) / n - F});
    }
    return {d, ks_p_value(d, n)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw PreconditionError("empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return {d, ks_p_value(d, na * nb / (na + nb))};
}

ChiSquareResult chi_square_gof(const std::vector<long long>& counts,
                               const std::vector<double>& probs) {
    if (counts.size() != probs.size() || counts.empty())
        throw PreconditionError("counts and probabilities must align");
    long long total = 0;
    for (long long c : counts) total += c;
    if (total <= 0) throw PreconditionError("empty counts");
    double stat = 0.0;
    int dof = -1;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expected = probs[i] * total;
        if (expected <= 0.0) {
            if (counts[i] != 0)
                throw PreconditionError("observed mass in a zero-probability cell");
            continue;
        }
        stat += (counts[i] - expected) * (counts[i] - expected) / expected;
        ++dof;
    }
    if (dof < 1) throw PreconditionError("at least two cells required");
    const double p = boost::math::gamma_q(dof / 2.0, stat / 2.0);
    return {stat, dof, p};
}

}  // namespace oucl
