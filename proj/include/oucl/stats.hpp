#pragma once

#include <functional>
#include <vector>

namespace oucl {

double normal_cdf(double z);

struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

// One-sample Kolmogorov-Smirnov against a continuous cdf (asymptotic p).
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 0.0;
};

// Goodness of fit of observed counts against cell probabilities.
ChiSquareResult chi_square_gof(const std::vector<long long>& counts,
                               const std::vector<double>& probs);

}  // namespace oucl
