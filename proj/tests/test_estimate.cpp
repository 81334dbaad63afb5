#include <doctest.h>

#include <oucl/common.hpp>
#include <oucl/estimate.hpp>
#include <oucl/ou_model.hpp>
#include <oucl/rng.hpp>
#include <oucl/sampler.hpp>
#include <oucl/stats.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

using namespace oucl;

namespace {

std::vector<double> gaussian_draws(int n, double mean, double sd, uint64_t stream) {
    RngStream rng(71, stream);
    std::vector<double> xs;
    xs.reserve(n);
    for (int i = 0; i < n; ++i) xs.push_back(mean + sd * rng.gaussian());
    return xs;
}

}  // namespace

TEST_SUITE("estimate") {

TEST_CASE("histogram distance collapses on identical samples and saturates on disjoint ones") {
    std::vector<double> a = gaussian_draws(20000, 0.0, 1.0, 0);
    TVEstimate same = tv_histogram1d(a, a, 64);
    CHECK(same.tv_hat == doctest::Approx(0.0));
    CHECK(same.std_err > 0.0);

    std::vector<double> far = gaussian_draws(20000, 100.0, 1.0, 1);
    TVEstimate apart = tv_histogram1d(a, far, 64);
    CHECK(apart.tv_hat == doctest::Approx(2.0));
}

TEST_CASE("histogram distance matches the closed form for shifted normals") {
    // ||N(0,1) - N(1,1)||_var = 2 (2 Phi(1/2) - 1) = 0.76584...
    const double expect = 2.0 * (2.0 * normal_cdf(0.5) - 1.0);
    std::vector<double> a = gaussian_draws(100000, 0.0, 1.0, 2);
    std::vector<double> b = gaussian_draws(100000, 1.0, 1.0, 3);
    TVEstimate tv = tv_histogram1d(a, b, 64);
    CHECK(tv.tv_hat == doctest::Approx(expect).epsilon(0.05));

    // multivariate entry point agrees on the same data
    std::vector<Eigen::VectorXd> av, bv;
    for (double z : a) av.push_back(Eigen::VectorXd::Constant(1, z));
    for (double z : b) bv.push_back(Eigen::VectorXd::Constant(1, z));
    TVEstimate tvv = tv_histogram(av, bv, 64);
    CHECK(tvv.tv_hat == doctest::Approx(tv.tv_hat).epsilon(1e-12));

    RngStream boot(97, 0);
    TVEstimate tb = tv_histogram(av, bv, 64, 50, &boot);
    CHECK(tb.std_err > 0.0);
    CHECK(tb.std_err < 0.05);
}

TEST_CASE("exact one-dimensional distance for gaussian marginals") {
    OUModel m = OUModel::scalar(-1.0, 1.0, LevyTriplet::gaussian1d(1.0));
    const double t = 1.0, x = 1.0, y = 0.0;
    // laws are N(e^{-t} x, v) and N(e^{-t} y, v)
    const double v = (1.0 - std::exp(-2.0 * t)) / 2.0;
    const double shift = std::exp(-t) * (x - y);
    const double expect = 2.0 * (2.0 * normal_cdf(0.5 * shift / std::sqrt(v)) - 1.0);
    CHECK(tv_exact_1d(m, t, x, y) == doctest::Approx(expect).epsilon(2e-3));
}

TEST_CASE("exact and histogram distances agree for a heavy-tailed model") {
    OUModel m = OUModel::scalar(-1.0, 1.0,
                                LevyTriplet::pure_jump(LevyMeasure::stable(1.0, 1.0, 1)));
    const double t = 1.0, x = 1.0, y = 0.0;
    double exact = tv_exact_1d(m, t, x, y);
    CHECK(exact > 0.0);
    CHECK(exact < 2.0);

    DriverSpec spec;
    spec.mode = DriverSpec::Mode::StableExact;
    std::vector<double> xs, ys;
    RngStream rng(73, 0);
    Eigen::VectorXd vx(1), vy(1);
    vx << x;
    vy << y;
    for (int i = 0; i < 60000; ++i) {
        xs.push_back(sample_ou_endpoint(m, t, vx, spec, rng)(0));
        ys.push_back(sample_ou_endpoint(m, t, vy, spec, rng)(0));
    }
    TVEstimate tv = tv_histogram1d(xs, ys, 64);
    CHECK(std::abs(tv.tv_hat - exact) < 3.0 * tv.std_err + 0.02);
}

TEST_CASE("decay fit recovers a pure power law") {
    TVCurve curve;
    for (double t : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
        TVRow row;
        row.t = t;
        row.tv_hat = 1.3 / std::sqrt(t);
        row.std_err = 1e-4;
        curve.push_back(row);
    }
    FitResult fit = fit_decay(curve);
    CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(std::exp(fit.intercept) == doctest::Approx(1.3).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.used_rows == 6);
}

TEST_CASE("decay fit drops saturated and noise-floor rows") {
    TVCurve curve;
    double ts[] = {0.05, 1.0, 2.0, 4.0, 8.0, 16.0};
    for (double t : ts) {
        TVRow row;
        row.t = t;
        row.tv_hat = std::min(2.0, 1.0 / std::sqrt(t));
        row.std_err = 0.01;
        curve.push_back(row);
    }
    curve[0].tv_hat = 1.95;   // saturated
    curve[5].tv_hat = 0.02;   // below 3 sigma
    FitResult fit = fit_decay(curve);
    CHECK(fit.used_rows == 4);
    CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-6));

    TVCurve tiny(curve.begin(), curve.begin() + 3);
    tiny[0].tv_hat = 1.95;
    CHECK_THROWS_AS(fit_decay(tiny), AccuracyError);
}

TEST_CASE("gradient of a constant function vanishes") {
    OUModel m = OUModel::scalar(-1.0, 1.0, LevyTriplet::gaussian1d(1.0));
    LatticeSpec probe;
    probe.lo = -2.0;
    probe.hi = 2.0;
    probe.points = 21;
    GradientEstimate g = gradient_sup_norm(m, 1.0, [](const Eigen::VectorXd&) { return 1.0; },
                                           probe);
    CHECK(g.sup_grad == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(g.h > 0.0);
}

TEST_CASE("gradient of a half-line indicator peaks at the density maximum") {
    OUModel m = OUModel::scalar(-1.0, 1.0, LevyTriplet::gaussian1d(1.0));
    const double t = 1.0;
    const double v = (1.0 - std::exp(-2.0 * t)) / 2.0;
    // d/dx P(x e^{-t} + N(0,v) >= 0) peaks at x = 0 with value e^{-t}/sqrt(2 pi v)
    const double expect = std::exp(-t) / std::sqrt(2.0 * M_PI * v);
    LatticeSpec probe;
    probe.lo = -2.0;
    probe.hi = 2.0;
    probe.points = 41;
    GradientEstimate g = gradient_sup_norm(
        m, t, [](const Eigen::VectorXd& z) { return z(0) >= 0.0 ? 1.0 : 0.0; }, probe);
    CHECK(g.sup_grad == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("gradient supremum scales like t^{-1/alpha} for the flat-state model") {
    OUModel m = OUModel::scalar(0.0, 1.0,
                                LevyTriplet::pure_jump(LevyMeasure::stable(1.0, 1.0, 1)));
    LatticeSpec probe;
    probe.lo = -4.0;
    probe.hi = 4.0;
    probe.points = 81;
    auto indicator = [](const Eigen::VectorXd& z) { return z(0) >= 0.0 ? 1.0 : 0.0; };
    GradientEstimate g1 = gradient_sup_norm(m, 0.5, indicator, probe);
    GradientEstimate g2 = gradient_sup_norm(m, 0.25, indicator, probe);
    // marginal is Cauchy(t): the sup of its density is 1/(pi t)
    CHECK(g1.sup_grad == doctest::Approx(1.0 / (M_PI * 0.5)).epsilon(0.05));
    CHECK(g2.sup_grad / g1.sup_grad == doctest::Approx(2.0).epsilon(0.15));
}

}
