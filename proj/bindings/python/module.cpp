#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "oucl/common.hpp"
#include "oucl/coupling.hpp"
#include "oucl/estimate.hpp"
#include "oucl/experiment.hpp"
#include "oucl/interval_union.hpp"
#include "oucl/rw_oracle.hpp"
#include "oucl/sampler.hpp"
#include "oucl/symbol.hpp"

namespace py = pybind11;
using namespace oucl;

namespace {

Rational rational_of(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational::from_decimal_string(s);
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

DriverSpec driver_of(const std::string& name, double epsilon, const OUModel& model) {
    DriverSpec d;
    d.epsilon = epsilon;
    if (name == "cp") {
        d.mode = DriverSpec::Mode::CpTruncated;
    } else if (name == "stable") {
        d.mode = DriverSpec::Mode::StableExact;
    } else if (name == "gaussian") {
        d.mode = DriverSpec::Mode::GaussianExact;
    } else if (name == "euler") {
        d.mode = DriverSpec::Mode::PathEuler;
    } else if (name == "auto") {
        if (model.triplet.nu.is_zero())
            d.mode = DriverSpec::Mode::GaussianExact;
        else if (std::holds_alternative<StableMeasure>(model.triplet.nu.rep) &&
                 model.triplet.Q.isZero(0.0) && model.n == 1 && model.d == 1)
            d.mode = DriverSpec::Mode::StableExact;
        else
            d.mode = DriverSpec::Mode::CpTruncated;
    } else {
        throw ConfigError("unknown driver '" + name + "'");
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Levy-driven Ornstein-Uhlenbeck samplers, couplings and TV estimates";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<GateError>(m, "GateError");
    py::register_exception<AccuracyError>(m, "AccuracyError");
    py::register_exception<PreconditionError>(m, "PreconditionError");

    py::class_<LevyMeasure>(m, "LevyMeasure");
    py::class_<OUModel>(m, "OUModel")
        .def_property_readonly("n", [](const OUModel& mo) { return mo.n; })
        .def_property_readonly("d", [](const OUModel& mo) { return mo.d; })
        .def("flow", &OUModel::flow, py::arg("t"));

    m.def(
        "uniform_measure",
        [](double lo, double hi, double height) {
            return LevyMeasure::density(IntervalUnion({{lo, hi}}),
                                        DensityProfile::constant(height));
        },
        py::arg("lo"), py::arg("hi"), py::arg("height") = 1.0);
    m.def(
        "svc_measure",
        [](int level, const std::string& removed) {
            return LevyMeasure::density(svc_set(level, rational_of(removed)).set,
                                        DensityProfile::constant(1.0));
        },
        py::arg("level") = 10, py::arg("removed") = "1/4");
    m.def("stable_measure", &LevyMeasure::stable, py::arg("alpha"), py::arg("scale") = 1.0,
          py::arg("dim") = 1);
    m.def(
        "atomic_measure",
        [](const std::vector<double>& locs, const std::vector<double>& masses) {
            return LevyMeasure::atomic1d(locs, masses);
        },
        py::arg("locations"), py::arg("masses"));

    m.def(
        "scalar_model",
        [](double a, double b, const LevyMeasure& nu) {
            return OUModel::scalar(a, b, LevyTriplet::pure_jump(nu));
        },
        py::arg("a"), py::arg("b"), py::arg("nu"));
    m.def(
        "model",
        [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
           const Eigen::VectorXd& b, const LevyMeasure& nu) {
            return OUModel::make(A, B, LevyTriplet::make(Q, b, nu));
        },
        py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("b"), py::arg("nu"));

    m.def("phi_inverse", &phi_inverse, py::arg("model"), py::arg("t"), py::arg("level") = 1.0,
          py::arg("sphere_samples") = 64);
    m.def(
        "tv_bound",
        [](const OUModel& mo, double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
            return bound_report(mo, t, x, y).tv_bound;
        },
        py::arg("model"), py::arg("t"), py::arg("x"), py::arg("y"));

    m.def(
        "sample_endpoints",
        [](const OUModel& mo, double t, const Eigen::VectorXd& x, long count,
           std::uint64_t seed, const std::string& driver, double epsilon) {
            const DriverSpec d = driver_of(driver, epsilon, mo);
            std::vector<Eigen::VectorXd> out(count);
            for (long i = 0; i < count; ++i) {
                RngStream rng(seed, std::uint64_t(i));
                out[i] = sample_ou_endpoint(mo, t, x, d, rng);
            }
            return out;
        },
        py::arg("model"), py::arg("t"), py::arg("x"), py::arg("count"), py::arg("seed"),
        py::arg("driver") = "auto", py::arg("epsilon") = 0.1);

    m.def(
        "tv_histogram",
        [](const std::vector<Eigen::VectorXd>& xs, const std::vector<Eigen::VectorXd>& ys,
           int bins) {
            const TVEstimate e = tv_histogram(xs, ys, bins);
            return std::make_pair(e.tv_hat, e.std_err);
        },
        py::arg("samples_x"), py::arg("samples_y"), py::arg("bins") = 64);
    m.def("tv_exact_1d", &tv_exact_1d, py::arg("model"), py::arg("t"), py::arg("x"),
          py::arg("y"));

    m.def(
        "coupled_walk",
        [](const OUModel& mo, double epsilon, double t, const Eigen::VectorXd& x,
           const Eigen::VectorXd& y, std::uint64_t seed, std::uint64_t stream) {
            RngStream rng(seed, stream);
            const CouplingRun run = run_coupled_walks(mo, epsilon, t, x, y, rng);
            py::dict out;
            out["coupling_step"] = run.coupling_step;
            out["coupled"] = run.coupled();
            out["jumps"] = run.jump_times.size();
            out["gap"] = run.gap;
            return out;
        },
        py::arg("model"), py::arg("epsilon"), py::arg("t"), py::arg("x"), py::arg("y"),
        py::arg("seed"), py::arg("stream") = 0);

    m.def(
        "svc_overlap",
        [](int level, const std::string& removed, double z) {
            return interval_overlap(svc_set(level, rational_of(removed)).set, z);
        },
        py::arg("level"), py::arg("removed"), py::arg("z"));
    m.def(
        "svc_length",
        [](int level, const std::string& removed) {
            return svc_set(level, rational_of(removed)).set.total_length();
        },
        py::arg("level"), py::arg("removed"));

    m.def(
        "reflection_sweep_ok",
        [](int kmax) {
            const std::pair<long long, long long> rs[] = {{0, 1}, {3, 10}, {3, 5}};
            for (int k = 1; k <= kmax; ++k)
                for (int a = 1; a <= k; ++a)
                    for (const auto& r : rs)
                        if (!reflection_inequalities_hold(
                                rw_exact_tail(k, Rational128(r.first, r.second), a)))
                            return false;
            return true;
        },
        py::arg("kmax") = 12);

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            const ExperimentConfig cfg = parse_config(nlohmann::json::parse(config_json));
            return run_experiment(cfg).summary.dump();
        },
        py::arg("config_json"), "Runs an experiment; returns the summary as a JSON string.");
    m.def(
        "check_model",
        [](const std::string& config_json) {
            const ExperimentConfig cfg = parse_config(nlohmann::json::parse(config_json));
            return check_model(cfg).dump();
        },
        py::arg("config_json"));
}
