#include "oucl/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include "oucl/common.hpp"
#include "oucl/coupling.hpp"
#include "oucl/estimate.hpp"
#include "oucl/interval_union.hpp"
#include "oucl/rw_oracle.hpp"
#include "oucl/spectral.hpp"
#include "oucl/symbol.hpp"

namespace oucl {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& pointer, const std::string& what) {
    throw ConfigError("config error at " + pointer + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& pointer) {
    if (!j.is_object() || !j.contains(key)) config_fail(pointer + "/" + key, "required field");
    return j.at(key);
}

double need_number(const json& j, const char* key, const std::string& pointer) {
    const json& v = need(j, key, pointer);
    if (!v.is_number()) config_fail(pointer + "/" + key, "must be a number");
    return v.get<double>();
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& pointer) {
    if (j.is_number()) {
        Eigen::MatrixXd m(1, 1);
        m(0, 0) = j.get<double>();
        return m;
    }
    if (!j.is_array() || j.empty()) config_fail(pointer, "must be a matrix");
    if (j.front().is_number()) {
        Eigen::MatrixXd m(j.size(), 1);
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) config_fail(pointer, "must be numeric");
            m(long(i), 0) = j[i].get<double>();
        }
        return m;
    }
    const std::size_t cols = j.front().size();
    Eigen::MatrixXd m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) config_fail(pointer, "ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) config_fail(pointer, "must be numeric");
            m(long(i), long(c)) = j[i][c].get<double>();
        }
    }
    return m;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& pointer) {
    if (j.is_number()) {
        Eigen::VectorXd v(1);
        v(0) = j.get<double>();
        return v;
    }
    if (!j.is_array()) config_fail(pointer, "must be a vector");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) config_fail(pointer, "must be numeric");
        v(long(i)) = j[i].get<double>();
    }
    return v;
}

Rational parse_fraction(const json& j, const std::string& pointer) {
    try {
        if (j.is_number()) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.15g", j.get<double>());
            return Rational::from_decimal_string(buf);
        }
        if (j.is_string()) {
            const std::string s = j.get<std::string>();
            const auto slash = s.find('/');
            if (slash == std::string::npos) return Rational::from_decimal_string(s);
            return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
        }
    } catch (const std::exception& e) {
        config_fail(pointer, e.what());
    }
    config_fail(pointer, "must be a number or a fraction string");
}

DensityProfile parse_profile(const json& j, const std::string& pointer) {
    if (!j.is_object()) config_fail(pointer, "must be an object");
    const std::string kind = need(j, "kind", pointer).get<std::string>();
    if (kind == "constant") return DensityProfile::constant(j.value("height", 1.0));
    if (kind == "power")
        return DensityProfile::power(need_number(j, "center", pointer),
                                     need_number(j, "exponent", pointer), j.value("coeff", 1.0));
    config_fail(pointer + "/kind", "unknown profile kind '" + kind + "'");
}

LevyMeasure parse_measure(const json& j, const std::string& pointer) {
    if (!j.is_object()) config_fail(pointer, "must be an object");
    const std::string type = need(j, "type", pointer).get<std::string>();
    if (type == "zero") return LevyMeasure::zero(j.value("dim", 1));
    if (type == "uniform") {
        const double lo = need_number(j, "lo", pointer), hi = need_number(j, "hi", pointer);
        if (!(lo < hi)) config_fail(pointer, "needs lo < hi");
        return LevyMeasure::density(IntervalUnion({{lo, hi}}),
                                    DensityProfile::constant(j.value("height", 1.0)));
    }
    if (type == "svc") {
        const int level = j.value("level", 10);
        const Rational removed =
            j.contains("removed") ? parse_fraction(j.at("removed"), pointer + "/removed")
                                  : Rational(1, 4);
        return LevyMeasure::density(svc_set(level, removed).set, DensityProfile::constant(1.0));
    }
    if (type == "atomic") {
        const json& jl = need(j, "locations", pointer);
        const json& jm = need(j, "masses", pointer);
        if (!jl.is_array() || !jm.is_array() || jl.size() != jm.size())
            config_fail(pointer, "locations and masses must be equal-length arrays");
        std::vector<Eigen::VectorXd> locs;
        std::vector<double> masses;
        for (std::size_t i = 0; i < jl.size(); ++i) {
            locs.push_back(parse_vector(jl[i], pointer + "/locations"));
            if (!jm[i].is_number()) config_fail(pointer + "/masses", "must be numeric");
            masses.push_back(jm[i].get<double>());
        }
        return LevyMeasure::atomic(std::move(locs), std::move(masses));
    }
    if (type == "stable")
        return LevyMeasure::stable(need_number(j, "alpha", pointer), j.value("scale", 1.0),
                                   j.value("dim", 1));
    if (type == "density") {
        const json& js = need(j, "support", pointer);
        if (!js.is_array()) config_fail(pointer + "/support", "must be an interval list");
        std::vector<std::pair<double, double>> ivs;
        for (const auto& iv : js) {
            if (!iv.is_array() || iv.size() != 2)
                config_fail(pointer + "/support", "each interval is [lo, hi]");
            ivs.emplace_back(iv[0].get<double>(), iv[1].get<double>());
        }
        return LevyMeasure::density(IntervalUnion(ivs),
                                    parse_profile(need(j, "profile", pointer), pointer + "/profile"),
                                    j.value("quad_cells", 4096));
    }
    config_fail(pointer + "/type", "unknown measure type '" + type + "'");
}

const char* const kExperiments[] = {"tv_decay",      "coupling_tail", "lemma23_sweep",
                                    "symbol_bounds", "gradient_scan", "cantor_demo",
                                    "overlap_check", "negative_control"};

}  // namespace

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) config_fail("", "config must be a JSON object");
    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.schema_version = j.value("schema_version", 0);
    if (cfg.schema_version != 1) config_fail("/schema_version", "must be 1");

    cfg.experiment = need(j, "experiment", "").get<std::string>();
    if (std::find_if(std::begin(kExperiments), std::end(kExperiments),
                     [&](const char* e) { return cfg.experiment == e; }) ==
        std::end(kExperiments))
        config_fail("/experiment", "unknown experiment '" + cfg.experiment + "'");

    if (!j.contains("seed")) config_fail("/seed", "required (runs never use wall-clock seeds)");
    const json& js = j.at("seed");
    if (!(js.is_number_unsigned() || (js.is_number_integer() && js.get<long long>() >= 0)))
        config_fail("/seed", "must be a nonnegative integer");
    cfg.seed = js.get<std::uint64_t>();

    const json& jm = need(j, "model", "");
    const Eigen::MatrixXd A = parse_matrix(need(jm, "A", "/model"), "/model/A");
    Eigen::MatrixXd B;
    if (jm.contains("B"))
        B = parse_matrix(jm.at("B"), "/model/B");
    else
        B = Eigen::MatrixXd::Identity(A.rows(), A.rows());
    const json& jt = need(jm, "triplet", "/model");
    const LevyMeasure nu = parse_measure(need(jt, "nu", "/model/triplet"), "/model/triplet/nu");
    const int d = int(B.cols());
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    if (jt.contains("Q")) Q = parse_matrix(jt.at("Q"), "/model/triplet/Q");
    if (jt.contains("b")) b = parse_vector(jt.at("b"), "/model/triplet/b");
    try {
        cfg.model = OUModel::make(A, B, LevyTriplet::make(Q, b, nu));
    } catch (const ConfigError& e) {
        config_fail("/model", e.what());
    }

    if (j.contains("t_grid")) {
        for (const auto& v : j.at("t_grid")) {
            if (!v.is_number() || !(v.get<double>() > 0.0))
                config_fail("/t_grid", "entries must be positive times");
            cfg.t_grid.push_back(v.get<double>());
        }
    } else if (j.contains("t")) {
        cfg.t_grid.push_back(j.at("t").get<double>());
    }
    cfg.sample_count = j.value("sample_count", 0L);
    if (cfg.sample_count < 0) config_fail("/sample_count", "must be nonnegative");
    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.threads = j.value("threads", 1);
    if (cfg.threads < 1) config_fail("/threads", "must be at least 1");
    cfg.epsilon = j.value("epsilon", 0.0);
    if (cfg.epsilon < 0.0) config_fail("/epsilon", "must be nonnegative");
    cfg.driver = j.value("driver", std::string("auto"));

    cfg.x = Eigen::VectorXd::Zero(cfg.model.n);
    cfg.y = Eigen::VectorXd::Zero(cfg.model.n);
    if (j.contains("x")) cfg.x = parse_vector(j.at("x"), "/x");
    if (j.contains("y")) cfg.y = parse_vector(j.at("y"), "/y");
    if (cfg.x.size() != cfg.model.n || cfg.y.size() != cfg.model.n)
        config_fail("/x", "start points must have the state dimension");

    cfg.delta = j.value("delta", 0.0);
    cfg.bins = j.value("bins", 0);
    if (j.contains("k_grid"))
        for (const auto& v : j.at("k_grid")) cfg.k_grid.push_back(v.get<int>());
    cfg.fit_k = j.value("fit_k", 4);
    cfg.kmax = j.value("kmax", 12);
    cfg.svc_level = j.value("svc_level", 10);
    if (j.contains("svc_removed")) {
        const json& r = j.at("svc_removed");
        cfg.svc_removed = r.is_string() ? r.get<std::string>() : r.dump();
    }
    cfg.grid_points = j.value("grid_points", 201);
    if (cfg.grid_points < 3) config_fail("/grid_points", "must be at least 3");
    if (j.contains("probe")) {
        const json& p = j.at("probe");
        cfg.probe_lo = p.value("lo", -5.0);
        cfg.probe_hi = p.value("hi", 5.0);
        cfg.probe_points = p.value("points", 81);
    }
    if (j.contains("z0")) {
        cfg.z0 = j.at("z0").get<double>();
        cfg.has_z0 = true;
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config error at <file>: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config error at <file>: " + std::string(e.what()));
    }
    return parse_config(j);
}

std::string sha256_hex_of_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw AccuracyError("cannot hash missing file '" + path + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.good()) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, std::size_t(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char b[48];
    std::snprintf(b, sizeof b, "%.12g", v);
    return b;
}

// Collects written artifacts so the manifest can list and hash them.
struct Artifacts {
    std::filesystem::path dir;
    const ExperimentConfig* cfg = nullptr;
    std::vector<ManifestEntry> entries;

    void write(const std::string& name, const std::string& content,
               const std::vector<std::string>& columns) {
        const auto path = dir / name;
        {
            std::ofstream out(path, std::ios::binary);
            out << content;
        }
        entries.push_back({name, sha256_hex_of_file(path.string())});
        json side;
        side["experiment"] = cfg->experiment;
        side["columns"] = columns;
        side["config"] = cfg->raw;
        const auto sidecar = path.string() + ".json";
        {
            std::ofstream out(sidecar, std::ios::binary);
            out << side.dump(2) << "\n";
        }
        entries.push_back({name + ".json", sha256_hex_of_file(sidecar)});
    }
};

std::string csv_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line.push_back(',');
        line += cells[i];
    }
    line.push_back('\n');
    return line;
}

void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || count < 2) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        constexpr long kChunk = 64;
        for (;;) {
            const long lo = next.fetch_add(kChunk);
            if (lo >= count) return;
            const long hi = std::min(lo + kChunk, count);
            try {
                for (long i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

double effective_epsilon(const ExperimentConfig& cfg) {
    return cfg.epsilon > 0.0 ? cfg.epsilon : 0.1;
}

DriverSpec resolve_driver(const ExperimentConfig& cfg) {
    DriverSpec d;
    d.epsilon = effective_epsilon(cfg);
    const std::string& name = cfg.driver;
    if (name == "cp") {
        d.mode = DriverSpec::Mode::CpTruncated;
    } else if (name == "stable") {
        d.mode = DriverSpec::Mode::StableExact;
    } else if (name == "gaussian") {
        d.mode = DriverSpec::Mode::GaussianExact;
    } else if (name == "euler") {
        d.mode = DriverSpec::Mode::PathEuler;
    } else if (name == "auto") {
        const bool q_zero = cfg.model.triplet.Q.isZero(0.0);
        if (cfg.model.triplet.nu.is_zero()) {
            d.mode = DriverSpec::Mode::GaussianExact;
        } else if (std::holds_alternative<StableMeasure>(cfg.model.triplet.nu.rep) && q_zero &&
                   cfg.model.n == 1 && cfg.model.d == 1) {
            d.mode = DriverSpec::Mode::StableExact;
        } else {
            d.mode = DriverSpec::Mode::CpTruncated;
        }
    } else {
        config_fail("/driver", "unknown driver '" + name + "'");
    }
    return d;
}

std::uint64_t sample_stream(std::size_t t_idx, int chain, long i) {
    return (std::uint64_t(t_idx) * 2 + std::uint64_t(chain) + 1) << 33 | std::uint64_t(i);
}

void require_statistical_count(const ExperimentConfig& cfg) {
    if (cfg.sample_count < 1000)
        config_fail("/sample_count", "statistical experiments need at least 1000 samples");
}

void draw_endpoint_pair(const ExperimentConfig& cfg, const DriverSpec& driver, double t,
                        std::size_t t_idx, std::vector<Eigen::VectorXd>& sx,
                        std::vector<Eigen::VectorXd>& sy) {
    const long n = cfg.sample_count;
    sx.assign(n, Eigen::VectorXd());
    sy.assign(n, Eigen::VectorXd());
    parallel_for(n, cfg.threads, [&](long i) {
        RngStream rx(cfg.seed, sample_stream(t_idx, 0, i));
        RngStream ry(cfg.seed, sample_stream(t_idx, 1, i));
        sx[i] = sample_ou_endpoint(cfg.model, t, cfg.x, driver, rx);
        sy[i] = sample_ou_endpoint(cfg.model, t, cfg.y, driver, ry);
    });
}

int default_bins(const ExperimentConfig& cfg) {
    if (cfg.bins > 0) return cfg.bins;
    return cfg.model.n == 1 ? 64 : 32;
}

json tv_rows_to_json(const TVCurve& curve) {
    json rows = json::array();
    for (const auto& r : curve) {
        json row;
        row["t"] = r.t;
        row["tv_hat"] = r.tv_hat;
        row["std_err"] = r.std_err;
        row["bound_sqrt"] = r.bound_sqrt;
        if (r.bound_gradient) row["bound_symbol"] = *r.bound_gradient;
        rows.push_back(row);
    }
    return rows;
}

json run_tv_decay(const ExperimentConfig& cfg, Artifacts& art) {
    require_statistical_count(cfg);
    if (cfg.t_grid.empty()) config_fail("/t_grid", "required for tv_decay");
    const SpectralReport spec = spectral_report(cfg.model.A);
    require_bounded_semigroup(spec);
    const double eps = effective_epsilon(cfg);
    double gamma = -1.0;
    const auto& rep = cfg.model.triplet.nu.rep;
    if (std::holds_alternative<AtomicMeasure>(rep) || std::holds_alternative<DensityMeasure>(rep)) {
        const double delta = cfg.delta > 0.0 ? cfg.delta : 0.1;
        gamma = gamma_delta(normalize(truncate(cfg.model.triplet.nu, eps)), delta);
        if (!(gamma > 0.0))
            throw GateError(
                "the shifted-overlap condition fails: no mass survives shifts up to the "
                "configured radius");
    }

    const DriverSpec driver = resolve_driver(cfg);
    const int bins = default_bins(cfg);
    TVCurve curve;
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        const double t = cfg.t_grid[ti];
        std::vector<Eigen::VectorXd> sx, sy;
        draw_endpoint_pair(cfg, driver, t, ti, sx, sy);
        const TVEstimate est = tv_histogram(sx, sy, bins);
        TVRow row;
        row.t = t;
        row.tv_hat = est.tv_hat;
        row.std_err = est.std_err;
        try {
            row.bound_gradient = bound_report(cfg.model, t, cfg.x, cfg.y).tv_bound;
        } catch (const Error&) {
        }
        curve.push_back(row);
    }
    const double c_hat = curve.front().tv_hat * std::sqrt(curve.front().t);
    bool dominated = true;
    for (auto& row : curve) {
        row.bound_sqrt = c_hat / std::sqrt(row.t);
        dominated = dominated && row.tv_hat <= row.bound_sqrt + 1e-12;
    }

    std::string csv = csv_line({"t", "tv_hat", "std_err", "bound_sqrt_fit", "bound_symbol"});
    for (const auto& r : curve)
        csv += csv_line({fmt(r.t), fmt(r.tv_hat), fmt(r.std_err), fmt(r.bound_sqrt),
                         r.bound_gradient ? fmt(*r.bound_gradient) : ""});
    art.write("tv_decay.csv", csv, {"t", "tv_hat", "std_err", "bound_sqrt_fit", "bound_symbol"});

    json summary;
    summary["rows"] = tv_rows_to_json(curve);
    summary["c_hat"] = c_hat;
    summary["sqrt_envelope_dominates"] = dominated;
    if (gamma >= 0.0) summary["overlap_gamma"] = gamma;
    try {
        const FitResult fit = fit_decay(curve);
        summary["fit"] = {{"slope", fit.slope},
                          {"intercept", fit.intercept},
                          {"r_squared", fit.r_squared},
                          {"used_rows", fit.used_rows}};
    } catch (const AccuracyError& e) {
        summary["fit"] = {{"error", e.what()}};
    }
    return summary;
}

json run_negative_control(const ExperimentConfig& cfg, Artifacts& art) {
    require_statistical_count(cfg);
    if (cfg.t_grid.empty()) config_fail("/t_grid", "required for negative_control");
    const DriverSpec driver = resolve_driver(cfg);
    const int bins = default_bins(cfg);
    json rows = json::array();
    std::string csv = csv_line({"t", "tv_hat", "std_err"});
    double min_tv = 2.0;
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        const double t = cfg.t_grid[ti];
        std::vector<Eigen::VectorXd> sx, sy;
        draw_endpoint_pair(cfg, driver, t, ti, sx, sy);
        const TVEstimate est = tv_histogram(sx, sy, bins);
        min_tv = std::min(min_tv, est.tv_hat);
        rows.push_back({{"t", t}, {"tv_hat", est.tv_hat}, {"std_err", est.std_err}});
        csv += csv_line({fmt(t), fmt(est.tv_hat), fmt(est.std_err)});
    }
    art.write("negative_control.csv", csv, {"t", "tv_hat", "std_err"});
    json summary;
    summary["rows"] = rows;
    summary["min_tv"] = min_tv;
    summary["no_decay"] = min_tv >= 0.5;
    return summary;
}

json run_coupling_tail(const ExperimentConfig& cfg, Artifacts& art) {
    require_statistical_count(cfg);
    const double t = cfg.t_grid.empty() ? 50.0 : cfg.t_grid.front();
    const double eps = effective_epsilon(cfg);
    const SpectralReport spec = spectral_report(cfg.model.A);
    require_bounded_semigroup(spec);
    if (!cfg.model.B_pinv)
        throw GateError("the coupled construction needs a full-row-rank noise matrix");

    const long runs = cfg.sample_count;
    struct Rec {
        int jumps = 0;
        int step = CouplingRun::kNotCoupled;
        double gap = 0.0;
    };
    std::vector<Rec> recs(runs);
    parallel_for(runs, cfg.threads, [&](long i) {
        RngStream rng(cfg.seed, std::uint64_t(i));
        const CouplingRun run = run_coupled_walks(cfg.model, eps, t, cfg.x, cfg.y, rng);
        recs[i] = {int(run.jump_times.size()), run.coupling_step, run.gap};
    });

    std::string runs_csv = csv_line({"run_id", "jump_count", "coupling_step", "gap"});
    for (long i = 0; i < runs; ++i)
        runs_csv += csv_line({std::to_string(i), std::to_string(recs[i].jumps),
                              std::to_string(recs[i].step), fmt(recs[i].gap)});
    art.write("coupling_runs.csv", runs_csv, {"run_id", "jump_count", "coupling_step", "gap"});

    const FiniteMeasure nu_bar = normalize(truncate(cfg.model.triplet.nu, eps));
    const double bbar_norm = operator_norm(*cfg.model.B_pinv);
    const double derived_delta = spec.c_a * bbar_norm * (cfg.x - cfg.y).norm();
    const double delta = cfg.delta > 0.0 ? cfg.delta : derived_delta;
    const double gamma = gamma_delta(nu_bar, delta);
    if (!(gamma > 0.0))
        throw GateError("the shifted-overlap infimum vanishes at the configured radius");

    std::vector<int> k_grid = cfg.k_grid;
    if (k_grid.empty()) k_grid = {4, 8, 16, 32, 64, 128};
    auto p_hat = [&](int k) {
        long c = 0;
        for (const auto& r : recs)
            if (r.step == CouplingRun::kNotCoupled || r.step > k) ++c;
        return double(c) / double(runs);
    };
    const double p_fit = p_hat(cfg.fit_k);
    const double c_clt =
        std::max(0.0, (p_fit - 4.0 * (1.0 - gamma) / (gamma * cfg.fit_k)) *
                          std::sqrt(double(cfg.fit_k)));

    std::string csv = csv_line({"k", "p_hat", "envelope", "dominated"});
    json table = json::array();
    bool dominated_all = true;
    std::vector<double> lu, lv;
    for (int k : k_grid) {
        const double p = p_hat(k);
        const double env = coupling_tail_bound(gamma, k, c_clt);
        const bool dom = p <= env + 1e-12;
        if (k != cfg.fit_k) dominated_all = dominated_all && dom;
        table.push_back({{"k", k}, {"p_hat", p}, {"envelope", env}, {"dominated", dom}});
        csv += csv_line({std::to_string(k), fmt(p), fmt(env), dom ? "1" : "0"});
        if (p > 0.0) {
            lu.push_back(std::log(double(k)));
            lv.push_back(std::log(p));
        }
    }
    art.write("coupling_tail.csv", csv, {"k", "p_hat", "envelope", "dominated"});

    json summary;
    summary["t"] = t;
    summary["runs"] = runs;
    summary["gamma"] = gamma;
    summary["delta"] = delta;
    summary["start_gap_within_radius"] =
        (cfg.x - cfg.y).norm() <= delta / (spec.c_a * bbar_norm) + 1e-12;
    summary["fit_k"] = cfg.fit_k;
    summary["c_clt"] = c_clt;
    summary["tail"] = table;
    summary["envelope_dominates"] = dominated_all;
    long coupled = 0;
    for (const auto& r : recs)
        if (r.step != CouplingRun::kNotCoupled) ++coupled;
    summary["coupled_fraction"] = double(coupled) / double(runs);
    if (lu.size() >= 2) {
        const double um = std::accumulate(lu.begin(), lu.end(), 0.0) / double(lu.size());
        const double vm = std::accumulate(lv.begin(), lv.end(), 0.0) / double(lv.size());
        double suu = 0.0, suv = 0.0;
        for (std::size_t i = 0; i < lu.size(); ++i) {
            suu += (lu[i] - um) * (lu[i] - um);
            suv += (lu[i] - um) * (lv[i] - vm);
        }
        summary["tail_slope"] = suv / suu;
    }
    return summary;
}

json run_lemma23_sweep(const ExperimentConfig& cfg, Artifacts& art) {
    if (cfg.kmax < 1 || cfg.kmax > 18) config_fail("/kmax", "must lie in 1..18");
    const std::pair<long long, long long> rs[] = {{0, 1}, {3, 10}, {3, 5}};
    std::string csv = csv_line(
        {"k", "a", "r", "max_ge", "end_ge", "end_gt", "max_lt", "mid_closed", "mid_open", "holds"});
    long rows = 0, violations = 0;
    for (int k = 1; k <= cfg.kmax; ++k) {
        for (int a = 1; a <= k; ++a) {
            for (const auto& r : rs) {
                const Rational128 rr(r.first, r.second);
                const RwTailExact tail = rw_exact_tail(k, rr, a);
                const bool holds = reflection_inequalities_hold(tail);
                if (!holds) ++violations;
                ++rows;
                csv += csv_line({std::to_string(k), std::to_string(a),
                                 std::to_string(r.first) + "/" + std::to_string(r.second),
                                 fmt(double(tail.max_ge)), fmt(double(tail.end_ge)),
                                 fmt(double(tail.end_gt)), fmt(double(tail.max_lt)),
                                 fmt(double(tail.mid_closed)), fmt(double(tail.mid_open)),
                                 holds ? "1" : "0"});
            }
        }
    }
    art.write("lemma23.csv", csv,
              {"k", "a", "r", "max_ge", "end_ge", "end_gt", "max_lt", "mid_closed", "mid_open",
               "holds"});
    json summary;
    summary["kmax"] = cfg.kmax;
    summary["rows"] = rows;
    summary["violations"] = violations;
    summary["all_hold"] = violations == 0;
    return summary;
}

json run_symbol_bounds(const ExperimentConfig& cfg, Artifacts& art) {
    if (cfg.t_grid.empty()) config_fail("/t_grid", "required for symbol_bounds");
    require_bounded_semigroup(spectral_report(cfg.model.A));
    std::string csv = csv_line({"t", "phi_t_inverse", "tv_bound", "gradient_bound_small_t",
                                "gradient_bound_large_t", "growth_ratio_min", "growth_ok",
                                "horizon_increment", "smoothing_regime"});
    json rows = json::array();
    for (double t : cfg.t_grid) {
        const BoundReport rep = bound_report(cfg.model, t, cfg.x, cfg.y);
        rows.push_back({{"t", t},
                        {"phi_t_inverse", rep.phi_t_inverse},
                        {"tv_bound", rep.tv_bound},
                        {"gradient_bound_small_t", rep.gradient_bound_small_t},
                        {"gradient_bound_large_t", rep.gradient_bound_large_t},
                        {"growth_ok", rep.conditions.growth_ok},
                        {"smoothing_regime", rep.conditions.smoothing_regime}});
        csv += csv_line({fmt(t), fmt(rep.phi_t_inverse), fmt(rep.tv_bound),
                         fmt(rep.gradient_bound_small_t), fmt(rep.gradient_bound_large_t),
                         fmt(rep.conditions.growth_ratio_min),
                         rep.conditions.growth_ok ? "1" : "0",
                         fmt(rep.conditions.horizon_increment),
                         rep.conditions.smoothing_regime ? "1" : "0"});
    }
    art.write("symbol_bounds.csv", csv,
              {"t", "phi_t_inverse", "tv_bound", "gradient_bound_small_t",
               "gradient_bound_large_t", "growth_ratio_min", "growth_ok", "horizon_increment",
               "smoothing_regime"});
    json summary;
    summary["rows"] = rows;
    return summary;
}

json run_gradient_scan(const ExperimentConfig& cfg, Artifacts& art) {
    if (cfg.t_grid.empty()) config_fail("/t_grid", "required for gradient_scan");
    LatticeSpec probe{cfg.probe_lo, cfg.probe_hi, cfg.probe_points};
    const auto indicator = [](const Eigen::VectorXd& v) { return v(0) >= 0.0 ? 1.0 : 0.0; };
    std::string csv = csv_line({"t", "sup_grad", "h", "phi_inv_bound"});
    json rows = json::array();
    for (double t : cfg.t_grid) {
        const GradientEstimate est = gradient_sup_norm(cfg.model, t, indicator, probe);
        const double tmin = std::min(t, 1.0);
        const double bound = phi_inverse(cfg.model, tmin, 1.0 / tmin);
        rows.push_back({{"t", t}, {"sup_grad", est.sup_grad}, {"h", est.h}, {"bound", bound}});
        csv += csv_line({fmt(t), fmt(est.sup_grad), fmt(est.h), fmt(bound)});
    }
    art.write("gradient_scan.csv", csv, {"t", "sup_grad", "h", "phi_inv_bound"});
    json summary;
    summary["rows"] = rows;
    json ratios = json::array();
    for (std::size_t i = 0; i + 1 < cfg.t_grid.size(); ++i) {
        const double g0 = rows[i]["sup_grad"].get<double>();
        const double g1 = rows[i + 1]["sup_grad"].get<double>();
        if (g1 > 0.0)
            ratios.push_back({{"t_hi", cfg.t_grid[i]},
                              {"t_lo", cfg.t_grid[i + 1]},
                              {"ratio", g1 / g0}});
    }
    summary["ratios"] = ratios;
    return summary;
}

Rational rational_min(const Rational& a, const Rational& b) { return a < b ? a : b; }
Rational rational_max(const Rational& a, const Rational& b) { return a < b ? b : a; }

Rational exact_interval_overlap(const std::vector<std::pair<Rational, Rational>>& ivs,
                                const Rational& z) {
    Rational total(0, 1);
    std::size_t i = 0, j = 0;
    const std::size_t n = ivs.size();
    while (i < n && j < n) {
        const Rational a1 = ivs[i].first, b1 = ivs[i].second;
        const Rational a2 = ivs[j].first + z, b2 = ivs[j].second + z;
        const Rational lo = rational_max(a1, a2), hi = rational_min(b1, b2);
        if (lo < hi) total = total + (hi - lo);
        if (b1 < b2)
            ++i;
        else
            ++j;
    }
    return total;
}

std::string rational_str(const Rational& r) {
    return std::to_string(r.num) + "/" + std::to_string(r.den);
}

json run_cantor_demo(const ExperimentConfig& cfg, Artifacts& art) {
    const Rational removed = parse_fraction(json(cfg.svc_removed), "/svc_removed");
    const SvcSet svc = svc_set(cfg.svc_level, removed);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", cfg.delta > 0.0 ? cfg.delta : 0.1);
    const Rational zmax = Rational::from_decimal_string(buf);
    const int points = cfg.grid_points | 1;  // odd, so the grid contains 0
    const int half = (points - 1) / 2;
    const Rational spacing = zmax / Rational(half, 1);

    std::string csv = csv_line({"z", "overlap", "overlap_exact"});
    Rational min_overlap = svc.exact_length;
    Rational argmin(0, 1);
    for (int jx = -half; jx <= half; ++jx) {
        const Rational z = spacing * Rational(jx, 1);
        const Rational exact = exact_interval_overlap(svc.exact_intervals, z);
        if (exact < min_overlap) {
            min_overlap = exact;
            argmin = z;
        }
        const double approx = interval_overlap(svc.set, z.value());
        if (std::abs(approx - exact.value()) > 1e-9)
            throw AccuracyError("interval overlap cross-check failed");
        csv += csv_line({fmt(z.value()), fmt(exact.value()), rational_str(exact)});
    }
    art.write("cantor_overlap.csv", csv, {"z", "overlap", "overlap_exact"});

    const Rational quarter(1, 4);
    json summary;
    summary["level"] = cfg.svc_level;
    summary["removed"] = rational_str(removed);
    summary["set_length"] = rational_str(svc.exact_length);
    summary["intervals"] = svc.set.size();
    summary["zmax"] = zmax.value();
    summary["grid_points"] = points;
    summary["min_overlap"] = min_overlap.value();
    summary["min_overlap_exact"] = rational_str(min_overlap);
    summary["argmin_shift"] = argmin.value();
    summary["overlap_at_least_quarter"] = !(min_overlap < quarter);
    summary["verdict"] = !(min_overlap < quarter) ? "pass" : "fail";
    return summary;
}

json run_overlap_check(const ExperimentConfig& cfg, Artifacts& art) {
    const double eps = effective_epsilon(cfg);
    const FiniteMeasure mu = truncate(cfg.model.triplet.nu, eps);
    const double delta = cfg.delta > 0.0 ? cfg.delta : 0.1;
    const OverlapCertificate cert = shifted_overlap_certificate(mu, delta, cfg.grid_points);

    std::string csv = csv_line({"shift", "overlap"});
    const int half = (cfg.grid_points | 1) / 2;
    for (int jx = -half; jx <= half; ++jx) {
        const double z = delta * double(jx) / double(half);
        Eigen::VectorXd a = Eigen::VectorXd::Zero(mu.dim);
        a(0) = z;
        csv += csv_line({fmt(z), fmt(overlap_mass(mu, shift_measure(mu, a)))});
    }
    art.write("overlap_check.csv", csv, {"shift", "overlap"});

    json summary;
    summary["epsilon"] = eps;
    summary["delta"] = cert.delta;
    summary["grid_min"] = cert.grid_min;
    summary["argmin_shift"] = cert.argmin_shift;
    if (std::isfinite(cert.lipschitz_slack))
        summary["lipschitz_slack"] = cert.lipschitz_slack;
    else
        summary["lipschitz_slack"] = "unbounded";
    summary["positive"] = cert.grid_min > 0.0;
    if (cfg.has_z0) {
        const auto* dm = std::get_if<DensityMeasure>(&cfg.model.triplet.nu.rep);
        if (dm == nullptr)
            config_fail("/z0", "the overlap construction needs a density measure");
        const double ball = cfg.raw.value("ball", 0.5);
        const DensityOverlapRegion region =
            density_overlap_region(*dm, cfg.z0, ball, cfg.grid_points);
        summary["region"] = {{"K", region.K},
                             {"delta", region.delta},
                             {"sup_l1_shift", region.sup_l1_shift},
                             {"lower_bound", region.lower_bound},
                             {"at_least_K_over_8", region.lower_bound >= region.K / 8.0 - 1e-12}};
    }
    return summary;
}

}  // namespace

Manifest run_experiment(const ExperimentConfig& cfg) {
    Artifacts art;
    art.dir = cfg.output_dir;
    art.cfg = &cfg;
    std::filesystem::create_directories(art.dir);

    json summary;
    if (cfg.experiment == "tv_decay")
        summary = run_tv_decay(cfg, art);
    else if (cfg.experiment == "coupling_tail")
        summary = run_coupling_tail(cfg, art);
    else if (cfg.experiment == "lemma23_sweep")
        summary = run_lemma23_sweep(cfg, art);
    else if (cfg.experiment == "symbol_bounds")
        summary = run_symbol_bounds(cfg, art);
    else if (cfg.experiment == "gradient_scan")
        summary = run_gradient_scan(cfg, art);
    else if (cfg.experiment == "cantor_demo")
        summary = run_cantor_demo(cfg, art);
    else if (cfg.experiment == "overlap_check")
        summary = run_overlap_check(cfg, art);
    else if (cfg.experiment == "negative_control")
        summary = run_negative_control(cfg, art);
    else
        config_fail("/experiment", "unknown experiment '" + cfg.experiment + "'");

    Manifest man;
    man.summary = summary;
    std::sort(art.entries.begin(), art.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
    man.files = art.entries;

    json mj;
    mj["schema_version"] = 1;
    mj["experiment"] = cfg.experiment;
    mj["seed"] = cfg.seed;
    mj["config"] = cfg.raw;
    mj["summary"] = summary;
    json files = json::array();
    for (const auto& e : man.files) files.push_back({{"path", e.path}, {"sha256", e.sha256}});
    mj["files"] = files;

    const auto path = art.dir / "manifest.json";
    {
        std::ofstream out(path, std::ios::binary);
        out << mj.dump(2) << "\n";
    }
    man.manifest_path = path.string();
    return man;
}

json check_model(const ExperimentConfig& cfg) {
    json out;
    const SpectralReport spec = spectral_report(cfg.model.A);
    json eigs = json::array();
    for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i)
        eigs.push_back({{"re", spec.eigenvalues[i].real()},
                        {"im", spec.eigenvalues[i].imag()},
                        {"alg", spec.alg_mult[i]},
                        {"geom", spec.geom_mult[i]}});
    out["spectral"] = {{"stability", stability_name(spec.stability)},
                       {"abscissa", spec.spectral_abscissa},
                       {"c_a", spec.c_a},
                       {"gate", spec.gate_passes()},
                       {"eigenvalues", eigs}};
    out["rank"] = {{"rank_b", cfg.model.rank_B}, {"full_row_rank", bool(cfg.model.B_pinv)}};

    const double eps = effective_epsilon(cfg);
    bool mass_ok = false;
    try {
        const FiniteMeasure mu = truncate(cfg.model.triplet.nu, eps);
        mass_ok = mu.total_mass > 0.0 || cfg.model.triplet.nu.is_zero();
        out["truncation"] = {{"epsilon", eps}, {"mass", mu.total_mass}};
        const auto& rep = cfg.model.triplet.nu.rep;
        if (mu.total_mass > 0.0 && (std::holds_alternative<AtomicMeasure>(rep) ||
                                    std::holds_alternative<DensityMeasure>(rep))) {
            const double delta = cfg.delta > 0.0 ? cfg.delta : 0.1;
            out["overlap"] = {{"delta", delta}, {"gamma", gamma_delta(normalize(mu), delta)}};
        }
    } catch (const Error& e) {
        out["truncation"] = {{"error", e.what()}};
        mass_ok = cfg.model.triplet.nu.is_zero();
    }
    if (cfg.model.triplet.nu.is_zero() && !cfg.model.triplet.Q.isZero(0.0)) mass_ok = true;
    try {
        const ConditionReport cond = check_conditions(cfg.model, 1.0, 1e4);
        out["conditions"] = {{"growth_ratio_min", cond.growth_ratio_min},
                             {"growth_threshold", cond.growth_threshold},
                             {"growth_ok", cond.growth_ok},
                             {"time_integral_bounded", cond.time_integral_bounded},
                             {"horizon_increment", cond.horizon_increment},
                             {"smoothing_regime", cond.smoothing_regime}};
    } catch (const Error& e) {
        out["conditions"] = {{"error", e.what()}};
    }
    out["gates_pass"] = spec.gate_passes() && mass_ok;
    return out;
}

}  // namespace oucl
