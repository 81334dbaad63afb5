#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oucl/common.hpp"
#include "oucl/experiment.hpp"
#include "oucl/interval_union.hpp"
#include "oucl/rw_oracle.hpp"

namespace {

using nlohmann::json;

oucl::Rational parse_removed(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return oucl::Rational::from_decimal_string(s);
    return oucl::Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool has_seed,
            std::uint64_t seed, long samples, int threads) {
    oucl::ExperimentConfig cfg = oucl::load_config(config_path);
    if (!out_dir.empty()) {
        cfg.output_dir = out_dir;
        cfg.raw["output_dir"] = out_dir;
    }
    if (has_seed) {
        cfg.seed = seed;
        cfg.raw["seed"] = seed;
    }
    if (samples > 0) {
        cfg.sample_count = samples;
        cfg.raw["sample_count"] = samples;
    }
    if (threads > 0) cfg.threads = threads;  // execution detail, not part of the recorded plan
    const oucl::Manifest man = oucl::run_experiment(cfg);
    json out;
    out["experiment"] = cfg.experiment;
    out["manifest"] = man.manifest_path;
    out["summary"] = man.summary;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_check_model(const std::string& config_path) {
    const oucl::ExperimentConfig cfg = oucl::load_config(config_path);
    const json report = oucl::check_model(cfg);
    std::cout << report.dump(2) << "\n";
    return report.value("gates_pass", false) ? 0 : 3;
}

int cmd_lemma23(int kmax) {
    if (kmax < 1 || kmax > 18) throw oucl::ConfigError("config error at --kmax: must lie in 1..18");
    const std::pair<long long, long long> rs[] = {{0, 1}, {3, 10}, {3, 5}};
    long rows = 0, violations = 0;
    for (int k = 1; k <= kmax; ++k)
        for (int a = 1; a <= k; ++a)
            for (const auto& r : rs) {
                const oucl::RwTailExact tail =
                    oucl::rw_exact_tail(k, oucl::Rational128(r.first, r.second), a);
                ++rows;
                if (!oucl::reflection_inequalities_hold(tail)) ++violations;
            }
    json out;
    out["kmax"] = kmax;
    out["rows"] = rows;
    out["violations"] = violations;
    out["all_hold"] = violations == 0;
    std::cout << out.dump(2) << "\n";
    if (violations != 0)
        throw oucl::AccuracyError("reflection inequalities violated in the exact sweep");
    return 0;
}

int cmd_svc(int level, const std::string& removed_str) {
    const oucl::Rational removed = parse_removed(removed_str);
    const oucl::SvcSet s = oucl::svc_set(level, removed);
    double min_overlap = s.set.total_length();
    double argmin = 0.0;
    const int half = 100;
    for (int j = -half; j <= half; ++j) {
        const double z = 0.1 * double(j) / double(half);
        const double ov = oucl::interval_overlap(s.set, z);
        if (ov < min_overlap) {
            min_overlap = ov;
            argmin = z;
        }
    }
    json out;
    out["level"] = level;
    out["removed"] = std::to_string(removed.num) + "/" + std::to_string(removed.den);
    out["intervals"] = s.set.size();
    out["length"] = s.set.total_length();
    out["length_exact"] = std::to_string(s.exact_length.num) + "/" +
                          std::to_string(s.exact_length.den);
    out["min_overlap_within_0.1"] = min_overlap;
    out["argmin_shift"] = argmin;
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OU coupling lab: exact endpoint samplers, coupled walks and "
                 "total-variation estimates for Levy-driven Ornstein-Uhlenbeck models"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    long samples = 0;
    int threads = 0;

    CLI::App* run = app.add_subcommand("run", "run an experiment described by a JSON config");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory override");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "seed override");
    run->add_option("--samples", samples, "sample count override");
    run->add_option("--threads", threads, "worker thread override");

    CLI::App* check = app.add_subcommand("check-model", "evaluate model gates without sampling");
    check->add_option("config", config_path, "experiment config (JSON)")->required();

    int kmax = 12;
    CLI::App* lemma = app.add_subcommand(
        "lemma23", "exact reflection-inequality sweep for lazy simple random walks");
    lemma->add_option("--kmax", kmax, "largest walk length (<= 18)");

    int level = 10;
    std::string removed = "1/4";
    CLI::App* svc = app.add_subcommand("svc", "Smith-Volterra-Cantor set summary");
    svc->add_option("--level", level, "construction level");
    svc->add_option("--removed", removed, "total removed length (decimal or p/q)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed())
            return cmd_run(config_path, out_dir, seed_opt->count() > 0, seed, samples, threads);
        if (check->parsed()) return cmd_check_model(config_path);
        if (lemma->parsed()) return cmd_lemma23(kmax);
        if (svc->parsed()) return cmd_svc(level, removed);
    } catch (const oucl::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const oucl::PreconditionError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const oucl::GateError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const oucl::AccuracyError& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
