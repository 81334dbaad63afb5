#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "oucl/ou_model.hpp"
#include "oucl/sampler.hpp"

namespace oucl {

// Parsed experiment plan.  `raw` keeps the original JSON for sidecars and
// manifest embedding.
struct ExperimentConfig {
    int schema_version = 1;
    std::string experiment;
    OUModel model;
    std::vector<double> t_grid;
    long sample_count = 0;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    int threads = 1;

    double epsilon = 0.0;          // truncation radius (0: default 0.1; no-op for finite measures)
    std::string driver = "auto";  // auto | cp | stable | gaussian | euler
    Eigen::VectorXd x, y;

    double delta = 0.0;      // shift radius for overlap checks (0: derived)
    int bins = 0;            // histogram bins per axis (0: dimension default)
    std::vector<int> k_grid; // coupling-tail log points
    int fit_k = 4;
    int kmax = 12;           // reflection-inequality sweep
    int svc_level = 10;
    std::string svc_removed = "1/4";
    int grid_points = 201;
    double probe_lo = -5.0, probe_hi = 5.0;
    int probe_points = 81;
    double z0 = 0.0;  // density overlap construction center
    bool has_z0 = false;

    nlohmann::json raw;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct ManifestEntry {
    std::string path;  // relative to the output directory
    std::string sha256;
};

struct Manifest {
    std::vector<ManifestEntry> files;
    nlohmann::json summary;
    std::string manifest_path;
};

// Runs the configured experiment and writes CSV artifacts, per-file sidecar
// JSONs and a manifest with content hashes into cfg.output_dir.
Manifest run_experiment(const ExperimentConfig& cfg);

// Gate checks only (spectral classification, rank, truncation mass, overlap
// and growth conditions); the report carries an overall "gates_pass" flag.
nlohmann::json check_model(const ExperimentConfig& cfg);

std::string sha256_hex_of_file(const std::string& path);

}  // namespace oucl
