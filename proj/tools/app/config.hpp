#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfgabs/model.hpp"

namespace mfgabs::app {

struct GridSection {
    std::size_t time_steps = 200;     // K
    std::size_t state_cells = 200;    // J
    std::optional<double> x_max;      // unset: upper edge of ν's support + 6σ√T
    double dt = 1e-2;                 // particle time step

    bool operator==(const GridSection&) const = default;
};

struct MfgSection {
    std::vector<double> schedule{4.0, 8.0, 16.0, 32.0, 64.0, 128.0};
    double damping = 0.5;
    double tol = 1e-3;
    std::size_t max_iter = 50;
    std::optional<double> alpha;

    bool operator==(const MfgSection&) const = default;
};

struct SimulateSection {
    std::size_t particles = 1000;
    std::size_t replications = 20;
    bool bridge = true;
    bool store_paths = false;
    /// "mfg" (solve the fixed point first) or "constant" (u ≡ constant_action).
    std::string policy = "mfg";
    double constant_action = 0.0;

    bool operator==(const SimulateSection&) const = default;
};

struct StudySection {
    std::vector<std::size_t> n_list{50, 100, 200, 400, 800, 1600, 3200};
    std::vector<int> alpha_list{1, 2, 4};
    bool frozen = false;
    std::size_t pilot_particles = 100000;
    std::size_t probe_count = 1000;
    std::size_t mc_paths = 10000;

    bool operator==(const StudySection&) const = default;
};

struct OutputSection {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "jsonl", "matrix"};

    bool has(const std::string& format) const;
    bool operator==(const OutputSection&) const = default;
};

struct ExperimentConfig {
    ModelParameters model;
    GridSection grids;
    MfgSection mfg;
    SimulateSection simulate;
    StudySection study;
    OutputSection output;
    std::uint64_t seed = 0;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates; throws ConfigError naming the offending key or field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved form (every default explicit); parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace mfgabs::app
