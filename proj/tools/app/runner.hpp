#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "artifacts.hpp"
#include "config.hpp"

namespace mfgabs::app {

inline constexpr const char* kOutputRootEnv = "MFGABS_OUTPUT_ROOT";

std::vector<std::string> subcommands();

/// Explicit override if given; otherwise output.directory, placed under
/// $MFGABS_OUTPUT_ROOT when that is set and the directory is relative.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config,
                                         const std::optional<std::filesystem::path>& override_dir);

struct RunResult {
    int exit_code = 0;
    ArtifactSet artifacts;
    std::string summary;  // one line for the terminal
};

/// Executes a subcommand and returns its artifacts without touching the disk.
/// Throws ConfigError for an unknown subcommand; solver and simulation
/// errors propagate.
RunResult execute(const std::string& subcommand, const ExperimentConfig& config);

/// execute + commit to the output directory.
RunResult run(const std::string& subcommand, const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace mfgabs::app
