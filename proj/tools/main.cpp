#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfgabs/error.hpp"
#include "runner.hpp"

namespace {

/// Structured error on stderr: {"error": kind, "message": what}.
int fail(const char* kind, const std::exception& e, int code)
{
    std::cerr << nlohmann::json{{"error", kind}, {"message", e.what()}}.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace mfgabs;
    CLI::App cli{"Absorbed mean-field game laboratory"};
    cli.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    for (const std::string& name : app::subcommands()) {
        CLI::App* sub = cli.add_subcommand(name);
        sub->add_option("--config,-c", config_path, "experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--output,-o", output_dir, "output directory (overrides the config and $MFGABS_OUTPUT_ROOT)");
    }
    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Usage errors share the configuration exit code; --help exits 0.
        return cli.exit(e) == 0 ? 0 : 2;
    }
    const std::string subcommand = cli.get_subcommands().front()->get_name();

    try {
        const app::ExperimentConfig config = app::load_config(config_path);
        const auto dir = app::resolve_output_dir(
            config, output_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(output_dir));
        const app::RunResult result = app::run(subcommand, config, dir);
        std::cout << result.summary << "\n" << "outputs: " << dir.string() << "\n";
        return result.exit_code;
    } catch (const ConfigError& e) {
        return fail("config", e, 2);
    } catch (const IoError& e) {
        return fail("io", e, 3);
    } catch (const NumericalBlowup& e) {
        return fail("simulation", e, 4);
    } catch (const SolverError& e) {
        return fail("solver", e, 4);
    } catch (const DomainError& e) {
        return fail("domain", e, 5);
    } catch (const std::exception& e) {
        return fail("internal", e, 70);
    }
}
