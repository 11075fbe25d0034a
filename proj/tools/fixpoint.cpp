// fixpoint run|verify|compare <config> [--seed N] [--max-iter N] [--out DIR] [--no-timestamps]

#include "fixpoint/cli/commands.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("fixpoint");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    const char* env = std::getenv("FIXPOINT_LOG");
    if (!env) return;
    const std::string level(env);
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("FIXPOINT_LOG='{}' not one of error, info, debug; using info", level);
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Projection algorithms for common fixed points of operator families"};
    app.require_subcommand(1);

    fixpoint::cli::Overrides overrides;
    std::string config;
    std::uint64_t seed = 0;
    std::size_t max_iter = 0;
    std::string out_dir;

    for (const char* name : {"run", "verify", "compare"}) {
        const char* help = std::string(name) == "run"      ? "Run the selected algorithms and write traces"
                           : std::string(name) == "verify" ? "Run the verification batteries"
                                                            : "Run several algorithms and compare them";
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", config, "Experiment configuration (JSON)")->required();
        sub->add_option("--seed", seed, "Override the config seed");
        sub->add_option("--max-iter", max_iter, "Override run.max_iter");
        sub->add_option("--out", out_dir, "Override the output directory");
        sub->add_flag("--no-timestamps", overrides.no_timestamps, "Omit generation timestamps from outputs");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fixpoint::cli::kConfigError;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--max-iter")) overrides.max_iter = max_iter;
    if (sub->count("--out")) overrides.out_dir = out_dir;

    const int code = fixpoint::cli::dispatch(sub->get_name(), config, overrides, std::cout);
    std::cout.flush();
    return code;
}
