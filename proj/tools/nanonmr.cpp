#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nanonmr/cli.hpp"
#include "nanonmr/error.hpp"

namespace {

int fail(const std::string& command, const nanonmr::Error& e) {
    const nlohmann::json report = {{"command", command},
                                   {"status", "error"},
                                   {"kind", nanonmr::to_string(e.kind())},
                                   {"message", e.what()}};
    std::cerr << report.dump() << "\n";
    return nanonmr::cli::exit_code(e.kind());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spin-noise correlation functions for nanoscale NMR in confined fluids", "nanonmr"};
    app.set_version_flag("--version", NANONMR_VERSION);

    std::string command, config_path, out, format;
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("command", command, "Command to run")
        ->required()
        ->check(CLI::IsMember(nanonmr::cli::commands()));
    app.add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", out, "Output file (default: standard output)");
    auto* format_opt = app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config)");
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads (default: NANONMR_THREADS or 1)")
                            ->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    nanonmr::cli::RunConfig config;
    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw nanonmr::Error(nanonmr::ErrorKind::Io, "cannot read '" + config_path + "'");
        std::ostringstream text;
        text << in.rdbuf();
        config = nanonmr::cli::parse_config(text.str());
        if (!config.command.empty() && config.command != command)
            throw nanonmr::Error(nanonmr::ErrorKind::ConfigSemantic,
                                 "'command': config says \"" + config.command + "\" but \"" + command +
                                     "\" was requested");
    } catch (const nanonmr::Error& e) {
        return fail(command, e);
    }
    config.command = command;
    if (*out_opt) config.output = out;
    if (*format_opt) config.format = format == "json" ? nanonmr::cli::OutputFormat::Json : nanonmr::cli::OutputFormat::Csv;
    if (*seed_opt) config.seed = seed;
    if (*threads_opt) config.threads = threads;

    const auto outcome = nanonmr::cli::run_command(config);
    if (outcome.status != 0) {
        std::cerr << outcome.report << "\n";
        return outcome.status;
    }
    if (config.output.empty()) {
        std::cout << outcome.artifact;
        std::cerr << outcome.report << "\n";
    } else {
        std::cout << outcome.report << "\n";
    }
    return 0;
}
