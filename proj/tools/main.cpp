// blipsum command-line front-end: parse the run configuration, apply
// command-line overrides, and dispatch one subcommand.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "blipsum/cli.hpp"
#include "blipsum/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"blipsum - driven spin-boson blip-series simulator"};
    app.footer("subcommands: kernels | transition | niba | oracle-compare | work-stats | tpm\n"
               "exit codes: 0 ok, 2 config error, 3 convergence error, 4 resource error");

    std::string subcommand;
    std::string config_path;
    std::vector<std::string> sets;
    std::string output_dir, prefix;
    long long threads = -1;
    long long seed = -1;
    bool dump_only = false;

    app.add_option("subcommand", subcommand, "what to run")->required();
    app.add_option("config", config_path, "run configuration file")->required();
    app.add_option("--set", sets, "override any key, e.g. --set engine.seed=7");
    app.add_option("--output-dir", output_dir, "override output.directory");
    app.add_option("--prefix", prefix, "override output.prefix");
    app.add_option("--threads", threads, "override engine.threads");
    app.add_option("--seed", seed, "override engine.seed");
    app.add_flag("--dump-config", dump_only, "print the normalized config and exit");

    CLI11_PARSE(app, argc, argv);

    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: category=config message=--set expects section.key=value, got '"
                      << kv << "'\n";
            return 2;
        }
        overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!output_dir.empty()) overrides.emplace_back("output.directory", output_dir);
    if (!prefix.empty()) overrides.emplace_back("output.prefix", prefix);
    if (threads >= 0) overrides.emplace_back("engine.threads", std::to_string(threads));
    if (seed >= 0) overrides.emplace_back("engine.seed", std::to_string(seed));

    try {
        const blipsum::cli::RunConfig cfg =
            blipsum::cli::parse_config_file(config_path, overrides);
        if (dump_only) {
            std::cout << blipsum::cli::dump_config(cfg);
            return 0;
        }
        return blipsum::cli::run(subcommand, cfg, std::cout);
    } catch (const blipsum::ConfigError& e) {
        std::cerr << "error: category=config message=" << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: category=internal message=" << e.what() << "\n";
        return 1;
    }
}
