// dropflow command-line driver.
//
//   dropflow simulate -c run.cfg      flat-flow run, metrics + snapshots
//   dropflow oracle   -c run.cfg      2-D front-tracking run
//   dropflow compare  -c run.cfg      randomized nested comparison suite
//   dropflow verify   -c verify.cfg   checks over a recorded run directory
//   dropflow shapes   -c run.cfg      isoperimetric-constant tables, fixtures
//
// Exit codes: 0 ok, 2 config error, 3 admissibility error, 4 truncation
// abort, 5 check failure.

#include "dropflow/runner.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"anisotropic capillary flat flows of droplets"};
    app.require_subcommand(1);

    struct SubArgs {
        std::string config;
        std::string run_dir;
        std::string checks;
        std::string out_dir;
    };
    std::map<std::string, SubArgs> args;
    for (const char* name : {"simulate", "oracle", "compare", "verify", "shapes"}) {
        auto* sub = app.add_subcommand(name);
        auto& a = args[name];
        sub->add_option("-c,--config", a.config, "run configuration (key = value lines)");
        if (std::string(name) == "verify") {
            sub->add_option("--run", a.run_dir, "run directory to verify");
            sub->add_option("--checks", a.checks, "comma-separated check list");
        }
        sub->add_option("-o,--out", a.out_dir, "output directory override");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();
    const auto& a = args[sub];

    dropflow::RunConfig cfg;
    try {
        if (!a.config.empty()) cfg = dropflow::RunConfig::parse_file(a.config);
        else if (sub != "verify")
            throw dropflow::ConfigError("missing --config");
        if (!a.run_dir.empty()) cfg.run_dir = a.run_dir;
        if (!a.checks.empty()) cfg.checks = a.checks;
        if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
    } catch (const dropflow::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    return dropflow::dispatch(sub, cfg, std::cout);
}
