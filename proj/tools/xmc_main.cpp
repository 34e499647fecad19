#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "xmc/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"neighbor-calibrated cross-modality representation pipeline"};
    app.require_subcommand(1);

    std::string config_arg, out_arg, seeds_arg, mode_arg;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_arg, "flat key = value config file")->required();
        sub->add_option("--out", out_arg, "output directory")->required();
    };

    auto* generate = app.add_subcommand("generate", "write synthetic two-modality feature files");
    add_common(generate);
    auto* run = app.add_subcommand("run", "train one mode and write logs, encoder and metrics");
    add_common(run);
    run->add_option("--mode", mode_arg, "baseline|ulc|dw|full (overrides the config)");
    auto* ablate = app.add_subcommand("ablate", "run all four modes across seeds, emit a table");
    add_common(ablate);
    ablate->add_option("--seeds", seeds_arg, "comma-separated seed list, at least 3")->required();
    auto* eval = app.add_subcommand("eval", "standalone retrieval evaluation, both directions");
    add_common(eval);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);   // --help
        app.exit(e);
        return xmc::cli::kExitUser;
    }

    xmc::cli::Options opts;
    opts.config = config_arg;
    opts.out = out_arg;

    try {
        if (!mode_arg.empty()) opts.mode = xmc::mode_from_name(mode_arg);
        if (!seeds_arg.empty()) opts.seeds = xmc::cli::parse_seed_list(seeds_arg);

        if (generate->parsed()) return xmc::cli::cmd_generate(opts);
        if (run->parsed()) return xmc::cli::cmd_run(opts);
        if (ablate->parsed()) return xmc::cli::cmd_ablate(opts);
        if (eval->parsed()) return xmc::cli::cmd_eval(opts);
        return xmc::cli::kExitUser;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return xmc::cli::kExitUser;
    } catch (const xmc::cli::UserError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return xmc::cli::kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return xmc::cli::kExitInternal;
    }
}
