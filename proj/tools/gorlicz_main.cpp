#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gorlicz/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Obstacle problems with generalized Orlicz growth"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    std::uint64_t seed = 0;
    double grid_scale = 1.0;
    std::string checks;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "Configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--seed", seed, "Seed for random initial guesses");
        sub->add_option("--grid-scale", grid_scale, "Divide the configured h by this factor")
            ->check(CLI::PositiveNumber);
    };

    add_common(app.add_subcommand("run", "Solve the obstacle problem and run configured diagnostics"));
    add_common(app.add_subcommand("verify-conditions", "Check the structural conditions on phi"));
    add_common(app.add_subcommand("capacity", "Capacity fatness and ball capacities"));
    CLI::App* diagnose = app.add_subcommand("diagnose", "Solve and run a chosen set of diagnostics");
    add_common(diagnose);
    diagnose->add_option("--checks", checks, "Comma-separated diagnostics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : gorlicz::kExitError;
    }

    CLI::App* sub = app.get_subcommands().front();
    gorlicz::RunOptions options;
    options.grid_scale = grid_scale;
    if (sub->count("--out")) options.out_dir = out_dir;
    if (sub->count("--seed")) options.seed = seed;
    if (sub == diagnose && diagnose->count("--checks")) {
        std::vector<std::string> list;
        std::string item;
        for (char c : checks + ",") {
            if (c == ',' || c == ' ') {
                if (!item.empty()) list.push_back(item);
                item.clear();
            } else {
                item += c;
            }
        }
        options.checks = list;
    }
    return gorlicz::execute(sub->get_name(), config, options, std::cout, std::cerr);
}
