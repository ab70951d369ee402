#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gorlicz/config.hpp"
#include "gorlicz/grid.hpp"
#include "gorlicz/phi.hpp"
#include "gorlicz/solver.hpp"

namespace gorlicz {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitNonConclusive = 2, kExitError = 3 };

PhiFunction build_phi(const Config& cfg);
/// `grid_scale` divides the configured h.
Domain build_domain(const Config& cfg, double grid_scale = 1.0);
ObstacleProblem build_problem(const Config& cfg, const Domain& domain, const PhiFunction& phi);
SolveOptions build_solve_options(const Config& cfg, std::optional<std::uint64_t> seed);

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    double grid_scale = 1.0;
    /// Overrides [diagnostics] checks (diagnose --checks=...).
    std::optional<std::vector<std::string>> checks;
};

/// Runs one subcommand (run, verify-conditions, capacity, diagnose) and returns
/// its exit code. Progress goes to `log`, errors to `err`.
int execute(const std::string& command, const std::filesystem::path& config, const RunOptions& options,
            std::ostream& log, std::ostream& err);

}  // namespace gorlicz
