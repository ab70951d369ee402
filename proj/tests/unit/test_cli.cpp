#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gorlicz/runner.hpp"

using namespace gorlicz;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(GORLICZ_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gorlicz_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> read_meta(const fs::path& path) {
    std::map<std::string, std::string> meta;
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return meta;
}

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + GORLICZ_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Result {
    int code;
    std::string log;
    std::string err;
};

Result run(const std::string& command, const std::string& config, RunOptions opts) {
    std::ostringstream log, err;
    const int code = execute(command, kConfigs / config, opts, log, err);
    return {code, log.str(), err.str()};
}

RunOptions into(const fs::path& dir) {
    RunOptions o;
    o.out_dir = dir;
    return o;
}

}  // namespace

TEST(Expression, Evaluates) {
    const auto e = Expression::parse("1 + 2*x - 3*y");
    EXPECT_DOUBLE_EQ(e(0.5, 0.25), 1.25);
    EXPECT_DOUBLE_EQ(Expression::parse("-2^2")(0.0), -4.0);
    EXPECT_DOUBLE_EQ(Expression::parse("2^3^2")(0.0), 512.0);
    EXPECT_DOUBLE_EQ(Expression::parse("min(x, 1) + max(y, 2) + abs(-3)")(0.5, 0.0), 5.5);
    EXPECT_DOUBLE_EQ(Expression::parse("t*log(1 + t)")(0, 0, 1.0), std::log(2.0));
    EXPECT_TRUE(Expression::parse("x + t").uses_variable('t'));
    EXPECT_FALSE(Expression::parse("x + 1").uses_variable('y'));
}

TEST(Expression, ErrorsCarryPosition) {
    try {
        Expression::parse("1 + * x", 7, 11);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 7);
        EXPECT_EQ(e.column(), 15);
    }
    EXPECT_THROW(Expression::parse("(x + 1"), ParseError);
    EXPECT_THROW(Expression::parse("foo(x)"), ParseError);
    EXPECT_THROW(Expression::parse("z"), ParseError);
    EXPECT_THROW(Expression::parse("min(x)"), ParseError);
    EXPECT_THROW(Expression::parse(""), ParseError);
}

TEST(Config, ParsesSectionsAndValues) {
    const auto cfg = Config::parse("# c\n[phi]\nfamily = power\np = 3/2\n[domain]\nlo = -1 -1\n[conditions]\ncenters = 0 0; 1 0.5\n");
    EXPECT_EQ(cfg.get_string("phi", "family"), "power");
    EXPECT_DOUBLE_EQ(cfg.get_number("phi", "p"), 1.5);
    EXPECT_EQ(cfg.get_numbers("domain", "lo"), (std::vector<double>{-1, -1}));
    const auto pts = cfg.get_points("conditions", "centers");
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_DOUBLE_EQ(pts[1][1], 0.5);
    EXPECT_DOUBLE_EQ(cfg.get_number("phi", "q", 4.0), 4.0);
}

TEST(Config, RejectsMalformedInput) {
    auto line_of = [](const std::string& text) {
        try {
            Config::parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("[phi]\nfamily = power\nfamliy = power\n"), 3);
    EXPECT_EQ(line_of("[phi]\np = 2\np = 3\n"), 3);
    EXPECT_EQ(line_of("[nonsense]\n"), 1);
    EXPECT_EQ(line_of("p = 2\n"), 1);
    EXPECT_EQ(line_of("[phi]\np 2\n"), 2);
    EXPECT_EQ(line_of("[phi\n"), 1);
    const auto cfg = Config::parse("[phi]\np = x + 1\n");
    EXPECT_THROW(cfg.get_number("phi", "p"), ParseError);
    EXPECT_THROW(cfg.get_string("phi", "family"), ParseError);
}

TEST(Cli, LinearDirichletPasses) {
    const auto dir = scratch("linear");
    const auto r = run("run", "linear_dirichlet.cfg", into(dir));
    EXPECT_EQ(r.code, kExitPass) << r.err;
    const auto meta = read_meta(dir / "solution.meta");
    EXPECT_EQ(meta.at("converged"), "true");
    EXPECT_EQ(meta.at("verdict"), "pass");
    const auto grid = read_grid(dir / "solution.grid");
    EXPECT_EQ(grid.dims, (std::array<int, 2>{67, 67}));
    for (int j = 1; j < 66; ++j) {
        for (int i = 1; i < 66; ++i) {
            const double x = grid.origin[0] + i * grid.h, y = grid.origin[1] + j * grid.h;
            ASSERT_NEAR(grid.values[j * 67 + i], 1 + 2 * x - 3 * y, 1e-9);
        }
    }
}

TEST(Cli, ParabolaMatchesReference) {
    const auto dir = scratch("parabola");
    const auto r = run("run", "parabola_obstacle_1d.cfg", into(dir));
    EXPECT_EQ(r.code, kExitPass) << r.err;
    const auto meta = read_meta(dir / "solution.meta");
    ASSERT_TRUE(meta.count("reference_max_diff"));
    EXPECT_LE(std::stod(meta.at("reference_max_diff")), 1e-6);
    EXPECT_EQ(meta.at("contact_cells"), "301");
}

TEST(Cli, InfeasibleIsAnError) {
    const auto r = run("run", "infeasible.cfg", into(scratch("infeasible")));
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("halo cell"), std::string::npos) << r.err;
}

TEST(Cli, ConditionsCsv) {
    const auto dir = scratch("conditions");
    EXPECT_EQ(run("verify-conditions", "power_conditions.cfg", into(dir)).code, kExitPass);
    std::ifstream in(dir / "conditions.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "condition,holds,witness,exponent,beta_decay_slope,x,y,t,s,radius,beta,lhs,rhs,skipped");
    std::vector<std::string> names;
    for (std::string line; std::getline(in, line);) names.push_back(line.substr(0, line.find(',')));
    EXPECT_EQ(names, (std::vector<std::string>{"A0", "aInc", "aDec", "A1"}));
}

TEST(Cli, DoublePhaseA1PassAndFail) {
    EXPECT_EQ(run("verify-conditions", "double_phase_a1_pass.cfg", into(scratch("a1_pass"))).code, kExitPass);
    const auto dir = scratch("a1_fail");
    EXPECT_EQ(run("verify-conditions", "double_phase_a1_fail.cfg", into(dir)).code, kExitFail);
    const auto csv = slurp(dir / "conditions.csv");
    EXPECT_NE(csv.find("\nA1,false,"), std::string::npos) << csv;
}

TEST(Cli, SameSeedGivesIdenticalOutput) {
    const auto a = scratch("seed_a"), b = scratch("seed_b");
    RunOptions oa = into(a), ob = into(b);
    oa.seed = ob.seed = 17;
    ASSERT_EQ(run("capacity", "capacity_ball.cfg", oa).code, kExitPass);
    ASSERT_EQ(run("capacity", "capacity_ball.cfg", ob).code, kExitPass);
    EXPECT_EQ(slurp(a / "capacity.csv"), slurp(b / "capacity.csv"));
    ASSERT_EQ(run("verify-conditions", "double_phase_a1_pass.cfg", oa).code, kExitPass);
    ASSERT_EQ(run("verify-conditions", "double_phase_a1_pass.cfg", ob).code, kExitPass);
    EXPECT_EQ(slurp(a / "conditions.csv"), slurp(b / "conditions.csv"));
}

TEST(Cli, GridScaleRefines) {
    const auto dir = scratch("scaled");
    RunOptions o = into(dir);
    o.grid_scale = 0.5;
    ASSERT_EQ(run("run", "linear_dirichlet.cfg", o).code, kExitPass);
    EXPECT_DOUBLE_EQ(std::stod(read_meta(dir / "solution.meta").at("h")), 1.0 / 32);
}

TEST(Cli, DiagnoseWithExplicitChecks) {
    const auto dir = scratch("diagnose");
    RunOptions o = into(dir);
    o.checks = std::vector<std::string>{"restriction"};
    const auto r = run("diagnose", "linear_dirichlet.cfg", o);
    EXPECT_EQ(r.code, kExitPass) << r.err;
    EXPECT_TRUE(fs::exists(dir / "summary.txt"));
    o.checks = std::vector<std::string>{"no_such_check"};
    EXPECT_EQ(run("diagnose", "linear_dirichlet.cfg", o).code, kExitError);
}

TEST(Cli, BinaryExitCodes) {
    const auto dir = scratch("binary");
    EXPECT_EQ(cli("run " + (kConfigs / "linear_dirichlet.cfg").string() + " --out " + dir.string()), 0);
    EXPECT_EQ(cli("run " + (kConfigs / "infeasible.cfg").string() + " --out " + dir.string()), 3);
    EXPECT_EQ(cli("verify-conditions " + (kConfigs / "double_phase_a1_fail.cfg").string() + " --out " + dir.string()), 1);
    EXPECT_EQ(cli("run /nonexistent.cfg"), 3);
    EXPECT_EQ(cli("frobnicate"), 3);
    EXPECT_EQ(cli("--help"), 0);
}

TEST(Cli, BadConfigReportsLocation) {
    const auto dir = scratch("badcfg");
    std::ofstream(dir / "bad.cfg") << "[phi]\nfamily = power\np = 2\n[domain]\nshape = rectangle\nlo = 0 0\nhi = 1 1\n"
                                      "h = 1/8\n[problem]\nboundary = 1 + * x\n";
    std::ostringstream log, err;
    EXPECT_EQ(execute("run", dir / "bad.cfg", into(dir), log, err), kExitError);
    EXPECT_NE(err.str().find("10"), std::string::npos) << err.str();
}
