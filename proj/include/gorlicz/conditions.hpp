#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gorlicz/grid.hpp"
#include "gorlicz/phi.hpp"

namespace gorlicz {

enum class Condition { A0, A1, A1n, aIncP, aDecQ };

std::string to_string(Condition c);

/// A sampled point where a structural inequality fails: lhs > rhs was observed.
/// For the almost-monotonicity checks `s` is the smaller abscissa of the pair;
/// for the ball checks `radius` is the ball radius and `beta` the tested beta.
struct ConditionSample {
    Point x{0.0, 0.0};
    double t = 0.0;
    std::optional<double> s;
    std::optional<double> radius;
    std::optional<double> beta;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct ConditionReport {
    Condition condition = Condition::A0;
    bool holds = false;
    /// beta for (A0)/(A1)/(A1-n); smallest admissible L for (aInc)/(aDec).
    double witness_beta_or_L = 0.0;
    std::optional<ConditionSample> violating_sample;
    double exponent = 0.0;  // tested exponent for (aInc)/(aDec)
    int skipped = 0;        // degenerate balls skipped by the (A1) checks
    /// Per dyadic radius: largest working beta (A1 checks only).
    std::vector<std::pair<double, double>> scale_profile;
    double beta_decay_slope = 0.0;  // d log beta / d log r over the profile
    std::string note;
};

/// Default beta grid: 1 - 2^-k and 2^-k down to ~1e-3.
std::vector<double> default_beta_grid();

/// Geometric grid of `count` points on [t_min, t_max].
std::vector<double> geometric_grid(double t_min, double t_max, int count);

/// Sample points used for sup/inf over Omega: all inside nodes, thinned by a
/// fixed stride so at most `max_points` are kept.
std::vector<Point> sample_points(const Domain& domain, std::size_t max_points = 4096);

ConditionReport check_A0(const PhiFunction& phi, const Domain& domain, const std::vector<double>& beta_grid);

enum class Monotonicity { Inc, Dec };

ConditionReport check_aInc_aDec(const PhiFunction& phi, const Domain& domain, double exponent, Monotonicity mode,
                                const std::vector<double>& t_grid);

using BallSampler = std::function<std::vector<Ball>()>;

/// Balls of radius r_max / 2^k, k = 0..levels-1, at each centre.
BallSampler dyadic_ball_sampler(std::vector<Point> centers, double r_max, int levels);

enum class A1Mode { A1, A1n };

struct A1Options {
    int t_samples = 48;
    double beta_resolution = 1e-3;
    /// A beta profile that falls off faster than r^max_decay_slope as the radius
    /// shrinks counts as degenerating.
    double max_decay_slope = 0.1;
    std::size_t max_points_per_ball = 2048;
};

/// Checks phi^+_B(beta t) <= phi^-_B(t) on every sampled ball over the mode's t-range.
///
/// On any finite sample some small beta always works, so the check reports the
/// largest working beta per dyadic radius and declares the condition violated
/// when that beta degenerates as r -> 0 (log-log slope above max_decay_slope).
ConditionReport check_A1(const PhiFunction& phi, const Domain& domain, const BallSampler& sampler, A1Mode mode,
                         const A1Options& options = {});

/// phi^+_B(t) and phi^-_B(t) over the Omega-nodes in a ball.
struct BallEnvelope {
    std::vector<LocalPhi> local;
    std::vector<Point> points;
    double sup(double t) const;
    double inf(double t) const;
};

BallEnvelope ball_envelope(const PhiFunction& phi, const Domain& domain, const Ball& ball,
                           std::size_t max_points = 2048);

}  // namespace gorlicz
