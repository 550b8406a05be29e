#pragma once

#include <optional>
#include <string_view>

#include "cyborg/rng.hpp"
#include "cyborg/world.hpp"

namespace cyborg {

enum class StrategyKind { FixedLength, LevyWalk, UniformDistribution, BrownianWalk };

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_from_string(std::string_view s);

/// Phase I destination generator and its parameters (metres).
struct Strategy {
    StrategyKind kind = StrategyKind::LevyWalk;
    double min_step = 0.5;
    double fixed_step = 0.5;
    double uniform_lo = 0.5;
    double uniform_hi = 20.0;
    /// Longest terrain length; Brownian destinations always use it.
    double brownian_step = 30.0;
    /// Bounded Pareto p(l) ~ l^-levy_mu on [min_step, levy_max].
    double levy_mu = 2.0;
    double levy_max = 30.0;
    /// Destinations are clipped to the arena shrunk by this margin.
    double clip_margin = 0.10;

    void validate() const;
};

struct Destination {
    Vec2 target;
    Pose origin_pose;
    /// True for the short hop away from a wall.
    bool interim = false;
};

/// Bounded Pareto step by inverse-CDF sampling.
double levy_step(Rng& rng, double min_step = 0.5, double mu = 2.0, double max_step = 30.0);

/// Raw step length for the strategy, before clipping.
double sample_step(const Strategy& strategy, Rng& rng);

/// Draws a direction uniformly over [0, 360) relative to the heading and a
/// distance from the strategy, then clips the target into the inset arena.
Destination next_destination(const Strategy& strategy, const Pose& pose, const Arena& arena,
                             Rng& rng);

/// Point reached from `from` along `dir_deg` after `length`, cut short at
/// the boundary of the arena inset by `margin`.
Vec2 clip_ray(const Arena& arena, Vec2 from, double dir_deg, double length, double margin);

/// Interim destination `hop` metres along the inward wall normal when the
/// pose is strictly closer than `trigger` to a wall; nullopt otherwise.
std::optional<Destination> wall_redirect(const Pose& pose, const Arena& arena,
                                         double trigger = 0.10, double hop = 0.5);

}  // namespace cyborg
