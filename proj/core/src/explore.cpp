#include "cyborg/explore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cyborg {

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::FixedLength: return "fixed";
        case StrategyKind::LevyWalk: return "levy";
        case StrategyKind::UniformDistribution: return "uniform";
        case StrategyKind::BrownianWalk: return "brownian";
    }
    return "unknown";
}

StrategyKind strategy_from_string(std::string_view s) {
    if (s == "fixed") return StrategyKind::FixedLength;
    if (s == "levy") return StrategyKind::LevyWalk;
    if (s == "uniform") return StrategyKind::UniformDistribution;
    if (s == "brownian") return StrategyKind::BrownianWalk;
    throw std::invalid_argument("unknown strategy: " + std::string(s));
}

void Strategy::validate() const {
    if (!(min_step > 0.0)) throw std::invalid_argument("min_step must be positive");
    if (fixed_step < min_step || uniform_lo < min_step || brownian_step < min_step) {
        throw std::invalid_argument("strategy step below min_step");
    }
    if (!(uniform_hi > uniform_lo)) throw std::invalid_argument("uniform range is empty");
    if (!(levy_mu > 1.0) || !(levy_max > min_step)) {
        throw std::invalid_argument("levy needs mu > 1 and max_step > min_step");
    }
    if (clip_margin < 0.0) throw std::invalid_argument("clip_margin must be non-negative");
}

double levy_step(Rng& rng, double min_step, double mu, double max_step) {
    // F(l) = (a^-k - l^-k) / (a^-k - b^-k), k = mu - 1
    const double k = mu - 1.0;
    const double lo = std::pow(min_step, -k);
    const double hi = std::pow(max_step, -k);
    const double u = rng.uniform();
    const double l = std::pow(lo - u * (lo - hi), -1.0 / k);
    return std::clamp(l, min_step, max_step);
}

double sample_step(const Strategy& s, Rng& rng) {
    switch (s.kind) {
        case StrategyKind::FixedLength: return s.fixed_step;
        case StrategyKind::LevyWalk: return levy_step(rng, s.min_step, s.levy_mu, s.levy_max);
        case StrategyKind::UniformDistribution: return rng.uniform(s.uniform_lo, s.uniform_hi);
        case StrategyKind::BrownianWalk: return s.brownian_step;
    }
    return s.min_step;
}

Vec2 clip_ray(const Arena& arena, Vec2 from, double dir_deg, double length, double margin) {
    const double x0 = margin, x1 = arena.width - margin;
    const double y0 = margin, y1 = arena.height - margin;
    const Vec2 d = heading_vector(dir_deg);
    const bool inside = from.x >= x0 && from.x <= x1 && from.y >= y0 && from.y <= y1;
    if (!inside || x0 > x1 || y0 > y1) {
        const Vec2 raw = from + length * d;
        const double cx = x0 <= x1 ? std::clamp(raw.x, x0, x1) : arena.width / 2;
        const double cy = y0 <= y1 ? std::clamp(raw.y, y0, y1) : arena.height / 2;
        return {cx, cy};
    }
    double t = length;
    if (d.x > 0.0) t = std::min(t, (x1 - from.x) / d.x);
    if (d.x < 0.0) t = std::min(t, (x0 - from.x) / d.x);
    if (d.y > 0.0) t = std::min(t, (y1 - from.y) / d.y);
    if (d.y < 0.0) t = std::min(t, (y0 - from.y) / d.y);
    t = std::max(0.0, t);
    const Vec2 p = from + t * d;
    return {std::clamp(p.x, x0, x1), std::clamp(p.y, y0, y1)};
}

Destination next_destination(const Strategy& strategy, const Pose& pose, const Arena& arena,
                             Rng& rng) {
    const double rel = rng.uniform(0.0, 360.0);
    const double dist = sample_step(strategy, rng);
    Destination out;
    out.origin_pose = pose;
    out.target = clip_ray(arena, pose.position(), pose.yaw + rel, dist, strategy.clip_margin);
    return out;
}

std::optional<Destination> wall_redirect(const Pose& pose, const Arena& arena, double trigger,
                                         double hop) {
    const Vec2 p = pose.position();
    if (!(distance_to_nearest_wall(arena, p) < trigger)) return std::nullopt;
    // Away from every wall inside the trigger band (two of them in a corner).
    const double d[4] = {p.x, arena.width - p.x, p.y, arena.height - p.y};
    const Vec2 normals[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    Vec2 n;
    for (int i = 0; i < 4; ++i) {
        if (d[i] < trigger) n = n + normals[i];
    }
    const double len = norm(n);
    n = len > 0.0 ? (1.0 / len) * n : inward_wall_normal(arena, p);
    Destination out;
    out.origin_pose = pose;
    out.target = arena.clamp(p + hop * n);
    out.interim = true;
    return out;
}

}  // namespace cyborg
