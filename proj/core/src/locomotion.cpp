#include "cyborg/locomotion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cyborg {

namespace {

constexpr double kMinSpeed = 1e-4;
constexpr double kMinTurnRate = 1e-3;

void require_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string("probability out of [0,1]: ") + name);
    }
}

double yaw_of(Vec2 v) { return rad2deg(std::atan2(v.y, v.x)); }

Vec2 perp_ccw(Vec2 v) { return {-v.y, v.x}; }

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

// Inward normal of the wall the walker is pressed against: among walls
// within `reach`, the one the heading points into most.
Vec2 contact_normal(const Arena& arena, Vec2 p, Vec2 heading, double reach) {
    const double d[4] = {p.x, arena.width - p.x, p.y, arena.height - p.y};
    const Vec2 n[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    int best = -1;
    double best_dot = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        if (d[i] <= reach && dot(n[i], heading) < best_dot) {
            best_dot = dot(n[i], heading);
            best = i;
        }
    }
    return best >= 0 ? n[best] : inward_wall_normal(arena, p);
}

// Tangent direction for following the wall with inward normal `n`.
double wall_tangent_yaw(const Arena& arena, Vec2 p, Vec2 heading, Vec2 n, double reach) {
    const Vec2 t = perp_ccw(n);
    const double along = dot(t, heading);
    if (std::abs(along) > 1e-9) {
        return along > 0.0 ? yaw_of(t) : yaw_of(-1.0 * t);
    }
    // Heading square onto the wall: turn away from any neighbouring wall,
    // otherwise toward the arena centre.
    Vec2 pref = inward_wall_normal(arena, p, reach) - n;
    if (norm(pref) < 1e-9) pref = Vec2{arena.width / 2, arena.height / 2} - p;
    return dot(t, pref) >= 0.0 ? yaw_of(t) : yaw_of(-1.0 * t);
}

void begin_segment(WalkState& s, const MotionParams& params, Rng& rng) {
    s.remaining_len = sample_straight_length(rng, params);
    s.speed = sample_natural_speed(rng, params);
    s.segment_active = true;
}

void enter_wall_follow(WalkState& s, Pose& pose, const MotionParams& params,
                       const Arena& arena, Rng& rng) {
    const double reach = params.wall_follow_distance + 1e-9;
    const Vec2 h = heading_vector(pose.yaw);
    const Vec2 n = contact_normal(arena, pose.position(), h, reach);
    pose.yaw = normalize_angle(wall_tangent_yaw(arena, pose.position(), h, n, reach));
    s.mode = WalkMode::WallFollow;
    s.leaving_wall = false;
    begin_segment(s, params, rng);
}

// Moves along the current heading; returns false if the arena boundary
// clipped the move.
bool advance(Pose& pose, double step, const Arena& arena) {
    const Vec2 p = pose.position() + step * heading_vector(pose.yaw);
    if (arena.contains(p)) {
        pose.set_position(p);
        return true;
    }
    pose.set_position(arena.clamp(p));
    return false;
}

}  // namespace

void MotionParams::validate() const {
    require_probability(p_persist, "p_persist");
    require_probability(p_stop, "p_stop");
    require_probability(p_exit, "p_exit");
    if (straight_len_mean <= 0.0 || v_nat_mean <= 0.0 || v_stim_mean <= 0.0 ||
        w_stim_mean <= 0.0 || stop_mean < 0.0) {
        throw std::invalid_argument("motion parameter means must be positive");
    }
    if (straight_len_sd < 0.0 || v_nat_sd < 0.0 || v_stim_sd < 0.0 || w_stim_sd < 0.0 ||
        stop_sd < 0.0 || turn_kappa < 0.0) {
        throw std::invalid_argument("motion parameter spreads must be non-negative");
    }
    if (!(wall_depart_median > 0.0) || !(wall_depart_shape >= 1.0)) {
        throw std::invalid_argument("wall departure distribution needs median > 0, shape >= 1");
    }
}

std::string_view to_string(WalkMode mode) {
    switch (mode) {
        case WalkMode::OpenWalk: return "open_walk";
        case WalkMode::OpenStop: return "open_stop";
        case WalkMode::WallFollow: return "wall_follow";
        case WalkMode::WallStop: return "wall_stop";
    }
    return "unknown";
}

std::string_view to_string(StimCommand cmd) {
    switch (cmd) {
        case StimCommand::None: return "none";
        case StimCommand::TurnLeft: return "turn_left";
        case StimCommand::TurnRight: return "turn_right";
        case StimCommand::Accelerate: return "accelerate";
        case StimCommand::Arrived: return "arrived";
    }
    return "unknown";
}

double sample_straight_length(Rng& rng, const MotionParams& p) {
    return rng.normal_clamped(p.straight_len_mean, p.straight_len_sd, 1e-3);
}

double sample_stop_time(Rng& rng, const MotionParams& p) {
    return rng.normal_clamped(p.stop_mean, p.stop_sd, 0.0);
}

double sample_natural_speed(Rng& rng, const MotionParams& p) {
    return rng.normal_clamped(p.v_nat_mean, p.v_nat_sd, kMinSpeed);
}

double sample_stim_speed(Rng& rng, const MotionParams& p) {
    return rng.normal_clamped(p.v_stim_mean, p.v_stim_sd, kMinSpeed);
}

double sample_stim_turn_rate(Rng& rng, const MotionParams& p) {
    return rng.normal_clamped(p.w_stim_mean, p.w_stim_sd, kMinTurnRate);
}

double sample_turn(Rng& rng, TurnDir& last_dir, const MotionParams& params) {
    double magnitude;
    if (std::isinf(params.turn_kappa) || params.turn_kappa > 1e8) {
        magnitude = std::abs(normalize_angle(params.turn_mu));
    } else {
        magnitude = std::abs(rad2deg(rng.von_mises(deg2rad(params.turn_mu), params.turn_kappa)));
        if (magnitude > 180.0) magnitude = 180.0;
    }
    const bool persist = rng.bernoulli(params.p_persist);
    const TurnDir dir = persist ? last_dir : (last_dir == TurnDir::Left ? TurnDir::Right : TurnDir::Left);
    last_dir = dir;
    return dir == TurnDir::Left ? magnitude : -magnitude;
}

double sample_wall_departure(Rng& rng, const MotionParams& params) {
    const double beta =
        rng.lognormal(std::log(params.wall_depart_median), std::log(params.wall_depart_shape));
    constexpr double kMax = 180.0 - 1e-9;
    if (beta >= kMax) return kMax;
    if (beta <= 0.0) return std::numeric_limits<double>::min();
    return beta;
}

NaturalStep step_natural(WalkState s, Pose pose, const MotionParams& params, const Arena& arena,
                         Rng& rng, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_natural: dt must be positive");

    const double wall_dist = distance_to_nearest_wall(arena, pose);
    if (s.leaving_wall && wall_dist > params.wall_follow_distance) s.leaving_wall = false;

    switch (s.mode) {
        case WalkMode::OpenStop:
        case WalkMode::WallStop: {
            s.remaining_stop -= dt;
            if (s.remaining_stop <= 0.0) {
                s.remaining_stop = 0.0;
                s.mode = s.mode == WalkMode::OpenStop ? WalkMode::OpenWalk : WalkMode::WallFollow;
                begin_segment(s, params, rng);
            }
            return {s, pose};
        }
        case WalkMode::OpenWalk: {
            if (!s.leaving_wall && wall_dist <= params.wall_follow_distance) {
                enter_wall_follow(s, pose, params, arena, rng);
                break;  // continue as a wall follower this tick
            }
            if (!s.segment_active) begin_segment(s, params, rng);
            const double step = std::min(s.remaining_len, s.speed * dt);
            if (!advance(pose, step, arena)) {
                enter_wall_follow(s, pose, params, arena, rng);
                return {s, pose};
            }
            s.remaining_len -= step;
            if (s.remaining_len <= 1e-12) {
                ++s.segments_completed;
                pose.yaw = normalize_angle(pose.yaw + sample_turn(rng, s.last_turn, params));
                s.segment_active = false;
                if (rng.bernoulli(params.p_stop)) {
                    ++s.stops_started;
                    s.mode = WalkMode::OpenStop;
                    s.remaining_stop = sample_stop_time(rng, params);
                } else {
                    begin_segment(s, params, rng);
                }
            }
            return {s, pose};
        }
        case WalkMode::WallFollow:
            break;
    }

    // WallFollow
    if (!s.segment_active) begin_segment(s, params, rng);
    const double step = std::min(s.remaining_len, s.speed * dt);
    if (!advance(pose, step, arena)) {
        // Reached a corner: follow the new wall.
        const double reach = params.wall_follow_distance + 1e-9;
        const Vec2 h = heading_vector(pose.yaw);
        const Vec2 n = contact_normal(arena, pose.position(), h, reach);
        pose.yaw = normalize_angle(wall_tangent_yaw(arena, pose.position(), h, n, reach));
    }
    s.remaining_len -= step;
    if (s.remaining_len <= 1e-12) {
        ++s.segments_completed;
        s.segment_active = false;
        if (rng.bernoulli(params.p_exit)) {
            const double reach = params.wall_follow_distance + 1e-9;
            const Vec2 t = heading_vector(pose.yaw);
            const Vec2 n = inward_wall_normal(arena, pose.position(), reach);
            const double beta = sample_wall_departure(rng, params);
            const double side = dot(perp_ccw(t), n) >= 0.0 ? 1.0 : -1.0;
            pose.yaw = normalize_angle(pose.yaw + side * beta);
            s.mode = WalkMode::OpenWalk;
            s.leaving_wall = true;
            ++s.wall_exits;
            begin_segment(s, params, rng);
        } else if (rng.bernoulli(params.p_stop)) {
            ++s.stops_started;
            s.mode = WalkMode::WallStop;
            s.remaining_stop = sample_stop_time(rng, params);
        } else {
            begin_segment(s, params, rng);
        }
    }
    return {s, pose};
}

Pose apply_stimulus(const Pose& pose, StimCommand cmd, const MotionParams& params,
                    const Arena& arena, WalkState& walk, Rng& rng, double dt,
                    double max_turn_deg) {
    if (cmd == StimCommand::Arrived) {
        throw std::invalid_argument("apply_stimulus: Arrived is not a stimulus");
    }
    Pose out = pose;
    switch (cmd) {
        case StimCommand::Accelerate: {
            const double v = sample_stim_speed(rng, params);
            const Vec2 p = pose.position() + (v * dt) * heading_vector(pose.yaw);
            out.set_position(arena.clamp(p));
            break;
        }
        case StimCommand::TurnLeft:
            out.yaw = normalize_angle(pose.yaw + std::min(sample_stim_turn_rate(rng, params) * dt, max_turn_deg));
            break;
        case StimCommand::TurnRight:
            out.yaw = normalize_angle(pose.yaw - std::min(sample_stim_turn_rate(rng, params) * dt, max_turn_deg));
            break;
        case StimCommand::None: {
            auto step = step_natural(walk, pose, params, arena, rng, dt);
            walk = step.state;
            out = step.pose;
            break;
        }
        case StimCommand::Arrived:
            break;
    }
    return out;
}

double bearing_error(const Pose& pose, Vec2 target) {
    const Vec2 d = target - pose.position();
    if (d.x == 0.0 && d.y == 0.0) return 0.0;
    return normalize_angle(yaw_of(d) - pose.yaw);
}

StimCommand goto_point(const Pose& pose, Vec2 target, double angle_threshold_deg,
                       double dist_threshold) {
    if (distance(pose.position(), target) < dist_threshold) return StimCommand::Arrived;
    const double theta = bearing_error(pose, target);
    if (std::abs(theta) <= angle_threshold_deg) return StimCommand::Accelerate;
    return theta > 0.0 ? StimCommand::TurnLeft : StimCommand::TurnRight;
}

}  // namespace cyborg
