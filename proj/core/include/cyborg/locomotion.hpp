#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

#include "cyborg/rng.hpp"
#include "cyborg/world.hpp"

namespace cyborg {

/// Locomotion parameters of the free-walking and stimulated insect.
/// Lengths in metres, speeds in m/s, angles in degrees, times in seconds.
struct MotionParams {
    double straight_len_mean = 0.175;
    double straight_len_sd = 0.048;
    double p_persist = 0.71;
    double p_stop = 0.21;
    double stop_mean = 36.0;
    double stop_sd = 24.0;
    double p_exit = 0.05;
    /// Wall-departure angle is log-normal with this median and
    /// multiplicative shape (the underlying normal has sd ln(shape)).
    double wall_depart_median = 36.6;
    double wall_depart_shape = 2.1;
    double v_nat_mean = 0.020;
    double v_nat_sd = 0.003;
    double v_stim_mean = 0.084;
    double v_stim_sd = 0.038;
    double w_stim_mean = 86.5;
    double w_stim_sd = 43.5;
    /// Von Mises turning-angle location and concentration; magnitudes are
    /// folded onto [0, 180].
    double turn_mu = 0.0;
    double turn_kappa = 2.0;
    /// Proximity at which the free walker latches onto a wall.
    double wall_follow_distance = 0.02;

    void validate() const;
};

enum class WalkMode { OpenWalk, OpenStop, WallFollow, WallStop };
enum class TurnDir { Left, Right };

std::string_view to_string(WalkMode mode);

/// State of the natural-walk finite-state machine.
struct WalkState {
    WalkMode mode = WalkMode::OpenWalk;
    double remaining_len = 0.0;
    double remaining_stop = 0.0;
    /// Speed of the current straight segment.
    double speed = 0.0;
    TurnDir last_turn = TurnDir::Left;
    bool segment_active = false;
    /// Set after departing a wall until the walker is clear of it.
    bool leaving_wall = false;

    std::uint64_t segments_completed = 0;
    std::uint64_t stops_started = 0;
    std::uint64_t wall_exits = 0;

    bool stopped() const { return mode == WalkMode::OpenStop || mode == WalkMode::WallStop; }
};

enum class StimCommand { None, TurnLeft, TurnRight, Accelerate, Arrived };

std::string_view to_string(StimCommand cmd);

struct NaturalStep {
    WalkState state;
    Pose pose;
};

/// Advances the natural-walk model by `dt`. Natural turns are
/// instantaneous and happen at the end of every straight segment.
NaturalStep step_natural(WalkState state, Pose pose, const MotionParams& params,
                         const Arena& arena, Rng& rng, double dt);

/// Samples a signed natural turning angle in degrees (positive = left)
/// and updates `last_dir` to the direction taken.
double sample_turn(Rng& rng, TurnDir& last_dir, const MotionParams& params);

/// Positive wall-departure angle in degrees, clamped below 180.
double sample_wall_departure(Rng& rng, const MotionParams& params);

double sample_straight_length(Rng& rng, const MotionParams& params);
double sample_stop_time(Rng& rng, const MotionParams& params);
double sample_natural_speed(Rng& rng, const MotionParams& params);
double sample_stim_speed(Rng& rng, const MotionParams& params);
double sample_stim_turn_rate(Rng& rng, const MotionParams& params);

/// Applies one tick of a stimulation command. `None` falls through to a
/// natural step (and advances `walk`); the result is always inside the
/// arena. Stimulated turns change yaw by at most `max_turn_deg`.
Pose apply_stimulus(const Pose& pose, StimCommand cmd, const MotionParams& params,
                    const Arena& arena, WalkState& walk, Rng& rng, double dt,
                    double max_turn_deg = std::numeric_limits<double>::infinity());

/// Go-to-point rule: Arrived inside `dist_threshold`, Accelerate when the
/// bearing error is within `angle_threshold_deg`, otherwise turn toward
/// the target.
StimCommand goto_point(const Pose& pose, Vec2 target, double angle_threshold_deg = 20.0,
                       double dist_threshold = 0.10);

/// Signed bearing error in degrees from the pose heading to `target`.
double bearing_error(const Pose& pose, Vec2 target);

}  // namespace cyborg
