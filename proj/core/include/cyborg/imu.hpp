#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyborg/rng.hpp"
#include "cyborg/world.hpp"

namespace cyborg {

/// Gravity-subtracted body-frame acceleration plus the fused
/// world-from-body orientation, as logged by the backpack IMU.
struct ImuSample {
    double t = 0.0;
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

struct TimedPose {
    double t = 0.0;
    Pose pose;
};

/// World-from-body rotation for yaw (CCW about +z), pitch (nose up) and
/// roll, all in degrees. Body +x is forward.
Eigen::Quaterniond orientation_from_euler(double yaw_deg, double pitch_deg, double roll_deg = 0.0);

/// Yaw of the body-forward axis projected on the floor, degrees.
double yaw_from_orientation(const Eigen::Quaterniond& q);

/// Forward model for body-shake acceleration.
struct GaitModel {
    /// Stepping frequency, Hz; the insect's gait band is 3-9 Hz.
    double gait_freq = 6.0;
    /// Gain the synthetic insect obeys: windowed Var(acc) = v / k_true.
    double k_true = 3.5;
    /// White accelerometer noise per axis, m/s^2.
    double noise_sd = 0.01;
    double rate_hz = 100.0;
    /// Window the variance contract is stated for, seconds.
    double window = 0.5;
    /// Random heading misalignment between body axis and travel, degrees
    /// (slowly varying, first-order Gauss-Markov with 5 s correlation).
    double heading_jitter_deg = 0.0;

    std::size_t window_samples() const;
};

/// Streaming gait synthesizer: emits one sample per call for the given
/// instantaneous speed and orientation.
class GaitSynth {
public:
    GaitSynth(GaitModel model, Rng rng);

    ImuSample next(double t, double speed, const Eigen::Quaterniond& orientation);

    /// Oscillation amplitude (per axis) producing the contracted windowed
    /// variance at `speed`.
    double amplitude_for(double speed) const;

private:
    GaitModel model_;
    Rng rng_;
    double phase_ = 0.0;
    double jitter_ = 0.0;
    double deficit_ = 1.0;
};

/// Resamples `path` at the model rate and synthesizes IMU samples whose
/// windowed variance tracks the path speed.
std::vector<ImuSample> synth_gait(const std::vector<TimedPose>& path, const GaitModel& model,
                                  Rng& rng);

/// Sum of the three per-axis sample variances (n - 1 normalisation).
double acceleration_variance(std::span<const Eigen::Vector3d> window);

/// V = k * Var(acc); 0 for fewer than two samples.
double estimate_speed(double k, std::span<const Eigen::Vector3d> window);

/// Sliding-window variance speed estimator.
class SpeedEstimator {
public:
    SpeedEstimator(double k, double window_s = 0.5, double rate_hz = 100.0);

    /// Pushes a sample and returns the speed over the trailing window.
    double update(const ImuSample& sample);

    bool warming_up() const { return buffer_.size() < 2; }
    double gain() const { return k_; }
    void set_gain(double k);
    std::size_t capacity() const { return capacity_; }

private:
    double k_;
    std::size_t capacity_;
    std::deque<Eigen::Vector3d> buffer_;
};

enum class TrackMode { Planar, Spatial };

struct DeadReckonState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    double last_t = 0.0;
    double traveled = 0.0;
    /// Quaternions that needed renormalising by more than 1e-3.
    int orientation_warnings = 0;
};

/// position += V * heading * dt, heading = body-forward axis of `q`
/// (its floor projection in planar mode).
DeadReckonState integrate_position(DeadReckonState state, double speed,
                                   const Eigen::Quaterniond& q, double dt,
                                   TrackMode mode = TrackMode::Planar);

/// Estimator + integrator over a sample stream.
class DeadReckoner {
public:
    DeadReckoner(double k, TrackMode mode = TrackMode::Planar, double window_s = 0.5,
                 double rate_hz = 100.0);

    void push(const ImuSample& sample);

    const DeadReckonState& state() const { return state_; }
    double last_speed() const { return last_speed_; }
    double yaw() const { return yaw_; }
    /// Restarts from `position`; the next sample starts the clock.
    void reset(const Eigen::Vector3d& position);
    void set_gain(double k) { estimator_.set_gain(k); }

private:
    SpeedEstimator estimator_;
    TrackMode mode_;
    DeadReckonState state_;
    bool started_ = false;
    double last_speed_ = 0.0;
    double yaw_ = 0.0;
};

enum class CalibrationMode {
    /// K = measured / actual * K_seed, as printed.
    Literal,
    /// K = actual / measured * K_current, which removes a distance bias.
    Corrective
};

/// Throws std::invalid_argument for non-positive distances or gain.
double calibrate_gain(double measured, double actual, double k = 3.5,
                      CalibrationMode mode = CalibrationMode::Corrective);

struct TrackPoint {
    double t = 0.0;
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    /// False for a missing reference marker.
    bool valid = true;
};

struct ErrorPoint {
    double t = 0.0;
    double traveled = 0.0;
    double error = 0.0;
    double error_pct = 0.0;
};

/// Euclidean error of `estimated` (linearly interpolated) at each valid
/// reference timestamp; percentages are relative to the distance the
/// reference has travelled so far. Invalid reference points are skipped.
std::vector<ErrorPoint> error_series(const std::vector<TrackPoint>& estimated,
                                     const std::vector<TrackPoint>& reference);

/// Synthetic free walk used for replay tests and studies.
struct SyntheticWalk {
    double duration = 240.0;
    double rate_hz = 100.0;
    double speed_lo = 0.03;
    double speed_hi = 0.07;
    /// Mean time between speed/heading changes, seconds.
    double segment_mean = 4.0;
    double turn_sd_deg = 35.0;
    /// Floor incline about the world x axis (uphill toward +y), degrees.
    double slope_deg = 0.0;
    /// Chance that a segment is a pause.
    double p_pause = 0.1;
    Vec2 start{0.0, 0.0};
    double start_yaw = 0.0;
};

std::vector<TimedPose> synthetic_walk(const SyntheticWalk& cfg, Rng& rng);

std::vector<TrackPoint> to_track(const std::vector<TimedPose>& path);
double path_length(const std::vector<TrackPoint>& track);

/// Parse error carrying the 1-based input line.
class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Columns t, ax, ay, az, qw, qx, qy, qz. A non-numeric first line is
/// treated as a header; blank lines are skipped.
std::vector<ImuSample> read_imu_csv(std::istream& is);
void write_imu_csv(std::ostream& os, const std::vector<ImuSample>& samples);

/// Columns t, x, y, z. Rows with empty coordinates are kept as invalid
/// (missing marker) points.
std::vector<TrackPoint> read_track_csv(std::istream& is);

/// Columns t, x, y, z, traveled.
void write_positions_csv(std::ostream& os, const std::vector<TrackPoint>& track,
                         const std::vector<double>& traveled);
void write_track_csv(std::ostream& os, const std::vector<TrackPoint>& track);

}  // namespace cyborg
