#include "cyborg/imu.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace cyborg {

Eigen::Quaterniond orientation_from_euler(double yaw_deg, double pitch_deg, double roll_deg) {
    using Eigen::AngleAxisd;
    using Eigen::Vector3d;
    // Nose-up pitch rotates body +x toward world +z, i.e. negative about +y.
    return Eigen::Quaterniond(AngleAxisd(deg2rad(yaw_deg), Vector3d::UnitZ()) *
                              AngleAxisd(-deg2rad(pitch_deg), Vector3d::UnitY()) *
                              AngleAxisd(deg2rad(roll_deg), Vector3d::UnitX()));
}

double yaw_from_orientation(const Eigen::Quaterniond& q) {
    const Eigen::Vector3d f = q.normalized() * Eigen::Vector3d::UnitX();
    return rad2deg(std::atan2(f.y(), f.x()));
}

std::size_t GaitModel::window_samples() const {
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(window * rate_hz)));
}

GaitSynth::GaitSynth(GaitModel model, Rng rng) : model_(model), rng_(rng) {
    if (!(model_.k_true > 0.0) || !(model_.rate_hz > 0.0) || !(model_.gait_freq > 0.0)) {
        throw std::invalid_argument("gait model needs positive gain, rate and frequency");
    }
    // Expected windowed (n - 1) variance of a quadrature pair of amplitude a
    // is a^2 * n / (n - 1) * (1 - m^2), m the window mean of exp(i w k).
    const double n = static_cast<double>(model_.window_samples());
    const double w = 2.0 * std::numbers::pi * model_.gait_freq / model_.rate_hz;
    const double den = n * std::sin(w / 2.0);
    const double m = std::abs(den) > 1e-12 ? std::sin(n * w / 2.0) / den : 1.0;
    deficit_ = std::max(1e-6, n / (n - 1.0) * (1.0 - m * m));
}

double GaitSynth::amplitude_for(double speed) const {
    const double noise_var = 3.0 * model_.noise_sd * model_.noise_sd;
    const double signal_var = std::max(0.0, speed / model_.k_true - noise_var);
    return std::sqrt(signal_var / deficit_);
}

ImuSample GaitSynth::next(double t, double speed, const Eigen::Quaterniond& orientation) {
    const double a = amplitude_for(speed);
    ImuSample s;
    s.t = t;
    s.acc = Eigen::Vector3d(a * std::sin(phase_) + rng_.normal(0.0, model_.noise_sd),
                            rng_.normal(0.0, model_.noise_sd),
                            a * std::cos(phase_) + rng_.normal(0.0, model_.noise_sd));
    phase_ = std::fmod(phase_ + 2.0 * std::numbers::pi * model_.gait_freq / model_.rate_hz,
                       2.0 * std::numbers::pi);
    if (model_.heading_jitter_deg > 0.0) {
        constexpr double tau = 5.0;
        const double dt = 1.0 / model_.rate_hz;
        const double decay = std::exp(-dt / tau);
        jitter_ = decay * jitter_ +
                  std::sqrt(1.0 - decay * decay) * rng_.normal(0.0, model_.heading_jitter_deg);
        s.orientation =
            Eigen::Quaterniond(Eigen::AngleAxisd(deg2rad(jitter_), Eigen::Vector3d::UnitZ())) *
            orientation;
    } else {
        s.orientation = orientation;
    }
    return s;
}

std::vector<ImuSample> synth_gait(const std::vector<TimedPose>& path, const GaitModel& model,
                                  Rng& rng) {
    std::vector<ImuSample> out;
    if (path.size() < 2) return out;
    GaitSynth synth(model, rng.split());
    const double dt = 1.0 / model.rate_hz;
    std::size_t i = 0;
    const double t0 = path.front().t;
    const double t_end = path.back().t;
    for (std::size_t k = 0;; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        if (t > t_end + 1e-12) break;
        while (i + 2 < path.size() && path[i + 1].t <= t) ++i;
        const auto& a = path[i];
        const auto& b = path[i + 1];
        const double span = b.t - a.t;
        if (!(span > 0.0)) throw std::invalid_argument("synth_gait: path timestamps not increasing");
        const Eigen::Vector3d d(b.pose.x - a.pose.x, b.pose.y - a.pose.y, b.pose.z - a.pose.z);
        const double speed = d.norm() / span;
        out.push_back(synth.next(t, speed,
                                 orientation_from_euler(a.pose.yaw, a.pose.pitch, a.pose.roll)));
    }
    return out;
}

double acceleration_variance(std::span<const Eigen::Vector3d> window) {
    const std::size_t n = window.size();
    if (n < 2) return 0.0;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& a : window) mean += a;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& a : window) ss += (a - mean).squaredNorm();
    return ss / static_cast<double>(n - 1);
}

double estimate_speed(double k, std::span<const Eigen::Vector3d> window) {
    return std::max(0.0, k * acceleration_variance(window));
}

SpeedEstimator::SpeedEstimator(double k, double window_s, double rate_hz) : k_(k) {
    if (!(k > 0.0)) throw std::invalid_argument("speed estimator gain must be positive");
    if (!(window_s > 0.0) || !(rate_hz > 0.0)) {
        throw std::invalid_argument("speed estimator window and rate must be positive");
    }
    capacity_ = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(window_s * rate_hz)));
}

void SpeedEstimator::set_gain(double k) {
    if (!(k > 0.0)) throw std::invalid_argument("speed estimator gain must be positive");
    k_ = k;
}

double SpeedEstimator::update(const ImuSample& sample) {
    buffer_.push_back(sample.acc);
    if (buffer_.size() > capacity_) buffer_.pop_front();
    if (buffer_.size() < 2) return 0.0;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& a : buffer_) mean += a;
    mean /= static_cast<double>(buffer_.size());
    double ss = 0.0;
    for (const auto& a : buffer_) ss += (a - mean).squaredNorm();
    return std::max(0.0, k_ * ss / static_cast<double>(buffer_.size() - 1));
}

DeadReckonState integrate_position(DeadReckonState state, double speed,
                                   const Eigen::Quaterniond& q, double dt, TrackMode mode) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_position: dt must be positive");
    const double qn = q.norm();
    if (!(qn > 0.0)) throw std::invalid_argument("integrate_position: zero quaternion");
    if (std::abs(qn - 1.0) > 1e-3) ++state.orientation_warnings;
    const Eigen::Quaterniond unit(Eigen::Vector4d(q.coeffs() / qn));
    Eigen::Vector3d heading = unit * Eigen::Vector3d::UnitX();
    if (mode == TrackMode::Planar) heading.z() = 0.0;
    state.position += speed * dt * heading;
    state.traveled += speed * dt;
    return state;
}

DeadReckoner::DeadReckoner(double k, TrackMode mode, double window_s, double rate_hz)
    : estimator_(k, window_s, rate_hz), mode_(mode) {}

void DeadReckoner::reset(const Eigen::Vector3d& position) {
    state_ = DeadReckonState{};
    state_.position = position;
    started_ = false;
}

void DeadReckoner::push(const ImuSample& sample) {
    yaw_ = yaw_from_orientation(sample.orientation);
    if (!started_) {
        started_ = true;
        state_.last_t = sample.t;
        last_speed_ = estimator_.update(sample);
        return;
    }
    const double dt = sample.t - state_.last_t;
    if (!(dt > 0.0)) throw std::invalid_argument("dead reckoning: samples not time-ordered");
    last_speed_ = estimator_.update(sample);
    state_ = integrate_position(state_, last_speed_, sample.orientation, dt, mode_);
    state_.last_t = sample.t;
}

double calibrate_gain(double measured, double actual, double k, CalibrationMode mode) {
    if (!(measured > 0.0) || !(actual > 0.0)) {
        throw std::invalid_argument("calibrate_gain: distances must be positive");
    }
    if (!(k > 0.0)) throw std::invalid_argument("calibrate_gain: gain must be positive");
    return mode == CalibrationMode::Literal ? measured / actual * k : actual / measured * k;
}

namespace {

Eigen::Vector3d interpolate(const std::vector<TrackPoint>& track, double t, std::size_t& hint) {
    if (t <= track.front().t) return track.front().p;
    if (t >= track.back().t) return track.back().p;
    while (hint + 1 < track.size() && track[hint + 1].t < t) ++hint;
    const auto& a = track[hint];
    const auto& b = track[hint + 1];
    const double span = b.t - a.t;
    const double w = span > 0.0 ? (t - a.t) / span : 0.0;
    return a.p + w * (b.p - a.p);
}

}  // namespace

std::vector<ErrorPoint> error_series(const std::vector<TrackPoint>& estimated,
                                     const std::vector<TrackPoint>& reference) {
    std::vector<ErrorPoint> out;
    if (estimated.empty()) return out;
    std::size_t hint = 0;
    double traveled = 0.0;
    const TrackPoint* prev = nullptr;
    for (const auto& ref : reference) {
        if (!ref.valid) continue;
        if (prev) traveled += (ref.p - prev->p).norm();
        prev = &ref;
        ErrorPoint e;
        e.t = ref.t;
        e.traveled = traveled;
        e.error = (interpolate(estimated, ref.t, hint) - ref.p).norm();
        e.error_pct = traveled > 0.0 ? 100.0 * e.error / traveled : 0.0;
        out.push_back(e);
    }
    return out;
}

std::vector<TimedPose> synthetic_walk(const SyntheticWalk& cfg, Rng& rng) {
    std::vector<TimedPose> path;
    const double dt = 1.0 / cfg.rate_hz;
    const double tan_slope = std::tan(deg2rad(cfg.slope_deg));
    Eigen::Vector3d p(cfg.start.x, cfg.start.y, cfg.start.y * tan_slope);
    double yaw = cfg.start_yaw;
    double speed = 0.0;
    double seg_left = 0.0;
    const auto steps = static_cast<std::size_t>(std::llround(cfg.duration * cfg.rate_hz));
    for (std::size_t k = 0; k <= steps; ++k) {
        if (seg_left <= 0.0) {
            seg_left = -cfg.segment_mean * std::log(rng.uniform_open0());
            if (k > 0) yaw = normalize_angle(yaw + rng.normal(0.0, cfg.turn_sd_deg));
            speed = rng.bernoulli(cfg.p_pause) ? 0.0 : rng.uniform(cfg.speed_lo, cfg.speed_hi);
        }
        // Surface tangent along the horizontal heading.
        const double c = std::cos(deg2rad(yaw)), s = std::sin(deg2rad(yaw));
        Eigen::Vector3d dir(c, s, s * tan_slope);
        dir.normalize();
        TimedPose tp;
        tp.t = static_cast<double>(k) * dt;
        tp.pose.x = p.x();
        tp.pose.y = p.y();
        tp.pose.z = p.z();
        tp.pose.yaw = yaw;
        tp.pose.pitch = rad2deg(std::asin(dir.z()));
        path.push_back(tp);
        p += speed * dt * dir;
        seg_left -= dt;
    }
    return path;
}

std::vector<TrackPoint> to_track(const std::vector<TimedPose>& path) {
    std::vector<TrackPoint> out;
    out.reserve(path.size());
    for (const auto& tp : path) {
        out.push_back({tp.t, Eigen::Vector3d(tp.pose.x, tp.pose.y, tp.pose.z), true});
    }
    return out;
}

double path_length(const std::vector<TrackPoint>& track) {
    double len = 0.0;
    const TrackPoint* prev = nullptr;
    for (const auto& p : track) {
        if (!p.valid) continue;
        if (prev) len += (p.p - prev->p).norm();
        prev = &p;
    }
    return len;
}

CsvError::CsvError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t");
        const auto e = cell.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

template <typename RowFn>
void for_each_row(std::istream& is, RowFn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t,") == std::string::npos) continue;
        auto fields = split_fields(line);
        double probe;
        if (first && !parse_double(fields.front(), probe)) {
            first = false;
            continue;  // header
        }
        first = false;
        fn(lineno, fields);
    }
}

}  // namespace

std::vector<ImuSample> read_imu_csv(std::istream& is) {
    std::vector<ImuSample> out;
    for_each_row(is, [&](std::size_t lineno, const std::vector<std::string>& f) {
        if (f.size() != 8) throw CsvError(lineno, fmt::format("expected 8 columns, got {}", f.size()));
        double v[8];
        for (int i = 0; i < 8; ++i) {
            if (!parse_double(f[i], v[i])) throw CsvError(lineno, fmt::format("bad number '{}'", f[i]));
        }
        ImuSample s;
        s.t = v[0];
        s.acc = Eigen::Vector3d(v[1], v[2], v[3]);
        s.orientation = Eigen::Quaterniond(v[4], v[5], v[6], v[7]);
        if (!out.empty() && !(s.t > out.back().t)) throw CsvError(lineno, "timestamps not increasing");
        out.push_back(s);
    });
    return out;
}

void write_imu_csv(std::ostream& os, const std::vector<ImuSample>& samples) {
    os << "t,ax,ay,az,qw,qx,qy,qz\n";
    for (const auto& s : samples) {
        fmt::print(os, "{},{},{},{},{},{},{},{}\n", s.t, s.acc.x(), s.acc.y(), s.acc.z(),
                   s.orientation.w(), s.orientation.x(), s.orientation.y(), s.orientation.z());
    }
}

std::vector<TrackPoint> read_track_csv(std::istream& is) {
    std::vector<TrackPoint> out;
    for_each_row(is, [&](std::size_t lineno, const std::vector<std::string>& f) {
        if (f.size() < 3 || f.size() > 4) {
            throw CsvError(lineno, fmt::format("expected 4 columns, got {}", f.size()));
        }
        TrackPoint tp;
        if (!parse_double(f[0], tp.t)) throw CsvError(lineno, fmt::format("bad time '{}'", f[0]));
        const bool blank = std::all_of(f.begin() + 1, f.end(), [](const std::string& s) { return s.empty(); });
        if (blank) {
            tp.valid = false;
        } else {
            double c[3] = {0.0, 0.0, 0.0};
            for (std::size_t i = 1; i < f.size(); ++i) {
                if (!parse_double(f[i], c[i - 1])) {
                    throw CsvError(lineno, fmt::format("bad coordinate '{}'", f[i]));
                }
            }
            tp.p = Eigen::Vector3d(c[0], c[1], c[2]);
        }
        out.push_back(tp);
    });
    return out;
}

void write_positions_csv(std::ostream& os, const std::vector<TrackPoint>& track,
                         const std::vector<double>& traveled) {
    os << "t,x,y,z,traveled\n";
    for (std::size_t i = 0; i < track.size(); ++i) {
        const auto& p = track[i];
        fmt::print(os, "{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", p.t, p.p.x(), p.p.y(), p.p.z(),
                   i < traveled.size() ? traveled[i] : 0.0);
    }
}

void write_track_csv(std::ostream& os, const std::vector<TrackPoint>& track) {
    os << "t,x,y,z\n";
    for (const auto& p : track) {
        if (p.valid) {
            fmt::print(os, "{},{},{},{}\n", p.t, p.p.x(), p.p.y(), p.p.z());
        } else {
            fmt::print(os, "{},,,\n", p.t);
        }
    }
}

}  // namespace cyborg
