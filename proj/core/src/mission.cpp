#include "cyborg/mission.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace cyborg {

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::Explore: return "explore";
        case Phase::Approach: return "approach";
        case Phase::Classify: return "classify";
    }
    return "?";
}

std::string_view to_string(Environment e) { return e == Environment::Indoor ? "indoor" : "outdoor"; }

std::string_view to_string(NavVariant v) { return v == NavVariant::Tracking ? "tracking" : "onboard"; }

std::string_view to_string(Classification c) { return c == Classification::Human ? "human" : "not_human"; }

Environment environment_from_string(std::string_view s) {
    if (s == "indoor") return Environment::Indoor;
    if (s == "outdoor") return Environment::Outdoor;
    throw std::invalid_argument("unknown environment: " + std::string(s));
}

NavVariant nav_variant_from_string(std::string_view s) {
    if (s == "tracking") return NavVariant::Tracking;
    if (s == "onboard") return NavVariant::Onboard;
    throw std::invalid_argument("unknown navigation variant: " + std::string(s));
}

bool transition_allowed(Phase from, Phase to) {
    return (from == Phase::Explore && to == Phase::Approach) ||
           (from == Phase::Approach && to == Phase::Classify) ||
           (from == Phase::Approach && to == Phase::Explore);
}

MissionConfig MissionConfig::indoor() { return MissionConfig{}; }

MissionConfig MissionConfig::outdoor() {
    MissionConfig c;
    c.environment = Environment::Outdoor;
    c.nav = NavVariant::Onboard;
    c.band_lo = 29.0;
    c.band_hi = 35.0;
    return c;
}

int fraction_to_pixels(double fraction) {
    return static_cast<int>(std::lround(fraction * kIrPixels));
}

int MissionConfig::phase2_pixels() const { return fraction_to_pixels(phase2_fraction); }
int MissionConfig::phase3_pixels() const { return fraction_to_pixels(phase3_fraction); }

void MissionConfig::validate() const {
    if (!(band_lo < band_hi)) throw std::invalid_argument("mission: band_lo must be below band_hi");
    if (phase2_pixels() < 1 || phase3_pixels() < 1 || outdoor_total < 1 || outdoor_center < 1) {
        throw std::invalid_argument("mission: triggers must be positive");
    }
    if (!(estimate_fraction >= 0.0)) throw std::invalid_argument("mission: negative estimate gate");
    if (!(left_max >= 1 && left_max < accel_max && accel_max < kIrSide)) {
        throw std::invalid_argument("mission: u-bands must partition [1, 32]");
    }
    if (!(approach_step > 0.0 && aux_step > 0.0 && arrival_radius > 0.0)) {
        throw std::invalid_argument("mission: steps and radii must be positive");
    }
    if (!(approach_time_limit > 0.0 && tick_dt > 0.0)) {
        throw std::invalid_argument("mission: time limits must be positive");
    }
    if (miss_limit < 1) throw std::invalid_argument("mission: miss_limit must be >= 1");
    if (!(sweep_limit > 0.0 && sweep_limit <= 180.0 && sweep_rate > 0.0)) {
        throw std::invalid_argument("mission: bad sweep parameters");
    }
    if (!(outdoor_phase3_multiplier > 0.0)) throw std::invalid_argument("mission: bad multiplier");
    strategy.validate();
}

FrameInfo analyze_frame(const IrImage& img, const MissionConfig& cfg) {
    FrameInfo f;
    f.image = &img;
    f.in_band = in_band_count(img, cfg.band_lo, cfg.band_hi);
    f.blob = detect_blob(img, cfg.blob);
    if (f.blob) f.center = center_window_count(img, f.blob->u, f.blob->v, cfg.band_lo, cfg.band_hi);
    return f;
}

bool outdoor_rule(const FrameInfo& f, int total, int center) {
    return f.blob.has_value() && f.in_band >= total && f.center >= center;
}

namespace {

int scaled(int n, double m) { return static_cast<int>(std::ceil(n * m - 1e-9)); }

}  // namespace

bool phase2_trigger(const FrameInfo& f, const MissionConfig& cfg) {
    if (cfg.environment == Environment::Outdoor) {
        return outdoor_rule(f, cfg.outdoor_total, cfg.outdoor_center);
    }
    return f.in_band >= cfg.phase2_pixels();
}

bool phase3_trigger(const FrameInfo& f, const MissionConfig& cfg) {
    if (cfg.environment == Environment::Outdoor) {
        const double m = cfg.outdoor_phase3_multiplier;
        return outdoor_rule(f, scaled(cfg.outdoor_total, m), scaled(cfg.outdoor_center, m));
    }
    return f.in_band >= cfg.phase3_pixels();
}

bool estimation_gate(const FrameInfo& f, const MissionConfig& cfg) {
    return static_cast<double>(f.in_band) / kIrPixels > cfg.estimate_fraction;
}

Classification phase3_classify(const FrameInfo& f, const MissionConfig& cfg) {
    bool human;
    if (cfg.environment == Environment::Outdoor) {
        human = outdoor_rule(f, cfg.outdoor_total, cfg.outdoor_center);
    } else {
        human = f.in_band >= cfg.phase3_pixels();
    }
    return human ? Classification::Human : Classification::NotHuman;
}

Classification phase3_classify(const IrImage& img, const MissionConfig& cfg) {
    return phase3_classify(analyze_frame(img, cfg), cfg);
}

StimCommand band_command(int u, const MissionConfig& cfg) {
    if (u < 1 || u > kIrSide) throw std::out_of_range("band_command: u outside [1, 32]");
    if (u <= cfg.left_max) return StimCommand::TurnLeft;
    if (u <= cfg.accel_max) return StimCommand::Accelerate;
    return StimCommand::TurnRight;
}

std::string_view to_string(RecaptureStage s) {
    switch (s) {
        case RecaptureStage::BackTurn: return "back_turn";
        case RecaptureStage::SweepRight: return "sweep_right";
        case RecaptureStage::SweepLeft: return "sweep_left";
        case RecaptureStage::Exhausted: return "exhausted";
    }
    return "?";
}

RecaptureStep recapture(RecaptureState& rec, double yaw, std::optional<bool> frame_detected,
                        const MissionConfig& cfg, double dt) {
    RecaptureStep step;
    if (frame_detected) {
        if (*frame_detected) {
            step.reacquired = true;
            return step;
        }
        ++rec.failed_reacquisitions;
    }
    const double lim = cfg.sweep_limit;
    const double per_tick = cfg.sweep_rate * dt;

    if (rec.stage == RecaptureStage::BackTurn) {
        const double err = normalize_angle(rec.last_bearing - yaw);
        if (std::abs(err) > cfg.align_tolerance) {
            step.cmd = err > 0.0 ? StimCommand::TurnLeft : StimCommand::TurnRight;
            step.turn_limit = std::abs(err);
            return step;
        }
        rec.stage = RecaptureStage::SweepRight;
        rec.sweep_origin = yaw;
        rec.yaw_accumulated = 0.0;
    }

    rec.yaw_accumulated = normalize_angle(yaw - rec.sweep_origin);
    if (rec.stage == RecaptureStage::SweepRight) {
        const double room = rec.yaw_accumulated + lim;
        if (room > 1e-9) {
            step.cmd = StimCommand::TurnRight;
            step.turn_limit = std::min(per_tick, room);
            return step;
        }
        rec.stage = RecaptureStage::SweepLeft;
    }
    if (rec.stage == RecaptureStage::SweepLeft) {
        const double room = lim - rec.yaw_accumulated;
        if (room > 1e-9) {
            step.cmd = StimCommand::TurnLeft;
            step.turn_limit = std::min(per_tick, room);
            return step;
        }
        rec.stage = RecaptureStage::Exhausted;
    }
    step.give_up = true;
    return step;
}

std::string_view to_string(MissionEventType t) {
    switch (t) {
        case MissionEventType::Transition: return "transition";
        case MissionEventType::EstimateIssued: return "estimate_issued";
        case MissionEventType::EstimateArrival: return "estimate_arrival";
        case MissionEventType::AuxIssued: return "aux_issued";
        case MissionEventType::RecaptureStart: return "recapture_start";
        case MissionEventType::GiveUp: return "give_up";
        case MissionEventType::Classified: return "classified";
        case MissionEventType::Phase3Criterion: return "phase3_criterion";
        case MissionEventType::Timeout: return "timeout";
    }
    return "?";
}

Mission::Mission(MissionConfig cfg, Rng rng) : cfg_(std::move(cfg)), rng_(rng) { cfg_.validate(); }

std::optional<Vec2> Mission::current_destination() const {
    if (phase_ == Phase::Explore && dest_) return dest_->target;
    if (phase_ == Phase::Approach && cfg_.nav == NavVariant::Tracking) {
        if (track_.mode == ApproachMode::Travel) return track_.dest;
        if (track_.mode == ApproachMode::Shuttle) return track_.shuttle[track_.shuttle_index];
    }
    return std::nullopt;
}

void Mission::log(double t, MissionEventType type, Vec2 at, Vec2 target, std::string detail) {
    events_.push_back({t, type, at, target, std::move(detail)});
}

PhaseTransition Mission::transition(double t, Phase to, std::string reason) {
    if (!transition_allowed(phase_, to)) {
        throw std::logic_error("mission: illegal transition " + std::string(to_string(phase_)) + " -> " +
                               std::string(to_string(to)));
    }
    PhaseTransition tr{t, phase_, to, std::move(reason)};
    transitions_.push_back(tr);
    log(t, MissionEventType::Transition, {}, {}, std::string(to_string(phase_)) + "->" + std::string(to_string(to)));
    phase_ = to;
    phase_start_ = t;
    return tr;
}

void Mission::enter_approach(double t) {
    phase_start_ = t;
    track_ = TrackingState{};
    onboard_ = OnboardState{};
    recapture_.reset();
    dest_.reset();
}

void Mission::start_in_approach(double t) {
    if (phase_ != Phase::Explore || !transitions_.empty()) {
        throw std::logic_error("mission: start_in_approach on a running mission");
    }
    phase_ = Phase::Approach;
    enter_approach(t);
}

TickResult Mission::give_up(double t, const Pose& pose, std::string reason) {
    ++give_ups_;
    log(t, MissionEventType::GiveUp, pose.position(), {}, reason);
    TickResult r;
    r.transition = transition(t, Phase::Explore, std::move(reason));
    track_ = TrackingState{};
    onboard_ = OnboardState{};
    recapture_.reset();
    dest_.reset();
    return r;
}

TickResult Mission::tick(double t, const Pose& pose, const Arena& arena, const IrImage* frame) {
    arena_ = arena;
    if (finished()) return {};
    std::optional<FrameInfo> info;
    if (frame) info = analyze_frame(*frame, cfg_);
    const FrameInfo* f = info ? &*info : nullptr;
    switch (phase_) {
        case Phase::Explore: return phase1_tick(t, pose, arena, f);
        case Phase::Approach:
            return cfg_.nav == NavVariant::Tracking ? phase2_tracking_tick(t, pose, f)
                                                    : phase2_onboard_tick(t, pose, f);
        case Phase::Classify: return phase3_tick(t, f);
    }
    return {};
}

TickResult Mission::phase1_tick(double t, const Pose& pose, const Arena& arena, const FrameInfo* frame) {
    if (phase_ != Phase::Explore) throw std::logic_error("phase1_tick outside Explore");
    arena_ = arena;
    if (frame && phase2_trigger(*frame, cfg_)) {
        auto tr = transition(t, Phase::Approach, "thermal trigger");
        enter_approach(t);
        skip_phase3_ = true;
        TickResult r = cfg_.nav == NavVariant::Tracking ? phase2_tracking_tick(t, pose, frame)
                                                        : phase2_onboard_tick(t, pose, frame);
        skip_phase3_ = false;
        r.transition = tr;
        return r;
    }

    if (!dest_ || !dest_->interim) {
        if (auto w = wall_redirect(pose, arena, cfg_.wall_trigger, cfg_.wall_hop)) dest_ = *w;
    }
    if (!dest_) dest_ = next_destination(cfg_.strategy, pose, arena, rng_);

    TickResult r;
    r.cmd = goto_point(pose, dest_->target, cfg_.goto_angle, cfg_.goto_distance);
    if (r.cmd == StimCommand::Arrived) {
        dest_ = next_destination(cfg_.strategy, pose, arena, rng_);
        r.cmd = goto_point(pose, dest_->target, cfg_.goto_angle, cfg_.goto_distance);
        if (r.cmd == StimCommand::Arrived) r.cmd = StimCommand::None;
    }
    return r;
}

void Mission::issue_estimate(double t, const Pose& pose, const BlobResult& blob) {
    const auto est = estimate_target(pose, column_to_estimate_angle(blob.u), cfg_.approach_step);
    const double m = std::min({cfg_.strategy.clip_margin, arena_.width / 2.0, arena_.height / 2.0});
    Vec2 d = est.position();
    d.x = std::clamp(d.x, m, arena_.width - m);
    d.y = std::clamp(d.y, m, arena_.height - m);
    track_.origin = pose.position();
    track_.dest = d;
    track_.mode = ApproachMode::Travel;
    ++track_.estimates;
    log(t, MissionEventType::EstimateIssued, pose.position(), d, std::to_string(track_.estimates));
}

namespace {

StimCommand turn_toward(double err) { return err > 0.0 ? StimCommand::TurnLeft : StimCommand::TurnRight; }

}  // namespace

TickResult Mission::phase2_tracking_tick(double t, const Pose& pose, const FrameInfo* frame) {
    if (phase_ != Phase::Approach) throw std::logic_error("phase2 tick outside Approach");
    TickResult r;
    if (t - phase_start_ > cfg_.approach_time_limit) return give_up(t, pose, "timeout");

    if (frame && !skip_phase3_ && phase3_trigger(*frame, cfg_)) {
        if (!phase3_logged_) log(t, MissionEventType::Phase3Criterion, pose.position());
        phase3_logged_ = true;
        if (cfg_.classify_enabled) {
            r.transition = transition(t, Phase::Classify, "phase III criterion");
            return r;
        }
    }

    const bool can_estimate = frame && frame->blob && estimation_gate(*frame, cfg_);
    switch (track_.mode) {
        case ApproachMode::Scan:
            if (can_estimate) {
                issue_estimate(t, pose, *frame->blob);
                break;
            }
            r.cmd = StimCommand::TurnRight;
            r.turn_limit = cfg_.sweep_rate * cfg_.tick_dt;
            return r;
        case ApproachMode::Travel:
            break;
        case ApproachMode::AwaitFrame:
            if (can_estimate) {
                issue_estimate(t, pose, *frame->blob);
                break;
            }
            if (frame && track_.estimates > 0) {
                Vec2 dir = track_.dest - track_.origin;
                const double n = norm(dir);
                dir = n > 1e-12 ? (1.0 / n) * dir : heading_vector(pose.yaw);
                const Vec2 aux = arena_.clamp(track_.dest + cfg_.aux_step * dir);
                track_.shuttle[0] = aux;
                track_.shuttle[1] = track_.dest;
                track_.shuttle_index = 0;
                track_.mode = ApproachMode::Shuttle;
                log(t, MissionEventType::AuxIssued, pose.position(), aux);
                break;
            }
            return r;
        case ApproachMode::Shuttle:
            if (can_estimate) issue_estimate(t, pose, *frame->blob);
            break;
    }

    if (track_.mode == ApproachMode::Travel) {
        r.cmd = goto_point(pose, track_.dest, cfg_.goto_angle, cfg_.arrival_radius);
        if (r.cmd == StimCommand::Arrived) {
            log(t, MissionEventType::EstimateArrival, pose.position(), track_.dest,
                std::to_string(track_.estimates));
            track_.mode = ApproachMode::AwaitFrame;
            r.cmd = StimCommand::None;
        }
        return r;
    }
    // Shuttle between the auxiliary point and the last destination.
    r.cmd = goto_point(pose, track_.shuttle[track_.shuttle_index], cfg_.goto_angle, cfg_.goto_distance);
    if (r.cmd == StimCommand::Arrived) {
        track_.shuttle_index ^= 1;
        r.cmd = goto_point(pose, track_.shuttle[track_.shuttle_index], cfg_.goto_angle, cfg_.goto_distance);
        if (r.cmd == StimCommand::Arrived) r.cmd = StimCommand::None;
    }
    return r;
}

TickResult Mission::phase2_onboard_tick(double t, const Pose& pose, const FrameInfo* frame) {
    if (phase_ != Phase::Approach) throw std::logic_error("phase2 tick outside Approach");
    TickResult r;
    if (t - phase_start_ > cfg_.approach_time_limit) return give_up(t, pose, "timeout");

    std::optional<bool> detected;
    if (frame) {
        const bool visible = frame->blob && estimation_gate(*frame, cfg_);
        detected = visible;
        if (visible) {
            if (!skip_phase3_ && phase3_trigger(*frame, cfg_)) {
                if (!phase3_logged_) log(t, MissionEventType::Phase3Criterion, pose.position());
                phase3_logged_ = true;
                if (cfg_.classify_enabled) {
                    r.transition = transition(t, Phase::Classify, "phase III criterion");
                    return r;
                }
            }
            onboard_.misses = 0;
            recapture_.reset();
            const int u = frame->blob->u;
            onboard_.seen = true;
            onboard_.last_bearing = normalize_angle(pose.yaw + 45.0 - pixel_to_angle(u));
            r.cmd = band_command(u, cfg_);
            if (r.cmd == StimCommand::Accelerate) {
                onboard_.target_yaw.reset();
            } else {
                onboard_.target_yaw = onboard_.last_bearing;
                r.turn_limit = std::abs(normalize_angle(onboard_.last_bearing - pose.yaw));
            }
            return r;
        }
        ++onboard_.misses;
        if (onboard_.seen && !recapture_ && onboard_.misses >= cfg_.miss_limit) {
            recapture_ = RecaptureState{};
            recapture_->last_bearing = onboard_.last_bearing;
            log(t, MissionEventType::RecaptureStart, pose.position());
            detected.reset();
        }
    }

    if (recapture_) {
        const auto step = recapture(*recapture_, pose.yaw, detected, cfg_, cfg_.tick_dt);
        if (step.give_up) return give_up(t, pose, "recapture exhausted");
        r.cmd = step.cmd;
        r.turn_limit = step.turn_limit;
        return r;
    }
    if (!onboard_.seen) {
        r.cmd = StimCommand::TurnRight;
        r.turn_limit = cfg_.sweep_rate * cfg_.tick_dt;
        return r;
    }
    if (onboard_.target_yaw) {
        const double err = normalize_angle(*onboard_.target_yaw - pose.yaw);
        if (std::abs(err) > cfg_.align_tolerance) {
            r.cmd = turn_toward(err);
            r.turn_limit = std::abs(err);
            return r;
        }
        onboard_.target_yaw.reset();
    }
    r.cmd = StimCommand::Accelerate;
    return r;
}

TickResult Mission::phase3_tick(double t, const FrameInfo* frame) {
    if (phase_ != Phase::Classify) throw std::logic_error("phase3 tick outside Classify");
    TickResult r;
    if (!frame) return r;
    const auto c = phase3_classify(*frame, cfg_);
    outcome_ = c;
    r.classification = c;
    log(t, MissionEventType::Classified, {}, {}, std::string(to_string(c)));
    return r;
}

std::string_view to_string(MissionOutcome o) {
    switch (o) {
        case MissionOutcome::Human: return "human";
        case MissionOutcome::NotHuman: return "not_human";
        case MissionOutcome::NotFound: return "not_found";
        case MissionOutcome::Reached: return "reached";
    }
    return "?";
}

std::optional<SourceKind> dominant_source(const World& world, const Pose& pose, const CameraModel& cam,
                                          double t, double lo, double hi) {
    std::optional<SourceKind> best;
    int best_count = 0;
    for (const auto& s : world.sources) {
        if (!s.active_at(t)) continue;
        World single = world;
        single.sources = {s};
        const int n = in_band_count(render_ir_clean(single, pose, cam, t), lo, hi);
        if (n > best_count) {
            best_count = n;
            best = s.kind;
        }
    }
    return best;
}

MissionReport run_mission(const MissionScenario& sc, std::uint64_t seed) {
    sc.world.validate();
    sc.camera.validate();
    sc.motion.validate();
    if (!(sc.dt > 0.0) || !(sc.time_budget >= 0.0)) {
        throw std::invalid_argument("run_mission: dt and time budget must be positive");
    }
    const Arena& arena = sc.world.arena;
    if (!arena.contains(sc.start.position())) throw OutOfBoundsError("run_mission: start outside arena");

    Rng root(seed);
    Rng motion_rng = root.split();
    Rng cam_rng = root.split();
    Rng mission_rng = root.split();
    Rng imu_rng = root.split();

    MissionConfig cfg = sc.config;
    cfg.tick_dt = sc.dt;
    cfg.blob.noise_sd = sc.camera.noise_sd;
    Mission mission(cfg, mission_rng);
    if (sc.start_in_approach) mission.start_in_approach(0.0);

    MissionReport rep;
    rep.seed = seed;
    Pose pose = sc.start;
    WalkState walk;

    std::optional<GaitSynth> synth;
    std::optional<DeadReckoner> reckoner;
    const int imu_per_tick = std::max(1, static_cast<int>(std::lround(sc.dt * sc.gait.rate_hz)));
    if (sc.imu_localization) {
        synth.emplace(sc.gait, imu_rng);
        reckoner.emplace(sc.gait.k_true, TrackMode::Planar, sc.gait.window, sc.gait.rate_hz);
        reckoner->reset(Eigen::Vector3d(pose.x, pose.y, 0.0));
    }

    const auto steps = static_cast<long>(std::ceil(sc.time_budget / sc.dt - 1e-9));
    const auto frame_every = std::max(1L, std::lround(sc.camera.period() / sc.dt));
    const auto traj_every = std::max(1L, std::lround(1.0 / sc.dt));
    StimCommand prev = StimCommand::None;
    std::size_t seen_events = 0;
    double t = 0.0;

    auto sync_events = [&] {
        for (; seen_events < mission.events().size(); ++seen_events) {
            rep.event_true_positions.push_back(pose.position());
        }
    };

    for (long i = 0; i <= steps; ++i) {
        t = i * sc.dt;
        if (i % traj_every == 0) {
            rep.trajectory.push_back(pose);
            rep.trajectory_t.push_back(t);
        }
        if (sc.success_point && distance(pose.position(), *sc.success_point) < sc.success_radius) {
            rep.outcome = MissionOutcome::Reached;
            rep.success_time = t;
            break;
        }
        if (i == steps) break;

        Pose nav = pose;
        if (reckoner) {
            nav.x = reckoner->state().position.x();
            nav.y = reckoner->state().position.y();
            nav.yaw = reckoner->yaw();
        }
        std::optional<IrImage> img;
        if (i % frame_every == 0) img = render_ir(sc.world, pose, sc.camera, cam_rng, t);

        const Phase before = mission.phase();
        const TickResult r = mission.tick(t, nav, arena, img ? &*img : nullptr);
        sync_events();
        if (r.transition && img) rep.frames.push_back({t, r.transition->to, *img});
        if (r.classification) {
            rep.outcome = *r.classification == Classification::Human ? MissionOutcome::Human
                                                                     : MissionOutcome::NotHuman;
            if (*r.classification == Classification::Human) {
                rep.classified_kind = dominant_source(sc.world, pose, sc.camera, t, cfg.band_lo, cfg.band_hi);
            }
            break;
        }
        rep.time_in_phase[static_cast<int>(before)] += sc.dt;

        const StimCommand cmd = r.cmd == StimCommand::Arrived ? StimCommand::None : r.cmd;
        if (cmd == StimCommand::None && prev != StimCommand::None && !walk.stopped()) {
            walk.segment_active = false;
        }
        const Pose next = apply_stimulus(pose, cmd, sc.motion, arena, walk, motion_rng, sc.dt, r.turn_limit);
        const double moved = distance(next.position(), pose.position());
        rep.path_length += moved;
        if (synth) {
            const double v = moved / sc.dt;
            const auto q = orientation_from_euler(next.yaw, next.pitch, next.roll);
            for (int s = 1; s <= imu_per_tick; ++s) {
                reckoner->push(synth->next(t + s / sc.gait.rate_hz, v, q));
            }
        }
        prev = cmd;
        pose = next;
    }
    rep.end_time = t;
    rep.timeline = mission.transitions();
    rep.events = mission.events();
    rep.give_ups = mission.give_ups();
    if (reckoner) {
        const auto& p = reckoner->state().position;
        rep.final_imu_error = distance({p.x(), p.y()}, pose.position());
    }
    return rep;
}

}  // namespace cyborg
