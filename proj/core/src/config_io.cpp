#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "cyborg/harness.hpp"
#include "cyborg/plots.hpp"

namespace cyborg {

using Json = nlohmann::ordered_json;

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        if (!ok.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
    }
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

Json vec_json(Vec2 v) { return Json::array({v.x, v.y}); }

Vec2 read_vec(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError(where + ": expected [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

void read_vec(const Json& j, const char* key, Vec2& out, const std::string& where) {
    if (j.contains(key)) out = read_vec(j.at(key), where + "." + key);
}

Json pose_json(const Pose& p) { return Json{{"x", p.x}, {"y", p.y}, {"yaw", p.yaw}}; }

Pose read_pose(const Json& j, Pose p, const std::string& where) {
    check_keys(j, {"x", "y", "yaw"}, where);
    read(j, "x", p.x, where);
    read(j, "y", p.y, where);
    read(j, "yaw", p.yaw, where);
    return p;
}

Json arena_json(const Arena& a) { return Json{{"width", a.width}, {"height", a.height}, {"slope", a.slope}}; }

Arena read_arena(const Json& j, Arena a, const std::string& where) {
    check_keys(j, {"width", "height", "slope"}, where);
    double w = a.width, h = a.height, s = a.slope;
    read(j, "width", w, where);
    read(j, "height", h, where);
    read(j, "slope", s, where);
    try {
        return Arena(w, h, s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

Json motion_json(const MotionParams& m) {
    return Json{{"straight_len_mean", m.straight_len_mean},
                {"straight_len_sd", m.straight_len_sd},
                {"p_persist", m.p_persist},
                {"p_stop", m.p_stop},
                {"stop_mean", m.stop_mean},
                {"stop_sd", m.stop_sd},
                {"p_exit", m.p_exit},
                {"wall_depart_median", m.wall_depart_median},
                {"wall_depart_shape", m.wall_depart_shape},
                {"v_nat_mean", m.v_nat_mean},
                {"v_nat_sd", m.v_nat_sd},
                {"v_stim_mean", m.v_stim_mean},
                {"v_stim_sd", m.v_stim_sd},
                {"w_stim_mean", m.w_stim_mean},
                {"w_stim_sd", m.w_stim_sd},
                {"turn_mu", m.turn_mu},
                {"turn_kappa", m.turn_kappa},
                {"wall_follow_distance", m.wall_follow_distance}};
}

MotionParams read_motion(const Json& j, MotionParams m, const std::string& w) {
    check_keys(j, {"straight_len_mean", "straight_len_sd", "p_persist", "p_stop", "stop_mean", "stop_sd",
                   "p_exit", "wall_depart_median", "wall_depart_shape", "v_nat_mean", "v_nat_sd",
                   "v_stim_mean", "v_stim_sd", "w_stim_mean", "w_stim_sd", "turn_mu", "turn_kappa",
                   "wall_follow_distance"},
               w);
    read(j, "straight_len_mean", m.straight_len_mean, w);
    read(j, "straight_len_sd", m.straight_len_sd, w);
    read(j, "p_persist", m.p_persist, w);
    read(j, "p_stop", m.p_stop, w);
    read(j, "stop_mean", m.stop_mean, w);
    read(j, "stop_sd", m.stop_sd, w);
    read(j, "p_exit", m.p_exit, w);
    read(j, "wall_depart_median", m.wall_depart_median, w);
    read(j, "wall_depart_shape", m.wall_depart_shape, w);
    read(j, "v_nat_mean", m.v_nat_mean, w);
    read(j, "v_nat_sd", m.v_nat_sd, w);
    read(j, "v_stim_mean", m.v_stim_mean, w);
    read(j, "v_stim_sd", m.v_stim_sd, w);
    read(j, "w_stim_mean", m.w_stim_mean, w);
    read(j, "w_stim_sd", m.w_stim_sd, w);
    read(j, "turn_mu", m.turn_mu, w);
    read(j, "turn_kappa", m.turn_kappa, w);
    read(j, "wall_follow_distance", m.wall_follow_distance, w);
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(w + ": " + e.what());
    }
    return m;
}

Json strategy_json(const Strategy& s) {
    return Json{{"kind", std::string(to_string(s.kind))},
                {"min_step", s.min_step},
                {"fixed_step", s.fixed_step},
                {"uniform_lo", s.uniform_lo},
                {"uniform_hi", s.uniform_hi},
                {"brownian_step", s.brownian_step},
                {"levy_mu", s.levy_mu},
                {"levy_max", s.levy_max},
                {"clip_margin", s.clip_margin}};
}

Strategy read_strategy(const Json& j, Strategy s, const std::string& w) {
    check_keys(j, {"kind", "min_step", "fixed_step", "uniform_lo", "uniform_hi", "brownian_step", "levy_mu",
                   "levy_max", "clip_margin"},
               w);
    if (j.contains("kind")) {
        std::string k;
        read(j, "kind", k, w);
        try {
            s.kind = strategy_from_string(k);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(w + ": " + e.what());
        }
    }
    read(j, "min_step", s.min_step, w);
    read(j, "fixed_step", s.fixed_step, w);
    read(j, "uniform_lo", s.uniform_lo, w);
    read(j, "uniform_hi", s.uniform_hi, w);
    read(j, "brownian_step", s.brownian_step, w);
    read(j, "levy_mu", s.levy_mu, w);
    read(j, "levy_max", s.levy_max, w);
    read(j, "clip_margin", s.clip_margin, w);
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(w + ": " + e.what());
    }
    return s;
}

Json camera_json(const CameraModel& c) {
    return Json{{"h_fov", c.h_fov},       {"v_fov", c.v_fov},         {"height", c.height},
                {"rate_hz", c.rate_hz},   {"noise_sd", c.noise_sd},   {"max_range", c.max_range},
                {"attenuation_ref", c.attenuation_ref}};
}

CameraModel read_camera(const Json& j, CameraModel c, const std::string& w) {
    check_keys(j, {"h_fov", "v_fov", "height", "rate_hz", "noise_sd", "max_range", "attenuation_ref"}, w);
    read(j, "h_fov", c.h_fov, w);
    read(j, "v_fov", c.v_fov, w);
    read(j, "height", c.height, w);
    read(j, "rate_hz", c.rate_hz, w);
    read(j, "noise_sd", c.noise_sd, w);
    read(j, "max_range", c.max_range, w);
    read(j, "attenuation_ref", c.attenuation_ref, w);
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(w + ": " + e.what());
    }
    return c;
}

Json gait_json(const GaitModel& g) {
    return Json{{"gait_freq", g.gait_freq}, {"k_true", g.k_true},   {"noise_sd", g.noise_sd},
                {"rate_hz", g.rate_hz},     {"window", g.window},   {"heading_jitter_deg", g.heading_jitter_deg}};
}

GaitModel read_gait(const Json& j, GaitModel g, const std::string& w) {
    check_keys(j, {"gait_freq", "k_true", "noise_sd", "rate_hz", "window", "heading_jitter_deg"}, w);
    read(j, "gait_freq", g.gait_freq, w);
    read(j, "k_true", g.k_true, w);
    read(j, "noise_sd", g.noise_sd, w);
    read(j, "rate_hz", g.rate_hz, w);
    read(j, "window", g.window, w);
    read(j, "heading_jitter_deg", g.heading_jitter_deg, w);
    if (!(g.k_true > 0.0 && g.rate_hz > 0.0 && g.window > 0.0 && g.gait_freq > 0.0 && g.noise_sd >= 0.0)) {
        throw ConfigError(w + ": gait parameters must be positive");
    }
    return g;
}

Json blob_json(const BlobParams& b) {
    return Json{{"noise_k", b.noise_k}, {"scale_normalized", b.scale_normalized}, {"min_response", b.min_response}};
}

BlobParams read_blob(const Json& j, BlobParams b, const std::string& w) {
    check_keys(j, {"noise_k", "scale_normalized", "min_response"}, w);
    read(j, "noise_k", b.noise_k, w);
    read(j, "scale_normalized", b.scale_normalized, w);
    read(j, "min_response", b.min_response, w);
    return b;
}

Json mission_config_json(const MissionConfig& c) {
    return Json{{"environment", std::string(to_string(c.environment))},
                {"nav", std::string(to_string(c.nav))},
                {"band", Json::array({c.band_lo, c.band_hi})},
                {"phase2_fraction", c.phase2_fraction},
                {"phase3_fraction", c.phase3_fraction},
                {"estimate_fraction", c.estimate_fraction},
                {"outdoor_total", c.outdoor_total},
                {"outdoor_center", c.outdoor_center},
                {"outdoor_phase3_multiplier", c.outdoor_phase3_multiplier},
                {"approach_step", c.approach_step},
                {"aux_step", c.aux_step},
                {"arrival_radius", c.arrival_radius},
                {"approach_time_limit", c.approach_time_limit},
                {"left_max", c.left_max},
                {"accel_max", c.accel_max},
                {"miss_limit", c.miss_limit},
                {"sweep_limit", c.sweep_limit},
                {"sweep_rate", c.sweep_rate},
                {"align_tolerance", c.align_tolerance},
                {"goto_angle", c.goto_angle},
                {"goto_distance", c.goto_distance},
                {"wall_trigger", c.wall_trigger},
                {"wall_hop", c.wall_hop},
                {"strategy", strategy_json(c.strategy)},
                {"blob", blob_json(c.blob)}};
}

MissionConfig read_mission_config(const Json& j, MissionConfig c, const std::string& w) {
    check_keys(j, {"environment", "nav", "band", "phase2_fraction", "phase3_fraction", "estimate_fraction",
                   "outdoor_total", "outdoor_center", "outdoor_phase3_multiplier", "approach_step", "aux_step",
                   "arrival_radius", "approach_time_limit", "left_max", "accel_max", "miss_limit", "sweep_limit",
                   "sweep_rate", "align_tolerance", "goto_angle", "goto_distance", "wall_trigger", "wall_hop",
                   "strategy", "blob"},
               w);
    try {
        if (j.contains("environment")) {
            // Switching environment resets the environment-specific defaults.
            const auto env = environment_from_string(j.at("environment").get<std::string>());
            if (env != c.environment) {
                const MissionConfig base = env == Environment::Outdoor ? MissionConfig::outdoor() : MissionConfig::indoor();
                c.environment = env;
                c.band_lo = base.band_lo;
                c.band_hi = base.band_hi;
                c.nav = base.nav;
            }
        }
        if (j.contains("nav")) c.nav = nav_variant_from_string(j.at("nav").get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(w + ": " + e.what());
    } catch (const Json::exception&) {
        throw ConfigError(w + ": environment/nav must be strings");
    }
    if (j.contains("band")) {
        const Vec2 b = read_vec(j.at("band"), w + ".band");
        c.band_lo = b.x;
        c.band_hi = b.y;
    }
    read(j, "phase2_fraction", c.phase2_fraction, w);
    read(j, "phase3_fraction", c.phase3_fraction, w);
    read(j, "estimate_fraction", c.estimate_fraction, w);
    read(j, "outdoor_total", c.outdoor_total, w);
    read(j, "outdoor_center", c.outdoor_center, w);
    read(j, "outdoor_phase3_multiplier", c.outdoor_phase3_multiplier, w);
    read(j, "approach_step", c.approach_step, w);
    read(j, "aux_step", c.aux_step, w);
    read(j, "arrival_radius", c.arrival_radius, w);
    read(j, "approach_time_limit", c.approach_time_limit, w);
    read(j, "left_max", c.left_max, w);
    read(j, "accel_max", c.accel_max, w);
    read(j, "miss_limit", c.miss_limit, w);
    read(j, "sweep_limit", c.sweep_limit, w);
    read(j, "sweep_rate", c.sweep_rate, w);
    read(j, "align_tolerance", c.align_tolerance, w);
    read(j, "goto_angle", c.goto_angle, w);
    read(j, "goto_distance", c.goto_distance, w);
    read(j, "wall_trigger", c.wall_trigger, w);
    read(j, "wall_hop", c.wall_hop, w);
    if (j.contains("strategy")) c.strategy = read_strategy(j.at("strategy"), c.strategy, w + ".strategy");
    if (j.contains("blob")) c.blob = read_blob(j.at("blob"), c.blob, w + ".blob");
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(w + ": " + e.what());
    }
    return c;
}

Json source_json(const ThermalSource& s) {
    Json j{{"kind", std::string(to_string(s.kind))},
           {"center", vec_json(s.center)},
           {"radius", s.radius},
           {"height", s.height},
           {"temp", s.surface_temp}};
    if (s.active_from) j["active_from"] = *s.active_from;
    if (s.active_to) j["active_to"] = *s.active_to;
    return j;
}

ThermalSource read_source(const Json& j, const std::string& w) {
    check_keys(j, {"kind", "center", "radius", "height", "temp", "active_from", "active_to"}, w);
    ThermalSource s;
    if (j.contains("kind")) {
        try {
            s.kind = source_kind_from_string(j.at("kind").get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(w + ": " + e.what());
        }
    }
    if (s.kind == SourceKind::Oven) s = make_oven({});
    read_vec(j, "center", s.center, w);
    read(j, "radius", s.radius, w);
    read(j, "height", s.height, w);
    read(j, "temp", s.surface_temp, w);
    if (j.contains("active_from")) s.active_from = j.at("active_from").get<double>();
    if (j.contains("active_to")) s.active_to = j.at("active_to").get<double>();
    return s;
}

Json world_json(const World& w) {
    Json src = Json::array();
    for (const auto& s : w.sources) src.push_back(source_json(s));
    return Json{{"arena", arena_json(w.arena)}, {"ambient", w.ambient}, {"sources", src}};
}

World read_world(const Json& j, World wd, const std::string& w) {
    check_keys(j, {"arena", "ambient", "sources"}, w);
    if (j.contains("arena")) wd.arena = read_arena(j.at("arena"), wd.arena, w + ".arena");
    read(j, "ambient", wd.ambient, w);
    if (j.contains("sources")) {
        if (!j.at("sources").is_array()) throw ConfigError(w + ".sources: expected an array");
        wd.sources.clear();
        for (std::size_t i = 0; i < j.at("sources").size(); ++i) {
            wd.sources.push_back(read_source(j.at("sources")[i], fmt::format("{}.sources[{}]", w, i)));
        }
    }
    try {
        wd.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(w + ": " + e.what());
    }
    return wd;
}

Json exploration_json(const ExplorationConfig& c) {
    return Json{{"arena", arena_json(c.arena)},
                {"start", pose_json(c.start)},
                {"target", vec_json(c.target)},
                {"detection_radius", c.detection_radius},
                {"duration", c.duration},
                {"dt", c.dt},
                {"checkpoint", c.checkpoint},
                {"coverage_cell", c.coverage_cell},
                {"strategies", c.strategies},
                {"strategy", strategy_json(c.strategy)},
                {"motion", motion_json(c.motion)},
                {"mission", mission_config_json(c.mission)}};
}

ExplorationConfig read_exploration(const Json& j, ExplorationConfig c) {
    const std::string w = "exploration";
    check_keys(j, {"arena", "start", "target", "detection_radius", "duration", "dt", "checkpoint", "coverage_cell",
                   "strategies", "strategy", "motion", "mission"},
               w);
    if (j.contains("arena")) c.arena = read_arena(j.at("arena"), c.arena, w + ".arena");
    if (j.contains("start")) c.start = read_pose(j.at("start"), c.start, w + ".start");
    read_vec(j, "target", c.target, w);
    read(j, "detection_radius", c.detection_radius, w);
    read(j, "duration", c.duration, w);
    read(j, "dt", c.dt, w);
    read(j, "checkpoint", c.checkpoint, w);
    read(j, "coverage_cell", c.coverage_cell, w);
    read(j, "strategies", c.strategies, w);
    if (j.contains("strategy")) c.strategy = read_strategy(j.at("strategy"), c.strategy, w + ".strategy");
    if (j.contains("motion")) c.motion = read_motion(j.at("motion"), c.motion, w + ".motion");
    if (j.contains("mission")) c.mission = read_mission_config(j.at("mission"), c.mission, w + ".mission");
    if (!(c.dt > 0.0 && c.duration > 0.0 && c.checkpoint > 0.0 && c.coverage_cell > 0.0)) {
        throw ConfigError(w + ": dt, duration, checkpoint and coverage_cell must be positive");
    }
    if (!c.arena.contains(c.start.position())) throw ConfigError(w + ".start: outside the arena");
    return c;
}

Json thermal_json(const ThermalNavConfig& c) {
    return Json{{"arena", arena_json(c.arena)},
                {"start", vec_json(c.start)},
                {"source", vec_json(c.source)},
                {"source_temp", c.source_temp},
                {"ambient", c.ambient},
                {"time_limit", c.time_limit},
                {"success_radius", c.success_radius},
                {"variant", std::string(to_string(c.variant))},
                {"dt", c.dt},
                {"mission", mission_config_json(c.mission)},
                {"camera", camera_json(c.camera)},
                {"motion", motion_json(c.motion)},
                {"gait", gait_json(c.gait)}};
}

ThermalNavConfig read_thermal(const Json& j, ThermalNavConfig c) {
    const std::string w = "thermal_nav";
    check_keys(j, {"arena", "start", "source", "source_temp", "ambient", "time_limit", "success_radius", "variant",
                   "dt", "mission", "camera", "motion", "gait"},
               w);
    if (j.contains("arena")) c.arena = read_arena(j.at("arena"), c.arena, w + ".arena");
    read_vec(j, "start", c.start, w);
    read_vec(j, "source", c.source, w);
    read(j, "source_temp", c.source_temp, w);
    read(j, "ambient", c.ambient, w);
    read(j, "time_limit", c.time_limit, w);
    read(j, "success_radius", c.success_radius, w);
    if (j.contains("variant")) {
        try {
            c.variant = nav_variant_from_string(j.at("variant").get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(w + ".variant: " + e.what());
        }
    }
    read(j, "dt", c.dt, w);
    if (j.contains("mission")) c.mission = read_mission_config(j.at("mission"), c.mission, w + ".mission");
    if (j.contains("camera")) c.camera = read_camera(j.at("camera"), c.camera, w + ".camera");
    if (j.contains("motion")) c.motion = read_motion(j.at("motion"), c.motion, w + ".motion");
    if (j.contains("gait")) c.gait = read_gait(j.at("gait"), c.gait, w + ".gait");
    if (!c.arena.contains(c.start) || !c.arena.contains(c.source)) {
        throw ConfigError(w + ": start and source must lie inside the arena");
    }
    if (!(c.time_limit > 0.0 && c.dt > 0.0 && c.success_radius > 0.0)) {
        throw ConfigError(w + ": time_limit, dt and success_radius must be positive");
    }
    return c;
}

std::string mode_name(TrackMode m) { return m == TrackMode::Planar ? "planar" : "spatial"; }

std::string calibration_name(CalibrationMode m) {
    return m == CalibrationMode::Literal ? "literal" : "corrective";
}

Json imu_json(const ImuStudyConfig& c) {
    const auto& wk = c.walk;
    return Json{{"walk",
                 {{"duration", wk.duration},
                  {"rate_hz", wk.rate_hz},
                  {"speed", Json::array({wk.speed_lo, wk.speed_hi})},
                  {"segment_mean", wk.segment_mean},
                  {"turn_sd_deg", wk.turn_sd_deg},
                  {"slope_deg", wk.slope_deg},
                  {"p_pause", wk.p_pause},
                  {"start", vec_json(wk.start)},
                  {"start_yaw", wk.start_yaw}}},
                {"gait", gait_json(c.gait)},
                {"mode", mode_name(c.mode)},
                {"k_seed", c.k_seed},
                {"calibration", calibration_name(c.calibration)},
                {"calibration_duration", c.calibration_duration}};
}

ImuStudyConfig read_imu(const Json& j, ImuStudyConfig c) {
    const std::string w = "imu";
    check_keys(j, {"walk", "gait", "mode", "k_seed", "calibration", "calibration_duration"}, w);
    if (j.contains("walk")) {
        const auto& wj = j.at("walk");
        const std::string ww = w + ".walk";
        check_keys(wj, {"duration", "rate_hz", "speed", "segment_mean", "turn_sd_deg", "slope_deg", "p_pause", "start",
                        "start_yaw"},
                   ww);
        auto& wk = c.walk;
        read(wj, "duration", wk.duration, ww);
        read(wj, "rate_hz", wk.rate_hz, ww);
        if (wj.contains("speed")) {
            const Vec2 s = read_vec(wj.at("speed"), ww + ".speed");
            wk.speed_lo = s.x;
            wk.speed_hi = s.y;
        }
        read(wj, "segment_mean", wk.segment_mean, ww);
        read(wj, "turn_sd_deg", wk.turn_sd_deg, ww);
        read(wj, "slope_deg", wk.slope_deg, ww);
        read(wj, "p_pause", wk.p_pause, ww);
        read_vec(wj, "start", wk.start, ww);
        read(wj, "start_yaw", wk.start_yaw, ww);
        if (!(wk.duration > 0.0 && wk.rate_hz > 0.0 && wk.segment_mean > 0.0 && wk.speed_lo >= 0.0 &&
              wk.speed_lo <= wk.speed_hi)) {
            throw ConfigError(ww + ": bad walk parameters");
        }
    }
    if (j.contains("gait")) c.gait = read_gait(j.at("gait"), c.gait, w + ".gait");
    if (j.contains("mode")) {
        const auto m = j.at("mode").get<std::string>();
        if (m == "planar") c.mode = TrackMode::Planar;
        else if (m == "spatial") c.mode = TrackMode::Spatial;
        else throw ConfigError(w + ".mode: expected planar or spatial");
    }
    read(j, "k_seed", c.k_seed, w);
    if (j.contains("calibration")) {
        const auto m = j.at("calibration").get<std::string>();
        if (m == "literal") c.calibration = CalibrationMode::Literal;
        else if (m == "corrective") c.calibration = CalibrationMode::Corrective;
        else throw ConfigError(w + ".calibration: expected literal or corrective");
    }
    read(j, "calibration_duration", c.calibration_duration, w);
    if (!(c.k_seed > 0.0)) throw ConfigError(w + ".k_seed must be positive");
    return c;
}

Json scenario_json(const MissionScenario& s) {
    return Json{{"world", world_json(s.world)},
                {"start", pose_json(s.start)},
                {"config", mission_config_json(s.config)},
                {"camera", camera_json(s.camera)},
                {"motion", motion_json(s.motion)},
                {"gait", gait_json(s.gait)},
                {"dt", s.dt},
                {"time_budget", s.time_budget},
                {"imu_localization", s.imu_localization}};
}

MissionScenario read_scenario(const Json& j, MissionScenario s) {
    const std::string w = "mission";
    check_keys(j, {"preset", "world", "start", "config", "camera", "motion", "gait", "dt", "time_budget",
                   "imu_localization"},
               w);
    if (j.contains("preset")) {
        const auto p = j.at("preset").get<std::string>();
        if (p == "indoor") s = indoor_mission_scenario();
        else if (p == "outdoor") s = outdoor_mission_scenario();
        else throw ConfigError(w + ".preset: expected indoor or outdoor");
    }
    if (j.contains("world")) s.world = read_world(j.at("world"), s.world, w + ".world");
    if (j.contains("start")) s.start = read_pose(j.at("start"), s.start, w + ".start");
    if (j.contains("config")) s.config = read_mission_config(j.at("config"), s.config, w + ".config");
    if (j.contains("camera")) s.camera = read_camera(j.at("camera"), s.camera, w + ".camera");
    if (j.contains("motion")) s.motion = read_motion(j.at("motion"), s.motion, w + ".motion");
    if (j.contains("gait")) s.gait = read_gait(j.at("gait"), s.gait, w + ".gait");
    read(j, "dt", s.dt, w);
    read(j, "time_budget", s.time_budget, w);
    read(j, "imu_localization", s.imu_localization, w);
    if (!(s.dt > 0.0 && s.time_budget >= 0.0)) throw ConfigError(w + ": dt and time_budget must be positive");
    if (!s.world.arena.contains(s.start.position())) throw ConfigError(w + ".start: outside the arena");
    return s;
}

Json error_points_json(const std::vector<ErrorPoint>& pts) {
    Json a = Json::array();
    for (const auto& e : pts) a.push_back(Json::array({e.t, e.traveled, e.error, e.error_pct}));
    return a;
}

Json path_json(const std::vector<Vec2>& pts) {
    Json a = Json::array();
    for (const auto& p : pts) a.push_back(vec_json(p));
    return a;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json exploration_trial_json(const ExplorationTrial& t) {
    return Json{{"strategy", t.strategy},
                {"seed", t.seed},
                {"coverage", t.coverage},
                {"search_time", optional_json(t.search_time)},
                {"path_length", t.path_length}};
}

Json thermal_trial_json(const ThermalNavTrial& t) {
    return Json{{"seed", t.seed},
                {"start_yaw", t.start_yaw},
                {"success", t.success},
                {"time", t.time},
                {"path_length", t.path_length},
                {"mean_speed", t.mean_speed},
                {"arrival_distances", t.arrival_distances},
                {"estimates", path_json(t.estimates)},
                {"overshoot", t.overshoot},
                {"phase3_after_arrivals", t.phase3_after_arrivals ? Json(*t.phase3_after_arrivals) : Json(nullptr)},
                {"arrival_points", path_json(t.arrival_points)},
                {"trajectory", path_json(t.trajectory)}};
}

Json imu_trial_json(const ImuTrial& t) {
    return Json{{"seed", t.seed},
                {"k", t.k},
                {"traveled", t.traveled},
                {"final_error", t.final_error},
                {"final_error_pct", t.final_error_pct},
                {"errors", error_points_json(t.errors)}};
}

Json frame_json(const IrImage& img) {
    Json rows = Json::array();
    for (int v = 1; v <= kIrSide; ++v) {
        Json row = Json::array();
        for (int u = 1; u <= kIrSide; ++u) row.push_back(std::round(img.at(u, v) * 1000.0) / 1000.0);
        rows.push_back(row);
    }
    return rows;
}

Json report_json(const MissionReport& r) {
    Json timeline = Json::array();
    for (const auto& tr : r.timeline) {
        timeline.push_back(Json{{"t", tr.t},
                                {"from", std::string(to_string(tr.from))},
                                {"to", std::string(to_string(tr.to))},
                                {"reason", tr.reason}});
    }
    Json events = Json::array();
    for (std::size_t i = 0; i < r.events.size(); ++i) {
        const auto& e = r.events[i];
        Json ej{{"t", e.t}, {"type", std::string(to_string(e.type))}, {"at", vec_json(e.at)}, {"target", vec_json(e.target)}};
        if (!e.detail.empty()) ej["detail"] = e.detail;
        if (i < r.event_true_positions.size()) ej["true_position"] = vec_json(r.event_true_positions[i]);
        events.push_back(ej);
    }
    Json frames = Json::array();
    for (const auto& f : r.frames) {
        frames.push_back(Json{{"t", f.t}, {"to", std::string(to_string(f.to))}, {"pixels", frame_json(f.frame)}});
    }
    Json traj = Json::array();
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
        const auto& p = r.trajectory[i];
        traj.push_back(Json::array({r.trajectory_t[i], p.x, p.y, p.yaw}));
    }
    return Json{{"seed", r.seed},
                {"outcome", std::string(to_string(r.outcome))},
                {"end_time", r.end_time},
                {"path_length", r.path_length},
                {"give_ups", r.give_ups},
                {"classified_kind", r.classified_kind ? Json(std::string(to_string(*r.classified_kind))) : Json(nullptr)},
                {"time_in_phase",
                 {{"explore", r.time_in_phase[0]}, {"approach", r.time_in_phase[1]}, {"classify", r.time_in_phase[2]}}},
                {"final_imu_error", r.final_imu_error},
                {"timeline", timeline},
                {"events", events},
                {"trajectory", traj},
                {"frames", frames}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

StudyConfig parse_study_config(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, {"exploration", "thermal_nav", "imu", "mission"}, "config");
    StudyConfig c;
    try {
        if (j.contains("exploration")) c.exploration = read_exploration(j.at("exploration"), c.exploration);
        if (j.contains("thermal_nav")) c.thermal_nav = read_thermal(j.at("thermal_nav"), c.thermal_nav);
        if (j.contains("imu")) c.imu = read_imu(j.at("imu"), c.imu);
        if (j.contains("mission")) c.mission = read_scenario(j.at("mission"), c.mission);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_study_config(ss.str());
}

std::string study_config_json(const StudyConfig& c) {
    return dump(Json{{"exploration", exploration_json(c.exploration)},
                     {"thermal_nav", thermal_json(c.thermal_nav)},
                     {"imu", imu_json(c.imu)},
                     {"mission", scenario_json(c.mission)}});
}

std::string to_json(const ExplorationTrial& t) { return dump(exploration_trial_json(t)); }
std::string to_json(const ThermalNavTrial& t) { return dump(thermal_trial_json(t)); }
std::string to_json(const ImuTrial& t) { return dump(imu_trial_json(t)); }
std::string to_json(const MissionReport& r) { return dump(report_json(r)); }

std::string to_json(const ExplorationSummary& s) {
    Json trials = Json::array();
    for (const auto& t : s.trials) trials.push_back(exploration_trial_json(t));
    Json aggs = Json::array();
    for (const auto& a : s.aggregates) {
        aggs.push_back(Json{{"strategy", a.strategy},
                            {"trials", a.trials},
                            {"found", a.found},
                            {"coverage_mean", a.coverage_mean},
                            {"coverage_sd", a.coverage_sd},
                            {"search_time_mean", a.search_time_mean},
                            {"search_time_sd", a.search_time_sd},
                            {"search_time_mean_min", a.search_time_mean / 60.0}});
    }
    return dump(Json{{"study", "exploration"},
                     {"base_seed", s.base_seed},
                     {"config", exploration_json(s.config)},
                     {"aggregates", aggs},
                     {"reference", {{"levy_search_time_min", 221.0}, {"fixed_final_coverage", 0.61}}},
                     {"trials", trials}});
}

std::string to_json(const ThermalNavSummary& s) {
    Json trials = Json::array();
    for (const auto& t : s.trials) trials.push_back(thermal_trial_json(t));
    return dump(Json{{"study", "thermal_nav"},
                     {"base_seed", s.base_seed},
                     {"config", thermal_json(s.config)},
                     {"success_rate", s.success_rate},
                     {"mean_time", s.mean_time},
                     {"mean_speed", s.mean_speed},
                     {"mean_arrival_distance", s.mean_arrival_distance},
                     {"arrival_counts", s.arrival_counts},
                     {"overshoot_or_phase3_fraction", s.overshoot_or_phase3_fraction},
                     {"reference",
                      {{"success_rate_tracking", 28.0 / 30.0},
                       {"success_rate_onboard", 1.0},
                       {"mean_speed_tracking", 0.037},
                       {"mean_speed_onboard", 0.050}}},
                     {"trials", trials}});
}

std::string to_json(const ImuStudySummary& s) {
    Json trials = Json::array();
    for (const auto& t : s.trials) trials.push_back(imu_trial_json(t));
    return dump(Json{{"study", "imu"},
                     {"base_seed", s.base_seed},
                     {"config", imu_json(s.config)},
                     {"mean_error_pct", s.mean_error_pct},
                     {"max_error_pct", s.max_error_pct},
                     {"max_error", s.max_error},
                     {"trials", trials}});
}

std::string to_json(const MissionStudySummary& s) {
    Json runs = Json::array();
    for (const auto& r : s.reports) {
        runs.push_back(Json{{"seed", r.seed},
                            {"outcome", std::string(to_string(r.outcome))},
                            {"end_time", r.end_time},
                            {"give_ups", r.give_ups},
                            {"classified_kind",
                             r.classified_kind ? Json(std::string(to_string(*r.classified_kind))) : Json(nullptr)}});
    }
    return dump(Json{{"study", "mission"},
                     {"base_seed", s.base_seed},
                     {"scenario", scenario_json(s.scenario)},
                     {"human", s.human},
                     {"not_human", s.not_human},
                     {"not_found", s.not_found},
                     {"false_human", s.false_human},
                     {"give_ups", s.give_ups},
                     {"runs_with_give_up", s.runs_with_give_up},
                     {"runs", runs}});
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

template <class Summary, class TrialFn>
std::vector<std::filesystem::path> write_common(const std::filesystem::path& dir, const StudyConfig& cfg,
                                                const Summary& s, std::size_t n, TrialFn&& trial_json) {
    std::vector<std::filesystem::path> files;
    auto put = [&](const std::filesystem::path& p, const std::string& text) {
        write_text(p, text);
        files.push_back(p);
    };
    put(dir / "config.json", study_config_json(cfg));
    for (std::size_t i = 0; i < n; ++i) put(dir / "trials" / fmt::format("{:04d}.json", i), trial_json(i));
    put(dir / "summary.json", to_json(s));
    for (auto& p : emit_plots(s, dir)) files.push_back(p);
    return files;
}

}  // namespace

std::vector<std::filesystem::path> write_study(const std::filesystem::path& dir, const StudyConfig& cfg,
                                               const ExplorationSummary& s) {
    return write_common(dir, cfg, s, s.trials.size(), [&](std::size_t i) { return to_json(s.trials[i]); });
}

std::vector<std::filesystem::path> write_study(const std::filesystem::path& dir, const StudyConfig& cfg,
                                               const ThermalNavSummary& s) {
    return write_common(dir, cfg, s, s.trials.size(), [&](std::size_t i) { return to_json(s.trials[i]); });
}

std::vector<std::filesystem::path> write_study(const std::filesystem::path& dir, const StudyConfig& cfg,
                                               const ImuStudySummary& s) {
    return write_common(dir, cfg, s, s.trials.size(), [&](std::size_t i) { return to_json(s.trials[i]); });
}

std::vector<std::filesystem::path> write_study(const std::filesystem::path& dir, const StudyConfig& cfg,
                                               const MissionStudySummary& s) {
    auto files = write_common(dir, cfg, s, s.reports.size(), [&](std::size_t i) { return to_json(s.reports[i]); });
    for (std::size_t i = 0; i < s.reports.size(); ++i) {
        std::string csv = "t,x,y,yaw\n";
        const auto& r = s.reports[i];
        for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
            csv += fmt::format("{:.1f},{:.6f},{:.6f},{:.4f}\n", r.trajectory_t[k], r.trajectory[k].x,
                               r.trajectory[k].y, r.trajectory[k].yaw);
        }
        const auto p = dir / "trials" / fmt::format("{:04d}_trajectory.csv", i);
        write_text(p, csv);
        files.push_back(p);
    }
    return files;
}

}  // namespace cyborg

namespace cyborg {

namespace {

Json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open " + p.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(p.string() + ": " + e.what());
    }
}

std::vector<Vec2> read_path(const Json& j) {
    std::vector<Vec2> out;
    for (const auto& p : j) out.push_back(read_vec(p, "path"));
    return out;
}

std::vector<Json> read_trials(const std::filesystem::path& dir) {
    std::vector<Json> out;
    for (std::size_t i = 0;; ++i) {
        const auto p = dir / "trials" / fmt::format("{:04d}.json", i);
        if (!std::filesystem::exists(p)) break;
        out.push_back(read_json_file(p));
    }
    return out;
}

}  // namespace

std::vector<std::filesystem::path> replot_study(const std::filesystem::path& dir) {
    const Json summary = read_json_file(dir / "summary.json");
    if (!summary.contains("study")) throw ConfigError("summary.json: missing 'study'");
    const auto study = summary.at("study").get<std::string>();
    const auto trials = read_trials(dir);
    const auto seed = summary.value("base_seed", std::uint64_t{0});
    try {
        if (study == "exploration") {
            ExplorationSummary s;
            s.config = read_exploration(summary.at("config"), s.config);
            s.base_seed = seed;
            for (const auto& j : trials) {
                ExplorationTrial t;
                t.strategy = j.at("strategy").get<std::string>();
                t.seed = j.at("seed").get<std::uint64_t>();
                t.coverage = j.at("coverage").get<std::vector<double>>();
                if (!j.at("search_time").is_null()) t.search_time = j.at("search_time").get<double>();
                t.path_length = j.at("path_length").get<double>();
                s.trials.push_back(std::move(t));
            }
            s.aggregates = aggregate_exploration(s.config, s.trials);
            return emit_plots(s, dir);
        }
        if (study == "thermal_nav") {
            ThermalNavSummary s;
            s.config = read_thermal(summary.at("config"), s.config);
            s.base_seed = seed;
            for (const auto& j : trials) {
                ThermalNavTrial t;
                t.seed = j.at("seed").get<std::uint64_t>();
                t.start_yaw = j.at("start_yaw").get<double>();
                t.success = j.at("success").get<bool>();
                t.time = j.at("time").get<double>();
                t.path_length = j.at("path_length").get<double>();
                t.mean_speed = j.at("mean_speed").get<double>();
                t.arrival_distances = j.at("arrival_distances").get<std::vector<double>>();
                t.estimates = read_path(j.at("estimates"));
                t.overshoot = j.at("overshoot").get<bool>();
                if (!j.at("phase3_after_arrivals").is_null()) t.phase3_after_arrivals = j.at("phase3_after_arrivals").get<int>();
                t.arrival_points = read_path(j.at("arrival_points"));
                t.trajectory = read_path(j.at("trajectory"));
                s.trials.push_back(std::move(t));
            }
            aggregate_thermal_nav(s);
            return emit_plots(s, dir);
        }
        if (study == "imu") {
            ImuStudySummary s;
            s.config = read_imu(summary.at("config"), s.config);
            s.base_seed = seed;
            for (const auto& j : trials) {
                ImuTrial t;
                t.seed = j.at("seed").get<std::uint64_t>();
                t.k = j.at("k").get<double>();
                t.traveled = j.at("traveled").get<double>();
                t.final_error = j.at("final_error").get<double>();
                t.final_error_pct = j.at("final_error_pct").get<double>();
                for (const auto& e : j.at("errors")) {
                    t.errors.push_back({e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>(),
                                        e.at(3).get<double>()});
                }
                s.trials.push_back(std::move(t));
            }
            aggregate_imu(s);
            return emit_plots(s, dir);
        }
        if (study == "mission") {
            MissionStudySummary s;
            s.scenario = read_scenario(summary.at("scenario"), s.scenario);
            s.base_seed = seed;
            for (const auto& j : trials) {
                MissionReport r;
                r.seed = j.at("seed").get<std::uint64_t>();
                for (const auto& p : j.at("trajectory")) {
                    r.trajectory_t.push_back(p.at(0).get<double>());
                    r.trajectory.push_back(Pose{p.at(1).get<double>(), p.at(2).get<double>(), 0.0, p.at(3).get<double>()});
                }
                s.reports.push_back(std::move(r));
            }
            return emit_plots(s, dir);
        }
    } catch (const Json::exception& e) {
        throw ConfigError(dir.string() + ": malformed study record: " + e.what());
    }
    throw ConfigError("summary.json: unknown study '" + study + "'");
}

}  // namespace cyborg
