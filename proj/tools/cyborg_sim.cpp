#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cyborg/blob.hpp"
#include "cyborg/harness.hpp"
#include "cyborg/ir_camera.hpp"
#include "cyborg/plots.hpp"

using namespace cyborg;
using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    std::uint64_t seed = 1;
    std::optional<int> trials;
    std::string out;
};

StudyConfig load(const Globals& g) {
    return g.config.empty() ? StudyConfig{} : load_study_config(g.config);
}

int trials_or(const Globals& g, int dflt) {
    const int n = g.trials.value_or(dflt);
    if (n < 1) throw ConfigError("--trials must be at least 1");
    return n;
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

Json files_json(const std::vector<fs::path>& files) {
    Json a = Json::array();
    for (const auto& f : files) a.push_back(f.string());
    return a;
}

int run_explore(const Globals& g, const std::vector<std::string>& strategies) {
    StudyConfig cfg = load(g);
    if (!strategies.empty()) cfg.exploration.strategies = strategies;
    const auto s = run_exploration_study(cfg.exploration, trials_or(g, 20), g.seed);
    check_aggregates(s);
    Json aggs = Json::array();
    for (const auto& a : s.aggregates) {
        aggs.push_back(Json{{"strategy", a.strategy},
                            {"final_coverage", a.coverage_mean.back()},
                            {"final_coverage_sd", a.coverage_sd.back()},
                            {"search_time_min", a.search_time_mean / 60.0},
                            {"found", a.found},
                            {"trials", a.trials}});
    }
    Json j{{"study", "exploration"}, {"base_seed", g.seed}, {"aggregates", aggs}};
    if (!g.out.empty()) j["files"] = files_json(write_study(g.out, cfg, s));
    emit(j);
    return 0;
}

int run_thermal(const Globals& g, const std::string& variant) {
    StudyConfig cfg = load(g);
    if (!variant.empty()) {
        try {
            cfg.thermal_nav.variant = nav_variant_from_string(variant);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    const auto s = run_thermal_nav_study(cfg.thermal_nav, trials_or(g, 30), g.seed);
    check_aggregates(s);
    Json j{{"study", "thermal_nav"},
           {"variant", std::string(to_string(s.config.variant))},
           {"base_seed", g.seed},
           {"success_rate", s.success_rate},
           {"mean_time", s.mean_time},
           {"mean_speed", s.mean_speed},
           {"mean_arrival_distance", s.mean_arrival_distance},
           {"overshoot_or_phase3_fraction", s.overshoot_or_phase3_fraction}};
    if (!g.out.empty()) j["files"] = files_json(write_study(g.out, cfg, s));
    emit(j);
    return 0;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    return in;
}

TrackMode parse_mode(const std::string& m) {
    if (m == "planar") return TrackMode::Planar;
    if (m == "spatial") return TrackMode::Spatial;
    throw ConfigError("--mode must be planar or spatial");
}

int run_imu(const Globals& g, const std::string& input, const std::string& reference, double k,
            const std::string& mode, const std::string& positions) {
    if (input.empty()) {
        StudyConfig cfg = load(g);
        if (!mode.empty()) cfg.imu.mode = parse_mode(mode);
        const auto s = run_imu_study(cfg.imu, trials_or(g, 20), g.seed);
        check_aggregates(s);
        Json j{{"study", "imu"},
               {"base_seed", g.seed},
               {"mean_error_pct", s.mean_error_pct},
               {"max_error_pct", s.max_error_pct},
               {"max_error", s.max_error}};
        if (!g.out.empty()) j["files"] = files_json(write_study(g.out, cfg, s));
        emit(j);
        return 0;
    }
    auto in = open_in(input);
    const auto samples = read_imu_csv(in);
    std::vector<TrackPoint> ref;
    if (!reference.empty()) {
        auto rin = open_in(reference);
        ref = read_track_csv(rin);
    }
    const auto rep = run_imu_replay(samples, ref, k, parse_mode(mode.empty() ? "planar" : mode));
    Json errors = Json::array();
    for (const auto& e : rep.errors) errors.push_back(Json::array({e.t, e.traveled, e.error, e.error_pct}));
    Json j{{"samples", samples.size()},
           {"k", k},
           {"traveled", rep.traveled.empty() ? 0.0 : rep.traveled.back()},
           {"reference_length", rep.reference_length},
           {"final_error", rep.final_error},
           {"final_error_pct", rep.final_error_pct},
           {"orientation_warnings", rep.orientation_warnings},
           {"errors", errors}};
    std::string pos_path = positions;
    if (pos_path.empty() && !g.out.empty()) pos_path = (fs::path(g.out) / "positions.csv").string();
    if (!pos_path.empty()) {
        std::ostringstream os;
        write_positions_csv(os, rep.positions, rep.traveled);
        write_text(pos_path, os.str());
        j["positions"] = pos_path;
    }
    emit(j);
    return 0;
}

int run_missions(const Globals& g, const std::string& scenario) {
    StudyConfig cfg = load(g);
    if (scenario == "indoor") cfg.mission = indoor_mission_scenario();
    else if (scenario == "outdoor") cfg.mission = outdoor_mission_scenario();
    else if (!scenario.empty()) throw ConfigError("--scenario must be indoor or outdoor");
    const auto s = run_mission_study(cfg.mission, trials_or(g, 1), g.seed);
    check_aggregates(s);
    Json runs = Json::array();
    for (const auto& r : s.reports) {
        runs.push_back(Json{{"seed", r.seed},
                            {"outcome", std::string(to_string(r.outcome))},
                            {"end_time", r.end_time},
                            {"give_ups", r.give_ups}});
    }
    Json j{{"study", "mission"},
           {"base_seed", g.seed},
           {"human", s.human},
           {"not_human", s.not_human},
           {"not_found", s.not_found},
           {"false_human", s.false_human},
           {"give_ups", s.give_ups},
           {"runs", runs}};
    if (!g.out.empty()) j["files"] = files_json(write_study(g.out, cfg, s));
    emit(j);
    return 0;
}

int run_render(const Globals& g, double x, double y, double yaw, double t, const std::string& format,
               double lo, double hi, bool clean) {
    const StudyConfig cfg = load(g);
    const World& world = cfg.mission.world;
    const Pose pose{x, y, 0.0, yaw};
    if (!world.arena.contains(pose.position())) throw ConfigError("pose outside the arena");
    Rng rng(g.seed);
    const IrImage img = clean ? render_ir_clean(world, pose, cfg.mission.camera, t)
                              : render_ir(world, pose, cfg.mission.camera, rng, t);
    std::ostringstream os;
    if (format == "csv") write_ir_csv(os, img);
    else if (format == "pgm") write_ir_pgm(os, img, lo, hi);
    else throw ConfigError("--format must be csv or pgm");
    if (g.out.empty()) {
        std::cout << os.str();
    } else {
        write_text(g.out, os.str());
    }
    return 0;
}

int run_blob(const std::string& frame) {
    const IrImage img = load_ir_frame(frame);
    const auto b = detect_blob(img);
    if (!b) {
        std::cout << "none\n";
        return 0;
    }
    std::cout << fmt::format("u={} v={} scale={} response={:.6g} alpha={:.4f}\n", b->u, b->v, b->scale, b->response,
                             column_to_estimate_angle(b->u));
    return 0;
}

int run_plot(const std::string& dir) {
    emit(Json{{"files", files_json(replot_study(dir))}});
    return 0;
}

void print_error(const std::string& type, const std::string& message, int code) {
    std::cerr << Json{{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cyborg insect exploration simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Study configuration JSON");
    app.add_option("--seed", g.seed, "Base seed");
    app.add_option("--trials", g.trials, "Number of trials");
    app.add_option("--out", g.out, "Output directory (or file for render-ir)");

    std::vector<std::string> strategies;
    auto* explore = app.add_subcommand("explore", "Phase I strategy comparison");
    explore->add_option("--strategy", strategies, "Restrict to these strategies");

    std::string variant;
    auto* thermal = app.add_subcommand("thermal-nav", "Thermal navigation toward an oven");
    thermal->add_option("--variant", variant, "tracking or onboard");

    std::string imu_input, imu_ref, imu_mode, imu_positions;
    double imu_k = 3.5;
    auto* imu = app.add_subcommand("imu-replay", "Dead-reckon an IMU CSV, or run the synthetic study");
    imu->add_option("--input", imu_input, "IMU CSV: t,ax,ay,az,qw,qx,qy,qz");
    imu->add_option("--reference", imu_ref, "Reference CSV: t,x,y,z");
    imu->add_option("--k", imu_k, "Speed gain");
    imu->add_option("--mode", imu_mode, "planar or spatial");
    imu->add_option("--positions", imu_positions, "Positions CSV output");

    std::string scenario;
    auto* mission = app.add_subcommand("mission", "Full three-phase mission");
    mission->add_option("--scenario", scenario, "indoor or outdoor");

    double rx = 2.4, ry = 1.3, ryaw = 90.0, rt = 0.0, lo = 20.0, hi = 40.0;
    std::string format = "csv";
    bool clean = false;
    auto* render = app.add_subcommand("render-ir", "Render one IR frame of the mission world");
    render->add_option("--x", rx);
    render->add_option("--y", ry);
    render->add_option("--yaw", ryaw);
    render->add_option("--t", rt, "Simulation time, s");
    render->add_option("--format", format, "csv or pgm");
    render->add_option("--lo", lo, "PGM black level, C");
    render->add_option("--hi", hi, "PGM white level, C");
    render->add_flag("--clean", clean, "No sensor noise");

    std::string frame;
    auto* blob = app.add_subcommand("blob-detect", "Detect the hottest blob in a CSV or PGM frame");
    blob->add_option("frame", frame)->required();

    std::string plot_dir;
    auto* plot = app.add_subcommand("plot", "Re-render SVG panels of a study directory");
    plot->add_option("dir", plot_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what(), 2);
        return 2;
    }

    try {
        if (*explore) return run_explore(g, strategies);
        if (*thermal) return run_thermal(g, variant);
        if (*imu) return run_imu(g, imu_input, imu_ref, imu_k, imu_mode, imu_positions);
        if (*mission) return run_missions(g, scenario);
        if (*render) return run_render(g, rx, ry, ryaw, rt, format, lo, hi, clean);
        if (*blob) return run_blob(frame);
        if (*plot) return run_plot(plot_dir);
    } catch (const ConfigError& e) {
        print_error("config", e.what(), 2);
        return 2;
    } catch (const CsvError& e) {
        print_error("parse", e.what(), 3);
        return 3;
    } catch (const std::exception& e) {
        print_error("runtime", e.what(), 1);
        return 1;
    }
    return 0;
}
