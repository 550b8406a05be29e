#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "blob_oracle.hpp"
#include "cyborg/blob.hpp"
#include "cyborg/harness.hpp"
#include "cyborg/imu.hpp"
#include "cyborg/mission.hpp"

using namespace cyborg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

int run(const char* id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < budget_s, fmt::format("runtime {:.1f}s over {:.0f}s budget", secs, budget_s));
    fmt::print("{} {} {} ({:.1f}s){}{}\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.empty() ? "" : ": ",
               o.detail);
    std::fflush(stdout);
    return o.pass ? 0 : 1;
}

Outcome a1_projection() {
    Outcome o;
    o.require(pixel_to_angle(1) == 0.0, "u=1 not 0 deg");
    o.require(pixel_to_angle(32) == 90.0, "u=32 not 90 deg");
    Rng rng(1);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const Pose p{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0), 0.0, rng.uniform(-180.0, 180.0)};
        const double alpha = rng.uniform(0.0, 90.0);
        const double step = rng.uniform(0.01, 10.0);
        const auto e = estimate_target(p, alpha, step);
        worst = std::max(worst, std::abs(distance(e.position(), p.position()) - step));
    }
    o.require(worst <= 1e-9, fmt::format("|target - insect| off by {:.3g}", worst));
    return o;
}

Outcome a2_blob_oracle() {
    Outcome o;
    Rng rng(2);
    int mismatches = 0, detections = 0;
    for (int i = 0; i < 100; ++i) {
        const IrImage img = oracle::blob_frame(rng, rng.uniform(-2.0, 34.0), rng.uniform(-2.0, 34.0),
                                               rng.uniform(0.5, 12.0), rng.uniform(0.7, 6.0), rng.uniform(0.0, 0.5));
        BlobParams p;
        p.scale_normalized = (i % 2) == 1;
        const auto got = detect_blob(img, p);
        const auto want = oracle::oracle_detect(img, p);
        const bool same = got.has_value() == want.has_value() &&
                          (!got || (got->u == want->u && got->v == want->v && got->scale == want->scale &&
                                    std::abs(got->response - want->response) <= 1e-9));
        mismatches += !same;
        detections += got.has_value();
    }
    o.require(mismatches == 0, fmt::format("{} of 100 images differ from the oracle", mismatches));
    o.detail = o.pass ? fmt::format("{} detections", detections) : o.detail;
    return o;
}

Outcome a3_speed_estimator() {
    Outcome o;
    Rng rng(3);
    std::vector<Eigen::Vector3d> w(64);
    for (int trial = 0; trial < 200; ++trial) {
        for (auto& a : w)
            for (int i = 0; i < 3; ++i) a[i] = std::round(rng.uniform(-64.0, 64.0)) / 8.0;
        const double before = estimate_speed(3.5, w);
        const Eigen::Vector3d bias(std::round(rng.uniform(-80.0, 80.0)) / 8.0, -9.8125, 0.25);
        for (auto& a : w) a += bias;
        if (estimate_speed(3.5, w) != before) {
            o.require(false, "bias changed the estimate");
            break;
        }
    }
    GaitModel m;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng r(seed);
        const double speed = r.uniform(0.02, 0.08);
        const std::vector<TimedPose> path{{0.0, Pose{0, 0, 0, 0}}, {60.0, Pose{speed * 60.0, 0, 0, 0}}};
        const auto samples = synth_gait(path, m, r);
        SpeedEstimator est(m.k_true);
        double sum = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double v = est.update(samples[i]);
            if (i >= est.capacity()) {
                sum += v;
                ++n;
            }
        }
        worst = std::max(worst, std::abs(sum / n - speed) / speed);
    }
    o.require(worst <= 0.05, fmt::format("round trip off by {:.1f}%", 100.0 * worst));
    if (o.pass) o.detail = fmt::format("worst round-trip error {:.2f}%", 100.0 * worst);
    return o;
}

Outcome a4_dead_reckoning() {
    Outcome o;
    ImuStudyConfig flat;
    flat.walk.duration = 300.0;
    const auto s2 = run_imu_study(flat, 20, 400, 0);
    double worst2 = 0.0, worst_m = 0.0, shortest = 1e9;
    for (const auto& t : s2.trials) {
        worst2 = std::max(worst2, t.final_error_pct);
        worst_m = std::max(worst_m, t.final_error);
        shortest = std::min(shortest, t.traveled);
    }
    o.require(shortest >= 10.0, fmt::format("walk only {:.1f} m", shortest));
    o.require(worst_m < 1.0, fmt::format("2D error {:.2f} m", worst_m));
    o.require(worst2 <= 5.0, fmt::format("2D error {:.2f}%", worst2));

    ImuStudyConfig slope = flat;
    slope.walk.slope_deg = 7.9;
    slope.mode = TrackMode::Spatial;
    const auto s3 = run_imu_study(slope, 20, 500, 0);
    double worst3 = 0.0;
    for (const auto& t : s3.trials) worst3 = std::max(worst3, t.final_error_pct);
    o.require(worst3 <= 10.0, fmt::format("3D error {:.2f}%", worst3));
    if (o.pass) {
        o.detail = fmt::format("2D worst {:.2f}% ({:.2f} m, walks >= {:.1f} m); 3D worst {:.2f}%", worst2, worst_m,
                               shortest, worst3);
    }
    return o;
}

Outcome a5_exploration() {
    Outcome o;
    const ExplorationConfig cfg;
    const auto s = run_exploration_study(cfg, 20, 1000, 0);
    check_aggregates(s);
    std::map<std::string, const StrategyAggregate*> by;
    for (const auto& a : s.aggregates) by[a.strategy] = &a;
    for (const char* k : {"brownian", "uniform", "levy"}) {
        const double c = by.at(k)->coverage_mean.back();
        o.require(c > 0.90, fmt::format("{} coverage {:.1f}%", k, 100.0 * c));
    }
    const double fixed = by.at("fixed")->coverage_mean.back();
    o.require(fixed >= 0.45 && fixed <= 0.75, fmt::format("fixed coverage {:.1f}%", 100.0 * fixed));
    const auto& nat = by.at("natural")->coverage_mean;
    for (std::size_t h = 6; h < nat.size(); ++h) {
        for (const auto& a : s.aggregates) {
            if (a.strategy != "natural" && !(nat[h] < a.coverage_mean[h])) {
                o.require(false, fmt::format("natural not lowest at hour {} vs {}", h, a.strategy));
            }
        }
    }
    const double fixed_t = by.at("fixed")->search_time_mean;
    for (const char* k : {"brownian", "uniform", "levy"}) {
        o.require(by.at(k)->search_time_mean < fixed_t, fmt::format("{} search not faster than fixed", k));
    }
    o.detail += fmt::format("{}coverage levy {:.1f}% uniform {:.1f}% brownian {:.1f}% fixed {:.1f}%; "
                            "levy mean search {:.0f} min (reference 221 min)",
                            o.detail.empty() ? "" : "; ", 100.0 * by.at("levy")->coverage_mean.back(),
                            100.0 * by.at("uniform")->coverage_mean.back(),
                            100.0 * by.at("brownian")->coverage_mean.back(), 100.0 * fixed,
                            by.at("levy")->search_time_mean / 60.0);
    return o;
}

Outcome a6_thermal_nav() {
    Outcome o;
    ThermalNavConfig cfg;
    const auto s = run_thermal_nav_study(cfg, 30, 2000, 0);
    check_aggregates(s);
    o.require(s.success_rate >= 0.90, fmt::format("tracking success {:.1f}%", 100.0 * s.success_rate));
    const auto& d = s.mean_arrival_distance;
    o.require(d.size() >= 2, "fewer than two arrivals recorded");
    if (d.size() >= 2) {
        o.require(d[1] < d[0], fmt::format("arrival distance not decreasing ({:.2f}, {:.2f})", d[0], d[1]));
        o.require(d[1] <= 1.5, fmt::format("2nd arrival mean {:.2f} m", d[1]));
    }
    o.require(s.overshoot_or_phase3_fraction >= 0.80,
              fmt::format("overshoot/Phase III fraction {:.1f}%", 100.0 * s.overshoot_or_phase3_fraction));
    cfg.variant = NavVariant::Onboard;
    const auto on = run_thermal_nav_study(cfg, 30, 2000, 0);
    o.require(on.success_rate >= 0.90, fmt::format("onboard success {:.1f}%", 100.0 * on.success_rate));
    if (o.pass && d.size() >= 2) {
        o.detail = fmt::format("success tracking {:.1f}% onboard {:.1f}%; arrivals {:.2f} m then {:.2f} m",
                               100.0 * s.success_rate, 100.0 * on.success_rate, d[0], d[1]);
    }
    return o;
}

Outcome a7_missions() {
    Outcome o;
    const auto in = run_mission_study(indoor_mission_scenario(), 20, 3000, 0);
    check_aggregates(in);
    o.require(in.human >= 18, fmt::format("indoor Human in {}/20", in.human));
    const auto out = run_mission_study(outdoor_mission_scenario(), 20, 4000, 0);
    check_aggregates(out);
    o.require(out.false_human == 0, fmt::format("{} false Human outdoors", out.false_human));
    o.require(out.give_ups >= 1, "no GiveUp reversion outdoors");
    if (o.pass) {
        o.detail = fmt::format("indoor Human {}/20; outdoor Human {}/20, false Human 0, give-ups in {} runs",
                               in.human, out.human, out.runs_with_give_up);
    }
    return o;
}

Outcome a8_thresholds() {
    Outcome o;
    const auto in = MissionConfig::indoor();
    auto frame = [](int n, int center, bool blob) {
        FrameInfo f;
        f.in_band = n;
        f.center = center;
        if (blob) f.blob = BlobResult{16, 16, -1.0, 21};
        return f;
    };
    struct Row {
        int n;
        bool p2, p3;
    };
    for (const Row r : {Row{7, false, false}, Row{8, true, false}, Row{49, true, false}, Row{50, true, true}}) {
        const auto f = frame(r.n, 0, true);
        o.require(phase2_trigger(f, in) == r.p2, fmt::format("indoor phase2 at {} px", r.n));
        o.require(phase3_trigger(f, in) == r.p3, fmt::format("indoor phase3 at {} px", r.n));
    }
    const auto out = MissionConfig::outdoor();
    struct ORow {
        int n, c;
        bool fires;
    };
    for (const ORow r : {ORow{25, 12, true}, ORow{24, 12, false}, ORow{25, 11, false}}) {
        const auto f = frame(r.n, r.c, true);
        o.require(phase2_trigger(f, out) == r.fires, fmt::format("outdoor rule at {}/{}", r.n, r.c));
        o.require(phase3_classify(f, out) == (r.fires ? Classification::Human : Classification::NotHuman),
                  fmt::format("outdoor classify at {}/{}", r.n, r.c));
    }
    o.require(!phase2_trigger(frame(25, 12, false), out), "outdoor rule fired without a blob");
    return o;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), dir).string()] = ss.str();
    }
    return files;
}

Outcome a9_determinism() {
    Outcome o;
    StudyConfig cfg;
    cfg.exploration.duration = 6.0 * 3600.0;
    const fs::path root = fs::temp_directory_path() / "cyborg_acceptance_a9";
    fs::remove_all(root);
    auto twice = [&](const std::string& name, const std::function<void(const fs::path&, int)>& write) {
        write(root / (name + "_a"), 1);
        write(root / (name + "_b"), 0);
        const auto a = snapshot(root / (name + "_a"));
        const auto b = snapshot(root / (name + "_b"));
        o.require(!a.empty() && a == b, name + " outputs differ");
    };
    twice("explore", [&](const fs::path& d, int w) {
        write_study(d, cfg, run_exploration_study(cfg.exploration, 3, 7, w));
    });
    twice("thermal", [&](const fs::path& d, int w) {
        write_study(d, cfg, run_thermal_nav_study(cfg.thermal_nav, 4, 7, w));
    });
    twice("imu", [&](const fs::path& d, int w) { write_study(d, cfg, run_imu_study(cfg.imu, 3, 7, w)); });
    twice("mission", [&](const fs::path& d, int w) {
        write_study(d, cfg, run_mission_study(outdoor_mission_scenario(), 3, 7, w));
    });
    fs::remove_all(root);
    return o;
}

}  // namespace

int main() {
    int failed = 0;
    failed += run("A1", "target projection", 1.0, a1_projection);
    failed += run("A2", "blob pipeline vs brute-force oracle", 30.0, a2_blob_oracle);
    failed += run("A3", "speed estimator bias invariance and round trip", 60.0, a3_speed_estimator);
    failed += run("A4", "dead-reckoning error", 60.0, a4_dead_reckoning);
    failed += run("A5", "exploration strategies", 300.0, a5_exploration);
    failed += run("A6", "thermal navigation", 120.0, a6_thermal_nav);
    failed += run("A7", "mission integration", 600.0, a7_missions);
    failed += run("A8", "phase-trigger thresholds", 60.0, a8_thresholds);
    failed += run("A9", "byte-identical repeats", 600.0, a9_determinism);
    fmt::print("{} of 9 criteria passed\n", 9 - failed);
    return failed == 0 ? 0 : 1;
}
