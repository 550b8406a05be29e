#include "cyborg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace cyborg {

void parallel_for(int n, int workers, const std::function<void(int)>& job) {
    if (n <= 0) return;
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

// ---------------------------------------------------------------- exploration

ExplorationTrial run_exploration_trial(const ExplorationConfig& cfg, const std::string& strategy,
                                       std::uint64_t seed) {
    if (!(cfg.dt > 0.0) || !(cfg.duration > 0.0) || !(cfg.checkpoint > 0.0)) {
        throw ConfigError("exploration: dt, duration and checkpoint must be positive");
    }
    const bool natural = strategy == "natural";
    Rng root(seed);
    Rng motion_rng = root.split();
    Rng mission_rng = root.split();

    std::optional<Mission> mission;
    if (!natural) {
        MissionConfig mc = cfg.mission;
        mc.strategy = cfg.strategy;
        try {
            mc.strategy.kind = strategy_from_string(strategy);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        mc.tick_dt = cfg.dt;
        mission.emplace(mc, mission_rng);
    }

    ExplorationTrial out;
    out.strategy = strategy;
    out.seed = seed;
    CoverageGrid grid(cfg.arena, cfg.coverage_cell);
    Pose pose = cfg.start;
    grid.mark(pose);
    out.coverage.push_back(grid.fraction());
    if (distance(pose.position(), cfg.target) <= cfg.detection_radius) out.search_time = 0.0;

    const auto checkpoints = static_cast<std::size_t>(std::floor(cfg.duration / cfg.checkpoint + 1e-9));
    WalkState walk;
    StimCommand prev = StimCommand::None;
    double t = 0.0;
    long tick = 0;
    while (cfg.duration - t > 1e-9) {
        StimCommand cmd = StimCommand::None;
        double limit = std::numeric_limits<double>::infinity();
        if (mission) {
            const auto r = mission->phase1_tick(t, pose, cfg.arena, nullptr);
            cmd = r.cmd == StimCommand::Arrived ? StimCommand::None : r.cmd;
            limit = r.turn_limit;
        }
        if (cmd == StimCommand::None && prev != StimCommand::None && !walk.stopped()) {
            walk.segment_active = false;
        }
        double step = cfg.dt;
        if (cmd == StimCommand::None && walk.stopped()) {
            step = std::max(cfg.dt, walk.remaining_stop);
        }
        step = std::min(step, cfg.duration - t);
        const Pose next = apply_stimulus(pose, cmd, cfg.motion, cfg.arena, walk, motion_rng, step, limit);
        out.path_length += distance(next.position(), pose.position());
        pose = next;
        prev = cmd;
        ++tick;
        t = step == cfg.dt ? t + cfg.dt : t + step;
        grid.mark(pose);
        if (!out.search_time && distance(pose.position(), cfg.target) <= cfg.detection_radius) {
            out.search_time = t;
        }
        while (out.coverage.size() <= checkpoints &&
               static_cast<double>(out.coverage.size()) * cfg.checkpoint <= t + 1e-6) {
            out.coverage.push_back(grid.fraction());
        }
    }
    while (out.coverage.size() <= checkpoints) out.coverage.push_back(grid.fraction());
    return out;
}

std::vector<StrategyAggregate> aggregate_exploration(const ExplorationConfig& cfg,
                                                     const std::vector<ExplorationTrial>& trials) {
    std::vector<StrategyAggregate> out;
    for (const auto& name : cfg.strategies) {
        StrategyAggregate a;
        a.strategy = name;
        std::vector<const ExplorationTrial*> mine;
        for (const auto& tr : trials) {
            if (tr.strategy == name) mine.push_back(&tr);
        }
        a.trials = static_cast<int>(mine.size());
        if (mine.empty()) {
            out.push_back(a);
            continue;
        }
        const std::size_t n_cp = mine.front()->coverage.size();
        for (std::size_t k = 0; k < n_cp; ++k) {
            std::vector<double> col;
            for (const auto* tr : mine) col.push_back(tr->coverage.at(k));
            a.coverage_mean.push_back(mean_of(col));
            a.coverage_sd.push_back(sd_of(col));
        }
        std::vector<double> times;
        for (const auto* tr : mine) {
            times.push_back(tr->search_time.value_or(cfg.duration));
            if (tr->search_time) ++a.found;
        }
        a.search_time_mean = mean_of(times);
        a.search_time_sd = sd_of(times);
        out.push_back(a);
    }
    return out;
}

ExplorationSummary run_exploration_study(const ExplorationConfig& cfg, int trials,
                                         std::uint64_t base_seed, int workers) {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (cfg.strategies.empty()) throw ConfigError("exploration: no strategies");
    for (const auto& s : cfg.strategies) {
        if (s == "natural") continue;
        try {
            (void)strategy_from_string(s);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    ExplorationSummary s;
    s.config = cfg;
    s.base_seed = base_seed;
    const int n_strat = static_cast<int>(cfg.strategies.size());
    s.trials.resize(static_cast<std::size_t>(n_strat * trials));
    parallel_for(n_strat * trials, workers, [&](int job) {
        const int strat = job / trials;
        const int trial = job % trials;
        s.trials[static_cast<std::size_t>(job)] =
            run_exploration_trial(cfg, cfg.strategies[static_cast<std::size_t>(strat)],
                                  base_seed + static_cast<std::uint64_t>(trial));
    });
    s.aggregates = aggregate_exploration(cfg, s.trials);
    check_aggregates(s);
    return s;
}

// ------------------------------------------------------------ thermal nav

bool is_overshoot(Vec2 start, Vec2 source, const std::vector<Vec2>& estimates) {
    if (estimates.size() < 3) return false;
    const Vec2 ray = source - start;
    const double len = norm(ray);
    if (len <= 0.0) return false;
    const Vec2 e = estimates[2] - start;
    return (e.x * ray.x + e.y * ray.y) / len > len;
}

ThermalNavTrial run_thermal_nav_trial(const ThermalNavConfig& cfg, std::uint64_t seed) {
    Rng root(seed);
    ThermalNavTrial tr;
    tr.seed = seed;
    tr.start_yaw = root.uniform(-180.0, 180.0);

    MissionScenario sc;
    sc.world.arena = cfg.arena;
    sc.world.ambient = cfg.ambient;
    sc.world.sources = {make_oven(cfg.source, cfg.source_temp)};
    sc.start = Pose{cfg.start.x, cfg.start.y, 0.0, tr.start_yaw};
    sc.config = cfg.mission;
    sc.config.nav = cfg.variant;
    sc.config.classify_enabled = false;
    sc.config.approach_time_limit = cfg.time_limit + 1.0;
    sc.camera = cfg.camera;
    sc.motion = cfg.motion;
    sc.gait = cfg.gait;
    sc.dt = cfg.dt;
    sc.time_budget = cfg.time_limit;
    sc.start_in_approach = true;
    sc.success_point = cfg.source;
    sc.success_radius = cfg.success_radius;
    sc.imu_localization = cfg.variant == NavVariant::Onboard;

    const MissionReport rep = run_mission(sc, root.next_u64());
    tr.success = rep.outcome == MissionOutcome::Reached;
    tr.time = tr.success ? *rep.success_time : cfg.time_limit;
    tr.path_length = rep.path_length;
    tr.mean_speed = tr.time > 0.0 ? tr.path_length / tr.time : 0.0;
    int arrivals = 0;
    for (std::size_t i = 0; i < rep.events.size(); ++i) {
        const auto& e = rep.events[i];
        if (e.type == MissionEventType::EstimateArrival) {
            ++arrivals;
            tr.arrival_distances.push_back(distance(rep.event_true_positions[i], cfg.source));
            tr.arrival_points.push_back(rep.event_true_positions[i]);
        } else if (e.type == MissionEventType::EstimateIssued) {
            tr.estimates.push_back(e.target);
        } else if (e.type == MissionEventType::Phase3Criterion && !tr.phase3_after_arrivals) {
            tr.phase3_after_arrivals = arrivals;
        }
    }
    tr.overshoot = is_overshoot(cfg.start, cfg.source, tr.estimates);
    for (const auto& p : rep.trajectory) tr.trajectory.push_back(p.position());
    return tr;
}

void aggregate_thermal_nav(ThermalNavSummary& s) {
    const auto n = s.trials.size();
    int ok = 0, tagged = 0;
    std::vector<double> times, speeds;
    std::size_t max_arr = 0;
    for (const auto& t : s.trials) max_arr = std::max(max_arr, t.arrival_distances.size());
    std::vector<std::vector<double>> per(max_arr);
    for (const auto& t : s.trials) {
        for (std::size_t k = 0; k < t.arrival_distances.size(); ++k) per[k].push_back(t.arrival_distances[k]);
        if (!t.success) continue;
        ++ok;
        times.push_back(t.time);
        speeds.push_back(t.mean_speed);
        if (t.overshoot || (t.phase3_after_arrivals && *t.phase3_after_arrivals <= 2)) ++tagged;
    }
    s.success_rate = n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0;
    s.mean_time = mean_of(times);
    s.mean_speed = mean_of(speeds);
    s.mean_arrival_distance.clear();
    s.arrival_counts.clear();
    for (const auto& col : per) {
        s.mean_arrival_distance.push_back(mean_of(col));
        s.arrival_counts.push_back(static_cast<int>(col.size()));
    }
    s.overshoot_or_phase3_fraction = ok ? static_cast<double>(tagged) / ok : 0.0;
}

ThermalNavSummary run_thermal_nav_study(const ThermalNavConfig& cfg, int trials,
                                        std::uint64_t base_seed, int workers) {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    ThermalNavSummary s;
    s.config = cfg;
    s.base_seed = base_seed;
    s.trials.resize(static_cast<std::size_t>(trials));
    parallel_for(trials, workers, [&](int i) {
        s.trials[static_cast<std::size_t>(i)] = run_thermal_nav_trial(cfg, base_seed + static_cast<std::uint64_t>(i));
    });
    aggregate_thermal_nav(s);
    check_aggregates(s);
    return s;
}

// --------------------------------------------------------------- imu replay

ImuReplayReport run_imu_replay(const std::vector<ImuSample>& samples,
                               const std::vector<TrackPoint>& reference, double k, TrackMode mode) {
    ImuReplayReport rep;
    if (samples.empty()) return rep;
    DeadReckoner dr(k, mode);
    Eigen::Vector3d start = Eigen::Vector3d::Zero();
    for (const auto& p : reference) {
        if (p.valid) {
            start = p.p;
            break;
        }
    }
    dr.reset(start);
    rep.positions.reserve(samples.size());
    rep.traveled.reserve(samples.size());
    for (const auto& s : samples) {
        dr.push(s);
        rep.positions.push_back({s.t, dr.state().position, true});
        rep.traveled.push_back(dr.state().traveled);
    }
    rep.orientation_warnings = dr.state().orientation_warnings;
    rep.reference_length = path_length(reference);
    rep.errors = error_series(rep.positions, reference);
    if (!rep.errors.empty()) {
        rep.final_error = rep.errors.back().error;
        rep.final_error_pct = rep.errors.back().error_pct;
    }
    return rep;
}

ImuTrial run_imu_trial(const ImuStudyConfig& cfg, std::uint64_t seed) {
    Rng root(seed);
    ImuTrial tr;
    tr.seed = seed;
    tr.k = cfg.k_seed;
    if (cfg.calibration_duration > 0.0) {
        SyntheticWalk cw = cfg.walk;
        cw.duration = cfg.calibration_duration;
        const auto path = synthetic_walk(cw, root);
        const auto samples = synth_gait(path, cfg.gait, root);
        const auto track = to_track(path);
        const auto rep = run_imu_replay(samples, track, cfg.k_seed, cfg.mode);
        const double measured = rep.traveled.empty() ? 0.0 : rep.traveled.back();
        const double actual = path_length(track);
        if (measured > 0.0 && actual > 0.0) tr.k = calibrate_gain(measured, actual, cfg.k_seed, cfg.calibration);
    }
    const auto path = synthetic_walk(cfg.walk, root);
    const auto samples = synth_gait(path, cfg.gait, root);
    const auto rep = run_imu_replay(samples, to_track(path), tr.k, cfg.mode);
    tr.traveled = rep.reference_length;
    tr.final_error = rep.final_error;
    tr.final_error_pct = rep.final_error_pct;
    // Keep roughly one error point per second.
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.walk.rate_hz)));
    for (std::size_t i = 0; i < rep.errors.size(); i += stride) tr.errors.push_back(rep.errors[i]);
    if (!rep.errors.empty() && (rep.errors.size() - 1) % stride != 0) tr.errors.push_back(rep.errors.back());
    return tr;
}

void aggregate_imu(ImuStudySummary& s) {
    std::vector<double> pct;
    s.max_error_pct = 0.0;
    s.max_error = 0.0;
    for (const auto& t : s.trials) {
        pct.push_back(t.final_error_pct);
        s.max_error_pct = std::max(s.max_error_pct, t.final_error_pct);
        s.max_error = std::max(s.max_error, t.final_error);
    }
    s.mean_error_pct = mean_of(pct);
}

ImuStudySummary run_imu_study(const ImuStudyConfig& cfg, int trials, std::uint64_t base_seed, int workers) {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    ImuStudySummary s;
    s.config = cfg;
    s.base_seed = base_seed;
    s.trials.resize(static_cast<std::size_t>(trials));
    parallel_for(trials, workers, [&](int i) {
        s.trials[static_cast<std::size_t>(i)] = run_imu_trial(cfg, base_seed + static_cast<std::uint64_t>(i));
    });
    aggregate_imu(s);
    check_aggregates(s);
    return s;
}

// ------------------------------------------------------------------ mission

MissionScenario indoor_mission_scenario() {
    MissionScenario sc;
    sc.world.arena = Arena(4.8, 6.6);
    sc.world.ambient = 25.0;
    sc.world.sources = {make_human({4.3, 6.1})};
    sc.start = Pose{0.5, 0.5, 0.0, 45.0};
    sc.config = MissionConfig::indoor();
    sc.time_budget = 1800.0;
    return sc;
}

MissionScenario outdoor_mission_scenario() {
    MissionScenario sc;
    sc.world.arena = Arena(3.5, 6.0);
    sc.world.ambient = 28.0;
    ThermalSource air;
    air.kind = SourceKind::TransientAir;
    air.center = {1.75, 4.6};
    air.radius = 0.8;
    air.height = 1.0;
    air.surface_temp = 31.0;
    air.active_from = 1.5;
    air.active_to = 2.4;
    sc.world.sources = {make_human({1.75, 0.6}), air};
    sc.start = Pose{1.75, 3.0, 0.0, 90.0};
    sc.config = MissionConfig::outdoor();
    sc.imu_localization = true;
    sc.time_budget = 1800.0;
    return sc;
}

void aggregate_missions(MissionStudySummary& s) {
    s.human = s.not_human = s.not_found = s.false_human = s.give_ups = s.runs_with_give_up = 0;
    for (const auto& r : s.reports) {
        switch (r.outcome) {
            case MissionOutcome::Human:
                ++s.human;
                if (r.classified_kind != SourceKind::Human) ++s.false_human;
                break;
            case MissionOutcome::NotHuman: ++s.not_human; break;
            case MissionOutcome::NotFound:
            case MissionOutcome::Reached: ++s.not_found; break;
        }
        s.give_ups += r.give_ups;
        if (r.give_ups > 0) ++s.runs_with_give_up;
    }
}

MissionStudySummary run_mission_study(const MissionScenario& scenario, int trials,
                                      std::uint64_t base_seed, int workers) {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    MissionStudySummary s;
    s.scenario = scenario;
    s.base_seed = base_seed;
    s.reports.resize(static_cast<std::size_t>(trials));
    parallel_for(trials, workers, [&](int i) {
        s.reports[static_cast<std::size_t>(i)] = run_mission(scenario, base_seed + static_cast<std::uint64_t>(i));
    });
    aggregate_missions(s);
    check_aggregates(s);
    return s;
}

// ------------------------------------------------------------ aggregate checks

namespace {

void require_equal(double a, double b, const char* what) {
    if (a != b && !(std::isnan(a) && std::isnan(b))) {
        throw std::logic_error(std::string("aggregate mismatch: ") + what);
    }
}

}  // namespace

void check_aggregates(const ExplorationSummary& s) {
    const auto again = aggregate_exploration(s.config, s.trials);
    if (again.size() != s.aggregates.size()) throw std::logic_error("aggregate mismatch: strategy count");
    for (std::size_t i = 0; i < again.size(); ++i) {
        const auto& a = again[i];
        const auto& b = s.aggregates[i];
        if (a.strategy != b.strategy || a.found != b.found || a.trials != b.trials ||
            a.coverage_mean != b.coverage_mean || a.coverage_sd != b.coverage_sd) {
            throw std::logic_error("aggregate mismatch: exploration " + a.strategy);
        }
        require_equal(a.search_time_mean, b.search_time_mean, "search time mean");
        require_equal(a.search_time_sd, b.search_time_sd, "search time sd");
    }
}

void check_aggregates(const ThermalNavSummary& s) {
    ThermalNavSummary again = s;
    aggregate_thermal_nav(again);
    require_equal(again.success_rate, s.success_rate, "success rate");
    require_equal(again.mean_time, s.mean_time, "mean time");
    require_equal(again.mean_speed, s.mean_speed, "mean speed");
    require_equal(again.overshoot_or_phase3_fraction, s.overshoot_or_phase3_fraction, "overshoot");
    if (again.mean_arrival_distance != s.mean_arrival_distance || again.arrival_counts != s.arrival_counts) {
        throw std::logic_error("aggregate mismatch: arrival distances");
    }
}

void check_aggregates(const ImuStudySummary& s) {
    ImuStudySummary again = s;
    aggregate_imu(again);
    require_equal(again.mean_error_pct, s.mean_error_pct, "mean error");
    require_equal(again.max_error_pct, s.max_error_pct, "max error pct");
    require_equal(again.max_error, s.max_error, "max error");
}

void check_aggregates(const MissionStudySummary& s) {
    MissionStudySummary again;
    again.reports = s.reports;
    aggregate_missions(again);
    if (again.human != s.human || again.not_human != s.not_human || again.not_found != s.not_found ||
        again.false_human != s.false_human || again.give_ups != s.give_ups ||
        again.runs_with_give_up != s.runs_with_give_up) {
        throw std::logic_error("aggregate mismatch: mission counts");
    }
}

}  // namespace cyborg
