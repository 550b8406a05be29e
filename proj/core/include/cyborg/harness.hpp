#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyborg/explore.hpp"
#include "cyborg/imu.hpp"
#include "cyborg/ir_camera.hpp"
#include "cyborg/locomotion.hpp"
#include "cyborg/mission.hpp"
#include "cyborg/world.hpp"

namespace cyborg {

/// Bad configuration or CLI input; reported as error JSON by the CLI.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- exploration

struct ExplorationConfig {
    Arena arena{20.0, 20.0};
    Pose start{0.5, 0.5, 0.0, 45.0};
    Vec2 target{14.0, 5.5};
    double detection_radius = 0.5;
    double duration = 24.0 * 3600.0;
    double dt = 0.1;
    double checkpoint = 3600.0;
    double coverage_cell = 0.15;
    /// "natural" plus the strategy names.
    std::vector<std::string> strategies{"natural", "fixed", "levy", "uniform", "brownian"};
    Strategy strategy;
    MotionParams motion;
    MissionConfig mission;
};

struct ExplorationTrial {
    std::string strategy;
    std::uint64_t seed = 0;
    /// Coverage fraction at t = 0, checkpoint, 2 * checkpoint, ...
    std::vector<double> coverage;
    /// First time within the detection radius of the target.
    std::optional<double> search_time;
    double path_length = 0.0;
};

struct StrategyAggregate {
    std::string strategy;
    std::vector<double> coverage_mean;
    std::vector<double> coverage_sd;
    /// Failures count as the full duration.
    double search_time_mean = 0.0;
    double search_time_sd = 0.0;
    int found = 0;
    int trials = 0;
};

struct ExplorationSummary {
    ExplorationConfig config;
    std::uint64_t base_seed = 0;
    std::vector<ExplorationTrial> trials;
    std::vector<StrategyAggregate> aggregates;
};

/// One strategy run (Phase I without a camera, or the natural walk).
ExplorationTrial run_exploration_trial(const ExplorationConfig& cfg, const std::string& strategy,
                                       std::uint64_t seed);

ExplorationSummary run_exploration_study(const ExplorationConfig& cfg, int trials,
                                         std::uint64_t base_seed, int workers = 0);

std::vector<StrategyAggregate> aggregate_exploration(const ExplorationConfig& cfg,
                                                     const std::vector<ExplorationTrial>& trials);

// ------------------------------------------------------------ thermal nav

struct ThermalNavConfig {
    Arena arena{4.8, 6.6};
    Vec2 start{2.4, 1.3};
    Vec2 source{2.4, 5.3};
    double source_temp = 36.0;
    double ambient = 25.0;
    double time_limit = 180.0;
    double success_radius = 0.5;
    NavVariant variant = NavVariant::Tracking;
    double dt = 0.1;
    MissionConfig mission;
    CameraModel camera;
    MotionParams motion;
    GaitModel gait;
};

struct ThermalNavTrial {
    std::uint64_t seed = 0;
    double start_yaw = 0.0;
    bool success = false;
    double time = 0.0;
    double path_length = 0.0;
    double mean_speed = 0.0;
    /// True distance to the source at each estimated-destination arrival.
    std::vector<double> arrival_distances;
    std::vector<Vec2> estimates;
    bool overshoot = false;
    /// Arrivals completed before the Phase III criterion first held.
    std::optional<int> phase3_after_arrivals;
    std::vector<Vec2> trajectory;
    std::vector<Vec2> arrival_points;
};

struct ThermalNavSummary {
    ThermalNavConfig config;
    std::uint64_t base_seed = 0;
    std::vector<ThermalNavTrial> trials;
    double success_rate = 0.0;
    double mean_time = 0.0;
    double mean_speed = 0.0;
    /// Mean over trials that reached arrival k (index k - 1).
    std::vector<double> mean_arrival_distance;
    std::vector<int> arrival_counts;
    /// Among successes: overshoot tagged or Phase III by the 2nd arrival.
    double overshoot_or_phase3_fraction = 0.0;
};

ThermalNavTrial run_thermal_nav_trial(const ThermalNavConfig& cfg, std::uint64_t seed);
ThermalNavSummary run_thermal_nav_study(const ThermalNavConfig& cfg, int trials,
                                        std::uint64_t base_seed, int workers = 0);
void aggregate_thermal_nav(ThermalNavSummary& s);

/// Third estimate lies beyond the source along the start->source ray.
bool is_overshoot(Vec2 start, Vec2 source, const std::vector<Vec2>& estimates);

// --------------------------------------------------------------- imu replay

struct ImuReplayReport {
    std::vector<TrackPoint> positions;
    std::vector<double> traveled;
    std::vector<ErrorPoint> errors;
    double final_error = 0.0;
    double final_error_pct = 0.0;
    double reference_length = 0.0;
    int orientation_warnings = 0;
};

ImuReplayReport run_imu_replay(const std::vector<ImuSample>& samples,
                               const std::vector<TrackPoint>& reference, double k,
                               TrackMode mode = TrackMode::Planar);

struct ImuStudyConfig {
    SyntheticWalk walk;
    GaitModel gait;
    TrackMode mode = TrackMode::Planar;
    /// Gain the estimator starts from before calibration.
    double k_seed = 3.5;
    CalibrationMode calibration = CalibrationMode::Corrective;
    /// Duration of the calibration walk; 0 disables calibration.
    double calibration_duration = 60.0;
};

struct ImuTrial {
    std::uint64_t seed = 0;
    double k = 0.0;
    double traveled = 0.0;
    double final_error = 0.0;
    double final_error_pct = 0.0;
    std::vector<ErrorPoint> errors;
};

struct ImuStudySummary {
    ImuStudyConfig config;
    std::uint64_t base_seed = 0;
    std::vector<ImuTrial> trials;
    double mean_error_pct = 0.0;
    double max_error_pct = 0.0;
    double max_error = 0.0;
};

/// Calibrates the gain on one synthetic walk, then dead-reckons a second.
ImuTrial run_imu_trial(const ImuStudyConfig& cfg, std::uint64_t seed);
ImuStudySummary run_imu_study(const ImuStudyConfig& cfg, int trials, std::uint64_t base_seed,
                              int workers = 0);
void aggregate_imu(ImuStudySummary& s);

// ------------------------------------------------------------------ mission

struct MissionStudySummary {
    MissionScenario scenario;
    std::uint64_t base_seed = 0;
    std::vector<MissionReport> reports;
    int human = 0;
    int not_human = 0;
    int not_found = 0;
    /// Human classifications whose dominant source was not a human.
    int false_human = 0;
    int give_ups = 0;
    int runs_with_give_up = 0;
};

MissionStudySummary run_mission_study(const MissionScenario& scenario, int trials,
                                      std::uint64_t base_seed, int workers = 0);
void aggregate_missions(MissionStudySummary& s);

/// Indoor 4.8 x 6.6 m arena with a human in the far corner.
MissionScenario indoor_mission_scenario();
/// Outdoor pavement with a human and a short-lived warm air patch.
MissionScenario outdoor_mission_scenario();

// ------------------------------------------------------------ configuration

/// Parsed configuration file. Every section is optional and falls back to
/// the defaults above.
struct StudyConfig {
    ExplorationConfig exploration;
    ThermalNavConfig thermal_nav;
    ImuStudyConfig imu;
    MissionScenario mission = indoor_mission_scenario();
};

StudyConfig parse_study_config(const std::string& json_text);
StudyConfig load_study_config(const std::filesystem::path& path);
/// Fully resolved configuration as JSON (the snapshot written next to
/// study outputs).
std::string study_config_json(const StudyConfig& cfg);

// ------------------------------------------------------------------ output

std::string to_json(const ExplorationSummary& s);
std::string to_json(const ExplorationTrial& t);
std::string to_json(const ThermalNavSummary& s);
std::string to_json(const ThermalNavTrial& t);
std::string to_json(const ImuStudySummary& s);
std::string to_json(const ImuTrial& t);
std::string to_json(const MissionStudySummary& s);
std::string to_json(const MissionReport& r);

/// Recomputes the aggregates from the stored trial records; throws
/// std::logic_error on mismatch.
void check_aggregates(const ExplorationSummary& s);
void check_aggregates(const ThermalNavSummary& s);
void check_aggregates(const ImuStudySummary& s);
void check_aggregates(const MissionStudySummary& s);

/// Writes config.json, trials/NNNN.json, summary.json and the SVG panels
/// into `dir` (created if needed). Returns the files written.
std::vector<std::filesystem::path> write_study(const std::filesystem::path& dir,
                                               const StudyConfig& cfg,
                                               const ExplorationSummary& s);
std::vector<std::filesystem::path> write_study(const std::filesystem::path& dir,
                                               const StudyConfig& cfg,
                                               const ThermalNavSummary& s);
std::vector<std::filesystem::path> write_study(const std::filesystem::path& dir,
                                               const StudyConfig& cfg, const ImuStudySummary& s);
std::vector<std::filesystem::path> write_study(const std::filesystem::path& dir,
                                               const StudyConfig& cfg,
                                               const MissionStudySummary& s);

/// Re-renders the SVG panels of a study directory from its stored records.
std::vector<std::filesystem::path> replot_study(const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Runs `n` jobs on up to `workers` threads (0 = hardware concurrency);
/// results land in index order.
void parallel_for(int n, int workers, const std::function<void(int)>& job);

}  // namespace cyborg
