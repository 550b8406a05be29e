#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyborg/blob.hpp"
#include "cyborg/explore.hpp"
#include "cyborg/imu.hpp"
#include "cyborg/ir_camera.hpp"
#include "cyborg/locomotion.hpp"
#include "cyborg/rng.hpp"
#include "cyborg/world.hpp"

namespace cyborg {

enum class Phase { Explore, Approach, Classify };
enum class Environment { Indoor, Outdoor };
enum class NavVariant { Tracking, Onboard };
enum class Classification { Human, NotHuman };

std::string_view to_string(Phase p);
std::string_view to_string(Environment e);
std::string_view to_string(NavVariant v);
std::string_view to_string(Classification c);
Environment environment_from_string(std::string_view s);
NavVariant nav_variant_from_string(std::string_view s);

/// True for the edges of the three-phase flowchart: Explore->Approach,
/// Approach->Classify and Approach->Explore.
bool transition_allowed(Phase from, Phase to);

struct MissionConfig {
    Environment environment = Environment::Indoor;
    NavVariant nav = NavVariant::Tracking;

    /// Temperature band of human-like pixels, degrees C.
    double band_lo = 28.0;
    double band_hi = 38.0;
    /// Phase I -> II trigger as a fraction of the 1024 pixels.
    double phase2_fraction = 0.008;
    /// Phase II -> III trigger (indoor) and indoor classification cutoff.
    double phase3_fraction = 0.049;
    /// Target estimation needs strictly more in-band pixels than this.
    double estimate_fraction = 0.002;
    /// Outdoor rule: total in-band pixels and in-band pixels in the 5x5
    /// window around the blob centre.
    int outdoor_total = 25;
    int outdoor_center = 12;
    /// Scales both outdoor counts for the Phase III check.
    double outdoor_phase3_multiplier = 1.0;

    double approach_step = 1.5;
    double aux_step = 0.2;
    double arrival_radius = 0.2;
    double approach_time_limit = 180.0;

    /// Column bands: [1, left_max] turn left, [left_max+1, accel_max]
    /// accelerate, [accel_max+1, 32] turn right.
    int left_max = 10;
    int accel_max = 22;

    /// Consecutive missed frames before the recapture sweep starts.
    int miss_limit = 2;
    double sweep_limit = 90.0;
    /// Sweep speed cap, degrees per second.
    double sweep_rate = 40.0;
    /// Heading tolerance when the IMU-guided turn stops.
    double align_tolerance = 5.0;

    /// When false the Phase III criterion is only logged and Approach
    /// continues (navigation trials).
    bool classify_enabled = true;
    /// Controller tick, seconds.
    double tick_dt = 0.1;

    double goto_angle = 20.0;
    double goto_distance = 0.10;
    double wall_trigger = 0.10;
    double wall_hop = 0.5;
    Strategy strategy;
    BlobParams blob;

    static MissionConfig indoor();
    static MissionConfig outdoor();

    int phase2_pixels() const;
    int phase3_pixels() const;
    void validate() const;
};

/// round(fraction * 1024).
int fraction_to_pixels(double fraction);

/// One processed camera frame.
struct FrameInfo {
    const IrImage* image = nullptr;
    std::optional<BlobResult> blob;
    int in_band = 0;
    /// In-band pixels in the 5x5 window around the blob (0 without blob).
    int center = 0;
};

FrameInfo analyze_frame(const IrImage& img, const MissionConfig& cfg);

bool outdoor_rule(const FrameInfo& f, int total, int center);
bool phase2_trigger(const FrameInfo& f, const MissionConfig& cfg);
bool phase3_trigger(const FrameInfo& f, const MissionConfig& cfg);
bool estimation_gate(const FrameInfo& f, const MissionConfig& cfg);

/// Threshold classifier standing in for the learned human detector.
Classification phase3_classify(const IrImage& img, const MissionConfig& cfg);
Classification phase3_classify(const FrameInfo& f, const MissionConfig& cfg);

/// Onboard steering from the blob column. Throws std::out_of_range for u
/// outside [1, 32].
StimCommand band_command(int u, const MissionConfig& cfg);

enum class RecaptureStage { BackTurn, SweepRight, SweepLeft, Exhausted };
std::string_view to_string(RecaptureStage s);

struct RecaptureState {
    /// World bearing at which the blob was last seen, degrees.
    double last_bearing = 0.0;
    RecaptureStage stage = RecaptureStage::BackTurn;
    /// Signed yaw turned since the sweep origin.
    double yaw_accumulated = 0.0;
    double sweep_origin = 0.0;
    int failed_reacquisitions = 0;
};

struct RecaptureStep {
    StimCommand cmd = StimCommand::None;
    /// Largest yaw change this tick may make, degrees.
    double turn_limit = std::numeric_limits<double>::infinity();
    bool give_up = false;
    bool reacquired = false;
};

/// One tick of the recapture behaviour: turn back toward the last bearing,
/// sweep right up to the limit, then left up to the limit, then give up.
/// `frame_detected` is empty on ticks without a new frame.
RecaptureStep recapture(RecaptureState& rec, double yaw, std::optional<bool> frame_detected,
                        const MissionConfig& cfg, double dt);

enum class MissionEventType {
    Transition,
    EstimateIssued,
    EstimateArrival,
    AuxIssued,
    RecaptureStart,
    GiveUp,
    Classified,
    Phase3Criterion,
    Timeout
};
std::string_view to_string(MissionEventType t);

struct MissionEvent {
    double t = 0.0;
    MissionEventType type = MissionEventType::Transition;
    Vec2 at;
    Vec2 target;
    std::string detail;
};

struct PhaseTransition {
    double t = 0.0;
    Phase from = Phase::Explore;
    Phase to = Phase::Explore;
    std::string reason;
};

struct TickResult {
    StimCommand cmd = StimCommand::None;
    double turn_limit = std::numeric_limits<double>::infinity();
    std::optional<PhaseTransition> transition;
    std::optional<Classification> classification;
};

/// Three-phase search controller. Owns its strategy RNG; the caller
/// supplies poses (reference or IMU) and frames at the camera rate.
class Mission {
public:
    Mission(MissionConfig cfg, Rng rng);

    Phase phase() const { return phase_; }
    const MissionConfig& config() const { return cfg_; }
    const std::vector<MissionEvent>& events() const { return events_; }
    const std::vector<PhaseTransition>& transitions() const { return transitions_; }
    int give_ups() const { return give_ups_; }
    std::optional<Classification> outcome() const { return outcome_; }
    bool finished() const { return outcome_.has_value(); }
    const std::optional<RecaptureState>& recapture_state() const { return recapture_; }
    std::optional<Vec2> current_destination() const;
    int estimates_issued() const { return track_.estimates; }

    /// Begins directly in Approach (thermal-navigation trials).
    void start_in_approach(double t);

    /// Dispatches on the current phase. `frame` is non-null on camera ticks.
    TickResult tick(double t, const Pose& pose, const Arena& arena, const IrImage* frame);

    TickResult phase1_tick(double t, const Pose& pose, const Arena& arena, const FrameInfo* frame);
    TickResult phase2_tracking_tick(double t, const Pose& pose, const FrameInfo* frame);
    TickResult phase2_onboard_tick(double t, const Pose& pose, const FrameInfo* frame);
    TickResult phase3_tick(double t, const FrameInfo* frame);

private:
    enum class ApproachMode { Scan, Travel, AwaitFrame, Shuttle };

    struct TrackingState {
        ApproachMode mode = ApproachMode::Scan;
        Vec2 origin;
        Vec2 dest;
        Vec2 shuttle[2];
        int shuttle_index = 0;
        int estimates = 0;
        double scan_target = 0.0;
        bool scanning = false;
    };

    struct OnboardState {
        std::optional<double> target_yaw;
        double last_bearing = 0.0;
        bool seen = false;
        int misses = 0;
    };

    PhaseTransition transition(double t, Phase to, std::string reason);
    void enter_approach(double t);
    void log(double t, MissionEventType type, Vec2 at, Vec2 target = {}, std::string detail = {});
    void issue_estimate(double t, const Pose& pose, const BlobResult& blob);
    TickResult give_up(double t, const Pose& pose, std::string reason);

    MissionConfig cfg_;
    Rng rng_;
    Phase phase_ = Phase::Explore;
    double phase_start_ = 0.0;
    std::optional<Destination> dest_;
    TrackingState track_;
    OnboardState onboard_;
    std::optional<RecaptureState> recapture_;
    std::vector<MissionEvent> events_;
    std::vector<PhaseTransition> transitions_;
    int give_ups_ = 0;
    bool phase3_logged_ = false;
    bool skip_phase3_ = false;
    Arena arena_;
    std::optional<Classification> outcome_;
};

/// A complete mission scenario.
struct MissionScenario {
    World world;
    Pose start;
    MissionConfig config;
    CameraModel camera;
    MotionParams motion;
    GaitModel gait;
    double dt = 0.1;
    double time_budget = 1800.0;
    bool start_in_approach = false;
    /// Ends the run once the true position is within success_radius.
    std::optional<Vec2> success_point;
    double success_radius = 0.5;
    /// The controller sees the dead-reckoned position and IMU yaw instead
    /// of the reference pose.
    bool imu_localization = false;
};

enum class MissionOutcome { Human, NotHuman, NotFound, Reached };
std::string_view to_string(MissionOutcome o);

struct TransitionFrame {
    double t = 0.0;
    Phase to = Phase::Explore;
    IrImage frame;
};

struct MissionReport {
    std::uint64_t seed = 0;
    MissionOutcome outcome = MissionOutcome::NotFound;
    double end_time = 0.0;
    std::vector<PhaseTransition> timeline;
    std::vector<MissionEvent> events;
    /// True position at the tick each event was logged.
    std::vector<Vec2> event_true_positions;
    std::vector<TransitionFrame> frames;
    double path_length = 0.0;
    std::optional<double> success_time;
    /// True pose sampled once per second.
    std::vector<Pose> trajectory;
    std::vector<double> trajectory_t;
    double time_in_phase[3] = {0.0, 0.0, 0.0};
    int give_ups = 0;
    /// Kind of the source dominating the frame that was classified Human.
    std::optional<SourceKind> classified_kind;
    double final_imu_error = 0.0;
};

/// Runs the tick loop (locomotion at scenario.dt, camera at its rate)
/// until classification or the time budget is exhausted.
MissionReport run_mission(const MissionScenario& scenario, std::uint64_t seed);

/// Source contributing most in-band pixels to a noise-free view.
std::optional<SourceKind> dominant_source(const World& world, const Pose& pose,
                                          const CameraModel& cam, double t, double lo, double hi);

}  // namespace cyborg
