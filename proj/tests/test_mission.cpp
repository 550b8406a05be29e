#include <gtest/gtest.h>

#include <cmath>

#include "cyborg/harness.hpp"
#include "cyborg/mission.hpp"

using namespace cyborg;

namespace {

FrameInfo frame_with(int in_band, int center, bool blob) {
    FrameInfo f;
    f.in_band = in_band;
    f.center = center;
    if (blob) f.blob = BlobResult{16, 16, -1.0, 21};
    return f;
}

// Frame with exactly n in-band pixels laid out row-major from the top left.
IrImage frame_with_pixels(int n, double temp = 33.0) {
    IrImage img(25.0);
    for (int i = 0; i < n; ++i) img.at(i % kIrSide + 1, i / kIrSide + 1) = temp;
    return img;
}

}  // namespace

TEST(Triggers, PixelCountsFromFractions) {
    EXPECT_EQ(fraction_to_pixels(0.008), 8);
    EXPECT_EQ(fraction_to_pixels(0.049), 50);
    EXPECT_EQ(fraction_to_pixels(0.002), 2);
    const auto c = MissionConfig::indoor();
    EXPECT_EQ(c.phase2_pixels(), 8);
    EXPECT_EQ(c.phase3_pixels(), 50);
}

struct IndoorCase {
    int in_band;
    bool phase2;
    bool phase3;
};

class IndoorThresholds : public ::testing::TestWithParam<IndoorCase> {};

TEST_P(IndoorThresholds, FireExactlyAtBoundaries) {
    const auto c = GetParam();
    const auto cfg = MissionConfig::indoor();
    const FrameInfo f = analyze_frame(frame_with_pixels(c.in_band), cfg);
    EXPECT_EQ(f.in_band, c.in_band);
    EXPECT_EQ(phase2_trigger(f, cfg), c.phase2);
    EXPECT_EQ(phase3_trigger(f, cfg), c.phase3);
    EXPECT_EQ(phase3_classify(f, cfg) == Classification::Human, c.phase3);
}

INSTANTIATE_TEST_SUITE_P(Table, IndoorThresholds,
                         ::testing::Values(IndoorCase{0, false, false}, IndoorCase{7, false, false},
                                           IndoorCase{8, true, false}, IndoorCase{49, true, false},
                                           IndoorCase{50, true, true}, IndoorCase{300, true, true}));

struct OutdoorCase {
    int in_band;
    int center;
    bool blob;
    bool fires;
};

class OutdoorThresholds : public ::testing::TestWithParam<OutdoorCase> {};

TEST_P(OutdoorThresholds, NeedBlobTotalAndCentre) {
    const auto c = GetParam();
    const auto cfg = MissionConfig::outdoor();
    const FrameInfo f = frame_with(c.in_band, c.center, c.blob);
    EXPECT_EQ(phase2_trigger(f, cfg), c.fires);
    EXPECT_EQ(phase3_trigger(f, cfg), c.fires);
    EXPECT_EQ(phase3_classify(f, cfg) == Classification::Human, c.fires);
}

INSTANTIATE_TEST_SUITE_P(Table, OutdoorThresholds,
                         ::testing::Values(OutdoorCase{25, 12, true, true}, OutdoorCase{24, 12, true, false},
                                           OutdoorCase{25, 11, true, false}, OutdoorCase{100, 25, false, false},
                                           OutdoorCase{100, 25, true, true}));

TEST(Triggers, OutdoorBandIgnoresWarmPavement) {
    const auto cfg = MissionConfig::outdoor();
    const FrameInfo f = analyze_frame(frame_with_pixels(400, 28.5), cfg);
    EXPECT_EQ(f.in_band, 0);
    EXPECT_FALSE(phase2_trigger(f, cfg));
}

TEST(Triggers, EstimationGateIsStrict) {
    const auto cfg = MissionConfig::indoor();
    EXPECT_FALSE(estimation_gate(frame_with(2, 0, true), cfg));
    EXPECT_TRUE(estimation_gate(frame_with(3, 0, true), cfg));
}

TEST(Triggers, CentreWindowCountsAroundBlob) {
    auto cfg = MissionConfig::indoor();
    IrImage img(25.0);
    for (int v = 14; v <= 18; ++v)
        for (int u = 6; u <= 10; ++u) img.at(u, v) = 34.0;
    const FrameInfo f = analyze_frame(img, cfg);
    ASSERT_TRUE(f.blob.has_value());
    EXPECT_EQ(f.in_band, 25);
    EXPECT_EQ(f.center, 25);
}

TEST(Steering, BandCommandPartition) {
    const auto cfg = MissionConfig::indoor();
    for (int u = 1; u <= 32; ++u) {
        const StimCommand want =
            u <= 10 ? StimCommand::TurnLeft : (u <= 22 ? StimCommand::Accelerate : StimCommand::TurnRight);
        EXPECT_EQ(band_command(u, cfg), want) << u;
    }
    EXPECT_THROW(band_command(0, cfg), std::out_of_range);
    EXPECT_THROW(band_command(33, cfg), std::out_of_range);
}

TEST(Phases, OnlyFlowchartEdges) {
    EXPECT_TRUE(transition_allowed(Phase::Explore, Phase::Approach));
    EXPECT_TRUE(transition_allowed(Phase::Approach, Phase::Classify));
    EXPECT_TRUE(transition_allowed(Phase::Approach, Phase::Explore));
    EXPECT_FALSE(transition_allowed(Phase::Explore, Phase::Classify));
    EXPECT_FALSE(transition_allowed(Phase::Classify, Phase::Explore));
    EXPECT_FALSE(transition_allowed(Phase::Classify, Phase::Approach));
}

TEST(Config, ValidationRejectsBadBands) {
    auto c = MissionConfig::indoor();
    c.left_max = 25;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = MissionConfig::indoor();
    c.band_hi = c.band_lo;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Recapture, DetectionEndsImmediately) {
    RecaptureState rec;
    const auto step = recapture(rec, 0.0, true, MissionConfig::indoor(), 0.1);
    EXPECT_TRUE(step.reacquired);
    EXPECT_FALSE(step.give_up);
}

TEST(Recapture, BackTurnThenSweepsThenGiveUp) {
    const auto cfg = MissionConfig::indoor();
    RecaptureState rec;
    rec.last_bearing = 60.0;
    double yaw = 0.0, lo = 1e9, hi = -1e9;
    bool saw_right = false, saw_left = false;
    int ticks = 0;
    for (; ticks < 10000; ++ticks) {
        const auto step = recapture(rec, yaw, ticks % 10 == 0 ? std::optional<bool>(false) : std::nullopt, cfg, 0.1);
        if (step.give_up) break;
        ASSERT_NE(step.cmd, StimCommand::None);
        const double d = step.cmd == StimCommand::TurnLeft ? step.turn_limit : -step.turn_limit;
        yaw = normalize_angle(yaw + d);
        if (rec.stage == RecaptureStage::SweepRight) saw_right = true;
        if (rec.stage == RecaptureStage::SweepLeft) saw_left = true;
        if (rec.stage != RecaptureStage::BackTurn) {
            lo = std::min(lo, normalize_angle(yaw - rec.sweep_origin));
            hi = std::max(hi, normalize_angle(yaw - rec.sweep_origin));
        }
    }
    EXPECT_LT(ticks, 10000);
    EXPECT_TRUE(saw_right);
    EXPECT_TRUE(saw_left);
    EXPECT_EQ(rec.stage, RecaptureStage::Exhausted);
    EXPECT_NEAR(rec.sweep_origin, 60.0, cfg.align_tolerance);
    EXPECT_NEAR(lo, -cfg.sweep_limit, 1e-6);
    EXPECT_NEAR(hi, cfg.sweep_limit, 1e-6);
    EXPECT_GT(rec.failed_reacquisitions, 0);
}

TEST(Recapture, SweepRespectsRateCap) {
    const auto cfg = MissionConfig::indoor();
    RecaptureState rec;
    rec.stage = RecaptureStage::SweepRight;
    const auto step = recapture(rec, 0.0, std::nullopt, cfg, 0.1);
    EXPECT_EQ(step.cmd, StimCommand::TurnRight);
    EXPECT_DOUBLE_EQ(step.turn_limit, cfg.sweep_rate * 0.1);
}

TEST(Controller, ExploreTransitionsOnTrigger) {
    Mission m(MissionConfig::indoor(), Rng(1));
    const Arena a(4.8, 6.6);
    const IrImage quiet(25.0);
    m.tick(0.0, Pose{2.0, 2.0}, a, &quiet);
    EXPECT_EQ(m.phase(), Phase::Explore);
    IrImage hot(25.0);
    for (int v = 14; v <= 17; ++v)
        for (int u = 14; u <= 17; ++u) hot.at(u, v) = 34.0;
    const auto r = m.tick(1.0, Pose{2.0, 2.0}, a, &hot);
    EXPECT_EQ(m.phase(), Phase::Approach);
    ASSERT_TRUE(r.transition.has_value());
    EXPECT_EQ(r.transition->from, Phase::Explore);
    EXPECT_EQ(r.transition->to, Phase::Approach);
}

TEST(Controller, TransitionsFollowFlowchartInFullRuns) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto rep = run_mission(indoor_mission_scenario(), seed);
        for (const auto& tr : rep.timeline) EXPECT_TRUE(transition_allowed(tr.from, tr.to));
        EXPECT_EQ(rep.outcome, MissionOutcome::Human) << seed;
        ASSERT_FALSE(rep.timeline.empty());
        EXPECT_EQ(rep.timeline.back().to, Phase::Classify);
    }
}

TEST(Controller, SameSeedSameRun) {
    const auto a = run_mission(indoor_mission_scenario(), 7);
    const auto b = run_mission(indoor_mission_scenario(), 7);
    EXPECT_EQ(to_json(a), to_json(b));
}

TEST(Names, RoundTrip) {
    EXPECT_EQ(environment_from_string(to_string(Environment::Outdoor)), Environment::Outdoor);
    EXPECT_EQ(nav_variant_from_string(to_string(NavVariant::Onboard)), NavVariant::Onboard);
    EXPECT_THROW(environment_from_string("space"), std::invalid_argument);
}

TEST(Controller, SingleFrameTransientNeverClassifiedHuman) {
    int approached = 0;
    for (int k = 0; k < 6; ++k) {
        MissionScenario sc = indoor_mission_scenario();
        ThermalSource air;
        air.kind = SourceKind::TransientAir;
        air.center = {1.4, 1.4};
        air.radius = 0.5;
        air.height = 1.0;
        air.surface_temp = 33.0;
        air.active_from = k + 0.5;
        air.active_to = k + 1.5;
        sc.world.sources = {air};
        sc.time_budget = 120.0;
        const auto rep = run_mission(sc, 100 + k);
        EXPECT_NE(rep.outcome, MissionOutcome::Human) << k;
        approached += !rep.timeline.empty();
    }
    EXPECT_GT(approached, 0);
}

TEST(Controller, TrackingArrivalsApproachTheSource) {
    const auto s = run_thermal_nav_study(ThermalNavConfig{}, 30, 900, 0);
    int decreasing = 0;
    for (const auto& t : s.trials) {
        bool ok = true;
        for (std::size_t i = 1; i < t.arrival_distances.size(); ++i)
            ok = ok && t.arrival_distances[i] < t.arrival_distances[i - 1];
        decreasing += ok;
    }
    EXPECT_GE(decreasing, 29);
}
