#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cyborg/harness.hpp"
#include "cyborg/imu.hpp"

using namespace cyborg;

namespace {

std::vector<Eigen::Vector3d> dyadic_window(Rng& rng, int n) {
    std::vector<Eigen::Vector3d> w(n);
    for (auto& a : w) {
        for (int i = 0; i < 3; ++i) a[i] = std::round(rng.uniform(-64.0, 64.0)) / 8.0;
    }
    return w;
}

std::vector<TimedPose> straight(double length, double duration, double yaw) {
    const Vec2 d = length * heading_vector(yaw);
    return {TimedPose{0.0, Pose{0.0, 0.0, 0.0, yaw}}, TimedPose{duration, Pose{d.x, d.y, 0.0, yaw}}};
}

}  // namespace

TEST(Variance, ExactlyInvariantToConstantBias) {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        auto w = dyadic_window(rng, 64);
        const double v0 = acceleration_variance(w);
        const Eigen::Vector3d bias(3.25, -9.8125, 0.5);
        for (auto& a : w) a += bias;
        ASSERT_EQ(acceleration_variance(w), v0);
    }
}

TEST(Variance, MatchesTextbookFormula) {
    Rng rng(2);
    for (int n : {2, 3, 17, 50}) {
        std::vector<Eigen::Vector3d> w(n);
        for (auto& a : w) a = Eigen::Vector3d(rng.normal(), rng.normal(0.0, 2.0), rng.normal(1.0, 0.5));
        long double total = 0.0L;
        for (int i = 0; i < 3; ++i) {
            long double s = 0.0L, s2 = 0.0L;
            for (const auto& a : w) {
                s += a[i];
                s2 += static_cast<long double>(a[i]) * a[i];
            }
            total += (s2 - s * s / n) / (n - 1);
        }
        EXPECT_NEAR(acceleration_variance(w), static_cast<double>(total), 1e-12) << n;
    }
    std::vector<Eigen::Vector3d> one{Eigen::Vector3d(1, 2, 3)};
    EXPECT_EQ(acceleration_variance(one), 0.0);
    EXPECT_EQ(estimate_speed(3.5, one), 0.0);
}

TEST(Variance, SpeedIsGainTimesVariance) {
    Rng rng(3);
    const auto w = dyadic_window(rng, 64);
    EXPECT_DOUBLE_EQ(estimate_speed(3.5, w), 3.5 * acceleration_variance(w));
}

TEST(Estimator, RecoversConstantSpeed) {
    GaitModel m;
    Rng rng(4);
    const auto samples = synth_gait(straight(3.0, 60.0, 0.0), m, rng);
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
    EXPECT_NEAR(sum / n, 0.05, 0.05 * 0.03);
}

TEST(Estimator, RejectsBadGain) {
    EXPECT_THROW(SpeedEstimator(0.0), std::invalid_argument);
    SpeedEstimator e(1.0);
    EXPECT_THROW(e.set_gain(-1.0), std::invalid_argument);
}

TEST(Integration, PlanarStepFollowsYaw) {
    DeadReckonState s;
    s = integrate_position(s, 0.1, orientation_from_euler(90.0, 0.0), 2.0);
    EXPECT_NEAR(s.position.x(), 0.0, 1e-12);
    EXPECT_NEAR(s.position.y(), 0.2, 1e-12);
    EXPECT_NEAR(s.traveled, 0.2, 1e-12);
}

TEST(Integration, SpatialModeClimbsPlanarDoesNot) {
    const auto q = orientation_from_euler(0.0, 30.0);
    const auto p = integrate_position({}, 1.0, q, 1.0, TrackMode::Planar);
    const auto s = integrate_position({}, 1.0, q, 1.0, TrackMode::Spatial);
    EXPECT_NEAR(p.position.z(), 0.0, 1e-12);
    EXPECT_NEAR(p.position.x(), std::cos(deg2rad(30.0)), 1e-12);
    EXPECT_NEAR(s.position.z(), 0.5, 1e-12);
    EXPECT_NEAR(s.position.norm(), 1.0, 1e-12);
}

TEST(Integration, NonUnitQuaternionWarnsAndIsNormalized) {
    Eigen::Quaterniond q = orientation_from_euler(0.0, 0.0);
    q.coeffs() *= 1.01;
    const auto s = integrate_position({}, 1.0, q, 1.0);
    EXPECT_EQ(s.orientation_warnings, 1);
    EXPECT_NEAR(s.position.x(), 1.0, 1e-12);
    EXPECT_THROW(integrate_position({}, 1.0, q, 0.0), std::invalid_argument);
}

TEST(Orientation, YawRoundTrip) {
    for (double yaw : {-170.0, -45.0, 0.0, 33.0, 179.0}) {
        EXPECT_NEAR(yaw_from_orientation(orientation_from_euler(yaw, 10.0, -5.0)), yaw, 1e-9);
    }
}

TEST(Reckoner, ResetRestartsClock) {
    DeadReckoner dr(3.5);
    ImuSample s;
    s.t = 5.0;
    dr.push(s);
    s.t = 6.0;
    dr.push(s);
    dr.reset(Eigen::Vector3d(1.0, 2.0, 0.0));
    s.t = 6.0;
    EXPECT_NO_THROW(dr.push(s));
    EXPECT_EQ(dr.state().position, Eigen::Vector3d(1.0, 2.0, 0.0));
    EXPECT_THROW(dr.push(s), std::invalid_argument);
}

TEST(Calibration, LiteralAndCorrective) {
    EXPECT_DOUBLE_EQ(calibrate_gain(1.1, 1.0, 3.5, CalibrationMode::Literal), 3.85);
    EXPECT_DOUBLE_EQ(calibrate_gain(1.1, 1.0, 3.5, CalibrationMode::Corrective), 3.5 / 1.1);
    EXPECT_THROW(calibrate_gain(0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(calibrate_gain(1.0, 1.0, -1.0), std::invalid_argument);
}

TEST(Calibration, CorrectiveRemovesDistanceBias) {
    GaitModel m;
    Rng rng(5);
    const auto samples = synth_gait(straight(3.0, 60.0, 0.0), m, rng);
    const auto ref = to_track(straight(3.0, 60.0, 0.0));
    const auto biased = run_imu_replay(samples, ref, 5.0);
    const double k = calibrate_gain(biased.positions.back().p.x(), 3.0, 5.0);
    const auto fixed = run_imu_replay(samples, ref, k);
    EXPECT_GT(biased.final_error_pct, 20.0);
    EXPECT_LT(fixed.final_error_pct, 3.0);
}

TEST(Replay, StraightWalkWithinThreePercent) {
    GaitModel m;
    for (std::uint64_t seed : {6u, 7u, 8u}) {
        Rng rng(seed);
        const auto path = straight(4.0, 80.0, 30.0);
        const auto r = run_imu_replay(synth_gait(path, m, rng), to_track(path), m.k_true);
        EXPECT_LE(r.final_error_pct, 3.0) << seed;
    }
}

TEST(Replay, SyntheticRoundTripWithinFivePercent) {
    GaitModel m;
    SyntheticWalk w;
    for (std::uint64_t seed : {9u, 10u, 11u}) {
        Rng rng(seed);
        const auto path = synthetic_walk(w, rng);
        const auto r = run_imu_replay(synth_gait(path, m, rng), to_track(path), m.k_true);
        EXPECT_LE(r.final_error_pct, 5.0) << seed;
        EXPECT_GT(r.reference_length, 1.0);
    }
}

TEST(Replay, SlopeNeedsSpatialMode) {
    GaitModel m;
    SyntheticWalk w;
    w.slope_deg = 8.0;
    Rng rng(12);
    const auto path = synthetic_walk(w, rng);
    const auto samples = synth_gait(path, m, rng);
    const auto planar = run_imu_replay(samples, to_track(path), m.k_true, TrackMode::Planar);
    const auto spatial = run_imu_replay(samples, to_track(path), m.k_true, TrackMode::Spatial);
    EXPECT_LT(spatial.final_error, planar.final_error);
}

TEST(ErrorSeries, ConstantOffsetAndSkippedGaps) {
    std::vector<TrackPoint> ref, est;
    for (int i = 0; i <= 4; ++i) {
        ref.push_back({double(i), Eigen::Vector3d(i, 0, 0), true});
        est.push_back({double(i), Eigen::Vector3d(i, 0.1, 0), true});
    }
    ref[2].valid = false;
    const auto e = error_series(est, ref);
    ASSERT_EQ(e.size(), 4u);
    EXPECT_DOUBLE_EQ(e[0].error_pct, 0.0);
    EXPECT_NEAR(e[2].t, 3.0, 0.0);
    EXPECT_NEAR(e[2].traveled, 3.0, 1e-12);
    EXPECT_NEAR(e[3].error, 0.1, 1e-12);
    EXPECT_NEAR(e[3].error_pct, 2.5, 1e-12);
}

TEST(ErrorSeries, InterpolatesBetweenEstimates) {
    std::vector<TrackPoint> est{{0.0, Eigen::Vector3d(0, 0, 0), true}, {2.0, Eigen::Vector3d(2, 0, 0), true}};
    std::vector<TrackPoint> ref{{1.0, Eigen::Vector3d(1, 0, 0), true}};
    EXPECT_NEAR(error_series(est, ref)[0].error, 0.0, 1e-12);
}

TEST(Csv, ImuRoundTrip) {
    GaitModel m;
    Rng rng(13);
    const auto samples = synth_gait(straight(0.5, 2.0, 10.0), m, rng);
    std::stringstream ss;
    write_imu_csv(ss, samples);
    const auto back = read_imu_csv(ss);
    ASSERT_EQ(back.size(), samples.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        ASSERT_EQ(back[i].t, samples[i].t);
        ASSERT_EQ(back[i].acc, samples[i].acc);
        ASSERT_EQ(back[i].orientation.coeffs(), samples[i].orientation.coeffs());
    }
}

TEST(Csv, ErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) {
        std::stringstream ss(text);
        try {
            read_imu_csv(ss);
        } catch (const CsvError& e) {
            return static_cast<int>(e.line());
        }
        return -1;
    };
    EXPECT_EQ(line_of("t,ax,ay,az,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n0.01,0,abc,0,1,0,0,0\n"), 3);
    EXPECT_EQ(line_of("0,0,0,0,1,0,0,0\n\n0,0,0,0,1,0,0,0\n"), 3);
    EXPECT_EQ(line_of("0,0,0,0,1,0,0\n"), 1);
    EXPECT_EQ(line_of("0,0,0,0,1,0,0,0\n"), -1);
}

TEST(Csv, TrackKeepsMissingMarkersAsInvalid) {
    std::stringstream ss("t,x,y,z\n0,0,0,0\n1,,,\n2,1,1,0\n");
    const auto t = read_track_csv(ss);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_FALSE(t[1].valid);
    EXPECT_TRUE(t[2].valid);
    std::stringstream bad("0,0,0,0\n1,x,0,0\n");
    EXPECT_THROW(read_track_csv(bad), CsvError);
}

TEST(Study, CalibratedTrialsStayAccurate) {
    ImuStudyConfig cfg;
    cfg.k_seed = 5.0;
    const auto s = run_imu_study(cfg, 4, 100, 1);
    for (const auto& t : s.trials) {
        EXPECT_NEAR(t.k, cfg.gait.k_true, 0.2);
        EXPECT_LE(t.final_error_pct, 5.0);
    }
    EXPECT_NO_THROW(check_aggregates(s));
}

TEST(Calibration, SecondCorrectivePassIsNearlyIdentity) {
    GaitModel m;
    m.noise_sd = 0.0;
    Rng rng(14);
    const auto path = straight(3.0, 60.0, 45.0);
    const auto samples = synth_gait(path, m, rng);
    const auto ref = to_track(path);
    auto measured = [&](double k) { return run_imu_replay(samples, ref, k).traveled.back(); };
    const double k1 = calibrate_gain(measured(5.0), 3.0, 5.0);
    const double k2 = calibrate_gain(measured(k1), 3.0, k1);
    EXPECT_LT(std::abs(k2 - k1) / k1, 0.02);
}
