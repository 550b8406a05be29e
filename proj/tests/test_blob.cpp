#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "blob_oracle.hpp"
#include "cyborg/blob.hpp"
#include "cyborg/rng.hpp"

using namespace cyborg;
using namespace oracle;

TEST(Filters, MedianMatchesSortOracle) {
    Rng rng(1);
    Grid g(N, N);
    for (double& x : g.values()) x = rng.uniform(0.0, 10.0);
    EXPECT_EQ(median3(g), naive_median(g));
}

TEST(Filters, MedianRemovesIsolatedSpike) {
    Grid g(N, N, 25.0);
    g(10, 10) = 80.0;
    EXPECT_EQ(median3(g), Grid(N, N, 25.0));
}

TEST(Filters, GaussianKernelCentreWeightAndSum) {
    const Grid raw = gaussian_kernel(21, 3.0, false);
    EXPECT_DOUBLE_EQ(raw(10, 10), 1.0 / (2.0 * std::acos(-1.0) * 9.0));
    const Grid k = gaussian_kernel(21, 3.0);
    double sum = 0.0;
    for (double w : k.values()) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_THROW(gaussian_kernel(20, 3.0), std::invalid_argument);
}

TEST(Filters, SmoothPreservesConstantsAndLaplacianKillsThem) {
    const Grid g(N, N, 7.5);
    const Grid s = gaussian_smooth(g, 33, 5.0);
    for (double x : s.values()) ASSERT_NEAR(x, 7.5, 1e-12);
    for (double x : laplacian3(s).values()) ASSERT_NEAR(x, 0.0, 1e-12);
}

TEST(Filters, ResponseAndGainMatchCompositeWeightOracle) {
    Rng rng(2);
    Grid g(N, N);
    for (double& x : g.values()) x = rng.uniform(20.0, 30.0);
    for (const auto& s : kBlobScales) {
        const OracleMaps m = oracle_maps(g, s);
        const Grid resp = blob_response(g, s, BlobParams{});
        const Grid& gain = blob_noise_gain(s);
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < N; ++c) {
                ASSERT_NEAR(resp(r, c), m.resp(r, c), 1e-10);
                ASSERT_NEAR(gain(r, c), m.gain(r, c), 1e-12);
            }
    }
}

TEST(Filters, BorderGainExceedsInterior) {
    const Grid& gain = blob_noise_gain(kBlobScales[0]);
    EXPECT_GT(gain(0, 0), gain(16, 16));
}

TEST(Detection, MatchesBruteForceOracleOnRandomScenes) {
    Rng rng(3);
    for (int i = 0; i < 12; ++i) {
        const IrImage img = blob_frame(rng, rng.uniform(1.0, 32.0), rng.uniform(1.0, 32.0), rng.uniform(1.0, 10.0),
                                       rng.uniform(0.8, 5.0), 0.3);
        for (bool norm : {false, true}) {
            BlobParams p;
            p.scale_normalized = norm;
            const auto got = detect_blob(img, p);
            const auto want = oracle_detect(img, p);
            ASSERT_EQ(got.has_value(), want.has_value()) << i;
            if (!got) continue;
            EXPECT_EQ(got->u, want->u) << i;
            EXPECT_EQ(got->v, want->v) << i;
            EXPECT_EQ(got->scale, want->scale) << i;
            EXPECT_NEAR(got->response, want->response, 1e-9) << i;
        }
    }
}

TEST(Detection, FindsPlantedBlobNearItsCentre) {
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const double u0 = rng.uniform(6.0, 27.0), v0 = rng.uniform(6.0, 27.0);
        const auto b = detect_blob(blob_frame(rng, u0, v0, 8.0, 2.0, 0.3));
        ASSERT_TRUE(b.has_value());
        EXPECT_LE(std::abs(b->u - u0), 1.5);
        EXPECT_LE(std::abs(b->v - v0), 1.5);
    }
}

TEST(Detection, NoiseOnlyFramesRaiseNoAlarm) {
    Rng rng(5);
    int alarms = 0;
    for (int i = 0; i < 200; ++i) alarms += detect_blob(blob_frame(rng, 0, 0, 0.0, 1.0, 0.3)).has_value();
    EXPECT_EQ(alarms, 0);
}

TEST(Detection, FlatFrameHasNoBlob) { EXPECT_FALSE(detect_blob(IrImage(25.0)).has_value()); }

TEST(Detection, MirroredTwinBlobsPickOneOfThem) {
    IrImage img(25.0);
    auto bump = [](int u, int v, double u0) {
        return 6.0 * std::exp(-((u - u0) * (u - u0) + (v - 16.0) * (v - 16.0)) / 2.0);
    };
    for (int v = 1; v <= N; ++v)
        for (int u = 1; u <= N; ++u) img.at(u, v) = 25.0 + bump(u, v, 10.0) + bump(u, v, 23.0);
    const auto b = detect_blob(img);
    ASSERT_TRUE(b.has_value());
    EXPECT_TRUE(b->u == 10 || b->u == 23);
    EXPECT_EQ(b->v, 16);
    EXPECT_EQ(b->scale, 21);
}

TEST(Bearing, PixelAngleEndpoints) {
    EXPECT_DOUBLE_EQ(pixel_to_angle(1), 0.0);
    EXPECT_DOUBLE_EQ(pixel_to_angle(32), 90.0);
    EXPECT_THROW(pixel_to_angle(0), std::out_of_range);
    EXPECT_THROW(pixel_to_angle(33), std::out_of_range);
    EXPECT_DOUBLE_EQ(column_to_estimate_angle(1), 90.0);
    EXPECT_DOUBLE_EQ(column_to_estimate_angle(32), 0.0);
}

TEST(Bearing, EstimateTargetExamples) {
    const auto e = estimate_target(Pose{1.0, 2.0, 0.0, 90.0}, 45.0, 2.0);
    EXPECT_NEAR(e.upsilon, 90.0, 1e-12);
    EXPECT_NEAR(e.x, 1.0, 1e-12);
    EXPECT_NEAR(e.y, 4.0, 1e-12);
    const auto r = estimate_target(Pose{0.0, 0.0, 0.0, 0.0}, 0.0, 1.0);
    EXPECT_NEAR(r.x, std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(r.y, -std::sqrt(0.5), 1e-12);
    EXPECT_THROW(estimate_target(Pose{}, 91.0, 1.0), std::invalid_argument);
    EXPECT_THROW(estimate_target(Pose{}, 10.0, 0.0), std::invalid_argument);
}

TEST(Bearing, ColumnEstimateAgreesWithRenderedBearing) {
    CameraModel cam;
    for (int u = 1; u <= N; ++u) {
        const auto e = estimate_target(Pose{0, 0, 0, 30.0}, column_to_estimate_angle(u), 1.0);
        EXPECT_NEAR(e.upsilon, 30.0 + column_bearing_offset(u, cam), 1e-9) << u;
    }
}

TEST(Bearing, DetectedSourceBearingWithinOnePixel) {
    World w;
    w.arena = Arena(10.0, 10.0);
    w.sources = {make_human({3.5, 7.0})};
    CameraModel cam;
    Rng rng(7);
    const Pose p{5.0, 2.0, 0.0, 90.0};
    const auto b = detect_blob(render_ir(w, p, cam, rng));
    ASSERT_TRUE(b.has_value());
    const auto e = estimate_target(p, column_to_estimate_angle(b->u), 1.0);
    const double truth = rad2deg(std::atan2(7.0 - 2.0, 3.5 - 5.0));
    EXPECT_LE(std::abs(normalize_angle(e.upsilon - truth)), 90.0 / 31.0 * 1.5);
}

TEST(Bearing, TargetRotatesWithHeading) {
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        const Pose p{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), 0.0, rng.uniform(-180.0, 180.0)};
        const double alpha = rng.uniform(0.0, 90.0), step = rng.uniform(0.1, 3.0), delta = rng.uniform(-180.0, 180.0);
        Pose q = p;
        q.yaw += delta;
        const Vec2 a = estimate_target(p, alpha, step).position() - p.position();
        const Vec2 b = estimate_target(q, alpha, step).position() - p.position();
        const double c = std::cos(deg2rad(delta)), s = std::sin(deg2rad(delta));
        ASSERT_NEAR(b.x, c * a.x - s * a.y, 1e-9);
        ASSERT_NEAR(b.y, s * a.x + c * a.y, 1e-9);
    }
}

TEST(Detection, HotterSecondSpotWinsOrIsIgnored) {
    Rng rng(9);
    auto spot = [](IrImage& img, double u0, double v0, double amp) {
        for (int v = 1; v <= N; ++v)
            for (int u = 1; u <= N; ++u)
                img.at(u, v) += amp * std::exp(-((u - u0) * (u - u0) + (v - v0) * (v - v0)) / (2.0 * 1.5 * 1.5));
    };
    auto near = [](const BlobResult& r, const BlobResult& s) {
        return std::abs(r.u - s.u) <= 1 && std::abs(r.v - s.v) <= 1;
    };
    for (int i = 0; i < 40; ++i) {
        const double ua = rng.uniform(5.0, 28.0), va = rng.uniform(5.0, 28.0);
        double ub, vb;
        do {
            ub = rng.uniform(5.0, 28.0);
            vb = rng.uniform(5.0, 28.0);
        } while (std::hypot(ub - ua, vb - va) < 12.0);
        const double amp_a = rng.uniform(3.0, 8.0);
        const double amp_b = amp_a + rng.uniform(0.5, 4.0);
        IrImage a(25.0), b(25.0), both(25.0);
        spot(a, ua, va, amp_a);
        spot(b, ub, vb, amp_b);
        spot(both, ua, va, amp_a);
        spot(both, ub, vb, amp_b);
        const auto ra = detect_blob(a), rb = detect_blob(b), r = detect_blob(both);
        ASSERT_TRUE(ra && rb && r);
        EXPECT_TRUE(near(*r, *ra) || near(*r, *rb)) << i;
    }
}
