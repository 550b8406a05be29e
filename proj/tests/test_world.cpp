#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cyborg/rng.hpp"
#include "cyborg/world.hpp"

using namespace cyborg;

TEST(Angles, NormalizeWrapsIntoHalfOpenRange) {
    EXPECT_DOUBLE_EQ(normalize_angle(180.0), 180.0);
    EXPECT_DOUBLE_EQ(normalize_angle(-180.0), 180.0);
    EXPECT_DOUBLE_EQ(normalize_angle(540.0), 180.0);
    EXPECT_DOUBLE_EQ(normalize_angle(190.0), -170.0);
    EXPECT_DOUBLE_EQ(normalize_angle(-725.0), -5.0);
    EXPECT_THROW(normalize_angle(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
    EXPECT_THROW(normalize_angle(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(Angles, NormalizeIsIdempotentAndPreservesDirection) {
    Rng rng(7);
    for (int i = 0; i < 1000000; ++i) {
        const double a = rng.uniform(-5000.0, 5000.0);
        const double n = normalize_angle(a);
        ASSERT_GT(n, -180.0);
        ASSERT_LE(n, 180.0);
        ASSERT_DOUBLE_EQ(normalize_angle(n), n);
        ASSERT_NEAR(std::cos(deg2rad(a)), std::cos(deg2rad(n)), 1e-9);
        ASSERT_NEAR(std::sin(deg2rad(a)), std::sin(deg2rad(n)), 1e-9);
    }
}

TEST(Angles, HeadingVectorIsCounterClockwiseFromX) {
    const Vec2 n = heading_vector(90.0);
    EXPECT_NEAR(n.x, 0.0, 1e-12);
    EXPECT_NEAR(n.y, 1.0, 1e-12);
}

TEST(Arena, RejectsNonPositiveSize) {
    EXPECT_THROW(Arena(0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(Arena(1.0, -2.0), std::invalid_argument);
}

TEST(Arena, WallDistanceMatchesBruteForceSegments) {
    const Arena a(4.8, 6.6);
    Rng rng(3);
    auto seg = [](Vec2 p, Vec2 s0, Vec2 s1) {
        double best = 1e9;
        for (int k = 0; k <= 2000; ++k) {
            const double f = k / 2000.0;
            best = std::min(best, distance(p, s0 + f * (s1 - s0)));
        }
        return best;
    };
    for (int i = 0; i < 200; ++i) {
        const Vec2 p{rng.uniform(0.0, 4.8), rng.uniform(0.0, 6.6)};
        const double brute = std::min({seg(p, {0, 0}, {4.8, 0}), seg(p, {4.8, 0}, {4.8, 6.6}),
                                       seg(p, {4.8, 6.6}, {0, 6.6}), seg(p, {0, 6.6}, {0, 0})});
        ASSERT_NEAR(distance_to_nearest_wall(a, p), brute, 2e-3);
    }
}

TEST(Arena, InwardNormalPointsAwayFromClosestWall) {
    const Arena a(10.0, 10.0);
    const Vec2 left = inward_wall_normal(a, {0.05, 5.0});
    EXPECT_NEAR(left.x, 1.0, 1e-12);
    EXPECT_NEAR(left.y, 0.0, 1e-12);
    const Vec2 corner = inward_wall_normal(a, {0.0, 0.0});
    EXPECT_NEAR(corner.x, std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(corner.y, std::sqrt(0.5), 1e-12);
}

TEST(Coverage, SingleCellAndIdempotence) {
    CoverageGrid g(Arena(3.0, 2.0), 0.1);
    EXPECT_EQ(g.total_cells(), 600u);
    g.mark(Vec2{0.05, 0.05});
    EXPECT_DOUBLE_EQ(g.fraction(), 1.0 / 600.0);
    g.mark(Vec2{0.05, 0.05});
    EXPECT_DOUBLE_EQ(g.fraction(), 1.0 / 600.0);
    EXPECT_TRUE(g.visited(0, 0));
}

TEST(Coverage, EmptyFullAndPaperRegime) {
    CoverageGrid g(Arena(3.0, 2.0), 0.1);
    EXPECT_DOUBLE_EQ(g.fraction(), 0.0);
    int n = 0;
    for (int r = 0; r < 20; ++r) {
        for (int c = 0; c < 30; ++c) {
            if (n < 366) g.mark(Vec2{0.1 * c + 0.05, 0.1 * r + 0.05});
            ++n;
        }
    }
    EXPECT_DOUBLE_EQ(g.fraction(), 0.61);
    for (int r = 0; r < 20; ++r)
        for (int c = 0; c < 30; ++c) g.mark(Vec2{0.1 * c + 0.05, 0.1 * r + 0.05});
    EXPECT_DOUBLE_EQ(g.fraction(), 1.0);
}

TEST(Coverage, MonotoneUnderRandomMarks) {
    CoverageGrid g(Arena(20.0, 20.0), 0.15);
    Rng rng(11);
    double last = 0.0;
    for (int i = 0; i < 20000; ++i) {
        g = mark_coverage(g, Pose{rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0)});
        const double f = coverage_fraction(g);
        ASSERT_GE(f, last);
        ASSERT_LE(f, 1.0);
        last = f;
    }
}

TEST(Coverage, MarkOutsideThrows) {
    CoverageGrid g(Arena(1.0, 1.0), 0.1);
    EXPECT_THROW(g.mark(Vec2{1.5, 0.5}), OutOfBoundsError);
}

TEST(Sources, ActiveWindowIsHalfOpen) {
    ThermalSource s;
    s.active_from = 1.0;
    s.active_to = 2.0;
    EXPECT_FALSE(s.active_at(0.99));
    EXPECT_TRUE(s.active_at(1.0));
    EXPECT_FALSE(s.active_at(2.0));
}

TEST(Sources, ValidationRejectsBadGeometry) {
    World w;
    w.sources.push_back(make_human({1.0, 1.0}));
    EXPECT_NO_THROW(w.validate());
    w.sources.back().radius = -1.0;
    EXPECT_THROW(w.validate(), std::invalid_argument);
}

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
    Rng c(42), d(42);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(c.normal(), d.normal());
}

TEST(Rng, NormalMomentsMatch) {
    Rng rng(5);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal(2.0, 3.0);
        s += x;
        s2 += x * x;
    }
    const double m = s / n;
    EXPECT_NEAR(m, 2.0, 0.03);
    EXPECT_NEAR(std::sqrt(s2 / n - m * m), 3.0, 0.03);
}

TEST(Rng, VonMisesCircularMeanMatchesLocation) {
    Rng rng(9);
    for (double mu_deg : {0.0, 30.0, -100.0}) {
        double c = 0.0, s = 0.0;
        for (int i = 0; i < 100000; ++i) {
            const double x = rng.von_mises(deg2rad(mu_deg), 2.0);
            c += std::cos(x);
            s += std::sin(x);
        }
        EXPECT_NEAR(rad2deg(std::atan2(s, c)), mu_deg, 2.0);
    }
}

TEST(Rng, VonMisesMeanResultantLengthMatchesBesselRatio) {
    // Mean resultant length of von Mises(kappa) is I1(kappa) / I0(kappa).
    auto bessel = [](int order, double x) {
        double sum = 0.0;
        const int n = 20000;
        for (int k = 0; k < n; ++k) {
            const double th = (k + 0.5) * std::acos(-1.0) / n;
            sum += std::exp(x * std::cos(th)) * std::cos(order * th);
        }
        return sum / n;
    };
    const double kappa = 2.0;
    const double expected = bessel(1, kappa) / bessel(0, kappa);
    Rng rng(10);
    double c = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) c += std::cos(rng.von_mises(0.0, kappa));
    EXPECT_NEAR(c / n, expected, 0.005);
}
