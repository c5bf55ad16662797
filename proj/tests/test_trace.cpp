#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "divgreen/trace.hpp"

using namespace divgreen;

namespace {

Region unit_box() { return Region::box({0, 0}, {1, 1}); }
Region tall_box() { return Region::box({0, -1}, {1, 1}); }

ScalarFn constant_one() {
    return {"1", [](Vec2) { return 1.0; }, [](Vec2) { return Vec2{}; }, 0};
}

CompactSet unit_circle() { return CompactSet::of_pieces({Piece::make_arc({0, 0}, 1, 0, 2 * pi)}); }

// int_0^{1/k} int_0^1 k y / (x^2 + y^2) dy dx = k int_0^{1/k} (1/2) ln(1 + 1/x^2) dx
double vortex_strip(double k) { return 0.5 * std::log1p(k * k) + k * std::atan(1 / k); }

// int_0^{1/k} int_{-1}^1 k x / (2 pi (x^2 + y^2)) dy dx = (k/pi) int_0^{1/k} arctan(1/x) dx
double source_strip(double k) { return (std::atan(k) + 0.5 * k * std::log1p(1 / (k * k))) / pi; }

// sin(pi x) sin(pi y) (c0 + sum_i a_i cos(b_i . x + phi_i)): zero on the boundary of the unit box
ScalarFn random_boundary_zero(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    double c0 = u(rng);
    std::vector<double> a(3), phi(3);
    std::vector<Vec2> b(3);
    for (int i = 0; i < 3; ++i) {
        a[i] = u(rng);
        phi[i] = pi * u(rng);
        b[i] = Vec2{3 * u(rng), 3 * u(rng)};
    }
    auto g = [=](Vec2 p) {
        double s = c0;
        for (int i = 0; i < 3; ++i) s += a[i] * std::cos(dot(b[i], p) + phi[i]);
        return s;
    };
    auto dg = [=](Vec2 p) {
        Vec2 s;
        for (int i = 0; i < 3; ++i) s -= b[i] * (a[i] * std::sin(dot(b[i], p) + phi[i]));
        return s;
    };
    ScalarFn f;
    f.name = "random";
    f.f = [=](Vec2 p) { return std::sin(pi * p.x) * std::sin(pi * p.y) * g(p); };
    f.grad = [=](Vec2 p) {
        double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
        Vec2 dw{pi * std::cos(pi * p.x) * sy, pi * sx * std::cos(pi * p.y)};
        return dw * g(p) + dg(p) * (sx * sy);
    };
    f.hess_bound = 200;
    return f;
}

}  // namespace

TEST(BallCover, Counts) {
    auto c = ball_cover(unit_circle(), pi / 4);
    EXPECT_LE(c.m, 9);
    for (double t = 0; t < 2 * pi; t += 0.01) {
        Vec2 x{std::cos(t), std::sin(t)};
        double d = HUGE_VAL;
        for (Vec2 z : c.centers) d = std::min(d, norm(x - z));
        EXPECT_LT(d, pi / 4);
    }
    EXPECT_LE(ball_cover(CompactSet::of_pieces({Piece::seg({0, 0}, {1, 0})}), 0.5).m, 3);
}

TEST(BallCover, RejectsDisconnectedSets) {
    auto two = CompactSet::of_pieces({Piece::seg({-1, -2}, {1, -2}), Piece::seg({-1, 2}, {1, 2})});
    EXPECT_FALSE(two.path_connected());
    try {
        ball_cover(two, 0.5);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "path-connected required");
    }
    EXPECT_FALSE(CompactSet::of_region(unite(Region::disk({0, 0}, 1), Region::disk({3, 0}, 1))).path_connected());
    EXPECT_TRUE(CompactSet::of_region(annulus({0, 0}, 0.5, 1)).path_connected());
}

TEST(Lipschitz, LinearQuotientIsTheSlope) {
    ScalarFn f{"lin", [](Vec2 p) { return 3 * p.x - 4 * p.y; }, [](Vec2) { return Vec2{3, -4}; }, 0};
    auto e = lipschitz_bound(f, unit_circle(), 0.2);
    EXPECT_NEAR(e.quotient, 5.0, 1e-3);
    EXPECT_EQ(e.C, 2.0 * (e.m + 2));
    EXPECT_NEAR(e.grad_sup, 5.0, 1e-12);
    EXPECT_TRUE(e.ok);
}

TEST(Lipschitz, SquareOnCircle) {
    ScalarFn f{"x^2", [](Vec2 p) { return p.x * p.x; }, [](Vec2 p) { return Vec2{2 * p.x, 0}; }, 2};
    auto e = lipschitz_bound(f, unit_circle(), 0.1);
    // sup of |2x| over the closed 0.1-neighborhood of the circle is 2.2
    EXPECT_LE(e.grad_sup, 2.2 + 2 * 0.1 / 16);
    EXPECT_GE(e.grad_sup, 2.19);
    EXPECT_LE(e.quotient, e.bound);
}

TEST(Lipschitz, SmoothFixturesOnCircleAndAnnulus) {
    auto fx = scalar_fixtures();
    ASSERT_EQ(fx.size(), 10u);
    for (const auto& f : fx) {
        auto c = lipschitz_bound(f, unit_circle(), 0.1);
        EXPECT_TRUE(c.ok) << f.name;
        auto a = lipschitz_bound(f, CompactSet::of_region(annulus({0, 0}, 0.5, 1)), 0.3);
        EXPECT_TRUE(a.ok) << f.name;
    }
}

TEST(Lipschitz, ConnectednessCannotBeDropped) {
    auto K = CompactSet::of_pieces({Piece::seg({-1, -2}, {1, -2}), Piece::seg({-1, 2}, {1, 2})});
    // 0 below y = -1, 1 above y = 1; flat on the 0.5-neighborhood of K, so its Hessian bound there is 0
    ScalarFn f{"step",
               [](Vec2 p) { return p.y >= 1 ? 1.0 : p.y <= -1 ? 0.0 : 0.5 * (1 + std::sin(pi * p.y / 2)); },
               [](Vec2 p) { return std::fabs(p.y) >= 1 ? Vec2{} : Vec2{0, 0.25 * pi * std::cos(pi * p.y / 2)}; },
               0};
    EXPECT_THROW(lipschitz_bound(f, K, 0.5), std::invalid_argument);
    auto e = lipschitz_bound(f, K, 0.5, false);
    EXPECT_EQ(e.grad_sup, 0.0);
    EXPECT_GT(e.quotient, 0.2);
    EXPECT_FALSE(e.ok);
}

TEST(SilhavyTrace, ConstantFunctionGivesDivergence) {
    auto t = silhavy_trace(fixture("polynomial"), unit_box(), constant_one());
    EXPECT_NEAR(t.value, 2.5, 1e-9);
    auto s = silhavy_trace(fixture("point-source", {{0.5, 0.5}, {}}), unit_box(), constant_one());
    EXPECT_NEAR(s.value, 1.0, 1e-12);
}

TEST(SilhavyTrace, BoundedByNormsOnAllFixtures) {
    ScalarFn g{"g", [](Vec2 p) { return std::cos(p.x) + p.y * p.y; },
               [](Vec2 p) { return Vec2{-std::sin(p.x), 2 * p.y}; }, 2};
    for (const auto& n : fixture_names()) {
        auto t = silhavy_trace(fixture(n), unit_box(), g);
        EXPECT_EQ(t.status, Status::converged) << n;
        EXPECT_TRUE(t.within_bound) << n << " " << t.value << " " << t.bound;
    }
}

TEST(SilhavyTrace, BoundaryZeroFunctionsGiveZero) {
    std::mt19937 rng(20240611);
    for (int i = 0; i < 20; ++i) {
        auto f = random_boundary_zero(rng);
        EXPECT_LE(std::fabs(silhavy_trace(fixture("vortex"), unit_box(), f).value), certificate_tol) << i;
    }
    auto f = random_boundary_zero(rng);
    EXPECT_LE(std::fabs(silhavy_trace(fixture("point-source"), unit_box(), f).value), certificate_tol);
}

TEST(SilhavyTrace, IndependentOfTheExtension) {
    ScalarFn f1{"g", [](Vec2 p) { return p.x * p.x + p.y; }, [](Vec2 p) { return Vec2{2 * p.x, 1}; }, 2};
    ScalarFn f2{"g+w",
                [](Vec2 p) { return p.x * p.x + p.y + std::sin(pi * p.x) * std::sin(pi * p.y) * (1 + p.x * p.y); },
                [](Vec2 p) {
                    double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y), m = 1 + p.x * p.y;
                    return Vec2{2 * p.x + pi * std::cos(pi * p.x) * sy * m + sx * sy * p.y,
                                1 + pi * sx * std::cos(pi * p.y) * m + sx * sy * p.x};
                },
                40};
    for (const char* n : {"vortex", "point-source", "point-source-at-edge", "linear"}) {
        double a = silhavy_trace(fixture(n), unit_box(), f1).value;
        double b = silhavy_trace(fixture(n), unit_box(), f2).value;
        EXPECT_NEAR(a, b, certificate_tol) << n;
    }
}

TEST(ShellLimit, VortexStripDiverges) {
    auto r = shell_gradient_limit(fixture("vortex"), unit_box(), constant_one(), RampKind::strip);
    EXPECT_EQ(r.result.status, Status::diverging);
    ASSERT_GE(r.values.size(), 3u);
    for (size_t i = 0; i < r.values.size(); ++i) {
        double k = r.ks[i];
        EXPECT_NEAR(r.values[i], vortex_strip(k), 1e-6 * vortex_strip(k)) << k;
        EXPECT_GE(r.values[i], 0.5 * std::log(k * k + 1));
        if (i > 0) EXPECT_GT(r.values[i], r.values[i - 1]);
    }
}

TEST(ShellLimit, PointSourceStripTendsToOneHalf) {
    auto r = shell_gradient_limit(fixture("point-source"), tall_box(), constant_one(), RampKind::strip);
    EXPECT_EQ(r.result.status, Status::converged);
    EXPECT_NEAR(r.result.value, 0.5, 1e-6);
    for (size_t i = 0; i < r.values.size(); ++i) {
        double k = r.ks[i];
        EXPECT_NEAR(r.values[i], source_strip(k), 1e-9) << k;
        EXPECT_LE(std::fabs(r.values[i] - 0.5), 1 / (2 * pi * k) + 1e-4) << k;
    }
}

TEST(ShellLimit, BoundaryRampGivesTheOutwardFlux) {
    ScaleSchedule s{0.1, 0.5, 20, 1e-7, 1e9, true};
    auto d = shell_gradient_limit(fixture("linear"), Region::disk({0, 0}, 1), constant_one(), RampKind::boundary_ramp, s);
    EXPECT_EQ(d.result.status, Status::converged);
    EXPECT_NEAR(d.result.value, 2 * pi, 1e-6);
    // int_{boundary} x (1, 0) . n over the unit box: only the right edge contributes
    ScalarFn x{"x", [](Vec2 p) { return p.x; }, [](Vec2) { return Vec2{1, 0}; }, 0};
    auto b = shell_gradient_limit(fixture("constant"), unit_box(), x, RampKind::boundary_ramp, s);
    EXPECT_NEAR(b.result.value, 1.0, 1e-6);
}

TEST(PurePart, Classification) {
    EXPECT_EQ(pure_part_detector(fixture("vortex"), unit_box()).classification, "pure-gradient-part-required");
    auto p = pure_part_detector(fixture("point-source"), tall_box());
    EXPECT_EQ(p.classification, "radon-representable");
    EXPECT_EQ(pure_part_detector(fixture("linear"), unit_box()).classification, "radon-representable");
}
