#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "divgreen/geometry.hpp"

using namespace divgreen;

namespace {

Region unit_disk() { return Region::disk({0, 0}, 1); }
Region unit_box() { return Region::box({0, 0}, {1, 1}); }
Region quarter_disk() { return intersect(Region::disk({0, 0}, 0.5), Region::box({0, 0}, {1, 1})); }

// dense sampling of the quarter-disk boundary, written out by hand
double sampled_quarter_distance(Vec2 p) {
    double best = HUGE_VAL;
    const int n = 200000;
    for (int i = 0; i <= n; ++i) {
        double t = 0.5 * i / n;
        best = std::min(best, norm(p - Vec2{t, 0}));
        best = std::min(best, norm(p - Vec2{0, t}));
        double th = 0.5 * pi * i / n;
        best = std::min(best, norm(p - Vec2{0.5 * std::cos(th), 0.5 * std::sin(th)}));
    }
    return best;
}

}  // namespace

TEST(Contains, Examples) {
    EXPECT_TRUE(unit_disk().contains({0, 0}));
    EXPECT_FALSE(unit_box().contains({2, 0}));
    Region r = subtract(unit_box(), Region::disk({0, 0}, 0.5));
    EXPECT_FALSE(r.contains({0.1, 0.1}));
    EXPECT_TRUE(r.contains({0.9, 0.9}));
}

TEST(SignedDistance, Examples) {
    EXPECT_NEAR(signed_distance(unit_disk(), {2, 0}).value, 1.0, 1e-15);
    EXPECT_NEAR(signed_distance(unit_box(), {0.5, 0.5}).value, -0.5, 1e-15);
    Vec2 p{-0.1, -0.1};
    auto sd = signed_distance(quarter_disk(), p);
    EXPECT_NEAR(sd.value, 0.1 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(sd.value, sampled_quarter_distance(p), 1e-6);
    EXPECT_FALSE(sd.approximate);
}

TEST(SignedDistance, CompositeMatchesSampling) {
    Region q = quarter_disk();
    for (Vec2 p : {Vec2{0.3, 0.6}, Vec2{0.2, 0.1}, Vec2{0.7, -0.2}, Vec2{0.4, 0.35}}) {
        double s = sampled_quarter_distance(p);
        EXPECT_NEAR(std::fabs(signed_distance(q, p).value), s, 1e-5) << p.x << "," << p.y;
    }
}

TEST(SignedDistance, SignAgreesWithMembership) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::vector<Region> rs{unit_disk(), unit_box(), quarter_disk(), subtract(unit_box(), Region::disk({0, 0}, 0.5))};
    for (const auto& r : rs)
        for (int i = 0; i < 500; ++i) {
            Vec2 p{u(rng), u(rng)};
            double d = signed_distance(r, p).value;
            if (std::fabs(d) < 1e-12) continue;
            EXPECT_EQ(r.contains(p), d < 0);
        }
}

TEST(Boundary, Disk) {
    auto bc = reduced_boundary(unit_disk());
    ASSERT_EQ(bc.pieces.size(), 1u);
    EXPECT_NEAR(bc.length(), 2 * pi, 1e-14);
    EXPECT_TRUE(bc.corners.empty());
}

TEST(Boundary, Box) {
    auto bc = reduced_boundary(unit_box());
    EXPECT_EQ(bc.pieces.size(), 4u);
    EXPECT_NEAR(bc.length(), 4.0, 1e-15);
    EXPECT_EQ(bc.corners.size(), 4u);
    for (const auto& p : bc.pieces) {
        // outward normals point away from the center
        Vec2 m = p.point(0.5 * p.length());
        EXPECT_GT(dot(p.normal(0.5 * p.length()), m - Vec2{0.5, 0.5}), 0);
    }
}

TEST(Boundary, QuarterDisk) {
    auto bc = reduced_boundary(quarter_disk());
    int segs = 0, arcs = 0;
    for (const auto& p : bc.pieces) {
        if (p.kind == Piece::segment) {
            ++segs;
            EXPECT_NEAR(p.length(), 0.5, 1e-15);
        } else {
            ++arcs;
            EXPECT_NEAR(p.length(), pi / 4, 1e-14);
        }
    }
    EXPECT_EQ(segs, 2);
    EXPECT_EQ(arcs, 1);
    EXPECT_EQ(bc.corners.size(), 3u);
    EXPECT_NEAR(perimeter(quarter_disk()), 1 + pi / 4, 1e-14);
}

TEST(Boundary, UnitNormalsAndLengthSum) {
    Region r = subtract(unit_box(), Region::disk({0, 0}, 0.5));
    auto bc = reduced_boundary(r);
    double sum = 0;
    for (const auto& p : bc.pieces) {
        sum += p.length();
        for (double f : {0.0, 0.3, 1.0}) EXPECT_NEAR(norm(p.normal(f * p.length())), 1.0, 1e-14);
    }
    EXPECT_NEAR(sum, bc.length(), 1e-15);
    EXPECT_NEAR(sum, 3.0 + pi / 4, 1e-13);
}

TEST(Boundary, CoincidentEdgesAreInterior) {
    Region r = unite(Region::box({0, 0}, {1, 1}), Region::box({1, 0}, {2, 1}));
    EXPECT_NEAR(perimeter(r), 6.0, 1e-13);
    EXPECT_NEAR(area(r), 2.0, 1e-14);
}

TEST(Perimeter, Window) {
    EXPECT_NEAR(perimeter(unit_disk()), 2 * pi, 1e-14);
    Region left = Region::half_plane({1, 0}, 0.5);
    EXPECT_NEAR(perimeter(unit_box(), left), 2.0, 1e-14);
    EXPECT_NEAR(perimeter(quarter_disk()), 1 + pi / 4, 1e-14);
}

TEST(Perimeter, AdditiveOverComplementaryWindows) {
    for (const auto& r : {unit_disk(), unit_box(), quarter_disk()}) {
        Region h = Region::half_plane({1, 1}, 0.3);
        Region hc = Region::half_plane({-1, -1}, -0.3);
        EXPECT_NEAR(perimeter(r, h) + perimeter(r, hc), perimeter(r), 1e-12);
    }
}

TEST(Area, GreenMatchesClosedForms) {
    EXPECT_NEAR(area(unit_disk()), pi, 1e-14);
    EXPECT_NEAR(area(unit_box()), 1.0, 1e-15);
    EXPECT_NEAR(area(quarter_disk()), pi / 16, 1e-15);
    EXPECT_NEAR(area(subtract(unit_box(), Region::disk({0, 0}, 0.5))), 1 - pi / 16, 1e-14);
    EXPECT_NEAR(area(sector({0, 0}, 1, 0, 1.5 * pi)), 0.75 * pi, 1e-14);
}

TEST(Area, InDiskMatchesCsg) {
    std::vector<Region> rs{unit_box(), quarter_disk(), subtract(unit_box(), Region::disk({0, 0}, 0.5))};
    for (const auto& r : rs)
        for (Vec2 c : {Vec2{0, 0}, Vec2{0.5, 0}, Vec2{0.4, 0.4}, Vec2{1, 1}})
            for (double rho : {0.05, 0.3, 0.8}) {
                double a = area_in_disk(r, c, rho);
                double b = area(intersect(r, Region::disk(c, rho)));
                EXPECT_NEAR(a, b, 1e-13);
            }
    // tiny radii keep full relative accuracy
    double rho = std::ldexp(1.0, -24);
    EXPECT_NEAR(area_in_disk(unit_box(), {0, 0.5}, rho) / (pi * rho * rho), 0.5, 1e-9);
    EXPECT_NEAR(area_in_disk(unit_box(), {0, 0}, rho) / (pi * rho * rho), 0.25, 1e-9);
}

TEST(Neighborhood, DiskAndBox) {
    auto n = neighborhood(unit_disk(), 0.5, Side::outer);
    EXPECT_NEAR(area(n.region), pi * 2.25, 1e-13);
    EXPECT_NEAR(perimeter(n.region), 3 * pi, 1e-13);
    auto b = neighborhood(unit_box(), 0.25, Side::inner);
    EXPECT_NEAR(area(b.region), 0.25, 1e-14);
    EXPECT_TRUE(b.region.contains({0.3, 0.7}));
    EXPECT_FALSE(b.region.contains({0.2, 0.5}));
    EXPECT_TRUE(neighborhood(unit_box(), 0.6, Side::inner).empty);
}

TEST(Neighborhood, QuarterDiskSteiner) {
    // convex set: area of the outer parallel set is A + P d + pi d^2
    double d = 0.1;
    auto n = neighborhood(quarter_disk(), d, Side::outer);
    double steiner = pi / 16 + (1 + pi / 4) * d + pi * d * d;
    EXPECT_GT(area(n.region), pi / 16);
    EXPECT_NEAR(area(n.region), steiner, 1e-12);
    EXPECT_NEAR(perimeter(n.region), 1 + pi / 4 + 2 * pi * d, 1e-12);
}

TEST(Neighborhood, CompositeInner) {
    // inner parallel set of the quarter disk is a smaller quarter disk shifted by d along the diagonal
    double d = 0.05;
    auto n = neighborhood(quarter_disk(), d, Side::inner);
    Region expect = intersect(Region::disk({0, 0}, 0.5 - d), Region::box({d, d}, {1, 1}));
    EXPECT_NEAR(area(n.region), area(expect), 1e-12);
}

TEST(ShellArea, Examples) {
    EXPECT_NEAR(shell_area(unit_disk(), 0.5, Side::outer), 2 * pi * 1.5, 1e-13);
    EXPECT_NEAR(shell_area(unit_box(), 0.1, Side::inner), 4 * 0.8, 1e-13);
    EXPECT_NEAR(shell_area(unit_box(), 0.1, Side::outer), 4 + 2 * pi * 0.1, 1e-12);
}

TEST(ShellArea, TendsToPerimeter) {
    for (const auto& r : {unit_disk(), unit_box(), quarter_disk()}) {
        auto lim = limit_extrapolate<double>([&](double d) { return shell_area(r, d, Side::outer); }, ScaleSchedule{});
        EXPECT_EQ(lim.status, Status::converged);
        EXPECT_NEAR(lim.value, perimeter(r), 1e-5);
    }
}

TEST(Classify, BoxPoints) {
    auto c = classify_point(unit_box(), {0.5, 0.5});
    EXPECT_EQ(c.kind, PointKind::interior);
    EXPECT_NEAR(c.density, 1.0, 1e-12);
    auto e = classify_point(unit_box(), {0.0, 0.5});
    EXPECT_EQ(e.kind, PointKind::reduced_boundary);
    EXPECT_NEAR(e.density, 0.5, 1e-9);
    EXPECT_NEAR(e.normal.x, -1, 1e-2);
    auto k = classify_point(unit_box(), {0, 0});
    EXPECT_EQ(k.kind, PointKind::other);
    EXPECT_NEAR(k.density, 0.25, 1e-9);
    EXPECT_EQ(classify_point(unit_box(), {3, 3}).kind, PointKind::exterior);
}

TEST(Classify, FlatEdgeDepthTwelve) {
    ScaleSchedule s;
    s.steps = 12;
    auto e = classify_point(unit_box(), {0.3, 1.0}, s);
    EXPECT_NEAR(e.density, 0.5, 1e-3);
}

TEST(Validate, TangentialContactRejected) {
    Region r = unite(Region::disk({0, 0}, 1), Region::disk({2, 0}, 1));
    EXPECT_THROW(validate_transversal(r), std::invalid_argument);
    EXPECT_NO_THROW(validate_transversal(unite(Region::disk({0, 0}, 1), Region::disk({1.5, 0}, 1))));
    EXPECT_THROW(validate_transversal(Region::half_plane({1, 0}, 0)), std::invalid_argument);
}
