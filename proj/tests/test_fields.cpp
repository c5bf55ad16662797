#include <gtest/gtest.h>

#include <cmath>

#include "divgreen/fields.hpp"

using namespace divgreen;

namespace {

Region unit_disk() { return Region::disk({0, 0}, 1); }
Region unit_box() { return Region::box({0, 0}, {1, 1}); }

double one(Vec2) { return 1.0; }

}  // namespace

TEST(Fixture, Catalog) {
    for (const auto& n : fixture_names()) {
        auto f = fixture(n);
        EXPECT_EQ(f.name, n);
        Vec2 v = f({0.3, 0.7});
        EXPECT_TRUE(std::isfinite(v.x) && std::isfinite(v.y)) << n;
    }
    EXPECT_THROW(fixture("nope"), std::invalid_argument);
}

TEST(Fixture, PointSourceValues) {
    auto f = fixture("point-source");
    Vec2 v = f({2, 0});
    EXPECT_NEAR(v.x, 1 / (4 * pi), 1e-15);
    EXPECT_EQ(v.y, 0.0);
    ASSERT_EQ(f.div.atoms.size(), 1u);
    EXPECT_EQ(f.div.atoms[0].weight, 1.0);
    auto v2 = fixture("vortex")({0, 2});
    EXPECT_NEAR(v2.x, 0.5, 1e-15);
    EXPECT_NEAR(v2.y, 0.0, 1e-15);
}

TEST(WeakDivergence, VortexIsDivergenceFree) {
    auto F = fixture("vortex");
    Region ambient = Region::disk({0, 0}, 2);
    auto tests = bump_basis(ambient);
    tests.push_back({{0, 0}, 0.5});
    tests.push_back({{0.1, -0.05}, 0.4});
    auto r = verify_weak_divergence(F, ambient, tests, 1e-4);
    EXPECT_TRUE(r.pass) << r.max_residual;
    EXPECT_LE(r.max_residual, 1e-4);
}

TEST(WeakDivergence, PointSourceFlux) {
    auto F = fixture("point-source");
    Region ambient = Region::disk({0, 0}, 2);
    TestFunction off{{0.2, 0.1}, 0.6};
    auto r = verify_weak_divergence(F, ambient, {{{0, 0}, 0.5}, off});
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.flux[0], -1.0, 1e-3);
    EXPECT_NEAR(r.flux[1], -off({0, 0}), 1e-3);
}

TEST(WeakDivergence, AllFixturesOnBumpBasis) {
    for (const auto& n : fixture_names()) {
        auto F = fixture(n, {{0.5, 0.5}, {1, -2}});
        Region ambient = Region::box({-0.5, -0.5}, {1.5, 1.5});
        auto r = verify_weak_divergence(F, ambient, bump_basis(ambient));
        EXPECT_TRUE(r.pass) << n << " " << r.max_residual;
    }
}

TEST(WeakDivergence, WrongDeclarationFails) {
    auto F = fixture("linear");
    F.div.density = [](Vec2) { return 1.0; };
    auto r = verify_weak_divergence(F, unit_box(), bump_basis(unit_box()));
    EXPECT_FALSE(r.pass);
}

TEST(WeakDivergence, RejectsTestsReachingTheBoundary) {
    EXPECT_THROW(verify_weak_divergence(fixture("constant"), unit_box(), {{{0.1, 0.5}, 0.3}}), std::invalid_argument);
}

TEST(DMNorm, Examples) {
    auto c = dm_norm(fixture("constant"), unit_box(), Integrability::L1);
    EXPECT_NEAR(c.value, 1.0, 1e-12);
    // int_0^1 (1/2 pi r) 2 pi r dr + atom mass
    auto p = dm_norm(fixture("point-source"), unit_disk(), Integrability::L1);
    EXPECT_EQ(p.status, Status::converged);
    EXPECT_NEAR(p.value, 2.0, 1e-6);
    // int_{1/2}^1 (1/r) 2 pi r dr
    auto v = dm_norm(fixture("vortex"), annulus({0, 0}, 0.5, 1), Integrability::L1);
    EXPECT_NEAR(v.value, pi, 1e-8);
    auto l = dm_norm(fixture("linear"), unit_box(), Integrability::Linf);
    EXPECT_NEAR(l.lp, std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(l.tv, 2.0, 1e-10);
}

TEST(DMNorm, MonotoneUnderInclusion) {
    auto F = fixture("polynomial");
    double small = dm_norm(F, Region::box({0, 0}, {0.5, 0.5}), Integrability::L1).value;
    double big = dm_norm(F, unit_box(), Integrability::L1).value;
    EXPECT_LE(small, big);
}

TEST(DivergenceOf, AtomWeights) {
    FieldParams inside{{0.5, 0.5}, {}};
    auto half = [](Vec2 x) { return classify_point(unit_box(), x).density; };
    EXPECT_NEAR(divergence_of(fixture("point-source", inside), unit_box(), one).value, 1.0, 1e-15);
    auto e = divergence_of(fixture("point-source-at-edge"), unit_box(), half);
    EXPECT_NEAR(e.value, 0.5, 1e-9);
    EXPECT_FALSE(e.corner_atom);
    FieldParams outside{{3, 3}, {}};
    auto zero = [](Vec2 x) { return unit_box().contains(x) ? 1.0 : 0.0; };
    EXPECT_EQ(divergence_of(fixture("point-source", outside), unit_box(), zero).value, 0.0);
    auto c = divergence_of(fixture("point-source"), unit_box(), half);
    EXPECT_TRUE(c.corner_atom);
    EXPECT_NEAR(c.value, 0.25, 1e-9);
}

TEST(DivergenceOf, AdditiveOverDisjointRegions) {
    auto F = fixture("polynomial");
    Region a = Region::box({0, 0}, {0.5, 1}), b = Region::box({0.5, 0}, {1, 1});
    double whole = divergence_of(F, unit_box(), one).value;
    EXPECT_NEAR(divergence_of(F, a, one).value + divergence_of(F, b, one).value, whole, 1e-10);
    // int_{[0,1]^2} 2x + 2xy + 1 = 1 + 1/2 + 1
    EXPECT_NEAR(whole, 2.5, 1e-10);
}
