#include <gtest/gtest.h>

#include <cmath>

#include "divgreen/normal.hpp"

using namespace divgreen;

namespace {

Region unit_disk() { return Region::disk({0, 0}, 1); }
Region unit_box() { return Region::box({0, 0}, {1, 1}); }
Region quarter_disk() { return intersect(Region::disk({0, 0}, 0.5), unit_box()); }
Region everything() { return Region::box({-5, -5}, {5, 5}); }

void expect_vec(Vec2 a, Vec2 b, double tol) {
    EXPECT_NEAR(a.x, b.x, tol);
    EXPECT_NEAR(a.y, b.y, tol);
}

}  // namespace

TEST(Approximation, OuterBoxGradientMassTendsToPerimeter) {
    auto na = make_approximation(unit_box(), ApproxKind::outer);
    EXPECT_TRUE(na.validity.bounded);
    // Steiner: (area of the outer parallel set - 1) k = 4 + pi / k
    for (auto [k, m] : na.validity.l1) EXPECT_NEAR(m, 4 + pi / k, 1e-9);
    EXPECT_NEAR(na.gradient_mass(1e3), 4.0, 1e-2);
}

TEST(Approximation, RampDiskBoundedByCircumference) {
    auto na = make_approximation(unit_disk(), ApproxKind::ramp);
    for (auto [k, m] : na.validity.l1) {
        EXPECT_LE(m, 2 * pi + 1e-12);
        EXPECT_NEAR(m, 2 * pi - 3 * pi / k, 1e-9);
    }
}

TEST(Approximation, CanonicalGradientMassMatchesPerimeter) {
    auto na = make_approximation(unit_box(), ApproxKind::canonical, {ScaleSchedule{0.125, 0.5, 20, 1e-6, 1e9, true}, 2});
    // straight edges carry the full unit normal once the kernel sees one edge only
    EXPECT_NEAR(na.validity.l1.back().second, 4.0, 0.2);
    EXPECT_LE(na.validity.l1.back().second, 4.0 + 1e-6);
}

TEST(Approximation, EtaRangeAndLimitFunction) {
    for (auto kind : {ApproxKind::outer, ApproxKind::inner, ApproxKind::ramp, ApproxKind::canonical}) {
        auto na = make_approximation(unit_box(), kind);
        for (Vec2 p : {Vec2{0.5, 0.5}, Vec2{0.02, 0.5}, Vec2{-0.02, 0.3}, Vec2{1.01, 1.01}}) {
            double e = na.eta(16, p);
            EXPECT_GE(e, -1e-12);
            EXPECT_LE(e, 1 + 1e-12);
        }
        EXPECT_EQ(na.chi({0.5, 0.5}), 1.0);
        EXPECT_EQ(na.chi({2, 2}), 0.0);
    }
    auto can = make_approximation(unit_box(), ApproxKind::canonical);
    EXPECT_NEAR(can.chi({0.5, 0}), 0.5, 1e-9);
    EXPECT_NEAR(can.chi({0, 0}), 0.25, 1e-9);
    EXPECT_NEAR(can.eta(64, {0.5, 0}), 0.5, 1e-9);
    EXPECT_EQ(make_approximation(unit_box(), ApproxKind::outer).chi({0.5, 0}), 1.0);
    EXPECT_EQ(make_approximation(unit_box(), ApproxKind::inner).chi({0.5, 0}), 0.0);
}

TEST(Approximation, MollifiedGradientMatchesDifferenceQuotient) {
    auto na = make_approximation(quarter_disk(), ApproxKind::canonical);
    const double k = 10, h = 1e-5;
    for (Vec2 p : {Vec2{0.45, 0.1}, Vec2{0.05, 0.2}, Vec2{0.33, 0.33}}) {
        Vec2 g = na.grad(k, p);
        double gx = (na.eta(k, p + Vec2{h, 0}) - na.eta(k, p - Vec2{h, 0})) / (2 * h);
        double gy = (na.eta(k, p + Vec2{0, h}) - na.eta(k, p - Vec2{0, h})) / (2 * h);
        EXPECT_NEAR(g.x, gx, 1e-4);
        EXPECT_NEAR(g.y, gy, 1e-4);
    }
}

TEST(Approximation, RejectsEmptyRegion) {
    EXPECT_THROW(make_approximation(Region::empty(), ApproxKind::outer), std::invalid_argument);
    EXPECT_THROW(parse_approx("sideways"), std::invalid_argument);
}

TEST(ShellMeasure, RampBoxExamples) {
    auto na = make_approximation(unit_box(), ApproxKind::ramp);
    auto nu = normal_measure_shell(na);
    auto right = eval(nu, Region::half_plane({-1, 0}, -0.75));
    EXPECT_TRUE(right.converged());
    expect_vec(right.value, {1, 0}, 1e-6);
    auto inside = eval(nu, Region::disk({0.5, 0.5}, 0.2));
    expect_vec(inside.value, {0, 0}, 1e-9);
    expect_vec(eval(nu, everything()).value, {0, 0}, 1e-6);
}

TEST(BoundaryMeasure, Examples) {
    auto outer = make_approximation(unit_box(), ApproxKind::outer);
    expect_vec(normal_measure_boundary(outer, Region::half_plane({-1, 0}, -0.5)), {1, 0}, 1e-12);
    expect_vec(normal_measure_boundary(outer, Region::disk({3, 3}, 0.5)), {0, 0}, 1e-15);
    auto can = make_approximation(unit_box(), ApproxKind::canonical);
    expect_vec(normal_measure_boundary(can, unit_box()), {0, 0}, 1e-12);
}

TEST(RouteAgreement, DiskAndQuarterDisk) {
    for (const auto& om : {unit_disk(), quarter_disk()})
        for (auto kind : {ApproxKind::outer, ApproxKind::inner}) {
            auto na = make_approximation(om, kind);
            for (const auto& B : {Region::half_plane({1, 0}, 0.2), Region::box({-2, 0.1}, {2, 0.3})}) {
                auto s = eval(normal_measure_shell(na), B);
                EXPECT_TRUE(s.converged());
                expect_vec(s.value, normal_measure_boundary(na, B), 1e-3);
            }
        }
}

TEST(RouteAgreement, ChordOracle) {
    // nu(x < 0.2) for the unit disk: the outward normal integrated over the arc x < 0.2
    auto na = make_approximation(unit_disk(), ApproxKind::outer);
    Vec2 b = normal_measure_boundary(na, Region::half_plane({1, 0}, 0.2));
    expect_vec(b, {-2 * std::sqrt(1 - 0.04), 0}, 1e-12);
}

TEST(Gauss, LinearFieldOnDiskWithRamp) {
    auto na = make_approximation(unit_disk(), ApproxKind::ramp);
    auto g = gauss_check_bounded(fixture("linear"), na);
    EXPECT_NEAR(g.lhs, 2 * pi, 1e-9);
    EXPECT_NEAR(g.rhs, 2 * pi, 1e-3);
    EXPECT_TRUE(g.pass);
}

TEST(Gauss, ConstantFieldBothSidesZero) {
    for (const auto& om : {unit_box(), quarter_disk()}) {
        auto g = gauss_check_bounded(fixture("constant"), make_approximation(om, ApproxKind::outer));
        EXPECT_EQ(g.lhs, 0.0);
        EXPECT_NEAR(g.rhs, 0.0, 1e-6);
        EXPECT_TRUE(g.pass);
    }
}

TEST(Gauss, PointSourceAtEdgeHalfWeight) {
    auto na = make_approximation(unit_box(), ApproxKind::canonical);
    auto g = gauss_check_bounded(fixture("point-source-at-edge"), na);
    EXPECT_NEAR(g.lhs, 0.5, 1e-9);
    EXPECT_NEAR(g.rhs, 0.5, 1e-3);
    EXPECT_TRUE(g.pass);
    EXPECT_FALSE(g.corner_atom);
}

TEST(Gauss, RejectsSingularCurves) {
    auto na = make_approximation(unit_box(), ApproxKind::outer);
    EXPECT_THROW(gauss_check_bounded(fixture("diag-tangential"), na), std::invalid_argument);
}

TEST(NormalTrace, EdgeFluxes) {
    auto na = make_approximation(unit_box(), ApproxKind::outer);
    auto tr = normal_trace_bounded(fixture("constant"), na);
    EXPECT_NEAR(eval(tr, Region::half_plane({-1, 0}, -0.75)).value, 1.0, 1e-6);
    EXPECT_NEAR(eval(tr, Region::half_plane({1, 0}, 0.25)).value, -1.0, 1e-6);
    EXPECT_NEAR(eval(tr, Region::disk({0.5, 0.5}, 0.2)).value, 0.0, 1e-12);
}

TEST(GaussBV, RightHalfIndicator) {
    auto na = make_approximation(unit_box(), ApproxKind::outer);
    SimpleFunction g{{{Region::half_plane({-1, 0}, -0.5), 1.0}}};
    auto r = gauss_bv_scalar(fixture("constant"), g, na);
    // interface term -int_{x=1/2} F.n_R = 1 on the left, edge flux 1 on the right
    EXPECT_NEAR(r.lhs, 1.0, 1e-9);
    EXPECT_NEAR(r.rhs, 1.0, 1e-6);
    EXPECT_TRUE(r.pass);
}

TEST(GaussBV, ConstantOneReducesToGauss) {
    auto na = make_approximation(unit_disk(), ApproxKind::outer);
    auto F = fixture("polynomial");
    SimpleFunction g{{{everything(), 1.0}}};
    auto bv = gauss_bv_scalar(F, g, na);
    auto plain = gauss_check_bounded(F, na);
    EXPECT_NEAR(bv.lhs, plain.lhs, 1e-9);
    EXPECT_NEAR(bv.rhs, plain.rhs, 1e-6);
    EXPECT_TRUE(bv.pass);
}

TEST(GaussBV, InteriorPieceHasNoTrace) {
    auto na = make_approximation(unit_box(), ApproxKind::outer);
    SimpleFunction g{{{Region::box({0.25, 0.25}, {0.75, 0.75}), 2.0}}};
    auto r = gauss_bv_scalar(fixture("linear"), g, na);
    EXPECT_NEAR(r.rhs, 0.0, 1e-12);
    EXPECT_NEAR(r.lhs, 0.0, 1e-9);
}

TEST(GaussBV, RejectsAtomOnInterface) {
    auto na = make_approximation(unit_box(), ApproxKind::outer);
    SimpleFunction g{{{Region::half_plane({-1, 0}, -0.5), 1.0}}};
    EXPECT_THROW(gauss_bv_scalar(fixture("point-source", {{0.5, 0.5}, {}}), g, na), std::invalid_argument);
}

TEST(TotalVariation, UnitBox) {
    auto na = make_approximation(unit_box(), ApproxKind::outer);
    auto all = tv_lowerbound_check(na, everything());
    EXPECT_TRUE(all.pass);
    EXPECT_GE(all.tv, 4 - 1e-2);
    auto corner = tv_lowerbound_check(na, Region::disk({0, 0}, 0.3));
    EXPECT_NEAR(corner.perimeter, 0.6, 1e-12);
    EXPECT_TRUE(corner.pass);
    auto none = tv_lowerbound_check(na, Region::disk({0.5, 0.5}, 0.2));
    EXPECT_EQ(none.perimeter, 0.0);
    EXPECT_NEAR(none.tv, 0.0, 1e-9);
}

TEST(Witness, AtomicClosedForm) {
    auto na = make_approximation(quarter_disk(), ApproxKind::outer);
    auto w = nonintegrability_witness(fixture("point-source"), na, WitnessKind::atomic, {10, 100, 1000});
    // int_0^{1/2} min(1/(2 pi t), M) dt = (1 + ln(pi M)) / (2 pi)
    for (size_t i = 0; i < w.values.size(); ++i)
        EXPECT_NEAR(w.values[i], (1 + std::log(pi * w.thresholds[i])) / (2 * pi), 1e-9);
    for (double inc : w.increments) EXPECT_NEAR(inc, std::log(10.0) / (2 * pi), 1e-9);
}

TEST(Witness, BoundedFieldIsIntegrable) {
    auto na = make_approximation(unit_box(), ApproxKind::outer);
    auto w = nonintegrability_witness(fixture("linear"), na, WitnessKind::atomic, {10});
    EXPECT_EQ(w.verdict, "integrable");
    EXPECT_TRUE(w.values.empty());
}

TEST(Witness, TangentialMassIsOneHalf) {
    // {x <= y} n B((1/2,1/2), 1/4): the diagonal inside the ball has length 1/2
    Region om = intersect(Region::half_plane(unit(Vec2{1, -1}), 0), Region::disk({0.5, 0.5}, 0.25));
    auto w = nonintegrability_witness(fixture("diag-tangential"), make_approximation(om, ApproxKind::outer),
                                      WitnessKind::tangential, {10, 100});
    EXPECT_EQ(w.verdict, "not-approximable-in-measure");
    for (double v : w.values) EXPECT_GE(v, 0.5 - certificate_tol);
}
