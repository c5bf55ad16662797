#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "divgreen/geometry.hpp"
#include "divgreen/limit.hpp"
#include "divgreen/quad.hpp"

namespace divgreen {

struct Atom {
    Vec2 p;
    double weight = 0;
};

struct CurvePart {
    BoundaryCurve curve;
    std::function<double(Vec2)> density;
};

struct DivergenceMeasure {
    std::function<double(Vec2)> density;  // absolutely continuous part; empty means zero
    std::vector<Atom> atoms;
    std::vector<CurvePart> curves;
};

enum class Integrability { L1, Linf };

struct DMField {
    std::string name;
    std::function<Vec2(Vec2)> F;
    std::vector<Vec2> singular_points;
    std::vector<Piece> singular_curves;
    DivergenceMeasure div;
    Integrability p = Integrability::Linf;
    double sup_norm = HUGE_VAL;  // bound on |F| away from the singular set; finite for Linf fields

    Vec2 operator()(Vec2 x) const { return F(x); }
    bool bounded() const { return singular_points.empty() && singular_curves.empty(); }
};

struct FieldParams {
    Vec2 center{0, 0};
    Vec2 vector{1, 0};
};

inline const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names{"vortex",   "point-source", "point-source-at-edge", "diag-tangential",
                                                "constant", "linear",       "polynomial"};
    return names;
}

inline DMField fixture(const std::string& name, const FieldParams& prm = {}) {
    DMField f;
    f.name = name;
    const Vec2 c = prm.center;
    if (name == "vortex") {
        f.F = [c](Vec2 x) {
            Vec2 z = x - c;
            double r2 = norm2(z);
            return Vec2{z.y / r2, -z.x / r2};
        };
        f.singular_points = {c};
        f.p = Integrability::L1;
    } else if (name == "point-source" || name == "point-source-at-edge") {
        Vec2 s = name == "point-source" ? c : Vec2{0.5, 0.0};
        f.F = [s](Vec2 x) {
            Vec2 z = x - s;
            return z / (2 * pi * norm2(z));
        };
        f.singular_points = {s};
        f.div.atoms = {{s, 1.0}};
        f.p = Integrability::L1;
    } else if (name == "diag-tangential") {
        f.F = [](Vec2 x) {
            double g = 1 / std::sqrt(std::fabs(x.x - x.y));
            return Vec2{g, g};
        };
        f.singular_curves = {Piece::seg({-64, -64}, {64, 64})};  // the diagonal line, truncated far out
        f.p = Integrability::L1;
    } else if (name == "constant") {
        Vec2 v = prm.vector;
        f.F = [v](Vec2) { return v; };
        f.sup_norm = norm(v);
    } else if (name == "linear") {
        f.F = [](Vec2 x) { return x; };
        f.div.density = [](Vec2) { return 2.0; };
    } else if (name == "polynomial") {
        f.F = [](Vec2 x) { return Vec2{x.x * x.x - x.y * x.y * x.y, x.x * x.y * x.y + x.y}; };
        f.div.density = [](Vec2 x) { return 2 * x.x + 2 * x.x * x.y + 1; };
    } else {
        throw std::invalid_argument("unknown field fixture: " + name);
    }
    return f;
}

// ---- integration with the field's singular set --------------------------------------------------

struct FieldQuad {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    ScaleSchedule excision{0.125, 0.5, 24, 1e-7, 1e12, true};
};

// Integral over r of an integrand singular on the field's singular set. Point singularities are
// declared to the region quadrature; singular curves are excised by a tube whose width tends to zero.
template <class T, class G>
QuadResult<T> integrate_with_singularities(G&& g, const Region& r, const DMField& F, const FieldQuad& o = {}) {
    RegionQuad q;
    q.abs_tol = o.abs_tol;
    q.rel_tol = o.rel_tol;
    q.singular_points = F.singular_points;
    if (F.singular_curves.empty()) return integrate_region_checked<T>(g, r, q);
    BoundaryCurve sc{F.singular_curves, {}};
    const double size = r.bbox().size();
    auto lim = limit_extrapolate<T>(
        [&](double eps) { return integrate_region<T>(g, subtract(r, tubes(sc, eps * size)), q).value; }, o.excision);
    QuadResult<T> out;
    out.value = lim.value;
    out.error = lim.error_bound;
    out.status = lim.status;
    return out;
}

// ---- weak divergence ----------------------------------------------------------------------------

// Smooth bump supported in the disk B(c, rho), equal to 1 at c.
struct TestFunction {
    Vec2 c;
    double rho = 1;

    double operator()(Vec2 x) const {
        double s = norm2(x - c) / (rho * rho);
        return s < 1 ? std::exp(1 - 1 / (1 - s)) : 0.0;
    }
    Vec2 grad(Vec2 x) const {
        Vec2 z = x - c;
        double s = norm2(z) / (rho * rho);
        if (s >= 1) return {};
        double e = std::exp(1 - 1 / (1 - s));
        return z * (-2 * e / ((1 - s) * (1 - s) * rho * rho));
    }
    Region support() const { return Region::disk(c, rho); }
};

// 3x3 grid of bumps inside the bounding box, radius min(w, h)/8
inline std::vector<TestFunction> bump_basis(const Region& ambient) {
    BBox bb = ambient.bbox();
    double w = bb.hi.x - bb.lo.x, h = bb.hi.y - bb.lo.y;
    double rho = std::min(w, h) / 8;
    std::vector<TestFunction> out;
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) out.push_back({{bb.lo.x + 0.25 * i * w, bb.lo.y + 0.25 * j * h}, rho});
    return out;
}

// integral of phi against the declared divergence measure over the region
template <class Phi>
QuadResult<double> integrate_against_divergence(const Phi& phi, const DMField& F, const Region& r) {
    QuadResult<double> out;
    if (F.div.density) {
        RegionQuad q;
        q.abs_tol = 1e-11;
        q.rel_tol = 1e-11;
        auto v = integrate_region<double>([&](Vec2 x) { return phi(x) * F.div.density(x); }, r, q);
        out.value += v.value;
        out.error += v.error;
        out.status = worst(out.status, v.status);
    }
    for (const auto& a : F.div.atoms)
        if (r.contains(a.p)) out.value += a.weight * phi(a.p);
    for (const auto& cp : F.div.curves) {
        auto v = integrate_curve<double>([&](Vec2 x, Vec2) { return phi(x) * cp.density(x); }, clip(cp.curve, r));
        out.value += v.value;
        out.error += v.error;
        out.status = worst(out.status, v.status);
    }
    return out;
}

struct WeakDivergenceReport {
    std::vector<double> residuals;
    std::vector<double> flux;  // int F . D phi
    std::vector<Status> statuses;
    double max_residual = 0;
    bool pass = false;
};

inline WeakDivergenceReport verify_weak_divergence(const DMField& F, const Region& ambient,
                                                   const std::vector<TestFunction>& tests, double tol = 1e-3) {
    WeakDivergenceReport rep;
    rep.pass = true;
    for (const auto& phi : tests) {
        Region supp = phi.support();
        if (!contained_in(supp, ambient, 1e-14)) throw std::invalid_argument("test function must vanish near the boundary");
        auto lhs = integrate_with_singularities<double>([&](Vec2 x) { return dot(F(x), phi.grad(x)); }, supp, F);
        auto rhs = integrate_against_divergence(phi, F, supp);
        double res = std::fabs(lhs.value + rhs.value);
        Status st = worst(lhs.status, rhs.status);
        rep.flux.push_back(lhs.value);
        rep.residuals.push_back(res);
        rep.statuses.push_back(st);
        rep.max_residual = std::max(rep.max_residual, res);
        if (!(res <= tol) || st != Status::converged) rep.pass = false;
    }
    return rep;
}

// ---- norms and divergence values ----------------------------------------------------------------

struct NormValue {
    double value = 0;
    double lp = 0;
    double tv = 0;
    Status status = Status::converged;
};

// total variation of the declared divergence measure on r
inline QuadResult<double> divergence_variation(const DMField& F, const Region& r) {
    QuadResult<double> out;
    if (F.div.density) {
        RegionQuad q;
        q.abs_tol = 1e-11;
        q.rel_tol = 1e-11;
        auto v = integrate_region<double>([&](Vec2 x) { return std::fabs(F.div.density(x)); }, r, q);
        out.value += v.value;
        out.status = worst(out.status, v.status);
    }
    for (const auto& a : F.div.atoms)
        if (r.contains(a.p)) out.value += std::fabs(a.weight);
    for (const auto& cp : F.div.curves)
        out.value +=
            integrate_curve<double>([&](Vec2 x, Vec2) { return std::fabs(cp.density(x)); }, clip(cp.curve, r)).value;
    return out;
}

// |F|_{L^p(ambient)} + |div F|(ambient), p in {1, infinity}
inline NormValue dm_norm(const DMField& F, const Region& ambient, Integrability p) {
    NormValue n;
    if (p == Integrability::L1) {
        auto v = integrate_with_singularities<double>([&](Vec2 x) { return norm(F(x)); }, ambient, F);
        n.lp = v.value;
        n.status = v.status;
    } else {
        if (!F.bounded()) {
            n.lp = HUGE_VAL;
            n.status = Status::diverging;
        } else {
            // sampled supremum over the closure on a fine grid
            BBox bb = ambient.bbox();
            const auto& bc = ambient.boundary();
            const double on = 1e-12 * bb.size();
            const int N = 256;
            for (int i = 0; i <= N; ++i)
                for (int j = 0; j <= N; ++j) {
                    Vec2 x{bb.lo.x + (bb.hi.x - bb.lo.x) * i / N, bb.lo.y + (bb.hi.y - bb.lo.y) * j / N};
                    if (ambient.contains(x) || boundary_distance(bc, x) <= on) n.lp = std::max(n.lp, norm(F(x)));
                }
        }
    }
    auto tv = divergence_variation(F, ambient);
    n.tv = tv.value;
    n.status = worst(n.status, tv.status);
    n.value = n.lp + n.tv;
    return n;
}

struct DivergenceValue {
    double value = 0;
    double error = 0;
    Status status = Status::converged;
    bool corner_atom = false;
};

// div F over the essential interior of A plus the boundary parts weighted by chi
inline DivergenceValue divergence_of(const DMField& F, const Region& A, const std::function<double(Vec2)>& chi) {
    DivergenceValue out;
    if (F.div.density) {
        RegionQuad q;
        q.abs_tol = 1e-11;
        q.rel_tol = 1e-11;
        auto v = integrate_region<double>(F.div.density, A, q);
        out.value += v.value;
        out.error += v.error;
        out.status = worst(out.status, v.status);
    }
    const BoundaryCurve& bc = A.boundary();
    for (const auto& a : F.div.atoms) {
        out.value += a.weight * chi(a.p);
        for (Vec2 c : bc.corners)
            if (norm(c - a.p) <= 1e-12 * std::max(1.0, A.bbox().size())) out.corner_atom = true;
    }
    for (const auto& cp : F.div.curves) {
        auto v = integrate_curve<double>([&](Vec2 x, Vec2) { return chi(x) * cp.density(x); }, cp.curve);
        out.value += v.value;
        out.error += v.error;
        out.status = worst(out.status, v.status);
    }
    return out;
}

}  // namespace divgreen
