#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "divgreen/fields.hpp"
#include "divgreen/normal.hpp"

namespace divgreen {

// A scalar function with closed-form gradient; hess_bound bounds |D^2 f| on the sampled windows.
struct ScalarFn {
    std::string name;
    std::function<double(Vec2)> f;
    std::function<Vec2(Vec2)> grad;
    double hess_bound = 0;

    double operator()(Vec2 x) const { return f(x); }
};

// ---- compact sets and ball covers ---------------------------------------------------------------

// A compact plane set: a finite union of boundary pieces, or the closure of a bounded region.
struct CompactSet {
    BoundaryCurve curve;
    Region region;
    bool solid = false;

    static CompactSet of_curve(BoundaryCurve c) {
        if (c.pieces.empty()) throw std::invalid_argument("compact set must be nonempty");
        CompactSet k;
        k.curve = std::move(c);
        return k;
    }
    static CompactSet of_pieces(std::vector<Piece> ps) { return of_curve(BoundaryCurve{std::move(ps), {}}); }
    static CompactSet of_region(const Region& r) {
        if (r.is_empty() || !r.bounded()) throw std::invalid_argument("compact set must be a nonempty bounded region");
        CompactSet k;
        k.region = r;
        k.curve = r.boundary();
        k.solid = true;
        return k;
    }

    BBox bbox() const {
        if (solid) return region.bbox();
        BBox bb{curve.pieces[0].a, curve.pieces[0].a};
        for (const auto& p : curve.pieces) {
            const int n = 64;
            for (int i = 0; i <= n; ++i) bb = bb.include(p.point(p.length() * i / n));
        }
        return bb;
    }

    double distance(Vec2 x) const {
        if (solid && region.contains(x)) return 0.0;
        return boundary_distance(curve, x);
    }

    // points of K with spacing at most h: along the pieces, plus a grid over a solid set
    std::vector<Vec2> samples(double h) const {
        std::vector<Vec2> out;
        for (const auto& p : curve.pieces) {
            int n = std::max(1, static_cast<int>(std::ceil(p.length() / h)));
            for (int i = 0; i <= n; ++i) out.push_back(p.point(p.length() * i / n));
        }
        if (solid) {
            BBox bb = bbox();
            int nx = static_cast<int>(std::ceil((bb.hi.x - bb.lo.x) / h));
            int ny = static_cast<int>(std::ceil((bb.hi.y - bb.lo.y) / h));
            for (int i = 0; i <= nx; ++i)
                for (int j = 0; j <= ny; ++j) {
                    Vec2 x{bb.lo.x + i * h, bb.lo.y + j * h};
                    if (region.contains(x)) out.push_back(x);
                }
        }
        return out;
    }

    bool path_connected() const {
        if (solid) return solid_connected();
        // pieces are joined when an endpoint of one lies on the other
        const size_t n = curve.pieces.size();
        const double tol = 1e-9 * std::max(1.0, bbox().size());
        std::vector<size_t> parent(n);
        std::iota(parent.begin(), parent.end(), size_t{0});
        std::function<size_t(size_t)> root = [&](size_t i) { return parent[i] == i ? i : parent[i] = root(parent[i]); };
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                const auto& p = curve.pieces[i];
                const auto& q = curve.pieces[j];
                if (i != j && (q.distance(p.a) <= tol || q.distance(p.b) <= tol)) parent[root(i)] = root(j);
            }
        for (size_t i = 1; i < n; ++i)
            if (root(i) != root(0)) return false;
        return true;
    }

private:
    // flood fill over grid cells meeting the closed set
    bool solid_connected() const {
        BBox bb = bbox();
        const int N = 256;
        const double h = bb.size() / N;
        const int nx = static_cast<int>(std::ceil((bb.hi.x - bb.lo.x) / h)) + 1;
        const int ny = static_cast<int>(std::ceil((bb.hi.y - bb.lo.y) / h)) + 1;
        std::vector<char> in(static_cast<size_t>(nx) * ny, 0);
        size_t count = 0, seed = 0;
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                Vec2 x{bb.lo.x + i * h, bb.lo.y + j * h};
                if (region.contains(x) || boundary_distance(curve, x) <= 0.75 * h) {
                    in[static_cast<size_t>(i) * ny + j] = 1;
                    seed = static_cast<size_t>(i) * ny + j;
                    ++count;
                }
            }
        if (count == 0) return false;
        std::vector<size_t> stack{seed};
        in[seed] = 2;
        size_t seen = 1;
        while (!stack.empty()) {
            size_t c = stack.back();
            stack.pop_back();
            int i = static_cast<int>(c / ny), j = static_cast<int>(c % ny);
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    int a = i + di, b = j + dj;
                    if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
                    size_t q = static_cast<size_t>(a) * ny + b;
                    if (in[q] == 1) {
                        in[q] = 2;
                        ++seen;
                        stack.push_back(q);
                    }
                }
        }
        return seen == count;
    }
};

struct BallCover {
    double delta = 0;
    int m = 0;
    std::vector<Vec2> centers;
};

namespace detail {

// greedy cover: a sample starts a new ball unless it is within delta - h of an existing center,
// so every point of K (within h of a sample) lies in some open delta-ball
inline BallCover greedy_cover(const CompactSet& K, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("cover radius must be positive");
    BallCover c;
    c.delta = delta;
    const double h = delta / 8;
    const BBox bb = K.bbox();
    std::map<std::pair<long, long>, std::vector<int>> cells;  // centers hashed by delta-cells
    auto cell = [&](Vec2 x) {
        return std::pair<long, long>{std::lround(std::floor((x.x - bb.lo.x) / delta)),
                                     std::lround(std::floor((x.y - bb.lo.y) / delta))};
    };
    for (Vec2 x : K.samples(h)) {
        auto [ci, cj] = cell(x);
        bool covered = false;
        for (long di = -1; di <= 1 && !covered; ++di)
            for (long dj = -1; dj <= 1 && !covered; ++dj) {
                auto it = cells.find({ci + di, cj + dj});
                if (it == cells.end()) continue;
                for (int z : it->second)
                    if (norm(x - c.centers[z]) < delta - h) {
                        covered = true;
                        break;
                    }
            }
        if (!covered) {
            cells[{ci, cj}].push_back(static_cast<int>(c.centers.size()));
            c.centers.push_back(x);
        }
    }
    c.m = static_cast<int>(c.centers.size());
    return c;
}

}  // namespace detail

inline BallCover ball_cover(const CompactSet& K, double delta) {
    if (!K.path_connected()) throw std::invalid_argument("path-connected required");
    return detail::greedy_cover(K, delta);
}

// ---- Lipschitz bound on a path-connected compact set --------------------------------------------

struct LipschitzEstimate {
    double delta = 0;
    int m = 0;
    double C = 0;
    double grad_sup = 0;
    double bound = 0;
    double quotient = 0;
    bool ok = false;
};

// |f(x) - f(y)| <= 2(m+2) sup_{K^delta} |Df| |x - y| on K, with m the size of a delta/6 ball cover
inline LipschitzEstimate lipschitz_bound(const ScalarFn& f, const CompactSet& K, double delta, bool check_connected = true) {
    if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
    LipschitzEstimate e;
    e.delta = delta;
    BallCover cover = check_connected ? ball_cover(K, delta / 6) : detail::greedy_cover(K, delta / 6);
    e.m = cover.m;
    e.C = 2.0 * (e.m + 2);

    // sup of |Df| over K^delta on a grid, padded by the gradient modulus over half a cell diagonal
    BBox bb = K.bbox().grown(delta);
    const double h = delta / 16;
    const int nx = static_cast<int>(std::ceil((bb.hi.x - bb.lo.x) / h));
    const int ny = static_cast<int>(std::ceil((bb.hi.y - bb.lo.y) / h));
    double sup = 0;
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= ny; ++j) {
            Vec2 x{bb.lo.x + i * h, bb.lo.y + j * h};
            if (K.distance(x) < delta) sup = std::max(sup, norm(f.grad(x)));
        }
    e.grad_sup = sup + f.hess_bound * h * std::sqrt(0.5);
    e.bound = e.C * e.grad_sup;

    auto pts = K.samples(K.bbox().size() / 48 + 1e-300);
    const size_t stride = std::max<size_t>(1, pts.size() / 240);
    std::vector<Vec2> sub;
    for (size_t i = 0; i < pts.size(); i += stride) sub.push_back(pts[i]);
    for (size_t i = 0; i < sub.size(); ++i)
        for (size_t j = i + 1; j < sub.size(); ++j) {
            double d = norm(sub[i] - sub[j]);
            if (d > 0) e.quotient = std::max(e.quotient, std::fabs(f(sub[i]) - f(sub[j])) / d);
        }
    e.ok = e.quotient <= e.bound + 1e-12;
    return e;
}

// sup |f| on the closure of omega plus the Lipschitz constant, bounded by sup |Df| over the bounding box
inline double lc_norm(const ScalarFn& f, const Region& omega) {
    BBox bb = omega.bbox();
    const int N = 128;
    const double hx = (bb.hi.x - bb.lo.x) / N, hy = (bb.hi.y - bb.lo.y) / N;
    double fsup = 0, gsup = 0;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j) {
            Vec2 x{bb.lo.x + i * hx, bb.lo.y + j * hy};
            gsup = std::max(gsup, norm(f.grad(x)));
            if (omega.contains(x)) fsup = std::max(fsup, std::fabs(f(x)));
        }
    for (const auto& p : omega.boundary().pieces)
        for (int i = 0; i <= 64; ++i) fsup = std::max(fsup, std::fabs(f(p.point(p.length() * i / 64))));
    const double pad = 0.5 * std::hypot(hx, hy);
    return fsup + gsup * pad + gsup + f.hess_bound * pad;
}

// ---- normal trace functional --------------------------------------------------------------------

struct TraceValue {
    double value = 0;
    double error = 0;
    Status status = Status::converged;
    double dm_norm = 0;
    double lc_norm = 0;
    double bound = 0;
    bool within_bound = false;
};

// N(f) = int_omega f d div F + int_omega F . Df
inline TraceValue silhavy_trace(const DMField& F, const Region& omega, const ScalarFn& f) {
    TraceValue t;
    if (F.div.density) {
        RegionQuad q;
        q.abs_tol = 1e-11;
        q.rel_tol = 1e-11;
        auto v = integrate_region<double>([&](Vec2 x) { return f(x) * F.div.density(x); }, omega, q);
        t.value += v.value;
        t.error += v.error;
        t.status = worst(t.status, v.status);
    }
    for (const auto& a : F.div.atoms)
        if (omega.contains(a.p)) t.value += a.weight * f(a.p);
    for (const auto& cp : F.div.curves) {
        auto v = integrate_curve<double>([&](Vec2 x, Vec2) { return f(x) * cp.density(x); }, clip(cp.curve, omega));
        t.value += v.value;
        t.error += v.error;
    }
    auto g = integrate_with_singularities<double>([&](Vec2 x) { return dot(F(x), f.grad(x)); }, omega, F);
    t.value += g.value;
    t.error += g.error;
    t.status = worst(t.status, g.status);
    auto n = dm_norm(F, omega, Integrability::L1);
    t.dm_norm = n.value;
    t.lc_norm = lc_norm(f, omega);
    t.bound = t.dm_norm * t.lc_norm;
    t.within_bound = std::fabs(t.value) <= t.bound + certificate_tol;
    if (g.status == Status::diverging || n.status == Status::diverging) t.status = Status::diverging;
    return t;
}

// ---- shell gradient limits ----------------------------------------------------------------------

// strip: f_k = min{1, k (x - x0)} across the left edge x = x0 of omega, D f_k = k e1 on the strip;
// boundary_ramp: eta_k = (1 - k d)^+ inside omega, equal to 1 on the boundary
enum class RampKind { strip, boundary_ramp };

inline const char* to_string(RampKind k) { return k == RampKind::strip ? "strip" : "boundary-ramp"; }

struct ShellLimit {
    LimitResult<double> result;
    std::vector<double> ks;
    std::vector<double> values;
    std::vector<double> errors;  // quadrature error estimates per k
    std::vector<Status> statuses;
};

inline ScaleSchedule shell_schedule() { return {0.1, 0.1, 8, 1e-6, 1e9, true}; }

// value at k of int_omega f F . D(ramp_k)
inline QuadResult<double> shell_gradient_term(const DMField& F, const Region& omega, const ScalarFn& f, RampKind kind,
                                              double k) {
    if (!F.singular_curves.empty()) throw std::invalid_argument("singular curves are not supported by shell limits");
    const BBox bb = omega.bbox();
    if (kind == RampKind::strip) {
        RegionQuad q;
        q.abs_tol = 1e-12;
        q.rel_tol = 1e-10;
        q.singular_points = F.singular_points;
        Region S = intersect(omega, Region::box({bb.lo.x, bb.lo.y - 1}, {bb.lo.x + 1 / k, bb.hi.y + 1}));
        return integrate_region<double>([&](Vec2 x) { return f(x) * F(x).x * k; }, S, q);
    }
    NormalApproximation na;
    na.kind = ApproxKind::inner;
    na.omega = omega;
    RegionQuad q = na.quad_options();
    q.abs_tol = 1e-11;
    q.rel_tol = 1e-10;
    q.singular_points = F.singular_points;
    // D eta_k = -k D d on the inner shell, the negative of the inner approximation's gradient
    return integrate_region<double>([&](Vec2 x) { return -f(x) * dot(F(x), na.grad(k, x)); }, na.support(k), q);
}

inline ShellLimit shell_gradient_limit(const DMField& F, const Region& omega, const ScalarFn& f, RampKind kind,
                                       const ScaleSchedule& s = shell_schedule()) {
    ShellLimit out;
    out.result = limit_extrapolate<double>(
        [&](double d) {
            double k = 1 / d;
            auto q = shell_gradient_term(F, omega, f, kind, k);
            out.ks.push_back(k);
            out.values.push_back(q.value);
            out.errors.push_back(q.error);
            out.statuses.push_back(q.status);
            return q.value;
        },
        s);
    return out;
}

// ---- pure part detection ------------------------------------------------------------------------

struct PurePartReport {
    std::string classification;
    LimitResult<double> limit;
};

inline ScaleSchedule detector_schedule() { return {0.1, 0.5, 16, 1e-4, 1e9, true}; }

// (1/delta) int_{omega \ omega_delta} |F . D dist| as delta -> 0; a finite limit means the normal
// trace is a Radon measure
inline PurePartReport pure_part_detector(const DMField& F, const Region& omega, const ScaleSchedule& s = detector_schedule()) {
    if (!F.singular_curves.empty()) throw std::invalid_argument("singular curves are not supported by the detector");
    NormalApproximation na;
    na.kind = ApproxKind::inner;
    na.omega = omega;
    RegionQuad q = na.quad_options();
    q.abs_tol = 1e-9;
    q.rel_tol = 1e-8;
    q.singular_points = F.singular_points;
    const auto& bc = omega.boundary();
    PurePartReport rep;
    rep.limit = limit_extrapolate<double>(
        [&](double d) {
            auto v = integrate_region<double>([&](Vec2 x) { return std::fabs(dot(F(x), distance_gradient(bc, x))); },
                                              na.support(1 / d), q);
            return v.value / d;
        },
        s);
    switch (rep.limit.status) {
        case Status::diverging: rep.classification = "pure-gradient-part-required"; break;
        case Status::converged: rep.classification = "radon-representable"; break;
        default: rep.classification = "inconclusive";
    }
    return rep;
}

// ---- scalar fixtures ----------------------------------------------------------------------------

// smooth functions with Hessian bounds valid on [-3, 3]^2
inline std::vector<ScalarFn> scalar_fixtures() {
    std::vector<ScalarFn> v;
    v.push_back({"x", [](Vec2 p) { return p.x; }, [](Vec2) { return Vec2{1, 0}; }, 0});
    v.push_back({"3x-2y", [](Vec2 p) { return 3 * p.x - 2 * p.y; }, [](Vec2) { return Vec2{3, -2}; }, 0});
    v.push_back({"x^2", [](Vec2 p) { return p.x * p.x; }, [](Vec2 p) { return Vec2{2 * p.x, 0}; }, 2});
    v.push_back({"xy", [](Vec2 p) { return p.x * p.y; }, [](Vec2 p) { return Vec2{p.y, p.x}; }, 1});
    v.push_back({"r^2", [](Vec2 p) { return norm2(p); }, [](Vec2 p) { return 2 * p; }, 2 * std::sqrt(2.0)});
    v.push_back({"sin(3x)", [](Vec2 p) { return std::sin(3 * p.x); },
                 [](Vec2 p) { return Vec2{3 * std::cos(3 * p.x), 0}; }, 9});
    v.push_back({"sin(x)cos(y)", [](Vec2 p) { return std::sin(p.x) * std::cos(p.y); },
                 [](Vec2 p) { return Vec2{std::cos(p.x) * std::cos(p.y), -std::sin(p.x) * std::sin(p.y)}; }, 2});
    v.push_back({"exp((x+y)/4)", [](Vec2 p) { return std::exp((p.x + p.y) / 4); },
                 [](Vec2 p) {
                     double e = std::exp((p.x + p.y) / 4) / 4;
                     return Vec2{e, e};
                 },
                 std::exp(1.5) / 8});
    v.push_back({"x^3-y", [](Vec2 p) { return p.x * p.x * p.x - p.y; },
                 [](Vec2 p) { return Vec2{3 * p.x * p.x, -1}; }, 18});
    v.push_back({"atan(y)", [](Vec2 p) { return std::atan(p.y); },
                 [](Vec2 p) { return Vec2{0, 1 / (1 + p.y * p.y)}; }, 0.65});
    return v;
}

}  // namespace divgreen
