#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "divgreen/geometry.hpp"
#include "divgreen/limit.hpp"

namespace divgreen {

template <class T>
struct QuadResult {
    T value{};
    double error = 0;
    Status status = Status::converged;
    long evals = 0;

    bool converged() const { return status == Status::converged; }
};

namespace detail {

struct GK15 {
    static constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                      0.207784955007898467600689403773245, 0.0};
    static constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                     0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <class T>
struct Panel {
    double a, b;
    T value;
    double error;
};

template <class T, class F>
Panel<T> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    T fc = f(c);
    T resk = fc * GK15::wgk[7];
    T resg = fc * GK15::wg[3];
    T fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        double dx = h * GK15::xgk[j];
        fv1[j] = f(c - dx);
        fv2[j] = f(c + dx);
        resk += (fv1[j] + fv2[j]) * GK15::wgk[j];
        if (j % 2 == 1) resg += (fv1[j] + fv2[j]) * GK15::wg[j / 2];
    }
    T mean = resk * 0.5;
    double resasc = GK15::wgk[7] * norm(fc - mean);
    for (int j = 0; j < 7; ++j) resasc += GK15::wgk[j] * (norm(fv1[j] - mean) + norm(fv2[j] - mean));
    resasc *= std::fabs(h);
    double err = norm((resk - resg) * h);
    if (resasc != 0 && err != 0) err = resasc * std::min(1.0, std::pow(200 * err / resasc, 1.5));
    return {a, b, resk * h, err};
}

}  // namespace detail

// Adaptive Gauss-Kronrod on [a, b] split at the given interior breakpoints. Converged when the
// summed panel error is below max(abs_tol, rel_tol * |value|).
template <class T, class F>
QuadResult<T> integrate_interval(F&& f, double a, double b, double abs_tol, double rel_tol, int max_panels = 1000,
                                 const std::vector<double>& breaks = {}) {
    QuadResult<T> out;
    if (!(b > a)) return out;
    long evals = 0;
    auto fc = [&](double x) {
        ++evals;
        return f(x);
    };
    std::vector<double> pts{a};
    for (double x : breaks)
        if (x > pts.back() && x < b) pts.push_back(x);
    pts.push_back(b);
    auto cmp = [](const detail::Panel<T>& p, const detail::Panel<T>& q) {
        return p.error < q.error || (p.error == q.error && p.a > q.a);
    };
    std::priority_queue<detail::Panel<T>, std::vector<detail::Panel<T>>, decltype(cmp)> heap(cmp);
    std::vector<detail::Panel<T>> done;
    T total{};
    double err = 0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        auto p = detail::gk15<T>(fc, pts[i], pts[i + 1]);
        total += p.value;
        err += p.error;
        heap.push(p);
    }
    int panels = static_cast<int>(heap.size());
    while (!heap.empty() && err > std::max(abs_tol, rel_tol * norm(total))) {
        if (panels >= max_panels) break;
        auto p = heap.top();
        heap.pop();
        double m = 0.5 * (p.a + p.b);
        if (!(m > p.a && m < p.b) || (p.b - p.a) <= 1e-15 * std::max(std::fabs(p.a), std::fabs(p.b))) {
            done.push_back(p);
            continue;
        }
        auto l = detail::gk15<T>(fc, p.a, m);
        auto r = detail::gk15<T>(fc, m, p.b);
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        heap.push(l);
        heap.push(r);
        ++panels;
    }
    // resum in a fixed order so that the result does not carry the incremental rounding
    while (!heap.empty()) {
        done.push_back(heap.top());
        heap.pop();
    }
    std::sort(done.begin(), done.end(), [](const auto& p, const auto& q) { return p.a < q.a; });
    T sum{};
    double esum = 0;
    for (const auto& p : done) {
        sum += p.value;
        esum += p.error;
    }
    out.value = sum;
    out.error = esum;
    out.evals = evals;
    out.status = (esum <= std::max(abs_tol, rel_tol * norm(sum)) && finite(sum)) ? Status::converged
                                                                              : Status::budget_exhausted;
    return out;
}

struct RegionQuad {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_outer = 2000;
    int max_inner = 400;
    std::vector<Vec2> singular_points;
    std::vector<double> extra_x;  // vertical lines along which the integrand is singular or kinked
    std::vector<double> extra_y;
    std::vector<std::pair<Vec2, Vec2>> creases;  // lines (point, direction) across which the integrand jumps
};

namespace detail {

inline std::vector<double> region_breaks(const Region& r, const RegionQuad& o) {
    const BBox& bb = r.bbox();
    std::vector<double> xs;
    for (const auto& p : r.boundary().pieces) {
        xs.push_back(p.a.x);
        xs.push_back(p.b.x);
        if (p.kind == Piece::arc) {
            xs.push_back(p.c.x - p.r);
            xs.push_back(p.c.x + p.r);
        }
    }
    for (Vec2 s : o.singular_points) xs.push_back(s.x);
    for (double x : o.extra_x) xs.push_back(x);
    for (auto [p, d] : o.creases)
        if (std::fabs(d.x) <= 1e-14 * norm(d)) xs.push_back(p.x);
    std::sort(xs.begin(), xs.end());
    std::vector<double> out;
    double eps = 1e-13 * std::max(bb.size(), 1e-300);
    for (double x : xs)
        if (x > bb.lo.x + eps && x < bb.hi.x - eps && (out.empty() || x > out.back() + eps)) out.push_back(x);
    return out;
}

}  // namespace detail

// Iterated adaptive quadrature over exact vertical cross-sections of a bounded region.
template <class T, class F>
QuadResult<T> integrate_region(F&& f, const Region& r, const RegionQuad& o = {}) {
    QuadResult<T> out;
    if (r.is_empty()) return out;
    if (!r.bounded()) throw std::domain_error("integration over an unbounded region");
    const BBox& bb = r.bbox();
    const double width = bb.hi.x - bb.lo.x;
    const double inner_abs = 0.05 * o.abs_tol / std::max(width, 1e-300);
    auto xbreaks = detail::region_breaks(r, o);
    long evals = 0;
    bool inner_ok = true;
    auto slice = [&](double x) {
        T s{};
        for (auto [y0, y1] : r.section(x)) {
            std::vector<double> yb;
            for (Vec2 p : o.singular_points)
                if (p.y > y0 && p.y < y1) yb.push_back(p.y);
            for (double y : o.extra_y)
                if (y > y0 && y < y1) yb.push_back(y);
            for (auto [p, d] : o.creases) {
                if (std::fabs(d.x) <= 1e-14 * norm(d)) continue;
                double y = p.y + (x - p.x) * d.y / d.x;
                if (y > y0 && y < y1) yb.push_back(y);
            }
            std::sort(yb.begin(), yb.end());
            auto q = integrate_interval<T>([&](double y) { return f(Vec2{x, y}); }, y0, y1, inner_abs, 0.01 * o.rel_tol,
                                           o.max_inner, yb);
            evals += q.evals;
            if (!q.converged()) inner_ok = false;
            s += q.value;
        }
        return s;
    };
    auto q = integrate_interval<T>(slice, bb.lo.x, bb.hi.x, o.abs_tol, o.rel_tol, o.max_outer, xbreaks);
    out.value = q.value;
    out.error = q.error;
    out.evals = evals;
    out.status = (q.converged() && inner_ok) ? Status::converged : Status::budget_exhausted;
    return out;
}

// Integral over r with disks of radius eps removed around the singular points, extrapolated as
// eps -> 0. Used to tell integrable singularities from non-integrable ones.
template <class T, class F>
LimitResult<T> integrate_region_excised(F&& f, const Region& r, const RegionQuad& o, ScaleSchedule s) {
    const double size = r.bbox().size();
    return limit_extrapolate<T>(
        [&](double eps) {
            Region cut = r;
            for (Vec2 p : o.singular_points) cut = subtract(cut, Region::disk(p, eps * size));
            return integrate_region<T>(f, cut, o).value;
        },
        s);
}

template <class T, class F>
QuadResult<T> integrate_region_checked(F&& f, const Region& r, const RegionQuad& o = {}, const ScaleSchedule& s = {}) {
    auto q = integrate_region<T>(f, r, o);
    if (q.converged() || o.singular_points.empty()) return q;
    ScaleSchedule sa = s;
    sa.aitken = true;
    auto lim = integrate_region_excised<T>(f, r, o, sa);
    q.status = lim.status;
    if (lim.converged()) {
        q.value = lim.value;
        q.error = lim.error_bound;
    }
    return q;
}

struct CurveQuad {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_panels = 2000;
    std::vector<Vec2> singular_points;  // only endpoints of pieces are meaningful here
    ScaleSchedule truncation{0.5, 0.5, 24, 1e-6, 1e9, true};
};

namespace detail {

template <class T, class F>
QuadResult<T> piece_quad(F& f, const Piece& p, double s0, double s1, const CurveQuad& o) {
    return integrate_interval<T>([&](double s) { return f(p.point(s), p.normal(s)); }, s0, s1, o.abs_tol, o.rel_tol,
                                 o.max_panels);
}

}  // namespace detail

// f(point, outward normal) integrated against arc length. Endpoint singularities are resolved by
// truncating an eps-piece at the singular end and extrapolating eps -> 0.
template <class T, class F>
QuadResult<T> integrate_curve(F&& f, const Piece& p, const CurveQuad& o = {}) {
    const double L = p.length();
    QuadResult<T> out;
    if (!(L > 0)) return out;
    bool s0 = false, s1 = false;
    for (Vec2 q : o.singular_points) {
        if (norm(q - p.start()) <= 1e-12 * std::max(1.0, L)) s0 = true;
        if (norm(q - p.end()) <= 1e-12 * std::max(1.0, L)) s1 = true;
    }
    auto direct = detail::piece_quad<T>(f, p, 0.0, L, o);
    if ((!s0 && !s1) || direct.converged()) return direct;
    auto lim = limit_extrapolate<T>(
        [&](double eps) {
            double a = s0 ? eps * L : 0.0, b = s1 ? L - eps * L : L;
            if (s0 && s1) a = eps * L * 0.5, b = L - eps * L * 0.5;
            return detail::piece_quad<T>(f, p, a, b, o).value;
        },
        o.truncation);
    out.value = lim.value;
    out.error = lim.error_bound;
    out.status = lim.status;
    return out;
}

template <class T, class F>
QuadResult<T> integrate_curve(F&& f, const BoundaryCurve& c, const CurveQuad& o = {}) {
    QuadResult<T> out;
    for (const auto& p : c.pieces) {
        auto q = integrate_curve<T>(f, p, o);
        out.value += q.value;
        out.error += q.error;
        out.evals += q.evals;
        if (q.status == Status::diverging) out.status = Status::diverging;
        else if (!q.converged() && out.status == Status::converged) out.status = q.status;
    }
    return out;
}

}  // namespace divgreen
