#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "divgreen/limit.hpp"
#include "divgreen/vec.hpp"

namespace divgreen {

struct BBox {
    Vec2 lo{HUGE_VAL, HUGE_VAL};
    Vec2 hi{-HUGE_VAL, -HUGE_VAL};

    static BBox infinite() { return {{-HUGE_VAL, -HUGE_VAL}, {HUGE_VAL, HUGE_VAL}}; }
    bool empty() const { return !(lo.x < hi.x && lo.y < hi.y); }
    bool bounded() const { return std::isfinite(lo.x) && std::isfinite(lo.y) && std::isfinite(hi.x) && std::isfinite(hi.y); }
    double size() const { return std::max(hi.x - lo.x, hi.y - lo.y); }
    Vec2 center() const { return (lo + hi) * 0.5; }
    BBox grown(double d) const { return {{lo.x - d, lo.y - d}, {hi.x + d, hi.y + d}}; }
    BBox meet(const BBox& o) const {
        return {{std::max(lo.x, o.lo.x), std::max(lo.y, o.lo.y)}, {std::min(hi.x, o.hi.x), std::min(hi.y, o.hi.y)}};
    }
    BBox include(Vec2 p) const { return {{std::min(lo.x, p.x), std::min(lo.y, p.y)}, {std::max(hi.x, p.x), std::max(hi.y, p.y)}}; }
    BBox join(const BBox& o) const {
        if (empty()) return o;
        if (o.empty()) return *this;
        return {{std::min(lo.x, o.lo.x), std::min(lo.y, o.lo.y)}, {std::max(hi.x, o.hi.x), std::max(hi.y, o.hi.y)}};
    }
};

// A segment a->b or a circular arc with angles t0 < t1. Arcs run counterclockwise unless `inward`,
// in which case they run clockwise and their normal points to the center. The normal is always the
// right-hand normal of the direction of travel, so an oriented piece keeps its region on the left.
struct Piece {
    enum Kind { segment, arc };
    Kind kind = segment;
    Vec2 a, b;
    Vec2 c;
    double r = 0.0, t0 = 0.0, t1 = 0.0;
    bool inward = false;

    static Piece seg(Vec2 a, Vec2 b) {
        Piece p;
        p.kind = segment;
        p.a = a;
        p.b = b;
        return p;
    }
    static Piece make_arc(Vec2 c, double r, double t0, double t1, bool inward = false) {
        Piece p;
        p.kind = arc;
        p.c = c;
        p.r = r;
        p.t0 = t0;
        p.t1 = t1;
        p.inward = inward;
        p.a = p.at_param(inward ? t1 : t0);
        p.b = p.at_param(inward ? t0 : t1);
        return p;
    }

    bool full_circle() const { return kind == arc && t1 - t0 >= 2.0 * pi * (1.0 - 1e-14); }
    double length() const { return kind == segment ? norm(b - a) : r * (t1 - t0); }
    double param_lo() const { return kind == segment ? 0.0 : t0; }
    double param_hi() const { return kind == segment ? 1.0 : t1; }
    Vec2 at_param(double u) const {
        if (kind == segment) return a + (b - a) * u;
        return {c.x + r * std::cos(u), c.y + r * std::sin(u)};
    }
    // arc length s measured along the direction of travel
    double param_of_length(double s) const {
        if (kind == segment) return s / length();
        return inward ? t1 - s / r : t0 + s / r;
    }
    Vec2 point(double s) const { return at_param(param_of_length(s)); }
    Vec2 normal_at_param(double u) const {
        if (kind == segment) return right_normal(unit(b - a));
        Vec2 rad{std::cos(u), std::sin(u)};
        return inward ? -rad : rad;
    }
    Vec2 normal(double s) const { return normal_at_param(param_of_length(s)); }
    Vec2 start() const { return a; }
    Vec2 end() const { return b; }
    Vec2 midpoint() const { return at_param(0.5 * (param_lo() + param_hi())); }

    // same geometry restricted to parameters [u0, u1] (segment params in [0,1] relative to a->b)
    Piece sub(double u0, double u1) const {
        if (kind == segment) return seg(at_param(u0), at_param(u1));
        return make_arc(c, r, u0, u1, inward);
    }

    Vec2 closest(Vec2 p) const {
        if (kind == segment) {
            Vec2 d = b - a;
            double l2 = norm2(d);
            double t = l2 > 0 ? std::clamp(dot(p - a, d) / l2, 0.0, 1.0) : 0.0;
            return a + d * t;
        }
        Vec2 q = p - c;
        double rho = norm(q);
        if (rho > 0) {
            double th = std::atan2(q.y, q.x);
            while (th < t0) th += 2 * pi;
            while (th >= t0 + 2 * pi) th -= 2 * pi;
            if (full_circle() || th <= t1) return c + q * (r / rho);
        }
        return norm2(p - a) <= norm2(p - b) ? a : b;
    }

    double distance(Vec2 p) const {
        if (kind == segment) {
            Vec2 d = b - a;
            double l2 = norm2(d);
            double t = l2 > 0 ? std::clamp(dot(p - a, d) / l2, 0.0, 1.0) : 0.0;
            return norm(p - (a + d * t));
        }
        Vec2 q = p - c;
        double rho = norm(q);
        if (full_circle()) return std::fabs(rho - r);
        if (rho > 0) {
            double th = std::atan2(q.y, q.x);
            while (th < t0) th += 2 * pi;
            while (th >= t0 + 2 * pi) th -= 2 * pi;
            if (th <= t1) return std::fabs(rho - r);
        }
        return std::min(norm(p - a), norm(p - b));
    }
};

namespace detail {

inline double wrap_angle(double th, double t0) {
    while (th < t0) th += 2 * pi;
    while (th >= t0 + 2 * pi) th -= 2 * pi;
    return th;
}

// parameter of a point known to lie on the circle of `p`, or NaN if it falls outside the arc range
inline double arc_param(const Piece& p, Vec2 q, double eta = 1e-12) {
    double th = std::atan2(q.y - p.c.y, q.x - p.c.x);
    th = wrap_angle(th, p.t0 - eta);
    if (th <= p.t1 + eta) return std::clamp(th, p.t0, p.t1);
    if (th >= p.t0 + 2 * pi - eta) return p.t0;
    return std::numeric_limits<double>::quiet_NaN();
}

inline double seg_param(const Piece& p, Vec2 q) {
    Vec2 d = p.b - p.a;
    return dot(q - p.a, d) / norm2(d);
}

using ParamPairs = std::vector<std::pair<double, double>>;

inline void add_if_in(ParamPairs& out, double u, double v, const Piece& P, const Piece& Q, double eta = 1e-10) {
    if (std::isnan(u) || std::isnan(v)) return;
    if (P.kind == Piece::segment) {
        if (u < -eta || u > 1 + eta) return;
        u = std::clamp(u, 0.0, 1.0);
    }
    if (Q.kind == Piece::segment) {
        if (v < -eta || v > 1 + eta) return;
        v = std::clamp(v, 0.0, 1.0);
    }
    out.emplace_back(u, v);
}

inline ParamPairs intersect_seg_seg(const Piece& P, const Piece& Q) {
    ParamPairs out;
    Vec2 d1 = P.b - P.a, d2 = Q.b - Q.a, w = Q.a - P.a;
    double l1 = norm(d1), l2 = norm(d2);
    if (l1 == 0 || l2 == 0) return out;
    double den = cross(d1, d2);
    if (std::fabs(den) > 1e-13 * l1 * l2) {
        add_if_in(out, cross(w, d2) / den, cross(w, d1) / den, P, Q);
        return out;
    }
    // parallel: only collinear overlaps matter, and those are split at each other's endpoints
    if (std::fabs(cross(w, d1)) > 1e-12 * l1 * std::max({l1, l2, norm(w)})) return out;
    for (Vec2 q : {Q.a, Q.b}) {
        double u = seg_param(P, q);
        add_if_in(out, u, seg_param(Q, q), P, Q, 1e-12);
    }
    for (Vec2 p : {P.a, P.b}) {
        double v = seg_param(Q, p);
        add_if_in(out, seg_param(P, p), v, P, Q, 1e-12);
    }
    return out;
}

inline ParamPairs intersect_seg_arc(const Piece& S, const Piece& A, bool swap) {
    ParamPairs out;
    Vec2 d = S.b - S.a;
    double l2 = norm2(d);
    if (l2 == 0) return out;
    double tf = dot(A.c - S.a, d) / l2;
    Vec2 foot = S.a + d * tf;
    double dist = norm(A.c - foot);
    double h2 = A.r * A.r - dist * dist;
    if (h2 < -1e-13 * A.r * A.r) return out;
    double dt = std::sqrt(std::max(h2, 0.0)) / std::sqrt(l2);
    std::array<double, 2> ts{tf - dt, tf + dt};
    int n = dt > 0 ? 2 : 1;
    for (int i = 0; i < n; ++i) {
        double t = ts[i];
        Vec2 q = S.a + d * t;
        double th = arc_param(A, q);
        if (swap) add_if_in(out, th, t, A, S);
        else add_if_in(out, t, th, S, A);
    }
    return out;
}

inline ParamPairs intersect_arc_arc(const Piece& P, const Piece& Q) {
    ParamPairs out;
    Vec2 dc = Q.c - P.c;
    double d = norm(dc);
    double scale = std::max(P.r, Q.r);
    if (d <= 1e-13 * scale) {
        if (std::fabs(P.r - Q.r) > 1e-13 * scale) return out;
        // coincident circles: split each at the other's endpoints
        if (!Q.full_circle())
            for (double tq : {Q.t0, Q.t1}) {
                Vec2 q = Q.at_param(tq);
                add_if_in(out, arc_param(P, q), tq, P, Q);
            }
        if (!P.full_circle())
            for (double tp : {P.t0, P.t1}) {
                Vec2 p = P.at_param(tp);
                add_if_in(out, tp, arc_param(Q, p), P, Q);
            }
        return out;
    }
    if (d > P.r + Q.r + 1e-13 * scale || d < std::fabs(P.r - Q.r) - 1e-13 * scale) return out;
    double a = (P.r * P.r - Q.r * Q.r + d * d) / (2 * d);
    double h2 = P.r * P.r - a * a;
    double h = std::sqrt(std::max(h2, 0.0));
    Vec2 e = dc / d;
    Vec2 base = P.c + e * a;
    Vec2 perp{-e.y, e.x};
    std::array<Vec2, 2> pts{base + perp * h, base - perp * h};
    int n = h > 0 ? 2 : 1;
    for (int i = 0; i < n; ++i) add_if_in(out, arc_param(P, pts[i]), arc_param(Q, pts[i]), P, Q);
    return out;
}

inline ParamPairs intersect(const Piece& P, const Piece& Q) {
    if (P.kind == Piece::segment && Q.kind == Piece::segment) return intersect_seg_seg(P, Q);
    if (P.kind == Piece::segment) return intersect_seg_arc(P, Q, false);
    if (Q.kind == Piece::segment) return intersect_seg_arc(Q, P, true);
    return intersect_arc_arc(P, Q);
}

// split a piece at the given parameters; full circles are treated periodically
inline std::vector<std::pair<double, double>> split_params(const Piece& P, std::vector<double> cuts) {
    std::vector<std::pair<double, double>> spans;
    double lo = P.param_lo(), hi = P.param_hi();
    double range = hi - lo;
    double eps = 1e-12 * range;
    std::sort(cuts.begin(), cuts.end());
    if (P.full_circle()) {
        std::vector<double> u;
        for (double c : cuts) {
            double w = wrap_angle(c, lo);
            u.push_back(w);
        }
        std::sort(u.begin(), u.end());
        std::vector<double> v;
        for (double x : u)
            if (v.empty() || x - v.back() > eps) v.push_back(x);
        if (v.size() > 1 && v.front() + 2 * pi - v.back() <= eps) v.pop_back();
        if (v.empty()) {
            spans.emplace_back(lo, hi);
            return spans;
        }
        for (size_t i = 0; i + 1 < v.size(); ++i) spans.emplace_back(v[i], v[i + 1]);
        spans.emplace_back(v.back(), v.front() + 2 * pi);
        return spans;
    }
    std::vector<double> v{lo};
    for (double c : cuts)
        if (c > v.back() + eps && c < hi - eps) v.push_back(c);
    v.push_back(hi);
    for (size_t i = 0; i + 1 < v.size(); ++i) spans.emplace_back(v[i], v[i + 1]);
    return spans;
}

}  // namespace detail

struct BoundaryCurve {
    std::vector<Piece> pieces;
    std::vector<Vec2> corners;

    double length() const {
        double s = 0;
        for (const auto& p : pieces) s += p.length();
        return s;
    }
};

enum class Op { empty, disk, box, halfplane, unite, intersect, subtract };

struct Node {
    Op op = Op::empty;
    Vec2 c;
    double r = 0;
    Vec2 lo, hi;
    Vec2 n;
    double off = 0;
    std::shared_ptr<const Node> a, b;
    BBox bbox;
};

using Interval = std::pair<double, double>;
using Intervals = std::vector<Interval>;

namespace detail {

inline Intervals iv_union(const Intervals& A, const Intervals& B) {
    Intervals all;
    all.reserve(A.size() + B.size());
    std::merge(A.begin(), A.end(), B.begin(), B.end(), std::back_inserter(all));
    Intervals out;
    for (const auto& iv : all) {
        if (!out.empty() && iv.first <= out.back().second) out.back().second = std::max(out.back().second, iv.second);
        else out.push_back(iv);
    }
    return out;
}

inline Intervals iv_intersect(const Intervals& A, const Intervals& B) {
    Intervals out;
    size_t i = 0, j = 0;
    while (i < A.size() && j < B.size()) {
        double lo = std::max(A[i].first, B[j].first);
        double hi = std::min(A[i].second, B[j].second);
        if (lo < hi) out.emplace_back(lo, hi);
        if (A[i].second < B[j].second) ++i;
        else ++j;
    }
    return out;
}

inline Intervals iv_subtract(const Intervals& A, const Intervals& B) {
    Intervals out;
    size_t j = 0;
    for (auto [lo, hi] : A) {
        double cur = lo;
        while (j < B.size() && B[j].second <= cur) ++j;
        size_t k = j;
        while (k < B.size() && B[k].first < hi) {
            if (B[k].first > cur) out.emplace_back(cur, B[k].first);
            cur = std::max(cur, B[k].second);
            ++k;
        }
        if (cur < hi) out.emplace_back(cur, hi);
    }
    return out;
}

}  // namespace detail

class Region {
public:
    Region() : node_(make_empty()), cache_(std::make_shared<Cache>()) {}

    static Region empty() { return Region(); }
    static Region disk(Vec2 c, double r) {
        if (!(r > 0)) return empty();
        auto n = std::make_shared<Node>();
        n->op = Op::disk;
        n->c = c;
        n->r = r;
        n->bbox = {{c.x - r, c.y - r}, {c.x + r, c.y + r}};
        return Region(n);
    }
    static Region box(Vec2 lo, Vec2 hi) {
        if (!(lo.x < hi.x && lo.y < hi.y)) return empty();
        auto n = std::make_shared<Node>();
        n->op = Op::box;
        n->lo = lo;
        n->hi = hi;
        n->bbox = {lo, hi};
        return Region(n);
    }
    // points with normal . p < offset; unbounded, so only useful as a clipping operand
    static Region half_plane(Vec2 normal, double offset) {
        double l = norm(normal);
        if (!(l > 0)) throw std::invalid_argument("half-plane normal must be nonzero");
        auto n = std::make_shared<Node>();
        n->op = Op::halfplane;
        n->n = normal / l;
        n->off = offset / l;
        BBox bb = BBox::infinite();
        if (n->n.y == 0) (n->n.x > 0 ? bb.hi.x : bb.lo.x) = n->off / n->n.x;
        if (n->n.x == 0) (n->n.y > 0 ? bb.hi.y : bb.lo.y) = n->off / n->n.y;
        n->bbox = bb;
        return Region(n);
    }

    friend Region unite(const Region& A, const Region& B) {
        if (A.is_empty()) return B;
        if (B.is_empty()) return A;
        return combine(Op::unite, A, B, A.bbox().join(B.bbox()));
    }
    friend Region intersect(const Region& A, const Region& B) {
        if (A.is_empty() || B.is_empty()) return empty();
        BBox bb = A.bbox().meet(B.bbox());
        if (bb.empty()) return empty();
        return combine(Op::intersect, A, B, bb);
    }
    friend Region subtract(const Region& A, const Region& B) {
        if (A.is_empty()) return empty();
        if (B.is_empty() || A.bbox().meet(B.bbox()).empty()) return A;
        return combine(Op::subtract, A, B, A.bbox());
    }

    bool is_empty() const { return node_->op == Op::empty; }
    bool bounded() const { return is_empty() || node_->bbox.bounded(); }
    const BBox& bbox() const { return node_->bbox; }
    const Node& node() const { return *node_; }

    bool contains(Vec2 p) const { return contains(*node_, p); }

    // vertical cross-section {y : (x,y) in region} as sorted disjoint open intervals
    Intervals section(double x) const { return section(*node_, x); }

    // primitive boundary curves, with half-plane lines clipped to `clip`
    void primitive_curves(const BBox& clip, std::vector<Piece>& out) const { collect(*node_, clip, out); }

    const BoundaryCurve& boundary() const {
        std::call_once(cache_->once, [this] { cache_->bc = compute_boundary(); });
        return cache_->bc;
    }

private:
    struct Cache {
        std::once_flag once;
        BoundaryCurve bc;
    };

    explicit Region(std::shared_ptr<const Node> n) : node_(std::move(n)), cache_(std::make_shared<Cache>()) {}

    static std::shared_ptr<const Node> make_empty() {
        static const auto e = [] {
            auto n = std::make_shared<Node>();
            n->op = Op::empty;
            return n;
        }();
        return e;
    }

    static Region combine(Op op, const Region& A, const Region& B, BBox bb) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->a = A.node_;
        n->b = B.node_;
        n->bbox = bb;
        return Region(n);
    }

    static bool contains(const Node& n, Vec2 p) {
        switch (n.op) {
            case Op::empty: return false;
            case Op::disk: return norm2(p - n.c) < n.r * n.r;
            case Op::box: return p.x > n.lo.x && p.x < n.hi.x && p.y > n.lo.y && p.y < n.hi.y;
            case Op::halfplane: return dot(n.n, p) < n.off;
            case Op::unite: return contains(*n.a, p) || contains(*n.b, p);
            case Op::intersect: return contains(*n.a, p) && contains(*n.b, p);
            case Op::subtract: return contains(*n.a, p) && !contains(*n.b, p);
        }
        return false;
    }

    static Intervals section(const Node& n, double x) {
        switch (n.op) {
            case Op::empty: return {};
            case Op::disk: {
                double dx = x - n.c.x;
                double h2 = n.r * n.r - dx * dx;
                if (!(h2 > 0)) return {};
                double h = std::sqrt(h2);
                return {{n.c.y - h, n.c.y + h}};
            }
            case Op::box:
                if (x > n.lo.x && x < n.hi.x) return {{n.lo.y, n.hi.y}};
                return {};
            case Op::halfplane: {
                if (n.n.y == 0) return n.n.x * x < n.off ? Intervals{{-HUGE_VAL, HUGE_VAL}} : Intervals{};
                double t = (n.off - n.n.x * x) / n.n.y;
                if (n.n.y > 0) return {{-HUGE_VAL, t}};
                return {{t, HUGE_VAL}};
            }
            case Op::unite: return detail::iv_union(section(*n.a, x), section(*n.b, x));
            case Op::intersect: {
                auto A = section(*n.a, x);
                if (A.empty()) return A;
                return detail::iv_intersect(A, section(*n.b, x));
            }
            case Op::subtract: {
                auto A = section(*n.a, x);
                if (A.empty()) return A;
                return detail::iv_subtract(A, section(*n.b, x));
            }
        }
        return {};
    }

    static void collect(const Node& n, const BBox& clip, std::vector<Piece>& out) {
        switch (n.op) {
            case Op::empty: return;
            case Op::disk: out.push_back(Piece::make_arc(n.c, n.r, 0.0, 2 * pi)); return;
            case Op::box:
                out.push_back(Piece::seg(n.lo, {n.hi.x, n.lo.y}));
                out.push_back(Piece::seg({n.hi.x, n.lo.y}, n.hi));
                out.push_back(Piece::seg(n.hi, {n.lo.x, n.hi.y}));
                out.push_back(Piece::seg({n.lo.x, n.hi.y}, n.lo));
                return;
            case Op::halfplane: {
                // line n.p = off, clipped to the (grown) clip box
                Vec2 t{-n.n.y, n.n.x};
                Vec2 p0 = n.n * n.off;
                double tmin = -HUGE_VAL, tmax = HUGE_VAL;
                for (int ax = 0; ax < 2; ++ax) {
                    double pc = ax == 0 ? p0.x : p0.y, tc = ax == 0 ? t.x : t.y;
                    double lo = ax == 0 ? clip.lo.x : clip.lo.y, hi = ax == 0 ? clip.hi.x : clip.hi.y;
                    if (tc == 0) {
                        if (pc < lo || pc > hi) return;
                        continue;
                    }
                    double s0 = (lo - pc) / tc, s1 = (hi - pc) / tc;
                    tmin = std::max(tmin, std::min(s0, s1));
                    tmax = std::min(tmax, std::max(s0, s1));
                }
                if (tmin < tmax) out.push_back(Piece::seg(p0 + t * tmin, p0 + t * tmax));
                return;
            }
            default:
                collect(*n.a, clip, out);
                collect(*n.b, clip, out);
        }
    }

    BoundaryCurve compute_boundary() const;

    std::shared_ptr<const Node> node_;
    std::shared_ptr<Cache> cache_;
};

namespace detail {

struct RawPiece {
    Piece piece;
    int src;
    double u0, u1;
};

inline bool same_piece(const Piece& p, const Piece& q, double tol) {
    if (p.kind != q.kind) return false;
    if (p.kind == Piece::arc && (norm(p.c - q.c) > tol || std::fabs(p.r - q.r) > tol)) return false;
    if (p.full_circle() && q.full_circle()) return true;
    return norm(p.start() - q.start()) <= tol && norm(p.end() - q.end()) <= tol &&
           norm(p.midpoint() - q.midpoint()) <= tol;
}

inline double side_eps(const Piece& p) {
    double l = p.length();
    if (p.kind == Piece::arc) l = std::min(l, p.r);
    return 1e-7 * l;
}

}  // namespace detail

inline BoundaryCurve Region::compute_boundary() const {
    BoundaryCurve bc;
    if (is_empty()) return bc;
    if (!bounded()) throw std::domain_error("boundary of an unbounded region");
    const BBox bb = bbox();
    const double scale = std::max(bb.size(), 1e-300);
    const double tol = 1e-11 * scale;
    std::vector<Piece> curves;
    primitive_curves(bb.grown(0.125 * scale), curves);

    std::vector<std::vector<double>> cuts(curves.size());
    for (size_t i = 0; i < curves.size(); ++i)
        for (size_t j = i + 1; j < curves.size(); ++j)
            for (auto [u, v] : detail::intersect(curves[i], curves[j])) {
                cuts[i].push_back(u);
                cuts[j].push_back(v);
            }

    std::vector<detail::RawPiece> kept;
    for (size_t i = 0; i < curves.size(); ++i) {
        const Piece& C = curves[i];
        for (auto [u0, u1] : detail::split_params(C, cuts[i])) {
            Piece s = C.sub(u0, u1);
            if (s.length() <= 1e-14 * scale) continue;
            double um = 0.5 * (u0 + u1);
            Vec2 m = s.at_param(s.kind == Piece::segment ? 0.5 : um);
            Vec2 nn = s.normal_at_param(um);
            double e = detail::side_eps(s);
            // stay closer to s than to any other curve so thin features are not stepped over
            for (size_t j = 0; j < curves.size(); ++j) {
                if (j == i) continue;
                double dj = curves[j].distance(m);
                if (dj > 1e-12 * scale) e = std::min(e, 0.25 * dj);
            }
            bool in_minus = contains(m - nn * e);
            bool in_plus = contains(m + nn * e);
            if (in_minus == in_plus) continue;
            if (in_plus) {
                if (s.kind == Piece::segment) std::swap(s.a, s.b);
                else s = Piece::make_arc(s.c, s.r, s.t0, s.t1, true);
            }
            bool dup = false;
            for (const auto& k : kept)
                if (detail::same_piece(k.piece, s, tol)) {
                    dup = true;
                    break;
                }
            if (!dup) kept.push_back({s, static_cast<int>(i), u0, u1});
        }
    }

    // merge contiguous runs from the same source curve
    std::vector<Piece> merged;
    for (size_t i = 0; i < curves.size(); ++i) {
        std::vector<detail::RawPiece> run;
        for (const auto& k : kept)
            if (k.src == static_cast<int>(i)) run.push_back(k);
        if (run.empty()) continue;
        std::sort(run.begin(), run.end(), [](const auto& x, const auto& y) { return x.u0 < y.u0; });
        const Piece& C = curves[i];
        auto flipped = [&](const detail::RawPiece& k) {
            return k.piece.kind == Piece::segment ? norm(k.piece.a - C.at_param(k.u0)) > 0 : k.piece.inward;
        };
        std::vector<detail::RawPiece> out;
        for (const auto& k : run) {
            if (!out.empty() && out.back().u1 == k.u0 && flipped(out.back()) == flipped(k)) {
                out.back().u1 = k.u1;
            } else {
                out.push_back(k);
            }
        }
        if (C.full_circle() && out.size() > 1 && flipped(out.front()) == flipped(out.back()) &&
            std::fabs(out.back().u1 - (out.front().u0 + 2 * pi)) <= 1e-12) {
            out.front().u0 = out.back().u0 - 2 * pi;
            out.pop_back();
        }
        for (const auto& k : out) {
            bool f = flipped(k);
            if (C.kind == Piece::segment) {
                Piece s = Piece::seg(C.at_param(k.u0), C.at_param(k.u1));
                if (f) std::swap(s.a, s.b);
                merged.push_back(s);
            } else {
                merged.push_back(Piece::make_arc(C.c, C.r, k.u0, k.u1, f));
            }
        }
    }
    bc.pieces = std::move(merged);

    // corners: endpoints where the outward normals of the meeting pieces disagree
    struct End {
        Vec2 p;
        Vec2 n;
    };
    std::vector<End> ends;
    for (const auto& p : bc.pieces) {
        if (p.full_circle()) continue;
        ends.push_back({p.start(), p.normal(0.0)});
        ends.push_back({p.end(), p.normal(p.length())});
    }
    std::vector<bool> used(ends.size(), false);
    for (size_t i = 0; i < ends.size(); ++i) {
        if (used[i]) continue;
        bool corner = false;
        int count = 0;
        for (size_t j = i; j < ends.size(); ++j) {
            if (used[j] || norm(ends[j].p - ends[i].p) > 1e3 * tol) continue;
            used[j] = true;
            ++count;
            if (norm(ends[j].n - ends[i].n) > 1e-9) corner = true;
        }
        if (corner || count < 2) bc.corners.push_back(ends[i].p);
    }
    return bc;
}

namespace detail {

// 20-point Gauss-Legendre on [-1,1]
inline const std::array<std::pair<double, double>, 10>& gl20() {
    static const std::array<std::pair<double, double>, 10> t{{
        {0.0765265211334973, 0.1527533871307258},
        {0.2277858511416451, 0.1491729864726037},
        {0.3737060887154195, 0.1420961093183820},
        {0.5108670019508271, 0.1316886384491766},
        {0.6360536807265150, 0.1181945319615184},
        {0.7463319064601508, 0.1019301198172404},
        {0.8391169718222188, 0.0832767415767048},
        {0.9122344282513259, 0.0626720483341091},
        {0.9639719272779138, 0.0406014298003869},
        {0.9931285991850949, 0.0176140071391521},
    }};
    return t;
}

// integral over a piece of g(point, dpoint/dparam) dparam along the direction of travel
template <class G>
auto piece_param_integral(const Piece& p, G&& g) {
    using R = decltype(g(Vec2{}, Vec2{}));
    R sum{};
    if (p.kind == Piece::segment) {
        Vec2 d = p.b - p.a;
        for (auto [x, w] : gl20()) {
            sum += w * 0.5 * (g(p.a + d * (0.5 * (1 + x)), d) + g(p.a + d * (0.5 * (1 - x)), d));
        }
        return sum;
    }
    int chunks = std::max(1, static_cast<int>(std::ceil((p.t1 - p.t0) / (pi / 4))));
    double h = (p.t1 - p.t0) / chunks;
    double sgn = p.inward ? -1.0 : 1.0;
    for (int k = 0; k < chunks; ++k) {
        double m = p.t0 + (k + 0.5) * h;
        for (auto [x, w] : gl20()) {
            for (double th : {m + 0.5 * h * x, m - 0.5 * h * x}) {
                Vec2 q{p.c.x + p.r * std::cos(th), p.c.y + p.r * std::sin(th)};
                Vec2 dq{-p.r * std::sin(th) * sgn, p.r * std::cos(th) * sgn};
                sum += w * 0.5 * h * g(q, dq);
            }
        }
    }
    return sum;
}

// Green's area contribution 1/2 (x dy - y dx) relative to `ref`, in closed form
inline double green_area(const Piece& p, Vec2 ref) {
    if (p.kind == Piece::segment) return 0.5 * cross(p.a - ref, p.b - ref);
    Vec2 c = p.c - ref;
    double ta = p.inward ? p.t1 : p.t0, tb = p.inward ? p.t0 : p.t1;
    return 0.5 * (p.r * p.r * (tb - ta) + p.r * (c.x * (std::sin(tb) - std::sin(ta)) - c.y * (std::cos(tb) - std::cos(ta))));
}

}  // namespace detail

inline double area(const BoundaryCurve& bc, Vec2 ref) {
    double s = 0;
    for (const auto& p : bc.pieces) s += detail::green_area(p, ref);
    return s;
}

inline double area(const Region& r) {
    if (r.is_empty()) return 0.0;
    return area(r.boundary(), r.bbox().center());
}

// first moments relative to `ref`: integral of (x - ref.x, y - ref.y) over the region
inline Vec2 first_moment(const BoundaryCurve& bc, Vec2 ref) {
    Vec2 m;
    for (const auto& p : bc.pieces) {
        m += detail::piece_param_integral(p, [&](Vec2 q, Vec2 dq) {
            Vec2 z = q - ref;
            return Vec2{0.5 * z.x * z.x * dq.y, -0.5 * z.y * z.y * dq.x};
        });
    }
    return m;
}

struct SignedDistance {
    double value = 0;
    bool approximate = false;  // never set: distances to CSG boundaries are computed from exact pieces
};

inline double boundary_distance(const BoundaryCurve& bc, Vec2 p) {
    double d = HUGE_VAL;
    for (const auto& q : bc.pieces) d = std::min(d, q.distance(p));
    return d;
}

inline Vec2 nearest_point(const BoundaryCurve& bc, Vec2 p) {
    double best = HUGE_VAL;
    Vec2 q;
    for (const auto& piece : bc.pieces) {
        Vec2 c = piece.closest(p);
        double d = norm2(p - c);
        if (d < best) {
            best = d;
            q = c;
        }
    }
    return q;
}

// gradient of the unsigned distance to the boundary, defined off the boundary and the medial axis
inline Vec2 distance_gradient(const BoundaryCurve& bc, Vec2 p) {
    Vec2 d = p - nearest_point(bc, p);
    double l = norm(d);
    return l > 0 ? d / l : Vec2{};
}

// negative inside
inline SignedDistance signed_distance(const Region& r, Vec2 p) {
    double d = boundary_distance(r.boundary(), p);
    return {r.contains(p) ? -d : d, false};
}

// area of (region with boundary bc) intersected with the disk B(c, rho), without rebuilding the CSG
inline double area_in_disk(const Region& r, Vec2 c, double rho, Vec2* moment = nullptr) {
    if (r.is_empty()) return 0.0;
    const BBox& bb = r.bbox();
    if (c.x + rho <= bb.lo.x || c.x - rho >= bb.hi.x || c.y + rho <= bb.lo.y || c.y - rho >= bb.hi.y) {
        if (moment) *moment = {};
        return 0.0;
    }
    const BoundaryCurve& bc = r.boundary();
    Piece circle = Piece::make_arc(c, rho, 0.0, 2 * pi);
    std::vector<double> cuts;
    double total = 0;
    Vec2 mom;
    auto add = [&](const Piece& s) {
        total += detail::green_area(s, c);
        if (moment) mom += first_moment(BoundaryCurve{{s}, {}}, c);
    };
    for (const auto& p : bc.pieces) {
        if (p.distance(c) >= rho) continue;
        std::vector<double> pc;
        for (auto [u, v] : detail::intersect(p, circle)) {
            pc.push_back(u);
            cuts.push_back(v);
        }
        for (auto [u0, u1] : detail::split_params(p, pc)) {
            Piece s = p.sub(u0, u1);
            Vec2 m = s.kind == Piece::segment ? s.at_param(0.5) : s.at_param(0.5 * (u0 + u1));
            if (norm2(m - c) < rho * rho) add(s);
        }
    }
    // vertices on the circle split it as well, so tangencies at corners are resolved
    const double on = 1e-12 * rho;
    for (const auto& p : bc.pieces)
        for (Vec2 v : {p.start(), p.end()})
            if (std::fabs(norm(v - c) - rho) <= on) cuts.push_back(std::atan2(v.y - c.y, v.x - c.x));
    for (auto [u0, u1] : detail::split_params(circle, cuts)) {
        Piece s = circle.sub(u0, u1);
        Vec2 m = s.at_param(0.5 * (u0 + u1));
        // arcs lying on the region boundary count when the region is on the inner side
        if (boundary_distance(bc, m) <= on) m = c + (m - c) * (1 - 1e-9);
        if (r.contains(m)) add(s);
    }
    if (moment) *moment = mom;
    return total;
}

// ---- derived regions --------------------------------------------------------------------------

// points whose polar angle about c lies in [t0, t1] (t1 - t0 <= 2 pi); unbounded
inline Region wedge(Vec2 c, double t0, double t1) {
    Vec2 u0{std::cos(t0), std::sin(t0)}, u1{std::cos(t1), std::sin(t1)};
    Vec2 n0{u0.y, -u0.x}, n1{-u1.y, u1.x};
    Region h0 = Region::half_plane(n0, dot(n0, c));
    Region h1 = Region::half_plane(n1, dot(n1, c));
    return (t1 - t0 <= pi) ? intersect(h0, h1) : unite(h0, h1);
}

// sector of a disk, angles measured counterclockwise from t0
inline Region sector(Vec2 c, double radius, double t0, double t1) {
    Region d = Region::disk(c, radius);
    if (t1 - t0 >= 2 * pi) return d;
    return intersect(d, wedge(c, t0, t1));
}

inline Region annulus(Vec2 c, double r_in, double r_out) {
    Region outer = Region::disk(c, r_out);
    return r_in > 0 ? subtract(outer, Region::disk(c, r_in)) : outer;
}

// open delta-tube around a closed piece
inline Region tube(const Piece& p, double delta) {
    Region ends = unite(Region::disk(p.start(), delta), Region::disk(p.end(), delta));
    if (p.kind == Piece::segment) {
        Vec2 a = p.a, b = p.b;
        Region core;
        if (a.y == b.y) core = Region::box({std::min(a.x, b.x), a.y - delta}, {std::max(a.x, b.x), a.y + delta});
        else if (a.x == b.x) core = Region::box({a.x - delta, std::min(a.y, b.y)}, {a.x + delta, std::max(a.y, b.y)});
        else {
            Vec2 t = unit(b - a), n = right_normal(t);
            BBox bb;
            for (Vec2 v : {a + n * delta, a - n * delta, b + n * delta, b - n * delta}) bb = bb.include(v);
            core = intersect(intersect(Region::half_plane(n, dot(n, a) + delta), Region::half_plane(-n, -dot(n, a) + delta)),
                             intersect(Region::half_plane(-t, -dot(t, a)), Region::half_plane(t, dot(t, b))));
            // the box carries a finite bounding box; the half-planes alone do not
            bb = bb.grown(delta);
            core = intersect(Region::box(bb.lo, bb.hi), core);
        }
        return unite(core, ends);
    }
    Region ring = annulus(p.c, p.r - delta, p.r + delta);
    if (p.full_circle()) return ring;
    return unite(intersect(ring, wedge(p.c, p.t0, p.t1)), ends);
}

enum class Side { outer, inner };

inline Region tubes(const BoundaryCurve& bc, double delta) {
    std::vector<Region> parts;
    for (const auto& p : bc.pieces) parts.push_back(tube(p, delta));
    // balanced union keeps the tree shallow
    while (parts.size() > 1) {
        std::vector<Region> next;
        for (size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(unite(parts[i], parts[i + 1]));
        if (parts.size() % 2) next.push_back(parts.back());
        parts = std::move(next);
    }
    return parts.empty() ? Region::empty() : parts.front();
}

// outer: {dist(., r) < delta}; inner: {p in r : dist(p, complement) >= delta}
inline Region offset(const Region& r, double delta, Side side) {
    if (!(delta > 0) || !std::isfinite(delta)) throw std::invalid_argument("neighborhood width must be positive");
    if (r.is_empty()) return r;
    const Node& n = r.node();
    if (n.op == Op::disk) return Region::disk(n.c, side == Side::outer ? n.r + delta : n.r - delta);
    if (n.op == Op::box && side == Side::inner) return Region::box(n.lo + Vec2{delta, delta}, n.hi - Vec2{delta, delta});
    Region t = tubes(r.boundary(), delta);
    return side == Side::outer ? unite(r, t) : subtract(r, t);
}

struct Neighborhood {
    Region region;
    bool empty = false;
};

inline Neighborhood neighborhood(const Region& r, double delta, Side side) {
    Neighborhood out{offset(r, delta, side), false};
    out.empty = out.region.is_empty() || area(out.region) <= 0.0;
    return out;
}

// ---- boundary queries ---------------------------------------------------------------------------

// pieces of bc clipped to the open window region
inline BoundaryCurve clip(const BoundaryCurve& bc, const Region& window) {
    BoundaryCurve out;
    if (window.is_empty()) return out;
    BBox all;
    for (const auto& p : bc.pieces) {
        if (p.kind == Piece::arc) all = all.include(p.c - Vec2{p.r, p.r}).include(p.c + Vec2{p.r, p.r});
        else all = all.include(p.a).include(p.b);
    }
    std::vector<Piece> wc;
    window.primitive_curves(all.grown(0.125 * std::max(all.size(), 1e-300)), wc);
    for (const auto& p : bc.pieces) {
        std::vector<double> cuts;
        for (const auto& w : wc)
            for (auto [u, v] : detail::intersect(p, w)) cuts.push_back(u);
        for (auto [u0, u1] : detail::split_params(p, cuts)) {
            Piece s = p.sub(u0, u1);
            if (s.length() <= 0) continue;
            Vec2 m = s.kind == Piece::segment ? s.at_param(0.5) : s.at_param(0.5 * (u0 + u1));
            if (window.contains(m)) out.pieces.push_back(s);
        }
    }
    for (Vec2 c : bc.corners)
        if (window.contains(c)) out.corners.push_back(c);
    return out;
}

inline BoundaryCurve reduced_boundary(const Region& r) { return r.boundary(); }
inline BoundaryCurve reduced_boundary(const Region& r, const Region& window) { return clip(r.boundary(), window); }

inline double perimeter(const Region& r) { return r.is_empty() ? 0.0 : r.boundary().length(); }
inline double perimeter(const Region& r, const Region& window) { return clip(r.boundary(), window).length(); }

inline double shell_area(const Region& r, double delta, Side side) { return perimeter(offset(r, delta, side)); }

// balanced union of a list of regions
inline Region unite_all(std::vector<Region> parts) {
    while (parts.size() > 1) {
        std::vector<Region> next;
        for (size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(unite(parts[i], parts[i + 1]));
        if (parts.size() % 2) next.push_back(parts.back());
        parts = std::move(next);
    }
    return parts.empty() ? Region::empty() : parts.front();
}

// set equality and inclusion up to null sets, by area
inline bool same_set(const Region& a, const Region& b, double tol) {
    return area(subtract(a, b)) <= tol && area(subtract(b, a)) <= tol;
}

inline bool contained_in(const Region& a, const Region& b, double tol) { return area(subtract(a, b)) <= tol; }

// ---- point classification ---------------------------------------------------------------------

enum class PointKind { interior, exterior, reduced_boundary, other };

inline const char* to_string(PointKind k) {
    switch (k) {
        case PointKind::interior: return "essential-interior";
        case PointKind::exterior: return "essential-exterior";
        case PointKind::reduced_boundary: return "reduced-boundary";
        case PointKind::other: return "other";
    }
    return "?";
}

struct PointClass {
    PointKind kind = PointKind::other;
    double density = 0;
    Status status = Status::budget_exhausted;
    Vec2 normal;  // estimated outward normal, meaningful on the reduced boundary
};

inline constexpr double density_class_tol = 1e-2;

inline PointClass classify_point(const Region& r, Vec2 p, const ScaleSchedule& s = {}) {
    PointClass pc;
    auto res = limit_extrapolate<double>([&](double d) { return area_in_disk(r, p, d) / (pi * d * d); }, s);
    pc.status = res.status;
    pc.density = std::clamp(res.value, 0.0, 1.0);
    if (!res.converged()) return pc;
    double d = pc.density;
    if (std::fabs(d - 1.0) <= density_class_tol) pc.kind = PointKind::interior;
    else if (d <= density_class_tol) pc.kind = PointKind::exterior;
    else if (std::fabs(d - 0.5) <= density_class_tol) {
        // require the centroid direction of r near p to settle
        std::array<Vec2, 2> dirs;
        for (int i = 0; i < 2; ++i) {
            double rad = res.trace[res.trace.size() - 1 - i].first;
            Vec2 m;
            area_in_disk(r, p, rad, &m);
            dirs[i] = norm(m) > 0 ? -unit(m) : Vec2{};
        }
        if (norm(dirs[0]) > 0 && norm(dirs[0] - dirs[1]) <= density_class_tol) {
            pc.kind = PointKind::reduced_boundary;
            pc.normal = dirs[0];
        }
    }
    return pc;
}

// ---- construction validation -------------------------------------------------------------------

// rejects regions whose operand boundaries touch tangentially
inline void validate_transversal(const Region& r) {
    if (!r.bounded()) throw std::invalid_argument("region must be bounded");
    if (r.is_empty()) return;
    const BBox bb = r.bbox();
    double scale = bb.size();
    std::vector<Piece> cs;
    r.primitive_curves(bb.grown(0.125 * scale), cs);
    auto tangent = [&](const Piece& p, const Piece& q) {
        if (p.kind == Piece::arc && q.kind == Piece::arc) {
            double d = norm(p.c - q.c);
            if (d <= 1e-12 * scale) return false;  // concentric: coincident or disjoint
            return std::fabs(d - (p.r + q.r)) <= 1e-9 * scale || std::fabs(d - std::fabs(p.r - q.r)) <= 1e-9 * scale;
        }
        if (p.kind == Piece::segment && q.kind == Piece::segment) return false;
        const Piece& s = p.kind == Piece::segment ? p : q;
        const Piece& a = p.kind == Piece::segment ? q : p;
        Vec2 d = s.b - s.a;
        double t = dot(a.c - s.a, d) / norm2(d);
        if (t < 0 || t > 1) return false;
        double dist = norm(a.c - (s.a + d * t));
        return std::fabs(dist - a.r) <= 1e-9 * scale;
    };
    for (size_t i = 0; i < cs.size(); ++i)
        for (size_t j = i + 1; j < cs.size(); ++j)
            if (tangent(cs[i], cs[j])) throw std::invalid_argument("tangential contact between operand boundaries");
}

}  // namespace divgreen
