#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "divgreen/geometry.hpp"
#include "divgreen/limit.hpp"
#include "divgreen/quad.hpp"

namespace divgreen {

inline constexpr double measure_tol = 1e-6;
inline constexpr double certificate_tol = 1e-3;

// A finitely additive set function given by a limit recipe: for each set A, sequence(A) maps a
// scale to the approximating value, and eval extrapolates the scale to zero.
template <class T>
struct LimitMeasure {
    std::function<std::function<T(double)>(const Region&)> sequence;
    ScaleSchedule schedule;
    Region ambient;
    std::string kind;
};

template <class T>
LimitResult<T> eval(const LimitMeasure<T>& m, const Region& A) {
    if (A.is_empty()) {
        LimitResult<T> r;
        r.status = Status::converged;
        return r;
    }
    auto seq = m.sequence(A);
    return limit_extrapolate<T>(seq, m.schedule);
}

// ---- constructions ------------------------------------------------------------------------------

// mu(A) = lim lambda(A n B(p,d) n ambient) / lambda(B(p,d) n ambient)
inline LimitMeasure<double> density_measure(Vec2 p, const Region& ambient, const ScaleSchedule& s = {}) {
    s.validate();
    for (double d : {s.initial, s.scales().back()})
        if (!(area_in_disk(ambient, p, d) > 0))
            throw std::invalid_argument("point has no positive-area neighborhood in the ambient region");
    LimitMeasure<double> m;
    m.schedule = s;
    m.schedule.growth_rule = false;
    m.ambient = ambient;
    m.kind = "density";
    m.sequence = [p, ambient](const Region& A) {
        Region B = intersect(A, ambient);
        return std::function<double(double)>([p, ambient, B](double d) {
            return area_in_disk(B, p, d) / area_in_disk(ambient, p, d);
        });
    };
    return m;
}

// Lebesgue measure restricted to the ambient region (constant sequence).
inline LimitMeasure<double> area_measure(const Region& ambient) {
    LimitMeasure<double> m;
    m.ambient = ambient;
    m.kind = "area";
    m.sequence = [ambient](const Region& A) {
        double a = area(intersect(A, ambient));
        return std::function<double(double)>([a](double) { return a; });
    };
    return m;
}

struct SmearSupport {
    BoundaryCurve curve;
    std::vector<std::pair<Vec2, double>> points;  // point masses with weights
};

// mu(A) = lim int_support density(x) lambda(A n B(x,d) n ambient) / lambda(B(x,d) n ambient) dH1(x)
inline LimitMeasure<double> smear_radon(const SmearSupport& support, std::function<double(Vec2)> density,
                                        const Region& ambient, const ScaleSchedule& s = {}) {
    s.validate();
    const double dmin = s.scales().back();
    auto positive = [&](Vec2 x) {
        if (!(area_in_disk(ambient, x, dmin) > 0))
            throw std::invalid_argument("support point without positive-area neighborhood in the ambient region");
    };
    for (const auto& pc : support.curve.pieces) {
        positive(pc.start());
        positive(pc.end());
        positive(pc.point(0.5 * pc.length()));
    }
    for (const auto& [x, w] : support.points) positive(x);

    LimitMeasure<double> m;
    m.schedule = s;
    m.schedule.growth_rule = false;
    m.ambient = ambient;
    m.kind = "smear-ball-ratio";
    m.sequence = [support, density, ambient](const Region& A) {
        Region B = intersect(A, ambient);
        return std::function<double(double)>([support, density, ambient, B](double d) {
            if (B.is_empty()) return 0.0;
            auto ratio = [&](Vec2 x) {
                double den = area_in_disk(ambient, x, d);
                if (!(den > 0)) throw std::invalid_argument("support point without positive-area neighborhood");
                return area_in_disk(B, x, d) / den;
            };
            double v = 0;
            for (const auto& [x, w] : support.points) v += w * ratio(x);
            BBox bb = B.bbox().grown(d);
            auto near = clip(support.curve, Region::box(bb.lo, bb.hi));
            CurveQuad o;
            o.abs_tol = 1e-10;
            o.rel_tol = 1e-10;
            v += integrate_curve<double>([&](Vec2 x, Vec2) { return density(x) * ratio(x); }, near, o).value;
            return v;
        });
    };
    return m;
}

// ---- outer measure ------------------------------------------------------------------------------

struct OuterMeasure {
    double value = HUGE_VAL;  // +infinity when no algebra element contains A
    bool found = false;
    Status status = Status::converged;
    std::string note;
};

// Throws unless the list is closed under union, intersection and difference up to null sets.
inline void validate_algebra(const std::vector<Region>& algebra, double tol = 1e-12) {
    std::vector<double> areas;
    for (const auto& r : algebra) {
        if (!r.bounded()) throw std::invalid_argument("algebra elements must be bounded");
        areas.push_back(area(r));
    }
    auto member = [&](const Region& x) {
        double a = area(x);
        for (size_t i = 0; i < algebra.size(); ++i)
            if (std::fabs(areas[i] - a) <= tol && same_set(x, algebra[i], tol)) return true;
        return false;
    };
    for (size_t i = 0; i < algebra.size(); ++i)
        for (size_t j = i + 1; j < algebra.size(); ++j) {
            const Region &a = algebra[i], &b = algebra[j];
            if (!member(unite(a, b)) || !member(intersect(a, b)) || !member(subtract(a, b)) || !member(subtract(b, a)))
                throw std::invalid_argument("family is not closed under union, intersection and difference");
        }
}

inline OuterMeasure outer_measure(const LimitMeasure<double>& m, const Region& A, const std::vector<Region>& algebra,
                                  bool validate = true) {
    if (validate) validate_algebra(algebra);
    OuterMeasure out;
    const double tol = 1e-12 * std::max(1.0, A.is_empty() ? 0.0 : area(A));
    for (const auto& S : algebra) {
        if (!contained_in(A, S, tol)) continue;
        auto r = eval(m, S);
        if (!r.converged()) {
            out.status = worst(out.status, r.status);
            continue;
        }
        if (!out.found || r.value < out.value) out.value = r.value;
        out.found = true;
    }
    if (!out.found) out.note = "no superset in algebra";
    return out;
}

// ---- grids --------------------------------------------------------------------------------------

struct Cell {
    BBox box;
    int level = 0;

    Region region() const { return Region::box(box.lo, box.hi); }
    std::array<Cell, 4> children() const {
        Vec2 c = box.center();
        return {{{{box.lo, c}, level + 1},
                 {{{c.x, box.lo.y}, {box.hi.x, c.y}}, level + 1},
                 {{{box.lo.x, c.y}, {c.x, box.hi.y}}, level + 1},
                 {{c, box.hi}, level + 1}}};
    }
};

// square root cell covering the ambient bounding box
inline Cell root_cell(const Region& ambient) {
    BBox bb = ambient.bbox();
    if (!bb.bounded()) throw std::domain_error("grid over an unbounded ambient region");
    double s = bb.size();
    return {{bb.lo, bb.lo + Vec2{s, s}}, 0};
}

inline std::vector<Cell> uniform_cells(const Cell& root, int depth) {
    std::vector<Cell> cells{root};
    for (int l = 0; l < depth; ++l) {
        std::vector<Cell> next;
        for (const auto& c : cells)
            for (const auto& ch : c.children()) next.push_back(ch);
        cells = std::move(next);
    }
    return cells;
}

// ---- convergence in measure ---------------------------------------------------------------------

struct InMeasureReport {
    std::vector<int> indices;
    std::vector<double> masses;
    std::vector<Status> statuses;
    bool converges = false;
};

// For each index, the cells of a 2^depth grid where |f_k - f| > eps at some sample are collected, and
// the (outer) measure of their union is recorded. Without an algebra the grid algebra itself is used,
// where the outer measure of a union of cells is its value.
inline InMeasureReport converges_in_measure(const std::vector<std::function<double(Vec2)>>& f_seq,
                                            const std::function<double(Vec2)>& f, const LimitMeasure<double>& m,
                                            double eps, const std::vector<Region>& algebra, int grid_depth) {
    InMeasureReport rep;
    auto cells = uniform_cells(root_cell(m.ambient), grid_depth);
    for (size_t k = 0; k < f_seq.size(); ++k) {
        std::vector<Region> flagged;
        for (const auto& c : cells) {
            bool hit = false;
            for (int i = 0; i < 3 && !hit; ++i)
                for (int j = 0; j < 3 && !hit; ++j) {
                    Vec2 p{c.box.lo.x + 0.25 * (i + 1) * (c.box.hi.x - c.box.lo.x),
                           c.box.lo.y + 0.25 * (j + 1) * (c.box.hi.y - c.box.lo.y)};
                    if (!m.ambient.contains(p)) continue;
                    double d = std::fabs(f_seq[k](p) - f(p));
                    if (!(d <= eps)) hit = true;
                }
            if (hit) flagged.push_back(c.region());
        }
        double mass = 0;
        Status st = Status::converged;
        if (!flagged.empty()) {
            Region u = unite_all(flagged);
            if (algebra.empty()) {
                auto r = eval(m, u);
                mass = std::fabs(r.value);
                st = r.status;
            } else {
                auto o = outer_measure(m, u, algebra, false);
                mass = o.value;
                st = o.found ? o.status : Status::budget_exhausted;
            }
        }
        rep.indices.push_back(static_cast<int>(k));
        rep.masses.push_back(mass);
        rep.statuses.push_back(st);
    }
    rep.converges = !rep.masses.empty() && rep.masses.back() <= certificate_tol;
    return rep;
}

// ---- Daniell integral ---------------------------------------------------------------------------

struct SimpleFunction {
    std::vector<std::pair<Region, double>> terms;

    void validate(double tol = 1e-12) const {
        for (size_t i = 0; i < terms.size(); ++i)
            for (size_t j = i + 1; j < terms.size(); ++j)
                if (area(intersect(terms[i].first, terms[j].first)) > tol)
                    throw std::invalid_argument("simple function regions overlap");
    }
};

struct DaniellResult {
    LimitResult<double> result;
    std::vector<double> level_values;  // integrals of the determining simple functions
    std::string note;
};

// Integral of a simple function: sum of coefficient times measure.
inline DaniellResult daniell_integrate(const SimpleFunction& g, const LimitMeasure<double>& m) {
    g.validate();
    DaniellResult out;
    out.result.status = Status::converged;
    for (const auto& [r, c] : g.terms) {
        auto v = eval(m, r);
        out.result.value += c * v.value;
        out.result.error_bound += std::fabs(c) * v.error_bound;
        out.result.status = worst(out.result.status, v.status);
    }
    out.level_values.push_back(out.result.value);
    return out;
}

// Daniell integral of a bounded f against a nonnegative limit measure. Level l uses the cells of a
// 2^l grid that carry mass, with f quantized to the bin midpoints of 2^l thresholds over its sampled
// range; the level integrals form the determining sequence and must be Cauchy.
inline DaniellResult daniell_integrate(const std::function<double(Vec2)>& f, const LimitMeasure<double>& m,
                                       int levels) {
    if (levels < 3) throw std::invalid_argument("at least 3 levels required");
    const Cell root = root_cell(m.ambient);
    double fmin = HUGE_VAL, fmax = -HUGE_VAL;
    for (const auto& c : uniform_cells(root, std::min(levels, 7)))
        for (Vec2 p : {c.box.center(), c.box.lo}) {
            if (!m.ambient.contains(p)) continue;
            double v = f(p);
            if (!std::isfinite(v)) throw std::invalid_argument("integrand must be bounded on the ambient region");
            fmin = std::min(fmin, v);
            fmax = std::max(fmax, v);
        }
    if (!(fmin <= fmax)) fmin = fmax = 0;

    DaniellResult out;
    std::vector<Cell> active{root};
    int level = 0;
    Status st = Status::converged;
    auto seq = [&](double) {
        std::vector<Cell> next;
        for (const auto& c : active)
            for (const auto& ch : c.children()) next.push_back(ch);
        ++level;
        double step = (fmax - fmin) / std::ldexp(1.0, level);
        double sum = 0;
        active.clear();
        for (const auto& c : next) {
            auto r = eval(m, c.region());
            st = worst(st, r.status);
            if (std::fabs(r.value) <= 1e-12) continue;
            active.push_back(c);
            double v = f(c.box.center());
            double q = step > 0 ? fmin + (std::floor((v - fmin) / step) + 0.5) * step : v;
            sum += q * r.value;
        }
        out.level_values.push_back(sum);
        return sum;
    };
    ScaleSchedule s{0.5, 0.5, levels, certificate_tol, 1e9, true};
    out.result = limit_extrapolate<double>(seq, s);
    if (st != Status::converged) out.result.status = worst(out.result.status, st);
    if (out.result.status == Status::diverging || out.result.status == Status::no_limit) out.note = "not integrable";
    return out;
}

// ---- aura certificates and cores ----------------------------------------------------------------

struct AuraCertificate {
    std::vector<double> lambda;      // reference area of A_k
    std::vector<double> complement;  // |m|(ambient \ A_k)
    std::vector<double> mass;        // m(A_k)
    bool pure_supported = false;
    std::string verdict;
};

inline AuraCertificate aura_check(const LimitMeasure<double>& m, const std::vector<Region>& A_seq) {
    for (size_t i = 0; i + 1 < A_seq.size(); ++i)
        if (!contained_in(A_seq[i + 1], A_seq[i], 1e-12))
            throw std::invalid_argument("aura sequence must be decreasing");
    AuraCertificate c;
    bool ok = !A_seq.empty();
    for (size_t i = 0; i < A_seq.size(); ++i) {
        Region A = intersect(A_seq[i], m.ambient);
        c.lambda.push_back(area(A));
        auto comp = eval(m, subtract(m.ambient, A));
        auto in = eval(m, A);
        c.complement.push_back(std::fabs(comp.value));
        c.mass.push_back(in.value);
        if (!comp.converged() || std::fabs(comp.value) > measure_tol) ok = false;
        if (i > 0 && !(c.lambda[i] < c.lambda[i - 1])) ok = false;
    }
    if (ok && c.lambda.back() > certificate_tol) ok = false;
    c.pure_supported = ok;
    c.verdict = ok ? "pure-supported" : "not-certified";
    return c;
}

// Cells of a 2^depth grid whose quarter-cell neighborhood carries mass above tol, refined
// hierarchically from the root.
template <class T>
std::vector<BBox> core_estimate(const LimitMeasure<T>& m, int depth, double tol = measure_tol) {
    if (depth < 0 || depth > 10) throw std::invalid_argument("core depth must lie in [0, 10]");
    std::vector<Cell> active{root_cell(m.ambient)};
    for (int l = 0; l < depth; ++l) {
        std::vector<Cell> next;
        for (const auto& c : active)
            for (const auto& ch : c.children()) {
                double q = 0.25 * (ch.box.hi.x - ch.box.lo.x);
                BBox g = ch.box.grown(q);
                auto r = eval(m, Region::box(g.lo, g.hi));
                if (norm(r.value) > tol || !r.converged()) next.push_back(ch);
            }
        active = std::move(next);
    }
    std::vector<BBox> out;
    for (const auto& c : active) out.push_back(c.box);
    return out;
}

struct TVBound {
    double value = 0;
    std::vector<double> parts;
    int skipped = 0;
};

template <class T>
TVBound tv_lower_bound(const LimitMeasure<T>& m, const std::vector<Region>& partition, bool check_disjoint = true) {
    if (check_disjoint)
        for (size_t i = 0; i < partition.size(); ++i)
            for (size_t j = i + 1; j < partition.size(); ++j)
                if (area(intersect(partition[i], partition[j])) > 1e-12)
                    throw std::invalid_argument("partition cells overlap");
    TVBound tv;
    for (const auto& P : partition) {
        auto r = eval(m, P);
        if (!r.converged()) {
            ++tv.skipped;
            tv.parts.push_back(0.0);
            continue;
        }
        tv.parts.push_back(norm(r.value));
        tv.value += norm(r.value);
    }
    return tv;
}

}  // namespace divgreen
