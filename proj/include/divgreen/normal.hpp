#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "divgreen/fam.hpp"
#include "divgreen/fields.hpp"
#include "divgreen/geometry.hpp"
#include "divgreen/limit.hpp"
#include "divgreen/quad.hpp"

namespace divgreen {

enum class ApproxKind { canonical, outer, inner, ramp };

inline const char* to_string(ApproxKind k) {
    switch (k) {
        case ApproxKind::canonical: return "canonical";
        case ApproxKind::outer: return "outer";
        case ApproxKind::inner: return "inner";
        case ApproxKind::ramp: return "ramp";
    }
    return "?";
}

inline ApproxKind parse_approx(const std::string& s) {
    if (s == "canonical" || s == "canonical-mollified") return ApproxKind::canonical;
    if (s == "outer" || s == "outer-portmanteau") return ApproxKind::outer;
    if (s == "inner" || s == "inner-portmanteau") return ApproxKind::inner;
    if (s == "ramp" || s == "distance-ramp") return ApproxKind::ramp;
    throw std::invalid_argument("unknown approximation kind: " + s);
}

namespace detail {

// normalizing constant of the standard mollifier C exp(1/(|z|^2 - 1)) in the plane
inline double mollifier_constant() {
    static const double c = [] {
        auto q = integrate_interval<double>(
            [](double r) { return r < 1 ? std::exp(1 / (r * r - 1)) * r : 0.0; }, 0.0, 1.0, 1e-15, 1e-14);
        return 1 / (2 * pi * q.value);
    }();
    return c;
}

inline double mollifier(double r2) { return r2 < 1 ? mollifier_constant() * std::exp(1 / (r2 - 1)) : 0.0; }

// integral over [a, b] by composite 20-point Gauss-Legendre
template <class T, class G>
T gl_composite(G&& g, double a, double b, int panels) {
    T sum{};
    double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        double c = a + (i + 0.5) * h;
        for (auto [x, w] : gl20()) sum += (g(c - 0.5 * h * x) + g(c + 0.5 * h * x)) * (0.5 * h * w);
    }
    return sum;
}

// integral of the unit normal along a piece, in closed form
inline Vec2 normal_integral(const Piece& p) {
    if (p.kind == Piece::segment) return right_normal(p.b - p.a);
    Vec2 v{p.r * (std::sin(p.t1) - std::sin(p.t0)), -p.r * (std::cos(p.t1) - std::cos(p.t0))};
    return p.inward ? -v : v;
}

}  // namespace detail

struct ApproxValidity {
    std::vector<std::pair<double, double>> l1;  // (k, |D eta_k|_1)
    double sup = 0;
    bool bounded = true;
};

// A normal approximation eta_k of the indicator of omega, indexed by k = 1/delta.
struct NormalApproximation {
    ApproxKind kind = ApproxKind::outer;
    Region omega;
    ScaleSchedule schedule{0.125, 0.5, 20, 1e-6, 1e9, true};
    ApproxValidity validity;

    double size() const { return omega.bbox().size(); }

    // value of the limit function at boundary points
    double chi_boundary(Vec2 x) const {
        switch (kind) {
            case ApproxKind::canonical: return classify_point(omega, x).density;
            case ApproxKind::outer: return 1.0;
            case ApproxKind::inner:
            case ApproxKind::ramp: return 0.0;
        }
        return 0.0;
    }

    double chi(Vec2 x) const {
        double sd = signed_distance(omega, x).value;
        if (std::fabs(sd) <= 1e-10 * size()) return chi_boundary(x);
        return sd < 0 ? 1.0 : 0.0;
    }

    Region support(double k) const {
        double d = 1 / k;
        switch (kind) {
            case ApproxKind::outer: return subtract(offset(omega, d, Side::outer), omega);
            case ApproxKind::inner: return subtract(omega, offset(omega, d, Side::inner));
            case ApproxKind::ramp: return subtract(offset(omega, d, Side::inner), offset(omega, 2 * d, Side::inner));
            case ApproxKind::canonical: return subtract(offset(omega, d, Side::outer), offset(omega, d, Side::inner));
        }
        return Region::empty();
    }

    double eta(double k, Vec2 x) const {
        const auto& bc = omega.boundary();
        double d = boundary_distance(bc, x);
        bool in = omega.contains(x);
        switch (kind) {
            case ApproxKind::outer: return in ? 1.0 : std::max(0.0, 1 - k * d);
            case ApproxKind::inner: return in ? std::min(1.0, k * d) : 0.0;
            case ApproxKind::ramp: return in ? std::clamp(k * d - 1, 0.0, 1.0) : 0.0;
            case ApproxKind::canonical: {
                RegionQuad q;
                q.abs_tol = 1e-10;
                q.rel_tol = 1e-10;
                return integrate_region<double>([&](Vec2 y) { return k * k * detail::mollifier(k * k * norm2(y - x)); },
                                                intersect(omega, Region::disk(x, 1 / k)), q)
                    .value;
            }
        }
        return 0.0;
    }

    Vec2 grad(double k, Vec2 x) const {
        const auto& bc = omega.boundary();
        if (kind == ApproxKind::canonical) return mollified_gradient(k, x);
        double d = boundary_distance(bc, x);
        bool in = omega.contains(x);
        switch (kind) {
            case ApproxKind::outer: return (!in && d < 1 / k) ? -distance_gradient(bc, x) * k : Vec2{};
            case ApproxKind::inner: return (in && d < 1 / k) ? distance_gradient(bc, x) * k : Vec2{};
            case ApproxKind::ramp: return (in && d > 1 / k && d < 2 / k) ? distance_gradient(bc, x) * k : Vec2{};
            default: return {};
        }
    }

    // D eta_k(x) = - int_{boundary} rho_k(x - y) n(y) dH1(y)
    Vec2 mollified_gradient(double k, Vec2 x) const {
        const double R = 1 / k, R2 = R * R;
        Vec2 sum;
        for (const auto& p : omega.boundary().pieces) {
            if (p.distance(x) >= R) continue;
            if (p.kind == Piece::segment) {
                double L = p.length();
                Vec2 t = (p.b - p.a) / L, n = right_normal(t);
                double c = dot(t, x - p.a);
                double disc = c * c - norm2(x - p.a) + R2;
                if (disc <= 0) continue;
                double s0 = std::max(0.0, c - std::sqrt(disc)), s1 = std::min(L, c + std::sqrt(disc));
                if (s1 <= s0) continue;
                double w = detail::gl_composite<double>(
                    [&](double s) { return k * k * detail::mollifier(k * k * norm2(p.a + t * s - x)); }, s0, s1, 2);
                sum -= n * w;
            } else {
                double d = norm(x - p.c);
                double lo = p.t0, hi = p.t1;
                std::vector<std::pair<double, double>> spans;
                if (d <= 1e-15 * p.r) {
                    if (p.r < R) spans.emplace_back(lo, hi);
                } else {
                    double kap = (p.r * p.r + d * d - R2) / (2 * p.r * d);
                    if (kap <= -1) spans.emplace_back(lo, hi);
                    else if (kap < 1) {
                        double a = std::acos(kap);
                        double phi = detail::wrap_angle(std::atan2(x.y - p.c.y, x.x - p.c.x), lo);
                        for (double sh : {-2 * pi, 0.0, 2 * pi}) {
                            double u0 = std::max(lo, phi + sh - a), u1 = std::min(hi, phi + sh + a);
                            if (u1 > u0) spans.emplace_back(u0, u1);
                        }
                    }
                }
                for (auto [u0, u1] : spans)
                    sum -= detail::gl_composite<Vec2>(
                        [&](double u) {
                            Vec2 rad{std::cos(u), std::sin(u)};
                            double w = k * k * detail::mollifier(k * k * norm2(p.c + rad * p.r - x)) * p.r;
                            return (p.inward ? -rad : rad) * w;
                        },
                        u0, u1, 2);
            }
        }
        return sum;
    }

    // quadrature options with the kinks of the boundary distance declared: vertices, arc centers and,
    // for the distance-based kinds, the corner bisectors across which the distance gradient jumps
    RegionQuad quad_options() const {
        RegionQuad q;
        q.abs_tol = 1e-9;
        q.rel_tol = 1e-9;
        const auto& bc = omega.boundary();
        const double tol = 1e-12 * size();
        for (const auto& p : bc.pieces) {
            q.extra_x.push_back(p.a.x);
            q.extra_y.push_back(p.a.y);
            if (p.kind == Piece::arc) {
                q.extra_x.push_back(p.c.x);
                q.extra_y.push_back(p.c.y);
            }
        }
        if (kind == ApproxKind::canonical) return q;
        for (Vec2 c : bc.corners) {
            Vec2 n;
            for (const auto& p : bc.pieces) {
                if (norm(p.end() - c) <= tol) n += p.normal(p.length());
                if (norm(p.start() - c) <= tol) n += p.normal(0.0);
            }
            if (norm(n) > 1e-9) q.creases.emplace_back(c, n);
        }
        return q;
    }

    // |D eta_k|_1
    double gradient_mass(double k) const {
        double d = 1 / k;
        switch (kind) {
            case ApproxKind::outer: return (area(offset(omega, d, Side::outer)) - area(omega)) * k;
            case ApproxKind::inner: return (area(omega) - area(offset(omega, d, Side::inner))) * k;
            case ApproxKind::ramp:
                return (area(offset(omega, d, Side::inner)) - area(offset(omega, 2 * d, Side::inner))) * k;
            case ApproxKind::canonical: {
                RegionQuad q = quad_options();
                q.abs_tol = 1e-7;
                q.rel_tol = 1e-7;
                return integrate_region<double>([&](Vec2 x) { return norm(mollified_gradient(k, x)); }, support(k), q)
                    .value;
            }
        }
        return 0.0;
    }
};

struct ApproxParams {
    ScaleSchedule schedule{0.125, 0.5, 20, 1e-6, 1e9, true};
    int validity_steps = 5;
};

inline NormalApproximation make_approximation(const Region& omega, ApproxKind kind, const ApproxParams& prm = {}) {
    validate_transversal(omega);
    if (omega.is_empty() || !(area(omega) > 0)) throw std::invalid_argument("approximated set must have positive area");
    prm.schedule.validate();
    NormalApproximation na;
    na.kind = kind;
    na.omega = omega;
    na.schedule = prm.schedule;
    const double dmin = prm.schedule.scales().back();
    if ((kind == ApproxKind::inner || kind == ApproxKind::ramp) &&
        neighborhood(omega, (kind == ApproxKind::ramp ? 2 : 1) * dmin, Side::inner).empty)
        throw std::invalid_argument("inner neighborhoods are empty at the finest scale");
    auto scales = prm.schedule.scales();
    int n = std::min<int>(prm.validity_steps, static_cast<int>(scales.size()));
    for (int i = 0; i < n; ++i) {
        double k = 1 / scales[i];
        double m = na.gradient_mass(k);
        na.validity.l1.emplace_back(k, m);
        na.validity.sup = std::max(na.validity.sup, m);
    }
    // an increase by more than 5% over each of the last three steps is read as an unbounded trend
    if (n >= 4) {
        bool trend = true;
        for (int i = n - 3; i < n; ++i)
            if (!(na.validity.l1[i].second > 1.05 * na.validity.l1[i - 1].second)) trend = false;
        na.validity.bounded = !trend;
    }
    return na;
}

// ---- normal measures ----------------------------------------------------------------------------

// nu(B) = -lim_k int_B D eta_k
inline LimitMeasure<Vec2> normal_measure_shell(const NormalApproximation& na) {
    LimitMeasure<Vec2> m;
    m.schedule = na.schedule;
    m.schedule.growth_rule = false;  // bounded by |D eta_k|_1
    m.ambient = na.omega;
    m.kind = std::string("shell-") + to_string(na.kind);
    m.sequence = [na](const Region& B) {
        RegionQuad q = na.quad_options();
        return std::function<Vec2(double)>([na, B, q](double d) {
            double k = 1 / d;
            Region S = intersect(B, na.support(k));
            return -integrate_region<Vec2>([&](Vec2 x) { return na.grad(k, x); }, S, q).value;
        });
    };
    return m;
}

// integral of chi-weighted g(point, n_B) over the boundary of B, where chi is 1 inside omega, the
// limit value on the boundary of omega and 0 outside its closure
template <class T, class G>
QuadResult<T> weighted_boundary_integral(const Region& B, const NormalApproximation& na, G&& g,
                                         const std::vector<Vec2>& singular = {}) {
    const Region& omega = na.omega;
    const double size = na.size();
    BBox big = omega.bbox().grown(0.25 * size);
    Region Bc = intersect(B, Region::box(big.lo, big.hi));
    QuadResult<T> out;
    if (Bc.is_empty()) return out;
    const auto& ob = omega.boundary();
    CurveQuad cq;
    cq.singular_points = singular;
    for (const auto& p : Bc.boundary().pieces) {
        std::vector<double> cuts;
        for (const auto& q : ob.pieces)
            for (auto [u, v] : detail::intersect(p, q)) cuts.push_back(u);
        for (auto [u0, u1] : detail::split_params(p, cuts)) {
            Piece s = p.sub(u0, u1);
            if (!(s.length() > 0)) continue;
            Vec2 m = s.point(0.5 * s.length());
            double w;
            if (boundary_distance(ob, m) <= 1e-9 * size) w = na.chi_boundary(m);
            else w = omega.contains(m) ? 1.0 : 0.0;
            if (w == 0) continue;
            for (Vec2 z : singular)
                if (s.distance(z) <= 1e-12 * size && norm(z - s.start()) > 1e-12 * size && norm(z - s.end()) > 1e-12 * size)
                    throw std::invalid_argument("singular point in the interior of an interface curve");
            auto r = integrate_curve<T>(g, s, cq);
            out.value += r.value * w;
            out.error += r.error * std::fabs(w);
            out.evals += r.evals;
            out.status = worst(out.status, r.status);
        }
    }
    return out;
}

// nu(B) = -int_{boundary of B in the closure of omega} chi n_B dH1
inline Vec2 normal_measure_boundary(const NormalApproximation& na, const Region& B) {
    return -weighted_boundary_integral<Vec2>(B, na, [](Vec2, Vec2 n) { return n; }).value;
}

// ---- Gauss formulas ------------------------------------------------------------------------------

struct GaussReport {
    double lhs = 0, rhs = 0;
    double lhs_error = 0, rhs_error = 0;
    Status lhs_status = Status::converged, rhs_status = Status::converged;
    double residual = 0;
    double tol = certificate_tol;
    bool pass = false;
    bool corner_atom = false;
    std::string field, region, approx;
    std::vector<std::pair<double, double>> rhs_trace;  // (k, value)

    void finish() {
        residual = std::fabs(lhs - rhs);
        pass = residual <= tol && lhs_status == Status::converged && rhs_status == Status::converged;
    }
};

// scalar measure B -> lim_k int_B F . (-D eta_k)
inline LimitMeasure<double> normal_trace_bounded(const DMField& F, const NormalApproximation& na) {
    LimitMeasure<double> m;
    m.schedule = na.schedule;
    m.schedule.growth_rule = false;  // bounded by |F|_inf |D eta_k|_1
    m.ambient = na.omega;
    m.kind = "normal-trace-" + F.name;
    m.sequence = [F, na](const Region& B) {
        RegionQuad q = na.quad_options();
        for (Vec2 s : F.singular_points) q.singular_points.push_back(s);
        return std::function<double(double)>([F, na, B, q](double d) {
            double k = 1 / d;
            Region S = intersect(B, na.support(k));
            return -integrate_region<double>([&](Vec2 x) { return dot(F(x), na.grad(k, x)); }, S, q).value;
        });
    };
    return m;
}

inline GaussReport gauss_check_bounded(const DMField& F, const NormalApproximation& na, const std::string& region_name = "") {
    if (!F.singular_curves.empty()) throw std::invalid_argument("field must be essentially bounded near the region");
    GaussReport rep;
    rep.field = F.name;
    rep.region = region_name;
    rep.approx = to_string(na.kind);
    auto lhs = divergence_of(F, na.omega, [&](Vec2 x) { return na.chi(x); });
    rep.lhs = lhs.value;
    rep.lhs_error = lhs.error;
    rep.lhs_status = lhs.status;
    rep.corner_atom = lhs.corner_atom;
    BBox big = na.omega.bbox().grown(0.25 * na.size());
    auto r = eval(normal_trace_bounded(F, na), Region::box(big.lo, big.hi));
    rep.rhs = r.value;
    rep.rhs_error = r.error_bound;
    rep.rhs_status = r.status;
    for (auto [s, v] : r.trace) rep.rhs_trace.emplace_back(1 / s, v);
    rep.finish();
    return rep;
}

// Gauss formula for g F with a simple scalar g = sum c_i 1_{R_i}
inline GaussReport gauss_bv_scalar(const DMField& F, const SimpleFunction& g, const NormalApproximation& na) {
    g.validate();
    GaussReport rep;
    rep.field = F.name;
    rep.approx = to_string(na.kind);
    auto chi = [&](Vec2 x) { return na.chi(x); };
    auto trace = normal_trace_bounded(F, na);
    rep.rhs_status = Status::converged;
    BBox big = na.omega.bbox().grown(0.25 * na.size());
    for (const auto& [R, c] : g.terms) {
        Region Rc = intersect(R, Region::box(big.lo, big.hi));
        for (const auto& a : F.div.atoms)
            if (!Rc.is_empty() && boundary_distance(Rc.boundary(), a.p) <= 1e-12 * na.size())
                throw std::invalid_argument("atom on an interface of the simple function");
        Region RO = intersect(R, na.omega);
        auto dens = divergence_of(DMField{F.name, F.F, {}, {}, {F.div.density, {}, {}}, F.p, F.sup_norm}, RO, chi);
        double atoms = 0;
        for (const auto& a : F.div.atoms)
            if (R.contains(a.p)) atoms += a.weight * chi(a.p);
        auto jump = weighted_boundary_integral<double>(R, na, [&](Vec2 x, Vec2 n) { return dot(F(x), n); },
                                                       F.singular_points);
        rep.lhs += c * (dens.value + atoms - jump.value);
        rep.lhs_error += std::fabs(c) * (dens.error + jump.error);
        rep.lhs_status = worst(rep.lhs_status, worst(dens.status, jump.status));
        auto r = eval(trace, R);
        rep.rhs += c * r.value;
        rep.rhs_error += std::fabs(c) * r.error_bound;
        rep.rhs_status = worst(rep.rhs_status, r.status);
    }
    rep.finish();
    return rep;
}

// ---- total variation lower bound -----------------------------------------------------------------

struct TVCheck {
    double tv = 0;
    double perimeter = 0;
    int cells = 0;
    int skipped = 0;
    bool pass = false;
};

// partition TV of the shell measure over A, on a grid whose lines pass through the corners of the
// bounding box of omega
inline TVCheck tv_lowerbound_check(const NormalApproximation& na, const Region& A, int n = 4, double tol = 1e-2) {
    BBox ob = na.omega.bbox();
    double h = ob.size() / n;
    std::vector<Region> cells;
    for (int i = -1; i <= n; ++i)
        for (int j = -1; j <= n; ++j) {
            Vec2 lo{ob.lo.x + i * h, ob.lo.y + j * h};
            Region c = intersect(A, Region::box(lo, lo + Vec2{h, h}));
            if (!c.is_empty() && area(c) > 0) cells.push_back(c);
        }
    TVCheck chk;
    auto tv = tv_lower_bound(normal_measure_shell(na), cells, false);
    chk.tv = tv.value;
    chk.skipped = tv.skipped;
    chk.cells = static_cast<int>(cells.size());
    chk.perimeter = perimeter(na.omega, A);
    chk.pass = chk.skipped == 0 && chk.tv >= chk.perimeter - tol;
    return chk;
}

// ---- non-integrability witnesses -----------------------------------------------------------------

enum class WitnessKind { tangential, atomic };

struct WitnessReport {
    std::string kind;
    std::vector<double> thresholds;
    std::vector<double> values;
    std::vector<double> increments;
    std::string verdict;
};

// tangential: partition TV of the shell measure of omega over {|F| >= M} n omega^delta, delta = 1/(2M^2),
// cut into slabs across the singular curve. atomic: int_{(0,1/2)} min(|F|, M) dH1 along the boundary
// piece that starts at the atom, a lower bound for int min(|F|, M) d|nu|.
inline WitnessReport nonintegrability_witness(const DMField& F, const NormalApproximation& na, WitnessKind kind,
                                              const std::vector<double>& Ms, int slabs = 8) {
    WitnessReport rep;
    rep.kind = kind == WitnessKind::tangential ? "tangential" : "atomic";
    rep.thresholds = Ms;
    if (F.bounded()) {
        rep.verdict = "integrable";
        return rep;
    }
    if (kind == WitnessKind::tangential) {
        if (F.singular_curves.empty()) throw std::invalid_argument("tangential witness needs a singular curve");
        const Piece& c = F.singular_curves.front();
        Vec2 t = unit(c.b - c.a), n = right_normal(t);
        auto shell = normal_measure_shell(na);
        BBox ob = na.omega.bbox();
        double smin = HUGE_VAL, smax = -HUGE_VAL;
        for (Vec2 q : {ob.lo, ob.hi, Vec2{ob.lo.x, ob.hi.y}, Vec2{ob.hi.x, ob.lo.y}}) {
            smin = std::min(smin, dot(t, q));
            smax = std::max(smax, dot(t, q));
        }
        for (double M : Ms) {
            // |F| >= M on the band |x - y| <= 2/M^2 around the curve, for this fixture's profile
            double w = std::sqrt(2.0) / (M * M);
            double a = dot(n, c.a);
            Region band = intersect(Region::half_plane(n, a + w), Region::half_plane(-n, -a + w));
            Region U = intersect(band, offset(na.omega, 1 / (2 * M * M), Side::outer));
            std::vector<Region> parts;
            double ds = (smax - smin) / slabs;
            for (int i = 0; i < slabs; ++i) {
                double s0 = smin - 1e-3 + i * (ds + 2e-3 / slabs), s1 = s0 + ds + 2e-3 / slabs;
                parts.push_back(intersect(U, intersect(Region::half_plane(-t, -s0), Region::half_plane(t, s1))));
            }
            rep.values.push_back(tv_lower_bound(shell, parts, false).value);
        }
        rep.verdict = "not-approximable-in-measure";
    } else {
        if (F.div.atoms.empty()) throw std::invalid_argument("atomic witness needs an atom");
        Vec2 z = F.div.atoms.front().p;
        const Piece* edge = nullptr;
        for (const auto& p : na.omega.boundary().pieces)
            if (p.kind == Piece::segment && (norm(p.a - z) <= 1e-12 || norm(p.b - z) <= 1e-12)) {
                edge = &p;
                break;
            }
        if (!edge) throw std::invalid_argument("atomic witness needs a boundary segment starting at the atom");
        Vec2 far = norm(edge->a - z) <= 1e-12 ? edge->b : edge->a;
        Vec2 e = unit(far - z);
        double L = std::min(0.5, norm(far - z));
        for (double M : Ms) {
            // min(|F|, M) switches branch where |F| = M
            double knee = 0;
            auto g = [&](double s) { return std::min(norm(F(z + e * s)), M); };
            double lo = 0, hi = L;
            for (int i = 0; i < 200; ++i) {
                double mid = 0.5 * (lo + hi);
                (norm(F(z + e * mid)) > M ? lo : hi) = mid;
            }
            knee = hi;
            auto q = integrate_interval<double>(g, 0.0, L, 1e-13, 1e-13, 2000, {knee});
            rep.values.push_back(q.value);
        }
        rep.verdict = "not-integrable";
    }
    for (size_t i = 1; i < rep.values.size(); ++i) rep.increments.push_back(rep.values[i] - rep.values[i - 1]);
    return rep;
}

}  // namespace divgreen
