#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "divgreen/fam.hpp"
#include "divgreen/fields.hpp"
#include "divgreen/normal.hpp"
#include "divgreen/report.hpp"
#include "divgreen/trace.hpp"

namespace divgreen {

// plot data collected while the criteria run: file name -> CSV text
using PlotData = std::map<std::string, std::string>;

struct Criterion {
    int id;
    std::string name;
    double runtime_limit;  // seconds; the suite budget where no tighter limit applies
    std::function<Record(double tol, PlotData&)> run;
};

namespace detail {

inline ScalarFn constant_one() {
    return {"1", [](Vec2) { return 1.0; }, [](Vec2) { return Vec2{}; }, 0};
}

// uniform on [-1, 1) from the raw 32-bit engine output, identical on every platform
inline double unit_draw(std::mt19937& rng) { return (static_cast<double>(rng()) + 0.5) / 2147483648.0 - 1.0; }

// sin(pi x) sin(pi y) (c0 + sum_i a_i cos(b_i . x + phi_i)), zero on the boundary of the unit box
inline ScalarFn boundary_zero_function(std::mt19937& rng) {
    double c0 = unit_draw(rng);
    std::array<double, 3> a{}, phi{};
    std::array<Vec2, 3> b{};
    for (int i = 0; i < 3; ++i) {
        a[i] = unit_draw(rng);
        phi[i] = pi * unit_draw(rng);
        b[i] = Vec2{3 * unit_draw(rng), 3 * unit_draw(rng)};
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
    f.name = "boundary-zero";
    f.f = [=](Vec2 p) { return std::sin(pi * p.x) * std::sin(pi * p.y) * g(p); };
    f.grad = [=](Vec2 p) {
        double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
        return Vec2{pi * std::cos(pi * p.x) * sy, pi * sx * std::cos(pi * p.y)} * g(p) + dg(p) * (sx * sy);
    };
    f.hess_bound = 200;
    return f;
}

inline json vec_json(Vec2 v) { return json::array({jnum(v.x), jnum(v.y)}); }

template <class T>
json array_json(const std::vector<T>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(jnum(x));
    return a;
}

inline std::string shell_csv(const ShellLimit& s) {
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < s.ks.size(); ++i) rows.push_back({s.ks[i], s.values[i]});
    return format_csv({"k", "S_k"}, rows);
}

inline bool strip_checks(const std::vector<double>& ks, const ShellLimit& s, const std::function<bool(size_t)>& ok) {
    int hits = 0;
    for (double k : ks)
        for (size_t i = 0; i < s.ks.size(); ++i)
            if (std::fabs(s.ks[i] - k) <= 1e-9 * k) {
                ++hits;
                if (!ok(i)) return false;
            }
    return hits == static_cast<int>(ks.size());
}

}  // namespace detail

// ---- criteria -----------------------------------------------------------------------------------

inline Record criterion_vortex(double, PlotData& plots) {
    Record r{"vortex-pure-part-witness", "closing vortex example: S_k >= 1/2 ln(k^2+1)"};
    auto s = shell_gradient_limit(fixture("vortex"), region_fixture("unit-square"), detail::constant_one(),
                                  RampKind::strip);
    plots["vortex_strip.csv"] = detail::shell_csv(s);
    std::vector<double> bounds, rel;
    bool ok = true;
    for (size_t i = 0; i < s.ks.size(); ++i) {
        double k = s.ks[i];
        bounds.push_back(0.5 * std::log(k * k + 1));
        rel.push_back(s.errors[i] / std::fabs(s.values[i]));
    }
    ok = detail::strip_checks({10, 100, 1000}, s, [&](size_t i) {
        return s.values[i] >= bounds[i] && rel[i] <= 1e-6 && s.statuses[i] == Status::converged &&
               (i == 0 || s.values[i] > s.values[i - 1]);
    });
    r.values = {{"k", detail::array_json(s.ks)},
                {"S_k", detail::array_json(s.values)},
                {"lower_bound", detail::array_json(bounds)},
                {"quadrature_rel_error", detail::array_json(rel)},
                {"status", to_string(s.result.status)}};
    r.pass = ok && s.result.status == Status::diverging;
    return r;
}

inline Record criterion_point_source(double, PlotData& plots) {
    Record r{"point-source-trace-limit", "closing point-source example: S_k -> 1/2"};
    auto s = shell_gradient_limit(fixture("point-source"), region_fixture("tall-box"), detail::constant_one(),
                                  RampKind::strip);
    plots["point_source_strip.csv"] = detail::shell_csv(s);
    std::vector<double> oracle, gap;
    for (double k : s.ks) {
        // int_0^{1/k} int_{-1}^1 k x / (2 pi r^2) dy dx in closed form
        oracle.push_back((std::atan(k) + 0.5 * k * std::log1p(1 / (k * k))) / pi);
    }
    for (double v : s.values) gap.push_back(std::fabs(v - 0.5));
    bool ok = detail::strip_checks({10, 100, 1000}, s, [&](size_t i) {
        return gap[i] <= 1 / (2 * pi * s.ks[i]) + 1e-4 && std::fabs(s.values[i] - oracle[i]) <= 1e-8;
    });
    r.values = {{"k", detail::array_json(s.ks)},
                {"S_k", detail::array_json(s.values)},
                {"closed_form", detail::array_json(oracle)},
                {"gap", detail::array_json(gap)},
                {"limit", jnum(s.result.value)},
                {"status", to_string(s.result.status)}};
    r.pass = ok && s.result.converged() && std::fabs(s.result.value - 0.5) <= 1e-4;
    return r;
}

inline Record criterion_density(double tol, PlotData&) {
    Record r{"density-at-zero", "density at zero: sector ratio and the strip family"};
    auto m = density_measure({0, 0}, Region::disk({0, 0}, 1));
    bool ok = true;
    json sectors = json::array();
    for (double th : {0.5 * pi, pi, 1.5 * pi}) {
        auto v = eval(m, sector({0, 0}, 2, 0, th));
        ok = ok && v.converged() && std::fabs(v.value - th / (2 * pi)) <= tol;
        sectors.push_back({{"theta", th}, {"mu", jnum(v.value)}, {"oracle", th / (2 * pi)}});
    }
    std::vector<double> strips;
    double sum = 0;
    for (int j = 0; j < 8; ++j) {
        auto v = eval(m, Region::box({1.0 / (j + 2), -1}, {1.0 / (j + 1), 1}));
        strips.push_back(v.value);
        sum += v.value;
        ok = ok && std::fabs(v.value) <= measure_tol;
    }
    auto u = eval(m, Region::box({0, -1}, {0.5, 1}));
    bool violation = u.value - sum > 0.5 - tol;
    ok = ok && std::fabs(u.value - 0.5) <= tol && violation;
    r.values = {{"sectors", sectors},
                {"strips", detail::array_json(strips)},
                {"union", jnum(u.value)},
                {"sigma_additivity_violated", violation}};
    r.pass = ok;
    return r;
}

inline Record criterion_routes(double tol, PlotData&) {
    Record r{"route-agreement", "normal measure: shell limit and boundary integral"};
    const std::vector<std::string> omegas{"box", "disk", "quarter-disk"};
    const std::vector<std::pair<std::string, Region>> Bs{
        {"x<0.2", Region::half_plane({1, 0}, 0.2)},
        {"y>0.25", Region::half_plane({0, -1}, -0.25)},
        {"0.1<y<0.3", Region::box({-2, 0.1}, {2, 0.3})},
        {"0.05<x<0.15", Region::box({0.05, -2}, {0.15, 2})}};
    const ApproxKind kinds[] = {ApproxKind::outer, ApproxKind::inner, ApproxKind::ramp, ApproxKind::canonical};
    bool ok = true;
    json pairs = json::array();
    for (size_t o = 0; o < omegas.size(); ++o)
        for (size_t b = 0; b < Bs.size(); ++b) {
            ApproxKind kind = kinds[(o + b) % 4];
            auto na = make_approximation(region_fixture(omegas[o]), kind);
            auto s = eval(normal_measure_shell(na), Bs[b].second);
            Vec2 bi = normal_measure_boundary(na, Bs[b].second);
            double diff = std::max(std::fabs(s.value.x - bi.x), std::fabs(s.value.y - bi.y));
            ok = ok && s.converged() && diff <= tol;
            pairs.push_back({{"omega", omegas[o]},
                             {"B", Bs[b].first},
                             {"approx", to_string(kind)},
                             {"shell", detail::vec_json(s.value)},
                             {"boundary", detail::vec_json(bi)},
                             {"difference", jnum(diff)},
                             {"status", to_string(s.status)}});
        }
    r.values = {{"pairs", pairs}};
    r.pass = ok;
    return r;
}

inline Record criterion_gauss(double tol, PlotData&) {
    Record r{"gauss-residuals", "Gauss formula with the normal measure; canonical boundary weight 1/2"};
    bool ok = true;
    json checks = json::array();
    auto add = [&](const GaussReport& g) {
        ok = ok && g.residual <= tol && g.lhs_status == Status::converged && g.rhs_status == Status::converged;
        checks.push_back({{"field", g.field},
                          {"region", g.region},
                          {"approx", g.approx},
                          {"lhs", jnum(g.lhs)},
                          {"rhs", jnum(g.rhs)},
                          {"residual", jnum(g.residual)},
                          {"rhs_status", to_string(g.rhs_status)}});
    };
    for (const char* field : {"linear", "polynomial"})
        for (const char* region : {"disk", "box"})
            for (auto kind : {ApproxKind::canonical, ApproxKind::outer, ApproxKind::inner, ApproxKind::ramp})
                add(gauss_check_bounded(fixture(field), make_approximation(region_fixture(region), kind), region));
    auto half = gauss_check_bounded(fixture("point-source-at-edge"),
                                    make_approximation(region_fixture("box"), ApproxKind::canonical), "box");
    add(half);
    bool halves = std::fabs(half.lhs - 0.5) <= tol && std::fabs(half.rhs - 0.5) <= tol;
    r.values = {{"checks", checks}, {"half_weight", halves}};
    r.pass = ok && halves;
    return r;
}

inline Record criterion_tv(double, PlotData&) {
    Record r{"tv-lower-bound", "total variation of the normal measure dominates the perimeter"};
    auto na = make_approximation(region_fixture("box"), ApproxKind::outer);
    const std::vector<std::pair<std::string, Region>> As{{"all", Region::box({-5, -5}, {5, 5})},
                                                         {"corner-ball", Region::disk({0, 0}, 0.3)},
                                                         {"edge-band", Region::box({0.3, -0.2}, {0.7, 0.2})}};
    bool ok = true;
    json cases = json::array();
    for (const auto& [name, A] : As) {
        auto c = tv_lowerbound_check(na, A);
        ok = ok && c.pass;
        cases.push_back({{"A", name}, {"tv", jnum(c.tv)}, {"perimeter", jnum(c.perimeter)}, {"pass", c.pass}});
    }
    r.values = {{"cases", cases}};
    r.pass = ok;
    return r;
}

inline Record criterion_nonintegrability(double tol, PlotData&) {
    Record r{"non-integrability", "tangential field: mass = 1/2 > 0; atomic field: logarithmic growth"};
    auto tw = nonintegrability_witness(fixture("diag-tangential"),
                                       make_approximation(region_fixture("diagonal-half-disk"), ApproxKind::outer),
                                       WitnessKind::tangential, {10, 100});
    bool ok = tw.verdict == "not-approximable-in-measure";
    for (double v : tw.values) ok = ok && v >= 0.5 - tol;
    auto aw = nonintegrability_witness(fixture("point-source"),
                                       make_approximation(region_fixture("quarter-disk"), ApproxKind::outer),
                                       WitnessKind::atomic, {10, 100, 1000});
    const double expect = std::log(10.0) / (2 * pi);
    ok = ok && aw.verdict == "not-integrable" && aw.increments.size() == 2;
    for (double inc : aw.increments) ok = ok && std::fabs(inc - expect) <= 0.05 * expect;
    r.values = {{"tangential", {{"M", detail::array_json(tw.thresholds)}, {"mass", detail::array_json(tw.values)}}},
                {"atomic",
                 {{"M", detail::array_json(aw.thresholds)},
                  {"integral", detail::array_json(aw.values)},
                  {"increments", detail::array_json(aw.increments)},
                  {"expected_increment", expect}}}};
    r.pass = ok;
    return r;
}

inline Record criterion_aura(double tol, PlotData&) {
    Record r{"aura-certificate", "density at zero is pure: aura sequence and core at the origin"};
    auto m = density_measure({0, 0}, Region::disk({0, 0}, 1));
    std::vector<Region> seq;
    for (int i = 1; i <= 10; ++i) seq.push_back(Region::disk({0, 0}, std::ldexp(1.0, -i)));
    auto c = aura_check(m, seq);
    bool ok = c.pure_supported;
    for (size_t i = 0; i < c.mass.size(); ++i)
        ok = ok && std::fabs(c.mass[i] - 1) <= tol && c.complement[i] <= measure_tol &&
             (i == 0 || c.lambda[i] < c.lambda[i - 1]);
    auto cells = core_estimate(m, 6);
    bool adjacent = !cells.empty();
    for (const auto& b : cells) {
        double w = b.hi.x - b.lo.x;
        adjacent = adjacent && std::fabs(b.center().x) <= w && std::fabs(b.center().y) <= w;
    }
    r.values = {{"lambda", detail::array_json(c.lambda)},
                {"mass", detail::array_json(c.mass)},
                {"complement", detail::array_json(c.complement)},
                {"verdict", c.verdict},
                {"core_cells", cells.size()},
                {"core_origin_adjacent", adjacent}};
    r.pass = ok && adjacent;
    return r;
}

inline Record criterion_trace(double tol, PlotData&) {
    Record r{"trace-functional", "normal trace functional: norm bound, boundary-zero nullity, extension independence"};
    Region sq = region_fixture("unit-square");
    ScalarFn g{"cos(x)+y^2", [](Vec2 p) { return std::cos(p.x) + p.y * p.y; },
               [](Vec2 p) { return Vec2{-std::sin(p.x), 2 * p.y}; }, 2};
    bool ok = true;
    json bounds = json::array();
    for (const auto& n : fixture_names()) {
        auto t = silhavy_trace(fixture(n), sq, g);
        bool in = t.status == Status::converged && std::fabs(t.value) <= t.bound + tol;
        ok = ok && in;
        bounds.push_back({{"field", n}, {"N", jnum(t.value)}, {"bound", jnum(t.bound)}, {"pass", in}});
    }
    std::mt19937 rng(20240611u);
    double worst_zero = 0;
    for (int i = 0; i < 20; ++i)
        worst_zero = std::max(worst_zero,
                              std::fabs(silhavy_trace(fixture("vortex"), sq, detail::boundary_zero_function(rng)).value));
    ok = ok && worst_zero <= tol;
    ScalarFn f2{"x^2+y+w",
                [](Vec2 p) { return p.x * p.x + p.y + std::sin(pi * p.x) * std::sin(pi * p.y) * (1 + p.x * p.y); },
                [](Vec2 p) {
                    double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y), m = 1 + p.x * p.y;
                    return Vec2{2 * p.x + pi * std::cos(pi * p.x) * sy * m + sx * sy * p.y,
                                1 + pi * sx * std::cos(pi * p.y) * m + sx * sy * p.x};
                },
                40};
    ScalarFn f1{"x^2+y", [](Vec2 p) { return p.x * p.x + p.y; }, [](Vec2 p) { return Vec2{2 * p.x, 1}; }, 2};
    json ext = json::array();
    for (const char* n : {"vortex", "point-source", "point-source-at-edge", "polynomial"}) {
        double a = silhavy_trace(fixture(n), sq, f1).value, b = silhavy_trace(fixture(n), sq, f2).value;
        ok = ok && std::fabs(a - b) <= tol;
        ext.push_back({{"field", n}, {"N_1", jnum(a)}, {"N_2", jnum(b)}});
    }
    r.values = {{"bounds", bounds}, {"boundary_zero_max", jnum(worst_zero)}, {"extensions", ext}};
    r.pass = ok;
    return r;
}

inline Record criterion_lipschitz(double, PlotData&) {
    Record r{"lipschitz-lemma", "Lipschitz bound 2(m+2) sup |Df|; connectedness cannot be dropped"};
    auto circle = CompactSet::of_pieces({Piece::make_arc({0, 0}, 1, 0, 2 * pi)});
    auto ann = CompactSet::of_region(annulus({0, 0}, 0.5, 1));
    bool ok = true;
    json runs = json::array();
    for (const auto& f : scalar_fixtures())
        for (auto [set, K, delta] : {std::tuple{"circle", &circle, 0.1}, std::tuple{"annulus", &ann, 0.3}}) {
            auto e = lipschitz_bound(f, *K, delta);
            ok = ok && e.ok && e.C == 2.0 * (e.m + 2);
            runs.push_back({{"f", f.name},
                            {"K", set},
                            {"m", e.m},
                            {"bound", jnum(e.bound)},
                            {"quotient", jnum(e.quotient)},
                            {"ok", e.ok}});
        }
    auto two = CompactSet::of_pieces({Piece::seg({-1, -2}, {1, -2}), Piece::seg({-1, 2}, {1, 2})});
    std::string err;
    try {
        ball_cover(two, 0.5);
    } catch (const std::invalid_argument& e) {
        err = e.what();
    }
    ok = ok && err == "path-connected required";
    r.values = {{"runs", runs}, {"disconnected_error", err}};
    r.pass = ok;
    return r;
}

inline Record criterion_classifier(double, PlotData& plots) {
    Record r{"pure-part-classifier", "normal trace is a Radon measure iff lim (1/delta) int |F . D dist| < infinity"};
    auto v = pure_part_detector(fixture("vortex"), region_fixture("unit-square"));
    auto p = pure_part_detector(fixture("point-source"), region_fixture("tall-box"));
    auto csv = [](const LimitResult<double>& l) {
        std::vector<std::vector<double>> rows;
        for (auto [d, x] : l.trace) rows.push_back({d, x});
        return format_csv({"delta", "shell_value"}, rows);
    };
    plots["detector_vortex.csv"] = csv(v.limit);
    plots["detector_point_source.csv"] = csv(p.limit);
    r.values = {{"vortex", v.classification},
                {"vortex_trace", trace_json(v.limit.trace)},
                {"point_source", p.classification},
                {"point_source_limit", jnum(p.limit.value)}};
    r.pass = v.classification == "pure-gradient-part-required" && p.classification == "radon-representable";
    return r;
}

inline const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> c{
        {1, "vortex-pure-part-witness", 10, criterion_vortex},
        {2, "point-source-trace-limit", 10, criterion_point_source},
        {3, "density-at-zero", 5, criterion_density},
        {4, "route-agreement", 60, criterion_routes},
        {5, "gauss-residuals", 300, criterion_gauss},
        {6, "tv-lower-bound", 300, criterion_tv},
        {7, "non-integrability", 300, criterion_nonintegrability},
        {8, "aura-certificate", 300, criterion_aura},
        {9, "trace-functional", 300, criterion_trace},
        {10, "lipschitz-lemma", 300, criterion_lipschitz},
        {11, "pure-part-classifier", 300, criterion_classifier},
    };
    return c;
}

inline const std::vector<int>& quick_suite() {
    static const std::vector<int> ids{1, 2, 3, 8, 10, 11};
    return ids;
}

struct SuiteRun {
    Report report;
    PlotData plots;
    std::vector<double> seconds;  // per record, not part of the report
};

inline SuiteRun run_criteria(const std::vector<int>& ids, const RunConfig& cfg, const std::string& command) {
    SuiteRun s;
    s.report.command = command;
    s.report.config = cfg.to_json();
    for (const auto& c : criteria()) {
        if (std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
        auto t0 = std::chrono::steady_clock::now();
        Record r;
        try {
            r = c.run(cfg.tol, s.plots);
        } catch (const std::exception& e) {
            r.name = c.name;
            r.values = {{"error", e.what()}};
            r.pass = false;
        }
        s.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        r.name = std::to_string(c.id) + ":" + r.name;
        s.report.records.push_back(std::move(r));
    }
    return s;
}

// criteria 1-11, run twice; criterion 12 compares the two reports byte for byte and bounds the total time
inline SuiteRun run_acceptance(const RunConfig& cfg, double time_limit = 300) {
    std::vector<int> all;
    for (const auto& c : criteria()) all.push_back(c.id);
    auto t0 = std::chrono::steady_clock::now();
    SuiteRun first = run_criteria(all, cfg, "suite acceptance");
    double once = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    SuiteRun second = run_criteria(all, cfg, "suite acceptance");
    double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool same = first.report.dump() == second.report.dump() && first.plots == second.plots;
    Record d{"12:determinism", "repeated runs give byte-identical reports"};
    d.values = {{"identical", same}};
    d.pass = same && once <= time_limit;
    first.report.records.push_back(d);
    first.seconds.push_back(total - once);
    return first;
}

}  // namespace divgreen
