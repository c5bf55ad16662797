#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "divgreen/acceptance.hpp"

using namespace divgreen;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

struct Options {
    std::string config_path;
    std::optional<std::string> field, region, approx, output, csv, plot_dir;
    bool json = false;
    bool detect = false;
    std::string set;
    std::string ramp = "strip";
    std::string suite;
    std::vector<double> center;
};

FieldParams field_params(const Options& o) {
    FieldParams prm;
    if (!o.center.empty()) prm.center = {o.center[0], o.center[1]};
    return prm;
}

RunConfig resolve(const Options& o) {
    RunConfig c = load_config(o.config_path);
    if (o.field) c.field = *o.field;
    if (o.region) c.region = *o.region;
    if (o.approx) c.approx = *o.approx;
    if (o.output) c.output = *o.output;
    if (o.csv) c.csv = *o.csv;
    if (o.plot_dir) c.plot_dir = *o.plot_dir;
    c.validate();
    return c;
}

int emit(const Report& rep, const RunConfig& cfg) {
    if (cfg.output.empty()) std::cout << rep.dump();
    else write_file(cfg.output, rep.dump());
    return rep.all_pass() ? exit_pass : exit_fail;
}

int cmd_fixtures(const Options& o) {
    json j;
    j["version"] = report_version;
    j["fields"] = json::array();
    for (const auto& n : fixture_names()) {
        auto f = fixture(n);
        j["fields"].push_back({{"name", n},
                               {"integrability", f.p == Integrability::L1 ? "L1" : "Linf"},
                               {"singular_points", f.singular_points.size()},
                               {"singular_curves", f.singular_curves.size()},
                               {"atoms", f.div.atoms.size()}});
    }
    j["regions"] = json::array();
    for (const auto& n : region_names()) j["regions"].push_back({{"name", n}, {"doc", region_doc(n)}});
    j["approximations"] = json::array();
    for (auto k : {ApproxKind::canonical, ApproxKind::outer, ApproxKind::inner, ApproxKind::ramp})
        j["approximations"].push_back(to_string(k));
    if (o.json) {
        std::cout << j.dump(2) << "\n";
        return exit_pass;
    }
    std::cout << "fields:\n";
    for (const auto& f : j["fields"])
        std::cout << "  " << f["name"].get<std::string>() << " (" << f["integrability"].get<std::string>() << ")\n";
    std::cout << "regions:\n";
    for (const auto& r : j["regions"])
        std::cout << "  " << r["name"].get<std::string>() << ": " << r["doc"].get<std::string>() << "\n";
    std::cout << "approximations:\n";
    for (const auto& a : j["approximations"]) std::cout << "  " << a.get<std::string>() << "\n";
    return exit_pass;
}

int cmd_gauss(const Options& o) {
    RunConfig cfg = resolve(o);
    ApproxParams prm;
    prm.schedule = cfg.schedule_or(prm.schedule);
    auto na = make_approximation(region_fixture(cfg.region), parse_approx(cfg.approx), prm);
    auto g = gauss_check_bounded(fixture(cfg.field, field_params(o)), na, cfg.region);
    g.tol = cfg.tol;
    g.finish();
    Report rep;
    rep.command = "gauss";
    rep.config = cfg.to_json();
    if (!o.center.empty()) rep.config["center"] = o.center;
    Record r{"gauss", "Gauss formula: div F(chi) = -lim int F . D eta_k"};
    r.values = {{"field", g.field},
                {"region", g.region},
                {"approx", g.approx},
                {"lhs", jnum(g.lhs)},
                {"rhs", jnum(g.rhs)},
                {"residual", jnum(g.residual)},
                {"lhs_status", to_string(g.lhs_status)},
                {"rhs_status", to_string(g.rhs_status)},
                {"corner_atom", g.corner_atom},
                {"rhs_trace", trace_json(g.rhs_trace)}};
    r.pass = g.pass;
    rep.records.push_back(r);
    if (!cfg.csv.empty()) {
        std::vector<std::vector<double>> rows;
        for (auto [k, v] : g.rhs_trace) rows.push_back({k, v});
        write_file(cfg.csv, format_csv({"k", "rhs"}, rows));
    }
    return emit(rep, cfg);
}

Region parse_set(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("set must look like sector:THETA or box:X0,Y0,X1,Y1");
    std::string kind = spec.substr(0, colon);
    std::istringstream in(spec.substr(colon + 1));
    in.imbue(std::locale::classic());
    std::vector<double> v;
    for (std::string tok; std::getline(in, tok, ',');) {
        std::istringstream t(tok);
        t.imbue(std::locale::classic());
        double x;
        if (!(t >> x) || !(t >> std::ws).eof()) throw ConfigError("not a number in set: " + tok);
        v.push_back(x);
    }
    if (kind == "sector" && v.size() == 1) {
        if (!(v[0] > 0 && v[0] <= 2 * pi)) throw ConfigError("sector angle must lie in (0, 2 pi]");
        return sector({0, 0}, 2, 0, v[0]);
    }
    if (kind == "box" && v.size() == 4) return Region::box({v[0], v[1]}, {v[2], v[3]});
    throw ConfigError("unknown set: " + spec);
}

int cmd_density(const Options& o) {
    RunConfig cfg = resolve(o);
    Region A = parse_set(o.set);
    auto m = density_measure({0, 0}, Region::disk({0, 0}, 1), cfg.schedule_or(ScaleSchedule{}));
    auto v = eval(m, A);
    Report rep;
    rep.command = "density";
    rep.config = cfg.to_json();
    Record r{"density-at-zero", "density at zero: mu(A) = lim |A n B(0,d)| / |B(0,d)|"};
    r.values = {{"set", o.set},
                {"value", jnum(v.value)},
                {"error_bound", jnum(v.error_bound)},
                {"status", to_string(v.status)},
                {"trace", trace_json(v.trace)}};
    r.pass = v.converged();
    rep.records.push_back(r);
    return emit(rep, cfg);
}

int cmd_trace(const Options& o) {
    RunConfig cfg = resolve(o);
    DMField F = fixture(cfg.field, field_params(o));
    Region omega = region_fixture(cfg.region);
    Report rep;
    rep.command = o.detect ? "trace --detect" : "trace";
    rep.config = cfg.to_json();
    if (!o.center.empty()) rep.config["center"] = o.center;
    if (o.detect) {
        auto d = pure_part_detector(F, omega, cfg.schedule_or(detector_schedule()));
        Record r{"pure-part-detector", "Radon representability: lim (1/delta) int_{shell} |F . D dist| < infinity"};
        r.values = {{"field", cfg.field},
                    {"region", cfg.region},
                    {"classification", d.classification},
                    {"limit", jnum(d.limit.value)},
                    {"status", to_string(d.limit.status)},
                    {"trace", trace_json(d.limit.trace)}};
        r.pass = d.classification != "inconclusive";
        rep.records.push_back(r);
        if (!cfg.csv.empty()) {
            std::vector<std::vector<double>> rows;
            for (auto [s, v] : d.limit.trace) rows.push_back({s, v});
            write_file(cfg.csv, format_csv({"delta", "shell_value"}, rows));
        }
        return emit(rep, cfg);
    }
    RampKind kind;
    if (o.ramp == "strip") kind = RampKind::strip;
    else if (o.ramp == "boundary-ramp") kind = RampKind::boundary_ramp;
    else throw ConfigError("unknown ramp: " + o.ramp);
    ScalarFn one{"1", [](Vec2) { return 1.0; }, [](Vec2) { return Vec2{}; }, 0};
    auto s = shell_gradient_limit(F, omega, one, kind, cfg.schedule_or(shell_schedule()));
    Record r{"shell-gradient-limit", "lim_k int f F . D eta_k"};
    r.values = {{"field", cfg.field},
                {"region", cfg.region},
                {"ramp", to_string(kind)},
                {"k", json(s.ks)},
                {"values", json(s.values)},
                {"limit", jnum(s.result.value)},
                {"status", to_string(s.result.status)}};
    r.pass = s.result.status == Status::converged || s.result.status == Status::diverging;
    rep.records.push_back(r);
    if (!cfg.csv.empty()) {
        std::vector<std::vector<double>> rows;
        for (size_t i = 0; i < s.ks.size(); ++i) rows.push_back({s.ks[i], s.values[i]});
        write_file(cfg.csv, format_csv({"k", "value"}, rows));
    }
    return emit(rep, cfg);
}

int cmd_suite(const Options& o) {
    RunConfig cfg = resolve(o);
    SuiteRun run = o.suite == "acceptance" ? run_acceptance(cfg) : run_criteria(quick_suite(), cfg, "suite quick");
    for (size_t i = 0; i < run.report.records.size(); ++i) {
        const auto& r = run.report.records[i];
        std::fprintf(stderr, "%s  %-32s %8.2f s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), run.seconds[i]);
    }
    if (!cfg.plot_dir.empty()) {
        std::filesystem::create_directories(cfg.plot_dir);
        for (const auto& [name, text] : run.plots) write_file((std::filesystem::path(cfg.plot_dir) / name).string(), text);
    }
    return emit(run.report, cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"divgreen: generalized Gauss-Green formulas, numerically"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config_path, "config file (key=value or JSON); DIVGREEN_CONFIG overrides");

    auto add_selection = [&](CLI::App* c) {
        c->add_option("--field", o.field, "field fixture");
        c->add_option("--region", o.region, "region fixture");
        c->add_option("--center", o.center, "field center X,Y")->delimiter(',')->expected(2);
    };
    auto add_outputs = [&](CLI::App* c) {
        c->add_option("--output", o.output, "JSON report path (default stdout)");
        c->add_option("--csv", o.csv, "k-trace CSV path");
    };

    auto* fixtures = app.add_subcommand("fixtures", "list fields, regions and approximations");
    fixtures->add_flag("--json", o.json, "JSON listing");

    auto* gauss = app.add_subcommand("gauss", "check the Gauss formula for a bounded field");
    add_selection(gauss);
    gauss->add_option("--approx", o.approx, "canonical | outer | inner | ramp");
    add_outputs(gauss);

    auto* density = app.add_subcommand("density", "evaluate the density-at-zero measure");
    density->add_option("--set", o.set, "sector:THETA or box:X0,Y0,X1,Y1")->required();
    density->add_option("--output", o.output, "JSON report path (default stdout)");

    auto* trace = app.add_subcommand("trace", "shell gradient limits and the pure part detector");
    add_selection(trace);
    trace->add_flag("--detect", o.detect, "classify the normal trace");
    trace->add_option("--ramp", o.ramp, "strip | boundary-ramp")->check(CLI::IsMember({"strip", "boundary-ramp"}));
    add_outputs(trace);

    auto* suite = app.add_subcommand("suite", "run a verification suite");
    suite->add_option("name", o.suite, "acceptance | quick")->required()->check(CLI::IsMember({"acceptance", "quick"}));
    suite->add_option("--output", o.output, "JSON report path (default stdout)");
    suite->add_option("--plot-dir", o.plot_dir, "directory for plot-data CSV files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_pass : exit_usage;
    }

    try {
        if (*fixtures) return cmd_fixtures(o);
        if (*gauss) return cmd_gauss(o);
        if (*density) return cmd_density(o);
        if (*trace) return cmd_trace(o);
        if (*suite) return cmd_suite(o);
    } catch (const ConfigError& e) {
        std::cerr << "divgreen: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "divgreen: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "divgreen: " << e.what() << "\n";
        return exit_fail;
    }
    return exit_usage;
}
