#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <locale>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "divgreen/geometry.hpp"
#include "divgreen/limit.hpp"

namespace divgreen {

using json = nlohmann::ordered_json;

inline constexpr const char* report_version = "divgreen-report/1";

// ---- named regions ------------------------------------------------------------------------------

inline const std::vector<std::string>& region_names() {
    static const std::vector<std::string> names{"disk",     "box",          "unit-square",
                                                "tall-box", "quarter-disk", "diagonal-half-disk"};
    return names;
}

inline Region region_fixture(const std::string& name) {
    if (name == "disk") return Region::disk({0, 0}, 1);
    if (name == "box" || name == "unit-square") return Region::box({0, 0}, {1, 1});
    if (name == "tall-box") return Region::box({0, -1}, {1, 1});
    if (name == "quarter-disk") return intersect(Region::disk({0, 0}, 0.5), Region::box({0, 0}, {1, 1}));
    if (name == "diagonal-half-disk")
        return intersect(Region::half_plane(unit(Vec2{1, -1}), 0), Region::disk({0.5, 0.5}, 0.25));
    throw std::invalid_argument("unknown region: " + name);
}

inline std::string region_doc(const std::string& name) {
    if (name == "disk") return "unit disk centered at the origin";
    if (name == "box" || name == "unit-square") return "(0,1)^2";
    if (name == "tall-box") return "(0,1)x(-1,1)";
    if (name == "quarter-disk") return "disk of radius 1/2 at the origin intersected with (0,1)^2";
    if (name == "diagonal-half-disk") return "{x <= y} intersected with the disk of radius 1/4 at (1/2,1/2)";
    return "";
}

// ---- configuration ------------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double tol = 1e-3;  // acceptance tolerance of pass/fail checks
    bool schedule_set = false;
    ScaleSchedule schedule;  // overrides the command's default schedule when schedule_set
    std::string field = "linear";
    std::string region = "disk";
    std::string approx = "ramp";
    std::string output;    // JSON report path; empty means stdout
    std::string csv;       // k-trace table path
    std::string plot_dir;  // directory for plot-data columns

    static const std::vector<std::string>& keys() {
        static const std::vector<std::string> k{"tol",    "schedule.initial", "schedule.ratio", "schedule.steps",
                                                "schedule.tol", "field", "region", "approx", "output", "csv",
                                                "plot_dir"};
        return k;
    }

    void set(const std::string& key, const std::string& value) {
        auto num = [&]() {
            std::istringstream in(value);
            in.imbue(std::locale::classic());
            double v;
            if (!(in >> v) || !(in >> std::ws).eof()) throw ConfigError("not a number for " + key + ": " + value);
            return v;
        };
        if (key == "tol") tol = num();
        else if (key == "schedule.initial") schedule.initial = num(), schedule_set = true;
        else if (key == "schedule.ratio") schedule.ratio = num(), schedule_set = true;
        else if (key == "schedule.steps") {
            double v = num();
            if (v != static_cast<int>(v)) throw ConfigError("schedule.steps must be an integer");
            schedule.steps = static_cast<int>(v);
            schedule_set = true;
        } else if (key == "schedule.tol") schedule.tol = num(), schedule_set = true;
        else if (key == "field") field = value;
        else if (key == "region") region = value;
        else if (key == "approx") approx = value;
        else if (key == "output") output = value;
        else if (key == "csv") csv = value;
        else if (key == "plot_dir") plot_dir = value;
        else throw ConfigError("unknown config key: " + key);
    }

    void validate() const {
        if (!(tol > 0)) throw ConfigError("tol must be positive");
        try {
            schedule.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    // schedule for a command: the configured one if given, else the command default
    ScaleSchedule schedule_or(const ScaleSchedule& dflt) const {
        if (!schedule_set) return dflt;
        ScaleSchedule s = dflt;
        s.initial = schedule.initial;
        s.ratio = schedule.ratio;
        s.steps = schedule.steps;
        s.tol = schedule.tol;
        return s;
    }

    json to_json() const {
        json j;
        j["tol"] = tol;
        if (schedule_set)
            j["schedule"] = {{"initial", schedule.initial},
                             {"ratio", schedule.ratio},
                             {"steps", schedule.steps},
                             {"tol", schedule.tol}};
        j["field"] = field;
        j["region"] = region;
        j["approx"] = approx;
        return j;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline void flatten(const json& j, const std::string& prefix, RunConfig& c) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        const json& v = it.value();
        if (v.is_object()) flatten(v, key, c);
        else if (v.is_string()) c.set(key, v.get<std::string>());
        else if (v.is_number()) {
            std::ostringstream out;
            out.imbue(std::locale::classic());
            out.precision(17);
            out << v.get<double>();
            c.set(key, out.str());
        } else throw ConfigError("unsupported value for " + key);
    }
}

}  // namespace detail

// key=value lines ('#' comments) or a JSON object, nested objects giving dotted keys
inline RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::string t = detail::trim(text);
    if (!t.empty() && t[0] == '{') {
        json j;
        try {
            j = json::parse(t);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("invalid JSON config: ") + e.what());
        }
        detail::flatten(j, "", c);
    } else {
        std::istringstream in(text);
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
            ++n;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key=value");
            c.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        }
    }
    c.validate();
    return c;
}

// DIVGREEN_CONFIG overrides the given path; no path gives the defaults
inline RunConfig load_config(const std::string& path) {
    std::string p = path;
    if (const char* env = std::getenv("DIVGREEN_CONFIG"); env && *env) p = env;
    if (p.empty()) return {};
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot read config file: " + p);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---- reports ------------------------------------------------------------------------------------

struct Record {
    std::string name;
    std::string anchor;
    json values = json::object();
    bool pass = false;
};

struct Report {
    std::string command;
    json config = json::object();
    std::vector<Record> records;

    int passed() const {
        int n = 0;
        for (const auto& r : records) n += r.pass;
        return n;
    }
    bool all_pass() const { return passed() == static_cast<int>(records.size()); }

    json to_json() const {
        json j;
        j["version"] = report_version;
        j["command"] = command;
        j["config"] = config;
        j["records"] = json::array();
        for (const auto& r : records)
            j["records"].push_back({{"name", r.name}, {"anchor", r.anchor}, {"values", r.values}, {"pass", r.pass}});
        j["summary"] = {{"total", records.size()}, {"passed", passed()}, {"failed", records.size() - passed()}};
        return j;
    }

    std::string dump() const { return to_json().dump(2) + "\n"; }
};

// JSON has no infinities; non-finite numbers are written as strings
inline json jnum(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline json trace_json(const std::vector<std::pair<double, double>>& t) {
    json a = json::array();
    for (auto [k, v] : t) a.push_back({jnum(k), jnum(v)});
    return a;
}

// ---- columnar output ----------------------------------------------------------------------------

inline std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << "\n";
    }
    return out.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace divgreen
