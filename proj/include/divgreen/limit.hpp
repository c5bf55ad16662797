#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "divgreen/vec.hpp"

namespace divgreen {

// Scales s_j = initial * ratio^j, j = 0..steps-1. Callers indexing by k use k = 1/s.
struct ScaleSchedule {
    double initial = 0.5;
    double ratio = 0.5;
    int steps = 24;
    double tol = 1e-6;
    double cap = 1e9;
    bool aitken = false;
    bool growth_rule = true;  // off for sequences known to be bounded, where growth is only a transient

    void validate() const {
        if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("schedule ratio must lie in (0,1)");
        if (steps < 3) throw std::invalid_argument("schedule needs at least 3 steps");
        if (!(initial > 0.0)) throw std::invalid_argument("schedule initial scale must be positive");
        if (!(tol > 0.0)) throw std::invalid_argument("schedule tolerance must be positive");
        if (!(cap > 0.0)) throw std::invalid_argument("schedule cap must be positive");
    }

    std::vector<double> scales() const {
        std::vector<double> s;
        double v = initial;
        for (int j = 0; j < steps; ++j) {
            s.push_back(v);
            v *= ratio;
        }
        return s;
    }
};

enum class Status { converged, diverging, no_limit, budget_exhausted };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::converged: return "converged";
        case Status::diverging: return "diverging";
        case Status::no_limit: return "no-limit";
        case Status::budget_exhausted: return "budget-exhausted";
    }
    return "?";
}

// the less favorable of two statuses, in the order converged < budget-exhausted < no-limit < diverging
inline Status worst(Status a, Status b) {
    auto rank = [](Status s) {
        switch (s) {
            case Status::converged: return 0;
            case Status::budget_exhausted: return 1;
            case Status::no_limit: return 2;
            case Status::diverging: return 3;
        }
        return 3;
    };
    return rank(a) >= rank(b) ? a : b;
}

template <class T>
struct LimitResult {
    T value{};
    double error_bound = 0.0;
    Status status = Status::budget_exhausted;
    std::vector<std::pair<double, T>> trace;  // (scale, raw value)

    bool converged() const { return status == Status::converged; }
};

namespace detail {

inline double aitken_component(double v2, double d2, double d1) {
    double den = d2 - d1;
    if (d1 == 0.0 || den == 0.0) return v2;
    double q = d2 / d1;
    if (!(std::fabs(q) < 0.95)) return v2;
    return v2 - d2 * d2 / den;
}

inline double aitken(double v2, double v1, double v0) { return aitken_component(v2, v2 - v1, v1 - v0); }

inline Vec2 aitken(const Vec2& v2, const Vec2& v1, const Vec2& v0) {
    return {aitken_component(v2.x, v2.x - v1.x, v1.x - v0.x), aitken_component(v2.y, v2.y - v1.y, v1.y - v0.y)};
}

inline double along(double a, double b) { return a * b; }
inline double along(const Vec2& a, const Vec2& b) { return dot(a, b); }

}  // namespace detail

// Converged: two consecutive differences (of the optionally Aitken-accelerated sequence) within tol.
// Diverging: magnitude beyond cap, or five same-direction differences above tol whose size does not decay.
// No-limit: differences still changing direction above tol when the budget runs out.
template <class T, class Seq>
LimitResult<T> limit_extrapolate(Seq&& seq, const ScaleSchedule& s) {
    s.validate();
    LimitResult<T> out;
    std::vector<T> raw, acc;
    double scale = s.initial;
    for (int j = 0; j < s.steps; ++j, scale *= s.ratio) {
        T v = seq(scale);
        out.trace.emplace_back(scale, v);
        raw.push_back(v);
        if (!finite(v) || norm(v) > s.cap) {
            out.value = v;
            out.error_bound = HUGE_VAL;
            out.status = Status::diverging;
            return out;
        }
        T a = v;
        if (s.aitken && j >= 2) a = detail::aitken(raw[j], raw[j - 1], raw[j - 2]);
        acc.push_back(a);
        if (j >= 2) {
            double e1 = norm(acc[j] - acc[j - 1]);
            double e0 = norm(acc[j - 1] - acc[j - 2]);
            if (e1 <= s.tol && e0 <= s.tol) {
                out.value = a;
                out.error_bound = std::max(e1, e0);
                out.status = Status::converged;
                return out;
            }
        }
        if (s.growth_rule && j >= 5) {
            bool grow = true;
            for (int i = j - 3; i <= j && grow; ++i) {
                T d1 = raw[i] - raw[i - 1];
                T d0 = raw[i - 1] - raw[i - 2];
                if (norm(d1) <= s.tol || norm(d0) <= s.tol) grow = false;
                else if (detail::along(d1, d0) <= 0.0) grow = false;
                else if (norm(d1) < 0.97 * norm(d0)) grow = false;
            }
            if (grow) {
                out.value = v;
                out.error_bound = HUGE_VAL;
                out.status = Status::diverging;
                return out;
            }
        }
    }
    const int n = static_cast<int>(raw.size());
    out.value = acc.back();
    out.error_bound = norm(acc[n - 1] - acc[n - 2]);
    bool flips = false;
    double amp = 0.0;
    int lo = std::max(1, n - 6);
    for (int i = lo; i < n; ++i) {
        for (int m = lo - 1; m < i; ++m) amp = std::max(amp, norm(raw[i] - raw[m]));
        if (i > lo && detail::along(raw[i] - raw[i - 1], raw[i - 1] - raw[i - 2]) < 0.0) flips = true;
    }
    out.status = (flips && amp > s.tol) ? Status::no_limit : Status::budget_exhausted;
    return out;
}

}  // namespace divgreen
