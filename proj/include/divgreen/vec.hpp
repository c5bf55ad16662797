#pragma once

#include <cmath>

namespace divgreen {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double norm2(const Vec2& a) { return a.x * a.x + a.y * a.y; }
inline double norm(double a) { return std::fabs(a); }
inline Vec2 unit(const Vec2& a) { return a / norm(a); }
// rotation by -90 degrees: outward normal of a curve traversed with the region on its left
constexpr Vec2 right_normal(const Vec2& t) { return {t.y, -t.x}; }
inline bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }
inline bool finite(double v) { return std::isfinite(v); }

constexpr double pi = 3.14159265358979323846;

}  // namespace divgreen
