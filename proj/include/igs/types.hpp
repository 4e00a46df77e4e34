#pragma once

#include <cmath>

namespace igs {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
};

struct Color3 {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    Color3 operator+(Color3 o) const { return {r + o.r, g + o.g, b + o.b}; }
    Color3 operator-(Color3 o) const { return {r - o.r, g - o.g, b - o.b}; }
    Color3 operator*(double s) const { return {r * s, g * s, b * s}; }
    double dot(Color3 o) const { return r * o.r + g * o.g + b * o.b; }
    double abs_sum() const { return std::abs(r) + std::abs(g) + std::abs(b); }
};

/// Symmetric 2x2 matrix, stored as upper triangle.
struct SymMat2 {
    double m11 = 0.0;
    double m12 = 0.0;
    double m22 = 0.0;

    /// Quadratic form v' M v.
    double quad(Vec2 v) const { return m11 * v.x * v.x + 2.0 * m12 * v.x * v.y + m22 * v.y * v.y; }
    double det() const { return m11 * m22 - m12 * m12; }
};

inline bool finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }
inline bool finite(Color3 c) { return std::isfinite(c.r) && std::isfinite(c.g) && std::isfinite(c.b); }

}  // namespace igs
