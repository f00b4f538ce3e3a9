// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace mitr {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInvPi = 1.0 / std::numbers::pi;
inline constexpr double kInv4Pi = 0.25 / std::numbers::pi;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Vec2 {
    double x = 0, y = 0;
    friend bool operator==(const Vec2 &, const Vec2 &) = default;
};

struct Vec3 {
    double x = 0, y = 0, z = 0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double &operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 &operator+=(const Vec3 &o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3 &operator-=(const Vec3 &o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3 &operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend bool operator==(const Vec3 &, const Vec3 &) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3 &b) { return a -= b; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3 &a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double abs_dot(const Vec3 &a, const Vec3 &b) { return std::abs(dot(a, b)); }
constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(const Vec3 &v) { return std::sqrt(dot(v, v)); }
constexpr double length_squared(const Vec3 &v) { return dot(v, v); }
inline double distance(const Vec3 &a, const Vec3 &b) { return length(a - b); }
inline Vec3 normalize(const Vec3 &v) { return v / length(v); }
inline Vec3 min(const Vec3 &a, const Vec3 &b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max(const Vec3 &a, const Vec3 &b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
inline double max_component(const Vec3 &v) { return std::max({v.x, v.y, v.z}); }

/// Mirror `v` about `n` (both pointing away from the surface).
inline Vec3 reflect(const Vec3 &v, const Vec3 &n) { return 2.0 * dot(v, n) * n - v; }

/// RGB triple used for radiance, reflectance and throughput.
struct Rgb {
    std::array<double, 3> c{0, 0, 0};

    constexpr Rgb() = default;
    constexpr explicit Rgb(double v) : c{v, v, v} {}
    constexpr Rgb(double r, double g, double b) : c{r, g, b} {}

    constexpr double operator[](int i) const { return c[i]; }
    constexpr double &operator[](int i) { return c[i]; }

    constexpr Rgb &operator+=(const Rgb &o) { for (int i = 0; i < 3; ++i) c[i] += o.c[i]; return *this; }
    constexpr Rgb &operator-=(const Rgb &o) { for (int i = 0; i < 3; ++i) c[i] -= o.c[i]; return *this; }
    constexpr Rgb &operator*=(const Rgb &o) { for (int i = 0; i < 3; ++i) c[i] *= o.c[i]; return *this; }
    constexpr Rgb &operator*=(double s) { for (double &v : c) v *= s; return *this; }
    constexpr Rgb &operator/=(double s) { for (double &v : c) v /= s; return *this; }

    constexpr bool is_black() const { return c[0] == 0 && c[1] == 0 && c[2] == 0; }
    double max_value() const { return std::max({c[0], c[1], c[2]}); }
    constexpr double average() const { return (c[0] + c[1] + c[2]) / 3.0; }
    constexpr double luminance() const { return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2]; }

    friend bool operator==(const Rgb &, const Rgb &) = default;
};

constexpr Rgb operator+(Rgb a, const Rgb &b) { return a += b; }
constexpr Rgb operator-(Rgb a, const Rgb &b) { return a -= b; }
constexpr Rgb operator*(Rgb a, const Rgb &b) { return a *= b; }
constexpr Rgb operator*(Rgb a, double s) { return a *= s; }
constexpr Rgb operator*(double s, Rgb a) { return a *= s; }
constexpr Rgb operator/(Rgb a, double s) { return a /= s; }
inline Rgb exp(const Rgb &a) { return {std::exp(a[0]), std::exp(a[1]), std::exp(a[2])}; }

inline constexpr std::array<double, 3> kLuminanceWeights{0.2126, 0.7152, 0.0722};

/// Orthonormal shading frame; `n` is the local +z axis.
struct Frame {
    Vec3 s{1, 0, 0}, t{0, 1, 0}, n{0, 0, 1};

    /// Branchless basis construction (Duff et al. 2017).
    static Frame from_normal(const Vec3 &n) {
        const double sign = std::copysign(1.0, n.z);
        const double a = -1.0 / (sign + n.z);
        const double b = n.x * n.y * a;
        Frame f;
        f.s = {1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x};
        f.t = {b, sign + n.y * n.y * a, -n.y};
        f.n = n;
        return f;
    }

    /// Frame whose tangent follows `tangent` projected onto the plane of `n`.
    static Frame from_normal_tangent(const Vec3 &n, const Vec3 &tangent) {
        Vec3 s = tangent - dot(tangent, n) * n;
        const double l = length(s);
        if (l < 1e-12)
            return from_normal(n);
        Frame f;
        f.n = n;
        f.s = s / l;
        f.t = cross(n, f.s);
        return f;
    }

    Vec3 to_local(const Vec3 &v) const { return {dot(v, s), dot(v, t), dot(v, n)}; }
    Vec3 to_world(const Vec3 &v) const { return s * v.x + t * v.y + n * v.z; }
};

inline double safe_sqrt(double x) { return std::sqrt(std::max(0.0, x)); }
constexpr double sqr(double x) { return x * x; }

}  // namespace mitr
