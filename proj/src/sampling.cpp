// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/sampling.h>

namespace mitr {

Vec2 sample_concentric_disk(Vec2 u) {
    const double a = 2.0 * u.x - 1.0;
    const double b = 2.0 * u.y - 1.0;
    if (a == 0 && b == 0)
        return {0, 0};
    double r, phi;
    if (std::abs(a) > std::abs(b)) {
        r = a;
        phi = (kPi / 4.0) * (b / a);
    } else {
        r = b;
        phi = kPi / 2.0 - (kPi / 4.0) * (a / b);
    }
    return {r * std::cos(phi), r * std::sin(phi)};
}

DirectionSample sample_cosine_hemisphere(Vec2 u) {
    const Vec2 d = sample_concentric_disk(u);
    const double z = safe_sqrt(1.0 - d.x * d.x - d.y * d.y);
    return {{d.x, d.y, z}, z * kInvPi};
}

DirectionSample sample_uniform_sphere(Vec2 u) {
    const double z = 1.0 - 2.0 * u.x;
    const double r = safe_sqrt(1.0 - z * z);
    const double phi = 2.0 * kPi * u.y;
    return {{r * std::cos(phi), r * std::sin(phi), z}, kInv4Pi};
}

Vec2 sample_uniform_triangle(Vec2 u) {
    const double su = std::sqrt(u.x);
    return {1.0 - su, u.y * su};
}

double hg_phase(double g, double cos_theta) {
    const double denom = 1.0 + g * g - 2.0 * g * cos_theta;
    return kInv4Pi * (1.0 - g * g) / (denom * std::sqrt(denom));
}

DirectionSample sample_hg_phase(double g, Vec2 u) {
    double cos_theta;
    if (std::abs(g) < 1e-3) {
        cos_theta = 1.0 - 2.0 * u.x;
    } else {
        const double s = (1.0 - g * g) / (1.0 - g + 2.0 * g * u.x);
        cos_theta = (1.0 + g * g - s * s) / (2.0 * g);
    }
    cos_theta = std::clamp(cos_theta, -1.0, 1.0);
    const double sin_theta = safe_sqrt(1.0 - cos_theta * cos_theta);
    const double phi = 2.0 * kPi * u.y;
    return {{sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta}, hg_phase(g, cos_theta)};
}

}  // namespace mitr
