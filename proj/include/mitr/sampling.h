// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/math.h>

namespace mitr {

struct DirectionSample {
    Vec3 direction;
    double pdf = 0;
};

/// Shirley-Chiu concentric mapping of [0,1)^2 onto the unit disk.
Vec2 sample_concentric_disk(Vec2 u);

/// Cosine-weighted direction on the +z hemisphere; pdf = cos(theta) / pi.
DirectionSample sample_cosine_hemisphere(Vec2 u);
inline double cosine_hemisphere_pdf(double cos_theta) { return cos_theta > 0 ? cos_theta * kInvPi : 0.0; }

DirectionSample sample_uniform_sphere(Vec2 u);

/// Uniform point on a triangle in barycentric coordinates (b1, b2).
Vec2 sample_uniform_triangle(Vec2 u);

/// Henyey-Greenstein phase function. `cos_theta` is measured between the
/// propagation direction before and after scattering.
double hg_phase(double g, double cos_theta);

/// Direction about the local +z propagation axis distributed by HG(g).
DirectionSample sample_hg_phase(double g, Vec2 u);

/// Power heuristic with exponent 2 for one sample from each strategy.
inline double power_heuristic(double pdf_a, double pdf_b) {
    const double a = pdf_a * pdf_a, b = pdf_b * pdf_b;
    if (std::isinf(a))
        return 1.0;
    return a + b > 0 ? a / (a + b) : 0.0;
}

}  // namespace mitr
