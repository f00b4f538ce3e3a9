// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/film.h>
#include <mitr/polarization.h>

namespace mitr {

/// Scalar map per bin and pixel derived from a polarized cube.
struct PolarizationMap {
    int width = 0, height = 0, frames = 0;
    std::vector<double> value;    // [frame][y][x]
    std::vector<uint8_t> valid;   // 0 where the value is undefined
    int violations = 0;           // DoP values above 1 + 1e-6 before clamping

    size_t index(int f, int y, int x) const { return (static_cast<size_t>(f) * height + y) * width + x; }
};

/// Stokes vector of one bin and pixel with the color channels combined by
/// luminance weights.
Stokes luminance_stokes(const TransientCube &cube, int t, int y, int x);

/// Angle of linear polarization atan2(S2, S1), or half of it when
/// `halved`. Pixels with sqrt(S1^2 + S2^2) < 1e-4 S0 are flagged invalid.
/// Throws std::invalid_argument for unpolarized cubes.
PolarizationMap aolp_map(const TransientCube &cube, bool halved = false);
double aolp(const Stokes &s, bool halved = false);

/// Degree of polarization sqrt(S1^2 + S2^2 + S3^2) / S0, clamped to
/// [0, 1 + 1e-6]. Pixels with S0 <= 0 are flagged invalid.
PolarizationMap dop_map(const TransientCube &cube);
double dop(const Stokes &s);

/// Cyclic rainbow for angle maps, black where invalid.
std::vector<Image8> colorize_aolp(const PolarizationMap &map, bool halved = false);
/// White-to-red ramp for degree maps, black where invalid.
std::vector<Image8> colorize_dop(const PolarizationMap &map);

}  // namespace mitr
