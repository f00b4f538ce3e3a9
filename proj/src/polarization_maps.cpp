// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/polarization_maps.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mitr {

namespace {

PolarizationMap make_map(const TransientCube &cube) {
    if (!cube.polarized())
        throw std::invalid_argument("polarization maps need a 12-channel cube");
    PolarizationMap m;
    m.width = cube.width;
    m.height = cube.height;
    m.frames = cube.axis.n_bins;
    m.value.assign(static_cast<size_t>(m.frames) * m.height * m.width, 0.0);
    m.valid.assign(m.value.size(), 0);
    return m;
}

uint8_t to_byte(double v) { return static_cast<uint8_t>(std::lround(255 * std::clamp(v, 0.0, 1.0))); }

// Fully saturated hue in [0, 1) on the HSV wheel.
Rgb hue_color(double h) {
    const double h6 = 6 * (h - std::floor(h));
    const int sector = std::min(5, static_cast<int>(h6));
    const double f = h6 - sector;
    switch (sector) {
    case 0: return {1, f, 0};
    case 1: return {1 - f, 1, 0};
    case 2: return {0, 1, f};
    case 3: return {0, 1 - f, 1};
    case 4: return {f, 0, 1};
    default: return {1, 0, 1 - f};
    }
}

template <class Color>
std::vector<Image8> colorize(const PolarizationMap &map, Color &&color) {
    std::vector<Image8> frames(map.frames);
    for (int f = 0; f < map.frames; ++f) {
        Image8 &img = frames[f];
        img.width = map.width;
        img.height = map.height;
        img.rgb.assign(static_cast<size_t>(map.width) * map.height * 3, 0);
        for (int y = 0; y < map.height; ++y)
            for (int x = 0; x < map.width; ++x) {
                const size_t i = map.index(f, y, x);
                if (!map.valid[i])
                    continue;
                const Rgb c = color(map.value[i]);
                const size_t o = (static_cast<size_t>(y) * map.width + x) * 3;
                for (int k = 0; k < 3; ++k)
                    img.rgb[o + k] = to_byte(c[k]);
            }
    }
    return frames;
}

}  // namespace

Stokes luminance_stokes(const TransientCube &cube, int t, int y, int x) {
    Stokes s{};
    for (int k = 0; k < 4; ++k)
        for (int c = 0; c < 3; ++c)
            s[k] += kLuminanceWeights[c] * cube.at(t, y, x, 3 * k + c);
    return s;
}

double aolp(const Stokes &s, bool halved) {
    const double psi = std::atan2(s[2], s[1]);
    return halved ? 0.5 * psi : psi;
}

double dop(const Stokes &s) { return std::sqrt(s[1] * s[1] + s[2] * s[2] + s[3] * s[3]) / s[0]; }

PolarizationMap aolp_map(const TransientCube &cube, bool halved) {
    PolarizationMap m = make_map(cube);
    for (int t = 0; t < m.frames; ++t)
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x) {
                const Stokes s = luminance_stokes(cube, t, y, x);
                const size_t i = m.index(t, y, x);
                const double linear = std::hypot(s[1], s[2]);
                if (!(s[0] > 0) || linear < 1e-4 * s[0])
                    continue;
                m.value[i] = aolp(s, halved);
                m.valid[i] = 1;
            }
    return m;
}

PolarizationMap dop_map(const TransientCube &cube) {
    PolarizationMap m = make_map(cube);
    for (int t = 0; t < m.frames; ++t)
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x) {
                const Stokes s = luminance_stokes(cube, t, y, x);
                if (!(s[0] > 0))
                    continue;
                double d = dop(s);
                if (d > 1 + 1e-6) {
                    ++m.violations;
                    d = 1 + 1e-6;
                }
                const size_t i = m.index(t, y, x);
                m.value[i] = d;
                m.valid[i] = 1;
            }
    return m;
}

std::vector<Image8> colorize_aolp(const PolarizationMap &map, bool halved) {
    const double period = halved ? kPi : 2 * kPi;
    return colorize(map, [&](double psi) { return hue_color(psi / period + 0.5); });
}

std::vector<Image8> colorize_dop(const PolarizationMap &map) {
    return colorize(map, [](double d) {
        const double w = 1 - std::clamp(d, 0.0, 1.0);
        return Rgb{1, w, w};
    });
}

}  // namespace mitr
