// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/math.h>

#include <optional>

namespace mitr {

enum class TimeFilter : uint8_t { Box, Tent };

struct TimeGate {
    double open = 0, close = 0;
    friend bool operator==(const TimeGate &, const TimeGate &) = default;
};

/// Discretization of the time axis of a transient film.
struct TemporalAxis {
    double t_start = 0;
    double bin_width = 1;
    int n_bins = 1;
    std::optional<TimeGate> gate;
    /// Remove the camera-to-first-vertex delay from every deposited sample.
    bool unwarp = false;
    TimeFilter filter = TimeFilter::Box;

    double t_end() const { return t_start + n_bins * bin_width; }
    double bin_center(int bin) const { return t_start + (bin + 0.5) * bin_width; }

    friend bool operator==(const TemporalAxis &, const TemporalAxis &) = default;
};

/// floor((time - t_start) / bin_width) when inside [0, n_bins); times exactly
/// on an edge belong to the higher bin.
std::optional<int> bin_index(const TemporalAxis &axis, double time);

/// Shift a path arrival time so every pixel shares a world-time origin:
/// subtracts the propagation delay from `last_visible_vertex` to the camera.
inline double unwarp_time(double path_time, const Vec3 &last_visible_vertex, const Vec3 &camera_origin,
                          double speed_of_light) {
    return path_time - distance(last_visible_vertex, camera_origin) / speed_of_light;
}

}  // namespace mitr
