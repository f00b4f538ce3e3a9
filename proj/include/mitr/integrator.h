// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/film.h>
#include <mitr/render_scene.h>

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mitr {

struct CropWindow {
    int x0 = 0, y0 = 0, width = 0, height = 0;
};

struct RenderOptions {
    int spp = 64;
    uint64_t seed = 0;
    int threads = 0;  // 0: MITR_THREADS or hardware concurrency
    bool nee = true;
    /// Count emitters hit by BSDF-sampled rays (MIS-weighted when NEE is on).
    bool bsdf_light_hits = true;
    std::optional<CropWindow> crop;
    /// Verify that every arrival time respects the straight-line bound from
    /// the emitter to the camera; throws std::logic_error otherwise.
    bool check_time_bounds = false;
    /// Throw MediumError on inconsistent boundary crossings instead of
    /// clamping the medium stack.
    bool strict_media = false;
    /// Called after each finished tile with (done, total).
    std::function<void(int, int)> progress;
};

class MediumError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RenderResult {
    TransientCube cube;
    SteadyImage steady;
};

/// Transient render of `scene` (path or volumetric kernel by integrator
/// kind). Results do not depend on the thread count.
RenderResult render(const Scene &scene, const RenderOptions &options);

/// One deposit of a camera path: arrival time (unwarped when the film asks
/// for it), pulse width of the emitter, and per-channel value.
struct PathDeposit {
    double time = 0;
    double pulse_fwhm = 0;
    std::vector<double> values;
};

/// All deposits of sample `sample` of pixel (x, y).
std::vector<PathDeposit> transient_path_sample(const Scene &scene, int x, int y, int sample, const RenderOptions &options);

/// Differentiable albedo channel: `mask` selects the color channels of
/// material `material` that move together with the parameter.
struct GradientParam {
    int material = -1;
    Rgb mask{1};
};

inline constexpr int kMaxGradientParams = 8;

/// Double-precision 3-channel cube [t][y][x][c] with the exact tallies it
/// was normalized from. Used for primal and derivative renders.
struct GradientCube {
    int width = 0, height = 0;
    TemporalAxis axis;
    int spp = 1;
    std::vector<double> data;
    std::vector<Fixed> exact_bins;      // [t][y][x][c], before normalization
    std::vector<Fixed> exact_overflow;  // [y][x][c], out-of-axis deposits
    std::vector<Fixed> exact_steady;    // [y][x][c], independent steady tally

    GradientCube() = default;
    GradientCube(int width, int height, const TemporalAxis &axis, int spp);

    size_t index(int t, int y, int x, int c) const {
        return ((static_cast<size_t>(t) * height + y) * width + x) * 3 + c;
    }
    size_t size() const { return data.size(); }
};

/// Sum of the exact bins and overflow of every pixel, normalized: [y][x][c].
std::vector<double> collapse_time(const GradientCube &cube);
/// The independent steady tally, normalized: [y][x][c].
std::vector<double> steady_tally(const GradientCube &cube);

/// Primal transient and its derivatives with respect to each parameter,
/// from one pass over the camera paths.
struct GradientRender {
    GradientCube primal;
    std::vector<GradientCube> gradients;
};

GradientRender render_gradients(const Scene &scene, std::span<const GradientParam> params, const RenderOptions &options);

}  // namespace mitr
