// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/integrator.h>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mitr {

/// Differentiable albedo parameter. The masked channels of the material's
/// albedo all take `value`.
struct ParamHandle {
    std::string material;
    Rgb mask{1};
    double value = 0.5;
    double lo = 0, hi = 1;
};

/// Copy of `scene` with every parameter written into its material. Throws
/// std::invalid_argument for unknown materials or materials without albedo.
SceneDescription apply_params(const SceneDescription &scene, std::span<const ParamHandle> params);

/// Double-precision primal render at the current parameter values.
GradientCube render_primal(const SceneDescription &scene, std::span<const ParamHandle> params,
                           const RenderOptions &options);

/// dy(t)/dx for one parameter, from the same camera paths as the primal.
GradientCube forward_grad(const SceneDescription &scene, const ParamHandle &param, const RenderOptions &options);

/// (render(x + h) - render(x - h)) / 2h with identical seeds. Throws
/// std::invalid_argument for h <= 0 or when x +- h leaves the bounds.
GradientCube finite_difference_oracle(const SceneDescription &scene, const ParamHandle &param, double h,
                                      const RenderOptions &options);

/// Sum of adjoint * cube over [t][y][x][c] in index order.
double inner_product(std::span<const double> adjoint, const GradientCube &cube);

/// dL/dx for every parameter, given the adjoint dL/dy, from one replay of
/// the camera paths. Throws std::invalid_argument on shape mismatch.
std::vector<double> backward_grad(const SceneDescription &scene, std::span<const double> adjoint,
                                  std::span<const ParamHandle> params, const RenderOptions &options);

/// Mean squared error over all bins and channels, and its derivative.
struct LossEval {
    double loss = 0;
    std::vector<double> adjoint;
};
LossEval l2_loss(const GradientCube &y, std::span<const double> target);

/// Bins of a 3-channel cube as doubles in [t][y][x][c] order.
std::vector<double> cube_values(const TransientCube &cube);

struct OptimizeStep {
    int step = 0;
    double loss = 0;
    double learning_rate = 0;
    std::vector<double> values;  // parameter values the loss was evaluated at
};

struct OptimizeOptions {
    double learning_rate = 0.5;
    int steps = 50;
    RenderOptions render;
    /// Use seed + step for step `step` instead of one fixed seed.
    bool reseed = false;
    /// Called after each evaluation with the step record and primal render.
    std::function<void(const OptimizeStep &, const GradientCube &)> on_step;
};

struct OptimizeResult {
    std::vector<OptimizeStep> trajectory;
    std::vector<double> final_values;
};

/// Projected gradient descent x <- clamp(x - eta * dL/dx, lo, hi) on the
/// L2 loss against `target`. Whenever the loss exceeds five times the best
/// loss so far, eta is halved.
OptimizeResult optimize(const SceneDescription &scene, std::span<const double> target,
                        std::vector<ParamHandle> params, const OptimizeOptions &options);

}  // namespace mitr
