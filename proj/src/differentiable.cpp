// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/differentiable.h>

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace mitr {

namespace {

std::vector<GradientParam> resolve(const Scene &scene, std::span<const ParamHandle> params) {
    std::vector<GradientParam> out;
    for (const ParamHandle &p : params)
        out.push_back({scene.description().find_material(p.material), p.mask});
    return out;
}

void check_shape(std::span<const double> values, const GradientCube &cube, const char *what) {
    if (values.size() != cube.size())
        throw std::invalid_argument(
            fmt::format("{} has {} values, the film has {}", what, values.size(), cube.size()));
}

}  // namespace

SceneDescription apply_params(const SceneDescription &scene, std::span<const ParamHandle> params) {
    SceneDescription out = scene;
    for (const ParamHandle &p : params) {
        const int id = out.find_material(p.material);
        if (id < 0)
            throw std::invalid_argument(fmt::format("unknown material '{}'", p.material));
        Material m(out.materials[id]);
        if (!m.has_albedo())
            throw std::invalid_argument(fmt::format("material '{}' has no differentiable albedo", p.material));
        Rgb a = m.albedo();
        for (int c = 0; c < 3; ++c)
            if (p.mask[c] != 0)
                a[c] = p.value;
        std::visit(
            [&](auto &model) {
                if constexpr (requires { model.albedo; })
                    model.albedo = a;
            },
            out.materials[id].model);
    }
    return out;
}

GradientCube render_primal(const SceneDescription &scene, std::span<const ParamHandle> params,
                           const RenderOptions &options) {
    const Scene compiled(apply_params(scene, params));
    return render_gradients(compiled, {}, options).primal;
}

GradientCube forward_grad(const SceneDescription &scene, const ParamHandle &param, const RenderOptions &options) {
    const ParamHandle one[] = {param};
    const Scene compiled(apply_params(scene, one));
    const auto handles = resolve(compiled, one);
    return std::move(render_gradients(compiled, handles, options).gradients[0]);
}

GradientCube finite_difference_oracle(const SceneDescription &scene, const ParamHandle &param, double h,
                                      const RenderOptions &options) {
    if (!(h > 0))
        throw std::invalid_argument("finite-difference step must be positive");
    if (param.value - h < param.lo || param.value + h > param.hi)
        throw std::invalid_argument(fmt::format("value {} +- {} leaves the bounds [{}, {}]", param.value, h,
                                                param.lo, param.hi));
    ParamHandle plus = param, minus = param;
    plus.value += h;
    minus.value -= h;
    const GradientCube hi = render_primal(scene, std::span(&plus, 1), options);
    const GradientCube lo = render_primal(scene, std::span(&minus, 1), options);
    GradientCube out = hi;
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (hi.data[i] - lo.data[i]) / (2 * h);
    // Exact tallies have no meaning for a difference quotient.
    out.exact_bins.clear();
    out.exact_overflow.clear();
    out.exact_steady.clear();
    return out;
}

double inner_product(std::span<const double> adjoint, const GradientCube &cube) {
    check_shape(adjoint, cube, "adjoint");
    double sum = 0;
    for (size_t i = 0; i < adjoint.size(); ++i)
        sum += adjoint[i] * cube.data[i];
    return sum;
}

std::vector<double> backward_grad(const SceneDescription &scene, std::span<const double> adjoint,
                                  std::span<const ParamHandle> params, const RenderOptions &options) {
    const Scene compiled(apply_params(scene, params));
    const size_t expected = static_cast<size_t>(compiled.description().film.n_bins) *
                            compiled.description().camera.width * compiled.description().camera.height * 3;
    if (adjoint.size() != expected)
        throw std::invalid_argument(fmt::format("adjoint has {} values, the film has {}", adjoint.size(), expected));
    const auto handles = resolve(compiled, params);
    const GradientRender r = render_gradients(compiled, handles, options);
    std::vector<double> grads;
    for (const GradientCube &g : r.gradients)
        grads.push_back(inner_product(adjoint, g));
    return grads;
}

LossEval l2_loss(const GradientCube &y, std::span<const double> target) {
    check_shape(target, y, "target");
    LossEval e;
    e.adjoint.resize(target.size());
    const double n = static_cast<double>(target.size());
    for (size_t i = 0; i < target.size(); ++i) {
        const double r = y.data[i] - target[i];
        e.loss += r * r;
        e.adjoint[i] = 2 * r / n;
    }
    e.loss /= n;
    return e;
}

std::vector<double> cube_values(const TransientCube &cube) {
    if (cube.channels != 3)
        throw std::invalid_argument("expected a 3-channel cube");
    return {cube.data.begin(), cube.data.end()};
}

OptimizeResult optimize(const SceneDescription &scene, std::span<const double> target,
                        std::vector<ParamHandle> params, const OptimizeOptions &options) {
    OptimizeResult result;
    double eta = options.learning_rate;
    double best = kInfinity;
    for (int step = 0; step < options.steps; ++step) {
        RenderOptions ro = options.render;
        if (options.reseed)
            ro.seed = options.render.seed + static_cast<uint64_t>(step);
        const Scene compiled(apply_params(scene, params));
        const auto handles = resolve(compiled, params);
        const GradientRender r = render_gradients(compiled, handles, ro);
        const LossEval loss = l2_loss(r.primal, target);

        if (loss.loss > 5 * best)
            eta *= 0.5;
        best = std::min(best, loss.loss);

        OptimizeStep rec;
        rec.step = step;
        rec.loss = loss.loss;
        rec.learning_rate = eta;
        for (const ParamHandle &p : params)
            rec.values.push_back(p.value);
        result.trajectory.push_back(rec);
        if (options.on_step)
            options.on_step(rec, r.primal);

        for (size_t k = 0; k < params.size(); ++k) {
            const double g = inner_product(loss.adjoint, r.gradients[k]);
            params[k].value = std::clamp(params[k].value - eta * g, params[k].lo, params[k].hi);
        }
    }
    for (const ParamHandle &p : params)
        result.final_values.push_back(p.value);
    return result;
}

}  // namespace mitr
