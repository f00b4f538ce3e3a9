// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/polarization.h>
#include <mitr/rng.h>
#include <mitr/scene.h>

#include <variant>

namespace mitr {

/// Mueller response of one scattering event. Frames and directions are in
/// the shading frame; `in` refers to light arriving along -wo, `out` to
/// light leaving along wi.
struct PolarizedResponse {
    std::array<Mat4, 3> m{};
    Vec3 in_frame{1, 0, 0};
    Vec3 out_frame{1, 0, 0};
};

struct BsdfEval {
    Rgb value;   // f(wi, wo) * |cos(wo)|
    Rgb dvalue;  // derivative of `value` with respect to the albedo channel
    double pdf = 0;
    PolarizedResponse pol;  // filled only when requested
};

struct BsdfSample {
    Vec3 wo;
    Rgb weight;   // f * |cos| / pdf, or the discrete weight of a delta event
    Rgb dweight;  // derivative of `weight` with respect to the albedo channel
    double pdf = 0;  // solid-angle density; 0 for delta events
    bool delta = false;
    bool valid = false;
    PolarizedResponse pol;
};

/// Runtime form of a MaterialRecord. All directions are unit vectors in
/// the local shading frame; `wi` points back towards the previous vertex.
class Material {
  public:
    Material() = default;
    explicit Material(const MaterialRecord &record) : model_(record.model) {}

    /// True when every scattering event is discrete (no NEE possible).
    bool is_delta() const;
    /// True when the material has an albedo that gradients can target.
    bool has_albedo() const;
    Rgb albedo() const;
    void set_albedo(const Rgb &a);

    /// f(wi, wo) per channel, without the cosine.
    Rgb eval_bsdf(const Vec3 &wi, const Vec3 &wo) const;
    BsdfEval eval(const Vec3 &wi, const Vec3 &wo, bool polarized) const;
    double pdf(const Vec3 &wi, const Vec3 &wo) const;
    /// Uses `u_lobe` for the discrete lobe choice and `u` for the direction.
    BsdfSample sample(const Vec3 &wi, double u_lobe, Vec2 u, bool polarized) const;

    const MaterialRecord::Model &model() const { return model_; }

  private:
    MaterialRecord::Model model_;
};

/// GGX normal distribution with roughness `alpha`, `cos_h` = h.z.
double ggx_d(double alpha, double cos_h);
/// Smith masking for one direction.
double ggx_g1(double alpha, const Vec3 &w, const Vec3 &h);

/// Beer-Lambert transmittance exp(-sigma_t * d).
Rgb eval_transmittance(const Rgb &sigma_t, double distance);
inline Rgb eval_transmittance(const MediumRecord &m, double distance) {
    return eval_transmittance(m.sigma_t(), distance);
}

struct DistanceSample {
    double t = kInfinity;
    bool medium_event = false;
    /// sigma_s * T(t) / pdf for medium events, T(t_max) / pdf otherwise.
    Rgb weight;
    double pdf = 0;
};

/// Free-flight sampling against a boundary at `t_max`: channel chosen by
/// `u_channel`, distance exponential in that channel's sigma_t, density
/// averaged over channels.
DistanceSample sample_distance(const MediumRecord &medium, double t_max, double u_channel, double u_distance);

}  // namespace mitr
