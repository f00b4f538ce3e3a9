// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/material.h>
#include <mitr/sampling.h>

namespace mitr {

namespace {

Vec3 flip_z(const Vec3 &v) { return {v.x, v.y, -v.z}; }

Mat4 depolarizer(double v) { return mueller_depolarizer(v); }

void fill_depolarizing(PolarizedResponse &pol, const Rgb &v, const Vec3 &wi, const Vec3 &wo) {
    for (int c = 0; c < 3; ++c)
        pol.m[c] = depolarizer(v[c]);
    pol.in_frame = perpendicular(-wo);
    pol.out_frame = perpendicular(wi);
}

/// Reference axis perpendicular to the plane holding wi and wo.
Vec3 plane_normal(const Vec3 &wi, const Vec3 &wo) {
    const Vec3 c = cross(wo, wi);
    const double l = length(c);
    return l > 1e-9 ? c / l : perpendicular(wi);
}

struct PlasticTerms {
    double fi = 0, fo = 0;
    double p_spec = 0;
};

PlasticTerms plastic_terms(const RoughPlasticMaterial &m, const Vec3 &wi, const Vec3 &wo) {
    PlasticTerms t;
    t.fi = fresnel_dielectric(m.ior, std::abs(wi.z));
    t.fo = fresnel_dielectric(m.ior, std::abs(wo.z));
    t.p_spec = 0.1 + 0.8 * t.fi;
    return t;
}

// Specular coat value f_s (no cosine) and its sampling density, both in the
// upper hemisphere (wi.z > 0, wo.z > 0).
struct CoatEval {
    double f = 0;
    double pdf = 0;
    double cos_ih = 0;
    double dg = 0;  // D * G / (4 cos_i cos_o)
};

CoatEval coat_eval(const RoughPlasticMaterial &m, const Vec3 &wi, const Vec3 &wo) {
    CoatEval e;
    if (wi.z <= 0 || wo.z <= 0)
        return e;
    const Vec3 h = normalize(wi + wo);
    const double alpha = m.roughness;
    const double d = ggx_d(alpha, h.z);
    const double g = ggx_g1(alpha, wi, h) * ggx_g1(alpha, wo, h);
    e.cos_ih = dot(wi, h);
    e.dg = d * g / (4 * wi.z * wo.z);
    e.f = fresnel_dielectric(m.ior, e.cos_ih) * e.dg;
    e.pdf = d * h.z / (4 * dot(wo, h));
    return e;
}

}  // namespace

double ggx_d(double alpha, double cos_h) {
    if (cos_h <= 0)
        return 0;
    const double cos2 = cos_h * cos_h;
    const double tan2 = (1 - cos2) / cos2;
    const double a2 = alpha * alpha;
    return 1.0 / (kPi * a2 * cos2 * cos2 * sqr(1 + tan2 / a2));
}

double ggx_g1(double alpha, const Vec3 &w, const Vec3 &h) {
    if (dot(w, h) * w.z <= 0)
        return 0;
    const double cos2 = w.z * w.z;
    const double tan2 = std::max(0.0, 1 - cos2) / cos2;
    const double lambda = 0.5 * (-1 + std::sqrt(1 + alpha * alpha * tan2));
    return 1.0 / (1 + lambda);
}

bool Material::is_delta() const {
    return std::holds_alternative<PolarizerMaterial>(model_) || std::holds_alternative<MirrorMaterial>(model_);
}

bool Material::has_albedo() const {
    return std::holds_alternative<DiffuseMaterial>(model_) || std::holds_alternative<RoughPlasticMaterial>(model_);
}

Rgb Material::albedo() const {
    if (const auto *d = std::get_if<DiffuseMaterial>(&model_))
        return d->albedo;
    if (const auto *p = std::get_if<RoughPlasticMaterial>(&model_))
        return p->albedo;
    return Rgb(0.0);
}

void Material::set_albedo(const Rgb &a) {
    if (auto *d = std::get_if<DiffuseMaterial>(&model_))
        d->albedo = a;
    else if (auto *p = std::get_if<RoughPlasticMaterial>(&model_))
        p->albedo = a;
}

Rgb Material::eval_bsdf(const Vec3 &wi_in, const Vec3 &wo_in) const {
    if (wi_in.z * wo_in.z <= 0 || is_delta())
        return Rgb(0.0);
    const Vec3 wi = wi_in.z < 0 ? flip_z(wi_in) : wi_in;
    const Vec3 wo = wi_in.z < 0 ? flip_z(wo_in) : wo_in;
    if (const auto *d = std::get_if<DiffuseMaterial>(&model_))
        return d->albedo * kInvPi;
    const auto &p = std::get<RoughPlasticMaterial>(model_);
    const PlasticTerms t = plastic_terms(p, wi, wo);
    const CoatEval coat = coat_eval(p, wi, wo);
    return p.albedo * (kInvPi * (1 - t.fi) * (1 - t.fo)) + Rgb(coat.f);
}

BsdfEval Material::eval(const Vec3 &wi_in, const Vec3 &wo_in, bool polarized) const {
    BsdfEval r;
    if (wi_in.z * wo_in.z <= 0 || is_delta())
        return r;
    const bool flipped = wi_in.z < 0;
    const Vec3 wi = flipped ? flip_z(wi_in) : wi_in;
    const Vec3 wo = flipped ? flip_z(wo_in) : wo_in;
    const double cos_o = wo.z;
    if (const auto *d = std::get_if<DiffuseMaterial>(&model_)) {
        r.value = d->albedo * (kInvPi * cos_o);
        r.dvalue = Rgb(kInvPi * cos_o);
        r.pdf = cosine_hemisphere_pdf(cos_o);
        if (polarized)
            fill_depolarizing(r.pol, r.value, wi_in, wo_in);
        return r;
    }
    const auto &p = std::get<RoughPlasticMaterial>(model_);
    const PlasticTerms t = plastic_terms(p, wi, wo);
    const CoatEval coat = coat_eval(p, wi, wo);
    const double diffuse_scale = kInvPi * (1 - t.fi) * (1 - t.fo) * cos_o;
    r.value = p.albedo * diffuse_scale + Rgb(coat.f * cos_o);
    r.dvalue = Rgb(diffuse_scale);
    r.pdf = t.p_spec * coat.pdf + (1 - t.p_spec) * cosine_hemisphere_pdf(cos_o);
    if (polarized) {
        const Mat4 spec = mueller_fresnel_reflection(p.ior, coat.cos_ih) * (coat.dg * cos_o);
        for (int c = 0; c < 3; ++c)
            r.pol.m[c] = spec + depolarizer(p.albedo[c] * diffuse_scale);
        r.pol.in_frame = r.pol.out_frame = plane_normal(wi_in, wo_in);
    }
    return r;
}

double Material::pdf(const Vec3 &wi, const Vec3 &wo) const { return eval(wi, wo, false).pdf; }

BsdfSample Material::sample(const Vec3 &wi_in, double u_lobe, Vec2 u, bool polarized) const {
    BsdfSample s;
    if (wi_in.z == 0)
        return s;

    if (const auto *pol = std::get_if<PolarizerMaterial>(&model_)) {
        s.wo = -wi_in;
        s.weight = Rgb(0.5);
        s.delta = true;
        s.valid = true;
        if (polarized) {
            Vec3 ref = Vec3{1, 0, 0} - wi_in.x * wi_in;
            if (length(ref) < 1e-9)
                ref = Vec3{0, 1, 0} - wi_in.y * wi_in;
            ref = normalize(ref);
            const Mat4 m = mueller_linear_polarizer(pol->transmission_axis_angle);
            s.pol.m = {m, m, m};
            s.pol.in_frame = s.pol.out_frame = ref;
        }
        return s;
    }
    if (const auto *mir = std::get_if<MirrorMaterial>(&model_)) {
        s.wo = {-wi_in.x, -wi_in.y, wi_in.z};
        for (int c = 0; c < 3; ++c)
            s.weight[c] = fresnel_conductor(mir->eta[c], mir->k[c], std::abs(wi_in.z));
        s.delta = true;
        s.valid = true;
        if (polarized) {
            for (int c = 0; c < 3; ++c)
                s.pol.m[c] = mat4_identity() * s.weight[c];
            s.pol.in_frame = s.pol.out_frame = plane_normal(wi_in, s.wo);
        }
        return s;
    }

    const bool flipped = wi_in.z < 0;
    const Vec3 wi = flipped ? flip_z(wi_in) : wi_in;

    if (const auto *d = std::get_if<DiffuseMaterial>(&model_)) {
        const DirectionSample ds = sample_cosine_hemisphere(u);
        if (ds.pdf <= 0)
            return s;
        s.wo = flipped ? flip_z(ds.direction) : ds.direction;
        s.pdf = ds.pdf;
        s.weight = d->albedo;
        s.dweight = Rgb(1.0);
        s.valid = true;
        if (polarized)
            fill_depolarizing(s.pol, s.weight, wi_in, s.wo);
        return s;
    }

    // Pick a lobe, then weight by the full mixture: f * cos / pdf_mix.
    const auto &p = std::get<RoughPlasticMaterial>(model_);
    const double p_spec = 0.1 + 0.8 * fresnel_dielectric(p.ior, wi.z);
    Vec3 wo;
    if (u_lobe < p_spec) {
        const double alpha = p.roughness;
        const double tan2 = alpha * alpha * u.x / (1 - u.x);
        const double cos_h = 1 / std::sqrt(1 + tan2);
        const double sin_h = safe_sqrt(1 - cos_h * cos_h);
        const double phi = 2 * kPi * u.y;
        const Vec3 h{sin_h * std::cos(phi), sin_h * std::sin(phi), cos_h};
        wo = reflect(wi, h);
        if (wo.z <= 0)
            return s;
    } else {
        wo = sample_cosine_hemisphere(u).direction;
    }
    s.wo = flipped ? flip_z(wo) : wo;
    const BsdfEval e = eval(wi_in, s.wo, polarized);
    if (!(e.pdf > 0))
        return s;
    s.pdf = e.pdf;
    s.weight = e.value / e.pdf;
    s.dweight = e.dvalue / e.pdf;
    if (polarized) {
        s.pol = e.pol;
        for (Mat4 &m : s.pol.m)
            m = m * (1 / e.pdf);
    }
    s.valid = true;
    return s;
}

Rgb eval_transmittance(const Rgb &sigma_t, double distance) {
    Rgb t;
    for (int c = 0; c < 3; ++c)
        t[c] = sigma_t[c] == 0 ? 1.0 : std::exp(-sigma_t[c] * distance);
    return t;
}

DistanceSample sample_distance(const MediumRecord &medium, double t_max, double u_channel, double u_distance) {
    const Rgb sigma_t = medium.sigma_t();
    DistanceSample ds;
    ds.t = t_max;
    if (sigma_t.is_black()) {
        ds.weight = Rgb(1.0);
        ds.pdf = 1;
        return ds;
    }
    if (medium.sigma_s.is_black()) {
        // Pure absorber: nothing to scatter into, attenuate deterministically.
        ds.weight = eval_transmittance(sigma_t, t_max);
        ds.pdf = 1;
        return ds;
    }
    const int channel = std::min(2, static_cast<int>(u_channel * 3));
    const double t = sigma_t[channel] > 0 ? -std::log1p(-u_distance) / sigma_t[channel] : kInfinity;
    if (t < t_max) {
        const Rgb tr = eval_transmittance(sigma_t, t);
        ds.t = t;
        ds.medium_event = true;
        ds.pdf = (sigma_t * tr).average();
        ds.weight = ds.pdf > 0 ? medium.sigma_s * tr / ds.pdf : Rgb(0.0);
        return ds;
    }
    const Rgb tr = eval_transmittance(sigma_t, t_max);
    ds.pdf = tr.average();
    ds.weight = ds.pdf > 0 ? tr / ds.pdf : Rgb(0.0);
    return ds;
}

}  // namespace mitr
