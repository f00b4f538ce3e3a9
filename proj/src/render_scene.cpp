// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/render_scene.h>

#include <algorithm>
#include <cmath>

namespace mitr {

Camera::Camera(const CameraRecord &record)
    : origin_(record.origin), width_(record.width), height_(record.height) {
    forward_ = normalize(record.look_at - record.origin);
    right_ = normalize(cross(forward_, record.up));
    up_ = cross(right_, forward_);
    tan_half_ = std::tan(0.5 * record.fov_degrees * kPi / 180.0);
    aspect_ = static_cast<double>(width_) / height_;
}

Ray Camera::generate_ray(int x, int y, Vec2 u) const {
    const double sx = (2.0 * (x + u.x) / width_ - 1.0) * tan_half_ * aspect_;
    const double sy = (1.0 - 2.0 * (y + u.y) / height_) * tan_half_;
    Ray ray;
    ray.origin = origin_;
    ray.direction = normalize(forward_ + sx * right_ + sy * up_);
    return ray;
}

Vec3 Camera::reference_axis(const Vec3 &direction) const {
    const Vec3 r = right_ - dot(right_, direction) * direction;
    const double len = length(r);
    return len > 1e-9 ? r / len : perpendicular(direction);
}

Scene::Scene(SceneDescription desc) : desc_(std::move(desc)), camera_(desc_.camera) {
    for (const MaterialRecord &m : desc_.materials)
        materials_.emplace_back(m);
    camera_medium_ = desc_.camera.medium.empty() ? -1 : desc_.find_medium(desc_.camera.medium);

    std::vector<Primitive> prims;
    shapes_.resize(desc_.shapes.size());
    for (size_t i = 0; i < desc_.shapes.size(); ++i) {
        const ShapeRecord &s = desc_.shapes[i];
        shapes_[i].material = s.material.empty() ? -1 : desc_.find_material(s.material);
        shapes_[i].interior = s.interior.empty() ? -1 : desc_.find_medium(s.interior);
        for (Primitive &p : shape_primitives(s, static_cast<int>(i)))
            prims.push_back(p);
    }
    bvh_ = Bvh(std::move(prims));

    for (const EmitterRecord &e : desc_.emitters) {
        Light light;
        if (const auto *area = std::get_if<AreaEmitter>(&e)) {
            light.kind = Light::Kind::Area;
            light.shape = desc_.find_shape(area->shape);
            light.radiance = area->radiance;
            const auto prims_all = bvh_.primitives();
            double total = 0;
            for (size_t i = 0; i < prims_all.size(); ++i) {
                if (prims_all[i].shape_id != light.shape)
                    continue;
                light.primitives.push_back(static_cast<int>(i));
                total += prims_all[i].area();
                light.cdf.push_back(total);
            }
            if (total <= 0)
                continue;
            for (double &c : light.cdf)
                c /= total;
            light.area = total;
            shapes_[light.shape].emitter = static_cast<int>(lights_.size());
        } else if (const auto *point = std::get_if<PointEmitter>(&e)) {
            light.kind = Light::Kind::Point;
            light.position = point->position;
            light.intensity = point->intensity;
        } else {
            const auto &laser = std::get<PulsedLaser>(e);
            light.kind = Light::Kind::Laser;
            light.laser_origin = laser.origin;
            light.beam_direction = normalize(laser.target - laser.origin);
            light.power = laser.power;
            light.pulse_fwhm = laser.pulse_fwhm;
            Ray beam;
            beam.origin = laser.origin;
            beam.direction = light.beam_direction;
            if (auto si = intersect(beam); si && si->material_id >= 0 && !materials_[si->material_id].is_delta()) {
                light.laser_hit = true;
                light.spot = *si;
                light.position = si->position;
                double n = 1;
                if (camera_medium_ >= 0)
                    n = desc_.media[camera_medium_].ior;
                light.time_offset = si->distance * n / desc_.speed_of_light;
            }
        }
        lights_.push_back(std::move(light));
    }
}

std::optional<SurfaceInteraction> Scene::intersect(const Ray &ray) const {
    auto si = ray_intersect(bvh_, ray);
    if (si)
        si->material_id = shapes_[si->shape_id].material;
    return si;
}

LightSample Scene::sample_light(const Vec3 &ref, double u_select, Vec2 u) const {
    LightSample ls;
    if (lights_.empty())
        return ls;
    const int n = static_cast<int>(lights_.size());
    const int idx = std::min(static_cast<int>(u_select * n), n - 1);
    const double select = 1.0 / n;
    const Light &light = lights_[idx];
    switch (light.kind) {
    case Light::Kind::Area: {
        // Reuse u.x for both the primitive choice and the point on it.
        const auto it = std::lower_bound(light.cdf.begin(), light.cdf.end(), u.x);
        const size_t k = std::min<size_t>(it - light.cdf.begin(), light.cdf.size() - 1);
        const double lo = k == 0 ? 0.0 : light.cdf[k - 1];
        const double width = light.cdf[k] - lo;
        const double ux = width > 0 ? std::clamp((u.x - lo) / width, 0.0, 1.0 - 1e-16) : 0.5;
        const auto [p, nrm] = bvh_.primitive(light.primitives[k]).sample_area({ux, u.y});
        const Vec3 d = p - ref;
        const double dist2 = length_squared(d);
        if (dist2 <= 0)
            return ls;
        const Vec3 w = d / std::sqrt(dist2);
        const double cos_l = -dot(nrm, w);
        ls.position = p;
        ls.normal = nrm;
        ls.emitter_origin = p;
        if (cos_l <= 0)
            return ls;
        ls.value = light.radiance;
        ls.pdf = select * dist2 / (cos_l * light.area);
        return ls;
    }
    case Light::Kind::Point: {
        const double dist2 = length_squared(light.position - ref);
        if (dist2 <= 0)
            return ls;
        ls.position = light.position;
        ls.emitter_origin = light.position;
        ls.value = light.intensity / dist2;
        ls.pdf = select;
        ls.delta = true;
        return ls;
    }
    case Light::Kind::Laser: {
        if (!light.laser_hit)
            return ls;
        const Vec3 d = ref - light.position;
        const double dist2 = length_squared(d);
        if (dist2 <= 0)
            return ls;
        const Vec3 w = d / std::sqrt(dist2);
        const SurfaceInteraction &s = light.spot;
        const Vec3 wo_local = s.frame.to_local(w);
        const Rgb f = materials_[s.material_id].eval_bsdf(s.wi_local, wo_local);
        // Radiant intensity of the lit spot: P f cos(theta_out).
        ls.value = light.power * f * (std::abs(wo_local.z) / dist2);
        ls.position = light.position;
        ls.emitter_origin = light.laser_origin;
        ls.pdf = select;
        ls.delta = true;
        ls.time_offset = light.time_offset;
        ls.pulse_fwhm = light.pulse_fwhm;
        return ls;
    }
    }
    return ls;
}

double Scene::light_pdf(int light, const Vec3 &ref, const Vec3 &p, const Vec3 &n) const {
    const Light &l = lights_[light];
    if (l.kind != Light::Kind::Area)
        return 0;
    const Vec3 d = p - ref;
    const double dist2 = length_squared(d);
    const double cos_l = std::abs(dot(n, d)) / std::sqrt(dist2);
    if (cos_l <= 0)
        return 0;
    return dist2 / (cos_l * l.area * static_cast<double>(lights_.size()));
}

Rgb Scene::emitted(int light, const Vec3 &n, const Vec3 &w) const {
    const Light &l = lights_[light];
    if (l.kind != Light::Kind::Area || dot(n, w) <= 0)
        return Rgb{0};
    return l.radiance;
}

}  // namespace mitr
