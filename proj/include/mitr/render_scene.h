// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/geometry.h>
#include <mitr/material.h>
#include <mitr/scene.h>

#include <vector>

namespace mitr {

/// Pinhole camera with a vertical field of view; pixel row 0 is the top.
class Camera {
  public:
    Camera() = default;
    explicit Camera(const CameraRecord &record);

    /// Ray through film position (x + u.x, y + u.y).
    Ray generate_ray(int x, int y, Vec2 u) const;
    /// Polarization reference axis for a camera ray: the camera's right
    /// vector made perpendicular to `direction`.
    Vec3 reference_axis(const Vec3 &direction) const;

    const Vec3 &origin() const { return origin_; }
    int width() const { return width_; }
    int height() const { return height_; }

  private:
    Vec3 origin_, forward_, right_, up_;
    double tan_half_ = 0, aspect_ = 1;
    int width_ = 0, height_ = 0;
};

struct ShapeInfo {
    int material = -1;  // index into Scene::materials, -1 for medium boundaries
    int interior = -1;  // medium index, -1 for none
    int emitter = -1;   // light index when the shape is an area emitter
};

struct Light {
    enum class Kind : uint8_t { Area, Point, Laser };
    Kind kind = Kind::Point;
    // Area lights.
    int shape = -1;
    Rgb radiance;
    std::vector<int> primitives;  // BVH primitive indices
    std::vector<double> cdf;      // cumulative area, normalized
    double area = 0;
    // Point lights and laser spots.
    Vec3 position;
    Rgb intensity;
    // Laser spots: the spot scatters the beam as a point source whose
    // intensity follows the surface BSDF.
    bool laser_hit = false;
    Vec3 laser_origin;
    Vec3 beam_direction;  // unit, from the laser towards the spot
    SurfaceInteraction spot;
    Rgb power;
    double time_offset = 0;
    double pulse_fwhm = 0;
};

struct LightSample {
    Vec3 position;
    Vec3 normal;        // zero for point-like sources
    Rgb value;          // radiance (area) or intensity / d^2 (point-like) towards the reference
    double pdf = 0;     // solid angle (area) or discrete selection probability
    bool delta = false;
    double time_offset = 0;
    double pulse_fwhm = 0;
    Vec3 emitter_origin;  // emitting position for the arrival-time bound
};

/// Scene description compiled for rendering: acceleration structure,
/// runtime materials, lights with sampling tables.
class Scene {
  public:
    explicit Scene(SceneDescription desc);

    const SceneDescription &description() const { return desc_; }
    const Camera &camera() const { return camera_; }
    const Bvh &bvh() const { return bvh_; }
    const std::vector<ShapeInfo> &shapes() const { return shapes_; }
    const std::vector<Material> &materials() const { return materials_; }
    std::vector<Material> &materials() { return materials_; }
    const std::vector<Light> &lights() const { return lights_; }
    const std::vector<MediumRecord> &media() const { return desc_.media; }
    int camera_medium() const { return camera_medium_; }
    double speed_of_light() const { return desc_.speed_of_light; }

    /// Nearest hit with material id filled in.
    std::optional<SurfaceInteraction> intersect(const Ray &ray) const;

    /// Pick a light uniformly, then a point on it, as seen from `ref`.
    LightSample sample_light(const Vec3 &ref, double u_select, Vec2 u) const;
    /// Solid-angle density of sample_light producing `p` on area light
    /// `light` (including the selection probability), as seen from `ref`.
    double light_pdf(int light, const Vec3 &ref, const Vec3 &p, const Vec3 &n) const;

    /// Radiance leaving area light `light` at a point with normal `n`
    /// towards direction `w`.
    Rgb emitted(int light, const Vec3 &n, const Vec3 &w) const;

  private:
    SceneDescription desc_;
    Camera camera_;
    Bvh bvh_;
    std::vector<ShapeInfo> shapes_;
    std::vector<Material> materials_;
    std::vector<Light> lights_;
    int camera_medium_ = -1;
};

}  // namespace mitr
