// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/math.h>

#include <optional>
#include <span>
#include <vector>

namespace mitr {

struct Ray {
    Vec3 origin;
    Vec3 direction{0, 0, 1};
    double t_min = 0;
    double t_max = kInfinity;
    /// Optical time already accumulated when the ray leaves `origin`.
    double time_offset = 0;

    Vec3 at(double t) const { return origin + t * direction; }
};

struct SurfaceInteraction {
    Vec3 position;
    Vec3 geometric_normal;
    Vec3 shading_normal;
    Vec2 uv;
    int shape_id = -1;
    int primitive = -1;
    int material_id = -1;
    /// Incoming direction (pointing back along the ray) in the shading frame.
    Vec3 wi_local;
    double distance = 0;
    Frame frame;
    /// True when the ray arrived on the side the geometric normal points to.
    bool front_face = true;
};

struct Bounds3 {
    Vec3 lo{kInfinity, kInfinity, kInfinity};
    Vec3 hi{-kInfinity, -kInfinity, -kInfinity};

    void expand(const Vec3 &p) { lo = min(lo, p); hi = max(hi, p); }
    void expand(const Bounds3 &b) { lo = min(lo, b.lo); hi = max(hi, b.hi); }
    Vec3 centroid() const { return 0.5 * (lo + hi); }
    Vec3 extent() const { return hi - lo; }
    bool valid() const { return lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z; }

    /// Slab test against [t0, t1].
    bool hit(const Ray &ray, const Vec3 &inv_dir, double t0, double t1) const;
};

/// Ray-intersectable primitive. Triangles and rectangles store a corner and
/// two edges; spheres store center and radius.
struct Primitive {
    enum class Kind : uint8_t { Triangle, Rectangle, Sphere };

    Kind kind = Kind::Triangle;
    int shape_id = 0;
    int index = 0;  // position within its shape
    Vec3 p0, e1, e2;
    double radius = 0;

    Bounds3 bounds() const;
    double area() const;
    /// Hit distance in (t_min, t_max) or nullopt; `uv` receives surface coordinates.
    std::optional<double> intersect(const Ray &ray, Vec2 &uv) const;
    Vec3 normal_at(const Vec3 &p) const;
    /// Uniform point on the primitive with its outward normal.
    std::pair<Vec3, Vec3> sample_area(Vec2 u) const;
};

struct Hit {
    double t = kInfinity;
    int primitive = -1;
    int shape_id = -1;
    Vec2 uv;
};

/// Axis-aligned BVH with median splits. Nearest-hit queries break exact
/// distance ties by the lowest (shape_id, index) pair so results do not
/// depend on primitive insertion order.
class Bvh {
  public:
    Bvh() = default;
    explicit Bvh(std::vector<Primitive> primitives);

    std::optional<Hit> intersect(const Ray &ray) const;
    std::span<const Primitive> primitives() const { return prims_; }
    const Primitive &primitive(int i) const { return prims_[i]; }
    Bounds3 bounds() const { return nodes_.empty() ? Bounds3{} : nodes_[0].bounds; }

  private:
    struct Node {
        Bounds3 bounds;
        int left = -1, right = -1;  // children; -1 for leaves
        int first = 0, count = 0;   // leaf primitive range
    };
    int build(int first, int count);

    std::vector<Primitive> prims_;
    std::vector<Node> nodes_;
};

/// Nearest hit of `ray` against `accel`, with full surface interaction data.
std::optional<SurfaceInteraction> ray_intersect(const Bvh &accel, const Ray &ray);

/// Origin for a ray leaving `p` towards `dir`, pushed off the surface along
/// the geometric normal by 1e-4 * max(1, |p|).
Vec3 offset_ray_origin(const Vec3 &p, const Vec3 &geometric_normal, const Vec3 &dir);
double ray_epsilon(const Vec3 &p);

}  // namespace mitr
