// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/geometry.h>
#include <mitr/sampling.h>

#include <algorithm>
#include <numeric>

namespace mitr {

bool Bounds3::hit(const Ray &ray, const Vec3 &inv_dir, double t0, double t1) const {
    for (int a = 0; a < 3; ++a) {
        double tn = (lo[a] - ray.origin[a]) * inv_dir[a];
        double tf = (hi[a] - ray.origin[a]) * inv_dir[a];
        if (tn > tf)
            std::swap(tn, tf);
        // NaN from 0 * inf means the ray lies in the slab plane; keep it.
        if (tn == tn)
            t0 = std::max(t0, tn);
        if (tf == tf)
            t1 = std::min(t1, tf * (1 + 4 * std::numeric_limits<double>::epsilon()));
        if (t0 > t1)
            return false;
    }
    return true;
}

Bounds3 Primitive::bounds() const {
    Bounds3 b;
    switch (kind) {
    case Kind::Triangle:
        b.expand(p0);
        b.expand(p0 + e1);
        b.expand(p0 + e2);
        break;
    case Kind::Rectangle:
        b.expand(p0);
        b.expand(p0 + e1);
        b.expand(p0 + e2);
        b.expand(p0 + e1 + e2);
        break;
    case Kind::Sphere:
        b.expand(p0 - Vec3{radius, radius, radius});
        b.expand(p0 + Vec3{radius, radius, radius});
        break;
    }
    return b;
}

double Primitive::area() const {
    switch (kind) {
    case Kind::Triangle: return 0.5 * length(cross(e1, e2));
    case Kind::Rectangle: return length(cross(e1, e2));
    case Kind::Sphere: return 4.0 * kPi * radius * radius;
    }
    return 0;
}

std::optional<double> Primitive::intersect(const Ray &ray, Vec2 &uv) const {
    switch (kind) {
    case Kind::Triangle: {
        const Vec3 pvec = cross(ray.direction, e2);
        const double det = dot(e1, pvec);
        if (det == 0)
            return std::nullopt;
        const double inv = 1.0 / det;
        const Vec3 tvec = ray.origin - p0;
        const double u = dot(tvec, pvec) * inv;
        if (u < 0 || u > 1)
            return std::nullopt;
        const Vec3 qvec = cross(tvec, e1);
        const double v = dot(ray.direction, qvec) * inv;
        if (v < 0 || u + v > 1)
            return std::nullopt;
        const double t = dot(e2, qvec) * inv;
        if (!(t > ray.t_min && t < ray.t_max))
            return std::nullopt;
        uv = {u, v};
        return t;
    }
    case Kind::Rectangle: {
        const Vec3 n = cross(e1, e2);
        const double denom = dot(n, ray.direction);
        if (denom == 0)
            return std::nullopt;
        const double t = dot(n, p0 - ray.origin) / denom;
        if (!(t > ray.t_min && t < ray.t_max))
            return std::nullopt;
        const Vec3 d = ray.at(t) - p0;
        const double u = dot(d, e1) / length_squared(e1);
        const double v = dot(d, e2) / length_squared(e2);
        if (u < 0 || u > 1 || v < 0 || v > 1)
            return std::nullopt;
        uv = {u, v};
        return t;
    }
    case Kind::Sphere: {
        // Numerically stable quadratic: b' = d.(o-c), disc via |f - (f.d)d|^2.
        const Vec3 f = ray.origin - p0;
        const double a = dot(ray.direction, ray.direction);
        const double b = dot(f, ray.direction);
        const Vec3 perp = f - (b / a) * ray.direction;
        const double disc = radius * radius - length_squared(perp);
        if (disc < 0)
            return std::nullopt;
        const double sq = std::sqrt(a * disc);
        const double q = -b - std::copysign(sq, b);
        double t0 = q / a, t1 = dot(f, f) - radius * radius;
        t1 = q != 0 ? t1 / q : t0;
        if (t0 > t1)
            std::swap(t0, t1);
        double t = t0;
        if (!(t > ray.t_min && t < ray.t_max)) {
            t = t1;
            if (!(t > ray.t_min && t < ray.t_max))
                return std::nullopt;
        }
        const Vec3 n = normalize(ray.at(t) - p0);
        uv = {std::atan2(n.y, n.x), std::acos(std::clamp(n.z, -1.0, 1.0))};
        return t;
    }
    }
    return std::nullopt;
}

Vec3 Primitive::normal_at(const Vec3 &p) const {
    if (kind == Kind::Sphere)
        return normalize(p - p0);
    return normalize(cross(e1, e2));
}

std::pair<Vec3, Vec3> Primitive::sample_area(Vec2 u) const {
    switch (kind) {
    case Kind::Triangle: {
        const Vec2 b = sample_uniform_triangle(u);
        return {p0 + b.x * e1 + b.y * e2, normalize(cross(e1, e2))};
    }
    case Kind::Rectangle:
        return {p0 + u.x * e1 + u.y * e2, normalize(cross(e1, e2))};
    case Kind::Sphere: {
        const Vec3 d = sample_uniform_sphere(u).direction;
        return {p0 + radius * d, d};
    }
    }
    return {};
}

Bvh::Bvh(std::vector<Primitive> primitives) : prims_(std::move(primitives)) {
    if (prims_.empty())
        return;
    nodes_.reserve(2 * prims_.size());
    build(0, static_cast<int>(prims_.size()));
}

int Bvh::build(int first, int count) {
    const int idx = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Bounds3 bounds, centroids;
    for (int i = first; i < first + count; ++i) {
        const Bounds3 b = prims_[i].bounds();
        bounds.expand(b);
        centroids.expand(b.centroid());
    }
    nodes_[idx].bounds = bounds;
    if (count <= 4) {
        nodes_[idx].first = first;
        nodes_[idx].count = count;
        return idx;
    }
    const Vec3 ext = centroids.extent();
    const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
    const int mid = first + count / 2;
    std::nth_element(prims_.begin() + first, prims_.begin() + mid, prims_.begin() + first + count,
                     [axis](const Primitive &a, const Primitive &b) {
                         const double ca = a.bounds().centroid()[axis], cb = b.bounds().centroid()[axis];
                         if (ca != cb)
                             return ca < cb;
                         return std::pair(a.shape_id, a.index) < std::pair(b.shape_id, b.index);
                     });
    const int left = build(first, mid - first);
    const int right = build(mid, first + count - mid);
    nodes_[idx].left = left;
    nodes_[idx].right = right;
    return idx;
}

std::optional<Hit> Bvh::intersect(const Ray &ray) const {
    if (nodes_.empty())
        return std::nullopt;
    const Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
    Hit best;
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
        const Node &node = nodes_[stack[--sp]];
        if (!node.bounds.hit(ray, inv_dir, ray.t_min, std::min(ray.t_max, best.t)))
            continue;
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const Primitive &p = prims_[i];
                Vec2 uv;
                const auto t = p.intersect(ray, uv);
                if (!t || *t > best.t)
                    continue;
                if (*t == best.t) {
                    const Primitive &cur = prims_[best.primitive];
                    if (std::pair(p.shape_id, p.index) >= std::pair(cur.shape_id, cur.index))
                        continue;
                }
                best = {*t, i, p.shape_id, uv};
            }
        } else {
            stack[sp++] = node.left;
            stack[sp++] = node.right;
        }
    }
    if (best.primitive < 0)
        return std::nullopt;
    return best;
}

std::optional<SurfaceInteraction> ray_intersect(const Bvh &accel, const Ray &ray) {
    const auto hit = accel.intersect(ray);
    if (!hit)
        return std::nullopt;
    const Primitive &prim = accel.primitive(hit->primitive);
    SurfaceInteraction si;
    si.distance = hit->t;
    si.position = ray.at(hit->t);
    si.shape_id = hit->shape_id;
    si.primitive = hit->primitive;
    si.uv = hit->uv;
    si.geometric_normal = prim.normal_at(si.position);
    si.front_face = dot(si.geometric_normal, ray.direction) < 0;
    si.shading_normal = si.geometric_normal;
    si.frame = prim.kind == Primitive::Kind::Sphere ? Frame::from_normal(si.shading_normal)
                                                     : Frame::from_normal_tangent(si.shading_normal, prim.e1);
    si.wi_local = si.frame.to_local(-ray.direction);
    return si;
}

double ray_epsilon(const Vec3 &p) { return 1e-4 * std::max(1.0, length(p)); }

Vec3 offset_ray_origin(const Vec3 &p, const Vec3 &geometric_normal, const Vec3 &dir) {
    const double eps = ray_epsilon(p);
    return dot(dir, geometric_normal) >= 0 ? p + eps * geometric_normal : p - eps * geometric_normal;
}

}  // namespace mitr
