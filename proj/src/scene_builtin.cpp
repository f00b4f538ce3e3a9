// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/scene.h>

#include <stdexcept>

namespace mitr {

namespace {

ShapeRecord rectangle(std::string id, Vec3 origin, Vec3 u, Vec3 v, std::string material) {
    ShapeRecord s;
    s.id = std::move(id);
    s.geometry = RectangleGeometry{origin, u, v};
    s.material = std::move(material);
    return s;
}

MaterialRecord diffuse(std::string id, Rgb albedo) { return {std::move(id), DiffuseMaterial{albedo}}; }

double distance_to_rectangle(const Vec3 &p, const RectangleGeometry &r) {
    const Vec3 d = p - r.origin;
    const double u = std::clamp(dot(d, r.edge_u) / length_squared(r.edge_u), 0.0, 1.0);
    const double v = std::clamp(dot(d, r.edge_v) / length_squared(r.edge_v), 0.0, 1.0);
    return distance(p, r.origin + u * r.edge_u + v * r.edge_v);
}

}  // namespace

SceneDescription cornell_box() {
    SceneDescription s;
    s.camera.origin = {0, 1, 3.6};
    s.camera.look_at = {0, 1, 0};
    s.camera.up = {0, 1, 0};
    s.camera.fov_degrees = 39.3;
    s.camera.width = 128;
    s.camera.height = 128;

    s.materials = {diffuse("white", {0.73, 0.73, 0.73}), diffuse("red", {0.63, 0.065, 0.05}),
                   diffuse("green", {0.14, 0.45, 0.091}), diffuse("light", {0.78, 0.78, 0.78})};

    s.shapes.push_back(rectangle("floor", {-1, 0, 1}, {2, 0, 0}, {0, 0, -2}, "white"));
    s.shapes.push_back(rectangle("ceiling", {-1, 2, -1}, {2, 0, 0}, {0, 0, 2}, "white"));
    s.shapes.push_back(rectangle("back", {-1, 0, -1}, {2, 0, 0}, {0, 2, 0}, "white"));
    s.shapes.push_back(rectangle("left", {-1, 0, 1}, {0, 0, -2}, {0, 2, 0}, "red"));
    s.shapes.push_back(rectangle("right", {1, 0, -1}, {0, 0, 2}, {0, 2, 0}, "green"));
    s.shapes.push_back(rectangle("light", {-0.25, 1.98, -0.25}, {0.5, 0, 0}, {0, 0, 0.5}, "light"));

    ShapeRecord short_block;
    short_block.id = "short_block";
    short_block.geometry = make_cuboid({0.4, 0.3, 0.35}, {0.6, 0.6, 0.6}, -17);
    short_block.material = "white";
    s.shapes.push_back(short_block);
    ShapeRecord tall_block;
    tall_block.id = "tall_block";
    tall_block.geometry = make_cuboid({-0.4, 0.6, -0.35}, {0.6, 1.2, 0.6}, 17);
    tall_block.material = "white";
    s.shapes.push_back(tall_block);

    s.emitters.push_back(AreaEmitter{"light", {17, 12, 4}});
    s.integrator = {IntegratorKind::Path, 8, 4, false};
    s.speed_of_light = 1.0;

    // Axis: start two bins before the nearest wall can be seen; 300 bins long
    // enough for max_depth segments each spanning at most the box diagonal.
    const double diagonal = std::sqrt(12.0);
    double nearest = kInfinity, farthest = 0;
    for (int i = 0; i < 5; ++i) {
        const auto &r = std::get<RectangleGeometry>(s.shapes[i].geometry);
        nearest = std::min(nearest, distance_to_rectangle(s.camera.origin, r));
        for (const Vec3 &corner : {r.origin, r.origin + r.edge_u, r.origin + r.edge_v, r.origin + r.edge_u + r.edge_v})
            farthest = std::max(farthest, distance(s.camera.origin, corner));
    }
    const double span = std::max(8 * diagonal, farthest + s.integrator.max_depth * diagonal);
    s.film.n_bins = 300;
    s.film.bin_width = span / s.speed_of_light / s.film.n_bins;
    s.film.t_start = nearest / s.speed_of_light - 2 * s.film.bin_width;
    return s;
}

SceneDescription polar_malus_scene(double theta) {
    SceneDescription s;
    s.camera.origin = {0, 0, 0};
    s.camera.look_at = {0, 0, -1};
    s.camera.fov_degrees = 20;
    s.camera.width = 8;
    s.camera.height = 8;
    s.materials = {{"polarizer_a", PolarizerMaterial{0.0}}, {"polarizer_b", PolarizerMaterial{theta}},
                   diffuse("black", Rgb(0.0))};
    s.shapes.push_back(rectangle("sheet_a", {-1, -1, -1}, {2, 0, 0}, {0, 2, 0}, "polarizer_a"));
    s.shapes.push_back(rectangle("sheet_b", {-1, -1, -2}, {2, 0, 0}, {0, 2, 0}, "polarizer_b"));
    s.shapes.push_back(rectangle("source", {-2, -2, -3}, {4, 0, 0}, {0, 4, 0}, "black"));
    s.emitters.push_back(AreaEmitter{"source", Rgb(1.0)});
    s.integrator = {IntegratorKind::Path, 8, 4, true};
    s.film.t_start = 0;
    s.film.bin_width = 0.25;
    s.film.n_bins = 24;
    return s;
}

namespace {

SceneDescription nlos_base(int grid) {
    SceneDescription s;
    NlosSetup n;
    n.wall = RelayWall{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, 1.0, 1.0, 0.7};
    n.laser_origin = {-0.8, 0.0, 1.0};
    n.sensor_origin = {-0.8, 0.0, 1.0};
    n.laser_grid = {grid, grid};
    n.sensor_grid = {grid, grid};
    s.nlos = n;
    s.camera.origin = n.sensor_origin;
    s.camera.look_at = n.wall.center;
    s.camera.fov_degrees = 60;
    s.camera.width = 32;
    s.camera.height = 32;
    s.integrator = {IntegratorKind::NlosPath, 4, 4, false};
    s.film.t_start = 0;
    s.film.bin_width = 0.01;
    s.film.n_bins = 256;
    s.materials = {diffuse("hidden", Rgb(0.8))};
    return s;
}

ShapeRecord facing_patch(std::string id, const Vec3 &center, double size) {
    // Normal points towards the wall (-z).
    const double h = 0.5 * size;
    return rectangle(std::move(id), center - Vec3{h, h, 0}, {0, size, 0}, {size, 0, 0}, "hidden");
}

}  // namespace

SceneDescription nlos_point_scene(const Vec3 &target, int grid) {
    SceneDescription s = nlos_base(grid);
    s.shapes.push_back(facing_patch("target", target, 0.02));
    return s;
}

SceneDescription nlos_two_patch_scene(int grid) {
    SceneDescription s = nlos_base(grid);
    s.shapes.push_back(facing_patch("near_patch", {-0.15, 0.0, 0.35}, 0.1));
    s.shapes.push_back(facing_patch("far_patch", {0.15, 0.05, 0.7}, 0.1));
    return s;
}

SceneDescription builtin_scene(const std::string &name) {
    if (name == "cornell-box")
        return cornell_box();
    if (name == "nlos-point")
        return nlos_point_scene({0.05, 0.0, 0.6});
    if (name == "nlos-two-patch")
        return nlos_two_patch_scene();
    if (name == "polar-malus")
        return polar_malus_scene(kPi / 4);
    throw std::invalid_argument("unknown builtin scene '" + name + "'");
}

}  // namespace mitr
