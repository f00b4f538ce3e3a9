// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/geometry.h>
#include <mitr/math.h>
#include <mitr/temporal.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mitr {

/// Optional per-shape affine placement: scale, then rotate, then translate.
struct Transform {
    Vec3 scale{1, 1, 1};
    Vec3 rotate_axis{0, 1, 0};
    double rotate_degrees = 0;
    Vec3 translate{0, 0, 0};

    Vec3 apply_point(const Vec3 &p) const;
    Vec3 apply_vector(const Vec3 &v) const;
    friend bool operator==(const Transform &, const Transform &) = default;
};

struct RectangleGeometry {
    Vec3 origin, edge_u, edge_v;
    friend bool operator==(const RectangleGeometry &, const RectangleGeometry &) = default;
};
struct SphereGeometry {
    Vec3 center;
    double radius = 1;
    friend bool operator==(const SphereGeometry &, const SphereGeometry &) = default;
};
struct MeshGeometry {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    friend bool operator==(const MeshGeometry &, const MeshGeometry &) = default;
};

struct ShapeRecord {
    std::string id;  // optional name, required when an emitter references it
    std::variant<RectangleGeometry, SphereGeometry, MeshGeometry> geometry;
    std::optional<Transform> transform;
    std::string material;  // empty only for medium boundaries
    std::string interior;  // medium id, empty for none
    friend bool operator==(const ShapeRecord &, const ShapeRecord &) = default;
};

struct DiffuseMaterial {
    Rgb albedo{0.5};
    friend bool operator==(const DiffuseMaterial &, const DiffuseMaterial &) = default;
};
struct RoughPlasticMaterial {
    Rgb albedo{0.5};
    double roughness = 0.1;
    double ior = 1.5;
    friend bool operator==(const RoughPlasticMaterial &, const RoughPlasticMaterial &) = default;
};
struct PolarizerMaterial {
    double transmission_axis_angle = 0;  // radians from the surface tangent
    friend bool operator==(const PolarizerMaterial &, const PolarizerMaterial &) = default;
};
struct MirrorMaterial {
    Rgb eta{0.2, 0.92, 1.1};  // complex index of refraction, real part
    Rgb k{3.9, 2.45, 2.14};   // imaginary part
    friend bool operator==(const MirrorMaterial &, const MirrorMaterial &) = default;
};

struct MaterialRecord {
    using Model = std::variant<DiffuseMaterial, RoughPlasticMaterial, PolarizerMaterial, MirrorMaterial>;
    std::string id;
    Model model;
    friend bool operator==(const MaterialRecord &, const MaterialRecord &) = default;
};

struct AreaEmitter {
    std::string shape;
    Rgb radiance{1};
    friend bool operator==(const AreaEmitter &, const AreaEmitter &) = default;
};
struct PointEmitter {
    Vec3 position;
    Rgb intensity{1};
    friend bool operator==(const PointEmitter &, const PointEmitter &) = default;
};
struct PulsedLaser {
    Vec3 origin;
    Vec3 target;
    Rgb power{1};
    double pulse_fwhm = 0;  // 0 = Dirac pulse
    friend bool operator==(const PulsedLaser &, const PulsedLaser &) = default;
};
using EmitterRecord = std::variant<AreaEmitter, PointEmitter, PulsedLaser>;

struct MediumRecord {
    std::string id;
    Rgb sigma_a{0};
    Rgb sigma_s{0};
    double g = 0;
    double ior = 1;
    Rgb sigma_t() const { return sigma_a + sigma_s; }
    friend bool operator==(const MediumRecord &, const MediumRecord &) = default;
};

struct CameraRecord {
    Vec3 origin{0, 0, 0};
    Vec3 look_at{0, 0, -1};
    Vec3 up{0, 1, 0};
    double fov_degrees = 40;
    int width = 64;
    int height = 64;
    std::string medium;  // medium enclosing the camera, empty for vacuum
    friend bool operator==(const CameraRecord &, const CameraRecord &) = default;
};

enum class IntegratorKind : uint8_t { Path, VolPath, NlosPath };

struct IntegratorSettings {
    IntegratorKind kind = IntegratorKind::Path;
    int max_depth = 8;
    int rr_depth = 4;
    bool polarized = false;
    friend bool operator==(const IntegratorSettings &, const IntegratorSettings &) = default;
};

/// Speed of light in scene units per time unit for the `meters_ns` preset.
inline constexpr double kMetersPerNanosecond = 0.299792458;

/// Planar diffuse relay wall: a width x height rectangle centered at
/// `center`, facing `normal`, with its height axis along `up`.
struct RelayWall {
    Vec3 center{0, 0, 0};
    Vec3 normal{0, 0, 1};
    Vec3 up{0, 1, 0};
    double width = 1, height = 1;
    double albedo = 0.7;
    friend bool operator==(const RelayWall &, const RelayWall &) = default;
};

/// Relay-wall capture setup. The document's shapes are the hidden scene;
/// they live on the side of the wall its normal points to.
struct NlosSetup {
    RelayWall wall;
    Vec3 laser_origin{0, 0, 1};
    Vec3 sensor_origin{0, 0, 1};
    std::array<int, 2> laser_grid{16, 16};
    std::array<int, 2> sensor_grid{16, 16};  // ignored when confocal
    bool confocal = true;
    bool account_first_bounce = false;
    bool account_last_bounce = false;
    Rgb laser_power{1};
    friend bool operator==(const NlosSetup &, const NlosSetup &) = default;
};

struct SceneDescription {
    CameraRecord camera;
    TemporalAxis film;
    IntegratorSettings integrator;
    std::vector<ShapeRecord> shapes;
    std::vector<MaterialRecord> materials;
    std::vector<EmitterRecord> emitters;
    std::vector<MediumRecord> media;
    double speed_of_light = 1.0;
    std::optional<NlosSetup> nlos;

    int find_material(const std::string &id) const;
    int find_medium(const std::string &id) const;
    int find_shape(const std::string &id) const;

    friend bool operator==(const SceneDescription &, const SceneDescription &) = default;
};

/// Scene parse or validation failure. Line and column are 1-based; zero
/// when the scene was not read from text.
class SceneError : public std::runtime_error {
  public:
    SceneError(int line, int column, std::string entity, std::string constraint);

    int line() const { return line_; }
    int column() const { return column_; }
    const std::string &entity() const { return entity_; }
    const std::string &constraint() const { return constraint_; }

  private:
    int line_, column_;
    std::string entity_, constraint_;
};

/// Parse and fully validate a scene document (see docs/scene-format.md).
SceneDescription parse_scene(const std::string &text);

/// Serialize to the scene grammar; `parse_scene(serialize_scene(s)) == s`.
std::string serialize_scene(const SceneDescription &scene);

/// Check every invariant; throws SceneError naming the offending entity.
void validate_scene(const SceneDescription &scene);

/// Closed box with two blocks, a ceiling light and a camera facing the
/// open side. The time axis fits full transport up to `max_depth`.
SceneDescription cornell_box();

/// Axis-aligned cuboid as a closed, outward-facing triangle mesh, rotated
/// about +y by `rotate_y_degrees` around its center.
MeshGeometry make_cuboid(const Vec3 &center, const Vec3 &size, double rotate_y_degrees);

std::string integrator_kind_name(IntegratorKind kind);

/// World-space primitives of `shape`, tagged with `shape_id`.
std::vector<Primitive> shape_primitives(const ShapeRecord &shape, int shape_id);

/// Names accepted by builtin_scene().
inline constexpr const char *kBuiltinScenes[] = {"cornell-box", "nlos-point", "nlos-two-patch", "polar-malus"};

/// Asset-free scenes addressable from the command line. Throws
/// std::invalid_argument for unknown names.
SceneDescription builtin_scene(const std::string &name);

/// Camera looking through two polarizer sheets (at 0 and `theta` radians)
/// at an unpolarized area emitter.
SceneDescription polar_malus_scene(double theta);

/// Relay-wall rig with one small hidden patch centered at `target`.
SceneDescription nlos_point_scene(const Vec3 &target, int grid = 32);

/// Relay-wall rig with two hidden patches at different depths.
SceneDescription nlos_two_patch_scene(int grid = 16);

}  // namespace mitr
