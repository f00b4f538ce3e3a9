// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

// Scene documents are YAML; yaml-cpp provides tokenizing and source marks,
// everything above the node tree (schema, ranges, references) lives here.

#include <mitr/geometry.h>
#include <mitr/scene.h>

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace mitr {

SceneError::SceneError(int line, int column, std::string entity, std::string constraint)
    : std::runtime_error("scene error @ " + std::to_string(line) + ":" + std::to_string(column) + ": " + entity +
                         ": " + constraint),
      line_(line), column_(column), entity_(std::move(entity)), constraint_(std::move(constraint)) {}

std::string integrator_kind_name(IntegratorKind kind) {
    switch (kind) {
    case IntegratorKind::Path: return "path";
    case IntegratorKind::VolPath: return "volpath";
    case IntegratorKind::NlosPath: return "nlos_path";
    }
    return "?";
}

namespace {

struct Mark {
    int line = 0, column = 0;
};

Mark mark_of(const YAML::Node &node) {
    const YAML::Mark m = node.Mark();
    if (m.line < 0)
        return {};
    return {m.line + 1, m.column + 1};
}

class Reader {
  public:
    [[noreturn]] void fail(const YAML::Node &node, const std::string &entity, const std::string &what) const {
        const Mark m = mark_of(node);
        throw SceneError(m.line, m.column, entity, what);
    }

    void expect_map(const YAML::Node &node, const std::string &entity) const {
        if (!node.IsMap())
            fail(node, entity, "expected a mapping");
    }

    void check_keys(const YAML::Node &node, const std::string &entity, std::initializer_list<const char *> allowed) const {
        for (const auto &kv : node) {
            const std::string key = kv.first.Scalar();
            bool ok = false;
            for (const char *a : allowed)
                ok = ok || key == a;
            if (!ok)
                fail(kv.first, entity, "unknown key '" + key + "'");
        }
    }

    YAML::Node require(const YAML::Node &map, const char *key, const std::string &entity) const {
        const YAML::Node n = map[key];
        if (!n.IsDefined() || n.IsNull())
            fail(map, entity, std::string("missing required key '") + key + "'");
        return n;
    }

    double number(const YAML::Node &node, const std::string &entity) const {
        if (!node.IsScalar())
            fail(node, entity, "expected a number");
        const std::string &s = node.Scalar();
        double v = 0;
        const char *begin = s.data();
        if (!s.empty() && s[0] == '+')
            ++begin;
        const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
            fail(node, entity, "'" + s + "' is not a finite number");
        return v;
    }

    int integer(const YAML::Node &node, const std::string &entity) const {
        if (!node.IsScalar())
            fail(node, entity, "expected an integer");
        const std::string &s = node.Scalar();
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || v < INT32_MIN || v > INT32_MAX)
            fail(node, entity, "'" + s + "' is not an integer");
        return static_cast<int>(v);
    }

    bool boolean(const YAML::Node &node, const std::string &entity) const {
        if (node.IsScalar()) {
            if (node.Scalar() == "true")
                return true;
            if (node.Scalar() == "false")
                return false;
        }
        fail(node, entity, "expected true or false");
    }

    std::string identifier(const YAML::Node &node, const std::string &entity) const {
        if (!node.IsScalar())
            fail(node, entity, "expected an identifier");
        const std::string &s = node.Scalar();
        bool ok = !s.empty() && (std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_');
        for (char c : s)
            ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.');
        if (!ok)
            fail(node, entity, "'" + s + "' is not a valid identifier");
        return s;
    }

    std::string word(const YAML::Node &node, const std::string &entity) const {
        if (!node.IsScalar())
            fail(node, entity, "expected a string");
        return node.Scalar();
    }

    Vec3 vec3(const YAML::Node &node, const std::string &entity) const {
        if (!node.IsSequence() || node.size() != 3)
            fail(node, entity, "expected a list of 3 numbers");
        return {number(node[0], entity), number(node[1], entity), number(node[2], entity)};
    }

    Rgb rgb(const YAML::Node &node, const std::string &entity) const {
        if (node.IsScalar()) {
            return Rgb(number(node, entity));
        }
        if (!node.IsSequence() || node.size() != 3)
            fail(node, entity, "expected a number or a list of 3 numbers");
        return {number(node[0], entity), number(node[1], entity), number(node[2], entity)};
    }
};

std::string material_entity(const std::string &id) { return "material '" + id + "'"; }
std::string medium_entity(const std::string &id) { return "medium '" + id + "'"; }
std::string shape_entity(size_t i, const std::string &id) {
    return "shape[" + std::to_string(i) + "]" + (id.empty() ? "" : " '" + id + "'");
}
std::string emitter_entity(size_t i) { return "emitter[" + std::to_string(i) + "]"; }

struct ParseState {
    Reader r;
    std::map<std::string, Mark> marks;

    void note(const std::string &entity, const YAML::Node &node) { marks[entity] = mark_of(node); }
};

CameraRecord parse_camera(ParseState &st, const YAML::Node &n) {
    const std::string e = "camera";
    st.r.expect_map(n, e);
    st.note(e, n);
    st.r.check_keys(n, e, {"origin", "look_at", "up", "fov_degrees", "width", "height", "medium"});
    CameraRecord c;
    c.origin = st.r.vec3(st.r.require(n, "origin", e), e);
    c.look_at = st.r.vec3(st.r.require(n, "look_at", e), e);
    if (n["up"])
        c.up = st.r.vec3(n["up"], e);
    c.fov_degrees = st.r.number(st.r.require(n, "fov_degrees", e), e);
    c.width = st.r.integer(st.r.require(n, "width", e), e);
    c.height = st.r.integer(st.r.require(n, "height", e), e);
    if (n["medium"])
        c.medium = st.r.identifier(n["medium"], e);
    return c;
}

TemporalAxis parse_film(ParseState &st, const YAML::Node &n) {
    const std::string e = "film";
    st.r.expect_map(n, e);
    st.note(e, n);
    st.r.check_keys(n, e, {"t_start", "bin_width", "n_bins", "gate", "unwarp", "filter"});
    TemporalAxis a;
    a.t_start = st.r.number(st.r.require(n, "t_start", e), e);
    a.bin_width = st.r.number(st.r.require(n, "bin_width", e), e);
    a.n_bins = st.r.integer(st.r.require(n, "n_bins", e), e);
    if (const YAML::Node g = n["gate"]) {
        if (!g.IsSequence() || g.size() != 2)
            st.r.fail(g, e, "gate must be [t_open, t_close]");
        a.gate = TimeGate{st.r.number(g[0], e), st.r.number(g[1], e)};
    }
    if (n["unwarp"])
        a.unwarp = st.r.boolean(n["unwarp"], e);
    if (const YAML::Node f = n["filter"]) {
        const std::string w = st.r.word(f, e);
        if (w == "box")
            a.filter = TimeFilter::Box;
        else if (w == "tent")
            a.filter = TimeFilter::Tent;
        else
            st.r.fail(f, e, "filter must be 'box' or 'tent'");
    }
    return a;
}

IntegratorSettings parse_integrator(ParseState &st, const YAML::Node &n) {
    const std::string e = "integrator";
    st.r.expect_map(n, e);
    st.note(e, n);
    st.r.check_keys(n, e, {"kind", "max_depth", "rr_depth", "polarized"});
    IntegratorSettings s;
    const YAML::Node k = st.r.require(n, "kind", e);
    const std::string kind = st.r.word(k, e);
    if (kind == "path")
        s.kind = IntegratorKind::Path;
    else if (kind == "volpath")
        s.kind = IntegratorKind::VolPath;
    else if (kind == "nlos_path")
        s.kind = IntegratorKind::NlosPath;
    else
        st.r.fail(k, e, "unsupported integrator kind '" + kind + "'");
    if (n["max_depth"])
        s.max_depth = st.r.integer(n["max_depth"], e);
    if (n["rr_depth"])
        s.rr_depth = st.r.integer(n["rr_depth"], e);
    if (n["polarized"])
        s.polarized = st.r.boolean(n["polarized"], e);
    return s;
}

MaterialRecord parse_material(ParseState &st, const YAML::Node &n, size_t index) {
    std::string e = "materials[" + std::to_string(index) + "]";
    st.r.expect_map(n, e);
    MaterialRecord m;
    m.id = st.r.identifier(st.r.require(n, "id", e), e);
    e = material_entity(m.id);
    st.note(e, n);
    const YAML::Node t = st.r.require(n, "type", e);
    const std::string type = st.r.word(t, e);
    if (type == "diffuse") {
        st.r.check_keys(n, e, {"id", "type", "albedo"});
        m.model = DiffuseMaterial{st.r.rgb(st.r.require(n, "albedo", e), e)};
    } else if (type == "rough_plastic") {
        st.r.check_keys(n, e, {"id", "type", "albedo", "roughness", "ior"});
        RoughPlasticMaterial p;
        p.albedo = st.r.rgb(st.r.require(n, "albedo", e), e);
        p.roughness = st.r.number(st.r.require(n, "roughness", e), e);
        if (n["ior"])
            p.ior = st.r.number(n["ior"], e);
        m.model = p;
    } else if (type == "polarizer") {
        st.r.check_keys(n, e, {"id", "type", "transmission_axis_angle"});
        m.model = PolarizerMaterial{st.r.number(st.r.require(n, "transmission_axis_angle", e), e)};
    } else if (type == "mirror") {
        st.r.check_keys(n, e, {"id", "type", "eta", "k"});
        MirrorMaterial mm;
        if (n["eta"])
            mm.eta = st.r.rgb(n["eta"], e);
        if (n["k"])
            mm.k = st.r.rgb(n["k"], e);
        m.model = mm;
    } else {
        st.r.fail(t, e, "unknown material type '" + type + "'");
    }
    return m;
}

MediumRecord parse_medium(ParseState &st, const YAML::Node &n, size_t index) {
    std::string e = "media[" + std::to_string(index) + "]";
    st.r.expect_map(n, e);
    MediumRecord m;
    m.id = st.r.identifier(st.r.require(n, "id", e), e);
    e = medium_entity(m.id);
    st.note(e, n);
    st.r.check_keys(n, e, {"id", "type", "sigma_a", "sigma_s", "g", "ior"});
    if (const YAML::Node t = n["type"]; t && st.r.word(t, e) != "homogeneous")
        st.r.fail(t, e, "only 'homogeneous' media are supported");
    m.sigma_a = st.r.rgb(st.r.require(n, "sigma_a", e), e);
    m.sigma_s = st.r.rgb(st.r.require(n, "sigma_s", e), e);
    if (n["g"])
        m.g = st.r.number(n["g"], e);
    if (n["ior"])
        m.ior = st.r.number(n["ior"], e);
    return m;
}

Transform parse_transform(ParseState &st, const YAML::Node &n, const std::string &e) {
    st.r.expect_map(n, e);
    st.r.check_keys(n, e, {"scale", "rotate", "translate"});
    Transform t;
    if (const YAML::Node s = n["scale"])
        t.scale = s.IsScalar() ? Vec3{1, 1, 1} * st.r.number(s, e) : st.r.vec3(s, e);
    if (const YAML::Node r = n["rotate"]) {
        st.r.expect_map(r, e);
        st.r.check_keys(r, e, {"axis", "degrees"});
        t.rotate_axis = st.r.vec3(st.r.require(r, "axis", e), e);
        t.rotate_degrees = st.r.number(st.r.require(r, "degrees", e), e);
    }
    if (const YAML::Node tr = n["translate"])
        t.translate = st.r.vec3(tr, e);
    return t;
}

ShapeRecord parse_shape(ParseState &st, const YAML::Node &n, size_t index) {
    std::string e = shape_entity(index, "");
    st.r.expect_map(n, e);
    ShapeRecord s;
    if (n["id"]) {
        s.id = st.r.identifier(n["id"], e);
        e = shape_entity(index, s.id);
    }
    st.note(e, n);
    const YAML::Node t = st.r.require(n, "type", e);
    const std::string type = st.r.word(t, e);
    if (type == "rectangle") {
        st.r.check_keys(n, e, {"id", "type", "origin", "edge_u", "edge_v", "material", "interior", "transform"});
        s.geometry = RectangleGeometry{st.r.vec3(st.r.require(n, "origin", e), e),
                                       st.r.vec3(st.r.require(n, "edge_u", e), e),
                                       st.r.vec3(st.r.require(n, "edge_v", e), e)};
    } else if (type == "sphere") {
        st.r.check_keys(n, e, {"id", "type", "center", "radius", "material", "interior", "transform"});
        s.geometry = SphereGeometry{st.r.vec3(st.r.require(n, "center", e), e),
                                    st.r.number(st.r.require(n, "radius", e), e)};
    } else if (type == "mesh") {
        st.r.check_keys(n, e, {"id", "type", "vertices", "triangles", "material", "interior", "transform"});
        MeshGeometry m;
        const YAML::Node v = st.r.require(n, "vertices", e);
        const YAML::Node tri = st.r.require(n, "triangles", e);
        if (!v.IsSequence())
            st.r.fail(v, e, "vertices must be a list");
        if (!tri.IsSequence())
            st.r.fail(tri, e, "triangles must be a list");
        for (const auto &p : v)
            m.vertices.push_back(st.r.vec3(p, e));
        for (const auto &f : tri) {
            if (!f.IsSequence() || f.size() != 3)
                st.r.fail(f, e, "each triangle is a list of 3 vertex indices");
            m.triangles.push_back({st.r.integer(f[0], e), st.r.integer(f[1], e), st.r.integer(f[2], e)});
        }
        s.geometry = std::move(m);
    } else {
        st.r.fail(t, e, "unknown shape type '" + type + "'");
    }
    if (n["material"])
        s.material = st.r.identifier(n["material"], e);
    if (n["interior"])
        s.interior = st.r.identifier(n["interior"], e);
    if (n["transform"])
        s.transform = parse_transform(st, n["transform"], e);
    return s;
}

EmitterRecord parse_emitter(ParseState &st, const YAML::Node &n, size_t index) {
    const std::string e = emitter_entity(index);
    st.r.expect_map(n, e);
    st.note(e, n);
    const YAML::Node t = st.r.require(n, "type", e);
    const std::string type = st.r.word(t, e);
    if (type == "area") {
        st.r.check_keys(n, e, {"type", "shape", "radiance"});
        return AreaEmitter{st.r.identifier(st.r.require(n, "shape", e), e), st.r.rgb(st.r.require(n, "radiance", e), e)};
    }
    if (type == "point") {
        st.r.check_keys(n, e, {"type", "position", "intensity"});
        return PointEmitter{st.r.vec3(st.r.require(n, "position", e), e), st.r.rgb(st.r.require(n, "intensity", e), e)};
    }
    if (type == "pulsed_laser") {
        st.r.check_keys(n, e, {"type", "origin", "target", "power", "pulse_fwhm"});
        PulsedLaser l;
        l.origin = st.r.vec3(st.r.require(n, "origin", e), e);
        l.target = st.r.vec3(st.r.require(n, "target", e), e);
        l.power = st.r.rgb(st.r.require(n, "power", e), e);
        if (n["pulse_fwhm"])
            l.pulse_fwhm = st.r.number(n["pulse_fwhm"], e);
        return l;
    }
    st.r.fail(t, e, "unknown emitter type '" + type + "'");
}

NlosSetup parse_nlos(ParseState &st, const YAML::Node &n) {
    const std::string e = "nlos";
    st.r.expect_map(n, e);
    st.note(e, n);
    st.r.check_keys(n, e, {"wall", "laser_origin", "sensor_origin", "laser_grid", "sensor_grid", "mode",
                           "account_first_bounce", "account_last_bounce", "laser_power"});
    NlosSetup s;
    const YAML::Node w = st.r.require(n, "wall", e);
    st.r.expect_map(w, e);
    st.r.check_keys(w, e, {"center", "normal", "up", "width", "height", "albedo"});
    s.wall.center = st.r.vec3(st.r.require(w, "center", e), e);
    s.wall.normal = st.r.vec3(st.r.require(w, "normal", e), e);
    if (w["up"])
        s.wall.up = st.r.vec3(w["up"], e);
    s.wall.width = st.r.number(st.r.require(w, "width", e), e);
    s.wall.height = st.r.number(st.r.require(w, "height", e), e);
    if (w["albedo"])
        s.wall.albedo = st.r.number(w["albedo"], e);
    s.laser_origin = st.r.vec3(st.r.require(n, "laser_origin", e), e);
    s.sensor_origin = st.r.vec3(st.r.require(n, "sensor_origin", e), e);
    auto grid = [&](const YAML::Node &g) {
        if (!g.IsSequence() || g.size() != 2)
            st.r.fail(g, e, "grid must be [nx, ny]");
        return std::array<int, 2>{st.r.integer(g[0], e), st.r.integer(g[1], e)};
    };
    s.laser_grid = grid(st.r.require(n, "laser_grid", e));
    if (n["sensor_grid"])
        s.sensor_grid = grid(n["sensor_grid"]);
    if (const YAML::Node m = n["mode"]) {
        const std::string mode = st.r.word(m, e);
        if (mode == "confocal")
            s.confocal = true;
        else if (mode == "exhaustive")
            s.confocal = false;
        else
            st.r.fail(m, e, "mode must be 'confocal' or 'exhaustive'");
    }
    if (n["account_first_bounce"])
        s.account_first_bounce = st.r.boolean(n["account_first_bounce"], e);
    if (n["account_last_bounce"])
        s.account_last_bounce = st.r.boolean(n["account_last_bounce"], e);
    if (n["laser_power"])
        s.laser_power = st.r.rgb(n["laser_power"], e);
    return s;
}

template <class F>
void parse_list(ParseState &st, const YAML::Node &root, const char *key, F &&each) {
    const YAML::Node list = root[key];
    if (!list.IsDefined() || list.IsNull())
        return;
    if (!list.IsSequence())
        st.r.fail(list, key, "expected a list");
    for (size_t i = 0; i < list.size(); ++i)
        each(list[i], i);
}

}  // namespace

SceneDescription parse_scene(const std::string &text) {
    ParseState st;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException &ex) {
        throw SceneError(ex.mark.line + 1, ex.mark.column + 1, "document", ex.msg);
    }
    try {
        if (!root.IsMap())
            st.r.fail(root, "document", "top level must be a mapping");
        st.r.check_keys(root, "document", {"version", "camera", "film", "integrator", "shapes", "materials",
                                           "emitters", "media", "speed_of_light", "nlos"});
        const YAML::Node version = st.r.require(root, "version", "document");
        if (st.r.integer(version, "document") != 1)
            st.r.fail(version, "document", "unsupported version (expected 1)");

        SceneDescription scene;
        scene.camera = parse_camera(st, st.r.require(root, "camera", "document"));
        scene.film = parse_film(st, st.r.require(root, "film", "document"));
        scene.integrator = parse_integrator(st, st.r.require(root, "integrator", "document"));
        const YAML::Node shapes = root["shapes"];
        if (!shapes.IsDefined())
            st.r.fail(root, "document", "missing required key 'shapes'");
        if (!shapes.IsNull() && !shapes.IsSequence())
            st.r.fail(shapes, "shapes", "expected a list");
        parse_list(st, root, "shapes", [&](const YAML::Node &n, size_t i) { scene.shapes.push_back(parse_shape(st, n, i)); });
        parse_list(st, root, "materials",
                   [&](const YAML::Node &n, size_t i) { scene.materials.push_back(parse_material(st, n, i)); });
        parse_list(st, root, "media", [&](const YAML::Node &n, size_t i) { scene.media.push_back(parse_medium(st, n, i)); });
        parse_list(st, root, "emitters",
                   [&](const YAML::Node &n, size_t i) { scene.emitters.push_back(parse_emitter(st, n, i)); });
        if (const YAML::Node c = root["speed_of_light"]) {
            st.note("scene", c);
            if (c.IsScalar() && c.Scalar() == "meters_ns")
                scene.speed_of_light = kMetersPerNanosecond;
            else
                scene.speed_of_light = st.r.number(c, "scene");
        }

        if (root["nlos"])
            scene.nlos = parse_nlos(st, root["nlos"]);

        try {
            validate_scene(scene);
        } catch (const SceneError &err) {
            const auto it = st.marks.find(err.entity());
            const Mark m = it != st.marks.end() ? it->second : mark_of(root);
            throw SceneError(m.line, m.column, err.entity(), err.constraint());
        }
        return scene;
    } catch (const YAML::Exception &ex) {
        throw SceneError(ex.mark.line + 1, ex.mark.column + 1, "document", ex.msg);
    }
}

namespace {

bool in_unit(const Rgb &c) {
    for (int i = 0; i < 3; ++i)
        if (!(c[i] >= 0 && c[i] <= 1))
            return false;
    return true;
}
bool nonnegative(const Rgb &c) {
    for (int i = 0; i < 3; ++i)
        if (!(c[i] >= 0 && std::isfinite(c[i])))
            return false;
    return true;
}

}  // namespace

void validate_scene(const SceneDescription &s) {
    auto fail = [](const std::string &entity, const std::string &what) { throw SceneError(0, 0, entity, what); };

    if (!(s.speed_of_light > 0) || !std::isfinite(s.speed_of_light))
        fail("scene", "speed_of_light must be > 0");

    const CameraRecord &c = s.camera;
    if (!(c.fov_degrees > 0 && c.fov_degrees < 180))
        fail("camera", "fov_degrees must be in (0, 180)");
    if (c.width < 1 || c.height < 1 || c.width > 16384 || c.height > 16384)
        fail("camera", "width and height must be in [1, 16384]");
    const Vec3 fwd = c.look_at - c.origin;
    if (length(fwd) == 0)
        fail("camera", "look_at must differ from origin");
    if (length(cross(normalize(fwd), c.up)) < 1e-9)
        fail("camera", "up must not be parallel to the viewing direction");
    if (!c.medium.empty() && s.find_medium(c.medium) < 0)
        fail("camera", "unknown medium '" + c.medium + "'");

    const TemporalAxis &a = s.film;
    if (!(a.bin_width > 0))
        fail("film", "bin_width must be > 0");
    if (a.n_bins < 1 || a.n_bins > 10000000)
        fail("film", "n_bins must be in [1, 1e7]");
    if (a.gate) {
        if (!(a.gate->open < a.gate->close))
            fail("film", "gate requires t_open < t_close");
        if (a.gate->open < a.t_start || a.gate->close > a.t_end())
            fail("film", "gate must lie within [t_start, t_start + n_bins * bin_width]");
    }

    const IntegratorSettings &in = s.integrator;
    if (in.max_depth < 1 || in.max_depth > 1024)
        fail("integrator", "max_depth must be in [1, 1024]");
    if (in.rr_depth < 0)
        fail("integrator", "rr_depth must be >= 0");
    if (in.polarized && in.kind == IntegratorKind::NlosPath)
        fail("integrator", "polarized transport is not available for nlos_path");

    std::set<std::string> ids;
    for (const MaterialRecord &m : s.materials) {
        const std::string e = material_entity(m.id);
        if (!ids.insert(m.id).second)
            fail(e, "duplicate material id");
        if (const auto *d = std::get_if<DiffuseMaterial>(&m.model)) {
            if (!in_unit(d->albedo))
                fail(e, "albedo components must be in [0, 1]");
        } else if (const auto *p = std::get_if<RoughPlasticMaterial>(&m.model)) {
            if (!in_unit(p->albedo))
                fail(e, "albedo components must be in [0, 1]");
            if (!(p->roughness > 0 && p->roughness <= 1))
                fail(e, "roughness must be in (0, 1]");
            if (!(p->ior >= 1 && p->ior <= 4))
                fail(e, "ior must be in [1, 4]");
        } else if (const auto *mm = std::get_if<MirrorMaterial>(&m.model)) {
            for (int i = 0; i < 3; ++i)
                if (!(mm->eta[i] > 0) || !(mm->k[i] >= 0))
                    fail(e, "eta must be > 0 and k >= 0");
        }
    }

    ids.clear();
    for (const MediumRecord &m : s.media) {
        const std::string e = medium_entity(m.id);
        if (!ids.insert(m.id).second)
            fail(e, "duplicate medium id");
        if (!nonnegative(m.sigma_a) || !nonnegative(m.sigma_s))
            fail(e, "sigma_a and sigma_s must be >= 0");
        if (!(std::abs(m.g) < 1))
            fail(e, "|g| must be < 1");
        if (!(m.ior >= 1 && m.ior <= 4))
            fail(e, "ior must be in [1, 4]");
    }

    ids.clear();
    bool has_media = !c.medium.empty();
    for (size_t i = 0; i < s.shapes.size(); ++i) {
        const ShapeRecord &sh = s.shapes[i];
        const std::string e = shape_entity(i, sh.id);
        if (!sh.id.empty() && !ids.insert(sh.id).second)
            fail(e, "duplicate shape id");
        if (const auto *r = std::get_if<RectangleGeometry>(&sh.geometry)) {
            if (!(length(cross(r->edge_u, r->edge_v)) > 0))
                fail(e, "rectangle edges must span a nonzero area");
        } else if (const auto *sp = std::get_if<SphereGeometry>(&sh.geometry)) {
            if (!(sp->radius > 0))
                fail(e, "radius must be > 0");
        } else {
            const auto &m = std::get<MeshGeometry>(sh.geometry);
            if (m.triangles.empty())
                fail(e, "mesh needs at least one triangle");
            for (const auto &t : m.triangles)
                for (int k : t)
                    if (k < 0 || k >= static_cast<int>(m.vertices.size()))
                        fail(e, "triangle index out of range");
        }
        if (sh.transform) {
            const Transform &t = *sh.transform;
            if (t.scale.x == 0 || t.scale.y == 0 || t.scale.z == 0)
                fail(e, "transform scale components must be nonzero");
            if (t.rotate_degrees != 0 && length(t.rotate_axis) == 0)
                fail(e, "rotation axis must be nonzero");
            if (std::holds_alternative<SphereGeometry>(sh.geometry) &&
                !(std::abs(t.scale.x) == std::abs(t.scale.y) && std::abs(t.scale.y) == std::abs(t.scale.z)))
                fail(e, "spheres only accept uniform scale");
        }
        if (!sh.interior.empty()) {
            has_media = true;
            if (s.find_medium(sh.interior) < 0)
                fail(e, "unknown interior medium '" + sh.interior + "'");
            if (!sh.material.empty())
                fail(e, "a medium boundary cannot also carry a material");
        } else {
            if (sh.material.empty())
                fail(e, "material is required");
            if (s.find_material(sh.material) < 0)
                fail(e, "unknown material '" + sh.material + "'");
        }
    }
    if (has_media && in.kind == IntegratorKind::Path)
        fail("integrator", "the path integrator does not support media; use volpath");

    if (s.nlos || in.kind == IntegratorKind::NlosPath) {
        if (!s.nlos)
            fail("integrator", "nlos_path requires an 'nlos' section");
        if (in.kind != IntegratorKind::NlosPath)
            fail("nlos", "an 'nlos' section requires integrator kind nlos_path");
        const NlosSetup &n = *s.nlos;
        const RelayWall &w = n.wall;
        if (!(length(w.normal) > 0) || !(length(cross(w.normal, w.up)) > 1e-9 * length(w.normal) * length(w.up)))
            fail("nlos", "wall normal must be nonzero and not parallel to up");
        if (!(w.width > 0 && w.height > 0))
            fail("nlos", "wall width and height must be > 0");
        if (!(w.albedo >= 0 && w.albedo <= 1))
            fail("nlos", "wall albedo must be in [0, 1]");
        for (const auto &g : {n.laser_grid, n.sensor_grid})
            if (g[0] < 1 || g[1] < 1 || g[0] > 4096 || g[1] > 4096)
                fail("nlos", "grid dimensions must be in [1, 4096]");
        if (!nonnegative(n.laser_power))
            fail("nlos", "laser_power must be >= 0");
        const Vec3 nn = normalize(w.normal);
        auto in_front = [&](const Vec3 &p) { return dot(p - w.center, nn) > 0; };
        if (!in_front(n.laser_origin) || !in_front(n.sensor_origin))
            fail("nlos", "laser and sensor origins must face the wall's front side");
        if (!s.emitters.empty())
            fail("nlos", "relay-wall scenes are lit by the laser only; remove emitters");
        if (!s.media.empty())
            fail("nlos", "relay-wall scenes cannot contain media");
        for (size_t i = 0; i < s.shapes.size(); ++i) {
            for (const Primitive &p : shape_primitives(s.shapes[i], static_cast<int>(i))) {
                bool ok = true;
                if (p.kind == Primitive::Kind::Sphere)
                    ok = dot(p.p0 - w.center, nn) > p.radius;
                else
                    ok = in_front(p.p0) && in_front(p.p0 + p.e1) && in_front(p.p0 + p.e2) &&
                         (p.kind == Primitive::Kind::Triangle || in_front(p.p0 + p.e1 + p.e2));
                if (!ok)
                    fail(shape_entity(i, s.shapes[i].id), "hidden geometry must lie on the wall's front side");
            }
        }
    }

    for (size_t i = 0; i < s.emitters.size(); ++i) {
        const std::string e = emitter_entity(i);
        if (const auto *ae = std::get_if<AreaEmitter>(&s.emitters[i])) {
            const int sh = s.find_shape(ae->shape);
            if (sh < 0)
                fail(e, "unknown shape '" + ae->shape + "'");
            if (!s.shapes[sh].interior.empty())
                fail(e, "area emitters cannot be attached to medium boundaries");
            if (!nonnegative(ae->radiance))
                fail(e, "radiance must be >= 0");
        } else if (const auto *pe = std::get_if<PointEmitter>(&s.emitters[i])) {
            if (!nonnegative(pe->intensity))
                fail(e, "intensity must be >= 0");
        } else {
            const auto &l = std::get<PulsedLaser>(s.emitters[i]);
            if (length(l.target - l.origin) == 0)
                fail(e, "laser target must differ from origin");
            if (!nonnegative(l.power))
                fail(e, "power must be >= 0");
            if (!(l.pulse_fwhm >= 0))
                fail(e, "pulse_fwhm must be >= 0");
        }
    }
}

int SceneDescription::find_material(const std::string &id) const {
    for (size_t i = 0; i < materials.size(); ++i)
        if (materials[i].id == id)
            return static_cast<int>(i);
    return -1;
}
int SceneDescription::find_medium(const std::string &id) const {
    for (size_t i = 0; i < media.size(); ++i)
        if (media[i].id == id)
            return static_cast<int>(i);
    return -1;
}
int SceneDescription::find_shape(const std::string &id) const {
    if (id.empty())
        return -1;
    for (size_t i = 0; i < shapes.size(); ++i)
        if (shapes[i].id == id)
            return static_cast<int>(i);
    return -1;
}

// --- serialization ---------------------------------------------------------

namespace {

std::string num(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, ptr);
    // Keep integral values readable as floats, e.g. "1" stays "1".
    return s;
}
std::string vec(const Vec3 &v) { return "[" + num(v.x) + ", " + num(v.y) + ", " + num(v.z) + "]"; }
std::string rgb(const Rgb &c) { return "[" + num(c[0]) + ", " + num(c[1]) + ", " + num(c[2]) + "]"; }
const char *boolean(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string serialize_scene(const SceneDescription &s) {
    std::ostringstream o;
    o << "version: 1\n";
    o << "speed_of_light: " << num(s.speed_of_light) << "\n";
    const CameraRecord &c = s.camera;
    o << "camera:\n"
      << "  origin: " << vec(c.origin) << "\n"
      << "  look_at: " << vec(c.look_at) << "\n"
      << "  up: " << vec(c.up) << "\n"
      << "  fov_degrees: " << num(c.fov_degrees) << "\n"
      << "  width: " << c.width << "\n"
      << "  height: " << c.height << "\n";
    if (!c.medium.empty())
        o << "  medium: " << c.medium << "\n";
    const TemporalAxis &a = s.film;
    o << "film:\n"
      << "  t_start: " << num(a.t_start) << "\n"
      << "  bin_width: " << num(a.bin_width) << "\n"
      << "  n_bins: " << a.n_bins << "\n";
    if (a.gate)
        o << "  gate: [" << num(a.gate->open) << ", " << num(a.gate->close) << "]\n";
    o << "  unwarp: " << boolean(a.unwarp) << "\n"
      << "  filter: " << (a.filter == TimeFilter::Box ? "box" : "tent") << "\n";
    o << "integrator:\n"
      << "  kind: " << integrator_kind_name(s.integrator.kind) << "\n"
      << "  max_depth: " << s.integrator.max_depth << "\n"
      << "  rr_depth: " << s.integrator.rr_depth << "\n"
      << "  polarized: " << boolean(s.integrator.polarized) << "\n";

    o << "materials:" << (s.materials.empty() ? " []" : "") << "\n";
    for (const MaterialRecord &m : s.materials) {
        o << "  - id: " << m.id << "\n";
        if (const auto *d = std::get_if<DiffuseMaterial>(&m.model)) {
            o << "    type: diffuse\n    albedo: " << rgb(d->albedo) << "\n";
        } else if (const auto *p = std::get_if<RoughPlasticMaterial>(&m.model)) {
            o << "    type: rough_plastic\n    albedo: " << rgb(p->albedo) << "\n    roughness: " << num(p->roughness)
              << "\n    ior: " << num(p->ior) << "\n";
        } else if (const auto *pol = std::get_if<PolarizerMaterial>(&m.model)) {
            o << "    type: polarizer\n    transmission_axis_angle: " << num(pol->transmission_axis_angle) << "\n";
        } else {
            const auto &mm = std::get<MirrorMaterial>(m.model);
            o << "    type: mirror\n    eta: " << rgb(mm.eta) << "\n    k: " << rgb(mm.k) << "\n";
        }
    }

    o << "media:" << (s.media.empty() ? " []" : "") << "\n";
    for (const MediumRecord &m : s.media) {
        o << "  - id: " << m.id << "\n    type: homogeneous\n    sigma_a: " << rgb(m.sigma_a)
          << "\n    sigma_s: " << rgb(m.sigma_s) << "\n    g: " << num(m.g) << "\n    ior: " << num(m.ior) << "\n";
    }

    o << "shapes:" << (s.shapes.empty() ? " []" : "") << "\n";
    for (const ShapeRecord &sh : s.shapes) {
        o << "  - ";
        bool first = true;
        auto field = [&](const std::string &line) {
            o << (first ? "" : "    ") << line << "\n";
            first = false;
        };
        if (!sh.id.empty())
            field("id: " + sh.id);
        if (const auto *r = std::get_if<RectangleGeometry>(&sh.geometry)) {
            field("type: rectangle");
            field("origin: " + vec(r->origin));
            field("edge_u: " + vec(r->edge_u));
            field("edge_v: " + vec(r->edge_v));
        } else if (const auto *sp = std::get_if<SphereGeometry>(&sh.geometry)) {
            field("type: sphere");
            field("center: " + vec(sp->center));
            field("radius: " + num(sp->radius));
        } else {
            const auto &m = std::get<MeshGeometry>(sh.geometry);
            field("type: mesh");
            std::string v = "vertices: [";
            for (size_t i = 0; i < m.vertices.size(); ++i)
                v += (i ? ", " : "") + vec(m.vertices[i]);
            field(v + "]");
            std::string t = "triangles: [";
            for (size_t i = 0; i < m.triangles.size(); ++i)
                t += (i ? ", [" : "[") + std::to_string(m.triangles[i][0]) + ", " + std::to_string(m.triangles[i][1]) +
                     ", " + std::to_string(m.triangles[i][2]) + "]";
            field(t + "]");
        }
        if (!sh.material.empty())
            field("material: " + sh.material);
        if (!sh.interior.empty())
            field("interior: " + sh.interior);
        if (sh.transform) {
            const Transform &t = *sh.transform;
            field("transform:");
            o << "      scale: " << vec(t.scale) << "\n"
              << "      rotate: {axis: " << vec(t.rotate_axis) << ", degrees: " << num(t.rotate_degrees) << "}\n"
              << "      translate: " << vec(t.translate) << "\n";
        }
    }

    if (s.nlos) {
        const NlosSetup &n = *s.nlos;
        o << "nlos:\n"
          << "  wall: {center: " << vec(n.wall.center) << ", normal: " << vec(n.wall.normal) << ", up: " << vec(n.wall.up)
          << ", width: " << num(n.wall.width) << ", height: " << num(n.wall.height) << ", albedo: " << num(n.wall.albedo)
          << "}\n"
          << "  laser_origin: " << vec(n.laser_origin) << "\n"
          << "  sensor_origin: " << vec(n.sensor_origin) << "\n"
          << "  laser_grid: [" << n.laser_grid[0] << ", " << n.laser_grid[1] << "]\n"
          << "  sensor_grid: [" << n.sensor_grid[0] << ", " << n.sensor_grid[1] << "]\n"
          << "  mode: " << (n.confocal ? "confocal" : "exhaustive") << "\n"
          << "  account_first_bounce: " << boolean(n.account_first_bounce) << "\n"
          << "  account_last_bounce: " << boolean(n.account_last_bounce) << "\n"
          << "  laser_power: " << rgb(n.laser_power) << "\n";
    }

    o << "emitters:" << (s.emitters.empty() ? " []" : "") << "\n";
    for (const EmitterRecord &e : s.emitters) {
        if (const auto *ae = std::get_if<AreaEmitter>(&e)) {
            o << "  - type: area\n    shape: " << ae->shape << "\n    radiance: " << rgb(ae->radiance) << "\n";
        } else if (const auto *pe = std::get_if<PointEmitter>(&e)) {
            o << "  - type: point\n    position: " << vec(pe->position) << "\n    intensity: " << rgb(pe->intensity)
              << "\n";
        } else {
            const auto &l = std::get<PulsedLaser>(e);
            o << "  - type: pulsed_laser\n    origin: " << vec(l.origin) << "\n    target: " << vec(l.target)
              << "\n    power: " << rgb(l.power) << "\n    pulse_fwhm: " << num(l.pulse_fwhm) << "\n";
        }
    }
    return o.str();
}

// --- transforms and procedural scenes -----------------------------------------

namespace {

Vec3 rotate(const Vec3 &v, const Vec3 &axis, double degrees) {
    if (degrees == 0)
        return v;
    const Vec3 k = normalize(axis);
    const double th = degrees * kPi / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    return v * c + cross(k, v) * s + k * (dot(k, v) * (1 - c));
}

}  // namespace

Vec3 Transform::apply_vector(const Vec3 &v) const {
    return rotate({v.x * scale.x, v.y * scale.y, v.z * scale.z}, rotate_axis, rotate_degrees);
}

Vec3 Transform::apply_point(const Vec3 &p) const { return apply_vector(p) + translate; }

std::vector<Primitive> shape_primitives(const ShapeRecord &shape, int shape_id) {
    const Transform t = shape.transform.value_or(Transform{});
    std::vector<Primitive> out;
    if (const auto *r = std::get_if<RectangleGeometry>(&shape.geometry)) {
        Primitive p;
        p.kind = Primitive::Kind::Rectangle;
        p.shape_id = shape_id;
        p.p0 = t.apply_point(r->origin);
        p.e1 = t.apply_vector(r->edge_u);
        p.e2 = t.apply_vector(r->edge_v);
        out.push_back(p);
    } else if (const auto *sp = std::get_if<SphereGeometry>(&shape.geometry)) {
        Primitive p;
        p.kind = Primitive::Kind::Sphere;
        p.shape_id = shape_id;
        p.p0 = t.apply_point(sp->center);
        p.radius = sp->radius * std::abs(t.scale.x);
        out.push_back(p);
    } else {
        const auto &m = std::get<MeshGeometry>(shape.geometry);
        out.reserve(m.triangles.size());
        for (size_t i = 0; i < m.triangles.size(); ++i) {
            const Vec3 a = t.apply_point(m.vertices[m.triangles[i][0]]);
            const Vec3 b = t.apply_point(m.vertices[m.triangles[i][1]]);
            const Vec3 c = t.apply_point(m.vertices[m.triangles[i][2]]);
            if (!(length(cross(b - a, c - a)) > 0))
                continue;  // degenerate triangles carry no area
            Primitive p;
            p.kind = Primitive::Kind::Triangle;
            p.shape_id = shape_id;
            p.index = static_cast<int>(i);
            p.p0 = a;
            p.e1 = b - a;
            p.e2 = c - a;
            out.push_back(p);
        }
    }
    return out;
}

MeshGeometry make_cuboid(const Vec3 &center, const Vec3 &size, double rotate_y_degrees) {
    MeshGeometry m;
    const Vec3 h = 0.5 * size;
    for (int i = 0; i < 8; ++i) {
        const Vec3 local{(i & 1) ? h.x : -h.x, (i & 2) ? h.y : -h.y, (i & 4) ? h.z : -h.z};
        m.vertices.push_back(center + rotate(local, {0, 1, 0}, rotate_y_degrees));
    }
    // Counter-clockwise seen from outside.
    const int quads[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
    for (const auto &q : quads) {
        m.triangles.push_back({q[0], q[1], q[2]});
        m.triangles.push_back({q[0], q[2], q[3]});
    }
    return m;
}

}  // namespace mitr
