// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/nlos.h>
#include <mitr/parallel.h>
#include <mitr/render_scene.h>

#include "binary_io.h"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>

namespace mitr {

namespace {

constexpr const char *kWallId = "relay_wall";

std::string unique_id(const SceneDescription &s, std::string id) {
    while (s.find_material(id) >= 0 || s.find_shape(id) >= 0)
        id += "_";
    return id;
}

const NlosSetup &require_setup(const SceneDescription &rig) {
    if (!rig.nlos)
        throw NlosError("scene has no 'nlos' section");
    return *rig.nlos;
}

/// Hidden shapes plus the relay wall, without emitters or camera changes.
SceneDescription geometry_scene(const SceneDescription &rig) {
    const NlosSetup &n = require_setup(rig);
    SceneDescription out = rig;
    out.nlos.reset();
    out.integrator.kind = IntegratorKind::Path;
    const std::string id = unique_id(out, kWallId);
    out.materials.push_back({id, DiffuseMaterial{Rgb(n.wall.albedo)}});
    const WallBasis b = wall_basis(n.wall);
    ShapeRecord wall;
    wall.id = id;
    wall.material = id;
    wall.geometry = RectangleGeometry{n.wall.center - 0.5 * n.wall.width * b.right - 0.5 * n.wall.height * b.up,
                                      n.wall.width * b.right, n.wall.height * b.up};
    out.shapes.push_back(std::move(wall));
    return out;
}

}  // namespace

WallBasis wall_basis(const RelayWall &wall) {
    WallBasis b;
    b.normal = normalize(wall.normal);
    b.up = normalize(wall.up - dot(wall.up, b.normal) * b.normal);
    b.right = cross(b.up, b.normal);
    return b;
}

std::vector<Vec3> wall_grid(const RelayWall &wall, std::array<int, 2> grid) {
    const WallBasis b = wall_basis(wall);
    std::vector<Vec3> pts;
    pts.reserve(static_cast<size_t>(grid[0]) * grid[1]);
    for (int iy = 0; iy < grid[1]; ++iy)
        for (int ix = 0; ix < grid[0]; ++ix) {
            const double u = ((ix + 0.5) / grid[0] - 0.5) * wall.width;
            const double v = ((iy + 0.5) / grid[1] - 0.5) * wall.height;
            pts.push_back(wall.center + u * b.right + v * b.up);
        }
    return pts;
}

SceneDescription build_nlos_scene(const SceneDescription &rig, int laser_index, int sensor_index) {
    const NlosSetup &n = require_setup(rig);
    const std::vector<Vec3> lasers = wall_grid(n.wall, n.laser_grid);
    const std::vector<Vec3> sensors = n.confocal ? lasers : wall_grid(n.wall, n.sensor_grid);
    if (laser_index < 0 || laser_index >= static_cast<int>(lasers.size()))
        throw NlosError(fmt::format("laser index {} outside the {}-point grid", laser_index, lasers.size()));
    if (n.confocal)
        sensor_index = laser_index;
    else if (sensor_index < 0 || sensor_index >= static_cast<int>(sensors.size()))
        throw NlosError(fmt::format("sensor index {} outside the {}-point grid", sensor_index, sensors.size()));
    const Vec3 x_l = lasers[laser_index], x_s = sensors[sensor_index];

    SceneDescription out = geometry_scene(rig);
    out.emitters.push_back(PulsedLaser{n.laser_origin, x_l, n.laser_power, 0});
    out.camera.origin = n.sensor_origin;
    out.camera.look_at = x_s;
    const WallBasis b = wall_basis(n.wall);
    const Vec3 view = normalize(x_s - n.sensor_origin);
    out.camera.up = length(cross(view, b.up)) > 1e-3 ? b.up : b.right;
    out.camera.fov_degrees = 0.01;
    out.camera.width = 1;
    out.camera.height = 1;
    out.camera.medium.clear();
    return out;
}

std::pair<Vec3, Vec3> NlosCapture::points(int entry) const {
    const std::vector<Vec3> lasers = wall_grid(rig.wall, rig.laser_grid);
    if (rig.confocal)
        return {lasers[entry], lasers[entry]};
    const std::vector<Vec3> sensors = wall_grid(rig.wall, rig.sensor_grid);
    const int ns = sensor_count();
    return {lasers[entry / ns], sensors[entry % ns]};
}

// --- relay-wall sampler -------------------------------------------------------

struct NlosSampler::Impl {
    NlosSetup setup;
    Scene scene;
    double c;
    int max_hidden;
    Rgb wall_f;  // wall BRDF value
    Vec3 wall_normal;
    std::vector<int> hidden_prims;
    std::vector<double> cdf;
    double hidden_area = 0;

    explicit Impl(const SceneDescription &rig)
        : setup(require_setup(rig)), scene(geometry_scene(rig)), c(rig.speed_of_light),
          max_hidden(std::max(1, rig.integrator.max_depth - 2)) {
        wall_f = Rgb(setup.wall.albedo * kInvPi);
        wall_normal = wall_basis(setup.wall).normal;
        const int wall_shape = static_cast<int>(scene.description().shapes.size()) - 1;
        const auto prims = scene.bvh().primitives();
        for (size_t i = 0; i < prims.size(); ++i) {
            if (prims[i].shape_id == wall_shape)
                continue;
            hidden_prims.push_back(static_cast<int>(i));
            hidden_area += prims[i].area();
            cdf.push_back(hidden_area);
        }
        for (double &v : cdf)
            v /= hidden_area;
    }

    bool visible(const Vec3 &a, const Vec3 &na, const Vec3 &b) const {
        const Vec3 d = normalize(b - a);
        Ray r{offset_ray_origin(a, na, d), d};
        r.t_max = dot(b - r.origin, d) - ray_epsilon(b);
        return r.t_max <= 0 || !scene.bvh().intersect(r);
    }

    void sample(const Vec3 &x_l, const Vec3 &x_s, RngState &rng,
                const std::function<void(const NlosDeposit &)> &sink) const {
        if (hidden_prims.empty())
            return;
        const double u_prim = rng.next_double();
        const Vec2 u{rng.next_double(), rng.next_double()};
        const size_t k = std::min<size_t>(std::lower_bound(cdf.begin(), cdf.end(), u_prim) - cdf.begin(), cdf.size() - 1);
        const int prim = hidden_prims[k];
        const Vec3 y1 = scene.bvh().primitive(prim).sample_area(u).first;

        const Vec3 d1 = y1 - x_l;
        const double dist1 = length(d1);
        const Vec3 w1 = d1 / dist1;
        const double cos_l = dot(w1, wall_normal);
        if (!(cos_l > 0))
            return;
        // The first hit from x_l towards y1 must be y1 itself.
        const Vec3 origin = offset_ray_origin(x_l, wall_normal, w1);
        const Ray beam{origin, normalize(y1 - origin)};
        auto si = scene.intersect(beam);
        if (!si || si->primitive != prim || distance(si->position, y1) > 1e-6 * std::max(1.0, length(y1)))
            return;
        const double cos_y1 = std::abs(dot(si->geometric_normal, w1));
        // Irradiance at y1 from the lit spot over the area-sampling density.
        Rgb alpha = setup.laser_power * wall_f * (cos_l * cos_y1 / (dist1 * dist1) * hidden_area);
        double time = dist1 / c;

        for (int depth = 1;; ++depth) {
            if (si->material_id < 0)
                return;
            const Material &mat = scene.materials()[si->material_id];
            const Vec3 y = si->position;
            const Vec3 ny = si->geometric_normal;
            const Vec3 ds = x_s - y;
            const double dist_s = length(ds);
            const Vec3 ws = ds / dist_s;
            const double cos_s = -dot(ws, wall_normal);
            if (cos_s > 0) {
                const Vec3 wo_local = si->frame.to_local(ws);
                const Rgb f = mat.eval_bsdf(si->wi_local, wo_local);
                if (!f.is_black() && visible(y, ny, x_s)) {
                    const Rgb v = alpha * f * wall_f * (std::abs(wo_local.z) * cos_s / (dist_s * dist_s));
                    sink({time + dist_s / c, v.luminance()});
                }
            }
            if (depth >= max_hidden)
                return;
            const double u_lobe = rng.next_double();
            const Vec2 ub{rng.next_double(), rng.next_double()};
            const BsdfSample bs = mat.sample(si->wi_local, u_lobe, ub, false);
            if (!bs.valid || bs.weight.is_black())
                return;
            alpha *= bs.weight;
            const Vec3 wo = si->frame.to_world(bs.wo);
            const Ray next{offset_ray_origin(y, ny, wo), wo};
            si = scene.intersect(next);
            if (!si)
                return;
            time += distance(y, si->position) / c;
        }
    }
};

NlosSampler::NlosSampler(const SceneDescription &rig) : impl_(std::make_unique<Impl>(rig)) {}
NlosSampler::~NlosSampler() = default;

void NlosSampler::sample(const Vec3 &x_l, const Vec3 &x_s, RngState &rng,
                         const std::function<void(const NlosDeposit &)> &sink) const {
    impl_->sample(x_l, x_s, rng, sink);
}

double NlosSampler::time_offset(const Vec3 &x_l, const Vec3 &x_s) const {
    const NlosSetup &n = impl_->setup;
    double t = 0;
    if (n.account_first_bounce)
        t += distance(n.laser_origin, x_l) / impl_->c;
    if (n.account_last_bounce)
        t += distance(x_s, n.sensor_origin) / impl_->c;
    return t;
}

// --- capture ------------------------------------------------------------------

std::vector<double> capture_entry(const NlosSampler &sampler, const SceneDescription &rig, int entry,
                                  const CaptureOptions &options) {
    NlosCapture shape;
    shape.rig = require_setup(rig);
    const auto [x_l, x_s] = shape.points(entry);
    const double offset = sampler.time_offset(x_l, x_s);
    PixelAccumulator acc(rig.film, 1);
    for (int s = 0; s < options.spp; ++s) {
        RngState rng(options.seed, rng_stream(static_cast<uint64_t>(entry), static_cast<uint64_t>(s), RngDomain::Nlos));
        sampler.sample(x_l, x_s, rng, [&](const NlosDeposit &d) {
            const double v = d.value;
            acc.add(d.time + offset, std::span(&v, 1));
        });
    }
    std::vector<double> h(rig.film.n_bins);
    for (int b = 0; b < rig.film.n_bins; ++b)
        h[b] = to_double(acc.bin(b, 0)) / options.spp;
    return h;
}

NlosCapture capture(const SceneDescription &rig, const CaptureOptions &options) {
    validate_scene(rig);
    if (options.spp <= 0)
        throw std::invalid_argument("spp must be positive");
    NlosCapture cap;
    cap.rig = require_setup(rig);
    cap.axis = rig.film;
    cap.speed_of_light = rig.speed_of_light;
    cap.data.assign(static_cast<size_t>(cap.entries()) * cap.axis.n_bins, 0.0f);
    const NlosSampler sampler(rig);
    std::atomic<int> done{0};
    parallel_for(cap.entries(), options.threads, [&](int e) {
        std::vector<double> h;
        try {
            h = capture_entry(sampler, rig, e, options);
        } catch (const std::exception &ex) {
            throw NlosError(fmt::format("grid entry {}: {}", e, ex.what()));
        }
        for (int b = 0; b < cap.axis.n_bins; ++b)
            cap.at(e, b) = static_cast<float>(h[b]);
        const int n = ++done;
        if (options.progress)
            options.progress(n, cap.entries());
    });
    return cap;
}

// --- noise --------------------------------------------------------------------

std::vector<double> gaussian_kernel(double sigma_bins) {
    if (!(sigma_bins > 0))
        return {1.0};
    const int r = static_cast<int>(std::ceil(4 * sigma_bins));
    std::vector<double> k(2 * r + 1);
    double sum = 0;
    for (int i = -r; i <= r; ++i)
        sum += k[i + r] = std::exp(-0.5 * i * i / (sigma_bins * sigma_bins));
    for (double &v : k)
        v /= sum;
    return k;
}

std::vector<double> convolve_time(std::span<const double> h, std::span<const double> kernel) {
    const int n = static_cast<int>(h.size());
    const int r = static_cast<int>(kernel.size()) / 2;
    std::vector<double> out(h.size(), 0.0);
    for (int t = 0; t < n; ++t) {
        if (h[t] == 0)
            continue;
        for (int k = 0; k < static_cast<int>(kernel.size()); ++k) {
            const int o = t + k - r;
            if (o >= 0 && o < n)
                out[o] += h[t] * kernel[k];
        }
    }
    return out;
}

uint64_t sample_poisson(double mean, RngState &rng) {
    if (!(mean > 0))
        return 0;
    if (mean < 10) {
        const double limit = std::exp(-mean);
        double prod = rng.next_double();
        uint64_t k = 0;
        while (prod > limit) {
            prod *= rng.next_double();
            ++k;
        }
        return k;
    }
    // Transformed rejection with squeeze (Hormann 1993).
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2);
    for (;;) {
        const double u = rng.next_double() - 0.5;
        const double v = rng.next_double();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr)
            return static_cast<uint64_t>(k);
        if (k < 0 || (us < 0.013 && v > us))
            continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <= -mean + k * loglam - std::lgamma(k + 1))
            return static_cast<uint64_t>(k);
    }
}

std::vector<double> read_irf(const std::filesystem::path &path, std::string *warning) {
    std::ifstream in(path);
    if (!in)
        throw NlosError("cannot open IRF file '" + path.string() + "'");
    std::vector<double> k;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        const auto last = line.find_last_not_of(" \t\r");
        double v = 0;
        const char *begin = line.data() + first, *end = line.data() + last + 1;
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end || !std::isfinite(v) || v < 0)
            throw NlosError(fmt::format("IRF file line {}: expected a nonnegative number", line_no));
        k.push_back(v);
    }
    if (k.empty() || k.size() % 2 == 0)
        throw NlosError(fmt::format("IRF kernel must have odd length, got {}", k.size()));
    double sum = 0;
    for (double v : k)
        sum += v;
    if (!(sum > 0))
        throw NlosError("IRF kernel sums to zero");
    if (warning && std::abs(sum - 1) > 1e-3)
        *warning = fmt::format("IRF kernel sum {} renormalized to 1", sum);
    for (double &v : k)
        v /= sum;
    return k;
}

NlosCapture apply_noise(const NlosCapture &capture, const NoiseModel &model, uint64_t seed) {
    if (model.jitter_sigma < 0 || model.photon_scale < 0 || model.dark_count_rate < 0 ||
        !std::isfinite(model.jitter_sigma) || !std::isfinite(model.photon_scale) ||
        !std::isfinite(model.dark_count_rate))
        throw std::invalid_argument("noise parameters must be finite and >= 0");
    const std::vector<double> kernel =
        !model.irf.empty() ? model.irf : gaussian_kernel(model.jitter_sigma / capture.axis.bin_width);
    NlosCapture out = capture;
    const int nb = capture.axis.n_bins;
    for (int e = 0; e < capture.entries(); ++e) {
        std::vector<double> h(nb);
        for (int b = 0; b < nb; ++b)
            h[b] = capture.at(e, b);
        if (kernel.size() > 1)
            h = convolve_time(h, kernel);
        RngState rng(seed, rng_stream(static_cast<uint64_t>(e), 0, RngDomain::Noise));
        for (int b = 0; b < nb; ++b) {
            const uint64_t counts = sample_poisson(h[b] * model.photon_scale, rng) +
                                    sample_poisson(model.dark_count_rate, rng);
            out.at(e, b) = static_cast<float>(counts);
        }
    }
    return out;
}

// --- reconstruction -----------------------------------------------------------

TransientCube backproject(const NlosCapture &capture, const Volume &volume, bool laplacian) {
    const auto [nx, ny, nz] = volume.dims;
    if (nx < 1 || ny < 1 || nz < 1 || !(volume.voxel_size > 0))
        throw NlosError("volume needs positive dimensions and voxel size");
    const WallBasis wb = wall_basis(capture.rig.wall);
    for (int corner = 0; corner < 8; ++corner) {
        const Vec3 p = volume.origin + volume.voxel_size * Vec3{(corner & 1) ? double(nx) : 0.0,
                                                                (corner & 2) ? double(ny) : 0.0,
                                                                (corner & 4) ? double(nz) : 0.0};
        if (!(dot(p - capture.rig.wall.center, wb.normal) > 0))
            throw NlosError("reconstruction volume reaches the relay wall plane");
    }
    const int nb = capture.axis.n_bins;
    const int entries = capture.entries();
    std::vector<double> hist(static_cast<size_t>(entries) * nb);
    std::vector<std::pair<Vec3, Vec3>> pts(entries);
    std::vector<double> offset(entries);
    const double c = capture.speed_of_light;
    for (int e = 0; e < entries; ++e) {
        pts[e] = capture.points(e);
        double t = 0;
        if (capture.rig.account_first_bounce)
            t += distance(capture.rig.laser_origin, pts[e].first) / c;
        if (capture.rig.account_last_bounce)
            t += distance(pts[e].second, capture.rig.sensor_origin) / c;
        offset[e] = t;
        for (int b = 0; b < nb; ++b) {
            double v = capture.at(e, b);
            if (laplacian) {
                const double lo = b > 0 ? capture.at(e, b - 1) : 0.0;
                const double hi = b + 1 < nb ? capture.at(e, b + 1) : 0.0;
                v = 2 * v - lo - hi;
            }
            hist[static_cast<size_t>(e) * nb + b] = v;
        }
    }

    TemporalAxis axis;
    axis.t_start = volume.origin.z;
    axis.bin_width = volume.voxel_size;
    axis.n_bins = nz;
    TransientCube out(nx, ny, 1, axis);
    out.speed_of_light = c;
    parallel_for(nz, 0, [&](int z) {
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const Vec3 v = volume.origin + volume.voxel_size * Vec3{x + 0.5, y + 0.5, z + 0.5};
                double sum = 0;
                for (int e = 0; e < entries; ++e) {
                    const double t = (distance(pts[e].first, v) + distance(v, pts[e].second)) / c + offset[e];
                    if (const auto b = bin_index(capture.axis, t))
                        sum += hist[static_cast<size_t>(e) * nb + *b];
                }
                out.at(z, y, x, 0) = static_cast<float>(sum);
            }
    });
    return out;
}

// --- files --------------------------------------------------------------------

namespace {

constexpr uint32_t kCaptureVersion = 1;
constexpr size_t kCaptureHeaderBytes = 4 + 4 + 1 + 5 * 4 + 3 * 8 + 2 + 7 * 3 * 8;

}  // namespace

std::vector<uint8_t> encode_capture(const NlosCapture &cap) {
    std::vector<uint8_t> out;
    out.reserve(kCaptureHeaderBytes + cap.data.size() * 4);
    detail::ByteWriter w(out);
    const NlosSetup &r = cap.rig;
    w.bytes("NLOS", 4);
    w.u32(kCaptureVersion);
    w.u8(r.confocal ? 0 : 1);
    w.u32(static_cast<uint32_t>(r.laser_grid[0]));
    w.u32(static_cast<uint32_t>(r.laser_grid[1]));
    w.u32(static_cast<uint32_t>(r.sensor_grid[0]));
    w.u32(static_cast<uint32_t>(r.sensor_grid[1]));
    w.u32(static_cast<uint32_t>(cap.axis.n_bins));
    w.f64(cap.axis.t_start);
    w.f64(cap.axis.bin_width);
    w.f64(cap.speed_of_light);
    w.u8(r.account_first_bounce ? 1 : 0);
    w.u8(r.account_last_bounce ? 1 : 0);
    auto triple = [&](double a, double b, double c) {
        w.f64(a);
        w.f64(b);
        w.f64(c);
    };
    auto vec = [&](const Vec3 &v) { triple(v.x, v.y, v.z); };
    vec(r.wall.center);
    vec(r.wall.normal);
    vec(r.wall.up);
    triple(r.wall.width, r.wall.height, r.wall.albedo);
    vec(r.laser_origin);
    vec(r.sensor_origin);
    triple(r.laser_power[0], r.laser_power[1], r.laser_power[2]);
    for (float v : cap.data)
        w.f32(v);
    return out;
}

NlosCapture decode_capture(std::span<const uint8_t> bytes) {
    if (bytes.size() < kCaptureHeaderBytes)
        throw NlosError(fmt::format("truncated capture: expected at least {} header bytes, got {}",
                                    kCaptureHeaderBytes, bytes.size()));
    if (std::memcmp(bytes.data(), "NLOS", 4) != 0)
        throw NlosError("not a capture file (bad magic)");
    detail::ByteReader r(bytes.subspan(4));
    const uint32_t version = r.u32();
    if (version != kCaptureVersion)
        throw NlosError(fmt::format("unsupported capture version {} (expected {})", version, kCaptureVersion));
    NlosCapture cap;
    NlosSetup &s = cap.rig;
    const uint8_t mode = r.u8();
    if (mode > 1)
        throw NlosError(fmt::format("unknown capture mode {}", mode));
    s.confocal = mode == 0;
    uint32_t dims[5];
    for (uint32_t &d : dims)
        d = r.u32();
    for (int i = 0; i < 4; ++i)
        if (dims[i] < 1 || dims[i] > 4096)
            throw NlosError(fmt::format("implausible grid dimension {}", dims[i]));
    if (dims[4] < 1 || dims[4] > 10000000)
        throw NlosError(fmt::format("implausible bin count {}", dims[4]));
    s.laser_grid = {static_cast<int>(dims[0]), static_cast<int>(dims[1])};
    s.sensor_grid = {static_cast<int>(dims[2]), static_cast<int>(dims[3])};
    cap.axis.n_bins = static_cast<int>(dims[4]);
    cap.axis.t_start = r.f64();
    cap.axis.bin_width = r.f64();
    cap.speed_of_light = r.f64();
    if (!std::isfinite(cap.axis.t_start) || !(cap.axis.bin_width > 0) || !(cap.speed_of_light > 0))
        throw NlosError("capture header holds an invalid time axis");
    s.account_first_bounce = r.u8() != 0;
    s.account_last_bounce = r.u8() != 0;
    auto vec = [&] {
        Vec3 v;
        v.x = r.f64();
        v.y = r.f64();
        v.z = r.f64();
        return v;
    };
    s.wall.center = vec();
    s.wall.normal = vec();
    s.wall.up = vec();
    const Vec3 extent = vec();
    s.wall.width = extent.x;
    s.wall.height = extent.y;
    s.wall.albedo = extent.z;
    s.laser_origin = vec();
    s.sensor_origin = vec();
    const Vec3 power = vec();
    s.laser_power = {power.x, power.y, power.z};
    const uint64_t count = static_cast<uint64_t>(cap.entries()) * cap.axis.n_bins;
    const uint64_t expected = kCaptureHeaderBytes + 4 * count;
    if (bytes.size() != expected)
        throw NlosError(fmt::format("capture size mismatch: expected {} bytes, got {}", expected, bytes.size()));
    cap.data.resize(count);
    detail::ByteReader payload(bytes.subspan(kCaptureHeaderBytes));
    for (float &v : cap.data)
        v = payload.f32();
    return cap;
}

void write_capture(const NlosCapture &capture, const std::filesystem::path &path) {
    detail::write_file<NlosError>(path, encode_capture(capture));
}

NlosCapture read_capture(const std::filesystem::path &path) {
    return decode_capture(detail::read_file<NlosError>(path));
}

}  // namespace mitr
