// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/integrator.h>
#include <mitr/parallel.h>
#include <mitr/sampling.h>

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>

namespace mitr {

namespace {

constexpr int kMaxChannels = 3 * (kMaxGradientParams + 1);
constexpr int kTileSize = 16;

/// One scattering event as seen by a throughput: scalar weight, albedo
/// derivative, and (for polarized transport) the Mueller matrices with
/// world-space frames. `in_dir` is the propagation direction of the light
/// arriving at the vertex, `out_dir` that of the light leaving it.
struct ScatterEvent {
    Rgb weight;
    Rgb dweight;
    int material = -1;
    const std::array<Mat4, 3> *mueller = nullptr;
    Vec3 in_frame, out_frame;
    Vec3 in_dir, out_dir;
};

struct PlainBeta {
    Rgb v{1.0};

    static constexpr bool kPolarized = false;
    void scale(const Rgb &w) { v *= w; }
    void scatter(const ScatterEvent &e) { v *= e.weight; }
    void depolarize(const Rgb &w, const Vec3 &) { v *= w; }
    double magnitude() const { return v.max_value(); }
    bool zero() const { return v.is_black(); }
    int channels() const { return 3; }
    void contribution(const Rgb &le, double *out) const {
        for (int c = 0; c < 3; ++c)
            out[c] = v[c] * le[c];
    }
};

struct GradBeta {
    Rgb v{1.0};
    std::array<Rgb, kMaxGradientParams> d{};
    std::span<const GradientParam> params;

    static constexpr bool kPolarized = false;
    void scale(const Rgb &w) {
        v *= w;
        for (size_t k = 0; k < params.size(); ++k)
            d[k] *= w;
    }
    void scatter(const ScatterEvent &e) {
        for (size_t k = 0; k < params.size(); ++k) {
            d[k] *= e.weight;
            if (params[k].material == e.material)
                d[k] += v * e.dweight * params[k].mask;
        }
        v *= e.weight;
    }
    void depolarize(const Rgb &w, const Vec3 &) { scale(w); }
    double magnitude() const { return v.max_value(); }
    bool zero() const {
        if (!v.is_black())
            return false;
        for (size_t k = 0; k < params.size(); ++k)
            if (!d[k].is_black())
                return false;
        return true;
    }
    int channels() const { return 3 * (1 + static_cast<int>(params.size())); }
    void contribution(const Rgb &le, double *out) const {
        for (int c = 0; c < 3; ++c)
            out[c] = v[c] * le[c];
        for (size_t k = 0; k < params.size(); ++k)
            for (int c = 0; c < 3; ++c)
                out[3 * (k + 1) + c] = d[k][c] * le[c];
    }
};

/// Accumulated Mueller matrices from the camera back to the current
/// segment. `frame` is the reference axis of the current segment, whose
/// light propagates along `dir` (towards the camera).
struct PolarBeta {
    std::array<Mat4, 3> m{mat4_identity(), mat4_identity(), mat4_identity()};
    Vec3 frame, dir;

    static constexpr bool kPolarized = true;
    void scale(const Rgb &w) {
        for (int c = 0; c < 3; ++c)
            m[c] = m[c] * w[c];
    }
    void scatter(const ScatterEvent &e) {
        const Vec3 f_new = transport_frame(frame, dir, e.in_dir);
        MuellerSpectrum local;
        local.m = *e.mueller;
        local.in_frame = e.in_frame;
        local.in_direction = e.in_dir;
        local.out_frame = e.out_frame;
        local.out_direction = e.out_dir;
        const MuellerSpectrum world = to_world_mueller(local, f_new, frame);
        for (int c = 0; c < 3; ++c)
            m[c] = m[c] * world.m[c];
        frame = f_new;
        dir = e.in_dir;
    }
    void depolarize(const Rgb &w, const Vec3 &new_dir) {
        for (int c = 0; c < 3; ++c)
            m[c] = m[c] * mueller_depolarizer(w[c]);
        dir = new_dir;
        frame = perpendicular(new_dir);
    }
    double magnitude() const { return std::max({m[0][0][0], m[1][0][0], m[2][0][0]}); }
    bool zero() const { return magnitude() <= 0; }
    int channels() const { return 12; }
    void contribution(const Rgb &le, double *out) const {
        for (int k = 0; k < 4; ++k)
            for (int c = 0; c < 3; ++c)
                out[3 * k + c] = m[c][k][0] * le[c];
    }
};

/// Media the current path point is inside, innermost last.
class MediumStack {
  public:
    explicit MediumStack(int base) : base_(base) {}

    int current() const { return n_ > 0 ? items_[n_ - 1] : base_; }

    void cross(int medium, bool entering, bool strict) {
        if (entering) {
            if (n_ == static_cast<int>(items_.size()))
                throw MediumError("medium nesting deeper than 16 levels");
            items_[n_++] = medium;
            return;
        }
        if (n_ > 0 && items_[n_ - 1] == medium) {
            --n_;
            return;
        }
        if (strict)
            throw MediumError(fmt::format("path leaves medium {} while inside medium {}", medium, current()));
        for (int i = n_ - 1; i >= 0; --i) {
            if (items_[i] == medium) {
                std::copy(items_.begin() + i + 1, items_.begin() + n_, items_.begin() + i);
                --n_;
                return;
            }
        }
    }

    int after(int medium, bool entering) const {
        MediumStack s = *this;
        s.cross(medium, entering, false);
        return s.current();
    }

  private:
    int base_;
    std::array<int, 16> items_{};
    int n_ = 0;
};

struct KernelConfig {
    int max_depth = 8;
    int rr_depth = 4;
    bool nee = true;
    bool bsdf_light_hits = true;
    bool check_time_bounds = false;
    bool strict_media = false;
    bool unwarp = false;
};

KernelConfig make_config(const Scene &scene, const RenderOptions &options) {
    KernelConfig k;
    const IntegratorSettings &s = scene.description().integrator;
    k.max_depth = s.max_depth;
    k.rr_depth = s.rr_depth;
    k.nee = options.nee;
    k.bsdf_light_hits = options.bsdf_light_hits;
    k.check_time_bounds = options.check_time_bounds;
    k.strict_media = options.strict_media;
    k.unwarp = scene.description().film.unwarp;
    return k;
}

struct Visibility {
    bool visible = false;
    Rgb transmittance{1.0};
    double time = 0;
};

template <class Beta, bool kVolumetric>
class PathKernel {
  public:
    PathKernel(const Scene &scene, const KernelConfig &cfg) : scene_(scene), cfg_(cfg), c_(scene.speed_of_light()) {}

    /// Trace one camera path; `sink(time, pulse_fwhm, values, n)` receives
    /// each deposit.
    template <class Sink>
    void trace(const Ray &camera_ray, Beta beta, RngState &rng, Sink &&sink) const {
        Ray ray = camera_ray;
        MediumStack stack(scene_.camera_medium());
        Vec3 prev_vertex = ray.origin;  // last scattering vertex
        Vec3 prev_point = ray.origin;   // last point on the path, boundaries included
        double time = 0;
        int segments = 1;
        bool prev_delta = true;
        double prev_pdf = 0;
        std::optional<Vec3> first_vertex;
        const Vec3 camera = camera_ray.origin;

        auto deposit = [&](double t, const Beta &b, const Rgb &le, double fwhm, const Vec3 &emitter) {
            if (cfg_.check_time_bounds) {
                const double bound = distance(camera, emitter) / c_;
                if (t < bound * (1 - 1e-9) - 1e-12)
                    throw std::logic_error(fmt::format("arrival time {} precedes straight-line bound {}", t, bound));
            }
            if (cfg_.unwarp && first_vertex)
                t = unwarp_time(t, *first_vertex, camera, c_);
            std::array<double, kMaxChannels> values{};
            b.contribution(le, values.data());
            sink(t, fwhm, values.data(), b.channels());
        };

        for (int guard = 0; guard < 1024; ++guard) {
            const auto si = scene_.intersect(ray);
            const int med = stack.current();
            const double n_cur = ior(med);

            if constexpr (kVolumetric) {
                if (med >= 0) {
                    const MediumRecord &m = scene_.media()[med];
                    // The medium starts at the surface point, not at the
                    // offset ray origin.
                    const double lead = distance(prev_point, ray.origin);
                    const double t_max = si ? si->distance + lead : kInfinity;
                    const double u_channel = rng.next_double();
                    const double u_dist = rng.next_double();
                    const DistanceSample ds = sample_distance(m, t_max, u_channel, u_dist);
                    beta.scale(ds.weight);
                    if (ds.medium_event) {
                        const Vec3 x = ray.at(std::max(0.0, ds.t - lead));
                        time += distance(prev_point, x) * n_cur / c_;
                        if (!first_vertex)
                            first_vertex = x;
                        if (beta.zero() || segments >= cfg_.max_depth)
                            return;
                        if (cfg_.nee)
                            medium_nee(x, ray.direction, m.g, beta, stack, time, rng, deposit);
                        if (!roulette(beta, segments, rng))
                            return;
                        const DirectionSample ps = sample_hg_phase(m.g, {rng.next_double(), rng.next_double()});
                        const Vec3 wo = Frame::from_normal(ray.direction).to_world(ps.direction);
                        beta.depolarize(Rgb(1.0), -wo);
                        prev_vertex = prev_point = x;
                        prev_delta = false;
                        prev_pdf = ps.pdf;
                        ++segments;
                        ray = Ray{x, wo};
                        continue;
                    }
                    if (beta.zero())
                        return;
                }
            }
            if (!si)
                return;

            const Vec3 x = si->position;
            const Vec3 ng = si->geometric_normal;
            time += distance(prev_point, x) * n_cur / c_;
            const ShapeInfo &shape = scene_.shapes()[si->shape_id];

            if (shape.material < 0) {
                if constexpr (kVolumetric) {
                    if (shape.interior >= 0) {
                        const bool entering = si->front_face;
                        const double n_next = ior(stack.after(shape.interior, entering));
                        if (n_next == n_cur) {
                            stack.cross(shape.interior, entering, cfg_.strict_media);
                        } else {
                            if (!first_vertex)
                                first_vertex = x;
                            if (segments >= cfg_.max_depth || !roulette(beta, segments, rng))
                                return;
                            ray = dielectric_event(*si, ray, n_cur, n_next, shape.interior, entering, stack, beta, rng);
                            if (beta.zero())
                                return;
                            prev_vertex = prev_point = x;
                            prev_delta = true;
                            ++segments;
                            continue;
                        }
                    }
                }
                prev_point = x;
                ray = Ray{offset_ray_origin(x, ng, ray.direction), ray.direction};
                continue;
            }

            if (!first_vertex)
                first_vertex = x;
            if (shape.emitter >= 0 && (prev_delta || cfg_.bsdf_light_hits)) {
                const Rgb le = scene_.emitted(shape.emitter, ng, -ray.direction);
                if (!le.is_black()) {
                    double w = 1;
                    if (!prev_delta && cfg_.nee)
                        w = power_heuristic(prev_pdf, scene_.light_pdf(shape.emitter, prev_vertex, x, ng));
                    deposit(time, beta, le * w, 0, x);
                }
            }
            if (segments >= cfg_.max_depth)
                return;

            const Material &mat = scene_.materials()[shape.material];
            const Vec3 wi_w = -ray.direction;
            if (cfg_.nee && !mat.is_delta())
                surface_nee(*si, mat, wi_w, beta, stack, time, rng, deposit);
            if (!roulette(beta, segments, rng))
                return;

            const double u_lobe = rng.next_double();
            const Vec2 u{rng.next_double(), rng.next_double()};
            const BsdfSample bs = mat.sample(si->wi_local, u_lobe, u, Beta::kPolarized);
            if (!bs.valid)
                return;
            const Vec3 wo_w = si->frame.to_world(bs.wo);
            beta.scatter(surface_event(bs.weight, bs.dweight, shape.material, bs.pol, si->frame, wi_w, wo_w));
            if (beta.zero())
                return;
            prev_vertex = prev_point = x;
            prev_delta = bs.delta;
            prev_pdf = bs.pdf;
            ++segments;
            ray = Ray{offset_ray_origin(x, ng, wo_w), wo_w};
        }
    }

  private:
    double ior(int medium) const { return medium >= 0 ? scene_.media()[medium].ior : 1.0; }

    bool roulette(Beta &beta, int segments, RngState &rng) const {
        if (segments < cfg_.rr_depth)
            return true;
        const double q = std::min(1.0, beta.magnitude());
        if (!(q > 0) || rng.next_double() >= q)
            return false;
        beta.scale(Rgb(1.0 / q));
        return true;
    }

    static ScatterEvent surface_event(const Rgb &weight, const Rgb &dweight, int material, const PolarizedResponse &pol,
                                      const Frame &frame, const Vec3 &wi_w, const Vec3 &wo_w) {
        ScatterEvent e;
        e.weight = weight;
        e.dweight = dweight;
        e.material = material;
        if constexpr (Beta::kPolarized) {
            e.mueller = &pol.m;
            e.in_frame = frame.to_world(pol.in_frame);
            e.out_frame = frame.to_world(pol.out_frame);
            e.in_dir = -wo_w;
            e.out_dir = wi_w;
        }
        return e;
    }

    Ray dielectric_event(const SurfaceInteraction &si, const Ray &ray, double n1, double n2, int medium, bool entering,
                         MediumStack &stack, Beta &beta, RngState &rng) const {
        const Vec3 d = ray.direction;
        const Vec3 nf = si.front_face ? si.geometric_normal : -si.geometric_normal;
        const double eta = n2 / n1;
        const double cos_i = std::clamp(-dot(d, nf), 0.0, 1.0);
        const double f = fresnel_dielectric(eta, cos_i);
        const bool reflect_event = rng.next_double() < f;
        Vec3 wo;
        std::array<Mat4, 3> m{};
        if (reflect_event) {
            wo = normalize(d + 2 * cos_i * nf);
            if constexpr (Beta::kPolarized) {
                const Mat4 r = mueller_fresnel_reflection(eta, cos_i) * (1 / f);
                m = {r, r, r};
            }
        } else {
            const double sin2_t = (1 - cos_i * cos_i) / (eta * eta);
            const double cos_t = safe_sqrt(1 - sin2_t);
            wo = normalize(d / eta + (cos_i / eta - cos_t) * nf);
            if constexpr (Beta::kPolarized) {
                const Mat4 t = mueller_fresnel_transmission(eta, cos_i) * (1 / (1 - f));
                m = {t, t, t};
            }
            stack.cross(medium, entering, cfg_.strict_media);
        }
        ScatterEvent e;
        e.weight = Rgb(1.0);
        e.dweight = Rgb(0.0);
        if constexpr (Beta::kPolarized) {
            const Vec3 c = cross(d, nf);
            const Vec3 s = length(c) > 1e-9 ? normalize(c) : perpendicular(d);
            e.mueller = &m;
            e.in_frame = e.out_frame = s;
            e.in_dir = -wo;
            e.out_dir = -d;
        }
        beta.scatter(e);
        return Ray{offset_ray_origin(si.position, si.geometric_normal, wo), wo};
    }

    /// Straight connection from `from` to `to`, passing through
    /// index-matched medium boundaries and accumulating transmittance and
    /// optical time.
    Visibility shadow(const Vec3 &from, const Vec3 *normal, const Vec3 &to, MediumStack stack) const {
        Visibility vis;
        const Vec3 d = normalize(to - from);
        Vec3 pos = from;
        Vec3 origin = normal ? offset_ray_origin(from, *normal, d) : from;
        const double end_eps = ray_epsilon(to);
        for (int guard = 0; guard < 64; ++guard) {
            Ray r{origin, d};
            r.t_max = dot(to - origin, d) - end_eps;
            const int med = stack.current();
            const auto si = r.t_max > 0 ? scene_.intersect(r) : std::nullopt;
            const Vec3 end = si ? si->position : to;
            const double seg = distance(pos, end);
            vis.time += seg * ior(med) / c_;
            if constexpr (kVolumetric) {
                if (med >= 0)
                    vis.transmittance *= eval_transmittance(scene_.media()[med], seg);
            }
            if (!si) {
                vis.visible = true;
                return vis;
            }
            const ShapeInfo &shape = scene_.shapes()[si->shape_id];
            if (shape.material >= 0 || shape.interior < 0)
                return vis;
            if constexpr (kVolumetric) {
                const bool entering = si->front_face;
                if (ior(stack.after(shape.interior, entering)) != ior(med))
                    return vis;
                stack.cross(shape.interior, entering, cfg_.strict_media);
            }
            pos = si->position;
            origin = offset_ray_origin(pos, si->geometric_normal, d);
        }
        return vis;
    }

    template <class Deposit>
    void surface_nee(const SurfaceInteraction &si, const Material &mat, const Vec3 &wi_w, const Beta &beta,
                     const MediumStack &stack, double time, RngState &rng, Deposit &deposit) const {
        const double u_select = rng.next_double();
        const Vec2 u{rng.next_double(), rng.next_double()};
        const LightSample ls = scene_.sample_light(si.position, u_select, u);
        if (!(ls.pdf > 0) || ls.value.is_black())
            return;
        const Vec3 wo_w = normalize(ls.position - si.position);
        const BsdfEval ev = mat.eval(si.wi_local, si.frame.to_local(wo_w), Beta::kPolarized);
        if (ev.value.is_black())
            return;
        const Visibility vis = shadow(si.position, &si.geometric_normal, ls.position, stack);
        if (!vis.visible)
            return;
        const double w = ls.delta || !cfg_.bsdf_light_hits ? 1.0 : power_heuristic(ls.pdf, ev.pdf);
        Beta b = beta;
        b.scatter(surface_event(ev.value, ev.dvalue, si.material_id, ev.pol, si.frame, wi_w, wo_w));
        b.scale(vis.transmittance);
        deposit(time + vis.time + ls.time_offset, b, ls.value * (w / ls.pdf), ls.pulse_fwhm, ls.emitter_origin);
    }

    template <class Deposit>
    void medium_nee(const Vec3 &x, const Vec3 &dir, double g, const Beta &beta, const MediumStack &stack, double time,
                    RngState &rng, Deposit &deposit) const {
        const double u_select = rng.next_double();
        const Vec2 u{rng.next_double(), rng.next_double()};
        const LightSample ls = scene_.sample_light(x, u_select, u);
        if (!(ls.pdf > 0) || ls.value.is_black())
            return;
        const Vec3 wo = normalize(ls.position - x);
        const double phase = hg_phase(g, dot(dir, wo));
        const Visibility vis = shadow(x, nullptr, ls.position, stack);
        if (!vis.visible)
            return;
        const double w = ls.delta || !cfg_.bsdf_light_hits ? 1.0 : power_heuristic(ls.pdf, phase);
        Beta b = beta;
        b.depolarize(Rgb(phase), -wo);
        b.scale(vis.transmittance);
        deposit(time + vis.time + ls.time_offset, b, ls.value * (w / ls.pdf), ls.pulse_fwhm, ls.emitter_origin);
    }

    const Scene &scene_;
    KernelConfig cfg_;
    double c_;
};

template <class Beta, class Sink>
void trace_sample(const Scene &scene, const KernelConfig &cfg, int x, int y, int sample, uint64_t seed, Beta beta,
                  Sink &&sink) {
    const Camera &cam = scene.camera();
    const uint64_t pixel = static_cast<uint64_t>(y) * cam.width() + x;
    RngState rng(seed, rng_stream(pixel, static_cast<uint64_t>(sample), RngDomain::Path));
    const Vec2 u{rng.next_double(), rng.next_double()};
    const Ray ray = cam.generate_ray(x, y, u);
    if constexpr (Beta::kPolarized) {
        beta.dir = -ray.direction;
        beta.frame = cam.reference_axis(ray.direction);
    }
    if (scene.description().integrator.kind == IntegratorKind::VolPath)
        PathKernel<Beta, true>(scene, cfg).trace(ray, beta, rng, sink);
    else
        PathKernel<Beta, false>(scene, cfg).trace(ray, beta, rng, sink);
}

void check_renderable(const Scene &scene, const RenderOptions &options) {
    if (scene.description().integrator.kind == IntegratorKind::NlosPath)
        throw std::invalid_argument("nlos_path scenes are rendered with the nlos capture, not the camera renderer");
    if (options.spp <= 0)
        throw std::invalid_argument("spp must be positive");
}

/// Pixels of the render region split into square tiles.
struct TileGrid {
    int x0, y0, x1, y1, nx, ny;

    TileGrid(const Scene &scene, const std::optional<CropWindow> &crop) {
        const Camera &cam = scene.camera();
        x0 = 0, y0 = 0, x1 = cam.width(), y1 = cam.height();
        if (crop) {
            x0 = std::clamp(crop->x0, 0, cam.width());
            y0 = std::clamp(crop->y0, 0, cam.height());
            x1 = std::clamp(crop->x0 + crop->width, x0, cam.width());
            y1 = std::clamp(crop->y0 + crop->height, y0, cam.height());
        }
        nx = (x1 - x0 + kTileSize - 1) / kTileSize;
        ny = (y1 - y0 + kTileSize - 1) / kTileSize;
    }
    int count() const { return nx * ny; }

    template <class Fn>
    void for_pixels(int tile, Fn &&fn) const {
        const int tx = x0 + (tile % nx) * kTileSize, ty = y0 + (tile / nx) * kTileSize;
        for (int y = ty; y < std::min(ty + kTileSize, y1); ++y)
            for (int x = tx; x < std::min(tx + kTileSize, x1); ++x)
                fn(x, y);
    }
};

template <class Beta>
void render_pixel(const Scene &scene, const KernelConfig &cfg, const RenderOptions &options, int x, int y, Beta proto,
                  PixelAccumulator &acc) {
    acc.reset();
    for (int s = 0; s < options.spp; ++s) {
        trace_sample(scene, cfg, x, y, s, options.seed, proto,
                     [&](double t, double fwhm, const double *values, int n) {
                         acc.add(t, std::span<const double>(values, n), fwhm, {x, y});
                     });
    }
    acc.resolve_pulses();
}

}  // namespace

RenderResult render(const Scene &scene, const RenderOptions &options) {
    check_renderable(scene, options);
    const SceneDescription &desc = scene.description();
    const bool polarized = desc.integrator.polarized;
    const int channels = polarized ? 12 : 3;
    RenderResult result;
    result.cube = TransientCube(desc.camera.width, desc.camera.height, channels, desc.film);
    result.cube.speed_of_light = desc.speed_of_light;
    result.cube.exact_total.assign(result.cube.overflow.size(), 0);
    result.steady = SteadyImage(desc.camera.width, desc.camera.height, channels);

    const KernelConfig cfg = make_config(scene, options);
    const TileGrid grid(scene, options.crop);
    std::atomic<int> done{0};
    parallel_for(grid.count(), options.threads, [&](int tile) {
        PixelAccumulator acc(desc.film, channels);
        grid.for_pixels(tile, [&](int x, int y) {
            if (polarized)
                render_pixel(scene, cfg, options, x, y, PolarBeta{}, acc);
            else
                render_pixel(scene, cfg, options, x, y, PlainBeta{}, acc);
            write_pixel(acc, options.spp, x, y, result.cube, &result.steady);
        });
        const int n = ++done;
        if (options.progress)
            options.progress(n, grid.count());
    });
    double overflow = 0;
    const int stride = polarized ? 12 : 3;
    for (size_t i = 0; i < result.cube.overflow.size(); ++i)
        if (i % stride < 3)
            overflow += result.cube.overflow[i];
    result.cube.overflow_energy_total = overflow;
    return result;
}

std::vector<PathDeposit> transient_path_sample(const Scene &scene, int x, int y, int sample,
                                               const RenderOptions &options) {
    check_renderable(scene, options);
    std::vector<PathDeposit> out;
    auto sink = [&](double t, double fwhm, const double *values, int n) {
        out.push_back({t, fwhm, std::vector<double>(values, values + n)});
    };
    const KernelConfig cfg = make_config(scene, options);
    if (scene.description().integrator.polarized)
        trace_sample(scene, cfg, x, y, sample, options.seed, PolarBeta{}, sink);
    else
        trace_sample(scene, cfg, x, y, sample, options.seed, PlainBeta{}, sink);
    return out;
}

GradientCube::GradientCube(int width, int height, const TemporalAxis &axis, int spp)
    : width(width), height(height), axis(axis), spp(spp) {
    const size_t pixels = static_cast<size_t>(width) * height * 3;
    data.assign(pixels * axis.n_bins, 0.0);
    exact_bins.assign(data.size(), 0);
    exact_overflow.assign(pixels, 0);
    exact_steady.assign(pixels, 0);
}

std::vector<double> collapse_time(const GradientCube &cube) {
    const size_t pixels = cube.exact_overflow.size();
    std::vector<Fixed> sum(cube.exact_overflow);
    for (int t = 0; t < cube.axis.n_bins; ++t)
        for (size_t i = 0; i < pixels; ++i)
            sum[i] += cube.exact_bins[t * pixels + i];
    std::vector<double> out(pixels);
    for (size_t i = 0; i < pixels; ++i)
        out[i] = to_double(sum[i]) / cube.spp;
    return out;
}

std::vector<double> steady_tally(const GradientCube &cube) {
    std::vector<double> out(cube.exact_steady.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = to_double(cube.exact_steady[i]) / cube.spp;
    return out;
}

GradientRender render_gradients(const Scene &scene, std::span<const GradientParam> params,
                                const RenderOptions &options) {
    check_renderable(scene, options);
    const SceneDescription &desc = scene.description();
    if (desc.integrator.polarized)
        throw std::invalid_argument("gradients are not available for polarized rendering");
    if (params.size() > static_cast<size_t>(kMaxGradientParams))
        throw std::invalid_argument(fmt::format("at most {} gradient parameters", kMaxGradientParams));
    for (const GradientParam &p : params)
        if (p.material < 0 || p.material >= static_cast<int>(scene.materials().size()) ||
            !scene.materials()[p.material].has_albedo())
            throw std::invalid_argument("gradient parameter must reference a material with an albedo");

    const int width = desc.camera.width, height = desc.camera.height;
    GradientRender out;
    out.primal = GradientCube(width, height, desc.film, options.spp);
    out.gradients.assign(params.size(), out.primal);
    const int channels = 3 * (1 + static_cast<int>(params.size()));

    const KernelConfig cfg = make_config(scene, options);
    const TileGrid grid(scene, options.crop);
    GradBeta proto;
    proto.params = params;
    parallel_for(grid.count(), options.threads, [&](int tile) {
        PixelAccumulator acc(desc.film, channels);
        grid.for_pixels(tile, [&](int x, int y) {
            render_pixel(scene, cfg, options, x, y, proto, acc);
            for (int k = 0; k <= static_cast<int>(params.size()); ++k) {
                GradientCube &cube = k == 0 ? out.primal : out.gradients[k - 1];
                for (int c = 0; c < 3; ++c) {
                    const int ch = 3 * k + c;
                    const size_t p = (static_cast<size_t>(y) * width + x) * 3 + c;
                    cube.exact_overflow[p] = acc.overflow(ch);
                    cube.exact_steady[p] = acc.steady(ch);
                    for (int t = 0; t < cube.axis.n_bins; ++t) {
                        const size_t i = cube.index(t, y, x, c);
                        cube.exact_bins[i] = acc.bin(t, ch);
                        cube.data[i] = to_double(acc.bin(t, ch)) / options.spp;
                    }
                }
            }
        });
    });
    return out;
}

}  // namespace mitr
