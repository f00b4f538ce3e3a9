// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/differentiable.h>
#include <mitr/film.h>
#include <mitr/integrator.h>
#include <mitr/nlos.h>
#include <mitr/parallel.h>
#include <mitr/polarization_maps.h>
#include <mitr/render_scene.h>
#include <mitr/scene.h>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/os.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#ifndef MITR_VERSION
#define MITR_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace mitr;

namespace {

/// Bad command-line values that CLI11 cannot check by itself.
class UsageError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Common {
    int spp = 64;
    uint64_t seed = 0;
    int threads = 0;
    bool quiet = false;
};

void add_common(CLI::App *cmd, Common &c, bool with_spp) {
    if (with_spp)
        cmd->add_option("--spp", c.spp, "Samples per pixel (or per histogram)")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--threads", c.threads, "Worker threads, 0 = MITR_THREADS or all cores")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--quiet", c.quiet, "No progress output");
}

void stamp(const std::string &command, const Common &c, bool with_spp) {
    fmt::print("stamp: version={} command={} seed={} spp={} threads={}\n", MITR_VERSION, command, c.seed,
               with_spp ? c.spp : 0, resolve_thread_count(c.threads));
    std::fflush(stdout);
}

std::function<void(int, int)> progress_printer(const char *label, bool quiet) {
    if (quiet)
        return {};
    auto mutex = std::make_shared<std::mutex>();
    return [label, mutex](int done, int total) {
        std::lock_guard lock(*mutex);
        fmt::print(stderr, "\r{}: {}/{}", label, done, total);
        if (done == total)
            fmt::print(stderr, "\n");
        std::fflush(stderr);
    };
}

std::string read_text(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

SceneDescription load_scene(const std::string &path, const std::string &builtin) {
    if (!builtin.empty())
        return builtin_scene(builtin);
    return parse_scene(read_text(path));
}

fs::path sibling(const fs::path &out, const std::string &suffix) {
    return out.parent_path() / (out.stem().string() + suffix);
}

ExposureMode parse_exposure(const std::string &s) { return s == "key" ? ExposureMode::Key : ExposureMode::Max; }

/// "name", "name:rgb", "name:r" ... with an optional "=value".
ParamHandle parse_param(const std::string &spec, bool want_value) {
    ParamHandle p;
    std::string head = spec;
    if (const auto eq = spec.find('='); eq != std::string::npos) {
        head = spec.substr(0, eq);
        try {
            size_t used = 0;
            p.value = std::stod(spec.substr(eq + 1), &used);
            if (used != spec.size() - eq - 1)
                throw std::invalid_argument("trailing characters");
        } catch (const std::exception &) {
            throw UsageError("bad parameter value in '" + spec + "'");
        }
    } else if (want_value) {
        throw UsageError("parameter '" + spec + "' needs an initial value (NAME[:rgb]=VALUE)");
    }
    p.material = head;
    if (const auto colon = head.find(':'); colon != std::string::npos) {
        p.material = head.substr(0, colon);
        const std::string channels = head.substr(colon + 1);
        p.mask = Rgb(0);
        if (channels.empty())
            throw UsageError("empty channel mask in '" + spec + "'");
        for (char ch : channels) {
            const size_t i = ch == 'r' ? 0 : ch == 'g' ? 1 : ch == 'b' ? 2 : 3;
            if (i == 3)
                throw UsageError("bad channel '" + std::string(1, ch) + "' in '" + spec + "'");
            p.mask[i] = 1;
        }
    }
    if (p.material.empty())
        throw UsageError("empty material name in '" + spec + "'");
    return p;
}

/// Current albedo of the masked channels (the first one) of a material.
double current_albedo(const SceneDescription &scene, const ParamHandle &p) {
    const int m = scene.find_material(p.material);
    if (m < 0)
        throw UsageError("unknown material '" + p.material + "'");
    const auto &model = scene.materials[m].model;
    const Rgb *albedo = nullptr;
    if (const auto *d = std::get_if<DiffuseMaterial>(&model))
        albedo = &d->albedo;
    else if (const auto *r = std::get_if<RoughPlasticMaterial>(&model))
        albedo = &r->albedo;
    if (!albedo)
        throw UsageError("material '" + p.material + "' has no albedo");
    for (int c = 0; c < 3; ++c)
        if (p.mask[c] != 0)
            return (*albedo)[c];
    return (*albedo)[0];
}

TransientCube to_transient(const GradientCube &g, double speed_of_light) {
    TransientCube cube(g.width, g.height, 3, g.axis);
    cube.speed_of_light = speed_of_light;
    for (size_t i = 0; i < g.data.size(); ++i)
        cube.data[i] = static_cast<float>(g.data[i]);
    std::fill(cube.weight.begin(), cube.weight.end(), static_cast<float>(g.spp));
    return cube;
}

std::vector<double> parse_list(const std::string &s, size_t count, const char *what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument("trailing");
        } catch (const std::exception &) {
            throw UsageError(fmt::format("bad number '{}' in {}", item, what));
        }
    }
    if (v.size() != count)
        throw UsageError(fmt::format("{} needs {} comma-separated numbers", what, count));
    return v;
}

// --- render -------------------------------------------------------------------

struct RenderArgs {
    Common common;
    std::string scene, builtin, out;
    bool no_nee = false, strict_media = false, check_time = false;
};

int run_render(const RenderArgs &a) {
    stamp("render", a.common, true);
    const SceneDescription desc = load_scene(a.scene, a.builtin);
    const Scene scene(desc);
    RenderOptions opts;
    opts.spp = a.common.spp;
    opts.seed = a.common.seed;
    opts.threads = a.common.threads;
    opts.nee = !a.no_nee;
    opts.strict_media = a.strict_media;
    opts.check_time_bounds = a.check_time;
    opts.progress = progress_printer("render", a.common.quiet);
    const RenderResult r = render(scene, opts);
    const fs::path out(a.out);
    write_tcube(r.cube, out);
    write_ppm(tonemap_steady(r.steady, 2.2, ExposureMode::Max), sibling(out, "_steady.ppm"));
    if (desc.film.gate) {
        const SteadyImage gated = time_gate(r.cube, desc.film.gate->open, desc.film.gate->close);
        write_ppm(tonemap_steady(gated, 2.2, ExposureMode::Max), sibling(out, "_gated.ppm"));
    }
    if (r.cube.overflow_energy_total > 0)
        fmt::print(stderr, "render: out-of-axis energy {:.6g}\n", r.cube.overflow_energy_total);
    return 0;
}

// --- gate / peak / export -------------------------------------------------------

struct GateArgs {
    Common common;
    std::string cube, out, exposure = "max";
    double open = 0, close = 0, gamma = 2.2;
};

int run_gate(const GateArgs &a) {
    stamp("gate", a.common, false);
    if (!(a.close > a.open))
        throw UsageError("--close must be greater than --open");
    const TransientCube cube = read_tcube(a.cube);
    SteadyImage gated;
    try {
        gated = time_gate(cube, a.open, a.close);
    } catch (const FilmError &e) {
        throw UsageError(e.what());
    }
    write_ppm(tonemap_steady(gated, a.gamma, parse_exposure(a.exposure)), a.out);
    return 0;
}

struct PeakArgs {
    Common common;
    std::string cube, out, raw;
};

int run_peak(const PeakArgs &a) {
    stamp("peak", a.common, false);
    const TransientCube cube = read_tcube(a.cube);
    const PeakTimeMap map = peak_time_map(cube);
    Image8 img{map.width, map.height, std::vector<uint8_t>(static_cast<size_t>(map.width) * map.height * 3, 0)};
    const double span = cube.axis.t_end() - cube.axis.t_start;
    for (size_t i = 0; i < map.time.size(); ++i) {
        if (!map.valid[i])
            continue;
        const double u = std::clamp((map.time[i] - cube.axis.t_start) / span, 0.0, 1.0);
        const auto v = static_cast<uint8_t>(std::lround(255 * u));
        img.rgb[3 * i] = img.rgb[3 * i + 1] = img.rgb[3 * i + 2] = v;
    }
    write_ppm(img, a.out);
    if (!a.raw.empty()) {
        auto csv = fmt::output_file(a.raw);
        csv.print("x,y,time,magnitude,valid\n");
        for (int y = 0; y < map.height; ++y)
            for (int x = 0; x < map.width; ++x) {
                const size_t i = static_cast<size_t>(y) * map.width + x;
                csv.print("{},{},{:.17g},{:.17g},{}\n", x, y, map.time[i], map.magnitude[i], int(map.valid[i]));
            }
    }
    return 0;
}

struct ExportArgs {
    Common common;
    std::string cube, frames, steady, exposure = "max";
    bool tonemap = false, aolp = false, dop = false, aolp_halved = false;
    double gamma = 2.2;
};

int run_export(const ExportArgs &a) {
    stamp("export", a.common, false);
    const TransientCube cube = read_tcube(a.cube);
    const double gamma = a.tonemap ? a.gamma : 1.0;
    const ExposureMode mode = a.tonemap ? parse_exposure(a.exposure) : ExposureMode::Unit;
    std::vector<Image8> frames;
    if (a.aolp) {
        frames = colorize_aolp(aolp_map(cube, a.aolp_halved), a.aolp_halved);
    } else if (a.dop) {
        const PolarizationMap map = dop_map(cube);
        if (map.violations > 0)
            fmt::print(stderr, "export: {} DoP values above 1 were clamped\n", map.violations);
        frames = colorize_dop(map);
    } else {
        frames = tonemap_transient(cube, gamma, mode);
    }
    fs::create_directories(a.frames);
    write_frames(frames, a.frames);
    if (!a.steady.empty())
        write_ppm(tonemap_steady(steady_collapse(cube), gamma, mode), a.steady);
    return 0;
}

// --- NLOS -----------------------------------------------------------------------

struct CaptureArgs {
    Common common;
    std::string rig, builtin, out, irf;
    double jitter = 0, photon_scale = 1, dark_rate = 0;
    std::optional<uint64_t> noise_seed;
};

int run_capture(const CaptureArgs &a, bool jitter_set, bool scale_set, bool dark_set) {
    stamp("nlos-capture", a.common, true);
    const SceneDescription rig = load_scene(a.rig, a.builtin);
    if (!rig.nlos)
        throw UsageError("scene has no relay-wall section");
    CaptureOptions opts;
    opts.spp = a.common.spp;
    opts.seed = a.common.seed;
    opts.threads = a.common.threads;
    opts.progress = progress_printer("nlos-capture", a.common.quiet);
    NlosCapture cap = capture(rig, opts);
    if (jitter_set || !a.irf.empty() || scale_set || dark_set) {
        NoiseModel model;
        model.jitter_sigma = a.jitter;
        if (!a.irf.empty()) {
            std::string warning;
            model.irf = read_irf(a.irf, &warning);
            if (!warning.empty())
                fmt::print(stderr, "nlos-capture: {}\n", warning);
        }
        model.photon_scale = a.photon_scale;
        model.dark_count_rate = a.dark_rate;
        cap = apply_noise(cap, model, a.noise_seed.value_or(a.common.seed));
    }
    write_capture(cap, a.out);
    return 0;
}

struct ReconstructArgs {
    Common common;
    std::string capture, volume, out, filter;
};

int run_reconstruct(const ReconstructArgs &a) {
    stamp("nlos-reconstruct", a.common, false);
    if (!a.filter.empty() && a.filter != "laplacian")
        throw UsageError("unknown filter '" + a.filter + "'");
    const std::vector<double> v = parse_list(a.volume, 7, "--volume");
    Volume vol;
    vol.origin = {v[0], v[1], v[2]};
    vol.voxel_size = v[3];
    for (int i = 0; i < 3; ++i) {
        if (v[4 + i] < 1 || v[4 + i] != std::floor(v[4 + i]))
            throw UsageError("--volume dimensions must be positive integers");
        vol.dims[i] = static_cast<int>(v[4 + i]);
    }
    if (!(vol.voxel_size > 0))
        throw UsageError("--volume voxel size must be positive");
    const NlosCapture cap = read_capture(a.capture);
    TransientCube field;
    try {
        field = backproject(cap, vol, a.filter == "laplacian");
    } catch (const NlosError &e) {
        throw UsageError(e.what());
    }
    write_tcube(field, a.out);
    return 0;
}

// --- differentiable ---------------------------------------------------------------

struct DiffArgs {
    Common common;
    std::string scene, builtin, param, mode = "forward", target, out;
    double h = 1e-3;
};

RenderOptions diff_options(const Common &c) {
    RenderOptions opts;
    opts.spp = c.spp;
    opts.seed = c.seed;
    opts.threads = c.threads;
    return opts;
}

std::vector<double> read_target(const std::string &path, const GradientCube &like) {
    const TransientCube t = read_tcube(path);
    if (t.channels != 3 || t.width != like.width || t.height != like.height || t.axis.n_bins != like.axis.n_bins)
        throw UsageError("target cube does not match the scene's film");
    return cube_values(t);
}

int run_diff(const DiffArgs &a) {
    stamp("diff", a.common, true);
    const SceneDescription desc = load_scene(a.scene, a.builtin);
    ParamHandle p = parse_param(a.param, false);
    p.value = current_albedo(desc, p);
    const RenderOptions opts = diff_options(a.common);
    const std::span<const ParamHandle> one(&p, 1);
    if (a.mode == "forward" || a.mode == "fd") {
        const GradientCube g =
            a.mode == "forward" ? forward_grad(desc, p, opts) : finite_difference_oracle(desc, p, a.h, opts);
        write_tcube(to_transient(g, desc.speed_of_light), a.out);
        return 0;
    }
    if (a.target.empty())
        throw UsageError("--mode backward needs --target");
    const GradientCube y = render_primal(desc, one, opts);
    const LossEval loss = l2_loss(y, read_target(a.target, y));
    const std::vector<double> grad = backward_grad(desc, loss.adjoint, one, opts);
    auto csv = fmt::output_file(a.out);
    csv.print("param,value,loss,gradient\n{},{:.17g},{:.17g},{:.17g}\n", a.param, p.value, loss.loss, grad[0]);
    return 0;
}

struct OptimizeArgs {
    Common common;
    std::string scene, builtin, target, out, snapshot_dir;
    std::vector<std::string> params;
    double lr = 0.5;
    int steps = 50, snapshot_every = 0;
    bool reseed = false;
};

int run_optimize(const OptimizeArgs &a) {
    stamp("optimize", a.common, true);
    if (a.snapshot_every > 0 && a.snapshot_dir.empty())
        throw UsageError("--snapshot-every needs --snapshot-dir");
    const SceneDescription desc = load_scene(a.scene, a.builtin);
    std::vector<ParamHandle> params;
    for (const auto &s : a.params) {
        params.push_back(parse_param(s, true));
        current_albedo(desc, params.back());
    }
    if (params.size() > static_cast<size_t>(kMaxGradientParams))
        throw UsageError(fmt::format("at most {} parameters", kMaxGradientParams));
    const TransientCube target = read_tcube(a.target);
    if (target.channels != 3 || target.width != desc.camera.width || target.height != desc.camera.height ||
        target.axis.n_bins != desc.film.n_bins)
        throw UsageError("target cube does not match the scene's film");
    const std::vector<double> y_target = cube_values(target);

    OptimizeOptions opts;
    opts.learning_rate = a.lr;
    opts.steps = a.steps;
    opts.render = diff_options(a.common);
    opts.reseed = a.reseed;
    if (!a.snapshot_dir.empty())
        fs::create_directories(a.snapshot_dir);
    opts.on_step = [&](const OptimizeStep &s, const GradientCube &y) {
        if (!a.common.quiet) {
            fmt::print(stderr, "optimize: step {} loss {:.6g}\n", s.step, s.loss);
            std::fflush(stderr);
        }
        if (a.snapshot_every > 0 && s.step % a.snapshot_every == 0)
            write_tcube(to_transient(y, desc.speed_of_light),
                        fs::path(a.snapshot_dir) / fmt::format("step_{:04d}.tcube", s.step));
    };
    const OptimizeResult r = optimize(desc, y_target, params, opts);

    auto csv = fmt::output_file(a.out);
    csv.print("step,loss");
    for (const auto &p : params)
        csv.print(",{}", p.material);
    csv.print("\n");
    for (const auto &s : r.trajectory) {
        csv.print("{},{:.17g}", s.step, s.loss);
        for (double v : s.values)
            csv.print(",{:.17g}", v);
        csv.print("\n");
    }
    csv.print("final,");
    for (double v : r.final_values)
        csv.print(",{:.17g}", v);
    csv.print("\n");
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"mitr: transient light transport renderer"};
    app.set_version_flag("--version", MITR_VERSION);
    app.require_subcommand(1);

    std::string builtin_names;
    for (const char *n : kBuiltinScenes)
        builtin_names += std::string(builtin_names.empty() ? "" : ", ") + n;
    const auto builtin_check = CLI::IsMember(std::vector<std::string>(std::begin(kBuiltinScenes), std::end(kBuiltinScenes)));
    const auto exposure_check = CLI::IsMember({"max", "key"});

    RenderArgs ra;
    auto *render_cmd = app.add_subcommand("render", "Render a transient cube");
    add_common(render_cmd, ra.common, true);
    {
        auto *s = render_cmd->add_option("--scene", ra.scene, "Scene file")->check(CLI::ExistingFile);
        auto *b = render_cmd->add_option("--builtin", ra.builtin, "Built-in scene: " + builtin_names)->check(builtin_check);
        s->excludes(b);
        render_cmd->add_option("--out", ra.out, "Output .tcube")->required();
        render_cmd->add_flag("--no-nee", ra.no_nee, "Disable next-event estimation");
        render_cmd->add_flag("--strict-media", ra.strict_media, "Fail on inconsistent medium boundaries");
        render_cmd->add_flag("--check-time", ra.check_time, "Verify arrival-time lower bounds");
    }

    GateArgs ga;
    auto *gate_cmd = app.add_subcommand("gate", "Time-gated image from a cube");
    add_common(gate_cmd, ga.common, false);
    gate_cmd->add_option("--cube", ga.cube)->required()->check(CLI::ExistingFile);
    gate_cmd->add_option("--open", ga.open)->required();
    gate_cmd->add_option("--close", ga.close)->required();
    gate_cmd->add_option("--out", ga.out)->required();
    gate_cmd->add_option("--gamma", ga.gamma)->check(CLI::PositiveNumber);
    gate_cmd->add_option("--exposure", ga.exposure)->check(exposure_check);

    PeakArgs pa;
    auto *peak_cmd = app.add_subcommand("peak", "Per-pixel peak arrival time");
    add_common(peak_cmd, pa.common, false);
    peak_cmd->add_option("--cube", pa.cube)->required()->check(CLI::ExistingFile);
    peak_cmd->add_option("--out", pa.out)->required();
    peak_cmd->add_option("--raw", pa.raw, "Also write x,y,time,magnitude,valid as CSV");

    ExportArgs ea;
    auto *export_cmd = app.add_subcommand("export", "Write a cube as an image sequence");
    add_common(export_cmd, ea.common, false);
    export_cmd->add_option("--cube", ea.cube)->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--frames", ea.frames, "Output directory")->required();
    export_cmd->add_flag("--tonemap", ea.tonemap, "Global exposure and gamma");
    export_cmd->add_option("--gamma", ea.gamma)->check(CLI::PositiveNumber);
    export_cmd->add_option("--exposure", ea.exposure)->check(exposure_check);
    {
        auto *ao = export_cmd->add_flag("--aolp", ea.aolp, "Angle of linear polarization frames");
        auto *dp = export_cmd->add_flag("--dop", ea.dop, "Degree of polarization frames");
        ao->excludes(dp);
        export_cmd->add_flag("--aolp-halved", ea.aolp_halved, "Use half the Stokes angle for AoLP");
    }
    export_cmd->add_option("--steady", ea.steady, "Also write the collapsed image");

    CaptureArgs ca;
    auto *cap_cmd = app.add_subcommand("nlos-capture", "Simulate a relay-wall capture");
    add_common(cap_cmd, ca.common, true);
    CLI::Option *jitter_opt = nullptr, *scale_opt = nullptr, *dark_opt = nullptr;
    {
        auto *r = cap_cmd->add_option("--rig", ca.rig, "Rig scene file")->check(CLI::ExistingFile);
        auto *b = cap_cmd->add_option("--builtin", ca.builtin, "Built-in rig: nlos-point, nlos-two-patch")
                      ->check(CLI::IsMember({"nlos-point", "nlos-two-patch"}));
        r->excludes(b);
        cap_cmd->add_option("--out", ca.out)->required();
        jitter_opt = cap_cmd->add_option("--noise-jitter", ca.jitter, "Gaussian jitter sigma (time units)")
                         ->check(CLI::NonNegativeNumber);
        auto *irf = cap_cmd->add_option("--noise-irf", ca.irf, "IRF kernel file")->check(CLI::ExistingFile);
        jitter_opt->excludes(irf);
        scale_opt = cap_cmd->add_option("--photon-scale", ca.photon_scale)->check(CLI::NonNegativeNumber);
        dark_opt = cap_cmd->add_option("--dark-rate", ca.dark_rate)->check(CLI::NonNegativeNumber);
        cap_cmd->add_option("--noise-seed", ca.noise_seed, "Seed of the noise model (default: --seed)");
    }

    ReconstructArgs rca;
    auto *rec_cmd = app.add_subcommand("nlos-reconstruct", "Backproject a capture into a volume");
    add_common(rec_cmd, rca.common, false);
    rec_cmd->add_option("--capture", rca.capture)->required()->check(CLI::ExistingFile);
    rec_cmd->add_option("--volume", rca.volume, "ox,oy,oz,voxel,nx,ny,nz")->required();
    rec_cmd->add_option("--out", rca.out)->required();
    rec_cmd->add_option("--filter", rca.filter)->check(CLI::IsMember({"laplacian"}));

    DiffArgs da;
    auto *diff_cmd = app.add_subcommand("diff", "Albedo derivative of a render");
    diff_cmd->set_help_flag("--help", "Print this help message and exit");
    add_common(diff_cmd, da.common, true);
    {
        auto *s = diff_cmd->add_option("--scene", da.scene)->check(CLI::ExistingFile);
        auto *b = diff_cmd->add_option("--builtin", da.builtin)->check(builtin_check);
        s->excludes(b);
        diff_cmd->add_option("--param", da.param, "MATERIAL[:rgb]")->required();
        diff_cmd->add_option("--mode", da.mode)->check(CLI::IsMember({"forward", "fd", "backward"}));
        diff_cmd->add_option("--h", da.h, "Finite-difference step")->check(CLI::PositiveNumber);
        diff_cmd->add_option("--target", da.target, "Target cube for --mode backward")->check(CLI::ExistingFile);
        diff_cmd->add_option("--out", da.out)->required();
    }

    OptimizeArgs oa;
    auto *opt_cmd = app.add_subcommand("optimize", "Recover albedos from a target cube");
    add_common(opt_cmd, oa.common, true);
    {
        auto *s = opt_cmd->add_option("--scene", oa.scene)->check(CLI::ExistingFile);
        auto *b = opt_cmd->add_option("--builtin", oa.builtin)->check(builtin_check);
        s->excludes(b);
        opt_cmd->add_option("--target", oa.target)->required()->check(CLI::ExistingFile);
        opt_cmd->add_option("--param", oa.params, "MATERIAL[:rgb]=INITIAL")->required();
        opt_cmd->add_option("--lr", oa.lr)->check(CLI::PositiveNumber);
        opt_cmd->add_option("--steps", oa.steps)->check(CLI::NonNegativeNumber);
        opt_cmd->add_flag("--reseed", oa.reseed, "New seed per step");
        opt_cmd->add_option("--out", oa.out, "Trajectory CSV")->required();
        opt_cmd->add_option("--snapshot-every", oa.snapshot_every)->check(CLI::NonNegativeNumber);
        opt_cmd->add_option("--snapshot-dir", oa.snapshot_dir);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }

    const auto need_source = [](const std::string &a, const std::string &b, const char *flag) {
        if (a.empty() && b.empty())
            throw UsageError(fmt::format("one of {} or --builtin is required", flag));
    };

    try {
        if (render_cmd->parsed()) {
            need_source(ra.scene, ra.builtin, "--scene");
            return run_render(ra);
        }
        if (gate_cmd->parsed())
            return run_gate(ga);
        if (peak_cmd->parsed())
            return run_peak(pa);
        if (export_cmd->parsed())
            return run_export(ea);
        if (cap_cmd->parsed()) {
            need_source(ca.rig, ca.builtin, "--rig");
            return run_capture(ca, jitter_opt->count() > 0, scale_opt->count() > 0, dark_opt->count() > 0);
        }
        if (rec_cmd->parsed())
            return run_reconstruct(rca);
        if (diff_cmd->parsed()) {
            need_source(da.scene, da.builtin, "--scene");
            return run_diff(da);
        }
        if (opt_cmd->parsed()) {
            need_source(oa.scene, oa.builtin, "--scene");
            return run_optimize(oa);
        }
    } catch (const SceneError &e) {
        fmt::print(stderr, "{}\n", e.what());
        return 2;
    } catch (const std::invalid_argument &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const std::exception &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 1;
}
