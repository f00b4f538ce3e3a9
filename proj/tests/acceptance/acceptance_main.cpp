// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit when
// any criterion fails.

#include <mitr/differentiable.h>
#include <mitr/film.h>
#include <mitr/integrator.h>
#include <mitr/nlos.h>
#include <mitr/polarization.h>
#include <mitr/polarization_maps.h>
#include <mitr/rng.h>
#include <mitr/scene.h>

#include <fmt/format.h>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <thread>

#include "test_scenes.h"

using namespace mitr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Time limits quoted for a 4-core machine are scaled by 4 / min(4, cores).
double four_core_scale() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return 4.0 / std::min(4u, hw);
}

std::string timing(double elapsed, double limit) { return fmt::format("{:.2f}s/{:.0f}s", elapsed, limit); }

// 1 -----------------------------------------------------------------------------

Outcome energy_closure() {
    SceneDescription s = cornell_box();
    s.camera.width = s.camera.height = 64;
    RenderOptions opts;
    opts.spp = 256;
    opts.seed = 1;
    const auto t0 = Clock::now();
    const RenderResult r = render(Scene(s), opts);
    const double elapsed = seconds_since(t0);
    const SteadyImage collapsed = steady_collapse(r.cube);
    size_t mismatched = 0;
    for (size_t i = 0; i < collapsed.data.size(); ++i)
        mismatched += collapsed.data[i] != r.steady.data[i];
    const double limit = 30 * four_core_scale();
    return {mismatched == 0 && elapsed < limit,
            fmt::format("{} of {} values differ, overflow total {:.3g}, {}", mismatched, collapsed.data.size(),
                        r.cube.overflow_energy_total, timing(elapsed, limit))};
}

// 2 -----------------------------------------------------------------------------

Outcome tof_oracle() {
    std::mt19937_64 gen(2026);
    std::uniform_real_distribution<double> dist(0.3, 4.0);
    std::vector<double> ds{1.0};
    for (int i = 0; i < 10; ++i)
        ds.push_back(dist(gen));
    const auto t0 = Clock::now();
    int failures = 0;
    for (double d : ds) {
        const SceneDescription s = testing::tof_plane_scene(d);
        RenderOptions opts;
        opts.spp = 16;
        const RenderResult r = render(Scene(s), opts);
        const int expected = *bin_index(s.film, 2 * d);
        double in_bin = 0, elsewhere = 0;
        for (int t = 0; t < s.film.n_bins; ++t)
            for (int c = 0; c < 3; ++c)
                (t == expected ? in_bin : elsewhere) += r.cube.at(t, 0, 0, c);
        if (!(in_bin > 0) || elsewhere != 0 || r.cube.overflow_energy_total != 0)
            ++failures;
    }
    const double elapsed = seconds_since(t0);
    return {failures == 0 && elapsed < 5,
            fmt::format("{} failures over {} distances, {}", failures, ds.size(), timing(elapsed, 5))};
}

// 3 -----------------------------------------------------------------------------

/// Smallest and largest nonzero bin over all pixels.
std::pair<int, int> occupied_bins(const TransientCube &cube) {
    int lo = cube.axis.n_bins, hi = -1;
    for (int t = 0; t < cube.axis.n_bins; ++t)
        for (int y = 0; y < cube.height; ++y)
            for (int x = 0; x < cube.width; ++x)
                if (testing::cube_luminance(cube, t, y, x) > 0) {
                    lo = std::min(lo, t);
                    hi = std::max(hi, t);
                }
    return {lo, hi};
}

Outcome unwarp_flatness() {
    const auto t0 = Clock::now();
    SceneDescription s = testing::emissive_wall_scene(1.0, 16);
    RenderOptions opts;
    opts.spp = 4;
    const RenderResult r = render(Scene(s), opts);
    const auto [lo, hi] = occupied_bins(r.cube);
    int dark_pixels = 0;
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            dark_pixels += !(r.steady.at(y, x, 1) > 0);
    // Without unwarping the same wall spreads over several bins.
    s.film.unwarp = false;
    s.film.t_start = 0;
    const RenderResult warped = render(Scene(s), opts);
    const auto [wlo, whi] = occupied_bins(warped.cube);
    const double elapsed = seconds_since(t0);
    const bool ok = hi >= 0 && hi - lo == 0 && dark_pixels == 0 && r.cube.overflow_energy_total == 0 &&
                    whi - wlo > 0 && elapsed < 5;
    return {ok, fmt::format("unwarped bins [{}, {}], warped bins [{}, {}], {}", lo, hi, wlo, whi,
                            timing(elapsed, 5))};
}

// 4 -----------------------------------------------------------------------------

/// Number of values violating S0 >= |S1..S3| - 1e-6 * S0 over every bin,
/// pixel and color. `worst` receives the largest |S1..S3| - S0.
int count_unphysical(const TransientCube &cube, double *worst) {
    int bad = 0;
    for (int t = 0; t < cube.axis.n_bins; ++t)
        for (int y = 0; y < cube.height; ++y)
            for (int x = 0; x < cube.width; ++x)
                for (int c = 0; c < 3; ++c) {
                    const double s0 = cube.at(t, y, x, c);
                    const double s1 = cube.at(t, y, x, 3 + c), s2 = cube.at(t, y, x, 6 + c),
                                 s3 = cube.at(t, y, x, 9 + c);
                    const double excess = std::sqrt(s1 * s1 + s2 * s2 + s3 * s3) - s0;
                    *worst = std::max(*worst, excess);
                    bad += excess > 1e-6 * std::abs(s0);
                }
    return bad;
}

Outcome polarization_malus() {
    const auto t0 = Clock::now();
    double worst = -1e300;
    int unphysical = 0;
    {
        const SceneDescription s = testing::polarized_cornell_scene(32);
        RenderOptions opts;
        opts.spp = 64;
        unphysical += count_unphysical(render(Scene(s), opts).cube, &worst);
    }
    double max_z = 0;
    int bad_peak = 0;
    for (double theta : {0.0, kPi / 6, kPi / 4, kPi / 3, kPi / 2}) {
        const SceneDescription s = polar_malus_scene(theta);
        RenderOptions opts;
        opts.spp = 1024;
        const RenderResult r = render(Scene(s), opts);
        unphysical += count_unphysical(r.cube, &worst);
        // Per-pixel transmitted S0 (green) as independent estimates.
        std::vector<double> v;
        for (int y = 0; y < s.camera.height; ++y)
            for (int x = 0; x < s.camera.width; ++x)
                v.push_back(r.steady.at(y, x, 1));
        double mean = 0, var = 0;
        for (double x : v)
            mean += x;
        mean /= v.size();
        for (double x : v)
            var += (x - mean) * (x - mean);
        var /= v.size() - 1;
        const double expected = 0.5 * std::cos(theta) * std::cos(theta);
        // Values are stored as float32; rounding at the scale of the light
        // leaving the first sheet (0.5) bounds the attainable agreement when
        // the estimator has no sampling variance.
        const double sigma = std::sqrt(var / v.size() + std::pow(std::ldexp(0.5, -24), 2));
        const double z = sigma > 0 ? std::abs(mean - expected) / sigma : (mean == expected ? 0 : 1e300);
        max_z = std::max(max_z, z);
        if (expected > 1e-12) {
            // The light arrives in the bin of the sheet-to-camera distance.
            const int expected_bin = *bin_index(s.film, 3.0);
            const PeakTimeMap peaks = peak_time_map(r.cube);
            const int center = (s.camera.height / 2) * s.camera.width + s.camera.width / 2;
            bad_peak += *bin_index(s.film, peaks.time[center]) != expected_bin;
        }
    }
    const double elapsed = seconds_since(t0);
    return {unphysical == 0 && max_z <= 3 && bad_peak == 0 && elapsed < 60,
            fmt::format("{} unphysical values (worst excess {:.3g}), max |z| {:.2f} over 5 angles, {}", unphysical,
                        worst, max_z, timing(elapsed, 60))};
}

// 5 -----------------------------------------------------------------------------

Outcome brewster_dop() {
    const auto t0 = Clock::now();
    const double theta = std::atan(1.5);
    const Stokes reflected = mueller_fresnel_reflection(1.5, std::cos(theta)) * Stokes{1, 0, 0, 0};
    const double closed_form = dop(reflected);
    // The same geometry through the renderer: a single pixel whose footprint
    // stays within 1e-5 rad of the Brewster angle.
    SceneDescription s = testing::brewster_scene();
    s.camera.width = s.camera.height = 1;
    s.camera.fov_degrees = 1e-3;
    RenderOptions opts;
    opts.spp = 1024;  // the reflected branch is chosen with probability ~R
    const RenderResult r = render(Scene(s), opts);
    const PeakTimeMap peaks = peak_time_map(r.cube);
    const Stokes st = luminance_stokes(r.cube, *bin_index(s.film, peaks.time[0]), 0, 0);
    const double rendered = dop(st);
    const double elapsed = seconds_since(t0);
    return {std::abs(closed_form - 1) <= 1e-6 && std::abs(rendered - 1) <= 1e-6 && st[0] > 0 && elapsed < 1,
            fmt::format("closed-form DoP 1{:+.2e}, rendered DoP 1{:+.2e}, {}", closed_form - 1, rendered - 1,
                        timing(elapsed, 1))};
}

// 6 -----------------------------------------------------------------------------

double relative_l2(const std::vector<double> &a, const std::vector<double> &b) {
    double num = 0, den = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

Outcome gradient_fidelity() {
    const auto t0 = Clock::now();
    const SceneDescription s = testing::cornell_floor_scene(32);
    RenderOptions opts;
    opts.spp = 64;
    opts.seed = 6;
    const double h = 1e-3;
    const std::vector<ParamHandle> params{{"floor", Rgb(1.0), 0.73}, {"red", Rgb(1, 0, 0), 0.63}};

    double forward_err = 0;
    std::vector<GradientCube> fds;
    for (const ParamHandle &p : params) {
        const GradientCube fd = finite_difference_oracle(s, p, h, opts);
        forward_err = std::max(forward_err, relative_l2(forward_grad(s, p, opts).data, fd.data));
        fds.push_back(fd);
    }
    // Backward: gradient of an L2 loss against a render with other albedos.
    std::vector<ParamHandle> other = params;
    other[0].value = 0.5;
    other[1].value = 0.3;
    const GradientCube target = render_primal(s, other, opts);
    const LossEval loss = l2_loss(render_primal(s, params, opts), target.data);
    const std::vector<double> back = backward_grad(s, loss.adjoint, params, opts);
    double backward_err = 0;
    for (size_t k = 0; k < params.size(); ++k) {
        const double expected = inner_product(loss.adjoint, fds[k]);
        backward_err = std::max(backward_err, std::abs(back[k] - expected) / std::abs(expected));
    }
    const double elapsed = seconds_since(t0);
    return {forward_err <= 1e-3 && backward_err <= 1e-3 && elapsed < 60,
            fmt::format("forward rel. L2 {:.3g}, backward rel. {:.3g}, {}", forward_err, backward_err,
                        timing(elapsed, 60))};
}

// 7 -----------------------------------------------------------------------------

Outcome inverse_recovery() {
    const auto t0 = Clock::now();
    SceneDescription s = testing::cornell_floor_scene(16);
    RenderOptions opts;
    opts.spp = 16;
    opts.seed = 7;
    const ParamHandle init{"floor", Rgb(1.0), 0.3};
    // Radiometric units: scale the light so that the mean squared
    // sensitivity of the image to the parameter is 1 at the start point.
    const GradientCube k = forward_grad(s, init, opts);
    double m = 0;
    for (double v : k.data)
        m += v * v;
    m /= k.size();
    for (auto &e : s.emitters)
        if (auto *area = std::get_if<AreaEmitter>(&e))
            area->radiance = area->radiance * (1 / std::sqrt(m));

    ParamHandle truth = init;
    truth.value = 0.6;
    const std::vector<double> target = render_primal(s, std::span(&truth, 1), opts).data;
    OptimizeOptions o;
    o.learning_rate = 0.5;
    o.steps = 50;
    o.render = opts;
    const OptimizeResult r = optimize(s, target, {init}, o);
    int reached = -1;
    for (const OptimizeStep &st : r.trajectory)
        if (reached < 0 && std::abs(st.values[0] - 0.6) <= 0.02)
            reached = st.step;
    const double final_value = r.final_values[0];
    const double elapsed = seconds_since(t0);
    return {std::abs(final_value - 0.6) <= 0.02 && reached >= 0 && elapsed < 300,
            fmt::format("final albedo {:.5f}, within 0.02 from step {}, {}", final_value, reached,
                        timing(elapsed, 300))};
}

// 8 -----------------------------------------------------------------------------

struct Losses {
    double steady = 0, transient = 0;
};

Losses losses(const RenderResult &a, const RenderResult &b) {
    Losses l;
    for (int c = 0; c < 3; ++c) {
        const double d = double(a.steady.at(0, 0, c)) - b.steady.at(0, 0, c);
        l.steady += d * d / 3;
    }
    for (size_t i = 0; i < a.cube.data.size(); ++i) {
        const double d = double(a.cube.data[i]) - b.cube.data[i];
        l.transient += d * d / a.cube.data.size();
    }
    return l;
}

Outcome separability() {
    const auto t0 = Clock::now();
    const double a = 0.5, b = 0.8;
    // K1: light reflected once by "near"; K2: light relayed by "far".
    // Same seed, so the two renders differ only by the relayed paths.
    RenderOptions calib;
    calib.spp = 1 << 16;
    calib.seed = 1000;
    const double k1 = render(Scene(testing::ambiguity_scene(1, 0)), calib).steady.at(0, 0, 1);
    const double k2 = render(Scene(testing::ambiguity_scene(1, 1)), calib).steady.at(0, 0, 1) - k1;
    // Decoy with the same steady response a*K1 + a*b*K2.
    const double b_decoy = 0.2;
    const double a_decoy = (a * k1 + a * b * k2) / (k1 + b_decoy * k2);

    const Scene truth(testing::ambiguity_scene(a, b));
    const Scene decoy(testing::ambiguity_scene(a_decoy, b_decoy));
    const int seeds = 8;
    std::vector<Losses> noise, fake;
    for (int i = 0; i < seeds; ++i) {
        RenderOptions target_opts, fit_opts;
        target_opts.spp = fit_opts.spp = 4096;
        target_opts.seed = 10 + i;
        fit_opts.seed = 100 + i;
        const RenderResult target = render(truth, target_opts);
        noise.push_back(losses(render(truth, fit_opts), target));
        fake.push_back(losses(render(decoy, fit_opts), target));
    }
    auto mean = [&](const std::vector<Losses> &v, double Losses::*f) {
        double m = 0;
        for (const Losses &l : v)
            m += l.*f;
        return m / v.size();
    };
    const double noise_steady = mean(noise, &Losses::steady), fake_steady = mean(fake, &Losses::steady);
    const double noise_transient = mean(noise, &Losses::transient), fake_transient = mean(fake, &Losses::transient);
    // Standard error of the paired steady-loss difference.
    double var = 0;
    for (int i = 0; i < seeds; ++i) {
        const double d = fake[i].steady - noise[i].steady - (fake_steady - noise_steady);
        var += d * d / (seeds - 1);
    }
    const double se = std::sqrt(var / seeds);
    const double ratio = fake_transient / noise_transient;
    const double elapsed = seconds_since(t0);
    const bool ok = fake_steady <= noise_steady + 3 * se && ratio >= 10 && a_decoy > 0 && a_decoy < 1 && elapsed < 120;
    return {ok, fmt::format("decoy ({:.4f}, {:.1f}); steady loss {:.3g} vs floor {:.3g} (+3se {:.3g}); transient "
                            "loss {:.1f}x floor, {}",
                            a_decoy, b_decoy, fake_steady, noise_steady, 3 * se, ratio, timing(elapsed, 120))};
}

// 9 -----------------------------------------------------------------------------

Outcome nlos_end_to_end() {
    const Vec3 target{0.05, 0.0, 0.6};
    const SceneDescription rig = nlos_point_scene(target, 32);
    CaptureOptions copts;
    copts.spp = 4096;
    copts.seed = 9;
    const auto t0 = Clock::now();
    const NlosCapture cap = capture(rig, copts);
    const double elapsed = seconds_since(t0);
    const double limit = 60 * four_core_scale();

    // Volume whose central voxel (15, 15, 15) is centered on the target.
    Volume vol;
    vol.voxel_size = 0.01;
    vol.dims = {32, 32, 32};
    const double half = 15.5 * vol.voxel_size;
    vol.origin = target - Vec3{half, half, half};
    const TransientCube field = backproject(cap, vol);
    size_t best = 0;
    for (size_t i = 1; i < field.data.size(); ++i)
        if (field.data[i] > field.data[best])
            best = i;
    const int bx = static_cast<int>(best % 32), by = static_cast<int>(best / 32 % 32), bz = static_cast<int>(best / 1024);
    const int off = std::max({std::abs(bx - 15), std::abs(by - 15), std::abs(bz - 15)});

    // Samples needed for a given variance of the peak bin scale with the
    // per-sample variance, so their ratio is the sample-count ratio.
    const int entry = 16 * 32 + 16;
    std::vector<double> sq_t, sq_b;
    const std::vector<double> mean_t = testing::tailored_entry(rig, entry, 4096, 91, &sq_t);
    const std::vector<double> mean_b = testing::brute_force_entry(rig, entry, 400000, 92, &sq_b);
    const int peak = static_cast<int>(std::max_element(mean_t.begin(), mean_t.end()) - mean_t.begin());
    const double var_t = sq_t[peak] - mean_t[peak] * mean_t[peak];
    const double var_b = sq_b[peak] - mean_b[peak] * mean_b[peak];
    const double ratio = var_b / std::max(var_t, 1e-300);
    // The two estimators target the same histogram.
    double total_t = 0, total_b = 0, sq_total_b = 0;
    for (size_t i = 0; i < mean_t.size(); ++i) {
        total_t += mean_t[i];
        total_b += mean_b[i];
        sq_total_b += sq_b[i];
    }
    const double se_b = std::sqrt(sq_total_b / 400000);
    const bool same_signal = std::abs(total_t - total_b) <= 4 * se_b + 0.02 * total_t;

    const bool ok = elapsed < limit && off <= 1 && ratio >= 50 && same_signal && mean_t[peak] > 0;
    return {ok, fmt::format("capture {}; argmax ({}, {}, {}) is {} voxel(s) off; sample ratio {:.0f} at equal "
                            "peak-bin variance; totals {:.4g} vs {:.4g}",
                            timing(elapsed, limit), bx, by, bz, off, ratio, total_t, total_b)};
}

// 10 ----------------------------------------------------------------------------

int run_cli(const std::string &args, const fs::path &log) {
    const std::string cmd = std::string(MITR_CLI) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "mitr_acceptance_determinism";
    fs::remove_all(root);
    SceneDescription small = cornell_box();
    small.camera.width = small.camera.height = 16;
    small.integrator.rr_depth = small.integrator.max_depth;
    fs::create_directories(root);
    const fs::path scene = root / "small.yaml";
    std::ofstream(scene) << serialize_scene(small);

    int failed_commands = 0;
    std::vector<std::string> subcommands;
    for (int threads : {1, 8}) {
        const fs::path d = root / fmt::format("t{}", threads);
        fs::create_directories(d);
        const std::string common = fmt::format(" --threads {} --quiet --seed 3", threads);
        auto p = [&](const char *name) { return (d / name).string(); };
        const std::vector<std::pair<std::string, std::string>> cmds = {
            {"render", "render --builtin cornell-box --spp 4 --out " + p("c.tcube")},
            {"render", "render --builtin polar-malus --spp 4 --out " + p("m.tcube")},
            {"gate", "gate --cube " + p("c.tcube") + " --open 3 --close 5 --out " + p("g.ppm")},
            {"peak", "peak --cube " + p("c.tcube") + " --out " + p("p.ppm") + " --raw " + p("p.csv")},
            {"export", "export --cube " + p("c.tcube") + " --tonemap --frames " + p("frames") + " --steady " +
                           p("s.ppm")},
            {"export", "export --cube " + p("m.tcube") + " --aolp --frames " + p("aolp")},
            {"nlos-capture", "nlos-capture --builtin nlos-two-patch --spp 64 --noise-jitter 0.02 "
                             "--photon-scale 1000 --dark-rate 0.01 --out " + p("h.nlos")},
            {"nlos-reconstruct", "nlos-reconstruct --capture " + p("h.nlos") +
                                     " --volume -0.3,-0.2,0.25,0.02,30,20,30 --filter laplacian --out " +
                                     p("v.tcube")},
            {"diff", "diff --scene " + scene.string() + " --spp 4 --param white:g --mode forward --out " +
                         p("fw.tcube")},
            {"diff", "diff --scene " + scene.string() + " --spp 4 --param white --mode fd --h 1e-3 --out " +
                         p("fd.tcube")},
            {"render", "render --scene " + scene.string() + " --spp 4 --out " + p("t.tcube")},
            {"diff", "diff --scene " + scene.string() + " --spp 4 --param red --mode backward --target " +
                         p("t.tcube") + " --out " + p("bw.csv")},
            {"optimize", "optimize --scene " + scene.string() + " --spp 4 --target " + p("t.tcube") +
                             " --param white=0.4 --param red:r=0.3 --steps 3 --reseed --out " + p("o.csv") +
                             " --snapshot-every 1 --snapshot-dir " + p("snaps")},
        };
        for (const auto &[name, args] : cmds) {
            if (threads == 1 && std::find(subcommands.begin(), subcommands.end(), name) == subcommands.end())
                subcommands.push_back(name);
            if (run_cli(args + common, d / "log.txt") != 0) {
                ++failed_commands;
                fmt::print(stderr, "determinism: '{}' failed:\n{}", args, slurp(d / "log.txt"));
            }
        }
        fs::remove(d / "log.txt");
    }
    int files = 0, differing = 0;
    for (const auto &e : fs::recursive_directory_iterator(root / "t1")) {
        if (!e.is_regular_file())
            continue;
        ++files;
        const fs::path other = root / "t8" / fs::relative(e.path(), root / "t1");
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
            ++differing;
            fmt::print(stderr, "determinism: {} differs\n", fs::relative(e.path(), root / "t1").string());
        }
    }
    fs::remove_all(root);
    return {failed_commands == 0 && differing == 0 && files > 0 && subcommands.size() == 8,
            fmt::format("{} subcommands, {} output files compared, {} differ, {} commands failed",
                        subcommands.size(), files, differing, failed_commands)};
}

// 11 ----------------------------------------------------------------------------

NlosCapture single_histogram(int n_bins) {
    NlosCapture c;
    c.rig.laser_grid = {1, 1};
    c.rig.confocal = true;
    c.axis.t_start = 0;
    c.axis.bin_width = 1;
    c.axis.n_bins = n_bins;
    c.data.assign(n_bins, 0.0f);
    return c;
}

Outcome noise_statistics() {
    const auto t0 = Clock::now();
    // Jitter: an impulse blurred by sigma = 3 bins, sampled with 1e5 photons.
    NlosCapture impulse = single_histogram(257);
    impulse.at(0, 128) = 1;
    NoiseModel jitter;
    jitter.jitter_sigma = 3;
    jitter.photon_scale = 1e5;
    const NlosCapture counts = apply_noise(impulse, jitter, 11);
    double n = 0, m1 = 0, m2 = 0;
    for (int b = 0; b < 257; ++b) {
        n += counts.at(0, b);
        m1 += counts.at(0, b) * b;
    }
    m1 /= n;
    for (int b = 0; b < 257; ++b)
        m2 += counts.at(0, b) * (b - m1) * (b - m1);
    const double variance = m2 / (n - 1);

    // Dispersion: flat histogram, 1e4 bins, Poisson photons plus dark counts.
    NlosCapture flat = single_histogram(10000);
    std::fill(flat.data.begin(), flat.data.end(), 1.0f);
    NoiseModel poisson;
    poisson.photon_scale = 50;
    poisson.dark_count_rate = 5;
    const NlosCapture pc = apply_noise(flat, poisson, 12);
    double mean = 0, var = 0;
    for (float v : pc.data)
        mean += v;
    mean /= pc.data.size();
    for (float v : pc.data)
        var += (v - mean) * (v - mean);
    var /= pc.data.size() - 1;
    const double dispersion = var / mean;
    const double elapsed = seconds_since(t0);
    return {std::abs(variance / 9 - 1) <= 0.05 && std::abs(dispersion - 1) <= 0.05 && elapsed < 30,
            fmt::format("jitter variance {:.3f} bins^2 from {:.0f} photons, dispersion {:.4f} (mean {:.2f}), {}",
                        variance, n, dispersion, mean, timing(elapsed, 30))};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
        {"energy-closure", energy_closure},
        {"tof-oracle", tof_oracle},
        {"unwarp-flatness", unwarp_flatness},
        {"polarization-malus", polarization_malus},
        {"brewster-dop", brewster_dop},
        {"gradient-fidelity", gradient_fidelity},
        {"inverse-recovery", inverse_recovery},
        {"separability", separability},
        {"nlos-end-to-end", nlos_end_to_end},
        {"determinism", determinism},
        {"noise-statistics", noise_statistics},
    };
    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        fmt::print("{} {:2d} {:<20} {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
