// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/integrator.h>
#include <mitr/render_scene.h>
#include <mitr/scene.h>

#include <gtest/gtest.h>

#include "test_scenes.h"

using namespace mitr;
using mitr::testing::cube_luminance;
using mitr::testing::make_rectangle;

namespace {

double cube_sum(const TransientCube &cube, int c = 0) {
    double s = 0;
    for (int t = 0; t < cube.axis.n_bins; ++t)
        for (int y = 0; y < cube.height; ++y)
            for (int x = 0; x < cube.width; ++x)
                s += cube.at(t, y, x, c);
    return s;
}

double image_mean(const SteadyImage &img, int c = 0) {
    double s = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            s += img.at(y, x, c);
    return s / (img.width * img.height);
}

/// Camera at the origin looking down -z at an emissive square at depth `d`,
/// optionally behind a slab [z0 - thickness, z0] filled with `medium`.
SceneDescription slab_scene(double d, std::optional<MediumRecord> medium, double z0 = -1, double thickness = 1) {
    SceneDescription s;
    s.camera.fov_degrees = 1;
    s.camera.width = s.camera.height = 1;
    s.materials = {{"black", DiffuseMaterial{Rgb(0.0)}}};
    s.shapes.push_back(make_rectangle("lamp", {-2, -2, -d}, {4, 0, 0}, {0, 4, 0}, "black"));
    s.emitters.push_back(AreaEmitter{"lamp", Rgb(1.0)});
    if (medium) {
        s.media.push_back(*medium);
        ShapeRecord slab;
        slab.id = "slab";
        slab.geometry = make_cuboid({0, 0, z0 - 0.5 * thickness}, {3, 3, thickness}, 0);
        slab.interior = medium->id;
        s.shapes.push_back(slab);
    }
    s.integrator = {IntegratorKind::VolPath, 8, 8, false};
    s.film.t_start = 0;
    s.film.bin_width = 0.1;
    s.film.n_bins = static_cast<int>(std::ceil(d / 0.1)) + 30;
    return s;
}

TEST(Render, PlaneTimeOfFlight) {
    for (double d : {0.73, 1.38, 2.61}) {
        const SceneDescription s = mitr::testing::tof_plane_scene(d);
        RenderOptions opts;
        opts.spp = 64;
        opts.check_time_bounds = true;
        const RenderResult r = render(Scene(s), opts);
        const int expected = *bin_index(s.film, 2 * d);
        double total = 0;
        for (int t = 0; t < s.film.n_bins; ++t) {
            const double v = cube_luminance(r.cube, t, 0, 0);
            total += v;
            if (t != expected)
                EXPECT_EQ(v, 0.0) << "d " << d << " bin " << t;
        }
        EXPECT_GT(total, 0.0);
        EXPECT_EQ(r.cube.overflow_energy_total, 0.0);
        // Point light at the camera: L = I * albedo / (pi d^2) at normal incidence.
        EXPECT_NEAR(r.steady.at(0, 0, 0), 0.5 / kPi / (d * d), 1e-3 * 0.5 / kPi / (d * d));
    }
}

TEST(Render, DirectlyVisibleEmitterArrivesAtDistance) {
    const double d = 2.05;
    const SceneDescription s = slab_scene(d, std::nullopt);
    RenderOptions opts;
    opts.spp = 16;
    const RenderResult r = render(Scene(s), opts);
    const int expected = *bin_index(s.film, d);
    for (int t = 0; t < s.film.n_bins; ++t)
        EXPECT_EQ(r.cube.at(t, 0, 0, 0), t == expected ? 1.0f : 0.0f) << t;
}

TEST(Render, ThreadCountDoesNotChangeResult) {
    SceneDescription s = cornell_box();
    s.camera.width = s.camera.height = 24;
    RenderOptions opts;
    opts.spp = 8;
    opts.seed = 3;
    opts.threads = 1;
    const RenderResult a = render(Scene(s), opts);
    opts.threads = 5;
    const RenderResult b = render(Scene(s), opts);
    EXPECT_EQ(a.cube.data, b.cube.data);
    EXPECT_EQ(a.steady, b.steady);
    EXPECT_EQ(a.cube.overflow_energy_total, b.cube.overflow_energy_total);
    opts.seed = 4;
    const RenderResult c = render(Scene(s), opts);
    EXPECT_NE(a.cube.data, c.cube.data);
}

TEST(Render, CropMatchesFullRender) {
    SceneDescription s = cornell_box();
    s.camera.width = s.camera.height = 16;
    RenderOptions opts;
    opts.spp = 4;
    const RenderResult full = render(Scene(s), opts);
    opts.crop = CropWindow{5, 7, 3, 2};
    const RenderResult crop = render(Scene(s), opts);
    for (int y = 7; y < 9; ++y)
        for (int x = 5; x < 8; ++x)
            for (int c = 0; c < 3; ++c)
                EXPECT_EQ(crop.steady.at(y, x, c), full.steady.at(y, x, c));
    EXPECT_EQ(crop.steady.at(0, 0, 0), 0.0f);
}

TEST(Render, RejectsInvalidOptions) {
    SceneDescription s = cornell_box();
    RenderOptions opts;
    opts.spp = 0;
    EXPECT_THROW(render(Scene(s), opts), std::invalid_argument);
    const SceneDescription rig = builtin_scene("nlos-point");
    opts.spp = 1;
    EXPECT_THROW(render(Scene(rig), opts), std::invalid_argument);
}

TEST(Media, BeerLambertAbsorption) {
    for (double sigma : {0.25, 1.0, 2.0}) {
        const SceneDescription s = slab_scene(3, MediumRecord{"ink", Rgb(sigma, 0.5 * sigma, 0), Rgb(0.0), 0, 1});
        RenderOptions opts;
        opts.spp = 16;
        const RenderResult r = render(Scene(s), opts);
        // Rays within half a degree of the axis cross the slab with length < 1.00004.
        EXPECT_NEAR(r.steady.at(0, 0, 0), std::exp(-sigma), 1e-4 * std::exp(-sigma) + 1e-7);
        EXPECT_NEAR(r.steady.at(0, 0, 1), std::exp(-0.5 * sigma), 1e-4);
        EXPECT_EQ(r.steady.at(0, 0, 2), 1.0f);
    }
}

TEST(Media, RefractiveIndexDelaysArrival) {
    const double d = 3.02;
    const SceneDescription s = slab_scene(d, MediumRecord{"glass", Rgb(0.0), Rgb(0.0), 0, 1.5});
    RenderOptions opts;
    opts.spp = 256;
    const RenderResult r = render(Scene(s), opts);
    // Straight through: one unit of path at 1.5 / c.
    const int delayed = *bin_index(s.film, d + 0.5);
    int peak = 0;
    for (int t = 1; t < s.film.n_bins; ++t)
        if (r.cube.at(t, 0, 0, 0) > r.cube.at(peak, 0, 0, 0))
            peak = t;
    EXPECT_EQ(peak, delayed);
    EXPECT_EQ(r.cube.at(*bin_index(s.film, d), 0, 0, 0), 0.0f);
    // Two interfaces at normal incidence each transmit 1 - 0.04.
    EXPECT_NEAR(r.cube.at(delayed, 0, 0, 0), 0.96 * 0.96, 0.05);
}

TEST(Media, ScatteringNeverPrecedesBallistic) {
    const double d = 3.02;
    SceneDescription s = slab_scene(d, MediumRecord{"fog", Rgb(0.1), Rgb(0.8), 0.3, 1}, -1, 1.5);
    s.camera.fov_degrees = 5;
    RenderOptions opts;
    opts.spp = 512;
    opts.check_time_bounds = true;
    const RenderResult r = render(Scene(s), opts);
    const int ballistic = *bin_index(s.film, d);
    double early = 0, scattered = 0;
    for (int t = 0; t < s.film.n_bins; ++t) {
        if (t < ballistic)
            early += r.cube.at(t, 0, 0, 0);
        else if (t > ballistic)
            scattered += r.cube.at(t, 0, 0, 0);
    }
    EXPECT_EQ(early, 0.0);
    EXPECT_GT(scattered, 0.0);
}

TEST(Media, StrictModeRejectsUnclosedBoundary) {
    SceneDescription s = slab_scene(3, std::nullopt);
    s.media.push_back({"fog", Rgb(0.1), Rgb(0.1), 0, 1});
    // A single sheet tagged as a boundary: crossing it never closes.
    ShapeRecord sheet = make_rectangle("sheet", {-2, -2, -1}, {0, 4, 0}, {4, 0, 0}, "");
    sheet.interior = "fog";
    s.shapes.push_back(sheet);
    RenderOptions opts;
    opts.spp = 4;
    EXPECT_NO_THROW(render(Scene(s), opts));
    opts.strict_media = true;
    EXPECT_THROW(render(Scene(s), opts), MediumError);
}

TEST(Kernels, PathAndVolPathAgreeWithoutMedia) {
    SceneDescription s = cornell_box();
    s.camera.width = s.camera.height = 16;
    RenderOptions opts;
    opts.spp = 8;
    const RenderResult a = render(Scene(s), opts);
    s.integrator.kind = IntegratorKind::VolPath;
    const RenderResult b = render(Scene(s), opts);
    EXPECT_EQ(a.cube.data, b.cube.data);
    EXPECT_EQ(a.steady, b.steady);
}

/// Mean over the image of a 16x16 Cornell render and its standard error
/// from the spread across pixels at the same location in two renders.
struct Estimate {
    double mean = 0;
    std::vector<double> pixels;
};

Estimate cornell_estimate(const RenderOptions &opts, int rr_depth = 4) {
    SceneDescription s = cornell_box();
    s.camera.width = s.camera.height = 16;
    s.integrator.rr_depth = rr_depth;
    const RenderResult r = render(Scene(s), opts);
    Estimate e;
    for (float v : r.steady.data)
        e.pixels.push_back(v);
    for (double v : e.pixels)
        e.mean += v;
    e.mean /= static_cast<double>(e.pixels.size());
    return e;
}

/// z-score of the per-pixel difference of two independent estimators.
double paired_z(const Estimate &a, const Estimate &b) {
    const size_t n = a.pixels.size();
    double sum = 0, sq = 0;
    for (size_t i = 0; i < n; ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        sum += d;
        sq += d * d;
    }
    const double mean = sum / n;
    const double var = (sq - n * mean * mean) / (n - 1);
    return mean / std::sqrt(var / n);
}

TEST(Estimators, NextEventAndBsdfSamplingAgree) {
    RenderOptions with_nee;
    with_nee.spp = 128;
    with_nee.seed = 1;
    RenderOptions without_nee = with_nee;
    without_nee.nee = false;
    without_nee.spp = 1024;
    without_nee.seed = 2;
    RenderOptions nee_only = with_nee;
    nee_only.bsdf_light_hits = false;
    nee_only.seed = 3;
    const Estimate a = cornell_estimate(with_nee), b = cornell_estimate(without_nee), c = cornell_estimate(nee_only);
    EXPECT_LT(std::abs(paired_z(a, b)), 4.0) << a.mean << " vs " << b.mean;
    EXPECT_LT(std::abs(paired_z(a, c)), 4.0) << a.mean << " vs " << c.mean;
    EXPECT_NEAR(a.mean, b.mean, 0.03 * a.mean);
}

TEST(Estimators, RouletteIsUnbiased) {
    RenderOptions opts;
    opts.spp = 128;
    opts.seed = 5;
    const Estimate without = cornell_estimate(opts, 8);
    opts.seed = 6;
    const Estimate with = cornell_estimate(opts, 1);
    EXPECT_LT(std::abs(paired_z(without, with)), 4.0) << without.mean << " vs " << with.mean;
}

TEST(Render, TimeBoundsHoldInCornell) {
    SceneDescription s = cornell_box();
    s.camera.width = s.camera.height = 16;
    RenderOptions opts;
    opts.spp = 16;
    opts.check_time_bounds = true;
    EXPECT_NO_THROW(render(Scene(s), opts));
}

TEST(Render, UnwarpLeavesSteadyImageUnchanged) {
    SceneDescription s = cornell_box();
    s.camera.width = s.camera.height = 16;
    s.film.t_start = 0;  // keep unwarped arrivals on the axis
    RenderOptions opts;
    opts.spp = 8;
    const RenderResult plain = render(Scene(s), opts);
    s.film.unwarp = true;
    const RenderResult unwarped = render(Scene(s), opts);
    EXPECT_EQ(plain.steady, unwarped.steady);
    EXPECT_NE(plain.cube.data, unwarped.cube.data);
    // Unwarping only moves energy earlier: the first occupied bin of a
    // pixel never moves later.
    auto first_bin = [](const TransientCube &c, int y, int x) {
        for (int t = 0; t < c.axis.n_bins; ++t)
            if (mitr::testing::cube_luminance(c, t, y, x) > 0)
                return t;
        return c.axis.n_bins;
    };
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            EXPECT_LE(first_bin(unwarped.cube, y, x), first_bin(plain.cube, y, x)) << x << "," << y;
}

TEST(Render, SteadyEqualsCollapsedCube) {
    SceneDescription s = cornell_box();
    s.camera.width = s.camera.height = 16;
    s.film.n_bins = 40;  // plenty of overflow
    RenderOptions opts;
    opts.spp = 8;
    const RenderResult r = render(Scene(s), opts);
    EXPECT_EQ(steady_collapse(r.cube), r.steady);
    EXPECT_GT(r.cube.overflow_energy_total, 0.0);
}

TEST(Render, PulseWidthSpreadsButConservesEnergy) {
    auto laser_scene = [](double fwhm) {
        // The beam lands on a side panel that lights the plane seen by the camera.
        SceneDescription s = mitr::testing::tof_plane_scene(1.5);
        s.shapes.push_back(make_rectangle("side", {1, -0.5, -1.4}, {0, 0, 0.8}, {0, 1, 0}, "plane"));
        s.emitters = {PulsedLaser{{0, 0, 0}, {1, 0, -1}, Rgb(1.0), fwhm}};
        s.film.n_bins = 60;
        return s;
    };
    RenderOptions opts;
    opts.spp = 16;
    const RenderResult sharp = render(Scene(laser_scene(0)), opts);
    const RenderResult wide = render(Scene(laser_scene(0.5)), opts);
    int sharp_bins = 0, wide_bins = 0;
    for (int t = 0; t < 60; ++t) {
        sharp_bins += sharp.cube.at(t, 0, 0, 0) > 0;
        wide_bins += wide.cube.at(t, 0, 0, 0) > 0;
    }
    EXPECT_EQ(sharp_bins, 1);
    EXPECT_GT(wide_bins, 5);
    EXPECT_GT(cube_sum(sharp.cube), 0.0);
    EXPECT_NEAR(cube_sum(wide.cube), cube_sum(sharp.cube), 1e-5 * cube_sum(sharp.cube));
    EXPECT_EQ(wide.steady, sharp.steady);
}

TEST(Render, PathSamplesMatchRender) {
    SceneDescription s = cornell_box();
    s.camera.width = s.camera.height = 8;
    RenderOptions opts;
    opts.spp = 4;
    const Scene scene(s);
    const RenderResult r = render(scene, opts);
    double sum = 0;
    for (int k = 0; k < 4; ++k)
        for (const PathDeposit &d : transient_path_sample(scene, 3, 5, k, opts))
            sum += d.values[0];
    EXPECT_NEAR(r.steady.at(5, 3, 0), sum / 4, 1e-6 * (1 + sum));
    EXPECT_GT(image_mean(r.steady), 0.0);
}

}  // namespace
