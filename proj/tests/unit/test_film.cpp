// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/film.h>
#include <mitr/rng.h>

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

using namespace mitr;

namespace {

TemporalAxis axis(double t0, double w, int n) {
    TemporalAxis a;
    a.t_start = t0;
    a.bin_width = w;
    a.n_bins = n;
    return a;
}

TEST(BinIndex, Examples) {
    const TemporalAxis a = axis(0, 0.1, 10);
    EXPECT_EQ(bin_index(a, 0.0), 0);
    EXPECT_EQ(bin_index(a, 0.05), 0);
    EXPECT_EQ(bin_index(a, 0.1), 1);  // edge goes to the higher bin
    EXPECT_EQ(bin_index(a, 0.35), 3);
    EXPECT_EQ(bin_index(a, 0.75), 7);
    EXPECT_EQ(bin_index(a, 0.99), 9);
    EXPECT_FALSE(bin_index(a, 1.0));
    EXPECT_FALSE(bin_index(a, -1e-12));
    EXPECT_FALSE(bin_index(a, std::nan("")));
    const TemporalAxis b = axis(-2.5, 0.5, 4);
    EXPECT_EQ(bin_index(b, -2.5), 0);
    EXPECT_EQ(bin_index(b, -1.0), 3);
    EXPECT_FALSE(bin_index(b, -0.5));
}

TEST(BinIndex, EveryEdgeBelongsToHigherBin) {
    for (double w : {0.1, 0.3, 1.0 / 3.0, 0.07, 2.5}) {
        const TemporalAxis a = axis(0.2, w, 50);
        for (int k = 1; k < 50; ++k)
            EXPECT_EQ(bin_index(a, a.t_start + k * w), k) << "w " << w << " edge " << k;
    }
}

TEST(Fixed, RoundTripAndLimits) {
    EXPECT_EQ(to_double(to_fixed(0.75)), 0.75);
    EXPECT_EQ(to_double(to_fixed(-3.0)), -3.0);
    EXPECT_THROW(to_fixed(std::nan("")), FilmError);
    EXPECT_THROW(to_fixed(kMaxSampleMagnitude), FilmError);
    // Sums are order independent.
    RngState rng(1, 0);
    std::vector<double> v(1000);
    for (double &x : v)
        x = rng.next_double() * 1e3 - 500;
    Fixed fwd = 0, bwd = 0;
    for (size_t i = 0; i < v.size(); ++i) {
        fwd += to_fixed(v[i]);
        bwd += to_fixed(v[v.size() - 1 - i]);
    }
    EXPECT_EQ(fwd, bwd);
}

TEST(Film, AddSampleAdditive) {
    const TemporalAxis a = axis(0, 1, 4);
    TransientFilm film(2, 1, 3, a);
    const double v1[3] = {1, 2, 3}, v2[3] = {0.5, 0.25, 0.125};
    film.add_sample(1, 0, 2.5, v1);
    film.add_sample(1, 0, 2.2, v2);
    film.add_sample(0, 0, 9.0, v1);  // beyond the axis
    const TransientCube cube = film.finalize(1);
    EXPECT_EQ(cube.at(2, 0, 1, 0), 1.5f);
    EXPECT_EQ(cube.at(2, 0, 1, 1), 2.25f);
    EXPECT_EQ(cube.at(2, 0, 1, 2), 3.125f);
    for (int t = 0; t < 4; ++t)
        for (int c = 0; c < 3; ++c)
            EXPECT_EQ(cube.at(t, 0, 0, c), 0.0f);
    EXPECT_DOUBLE_EQ(cube.overflow_energy_total, 6.0);
    EXPECT_DOUBLE_EQ(cube.overflow[0], 1.0);
    const TransientCube halved = film.finalize(2);
    EXPECT_EQ(halved.at(2, 0, 1, 0), 0.75f);
}

TEST(Film, RejectsBadSamples) {
    TransientFilm film(1, 1, 3, axis(0, 1, 4));
    const double nan3[3] = {0, std::nan(""), 0};
    const double ok[3] = {1, 1, 1};
    EXPECT_THROW(film.add_sample(0, 0, 1, nan3), FilmError);
    EXPECT_THROW(film.add_sample(1, 0, 1, ok), FilmError);
    EXPECT_THROW(film.add_sample(0, 0, 1, std::span<const double>(ok, 2)), FilmError);
}

TEST(Film, ClosureUnderRandomDeposits) {
    for (TimeFilter filter : {TimeFilter::Box, TimeFilter::Tent}) {
        TemporalAxis a = axis(-0.3, 0.07, 37);
        a.filter = filter;
        TransientFilm film(3, 2, 3, a);
        RngState rng(4, 0);
        std::vector<double> expected(6 * 3, 0.0);
        for (int i = 0; i < 20000; ++i) {
            const int x = static_cast<int>(rng.next_double() * 3), y = static_cast<int>(rng.next_double() * 2);
            const double t = rng.next_double() * 4 - 1;
            const double v[3] = {rng.next_double(), rng.next_double() * 10, rng.next_double() * 1e-3};
            film.add_sample(x, y, t, v);
            for (int c = 0; c < 3; ++c)
                expected[(y * 3 + x) * 3 + c] += v[c];
        }
        const TransientCube cube = film.finalize(7);
        const SteadyImage direct = film.steady(7);
        const SteadyImage collapsed = steady_collapse(cube);
        EXPECT_EQ(collapsed, direct);
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 3; ++x)
                for (int c = 0; c < 3; ++c) {
                    const double e = expected[(y * 3 + x) * 3 + c] / 7;
                    EXPECT_NEAR(direct.at(y, x, c), e, 1e-6 * e);
                    double sum = cube.overflow[(y * 3 + x) * 3 + c];
                    for (int t = 0; t < a.n_bins; ++t)
                        sum += cube.at(t, y, x, c);
                    EXPECT_NEAR(sum, e, 1e-5 * e);
                }
    }
}

TEST(Film, TentSplitsBetweenCenters) {
    TemporalAxis a = axis(0, 1, 4);
    a.filter = TimeFilter::Tent;
    TransientFilm film(1, 1, 3, a);
    const double v[3] = {1, 1, 1};
    film.add_sample(0, 0, 1.75, v);  // a quarter of the way from center 1.5 to center 2.5
    const TransientCube cube = film.finalize(1);
    EXPECT_FLOAT_EQ(cube.at(1, 0, 0, 0), 0.75f);
    EXPECT_FLOAT_EQ(cube.at(2, 0, 0, 0), 0.25f);
    TransientFilm edge(1, 1, 3, a);
    edge.add_sample(0, 0, 0.25, v);  // a quarter goes below the first center
    const TransientCube e = edge.finalize(1);
    EXPECT_FLOAT_EQ(e.at(0, 0, 0, 0), 0.75f);
    EXPECT_NEAR(e.overflow[0], 0.25, 1e-12);
}

TransientCube ramp_cube() {
    TransientCube cube(2, 1, 3, axis(0, 1, 4));
    for (int t = 0; t < 4; ++t)
        for (int x = 0; x < 2; ++x)
            for (int c = 0; c < 3; ++c)
                cube.at(t, 0, x, c) = static_cast<float>(t + 1 + 10 * x);
    return cube;
}

TEST(Gate, FullAxisEqualsSum) {
    const TransientCube cube = ramp_cube();
    const SteadyImage g = time_gate(cube, 0, 4);
    EXPECT_FLOAT_EQ(g.at(0, 0, 0), 10.0f);
    EXPECT_FLOAT_EQ(g.at(0, 1, 0), 50.0f);
}

TEST(Gate, PartialBinsWeightedByOverlap) {
    const TransientCube cube = ramp_cube();
    // Half of bin 1 (value 2) and all of bin 2 (value 3).
    EXPECT_FLOAT_EQ(time_gate(cube, 1.5, 3.0).at(0, 0, 0), 4.0f);
    EXPECT_FLOAT_EQ(time_gate(cube, 0.25, 0.75).at(0, 0, 0), 0.5f);
}

TEST(Gate, Invalid) {
    const TransientCube cube = ramp_cube();
    EXPECT_THROW(time_gate(cube, 2, 2), FilmError);
    EXPECT_THROW(time_gate(cube, 3, 1), FilmError);
    EXPECT_THROW(time_gate(cube, -1, 2), FilmError);
    EXPECT_THROW(time_gate(cube, 1, 4.5), FilmError);
}

TEST(Gate, LinearInCube) {
    TransientCube a = ramp_cube(), b = ramp_cube(), sum = ramp_cube();
    RngState rng(5, 0);
    for (size_t i = 0; i < a.data.size(); ++i) {
        a.data[i] = static_cast<float>(rng.next_double());
        b.data[i] = static_cast<float>(rng.next_double());
        sum.data[i] = 2 * a.data[i] + 3 * b.data[i];
    }
    const SteadyImage ga = time_gate(a, 0.3, 3.1), gb = time_gate(b, 0.3, 3.1), gs = time_gate(sum, 0.3, 3.1);
    for (size_t i = 0; i < gs.data.size(); ++i)
        EXPECT_NEAR(gs.data[i], 2 * ga.data[i] + 3 * gb.data[i], 1e-5);
}

TEST(Unwarp, SubtractsCameraDelay) {
    EXPECT_DOUBLE_EQ(unwarp_time(5.0, {0, 0, -3}, {0, 0, 1}, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(unwarp_time(5.0, {3, 4, 0}, {0, 0, 0}, 2.0), 2.5);
}

TEST(PeakMap, EarliestMaximum) {
    TransientCube cube(3, 1, 3, axis(0, 0.5, 4));
    for (int c = 0; c < 3; ++c) {
        cube.at(2, 0, 0, c) = 1;
        cube.at(1, 0, 1, c) = 2;
        cube.at(3, 0, 1, c) = 2;
    }
    const PeakTimeMap m = peak_time_map(cube);
    EXPECT_TRUE(m.valid[0]);
    EXPECT_DOUBLE_EQ(m.time[0], 1.25);
    EXPECT_NEAR(m.magnitude[0], 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(m.time[1], 0.75);
    EXPECT_FALSE(m.valid[2]);
}

TEST(Tonemap, ConstantCubeAllEqual) {
    TransientCube cube(4, 3, 3, axis(0, 1, 5));
    std::fill(cube.data.begin(), cube.data.end(), 0.3f);
    for (ExposureMode mode : {ExposureMode::Max, ExposureMode::Key}) {
        const auto frames = tonemap_transient(cube, 2.2, mode);
        ASSERT_EQ(frames.size(), 5u);
        const uint8_t v = frames[0].rgb[0];
        for (const Image8 &f : frames)
            for (uint8_t p : f.rgb)
                EXPECT_EQ(p, v);
    }
    EXPECT_EQ(tonemap_transient(cube, 2.2, ExposureMode::Max)[0].rgb[0], 255);
}

TEST(Tonemap, GammaRatio) {
    TransientCube cube(2, 1, 3, axis(0, 1, 1));
    for (int c = 0; c < 3; ++c) {
        cube.at(0, 0, 0, c) = 1.0f;
        cube.at(0, 0, 1, c) = 0.5f;
    }
    for (double gamma : {1.0, 2.2}) {
        const Image8 f = tonemap_transient(cube, gamma, ExposureMode::Max)[0];
        EXPECT_EQ(f.rgb[0], 255);
        EXPECT_EQ(f.rgb[3], std::lround(255 * std::pow(0.5, 1 / gamma)));
    }
}

TEST(Tonemap, AllZeroIsBlack) {
    TransientCube cube(2, 2, 3, axis(0, 1, 3));
    for (ExposureMode mode : {ExposureMode::Max, ExposureMode::Key, ExposureMode::Unit})
        for (const Image8 &f : tonemap_transient(cube, 2.2, mode))
            for (uint8_t p : f.rgb)
                EXPECT_EQ(p, 0);
}

TEST(Tonemap, SharedExposureAcrossFrames) {
    TransientCube cube(1, 1, 3, axis(0, 1, 2));
    for (int c = 0; c < 3; ++c) {
        cube.at(0, 0, 0, c) = 0.25f;
        cube.at(1, 0, 0, c) = 1.0f;
    }
    const auto frames = tonemap_transient(cube, 1.0, ExposureMode::Max);
    EXPECT_EQ(frames[0].rgb[0], 64);
    EXPECT_EQ(frames[1].rgb[0], 255);
}

TransientCube random_cube(int channels) {
    TemporalAxis a = axis(-1.5, 0.125, 7);
    TransientCube cube(5, 3, channels, a);
    cube.speed_of_light = 0.299792458;
    cube.overflow_energy_total = 0.0625;
    RngState rng(6, 0);
    for (float &v : cube.data)
        v = static_cast<float>(rng.next_double() * 2 - 0.5);
    return cube;
}

TEST(Tcube, HeaderLayout) {
    const TransientCube cube = random_cube(3);
    const auto bytes = encode_tcube(cube);
    EXPECT_EQ(bytes.size(), kTcubeHeaderBytes + cube.data.size() * 4);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "TCUB");
    uint32_t dims[5];
    std::memcpy(dims, bytes.data() + 4, sizeof dims);
    EXPECT_EQ(dims[0], 1u);
    EXPECT_EQ(dims[1], 5u);
    EXPECT_EQ(dims[2], 3u);
    EXPECT_EQ(dims[3], 7u);
    EXPECT_EQ(dims[4], 3u);
    double f[4];
    std::memcpy(f, bytes.data() + 24, sizeof f);
    EXPECT_EQ(f[0], -1.5);
    EXPECT_EQ(f[1], 0.125);
    EXPECT_EQ(f[2], 0.299792458);
    EXPECT_EQ(f[3], 0.0625);
}

TEST(Tcube, RoundTrip) {
    for (int channels : {3, 12}) {
        const TransientCube cube = random_cube(channels);
        const auto path = std::filesystem::temp_directory_path() / "mitr_film_roundtrip.tcube";
        write_tcube(cube, path);
        const TransientCube back = read_tcube(path);
        std::filesystem::remove(path);
        EXPECT_EQ(back.width, cube.width);
        EXPECT_EQ(back.height, cube.height);
        EXPECT_EQ(back.channels, channels);
        EXPECT_EQ(back.axis.t_start, cube.axis.t_start);
        EXPECT_EQ(back.axis.bin_width, cube.axis.bin_width);
        EXPECT_EQ(back.axis.n_bins, cube.axis.n_bins);
        EXPECT_EQ(back.speed_of_light, cube.speed_of_light);
        EXPECT_EQ(back.overflow_energy_total, cube.overflow_energy_total);
        EXPECT_EQ(back.data, cube.data);
    }
}

TEST(Tcube, Corruption) {
    const auto bytes = encode_tcube(random_cube(3));
    EXPECT_THROW(decode_tcube(std::span(bytes).first(20)), FilmError);
    EXPECT_THROW(decode_tcube(std::span(bytes).first(bytes.size() - 1)), FilmError);
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_tcube(bad), FilmError);
    bad = bytes;
    bad[4] = 2;  // version
    EXPECT_THROW(decode_tcube(bad), FilmError);
    auto longer = bytes;
    longer.push_back(0);
    EXPECT_THROW(decode_tcube(longer), FilmError);
    EXPECT_THROW(read_tcube("/nonexistent/dir/cube.tcube"), FilmError);
}

TEST(Ppm, Layout) {
    Image8 img;
    img.width = 2;
    img.height = 1;
    img.rgb = {1, 2, 3, 4, 5, 6};
    const auto path = std::filesystem::temp_directory_path() / "mitr_film.ppm";
    write_ppm(img, path);
    std::ifstream in(path, std::ios::binary);
    const std::string content((std::istreambuf_iterator<char>(in)), {});
    std::filesystem::remove(path);
    EXPECT_EQ(content, std::string("P6\n2 1\n255\n\x01\x02\x03\x04\x05\x06", 17));
}

}  // namespace
