// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/film.h>

#include "binary_io.h"

#include <fmt/format.h>

#include <bit>
#include <cstring>
#include <fstream>

namespace mitr {

using detail::ByteReader;
using detail::ByteWriter;
using detail::read_file;
using detail::write_file;

Fixed to_fixed(double v) {
    if (!(std::abs(v) < kMaxSampleMagnitude))
        throw FilmError(fmt::format("sample value {} is not finite or exceeds {}", v, kMaxSampleMagnitude));
    return static_cast<Fixed>(std::nearbyint(v * 0x1p64));
}

double to_double(Fixed f) { return static_cast<double>(f) * 0x1p-64; }

TransientCube::TransientCube(int width, int height, int channels, const TemporalAxis &axis)
    : width(width), height(height), channels(channels), axis(axis),
      data(static_cast<size_t>(axis.n_bins) * width * height * channels, 0.0f),
      weight(static_cast<size_t>(width) * height, 0.0f),
      overflow(static_cast<size_t>(width) * height * channels, 0.0) {}

// --- per-pixel accumulation ------------------------------------------------

PixelAccumulator::PixelAccumulator(const TemporalAxis &axis, int channels)
    : axis_(axis), channels_(channels), bins_(static_cast<size_t>(axis.n_bins) * channels, 0),
      overflow_(channels, 0), steady_(channels, 0) {}

void PixelAccumulator::reset() {
    std::fill(bins_.begin(), bins_.end(), 0);
    std::fill(overflow_.begin(), overflow_.end(), 0);
    std::fill(steady_.begin(), steady_.end(), 0);
    pulses_.clear();
}

void PixelAccumulator::deposit(std::vector<Fixed> &bins, double time, const Fixed *values) {
    const int n = axis_.n_bins;
    if (axis_.filter == TimeFilter::Box) {
        const auto b = bin_index(axis_, time);
        for (int c = 0; c < channels_; ++c) {
            if (b)
                bins[static_cast<size_t>(*b) * channels_ + c] += values[c];
            else
                overflow_[c] += values[c];
        }
        return;
    }
    // Tent: split between the two nearest bin centers.
    const double x = (time - axis_.t_start) / axis_.bin_width - 0.5;
    if (!std::isfinite(x)) {
        for (int c = 0; c < channels_; ++c)
            overflow_[c] += values[c];
        return;
    }
    const double b0f = std::floor(x);
    const double frac = x - b0f;
    const bool in0 = b0f >= 0 && b0f < n;
    const bool in1 = b0f + 1 >= 0 && b0f + 1 < n;
    const long long b0 = in0 || in1 ? static_cast<long long>(b0f) : 0;
    for (int c = 0; c < channels_; ++c) {
        const Fixed a0 = values[c] == 0 ? 0 : to_fixed(to_double(values[c]) * (1 - frac));
        const Fixed a1 = values[c] - a0;
        if (in0)
            bins[static_cast<size_t>(b0) * channels_ + c] += a0;
        else
            overflow_[c] += a0;
        if (in1)
            bins[static_cast<size_t>(b0 + 1) * channels_ + c] += a1;
        else
            overflow_[c] += a1;
    }
}

void PixelAccumulator::add(double time, std::span<const double> values, double pulse_fwhm, std::pair<int, int> pixel) {
    Fixed fixed[16];
    for (int c = 0; c < channels_; ++c) {
        if (std::isnan(values[c]) || std::isnan(time))
            throw FilmError(fmt::format("NaN sample at pixel ({}, {}), time {}, channel {}", pixel.first, pixel.second,
                                        time, c));
        fixed[c] = to_fixed(values[c]);
        steady_[c] += fixed[c];
    }
    if (pulse_fwhm > 0) {
        auto it = std::find_if(pulses_.begin(), pulses_.end(), [&](const Pulse &p) { return p.fwhm == pulse_fwhm; });
        if (it == pulses_.end()) {
            pulses_.push_back({pulse_fwhm, std::vector<Fixed>(bins_.size(), 0)});
            it = pulses_.end() - 1;
        }
        deposit(it->bins, time, fixed);
        return;
    }
    deposit(bins_, time, fixed);
}

void PixelAccumulator::resolve_pulses() {
    const int n = axis_.n_bins;
    for (Pulse &p : pulses_) {
        const double sigma = p.fwhm / (2 * std::sqrt(2 * std::log(2.0))) / axis_.bin_width;
        const int half = static_cast<int>(std::ceil(4 * sigma));
        std::vector<double> w(2 * half + 1);
        double sum = 0;
        for (int k = -half; k <= half; ++k)
            sum += w[k + half] = std::exp(-0.5 * k * k / (sigma * sigma));
        for (double &v : w)
            v /= sum;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < channels_; ++c) {
                const Fixed v = p.bins[static_cast<size_t>(b) * channels_ + c];
                if (v == 0)
                    continue;
                const double vd = to_double(v);
                Fixed spread = 0;
                for (int k = -half; k <= half; ++k) {
                    if (k == 0)
                        continue;
                    const Fixed part = to_fixed(vd * w[k + half]);
                    spread += part;
                    const int t = b + k;
                    if (t >= 0 && t < n)
                        bins_[static_cast<size_t>(t) * channels_ + c] += part;
                    else
                        overflow_[c] += part;
                }
                bins_[static_cast<size_t>(b) * channels_ + c] += v - spread;
            }
    }
    pulses_.clear();
}

void write_pixel(const PixelAccumulator &acc, int spp, int x, int y, TransientCube &cube, SteadyImage *steady) {
    const int nc = acc.channels();
    const size_t pixel = static_cast<size_t>(y) * cube.width + x;
    if (cube.exact_total.size() != cube.overflow.size())
        throw std::logic_error("cube was not prepared for exact tallies");
    for (int c = 0; c < nc; ++c) {
        Fixed total = acc.overflow(c);
        for (int t = 0; t < acc.axis().n_bins; ++t) {
            const Fixed v = acc.bin(t, c);
            total += v;
            cube.at(t, y, x, c) = static_cast<float>(to_double(v) / spp);
        }
        if (total != acc.steady(c))
            throw std::logic_error(fmt::format("energy closure violated at pixel ({}, {})", x, y));
        cube.exact_total[pixel * nc + c] = total;
        cube.overflow[pixel * nc + c] = to_double(acc.overflow(c)) / spp;
        if (steady)
            steady->at(y, x, c) = static_cast<float>(to_double(acc.steady(c)) / spp);
    }
    cube.weight[pixel] = static_cast<float>(spp);
}

TransientFilm::TransientFilm(int width, int height, int channels, const TemporalAxis &axis, double speed_of_light)
    : width_(width), height_(height), channels_(channels), speed_of_light_(speed_of_light),
      pixels_(static_cast<size_t>(width) * height, PixelAccumulator(axis, channels)) {}

void TransientFilm::add_sample(int x, int y, double time, std::span<const double> value) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_)
        throw FilmError(fmt::format("pixel ({}, {}) outside the film", x, y));
    if (static_cast<int>(value.size()) != channels_)
        throw FilmError(fmt::format("expected {} channels, got {}", channels_, value.size()));
    pixels_[static_cast<size_t>(y) * width_ + x].add(time, value, 0, {x, y});
}

TransientCube TransientFilm::finalize(int spp) const {
    TransientCube cube(width_, height_, channels_, pixels_.front().axis());
    cube.speed_of_light = speed_of_light_;
    cube.exact_total.assign(cube.overflow.size(), 0);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x) {
            PixelAccumulator acc = pixels_[static_cast<size_t>(y) * width_ + x];
            acc.resolve_pulses();
            write_pixel(acc, spp, x, y, cube, nullptr);
        }
    for (size_t i = 0; i < cube.overflow.size(); ++i)
        if (!cube.polarized() || static_cast<int>(i % channels_) < 3)
            cube.overflow_energy_total += cube.overflow[i];
    return cube;
}

SteadyImage TransientFilm::steady(int spp) const {
    SteadyImage img(width_, height_, channels_);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x)
            for (int c = 0; c < channels_; ++c)
                img.at(y, x, c) =
                    static_cast<float>(to_double(pixels_[static_cast<size_t>(y) * width_ + x].steady(c)) / spp);
    return img;
}

// --- post-processing --------------------------------------------------------

SteadyImage steady_collapse(const TransientCube &cube) {
    SteadyImage img(cube.width, cube.height, cube.channels);
    const bool exact = cube.exact_total.size() == cube.overflow.size() && !cube.exact_total.empty();
    for (int y = 0; y < cube.height; ++y)
        for (int x = 0; x < cube.width; ++x) {
            const size_t pixel = static_cast<size_t>(y) * cube.width + x;
            for (int c = 0; c < cube.channels; ++c) {
                const size_t i = pixel * cube.channels + c;
                if (exact) {
                    const int spp = static_cast<int>(cube.weight[pixel]);
                    img.at(y, x, c) = spp > 0 ? static_cast<float>(to_double(cube.exact_total[i]) / spp) : 0.0f;
                    continue;
                }
                double sum = cube.overflow.empty() ? 0.0 : cube.overflow[i];
                for (int t = 0; t < cube.axis.n_bins; ++t)
                    sum += cube.at(t, y, x, c);
                img.at(y, x, c) = static_cast<float>(sum);
            }
        }
    return img;
}

SteadyImage time_gate(const TransientCube &cube, double t_open, double t_close) {
    const TemporalAxis &a = cube.axis;
    const double slack = 1e-9 * a.bin_width;
    if (!(t_open < t_close))
        throw FilmError(fmt::format("gate requires t_open < t_close (got {} and {})", t_open, t_close));
    if (t_open < a.t_start - slack || t_close > a.t_end() + slack)
        throw FilmError(fmt::format("gate [{}, {}] lies outside the axis [{}, {}]", t_open, t_close, a.t_start,
                                    a.t_end()));
    std::vector<double> frac(a.n_bins, 0.0);
    for (int t = 0; t < a.n_bins; ++t) {
        const double lo = a.t_start + t * a.bin_width, hi = lo + a.bin_width;
        frac[t] = std::max(0.0, std::min(hi, t_close) - std::max(lo, t_open)) / a.bin_width;
    }
    SteadyImage img(cube.width, cube.height, cube.channels);
    for (int y = 0; y < cube.height; ++y)
        for (int x = 0; x < cube.width; ++x)
            for (int c = 0; c < cube.channels; ++c) {
                double sum = 0;
                for (int t = 0; t < a.n_bins; ++t)
                    if (frac[t] > 0)
                        sum += frac[t] * cube.at(t, y, x, c);
                img.at(y, x, c) = static_cast<float>(sum);
            }
    return img;
}

PeakTimeMap peak_time_map(const TransientCube &cube) {
    PeakTimeMap m;
    m.width = cube.width;
    m.height = cube.height;
    const size_t n = static_cast<size_t>(cube.width) * cube.height;
    m.time.assign(n, 0.0);
    m.magnitude.assign(n, 0.0);
    m.valid.assign(n, 0);
    for (int y = 0; y < cube.height; ++y)
        for (int x = 0; x < cube.width; ++x) {
            double best = 0;
            int best_t = -1;
            for (int t = 0; t < cube.axis.n_bins; ++t) {
                double lum = 0;
                if (cube.channels >= 3)
                    for (int c = 0; c < 3; ++c)
                        lum += kLuminanceWeights[c] * cube.at(t, y, x, c);
                else
                    lum = cube.at(t, y, x, 0);
                if (lum > best) {
                    best = lum;
                    best_t = t;
                }
            }
            const size_t i = static_cast<size_t>(y) * cube.width + x;
            if (best_t >= 0) {
                m.time[i] = cube.axis.bin_center(best_t);
                m.magnitude[i] = best;
                m.valid[i] = 1;
            }
        }
    return m;
}

namespace {

uint8_t encode_unit(double v, double gamma) {
    v = std::clamp(v, 0.0, 1.0);
    return static_cast<uint8_t>(std::lround(255.0 * std::pow(v, 1.0 / gamma)));
}

int color_channels(int channels) { return channels >= 3 ? 3 : 1; }

double exposure_scale(std::span<const float> values, int channels, ExposureMode mode) {
    if (mode == ExposureMode::Unit)
        return 1.0;
    const int cc = color_channels(channels);
    const size_t pixels = values.size() / channels;
    if (mode == ExposureMode::Max) {
        double m = 0;
        for (size_t p = 0; p < pixels; ++p)
            for (int c = 0; c < cc; ++c)
                m = std::max(m, static_cast<double>(values[p * channels + c]));
        return m > 0 ? 1.0 / m : 0.0;
    }
    double sum = 0;
    for (size_t p = 0; p < pixels; ++p) {
        if (cc == 3)
            for (int c = 0; c < 3; ++c)
                sum += kLuminanceWeights[c] * values[p * channels + c];
        else
            sum += values[p * channels];
    }
    const double mean = pixels ? sum / pixels : 0.0;
    return mean > 0 ? 0.18 / mean : 0.0;
}

Image8 make_frame(std::span<const float> values, int width, int height, int channels, double scale, double gamma) {
    Image8 img;
    img.width = width;
    img.height = height;
    img.rgb.resize(static_cast<size_t>(width) * height * 3);
    const int cc = color_channels(channels);
    for (size_t p = 0; p < static_cast<size_t>(width) * height; ++p)
        for (int c = 0; c < 3; ++c)
            img.rgb[p * 3 + c] = encode_unit(scale * values[p * channels + (cc == 3 ? c : 0)], gamma);
    return img;
}

}  // namespace

std::vector<Image8> tonemap_transient(const TransientCube &cube, double gamma, ExposureMode mode) {
    const double scale = exposure_scale(cube.data, cube.channels, mode);
    const size_t frame_size = static_cast<size_t>(cube.width) * cube.height * cube.channels;
    std::vector<Image8> frames;
    frames.reserve(cube.axis.n_bins);
    for (int t = 0; t < cube.axis.n_bins; ++t)
        frames.push_back(make_frame(std::span(cube.data).subspan(t * frame_size, frame_size), cube.width, cube.height,
                                    cube.channels, scale, gamma));
    return frames;
}

Image8 tonemap_steady(const SteadyImage &image, double gamma, ExposureMode mode) {
    const double scale = exposure_scale(image.data, image.channels, mode);
    return make_frame(image.data, image.width, image.height, image.channels, scale, gamma);
}

// --- files ------------------------------------------------------------------

std::vector<uint8_t> encode_tcube(const TransientCube &cube) {
    std::vector<uint8_t> out;
    out.reserve(kTcubeHeaderBytes + cube.data.size() * 4);
    ByteWriter w(out);
    w.bytes("TCUB", 4);
    w.u32(1);
    w.u32(static_cast<uint32_t>(cube.width));
    w.u32(static_cast<uint32_t>(cube.height));
    w.u32(static_cast<uint32_t>(cube.axis.n_bins));
    w.u32(static_cast<uint32_t>(cube.channels));
    w.f64(cube.axis.t_start);
    w.f64(cube.axis.bin_width);
    w.f64(cube.speed_of_light);
    w.f64(cube.overflow_energy_total);
    for (float v : cube.data)
        w.f32(v);
    return out;
}

TransientCube decode_tcube(std::span<const uint8_t> bytes) {
    if (bytes.size() < kTcubeHeaderBytes)
        throw FilmError(fmt::format("truncated tcube: expected at least {} header bytes, got {}", kTcubeHeaderBytes,
                                    bytes.size()));
    if (std::memcmp(bytes.data(), "TCUB", 4) != 0)
        throw FilmError("not a tcube file (bad magic)");
    ByteReader r(bytes.subspan(4));
    const uint32_t version = r.u32();
    if (version != 1)
        throw FilmError(fmt::format("unsupported tcube version {} (expected 1)", version));
    const uint32_t nx = r.u32(), ny = r.u32(), nt = r.u32(), nc = r.u32();
    if (nx == 0 || ny == 0 || nt == 0 || nc == 0 || nx > 65536 || ny > 65536 || nt > 10000000 || nc > 64)
        throw FilmError(fmt::format("implausible tcube dimensions {}x{}x{}x{}", nx, ny, nt, nc));
    const uint64_t count = static_cast<uint64_t>(nx) * ny * nt * nc;
    if (count > (uint64_t{1} << 34))
        throw FilmError("tcube payload too large");
    TemporalAxis axis;
    axis.t_start = r.f64();
    axis.bin_width = r.f64();
    axis.n_bins = static_cast<int>(nt);
    const double c = r.f64();
    const double overflow = r.f64();
    if (!std::isfinite(axis.t_start) || !(axis.bin_width > 0) || !std::isfinite(axis.bin_width) || !(c > 0))
        throw FilmError("tcube header holds an invalid time axis");
    const uint64_t expected = kTcubeHeaderBytes + 4 * count;
    if (bytes.size() != expected)
        throw FilmError(fmt::format("tcube size mismatch: expected {} bytes, got {}", expected, bytes.size()));
    TransientCube cube(static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nc), axis);
    cube.speed_of_light = c;
    cube.overflow_energy_total = overflow;
    ByteReader payload(bytes.subspan(kTcubeHeaderBytes));
    for (float &v : cube.data)
        v = payload.f32();
    return cube;
}

void write_tcube(const TransientCube &cube, const std::filesystem::path &path) { write_file<FilmError>(path, encode_tcube(cube)); }

TransientCube read_tcube(const std::filesystem::path &path) { return decode_tcube(read_file<FilmError>(path)); }

void write_ppm(const Image8 &image, const std::filesystem::path &path) {
    const std::string header = fmt::format("P6\n{} {}\n255\n", image.width, image.height);
    std::vector<uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), image.rgb.begin(), image.rgb.end());
    write_file<FilmError>(path, bytes);
}

void write_frames(const std::vector<Image8> &frames, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    for (size_t i = 0; i < frames.size(); ++i)
        write_ppm(frames[i], dir / fmt::format("frame_{:05d}.ppm", i));
}

}  // namespace mitr
