// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/temporal.h>

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mitr {

/// Signed fixed point with 64 fractional bits. Sums of fixed-point values
/// are exact, so per-pixel totals do not depend on accumulation order.
using Fixed = __int128;

/// Largest magnitude accepted for one deposited value.
inline constexpr double kMaxSampleMagnitude = 0x1p40;

/// Round to the nearest representable fixed-point value. Throws FilmError
/// for non-finite input or |v| >= kMaxSampleMagnitude.
Fixed to_fixed(double v);
double to_double(Fixed f);

class FilmError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Radiance tensor [t][y][x][channel]. Channels are 3 (RGB) or 12 (Stokes
/// components by color: S0R, S0G, S0B, S1R, ..., S3B).
struct TransientCube {
    int width = 0, height = 0, channels = 3;
    TemporalAxis axis;
    double speed_of_light = 1;
    std::vector<float> data;
    /// Samples accumulated per pixel [y][x].
    std::vector<float> weight;
    /// Normalized out-of-axis energy per pixel [y][x][c]; zero when read
    /// from disk, where only the total survives.
    std::vector<double> overflow;
    double overflow_energy_total = 0;
    /// Exact per-pixel sums of all deposited samples (bins and overflow,
    /// before normalization). Present only for cubes produced in memory by
    /// a render; used so that collapsing reproduces the steady tally exactly.
    std::vector<Fixed> exact_total;

    TransientCube() = default;
    TransientCube(int width, int height, int channels, const TemporalAxis &axis);

    size_t index(int t, int y, int x, int c) const {
        return ((static_cast<size_t>(t) * height + y) * width + x) * channels + c;
    }
    float &at(int t, int y, int x, int c) { return data[index(t, y, x, c)]; }
    float at(int t, int y, int x, int c) const { return data[index(t, y, x, c)]; }
    bool polarized() const { return channels == 12; }
};

struct SteadyImage {
    int width = 0, height = 0, channels = 3;
    std::vector<float> data;  // [y][x][c]

    SteadyImage() = default;
    SteadyImage(int width, int height, int channels)
        : width(width), height(height), channels(channels),
          data(static_cast<size_t>(width) * height * channels, 0.0f) {}
    float &at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
    float at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
    friend bool operator==(const SteadyImage &, const SteadyImage &) = default;
};

/// Exact tallies of one pixel: time bins, out-of-axis energy, and an
/// independent steady accumulator fed by the same deposits.
class PixelAccumulator {
  public:
    PixelAccumulator(const TemporalAxis &axis, int channels);

    void reset();

    /// Deposit `values` (one per channel) at `time`. When `pulse_fwhm` > 0
    /// the deposit is later spread by a Gaussian of that width (see
    /// resolve_pulses). Throws FilmError on NaN, naming `pixel`.
    void add(double time, std::span<const double> values, double pulse_fwhm = 0, std::pair<int, int> pixel = {-1, -1});

    /// Convolve pending pulsed deposits into the bins.
    void resolve_pulses();

    int channels() const { return channels_; }
    const TemporalAxis &axis() const { return axis_; }
    Fixed bin(int t, int c) const { return bins_[static_cast<size_t>(t) * channels_ + c]; }
    Fixed overflow(int c) const { return overflow_[c]; }
    Fixed steady(int c) const { return steady_[c]; }

  private:
    void deposit(std::vector<Fixed> &bins, double time, const Fixed *values);

    TemporalAxis axis_;
    int channels_;
    std::vector<Fixed> bins_;
    std::vector<Fixed> overflow_;
    std::vector<Fixed> steady_;
    struct Pulse {
        double fwhm;
        std::vector<Fixed> bins;
    };
    std::vector<Pulse> pulses_;
};

/// Normalize `acc` by `spp` into pixel (x, y) of `cube` and `steady`.
/// Throws std::logic_error if bins plus overflow differ from the steady tally.
void write_pixel(const PixelAccumulator &acc, int spp, int x, int y, TransientCube &cube, SteadyImage *steady);

/// Whole-image accumulating film.
class TransientFilm {
  public:
    TransientFilm(int width, int height, int channels, const TemporalAxis &axis, double speed_of_light = 1);

    /// Box- or tent-filtered deposit; out-of-axis time goes to overflow.
    void add_sample(int x, int y, double time, std::span<const double> value);
    /// Normalize by `spp` samples per pixel.
    TransientCube finalize(int spp) const;
    SteadyImage steady(int spp) const;

  private:
    int width_, height_, channels_;
    double speed_of_light_;
    std::vector<PixelAccumulator> pixels_;
};

/// Sum over time bins plus per-pixel overflow. Uses the exact tallies when
/// present so that the result equals the render's steady image bit for bit.
SteadyImage steady_collapse(const TransientCube &cube);

/// Integral over [t_open, t_close], weighting straddled bins by overlap.
SteadyImage time_gate(const TransientCube &cube, double t_open, double t_close);

struct PeakTimeMap {
    int width = 0, height = 0;
    std::vector<double> time;       // bin-center time of the peak
    std::vector<double> magnitude;  // luminance at the peak
    std::vector<uint8_t> valid;     // 0 where the history is all zero
};

/// Per-pixel maximum-luminance bin; ties go to the earliest bin.
PeakTimeMap peak_time_map(const TransientCube &cube);

enum class ExposureMode : uint8_t {
    Max,  // global maximum maps to 1
    Key,  // global mean luminance maps to 0.18
    Unit, // values used as they are
};

struct Image8 {
    int width = 0, height = 0;
    std::vector<uint8_t> rgb;
    friend bool operator==(const Image8 &, const Image8 &) = default;
};

/// One 8-bit frame per bin, one exposure for the whole sequence, then
/// clamp((scale * x)^(1/gamma)). Polarized cubes use their S0 channels.
std::vector<Image8> tonemap_transient(const TransientCube &cube, double gamma, ExposureMode mode);
Image8 tonemap_steady(const SteadyImage &image, double gamma, ExposureMode mode);

/// Size of the fixed .tcube header in bytes.
inline constexpr size_t kTcubeHeaderBytes = 56;

void write_tcube(const TransientCube &cube, const std::filesystem::path &path);
TransientCube read_tcube(const std::filesystem::path &path);
std::vector<uint8_t> encode_tcube(const TransientCube &cube);
TransientCube decode_tcube(std::span<const uint8_t> bytes);

/// Binary PPM (P6).
void write_ppm(const Image8 &image, const std::filesystem::path &path);
/// Write `frames` as frame_00000.ppm, frame_00001.ppm, ... in `dir`.
void write_frames(const std::vector<Image8> &frames, const std::filesystem::path &dir);

}  // namespace mitr
