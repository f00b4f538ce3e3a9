// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/film.h>
#include <mitr/rng.h>
#include <mitr/scene.h>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mitr {

class NlosError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unit axes of the relay wall: `right` (width), `up` (height), `normal`.
struct WallBasis {
    Vec3 right, up, normal;
};
WallBasis wall_basis(const RelayWall &wall);

/// Cell centers of an nx x ny grid over the wall, row-major from the
/// (-right, -up) corner.
std::vector<Vec3> wall_grid(const RelayWall &wall, std::array<int, 2> grid);

/// Rig-generated scene for one (laser point, sensor point) pair: the hidden
/// shapes, a diffuse relay wall, a pulsed laser aimed at the laser point
/// and a single-pixel camera at the sensor origin looking at the sensor
/// point. The result renders with the ordinary path integrator.
/// Throws NlosError when an index is outside its grid.
SceneDescription build_nlos_scene(const SceneDescription &rig, int laser_index, int sensor_index);

/// One deposit of the relay-wall sampler.
struct NlosDeposit {
    double time = 0;
    double value = 0;
};

/// Compiled relay-wall scene with the hidden-geometry sampling tables.
class NlosSampler {
  public:
    explicit NlosSampler(const SceneDescription &rig);
    ~NlosSampler();
    NlosSampler(const NlosSampler &) = delete;
    NlosSampler &operator=(const NlosSampler &) = delete;

    /// Paths laser -> x_l -> hidden ... -> x_s -> sensor. The first hidden
    /// vertex is area-sampled; every hidden vertex connects to x_s. Values
    /// are luminance of the radiance leaving x_s towards the sensor.
    void sample(const Vec3 &x_l, const Vec3 &x_s, RngState &rng,
                const std::function<void(const NlosDeposit &)> &sink) const;

    /// Delay added to every deposit by the account flags.
    double time_offset(const Vec3 &x_l, const Vec3 &x_s) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Impulse response H over the scan grid. Confocal captures hold
/// [n_points][n_bins]; exhaustive captures [n_laser][n_sensor][n_bins].
struct NlosCapture {
    NlosSetup rig;
    TemporalAxis axis;
    double speed_of_light = 1;
    std::vector<float> data;

    int laser_count() const { return rig.laser_grid[0] * rig.laser_grid[1]; }
    int sensor_count() const { return rig.confocal ? 1 : rig.sensor_grid[0] * rig.sensor_grid[1]; }
    /// Number of histograms.
    int entries() const { return laser_count() * sensor_count(); }
    float &at(int entry, int bin) { return data[static_cast<size_t>(entry) * axis.n_bins + bin]; }
    float at(int entry, int bin) const { return data[static_cast<size_t>(entry) * axis.n_bins + bin]; }
    /// Wall points of histogram `entry`.
    std::pair<Vec3, Vec3> points(int entry) const;
};

struct CaptureOptions {
    int spp = 1024;
    uint64_t seed = 0;
    int threads = 0;
    /// Called after each finished histogram with (done, total).
    std::function<void(int, int)> progress;
};

/// Render every histogram of the scan grid with the relay-wall sampler.
/// Histogram i uses RNG streams keyed by (seed, i), so results do not
/// depend on scheduling. Throws SceneError for invalid rigs.
NlosCapture capture(const SceneDescription &rig, const CaptureOptions &options);

/// Histogram of one grid entry.
std::vector<double> capture_entry(const NlosSampler &sampler, const SceneDescription &rig, int entry,
                                  const CaptureOptions &options);

struct NoiseModel {
    double jitter_sigma = 0;          // Gaussian jitter, time units
    std::vector<double> irf;          // used instead of the jitter when set
    double photon_scale = 1;          // expected counts per unit of H
    double dark_count_rate = 0;       // expected dark counts per bin
};

/// Read an IRF kernel: one number per line, odd length. The kernel is
/// normalized to sum 1; `warning` receives a message when that changes the
/// sum by more than 1e-3.
std::vector<double> read_irf(const std::filesystem::path &path, std::string *warning = nullptr);

/// Temporal blur, Poisson photon counts, then Poisson dark counts. Output
/// values are counts. Throws std::invalid_argument for negative rates.
NlosCapture apply_noise(const NlosCapture &capture, const NoiseModel &model, uint64_t seed);

/// Histogram convolved with a discrete kernel centered on its middle tap.
std::vector<double> convolve_time(std::span<const double> h, std::span<const double> kernel);
/// Normalized Gaussian taps for `sigma_bins`, radius ceil(4 sigma).
std::vector<double> gaussian_kernel(double sigma_bins);

/// Poisson variate by inversion (small means) or transformed rejection.
uint64_t sample_poisson(double mean, RngState &rng);

struct Volume {
    Vec3 origin;
    double voxel_size = 1;
    std::array<int, 3> dims{1, 1, 1};
};

/// Backprojected field stored as a 1-channel cube: x, y over the image
/// axes, z over the time axis (t_start = origin.z, bin_width = voxel size).
/// Throws NlosError when the volume reaches the wall plane or the back side.
TransientCube backproject(const NlosCapture &capture, const Volume &volume, bool laplacian = false);

void write_capture(const NlosCapture &capture, const std::filesystem::path &path);
NlosCapture read_capture(const std::filesystem::path &path);
std::vector<uint8_t> encode_capture(const NlosCapture &capture);
NlosCapture decode_capture(std::span<const uint8_t> bytes);

}  // namespace mitr
