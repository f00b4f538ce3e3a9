// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mitr/math.h>

#include <array>
#include <stdexcept>

namespace mitr {

using Stokes = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

Mat4 mat4_identity();
Mat4 mat4_diagonal(double a, double b, double c, double d);
Mat4 operator*(const Mat4 &a, const Mat4 &b);
Mat4 operator*(const Mat4 &a, double s);
Mat4 operator+(const Mat4 &a, const Mat4 &b);
Stokes operator*(const Mat4 &m, const Stokes &s);

/// Per-color-channel Stokes vectors. `frame` is the reference (horizontal)
/// axis, perpendicular to `direction`, the propagation direction.
struct StokesSpectrum {
    std::array<Stokes, 3> s{};
    Vec3 frame{1, 0, 0};
    Vec3 direction{0, 0, 1};
};

/// Per-color-channel Mueller matrices mapping Stokes vectors expressed in
/// `in_frame` to Stokes vectors expressed in `out_frame`.
struct MuellerSpectrum {
    std::array<Mat4, 3> m{};
    Vec3 in_frame{1, 0, 0}, in_direction{0, 0, 1};
    Vec3 out_frame{1, 0, 0}, out_direction{0, 0, 1};

    static MuellerSpectrum uniform(const Mat4 &m);
};

class PolarizationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rotator for a reference frame turned by `theta` about the propagation
/// direction: S1' = S1 cos2t + S2 sin2t, S2' = -S1 sin2t + S2 cos2t.
Mat4 mueller_rotation(double theta);

/// Signed angle turning reference axis `from` onto `to` about `direction`.
double frame_angle(const Vec3 &from, const Vec3 &to, const Vec3 &direction);

/// Re-express `s` in `new_frame`. Throws PolarizationError when
/// `new_frame` is not perpendicular to the propagation direction.
StokesSpectrum rotate_stokes_frame(const StokesSpectrum &s, const Vec3 &new_frame);

/// R(theta_out) * M * R(-theta_in): the same operator expressed with
/// world reference axes. Throws when a frame is not perpendicular to its
/// propagation direction.
MuellerSpectrum to_world_mueller(const MuellerSpectrum &m, const Vec3 &world_in_frame, const Vec3 &world_out_frame);

/// Ideal linear polarizer whose transmission axis makes `axis_angle` with
/// the reference axis.
Mat4 mueller_linear_polarizer(double axis_angle);

/// Dielectric Fresnel reflection for relative index `eta` (transmitted over
/// incident side) in the s/p basis, with s as reference axis.
Mat4 mueller_fresnel_reflection(double eta, double cos_theta_i);

/// Dielectric Fresnel transmission; zero under total internal reflection.
/// Radiance compression by eta^2 is not applied.
Mat4 mueller_fresnel_transmission(double eta, double cos_theta_i);

/// diag(v, 0, 0, 0).
Mat4 mueller_depolarizer(double v);

/// S0 >= |(S1, S2, S3)| - 1e-6 * S0 (and S0 >= 0).
bool stokes_is_physical(const Stokes &s, double eps_scale = 1e-6);

/// Unpolarized-light reflectance used by scalar code paths.
double fresnel_dielectric(double eta, double cos_theta_i);

/// Reflectance of a conductor with complex index eta + i k.
double fresnel_conductor(double eta, double k, double cos_theta_i);

/// Any unit vector perpendicular to `d`.
Vec3 perpendicular(const Vec3 &d);

/// Rotate `frame` (perpendicular to `from`) by the minimal rotation taking
/// `from` onto `to`.
Vec3 transport_frame(const Vec3 &frame, const Vec3 &from, const Vec3 &to);

}  // namespace mitr
