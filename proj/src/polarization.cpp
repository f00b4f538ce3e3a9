// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/polarization.h>

#include <complex>

namespace mitr {

Mat4 mat4_identity() { return mat4_diagonal(1, 1, 1, 1); }

Mat4 mat4_diagonal(double a, double b, double c, double d) {
    Mat4 m{};
    m[0][0] = a;
    m[1][1] = b;
    m[2][2] = c;
    m[3][3] = d;
    return m;
}

Mat4 operator*(const Mat4 &a, const Mat4 &b) {
    Mat4 r{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const double aik = a[i][k];
            if (aik == 0)
                continue;
            for (int j = 0; j < 4; ++j)
                r[i][j] += aik * b[k][j];
        }
    return r;
}

Mat4 operator*(const Mat4 &a, double s) {
    Mat4 r = a;
    for (auto &row : r)
        for (double &v : row)
            v *= s;
    return r;
}

Mat4 operator+(const Mat4 &a, const Mat4 &b) {
    Mat4 r = a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            r[i][j] += b[i][j];
    return r;
}

Stokes operator*(const Mat4 &m, const Stokes &s) {
    Stokes r{};
    for (int i = 0; i < 4; ++i)
        r[i] = m[i][0] * s[0] + m[i][1] * s[1] + m[i][2] * s[2] + m[i][3] * s[3];
    return r;
}

MuellerSpectrum MuellerSpectrum::uniform(const Mat4 &m) {
    MuellerSpectrum r;
    r.m = {m, m, m};
    return r;
}

Mat4 mueller_rotation(double theta) {
    const double c = std::cos(2 * theta), s = std::sin(2 * theta);
    Mat4 m = mat4_identity();
    m[1][1] = c;
    m[1][2] = s;
    m[2][1] = -s;
    m[2][2] = c;
    return m;
}

double frame_angle(const Vec3 &from, const Vec3 &to, const Vec3 &direction) {
    return std::atan2(dot(cross(from, to), direction), dot(from, to));
}

namespace {

void check_frame(const Vec3 &frame, const Vec3 &direction, const char *what) {
    if (std::abs(length(frame) - 1) > 1e-6 || std::abs(dot(frame, direction)) > 1e-6 * length(direction))
        throw PolarizationError(std::string(what) + " is not a unit vector perpendicular to the propagation direction");
}

}  // namespace

StokesSpectrum rotate_stokes_frame(const StokesSpectrum &s, const Vec3 &new_frame) {
    check_frame(new_frame, s.direction, "new frame");
    const Mat4 r = mueller_rotation(frame_angle(s.frame, new_frame, s.direction));
    StokesSpectrum out = s;
    for (int c = 0; c < 3; ++c)
        out.s[c] = r * s.s[c];
    out.frame = new_frame;
    return out;
}

MuellerSpectrum to_world_mueller(const MuellerSpectrum &m, const Vec3 &world_in_frame, const Vec3 &world_out_frame) {
    check_frame(world_in_frame, m.in_direction, "input frame");
    check_frame(world_out_frame, m.out_direction, "output frame");
    const Mat4 r_out = mueller_rotation(frame_angle(m.out_frame, world_out_frame, m.out_direction));
    const Mat4 r_in = mueller_rotation(-frame_angle(m.in_frame, world_in_frame, m.in_direction));
    MuellerSpectrum out = m;
    for (int c = 0; c < 3; ++c)
        out.m[c] = r_out * m.m[c] * r_in;
    out.in_frame = world_in_frame;
    out.out_frame = world_out_frame;
    return out;
}

Mat4 mueller_linear_polarizer(double axis_angle) {
    Mat4 m{};
    m[0][0] = m[0][1] = m[1][0] = m[1][1] = 0.5;
    if (axis_angle == 0)
        return m;
    return mueller_rotation(-axis_angle) * m * mueller_rotation(axis_angle);
}

namespace {

using Complex = std::complex<double>;

struct FresnelAmplitudes {
    Complex rs, rp;
    Complex cos_t;
};

FresnelAmplitudes fresnel_amplitudes(double eta, double cos_i) {
    cos_i = std::clamp(cos_i, 0.0, 1.0);
    const double sin2_t = (1 - cos_i * cos_i) / (eta * eta);
    const Complex cos_t = std::sqrt(Complex(1 - sin2_t, 0));
    FresnelAmplitudes a;
    a.cos_t = cos_t;
    a.rs = (cos_i - eta * cos_t) / (cos_i + eta * cos_t);
    a.rp = (eta * cos_i - cos_t) / (eta * cos_i + cos_t);
    if (sin2_t >= 1) {
        // Total internal reflection: pure phase shifts.
        a.rs /= std::abs(a.rs);
        a.rp /= std::abs(a.rp);
    }
    return a;
}

}  // namespace

Mat4 mueller_fresnel_reflection(double eta, double cos_theta_i) {
    const FresnelAmplitudes f = fresnel_amplitudes(eta, cos_theta_i);
    const double rs2 = std::norm(f.rs), rp2 = std::norm(f.rp);
    const Complex x = f.rs * std::conj(f.rp);
    const double a = 0.5 * (rs2 + rp2), b = 0.5 * (rs2 - rp2), c = x.real(), s = x.imag();
    Mat4 m{};
    m[0][0] = a;
    m[0][1] = b;
    m[1][0] = b;
    m[1][1] = a;
    m[2][2] = c;
    m[2][3] = s;
    m[3][2] = -s;
    m[3][3] = c;
    return m;
}

Mat4 mueller_fresnel_transmission(double eta, double cos_theta_i) {
    cos_theta_i = std::clamp(cos_theta_i, 0.0, 1.0);
    const double sin2_t = (1 - cos_theta_i * cos_theta_i) / (eta * eta);
    if (sin2_t >= 1 || cos_theta_i == 0)
        return Mat4{};
    const double cos_t = std::sqrt(1 - sin2_t);
    const double ts = 2 * cos_theta_i / (cos_theta_i + eta * cos_t);
    const double tp = 2 * cos_theta_i / (eta * cos_theta_i + cos_t);
    const double k = eta * cos_t / cos_theta_i;
    const double t_s = k * ts * ts, t_p = k * tp * tp;
    Mat4 m{};
    m[0][0] = m[1][1] = 0.5 * (t_s + t_p);
    m[0][1] = m[1][0] = 0.5 * (t_s - t_p);
    m[2][2] = m[3][3] = std::sqrt(t_s * t_p);
    return m;
}

Mat4 mueller_depolarizer(double v) { return mat4_diagonal(v, 0, 0, 0); }

bool stokes_is_physical(const Stokes &s, double eps_scale) {
    const double pol = std::sqrt(s[1] * s[1] + s[2] * s[2] + s[3] * s[3]);
    return s[0] >= 0 && s[0] >= pol - eps_scale * s[0];
}

double fresnel_dielectric(double eta, double cos_theta_i) {
    const double cos_i = std::clamp(cos_theta_i, 0.0, 1.0);
    if ((1 - cos_i * cos_i) >= eta * eta)
        return 1;
    const FresnelAmplitudes f = fresnel_amplitudes(eta, cos_theta_i);
    return std::min(1.0, 0.5 * (std::norm(f.rs) + std::norm(f.rp)));
}

double fresnel_conductor(double eta, double k, double cos_theta_i) {
    const double cos_i = std::clamp(cos_theta_i, 0.0, 1.0);
    const Complex n(eta, k);
    const Complex sin2_t = (1 - cos_i * cos_i) / (n * n);
    const Complex cos_t = std::sqrt(1.0 - sin2_t);
    const Complex rs = (cos_i - n * cos_t) / (cos_i + n * cos_t);
    const Complex rp = (n * cos_i - cos_t) / (n * cos_i + cos_t);
    return 0.5 * (std::norm(rs) + std::norm(rp));
}

Vec3 perpendicular(const Vec3 &d) { return Frame::from_normal(d).s; }

Vec3 transport_frame(const Vec3 &frame, const Vec3 &from, const Vec3 &to) {
    const Vec3 axis = cross(from, to);
    const double sin_phi = length(axis);
    const double cos_phi = dot(from, to);
    Vec3 v = frame;
    if (sin_phi > 1e-12) {
        const Vec3 k = axis / sin_phi;
        v = frame * cos_phi + cross(k, frame) * sin_phi + k * (dot(k, frame) * (1 - cos_phi));
    }
    // Antiparallel directions: a half turn about `frame` itself keeps it.
    v = v - dot(v, to) * to;
    const double l = length(v);
    return l > 1e-12 ? v / l : perpendicular(to);
}

}  // namespace mitr
