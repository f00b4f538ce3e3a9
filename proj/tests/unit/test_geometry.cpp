// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#include <mitr/geometry.h>
#include <mitr/render_scene.h>
#include <mitr/rng.h>
#include <mitr/sampling.h>
#include <mitr/scene.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

using namespace mitr;

namespace {

// Known-answer vectors of the Random123 distribution (kat_vectors, philox4x32 10 rounds).
TEST(Philox, KnownAnswers) {
    using A4 = std::array<uint32_t, 4>;
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, GoldenSequence) {
    std::ifstream in(std::string(MITR_TEST_DATA) + "/rng_golden.txt");
    ASSERT_TRUE(in) << "missing golden file";
    RngState rng(0, 0);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        std::string hex;
        double value = 0;
        ss >> hex >> value;
        const uint64_t expected = std::stoull(hex, nullptr, 16);
        RngState copy = rng;
        EXPECT_EQ(copy.next_u64(), expected) << "draw " << n;
        EXPECT_EQ(rng.next_double(), value) << "draw " << n;
        ++n;
    }
    EXPECT_GE(n, 16);
}

TEST(Rng, DistinctStreamsDiffer) {
    for (uint64_t s = 0; s < 64; ++s) {
        RngState a(0, rng_stream(s, 0, RngDomain::Path)), b(0, rng_stream(s, 1, RngDomain::Path));
        RngState c(0, rng_stream(s, 0, RngDomain::Nlos));
        for (int i = 0; i < 8; ++i) {
            const double va = a.next_double(), vb = b.next_double(), vc = c.next_double();
            EXPECT_NE(va, vb);
            EXPECT_NE(va, vc);
        }
    }
}

TEST(Rng, UnitIntervalRange) {
    RngState rng(12345, 67);
    double lo = 1, hi = 0;
    for (int i = 0; i < 10'000'000; ++i) {
        const double v = rng.next_double();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_GE(lo, 0.0);
    EXPECT_LT(hi, 1.0);
}

TEST(Rng, CopiesReplay) {
    RngState a(7, 9);
    a.next_double();
    RngState b = a;
    for (int i = 0; i < 100; ++i)
        EXPECT_EQ(a.next_u64(), b.next_u64());
}

Bvh single_sphere() {
    Primitive p;
    p.kind = Primitive::Kind::Sphere;
    p.p0 = {0, 0, 0};
    p.radius = 1;
    return Bvh({p});
}

TEST(Intersect, UnitSphere) {
    const Bvh bvh = single_sphere();
    Ray ray{{0, 0, -2}, {0, 0, 1}};
    const auto si = ray_intersect(bvh, ray);
    ASSERT_TRUE(si);
    EXPECT_NEAR(si->distance, 1.0, 1e-12);
    EXPECT_NEAR(si->geometric_normal.z, -1.0, 1e-12);
    EXPECT_NEAR(length(si->position - Vec3{0, 0, -1}), 0.0, 1e-12);
    EXPECT_GT(dot(si->shading_normal, si->geometric_normal), 0.0);

    ray.t_max = 0.5;
    EXPECT_FALSE(ray_intersect(bvh, ray));
}

TEST(Intersect, CornellCenterRayHitsBackWall) {
    const SceneDescription desc = cornell_box();
    const Scene scene(desc);
    const Vec3 o = desc.camera.origin;
    const Vec3 dir = normalize(desc.camera.look_at - o);
    // Analytic plane intersection with the back wall rectangle.
    const int back = desc.find_shape("back");
    ASSERT_GE(back, 0);
    const auto &r = std::get<RectangleGeometry>(desc.shapes[back].geometry);
    const Vec3 n = normalize(cross(r.edge_u, r.edge_v));
    const double t_expected = dot(r.origin - o, n) / dot(dir, n);

    const auto si = scene.intersect(Ray{o, dir});
    ASSERT_TRUE(si);
    EXPECT_EQ(si->shape_id, back);
    EXPECT_NEAR(si->distance, t_expected, 1e-9);
    EXPECT_LT(length(si->position - (o + si->distance * dir)), 1e-4 * si->distance);
}

std::vector<Primitive> random_triangles(std::mt19937_64 &gen, int count) {
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Primitive> prims;
    for (int i = 0; i < count; ++i) {
        Primitive p;
        p.kind = Primitive::Kind::Triangle;
        p.shape_id = i;
        p.p0 = {u(gen), u(gen), u(gen)};
        p.e1 = Vec3{u(gen), u(gen), u(gen)} * 0.3;
        p.e2 = Vec3{u(gen), u(gen), u(gen)} * 0.3;
        prims.push_back(p);
    }
    return prims;
}

Ray random_ray(std::mt19937_64 &gen) {
    std::uniform_real_distribution<double> u(-1, 1);
    const Vec3 o = Vec3{u(gen), u(gen), u(gen)} * 2.5;
    const Vec3 target{u(gen) * 0.5, u(gen) * 0.5, u(gen) * 0.5};
    return Ray{o, normalize(target - o)};
}

TEST(Intersect, BvhMatchesEveryMember) {
    std::mt19937_64 gen(11);
    const auto prims = random_triangles(gen, 300);
    const Bvh bvh(prims);
    for (int k = 0; k < 2000; ++k) {
        const Ray ray = random_ray(gen);
        const auto hit = bvh.intersect(ray);
        double best = kInfinity;
        for (const Primitive &p : prims) {
            Vec2 uv;
            if (const auto t = p.intersect(ray, uv)) {
                best = std::min(best, *t);
                ASSERT_TRUE(hit);
                EXPECT_LE(hit->t, *t);
            }
        }
        if (hit)
            EXPECT_EQ(hit->t, best);
        else
            EXPECT_EQ(best, kInfinity);
    }
}

TEST(Intersect, PermutationInvariant) {
    std::mt19937_64 gen(5);
    auto prims = random_triangles(gen, 120);
    // Exact duplicates force ties between different shapes.
    for (int i = 0; i < 20; ++i) {
        Primitive d = prims[i];
        d.shape_id = 200 + i;
        prims.push_back(d);
    }
    const Bvh reference(prims);
    std::vector<Ray> rays;
    for (int k = 0; k < 500; ++k)
        rays.push_back(random_ray(gen));
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(prims.begin(), prims.end(), gen);
        const Bvh shuffled(prims);
        for (const Ray &ray : rays) {
            const auto a = reference.intersect(ray), b = shuffled.intersect(ray);
            ASSERT_EQ(a.has_value(), b.has_value());
            if (a) {
                EXPECT_EQ(a->t, b->t);
                EXPECT_EQ(a->shape_id, b->shape_id);
            }
        }
    }
}

TEST(Intersect, TieGoesToLowestShapeId) {
    Primitive a;
    a.kind = Primitive::Kind::Rectangle;
    a.p0 = {-1, -1, 0};
    a.e1 = {2, 0, 0};
    a.e2 = {0, 2, 0};
    Primitive b = a;
    a.shape_id = 7;
    b.shape_id = 3;
    for (const auto &order : {std::vector{a, b}, std::vector{b, a}}) {
        const auto hit = Bvh(order).intersect(Ray{{0.1, 0.2, 1}, {0, 0, -1}});
        ASSERT_TRUE(hit);
        EXPECT_EQ(hit->shape_id, 3);
    }
}

TEST(Sampling, CosineHemispherePdf) {
    const auto s = sample_cosine_hemisphere({0, 0});
    EXPECT_NEAR(length(s.direction), 1.0, 1e-12);
    EXPECT_GE(s.direction.z, 0.0);
    EXPECT_NEAR(s.pdf, s.direction.z / kPi, 1e-12);
    RngState rng(1, rng_stream(0, 0, RngDomain::Test));
    for (int i = 0; i < 1000; ++i) {
        const auto d = sample_cosine_hemisphere({rng.next_double(), rng.next_double()});
        EXPECT_GE(d.direction.z, 0.0);
        EXPECT_NEAR(d.pdf, cosine_hemisphere_pdf(d.direction.z), 1e-12);
    }
}

TEST(Sampling, CosineHemisphereMeanZ) {
    RngState rng(2, rng_stream(0, 0, RngDomain::Test));
    const int n = 1'000'000;
    double sum = 0;
    for (int i = 0; i < n; ++i)
        sum += sample_cosine_hemisphere({rng.next_double(), rng.next_double()}).direction.z;
    // Var[z] = 1/2 - 4/9 under the cosine density.
    const double sigma = std::sqrt((0.5 - 4.0 / 9.0) / n);
    EXPECT_NEAR(sum / n, 2.0 / 3.0, 3 * sigma);
}

TEST(Sampling, CosineHemispherePdfIntegratesToOne) {
    RngState rng(3, rng_stream(0, 0, RngDomain::Test));
    const int n = 1'000'000;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        const auto d = sample_uniform_sphere({rng.next_double(), rng.next_double()});
        sum += cosine_hemisphere_pdf(d.direction.z) / d.pdf;
    }
    EXPECT_NEAR(sum / n, 1.0, 0.01);
}

TEST(Sampling, CosineHemisphereChiSquare) {
    // Under the cosine density z^2 and phi are independent and uniform.
    constexpr int kBins = 16;
    const int n = 1'000'000;
    std::vector<double> counts(kBins * kBins, 0.0);
    RngState rng(4, rng_stream(0, 0, RngDomain::Test));
    for (int i = 0; i < n; ++i) {
        const Vec3 d = sample_cosine_hemisphere({rng.next_double(), rng.next_double()}).direction;
        const double phi = std::atan2(d.y, d.x) + kPi;
        const int a = std::min(kBins - 1, static_cast<int>(d.z * d.z * kBins));
        const int b = std::min(kBins - 1, static_cast<int>(phi / (2 * kPi) * kBins));
        counts[a * kBins + b] += 1;
    }
    const double expected = static_cast<double>(n) / (kBins * kBins);
    double chi2 = 0;
    for (double c : counts)
        chi2 += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(kBins * kBins - 1);
    EXPECT_LT(chi2, boost::math::quantile(boost::math::complement(dist, 0.001)));
}

TEST(Sampling, UniformTriangleInside) {
    RngState rng(5, 0);
    for (int i = 0; i < 10000; ++i) {
        const Vec2 b = sample_uniform_triangle({rng.next_double(), rng.next_double()});
        EXPECT_GE(b.x, 0.0);
        EXPECT_GE(b.y, 0.0);
        EXPECT_LE(b.x + b.y, 1.0 + 1e-12);
    }
}

TEST(Sampling, RayEpsilonScalesWithPosition) {
    EXPECT_DOUBLE_EQ(ray_epsilon({0.1, 0, 0}), 1e-4);
    EXPECT_DOUBLE_EQ(ray_epsilon({0, 300, 400}), 1e-4 * 500);
}

}  // namespace
