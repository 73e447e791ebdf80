#include "neurcross/losses.hpp"
#include "neurcross/shapes.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace neurcross;

namespace {

// Field whose alpha is the projection of a fixed world direction on every face.
CrossField field_along(const TriMesh& m, const Vec3& dir, double twist = 0.0)
{
    std::vector<double> theta(m.face_count());
    for (std::size_t f = 0; f < m.face_count(); ++f)
        theta[f] = angle_in_frame(dir, m.frames()[f]) + twist;
    return make_cross_field(theta, m.frames());
}

TriMesh two_coplanar()
{
    std::istringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n");
    return mesh_from_obj(parse_obj(in));
}

} // namespace

TEST(Tau, Schedule)
{
    EXPECT_EQ(tau(0, 1000), 1.0);
    EXPECT_EQ(tau(199, 1000), 1.0);
    EXPECT_NEAR(tau(300, 1000), 0.5 * (1.0 + 3e-4), 1e-15);
    EXPECT_NEAR(tau(399, 1000), 1.0 + (3e-4 - 1.0) * 199.0 / 200.0, 1e-12);
    EXPECT_EQ(tau(400, 1000), 0.0);
    EXPECT_EQ(tau(999, 1000), 0.0);
    EXPECT_THROW(tau(0, 0), Error);
}

TEST(TotalLoss, ZeroWeightsAndLinearity)
{
    LossTerms t{1, 2, 3, 4, 5, 6};
    LossWeights zero{0, 0, 0, 0, 0, 0, 100, 10};
    EXPECT_EQ(total_loss(t, zero, 1.0), 0.0);
    LossWeights w;
    EXPECT_DOUBLE_EQ(total_loss(t, w, 0.5), 50 * 1 + 7000 * 2 + 600 * 3 + 0.5 * 3 * 4 + 10 * 5 + 30 * 6);
    t.ap = std::nan("");
    try {
        check_finite(t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("'ap'"), std::string::npos);
    }
}

TEST(SdfTerms, ClosedForms)
{
    // Exact SDF of a sphere: unit gradients, zero value on the surface.
    std::vector<Vec3> grads;
    std::vector<double> surface_values;
    for (int i = 0; i < 50; ++i) {
        const Vec3 x = Vec3(std::cos(i), std::sin(i), 0.3 * std::cos(3 * i)).normalized() * 0.4;
        const auto j = nctest::sphere_sdf(x, 0.4);
        grads.push_back(j.gradient);
        surface_values.push_back(j.value);
    }
    EXPECT_NEAR(loss_eikonal(grads), 0.0, 1e-15);
    EXPECT_NEAR(loss_dirichlet(surface_values), 0.0, 1e-15);
    EXPECT_EQ(loss_eikonal(std::vector<Vec3>(10, Vec3::Zero())), 1.0);
    EXPECT_EQ(loss_dirichlet(std::vector<double>(10, 0.0)), 0.0);
    EXPECT_EQ(loss_dirichlet_far(std::vector<double>(10, 0.0), 100.0), 1.0);
    EXPECT_NEAR(loss_dirichlet_far(std::vector<double>(10, 0.1), 100.0), std::exp(-10.0), 1e-18);
}

TEST(SdfTerms, SampleAdjointsMatchFiniteDifferences)
{
    const Vec3 g(0.3, -1.1, 0.4);
    Vec3 gbar;
    eikonal_sample(g, &gbar);
    for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = 1e-7;
        const double fd = (eikonal_sample(g + e, nullptr) - eikonal_sample(g - e, nullptr)) / 2e-7;
        EXPECT_NEAR(gbar[k], fd, 1e-7);
    }
    double fbar = 0;
    dnm_sample(-0.02, 100.0, &fbar);
    EXPECT_NEAR(fbar, (dnm_sample(-0.02 + 1e-8, 100, nullptr) - dnm_sample(-0.02 - 1e-8, 100, nullptr)) / 2e-8,
                1e-6);
}

TEST(AlignNormal, SphereOracle)
{
    std::vector<Mat3> H;
    std::vector<Vec3> n, flipped, tangent;
    double mean_inv_r = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Vec3 x = Vec3(std::cos(0.7 * i), std::sin(0.7 * i), std::sin(0.13 * i)).normalized() *
                       (0.3 + 0.002 * i);
        const auto j = nctest::sphere_sdf(x, 0.4);
        H.push_back(j.hessian);
        n.push_back(j.gradient);
        flipped.push_back(-j.gradient);
        tangent.push_back(j.gradient.unitOrthogonal());
        mean_inv_r += 1.0 / x.norm() / 100.0;
    }
    EXPECT_NEAR(loss_align_normal(H, n), 0.0, 1e-12);
    EXPECT_NEAR(loss_align_normal(H, flipped), 0.0, 1e-12);
    EXPECT_NEAR(loss_align_normal(H, tangent), mean_inv_r, 1e-12);
    EXPECT_THROW(loss_align_normal(H, {}), Error);
}

TEST(AlignNormal, AdjointMatchesFiniteDifferences)
{
    Mat3 H;
    H << 2, 0.3, -0.1, 0.3, -1, 0.5, -0.1, 0.5, 0.7;
    const Vec3 n = Vec3(0.2, 0.4, -0.9).normalized();
    Mat3 Hbar;
    an_sample(H, n, &Hbar);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            Mat3 E = Mat3::Zero();
            E(r, c) = 1e-7;
            const double fd = (an_sample(H + E, n, nullptr) - an_sample(H - E, n, nullptr)) / 2e-7;
            EXPECT_NEAR(Hbar(r, c), fd, 1e-7);
        }
}

TEST(AlignPrincipal, CylinderOracle)
{
    const double r = 0.2;
    std::vector<Mat3> H;
    CrossField aligned, rotated;
    for (int i = 0; i < 32; ++i) {
        const double phi = kTwoPi * i / 32.0;
        const Vec3 x(r * std::cos(phi), r * std::sin(phi), 0.01 * i);
        const auto j = nctest::cylinder_sdf(x, r);
        const Vec3 axis(0, 0, 1), around = axis.cross(j.gradient);
        H.push_back(j.hessian);
        aligned.alpha.push_back(axis);
        aligned.beta.push_back(around);
        aligned.theta.push_back(0);
        const Vec3 a = (axis + around) / std::sqrt(2.0), b = (around - axis) / std::sqrt(2.0);
        rotated.alpha.push_back(a);
        rotated.beta.push_back(b);
        rotated.theta.push_back(0);
    }
    EXPECT_NEAR(loss_align_principal(H, aligned, {}), 0.0, 1e-12);

    // Independent oracle: H v = (v.t / r) t with t the circumferential tangent, so
    // |H v x v| = |v.t| |t x v| / r = |sin 45 cos 45| / r for each branch.
    const double per_branch = std::abs(std::sin(kPi / 4) * std::cos(kPi / 4)) / r;
    EXPECT_NEAR(loss_align_principal(H, rotated, {}), 2.0 * per_branch, 1e-12);
    EXPECT_NEAR(2.0 * per_branch, 1.0 / r, 1e-12);

    EXPECT_EQ(loss_align_principal(H, rotated, std::vector<double>(32, 0.0)), 0.0);
}

TEST(AlignPrincipal, AdjointsMatchFiniteDifferences)
{
    Mat3 H;
    H << 1.5, 0.2, 0.1, 0.2, -0.7, 0.4, 0.1, 0.4, 0.3;
    const LocalFrame fr{Vec3(1, 0, 0), Vec3(0, 0.6, 0.8), Vec3(0, -0.8, 0.6)};
    const double theta = 0.37;
    auto value = [&](const Mat3& h, double t) {
        auto [a, b] = cross_from_theta(t, fr);
        return ap_sample(h, a, b, nullptr, nullptr, nullptr);
    };
    auto [a, b] = cross_from_theta(theta, fr);
    Mat3 Hbar;
    Vec3 abar, bbar;
    ap_sample(H, a, b, &Hbar, &abar, &bbar);
    const double dtheta = theta_adjoint(a, b, abar, bbar);
    EXPECT_NEAR(dtheta, (value(H, theta + 1e-7) - value(H, theta - 1e-7)) / 2e-7, 1e-7);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            Mat3 E = Mat3::Zero();
            E(r, c) = 1e-7;
            EXPECT_NEAR(Hbar(r, c), (value(H + E, theta) - value(H - E, theta)) / 2e-7, 1e-7);
        }
}

TEST(CrossField, ClosedForms)
{
    const LocalFrame fr{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    auto [a0, b0] = cross_from_theta(0.0, fr);
    EXPECT_EQ(a0, fr.mu);
    EXPECT_EQ(b0, fr.nu);
    auto [a1, b1] = cross_from_theta(kHalfPi, fr);
    EXPECT_LT((a1 - fr.nu).norm(), 1e-15);
    EXPECT_LT((b1 + fr.mu).norm(), 1e-15);
    auto [a2, b2] = cross_from_theta(kPi / 4, fr);
    EXPECT_LT((a2 - Vec3(std::sqrt(0.5), std::sqrt(0.5), 0)).norm(), 1e-15);
    EXPECT_NEAR(angle_in_frame(a2, fr), kPi / 4, 1e-15);
}

// Smoothness identities.
TEST(Smoothness, ConstantFieldOnFlatGridIsZero)
{
    const TriMesh m = shapes::shuffle_face_starts(shapes::flat_grid(12, 9, 0.1), 5);
    EXPECT_NEAR(loss_smoothness(field_along(m, Vec3(1, 0, 0)), m), 0.0, 1e-9);
    EXPECT_NEAR(loss_smoothness(field_along(m, Vec3(0.3, 0.7, 0)), m), 0.0, 1e-9);
}

TEST(Smoothness, PairExtremes)
{
    const TriMesh m = two_coplanar();
    // Both faces have one neighbor, so the loss equals the per-pair value.
    std::vector<double> theta{angle_in_frame(Vec3(1, 0, 0), m.frames()[0]),
                              angle_in_frame(Vec3(1, 0, 0), m.frames()[1])};
    const double aligned = loss_smoothness(make_cross_field(theta, m.frames()), m);
    EXPECT_NEAR(aligned, 0.0, 1e-12);

    for (double twist : {kPi / 4, -kPi / 4, 3 * kPi / 4}) {
        auto t = theta;
        t[1] += twist;
        EXPECT_NEAR(loss_smoothness(make_cross_field(t, m.frames()), m), 2.0 * std::sqrt(2.0) - 2.0, 1e-9);
    }
    for (double twist : {kHalfPi, kPi, -kHalfPi}) {
        auto t = theta;
        t[1] += twist;
        EXPECT_NEAR(loss_smoothness(make_cross_field(t, m.frames()), m), 0.0, 1e-9);
    }
    // Raw pair sum before subtracting 2: extremes 2 and 2 sqrt 2.
    const LocalFrame& fr = m.frames()[0];
    auto [a, b] = cross_from_theta(0.0, fr);
    auto [A, B] = cross_from_theta(kPi / 4, fr);
    EXPECT_NEAR(smoothness_pair(a, b, A, B, nullptr, nullptr) + 2.0, 2.0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(smoothness_pair(a, b, a, b, nullptr, nullptr) + 2.0, 2.0, 1e-12);
}

TEST(Smoothness, InvariantUnderQuarterTurnsAndFaceStart)
{
    const TriMesh m = shapes::icosphere(2);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, kTwoPi);
    std::vector<double> theta(m.face_count());
    for (double& t : theta)
        t = u(rng);
    const double base = loss_smoothness(make_cross_field(theta, m.frames()), m);
    std::uniform_int_distribution<int> k(0, 3);
    auto turned = theta;
    for (double& t : turned)
        t += kHalfPi * k(rng);
    EXPECT_NEAR(loss_smoothness(make_cross_field(turned, m.frames()), m), base, 1e-12);
}

TEST(Smoothness, GradientMatchesFiniteDifferences)
{
    const TriMesh m = shapes::cylinder(0.2, 0.6, 12, 6);  // has boundary faces
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, kTwoPi);
    std::vector<double> theta(m.face_count());
    for (double& t : theta)
        t = u(rng);
    std::vector<double> grad;
    loss_smoothness(make_cross_field(theta, m.frames()), m, &grad);
    for (std::size_t f = 0; f < m.face_count(); f += 5) {
        auto tp = theta, tm = theta;
        tp[f] += 1e-7;
        tm[f] -= 1e-7;
        const double fd = (loss_smoothness(make_cross_field(tp, m.frames()), m) -
                           loss_smoothness(make_cross_field(tm, m.frames()), m)) /
                          2e-7;
        EXPECT_NEAR(grad[f], fd, 1e-6) << "face " << f;
    }
}

TEST(FeatureConstraints, WeightsAndFixedAngles)
{
    const TriMesh m = shapes::flat_grid(6, 6, 1.0);
    EXPECT_EQ(feature_constraints(m, {}, 10.0).constrained_count, 0u);
    EXPECT_EQ(feature_constraints(m, {}, 10.0).weight, std::vector<double>(m.face_count(), 1.0));

    // Feature line along y = 3: vertex (i, 3) has index 3 * 7 + i in the grid.
    FeatureLines lines;
    std::vector<int> chain;
    for (int i = 0; i <= 6; ++i)
        chain.push_back(3 * 7 + i);
    ASSERT_LT((m.vertices()[chain[2]] - Vec3(2, 3, 0)).norm(), 1e-12);
    lines.polylines.push_back(chain);
    const FeatureConstraints fc = feature_constraints(m, lines, 10.0);
    EXPECT_EQ(fc.constrained_count, 12u);  // one face per side per cell row
    for (std::size_t f = 0; f < m.face_count(); ++f) {
        const double d = std::abs(m.centroids()[f].y() - 3.0);
        EXPECT_NEAR(fc.weight[f], 1.0 - std::exp(-10.0 * d), 1e-12);
        if (fc.constrained[f]) {
            auto [a, b] = cross_from_theta(fc.fixed_theta[f], m.frames()[f]);
            EXPECT_NEAR(std::abs(a.x()), 1.0, 1e-12);
            EXPECT_GE(fc.fixed_theta[f], 0.0);
            EXPECT_LT(fc.fixed_theta[f], kTwoPi);
        }
    }
    FeatureLines bad;
    bad.polylines.push_back({0, 1000});
    EXPECT_THROW(feature_constraints(m, bad, 10.0), Error);
}
