#include "neurcross/quad_metrics.hpp"
#include "neurcross/shapes.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace neurcross;

namespace {

QuadMesh single(const std::vector<Vec3>& corners)
{
    return QuadMesh{corners, {{0, 1, 2, 3}}};
}

QuadMesh scaled(QuadMesh q, double s)
{
    for (auto& v : q.vertices)
        v *= s;
    return q;
}

QuadMesh moved(QuadMesh q, const Mat3& R, const Vec3& t)
{
    for (auto& v : q.vertices)
        v = R * v + t;
    return q;
}

} // namespace

TEST(QuadMetrics, UnitGridIsPerfect)
{
    const QuadMesh g = shapes::quad_grid(10, 7, 1.0);
    EXPECT_EQ(g.quads.size(), 70u);
    EXPECT_EQ(area_distortion(g), 0.0);
    EXPECT_NEAR(angle_distortion(g), 0.0, 1e-12);
    EXPECT_NEAR(jacobian_ratio(g), 1.0, 1e-15);
    EXPECT_EQ(count_irregular(g), 0u);
    EXPECT_EQ(valence_index_sum(g), 0.0);
}

TEST(QuadMetrics, AreaStd)
{
    // Areas 1 and 3: population std 1.
    const QuadMesh q{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {2, 0, 0}, {5, 0, 0}, {5, 1, 0}, {2, 1, 0}},
                     {{0, 1, 2, 3}, {4, 5, 6, 7}}};
    EXPECT_NEAR(quad_area(q, 0), 1.0, 1e-15);
    EXPECT_NEAR(quad_area(q, 1), 3.0, 1e-15);
    EXPECT_NEAR(area_distortion(q), 10000.0, 1e-9);
    EXPECT_NEAR(area_distortion(scaled(q, 2.0)), 40000.0, 1e-8);
    EXPECT_THROW(area_distortion(QuadMesh{}), Error);
}

TEST(QuadMetrics, RhombusAngle)
{
    const double c = std::cos(kPi / 3), s = std::sin(kPi / 3);
    const QuadMesh r = single({{0, 0, 0}, {1, 0, 0}, {1 + c, s, 0}, {c, s, 0}});
    EXPECT_NEAR(angle_distortion(r), 30.0, 1e-12);
    EXPECT_NEAR(jacobian_ratio(r), 1.0, 1e-15);  // parallelogram
    EXPECT_THROW(angle_distortion(single({{0, 0, 0}, {0, 0, 0}, {1, 1, 0}, {0, 1, 0}})), Error);
}

TEST(QuadMetrics, JacobianRatio)
{
    EXPECT_NEAR(jacobian_ratio(single({{0, 0, 0}, {2, 0, 0}, {3, 1, 0}, {1, 1, 0}})), 1.0, 1e-15);
    // Corner 1 lies on the segment from corner 0 to corner 2.
    EXPECT_EQ(jacobian_ratio(single({{0, 0, 0}, {1, 1, 0}, {2, 2, 0}, {0, 2, 0}})), 0.0);
    // Trapezoid: corner determinants 2, 2, 1, 1.
    EXPECT_NEAR(jacobian_ratio(single({{0, 0, 0}, {2, 0, 0}, {1.5, 1, 0}, {0.5, 1, 0}})), 0.5, 1e-15);
    // Reflex corner gives a negative determinant.
    EXPECT_EQ(jacobian_ratio(single({{0, 0, 0}, {2, 0, 0}, {0.5, 0.5, 0}, {0, 2, 0}})), 0.0);
}

TEST(QuadMetrics, CubeHasEightIrregularCorners)
{
    const QuadMesh c = shapes::quad_cube(1.0);
    EXPECT_EQ(c.vertices.size(), 8u);
    EXPECT_EQ(count_irregular(c), 8u);
    EXPECT_NEAR(valence_index_sum(c), 2.0, 1e-15);
    const QuadMesh s = shapes::quad_sphere(6, 1.0);
    EXPECT_EQ(count_irregular(s), 8u);
    EXPECT_NEAR(valence_index_sum(s), 2.0, 1e-15);
}

TEST(QuadMetrics, RigidMotionInvariance)
{
    const QuadMesh s = shapes::quad_sphere(5, 0.4);
    const Mat3 R = axis_angle(Vec3(1, 2, 3).normalized(), 0.7);
    const QuadMesh m = moved(s, R, Vec3(0.3, -1, 2));
    EXPECT_NEAR(area_distortion(m), area_distortion(s), 1e-9);
    EXPECT_NEAR(angle_distortion(m), angle_distortion(s), 1e-9);
    EXPECT_NEAR(jacobian_ratio(m), jacobian_ratio(s), 1e-12);
    EXPECT_NEAR(angle_distortion(scaled(s, 3.0)), angle_distortion(s), 1e-9);
}

TEST(QuadMetrics, ChamferSelfAndOffset)
{
    const QuadMesh g = shapes::quad_grid(10, 10, 0.1);
    const TriMesh ref = shapes::triangulate(g);
    const std::size_t n = 100000;
    const double self = chamfer(g, ref, n, 1);
    // Independent sample sets: mean nearest-neighbor distance is about
    // 0.5 sqrt(A / n) for a planar Poisson process.
    const double floor = std::sqrt(ref.total_area() / static_cast<double>(n)) * 1e4;
    EXPECT_LT(self, floor);
    EXPECT_GT(self, 0.25 * floor);
    EXPECT_EQ(chamfer(g, ref, 20000, 4), chamfer(g, ref, 20000, 4));

    const double t = 0.01;
    const QuadMesh lifted = moved(g, Mat3::Identity(), Vec3(0, 0, t));
    EXPECT_NEAR(chamfer(lifted, ref, n, 1) / (t * 1e4), 1.0, 0.05);
}

TEST(QuadMetrics, SurfaceSamplingIsAreaUniform)
{
    const QuadMesh q{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {1, 0, 0}, {4, 0, 0}, {4, 1, 0}, {1, 1, 0}},
                     {{0, 1, 2, 3}, {4, 5, 6, 7}}};
    EXPECT_NEAR(quad_surface_area(q), 4.0, 1e-15);
    std::vector<std::array<int, 3>> tris{{0, 1, 2}, {0, 2, 3}, {4, 5, 6}, {4, 6, 7}};
    const Eigen::Matrix3Xd p = sample_surface(q.vertices, tris, 40000, 3);
    const double left = (p.row(0).array() < 1.0).cast<double>().mean();
    EXPECT_NEAR(left, 0.25, 3 * std::sqrt(0.25 * 0.75 / 40000));
}

TEST(QuadMetrics, InputValidation)
{
    std::istringstream tri("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    EXPECT_THROW(quad_mesh_from_obj(parse_obj(tri)), Error);
    EXPECT_THROW(validate(QuadMesh{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}, {{0, 1, 2, 2}}}), Error);
    EXPECT_THROW(validate(QuadMesh{{{0, 0, 0}}, {{0, 1, 2, 3}}}), Error);
    // Three quads sharing one edge.
    const QuadMesh fan{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {1, -1, 0}, {0, -1, 0}, {1, 0, 1}, {0, 0, 1}},
                       {{0, 1, 2, 3}, {1, 0, 5, 4}, {0, 1, 6, 7}}};
    EXPECT_THROW(count_irregular(fan), Error);
}

TEST(QuadMetrics, ReportAndRange)
{
    const QuadMesh s = shapes::quad_sphere(4, 0.5);
    const MetricsReport r = evaluate_quad(s, nullptr, 1000, 0);
    EXPECT_TRUE(std::isnan(r.cd));
    EXPECT_GE(r.jr, 0.0);
    EXPECT_LE(r.jr, 1.0);
    EXPECT_GT(r.angle, 0.0);
    EXPECT_EQ(r.sings, 8u);
}
