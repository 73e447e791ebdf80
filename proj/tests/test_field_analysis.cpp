#include "neurcross/field_analysis.hpp"
#include "neurcross/shapes.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

using namespace neurcross;

namespace {

CrossField field_from_directions(const TriMesh& m, const std::function<Vec3(const Vec3&)>& dir, double twist = 0.0)
{
    std::vector<double> theta(m.face_count());
    for (std::size_t f = 0; f < m.face_count(); ++f)
        theta[f] = angle_in_frame(dir(m.centroids()[f]), m.frames()[f]) + twist;
    return make_cross_field(theta, m.frames());
}

CrossField random_field(const TriMesh& m, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    std::vector<double> theta(m.face_count());
    for (double& t : theta)
        t = u(rng);
    return make_cross_field(theta, m.frames());
}

double quarter_sum(const SingularityReport& r)
{
    double s = 0.0;
    for (std::size_t v = 0; v < r.index.size(); ++v) {
        EXPECT_EQ(4.0 * r.index[v], std::round(4.0 * r.index[v]));
        s += r.index[v];
    }
    return s;
}

} // namespace

TEST(Singularities, ReduceQuarter)
{
    EXPECT_NEAR(reduce_quarter(0.1), 0.1, 1e-15);
    EXPECT_NEAR(reduce_quarter(0.1 + kHalfPi), 0.1, 1e-15);
    EXPECT_NEAR(reduce_quarter(-0.1 - 3 * kHalfPi), -0.1, 1e-14);
    EXPECT_NEAR(reduce_quarter(kPi / 4), kPi / 4, 1e-15);
    EXPECT_NEAR(reduce_quarter(-kPi / 4), kPi / 4, 1e-15);
}

TEST(Singularities, FlatGridConstantFieldHasNone)
{
    const TriMesh m = shapes::shuffle_face_starts(shapes::flat_grid(8, 8, 0.1), 2);
    const auto r = singularities(field_from_directions(m, [](const Vec3&) { return Vec3(1, 2, 0); }), m);
    EXPECT_EQ(r.singular_count, 0u);
    EXPECT_EQ(r.total_index, 0.0);
    EXPECT_EQ(r.boundary_vertex_count, 32u);
    EXPECT_LT(r.max_rounding_residual, 1e-9);
}

TEST(Singularities, SphereAxisFieldHasPositivePoles)
{
    // A field following the projected axis turns once around each pole.  The
    // turn is too fast for single edges right at a pole, so each +1 may split
    // into nearby quarter indices; away from the poles (including the curved
    // valence-5 vertices) every index must vanish.
    const TriMesh m = shapes::icosphere(3, 0.4);
    const Vec3 axis = Vec3(0.1, 0.05, 1).normalized();
    const auto r = singularities(field_from_directions(m, [&](const Vec3&) { return axis; }), m);
    EXPECT_EQ(r.total_index, 2.0);
    double north = 0.0, south = 0.0;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        const double z = m.vertices()[v].normalized().dot(axis);
        if (std::abs(z) < 0.95)
            EXPECT_EQ(r.index[v], 0.0) << "vertex " << v;
        (z > 0 ? north : south) += r.index[v];
    }
    EXPECT_EQ(north, 1.0);
    EXPECT_EQ(south, 1.0);
    EXPECT_LT(r.max_rounding_residual, 1e-9);
}

TEST(Singularities, CubeCornersCarryCurvature)
{
    // Edge-aligned crosses match exactly across every cube edge, so each
    // corner index is its angle defect pi/2 over 2 pi.
    const TriMesh m = shapes::triangulate(shapes::quad_cube(1.0));
    std::vector<double> theta(m.face_count());
    for (std::size_t f = 0; f < m.face_count(); ++f) {
        const auto& t = m.faces()[f];
        Vec3 axis_edge = Vec3::Zero();
        for (int j = 0; j < 3 && axis_edge.isZero(); ++j) {
            const Vec3 e = m.vertices()[t[(j + 1) % 3]] - m.vertices()[t[j]];
            if (e.cwiseAbs().maxCoeff() > e.norm() - 1e-12)
                axis_edge = e;
        }
        theta[f] = angle_in_frame(axis_edge, m.frames()[f]);
    }
    const auto r = singularities(make_cross_field(theta, m.frames()), m);
    EXPECT_EQ(r.singular_count, 8u);
    for (double i : r.index)
        EXPECT_EQ(i, 0.25);
    EXPECT_EQ(r.total_index, 2.0);
}

TEST(Singularities, TorusLongitudeFieldHasNone)
{
    const TriMesh m = shapes::shuffle_face_starts(shapes::torus(0.35, 0.15, 40, 16), 9);
    const auto oracle = torus_oracle(0.35, 0.15);
    const auto r = singularities(field_from_directions(m, [&](const Vec3& p) { return *oracle(p, Vec3::Zero()); }), m);
    EXPECT_EQ(r.total_index, 0.0);
    EXPECT_EQ(r.singular_count, 0u);
}

TEST(Singularities, PoincareHopfHoldsForArbitraryFields)
{
    struct Case {
        TriMesh mesh;
        long chi;
    };
    const std::vector<Case> cases{{shapes::icosphere(2), 2},
                                  {shapes::torus(0.35, 0.15, 24, 12), 0},
                                  {shapes::genus2(), -2},
                                  {shapes::bumpy_sphere(2, 0.4, 0.05, 3), 2}};
    for (const auto& c : cases)
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const auto r = singularities(random_field(c.mesh, seed), c.mesh);
            EXPECT_EQ(r.euler_characteristic, c.chi);
            EXPECT_EQ(r.total_index, static_cast<double>(c.chi));
            EXPECT_EQ(quarter_sum(r), r.total_index);
            EXPECT_LT(r.max_rounding_residual, 1e-9);
        }
}

TEST(Singularities, InvariantUnderFaceStartRotation)
{
    // Same geometry, different per-face frames: the index field must not change.
    const TriMesh a = shapes::icosphere(2);
    const TriMesh b = shapes::shuffle_face_starts(a, 77);
    const CrossField fa = random_field(a, 4);
    std::vector<double> theta_b(b.face_count());
    for (std::size_t f = 0; f < b.face_count(); ++f)
        theta_b[f] = angle_in_frame(fa.alpha[f], b.frames()[f]);
    const auto ra = singularities(fa, a);
    const auto rb = singularities(make_cross_field(theta_b, b.frames()), b);
    EXPECT_EQ(ra.index, rb.index);
}

TEST(Singularities, RejectsSizeMismatch)
{
    const TriMesh m = shapes::icosahedron();
    EXPECT_THROW(singularities(random_field(shapes::icosphere(1), 1), m), Error);
}

TEST(FieldExport, RoundTripAndFormat)
{
    const TriMesh m = shapes::icosahedron();
    const CrossField f = random_field(m, 3);
    const auto dir = nctest::scratch_dir("export");
    export_field(f, dir / "f.rosy");
    std::ifstream in(dir / "f.rosy");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line))
        ++lines;
    EXPECT_EQ(lines, 21u);
    const CrossField g = import_field(dir / "f.rosy");
    ASSERT_EQ(g.alpha.size(), 20u);
    for (std::size_t i = 0; i < 20; ++i) {
        EXPECT_LT((g.alpha[i] - f.alpha[i]).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_LT((g.beta[i] - f.beta[i]).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_NEAR(g.alpha[i].norm(), 1.0, 1e-6);
    }
    std::ofstream(dir / "bad.rosy") << "ROSY 2 3\n";
    EXPECT_THROW(import_field(dir / "bad.rosy"), Error);
    std::ofstream(dir / "short.rosy") << "ROSY 4 3\n1 0 0 0 1 0\n";
    EXPECT_THROW(import_field(dir / "short.rosy"), Error);
}

TEST(Alignment, SelfAndWorstCase)
{
    const TriMesh m = shapes::shuffle_face_starts(shapes::torus(0.35, 0.15, 40, 16), 1);
    const auto oracle = torus_oracle(0.35, 0.15);
    auto along = [&](const Vec3& p) { return *oracle(p, Vec3::Zero()); };
    const auto exact = alignment_error(field_from_directions(m, along), m, oracle);
    EXPECT_NEAR(exact.median, 0.0, 1e-6);
    EXPECT_EQ(exact.count, m.face_count());
    // Quarter turns are the same cross.
    EXPECT_NEAR(alignment_error(field_from_directions(m, along, kHalfPi), m, oracle).median, 0.0, 1e-6);
    EXPECT_NEAR(alignment_error(field_from_directions(m, along, kPi / 4), m, oracle).median, kPi / 4, 1e-6);
    EXPECT_NEAR(alignment_error(field_from_directions(m, along, 0.1), m, oracle).max, 0.1, 1e-6);

    const TriMesh c = shapes::cylinder(0.2, 0.8, 30, 12);
    const auto ce = alignment_error(field_from_directions(c, [](const Vec3&) { return Vec3(0, 0, 1); }), c,
                                    cylinder_oracle());
    EXPECT_LT(ce.max, 1e-9);
    EXPECT_THROW(torus_oracle(0.1, 0.2), Error);
}

TEST(ExtractField, ConstraintsOverrideNetwork)
{
    const TriMesh m = shapes::flat_grid(4, 4, 1.0);
    AngleArchitecture a;
    a.direct = true;
    const AngleModel model = init_angle_model(a, m.face_count(), 1);
    FeatureLines lines;
    lines.polylines.push_back({0, 1, 2, 3, 4});
    const FeatureConstraints fc = feature_constraints(m, lines, 10.0);
    const CrossField f = extract_field(model, m, &fc);
    const CrossField g = extract_field(model, m, &fc);
    for (std::size_t i = 0; i < m.face_count(); ++i) {
        EXPECT_EQ(f.alpha[i], g.alpha[i]);
        EXPECT_LT(f.alpha[i].cross(f.beta[i]).dot(m.face_normals()[i]) - 1.0, 1e-12);
        if (fc.constrained[i])
            EXPECT_NEAR(std::abs(f.alpha[i].x()), 1.0, 1e-12);
    }
    EXPECT_THROW(extract_field(model, shapes::icosahedron()), Error);
}
