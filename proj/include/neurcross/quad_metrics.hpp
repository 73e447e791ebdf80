#pragma once

// Quality measures for quad meshes.

#include "neurcross/mesh.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace neurcross {

struct QuadMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> quads;
};

/// Reads a quad OBJ (every `f` record has four corners); validates indices.
QuadMesh load_quad_mesh(const std::filesystem::path& path);
QuadMesh quad_mesh_from_obj(const ObjData& obj, const std::string& source_name = "<obj>");
void validate(const QuadMesh& q);

/// 1/2 |(v2 - v0) x (v3 - v1)|.
double quad_area(const QuadMesh& q, std::size_t i);

/// Population std of quad areas, x 10000.
double area_distortion(const QuadMesh& q);
/// RMS deviation of corner angles from 90 degrees, in degrees.
double angle_distortion(const QuadMesh& q);
/// Mean over quads of min/max corner Jacobian determinant (0 when degenerate).
double jacobian_ratio(const QuadMesh& q);
/// Symmetric mean nearest-neighbor Euclidean distance between n area-uniform
/// samples on each surface, x 10000.
double chamfer(const QuadMesh& q, const TriMesh& reference, std::size_t n_samples, std::uint64_t seed);
/// Interior vertices with valence != 4 plus boundary vertices whose incident
/// quad count differs from round(corner angle sum / 90 degrees).
std::size_t count_irregular(const QuadMesh& q);
/// Sum over vertices of (ideal valence - valence) / 4; equals the Euler
/// characteristic for a closed mesh.
double valence_index_sum(const QuadMesh& q);

/// Area-uniform random points on a triangle set.
Eigen::Matrix3Xd sample_surface(const std::vector<Vec3>& vertices, const std::vector<std::array<int, 3>>& tris,
                                std::size_t n, std::uint64_t seed);
/// Surface area of the quad mesh split along (0, 2) diagonals.
double quad_surface_area(const QuadMesh& q);

struct MetricsReport {
    double area = 0.0;
    double angle = 0.0;
    std::size_t sings = 0;
    double cd = 0.0;  // NaN without a reference
    double jr = 0.0;
};

MetricsReport evaluate_quad(const QuadMesh& q, const TriMesh* reference, std::size_t n_samples, std::uint64_t seed);

} // namespace neurcross
