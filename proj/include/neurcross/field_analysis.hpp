#pragma once

#include "neurcross/angle_model.hpp"
#include "neurcross/losses.hpp"
#include "neurcross/mesh.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace neurcross {

/// Cross per face from the angle model; feature-constrained faces take
/// their prescribed angle when constraints are given.
CrossField extract_field(const AngleModel& model, const TriMesh& mesh,
                         const FeatureConstraints* constraints = nullptr);

struct SingularityReport {
    std::vector<double> index;      // per vertex, multiple of 1/4; 0 on the boundary
    std::vector<char> boundary;     // vertex lies on an open boundary
    double total_index = 0.0;       // over interior vertices
    long euler_characteristic = 0;
    std::size_t singular_count = 0; // interior vertices with nonzero index
    std::size_t boundary_vertex_count = 0;
    /// Largest distance of an unrounded index from its quarter-integer;
    /// near zero for a consistent transport.
    double max_rounding_residual = 0.0;
};

/// 4-RoSy index per interior vertex from the field matching around its
/// one-ring, transported by the edge rotations. Throws on a non-disk one-ring.
SingularityReport singularities(const CrossField& field, const TriMesh& mesh);

/// Reduces an angle into (-pi/4, pi/4].
double reduce_quarter(double angle);

void export_field(const CrossField& field, const std::filesystem::path& path);
/// Reads alpha/beta pairs; theta is left empty.
CrossField import_field(const std::filesystem::path& path);

/// Analytic principal direction at a surface point with the given normal;
/// nullopt where undefined (umbilic).
using DirectionOracle = std::function<std::optional<Vec3>(const Vec3& point, const Vec3& normal)>;

struct AlignmentStats {
    double median = 0.0;  // radians
    double mean = 0.0;
    double max = 0.0;
    std::size_t count = 0;
    std::size_t excluded = 0;
    std::vector<double> per_face;  // NaN for excluded faces
};

/// Per face: smallest unsigned angle between the oracle direction (projected
/// to the face plane) and the four cross branches, in [0, pi/4].
AlignmentStats alignment_error(const CrossField& field, const TriMesh& mesh, const DirectionOracle& oracle);

/// Torus about the z axis through the origin: longitude tangent.
DirectionOracle torus_oracle(double major_radius, double minor_radius);
/// Cylinder about the z axis: the axis direction.
DirectionOracle cylinder_oracle();

} // namespace neurcross
