#pragma once

#include "neurcross/common.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace neurcross {

/// Orthonormal tangent frame of one face: mu x nu = normal.
struct LocalFrame {
    Vec3 mu;
    Vec3 nu;
    Vec3 normal;
};

/// Indexed, consistently oriented, edge-manifold triangle surface.
///
/// Derived data (normals, centroids, areas, adjacency, frames and the
/// per-directed-adjacency rotations) is computed once by the constructor and
/// never changes afterwards.  Neighbor slot i of face f lies across the edge
/// (faces[f][i], faces[f][(i+1)%3]); a missing neighbor (open boundary) is -1.
class TriMesh {
public:
    TriMesh() = default;
    TriMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces);

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t face_count() const { return faces_.size(); }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& faces() const { return faces_; }
    const std::vector<Vec3>& face_normals() const { return normals_; }
    const std::vector<Vec3>& centroids() const { return centroids_; }
    const std::vector<double>& face_areas() const { return areas_; }
    const std::vector<std::array<int, 3>>& neighbors() const { return neighbors_; }
    const std::vector<LocalFrame>& frames() const { return frames_; }

    /// Rotation carrying the tangent plane of neighbors()[f][slot] onto the
    /// tangent plane of f.  Identity for boundary slots.
    const Mat3& rotation(std::size_t f, int slot) const { return rotations_[f][slot]; }
    /// Signed dihedral angle of that rotation about the shared edge.
    double dihedral(std::size_t f, int slot) const { return dihedrals_[f][slot]; }

    int neighbor_count(std::size_t f) const;
    /// Slot of f whose neighbor is g, or -1.
    int slot_of(std::size_t f, int g) const;

    std::size_t edge_count() const { return edge_count_; }
    std::size_t boundary_edge_count() const { return boundary_edges_; }
    bool is_closed() const { return boundary_edges_ == 0; }
    long euler_characteristic() const;
    double total_area() const;

private:
    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 3>> faces_;
    std::vector<Vec3> normals_;
    std::vector<Vec3> centroids_;
    std::vector<double> areas_;
    std::vector<std::array<int, 3>> neighbors_;
    std::vector<LocalFrame> frames_;
    std::vector<std::array<Mat3, 3>> rotations_;
    std::vector<std::array<double, 3>> dihedrals_;
    std::size_t edge_count_ = 0;
    std::size_t boundary_edges_ = 0;
};

/// Polygon soup as read from an OBJ file (0-based indices).
struct ObjData {
    std::vector<Vec3> vertices;
    std::vector<std::vector<int>> faces;
    std::vector<std::vector<int>> lines;
};

ObjData read_obj(const std::filesystem::path& path);
ObjData parse_obj(std::istream& in, const std::string& source_name = "<stream>");

/// Loads a triangle OBJ; rejects polygons with more than three corners and
/// non-manifold edges.
TriMesh load_mesh(const std::filesystem::path& path);
TriMesh mesh_from_obj(const ObjData& obj, const std::string& source_name = "<obj>");

void write_obj(const std::filesystem::path& path, const std::vector<Vec3>& vertices,
               const std::vector<std::vector<int>>& faces);
void write_obj(const std::filesystem::path& path, const TriMesh& mesh);

/// Uniform scale and translation so the longest bounding-box axis spans
/// exactly [-0.5, 0.5]; the box is centred at the origin.
TriMesh normalize(const TriMesh& mesh);

/// Edge-based frames: mu is the first edge of the face in file order,
/// nu = normal x mu.
std::vector<LocalFrame> build_frames(const std::vector<Vec3>& vertices,
                                     const std::vector<std::array<int, 3>>& faces);

/// Rotation about the edge shared by `face` and `neighbor` that maps the
/// neighbor's normal onto the face normal.  Throws if they are not adjacent.
Mat3 edge_rotation(const TriMesh& mesh, std::size_t face, std::size_t neighbor);

/// Rodrigues rotation by `angle` about unit `axis`.
Mat3 axis_angle(const Vec3& axis, double angle);

} // namespace neurcross
