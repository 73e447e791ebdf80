#pragma once

// Sample sets for the SDF losses: surface centroids P, Gaussian offsets
// around them (Omega), and uniform box points Q.

#include "neurcross/mesh.hpp"

#include <cstdint>
#include <vector>

namespace neurcross {

struct SurfaceSamples {
    Eigen::Matrix3Xd points;   // face centroids
    Eigen::Matrix3Xd normals;  // unit face normals
    std::vector<LocalFrame> frames;

    Eigen::Index size() const { return points.cols(); }
};

struct OffsetSamples {
    Eigen::Matrix3Xd points;
    Eigen::VectorXd sigma;  // per-source Gaussian std
    int k = 0;              // neighbor rank actually used
};

SurfaceSamples build_P(const TriMesh& mesh);

/// Distance from every point to its k-th nearest other point (exact).
/// Falls back to k = n - 1 with a warning on stderr when n <= k.
Eigen::VectorXd kth_neighbor_distance(const Eigen::Matrix3Xd& points, int k, int* k_used = nullptr);

/// One isotropic Gaussian draw per source point with the given per-point std.
Eigen::Matrix3Xd draw_offsets(const Eigen::Matrix3Xd& sources, const Eigen::VectorXd& sigma, std::uint64_t seed);

OffsetSamples build_Omega(const SurfaceSamples& P, int k, std::uint64_t seed);

/// n i.i.d. uniform points in [-0.5, 0.5]^3.
Eigen::Matrix3Xd build_Q(Eigen::Index n, std::uint64_t seed);

} // namespace neurcross
