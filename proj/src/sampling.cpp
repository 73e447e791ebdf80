#include "neurcross/sampling.hpp"

#include "neurcross/point_grid.hpp"

#include <cmath>
#include <iostream>
#include <random>

namespace neurcross {

SurfaceSamples build_P(const TriMesh& mesh)
{
    const auto n = static_cast<Eigen::Index>(mesh.face_count());
    SurfaceSamples s;
    s.points.resize(3, n);
    s.normals.resize(3, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        s.points.col(i) = mesh.centroids()[static_cast<std::size_t>(i)];
        s.normals.col(i) = mesh.face_normals()[static_cast<std::size_t>(i)];
    }
    s.frames = mesh.frames();
    return s;
}

Eigen::VectorXd kth_neighbor_distance(const Eigen::Matrix3Xd& points, int k, int* k_used)
{
    const Eigen::Index n = points.cols();
    if (n < 2)
        throw Error("kth_neighbor_distance: need at least two points");
    if (k < 1)
        throw Error("kth_neighbor_distance: k must be positive");
    if (n <= k) {
        std::cerr << "warning: only " << n << " samples; using k = " << n - 1 << " instead of " << k << "\n";
        k = static_cast<int>(n - 1);
    }
    if (k_used)
        *k_used = k;
    const PointGrid grid(points);
    Eigen::VectorXd d(n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto nn = grid.nearest(points.col(i), k, i);
        d[i] = std::sqrt(nn.back().first);
    }
    return d;
}

Eigen::Matrix3Xd draw_offsets(const Eigen::Matrix3Xd& sources, const Eigen::VectorXd& sigma, std::uint64_t seed)
{
    if (sigma.size() != sources.cols())
        throw Error("draw_offsets: one sigma per source point required");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::Matrix3Xd out(3, sources.cols());
    for (Eigen::Index i = 0; i < sources.cols(); ++i)
        for (int a = 0; a < 3; ++a)
            out(a, i) = sources(a, i) + sigma[i] * nd(rng);
    return out;
}

OffsetSamples build_Omega(const SurfaceSamples& P, int k, std::uint64_t seed)
{
    OffsetSamples o;
    o.sigma = kth_neighbor_distance(P.points, k, &o.k);
    o.points = draw_offsets(P.points, o.sigma, seed);
    return o;
}

Eigen::Matrix3Xd build_Q(Eigen::Index n, std::uint64_t seed)
{
    if (n <= 0)
        throw Error("build_Q: sample count must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    Eigen::Matrix3Xd q(3, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int a = 0; a < 3; ++a)
            q(a, i) = u(rng);
    return q;
}

} // namespace neurcross
