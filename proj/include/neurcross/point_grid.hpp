#pragma once

#include "neurcross/common.hpp"

#include <utility>
#include <vector>

namespace neurcross {

/// Uniform-cell spatial hash over a fixed point set answering exact k-nearest
/// queries. Points are stored by reference; they must outlive the grid.
class PointGrid {
public:
    explicit PointGrid(const Eigen::Matrix3Xd& points, double target_per_cell = 4.0);

    /// k nearest points to q as (squared distance, index), ascending.
    /// `exclude` is skipped (pass -1 to keep all points).
    std::vector<std::pair<double, Eigen::Index>> nearest(const Vec3& q, int k, Eigen::Index exclude = -1) const;
    /// Squared distance and index of the closest point.
    std::pair<double, Eigen::Index> closest(const Vec3& q) const;

    Eigen::Index size() const { return points_.cols(); }

private:
    std::array<int, 3> cell_of(const Vec3& p) const;
    std::size_t flat(int x, int y, int z) const
    {
        return (static_cast<std::size_t>(z) * dims_[1] + static_cast<std::size_t>(y)) * dims_[0] +
               static_cast<std::size_t>(x);
    }

    const Eigen::Matrix3Xd& points_;
    Vec3 origin_;
    double cell_ = 1.0;
    std::array<int, 3> dims_{1, 1, 1};
    std::vector<Eigen::Index> start_;   // CSR offsets per cell
    std::vector<Eigen::Index> members_;
};

} // namespace neurcross
