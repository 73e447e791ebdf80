#include "neurcross/point_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace neurcross {

PointGrid::PointGrid(const Eigen::Matrix3Xd& points, double target_per_cell) : points_(points)
{
    const Eigen::Index n = points.cols();
    if (n == 0)
        throw Error("PointGrid: empty point set");
    const Vec3 lo = points.rowwise().minCoeff();
    const Vec3 hi = points.rowwise().maxCoeff();
    const Vec3 ext = (hi - lo).cwiseMax(1e-12);
    // Surface samples fill roughly a 2-d set; size cells from the two largest extents.
    std::array<double, 3> e{ext.x(), ext.y(), ext.z()};
    std::sort(e.begin(), e.end());
    const double area = e[1] * e[2];
    cell_ = std::sqrt(area * target_per_cell / static_cast<double>(n));
    cell_ = std::max(cell_, e[2] / 1024.0);
    origin_ = lo;
    for (int a = 0; a < 3; ++a)
        dims_[a] = std::max(1, static_cast<int>(std::floor(ext[a] / cell_)) + 1);

    const std::size_t cells = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    start_.assign(cells + 1, 0);
    std::vector<std::size_t> owner(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto c = cell_of(points.col(i));
        owner[static_cast<std::size_t>(i)] = flat(c[0], c[1], c[2]);
        ++start_[owner[static_cast<std::size_t>(i)] + 1];
    }
    for (std::size_t c = 0; c < cells; ++c)
        start_[c + 1] += start_[c];
    members_.resize(static_cast<std::size_t>(n));
    std::vector<Eigen::Index> fill(start_.begin(), start_.end() - 1);
    for (Eigen::Index i = 0; i < n; ++i)
        members_[static_cast<std::size_t>(fill[owner[static_cast<std::size_t>(i)]]++)] = i;
}

std::array<int, 3> PointGrid::cell_of(const Vec3& p) const
{
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) {
        const int v = static_cast<int>(std::floor((p[a] - origin_[a]) / cell_));
        c[a] = std::clamp(v, 0, dims_[a] - 1);
    }
    return c;
}

std::vector<std::pair<double, Eigen::Index>> PointGrid::nearest(const Vec3& q, int k, Eigen::Index exclude) const
{
    using Entry = std::pair<double, Eigen::Index>;
    std::priority_queue<Entry> heap;  // max-heap of the best k so far
    if (k <= 0)
        return {};
    const auto c = cell_of(q);
    // Distance from q to the boundary of its own (clamped) cell block bounds
    // how far ring r reaches: every point outside rings 0..r is at least
    // r * cell_ - slack away.
    double slack = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double lo = origin_[a] + c[a] * cell_;
        const double hi = lo + cell_;
        slack = std::max(slack, std::max(lo - q[a], q[a] - hi));
    }
    const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (int r = 0; r <= max_ring; ++r) {
        for (int z = c[2] - r; z <= c[2] + r; ++z) {
            if (z < 0 || z >= dims_[2])
                continue;
            for (int y = c[1] - r; y <= c[1] + r; ++y) {
                if (y < 0 || y >= dims_[1])
                    continue;
                const bool yz_shell = std::abs(z - c[2]) == r || std::abs(y - c[1]) == r;
                for (int x = c[0] - r; x <= c[0] + r; ++x) {
                    if (x < 0 || x >= dims_[0])
                        continue;
                    if (!yz_shell && std::abs(x - c[0]) != r)
                        continue;
                    const std::size_t cell = flat(x, y, z);
                    for (Eigen::Index m = start_[cell]; m < start_[cell + 1]; ++m) {
                        const Eigen::Index i = members_[static_cast<std::size_t>(m)];
                        if (i == exclude)
                            continue;
                        const double d2 = (points_.col(i) - q).squaredNorm();
                        if (static_cast<int>(heap.size()) < k)
                            heap.emplace(d2, i);
                        else if (Entry(d2, i) < heap.top()) {
                            heap.pop();
                            heap.emplace(d2, i);
                        }
                    }
                }
            }
        }
        if (static_cast<int>(heap.size()) == k) {
            const double reach = r * cell_ - slack;
            if (reach > 0.0 && heap.top().first <= reach * reach)
                break;
        }
    }
    std::vector<Entry> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = heap.top();
        heap.pop();
    }
    return out;
}

std::pair<double, Eigen::Index> PointGrid::closest(const Vec3& q) const
{
    const auto r = nearest(q, 1);
    if (r.empty())
        return {std::numeric_limits<double>::infinity(), -1};
    return r.front();
}

} // namespace neurcross
