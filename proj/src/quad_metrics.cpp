#include "neurcross/quad_metrics.hpp"

#include "neurcross/point_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace neurcross {

namespace {

constexpr double kRadToDeg = 180.0 / kPi;

Vec3 corner(const QuadMesh& q, std::size_t i, int k) { return q.vertices[q.quads[i][(k % 4 + 4) % 4]]; }

Vec3 newell_normal(const QuadMesh& q, std::size_t i)
{
    Vec3 n = Vec3::Zero();
    for (int k = 0; k < 4; ++k) {
        const Vec3 a = corner(q, i, k), b = corner(q, i, k + 1);
        n.x() += (a.y() - b.y()) * (a.z() + b.z());
        n.y() += (a.z() - b.z()) * (a.x() + b.x());
        n.z() += (a.x() - b.x()) * (a.y() + b.y());
    }
    return n;
}

void require_quads(const QuadMesh& q, const char* what)
{
    if (q.quads.empty())
        throw Error(std::string(what) + ": empty quad mesh");
}

struct VertexTopology {
    std::vector<std::size_t> valence;
    std::vector<std::size_t> faces;
    std::vector<char> boundary;
    std::vector<double> angle_sum;
};

VertexTopology topology(const QuadMesh& q)
{
    const std::size_t V = q.vertices.size();
    VertexTopology t;
    t.valence.assign(V, 0);
    t.faces.assign(V, 0);
    t.boundary.assign(V, 0);
    t.angle_sum.assign(V, 0.0);
    std::map<std::pair<int, int>, int> edge_faces;
    for (std::size_t i = 0; i < q.quads.size(); ++i) {
        for (int k = 0; k < 4; ++k) {
            const int a = q.quads[i][k], b = q.quads[i][(k + 1) % 4];
            ++edge_faces[std::minmax(a, b)];
            ++t.faces[static_cast<std::size_t>(a)];
            const Vec3 e1 = corner(q, i, k + 1) - corner(q, i, k);
            const Vec3 e2 = corner(q, i, k - 1) - corner(q, i, k);
            t.angle_sum[static_cast<std::size_t>(a)] += std::atan2(e1.cross(e2).norm(), e1.dot(e2));
        }
    }
    for (const auto& [e, n] : edge_faces) {
        if (n > 2)
            throw Error("quad mesh is non-manifold: edge (" + std::to_string(e.first) + ", " +
                        std::to_string(e.second) + ") has " + std::to_string(n) + " incident quads");
        ++t.valence[static_cast<std::size_t>(e.first)];
        ++t.valence[static_cast<std::size_t>(e.second)];
        if (n == 1) {
            t.boundary[static_cast<std::size_t>(e.first)] = 1;
            t.boundary[static_cast<std::size_t>(e.second)] = 1;
        }
    }
    return t;
}

long ideal_boundary_faces(double angle_sum)
{
    return std::max(1L, std::lround(angle_sum / kHalfPi));
}

} // namespace

void validate(const QuadMesh& q)
{
    const int V = static_cast<int>(q.vertices.size());
    for (std::size_t i = 0; i < q.quads.size(); ++i) {
        const auto& c = q.quads[i];
        for (int k = 0; k < 4; ++k) {
            if (c[k] < 0 || c[k] >= V)
                throw Error("quad " + std::to_string(i) + " references a missing vertex");
            for (int j = 0; j < k; ++j)
                if (c[j] == c[k])
                    throw Error("quad " + std::to_string(i) + " repeats a vertex");
        }
    }
}

QuadMesh quad_mesh_from_obj(const ObjData& obj, const std::string& source_name)
{
    QuadMesh q;
    q.vertices = obj.vertices;
    for (std::size_t i = 0; i < obj.faces.size(); ++i) {
        const auto& f = obj.faces[i];
        if (f.size() != 4)
            throw Error(source_name + ": face " + std::to_string(i + 1) + " is not a quad");
        q.quads.push_back({f[0], f[1], f[2], f[3]});
    }
    validate(q);
    return q;
}

QuadMesh load_quad_mesh(const std::filesystem::path& path)
{
    return quad_mesh_from_obj(read_obj(path), path.string());
}

double quad_area(const QuadMesh& q, std::size_t i)
{
    return 0.5 * (corner(q, i, 2) - corner(q, i, 0)).cross(corner(q, i, 3) - corner(q, i, 1)).norm();
}

double area_distortion(const QuadMesh& q)
{
    require_quads(q, "area_distortion");
    const double n = static_cast<double>(q.quads.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < q.quads.size(); ++i)
        mean += quad_area(q, i);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < q.quads.size(); ++i) {
        const double d = quad_area(q, i) - mean;
        var += d * d;
    }
    return std::sqrt(var / n) * 1e4;
}

double angle_distortion(const QuadMesh& q)
{
    require_quads(q, "angle_distortion");
    double sum = 0.0;
    for (std::size_t i = 0; i < q.quads.size(); ++i) {
        for (int k = 0; k < 4; ++k) {
            const Vec3 e1 = corner(q, i, k + 1) - corner(q, i, k);
            const Vec3 e2 = corner(q, i, k - 1) - corner(q, i, k);
            if (e1.norm() == 0.0 || e2.norm() == 0.0)
                throw Error("angle_distortion: zero-length edge in quad " + std::to_string(i));
            const double phi = std::atan2(e1.cross(e2).norm(), e1.dot(e2));
            sum += (phi - kHalfPi) * (phi - kHalfPi);
        }
    }
    return std::sqrt(sum / (4.0 * static_cast<double>(q.quads.size()))) * kRadToDeg;
}

double jacobian_ratio(const QuadMesh& q)
{
    require_quads(q, "jacobian_ratio");
    double total = 0.0;
    for (std::size_t i = 0; i < q.quads.size(); ++i) {
        const Vec3 n = newell_normal(q, i);
        const double len = n.norm();
        if (len == 0.0)
            continue;
        const Vec3 nh = n / len;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int k = 0; k < 4; ++k) {
            const Vec3 e1 = corner(q, i, k + 1) - corner(q, i, k);
            const Vec3 e2 = corner(q, i, k - 1) - corner(q, i, k);
            const double det = e1.cross(e2).dot(nh);
            lo = std::min(lo, det);
            hi = std::max(hi, det);
        }
        if (hi > 0.0)
            total += std::max(0.0, lo) / hi;
    }
    return total / static_cast<double>(q.quads.size());
}

Eigen::Matrix3Xd sample_surface(const std::vector<Vec3>& vertices, const std::vector<std::array<int, 3>>& tris,
                                std::size_t n, std::uint64_t seed)
{
    if (tris.empty() || n == 0)
        throw Error("sample_surface: empty surface or sample count");
    std::vector<double> cdf(tris.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto& c = tris[t];
        acc += 0.5 * (vertices[c[1]] - vertices[c[0]]).cross(vertices[c[2]] - vertices[c[0]]).norm();
        cdf[t] = acc;
    }
    if (!(acc > 0.0))
        throw Error("sample_surface: zero total area");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double r = u(rng) * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
        const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), tris.size() - 1);
        double s1 = u(rng), s2 = u(rng);
        if (s1 + s2 > 1.0) {
            s1 = 1.0 - s1;
            s2 = 1.0 - s2;
        }
        const auto& c = tris[t];
        pts.col(static_cast<Eigen::Index>(i)) =
            vertices[c[0]] + s1 * (vertices[c[1]] - vertices[c[0]]) + s2 * (vertices[c[2]] - vertices[c[0]]);
    }
    return pts;
}

namespace {

std::vector<std::array<int, 3>> split_quads(const QuadMesh& q)
{
    std::vector<std::array<int, 3>> t;
    t.reserve(2 * q.quads.size());
    for (const auto& c : q.quads) {
        t.push_back({c[0], c[1], c[2]});
        t.push_back({c[0], c[2], c[3]});
    }
    return t;
}

double mean_nn(const Eigen::Matrix3Xd& from, const Eigen::Matrix3Xd& to)
{
    const PointGrid grid(to);
    double sum = 0.0;
    std::vector<double> d(static_cast<std::size_t>(from.cols()));
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < from.cols(); ++i)
        d[static_cast<std::size_t>(i)] = std::sqrt(grid.closest(from.col(i)).first);
    for (double v : d)
        sum += v;
    return sum / static_cast<double>(from.cols());
}

} // namespace

double quad_surface_area(const QuadMesh& q)
{
    double a = 0.0;
    for (const auto& c : split_quads(q))
        a += 0.5 * (q.vertices[c[1]] - q.vertices[c[0]]).cross(q.vertices[c[2]] - q.vertices[c[0]]).norm();
    return a;
}

double chamfer(const QuadMesh& q, const TriMesh& reference, std::size_t n_samples, std::uint64_t seed)
{
    require_quads(q, "chamfer");
    if (reference.face_count() == 0)
        throw Error("chamfer: empty reference mesh");
    const Eigen::Matrix3Xd a = sample_surface(q.vertices, split_quads(q), n_samples, seed);
    const Eigen::Matrix3Xd b = sample_surface(reference.vertices(), reference.faces(), n_samples, seed + 1);
    return 0.5 * (mean_nn(a, b) + mean_nn(b, a)) * 1e4;
}

std::size_t count_irregular(const QuadMesh& q)
{
    const auto t = topology(q);
    std::size_t n = 0;
    for (std::size_t v = 0; v < q.vertices.size(); ++v) {
        if (t.faces[v] == 0)
            continue;
        if (t.boundary[v]) {
            if (static_cast<long>(t.faces[v]) != ideal_boundary_faces(t.angle_sum[v]))
                ++n;
        } else if (t.valence[v] != 4) {
            ++n;
        }
    }
    return n;
}

double valence_index_sum(const QuadMesh& q)
{
    const auto t = topology(q);
    double s = 0.0;
    for (std::size_t v = 0; v < q.vertices.size(); ++v) {
        if (t.faces[v] == 0)
            continue;
        if (t.boundary[v])
            s += static_cast<double>(ideal_boundary_faces(t.angle_sum[v]) - static_cast<long>(t.faces[v])) / 4.0;
        else
            s += (4.0 - static_cast<double>(t.valence[v])) / 4.0;
    }
    return s;
}

MetricsReport evaluate_quad(const QuadMesh& q, const TriMesh* reference, std::size_t n_samples, std::uint64_t seed)
{
    validate(q);
    MetricsReport r;
    r.area = area_distortion(q);
    r.angle = angle_distortion(q);
    r.jr = jacobian_ratio(q);
    r.sings = count_irregular(q);
    r.cd = reference ? chamfer(q, *reference, n_samples, seed) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

} // namespace neurcross
