#include "neurcross/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

namespace neurcross::shapes {

namespace {

using Faces = std::vector<std::array<int, 3>>;

// Flips faces whose geometric normal disagrees with the reference normal.
template <typename NormalFn>
void orient(const std::vector<Vec3>& v, Faces& faces, NormalFn outward)
{
    for (auto& f : faces) {
        Vec3 c = (v[f[0]] + v[f[1]] + v[f[2]]) / 3.0;
        Vec3 n = (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]);
        if (n.dot(outward(c)) < 0.0)
            std::swap(f[1], f[2]);
    }
}

// Rows of a periodic staggered strip: row j has `n` vertices at parameter
// (i + 0.5 * (j % 2)) / n.  Returns triangles between consecutive rows.
Faces staggered_strip(int n, int rows, bool wrap_rows)
{
    Faces faces;
    const int row_pairs = wrap_rows ? rows : rows - 1;
    auto id = [&](int j, int i) { return ((j % rows) * n) + ((i % n + n) % n); };
    for (int j = 0; j < row_pairs; ++j) {
        const bool shifted = (j % 2) == 1;
        for (int i = 0; i < n; ++i) {
            if (!shifted) {
                faces.push_back({id(j, i), id(j, i + 1), id(j + 1, i)});
                faces.push_back({id(j + 1, i), id(j, i + 1), id(j + 1, i + 1)});
            } else {
                faces.push_back({id(j, i), id(j + 1, i + 1), id(j + 1, i)});
                faces.push_back({id(j, i), id(j, i + 1), id(j + 1, i + 1)});
            }
        }
    }
    return faces;
}

} // namespace

TriMesh icosahedron(double radius)
{
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0},
                           {0, -1, p}, {0, 1, p},  {0, -1, -p}, {0, 1, -p},
                           {p, 0, -1}, {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
    for (auto& x : v)
        x = x.normalized() * radius;
    Faces f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    orient(v, f, [](const Vec3& c) { return c; });
    return TriMesh(std::move(v), std::move(f));
}

TriMesh icosphere(int level, double radius)
{
    TriMesh base = icosahedron(1.0);
    std::vector<Vec3> v = base.vertices();
    Faces faces = base.faces();
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = mid.find({key.first, key.second});
            if (it != mid.end())
                return it->second;
            v.push_back((0.5 * (v[a] + v[b])).normalized());
            int idx = static_cast<int>(v.size()) - 1;
            mid[{key.first, key.second}] = idx;
            return idx;
        };
        Faces next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({ab, f[1], bc});
            next.push_back({ca, bc, f[2]});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    for (auto& x : v)
        x *= radius;
    return TriMesh(std::move(v), std::move(faces));
}

TriMesh bumpy_sphere(int level, double radius, double amplitude, int frequency)
{
    TriMesh s = icosphere(level, 1.0);
    std::vector<Vec3> v = s.vertices();
    for (auto& x : v) {
        double phi = std::atan2(x.y(), x.x());
        double theta = std::acos(std::clamp(x.z(), -1.0, 1.0));
        double r = radius * (1.0 + amplitude * std::sin(frequency * phi) * std::sin(frequency * theta));
        x *= r;
    }
    return TriMesh(std::move(v), s.faces());
}

TriMesh torus(double major, double minor, int n_major, int n_minor)
{
    if (n_minor % 2 != 0)
        throw Error("torus: n_minor must be even for the staggered pattern");
    std::vector<Vec3> v;
    v.reserve(static_cast<std::size_t>(n_major) * n_minor);
    for (int j = 0; j < n_minor; ++j) {
        double t = kTwoPi * j / n_minor;
        for (int i = 0; i < n_major; ++i) {
            double u = kTwoPi * (i + 0.5 * (j % 2)) / n_major;
            double rr = major + minor * std::cos(t);
            v.emplace_back(rr * std::cos(u), rr * std::sin(u), minor * std::sin(t));
        }
    }
    Faces f = staggered_strip(n_major, n_minor, true);
    orient(v, f, [major](const Vec3& c) {
        Vec3 ring(c.x(), c.y(), 0.0);
        ring = ring.normalized() * major;
        return Vec3(c - ring);
    });
    return TriMesh(std::move(v), std::move(f));
}

TriMesh cylinder(double radius, double height, int n_around, int n_along)
{
    std::vector<Vec3> v;
    const int rows = n_along + 1;
    for (int j = 0; j < rows; ++j) {
        double z = -0.5 * height + height * j / n_along;
        for (int i = 0; i < n_around; ++i) {
            double u = kTwoPi * (i + 0.5 * (j % 2)) / n_around;
            v.emplace_back(radius * std::cos(u), radius * std::sin(u), z);
        }
    }
    Faces f = staggered_strip(n_around, rows, false);
    orient(v, f, [](const Vec3& c) { return Vec3(c.x(), c.y(), 0.0); });
    return TriMesh(std::move(v), std::move(f));
}

TriMesh flat_grid(int nx, int ny, double cell)
{
    std::vector<Vec3> v;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            v.emplace_back(i * cell, j * cell, 0.0);
    Faces f;
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return TriMesh(std::move(v), std::move(f));
}

TriMesh genus2(int smoothing_iterations)
{
    // Plate of 14 x 6 x 2 voxels with two 2 x 2 holes.
    const int nx = 14, ny = 6, nz = 2;
    auto solid = [&](int x, int y, int z) {
        if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz)
            return false;
        bool in_hole_y = (y == 2 || y == 3);
        bool hole_a = in_hole_y && (x == 2 || x == 3);
        bool hole_b = in_hole_y && (x == 10 || x == 11);
        return !(hole_a || hole_b);
    };
    std::map<std::tuple<int, int, int>, int> index;
    std::vector<Vec3> v;
    auto vid = [&](std::array<int, 3> p) {
        auto key = std::make_tuple(p[0], p[1], p[2]);
        auto it = index.find(key);
        if (it != index.end())
            return it->second;
        v.emplace_back(p[0], p[1], p[2]);
        int id = static_cast<int>(v.size()) - 1;
        index[key] = id;
        return id;
    };
    Faces f;
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y)
            for (int z = 0; z < nz; ++z) {
                if (!solid(x, y, z))
                    continue;
                const std::array<int, 3> cell = {x, y, z};
                for (int d = 0; d < 3; ++d)
                    for (int s : {-1, 1}) {
                        std::array<int, 3> nb = cell;
                        nb[d] += s;
                        if (solid(nb[0], nb[1], nb[2]))
                            continue;
                        const int u = (d + 1) % 3, w = (d + 2) % 3;
                        std::array<int, 3> a = cell;
                        if (s > 0)
                            a[d] += 1;
                        auto corner = [&](int du, int dw) {
                            std::array<int, 3> p = a;
                            p[u] += du;
                            p[w] += dw;
                            return vid(p);
                        };
                        std::array<int, 4> q = {corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)};
                        if (s < 0)
                            std::swap(q[1], q[3]);
                        f.push_back({q[0], q[1], q[2]});
                        f.push_back({q[0], q[2], q[3]});
                    }
            }
    // Taubin smoothing over the vertex graph rounds the voxel creases.
    std::vector<std::vector<int>> adj(v.size());
    for (const auto& t : f)
        for (int c = 0; c < 3; ++c) {
            int a = t[c], b = t[(c + 1) % 3];
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    for (int it = 0; it < smoothing_iterations; ++it)
        for (double step : {0.5, -0.53}) {
            std::vector<Vec3> next = v;
            for (std::size_t i = 0; i < v.size(); ++i) {
                Vec3 avg = Vec3::Zero();
                for (int j : adj[i])
                    avg += v[j];
                avg /= static_cast<double>(adj[i].size());
                next[i] = v[i] + step * (avg - v[i]);
            }
            v = std::move(next);
        }
    return TriMesh(std::move(v), std::move(f));
}

TriMesh subdivide_midpoint(const TriMesh& mesh)
{
    std::vector<Vec3> v = mesh.vertices();
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = mid.find({key.first, key.second});
        if (it != mid.end())
            return it->second;
        v.push_back(0.5 * (v[a] + v[b]));
        int idx = static_cast<int>(v.size()) - 1;
        mid[{key.first, key.second}] = idx;
        return idx;
    };
    Faces faces;
    for (const auto& f : mesh.faces()) {
        int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
        faces.push_back({f[0], ab, ca});
        faces.push_back({ab, f[1], bc});
        faces.push_back({ca, bc, f[2]});
        faces.push_back({ab, bc, ca});
    }
    return TriMesh(std::move(v), std::move(faces));
}

TriMesh shuffle_face_starts(const TriMesh& mesh, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 2);
    Faces faces = mesh.faces();
    for (auto& f : faces) {
        int r = pick(rng);
        f = {f[r], f[(r + 1) % 3], f[(r + 2) % 3]};
    }
    return TriMesh(mesh.vertices(), std::move(faces));
}

QuadSoup quad_grid(int nx, int ny, double cell)
{
    QuadSoup q;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            q.vertices.emplace_back(i * cell, j * cell, 0.0);
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            q.quads.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    return q;
}

QuadSoup quad_cube(double side)
{
    QuadSoup q;
    const double h = 0.5 * side;
    for (int i = 0; i < 8; ++i)
        q.vertices.emplace_back((i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h);
    q.quads = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
               {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
    return q;
}

QuadSoup quad_sphere(int n, double radius)
{
    QuadSoup q;
    std::map<std::tuple<int, int, int>, int> index;
    auto vid = [&](int x, int y, int z) {
        auto key = std::make_tuple(x, y, z);
        auto it = index.find(key);
        if (it != index.end())
            return it->second;
        Vec3 p(2.0 * x / n - 1.0, 2.0 * y / n - 1.0, 2.0 * z / n - 1.0);
        if (radius > 0.0)
            p = p.normalized() * radius;
        q.vertices.push_back(p);
        int id = static_cast<int>(q.vertices.size()) - 1;
        index[key] = id;
        return id;
    };
    for (int d = 0; d < 3; ++d)
        for (int s : {0, 1}) {
            const int u = (d + 1) % 3, w = (d + 2) % 3;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    auto corner = [&](int da, int db) {
                        std::array<int, 3> p{};
                        p[d] = s * n;
                        p[u] = a + da;
                        p[w] = b + db;
                        return vid(p[0], p[1], p[2]);
                    };
                    std::array<int, 4> quad = {corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)};
                    if (s == 0)
                        std::swap(quad[1], quad[3]);
                    q.quads.push_back(quad);
                }
        }
    return q;
}

TriMesh triangulate(const QuadSoup& quads)
{
    Faces f;
    f.reserve(quads.quads.size() * 2);
    for (const auto& q : quads.quads) {
        f.push_back({q[0], q[1], q[2]});
        f.push_back({q[0], q[2], q[3]});
    }
    return TriMesh(quads.vertices, std::move(f));
}

} // namespace neurcross::shapes
