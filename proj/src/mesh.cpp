#include "neurcross/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace neurcross {

namespace {

Vec3 raw_normal(const std::vector<Vec3>& v, const std::array<int, 3>& f)
{
    return (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]);
}

int parse_index(const std::string& token, std::size_t vertex_count, const std::string& where)
{
    // Accepts "i", "i/t", "i//n", "i/t/n"; negative indices are relative.
    const std::string head = token.substr(0, token.find('/'));
    long value = 0;
    const auto* first = head.data();
    const auto* last = head.data() + head.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || value == 0)
        throw Error(where + ": bad vertex index '" + token + "'");
    long idx = value > 0 ? value - 1 : static_cast<long>(vertex_count) + value;
    return static_cast<int>(idx);
}

} // namespace

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces))
{
    const std::size_t nf = faces_.size();
    const int nv = static_cast<int>(vertices_.size());
    normals_.resize(nf);
    centroids_.resize(nf);
    areas_.resize(nf);

    for (std::size_t f = 0; f < nf; ++f) {
        const auto& tri = faces_[f];
        for (int c = 0; c < 3; ++c)
            if (tri[c] < 0 || tri[c] >= nv)
                throw Error("face " + std::to_string(f) + " references missing vertex");
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw Error("face " + std::to_string(f) + " repeats a vertex");
        Vec3 n = raw_normal(vertices_, tri);
        double len = n.norm();
        if (!(len > 0.0))
            throw Error("degenerate (zero-area) face " + std::to_string(f));
        normals_[f] = n / len;
        areas_[f] = 0.5 * len;
        centroids_[f] = (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
    }

    frames_ = build_frames(vertices_, faces_);

    // Undirected edge -> incident (face, slot) pairs.
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edges;
    for (std::size_t f = 0; f < nf; ++f)
        for (int s = 0; s < 3; ++s) {
            int a = faces_[f][s], b = faces_[f][(s + 1) % 3];
            edges[{std::min(a, b), std::max(a, b)}].push_back({static_cast<int>(f), s});
        }

    neighbors_.assign(nf, {-1, -1, -1});
    edge_count_ = edges.size();
    boundary_edges_ = 0;
    for (const auto& [key, inc] : edges) {
        if (inc.size() > 2)
            throw Error("non-manifold edge (" + std::to_string(key.first + 1) + ", " +
                        std::to_string(key.second + 1) + ") shared by " +
                        std::to_string(inc.size()) + " faces");
        if (inc.size() == 1) {
            ++boundary_edges_;
            continue;
        }
        auto [f0, s0] = inc[0];
        auto [f1, s1] = inc[1];
        if (faces_[f0][s0] == faces_[f1][s1])
            throw Error("inconsistently oriented faces " + std::to_string(f0) + " and " +
                        std::to_string(f1));
        neighbors_[f0][s0] = f1;
        neighbors_[f1][s1] = f0;
    }

    rotations_.assign(nf, {Mat3::Identity(), Mat3::Identity(), Mat3::Identity()});
    dihedrals_.assign(nf, {0.0, 0.0, 0.0});
    for (std::size_t f = 0; f < nf; ++f)
        for (int s = 0; s < 3; ++s) {
            int g = neighbors_[f][s];
            if (g < 0)
                continue;
            Vec3 axis = (vertices_[faces_[f][(s + 1) % 3]] - vertices_[faces_[f][s]]).normalized();
            const Vec3& nf_ = normals_[f];
            const Vec3& ng = normals_[g];
            double angle = std::atan2(ng.cross(nf_).dot(axis), ng.dot(nf_));
            dihedrals_[f][s] = angle;
            rotations_[f][s] = axis_angle(axis, angle);
        }
}

int TriMesh::neighbor_count(std::size_t f) const
{
    const auto& nb = neighbors_[f];
    return (nb[0] >= 0) + (nb[1] >= 0) + (nb[2] >= 0);
}

int TriMesh::slot_of(std::size_t f, int g) const
{
    for (int s = 0; s < 3; ++s)
        if (neighbors_[f][s] == g)
            return s;
    return -1;
}

long TriMesh::euler_characteristic() const
{
    return static_cast<long>(vertices_.size()) - static_cast<long>(edge_count_) +
           static_cast<long>(faces_.size());
}

double TriMesh::total_area() const
{
    double a = 0.0;
    for (double x : areas_)
        a += x;
    return a;
}

Mat3 axis_angle(const Vec3& axis, double angle)
{
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

std::vector<LocalFrame> build_frames(const std::vector<Vec3>& vertices,
                                     const std::vector<std::array<int, 3>>& faces)
{
    std::vector<LocalFrame> frames(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& tri = faces[f];
        Vec3 n = raw_normal(vertices, tri);
        Vec3 e = vertices[tri[1]] - vertices[tri[0]];
        if (!(n.norm() > 0.0) || !(e.norm() > 0.0))
            throw Error("degenerate (zero-area) face " + std::to_string(f));
        n.normalize();
        // Remove the (roundoff-level) normal component so the frame is exact.
        Vec3 mu = (e - n * n.dot(e)).normalized();
        frames[f] = {mu, n.cross(mu).normalized(), n};
    }
    return frames;
}

Mat3 edge_rotation(const TriMesh& mesh, std::size_t face, std::size_t neighbor)
{
    if (face >= mesh.face_count() || neighbor >= mesh.face_count())
        throw Error("edge_rotation: face index out of range");
    int slot = mesh.slot_of(face, static_cast<int>(neighbor));
    if (slot < 0)
        throw Error("edge_rotation: faces " + std::to_string(face) + " and " +
                    std::to_string(neighbor) + " are not adjacent");
    return mesh.rotation(face, slot);
}

ObjData parse_obj(std::istream& in, const std::string& source_name)
{
    ObjData obj;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag))
            continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        if (tag == "v") {
            Vec3 p;
            if (!(ss >> p.x() >> p.y() >> p.z()))
                throw Error(where + ": malformed vertex record");
            obj.vertices.push_back(p);
        } else if (tag == "f" || tag == "l") {
            std::vector<int> idx;
            std::string tok;
            while (ss >> tok) {
                int i = parse_index(tok, obj.vertices.size(), where);
                idx.push_back(i);
            }
            if (tag == "f") {
                if (idx.size() < 3)
                    throw Error(where + ": face with fewer than 3 vertices");
                obj.faces.push_back(std::move(idx));
            } else {
                if (idx.size() < 2)
                    throw Error(where + ": line with fewer than 2 vertices");
                obj.lines.push_back(std::move(idx));
            }
        }
    }
    for (const auto& f : obj.faces)
        for (int i : f)
            if (i < 0 || i >= static_cast<int>(obj.vertices.size()))
                throw Error(source_name + ": face index out of range");
    return obj;
}

ObjData read_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open " + path.string());
    return parse_obj(in, path.string());
}

TriMesh mesh_from_obj(const ObjData& obj, const std::string& source_name)
{
    std::vector<std::array<int, 3>> faces;
    faces.reserve(obj.faces.size());
    for (std::size_t f = 0; f < obj.faces.size(); ++f) {
        if (obj.faces[f].size() != 3)
            throw Error(source_name + ": non-triangular face " + std::to_string(f + 1) + " (" +
                        std::to_string(obj.faces[f].size()) + " vertices)");
        faces.push_back({obj.faces[f][0], obj.faces[f][1], obj.faces[f][2]});
    }
    if (faces.empty())
        throw Error(source_name + ": no faces");
    return TriMesh(obj.vertices, std::move(faces));
}

TriMesh load_mesh(const std::filesystem::path& path)
{
    return mesh_from_obj(read_obj(path), path.string());
}

void write_obj(const std::filesystem::path& path, const std::vector<Vec3>& vertices,
               const std::vector<std::vector<int>>& faces)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << std::setprecision(17);
    for (const auto& v : vertices)
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& f : faces) {
        out << 'f';
        for (int i : f)
            out << ' ' << i + 1;
        out << '\n';
    }
    if (!out)
        throw Error("write failed: " + path.string());
}

void write_obj(const std::filesystem::path& path, const TriMesh& mesh)
{
    std::vector<std::vector<int>> faces;
    faces.reserve(mesh.face_count());
    for (const auto& f : mesh.faces())
        faces.push_back({f[0], f[1], f[2]});
    write_obj(path, mesh.vertices(), faces);
}

TriMesh normalize(const TriMesh& mesh)
{
    if (mesh.vertex_count() == 0)
        throw Error("normalize: empty mesh");
    Vec3 lo = mesh.vertices().front(), hi = lo;
    for (const auto& v : mesh.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const double extent = (hi - lo).maxCoeff();
    if (!(extent > 0.0))
        throw Error("normalize: zero-extent bounding box");
    const Vec3 center = 0.5 * (lo + hi);
    std::vector<Vec3> verts;
    verts.reserve(mesh.vertex_count());
    for (const auto& v : mesh.vertices())
        verts.push_back((v - center) / extent);
    return TriMesh(std::move(verts), mesh.faces());
}

} // namespace neurcross
