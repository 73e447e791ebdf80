#include "neurcross/field_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace neurcross {

CrossField extract_field(const AngleModel& model, const TriMesh& mesh, const FeatureConstraints* constraints)
{
    if (model.face_count() != 0 && model.architecture().direct && model.face_count() != mesh.face_count())
        throw Error("extract_field: model was trained on a mesh with a different face count");
    auto theta = predict_theta(model, build_features(mesh));
    if (constraints) {
        if (constraints->constrained.size() != theta.size())
            throw Error("extract_field: constraint size mismatch");
        for (std::size_t f = 0; f < theta.size(); ++f)
            if (constraints->constrained[f])
                theta[f] = constraints->fixed_theta[f];
    }
    return make_cross_field(theta, mesh.frames());
}

double reduce_quarter(double angle)
{
    double r = angle - kHalfPi * std::round(angle / kHalfPi);
    if (r <= -0.25 * kPi)
        r += kHalfPi;
    else if (r > 0.25 * kPi)
        r -= kHalfPi;
    return r;
}

namespace {

// Matching angle of g's cross seen from f, reduced to (-pi/4, pi/4].
double matching(const CrossField& field, const TriMesh& mesh, std::size_t f, int slot, std::size_t g)
{
    const Vec3 a = mesh.rotation(f, slot) * field.alpha[g];
    const double ang = angle_in_frame(a, mesh.frames()[f]) - angle_in_frame(field.alpha[f], mesh.frames()[f]);
    return reduce_quarter(ang);
}

} // namespace

SingularityReport singularities(const CrossField& field, const TriMesh& mesh)
{
    const std::size_t V = mesh.vertex_count();
    const std::size_t F = mesh.face_count();
    if (field.size() != F)
        throw Error("singularities: field size does not match the mesh");

    std::vector<std::vector<std::size_t>> incident(V);
    std::vector<double> angle_sum(V, 0.0);
    const auto& X = mesh.vertices();
    for (std::size_t f = 0; f < F; ++f) {
        const auto& t = mesh.faces()[f];
        for (int j = 0; j < 3; ++j) {
            const int v = t[j];
            incident[static_cast<std::size_t>(v)].push_back(f);
            const Vec3 e1 = X[t[(j + 1) % 3]] - X[v];
            const Vec3 e2 = X[t[(j + 2) % 3]] - X[v];
            angle_sum[static_cast<std::size_t>(v)] += std::atan2(e1.cross(e2).norm(), e1.dot(e2));
        }
    }

    SingularityReport rep;
    rep.index.assign(V, 0.0);
    rep.boundary.assign(V, 0);
    rep.euler_characteristic = mesh.euler_characteristic();

    for (std::size_t v = 0; v < V; ++v) {
        const auto& ring = incident[v];
        if (ring.empty())
            continue;
        double defect_sum = 0.0;
        std::size_t f = ring.front();
        std::size_t steps = 0;
        bool on_boundary = false;
        do {
            const auto& t = mesh.faces()[f];
            int j = 0;
            while (t[j] != static_cast<int>(v))
                ++j;
            const int slot = (j + 2) % 3;  // edge (b, v) of f = (v, a, b)
            const int g = mesh.neighbors()[f][slot];
            if (g < 0) {
                on_boundary = true;
                break;
            }
            const auto gs = static_cast<std::size_t>(g);
            // Canonical direction gives exact antisymmetry between the two walks over this edge.
            if (f < gs)
                defect_sum += matching(field, mesh, f, slot, gs);
            else
                defect_sum -= matching(field, mesh, gs, mesh.slot_of(gs, static_cast<int>(f)), f);
            f = gs;
            ++steps;
            if (steps > ring.size())
                break;
        } while (f != ring.front());
        if (on_boundary) {
            rep.boundary[v] = 1;
            ++rep.boundary_vertex_count;
            continue;
        }
        if (steps != ring.size())
            throw Error("singularities: one-ring of vertex " + std::to_string(v) + " is not a disk");
        const double curvature = kTwoPi - angle_sum[v];
        const double raw = (curvature + defect_sum) / kTwoPi;
        const double idx = std::round(4.0 * raw) / 4.0;
        rep.max_rounding_residual = std::max(rep.max_rounding_residual, std::abs(raw - idx));
        rep.index[v] = idx;
        rep.total_index += idx;
        if (idx != 0.0)
            ++rep.singular_count;
    }
    return rep;
}

void export_field(const CrossField& field, const std::filesystem::path& path)
{
    std::FILE* out = std::fopen(path.string().c_str(), "w");
    if (!out)
        throw Error("cannot write field file " + path.string());
    std::fprintf(out, "ROSY 4 %zu\n", field.size());
    for (std::size_t f = 0; f < field.size(); ++f) {
        const Vec3& a = field.alpha[f];
        const Vec3& b = field.beta[f];
        std::fprintf(out, "%.9g %.9g %.9g %.9g %.9g %.9g\n", a.x(), a.y(), a.z(), b.x(), b.y(), b.z());
    }
    if (std::fclose(out) != 0)
        throw Error("failed writing field file " + path.string());
}

CrossField import_field(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open field file " + path.string());
    std::string tag;
    int sym = 0;
    std::size_t n = 0;
    if (!(in >> tag >> sym >> n) || tag != "ROSY" || sym != 4)
        throw Error(path.string() + ": expected header 'ROSY 4 <face_count>'");
    CrossField field;
    field.alpha.resize(n);
    field.beta.resize(n);
    for (std::size_t f = 0; f < n; ++f) {
        Vec3& a = field.alpha[f];
        Vec3& b = field.beta[f];
        if (!(in >> a.x() >> a.y() >> a.z() >> b.x() >> b.y() >> b.z()))
            throw Error(path.string() + ": truncated at face " + std::to_string(f));
    }
    return field;
}

AlignmentStats alignment_error(const CrossField& field, const TriMesh& mesh, const DirectionOracle& oracle)
{
    const std::size_t F = mesh.face_count();
    if (field.size() != F)
        throw Error("alignment_error: field size does not match the mesh");
    AlignmentStats s;
    s.per_face.assign(F, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> vals;
    vals.reserve(F);
    for (std::size_t f = 0; f < F; ++f) {
        const auto& fr = mesh.frames()[f];
        const auto dir = oracle(mesh.centroids()[f], fr.normal);
        if (!dir) {
            ++s.excluded;
            continue;
        }
        const Vec3 t = *dir - dir->dot(fr.normal) * fr.normal;
        if (t.norm() < 1e-9) {
            ++s.excluded;
            continue;
        }
        const double e = std::abs(reduce_quarter(angle_in_frame(t, fr) - angle_in_frame(field.alpha[f], fr)));
        s.per_face[f] = e;
        vals.push_back(e);
    }
    s.count = vals.size();
    if (vals.empty())
        return s;
    double sum = 0.0;
    for (double v : vals)
        sum += v;
    s.mean = sum / static_cast<double>(vals.size());
    s.max = *std::max_element(vals.begin(), vals.end());
    std::sort(vals.begin(), vals.end());
    const std::size_t m = vals.size() / 2;
    s.median = vals.size() % 2 ? vals[m] : 0.5 * (vals[m - 1] + vals[m]);
    return s;
}

DirectionOracle torus_oracle(double major_radius, double minor_radius)
{
    if (!(major_radius > minor_radius && minor_radius > 0.0))
        throw Error("torus_oracle: need major > minor > 0");
    return [](const Vec3& p, const Vec3&) -> std::optional<Vec3> {
        const Vec3 t(-p.y(), p.x(), 0.0);
        if (t.norm() < 1e-12)
            return std::nullopt;
        return t.normalized();
    };
}

DirectionOracle cylinder_oracle()
{
    return [](const Vec3&, const Vec3&) -> std::optional<Vec3> { return Vec3(0.0, 0.0, 1.0); };
}

} // namespace neurcross
