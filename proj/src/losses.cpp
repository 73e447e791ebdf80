#include "neurcross/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace neurcross {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// ||(H v) x v|| and its adjoints, accumulated.
double ap_one(const Mat3& H, const Vec3& v, Mat3* H_bar, Vec3* v_bar)
{
    const Vec3 Hv = H * v;
    const Vec3 w = Hv.cross(v);
    const double n = w.norm();
    if (n == 0.0)
        return 0.0;
    const Vec3 wh = w / n;
    const Vec3 vw = v.cross(wh);
    if (H_bar)
        *H_bar += vw * v.transpose();
    if (v_bar)
        *v_bar += H.transpose() * vw + wh.cross(Hv);
    return n;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b)
{
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

} // namespace

double tau(long iter, long total_iters)
{
    if (total_iters <= 0)
        throw Error("tau: total iteration count must be positive");
    const double t = static_cast<double>(iter) / static_cast<double>(total_iters);
    if (t < 0.2)
        return 1.0;
    if (t < 0.4)
        return 1.0 + (3e-4 - 1.0) * (t - 0.2) / 0.2;
    return 0.0;
}

double total_loss(const LossTerms& t, const LossWeights& w, double tau_value)
{
    return w.eikonal * t.eikonal + w.dm * t.dm + w.dnm * t.dnm + tau_value * w.an * t.an + w.ap * t.ap +
           w.s * t.s;
}

void check_finite(const LossTerms& t)
{
    const auto v = t.as_array();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw Error(std::string("non-finite loss term '") + LossTerms::names[i] + "'");
}

double eikonal_sample(const Vec3& grad, Vec3* grad_bar)
{
    const double n = grad.norm();
    const double r = 1.0 - n;
    if (grad_bar)
        *grad_bar = n > 0.0 ? Vec3(-sgn(r) * grad / n) : Vec3::Zero();
    return std::abs(r);
}

double dm_sample(double f, double* f_bar)
{
    if (f_bar)
        *f_bar = sgn(f);
    return std::abs(f);
}

double dnm_sample(double f, double rho, double* f_bar)
{
    const double e = std::exp(-rho * std::abs(f));
    if (f_bar)
        *f_bar = -rho * sgn(f) * e;
    return e;
}

double an_sample(const Mat3& H, const Vec3& n, Mat3* H_bar)
{
    const Vec3 u = H * n;
    const double len = u.norm();
    if (H_bar)
        *H_bar = len > 0.0 ? Mat3((u / len) * n.transpose()) : Mat3::Zero();
    return len;
}

double ap_sample(const Mat3& H, const Vec3& a, const Vec3& b, Mat3* H_bar, Vec3* a_bar, Vec3* b_bar)
{
    if (H_bar)
        H_bar->setZero();
    if (a_bar)
        a_bar->setZero();
    if (b_bar)
        b_bar->setZero();
    return ap_one(H, a, H_bar, a_bar) + ap_one(H, b, H_bar, b_bar);
}

double smoothness_pair(const Vec3& a, const Vec3& b, const Vec3& A, const Vec3& B,
                       double* dtheta_self, double* dtheta_other)
{
    const double aA = a.dot(A), aB = a.dot(B), bA = b.dot(A), bB = b.dot(B);
    // d/dtheta_self: a -> b, b -> -a.  d/dtheta_other: A -> B, B -> -A.
    if (dtheta_self)
        *dtheta_self = sgn(aA) * bA + sgn(aB) * bB - sgn(bA) * aA - sgn(bB) * aB;
    if (dtheta_other)
        *dtheta_other = sgn(aA) * aB - sgn(aB) * aA + sgn(bA) * bB - sgn(bB) * bA;
    return std::abs(aA) + std::abs(aB) + std::abs(bA) + std::abs(bB) - 2.0;
}

double loss_eikonal(const std::vector<Vec3>& gradients)
{
    if (gradients.empty())
        return 0.0;
    double s = 0.0;
    for (const auto& g : gradients)
        s += eikonal_sample(g, nullptr);
    return s / static_cast<double>(gradients.size());
}

double loss_dirichlet(const std::vector<double>& values)
{
    if (values.empty())
        return 0.0;
    double s = 0.0;
    for (double f : values)
        s += std::abs(f);
    return s / static_cast<double>(values.size());
}

double loss_dirichlet_far(const std::vector<double>& values, double rho)
{
    if (values.empty())
        return 0.0;
    double s = 0.0;
    for (double f : values)
        s += dnm_sample(f, rho, nullptr);
    return s / static_cast<double>(values.size());
}

double loss_align_normal(const std::vector<Mat3>& hessians, const std::vector<Vec3>& normals)
{
    if (hessians.size() != normals.size())
        throw Error("loss_align_normal: size mismatch");
    if (hessians.empty())
        return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < hessians.size(); ++i)
        s += an_sample(hessians[i], normals[i], nullptr);
    return s / static_cast<double>(hessians.size());
}

double loss_align_principal(const std::vector<Mat3>& hessians, const CrossField& field,
                            const std::vector<double>& feature_weight)
{
    if (hessians.size() != field.size() || (!feature_weight.empty() && feature_weight.size() != field.size()))
        throw Error("loss_align_principal: size mismatch");
    if (hessians.empty())
        return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < hessians.size(); ++i) {
        const double d = feature_weight.empty() ? 1.0 : feature_weight[i];
        s += d * ap_sample(hessians[i], field.alpha[i], field.beta[i], nullptr, nullptr, nullptr);
    }
    return s / static_cast<double>(hessians.size());
}

double loss_smoothness(const CrossField& field, const TriMesh& mesh, std::vector<double>* theta_grad)
{
    const std::size_t F = mesh.face_count();
    if (field.size() != F)
        throw Error("loss_smoothness: field size does not match the mesh");
    if (theta_grad)
        theta_grad->assign(F, 0.0);
    if (F == 0)
        return 0.0;
    const double inv_f = 1.0 / static_cast<double>(F);
    double total = 0.0;
    for (std::size_t p = 0; p < F; ++p) {
        const int present = mesh.neighbor_count(p);
        if (present == 0)
            continue;
        const double w = inv_f / present;
        double face_sum = 0.0;
        for (int slot = 0; slot < 3; ++slot) {
            const int q = mesh.neighbors()[p][slot];
            if (q < 0)
                continue;
            const Mat3& R = mesh.rotation(p, slot);
            const auto qs = static_cast<std::size_t>(q);
            double ds = 0.0, dq = 0.0;
            face_sum += smoothness_pair(field.alpha[p], field.beta[p], R * field.alpha[qs], R * field.beta[qs],
                                        theta_grad ? &ds : nullptr, theta_grad ? &dq : nullptr);
            if (theta_grad) {
                (*theta_grad)[p] += w * ds;
                (*theta_grad)[qs] += w * dq;
            }
        }
        total += face_sum / present;
    }
    return total * inv_f;
}

FeatureConstraints feature_constraints(const TriMesh& mesh, const FeatureLines& lines, double rho)
{
    const std::size_t F = mesh.face_count();
    FeatureConstraints c;
    c.weight.assign(F, 1.0);
    c.constrained.assign(F, 0);
    c.fixed_theta.assign(F, 0.0);

    std::vector<std::pair<int, int>> segments;
    for (const auto& line : lines.polylines) {
        for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            const int a = line[i], b = line[i + 1];
            if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= mesh.vertex_count() ||
                static_cast<std::size_t>(b) >= mesh.vertex_count())
                throw Error("feature line references a missing vertex");
            if (a != b)
                segments.emplace_back(a, b);
        }
    }
    if (segments.empty())
        return c;

    std::map<std::pair<int, int>, int> on_line;  // undirected edge -> segment id
    for (std::size_t s = 0; s < segments.size(); ++s) {
        auto [a, b] = segments[s];
        on_line.emplace(std::minmax(a, b), static_cast<int>(s));
    }

    const auto& V = mesh.vertices();
    for (std::size_t f = 0; f < F; ++f) {
        double d = std::numeric_limits<double>::infinity();
        for (auto [a, b] : segments)
            d = std::min(d, point_segment_distance(mesh.centroids()[f], V[a], V[b]));
        c.weight[f] = 1.0 - std::exp(-rho * d);

        const auto& tri = mesh.faces()[f];
        for (int e = 0; e < 3; ++e) {
            const int a = tri[e], b = tri[(e + 1) % 3];
            if (on_line.count(std::minmax(a, b)) == 0)
                continue;
            c.constrained[f] = 1;
            double t = angle_in_frame(V[b] - V[a], mesh.frames()[f]);
            c.fixed_theta[f] = t < 0.0 ? t + kTwoPi : t;
            ++c.constrained_count;
            break;
        }
    }
    return c;
}

} // namespace neurcross
