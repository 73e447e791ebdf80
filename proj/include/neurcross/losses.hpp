#pragma once

// Loss terms on SDF jets and the cross field.
//
// Each per-sample function returns the term value and writes the adjoints
// of that value with respect to its inputs; batch functions are means of the
// per-sample values.  The trainer combines the adjoints with the network
// reverse passes.

#include "neurcross/angle_model.hpp"
#include "neurcross/mesh.hpp"

#include <array>
#include <string>
#include <vector>

namespace neurcross {

struct LossWeights {
    double eikonal = 50.0;
    double dm = 7000.0;
    double dnm = 600.0;
    double an = 3.0;
    double ap = 10.0;
    double s = 30.0;
    double rho_dnm = 100.0;
    double rho_feature = 10.0;
};

struct LossTerms {
    double eikonal = 0.0;
    double dm = 0.0;
    double dnm = 0.0;
    double an = 0.0;
    double ap = 0.0;
    double s = 0.0;

    static constexpr std::array<const char*, 6> names = {"eikonal", "dm", "dnm", "an", "ap", "s"};
    std::array<double, 6> as_array() const { return {eikonal, dm, dnm, an, ap, s}; }
};

/// Annealing factor for the normal-alignment term: 1 before 20% of training,
/// linear to 3e-4 at 40%, 0 afterwards.
double tau(long iter, long total_iters);

double total_loss(const LossTerms& t, const LossWeights& w, double tau_value);

/// Throws Error naming the first non-finite term.
void check_finite(const LossTerms& t);

// ---- per-sample terms ----------------------------------------------------

double eikonal_sample(const Vec3& grad, Vec3* grad_bar);
double dm_sample(double f, double* f_bar);
double dnm_sample(double f, double rho, double* f_bar);
/// ||H n||; H_bar is the adjoint w.r.t. the full matrix.
double an_sample(const Mat3& H, const Vec3& n, Mat3* H_bar);
/// ||(H a) x a|| + ||(H b) x b||.
double ap_sample(const Mat3& H, const Vec3& a, const Vec3& b, Mat3* H_bar, Vec3* a_bar, Vec3* b_bar);
/// Adjoint of theta from adjoints of (alpha, beta) = cross_from_theta(theta).
inline double theta_adjoint(const Vec3& alpha, const Vec3& beta, const Vec3& a_bar, const Vec3& b_bar)
{
    return a_bar.dot(beta) - b_bar.dot(alpha);
}

/// One directed pair: |a.A| + |a.B| + |b.A| + |b.B| - 2 with (A, B) the
/// neighbor cross transported into this face.  Writes d/dtheta of this face
/// and of the neighbor.
double smoothness_pair(const Vec3& a, const Vec3& b, const Vec3& A, const Vec3& B,
                       double* dtheta_self, double* dtheta_other);

// ---- batch terms ---------------------------------------------------------

double loss_eikonal(const std::vector<Vec3>& gradients);
double loss_dirichlet(const std::vector<double>& values);
double loss_dirichlet_far(const std::vector<double>& values, double rho);
double loss_align_normal(const std::vector<Mat3>& hessians, const std::vector<Vec3>& normals);
double loss_align_principal(const std::vector<Mat3>& hessians, const CrossField& field,
                            const std::vector<double>& feature_weight);
/// Mean over faces of the per-face average over present neighbors; when
/// theta_grad is non-null it receives d(L_S)/d(theta) per face.
double loss_smoothness(const CrossField& field, const TriMesh& mesh, std::vector<double>* theta_grad = nullptr);

// ---- feature lines -------------------------------------------------------

struct FeatureLines {
    std::vector<std::vector<int>> polylines;  // vertex chains
};

struct FeatureConstraints {
    std::vector<double> weight;      // D per face
    std::vector<char> constrained;   // face has an edge on a feature line
    std::vector<double> fixed_theta; // prescribed theta on constrained faces
    std::size_t constrained_count = 0;
};

/// D = 1 - exp(-rho d) with d the straight-line distance from the centroid
/// to the nearest feature segment; D = 1 everywhere without feature lines.
FeatureConstraints feature_constraints(const TriMesh& mesh, const FeatureLines& lines, double rho);

} // namespace neurcross
