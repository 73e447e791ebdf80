#pragma once

// Joint optimization of the SDF network and the angle network.

#include "neurcross/adam.hpp"
#include "neurcross/angle_model.hpp"
#include "neurcross/checkpoint.hpp"
#include "neurcross/losses.hpp"
#include "neurcross/sampling.hpp"
#include "neurcross/sdf_model.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace neurcross {

struct TrainConfig {
    long iterations = 10000;
    AdamConfig adam;
    std::uint64_t seed = 0;
    long log_every = 1;
    long checkpoint_every = 1000;  // 0 disables intermediate checkpoints
    /// SDF-only pretraining for `two_step_fraction` of the iterations, then
    /// the field alone against the frozen SDF.
    bool two_step = false;
    double two_step_fraction = 0.5;
    double grad_clip = 0.0;  // max global gradient norm; 0 disables
    int knn = 50;
    Eigen::Index q_count = 0;  // 0 means |Q| = |P|
    SdfArchitecture sdf;
    AngleArchitecture angle;
    LossWeights weights;
    Eigen::Index sdf_chunk = 256;
    Eigen::Index angle_chunk = 256;
    /// Angle activations are kept between the forward and backward pass when
    /// they fit in this budget, otherwise recomputed.
    double angle_cache_mb = 1536.0;
    std::filesystem::path output_dir;  // empty: no files written
    bool verbose = false;
};

struct HistoryRow {
    long iter = 0;
    LossTerms terms;
    double total = 0.0;
    double tau = 0.0;
    double ms = 0.0;
};

struct TrainResult {
    SdfModel sdf;
    AngleModel angle;
    std::vector<HistoryRow> history;
    long completed = 0;
    bool diverged = false;
    std::string message;
    Checkpoint final_checkpoint;
};

/// Evaluates the loss terms of the given models on iteration `iter`'s
/// samples without touching parameters.
struct EvalOptions {
    bool sdf_terms = true;
    bool field_terms = true;
    double tau = 1.0;
    Eigen::VectorXd* sdf_grad = nullptr;    // accumulate d(total)/d(sdf params)
    Eigen::VectorXd* angle_grad = nullptr;  // accumulate d(total)/d(angle params)
};

/// Fixed data for one mesh: samples, features and feature-line constraints.
class TrainingProblem {
public:
    TrainingProblem(const TriMesh& mesh, const TrainConfig& cfg, const FeatureLines* lines = nullptr);

    const TriMesh& mesh() const { return mesh_; }
    const SurfaceSamples& surface() const { return P_; }
    const Eigen::VectorXd& sigma() const { return sigma_; }
    const Eigen::MatrixXd& features() const { return features_; }
    const FeatureConstraints& constraints() const { return fc_; }
    const TrainConfig& config() const { return cfg_; }

    Eigen::Matrix3Xd omega_samples(long iter) const;
    Eigen::Matrix3Xd q_samples(long iter) const;

    /// theta per face with feature constraints applied.
    std::vector<double> field_theta(const AngleModel& angle) const;

    LossTerms evaluate(const SdfModel& sdf, const AngleModel& angle, long iter, const EvalOptions& opt) const;

    /// Freezes the SDF Hessians at the surface samples; later field-only
    /// evaluations reuse them.
    void cache_hessians(const SdfModel& sdf);
    void clear_hessian_cache() { hessian_cache_.clear(); }

private:
    const TriMesh& mesh_;
    TrainConfig cfg_;
    SurfaceSamples P_;
    Eigen::VectorXd sigma_;
    Eigen::MatrixXd features_;
    FeatureConstraints fc_;
    std::vector<Mat3> hessian_cache_;
};

struct TrainCallbacks {
    std::function<void(const HistoryRow&)> on_log;
};

/// Runs the optimization.  The mesh must already be normalized.
TrainResult train(const TriMesh& mesh, const TrainConfig& cfg, const FeatureLines* lines = nullptr,
                  const TrainCallbacks& callbacks = {});

/// Applies the NEURCROSS_THREADS environment variable; returns the thread count.
int configure_threads();

std::string format_history_row(const HistoryRow& row);
inline constexpr const char* kHistoryHeader = "iter,eikonal,dm,dnm,an,ap,s,total,tau";

} // namespace neurcross
