#pragma once

// Per-face rotation-angle predictor and the cross field it induces.

#include "neurcross/common.hpp"
#include "neurcross/mesh.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace neurcross {

struct AngleArchitecture {
    /// Width of the first three residual stages; the remaining four use 2x.
    int width = 256;
    std::array<int, 7> bottleneck_units = {3, 4, 6, 3, 3, 4, 6};
    int head_width = 32;
    /// Std of the normal init of the final fully connected layer.
    double output_init_std = 0.2;
    /// Free per-face angles instead of a network (ablation).
    bool direct = false;
};

inline constexpr int kFeatureDim = 12;

/// Pointwise residual MLP with encoder/decoder skip concatenations:
///
///   12 -> stem(W) -> R1 -> R2 -> R3 -> up(2W) -> R4
///      -> [R4, R3] -> 2W -> R5 -> [R5, R2] -> 2W -> R6 -> [R6, R1] -> 2W -> R7
///      -> 32 -> 1 -> sigmoid
///
/// Each R is a stack of bottleneck residual units (W -> W/4 -> W/4 -> W).
/// In direct mode the parameters are one logit per face.
class AngleModel {
public:
    struct Dense {
        Eigen::Index weight = 0;
        Eigen::Index bias = 0;
        int in = 0;
        int out = 0;
    };
    struct Unit {
        Dense reduce, inner, expand;
    };

    AngleModel() = default;
    AngleModel(const AngleArchitecture& arch, std::size_t face_count);

    const AngleArchitecture& architecture() const { return arch_; }
    std::size_t face_count() const { return faces_; }
    Eigen::Index parameter_count() const { return params_.size(); }
    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }

    const Dense& stem() const { return stem_; }
    const std::array<std::vector<Unit>, 7>& blocks() const { return blocks_; }
    const Dense& up() const { return up_; }
    const std::array<Dense, 3>& merges() const { return merges_; }
    const Dense& head_hidden() const { return head1_; }
    const Dense& head_out() const { return head2_; }

private:
    AngleArchitecture arch_;
    std::size_t faces_ = 0;
    Eigen::VectorXd params_;
    Dense stem_, up_, head1_, head2_;
    std::array<std::vector<Unit>, 7> blocks_;
    std::array<Dense, 3> merges_;
};

/// Seeded initialization: dense layers U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// final layer weights N(0, output_init_std), final bias 0; direct-mode
/// logits N(0, output_init_std).
AngleModel init_angle_model(const AngleArchitecture& arch, std::size_t face_count, std::uint64_t seed);

/// Forward state of one batch of faces.
struct AngleTape {
    Eigen::Index batch = 0;
    std::size_t first_face = 0;
    std::vector<Eigen::MatrixXd> acts;  // activations in forward order
    Eigen::RowVectorXd logits;
    Eigen::RowVectorXd omega;           // sigmoid(logits) in [0, 1]
};

/// Features are kFeatureDim x batch: [centroid, normal, mu, nu] per column.
/// `first_face` is the face index of column 0 (used in direct mode).
void forward(const AngleModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features,
             std::size_t first_face, AngleTape& tape);
/// Accumulates d(loss)/d(params) given d(loss)/d(theta) per column.
void backward(const AngleModel& model, const AngleTape& tape,
              const Eigen::Ref<const Eigen::RowVectorXd>& theta_adjoint, Eigen::Ref<Eigen::VectorXd> grad);

/// Doubles of activation storage per face held by an AngleTape.
Eigen::Index activation_rows_per_sample(const AngleModel& model);

Eigen::MatrixXd build_features(const TriMesh& mesh);

/// theta = 2 pi omega for every face, evaluated in chunks.
std::vector<double> predict_theta(const AngleModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features,
                                  Eigen::Index chunk = 512);

struct CrossField {
    std::vector<double> theta;
    std::vector<Vec3> alpha;
    std::vector<Vec3> beta;

    std::size_t size() const { return theta.size(); }
};

/// alpha = mu cos(theta) + nu sin(theta); beta = nu cos(theta) - mu sin(theta).
std::pair<Vec3, Vec3> cross_from_theta(double theta, const LocalFrame& frame);
CrossField make_cross_field(const std::vector<double>& theta, const std::vector<LocalFrame>& frames);
/// Angle of a tangent direction in the face frame.
double angle_in_frame(const Vec3& direction, const LocalFrame& frame);

} // namespace neurcross
