#pragma once

// Dense sine-activated networks R^3 -> R with exact input derivatives.
//
// Every hidden layer applies y = sin(omega * (W a + b)).  The forward pass
// propagates jets (value, gradient, Hessian w.r.t. the 3-d input) through the
// layers as blocks of one wide matrix, so each layer is a single GEMM over
// all jet components.  The reverse pass differentiates that jet propagation
// with respect to the weights, which is what makes losses on gradients and
// Hessians trainable.

#include "neurcross/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace neurcross {

/// Which input derivatives a forward pass carries.
enum class JetOrder : int {
    Value = 1,     // f
    Gradient = 4,  // f, df/dx, df/dy, df/dz
    Hessian = 10,  // ... plus H_xx, H_yy, H_zz, H_xy, H_xz, H_yz
};

constexpr int components(JetOrder o) { return static_cast<int>(o); }

struct DerivativeBundle {
    double value = 0.0;
    Vec3 gradient = Vec3::Zero();
    Mat3 hessian = Mat3::Zero();
};

/// Parameter layout of a sine network; parameters live in one flat vector.
class SineNet {
public:
    SineNet() = default;
    /// widths = {in, hidden..., out}; at least one hidden layer.
    SineNet(std::vector<int> widths, double first_omega, double hidden_omega,
            double input_scale = 1.0);

    const std::vector<int>& widths() const { return widths_; }
    int in_dim() const { return widths_.front(); }
    int out_dim() const { return widths_.back(); }
    int layer_count() const { return static_cast<int>(widths_.size()) - 1; }
    double omega(int layer) const { return layer == 0 ? first_omega_ : hidden_omega_; }
    double first_omega() const { return first_omega_; }
    double hidden_omega() const { return hidden_omega_; }
    /// Inputs are multiplied by this before the first layer (chain rule applied).
    double input_scale() const { return input_scale_; }

    Eigen::Index parameter_count() const { return total_; }
    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }

    Eigen::Map<Eigen::MatrixXd> weight(int layer);
    Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
    Eigen::Map<Eigen::VectorXd> bias(int layer);
    Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
    Eigen::Index weight_offset(int layer) const { return offsets_[layer]; }
    Eigen::Index bias_offset(int layer) const
    {
        return offsets_[layer] + static_cast<Eigen::Index>(widths_[layer + 1]) * widths_[layer];
    }

private:
    std::vector<int> widths_;
    std::vector<Eigen::Index> offsets_;
    Eigen::Index total_ = 0;
    double first_omega_ = 30.0;
    double hidden_omega_ = 30.0;
    double input_scale_ = 1.0;
    Eigen::VectorXd params_;
};

/// Stored forward state for one batch, consumed by `backward`.
///
/// Matrices have one row per unit and components(order) * batch columns:
/// column block c holds jet component c for every point of the batch.
struct JetTape {
    JetOrder order = JetOrder::Value;
    Eigen::Index batch = 0;
    std::vector<Eigen::MatrixXd> inputs;   // a_l, input of layer l
    std::vector<Eigen::ArrayXXd> sines;    // sin(omega z_l) of hidden layers
    std::vector<Eigen::ArrayXXd> cosines;  // cos(omega z_l)
    std::vector<Eigen::MatrixXd> preacts;  // z_l of hidden layers (derivative blocks)
    Eigen::MatrixXd output;                // out_dim x (components * batch)
};

/// Batched forward pass.  `points` is 3 x batch in input (mesh) coordinates.
void forward(const SineNet& net, const Eigen::Ref<const Eigen::MatrixXd>& points, JetOrder order,
             JetTape& tape);

/// Reverse pass: given d(loss)/d(output jets) laid out like tape.output,
/// accumulates d(loss)/d(parameters) into `grad` (size parameter_count()).
void backward(const SineNet& net, const JetTape& tape,
              const Eigen::Ref<const Eigen::MatrixXd>& output_adjoint, Eigen::Ref<Eigen::VectorXd> grad);

/// Jets of output 0 at point `i` of a tape with Hessian order.
DerivativeBundle bundle_at(const JetTape& tape, Eigen::Index i);

/// Plain evaluation (value only).
double eval(const SineNet& net, const Vec3& x);
/// Value, input gradient and input Hessian at one point.
DerivativeBundle eval_with_derivatives(const SineNet& net, const Vec3& x);

} // namespace neurcross
