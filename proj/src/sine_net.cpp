#include "neurcross/sine_net.hpp"

#include <cmath>

namespace neurcross {

SineNet::SineNet(std::vector<int> widths, double first_omega, double hidden_omega, double input_scale)
    : widths_(std::move(widths)), first_omega_(first_omega), hidden_omega_(hidden_omega),
      input_scale_(input_scale)
{
    if (widths_.size() < 3)
        throw Error("SineNet: need an input, at least one hidden layer and an output");
    for (int w : widths_)
        if (w <= 0)
            throw Error("SineNet: layer widths must be positive");
    offsets_.resize(widths_.size() - 1);
    total_ = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        offsets_[l] = total_;
        total_ += static_cast<Eigen::Index>(widths_[l + 1]) * (widths_[l] + 1);
    }
    params_ = Eigen::VectorXd::Zero(total_);
}

Eigen::Map<Eigen::MatrixXd> SineNet::weight(int l)
{
    return {params_.data() + offsets_[l], widths_[l + 1], widths_[l]};
}

Eigen::Map<const Eigen::MatrixXd> SineNet::weight(int l) const
{
    return {params_.data() + offsets_[l], widths_[l + 1], widths_[l]};
}

Eigen::Map<Eigen::VectorXd> SineNet::bias(int l)
{
    return {params_.data() + bias_offset(l), widths_[l + 1]};
}

Eigen::Map<const Eigen::VectorXd> SineNet::bias(int l) const
{
    return {params_.data() + bias_offset(l), widths_[l + 1]};
}

namespace {

// sin and cos of scale * x: quadrant reduction with a three-part pi/2,
// then minimax kernels on [-pi/4, pi/4]; error within about one ulp for
// |scale * x| < 1e5.  Written branch-free so the loop vectorizes.
void sincos_scaled(const double* __restrict x, double scale, double* __restrict s, double* __restrict c,
                   Eigen::Index n)
{
    constexpr double inv_pio2 = 6.36619772367581382433e-01;
    constexpr double p1 = 1.57079632673412561417e+00;
    constexpr double p2 = 6.07710050630396597660e-11;
    constexpr double p3 = 2.02226624871116645580e-21;
    constexpr double S1 = -1.66666666666666324348e-01, S2 = 8.33333333332248946124e-03,
                     S3 = -1.98412698298579493134e-04, S4 = 2.75573137070700676789e-06,
                     S5 = -2.50507602534068634195e-08, S6 = 1.58969099521155010221e-10;
    constexpr double C1 = 4.16666666666666019037e-02, C2 = -1.38888888888741095749e-03,
                     C3 = 2.48015872894767294178e-05, C4 = -2.75573143513906633035e-07,
                     C5 = 2.08757232129817482790e-09, C6 = -1.13596475577881948265e-11;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = scale * x[i];
        const double k = std::floor(v * inv_pio2 + 0.5);
        const double r = ((v - k * p1) - k * p2) - k * p3;
        const double z = r * r;
        const double sr = r + r * z * (S1 + z * (S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)))));
        const double hz = 0.5 * z;
        const double w = 1.0 - hz;
        const double cr =
            w + (((1.0 - w) - hz) + z * z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6))))));
        const double q = k - 4.0 * std::floor(0.25 * k);  // quadrant in {0, 1, 2, 3}
        const bool odd = q == 1.0 || q == 3.0;
        const double ss = odd ? cr : sr;
        const double cc = odd ? sr : cr;
        s[i] = q >= 2.0 ? -ss : ss;
        c[i] = (q == 1.0 || q == 2.0) ? -cc : cc;
    }
}

void linear(const SineNet& net, int l, const Eigen::MatrixXd& in, Eigen::Index batch, Eigen::MatrixXd& out)
{
    const auto W = net.weight(l);
    const auto b = net.bias(l);
    out.resize(W.rows(), in.cols());
    // The value block is computed on its own so it is bit-identical to a
    // value-only pass over the same batch.
    out.leftCols(batch).noalias() = W * in.leftCols(batch);
    out.leftCols(batch).colwise() += b;
    const Eigen::Index rest = in.cols() - batch;
    if (rest > 0)
        out.rightCols(rest).noalias() = W * in.rightCols(rest);
}

} // namespace

void forward(const SineNet& net, const Eigen::Ref<const Eigen::MatrixXd>& points, JetOrder order,
             JetTape& tape)
{
    const int C = components(order);
    const Eigen::Index B = points.cols();
    if (points.rows() != net.in_dim())
        throw Error("SineNet::forward: input dimension " + std::to_string(points.rows()) +
                    " does not match network input " + std::to_string(net.in_dim()));
    if (order != JetOrder::Value && net.in_dim() != 3)
        throw Error("SineNet::forward: input derivatives require a 3-d input");

    const int L = net.layer_count();
    tape.order = order;
    tape.batch = B;
    tape.inputs.resize(L);
    tape.sines.resize(L - 1);
    tape.cosines.resize(L - 1);
    tape.preacts.resize(L - 1);

    const double s = net.input_scale();
    Eigen::MatrixXd& x0 = tape.inputs[0];
    x0.setZero(net.in_dim(), C * B);
    x0.leftCols(B) = s * points;
    if (C >= 4)
        for (int k = 0; k < 3; ++k)
            x0.block(k, (1 + k) * B, 1, B).setConstant(s);

    Eigen::MatrixXd z;
    for (int l = 0; l < L; ++l) {
        linear(net, l, tape.inputs[l], B, z);
        if (l == L - 1) {
            tape.output = std::move(z);
            break;
        }
        const double w = net.omega(l);
        const Eigen::Index n = z.rows();
        Eigen::ArrayXXd& sn = tape.sines[l];
        Eigen::ArrayXXd& cs = tape.cosines[l];
        sn.resize(n, B);
        cs.resize(n, B);
        sincos_scaled(z.data(), w, sn.data(), cs.data(), n * B);

        Eigen::MatrixXd& y = tape.inputs[l + 1];
        y.resize(n, C * B);
        y.leftCols(B) = sn.matrix();
        if (C >= 4) {
            const Eigen::ArrayXXd wc = w * cs;
            for (int k = 1; k <= 3; ++k)
                y.middleCols(k * B, B).array() = wc * z.middleCols(k * B, B).array();
            if (C == 10) {
                const Eigen::ArrayXXd w2s = (w * w) * sn;
                for (int m = 0; m < 6; ++m) {
                    const auto gi = z.middleCols((1 + kSymRow[m]) * B, B).array();
                    const auto gj = z.middleCols((1 + kSymCol[m]) * B, B).array();
                    y.middleCols((4 + m) * B, B).array() =
                        wc * z.middleCols((4 + m) * B, B).array() - w2s * gi * gj;
                }
            }
            tape.preacts[l] = z.rightCols((C - 1) * B);
        } else {
            tape.preacts[l].resize(n, 0);
        }
    }
}

void backward(const SineNet& net, const JetTape& tape,
              const Eigen::Ref<const Eigen::MatrixXd>& output_adjoint, Eigen::Ref<Eigen::VectorXd> grad)
{
    const int C = components(tape.order);
    const Eigen::Index B = tape.batch;
    const int L = net.layer_count();
    if (output_adjoint.rows() != net.out_dim() || output_adjoint.cols() != C * B)
        throw Error("SineNet::backward: adjoint shape mismatch");
    if (grad.size() != net.parameter_count())
        throw Error("SineNet::backward: gradient buffer size mismatch");

    Eigen::MatrixXd zbar = output_adjoint;
    Eigen::MatrixXd abar;
    for (int l = L - 1; l >= 0; --l) {
        const auto& a = tape.inputs[l];
        Eigen::Map<Eigen::MatrixXd> gW(grad.data() + net.weight_offset(l), net.widths()[l + 1],
                                       net.widths()[l]);
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + net.bias_offset(l), net.widths()[l + 1]);
        gW.noalias() += zbar * a.transpose();
        gb += zbar.leftCols(B).rowwise().sum();
        if (l == 0)
            break;

        abar.noalias() = net.weight(l).transpose() * zbar;

        // Adjoint through y = sin(w z) of hidden layer h = l - 1.
        const int h = l - 1;
        const double w = net.omega(h);
        const Eigen::ArrayXXd& sn = tape.sines[h];
        const Eigen::ArrayXXd& cs = tape.cosines[h];
        const Eigen::MatrixXd& dz = tape.preacts[h];  // derivative blocks of z
        const Eigen::ArrayXXd wc = w * cs;

        zbar.resize(abar.rows(), C * B);
        zbar.leftCols(B).array() = wc * abar.leftCols(B).array();
        if (C >= 4) {
            const Eigen::ArrayXXd w2s = (w * w) * sn;
            for (int k = 1; k <= 3; ++k) {
                const auto g = dz.middleCols((k - 1) * B, B).array();
                const auto gbar = abar.middleCols(k * B, B).array();
                zbar.leftCols(B).array() -= w2s * g * gbar;
                zbar.middleCols(k * B, B).array() = wc * gbar;
            }
            if (C == 10) {
                const Eigen::ArrayXXd w3c = (w * w * w) * cs;
                for (int m = 0; m < 6; ++m) {
                    const int i = kSymRow[m], j = kSymCol[m];
                    const auto gi = dz.middleCols(i * B, B).array();
                    const auto gj = dz.middleCols(j * B, B).array();
                    const auto hz = dz.middleCols((3 + m) * B, B).array();
                    const auto hbar = abar.middleCols((4 + m) * B, B).array();
                    zbar.middleCols((4 + m) * B, B).array() = wc * hbar;
                    zbar.leftCols(B).array() -= hbar * (w2s * hz + w3c * gi * gj);
                    const Eigen::ArrayXXd t = w2s * hbar;
                    zbar.middleCols((1 + i) * B, B).array() -= t * gj;
                    zbar.middleCols((1 + j) * B, B).array() -= t * gi;
                }
            }
        }
    }
}

DerivativeBundle bundle_at(const JetTape& tape, Eigen::Index i)
{
    if (tape.order != JetOrder::Hessian)
        throw Error("bundle_at: tape does not carry Hessians");
    const Eigen::Index B = tape.batch;
    const auto& o = tape.output;
    DerivativeBundle d;
    d.value = o(0, i);
    for (int k = 0; k < 3; ++k)
        d.gradient[k] = o(0, (1 + k) * B + i);
    double h[6];
    for (int m = 0; m < 6; ++m)
        h[m] = o(0, (4 + m) * B + i);
    d.hessian = sym_to_mat(h);
    return d;
}

double eval(const SineNet& net, const Vec3& x)
{
    JetTape tape;
    forward(net, x, JetOrder::Value, tape);
    return tape.output(0, 0);
}

DerivativeBundle eval_with_derivatives(const SineNet& net, const Vec3& x)
{
    if (net.out_dim() != 1)
        throw Error("eval_with_derivatives: network output must be scalar");
    JetTape tape;
    forward(net, x, JetOrder::Hessian, tape);
    return bundle_at(tape, 0);
}

} // namespace neurcross
