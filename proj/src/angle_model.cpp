#include "neurcross/angle_model.hpp"

#include <cmath>
#include <random>

namespace neurcross {

namespace {

using Mat = Eigen::MatrixXd;
using Dense = AngleModel::Dense;

Eigen::Map<const Mat> W(const Eigen::VectorXd& p, const Dense& d)
{
    return {p.data() + d.weight, d.out, d.in};
}

Eigen::Map<const Eigen::VectorXd> b(const Eigen::VectorXd& p, const Dense& d)
{
    return {p.data() + d.bias, d.out};
}

Mat affine(const Eigen::VectorXd& p, const Dense& d, const Mat& x)
{
    Mat y(d.out, x.cols());
    y.noalias() = W(p, d) * x;
    y.colwise() += b(p, d);
    return y;
}

Mat relu(Mat x)
{
    x = x.cwiseMax(0.0);
    return x;
}

// d(loss)/d(x) for y = W x + b, accumulating parameter gradients.
Mat affine_back(const Eigen::VectorXd& p, const Dense& d, const Mat& x, const Mat& ybar,
                Eigen::Ref<Eigen::VectorXd> grad, bool need_input = true)
{
    Eigen::Map<Mat> gW(grad.data() + d.weight, d.out, d.in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + d.bias, d.out);
    gW.noalias() += ybar * x.transpose();
    gb += ybar.rowwise().sum();
    if (!need_input)
        return {};
    Mat xbar(d.in, ybar.cols());
    xbar.noalias() = W(p, d).transpose() * ybar;
    return xbar;
}

// Mask an adjoint by the ReLU that produced `y`.
void relu_mask(Mat& bar, const Mat& y)
{
    bar = (y.array() > 0.0).select(bar, 0.0);
}

Mat stack(const Mat& top, const Mat& bottom)
{
    Mat s(top.rows() + bottom.rows(), top.cols());
    s << top, bottom;
    return s;
}

// Fixed activation layout written by forward() and read by backward().
struct Layout {
    // acts[0] = features, acts[1] = stem output, then per unit: u1, u2, out.
    std::array<std::size_t, 7> block_start{};  // index of first unit's u1
    std::array<std::size_t, 7> block_out{};    // index of block output
    std::array<std::size_t, 7> block_in{};     // index of block input
    std::size_t up = 0;
    std::array<std::size_t, 3> merge_cat{};
    std::array<std::size_t, 3> merge_out{};
    std::size_t head = 0;
};

Layout layout_of(const AngleModel& m)
{
    Layout L;
    std::size_t k = 2;
    auto run_block = [&](int bi, std::size_t input) {
        L.block_in[bi] = input;
        L.block_start[bi] = k;
        k += 3 * m.blocks()[bi].size();
        L.block_out[bi] = k - 1;
    };
    run_block(0, 1);
    run_block(1, L.block_out[0]);
    run_block(2, L.block_out[1]);
    L.up = k++;
    run_block(3, L.up);
    for (int i = 0; i < 3; ++i) {
        L.merge_cat[i] = k++;
        L.merge_out[i] = k++;
        run_block(4 + i, L.merge_out[i]);
    }
    L.head = k++;
    return L;
}

} // namespace

AngleModel::AngleModel(const AngleArchitecture& arch, std::size_t face_count)
    : arch_(arch), faces_(face_count)
{
    if (arch.direct) {
        params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(face_count));
        return;
    }
    if (arch.width < 4 || arch.width % 4 != 0)
        throw Error("AngleModel: width must be a positive multiple of 4");
    Eigen::Index total = 0;
    auto dense = [&](int in, int out) {
        Dense d{total, total + static_cast<Eigen::Index>(in) * out, in, out};
        total += static_cast<Eigen::Index>(in + 1) * out;
        return d;
    };
    const int w = arch.width, wide = 2 * arch.width;
    stem_ = dense(kFeatureDim, w);
    auto make_block = [&](int bi, int width) {
        for (int u = 0; u < arch.bottleneck_units[bi]; ++u) {
            Unit unit;
            unit.reduce = dense(width, width / 4);
            unit.inner = dense(width / 4, width / 4);
            unit.expand = dense(width / 4, width);
            blocks_[bi].push_back(unit);
        }
    };
    make_block(0, w);
    make_block(1, w);
    make_block(2, w);
    up_ = dense(w, wide);
    make_block(3, wide);
    for (int i = 0; i < 3; ++i) {
        merges_[i] = dense(wide + w, wide);
        make_block(4 + i, wide);
    }
    head1_ = dense(wide, arch.head_width);
    head2_ = dense(arch.head_width, 1);
    params_ = Eigen::VectorXd::Zero(total);
}

AngleModel init_angle_model(const AngleArchitecture& arch, std::size_t face_count, std::uint64_t seed)
{
    AngleModel m(arch, face_count);
    std::mt19937_64 rng(seed);
    auto& p = m.parameters();
    if (arch.direct) {
        std::normal_distribution<double> nd(0.0, arch.output_init_std);
        for (Eigen::Index i = 0; i < p.size(); ++i)
            p[i] = nd(rng);
        return m;
    }
    auto uniform = [&](const Dense& d) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(d.in));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d.in) * d.out; ++i)
            p[d.weight + i] = u(rng);
        for (int i = 0; i < d.out; ++i)
            p[d.bias + i] = u(rng);
    };
    uniform(m.stem());
    for (int bi = 0; bi < 7; ++bi) {
        if (bi == 3)
            uniform(m.up());
        if (bi >= 4)
            uniform(m.merges()[bi - 4]);
        for (const auto& unit : m.blocks()[bi]) {
            uniform(unit.reduce);
            uniform(unit.inner);
            uniform(unit.expand);
        }
    }
    uniform(m.head_hidden());
    const Dense& out = m.head_out();
    std::normal_distribution<double> nd(0.0, arch.output_init_std);
    for (int i = 0; i < out.in; ++i)
        p[out.weight + i] = nd(rng);
    p[out.bias] = 0.0;
    return m;
}

void forward(const AngleModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features,
             std::size_t first_face, AngleTape& tape)
{
    const Eigen::Index B = features.cols();
    tape.batch = B;
    tape.first_face = first_face;
    const auto& p = model.parameters();

    if (model.architecture().direct) {
        if (first_face + static_cast<std::size_t>(B) > model.face_count())
            throw Error("AngleModel: face range exceeds the direct-mode parameter count");
        tape.acts.clear();
        tape.logits = p.segment(static_cast<Eigen::Index>(first_face), B).transpose();
    } else {
        if (features.rows() != kFeatureDim)
            throw Error("AngleModel: feature dimension " + std::to_string(features.rows()) +
                        " != " + std::to_string(kFeatureDim));
        auto& a = tape.acts;
        a.clear();
        a.reserve(256);
        a.push_back(features);
        a.push_back(relu(affine(p, model.stem(), a.back())));
        auto run_block = [&](int bi) {
            for (const auto& unit : model.blocks()[bi]) {
                const std::size_t in = a.size() - 1;
                a.push_back(relu(affine(p, unit.reduce, a[in])));
                a.push_back(relu(affine(p, unit.inner, a.back())));
                Mat out = affine(p, unit.expand, a.back());
                out += a[in];
                a.push_back(relu(std::move(out)));
            }
            return a.size() - 1;
        };
        const std::size_t e1 = run_block(0);
        const std::size_t e2 = run_block(1);
        const std::size_t e3 = run_block(2);
        a.push_back(relu(affine(p, model.up(), a[e3])));
        std::size_t d = run_block(3);
        const std::array<std::size_t, 3> skips = {e3, e2, e1};
        for (int i = 0; i < 3; ++i) {
            a.push_back(stack(a[d], a[skips[i]]));
            a.push_back(relu(affine(p, model.merges()[i], a.back())));
            d = run_block(4 + i);
        }
        a.push_back(relu(affine(p, model.head_hidden(), a[d])));
        tape.logits = affine(p, model.head_out(), a.back());
    }
    tape.omega = (1.0 / (1.0 + (-tape.logits.array()).exp())).matrix();
}

void backward(const AngleModel& model, const AngleTape& tape,
              const Eigen::Ref<const Eigen::RowVectorXd>& theta_adjoint, Eigen::Ref<Eigen::VectorXd> grad)
{
    const Eigen::Index B = tape.batch;
    if (theta_adjoint.size() != B)
        throw Error("AngleModel::backward: adjoint size mismatch");
    // theta = 2 pi sigmoid(logit)
    Eigen::RowVectorXd lbar =
        (kTwoPi * theta_adjoint.array() * tape.omega.array() * (1.0 - tape.omega.array())).matrix();

    if (model.architecture().direct) {
        grad.segment(static_cast<Eigen::Index>(tape.first_face), B) += lbar.transpose();
        return;
    }

    const auto& p = model.parameters();
    const auto& a = tape.acts;
    const Layout L = layout_of(model);

    Mat bar = affine_back(p, model.head_out(), a[L.head], lbar, grad);
    relu_mask(bar, a[L.head]);

    // Adjoints of the encoder outputs picked up through skip connections.
    std::array<Mat, 3> skip_bar;
    const std::array<std::size_t, 3> skip_idx = {L.block_out[2], L.block_out[1], L.block_out[0]};

    auto block_back = [&](int bi, Mat out_bar) {
        const auto& units = model.blocks()[bi];
        for (int u = static_cast<int>(units.size()) - 1; u >= 0; --u) {
            const std::size_t base = L.block_start[bi] + 3 * static_cast<std::size_t>(u);
            const std::size_t in = u == 0 ? L.block_in[bi] : base - 1;
            relu_mask(out_bar, a[base + 2]);
            Mat t = affine_back(p, units[u].expand, a[base + 1], out_bar, grad);
            relu_mask(t, a[base + 1]);
            t = affine_back(p, units[u].inner, a[base], t, grad);
            relu_mask(t, a[base]);
            t = affine_back(p, units[u].reduce, a[in], t, grad);
            out_bar += t;
        }
        return out_bar;
    };

    bar = affine_back(p, model.head_hidden(), a[L.block_out[6]], bar, grad);
    for (int i = 2; i >= 0; --i) {
        bar = block_back(4 + i, std::move(bar));
        relu_mask(bar, a[L.merge_out[i]]);
        Mat cat_bar = affine_back(p, model.merges()[i], a[L.merge_cat[i]], bar, grad);
        const Eigen::Index top = model.architecture().width * 2;
        skip_bar[i] = cat_bar.bottomRows(cat_bar.rows() - top);
        bar = cat_bar.topRows(top);
    }
    bar = block_back(3, std::move(bar));
    relu_mask(bar, a[L.up]);
    bar = affine_back(p, model.up(), a[skip_idx[0]], bar, grad);
    for (int bi = 2; bi >= 0; --bi) {
        bar += skip_bar[2 - bi];
        bar = block_back(bi, std::move(bar));
    }
    relu_mask(bar, a[1]);
    affine_back(p, model.stem(), a[0], bar, grad, false);
}

Eigen::Index activation_rows_per_sample(const AngleModel& model)
{
    if (model.architecture().direct)
        return 0;
    Eigen::Index rows = kFeatureDim + model.stem().out + model.up().out + model.head_hidden().out;
    for (const auto& block : model.blocks())
        for (const auto& unit : block)
            rows += unit.reduce.out + unit.inner.out + unit.expand.out;
    for (const auto& m : model.merges())
        rows += m.in + m.out;
    return rows;
}

Eigen::MatrixXd build_features(const TriMesh& mesh)
{
    Eigen::MatrixXd f(kFeatureDim, static_cast<Eigen::Index>(mesh.face_count()));
    for (std::size_t i = 0; i < mesh.face_count(); ++i) {
        const auto& fr = mesh.frames()[i];
        const Eigen::Index c = static_cast<Eigen::Index>(i);
        f.block<3, 1>(0, c) = mesh.centroids()[i];
        f.block<3, 1>(3, c) = fr.normal;
        f.block<3, 1>(6, c) = fr.mu;
        f.block<3, 1>(9, c) = fr.nu;
    }
    return f;
}

std::vector<double> predict_theta(const AngleModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features,
                                  Eigen::Index chunk)
{
    std::vector<double> theta(static_cast<std::size_t>(features.cols()));
    AngleTape tape;
    for (Eigen::Index s = 0; s < features.cols(); s += chunk) {
        const Eigen::Index n = std::min(chunk, features.cols() - s);
        forward(model, features.middleCols(s, n), static_cast<std::size_t>(s), tape);
        for (Eigen::Index i = 0; i < n; ++i)
            theta[static_cast<std::size_t>(s + i)] = kTwoPi * tape.omega[i];
    }
    return theta;
}

std::pair<Vec3, Vec3> cross_from_theta(double theta, const LocalFrame& frame)
{
    const double c = std::cos(theta), s = std::sin(theta);
    return {frame.mu * c + frame.nu * s, frame.nu * c - frame.mu * s};
}

CrossField make_cross_field(const std::vector<double>& theta, const std::vector<LocalFrame>& frames)
{
    if (theta.size() != frames.size())
        throw Error("make_cross_field: one angle per face required");
    CrossField field;
    field.theta = theta;
    field.alpha.resize(theta.size());
    field.beta.resize(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
        std::tie(field.alpha[i], field.beta[i]) = cross_from_theta(theta[i], frames[i]);
    return field;
}

double angle_in_frame(const Vec3& direction, const LocalFrame& frame)
{
    return std::atan2(direction.dot(frame.nu), direction.dot(frame.mu));
}

} // namespace neurcross
