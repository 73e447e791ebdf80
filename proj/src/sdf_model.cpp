#include "neurcross/sdf_model.hpp"

#include <cmath>
#include <random>

namespace neurcross {

void init_sine_weights(SineNet& net, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    for (int l = 0; l < net.layer_count(); ++l) {
        const int fan_in = net.widths()[l];
        const double bound = l == 0 ? 1.0 / fan_in
                                    : std::sqrt(6.0 / fan_in) / net.hidden_omega();
        std::uniform_real_distribution<double> uw(-bound, bound);
        auto W = net.weight(l);
        for (Eigen::Index j = 0; j < W.cols(); ++j)
            for (Eigen::Index i = 0; i < W.rows(); ++i)
                W(i, j) = uw(rng);
        const double bb = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> ub(-bb, bb);
        auto b = net.bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i)
            b[i] = ub(rng);
    }
}

SdfModel init_sdf(std::uint64_t seed, const SdfArchitecture& arch)
{
    if (arch.hidden_layers < 1 || arch.hidden_width < 1)
        throw Error("init_sdf: invalid architecture");
    std::vector<int> widths{3};
    for (int i = 0; i < arch.hidden_layers; ++i)
        widths.push_back(arch.hidden_width);
    widths.push_back(1);
    SdfModel m{SineNet(std::move(widths), arch.first_omega, arch.hidden_omega, arch.input_scale)};
    init_sine_weights(m.net, seed);
    return m;
}

DerivativeBundle sdf_query(const SdfModel& model, const Vec3& x)
{
    return eval_with_derivatives(model.net, x);
}

} // namespace neurcross
