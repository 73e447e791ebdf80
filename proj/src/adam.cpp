#include "neurcross/adam.hpp"

#include <cmath>

namespace neurcross {

void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad,
               AdamState& state, long step, const AdamConfig& cfg)
{
    if (grad.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw Error("adam_step: shape mismatch");
    if (step < 1)
        throw Error("adam_step: step count starts at 1");
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double sqrt_bc2 = std::sqrt(bc2);
    params.array() -= (cfg.lr / bc1) * state.m.array() / ((state.v.array().sqrt() / sqrt_bc2) + cfg.eps);
}

} // namespace neurcross
