#pragma once

#include "neurcross/common.hpp"

namespace neurcross {

struct AdamConfig {
    double lr = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;

    void resize(Eigen::Index n)
    {
        m = Eigen::VectorXd::Zero(n);
        v = Eigen::VectorXd::Zero(n);
    }
};

/// One bias-corrected Adam update of `params` at global step `step` (1-based):
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
void adam_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad,
               AdamState& state, long step, const AdamConfig& cfg);

} // namespace neurcross
