#pragma once

#include "neurcross/sine_net.hpp"

#include <cstdint>

namespace neurcross {

struct SdfArchitecture {
    int hidden_width = 256;
    int hidden_layers = 4;
    double first_omega = 30.0;
    double hidden_omega = 30.0;
    /// Mesh space [-0.5, 0.5]^3 maps to the network domain [-1, 1]^3.
    double input_scale = 2.0;
};

/// Neural signed distance function f(x; Theta) over normalized mesh space.
struct SdfModel {
    SineNet net;
};

/// Sine-network initialization: first layer U(-1/in, 1/in); later layers
/// U(-sqrt(6/fan_in)/omega, +sqrt(6/fan_in)/omega); biases U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
SdfModel init_sdf(std::uint64_t seed, const SdfArchitecture& arch = {});
void init_sine_weights(SineNet& net, std::uint64_t seed);

/// Value, gradient and Hessian of the SDF at x (mesh coordinates).
DerivativeBundle sdf_query(const SdfModel& model, const Vec3& x);

} // namespace neurcross
