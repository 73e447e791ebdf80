#pragma once

#include "neurcross/angle_model.hpp"
#include "neurcross/mesh.hpp"
#include "neurcross/trainer.hpp"

#include <filesystem>
#include <functional>
#include <string>

namespace nctest {

using neurcross::Mat3;
using neurcross::Vec3;

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

/// Central difference of a scalar function along `dir`.
double directional_fd(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& dir, double h);

/// |a - b| / max(|a|, |b|, floor).
double rel_err(double a, double b, double floor = 1e-12);

/// Small architectures that keep trainer tests under a second.
neurcross::TrainConfig tiny_config(std::uint64_t seed = 7);

/// Analytic SDF oracles (independent of the networks).
struct AnalyticJet {
    double value;
    Vec3 gradient;
    Mat3 hessian;
};
AnalyticJet sphere_sdf(const Vec3& x, double radius);
/// Infinite cylinder about z.
AnalyticJet cylinder_sdf(const Vec3& x, double radius);

} // namespace nctest
