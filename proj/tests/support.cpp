#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nctest {

std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("neurcross_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double directional_fd(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& dir, double h)
{
    return (f(x + h * dir) - f(x - h * dir)) / (2.0 * h);
}

double rel_err(double a, double b, double floor)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

neurcross::TrainConfig tiny_config(std::uint64_t seed)
{
    neurcross::TrainConfig c;
    c.seed = seed;
    c.iterations = 5;
    c.checkpoint_every = 0;
    c.knn = 10;
    c.sdf.hidden_width = 16;
    c.sdf.hidden_layers = 2;
    c.angle.width = 8;
    c.angle.bottleneck_units = {1, 1, 1, 1, 1, 1, 1};
    c.angle.head_width = 8;
    c.sdf_chunk = 37;
    c.angle_chunk = 29;
    return c;
}

AnalyticJet sphere_sdf(const Vec3& x, double radius)
{
    const double r = x.norm();
    const Vec3 n = x / r;
    return {r - radius, n, (Mat3::Identity() - n * n.transpose()) / r};
}

AnalyticJet cylinder_sdf(const Vec3& x, double radius)
{
    const Vec3 p(x.x(), x.y(), 0.0);
    const double rho = p.norm();
    const Vec3 n = p / rho;
    Mat3 P = Mat3::Identity() - n * n.transpose();
    P(2, 2) = 0.0;
    return {rho - radius, n, P / rho};
}

} // namespace nctest
