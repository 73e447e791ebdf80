#include "neurcross/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace neurcross {

namespace {

constexpr std::array<char, 8> kMagic = {'N', 'C', 'R', 'S', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian hosts");

class Writer {
public:
    explicit Writer(std::ofstream& out) : out_(out) {}
    template <class T> void pod(const T& v) { out_.write(reinterpret_cast<const char*>(&v), sizeof(T)); }
    void vec(const Eigen::VectorXd& v)
    {
        pod<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
        out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    }

private:
    std::ofstream& out_;
};

class Reader {
public:
    Reader(std::ifstream& in, std::string name) : in_(in), name_(std::move(name)) {}
    template <class T> T pod()
    {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_)
            throw Error(name_ + ": truncated checkpoint");
        return v;
    }
    Eigen::VectorXd vec(Eigen::Index expected)
    {
        const auto n = pod<std::uint64_t>();
        if (expected >= 0 && n != static_cast<std::uint64_t>(expected))
            throw Error(name_ + ": parameter count " + std::to_string(n) + " does not match architecture (" +
                        std::to_string(expected) + ")");
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
        if (!in_)
            throw Error(name_ + ": truncated checkpoint");
        return v;
    }

private:
    std::ifstream& in_;
    std::string name_;
};

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c)
{
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write checkpoint " + tmp.string());
        Writer w(out);
        out.write(kMagic.data(), kMagic.size());
        w.pod(kVersion);
        w.pod<std::int64_t>(c.iteration);

        w.pod<std::int32_t>(c.sdf_arch.hidden_width);
        w.pod<std::int32_t>(c.sdf_arch.hidden_layers);
        w.pod(c.sdf_arch.first_omega);
        w.pod(c.sdf_arch.hidden_omega);
        w.pod(c.sdf_arch.input_scale);
        w.vec(c.sdf.net.parameters());

        const auto& a = c.angle.architecture();
        w.pod<std::int32_t>(a.width);
        for (int u : a.bottleneck_units)
            w.pod<std::int32_t>(u);
        w.pod<std::int32_t>(a.head_width);
        w.pod(a.output_init_std);
        w.pod<std::uint8_t>(a.direct ? 1 : 0);
        w.pod<std::uint64_t>(c.angle.face_count());
        w.vec(c.angle.parameters());

        w.pod<std::uint8_t>(c.has_optimizer ? 1 : 0);
        if (c.has_optimizer) {
            w.pod<std::int64_t>(c.sdf_steps);
            w.pod<std::int64_t>(c.angle_steps);
            w.vec(c.sdf_state.m);
            w.vec(c.sdf_state.v);
            w.vec(c.angle_state.m);
            w.vec(c.angle_state.v);
        }
        if (!out)
            throw Error("failed writing checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open checkpoint " + path.string());
    Reader r(in, path.string());
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic)
        throw Error(path.string() + ": not a checkpoint file");
    const auto version = r.pod<std::uint32_t>();
    if (version != kVersion)
        throw Error(path.string() + ": unsupported checkpoint version " + std::to_string(version));

    Checkpoint c;
    c.iteration = r.pod<std::int64_t>();
    c.sdf_arch.hidden_width = r.pod<std::int32_t>();
    c.sdf_arch.hidden_layers = r.pod<std::int32_t>();
    c.sdf_arch.first_omega = r.pod<double>();
    c.sdf_arch.hidden_omega = r.pod<double>();
    c.sdf_arch.input_scale = r.pod<double>();
    c.sdf = init_sdf(0, c.sdf_arch);
    c.sdf.net.parameters() = r.vec(c.sdf.net.parameter_count());

    AngleArchitecture a;
    a.width = r.pod<std::int32_t>();
    for (int& u : a.bottleneck_units)
        u = r.pod<std::int32_t>();
    a.head_width = r.pod<std::int32_t>();
    a.output_init_std = r.pod<double>();
    a.direct = r.pod<std::uint8_t>() != 0;
    const auto faces = r.pod<std::uint64_t>();
    c.angle = AngleModel(a, static_cast<std::size_t>(faces));
    c.angle.parameters() = r.vec(c.angle.parameter_count());

    c.has_optimizer = r.pod<std::uint8_t>() != 0;
    if (c.has_optimizer) {
        c.sdf_steps = r.pod<std::int64_t>();
        c.angle_steps = r.pod<std::int64_t>();
        c.sdf_state.m = r.vec(c.sdf.net.parameter_count());
        c.sdf_state.v = r.vec(c.sdf.net.parameter_count());
        c.angle_state.m = r.vec(c.angle.parameter_count());
        c.angle_state.v = r.vec(c.angle.parameter_count());
    }
    return c;
}

} // namespace neurcross
