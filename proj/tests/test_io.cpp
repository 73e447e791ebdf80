#include "neurcross/adam.hpp"
#include "neurcross/checkpoint.hpp"
#include "neurcross/run_config.hpp"
#include "neurcross/shapes.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

using namespace neurcross;

TEST(Adam, FirstStepByHand)
{
    AdamConfig cfg;
    cfg.lr = 0.1;
    Eigen::VectorXd p(3), g(3);
    p << 1.0, -2.0, 0.5;
    g << 0.3, -4.0, 1e-9;
    AdamState s;
    s.resize(3);
    adam_step(p, g, s, 1, cfg);
    for (int i = 0; i < 3; ++i) {
        // m_hat = g, v_hat = g^2 after bias correction at t = 1.
        const double mhat = (1 - cfg.beta1) * g[i] / (1 - cfg.beta1);
        const double vhat = (1 - cfg.beta2) * g[i] * g[i] / (1 - cfg.beta2);
        const double expected = std::array{1.0, -2.0, 0.5}[i] - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        EXPECT_NEAR(p[i], expected, 1e-15);
    }
    EXPECT_NEAR(p[0], 1.0 - 0.1 * 0.3 / (0.3 + 1e-8), 1e-15);
}

TEST(Adam, ZeroGradientAndConstantGradient)
{
    AdamConfig cfg;
    cfg.lr = 1e-3;
    Eigen::VectorXd p = Eigen::VectorXd::Constant(2, 1.0);
    AdamState s;
    s.resize(2);
    s.m << 0.5, -0.5;
    s.v << 0.2, 0.2;
    Eigen::VectorXd p0 = p;
    adam_step(p, Eigen::VectorXd::Zero(2), s, 5, cfg);
    EXPECT_NEAR(s.m[0], 0.45, 1e-15);
    EXPECT_NEAR(s.v[0], 0.2 * 0.999, 1e-15);

    p = p0;
    s.resize(2);
    Eigen::VectorXd g(2);
    g << 3.0, -0.01;
    for (long t = 1; t <= 200; ++t) {
        const Eigen::VectorXd before = p;
        adam_step(p, g, s, t, cfg);
        if (t == 200) {
            EXPECT_NEAR(before[0] - p[0], cfg.lr, 1e-9);
            EXPECT_NEAR(p[1] - before[1], cfg.lr, 1e-6);
        }
    }
}

TEST(Checkpoint, RoundTripIsBitExact)
{
    const auto dir = nctest::scratch_dir("ckpt");
    Checkpoint c;
    c.iteration = 123;
    c.sdf_arch.hidden_width = 12;
    c.sdf_arch.hidden_layers = 2;
    c.sdf = init_sdf(4, c.sdf_arch);
    AngleArchitecture a;
    a.width = 8;
    a.head_width = 4;
    c.angle = init_angle_model(a, 0, 5);
    c.has_optimizer = true;
    c.sdf_steps = 100;
    c.angle_steps = 60;
    c.sdf_state.resize(c.sdf.net.parameter_count());
    c.sdf_state.m.setConstant(0.1 / 3.0);
    c.sdf_state.v.setConstant(std::nextafter(1.0, 2.0));
    c.angle_state.resize(c.angle.parameter_count());
    c.angle_state.v[3] = -0.0;
    save_checkpoint(dir / "c.bin", c);
    const Checkpoint d = load_checkpoint(dir / "c.bin");
    EXPECT_EQ(d.iteration, 123);
    EXPECT_EQ(d.sdf.net.widths(), c.sdf.net.widths());
    EXPECT_EQ(d.sdf.net.parameters(), c.sdf.net.parameters());
    EXPECT_EQ(d.angle.parameters(), c.angle.parameters());
    EXPECT_EQ(d.angle.architecture().width, 8);
    EXPECT_EQ(d.sdf_steps, 100);
    EXPECT_EQ(d.angle_steps, 60);
    EXPECT_EQ(d.sdf_state.m, c.sdf_state.m);
    EXPECT_EQ(d.sdf_state.v, c.sdf_state.v);
    EXPECT_TRUE(std::signbit(d.angle_state.v[3]));

    save_checkpoint(dir / "c2.bin", d);
    EXPECT_EQ(nctest::read_file(dir / "c.bin"), nctest::read_file(dir / "c2.bin"));
}

TEST(Checkpoint, RejectsCorruptFiles)
{
    const auto dir = nctest::scratch_dir("ckpt_bad");
    EXPECT_THROW(load_checkpoint(dir / "missing.bin"), Error);
    std::ofstream(dir / "junk.bin") << "not a checkpoint at all";
    EXPECT_THROW(load_checkpoint(dir / "junk.bin"), Error);

    Checkpoint c;
    c.sdf_arch.hidden_width = 8;
    c.sdf_arch.hidden_layers = 1;
    c.sdf = init_sdf(1, c.sdf_arch);
    AngleArchitecture a;
    a.direct = true;
    c.angle = init_angle_model(a, 7, 1);
    save_checkpoint(dir / "ok.bin", c);
    const std::string bytes = nctest::read_file(dir / "ok.bin");
    std::ofstream(dir / "trunc.bin", std::ios::binary) << bytes.substr(0, bytes.size() - 9);
    EXPECT_THROW(load_checkpoint(dir / "trunc.bin"), Error);
    EXPECT_EQ(load_checkpoint(dir / "ok.bin").angle.parameters(), c.angle.parameters());
}

TEST(RunConfig, ParsesOverridesAndDefaults)
{
    const RunConfig c = run_config_from_json(R"({
        "mesh": "m.obj", "seed": 9, "iterations": 50, "learning_rate": 1e-4,
        "two_step": true, "sdf": {"hidden_width": 64}, "angle": {"width": 32, "direct": false},
        "weights": {"s": 5}, "chunks": {"angle": 1024}, "feature_lines": false})");
    EXPECT_EQ(c.mesh, "m.obj");
    EXPECT_EQ(c.train.seed, 9u);
    EXPECT_EQ(c.train.iterations, 50);
    EXPECT_EQ(c.train.adam.lr, 1e-4);
    EXPECT_TRUE(c.train.two_step);
    EXPECT_EQ(c.train.sdf.hidden_width, 64);
    EXPECT_EQ(c.train.sdf.hidden_layers, 4);
    EXPECT_EQ(c.train.angle.width, 32);
    EXPECT_EQ(c.train.weights.s, 5.0);
    EXPECT_EQ(c.train.weights.dm, 7000.0);
    EXPECT_EQ(c.train.angle_chunk, 1024);
    EXPECT_FALSE(c.feature_lines);

    const RunConfig d = run_config_from_json("{}");
    EXPECT_EQ(d.train.iterations, 10000);
    EXPECT_EQ(d.train.adam.lr, 5e-5);
    EXPECT_EQ(d.train.sdf.hidden_width, 256);
    EXPECT_EQ(d.train.angle.width, 256);
}

TEST(RunConfig, RoundTripIsExact)
{
    RunConfig c;
    c.mesh = "a/b.obj";
    c.train.seed = 123456789012345ull;
    c.train.adam.lr = 0.1 / 3.0;
    c.train.weights.ap = 1.0 / 7.0;
    c.train.angle.bottleneck_units = {1, 2, 3, 4, 5, 6, 7};
    const std::string text = run_config_to_json(c);
    EXPECT_EQ(run_config_to_json(run_config_from_json(text)), text);
    EXPECT_EQ(run_config_from_json(text).train.adam.lr, c.train.adam.lr);
}

TEST(RunConfig, RejectsUnknownAndMistyped)
{
    EXPECT_THROW(run_config_from_json(R"({"iteration": 5})"), Error);
    EXPECT_THROW(run_config_from_json(R"({"sdf": {"width": 5}})"), Error);
    EXPECT_THROW(run_config_from_json(R"({"weights": {"smooth": 1}})"), Error);
    EXPECT_THROW(run_config_from_json(R"({"iterations": "many"})"), Error);
    EXPECT_THROW(run_config_from_json("[1, 2]"), Error);
    EXPECT_THROW(run_config_from_json("{"), Error);
    try {
        run_config_from_json(R"({"iteration": 5})", "cfg.json");
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("cfg.json"), std::string::npos);
    }
}

TEST(Obj, WriteReadRoundTrip)
{
    const auto dir = nctest::scratch_dir("obj");
    const TriMesh m = shapes::torus(0.35, 0.15, 12, 6);
    write_obj(dir / "t.obj", m);
    const TriMesh r = load_mesh(dir / "t.obj");
    EXPECT_EQ(r.faces(), m.faces());
    EXPECT_EQ(r.vertices(), m.vertices());
}
