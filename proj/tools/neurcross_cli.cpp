#include "neurcross/checkpoint.hpp"
#include "neurcross/field_analysis.hpp"
#include "neurcross/quad_metrics.hpp"
#include "neurcross/run_config.hpp"
#include "neurcross/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace neurcross;

namespace {

constexpr int kExitDiverged = 3;

struct LoadedMesh {
    TriMesh mesh;
    FeatureLines lines;
};

LoadedMesh load_normalized(const fs::path& path)
{
    if (!fs::exists(path))
        throw Error("mesh not found: " + path.string());
    const ObjData obj = read_obj(path);
    LoadedMesh m{normalize(mesh_from_obj(obj, path.string())), {}};
    m.lines.polylines = obj.lines;
    return m;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out || !(out << text))
        throw Error("cannot write " + path.string());
}

void emit_json(const json& j, const std::string& out)
{
    if (out.empty() || out == "-")
        std::cout << j.dump(2) << "\n";
    else
        write_text(out, j.dump(2) + "\n");
}

json singularity_json(const SingularityReport& r)
{
    json sings = json::array();
    for (std::size_t v = 0; v < r.index.size(); ++v)
        if (!r.boundary[v] && r.index[v] != 0.0)
            sings.push_back({{"vertex", v}, {"index", r.index[v]}});
    return {{"total_index", r.total_index},
            {"euler_characteristic", r.euler_characteristic},
            {"singular_count", r.singular_count},
            {"boundary_vertex_count", r.boundary_vertex_count},
            {"max_rounding_residual", r.max_rounding_residual},
            {"singularities", sings}};
}

constexpr double kDeg = 180.0 / kPi;

json alignment_json(const AlignmentStats& s)
{
    return {{"median_deg", s.median * kDeg}, {"mean_deg", s.mean * kDeg}, {"max_deg", s.max * kDeg},
            {"count", s.count},             {"excluded", s.excluded}};
}

DirectionOracle parse_oracle(const std::string& text)
{
    if (text == "cylinder")
        return cylinder_oracle();
    if (text.rfind("torus:", 0) == 0) {
        std::istringstream ss(text.substr(6));
        double R = 0.0, r = 0.0;
        char comma = 0;
        if (!(ss >> R >> comma >> r) || comma != ',')
            throw Error("oracle must look like torus:R,r");
        return torus_oracle(R, r);
    }
    throw Error("unknown oracle '" + text + "' (expected torus:R,r or cylinder)");
}

RunConfig read_config_or_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    if (j.is_object() && j.contains("config") && j.contains("subcommand"))
        return run_config_from_json(j.at("config").dump(), path.string());
    return run_config_from_json(ss.str(), path.string());
}

void apply_preset(const std::string& preset, TrainConfig& t)
{
    if (preset.empty() || preset == "full")
        return;
    if (preset == "compact") {
        t.sdf.hidden_width = 64;
        t.angle.width = 32;
        t.angle_chunk = 1024;
        return;
    }
    throw Error("unknown preset '" + preset + "' (expected full or compact)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Joint neural SDF and cross-field optimization on triangle meshes"};
    app.require_subcommand(1);

    // ---- fit ----
    auto* fit = app.add_subcommand("fit", "Optimize SDF and cross field for a mesh");
    std::string fit_config, fit_mesh, fit_out, fit_preset;
    long fit_iters = -1, fit_log = -1, fit_ckpt = -1;
    std::int64_t fit_seed = -1;
    double fit_lr = -1.0, fit_clip = -1.0;
    bool fit_two_step = false, fit_direct = false, fit_no_features = false, fit_verbose = false;
    fit->add_option("--config", fit_config, "JSON run config (or a previous manifest.json)");
    fit->add_option("--mesh", fit_mesh, "Triangle mesh OBJ");
    fit->add_option("--out", fit_out, "Run directory");
    fit->add_option("--iters", fit_iters, "Iterations");
    fit->add_option("--seed", fit_seed, "Random seed");
    fit->add_option("--lr", fit_lr, "Adam learning rate");
    fit->add_option("--log-every", fit_log, "History interval");
    fit->add_option("--checkpoint-every", fit_ckpt, "Checkpoint interval (0 disables)");
    fit->add_option("--grad-clip", fit_clip, "Max global gradient norm (0 disables)");
    fit->add_option("--preset", fit_preset, "Architecture preset: full (default) or compact");
    fit->add_flag("--two-step", fit_two_step, "SDF-only pretraining, then field with frozen SDF");
    fit->add_flag("--direct", fit_direct, "Free per-face angles instead of the angle network");
    fit->add_flag("--no-feature-lines", fit_no_features, "Ignore `l` records of the mesh");
    fit->add_flag("-v,--verbose", fit_verbose, "Print losses while training");

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "Singularities and alignment of a trained field");
    std::string an_ckpt, an_mesh, an_oracle, an_out;
    bool an_no_features = false;
    analyze->add_option("--checkpoint", an_ckpt, "Checkpoint file")->required();
    analyze->add_option("--mesh", an_mesh, "Triangle mesh OBJ used for the fit")->required();
    analyze->add_option("--oracle", an_oracle, "Analytic directions: torus:R,r or cylinder");
    analyze->add_option("--out", an_out, "JSON output (default stdout)");
    analyze->add_flag("--no-feature-lines", an_no_features, "Ignore `l` records of the mesh");

    // ---- export-field ----
    auto* exp = app.add_subcommand("export-field", "Write the cross field as a ROSY file");
    std::string ex_ckpt, ex_mesh, ex_out;
    bool ex_no_features = false;
    exp->add_option("--checkpoint", ex_ckpt, "Checkpoint file")->required();
    exp->add_option("--mesh", ex_mesh, "Triangle mesh OBJ used for the fit")->required();
    exp->add_option("--out", ex_out, "Output field file")->required();
    exp->add_flag("--no-feature-lines", ex_no_features, "Ignore `l` records of the mesh");

    // ---- eval-quad ----
    auto* evq = app.add_subcommand("eval-quad", "Quad mesh quality metrics");
    std::string eq_quad, eq_ref, eq_out;
    std::size_t eq_samples = 100000;
    std::uint64_t eq_seed = 0;
    evq->add_option("--quad", eq_quad, "Quad mesh OBJ")->required();
    evq->add_option("--reference", eq_ref, "Reference triangle mesh OBJ for the chamfer distance");
    evq->add_option("--samples", eq_samples, "Samples per surface for the chamfer distance");
    evq->add_option("--seed", eq_seed, "Sampling seed");
    evq->add_option("--out", eq_out, "JSON output (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        configure_threads();

        if (*fit) {
            RunConfig rc;
            std::string config_path;
            if (!fit_config.empty()) {
                rc = read_config_or_manifest(fit_config);
                config_path = fs::absolute(fit_config).string();
            }
            TrainConfig& t = rc.train;
            apply_preset(fit_preset, t);
            if (!fit_mesh.empty())
                rc.mesh = fit_mesh;
            if (fit_iters >= 0)
                t.iterations = fit_iters;
            if (fit_seed >= 0)
                t.seed = static_cast<std::uint64_t>(fit_seed);
            if (fit_lr > 0.0)
                t.adam.lr = fit_lr;
            if (fit_log >= 0)
                t.log_every = fit_log;
            if (fit_ckpt >= 0)
                t.checkpoint_every = fit_ckpt;
            if (fit_clip >= 0.0)
                t.grad_clip = fit_clip;
            if (fit_two_step)
                t.two_step = true;
            if (fit_direct)
                t.angle.direct = true;
            if (fit_no_features)
                rc.feature_lines = false;
            t.verbose = fit_verbose;
            if (rc.mesh.empty())
                throw Error("no mesh given (use --mesh or the config's \"mesh\" key)");
            if (!fit_out.empty())
                t.output_dir = fit_out;
            if (t.output_dir.empty())
                t.output_dir = fs::path("runs") / (rc.mesh.stem().string() + "-s" + std::to_string(t.seed));

            const LoadedMesh lm = load_normalized(rc.mesh);
            fs::create_directories(t.output_dir);
            json manifest;
            manifest["subcommand"] = "fit";
            manifest["config_path"] = config_path;
            manifest["mesh_path"] = fs::absolute(rc.mesh).string();
            manifest["output_dir"] = fs::absolute(t.output_dir).string();
            manifest["seed"] = t.seed;
            manifest["mode"] = t.two_step ? "two_step" : "joint";
            manifest["config"] = json::parse(run_config_to_json(rc));
            manifest["argv"] = std::vector<std::string>(argv, argv + argc);
            write_text(t.output_dir / "manifest.json", manifest.dump(2) + "\n");

            const FeatureLines* lines = rc.feature_lines && !lm.lines.polylines.empty() ? &lm.lines : nullptr;
            const TrainResult res = train(lm.mesh, t, lines);

            const FeatureConstraints fc =
                feature_constraints(lm.mesh, lines ? *lines : FeatureLines{}, t.weights.rho_feature);
            const CrossField field = extract_field(res.angle, lm.mesh, &fc);
            export_field(field, t.output_dir / "field.rosy");
            json report = singularity_json(singularities(field, lm.mesh));
            report["iterations_completed"] = res.completed;
            write_text(t.output_dir / "singularities.json", report.dump(2) + "\n");
            if (res.diverged) {
                std::cerr << "error: " << res.message << " (last checkpoint kept)\n";
                return kExitDiverged;
            }
            std::cout << t.output_dir.string() << "\n";
            return 0;
        }

        if (*analyze) {
            const LoadedMesh lm = load_normalized(an_mesh);
            const Checkpoint c = load_checkpoint(an_ckpt);
            const FeatureConstraints fc = feature_constraints(
                lm.mesh, an_no_features ? FeatureLines{} : lm.lines, LossWeights{}.rho_feature);
            const CrossField field = extract_field(c.angle, lm.mesh, &fc);
            json j = singularity_json(singularities(field, lm.mesh));
            j["iteration"] = c.iteration;
            j["face_count"] = lm.mesh.face_count();
            if (!an_oracle.empty())
                j["alignment"] = alignment_json(alignment_error(field, lm.mesh, parse_oracle(an_oracle)));
            emit_json(j, an_out);
            return 0;
        }

        if (*exp) {
            const LoadedMesh lm = load_normalized(ex_mesh);
            const Checkpoint c = load_checkpoint(ex_ckpt);
            const FeatureConstraints fc = feature_constraints(
                lm.mesh, ex_no_features ? FeatureLines{} : lm.lines, LossWeights{}.rho_feature);
            export_field(extract_field(c.angle, lm.mesh, &fc), ex_out);
            return 0;
        }

        if (*evq) {
            const QuadMesh q = load_quad_mesh(eq_quad);
            std::optional<TriMesh> ref;
            if (!eq_ref.empty())
                ref = load_mesh(eq_ref);
            const MetricsReport m = evaluate_quad(q, ref ? &*ref : nullptr, eq_samples, eq_seed);
            json j = {{"area", m.area}, {"angle", m.angle}, {"sings", m.sings}, {"jr", m.jr},
                      {"quad_count", q.quads.size()}};
            j["cd"] = std::isnan(m.cd) ? json(nullptr) : json(m.cd);
            emit_json(j, eq_out);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
