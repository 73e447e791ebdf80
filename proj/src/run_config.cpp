#include "neurcross/run_config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace neurcross {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where)
{
    for (const auto& [k, v] : j.items())
        if (!known.count(k))
            throw Error(where + ": unknown key '" + k + "'");
}

template <class T> void get(const json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

} // namespace

RunConfig run_config_from_json(const std::string& text, const std::string& source)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(source + ": " + e.what());
    }
    if (!j.is_object())
        throw Error(source + ": top level must be an object");
    RunConfig c;
    TrainConfig& t = c.train;
    try {
        reject_unknown(j,
                       {"mesh", "output_dir", "seed", "iterations", "learning_rate", "adam_beta1", "adam_beta2",
                        "adam_eps", "log_every", "checkpoint_every", "two_step", "two_step_fraction", "grad_clip",
                        "knn", "q_count", "feature_lines", "sdf", "angle", "weights", "chunks", "angle_cache_mb"},
                       source);
        if (j.contains("mesh"))
            c.mesh = j.at("mesh").get<std::string>();
        if (j.contains("output_dir"))
            t.output_dir = j.at("output_dir").get<std::string>();
        get(j, "seed", t.seed);
        get(j, "iterations", t.iterations);
        get(j, "learning_rate", t.adam.lr);
        get(j, "adam_beta1", t.adam.beta1);
        get(j, "adam_beta2", t.adam.beta2);
        get(j, "adam_eps", t.adam.eps);
        get(j, "log_every", t.log_every);
        get(j, "checkpoint_every", t.checkpoint_every);
        get(j, "two_step", t.two_step);
        get(j, "two_step_fraction", t.two_step_fraction);
        get(j, "grad_clip", t.grad_clip);
        get(j, "knn", t.knn);
        get(j, "q_count", t.q_count);
        get(j, "angle_cache_mb", t.angle_cache_mb);
        get(j, "feature_lines", c.feature_lines);
        if (j.contains("sdf")) {
            const auto& s = j.at("sdf");
            reject_unknown(s, {"hidden_width", "hidden_layers", "first_omega", "hidden_omega", "input_scale"},
                           source + ": sdf");
            get(s, "hidden_width", t.sdf.hidden_width);
            get(s, "hidden_layers", t.sdf.hidden_layers);
            get(s, "first_omega", t.sdf.first_omega);
            get(s, "hidden_omega", t.sdf.hidden_omega);
            get(s, "input_scale", t.sdf.input_scale);
        }
        if (j.contains("angle")) {
            const auto& a = j.at("angle");
            reject_unknown(a, {"width", "bottleneck_units", "head_width", "output_init_std", "direct"},
                           source + ": angle");
            get(a, "width", t.angle.width);
            get(a, "bottleneck_units", t.angle.bottleneck_units);
            get(a, "head_width", t.angle.head_width);
            get(a, "output_init_std", t.angle.output_init_std);
            get(a, "direct", t.angle.direct);
        }
        if (j.contains("weights")) {
            const auto& w = j.at("weights");
            reject_unknown(w, {"eikonal", "dm", "dnm", "an", "ap", "s", "rho_dnm", "rho_feature"},
                           source + ": weights");
            get(w, "eikonal", t.weights.eikonal);
            get(w, "dm", t.weights.dm);
            get(w, "dnm", t.weights.dnm);
            get(w, "an", t.weights.an);
            get(w, "ap", t.weights.ap);
            get(w, "s", t.weights.s);
            get(w, "rho_dnm", t.weights.rho_dnm);
            get(w, "rho_feature", t.weights.rho_feature);
        }
        if (j.contains("chunks")) {
            const auto& ch = j.at("chunks");
            reject_unknown(ch, {"sdf", "angle"}, source + ": chunks");
            get(ch, "sdf", t.sdf_chunk);
            get(ch, "angle", t.angle_chunk);
        }
    } catch (const json::exception& e) {
        throw Error(source + ": " + e.what());
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return run_config_from_json(ss.str(), path.string());
}

std::string run_config_to_json(const RunConfig& c, int indent)
{
    const TrainConfig& t = c.train;
    json j;
    j["mesh"] = c.mesh.string();
    j["output_dir"] = t.output_dir.string();
    j["seed"] = t.seed;
    j["iterations"] = t.iterations;
    j["learning_rate"] = t.adam.lr;
    j["adam_beta1"] = t.adam.beta1;
    j["adam_beta2"] = t.adam.beta2;
    j["adam_eps"] = t.adam.eps;
    j["log_every"] = t.log_every;
    j["checkpoint_every"] = t.checkpoint_every;
    j["two_step"] = t.two_step;
    j["two_step_fraction"] = t.two_step_fraction;
    j["grad_clip"] = t.grad_clip;
    j["knn"] = t.knn;
    j["q_count"] = t.q_count;
    j["angle_cache_mb"] = t.angle_cache_mb;
    j["feature_lines"] = c.feature_lines;
    j["sdf"] = {{"hidden_width", t.sdf.hidden_width},
                {"hidden_layers", t.sdf.hidden_layers},
                {"first_omega", t.sdf.first_omega},
                {"hidden_omega", t.sdf.hidden_omega},
                {"input_scale", t.sdf.input_scale}};
    j["angle"] = {{"width", t.angle.width},
                  {"bottleneck_units", t.angle.bottleneck_units},
                  {"head_width", t.angle.head_width},
                  {"output_init_std", t.angle.output_init_std},
                  {"direct", t.angle.direct}};
    j["weights"] = {{"eikonal", t.weights.eikonal}, {"dm", t.weights.dm},   {"dnm", t.weights.dnm},
                    {"an", t.weights.an},           {"ap", t.weights.ap},   {"s", t.weights.s},
                    {"rho_dnm", t.weights.rho_dnm}, {"rho_feature", t.weights.rho_feature}};
    j["chunks"] = {{"sdf", t.sdf_chunk}, {"angle", t.angle_chunk}};
    return j.dump(indent);
}

} // namespace neurcross
