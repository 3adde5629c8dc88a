#include "spdetaylor/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spdetaylor/digest.hpp"
#include "spdetaylor/error.hpp"

namespace spdetaylor
{
namespace
{
using nlohmann::json;

void only_keys(json const& obj, std::string const& where, std::set<std::string> const& allowed)
{
    if (!obj.is_object())
        fail(ErrorCode::Config, where + " must be an object");
    for (auto const& [key, value] : obj.items())
    {
        if (!allowed.count(key))
            fail(ErrorCode::Config, "unknown key '" + key + "' in " + where);
    }
}

template<class T>
void read(json const& obj, char const* key, std::string const& where, T& out)
{
    auto it = obj.find(key);
    if (it == obj.end())
        return;
    try
    {
        out = it->get<T>();
    }
    catch (json::exception const&)
    {
        fail(ErrorCode::Config, where + "." + key + " has the wrong type");
    }
}

json to_json(Config const& c)
{
    auto const& m = c.model;
    auto const& e = c.experiment;
    json model{{"preset", m.preset},
               {"nonlinearity", m.nonlinearity},
               {"initial", m.initial},
               {"noise_scale", m.noise_scale}};
    if (m.preset == "heat1d")
        model["modes"] = m.modes;
    else if (m.preset == "trace3d")
        model["modes_per_axis"] = m.modes_per_axis;
    else if (m.preset == "sode")
        model["dimension"] = m.dimension, model["weights"] = m.weights;
    else
        model["lambdas"] = m.lambdas, model["bs"] = m.bs, model["kappa"] = m.kappa;
    json experiment{{"mode", e.mode},
                    {"ladder", e.ladder},
                    {"paths", e.paths},
                    {"seed", e.seed},
                    {"horizon", e.horizon},
                    {"steps", e.steps},
                    {"reference_substeps", e.reference_substeps},
                    {"identity_substeps", e.identity_substeps},
                    {"threads", e.threads},
                    {"hash_increments", e.hash_increments},
                    {"enforce_ci", e.enforce_ci},
                    {"time_integrals", e.time_integrals}};
    return json{{"model", model},
                {"schemes", c.schemes},
                {"experiment", experiment},
                {"output", {{"dir", c.output.dir}, {"formats", c.output.formats}}}};
}
}  // namespace

Config parse_config(std::string_view text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (json::parse_error const& e)
    {
        fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(root, "config", {"model", "schemes", "experiment", "output"});
    Config c;
    if (auto it = root.find("model"); it != root.end())
    {
        auto& m = c.model;
        only_keys(*it, "model",
                  {"preset", "modes", "modes_per_axis", "dimension", "weights", "lambdas", "bs",
                   "kappa", "nonlinearity", "initial", "noise_scale"});
        read(*it, "preset", "model", m.preset);
        read(*it, "modes", "model", m.modes);
        read(*it, "modes_per_axis", "model", m.modes_per_axis);
        read(*it, "dimension", "model", m.dimension);
        read(*it, "weights", "model", m.weights);
        read(*it, "lambdas", "model", m.lambdas);
        read(*it, "bs", "model", m.bs);
        read(*it, "kappa", "model", m.kappa);
        read(*it, "nonlinearity", "model", m.nonlinearity);
        read(*it, "initial", "model", m.initial);
        read(*it, "noise_scale", "model", m.noise_scale);
        std::set<std::string> presets{"heat1d", "trace3d", "sode", "custom"};
        if (!presets.count(m.preset))
            fail(ErrorCode::Config, "unknown model preset '" + m.preset + "'");
        if (m.preset == "sode" && m.weights.empty())
            m.weights.assign(m.dimension, 1.0);
    }
    read(root, "schemes", "config", c.schemes);
    if (auto it = root.find("experiment"); it != root.end())
    {
        auto& e = c.experiment;
        only_keys(*it, "experiment",
                  {"mode", "ladder", "paths", "seed", "horizon", "steps", "reference_substeps",
                   "identity_substeps", "threads", "hash_increments", "enforce_ci", "time_integrals"});
        read(*it, "mode", "experiment", e.mode);
        read(*it, "ladder", "experiment", e.ladder);
        read(*it, "paths", "experiment", e.paths);
        read(*it, "seed", "experiment", e.seed);
        read(*it, "horizon", "experiment", e.horizon);
        read(*it, "steps", "experiment", e.steps);
        read(*it, "reference_substeps", "experiment", e.reference_substeps);
        read(*it, "identity_substeps", "experiment", e.identity_substeps);
        read(*it, "threads", "experiment", e.threads);
        read(*it, "hash_increments", "experiment", e.hash_increments);
        read(*it, "enforce_ci", "experiment", e.enforce_ci);
        read(*it, "time_integrals", "experiment", e.time_integrals);
    }
    if (auto it = root.find("output"); it != root.end())
    {
        only_keys(*it, "output", {"dir", "formats"});
        read(*it, "dir", "output", c.output.dir);
        read(*it, "formats", "output", c.output.formats);
        for (auto const& f : c.output.formats)
        {
            if (f != "csv" && f != "svg" && f != "summary")
                fail(ErrorCode::Config, "unknown output format '" + f + "'");
        }
    }
    return c;
}

Config load_config(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::Config, "cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string canonical_text(Config const& c)
{
    return to_json(c).dump(2) + "\n";
}

std::string config_hash(Config const& c)
{
    json j = to_json(c);
    j["experiment"].erase("threads");
    j["output"].erase("dir");
    return sha256_hex(j.dump(2) + "\n");
}

SpectralModel build_model(ModelConfig const& mc)
{
    auto f = NonlinearitySpec::parse(mc.nonlinearity);
    auto model = [&] {
        if (mc.preset == "heat1d")
            return heat_1d_model(mc.modes, f);
        if (mc.preset == "trace3d")
            return trace_class_3d_model(mc.modes_per_axis, f);
        if (mc.preset == "sode")
        {
            auto w = mc.weights.empty() ? std::vector<double>(mc.dimension, 1.0) : mc.weights;
            if (w.size() != mc.dimension)
                fail(ErrorCode::Config, "sode weights must have `dimension` entries");
            return sode_model(mc.dimension, w, f);
        }
        if (mc.preset == "custom")
            return custom_model(mc.lambdas, mc.bs, mc.kappa, f);
        fail(ErrorCode::Config, "unknown model preset '" + mc.preset + "'");
    }();
    if (mc.noise_scale != 1)
        model = model.with_noise_scale(mc.noise_scale);
    return model;
}

std::vector<SchemeId> build_schemes(Config const& c)
{
    if (c.schemes.empty())
        fail(ErrorCode::Config, "no schemes selected");
    std::vector<SchemeId> out;
    for (auto const& s : c.schemes)
        out.push_back(parse_scheme(s));
    return out;
}

ExperimentMode build_mode(ExperimentConfig const& e)
{
    if (e.mode == "local")
        return ExperimentMode::Local;
    if (e.mode == "global")
        return ExperimentMode::Global;
    fail(ErrorCode::Config, "experiment.mode must be local or global, got '" + e.mode + "'");
}

NoiseRequest build_request(Config const& c, SpectralModel const& m)
{
    NoiseRequest needs;
    for (auto id : build_schemes(c))
        needs = merge(needs, noise_needs(id, m));
    auto const& ti = c.experiment.time_integrals;
    if (ti == "auto")
        return needs;
    TimeIntegralMode mode;
    if (ti == "none")
        mode = TimeIntegralMode::None;
    else if (ti == "diagonal")
        mode = TimeIntegralMode::Diagonal;
    else if (ti == "full")
        mode = TimeIntegralMode::Full;
    else
        fail(ErrorCode::Config, "experiment.time_integrals must be auto, none, diagonal or full");
    for (auto id : build_schemes(c))
    {
        if (noise_needs(id, m).time_integrals > mode)
        {
            fail(ErrorCode::Config, std::string(to_string(id)) + " needs time-integral sampling, but "
                                        "experiment.time_integrals is '" + ti + "'");
        }
    }
    needs.time_integrals = mode;
    return needs;
}
}  // namespace spdetaylor
