#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mfgabs/error.hpp"
#include "mfgabs/reference_models.hpp"

namespace mfgabs::app {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

/// Strict view of one JSON object: every key must be consumed before finish().
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j.is_object())
            throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected an object");
    }

    const json* find(const std::string& key)
    {
        const auto it = j_.find(key);
        if (it == j_.end())
            return nullptr;
        used_.insert(key);
        return &*it;
    }

    std::string path(const std::string& key) const { return join(path_, key); }

    template <class T>
    void get(const std::string& key, T& out)
    {
        if (const json* v = find(key)) {
            try {
                out = v->get<T>();
            } catch (const json::exception&) {
                throw ConfigError(path(key) + ": wrong type");
            }
        }
    }

    template <class T>
    void get(const std::string& key, std::optional<T>& out)
    {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            T tmp{};
            get(key, tmp);
            out = tmp;
        }
    }

    void finish() const
    {
        for (const auto& [key, _] : j_.items())
            if (!used_.count(key))
                throw ConfigError("unknown key: " + join(path_, key));
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

[[noreturn]] void range_error(const std::string& field, const std::string& bound, double got)
{
    std::ostringstream os;
    os << field << ": must be " << bound << " (got " << got << ")";
    throw ConfigError(os.str());
}

void require(bool ok, const std::string& field, const std::string& bound, double got)
{
    if (!ok)
        range_error(field, bound, got);
}

CoefficientSpec parse_coefficient(const json& j, const std::string& path, CoefficientSpec current)
{
    Section s(j, path);
    std::string family = current.family;
    s.get("family", family);
    if (family != current.family)
        current.params.clear();
    current.family = family;
    if (const json* p = s.find("params")) {
        Section ps(*p, s.path("params"));
        for (const auto& [key, value] : p->items()) {
            if (!value.is_number())
                throw ConfigError(ps.path(key) + ": expected a number");
            current.params[key] = value.get<double>();
            ps.find(key);
        }
        ps.finish();
    }
    s.finish();
    return current;
}

ModelParameters parse_model(const json& j)
{
    Section s(j, "model");
    ModelParameters p;
    if (const json* preset = s.find("preset")) {
        if (!preset->is_string())
            throw ConfigError("model.preset: expected a string");
        p = reference_parameters(preset->get<std::string>());
    }
    const auto coefficient = [&](const char* key, CoefficientSpec& spec) {
        if (const json* v = s.find(key))
            spec = parse_coefficient(*v, s.path(key), spec);
    };
    coefficient("drift", p.families.drift);
    coefficient("control_cost", p.families.control_cost);
    coefficient("state_cost", p.families.state_cost);
    coefficient("terminal_cost", p.families.terminal_cost);
    coefficient("weight", p.families.weight);
    s.get("sigma", p.sigma);
    if (const json* a = s.find("actions")) {
        if (!a->is_array() || a->size() != 2 || !(*a)[0].is_number() || !(*a)[1].is_number())
            throw ConfigError("model.actions: expected [lo, hi]");
        p.actions = {(*a)[0].get<double>(), (*a)[1].get<double>()};
    }
    s.get("horizon", p.horizon);
    if (const json* init = s.find("initial")) {
        Section is(*init, "model.initial");
        std::string family = to_string(p.initial.family);
        is.get("family", family);
        p.initial.family = law_family_from_string(family);
        is.get("a", p.initial.a);
        is.get("b", p.initial.b);
        is.get("mean", p.initial.mean);
        is.get("sd", p.initial.sd);
        is.finish();
        if (p.initial.family == InitialLaw::Family::point_mass)
            p.initial.b = p.initial.a;
    }
    s.get("threshold", p.threshold);
    s.get("growth_C", p.growth_C);
    s.get("lipschitz_L", p.lipschitz_L);
    s.finish();
    require(p.growth_C > 0.0, "model.growth_C", "> 0", p.growth_C);
    require(p.lipschitz_L > 0.0, "model.lipschitz_L", "> 0", p.lipschitz_L);
    const ModelSpec validated(p);  // catalog and standing invariants
    (void)validated;
    return p;
}

json coefficient_json(const CoefficientSpec& c)
{
    json params = json::object();
    for (const auto& [k, v] : c.params)
        params[k] = v;
    return {{"family", c.family}, {"params", params}};
}

}  // namespace

bool OutputSection::has(const std::string& format) const
{
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

ExperimentConfig parse_config(const json& doc)
{
    Section root(doc, "");
    // Unknown top-level keys first, so a misspelt "model" is named as such.
    for (const auto& [key, _] : doc.items())
        if (key != "model" && key != "seed" && key != "grids" && key != "mfg" && key != "simulate" &&
            key != "study" && key != "output")
            throw ConfigError("unknown key: " + key);
    ExperimentConfig c;
    const json* model = root.find("model");
    if (!model)
        throw ConfigError("model: section is required");
    c.model = parse_model(*model);
    root.get("seed", c.seed);

    if (const json* g = root.find("grids")) {
        Section s(*g, "grids");
        s.get("K", c.grids.time_steps);
        s.get("J", c.grids.state_cells);
        s.get("x_max", c.grids.x_max);
        s.get("dt", c.grids.dt);
        s.finish();
    }
    require(c.grids.time_steps >= 1, "grids.K", ">= 1", static_cast<double>(c.grids.time_steps));
    require(c.grids.state_cells >= 2, "grids.J", ">= 2", static_cast<double>(c.grids.state_cells));
    require(c.grids.dt > 0.0, "grids.dt", "> 0", c.grids.dt);
    require(c.grids.dt <= c.model.horizon, "grids.dt", "<= model.horizon", c.grids.dt);
    if (c.grids.x_max)
        require(*c.grids.x_max > c.model.initial.upper(), "grids.x_max", "above the initial law's support",
                *c.grids.x_max);

    if (const json* m = root.find("mfg")) {
        Section s(*m, "mfg");
        s.get("schedule", c.mfg.schedule);
        s.get("damping", c.mfg.damping);
        s.get("tol", c.mfg.tol);
        s.get("max_iter", c.mfg.max_iter);
        s.get("alpha", c.mfg.alpha);
        s.finish();
    }
    require(!c.mfg.schedule.empty(), "mfg.schedule", "non-empty", 0.0);
    for (std::size_t i = 0; i < c.mfg.schedule.size(); ++i) {
        require(c.mfg.schedule[i] > 0.0, "mfg.schedule", "positive", c.mfg.schedule[i]);
        if (i > 0)
            require(c.mfg.schedule[i] > c.mfg.schedule[i - 1], "mfg.schedule", "strictly increasing",
                    c.mfg.schedule[i]);
    }
    require(c.mfg.damping > 0.0 && c.mfg.damping <= 1.0, "mfg.damping", "in (0, 1]", c.mfg.damping);
    require(c.mfg.tol > 0.0, "mfg.tol", "> 0", c.mfg.tol);
    require(c.mfg.max_iter >= 1, "mfg.max_iter", ">= 1", static_cast<double>(c.mfg.max_iter));
    if (c.mfg.alpha)
        require(*c.mfg.alpha > 0.0, "mfg.alpha", "> 0", *c.mfg.alpha);

    if (const json* m = root.find("simulate")) {
        Section s(*m, "simulate");
        s.get("N", c.simulate.particles);
        s.get("replications", c.simulate.replications);
        s.get("bridge", c.simulate.bridge);
        s.get("store_paths", c.simulate.store_paths);
        s.get("policy", c.simulate.policy);
        s.get("constant_action", c.simulate.constant_action);
        s.finish();
    }
    require(c.simulate.particles >= 1, "simulate.N", ">= 1", static_cast<double>(c.simulate.particles));
    require(c.simulate.replications >= 1, "simulate.replications", ">= 1",
            static_cast<double>(c.simulate.replications));
    if (c.simulate.policy != "mfg" && c.simulate.policy != "constant")
        throw ConfigError("simulate.policy: must be \"mfg\" or \"constant\" (got \"" + c.simulate.policy + "\")");
    require(c.model.actions.contains(c.simulate.constant_action), "simulate.constant_action", "inside model.actions",
            c.simulate.constant_action);

    if (const json* m = root.find("study")) {
        Section s(*m, "study");
        s.get("N_list", c.study.n_list);
        s.get("alpha_list", c.study.alpha_list);
        s.get("frozen", c.study.frozen);
        s.get("pilot_particles", c.study.pilot_particles);
        s.get("probe_count", c.study.probe_count);
        s.get("mc_paths", c.study.mc_paths);
        s.finish();
    }
    require(!c.study.n_list.empty(), "study.N_list", "non-empty", 0.0);
    for (std::size_t i = 0; i < c.study.n_list.size(); ++i) {
        const auto n = static_cast<double>(c.study.n_list[i]);
        require(c.study.n_list[i] >= 2, "study.N_list", ">= 2", n);
        if (i > 0)
            require(c.study.n_list[i] > c.study.n_list[i - 1], "study.N_list", "strictly increasing", n);
    }
    for (int a : c.study.alpha_list)
        require(a == 1 || a == 2 || a == 4, "study.alpha_list", "one of 1, 2, 4", a);
    require(c.study.pilot_particles >= 1, "study.pilot_particles", ">= 1",
            static_cast<double>(c.study.pilot_particles));
    require(c.study.probe_count >= 100, "study.probe_count", ">= 100", static_cast<double>(c.study.probe_count));
    require(c.study.mc_paths >= 1000, "study.mc_paths", ">= 1000", static_cast<double>(c.study.mc_paths));

    if (const json* m = root.find("output")) {
        Section s(*m, "output");
        s.get("directory", c.output.directory);
        s.get("formats", c.output.formats);
        s.finish();
    }
    for (const std::string& f : c.output.formats)
        if (f != "csv" && f != "jsonl" && f != "matrix")
            throw ConfigError("output.formats: unknown format \"" + f + "\" (expected csv, jsonl or matrix)");
    if (c.output.directory.empty())
        throw ConfigError("output.directory: must not be empty");
    root.finish();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open config: " + path.string());
    json doc;
    try {
        doc = json::parse(is, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c)
{
    const ModelParameters& p = c.model;
    const json initial = {{"family", to_string(p.initial.family)},
                          {"a", p.initial.a},
                          {"b", p.initial.b},
                          {"mean", p.initial.mean},
                          {"sd", p.initial.sd}};
    json model = {
        {"drift", coefficient_json(p.families.drift)},
        {"control_cost", coefficient_json(p.families.control_cost)},
        {"state_cost", coefficient_json(p.families.state_cost)},
        {"terminal_cost", coefficient_json(p.families.terminal_cost)},
        {"weight", coefficient_json(p.families.weight)},
        {"sigma", p.sigma},
        {"actions", {p.actions.lo, p.actions.hi}},
        {"horizon", p.horizon},
        {"initial", initial},
        {"threshold", p.threshold},
        {"growth_C", p.growth_C},
        {"lipschitz_L", p.lipschitz_L},
    };
    json grids = {{"K", c.grids.time_steps}, {"J", c.grids.state_cells}, {"dt", c.grids.dt}};
    grids["x_max"] = c.grids.x_max ? json(*c.grids.x_max) : json(nullptr);
    json mfg = {{"schedule", c.mfg.schedule},
                {"damping", c.mfg.damping},
                {"tol", c.mfg.tol},
                {"max_iter", c.mfg.max_iter}};
    mfg["alpha"] = c.mfg.alpha ? json(*c.mfg.alpha) : json(nullptr);
    return {
        {"model", model},
        {"grids", grids},
        {"mfg", mfg},
        {"simulate",
         {{"N", c.simulate.particles},
          {"replications", c.simulate.replications},
          {"bridge", c.simulate.bridge},
          {"store_paths", c.simulate.store_paths},
          {"policy", c.simulate.policy},
          {"constant_action", c.simulate.constant_action}}},
        {"study",
         {{"N_list", c.study.n_list},
          {"alpha_list", c.study.alpha_list},
          {"frozen", c.study.frozen},
          {"pilot_particles", c.study.pilot_particles},
          {"probe_count", c.study.probe_count},
          {"mc_paths", c.study.mc_paths}}},
        {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}},
        {"seed", c.seed},
    };
}

}  // namespace mfgabs::app
