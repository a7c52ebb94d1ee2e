#include "mfgabs/model.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "mfgabs/error.hpp"
#include "mfgabs/rng.hpp"

namespace mfgabs {

namespace {

using Params = std::map<std::string, double>;

/// Family defaults; the key set is also the set of accepted parameter names.
struct FamilyInfo {
    Params defaults;
    // Whether the coefficient depends on (l, m) for the given parameters.
    std::function<bool(const Params&)> coupled = [](const Params&) { return false; };
};

bool coupling_terms(const Params& p)
{
    return p.at("kl") != 0.0 || p.at("km") != 0.0;
}

const std::map<std::string, FamilyInfo>& state_families(bool drift)
{
    static const std::map<std::string, FamilyInfo> drifts = {
        {"zero", {{}}},
        {"constant", {{{"c", 0.0}}}},
        {"linear", {{{"a", 0.0}, {"c", 0.0}, {"kl", 0.0}, {"km", 0.0}}, coupling_terms}},
        {"ou", {{{"kappa", 1.0}, {"mean", 0.0}, {"kl", 0.0}, {"km", 0.0}}, coupling_terms}},
        {"tanh", {{{"a", 1.0}, {"scale", 1.0}, {"c", 0.0}, {"kl", 0.0}, {"km", 0.0}}, coupling_terms}},
        {"quadratic", {{{"a", 1.0}}}},
    };
    static const std::map<std::string, FamilyInfo> costs = {
        {"zero", {{}}},
        {"constant", {{{"c", 0.0}}}},
        {"quadratic", {{{"q", 1.0}}}},
        {"linear", {{{"a", 0.0}, {"c", 0.0}, {"kl", 0.0}, {"km", 0.0}}, coupling_terms}},
        {"tanh_mean",
         {{{"c", 1.0}, {"scale", 1.0}, {"kl", 0.0}},
          [](const Params& p) { return p.at("c") != 0.0 || p.at("kl") != 0.0; }}},
    };
    return drift ? drifts : costs;
}

const std::map<std::string, FamilyInfo>& control_families()
{
    static const std::map<std::string, FamilyInfo> f = {
        {"zero", {{}}},
        {"constant", {{{"c", 0.0}}}},
        {"quadratic", {{{"r", 1.0}}}},
    };
    return f;
}

const std::map<std::string, FamilyInfo>& terminal_families()
{
    static const std::map<std::string, FamilyInfo> f = {
        {"zero", {{}}},
        {"constant", {{{"c", 0.0}}}},
        {"linear", {{{"a", 1.0}, {"c", 0.0}}}},
        {"quadratic", {{{"g", 1.0}}}},
        {"exp_penalty", {{{"p", 1.0}, {"scale", 1.0}, {"center", 0.0}}}},
    };
    return f;
}

const std::map<std::string, FamilyInfo>& weight_families()
{
    static const std::map<std::string, FamilyInfo> f = {
        {"identity", {{}}},
        {"zero", {{}}},
        {"constant", {{{"c", 1.0}}}},
        {"linear", {{{"a", 1.0}, {"c", 0.0}}}},
        {"tanh", {{{"scale", 1.0}}}},
    };
    return f;
}

const std::map<std::string, FamilyInfo>& families_for(const std::string& role)
{
    if (role == "drift")
        return state_families(true);
    if (role == "state_cost")
        return state_families(false);
    if (role == "control_cost")
        return control_families();
    if (role == "terminal_cost")
        return terminal_families();
    if (role == "weight")
        return weight_families();
    throw ConfigError("unknown coefficient role: " + role);
}

/// Defaults merged with the user parameters; rejects unknown names.
Params resolve(const std::string& role, const CoefficientSpec& spec, const FamilyInfo** info_out = nullptr)
{
    const auto& table = families_for(role);
    const auto it = table.find(spec.family);
    if (it == table.end())
        throw ConfigError(role + ": unknown family '" + spec.family + "'");
    Params p = it->second.defaults;
    for (const auto& [key, value] : spec.params) {
        if (!p.contains(key))
            throw ConfigError(role + "." + spec.family + ": unknown parameter '" + key + "'");
        if (!std::isfinite(value))
            throw ConfigError(role + "." + spec.family + ": parameter '" + key + "' is not finite");
        p[key] = value;
    }
    if (info_out)
        *info_out = &it->second;
    return p;
}

ModelSpec::StateFn build_state(const std::string& role, const CoefficientSpec& spec)
{
    const Params p = resolve(role, spec);
    const std::string& f = spec.family;
    if (f == "zero")
        return [](double, double, double, double) { return 0.0; };
    if (f == "constant")
        return [c = p.at("c")](double, double, double, double) { return c; };
    if (f == "linear")
        return [a = p.at("a"), c = p.at("c"), kl = p.at("kl"), km = p.at("km")](double, double x, double l, double m) {
            return a * x + c + kl * l + km * m;
        };
    if (f == "ou")
        return [k = p.at("kappa"), mu = p.at("mean"), kl = p.at("kl"), km = p.at("km")](double, double x, double l,
                                                                                          double m) {
            return k * (mu - x) + kl * l + km * m;
        };
    if (f == "tanh")
        return [a = p.at("a"), s = p.at("scale"), c = p.at("c"), kl = p.at("kl"), km = p.at("km")](
                   double, double x, double l, double m) { return a * std::tanh(x / s) + c + kl * l + km * m; };
    if (f == "quadratic") {
        if (role == "drift")
            return [a = p.at("a")](double, double x, double, double) { return a * x * x; };
        return [q = p.at("q")](double, double x, double, double) { return q * x * x; };
    }
    if (f == "tanh_mean")
        return [c = p.at("c"), s = p.at("scale"), kl = p.at("kl")](double, double, double l, double m) {
            return c * (1.0 - std::tanh(m / s)) + kl * l;
        };
    throw ConfigError(role + ": unhandled family '" + f + "'");
}

ModelSpec::ControlFn build_control(const CoefficientSpec& spec)
{
    const Params p = resolve("control_cost", spec);
    if (spec.family == "zero")
        return [](double, double, double) { return 0.0; };
    if (spec.family == "constant")
        return [c = p.at("c")](double, double, double) { return c; };
    return [r = p.at("r")](double, double, double u) { return r * u * u; };
}

ModelSpec::TerminalFn build_terminal(const CoefficientSpec& spec)
{
    const Params p = resolve("terminal_cost", spec);
    const std::string& f = spec.family;
    if (f == "zero")
        return [](double, double) { return 0.0; };
    if (f == "constant")
        return [c = p.at("c")](double, double) { return c; };
    if (f == "linear")
        return [a = p.at("a"), c = p.at("c")](double, double x) { return a * x + c; };
    if (f == "quadratic")
        return [g = p.at("g")](double, double x) { return g * x * x; };
    return [pen = p.at("p"), s = p.at("scale"), x0 = p.at("center")](double, double x) {
        return pen * std::exp(-(x - x0) / s);
    };
}

ModelSpec::WeightFn build_weight(const CoefficientSpec& spec)
{
    const Params p = resolve("weight", spec);
    const std::string& f = spec.family;
    if (f == "identity")
        return [](double x) { return x; };
    if (f == "zero")
        return [](double) { return 0.0; };
    if (f == "constant")
        return [c = p.at("c")](double) { return c; };
    if (f == "linear")
        return [a = p.at("a"), c = p.at("c")](double x) { return a * x + c; };
    return [s = p.at("scale")](double x) { return std::tanh(x / s); };
}

inline double clamp_magnitude(double v, double level) noexcept
{
    return std::abs(v) <= level ? v : std::copysign(level, v);
}

void validate_law(const InitialLaw& law, double threshold)
{
    using F = InitialLaw::Family;
    const auto fail = [](const std::string& msg) { throw ConfigError("initial law: " + msg); };
    if (!std::isfinite(law.a) || !std::isfinite(law.b))
        fail("support bounds must be finite");
    switch (law.family) {
    case F::point_mass:
        break;
    case F::uniform:
        if (!(law.a < law.b))
            fail("uniform law needs lower < upper");
        break;
    case F::truncated_gaussian:
        if (!(law.sd > 0.0) || !std::isfinite(law.mean))
            fail("truncated Gaussian needs sd > 0");
        if (!(law.a < law.b))
            fail("truncated Gaussian needs lower < upper");
        break;
    }
    if (!(law.a > threshold)) {
        std::ostringstream os;
        os << "mass at or below the absorbing threshold " << threshold << " (support starts at " << law.a << ")";
        fail(os.str());
    }
}

}  // namespace

InitialLaw InitialLaw::point_mass(double x)
{
    return {Family::point_mass, x, x, x, 1.0};
}

InitialLaw InitialLaw::uniform(double lower, double upper)
{
    return {Family::uniform, lower, upper, 0.5 * (lower + upper), 1.0};
}

InitialLaw InitialLaw::truncated_gaussian(double mean, double sd, double lower, double upper)
{
    return {Family::truncated_gaussian, lower, upper, mean, sd};
}

std::string to_string(InitialLaw::Family family)
{
    switch (family) {
    case InitialLaw::Family::point_mass:
        return "point_mass";
    case InitialLaw::Family::uniform:
        return "uniform";
    case InitialLaw::Family::truncated_gaussian:
        return "truncated_gaussian";
    }
    return "?";
}

InitialLaw::Family law_family_from_string(const std::string& name)
{
    if (name == "point_mass")
        return InitialLaw::Family::point_mass;
    if (name == "uniform")
        return InitialLaw::Family::uniform;
    if (name == "truncated_gaussian")
        return InitialLaw::Family::truncated_gaussian;
    throw ConfigError("initial law: unknown family '" + name + "'");
}

ModelSpec::ModelSpec(ModelParameters params) : params_(std::move(params))
{
    if (!(params_.sigma > 0.0) || !std::isfinite(params_.sigma))
        throw ConfigError("model: sigma must be positive");
    if (!(params_.actions.lo < params_.actions.hi))
        throw ConfigError("model: action set needs u_min < u_max");
    if (!(params_.horizon > 0.0) || !std::isfinite(params_.horizon))
        throw ConfigError("model: horizon must be positive");
    if (!std::isfinite(params_.threshold))
        throw ConfigError("model: threshold must be finite");
    if (!(params_.growth_C > 0.0) || !(params_.lipschitz_L > 0.0))
        throw ConfigError("model: growth_C and lipschitz_L must be positive");
    validate_law(params_.initial, params_.threshold);

    const auto& fam = params_.families;
    drift_ = build_state("drift", fam.drift);
    control_cost_ = build_control(fam.control_cost);
    state_cost_ = build_state("state_cost", fam.state_cost);
    terminal_ = build_terminal(fam.terminal_cost);
    weight_ = build_weight(fam.weight);
}

bool ModelSpec::is_decoupled() const noexcept
{
    const auto coupled = [](const std::string& role, const CoefficientSpec& spec) {
        const FamilyInfo* info = nullptr;
        const Params p = resolve(role, spec, &info);
        return info->coupled(p);
    };
    return !coupled("drift", params_.families.drift) && !coupled("state_cost", params_.families.state_cost);
}

CoefficientValues eval_coefficients(const ModelSpec& model, double t, double x, double l, double m, double u)
{
    if (!(t >= 0.0 && t <= model.horizon()))
        throw DomainError("eval_coefficients: t outside [0, T]");
    if (!(l >= 0.0 && l <= 1.0))
        throw DomainError("eval_coefficients: loss outside [0, 1]");
    if (!model.actions().contains(u))
        throw DomainError("eval_coefficients: action outside the action set");
    return {u + model.drift(t, x, l, m), model.control_cost(t, x, u) + model.state_cost(t, x, l, m)};
}

ModelSpec truncate_model(const ModelSpec& model, double level)
{
    if (!(level > 0.0) || std::isnan(level))
        throw DomainError("truncate_model: level must be positive");
    ModelSpec out = model;
    out.level_ = model.level_ ? std::min(*model.level_, level) : level;
    out.drift_ = [f = model.drift_, level](double t, double x, double l, double m) {
        return clamp_magnitude(f(t, x, l, m), level);
    };
    out.state_cost_ = [f = model.state_cost_, level](double t, double x, double l, double m) {
        return clamp_magnitude(f(t, x, l, m), level);
    };
    out.terminal_ = [f = model.terminal_, level](double t, double x) { return clamp_magnitude(f(t, x), level); };
    out.weight_ = [f = model.weight_, level](double x) { return clamp_magnitude(f(x), level); };
    return out;
}

TruncationSchedule::TruncationSchedule(std::vector<double> levels) : levels_(std::move(levels))
{
    if (levels_.empty())
        throw ConfigError("truncation schedule: empty");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (!(levels_[i] > 0.0))
            throw ConfigError("truncation schedule: levels must be positive");
        if (i > 0 && !(levels_[i] > levels_[i - 1]))
            throw ConfigError("truncation schedule: levels must be strictly increasing");
    }
}

TruncationSchedule TruncationSchedule::geometric(double first, std::size_t count)
{
    std::vector<double> levels(count);
    for (std::size_t n = 0; n < count; ++n)
        levels[n] = std::ldexp(first, static_cast<int>(n));
    return TruncationSchedule(std::move(levels));
}

bool AssumptionReport::all_passed() const noexcept
{
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck& AssumptionReport::find(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name)
            return c;
    throw std::out_of_range("no assumption check named " + name);
}

AssumptionReport check_assumptions(const ModelSpec& model, std::size_t probe_count, std::uint64_t seed,
                                   const ProbeBox& box)
{
    if (probe_count < 100)
        throw DomainError("check_assumptions: probe_count must be at least 100");

    const StreamRng rng(seed);
    constexpr std::size_t kDims = 4;  // t, x, l, m
    // Latin hypercube: one random permutation of the strata per dimension.
    std::array<std::vector<std::size_t>, kDims> strata;
    for (std::size_t d = 0; d < kDims; ++d) {
        auto& perm = strata[d];
        perm.resize(probe_count);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = probe_count - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform(d, i, StreamTag::probe) * static_cast<double>(i + 1));
            std::swap(perm[i], perm[std::min(j, i)]);
        }
    }
    const auto coord = [&](std::size_t d, std::size_t i, double lo, double hi) {
        const double u = (static_cast<double>(strata[d][i]) + rng.uniform(kDims + d, i, StreamTag::probe)) /
                         static_cast<double>(probe_count);
        return lo + (hi - lo) * u;
    };

    const double C = model.parameters().growth_C;
    const double L = model.parameters().lipschitz_L;
    const double T = model.horizon();
    const auto& G = model.actions();

    double drift_growth = 0, cost_growth = 0, terminal_growth = 0, weight_growth = 0;
    double drift_lip = 0, cost_lip = 0, terminal_lip = 0, weight_lip = 0, control_bound = 0;
    double control_max = 0.0;
    constexpr double kStep = 1e-3;

    // Only the closure of O is ever visited by a stopped state.
    const double x_lo = std::max(box.x_lo, model.threshold());
    const double x_hi = std::max(box.x_hi, x_lo + 1.0);
    for (std::size_t i = 0; i < probe_count; ++i) {
        const double t = coord(0, i, 0.0, T);
        const double x = coord(1, i, x_lo, x_hi);
        const double l = coord(2, i, 0.0, 1.0);
        const double m = coord(3, i, box.m_lo, box.m_hi);
        const double lin = C * (1.0 + std::abs(x) + std::abs(m));
        const double lin_x = C * (1.0 + std::abs(x));

        const double b = model.drift(t, x, l, m);
        const double fb = model.state_cost(t, x, l, m);
        const double F = model.terminal_cost(t, x);
        const double w = model.weight(x);
        drift_growth = std::max(drift_growth, std::abs(b) / lin);
        cost_growth = std::max(cost_growth, std::abs(fb) / lin);
        terminal_growth = std::max(terminal_growth, std::abs(F) / lin_x);
        weight_growth = std::max(weight_growth, std::abs(w) / lin_x);

        // Perturbation direction from the probe stream, scaled to a small step.
        const double dx = kStep * (2.0 * rng.uniform(2 * kDims, i, StreamTag::probe) - 1.0);
        const double dl_raw = kStep * (2.0 * rng.uniform(2 * kDims + 1, i, StreamTag::probe) - 1.0);
        const double dm = kStep * (2.0 * rng.uniform(2 * kDims + 2, i, StreamTag::probe) - 1.0);
        const double l2 = std::clamp(l + dl_raw, 0.0, 1.0);
        const double dist = std::abs(dx) + std::abs(l2 - l) + std::abs(dm);
        if (dist > 0.0) {
            drift_lip = std::max(drift_lip, std::abs(model.drift(t, x + dx, l2, m + dm) - b) / (L * dist));
            cost_lip = std::max(cost_lip, std::abs(model.state_cost(t, x + dx, l2, m + dm) - fb) / (L * dist));
        }
        if (dx != 0.0) {
            terminal_lip = std::max(terminal_lip, std::abs(model.terminal_cost(t, x + dx) - F) / (L * std::abs(dx)));
            weight_lip = std::max(weight_lip, std::abs(model.weight(x + dx) - w) / (L * std::abs(dx)));
        }
        const double u = G.lo + (G.hi - G.lo) * rng.uniform(2 * kDims + 3, i, StreamTag::probe);
        const double f0 = model.control_cost(t, x, u);
        control_max = std::max(control_max, std::abs(f0));
        control_bound = std::max(control_bound, f0 < 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    }

    constexpr double kLipSlack = 1.05;
    AssumptionReport report;
    report.region = box;
    report.probe_count = probe_count;
    const auto add = [&](std::string name, std::string anchor, double ratio, double limit) {
        report.checks.push_back({std::move(name), std::move(anchor), ratio, ratio <= limit});
    };
    add("drift growth", "sub-linear drift: |b(t,x,l,m)| <= C(1+|x|+|m|)", drift_growth, 1.0);
    add("state cost growth", "sub-linear running cost: |f(t,x,l,m)| <= C(1+|x|+|m|)", cost_growth, 1.0);
    add("terminal cost growth", "sub-linear terminal cost: |F(t,x)| <= C(1+|x|)", terminal_growth, 1.0);
    add("weight growth", "sub-linear weight: |w(x)| <= C(1+|x|)", weight_growth, 1.0);
    add("drift lipschitz", "drift Lipschitz in (x, l, m)", drift_lip, kLipSlack);
    add("state cost lipschitz", "running cost Lipschitz in (x, l, m)", cost_lip, kLipSlack);
    add("terminal cost lipschitz", "terminal cost Lipschitz in x", terminal_lip, kLipSlack);
    add("weight lipschitz", "weight Lipschitz in x", weight_lip, kLipSlack);
    add("control cost nonnegative", "f0 >= 0 and bounded on the action set", control_bound, 0.0);
    // Structural invariants are enforced at construction; listed for the report.
    add("diffusion full rank", "sigma > 0", 0.0, 0.0);
    add("action set compact convex", "u_min < u_max", 0.0, 0.0);
    add("initial law inside domain", "supp(nu) inside O", 0.0, 0.0);
    return report;
}

std::vector<double> sample_initial(const ModelSpec& model, std::size_t count, std::uint64_t seed)
{
    if (count == 0)
        throw DomainError("sample_initial: count must be at least 1");
    const InitialLaw& law = model.initial_law();
    std::vector<double> out(count);
    const StreamRng rng(seed);
    switch (law.family) {
    case InitialLaw::Family::point_mass:
        std::fill(out.begin(), out.end(), law.a);
        break;
    case InitialLaw::Family::uniform:
        for (std::size_t i = 0; i < count; ++i)
            out[i] = law.a + (law.b - law.a) * rng.uniform(i, 0, StreamTag::initial);
        break;
    case InitialLaw::Family::truncated_gaussian: {
        const boost::math::normal_distribution<double> phi(law.mean, law.sd);
        const double lo = boost::math::cdf(phi, law.a);
        const double hi = boost::math::cdf(phi, law.b);
        if (!(hi > lo))
            throw ConfigError("initial law: truncated Gaussian has no mass on its support");
        for (std::size_t i = 0; i < count; ++i) {
            double p = lo + (hi - lo) * rng.uniform(i, 0, StreamTag::initial);
            p = std::clamp(p, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
            out[i] = std::clamp(boost::math::quantile(phi, p), law.a, law.b);
        }
        break;
    }
    }
    return out;
}

std::vector<std::string> catalog_families(const std::string& role)
{
    std::vector<std::string> names;
    for (const auto& [name, info] : families_for(role))
        names.push_back(name);
    return names;
}

}  // namespace mfgabs
