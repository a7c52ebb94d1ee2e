#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mfgabs {

/// A named parametric family from the coefficient catalog, e.g.
/// {"linear", {{"a", -1.0}, {"km", 0.1}}}. Unlisted parameters take the
/// family defaults; unknown parameter names are rejected.
struct CoefficientSpec {
    std::string family = "zero";
    std::map<std::string, double> params;

    bool operator==(const CoefficientSpec&) const = default;
};

/// Sub-Gaussian initial laws. `a`/`b` are the location or support bounds;
/// `mean`/`sd` are used by the truncated Gaussian only.
struct InitialLaw {
    enum class Family { point_mass, uniform, truncated_gaussian };

    Family family = Family::point_mass;
    double a = 1.0;  // point location, or lower support bound
    double b = 1.0;  // upper support bound (uniform, truncated Gaussian)
    double mean = 1.0;
    double sd = 1.0;

    static InitialLaw point_mass(double x);
    static InitialLaw uniform(double lower, double upper);
    static InitialLaw truncated_gaussian(double mean, double sd, double lower, double upper);

    double lower() const noexcept { return a; }
    /// Essential supremum of the support (finite for every catalog law).
    double upper() const noexcept { return family == Family::point_mass ? a : b; }

    bool operator==(const InitialLaw&) const = default;
};

std::string to_string(InitialLaw::Family family);
InitialLaw::Family law_family_from_string(const std::string& name);

struct ActionSet {
    double lo = -1.0;
    double hi = 1.0;

    bool contains(double u) const noexcept { return u >= lo && u <= hi; }
    double clamp(double u) const noexcept { return u < lo ? lo : (u > hi ? hi : u); }
    double midpoint() const noexcept { return 0.5 * (lo + hi); }

    bool operator==(const ActionSet&) const = default;
};

/// The catalog selection for every coefficient of the game.
struct CoefficientFamilies {
    CoefficientSpec drift{"zero", {}};         // b̄(t, x, l, m)
    CoefficientSpec control_cost{"zero", {}};  // f₀(t, x, u)
    CoefficientSpec state_cost{"zero", {}};    // f̄(t, x, l, m)
    CoefficientSpec terminal_cost{"zero", {}}; // F(t, x)
    CoefficientSpec weight{"identity", {}};    // w(x)

    bool operator==(const CoefficientFamilies&) const = default;
};

struct ModelParameters {
    CoefficientFamilies families;
    double sigma = 1.0;
    ActionSet actions;
    double horizon = 1.0;
    InitialLaw initial;
    double threshold = 0.0;  // O = (threshold, ∞)
    double growth_C = 1.0;
    double lipschitz_L = 1.0;

    bool operator==(const ModelParameters&) const = default;
};

/// All coefficients of the absorbed game. Immutable after construction and
/// safe to share across threads.
class ModelSpec {
public:
    using StateFn = std::function<double(double t, double x, double l, double m)>;
    using ControlFn = std::function<double(double t, double x, double u)>;
    using TerminalFn = std::function<double(double t, double x)>;
    using WeightFn = std::function<double(double x)>;

    /// Builds the coefficient functions from the catalog. Throws ConfigError
    /// on unknown families/parameters or violated standing invariants
    /// (σ ≤ 0, empty Γ, initial mass at or below the threshold).
    explicit ModelSpec(ModelParameters params);

    const ModelParameters& parameters() const noexcept { return params_; }
    double sigma() const noexcept { return params_.sigma; }
    const ActionSet& actions() const noexcept { return params_.actions; }
    double horizon() const noexcept { return params_.horizon; }
    double threshold() const noexcept { return params_.threshold; }
    const InitialLaw& initial_law() const noexcept { return params_.initial; }

    /// Truncation level applied to w, b̄, f̄ and F, if any.
    std::optional<double> truncation_level() const noexcept { return level_; }

    double drift(double t, double x, double l, double m) const { return drift_(t, x, l, m); }
    double control_cost(double t, double x, double u) const { return control_cost_(t, x, u); }
    double state_cost(double t, double x, double l, double m) const { return state_cost_(t, x, l, m); }
    double terminal_cost(double t, double x) const { return terminal_(t, x); }
    double weight(double x) const { return weight_(x); }

    /// True when b̄ and f̄ ignore (l, m): the game decouples from the flow.
    bool is_decoupled() const noexcept;

private:
    friend ModelSpec truncate_model(const ModelSpec&, double);

    ModelParameters params_;
    std::optional<double> level_;
    StateFn drift_;
    ControlFn control_cost_;
    StateFn state_cost_;
    TerminalFn terminal_;
    WeightFn weight_;
};

struct CoefficientValues {
    double drift_total;
    double running_cost;
};

/// b = u + b̄(t,x,l,m) and f = f₀(t,x,u) + f̄(t,x,l,m). Throws DomainError
/// when t ∉ [0,T], l ∉ [0,1] or u ∉ Γ.
CoefficientValues eval_coefficients(const ModelSpec& model, double t, double x, double l, double m, double u);

/// Magnitude clamp v ↦ sign(v)·min(|v|, level) applied to w, b̄, f̄ and F.
/// σ, Γ, ν, T and the domain are unchanged. Throws DomainError if level ≤ 0.
ModelSpec truncate_model(const ModelSpec& model, double level);

/// Strictly increasing positive truncation levels K_1 < K_2 < ….
class TruncationSchedule {
public:
    explicit TruncationSchedule(std::vector<double> levels);

    /// K_n = 2ⁿ⁻¹·K₁ for n = 1..count.
    static TruncationSchedule geometric(double first, std::size_t count);

    const std::vector<double>& levels() const noexcept { return levels_; }
    std::size_t size() const noexcept { return levels_.size(); }
    double operator[](std::size_t n) const { return levels_.at(n); }

private:
    std::vector<double> levels_;
};

/// Compact region on which the global growth/Lipschitz assumptions are
/// probed. The state range is intersected with [threshold, ∞).
struct ProbeBox {
    double x_lo = -50.0;
    double x_hi = 50.0;
    double m_lo = -50.0;
    double m_hi = 50.0;
};

struct AssumptionCheck {
    std::string name;
    std::string anchor;
    double worst_ratio = 0.0;  // max observed |g| / bound; must be ≤ 1 (1.05 for Lipschitz)
    bool passed = true;
};

struct AssumptionReport {
    ProbeBox region;
    std::size_t probe_count = 0;
    std::vector<AssumptionCheck> checks;

    bool all_passed() const noexcept;
    const AssumptionCheck& find(const std::string& name) const;
};

/// Latin-hypercube probes of the sub-linear growth bounds against growth_C
/// and of finite-difference Lipschitz ratios against lipschitz_L (5% slack).
/// Violations are reported, never thrown. Requires probe_count ≥ 100.
AssumptionReport check_assumptions(const ModelSpec& model, std::size_t probe_count, std::uint64_t seed,
                                   const ProbeBox& box = {});

/// i.i.d. draws from ν; identical seeds give identical draws.
std::vector<double> sample_initial(const ModelSpec& model, std::size_t count, std::uint64_t seed);

/// Names accepted by each coefficient role, for diagnostics and config validation.
std::vector<std::string> catalog_families(const std::string& role);

}  // namespace mfgabs
