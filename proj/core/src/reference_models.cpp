#include "mfgabs/reference_models.hpp"

#include "mfgabs/error.hpp"

namespace mfgabs {

ModelParameters brownian_benchmark()
{
    ModelParameters p;
    p.families.drift = {"zero", {}};
    p.families.control_cost = {"zero", {}};
    p.families.state_cost = {"zero", {}};
    p.families.terminal_cost = {"zero", {}};
    p.families.weight = {"identity", {}};
    p.sigma = 1.0;
    p.actions = {-1.0, 1.0};
    p.horizon = 1.0;
    p.initial = InitialLaw::point_mass(1.0);
    p.threshold = 0.0;
    return p;
}

ModelParameters decoupled_benchmark()
{
    ModelParameters p;
    p.families.drift = {"constant", {{"c", 0.2}}};
    p.families.control_cost = {"quadratic", {{"r", 0.5}}};
    p.families.state_cost = {"constant", {{"c", 0.5}}};
    p.families.terminal_cost = {"exp_penalty", {{"p", 1.0}, {"scale", 1.0}}};
    p.families.weight = {"identity", {}};
    p.sigma = 1.0;
    p.actions = {-1.0, 1.0};
    p.horizon = 1.0;
    p.initial = InitialLaw::uniform(0.5, 1.5);
    p.threshold = 0.0;
    p.growth_C = 1.0;
    p.lipschitz_L = 1.0;
    return p;
}

ModelParameters weakly_coupled_benchmark()
{
    ModelParameters p;
    p.families.drift = {"linear", {{"km", 0.1}, {"kl", -0.1}}};
    p.families.control_cost = {"quadratic", {{"r", 0.5}}};
    p.families.state_cost = {"tanh_mean", {{"c", 10.0}, {"scale", 0.3}}};
    p.families.terminal_cost = {"exp_penalty", {{"p", 1.0}, {"scale", 1.0}, {"center", 1.5}}};
    p.families.weight = {"linear", {{"a", 1.0}, {"c", -1.5}}};
    p.sigma = 0.7;
    p.actions = {-1.0, 1.0};
    p.horizon = 1.0;
    p.initial = InitialLaw::uniform(1.0, 2.0);
    p.threshold = 0.0;
    p.growth_C = 20.0;
    p.lipschitz_L = 34.0;
    return p;
}

ModelParameters lq_benchmark(const LqCoefficients& c)
{
    ModelParameters p;
    p.families.drift = {"linear", {{"a", c.a}}};
    p.families.control_cost = {"quadratic", {{"r", c.r}}};
    p.families.state_cost = {"quadratic", {{"q", c.q}}};
    p.families.terminal_cost = {"quadratic", {{"g", c.g}}};
    p.families.weight = {"zero", {}};
    p.sigma = c.sigma;
    p.actions = {-40.0, 40.0};
    p.horizon = c.horizon;
    p.initial = InitialLaw::point_mass(0.0);
    p.threshold = -6.0;
    p.growth_C = 40.0;
    p.lipschitz_L = 40.0;
    return p;
}

ModelParameters linear_terminal_benchmark()
{
    ModelParameters p;
    p.families.drift = {"zero", {}};
    p.families.control_cost = {"quadratic", {{"r", 1.0}}};
    p.families.state_cost = {"zero", {}};
    p.families.terminal_cost = {"linear", {{"a", 1.0}, {"c", 0.0}}};
    p.families.weight = {"zero", {}};
    p.sigma = 1.0;
    p.actions = {-2.0, 2.0};
    p.horizon = 1.0;
    p.initial = InitialLaw::point_mass(0.0);
    p.threshold = -8.0;
    p.growth_C = 1.0;
    p.lipschitz_L = 1.0;
    return p;
}

ModelParameters reference_parameters(const std::string& name)
{
    if (name == "brownian")
        return brownian_benchmark();
    if (name == "decoupled")
        return decoupled_benchmark();
    if (name == "weakly_coupled")
        return weakly_coupled_benchmark();
    if (name == "lq")
        return lq_benchmark();
    if (name == "linear_terminal")
        return linear_terminal_benchmark();
    throw ConfigError("unknown reference model: " + name);
}

std::vector<std::string> reference_names()
{
    return {"brownian", "decoupled", "linear_terminal", "lq", "weakly_coupled"};
}

}  // namespace mfgabs
