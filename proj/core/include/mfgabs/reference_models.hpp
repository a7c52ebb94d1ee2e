#pragma once

#include <string>
#include <vector>

#include "mfgabs/model.hpp"

namespace mfgabs {

/// Ready-made parameter sets with known behaviour, used by the validation
/// suite, the tests and as configuration presets.

/// Uncontrolled Brownian motion from x₀ = 1 killed at 0 (σ = 1, T = 1, all costs zero).
ModelParameters brownian_benchmark();

/// Constant drift and state-independent costs: b̄ and f̄ ignore (L, m).
ModelParameters decoupled_benchmark();

/// Mild loss/mean feedback in the drift and a strongly mean-dependent
/// running cost, so that a single player's share of m^N matters at small N.
ModelParameters weakly_coupled_benchmark();

struct LqCoefficients {
    double a = -0.5;  // b̄ = a·x
    double r = 1.0;   // f₀ = r·u²
    double q = 1.0;   // f̄ = q·x²
    double g = 1.0;   // F = g·x²
    double sigma = 1.0;
    double horizon = 1.0;
};

/// Linear-quadratic control problem with Γ and the threshold far enough
/// away that neither binds on |x| ≤ 2. V = P(t)x² + s(t) with
/// −P' = q + 2aP − P²/r, P(T) = g and −s' = σ²P, s(T) = 0.
ModelParameters lq_benchmark(const LqCoefficients& c = {});

/// f₀ = u², F(x) = x, no drift, far threshold: V(t, x) = x − (T − t)/4, u* ≡ −1/2.
ModelParameters linear_terminal_benchmark();

/// Lookup by name: "brownian", "decoupled", "weakly_coupled", "lq", "linear_terminal".
ModelParameters reference_parameters(const std::string& name);
std::vector<std::string> reference_names();

}  // namespace mfgabs
