#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mfgabs/grid.hpp"
#include "mfgabs/measures.hpp"
#include "mfgabs/model.hpp"
#include "mfgabs/policy.hpp"

namespace mfgabs {

/// Pointwise minimum of the Hamiltonian h(u) = f(t,x,l,m,u) + z·σ⁻¹·(u + b̄(t,x,l,m)) over Γ.
struct HamiltonianMin {
    double u_star;
    double h_min;
    double interval_lo;  // minimizer set [interval_lo, interval_hi] (convex under convex f₀)
    double interval_hi;
};

/// Coarse scan of Γ followed by golden-section refinement around the best
/// coarse point. A flat minimizer set resolves to its midpoint.
HamiltonianMin minimize_hamiltonian(const ModelSpec& model, double t, double x, double l, double m, double z);

/// V(t_k, x_j) and its state derivative on the solver grid.
struct ValueField {
    Grid grid;
    std::vector<double> values;
    std::vector<double> slope;  // ∂ₓV: central differences, one-sided at the edges

    double value(std::size_t k, std::size_t j) const { return values[k * grid.state_points() + j]; }
    double dvdx(std::size_t k, std::size_t j) const { return slope[k * grid.state_points() + j]; }
};

struct HjbOptions {
    /// The mean-field input at state x is m_t + own_weight·w(x). Zero for the
    /// representative player; 1/N for a player who accounts for their own
    /// contribution to m^N.
    double own_weight = 0.0;
};

struct HjbSolution {
    ValueField value;
    FeedbackPolicy policy;
};

/// Backward IMEX finite differences for
///   −∂ₜV = ½σ²∂ₓₓV + min_u { f + b·∂ₓV },
/// V(T,·) = F(T,·), V(t, threshold) = F(t, threshold), zero curvature at x_hi.
/// Diffusion is implicit; the optimised advection is explicit, with central
/// differences where the cell Péclet number |b|dx/σ² ≤ 1 and upwind otherwise. The flow supplies (L, m) at each grid time.
/// Throws SolverError when the iterate oscillates beyond 10× the cost scale.
HjbSolution solve_hjb(const ModelSpec& model, const SubProbFlow& flow, const Grid& grid, const HjbOptions& options = {});

/// Node densities of the initial law projected onto the grid (mass preserving).
std::vector<double> project_initial_law(const ModelSpec& model, const Grid& grid);

struct FpOptions {
    /// When set, (L_k, m_k) are read from this flow instead of the flow under
    /// construction (the representative player against a frozen population).
    const SubProbFlow* frozen_inputs = nullptr;
};

/// Forward finite-volume solve of the killed Fokker–Planck equation under the
/// policy: implicit diffusion, explicit upwind advection with the total drift
/// u + b̄(t, x, L_k, m_k), where (L_k, m_k) come from the flow built so far.
/// Absorbed flux is accumulated in boundary_loss. Throws SolverError on
/// negative density below −10⁻¹² or a mass-balance error above 10⁻⁶.
SubProbFlow solve_killed_fp(const ModelSpec& model, const FeedbackPolicy& policy, const Grid& grid,
                            const FpOptions& options = {});

/// Default solver grid: [threshold, sup supp(ν) + 6σ√T], or the given x_hi.
Grid default_grid(const ModelSpec& model, std::size_t time_steps, std::size_t state_cells,
                  std::optional<double> x_hi = std::nullopt);

}  // namespace mfgabs
