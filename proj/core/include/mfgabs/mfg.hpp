#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfgabs/measures.hpp"
#include "mfgabs/model.hpp"
#include "mfgabs/pde.hpp"
#include "mfgabs/policy.hpp"

namespace mfgabs {

/// Distance between two flows over the whole horizon.
struct FlowResidual {
    double w1_sup = 0.0;        // sup_t conditional W₁
    double mass_gap_sup = 0.0;  // sup_t |mass difference|
    double weighted = 0.0;      // α-weighted L² distance of d_t = W₁ + mass gap
};

/// d_t = conditional W₁ + mass gap at every grid time, combined with the α-weighted metric.
FlowResidual flow_residual(const SubProbFlow& a, const SubProbFlow& b, double alpha);

struct PicardOptions {
    double damping = 0.5;  // θ ∈ (0, 1]
    double tol = 1e-3;
    std::size_t max_iter = 50;
    /// Weight of the contraction metric; defaults to σ⁻²·L²·C_H with the Pinsker constant C_H = 1/√2.
    std::optional<double> alpha;
    /// Advance to the next truncation level when the residual ratio exceeds this.
    double stall_ratio = 0.95;
};

struct FixedPointReport {
    std::size_t iterations = 0;
    std::vector<FlowResidual> residual_history;
    std::vector<double> truncation_level_history;
    bool converged = false;
    /// Iterations whose residual exceeded the tolerance.
    std::size_t effective_iterations = 0;
    double alpha = 0.0;
    FeedbackPolicy final_policy;
    SubProbFlow final_flow;
    ValueField final_value;
    double final_level = 0.0;
};

/// Killed flow of the policy u ≡ clamp_Γ(0) with (l, m) frozen at 0.
SubProbFlow uncontrolled_flow(const ModelSpec& model, const Grid& grid);

/// Damped Picard iteration μ ↦ FP(HJB(μ)) over a truncation schedule.
///
/// Iteration k records ‖Φ(μ_{k−1}) − μ_{k−1}‖ in the α-weighted metric.
/// The first update replaces the initial guess; later updates are damped
/// convex combinations. The level advances when the residual stalls, or
/// when it is below tolerance while the truncation is still active on the
/// grid box. Non-convergence is reported through `converged`, not thrown.
FixedPointReport picard_solve(const ModelSpec& model, const TruncationSchedule& schedule, const Grid& grid,
                              const std::optional<SubProbFlow>& init_flow, const PicardOptions& options);

/// Largest |b̄|, |f̄|, |F|, |w| over the grid box with l ∈ [0,1] and m in [m_lo, m_hi].
double coefficient_range(const ModelSpec& model, const Grid& grid, double m_lo, double m_hi);

struct ConsistencyResidual {
    double w1_terminal = 0.0;  // conditional W₁ at T between particles and flow
    bool w1_defined = true;    // false if the particles went extinct
    double mass_gap_terminal = 0.0;
    double loss_sup_gap = 0.0;  // sup_k |L^N(t_k) − L(t_k; μ)|
};

/// Monte Carlo audit that (ν, u, μ) reproduces μ: simulates N_mc independent
/// players against the frozen flow and compares. Requires N_mc ≥ 1000.
ConsistencyResidual consistency_residual(const ModelSpec& model, const FeedbackPolicy& policy, const SubProbFlow& flow,
                                         std::size_t n_mc, std::uint64_t seed);

struct ExitPositivity {
    bool passed = true;
    std::optional<double> first_failure;  // earliest grid time with zero surviving mass
};

/// Passes iff the survivor mass is positive at every grid time.
ExitPositivity exit_positivity_check(const SubProbFlow& flow);

}  // namespace mfgabs
