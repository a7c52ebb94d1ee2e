#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfgabs/measures.hpp"
#include "mfgabs/mfg.hpp"
#include "mfgabs/model.hpp"
#include "mfgabs/particle.hpp"
#include "mfgabs/policy.hpp"

namespace mfgabs {

struct CostEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::vector<double> samples;  // one realised cost per replication, in replication order
};

/// Replication r runs simulate_nplayer with seed mix_seed(sim.seed, r) and
/// records the given player's path cost. Requires replications ≥ 2.
CostEstimate estimate_cost(const ModelSpec& model, const PolicyProfile& policies, std::size_t player,
                           const SimConfig& sim, std::size_t replications);

struct NashGapRow {
    std::size_t N = 0;
    double j_eq = 0.0;
    double j_eq_se = 0.0;
    double j_dev = 0.0;
    double j_dev_se = 0.0;
    double gap = 0.0;     // J_eq − J_dev, signed
    double gap_se = 0.0;  // from paired (common random number) differences
};

struct NashGapOptions {
    double dt = 1e-2;
    bool bridge_correction = true;
    /// Total particle count of the pilot run that estimates the co-players' mean flow.
    std::size_t pilot_particles = 100000;
    /// Let the deviator account for its own w(x)/N share of m^N.
    bool own_share = true;
};

/// ε̂(N) for a converged MFG solution. The deviation is the grid best
/// response to the pilot-estimated (L, m) of the N−1 co-players, with the
/// deviator's own w(x)/N contribution to m^N included. J_eq and J_dev share
/// every replication seed.
NashGapRow nash_gap(const ModelSpec& model, const FixedPointReport& mfg, std::size_t N, std::size_t replications,
                    const Grid& hjb_grid, std::uint64_t seed, const NashGapOptions& options = {});

struct ChaosRow {
    std::size_t N = 0;
    std::size_t replications = 0;
    double w1_mean = 0.0;
    double w1_se = 0.0;
    double mass_gap_mean = 0.0;
    double loss_sup_gap_mean = 0.0;
    std::size_t extinct = 0;  // replications with no survivors (W₁ undefined)
};

using ChaosTable = std::vector<ChaosRow>;

struct ChaosOptions {
    double dt = 1e-2;
    bool bridge_correction = true;
    /// Drive the particles by θ*'s traces instead of their own empirical
    /// (L, m): the i.i.d. baseline.
    bool frozen = false;
};

/// For each N and replication, compares the survivor-conditioned empirical
/// law at T with θ*'s conditional law at T. N_list must be strictly increasing.
ChaosTable chaos_study(const ModelSpec& model, const FeedbackPolicy& policy, const SubProbFlow& theta_star,
                       std::span<const std::size_t> n_list, std::size_t replications, std::uint64_t seed,
                       const ChaosOptions& options = {});

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares of log w1_mean on log N. Requires at least 3 rows.
RateFit fit_rate(const ChaosTable& table);

struct MartingaleEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t overflowed = 0;  // paths with |log Z| > 300, excluded from the mean
};

/// Sample mean of the stochastic exponential Z_T of ∫σ⁻¹(u + b̄) dW along
/// driftless paths X = ξ + σW, accumulated in log form. (L, m) come from the
/// flow. Requires N_paths ≥ 1000.
MartingaleEstimate martingale_check(const ModelSpec& model, const FeedbackPolicy& policy, const SubProbFlow& flow,
                                    std::size_t n_paths, std::uint64_t seed, double dt);

struct MomentEstimate {
    double level = 0.0;
    int alpha = 1;
    double mean = 0.0;  // E[sup_t |X_t|^α] over the stopped paths
    double se = 0.0;
};

struct MomentReport {
    std::vector<MomentEstimate> estimates;  // level-major, α-minor
    double max_over_levels(int alpha) const;
    double relative_spread(int alpha, double min_level) const;
};

/// N-player simulations of each truncated model with one shared seed.
/// alpha_list ⊂ {1, 2, 4}.
MomentReport moment_check(const ModelSpec& model, const TruncationSchedule& schedule, std::span<const int> alpha_list,
                          const FeedbackPolicy& policy, std::size_t n_paths, std::uint64_t seed, double dt);

}  // namespace mfgabs
