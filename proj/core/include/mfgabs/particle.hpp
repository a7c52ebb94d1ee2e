#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfgabs/measures.hpp"
#include "mfgabs/model.hpp"
#include "mfgabs/policy.hpp"

namespace mfgabs {

struct SimConfig {
    std::size_t particles = 1000;  // N
    double dt = 1e-2;
    std::uint64_t seed = 0;
    bool bridge_correction = true;
    bool store_full_paths = false;

    /// Throws ConfigError unless N ≥ 1, dt > 0 and T/dt is an integer.
    std::size_t steps(double horizon) const;
};

/// Live state of N players between steps.
struct ParticleEnsemble {
    std::vector<double> positions;
    std::vector<std::uint8_t> alive;
    std::vector<double> tau;
    std::vector<std::uint64_t> streams;  // counter-based stream id per player
    std::size_t step_index = 0;

    /// All players alive at the given starting positions, streams 0..N−1.
    static ParticleEnsemble start(std::vector<double> initial);
    std::size_t size() const noexcept { return positions.size(); }
};

/// Player-indexed strategy vector: one shared policy, optionally with
/// player 0 deviating.
class PolicyProfile {
public:
    explicit PolicyProfile(const FeedbackPolicy& shared) : shared_(&shared) {}
    PolicyProfile(const FeedbackPolicy& shared, const FeedbackPolicy& first) : shared_(&shared), first_(&first) {}

    const FeedbackPolicy& operator[](std::size_t player) const noexcept
    {
        return (player == 0 && first_) ? *first_ : *shared_;
    }

private:
    const FeedbackPolicy* shared_;
    const FeedbackPolicy* first_ = nullptr;
};

/// One explicit Euler–Maruyama step at time t for every alive player:
/// x ← x + (u(t,x) + b̄(t,x,l,m))·dt + σ·√dt·ξᵢ. Dead players are untouched.
/// Throws NumericalBlowup if a state is non-finite or exceeds 10⁶ in magnitude.
void euler_step(ParticleEnsemble& ensemble, const ModelSpec& model, const PolicyProfile& policies, double t,
                double l, double m, double dt, std::span<const double> noise);

/// Probability that a Brownian bridge from x_prev to x_next over dt touches
/// the threshold: 1 if x_next ≤ threshold, else exp(−2(x_prev−θ)(x_next−θ)/(σ²dt)).
double bridge_absorption_prob(double x_prev, double x_next, double threshold, double sigma, double dt);

/// Simulates the N-player game. (L^N, m^N) are recomputed from the ensemble
/// at every step start and fed to all players' drifts. Exit times are
/// recorded at the start of the step in which the exit was detected.
EmpiricalRecord simulate_nplayer(const ModelSpec& model, const PolicyProfile& policies, const SimConfig& config);

/// N independent copies of the representative player driven by the loss
/// and mean traces of a frozen flow.
EmpiricalRecord simulate_frozen(const ModelSpec& model, const FeedbackPolicy& policy, const SubProbFlow& frozen,
                                const SimConfig& config);

/// Realised cost of one player: ∫₀^{τ∧T} f(s, X_s, L_s, m_s, u(s, X_s)) ds
/// (trapezoidal, using the recorded mean-field inputs) plus F(τ∧T, X_{τ∧T}).
/// Requires full paths.
double path_cost(const EmpiricalRecord& record, const ModelSpec& model, const PolicyProfile& policies,
                 std::size_t player);

}  // namespace mfgabs
