#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "mfgabs/grid.hpp"

namespace mfgabs {

/// Flow of sub-probability measures on a time–state grid.
///
/// Densities are stored per node with finite-volume weights: interior nodes
/// carry a cell of width dx, the far node x_hi a half cell, and the
/// threshold node is absorbing (density forced to 0). survivor_mass is
/// μ_t(O), loss = 1 − survivor_mass, and mean = ∫ w dμ_t.
struct SubProbFlow {
    Grid grid;
    std::vector<double> density;  // (K+1)×(J+1), row-major in time
    std::vector<double> survivor_mass;
    std::vector<double> loss;
    std::vector<double> mean;
    /// Cumulative flux absorbed at the threshold; filled by the killed
    /// Fokker–Planck solver only (an independent route to the loss).
    std::vector<double> boundary_loss;
    /// Largest fraction of surviving mass seen in the far-field cell.
    double far_field_mass = 0.0;

    static SubProbFlow zeros(const Grid& grid);

    std::span<double> row(std::size_t k);
    std::span<const double> row(std::size_t k) const;
    double node_volume(std::size_t j) const noexcept;
    double node_mass(std::size_t k, std::size_t j) const { return row(k)[j] * node_volume(j); }

    /// Recomputes survivor_mass, loss and mean for row k from its density.
    void refresh_row(std::size_t k, const std::function<double(double)>& weight);
    void refresh_traces(const std::function<double(double)>& weight);
};

/// Result of an N-particle simulation.
///
/// Absorbed particles are stopped: their stored position is the threshold
/// for every stored step after their exit. tau is +∞ for survivors.
struct EmpiricalRecord {
    std::size_t particles = 0;  // N
    double horizon = 1.0;
    std::size_t steps = 0;  // K
    double threshold = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> tau;
    std::vector<std::size_t> stored_steps;  // ascending; rows of `positions`
    std::vector<double> positions;          // stored_steps.size() × N
    /// Mean-field inputs (L, m) seen by the dynamics at each step start, K+1 entries.
    std::vector<double> loss_trace;
    std::vector<double> mean_trace;
    /// Player 0's own share of (L, m) at each step: 1{τ₀ ≤ t}/N and w(X⁰)1{alive}/N.
    std::vector<double> own_loss_share;
    std::vector<double> own_mean_share;
    /// sup over all simulated steps of |Xᵢ| along the stopped path.
    std::vector<double> sup_abs;

    static constexpr double alive_sentinel = std::numeric_limits<double>::infinity();

    double dt() const noexcept { return horizon / static_cast<double>(steps); }
    double time(std::size_t k) const noexcept { return horizon * static_cast<double>(k) / static_cast<double>(steps); }
    bool alive(std::size_t i, double t) const { return t < tau[i]; }
    bool has_step(std::size_t k) const noexcept;
    /// Positions at grid step k; throws DomainError if the step was not stored.
    std::span<const double> positions_at(std::size_t k) const;
    bool full_paths() const noexcept { return stored_steps.size() == steps + 1; }
    /// Step index of time t (must lie on the time grid up to round-off).
    std::size_t step_of(double t) const;
};

/// L^N_t: fraction of particles with τᵢ ≤ t.
double loss_at(const EmpiricalRecord& record, double t);

/// m^N_t = (1/N) Σ w(Xᵢ) 1{t < τᵢ}: normalised by N, not by survivors.
double mean_at(const EmpiricalRecord& record, const std::function<double(double)>& weight, double t);

struct RecordFlow {
    SubProbFlow flow;
    std::size_t clipped = 0;  // alive samples outside the state box, moved to the boundary nodes
};

/// Histogram of alive particles onto the nodes of `grid` (nearest node;
/// samples in the threshold half-cell go to the first interior node). The
/// grid's time steps must divide the record's and every needed step must be
/// stored. survivor_mass equals the alive fraction.
RecordFlow flow_from_record(const EmpiricalRecord& record, const Grid& grid,
                            const std::function<double(double)>& weight);

struct SampleDistance {
    double distance = 0.0;
    bool resampled = false;  // sizes differed; quantile interpolation was used
};

/// W₁ between two sorted samples in 1-d: mean absolute difference of order
/// statistics. Unequal sizes are matched through interpolated quantiles.
SampleDistance wasserstein1_samples(std::span<const double> a, std::span<const double> b);

struct FlowDistance {
    double conditional_w1 = 0.0;  // W₁ of the survivor-normalised laws
    double mass_gap = 0.0;        // |μ_t(O) − μ'_t(O)|
};

/// Compares row k of two flows on identical grids. Throws DomainError if
/// either row has zero mass or the grids differ.
FlowDistance wasserstein1_flows(const SubProbFlow& a, const SubProbFlow& b, std::size_t k);

/// Like wasserstein1_flows, but a zero-mass row yields W₁ = 0 and the full
/// mass as the gap instead of throwing.
FlowDistance flow_gap(const SubProbFlow& a, const SubProbFlow& b, std::size_t k);

/// W₁ between a sorted sample and the survivor-normalised law of row k,
/// treating the flow's density as piecewise constant on its control volumes.
double wasserstein1_sample_to_flow(std::span<const double> sorted_sample, const SubProbFlow& flow, std::size_t k);

/// sqrt(∫₀ᵀ e^{−αt} d_t² dt) by the trapezoidal rule on equispaced d_t
/// samples (d.size() ≥ 2). Throws DomainError unless α > 0.
double alpha_weighted_distance(std::span<const double> per_time_distance, double alpha, double horizon);

}  // namespace mfgabs
