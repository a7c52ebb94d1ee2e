#pragma once

#include <span>
#include <vector>

#include "mfgabs/grid.hpp"
#include "mfgabs/model.hpp"

namespace mfgabs {

/// Markov feedback control u(t, x) on a time–state grid.
///
/// Piecewise constant in time (row k acts on [t_k, t_{k+1})), linear in
/// state, clamped to the grid box and to Γ. Only the region before exit is
/// ever queried by the solvers.
class FeedbackPolicy {
public:
    FeedbackPolicy() = default;
    FeedbackPolicy(Grid grid, ActionSet actions, double fill);

    /// Constant-action policy; `u` must lie in Γ.
    static FeedbackPolicy constant(const Grid& grid, const ActionSet& actions, double u);

    const Grid& grid() const noexcept { return grid_; }
    const ActionSet& actions() const noexcept { return actions_; }

    double operator()(double t, double x) const noexcept { return at_step(grid_.time_index(t), x); }
    double at_step(std::size_t k, double x) const noexcept;

    double node(std::size_t k, std::size_t j) const { return values_[k * grid_.state_points() + j]; }
    /// Stores clamp_Γ(u).
    void set_node(std::size_t k, std::size_t j, double u) noexcept;

    std::span<const double> values() const noexcept { return values_; }

    bool operator==(const FeedbackPolicy&) const = default;

private:
    Grid grid_;
    ActionSet actions_;
    std::vector<double> values_;
};

}  // namespace mfgabs
