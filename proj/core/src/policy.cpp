#include "mfgabs/policy.hpp"

#include <algorithm>
#include <cmath>

#include "mfgabs/error.hpp"

namespace mfgabs {

FeedbackPolicy::FeedbackPolicy(Grid grid, ActionSet actions, double fill)
    : grid_(grid), actions_(actions), values_(grid.time_points() * grid.state_points(), actions.clamp(fill))
{
    grid_.validate();
}

FeedbackPolicy FeedbackPolicy::constant(const Grid& grid, const ActionSet& actions, double u)
{
    if (!actions.contains(u))
        throw DomainError("constant policy: action outside the action set");
    return FeedbackPolicy(grid, actions, u);
}

double FeedbackPolicy::at_step(std::size_t k, double x) const noexcept
{
    k = std::min(k, grid_.time_steps);
    const double* row = values_.data() + k * grid_.state_points();
    const double s = (x - grid_.x_lo) / grid_.dx();
    if (!(s > 0.0))
        return row[0];
    if (s >= static_cast<double>(grid_.state_cells))
        return row[grid_.state_cells];
    const auto j = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(j);
    return actions_.clamp(row[j] + w * (row[j + 1] - row[j]));
}

void FeedbackPolicy::set_node(std::size_t k, std::size_t j, double u) noexcept
{
    values_[k * grid_.state_points() + j] = actions_.clamp(u);
}

}  // namespace mfgabs
