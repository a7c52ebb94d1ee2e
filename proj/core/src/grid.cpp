#include "mfgabs/grid.hpp"

#include <algorithm>
#include <cmath>

#include "mfgabs/error.hpp"

namespace mfgabs {

std::size_t Grid::time_index(double t) const noexcept
{
    if (!(t > 0.0))
        return 0;
    const double r = t / dt();
    // Snap times that are on the grid up to round-off.
    const double k = std::floor(r + 1e-9);
    return std::min(static_cast<std::size_t>(k), time_steps);
}

void Grid::validate() const
{
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError("grid: horizon must be positive and finite");
    if (time_steps < 1)
        throw ConfigError("grid: need at least one time step");
    if (state_cells < 2)
        throw ConfigError("grid: need at least two state cells");
    if (!(x_lo < x_hi) || !std::isfinite(x_lo) || !std::isfinite(x_hi))
        throw ConfigError("grid: state box must satisfy x_lo < x_hi");
}

}  // namespace mfgabs
