#pragma once

#include <cstddef>

namespace mfgabs {

/// Equispaced time–state box: K+1 times on [0, T] and J+1 states on
/// [x_lo, x_hi]. For absorbed problems x_lo is the absorbing threshold.
struct Grid {
    double horizon = 1.0;
    std::size_t time_steps = 100;  // K
    double x_lo = 0.0;
    double x_hi = 1.0;
    std::size_t state_cells = 100;  // J

    double dt() const noexcept { return horizon / static_cast<double>(time_steps); }
    double dx() const noexcept { return (x_hi - x_lo) / static_cast<double>(state_cells); }
    double t(std::size_t k) const noexcept { return horizon * static_cast<double>(k) / static_cast<double>(time_steps); }
    double x(std::size_t j) const noexcept { return x_lo + dx() * static_cast<double>(j); }
    std::size_t time_points() const noexcept { return time_steps + 1; }
    std::size_t state_points() const noexcept { return state_cells + 1; }

    /// Index of the time row in force at time t (piecewise constant, left-closed).
    std::size_t time_index(double t) const noexcept;

    /// Throws ConfigError unless K ≥ 1, J ≥ 2, T > 0 and x_lo < x_hi.
    void validate() const;

    bool operator==(const Grid&) const = default;
};

}  // namespace mfgabs
