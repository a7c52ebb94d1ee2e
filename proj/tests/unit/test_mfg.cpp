#include <doctest.h>

#include <cmath>

#include "mfgabs/error.hpp"
#include "mfgabs/mfg.hpp"
#include "mfgabs/pde.hpp"
#include "mfgabs/reference_models.hpp"

using namespace mfgabs;

TEST_CASE("picard_solve: decoupled game is a fixed point after one update")
{
    const ModelSpec model(decoupled_benchmark());
    const Grid grid = default_grid(model, 100, 100);
    const FixedPointReport r = picard_solve(model, TruncationSchedule::geometric(4.0, 6), grid, std::nullopt, {});
    CHECK(r.converged);
    CHECK(r.effective_iterations == 1);
    REQUIRE(r.residual_history.size() >= 2);
    CHECK(r.residual_history[1].weighted == 0.0);
    CHECK(r.final_flow.grid == grid);
}

TEST_CASE("picard_solve: weak coupling converges geometrically")
{
    const ModelSpec model(weakly_coupled_benchmark());
    const Grid grid = default_grid(model, 100, 100);
    PicardOptions opts;
    opts.damping = 1.0;
    opts.tol = 1e-3;
    opts.max_iter = 20;
    const FixedPointReport r = picard_solve(model, TruncationSchedule::geometric(4.0, 6), grid, std::nullopt, opts);
    CHECK(r.converged);
    CHECK(r.iterations <= 20);
    CHECK(r.residual_history.back().weighted <= 1e-3);
    CHECK(r.truncation_level_history.size() == r.iterations);
    // levels never decrease
    for (std::size_t i = 1; i < r.truncation_level_history.size(); ++i)
        CHECK(r.truncation_level_history[i] >= r.truncation_level_history[i - 1]);
}

TEST_CASE("picard_solve: budget exhaustion is reported, not thrown")
{
    const ModelSpec model(weakly_coupled_benchmark());
    const Grid grid = default_grid(model, 50, 50);
    PicardOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 2;
    const FixedPointReport r = picard_solve(model, TruncationSchedule({100.0}), grid, std::nullopt, opts);
    CHECK_FALSE(r.converged);
    CHECK(r.residual_history.size() == 2);
    CHECK(r.iterations == 2);
}

TEST_CASE("picard_solve rejects invalid options")
{
    const ModelSpec model(decoupled_benchmark());
    const Grid grid = default_grid(model, 50, 50);
    PicardOptions opts;
    opts.damping = 0.0;
    CHECK_THROWS(picard_solve(model, TruncationSchedule({1.0}), grid, std::nullopt, opts));
    opts = {};
    opts.tol = 0.0;
    CHECK_THROWS(picard_solve(model, TruncationSchedule({1.0}), grid, std::nullopt, opts));
}

TEST_CASE("flow_residual is zero on identical flows and positive otherwise")
{
    const ModelSpec model(brownian_benchmark());
    const Grid grid = default_grid(model, 100, 100);
    const SubProbFlow a = uncontrolled_flow(model, grid);
    const FlowResidual same = flow_residual(a, a, 1.0);
    CHECK(same.weighted == 0.0);
    CHECK(same.w1_sup == 0.0);
    const SubProbFlow b = solve_killed_fp(model, FeedbackPolicy::constant(grid, model.actions(), 1.0), grid);
    const FlowResidual diff = flow_residual(a, b, 1.0);
    CHECK(diff.weighted > 0.0);
    CHECK(diff.mass_gap_sup > 0.0);
    // larger α discounts late times more
    CHECK(flow_residual(a, b, 10.0).weighted < diff.weighted);
}

TEST_CASE("consistency_residual: exact solution passes, shifted flow fails")
{
    const ModelSpec model(decoupled_benchmark());
    const Grid grid = default_grid(model, 100, 200);
    const FixedPointReport r = picard_solve(model, TruncationSchedule::geometric(4.0, 6), grid, std::nullopt, {});
    REQUIRE(r.converged);
    const ModelSpec m = truncate_model(model, r.final_level);
    const ConsistencyResidual ok = consistency_residual(m, r.final_policy, r.final_flow, 10000, 3);
    CHECK(ok.w1_defined);
    CHECK(ok.w1_terminal + ok.mass_gap_terminal <= 0.05);

    // shift every row of the flow by +1 in state
    SubProbFlow shifted = r.final_flow;
    const std::size_t cells = static_cast<std::size_t>(std::lround(1.0 / grid.dx()));
    for (std::size_t k = 0; k < grid.time_points(); ++k) {
        auto row = shifted.row(k);
        for (std::size_t j = grid.state_cells; j >= 1 + cells; --j)
            row[j] = row[j - cells];
        for (std::size_t j = 1; j <= cells; ++j)
            row[j] = 0.0;
    }
    shifted.refresh_traces([&m](double x) { return m.weight(x); });
    const ConsistencyResidual bad = consistency_residual(m, r.final_policy, shifted, 10000, 3);
    CHECK(std::max(bad.w1_terminal, bad.mass_gap_terminal) >= 0.5);

    CHECK_THROWS_AS(consistency_residual(m, r.final_policy, r.final_flow, 0, 3), DomainError);
    CHECK_THROWS_AS(consistency_residual(m, r.final_policy, r.final_flow, 999, 3), DomainError);
}

TEST_CASE("exit_positivity_check examples")
{
    const ModelSpec brownian(brownian_benchmark());
    const Grid grid = default_grid(brownian, 200, 200);
    const SubProbFlow f = uncontrolled_flow(brownian, grid);
    const ExitPositivity ok = exit_positivity_check(f);
    CHECK(ok.passed);
    CHECK(f.survivor_mass.back() == doctest::Approx(0.68).epsilon(0.02));

    const SubProbFlow dead = SubProbFlow::zeros(grid);
    const ExitPositivity bad = exit_positivity_check(dead);
    CHECK_FALSE(bad.passed);
    REQUIRE(bad.first_failure.has_value());
    CHECK(*bad.first_failure == 0.0);

    ModelParameters p = brownian_benchmark();
    p.threshold = -20.0;
    const ModelSpec far(p);
    const SubProbFlow g = uncontrolled_flow(far, default_grid(far, 100, 400));
    CHECK(exit_positivity_check(g).passed);
    for (double s : g.survivor_mass)
        CHECK(s == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("coefficient_range bounds every coefficient on the box")
{
    const ModelSpec model(weakly_coupled_benchmark());
    const Grid grid = default_grid(model, 10, 50);
    const double range = coefficient_range(model, grid, -1.0, 1.0);
    CHECK(range >= std::abs(model.weight(grid.x_hi)));
    CHECK(range >= std::abs(model.state_cost(0.0, 1.0, 0.0, -1.0)));
    // truncating at the range changes nothing on the box
    const ModelSpec t = truncate_model(model, range);
    for (std::size_t j = 0; j < grid.state_points(); ++j) {
        CHECK(t.weight(grid.x(j)) == model.weight(grid.x(j)));
        CHECK(t.drift(0.5, grid.x(j), 0.5, 0.5) == model.drift(0.5, grid.x(j), 0.5, 0.5));
    }
}
