#include <doctest.h>

#include <cmath>

#include "mfgabs/analysis.hpp"
#include "mfgabs/error.hpp"
#include "mfgabs/pde.hpp"
#include "mfgabs/reference_models.hpp"

using namespace mfgabs;

namespace {

SimConfig small_sim(std::size_t n, std::uint64_t seed)
{
    SimConfig s;
    s.particles = n;
    s.seed = seed;
    s.store_full_paths = true;
    return s;
}

ChaosTable synthetic_table(const std::vector<std::size_t>& ns, const std::function<double(double)>& w1)
{
    ChaosTable t;
    for (std::size_t n : ns) {
        ChaosRow r;
        r.N = n;
        r.replications = 1;
        r.w1_mean = w1(static_cast<double>(n));
        t.push_back(r);
    }
    return t;
}

}  // namespace

TEST_CASE("estimate_cost examples")
{
    ModelParameters p = brownian_benchmark();
    p.families.terminal_cost = {"constant", {{"c", 1.0}}};
    ModelSpec model(p);
    const FeedbackPolicy zero = FeedbackPolicy::constant(default_grid(model, 10, 10), model.actions(), 0.0);
    CostEstimate c = estimate_cost(model, PolicyProfile(zero), 0, small_sim(20, 3), 10);
    CHECK(c.mean == doctest::Approx(1.0));
    CHECK(c.se == doctest::Approx(0.0));
    CHECK(c.samples.size() == 10);

    p.families.terminal_cost = {"zero", {}};
    p.families.state_cost = {"constant", {{"c", 1.0}}};
    p.threshold = -50.0;
    model = ModelSpec(p);
    c = estimate_cost(model, PolicyProfile(zero), 0, small_sim(5, 3), 10);
    CHECK(c.mean == doctest::Approx(1.0));
    CHECK(c.se <= 1e-12);

    CHECK_THROWS_AS(estimate_cost(model, PolicyProfile(zero), 0, small_sim(5, 3), 1), DomainError);
    CHECK_THROWS_AS(estimate_cost(model, PolicyProfile(zero), 5, small_sim(5, 3), 4), DomainError);
}

TEST_CASE("nash_gap preconditions and the decoupled game")
{
    const ModelSpec model(decoupled_benchmark());
    const Grid grid = default_grid(model, 100, 100);
    FixedPointReport rep = picard_solve(model, TruncationSchedule::geometric(4.0, 6), grid, std::nullopt, {});
    REQUIRE(rep.converged);
    NashGapOptions opts;
    opts.pilot_particles = 2000;
    CHECK_THROWS_AS(nash_gap(model, rep, 50, 1, grid, 1, opts), DomainError);
    CHECK_THROWS_AS(nash_gap(model, rep, 1, 10, grid, 1, opts), DomainError);

    const NashGapRow row = nash_gap(model, rep, 50, 30, grid, 1, opts);
    CHECK(row.N == 50);
    CHECK(std::abs(row.gap) <= 3.0 * row.gap_se + 1e-12);
    CHECK(row.gap == doctest::Approx(row.j_eq - row.j_dev));

    rep.converged = false;
    CHECK_THROWS_AS(nash_gap(model, rep, 50, 30, grid, 1, opts), DomainError);
}

TEST_CASE("chaos_study: i.i.d. baseline matches direct sampling scale")
{
    const ModelSpec model(decoupled_benchmark());
    const Grid grid = default_grid(model, 100, 200);
    const FixedPointReport rep = picard_solve(model, TruncationSchedule::geometric(4.0, 6), grid, std::nullopt, {});
    ChaosOptions opts;
    opts.frozen = true;
    const std::vector<std::size_t> ns{100};
    const ChaosTable t = chaos_study(truncate_model(model, rep.final_level), rep.final_policy, rep.final_flow, ns, 20,
                                     2, opts);
    REQUIRE(t.size() == 1);
    // W₁ of an N-sample from a law with O(1) spread is of order N^{-1/2}
    CHECK(t[0].w1_mean > 0.2 / std::sqrt(100.0));
    CHECK(t[0].w1_mean < 3.0 / std::sqrt(100.0));
    CHECK(t[0].extinct == 0);

    CHECK_THROWS_AS(chaos_study(model, rep.final_policy, rep.final_flow, ns, 0, 2, opts), DomainError);
    const std::vector<std::size_t> unsorted{200, 100};
    CHECK_THROWS_AS(chaos_study(model, rep.final_policy, rep.final_flow, unsorted, 2, 2, opts), DomainError);
}

TEST_CASE("fit_rate examples")
{
    const std::vector<std::size_t> ns{50, 100, 200, 400, 800};
    const RateFit exact = fit_rate(synthetic_table(ns, [](double n) { return 1.0 / std::sqrt(n); }));
    CHECK(exact.slope == doctest::Approx(-0.5));
    CHECK(exact.intercept == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(exact.r2 == doctest::Approx(1.0));

    const RateFit flat = fit_rate(synthetic_table(ns, [](double) { return 0.2; }));
    CHECK(flat.slope == doctest::Approx(0.0));

    CHECK_THROWS_AS(fit_rate(synthetic_table({50, 100}, [](double) { return 0.1; })), DomainError);
}

TEST_CASE("martingale_check examples")
{
    const ModelSpec brownian(brownian_benchmark());
    const Grid grid = default_grid(brownian, 100, 100);
    const SubProbFlow flow = uncontrolled_flow(brownian, grid);
    const FeedbackPolicy zero = FeedbackPolicy::constant(grid, brownian.actions(), 0.0);
    const MartingaleEstimate e = martingale_check(brownian, zero, flow, 1000, 1, 1e-2);
    CHECK(e.mean == 1.0);
    CHECK(e.se == 0.0);
    CHECK(e.overflowed == 0);

    ModelParameters p = brownian_benchmark();
    p.families.drift = {"constant", {{"c", 0.5}}};
    const ModelSpec drifted(p);
    const MartingaleEstimate d = martingale_check(drifted, zero, uncontrolled_flow(drifted, grid), 100000, 2, 1e-2);
    CHECK(std::abs(d.mean - 1.0) <= 3.0 * d.se);
    CHECK(d.se > 0.0);

    CHECK_THROWS_AS(martingale_check(brownian, zero, flow, 999, 1, 1e-2), DomainError);
}

TEST_CASE("moment_check examples")
{
    ModelParameters p = brownian_benchmark();
    p.threshold = -50.0;
    p.initial = InitialLaw::point_mass(0.0);
    const ModelSpec model(p);
    const FeedbackPolicy zero = FeedbackPolicy::constant(default_grid(model, 10, 10), model.actions(), 0.0);
    const std::vector<int> one{1};
    // E sup_{t≤1} |W_t| = √(π/2) ≈ 1.2533; the discrete maximum sits slightly below
    const MomentReport r = moment_check(model, TruncationSchedule({1.0, 2.0}), one, zero, 20000, 4, 1e-3);
    REQUIRE(r.estimates.size() == 2);
    CHECK(r.estimates[0].mean == r.estimates[1].mean);  // driftless: truncation never binds
    CHECK(r.estimates[0].mean > 1.1);
    CHECK(r.estimates[0].mean < 1.3);

    const std::vector<int> bad{3};
    CHECK_THROWS_AS(moment_check(model, TruncationSchedule({1.0}), bad, zero, 1000, 4, 1e-2), DomainError);
}

TEST_CASE("moment report helpers")
{
    MomentReport r;
    r.estimates = {{1.0, 1, 2.0, 0.1}, {2.0, 1, 2.2, 0.1}, {4.0, 1, 2.2, 0.1}};
    CHECK(r.max_over_levels(1) == 2.2);
    CHECK(r.relative_spread(1, 2.0) == doctest::Approx(0.0));
    CHECK(r.relative_spread(1, 0.5) > 0.05);
}
