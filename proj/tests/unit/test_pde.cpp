#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mfgabs/error.hpp"
#include "mfgabs/mfg.hpp"
#include "mfgabs/pde.hpp"
#include "mfgabs/reference_models.hpp"

using namespace mfgabs;

namespace {

ModelParameters quadratic_control()
{
    ModelParameters p;
    p.initial = InitialLaw::point_mass(1.0);
    p.families.control_cost = {"quadratic", {{"r", 1.0}}};
    return p;
}

double row_mass(const SubProbFlow& f, std::size_t k)
{
    double s = 0.0;
    for (std::size_t j = 0; j < f.grid.state_points(); ++j)
        s += f.node_mass(k, j);
    return s;
}

}  // namespace

TEST_CASE("minimize_hamiltonian examples")
{
    const ModelSpec model(quadratic_control());
    const HamiltonianMin a = minimize_hamiltonian(model, 0.0, 1.0, 0.0, 0.0, 1.0);
    CHECK(a.u_star == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(a.h_min == doctest::Approx(-0.25).epsilon(1e-6));

    const HamiltonianMin b = minimize_hamiltonian(model, 0.0, 1.0, 0.0, 0.0, 4.0);
    CHECK(b.u_star == -1.0);
    CHECK(b.h_min == doctest::Approx(1.0 - 4.0));

    ModelParameters flat = quadratic_control();
    flat.families.control_cost = {"zero", {}};
    flat.actions = {-1.0, 3.0};
    const HamiltonianMin c = minimize_hamiltonian(ModelSpec(flat), 0.0, 1.0, 0.0, 0.0, 0.0);
    CHECK(c.interval_lo == -1.0);
    CHECK(c.interval_hi == 3.0);
    CHECK(c.u_star == 1.0);
    CHECK(c.h_min == 0.0);
}

TEST_CASE("minimize_hamiltonian scales the adjoint by 1/σ")
{
    ModelParameters p = quadratic_control();
    p.sigma = 2.0;
    // h(u) = u² + (z/σ)u with z = 2 gives u* = −1/2
    CHECK(minimize_hamiltonian(ModelSpec(p), 0.0, 1.0, 0.0, 0.0, 2.0).u_star == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("solve_hjb: zero costs give V = 0 and the Γ midpoint")
{
    ModelParameters p;
    p.initial = InitialLaw::point_mass(1.0);
    p.actions = {-1.0, 2.0};
    const ModelSpec model(p);
    const Grid grid = default_grid(model, 50, 40);
    const HjbSolution s = solve_hjb(model, uncontrolled_flow(model, grid), grid);
    for (double v : s.value.values)
        CHECK(v == 0.0);
    for (double u : s.policy.values())
        CHECK(u == 0.5);
}

TEST_CASE("solve_hjb: linear terminal cost")
{
    const ModelSpec model(linear_terminal_benchmark());
    const Grid grid{1.0, 200, -8.0, 8.0, 160};
    const HjbSolution s = solve_hjb(model, uncontrolled_flow(model, grid), grid);
    for (std::size_t j = 0; j < grid.state_points(); ++j) {
        const double x = grid.x(j);
        if (std::abs(x) > 4.0)
            continue;
        CHECK(std::abs(s.value.value(0, j) - (x - 0.25)) <= 1e-3);
        CHECK(std::abs(s.value.dvdx(0, j) - 1.0) <= 1e-3);
        CHECK(std::abs(s.policy.node(0, j) + 0.5) <= 1e-3);
    }
    // boundary and terminal data
    for (std::size_t j = 0; j < grid.state_points(); ++j)
        CHECK(s.value.value(grid.time_steps, j) == doctest::Approx(grid.x(j)));
    for (std::size_t k = 0; k < grid.time_points(); ++k)
        CHECK(s.value.value(k, 0) == doctest::Approx(grid.x_lo));
}

TEST_CASE("project_initial_law preserves mass")
{
    for (const std::string& name : reference_names()) {
        const ModelSpec model(reference_parameters(name));
        const Grid grid = default_grid(model, 10, 137);
        const auto rho = project_initial_law(model, grid);
        SubProbFlow f = SubProbFlow::zeros(grid);
        std::copy(rho.begin(), rho.end(), f.row(0).begin());
        CHECK(row_mass(f, 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rho[0] == 0.0);
    }
}

TEST_CASE("solve_killed_fp: far threshold gives the heat kernel")
{
    ModelParameters p;
    p.initial = InitialLaw::point_mass(0.0);
    p.threshold = -10.0;
    const ModelSpec model(p);
    const Grid grid{1.0, 400, -10.0, 10.0, 800};
    const SubProbFlow f = solve_killed_fp(model, FeedbackPolicy::constant(grid, model.actions(), 0.0), grid);
    for (double s : f.survivor_mass)
        CHECK(std::abs(s - 1.0) <= 1e-8);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < grid.state_points(); ++j) {
        m1 += grid.x(j) * f.node_mass(grid.time_steps, j);
        m2 += grid.x(j) * grid.x(j) * f.node_mass(grid.time_steps, j);
    }
    CHECK(std::abs(m1) < 1e-6);
    CHECK(std::abs(m2 - m1 * m1 - 1.0) <= 0.01);
}

TEST_CASE("solve_killed_fp: reflection principle and mass balance")
{
    const ModelSpec model(brownian_benchmark());
    const Grid grid = default_grid(model, 1000, 400);
    const SubProbFlow f = solve_killed_fp(model, FeedbackPolicy::constant(grid, model.actions(), 0.0), grid);
    const double exact = 1.0 - std::erfc(1.0 / std::sqrt(2.0));
    CHECK(std::abs(f.survivor_mass.back() - exact) <= 0.005);
    for (std::size_t k = 0; k < grid.time_points(); ++k) {
        CHECK(std::abs(f.survivor_mass[k] + f.boundary_loss[k] - 1.0) <= 1e-10 * grid.time_steps);
        CHECK(f.row(k)[0] == 0.0);
        if (k > 0)
            CHECK(f.survivor_mass[k] <= f.survivor_mass[k - 1] + 1e-15);
    }
    for (double d : f.density)
        CHECK(d >= -1e-12);
}

TEST_CASE("solve_killed_fp: decoupled forward equation ignores the frozen inputs")
{
    const ModelSpec model(decoupled_benchmark());
    const Grid grid = default_grid(model, 100, 100);
    const FeedbackPolicy policy = FeedbackPolicy::constant(grid, model.actions(), 0.3);
    const SubProbFlow a = solve_killed_fp(model, policy, grid);
    SubProbFlow guess = uncontrolled_flow(model, grid);
    FpOptions opts;
    opts.frozen_inputs = &guess;
    const SubProbFlow b = solve_killed_fp(model, policy, grid, opts);
    CHECK(a.density == b.density);
    CHECK(a.survivor_mass == b.survivor_mass);
}

TEST_CASE("solve_killed_fp: CFL violation is reported")
{
    ModelParameters p = lq_benchmark({});
    const ModelSpec model(p);
    const Grid grid = default_grid(model, 10, 400);
    CHECK_THROWS_AS(solve_killed_fp(model, FeedbackPolicy::constant(grid, model.actions(), model.actions().hi), grid),
                    SolverError);
}

TEST_CASE("solve_killed_fp requires the grid to start at the threshold")
{
    const ModelSpec model(brownian_benchmark());
    const Grid grid{1.0, 100, -1.0, 5.0, 100};
    CHECK_THROWS(solve_killed_fp(model, FeedbackPolicy::constant(grid, model.actions(), 0.0), grid));
}

TEST_CASE("default_grid")
{
    const ModelSpec model(brownian_benchmark());
    const Grid g = default_grid(model, 100, 50);
    CHECK(g.x_lo == 0.0);
    CHECK(g.x_hi == doctest::Approx(7.0));
    CHECK(default_grid(model, 100, 50, 3.0).x_hi == 3.0);
    CHECK_THROWS_AS(default_grid(model, 0, 50), ConfigError);
    CHECK_THROWS_AS(default_grid(model, 10, 1), ConfigError);
}
