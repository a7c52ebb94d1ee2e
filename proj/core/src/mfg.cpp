#include "mfgabs/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfgabs/error.hpp"
#include "mfgabs/particle.hpp"

namespace mfgabs {

namespace {

constexpr double kPinsker = 0.7071067811865476;  // TV ≤ √(H/2)

void check_flow_invariants(const SubProbFlow& flow, std::size_t iteration)
{
    const auto fail = [iteration](const std::string& what) {
        throw SolverError("picard_solve: iteration " + std::to_string(iteration) + ": " + what);
    };
    for (std::size_t k = 0; k < flow.grid.time_points(); ++k) {
        const double mass = flow.survivor_mass[k];
        if (mass < -1e-12 || mass > 1.0 + 1e-9)
            fail("survivor mass outside [0, 1]");
        if (k > 0 && mass > flow.survivor_mass[k - 1] + 1e-9)
            fail("survivor mass increased");
    }
    if (std::any_of(flow.density.begin(), flow.density.end(), [](double v) { return v < -1e-12; }))
        fail("negative density");
}

SubProbFlow damp(const SubProbFlow& current, const SubProbFlow& proposal, double theta, const ModelSpec& model)
{
    SubProbFlow out = current;
    for (std::size_t i = 0; i < out.density.size(); ++i)
        out.density[i] = (1.0 - theta) * current.density[i] + theta * proposal.density[i];
    if (current.boundary_loss.size() == proposal.boundary_loss.size())
        for (std::size_t k = 0; k < out.boundary_loss.size(); ++k)
            out.boundary_loss[k] = (1.0 - theta) * current.boundary_loss[k] + theta * proposal.boundary_loss[k];
    else
        out.boundary_loss.clear();
    out.far_field_mass = std::max(current.far_field_mass, proposal.far_field_mass);
    out.refresh_traces([&model](double x) { return model.weight(x); });
    return out;
}

}  // namespace

FlowResidual flow_residual(const SubProbFlow& a, const SubProbFlow& b, double alpha)
{
    if (!(a.grid == b.grid))
        throw DomainError("flow_residual: flows live on different grids");
    FlowResidual r;
    std::vector<double> d(a.grid.time_points());
    for (std::size_t k = 0; k < d.size(); ++k) {
        const FlowDistance fd = flow_gap(a, b, k);
        r.w1_sup = std::max(r.w1_sup, fd.conditional_w1);
        r.mass_gap_sup = std::max(r.mass_gap_sup, fd.mass_gap);
        d[k] = fd.conditional_w1 + fd.mass_gap;
    }
    r.weighted = alpha_weighted_distance(d, alpha, a.grid.horizon);
    return r;
}

SubProbFlow uncontrolled_flow(const ModelSpec& model, const Grid& grid)
{
    SubProbFlow frozen = SubProbFlow::zeros(grid);
    std::fill(frozen.loss.begin(), frozen.loss.end(), 0.0);
    const FeedbackPolicy zero(grid, model.actions(), model.actions().clamp(0.0));
    FpOptions opts;
    opts.frozen_inputs = &frozen;
    return solve_killed_fp(model, zero, grid, opts);
}

double coefficient_range(const ModelSpec& model, const Grid& grid, double m_lo, double m_hi)
{
    double r = 0.0;
    constexpr std::size_t kTimes = 11;
    for (std::size_t s = 0; s < kTimes; ++s) {
        const double t = grid.horizon * static_cast<double>(s) / static_cast<double>(kTimes - 1);
        for (std::size_t j = 0; j < grid.state_points(); ++j) {
            const double x = grid.x(j);
            r = std::max({r, std::abs(model.terminal_cost(t, x)), std::abs(model.weight(x))});
            for (const double l : {0.0, 0.5, 1.0})
                for (const double m : {m_lo, 0.5 * (m_lo + m_hi), m_hi})
                    r = std::max({r, std::abs(model.drift(t, x, l, m)), std::abs(model.state_cost(t, x, l, m))});
        }
    }
    return r;
}

FixedPointReport picard_solve(const ModelSpec& model, const TruncationSchedule& schedule, const Grid& grid,
                              const std::optional<SubProbFlow>& init_flow, const PicardOptions& options)
{
    if (!(options.tol > 0.0))
        throw DomainError("picard_solve: tol must be positive");
    if (!(options.damping > 0.0 && options.damping <= 1.0))
        throw DomainError("picard_solve: damping must lie in (0, 1]");
    if (options.max_iter < 1)
        throw DomainError("picard_solve: max_iter must be at least 1");

    FixedPointReport report;
    const double L = model.parameters().lipschitz_L;
    report.alpha = options.alpha.value_or(std::max(1e-6, L * L * kPinsker / (model.sigma() * model.sigma())));

    SubProbFlow mu = init_flow ? *init_flow : uncontrolled_flow(model, grid);
    if (!(mu.grid == grid))
        throw DomainError("picard_solve: initial flow must live on the solver grid");

    std::size_t level = 0;
    ModelSpec truncated = truncate_model(model, schedule[level]);
    double previous = std::numeric_limits<double>::infinity();

    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        HjbSolution best;
        SubProbFlow induced;
        try {
            best = solve_hjb(truncated, mu, grid);
            induced = solve_killed_fp(truncated, best.policy, grid);
        } catch (const SolverError& e) {
            std::ostringstream os;
            os << "picard_solve: iteration " << it << " at truncation level " << schedule[level] << ": " << e.what();
            throw SolverError(os.str());
        }
        const FlowResidual res = flow_residual(induced, mu, report.alpha);
        report.residual_history.push_back(res);
        report.truncation_level_history.push_back(schedule[level]);
        report.iterations = it;
        if (res.weighted > options.tol)
            ++report.effective_iterations;

        mu = it == 1 ? induced : damp(mu, induced, options.damping, truncated);
        check_flow_invariants(mu, it);

        report.final_policy = std::move(best.policy);
        report.final_value = std::move(best.value);
        report.final_flow = std::move(induced);
        report.final_level = schedule[level];

        const bool last_level = level + 1 == schedule.size();
        const auto [m_lo, m_hi] = std::minmax_element(mu.mean.begin(), mu.mean.end());
        const bool saturated = coefficient_range(model, grid, *m_lo, *m_hi) <= schedule[level];
        if (res.weighted <= options.tol) {
            if (saturated || last_level) {
                report.converged = true;
                break;
            }
            ++level;
        } else if (res.weighted > options.stall_ratio * previous && !last_level && !saturated) {
            ++level;
        }
        if (report.truncation_level_history.back() != schedule[level])
            truncated = truncate_model(model, schedule[level]);
        previous = res.weighted;
    }
    return report;
}

ConsistencyResidual consistency_residual(const ModelSpec& model, const FeedbackPolicy& policy, const SubProbFlow& flow,
                                         std::size_t n_mc, std::uint64_t seed)
{
    if (n_mc < 1000)
        throw DomainError("consistency_residual: N_mc must be at least 1000");
    SimConfig cfg;
    cfg.particles = n_mc;
    cfg.dt = flow.grid.dt();
    cfg.seed = seed;
    const EmpiricalRecord rec = simulate_frozen(model, policy, flow, cfg);

    ConsistencyResidual out;
    const std::size_t K = flow.grid.time_steps;
    for (std::size_t k = 0; k <= K; ++k)
        out.loss_sup_gap = std::max(out.loss_sup_gap, std::abs(loss_at(rec, rec.time(k * rec.steps / K)) - flow.loss[k]));

    const auto xT = rec.positions_at(rec.steps);
    std::vector<double> survivors;
    for (std::size_t i = 0; i < rec.particles; ++i)
        if (rec.alive(i, rec.horizon))
            survivors.push_back(xT[i]);
    const double alive_fraction = static_cast<double>(survivors.size()) / static_cast<double>(rec.particles);
    out.mass_gap_terminal = std::abs(alive_fraction - flow.survivor_mass[K]);
    if (survivors.empty() || !(flow.survivor_mass[K] > 0.0)) {
        out.w1_defined = false;
        if (survivors.empty())
            out.mass_gap_terminal = 1.0;
        return out;
    }
    std::sort(survivors.begin(), survivors.end());
    out.w1_terminal = wasserstein1_sample_to_flow(survivors, flow, K);
    return out;
}

ExitPositivity exit_positivity_check(const SubProbFlow& flow)
{
    for (std::size_t k = 0; k < flow.survivor_mass.size(); ++k)
        if (!(flow.survivor_mass[k] > 0.0))
            return {false, flow.grid.t(k)};
    return {true, std::nullopt};
}

}  // namespace mfgabs
