#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "mfgabs/analysis.hpp"
#include "mfgabs/error.hpp"
#include "mfgabs/io.hpp"
#include "mfgabs/mfg.hpp"
#include "mfgabs/particle.hpp"
#include "mfgabs/pde.hpp"
#include "mfgabs/rng.hpp"

namespace mfgabs::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Everything the subcommands share: the model, its grid and the resolved config.
struct Context {
    const ExperimentConfig& config;
    ModelSpec model;
    Grid grid;
    ArtifactSet& out;

    Context(const ExperimentConfig& c, ArtifactSet& artifacts)
        : config(c),
          model(c.model),
          grid(default_grid(model, c.grids.time_steps, c.grids.state_cells, c.grids.x_max)),
          out(artifacts)
    {
    }

    bool csv() const { return config.output.has("csv"); }
    bool jsonl() const { return config.output.has("jsonl"); }
    bool matrix() const { return config.output.has("matrix"); }

    SimConfig sim(std::size_t particles, std::uint64_t seed) const
    {
        SimConfig s;
        s.particles = particles;
        s.dt = config.grids.dt;
        s.seed = seed;
        s.bridge_correction = config.simulate.bridge;
        return s;
    }
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

FixedPointReport solve(Context& ctx)
{
    PicardOptions opts;
    opts.damping = ctx.config.mfg.damping;
    opts.tol = ctx.config.mfg.tol;
    opts.max_iter = ctx.config.mfg.max_iter;
    opts.alpha = ctx.config.mfg.alpha;
    return picard_solve(ctx.model, TruncationSchedule(ctx.config.mfg.schedule), ctx.grid, std::nullopt, opts);
}

json fixed_point_summary(const FixedPointReport& rep)
{
    return {{"converged", rep.converged},
            {"iterations", rep.iterations},
            {"effective_iterations", rep.effective_iterations},
            {"alpha", rep.alpha},
            {"final_level", rep.final_level},
            {"final_residual", rep.residual_history.empty() ? 0.0 : rep.residual_history.back().weighted}};
}

void emit_fixed_point(Context& ctx, const FixedPointReport& rep)
{
    if (ctx.jsonl()) {
        std::string lines;
        for (std::size_t i = 0; i < rep.residual_history.size(); ++i) {
            const FlowResidual& r = rep.residual_history[i];
            lines += json{{"iteration", i + 1},
                          {"residual", r.weighted},
                          {"w1_sup", r.w1_sup},
                          {"mass_gap_sup", r.mass_gap_sup},
                          {"truncation_level", rep.truncation_level_history[i]}}
                         .dump() +
                     "\n";
        }
        ctx.out.add("fixed_point.jsonl", lines);
    }
    if (ctx.csv())
        ctx.out.add("flow.csv", flow_csv(rep.final_flow));
    if (ctx.matrix()) {
        ctx.out.add("density.mfgm", encode_matrix(density_matrix(rep.final_flow)));
        ctx.out.add("policy.mfgm", encode_matrix(policy_matrix(rep.final_policy)));
        ctx.out.add("value.mfgm", encode_matrix(value_matrix(rep.final_value)));
    }
}

/// The MFG policy needs a converged fixed point; studies refuse to run on anything else.
FixedPointReport converged_solution(Context& ctx)
{
    FixedPointReport rep = solve(ctx);
    if (!rep.converged) {
        std::ostringstream os;
        os << "fixed point did not converge in " << rep.iterations << " iterations (last residual "
           << (rep.residual_history.empty() ? 0.0 : rep.residual_history.back().weighted) << ", tol "
           << ctx.config.mfg.tol << ")";
        throw SolverError(os.str());
    }
    return rep;
}

int cmd_solve(Context& ctx, std::string& summary)
{
    const FixedPointReport rep = solve(ctx);
    emit_fixed_point(ctx, rep);
    json s = fixed_point_summary(rep);
    const ModelSpec truncated = truncate_model(ctx.model, rep.final_level);
    const ConsistencyResidual cr =
        consistency_residual(truncated, rep.final_policy, rep.final_flow, ctx.config.study.mc_paths, ctx.config.seed);
    s["consistency"] = {{"w1_terminal", cr.w1_terminal},
                        {"w1_defined", cr.w1_defined},
                        {"mass_gap_terminal", cr.mass_gap_terminal},
                        {"loss_sup_gap", cr.loss_sup_gap}};
    const ExitPositivity ep = exit_positivity_check(rep.final_flow);
    s["exit_positivity"] = ep.passed;
    s["survivor_mass_T"] = rep.final_flow.survivor_mass.back();
    ctx.out.add("summary.json", dump(s));
    std::ostringstream os;
    os << "solve-mfg: " << (rep.converged ? "converged" : "not converged") << " after " << rep.iterations
       << " iterations (" << rep.effective_iterations << " effective), level " << rep.final_level;
    summary = os.str();
    return 0;
}

int cmd_simulate(Context& ctx, std::string& summary)
{
    const ExperimentConfig& c = ctx.config;
    std::optional<FixedPointReport> rep;
    FeedbackPolicy policy;
    ModelSpec model = ctx.model;
    if (c.simulate.policy == "mfg") {
        rep = converged_solution(ctx);
        policy = rep->final_policy;
        model = truncate_model(ctx.model, rep->final_level);
    } else {
        policy = FeedbackPolicy::constant(ctx.grid, ctx.model.actions(), c.simulate.constant_action);
    }
    SimConfig sim = ctx.sim(c.simulate.particles, c.seed);
    sim.store_full_paths = c.simulate.store_paths;
    const EmpiricalRecord rec = simulate_nplayer(model, PolicyProfile(policy), sim);

    if (ctx.csv()) {
        std::string traces = "t,survivor_mass,loss,mean\n";
        for (std::size_t k = 0; k <= rec.steps; ++k) {
            const double t = rec.time(k);
            const double l = loss_at(rec, t);
            traces += format_double(t) + "," + format_double(1.0 - l) + "," + format_double(l) + "," +
                      format_double(rec.mean_trace[k]) + "\n";
        }
        ctx.out.add("nplayer_flow.csv", traces);
        ctx.out.add("absorption.csv", absorption_csv(rec));
    }
    if (ctx.matrix() && c.simulate.store_paths)
        ctx.out.add("paths.mfgm", encode_matrix(paths_matrix(rec)));
    const double absorbed = loss_at(rec, rec.horizon);
    json s = {{"N", rec.particles}, {"steps", rec.steps}, {"absorbed_fraction", absorbed}, {"policy", c.simulate.policy}};
    if (rep)
        s["fixed_point"] = fixed_point_summary(*rep);
    ctx.out.add("summary.json", dump(s));
    summary = "simulate-nplayer: N = " + std::to_string(rec.particles) + ", absorbed fraction " + format_double(absorbed);
    return 0;
}

int cmd_chaos(Context& ctx, std::string& summary)
{
    const ExperimentConfig& c = ctx.config;
    const FixedPointReport rep = converged_solution(ctx);
    ChaosOptions opts;
    opts.dt = c.grids.dt;
    opts.bridge_correction = c.simulate.bridge;
    opts.frozen = c.study.frozen;
    const ChaosTable table = chaos_study(truncate_model(ctx.model, rep.final_level), rep.final_policy,
                                         rep.final_flow, c.study.n_list, c.simulate.replications, c.seed, opts);
    ctx.out.add("chaos.csv", chaos_csv(table));
    json s = {{"fixed_point", fixed_point_summary(rep)}};
    json extinct = json::array();
    for (const ChaosRow& r : table)
        extinct.push_back({{"N", r.N}, {"extinct_replications", r.extinct}, {"loss_sup_gap_mean", r.loss_sup_gap_mean}});
    s["rows"] = extinct;
    summary = "chaos-study: " + std::to_string(table.size()) + " rows";
    if (table.size() >= 3) {
        const RateFit fit = fit_rate(table);
        s["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
        summary += ", log-log slope " + format_double(fit.slope);
    }
    ctx.out.add("summary.json", dump(s));
    return 0;
}

int cmd_nash(Context& ctx, std::string& summary)
{
    const ExperimentConfig& c = ctx.config;
    const FixedPointReport rep = converged_solution(ctx);
    NashGapOptions opts;
    opts.dt = c.grids.dt;
    opts.bridge_correction = c.simulate.bridge;
    opts.pilot_particles = c.study.pilot_particles;
    std::vector<NashGapRow> rows;
    for (std::size_t n : c.study.n_list)
        rows.push_back(nash_gap(ctx.model, rep, n, c.simulate.replications, ctx.grid, mix_seed(c.seed, n), opts));
    ctx.out.add("nash_gap.csv", nash_gap_csv(rows));
    ctx.out.add("summary.json", dump({{"fixed_point", fixed_point_summary(rep)}}));
    summary = "nash-gap: " + std::to_string(rows.size()) + " rows";
    return 0;
}

struct CheckRow {
    std::string name;
    std::string anchor;
    double value;
    double limit;
    bool passed;
};

int cmd_validate(Context& ctx, std::string& summary)
{
    const ExperimentConfig& c = ctx.config;
    const ModelSpec& model = ctx.model;
    std::vector<CheckRow> checks;

    const AssumptionReport ar = check_assumptions(model, c.study.probe_count, c.seed);
    for (const AssumptionCheck& a : ar.checks)
        checks.push_back({"assumption: " + a.name, a.anchor, a.worst_ratio,
                          a.name.find("lipschitz") != std::string::npos ? 1.05 : (a.name.find("growth") != std::string::npos ? 1.0 : 0.0),
                          a.passed});

    const SubProbFlow flow = uncontrolled_flow(model, ctx.grid);
    double balance = 0.0;
    for (std::size_t k = 0; k < ctx.grid.time_points(); ++k)
        balance = std::max(balance, std::abs(flow.survivor_mass[k] + flow.boundary_loss[k] - 1.0));
    const double balance_tol = 1e-10 * static_cast<double>(ctx.grid.time_steps);
    checks.push_back({"mass balance", "killed Fokker-Planck flow: survivor mass + absorbed flux = 1", balance,
                      balance_tol, balance <= balance_tol});

    const ExitPositivity ep = exit_positivity_check(flow);
    checks.push_back({"exit positivity", "survival probability positive at every time",
                      flow.survivor_mass.back(), 0.0, ep.passed});

    const FeedbackPolicy zero(ctx.grid, model.actions(), model.actions().clamp(0.0));
    const MartingaleEstimate mg = martingale_check(model, zero, flow, c.study.mc_paths, c.seed, c.grids.dt);
    const double mg_dev = std::abs(mg.mean - 1.0);
    const double mg_tol = std::max(3.0 * mg.se, 1e-12);
    checks.push_back({"martingale mean one", "stochastic exponential of the drift has mean one (Benes condition)",
                      mg_dev, mg_tol, mg_dev <= mg_tol && mg.overflowed == 0});

    // Particle absorption against the closed form when the model is a killed
    // Brownian motion, otherwise against the killed Fokker-Planck flow.
    SubProbFlow quiet = SubProbFlow::zeros(ctx.grid);  // (l, m) ≡ 0, as in uncontrolled_flow
    std::fill(quiet.loss.begin(), quiet.loss.end(), 0.0);
    const EmpiricalRecord rec = simulate_frozen(model, zero, quiet, ctx.sim(c.study.mc_paths, c.seed));
    const double p_sim = loss_at(rec, rec.horizon);
    const InitialLaw& law = model.initial_law();
    const bool brownian = model.parameters().families.drift.family == "zero" &&
                          law.family == InitialLaw::Family::point_mass && model.actions().contains(0.0);
    double p_ref = flow.loss.back();
    std::string anchor = "particle absorption matches the killed Fokker-Planck loss";
    if (brownian) {
        const boost::math::normal_distribution<double> phi;
        p_ref = 2.0 * boost::math::cdf(phi, -(law.a - model.threshold()) / (model.sigma() * std::sqrt(model.horizon())));
        anchor = "reflection principle: P(tau <= T) = 2 Phi(-(x0 - threshold) / (sigma sqrt(T)))";
    }
    const double p_se = std::sqrt(std::max(p_ref * (1.0 - p_ref), 1e-12) / static_cast<double>(rec.particles));
    const double p_tol = 4.0 * p_se + 0.005;
    checks.push_back({"absorption probability", anchor, std::abs(p_sim - p_ref), p_tol, std::abs(p_sim - p_ref) <= p_tol});

    // Truncation beyond the coefficient range must leave the dynamics bitwise unchanged.
    const double range = coefficient_range(model, ctx.grid, -1.0, 1.0 + std::abs(model.weight(ctx.grid.x_hi)));
    const std::vector<int> alphas(c.study.alpha_list.begin(), c.study.alpha_list.end());
    const MomentReport mr = moment_check(model, TruncationSchedule({2.0 * range + 1.0, 4.0 * range + 2.0}), alphas, zero,
                                         c.study.mc_paths, c.seed, c.grids.dt);
    bool identical = true;
    const std::size_t per_level = alphas.size();
    for (std::size_t i = 0; i < per_level; ++i)
        identical = identical && mr.estimates[i].mean == mr.estimates[i + per_level].mean;
    checks.push_back({"moment bounds saturate", "sup-norm moments uniform in the truncation level",
                      mr.max_over_levels(alphas.back()), 0.0, identical});

    json list = json::array();
    std::size_t failed = 0;
    for (const CheckRow& r : checks) {
        list.push_back({{"name", r.name}, {"anchor", r.anchor}, {"value", r.value}, {"limit", r.limit}, {"passed", r.passed}});
        failed += r.passed ? 0 : 1;
    }
    ctx.out.add("validate.json", dump({{"checks", list}, {"all_passed", failed == 0}}));
    summary = "validate: " + std::to_string(checks.size() - failed) + "/" + std::to_string(checks.size()) + " checks passed";
    return failed == 0 ? 0 : 1;
}

}  // namespace

std::vector<std::string> subcommands()
{
    return {"solve-mfg", "simulate-nplayer", "chaos-study", "nash-gap", "validate"};
}

fs::path resolve_output_dir(const ExperimentConfig& config, const std::optional<fs::path>& override_dir)
{
    if (override_dir)
        return *override_dir;
    const fs::path dir(config.output.directory);
    if (const char* root = std::getenv(kOutputRootEnv); root && *root && dir.is_relative())
        return fs::path(root) / dir;
    return dir;
}

RunResult execute(const std::string& subcommand, const ExperimentConfig& config)
{
    RunResult result;
    Context ctx(config, result.artifacts);
    ctx.out.add("resolved_config.json", dump(to_json(config)));
    if (subcommand == "solve-mfg")
        result.exit_code = cmd_solve(ctx, result.summary);
    else if (subcommand == "simulate-nplayer")
        result.exit_code = cmd_simulate(ctx, result.summary);
    else if (subcommand == "chaos-study")
        result.exit_code = cmd_chaos(ctx, result.summary);
    else if (subcommand == "nash-gap")
        result.exit_code = cmd_nash(ctx, result.summary);
    else if (subcommand == "validate")
        result.exit_code = cmd_validate(ctx, result.summary);
    else
        throw ConfigError("unknown subcommand: " + subcommand);
    return result;
}

RunResult run(const std::string& subcommand, const ExperimentConfig& config, const fs::path& out_dir)
{
    RunResult result = execute(subcommand, config);
    result.artifacts.commit(out_dir);
    return result;
}

}  // namespace mfgabs::app
