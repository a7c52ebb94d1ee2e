#include "mfgabs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mfgabs/error.hpp"
#include "mfgabs/pde.hpp"
#include "mfgabs/rng.hpp"

namespace mfgabs {

namespace {

constexpr double kLogOverflow = 300.0;

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(std::span<const double> v)
{
    MeanSe r;
    if (v.empty())
        return r;
    const double n = static_cast<double>(v.size());
    r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() < 2)
        return r;
    double ss = 0.0;
    for (double x : v)
        ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (n - 1.0) / n);
    return r;
}

std::size_t steps_for(double horizon, double dt)
{
    SimConfig probe;
    probe.dt = dt;
    return probe.steps(horizon);
}

}  // namespace

CostEstimate estimate_cost(const ModelSpec& model, const PolicyProfile& policies, std::size_t player,
                           const SimConfig& sim, std::size_t replications)
{
    if (replications < 2)
        throw DomainError("estimate_cost: need at least 2 replications");
    if (player >= sim.particles)
        throw DomainError("estimate_cost: player index out of range");
    CostEstimate est;
    est.samples.resize(replications);
    SimConfig cfg = sim;
    cfg.store_full_paths = true;
    for (std::size_t r = 0; r < replications; ++r) {
        cfg.seed = mix_seed(sim.seed, r);
        const EmpiricalRecord rec = simulate_nplayer(model, policies, cfg);
        est.samples[r] = path_cost(rec, model, policies, player);
    }
    const MeanSe ms = mean_se(est.samples);
    est.mean = ms.mean;
    est.se = ms.se;
    return est;
}

NashGapRow nash_gap(const ModelSpec& model, const FixedPointReport& mfg, std::size_t N, std::size_t replications,
                    const Grid& hjb_grid, std::uint64_t seed, const NashGapOptions& options)
{
    if (!mfg.converged)
        throw DomainError("nash_gap: the MFG policy does not come from a converged fixed point");
    if (replications < 2)
        throw DomainError("nash_gap: need at least 2 replications");
    if (N < 2)
        throw DomainError("nash_gap: need at least 2 players");
    const ModelSpec game = truncate_model(model, mfg.final_level);
    const FeedbackPolicy& eq = mfg.final_policy;
    const std::size_t K = steps_for(game.horizon(), options.dt);

    // Pilot: mean (L, m) of the N−1 co-players, with player 0's own share removed.
    const std::size_t pilot_reps = std::max<std::size_t>(1, (options.pilot_particles + N - 1) / N);
    std::vector<double> co_loss(K + 1, 0.0);
    std::vector<double> co_mean(K + 1, 0.0);
    SimConfig pilot;
    pilot.particles = N;
    pilot.dt = options.dt;
    pilot.bridge_correction = options.bridge_correction;
    for (std::size_t r = 0; r < pilot_reps; ++r) {
        pilot.seed = mix_seed(mix_seed(seed, 0x9e3779b97f4a7c15ULL), r);
        const EmpiricalRecord rec = simulate_nplayer(game, PolicyProfile(eq), pilot);
        for (std::size_t k = 0; k <= K; ++k) {
            co_loss[k] += rec.loss_trace[k] - rec.own_loss_share[k];
            co_mean[k] += rec.mean_trace[k] - rec.own_mean_share[k];
        }
    }
    SubProbFlow pilot_flow = SubProbFlow::zeros(hjb_grid);
    for (std::size_t k = 0; k < hjb_grid.time_points(); ++k) {
        const double t = hjb_grid.t(k);
        const auto ks = std::min<std::size_t>(K, static_cast<std::size_t>(std::floor(t / options.dt + 1e-9)));
        pilot_flow.loss[k] = co_loss[ks] / static_cast<double>(pilot_reps);
        pilot_flow.mean[k] = co_mean[ks] / static_cast<double>(pilot_reps);
        pilot_flow.survivor_mass[k] = 1.0 - pilot_flow.loss[k];
    }
    HjbOptions hjb;
    hjb.own_weight = options.own_share ? 1.0 / static_cast<double>(N) : 0.0;
    const HjbSolution dev = solve_hjb(game, pilot_flow, hjb_grid, hjb);

    SimConfig sim;
    sim.particles = N;
    sim.dt = options.dt;
    sim.seed = seed;
    sim.bridge_correction = options.bridge_correction;
    const CostEstimate j_eq = estimate_cost(game, PolicyProfile(eq), 0, sim, replications);
    const CostEstimate j_dev = estimate_cost(game, PolicyProfile(eq, dev.policy), 0, sim, replications);

    std::vector<double> diff(replications);
    for (std::size_t r = 0; r < replications; ++r)
        diff[r] = j_eq.samples[r] - j_dev.samples[r];
    const MeanSe d = mean_se(diff);

    NashGapRow row;
    row.N = N;
    row.j_eq = j_eq.mean;
    row.j_eq_se = j_eq.se;
    row.j_dev = j_dev.mean;
    row.j_dev_se = j_dev.se;
    row.gap = d.mean;
    row.gap_se = d.se;
    return row;
}

ChaosTable chaos_study(const ModelSpec& model, const FeedbackPolicy& policy, const SubProbFlow& theta_star,
                       std::span<const std::size_t> n_list, std::size_t replications, std::uint64_t seed,
                       const ChaosOptions& options)
{
    if (replications < 1)
        throw DomainError("chaos_study: need at least 1 replication");
    if (n_list.empty())
        throw DomainError("chaos_study: empty N list");
    for (std::size_t i = 0; i < n_list.size(); ++i)
        if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1]))
            throw DomainError("chaos_study: N list must be positive and strictly increasing");
    const std::size_t K_flow = theta_star.grid.time_steps;
    if (theta_star.survivor_mass[K_flow] <= 0.0)
        throw DomainError("chaos_study: reference flow has no surviving mass at T");
    const double target_mass = theta_star.survivor_mass[K_flow];

    ChaosTable table;
    table.reserve(n_list.size());
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
        const std::size_t N = n_list[ni];
        ChaosRow row;
        row.N = N;
        row.replications = replications;
        std::vector<double> w1;
        std::vector<double> gap(replications);
        std::vector<double> loss_gap(replications);
        SimConfig cfg;
        cfg.particles = N;
        cfg.dt = options.dt;
        cfg.bridge_correction = options.bridge_correction;
        for (std::size_t r = 0; r < replications; ++r) {
            cfg.seed = mix_seed(mix_seed(seed, N), r);
            const EmpiricalRecord rec = options.frozen ? simulate_frozen(model, policy, theta_star, cfg)
                                                       : simulate_nplayer(model, PolicyProfile(policy), cfg);
            std::vector<double> survivors;
            const auto xs = rec.positions_at(rec.steps);
            for (std::size_t i = 0; i < N; ++i)
                if (rec.alive(i, rec.horizon))
                    survivors.push_back(xs[i]);
            std::sort(survivors.begin(), survivors.end());
            gap[r] = std::abs(static_cast<double>(survivors.size()) / static_cast<double>(N) - target_mass);
            double sup = 0.0;
            for (std::size_t k = 0; k <= rec.steps; ++k) {
                const double L = static_cast<double>(std::count_if(rec.tau.begin(), rec.tau.end(),
                                                                   [t = rec.time(k)](double tau) { return tau <= t; })) /
                                 static_cast<double>(N);
                sup = std::max(sup, std::abs(L - theta_star.loss[theta_star.grid.time_index(rec.time(k))]));
            }
            loss_gap[r] = sup;
            if (survivors.empty())
                ++row.extinct;
            else
                w1.push_back(wasserstein1_sample_to_flow(survivors, theta_star, K_flow));
        }
        const MeanSe w = mean_se(w1);
        row.w1_mean = w.mean;
        row.w1_se = w.se;
        row.mass_gap_mean = mean_se(gap).mean;
        row.loss_sup_gap_mean = mean_se(loss_gap).mean;
        table.push_back(row);
    }
    return table;
}

RateFit fit_rate(const ChaosTable& table)
{
    if (table.size() < 3)
        throw DomainError("fit_rate: need at least 3 rows");
    const double n = static_cast<double>(table.size());
    double sx = 0.0;
    double sy = 0.0;
    for (const ChaosRow& r : table) {
        if (r.N < 1 || !(r.w1_mean > 0.0))
            throw DomainError("fit_rate: N and mean W1 must be positive");
        sx += std::log(static_cast<double>(r.N));
        sy += std::log(r.w1_mean);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const ChaosRow& r : table) {
        const double dx = std::log(static_cast<double>(r.N)) - mx;
        const double dy = std::log(r.w1_mean) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0)
        throw DomainError("fit_rate: all rows share one N");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (const ChaosRow& r : table) {
        const double e = std::log(r.w1_mean) - (fit.intercept + fit.slope * std::log(static_cast<double>(r.N)));
        sse += e * e;
    }
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return fit;
}

MartingaleEstimate martingale_check(const ModelSpec& model, const FeedbackPolicy& policy, const SubProbFlow& flow,
                                    std::size_t n_paths, std::uint64_t seed, double dt)
{
    if (n_paths < 1000)
        throw DomainError("martingale_check: need at least 1000 paths");
    const std::size_t K = steps_for(model.horizon(), dt);
    const double sigma = model.sigma();
    const double sqdt = std::sqrt(dt);
    const StreamRng rng(seed);
    const std::vector<double> x0 = sample_initial(model, n_paths, seed);

    std::vector<double> z(n_paths);
    std::vector<std::uint8_t> flagged(n_paths, 0);
    const auto n_signed = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < n_signed; ++s) {
        const auto i = static_cast<std::size_t>(s);
        double x = x0[i];
        double log_z = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double t = static_cast<double>(k) * dt;
            const std::size_t kf = flow.grid.time_index(t);
            const double theta = (policy(t, x) + model.drift(t, x, flow.loss[kf], flow.mean[kf])) / sigma;
            const double dw = sqdt * rng.normal(i, k, StreamTag::increment);
            log_z += theta * dw - 0.5 * theta * theta * dt;
            x += sigma * dw;
        }
        if (std::abs(log_z) > kLogOverflow)
            flagged[i] = 1;
        else
            z[i] = std::exp(log_z);
    }
    MartingaleEstimate out;
    std::vector<double> kept;
    kept.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (flagged[i])
            ++out.overflowed;
        else
            kept.push_back(z[i]);
    }
    const MeanSe ms = mean_se(kept);
    out.mean = ms.mean;
    out.se = ms.se;
    return out;
}

double MomentReport::max_over_levels(int alpha) const
{
    double best = 0.0;
    for (const MomentEstimate& e : estimates)
        if (e.alpha == alpha)
            best = std::max(best, e.mean);
    return best;
}

double MomentReport::relative_spread(int alpha, double min_level) const
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const MomentEstimate& e : estimates) {
        if (e.alpha != alpha || e.level < min_level)
            continue;
        lo = std::min(lo, e.mean);
        hi = std::max(hi, e.mean);
    }
    if (!(hi > 0.0))
        return 0.0;
    return (hi - lo) / hi;
}

MomentReport moment_check(const ModelSpec& model, const TruncationSchedule& schedule, std::span<const int> alpha_list,
                          const FeedbackPolicy& policy, std::size_t n_paths, std::uint64_t seed, double dt)
{
    if (alpha_list.empty())
        throw DomainError("moment_check: empty alpha list");
    for (int a : alpha_list)
        if (a != 1 && a != 2 && a != 4)
            throw DomainError("moment_check: alpha must be 1, 2 or 4, got " + std::to_string(a));
    SimConfig cfg;
    cfg.particles = n_paths;
    cfg.dt = dt;
    cfg.seed = seed;
    MomentReport report;
    for (double level : schedule.levels()) {
        const ModelSpec truncated = truncate_model(model, level);
        const EmpiricalRecord rec = simulate_nplayer(truncated, PolicyProfile(policy), cfg);
        for (int a : alpha_list) {
            std::vector<double> v(rec.sup_abs.size());
            std::transform(rec.sup_abs.begin(), rec.sup_abs.end(), v.begin(),
                           [a](double s) { return std::pow(s, a); });
            const MeanSe ms = mean_se(v);
            report.estimates.push_back({level, a, ms.mean, ms.se});
        }
    }
    return report;
}

}  // namespace mfgabs
