#include "mfgabs/particle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "mfgabs/error.hpp"
#include "mfgabs/rng.hpp"

namespace mfgabs {

namespace {

constexpr double kBlowupBound = 1e6;

/// Source of the mean-field inputs (L, m) at each step.
struct FrozenTraces {
    const SubProbFlow* flow;

    std::pair<double, double> at(double t) const
    {
        const std::size_t k = flow->grid.time_index(t);
        return {flow->loss[k], flow->mean[k]};
    }
};

EmpiricalRecord simulate(const ModelSpec& model, const PolicyProfile& policies, const SimConfig& config,
                         std::optional<FrozenTraces> frozen)
{
    const std::size_t K = config.steps(model.horizon());
    const std::size_t N = config.particles;
    const double dt = config.dt;
    const double sigma = model.sigma();
    const double threshold = model.threshold();
    const StreamRng rng(config.seed);

    ParticleEnsemble ens = ParticleEnsemble::start(sample_initial(model, N, config.seed));

    EmpiricalRecord rec;
    rec.particles = N;
    rec.horizon = model.horizon();
    rec.steps = K;
    rec.threshold = threshold;
    rec.seed = config.seed;
    rec.loss_trace.resize(K + 1);
    rec.mean_trace.resize(K + 1);
    rec.own_loss_share.resize(K + 1);
    rec.own_mean_share.resize(K + 1);
    rec.sup_abs.resize(N);
    for (std::size_t i = 0; i < N; ++i)
        rec.sup_abs[i] = std::abs(ens.positions[i]);
    if (config.store_full_paths) {
        rec.stored_steps.resize(K + 1);
        std::iota(rec.stored_steps.begin(), rec.stored_steps.end(), std::size_t{0});
        rec.positions.reserve((K + 1) * N);
    } else {
        rec.stored_steps = {0, K};
    }
    rec.positions.insert(rec.positions.end(), ens.positions.begin(), ens.positions.end());

    const double inv_n = 1.0 / static_cast<double>(N);
    const auto record_inputs = [&](std::size_t k, double t) {
        // Fixed-order serial reduction keeps the traces independent of the thread count.
        std::size_t dead = 0;
        double m = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            if (ens.alive[i])
                m += model.weight(ens.positions[i]);
            else
                ++dead;
        }
        rec.own_loss_share[k] = ens.alive[0] ? 0.0 : inv_n;
        rec.own_mean_share[k] = ens.alive[0] ? model.weight(ens.positions[0]) * inv_n : 0.0;
        if (frozen) {
            const auto [l, mf] = frozen->at(t);
            rec.loss_trace[k] = l;
            rec.mean_trace[k] = mf;
        } else {
            rec.loss_trace[k] = static_cast<double>(dead) * inv_n;
            rec.mean_trace[k] = m * inv_n;
        }
    };

    std::vector<double> noise(N);
    std::vector<double> previous(N);
    for (std::size_t k = 0; k < K; ++k) {
        const double t = rec.time(k);
        record_inputs(k, t);
        const auto n_signed = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t s = 0; s < n_signed; ++s) {
            const auto i = static_cast<std::size_t>(s);
            noise[i] = ens.alive[i] ? rng.normal(ens.streams[i], k, StreamTag::increment) : 0.0;
        }
        previous = ens.positions;
        euler_step(ens, model, policies, t, rec.loss_trace[k], rec.mean_trace[k], dt, noise);

#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t s = 0; s < n_signed; ++s) {
            const auto i = static_cast<std::size_t>(s);
            if (!ens.alive[i])
                continue;
            const double x = ens.positions[i];
            bool exited = x <= threshold;
            if (!exited && config.bridge_correction) {
                const double p = bridge_absorption_prob(previous[i], x, threshold, sigma, dt);
                exited = p > 0.0 && rng.uniform(ens.streams[i], k, StreamTag::bridge) < p;
            }
            if (exited) {
                ens.alive[i] = 0;
                ens.tau[i] = t;
                ens.positions[i] = threshold;
            }
            rec.sup_abs[i] = std::max(rec.sup_abs[i], std::abs(ens.positions[i]));
        }
        ens.step_index = k + 1;
        if (config.store_full_paths || k + 1 == K)
            rec.positions.insert(rec.positions.end(), ens.positions.begin(), ens.positions.end());
    }
    record_inputs(K, rec.horizon);
    rec.tau = std::move(ens.tau);
    return rec;
}

}  // namespace

std::size_t SimConfig::steps(double horizon) const
{
    if (particles < 1)
        throw ConfigError("simulation: need at least one particle");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ConfigError("simulation: dt must be positive");
    const double r = horizon / dt;
    const double k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > 1e-9 * std::max(1.0, r))
        throw ConfigError("simulation: T/dt must be an integer");
    return static_cast<std::size_t>(k);
}

ParticleEnsemble ParticleEnsemble::start(std::vector<double> initial)
{
    ParticleEnsemble e;
    const std::size_t n = initial.size();
    e.positions = std::move(initial);
    e.alive.assign(n, 1);
    e.tau.assign(n, EmpiricalRecord::alive_sentinel);
    e.streams.resize(n);
    std::iota(e.streams.begin(), e.streams.end(), std::uint64_t{0});
    return e;
}

void euler_step(ParticleEnsemble& ens, const ModelSpec& model, const PolicyProfile& policies, double t, double l,
                double m, double dt, std::span<const double> noise)
{
    if (noise.size() != ens.size())
        throw DomainError("euler_step: one noise draw per particle required");
    const double diffusion = model.sigma() * std::sqrt(dt);
    const auto n_signed = static_cast<std::ptrdiff_t>(ens.size());
    std::ptrdiff_t bad = -1;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < n_signed; ++s) {
        const auto i = static_cast<std::size_t>(s);
        if (!ens.alive[i])
            continue;
        const double x = ens.positions[i];
        const double u = policies[i](t, x);
        const double next = x + (u + model.drift(t, x, l, m)) * dt + diffusion * noise[i];
        ens.positions[i] = next;
        if (!std::isfinite(next) || std::abs(next) > kBlowupBound) {
#pragma omp critical
            if (bad < 0 || s < bad)
                bad = s;
        }
    }
    if (bad >= 0) {
        std::ostringstream os;
        os << "numerical blowup: particle " << bad << " reached " << ens.positions[static_cast<std::size_t>(bad)]
           << " at step " << ens.step_index << " (t = " << t << "); reduce dt or check the drift growth";
        throw NumericalBlowup(os.str(), static_cast<std::size_t>(bad), ens.step_index);
    }
}

double bridge_absorption_prob(double x_prev, double x_next, double threshold, double sigma, double dt)
{
    if (!(dt > 0.0) || !(sigma > 0.0))
        throw DomainError("bridge_absorption_prob: dt and sigma must be positive");
    if (x_next <= threshold || x_prev <= threshold)
        return 1.0;
    return std::exp(-2.0 * (x_prev - threshold) * (x_next - threshold) / (sigma * sigma * dt));
}

EmpiricalRecord simulate_nplayer(const ModelSpec& model, const PolicyProfile& policies, const SimConfig& config)
{
    return simulate(model, policies, config, std::nullopt);
}

EmpiricalRecord simulate_frozen(const ModelSpec& model, const FeedbackPolicy& policy, const SubProbFlow& frozen,
                                const SimConfig& config)
{
    if (std::abs(frozen.grid.horizon - model.horizon()) > 1e-12 * model.horizon())
        throw DomainError("simulate_frozen: flow horizon differs from the model horizon");
    if (frozen.loss.size() != frozen.grid.time_points() || frozen.mean.size() != frozen.grid.time_points())
        throw DomainError("simulate_frozen: flow traces are incomplete");
    return simulate(model, PolicyProfile(policy), config, FrozenTraces{&frozen});
}

double path_cost(const EmpiricalRecord& record, const ModelSpec& model, const PolicyProfile& policies,
                 std::size_t player)
{
    if (!record.full_paths())
        throw DomainError("path_cost: record does not store full paths");
    if (player >= record.particles)
        throw DomainError("path_cost: player index out of range");
    const FeedbackPolicy& policy = policies[player];
    const double dt = record.dt();
    const double tau = record.tau[player];
    const bool absorbed = tau <= record.horizon;
    const std::size_t last = absorbed ? record.step_of(tau) : record.steps;

    const auto integrand = [&](std::size_t k) {
        const double t = record.time(k);
        const double x = record.positions[k * record.particles + player];
        const double u = policy(t, x);
        return model.control_cost(t, x, u) + model.state_cost(t, x, record.loss_trace[k], record.mean_trace[k]);
    };
    double running = 0.0;
    double f_prev = integrand(0);
    for (std::size_t k = 0; k < last; ++k) {
        const double f_next = integrand(k + 1);
        running += 0.5 * (f_prev + f_next) * dt;
        f_prev = f_next;
    }
    const double t_end = absorbed ? tau : record.horizon;
    const double x_end = absorbed ? record.threshold : record.positions[record.steps * record.particles + player];
    return running + model.terminal_cost(t_end, x_end);
}

}  // namespace mfgabs
