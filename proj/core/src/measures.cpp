#include "mfgabs/measures.hpp"

#include <algorithm>
#include <cmath>

#include "mfgabs/error.hpp"

namespace mfgabs {

SubProbFlow SubProbFlow::zeros(const Grid& grid)
{
    grid.validate();
    SubProbFlow f;
    f.grid = grid;
    f.density.assign(grid.time_points() * grid.state_points(), 0.0);
    f.survivor_mass.assign(grid.time_points(), 0.0);
    f.loss.assign(grid.time_points(), 1.0);
    f.mean.assign(grid.time_points(), 0.0);
    return f;
}

std::span<double> SubProbFlow::row(std::size_t k)
{
    const std::size_t n = grid.state_points();
    return std::span<double>(density).subspan(k * n, n);
}

std::span<const double> SubProbFlow::row(std::size_t k) const
{
    const std::size_t n = grid.state_points();
    return std::span<const double>(density).subspan(k * n, n);
}

double SubProbFlow::node_volume(std::size_t j) const noexcept
{
    if (j == 0)
        return 0.0;
    return j == grid.state_cells ? 0.5 * grid.dx() : grid.dx();
}

void SubProbFlow::refresh_row(std::size_t k, const std::function<double(double)>& weight)
{
    auto r = row(k);
    r[0] = 0.0;
    double mass = 0.0;
    double m = 0.0;
    for (std::size_t j = 1; j < r.size(); ++j) {
        const double q = r[j] * node_volume(j);
        mass += q;
        m += weight(grid.x(j)) * q;
    }
    survivor_mass[k] = mass;
    loss[k] = 1.0 - mass;
    mean[k] = m;
}

void SubProbFlow::refresh_traces(const std::function<double(double)>& weight)
{
    for (std::size_t k = 0; k < grid.time_points(); ++k)
        refresh_row(k, weight);
}

bool EmpiricalRecord::has_step(std::size_t k) const noexcept
{
    return std::binary_search(stored_steps.begin(), stored_steps.end(), k);
}

std::span<const double> EmpiricalRecord::positions_at(std::size_t k) const
{
    const auto it = std::lower_bound(stored_steps.begin(), stored_steps.end(), k);
    if (it == stored_steps.end() || *it != k)
        throw DomainError("record: positions at step " + std::to_string(k) + " were not stored");
    const auto row = static_cast<std::size_t>(it - stored_steps.begin());
    return std::span<const double>(positions).subspan(row * particles, particles);
}

std::size_t EmpiricalRecord::step_of(double t) const
{
    if (!(t >= 0.0) || t > horizon * (1.0 + 1e-12))
        throw DomainError("record: time outside [0, T]");
    const double r = t / dt();
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-6)
        throw DomainError("record: time is not on the simulation grid");
    return static_cast<std::size_t>(k);
}

double loss_at(const EmpiricalRecord& record, double t)
{
    if (!(t >= 0.0) || t > record.horizon * (1.0 + 1e-12))
        throw DomainError("loss_at: time outside [0, T]");
    const auto dead = std::count_if(record.tau.begin(), record.tau.end(), [t](double tau) { return tau <= t; });
    return static_cast<double>(dead) / static_cast<double>(record.particles);
}

double mean_at(const EmpiricalRecord& record, const std::function<double(double)>& weight, double t)
{
    const auto x = record.positions_at(record.step_of(t));
    double sum = 0.0;
    for (std::size_t i = 0; i < record.particles; ++i)
        if (record.alive(i, t))
            sum += weight(x[i]);
    return sum / static_cast<double>(record.particles);
}

RecordFlow flow_from_record(const EmpiricalRecord& record, const Grid& grid,
                            const std::function<double(double)>& weight)
{
    grid.validate();
    if (record.steps % grid.time_steps != 0)
        throw DomainError("flow_from_record: grid time steps must divide the record's steps");
    if (std::abs(grid.horizon - record.horizon) > 1e-12 * record.horizon)
        throw DomainError("flow_from_record: horizons differ");
    const std::size_t stride = record.steps / grid.time_steps;
    RecordFlow out{SubProbFlow::zeros(grid), 0};
    SubProbFlow& flow = out.flow;
    const double inv_n = 1.0 / static_cast<double>(record.particles);
    const std::size_t J = grid.state_cells;
    const double dx = grid.dx();

    for (std::size_t k = 0; k < grid.time_points(); ++k) {
        const std::size_t step = k * stride;
        const double t = record.time(step);
        const auto x = record.positions_at(step);
        auto r = flow.row(k);
        std::size_t alive = 0;
        double m = 0.0;
        for (std::size_t i = 0; i < record.particles; ++i) {
            if (!record.alive(i, t))
                continue;
            ++alive;
            m += weight(x[i]);
            const double s = (x[i] - grid.x_lo) / dx;
            std::size_t j;
            if (s < 0.5) {
                j = 1;
                if (s < 0.0)
                    ++out.clipped;
            } else if (s >= static_cast<double>(J)) {
                j = J;
                if (s > static_cast<double>(J))
                    ++out.clipped;
            } else {
                j = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(s + 0.5)));
                j = std::min(j, J);
            }
            r[j] += inv_n / flow.node_volume(j);
        }
        // Exact survivor fraction and empirical mean, not re-summed from bins.
        flow.survivor_mass[k] = static_cast<double>(alive) * inv_n;
        flow.loss[k] = 1.0 - flow.survivor_mass[k];
        flow.mean[k] = m * inv_n;
    }
    return out;
}

namespace {

void require_sorted(std::span<const double> v, const char* what)
{
    if (v.empty())
        throw DomainError(std::string(what) + ": empty sample");
    if (!std::is_sorted(v.begin(), v.end()))
        throw DomainError(std::string(what) + ": sample must be sorted");
}

}  // namespace

SampleDistance wasserstein1_samples(std::span<const double> a, std::span<const double> b)
{
    require_sorted(a, "wasserstein1_samples");
    require_sorted(b, "wasserstein1_samples");
    if (a.size() == b.size()) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += std::abs(a[i] - b[i]);
        return {s / static_cast<double>(a.size()), false};
    }
    // ∫₀¹ |Q_a(p) − Q_b(p)| dp over the merged breakpoints of both quantile step functions.
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double p = 0.0, s = 0.0;
    while (i < a.size() && j < b.size()) {
        const double pa = static_cast<double>(i + 1) / na;
        const double pb = static_cast<double>(j + 1) / nb;
        const double next = std::min(pa, pb);
        s += (next - p) * std::abs(a[i] - b[j]);
        p = next;
        if (pa <= next)
            ++i;
        if (pb <= next)
            ++j;
    }
    return {s, true};
}

FlowDistance wasserstein1_flows(const SubProbFlow& a, const SubProbFlow& b, std::size_t k)
{
    if (!(a.grid == b.grid))
        throw DomainError("wasserstein1_flows: flows live on different grids");
    const std::size_t n = a.grid.state_points();
    double ma = 0.0, mb = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        ma += a.node_mass(k, j);
        mb += b.node_mass(k, j);
    }
    if (!(ma > 0.0) || !(mb > 0.0))
        throw DomainError("wasserstein1_flows: zero-mass row (extinct flow)");
    double ca = 0.0, cb = 0.0, w = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        ca += a.node_mass(k, j) / ma;
        cb += b.node_mass(k, j) / mb;
        w += std::abs(ca - cb);
    }
    return {w * a.grid.dx(), std::abs(a.survivor_mass[k] - b.survivor_mass[k])};
}

FlowDistance flow_gap(const SubProbFlow& a, const SubProbFlow& b, std::size_t k)
{
    const double gap = std::abs(a.survivor_mass[k] - b.survivor_mass[k]);
    if (!(a.survivor_mass[k] > 0.0) || !(b.survivor_mass[k] > 0.0))
        return {0.0, gap};
    return wasserstein1_flows(a, b, k);
}

double wasserstein1_sample_to_flow(std::span<const double> sample, const SubProbFlow& flow, std::size_t k)
{
    require_sorted(sample, "wasserstein1_sample_to_flow");
    const Grid& g = flow.grid;
    const std::size_t J = g.state_cells;
    const double dx = g.dx();

    // Faces e_0 < … < e_J bounding the control volumes of nodes 1..J.
    std::vector<double> faces(J + 1), cdf(J + 1, 0.0);
    for (std::size_t j = 0; j < J; ++j)
        faces[j] = g.x_lo + (static_cast<double>(j) + 0.5) * dx;
    faces[J] = g.x_hi;
    double total = 0.0;
    for (std::size_t j = 1; j <= J; ++j) {
        total += flow.node_mass(k, j);
        cdf[j] = total;
    }
    if (!(total > 0.0))
        throw DomainError("wasserstein1_sample_to_flow: zero-mass row");
    for (double& c : cdf)
        c /= total;

    const auto law_cdf = [&](double x) {
        if (x <= faces[0])
            return 0.0;
        if (x >= faces[J])
            return 1.0;
        const auto it = std::upper_bound(faces.begin(), faces.end(), x);
        const auto j = static_cast<std::size_t>(it - faces.begin());  // faces[j-1] ≤ x < faces[j]
        const double w = (x - faces[j - 1]) / (faces[j] - faces[j - 1]);
        return cdf[j - 1] + w * (cdf[j] - cdf[j - 1]);
    };
    // ∫ |c − (f0 + (f1 − f0)s)| over a segment of length h, s ∈ [0,1].
    const auto segment = [](double c, double f0, double f1, double h) {
        const double d0 = f0 - c, d1 = f1 - c;
        if (d0 * d1 >= 0.0)
            return 0.5 * std::abs(d0 + d1) * h;
        const double root = d0 / (d0 - d1);
        return 0.5 * h * (std::abs(d0) * root + std::abs(d1) * (1.0 - root));
    };

    std::vector<double> points(faces);
    points.insert(points.end(), sample.begin(), sample.end());
    std::sort(points.begin(), points.end());
    const double n = static_cast<double>(sample.size());
    std::size_t below = 0;  // samples ≤ left end of the current segment
    double w1 = 0.0;
    for (std::size_t s = 0; s + 1 < points.size(); ++s) {
        const double lo = points[s], hi = points[s + 1];
        while (below < sample.size() && sample[below] <= lo)
            ++below;
        if (hi > lo)
            w1 += segment(static_cast<double>(below) / n, law_cdf(lo), law_cdf(hi), hi - lo);
    }
    return w1;
}

double alpha_weighted_distance(std::span<const double> d, double alpha, double horizon)
{
    if (!(alpha > 0.0))
        throw DomainError("alpha_weighted_distance: alpha must be positive");
    if (d.size() < 2)
        throw DomainError("alpha_weighted_distance: need at least two time samples");
    const double h = horizon / static_cast<double>(d.size() - 1);
    double s = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double v = std::exp(-alpha * h * static_cast<double>(k)) * d[k] * d[k];
        s += (k == 0 || k + 1 == d.size()) ? 0.5 * v : v;
    }
    return std::sqrt(s * h);
}

}  // namespace mfgabs
