#include "mfgabs/pde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "mfgabs/error.hpp"

namespace mfgabs {

namespace {

constexpr std::size_t kCoarsePoints = 33;
constexpr double kGolden = 0.6180339887498949;

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[0]` and
/// `upper[n-1]` are ignored.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs, std::vector<double>& scratch)
{
    const std::size_t n = diag.size();
    scratch.resize(n);
    double denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] -= scratch[i] * rhs[i + 1];
}

void require_threshold_grid(const ModelSpec& model, const Grid& grid, const char* who)
{
    grid.validate();
    const double tol = 1e-12 * std::max(1.0, std::abs(model.threshold()));
    if (std::abs(grid.x_lo - model.threshold()) > tol)
        throw DomainError(std::string(who) + ": grid must start at the absorbing threshold");
    if (std::abs(grid.horizon - model.horizon()) > 1e-12 * model.horizon())
        throw DomainError(std::string(who) + ": grid horizon differs from the model horizon");
}

std::vector<double> central_slope(std::span<const double> v, double dx)
{
    const std::size_t n = v.size();
    std::vector<double> s(n);
    s[0] = (v[1] - v[0]) / dx;
    s[n - 1] = (v[n - 1] - v[n - 2]) / dx;
    for (std::size_t j = 1; j + 1 < n; ++j)
        s[j] = (v[j + 1] - v[j - 1]) / (2.0 * dx);
    return s;
}

}  // namespace

HamiltonianMin minimize_hamiltonian(const ModelSpec& model, double t, double x, double l, double m, double z)
{
    if (!std::isfinite(z))
        throw DomainError("minimize_hamiltonian: z must be finite");
    if (!(l >= 0.0 && l <= 1.0))
        throw DomainError("minimize_hamiltonian: loss outside [0, 1]");
    const ActionSet& G = model.actions();
    const double gain = z / model.sigma();
    const double fixed = model.state_cost(t, x, l, m) + gain * model.drift(t, x, l, m);
    // Only f₀ and the linear term vary with u.
    const auto h = [&](double u) { return model.control_cost(t, x, u) + gain * u; };

    std::array<double, kCoarsePoints> us{}, hs{};
    const double step = (G.hi - G.lo) / static_cast<double>(kCoarsePoints - 1);
    std::size_t best = 0;
    for (std::size_t i = 0; i < kCoarsePoints; ++i) {
        us[i] = i + 1 == kCoarsePoints ? G.hi : G.lo + step * static_cast<double>(i);
        hs[i] = h(us[i]);
        if (hs[i] < hs[best])
            best = i;
    }
    const double tie = 1e-12 * std::max(1.0, std::abs(hs[best]));
    std::size_t first = best, last = best;
    while (first > 0 && hs[first - 1] <= hs[best] + tie)
        --first;
    while (last + 1 < kCoarsePoints && hs[last + 1] <= hs[best] + tie)
        ++last;
    if (last > first) {
        const double mid = 0.5 * (us[first] + us[last]);
        return {mid, h(mid) + fixed, us[first], us[last]};
    }

    double a = us[best > 0 ? best - 1 : 0];
    double b = us[best + 1 < kCoarsePoints ? best + 1 : best];
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double hc = h(c), hd = h(d);
    while (b - a > 1e-10 * std::max(1.0, G.hi - G.lo)) {
        if (hc < hd) {
            b = d;
            d = c;
            hd = hc;
            c = b - kGolden * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + kGolden * (b - a);
            hd = h(d);
        }
    }
    double u = 0.5 * (a + b);
    double hu = h(u);
    // Boundary minimizers are returned exactly.
    for (const double edge : {us[best], G.lo, G.hi}) {
        const double he = h(edge);
        if (he <= hu) {
            u = edge;
            hu = he;
        }
    }
    return {u, hu + fixed, u, u};
}

HjbSolution solve_hjb(const ModelSpec& model, const SubProbFlow& flow, const Grid& grid, const HjbOptions& options)
{
    require_threshold_grid(model, grid, "solve_hjb");
    if (std::abs(flow.grid.horizon - grid.horizon) > 1e-12 * grid.horizon)
        throw DomainError("solve_hjb: flow and solver grids have different horizons");

    const std::size_t K = grid.time_steps;
    const std::size_t J = grid.state_cells;
    const std::size_t n = grid.state_points();
    const double dt = grid.dt();
    const double dx = grid.dx();
    const double sigma = model.sigma();
    const double a = 0.5 * sigma * sigma * dt / (dx * dx);

    ValueField vf{grid, std::vector<double>(grid.time_points() * n), std::vector<double>(grid.time_points() * n)};
    FeedbackPolicy policy(grid, model.actions(), model.actions().midpoint());

    std::vector<double> weight_at(n);
    for (std::size_t j = 0; j < n; ++j)
        weight_at[j] = options.own_weight != 0.0 ? options.own_weight * model.weight(grid.x(j)) : 0.0;

    const auto inputs = [&](std::size_t k) {
        const std::size_t kf = flow.grid.time_index(grid.t(k));
        return std::pair{std::clamp(flow.loss[kf], 0.0, 1.0), flow.mean[kf]};
    };

    double cost_scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        vf.values[K * n + j] = model.terminal_cost(grid.horizon, grid.x(j));
        cost_scale = std::max(cost_scale, std::abs(vf.values[K * n + j]));
    }

    std::vector<double> lower(J - 1, -a), diag(J - 1, 1.0 + 2.0 * a), upper(J - 1, -a), rhs(J - 1), scratch;
    double running_scale = 0.0;

    const auto optimise_row = [&](std::size_t k, std::span<const double> v, std::span<const double> slope,
                                  std::span<double> explicit_part) {
        const double t = grid.t(k);
        const auto [l, m_t] = inputs(k);
        for (std::size_t j = 1; j < n; ++j) {
            const double x = grid.x(j);
            const double m = m_t + weight_at[j];
            const HamiltonianMin hm = minimize_hamiltonian(model, t, x, l, m, sigma * slope[j]);
            const double u = hm.u_star;
            const double b = u + model.drift(t, x, l, m);
            const double f = model.control_cost(t, x, u) + model.state_cost(t, x, l, m);
            // Central differences while diffusion dominates the cell (Péclet ≤ 1), upwind otherwise.
            double d;
            if (j < J && std::abs(b) * dx <= sigma * sigma)
                d = (v[j + 1] - v[j - 1]) / (2.0 * dx);
            else if (b > 0.0 && j < J)
                d = (v[j + 1] - v[j]) / dx;
            else
                d = (v[j] - v[j - 1]) / dx;  // also the ghost-node forward difference at x_hi
            if (!explicit_part.empty())
                explicit_part[j] = f + b * d;
            running_scale = std::max(running_scale, std::abs(f));
            policy.set_node(k, j, u);
        }
        policy.set_node(k, 0, policy.node(k, 1));
    };

    std::vector<double> explicit_part(n);
    for (std::size_t k = K; k-- > 0;) {
        const std::span<const double> v_next(vf.values.data() + (k + 1) * n, n);
        const std::vector<double> s_next = central_slope(v_next, dx);
        std::copy(s_next.begin(), s_next.end(), vf.slope.begin() + static_cast<std::ptrdiff_t>((k + 1) * n));
        optimise_row(k, v_next, s_next, explicit_part);

        const double t = grid.t(k);
        std::span<double> v(vf.values.data() + k * n, n);
        v[0] = model.terminal_cost(t, grid.x(0));
        // Zero curvature at x_hi: the ghost node V_{J+1} = 2V_J − V_{J−1} removes diffusion there.
        v[J] = v_next[J] + dt * explicit_part[J];
        for (std::size_t j = 1; j < J; ++j)
            rhs[j - 1] = v_next[j] + dt * explicit_part[j];
        rhs[0] += a * v[0];
        rhs[J - 2] += a * v[J];
        solve_tridiagonal(lower, diag, upper, rhs, scratch);
        std::copy(rhs.begin(), rhs.end(), v.begin() + 1);

        const double limit = 10.0 * (1.0 + cost_scale + grid.horizon * running_scale);
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(v[j]) || std::abs(v[j]) > limit) {
                std::ostringstream os;
                os << "solve_hjb: value oscillation at t = " << t << ", x = " << grid.x(j) << " (|V| = " << v[j]
                   << " exceeds " << limit << "); reduce dt (dt = " << dt << ", dx = " << dx << ")";
                throw SolverError(os.str());
            }
        }
    }
    const std::span<const double> v0(vf.values.data(), n);
    const std::vector<double> s0 = central_slope(v0, dx);
    std::copy(s0.begin(), s0.end(), vf.slope.begin());

    // Terminal policy row from the terminal slope.
    const std::span<const double> vK(vf.values.data() + K * n, n);
    optimise_row(K, vK, std::span<const double>(vf.slope.data() + K * n, n), {});
    return {std::move(vf), std::move(policy)};
}

std::vector<double> project_initial_law(const ModelSpec& model, const Grid& grid)
{
    const InitialLaw& law = model.initial_law();
    const std::size_t J = grid.state_cells;
    const double dx = grid.dx();
    std::vector<double> mass(grid.state_points(), 0.0);

    if (law.family == InitialLaw::Family::point_mass) {
        const double s = std::clamp((law.a - grid.x_lo) / dx, 0.0, static_cast<double>(J));
        auto j = static_cast<std::size_t>(std::floor(s));
        const double w = s - static_cast<double>(j);
        if (j >= J) {
            mass[J] = 1.0;
        } else {
            mass[std::max<std::size_t>(j, 1)] += 1.0 - w;
            mass[j + 1] += w;
        }
    } else {
        std::function<double(double)> cdf;
        if (law.family == InitialLaw::Family::uniform) {
            cdf = [lo = law.a, hi = law.b](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); };
        } else {
            const boost::math::normal_distribution<double> phi(law.mean, law.sd);
            const double c_lo = boost::math::cdf(phi, law.a);
            const double c_hi = boost::math::cdf(phi, law.b);
            cdf = [phi, c_lo, c_hi, lo = law.a, hi = law.b](double x) {
                if (x <= lo)
                    return 0.0;
                if (x >= hi)
                    return 1.0;
                return (boost::math::cdf(phi, x) - c_lo) / (c_hi - c_lo);
            };
        }
        double prev = 0.0;  // everything below the first interior face goes to node 1
        for (std::size_t j = 1; j < J; ++j) {
            const double c = cdf(grid.x(j) + 0.5 * dx);
            mass[j] = c - prev;
            prev = c;
        }
        mass[J] = 1.0 - prev;
    }

    std::vector<double> density(grid.state_points(), 0.0);
    for (std::size_t j = 1; j <= J; ++j)
        density[j] = mass[j] / (j == J ? 0.5 * dx : dx);
    return density;
}

SubProbFlow solve_killed_fp(const ModelSpec& model, const FeedbackPolicy& policy, const Grid& grid,
                            const FpOptions& options)
{
    require_threshold_grid(model, grid, "solve_killed_fp");
    const std::size_t K = grid.time_steps;
    const std::size_t J = grid.state_cells;
    const std::size_t n = grid.state_points();
    const double dt = grid.dt();
    const double dx = grid.dx();
    const double diff = 0.5 * model.sigma() * model.sigma();
    const auto weight = [&model](double x) { return model.weight(x); };

    SubProbFlow flow = SubProbFlow::zeros(grid);
    flow.boundary_loss.assign(grid.time_points(), 0.0);
    {
        const auto rho0 = project_initial_law(model, grid);
        std::copy(rho0.begin(), rho0.end(), flow.row(0).begin());
    }

    // Unknowns ρ_1..ρ_J; volumes dx except the half cell at x_hi.
    std::vector<double> vol(n, dx);
    vol[0] = 0.0;
    vol[J] = 0.5 * dx;
    std::vector<double> lower(J), diag(J), upper(J), rhs(J), scratch, face_flux(J + 1);
    const double c = diff * dt / dx;
    for (std::size_t j = 1; j <= J; ++j) {
        const std::size_t r = j - 1;
        lower[r] = j > 1 ? -c : 0.0;
        upper[r] = j < J ? -c : 0.0;
        diag[r] = vol[j] + (j < J ? 2.0 * c : c);
    }

    double absorbed = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        flow.refresh_row(k, weight);
        const double t = grid.t(k);
        double l = flow.loss[k];
        double m = flow.mean[k];
        if (options.frozen_inputs) {
            const std::size_t kf = options.frozen_inputs->grid.time_index(t);
            l = options.frozen_inputs->loss[kf];
            m = options.frozen_inputs->mean[kf];
        }
        l = std::clamp(l, 0.0, 1.0);
        const auto rho = flow.row(k);
        if (flow.survivor_mass[k] > 0.0)
            flow.far_field_mass = std::max(flow.far_field_mass, rho[J] * vol[J] / flow.survivor_mass[k]);

        // Upwind advective flux through face j+½ (between nodes j and j+1); ρ_0 = 0, no flux past x_hi.
        for (std::size_t j = 0; j < J; ++j) {
            const double xf = grid.x(j) + 0.5 * dx;
            const double b = policy(t, xf) + model.drift(t, xf, l, m);
            face_flux[j] = b > 0.0 ? b * rho[j] : b * rho[j + 1];
        }
        face_flux[J] = 0.0;
        const double advected_out = -dt * face_flux[0];

        for (std::size_t j = 1; j <= J; ++j) {
            const double star = rho[j] * vol[j] - dt * (face_flux[j] - face_flux[j - 1]);
            if (star < -1e-12 * dx) {
                std::ostringstream os;
                os << "solve_killed_fp: negative density at t = " << t << ", x = " << grid.x(j)
                   << " after advection; reduce dt (CFL)";
                throw SolverError(os.str());
            }
            rhs[j - 1] = star;
        }
        solve_tridiagonal(lower, diag, upper, rhs, scratch);

        auto next = flow.row(k + 1);
        next[0] = 0.0;
        for (std::size_t j = 1; j <= J; ++j) {
            next[j] = rhs[j - 1];
            if (next[j] < -1e-12)
                throw SolverError("solve_killed_fp: negative density after the diffusion solve");
        }
        absorbed += advected_out + c * next[1];
        flow.boundary_loss[k + 1] = absorbed;
    }
    flow.refresh_row(K, weight);
    if (flow.survivor_mass[K] > 0.0)
        flow.far_field_mass =
            std::max(flow.far_field_mass, flow.row(K)[J] * vol[J] / flow.survivor_mass[K]);

    for (std::size_t k = 0; k <= K; ++k) {
        const double err = std::abs(flow.survivor_mass[k] + flow.boundary_loss[k] - 1.0);
        if (err > 1e-6) {
            std::ostringstream os;
            os << "solve_killed_fp: mass balance violated by " << err << " at t = " << grid.t(k);
            throw SolverError(os.str());
        }
    }
    return flow;
}

Grid default_grid(const ModelSpec& model, std::size_t time_steps, std::size_t state_cells, std::optional<double> x_hi)
{
    Grid g;
    g.horizon = model.horizon();
    g.time_steps = time_steps;
    g.x_lo = model.threshold();
    g.x_hi = x_hi.value_or(model.initial_law().upper() + 6.0 * model.sigma() * std::sqrt(model.horizon()));
    g.state_cells = state_cells;
    g.validate();
    return g;
}

}  // namespace mfgabs
