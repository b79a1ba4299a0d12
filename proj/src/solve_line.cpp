#include <algorithm>
#include <cmath>

#include "bubble/pde.hpp"
#include "fd.hpp"

namespace bubble {

namespace {

/// One theta-step of u_tau = A u on a line: (I - w dt A) u' = (I + (1 - w) dt A) u.
void theta_step(std::span<const fd::Row3> rows, const fd::EndClosure& closure, double dt, double w,
                std::vector<double>& u, std::vector<double>& rhs, fd::LineWorkspace& ws) {
    rhs.resize(u.size());
    fd::apply_line(rows, u, rhs);
    for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = u[i] + (1.0 - w) * dt * rhs[i];
    fd::solve_implicit_line(rows, w * dt, closure, rhs, u, ws);
}

std::vector<std::size_t> saved_levels(std::size_t n_steps, std::size_t every) {
    if (every < 1) throw DomainError("save_every must be >= 1");
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n <= n_steps; ++n) {
        if (n % every == 0 || n == n_steps) out.push_back(n);
    }
    return out;
}

void check_bound(const std::vector<double>& u, double bound, double factor, double tau) {
    for (double x : u) {
        if (!std::isfinite(x) || std::abs(x) > factor * bound) {
            throw InstabilityDetected("solution exceeded the payoff bound at tau = " + std::to_string(tau));
        }
    }
}

} // namespace

LineSurface solve_deterministic(const MarketParams& m, std::function<double(double S, double t)> f,
                                const Contract& contract, const Grid1D& grid, const SchemeOptions& options) {
    m.validate();
    contract.validate();
    if (!f) throw DomainError("bubble function is empty");
    const std::size_t ns = grid.s.size();
    if (ns < 16 || !(grid.s.front() > 0.0)) throw DomainError("S axis needs at least 16 positive nodes");
    if (grid.n_steps < 1) throw DomainError("grid needs at least one time step");
    const double band = options.band.value_or(default_singular_band(m));
    const double T = contract.expiry;
    const double dt = T / static_cast<double>(grid.n_steps);
    const auto saved = saved_levels(grid.n_steps, options.save_every);

    LineSurface out;
    out.s = grid.s;
    out.bubble = f;
    out.expiry = T;
    for (std::size_t n : saved) out.tau.push_back(static_cast<double>(n) * dt);
    out.values.assign(ns * saved.size(), 0.0);

    std::vector<double> u(ns);
    double bound = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
        u[i] = contract.payoff(grid.s[i], f(grid.s[i], T));
        bound = std::max(bound, std::abs(u[i]));
    }
    std::size_t level = 0;
    auto store = [&](std::size_t n) {
        if (level < saved.size() && saved[level] == n) {
            for (std::size_t i = 0; i < ns; ++i) out.values[i * saved.size() + level] = u[i];
            ++level;
        }
    };
    store(0);

    const auto closure = fd::EndClosure::for_axis(grid.s);
    const double half_var = 0.5 * m.sigma * m.sigma;
    std::vector<fd::Row3> rows(ns);
    auto assemble = [&](double t) {
        for (std::size_t i = 1; i + 1 < ns; ++i) {
            const double S = grid.s[i];
            const double rate = m.r + potential_v(f(S, t), m, band);
            rows[i] = fd::convection_diffusion_row(half_var * S * S, rate * S, -rate, S - grid.s[i - 1],
                                                   grid.s[i + 1] - S);
        }
    };

    std::vector<double> rhs;
    fd::LineWorkspace ws;
    for (std::size_t n = 0; n < grid.n_steps; ++n) {
        const double tau0 = static_cast<double>(n) * dt;
        if (n < options.damping_steps) {
            assemble(T - tau0 - 0.25 * dt);
            theta_step(rows, closure, 0.5 * dt, 1.0, u, rhs, ws);
            assemble(T - tau0 - 0.75 * dt);
            theta_step(rows, closure, 0.5 * dt, 1.0, u, rhs, ws);
        } else {
            assemble(T - tau0 - 0.5 * dt);
            theta_step(rows, closure, dt, 0.5, u, rhs, ws);
        }
        check_bound(u, bound, options.blowup_factor, tau0 + dt);
        store(n + 1);
    }
    return out;
}

ChartSurface solve_asymptotic(const AlphaPair& alphas, std::function<double(double x, double y)> terminal,
                              const ChartGrid& grid, const SchemeOptions& options) {
    const std::size_t nx = grid.x.size();
    const std::size_t ne = grid.eta.size();
    if (nx < 16 || ne < 1) throw DomainError("chart grid needs at least 16 x-nodes and one eta-line");
    if (grid.n_steps < 1 || !(grid.expiry > 0.0)) throw DomainError("chart grid needs positive expiry and steps");
    if (!terminal) throw DomainError("terminal data is empty");
    const double dt = grid.expiry / static_cast<double>(grid.n_steps);
    const auto saved = saved_levels(grid.n_steps, options.save_every);

    ChartSurface out;
    out.x = grid.x;
    out.eta = grid.eta;
    out.alphas = alphas;
    for (std::size_t n : saved) out.tau.push_back(static_cast<double>(n) * dt);
    out.values.assign(nx * ne * saved.size(), 0.0);

    // Along y = eta - alpha_y tau the transport term drops out: psi_tau = 1/2 psi_xx + alpha_x psi_x.
    std::vector<fd::Row3> rows(nx);
    for (std::size_t i = 1; i + 1 < nx; ++i) {
        rows[i] = fd::convection_diffusion_row(0.5, alphas.alpha_x, 0.0, grid.x[i] - grid.x[i - 1],
                                               grid.x[i + 1] - grid.x[i]);
    }
    const auto closure = fd::EndClosure::for_axis(grid.x);

    std::vector<double> u(nx), rhs;
    fd::LineWorkspace ws;
    for (std::size_t j = 0; j < ne; ++j) {
        double bound = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            u[i] = terminal(grid.x[i], grid.eta[j]);
            bound = std::max(bound, std::abs(u[i]));
        }
        std::size_t level = 0;
        auto store = [&](std::size_t n) {
            if (level < saved.size() && saved[level] == n) {
                for (std::size_t i = 0; i < nx; ++i) out.values[(i * ne + j) * saved.size() + level] = u[i];
                ++level;
            }
        };
        store(0);
        for (std::size_t n = 0; n < grid.n_steps; ++n) {
            if (n < options.damping_steps) {
                theta_step(rows, closure, 0.5 * dt, 1.0, u, rhs, ws);
                theta_step(rows, closure, 0.5 * dt, 1.0, u, rhs, ws);
            } else {
                theta_step(rows, closure, dt, 0.5, u, rhs, ws);
            }
            check_bound(u, bound, options.blowup_factor, static_cast<double>(n + 1) * dt);
            store(n + 1);
        }
    }
    return out;
}

ReductionReport reduction_check_gamma0(const MarketParams& m, const GaussianBubble& bubble, double f0,
                                       const Contract& contract, const Grid2D& grid2d, const Grid1D& grid1d,
                                       const SchemeOptions& options) {
    if (bubble.gamma != 0.0) throw DomainError("reduction check requires Gamma = 0");
    const double T = contract.expiry;
    const double mu_f = bubble.mu_f;
    const PriceSurface full = solve_full(m, BubbleModel{bubble}, contract, grid2d, options);
    const LineSurface line =
        solve_deterministic(m, [=](double, double t) { return f0 + mu_f * t; }, contract, grid1d, options);

    const auto [s_lo, s_hi] = interior_s_range(grid2d.s, contract.strike);
    const std::size_t k2 = full.tau.size() - 1;
    const std::size_t k1 = line.tau.size() - 1;

    struct Pair {
        double v2, v1;
    };
    std::vector<Pair> pairs;
    const double fv = f0 + mu_f * (T - full.tau[k2]);
    const auto it = std::upper_bound(full.f.begin(), full.f.end(), fv);
    if (it == full.f.begin() || it == full.f.end()) throw DomainError("f(t) leaves the 2D f-grid");
    const std::size_t j = static_cast<std::size_t>(it - full.f.begin()) - 1;
    const double w = (fv - full.f[j]) / (full.f[j + 1] - full.f[j]);
    for (std::size_t i = 0; i < full.s.size(); ++i) {
        const double S = full.s[i];
        if (S < s_lo || S > s_hi) continue;
        const double v2 = (1.0 - w) * full.at(i, j, k2) + (w == 0.0 ? 0.0 : w * full.at(i, j + 1, k2));
        pairs.push_back({v2, line.interpolate(S, k1)});
    }
    if (pairs.empty()) throw DomainError("no 2D S-node lies in the comparison range");

    double scale = 0.0;
    for (const auto& p : pairs) scale = std::max(scale, std::abs(p.v1));
    ReductionReport report;
    report.nodes = pairs.size();
    for (const auto& p : pairs) {
        const double diff = std::abs(p.v2 - p.v1);
        report.max_abs_deviation = std::max(report.max_abs_deviation, diff);
        report.max_rel_deviation =
            std::max(report.max_rel_deviation, diff / std::max({std::abs(p.v1), 1e-8 * scale, 1e-300}));
    }
    return report;
}

} // namespace bubble
