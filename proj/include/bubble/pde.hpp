/**
 * @file pde.hpp
 * @brief Finite-difference solvers for the bubble pricing equations.
 *
 * In time-to-expiry tau = T - t the full two-factor equation reads
 *
 *   V_tau = 1/2 sigma^2 S^2 V_SS + 1/2 Gamma^2 V_ff + S sigma Gamma V_Sf
 *         + (r + v(f)) (S V_S - V) + (mu_f - (mu - r) Gamma / (sigma - f)) V_f
 *
 * with V(S, f, 0) = Phi(S, f). Setting Gamma = 0 and letting f follow
 * df/dt = mu_f gives the one-factor deterministic-bubble equation.
 *
 * Boundary closure on every axis end: linear extrapolation from the interior
 * (zero discrete second difference). The f-axis never has a node inside the
 * singular band |f - sigma| <= eps; if the band cuts the axis, the pieces on
 * either side are solved as independent sub-domains.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bubble/closed_form.hpp"
#include "bubble/model.hpp"

namespace bubble {

/// Log-spaced nodes on [lo, hi]; if `anchor` lies inside, the lattice is shifted so it is a node.
[[nodiscard]] std::vector<double> log_axis(double lo, double hi, std::size_t n,
                                           std::optional<double> anchor = std::nullopt);
/// Uniform nodes on [lo, hi], optionally shifted so `anchor` is a node.
[[nodiscard]] std::vector<double> linear_axis(double lo, double hi, std::size_t n,
                                              std::optional<double> anchor = std::nullopt);

struct Grid2D {
    std::vector<double> s; ///< ascending, positive
    std::vector<double> f; ///< ascending, no node inside the singular band
    std::size_t n_steps = 0;

    /// Drops f-nodes inside the band around m.sigma and checks the invariants.
    [[nodiscard]] static Grid2D make(std::vector<double> s, std::vector<double> f, std::size_t n_steps,
                                     const MarketParams& m, double band);
    [[nodiscard]] static Grid2D make(std::vector<double> s, std::vector<double> f, std::size_t n_steps,
                                     const MarketParams& m);

    /// Index ranges [first, last) of f-nodes forming band-free sub-domains.
    [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> f_subdomains(const MarketParams& m) const;
};

struct Grid1D {
    std::vector<double> s;
    std::size_t n_steps = 0;
};

/// Uniform chart grid for the asymptotic equation; `eta` labels the y-characteristics.
struct ChartGrid {
    std::vector<double> x;
    std::vector<double> eta;
    std::size_t n_steps = 0;
    double expiry = 1.0;
};

struct SchemeOptions {
    std::size_t damping_steps = 2;    ///< leading steps taken as two implicit half steps
    double theta = 1.0 / 3.0;         ///< Modified Craig-Sneyd parameter (2D only)
    double blowup_factor = 1e3;       ///< InstabilityDetected above this multiple of max |payoff|
    std::optional<double> band;       ///< singular-band half-width; default 1e-3 sigma
    std::size_t save_every = 1;       ///< keep every n-th time level (the last is always kept)
};

/**
 * S-range on which solutions are compared against oracles: [0.8 K, 1.25 K]
 * for a contract with strike K, else the middle half of the axis in ln S.
 */
[[nodiscard]] std::pair<double, double> interior_s_range(const std::vector<double>& s, std::optional<double> strike);

/// V(S_i, f_j, tau_k), stored S-outer, f-middle, tau-inner.
struct PriceSurface {
    std::vector<double> s, f, tau;
    std::vector<double> values;
    MarketParams params;
    BubbleModel bubble;
    Contract contract;
    std::string scheme;

    [[nodiscard]] std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return (i * f.size() + j) * tau.size() + k;
    }
    [[nodiscard]] double at(std::size_t i, std::size_t j, std::size_t k) const { return values[index(i, j, k)]; }

    /// Quadratic Lagrange interpolation in (S, f) on time level k; exact for V = S.
    [[nodiscard]] double interpolate(double S, double f, std::size_t k) const;

    /// CSV with header `S,f,tau,V`, 17 significant digits.
    void write_csv(std::ostream& os) const;
};

/// One-factor surface; the f column of its CSV is the bubble f(S, T - tau).
struct LineSurface {
    std::vector<double> s, tau;
    std::vector<double> values; ///< S-outer, tau-inner
    std::function<double(double, double)> bubble;
    double expiry = 1.0;

    [[nodiscard]] double at(std::size_t i, std::size_t k) const { return values[i * tau.size() + k]; }
    [[nodiscard]] double interpolate(double S, std::size_t k) const;
    void write_csv(std::ostream& os) const;
};

/// psi at chart point (x_i, eta_j - alpha_y tau_k, tau_k); stored x-outer, eta-middle, tau-inner.
struct ChartSurface {
    std::vector<double> x, eta, tau;
    std::vector<double> values;
    AlphaPair alphas;

    [[nodiscard]] double at(std::size_t i, std::size_t j, std::size_t k) const {
        return values[(i * eta.size() + j) * tau.size() + k];
    }
    [[nodiscard]] double y_at(std::size_t j, std::size_t k) const { return eta[j] - alphas.alpha_y * tau[k]; }
};

/// Solves the full stochastic-bubble equation backward from expiry.
[[nodiscard]] PriceSurface solve_full(const MarketParams& m, const BubbleModel& bubble, const Contract& contract,
                                      const Grid2D& grid, const SchemeOptions& options = {});

/// Solves V_tau = 1/2 sigma^2 S^2 V_SS + (r + v(f(S,t))) (S V_S - V).
[[nodiscard]] LineSurface solve_deterministic(const MarketParams& m, std::function<double(double S, double t)> f,
                                              const Contract& contract, const Grid1D& grid,
                                              const SchemeOptions& options = {});

/**
 * Solves psi_tau = 1/2 psi_xx + alpha_x psi_x + alpha_y psi_y from terminal
 * data psi(x, y, 0). The y-transport is integrated exactly along
 * characteristics; only the x-direction is discretized.
 */
[[nodiscard]] ChartSurface solve_asymptotic(const AlphaPair& alphas, std::function<double(double x, double y)> terminal,
                                            const ChartGrid& grid, const SchemeOptions& options = {});

struct ReductionReport {
    double max_rel_deviation = 0.0;
    double max_abs_deviation = 0.0;
    std::size_t nodes = 0;
};

/**
 * Solves the full equation with Gamma = 0 and the one-factor equation with f
 * carried along df/dt = mu_f from f0, and compares them at tau = T on the
 * S-nodes of the 2D grid inside interior_s_range (2D values read at f0 by
 * linear interpolation in f, 1D values by quadratic interpolation in S).
 * Relative deviations use max(|V_1D|, 1e-8 max|V_1D|) as denominator.
 */
[[nodiscard]] ReductionReport reduction_check_gamma0(const MarketParams& m, const GaussianBubble& bubble, double f0,
                                                     const Contract& contract, const Grid2D& grid2d,
                                                     const Grid1D& grid1d, const SchemeOptions& options = {});

} // namespace bubble
