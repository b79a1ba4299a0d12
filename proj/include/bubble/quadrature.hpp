/**
 * @file quadrature.hpp
 * @brief Propagator convolution for arbitrary payoffs in the asymptotic regimes.
 *
 * The propagator of the free asymptotic equation is a heat kernel in x times
 * delta(y + alpha_y tau). Integrating the delta out analytically leaves a
 * one-dimensional convolution in u' = ln S':
 *
 *   psi(S, f, tau) = int N(u'; ln S + (alpha_x + alpha_y) sigma tau, sigma^2 tau)
 *                        Phi(exp(u'), f0(S, S', f, tau)) du'
 *
 * with f0 from f0_gaussian / f0_lognormal. The price is psi times the regime
 * discount used by price_call.
 */
#pragma once

#include "bubble/closed_form.hpp"
#include "bubble/model.hpp"

namespace bubble {

struct QuadratureSpec {
    double half_width = 10.0; ///< initial domain half-width in units of sigma sqrt(tau)
    double rel_tol = 1e-8;
    int base_panels = 16;
    int max_depth = 20;

    /// half_width >= 6 and rel_tol in (0, 1e-4].
    void validate() const;
};

/// Gaussian factor of the propagator and the argument of its delta factor.
struct PropagatorValue {
    double density = 0.0;  ///< (2 pi tau)^(-1/2) exp(-(x + alpha_x tau)^2 / (2 tau))
    double y_offset = 0.0; ///< y + alpha_y tau; the propagator is supported where this vanishes
};

[[nodiscard]] PropagatorValue propagator(double x, double y, double tau, const AlphaPair& alphas);

/**
 * Price of `payoff` in `regime` by quadrature of the collapsed propagator.
 * The bubble must be Gaussian or lognormal. tau == 0 returns the payoff.
 * Throws NonIntegrablePayoff if the payoff grows faster than linearly.
 */
[[nodiscard]] double price_generic(RegimeTag regime, const BubbleModel& bubble, double S, double f, double tau,
                                   const MarketParams& m, const Payoff& payoff, const QuadratureSpec& spec = {});

} // namespace bubble
