/**
 * @file closed_form.hpp
 * @brief Analytic pure-call prices in the asymptotic bubble regimes.
 *
 * Every regime reduces to the free equation
 *     -psi_tau + psi_xx / 2 + alpha_x psi_x + alpha_y psi_y = 0
 * whose call solution is
 *     psi = exp(sigma A tau + sigma^2 tau / 2) S N(d1) - E N(d2),  A = alpha_x + alpha_y
 *     d2  = (ln(S/E) + sigma A tau) / (sigma sqrt(tau)),  d1 = d2 + sigma sqrt(tau).
 * The option price is psi times the regime discount: exp(-r tau) (weak),
 * exp(-mu tau) (strong), exp(-(r + mu) tau / 2) (f ~ -sigma).
 */
#pragma once

#include "bubble/model.hpp"
#include "bubble/transforms.hpp"

namespace bubble {

struct AlphaPair {
    double alpha_x = 0.0;
    double alpha_y = 0.0;

    [[nodiscard]] double sum() const noexcept { return alpha_x + alpha_y; }
};

/// Standard normal CDF.
[[nodiscard]] double norm_cdf(double z) noexcept;

/**
 * Drift constants of the asymptotic equation.
 *   Weak:     ( (r-mu)/2sigma, -(r-mu)/2sigma )
 *   Strong:   (-(r-mu)/2sigma, -(r-mu)/2sigma )
 *   NegSigma: ( 0,             -(r-mu)/2sigma )   Gaussian only
 * Throws Unsupported for Full, for NegSigma with a lognormal bubble, and for
 * kinds other than Gaussian/Lognormal.
 */
[[nodiscard]] AlphaPair alphas_for(RegimeTag regime, BubbleKind model, const MarketParams& m);

[[nodiscard]] double psi_call(double S, double strike, double sigma, double tau, double alpha_sum);

/// exp(-r tau), exp(-mu tau) or exp(-(r+mu) tau/2); throws Unsupported for Full.
[[nodiscard]] double regime_discount(RegimeTag regime, double tau, const MarketParams& m);

/**
 * Pure-call price in an asymptotic regime. The value does not depend on f.
 * With Chart::Moving the formula is evaluated at S exp((r - sigma^2/2) tau),
 * which turns it into the textbook Black-Scholes price at the regime rate.
 */
[[nodiscard]] double price_call(RegimeTag regime, BubbleKind model, double S, double f, double tau,
                                const MarketParams& m, double strike, Chart chart = Chart::Frozen);

/// Unit claim (Phi == 1): the regime discount factor.
[[nodiscard]] double price_bond(RegimeTag regime, double tau, const MarketParams& m);

/// Textbook Black-Scholes call; sigma == 0 gives the discounted forward intrinsic value.
[[nodiscard]] double bs_reference(double S, double strike, double tau, double rate, double sigma);

} // namespace bubble
