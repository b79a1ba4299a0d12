#include "bubble/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bubble {

double norm_cdf(double z) noexcept {
    // erfc keeps full relative accuracy in the lower tail.
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

AlphaPair alphas_for(RegimeTag regime, BubbleKind model, const MarketParams& m) {
    if (model != BubbleKind::Gaussian && model != BubbleKind::Lognormal) {
        throw Unsupported("closed forms exist only for Gaussian and lognormal bubbles");
    }
    const double a = (m.r - m.mu) / (2.0 * m.sigma);
    switch (regime) {
    case RegimeTag::Weak: return AlphaPair{a, -a};
    case RegimeTag::Strong: return AlphaPair{-a, -a};
    case RegimeTag::NegSigma:
        if (model == BubbleKind::Lognormal) {
            throw Unsupported("a lognormal bubble never reaches f/sigma = -1");
        }
        return AlphaPair{0.0, -a};
    case RegimeTag::Full: break;
    }
    throw Unsupported("the full regime has no closed form");
}

double psi_call(double S, double strike, double sigma, double tau, double alpha_sum) {
    if (tau <= 0.0) {
        return std::max(S - strike, 0.0);
    }
    if (S <= 0.0) {
        return 0.0;
    }
    const double sd = sigma * std::sqrt(tau);
    const double shift = sigma * alpha_sum * tau;
    const double d2 = (std::log(S / strike) + shift) / sd;
    const double d1 = d2 + sd;
    return std::exp(shift + 0.5 * sd * sd) * S * norm_cdf(d1) - strike * norm_cdf(d2);
}

double regime_discount(RegimeTag regime, double tau, const MarketParams& m) {
    switch (regime) {
    case RegimeTag::Weak: return std::exp(-m.r * tau);
    case RegimeTag::Strong: return std::exp(-m.mu * tau);
    case RegimeTag::NegSigma: return std::exp(-0.5 * (m.r + m.mu) * tau);
    case RegimeTag::Full: break;
    }
    throw Unsupported("the full regime has no closed-form discount");
}

double price_call(RegimeTag regime, BubbleKind model, double S, double /*f*/, double tau, const MarketParams& m,
                  double strike, Chart chart) {
    const AlphaPair alphas = alphas_for(regime, model, m);
    const double discount = regime_discount(regime, tau, m);
    double S_eval = S;
    if (chart == Chart::Moving) {
        S_eval = S * std::exp((m.r - 0.5 * m.sigma * m.sigma) * tau);
    }
    return discount * psi_call(S_eval, strike, m.sigma, tau, alphas.sum());
}

double price_bond(RegimeTag regime, double tau, const MarketParams& m) { return regime_discount(regime, tau, m); }

double bs_reference(double S, double strike, double tau, double rate, double sigma) {
    if (tau <= 0.0) {
        return std::max(S - strike, 0.0);
    }
    const double discounted_strike = strike * std::exp(-rate * tau);
    if (sigma <= 0.0) {
        return std::max(S - discounted_strike, 0.0);
    }
    if (S <= 0.0) {
        return 0.0;
    }
    const double sd = sigma * std::sqrt(tau);
    const double d1 = (std::log(S / strike) + (rate + 0.5 * sigma * sigma) * tau) / sd;
    return S * norm_cdf(d1) - discounted_strike * norm_cdf(d1 - sd);
}

} // namespace bubble
