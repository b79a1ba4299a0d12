/**
 * @file model.hpp
 * @brief Market, bubble and contract types shared by every pricing engine.
 *
 * The underlying follows dS = mu S dt + sigma S dW and the arbitrage bubble
 * df = mu_f dt + Gamma dW is driven by the same Brownian motion. The bubble
 * enters the pricing equation through the potential
 *
 *     v(f) = (r - mu) f / (sigma - f)
 *
 * and through the effective f-drift mu_f - (mu - r) Gamma / (sigma - f).
 * Both diverge at f = sigma; a band |sigma - f| <= eps is rejected.
 */
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bubble/errors.hpp"

namespace bubble {

struct MarketParams {
    double mu = 0.0;    ///< drift of the underlying (1/time)
    double sigma = 0.0; ///< volatility of the underlying (1/sqrt(time))
    double r = 0.0;     ///< risk-free rate (1/time)

    /// Throws DomainError unless all fields are finite and sigma > 0.
    void validate() const;
};

/// Default half-width of the singular band around f = sigma.
[[nodiscard]] double default_singular_band(const MarketParams& m) noexcept;

/// f(S, t) given explicitly.
struct DeterministicBubble {
    std::function<double(double S, double t)> f;
};

/// df = mu_f dt + Gamma dW with constant coefficients.
struct GaussianBubble {
    double mu_f = 0.0;
    double gamma = 0.0;
};

/// df = mu_f_bar f dt + Gamma_bar f dW.
struct LognormalBubble {
    double mu_f_bar = 0.0;
    double gamma_bar = 0.0;
};

/// State-dependent coefficients mu_f(S, f, t), Gamma(S, f, t).
struct GenericBubble {
    std::function<double(double S, double f, double t)> mu_f;
    std::function<double(double S, double f, double t)> gamma;
};

using BubbleModel = std::variant<DeterministicBubble, GaussianBubble, LognormalBubble, GenericBubble>;

enum class BubbleKind { Deterministic, Gaussian, Lognormal, Generic };

[[nodiscard]] BubbleKind kind_of(const BubbleModel& bubble) noexcept;
[[nodiscard]] std::string_view to_string(BubbleKind kind) noexcept;

/// Drift mu_f(S, f, t) of a stochastic bubble. Deterministic bubbles throw Unsupported.
[[nodiscard]] double bubble_drift(const BubbleModel& bubble, double S, double f, double t);

/// Volatility Gamma(S, f, t) of a stochastic bubble; throws DomainError if negative.
[[nodiscard]] double bubble_vol(const BubbleModel& bubble, double S, double f, double t);

/// Payoff Phi(S, f) at expiry. `kinks` lists S-locations where Phi is not smooth.
struct Payoff {
    std::function<double(double S, double f)> value;
    std::vector<double> kinks;
    std::string name;

    double operator()(double S, double f) const { return value(S, f); }
};

struct Contract {
    double expiry = 1.0;
    Payoff payoff;
    std::optional<double> strike; ///< K in the call payoff, E in the closed forms

    void validate() const;
};

[[nodiscard]] Payoff call_payoff(double strike);
[[nodiscard]] Payoff put_payoff(double strike);
/// Phi == 1 (zero-coupon claim).
[[nodiscard]] Payoff bond_payoff();
/// Phi(S, f) = S.
[[nodiscard]] Payoff underlying_payoff();

[[nodiscard]] Contract make_call(double strike, double expiry);

enum class RegimeTag { Weak, Strong, NegSigma, Full };

[[nodiscard]] std::string_view to_string(RegimeTag tag) noexcept;
/// Parses "weak", "strong", "negsigma", "full"; throws DomainError otherwise.
[[nodiscard]] RegimeTag parse_regime(std::string_view name);

/// Bounds on the dimensionless ratio f / sigma.
struct RegimeThresholds {
    double low = 0.05;
    double high = 10.0;
};

struct Regime {
    RegimeTag tag = RegimeTag::Full;
    RegimeThresholds thresholds;
};

/// v(f) = (r - mu) f / (sigma - f). Throws SingularBand if |sigma - f| <= band.
[[nodiscard]] double potential_v(double f, const MarketParams& m, double band);
[[nodiscard]] double potential_v(double f, const MarketParams& m);

/// mu_f(S,f,t) - (mu - r) Gamma(S,f,t) / (sigma - f): the coefficient of dV/df.
[[nodiscard]] double effective_f_drift(double S, double f, double t, const MarketParams& m,
                                       const BubbleModel& bubble, double band);
[[nodiscard]] double effective_f_drift(double S, double f, double t, const MarketParams& m,
                                       const BubbleModel& bubble);

/**
 * Weak if |f/sigma| <= low, Strong if f/sigma >= high, NegSigma if
 * |f/sigma + 1| <= low, Full otherwise. Requires sigma > 0.
 */
[[nodiscard]] Regime classify_regime(double f, double sigma, const RegimeThresholds& thresholds = {});

} // namespace bubble
