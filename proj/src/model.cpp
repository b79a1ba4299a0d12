#include "bubble/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bubble {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool finite(double x) { return std::isfinite(x); }

} // namespace

void MarketParams::validate() const {
    if (!finite(mu) || !finite(sigma) || !finite(r)) {
        throw DomainError("market parameters must be finite");
    }
    if (!(sigma > 0.0)) {
        throw DomainError("sigma must be positive");
    }
}

double default_singular_band(const MarketParams& m) noexcept { return 1e-3 * std::abs(m.sigma); }

BubbleKind kind_of(const BubbleModel& bubble) noexcept {
    return std::visit(overloaded{
                          [](const DeterministicBubble&) { return BubbleKind::Deterministic; },
                          [](const GaussianBubble&) { return BubbleKind::Gaussian; },
                          [](const LognormalBubble&) { return BubbleKind::Lognormal; },
                          [](const GenericBubble&) { return BubbleKind::Generic; },
                      },
                      bubble);
}

std::string_view to_string(BubbleKind kind) noexcept {
    switch (kind) {
    case BubbleKind::Deterministic: return "deterministic";
    case BubbleKind::Gaussian: return "gaussian";
    case BubbleKind::Lognormal: return "lognormal";
    case BubbleKind::Generic: return "generic";
    }
    return "unknown";
}

double bubble_drift(const BubbleModel& bubble, double S, double f, double t) {
    return std::visit(overloaded{
                          [](const DeterministicBubble&) -> double {
                              throw Unsupported("a deterministic bubble has no stochastic drift");
                          },
                          [](const GaussianBubble& b) { return b.mu_f; },
                          [f](const LognormalBubble& b) { return b.mu_f_bar * f; },
                          [&](const GenericBubble& b) { return b.mu_f(S, f, t); },
                      },
                      bubble);
}

double bubble_vol(const BubbleModel& bubble, double S, double f, double t) {
    const double g = std::visit(overloaded{
                                    [](const DeterministicBubble&) { return 0.0; },
                                    [](const GaussianBubble& b) { return b.gamma; },
                                    [f](const LognormalBubble& b) { return b.gamma_bar * f; },
                                    [&](const GenericBubble& b) { return b.gamma(S, f, t); },
                                },
                                bubble);
    if (g < 0.0) {
        throw DomainError("bubble volatility Gamma must be non-negative");
    }
    return g;
}

void Contract::validate() const {
    if (!(expiry > 0.0) || !std::isfinite(expiry)) {
        throw DomainError("contract expiry must be positive");
    }
    if (!payoff.value) {
        throw DomainError("contract has no payoff");
    }
}

Payoff call_payoff(double strike) {
    return Payoff{[strike](double S, double) { return std::max(S - strike, 0.0); }, {strike}, "call"};
}

Payoff put_payoff(double strike) {
    return Payoff{[strike](double S, double) { return std::max(strike - S, 0.0); }, {strike}, "put"};
}

Payoff bond_payoff() {
    return Payoff{[](double, double) { return 1.0; }, {}, "bond"};
}

Payoff underlying_payoff() {
    return Payoff{[](double S, double) { return S; }, {}, "underlying"};
}

Contract make_call(double strike, double expiry) {
    return Contract{expiry, call_payoff(strike), strike};
}

std::string_view to_string(RegimeTag tag) noexcept {
    switch (tag) {
    case RegimeTag::Weak: return "weak";
    case RegimeTag::Strong: return "strong";
    case RegimeTag::NegSigma: return "negsigma";
    case RegimeTag::Full: return "full";
    }
    return "unknown";
}

RegimeTag parse_regime(std::string_view name) {
    if (name == "weak") return RegimeTag::Weak;
    if (name == "strong") return RegimeTag::Strong;
    if (name == "negsigma") return RegimeTag::NegSigma;
    if (name == "full") return RegimeTag::Full;
    throw DomainError("unknown regime '" + std::string(name) + "'");
}

double potential_v(double f, const MarketParams& m, double band) {
    const double gap = m.sigma - f;
    if (std::abs(gap) <= band) {
        std::ostringstream os;
        os << "f = " << f << " lies in the singular band around sigma = " << m.sigma;
        throw SingularBand(os.str());
    }
    return (m.r - m.mu) * f / gap;
}

double potential_v(double f, const MarketParams& m) { return potential_v(f, m, default_singular_band(m)); }

double effective_f_drift(double S, double f, double t, const MarketParams& m, const BubbleModel& bubble,
                         double band) {
    const double gap = m.sigma - f;
    if (std::abs(gap) <= band) {
        throw SingularBand("effective f-drift evaluated inside the singular band");
    }
    return bubble_drift(bubble, S, f, t) - (m.mu - m.r) * bubble_vol(bubble, S, f, t) / gap;
}

double effective_f_drift(double S, double f, double t, const MarketParams& m, const BubbleModel& bubble) {
    return effective_f_drift(S, f, t, m, bubble, default_singular_band(m));
}

Regime classify_regime(double f, double sigma, const RegimeThresholds& thresholds) {
    if (!(sigma > 0.0)) {
        throw DomainError("classify_regime requires sigma > 0");
    }
    const double ratio = f / sigma;
    RegimeTag tag = RegimeTag::Full;
    if (std::abs(ratio) <= thresholds.low) {
        tag = RegimeTag::Weak;
    } else if (ratio >= thresholds.high) {
        tag = RegimeTag::Strong;
    } else if (std::abs(ratio + 1.0) <= thresholds.low) {
        tag = RegimeTag::NegSigma;
    }
    return Regime{tag, thresholds};
}

} // namespace bubble
