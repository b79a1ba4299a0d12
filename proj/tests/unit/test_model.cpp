#include <doctest.h>

#include <limits>
#include <random>

#include "bubble/model.hpp"

using namespace bubble;

namespace {
const MarketParams fig1{0.8, 0.4, 0.2};
}

TEST_CASE("potential v(f)") {
    CHECK(potential_v(0.0, fig1) == 0.0);
    CHECK(potential_v(0.0, MarketParams{0.1, 1.3, 0.05}) == 0.0);
    CHECK(potential_v(0.2, fig1) == doctest::Approx(-0.6).epsilon(1e-15));
    CHECK_THROWS_AS((void)potential_v(0.4, fig1), SingularBand);
    CHECK_THROWS_AS((void)potential_v(0.4 + 0.9e-3 * 0.4, fig1), SingularBand);
    CHECK_NOTHROW((void)potential_v(0.4 + 1.1e-3 * 0.4, fig1));
}

TEST_CASE("potential tends to mu - r for large f") {
    for (double ratio : {101.0, 1e3, 1e5}) {
        const double f = ratio * fig1.sigma;
        const double v = potential_v(f, fig1);
        CHECK(std::abs(v - (fig1.mu - fig1.r)) < 10.0 * fig1.sigma * std::abs(fig1.r - fig1.mu) / f);
    }
}

TEST_CASE("potential identity v (sigma - f) = (r - mu) f") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> uf(-5.0, 5.0), us(0.05, 1.0), ur(0.0, 1.0);
    for (int n = 0; n < 2000; ++n) {
        const MarketParams m{ur(gen), us(gen), ur(gen)};
        const double f = uf(gen);
        if (std::abs(f - m.sigma) <= default_singular_band(m)) continue;
        const double lhs = potential_v(f, m) * (m.sigma - f);
        const double rhs = (m.r - m.mu) * f;
        CHECK(std::abs(lhs - rhs) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("effective f drift") {
    CHECK(effective_f_drift(10.0, 0.2, 0.0, fig1, GaussianBubble{0.3, 0.0}) == 0.3);
    CHECK(effective_f_drift(10.0, 0.2, 0.0, MarketParams{0.2, 0.4, 0.2}, GaussianBubble{0.3, 0.1}) == 0.3);
    CHECK(effective_f_drift(10.0, 0.2, 0.0, fig1, GaussianBubble{0.0, 0.1}) == doctest::Approx(-0.3).epsilon(1e-14));
    CHECK_THROWS_AS((void)effective_f_drift(10.0, 0.4, 0.0, fig1, GaussianBubble{0.0, 0.1}), SingularBand);
    // Lognormal coefficients scale with f.
    CHECK(effective_f_drift(1.0, 0.2, 0.0, fig1, LognormalBubble{0.5, 0.5}) ==
          doctest::Approx(0.1 - 0.6 * 0.1 / 0.2).epsilon(1e-14));
}

TEST_CASE("bubble coefficients") {
    const BubbleModel det = DeterministicBubble{[](double, double) { return 0.1; }};
    CHECK_THROWS_AS((void)bubble_drift(det, 1.0, 0.1, 0.0), Unsupported);
    const BubbleModel gen = GenericBubble{[](double S, double, double) { return S; },
                                          [](double, double f, double) { return -f; }};
    CHECK(bubble_drift(gen, 2.0, 0.1, 0.0) == 2.0);
    CHECK_THROWS_AS((void)bubble_vol(gen, 2.0, 0.1, 0.0), DomainError);
    CHECK(kind_of(gen) == BubbleKind::Generic);
}

TEST_CASE("regime classification") {
    CHECK(classify_regime(0.001, 0.4).tag == RegimeTag::Weak);
    CHECK(classify_regime(40.0, 0.4).tag == RegimeTag::Strong);
    CHECK(classify_regime(-0.41, 0.4).tag == RegimeTag::NegSigma);
    CHECK(classify_regime(0.2, 0.4).tag == RegimeTag::Full);
    CHECK(classify_regime(0.02, 0.4).tag == RegimeTag::Weak);
    CHECK(classify_regime(0.03, 0.4, RegimeThresholds{0.01, 10.0}).tag == RegimeTag::Full);
    for (int n = 0; n < 10; ++n) CHECK(classify_regime(-0.41, 0.4).tag == RegimeTag::NegSigma);
    CHECK(parse_regime("strong") == RegimeTag::Strong);
    CHECK_THROWS_AS((void)parse_regime("medium"), DomainError);
}

TEST_CASE("market and contract validation") {
    CHECK_THROWS_AS(MarketParams({0.1, 0.0, 0.1}).validate(), DomainError);
    CHECK_THROWS_AS(MarketParams({0.1, 0.2, std::nan("")}).validate(), DomainError);
    CHECK_THROWS_AS(make_call(10.0, 0.0).validate(), DomainError);
    const Payoff call = call_payoff(10.0);
    CHECK(call(12.0, 0.3) == 2.0);
    CHECK(call(8.0, 0.3) == 0.0);
    CHECK(put_payoff(10.0)(8.0, 0.0) == 2.0);
    CHECK(bond_payoff()(3.0, 1.0) == 1.0);
    CHECK(underlying_payoff()(3.0, 1.0) == 3.0);
}
