#include <doctest.h>

#include <random>

#include "bubble/closed_form.hpp"
#include "oracles.hpp"

using namespace bubble;

namespace {
const MarketParams fig1{0.8, 0.4, 0.2};
}

TEST_CASE("normal cdf") {
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(norm_cdf(std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(std::abs(norm_cdf(1.0) - oracle::norm_cdf(1.0)) < 1e-15);
    CHECK(std::abs(norm_cdf(1.0) - 0.8413447461) < 1e-10);
    for (double z = -8.0; z <= 8.0; z += 0.173) {
        CHECK(std::abs(norm_cdf(z) - oracle::norm_cdf(z)) < 1e-10);
        CHECK(std::abs(norm_cdf(z) + norm_cdf(-z) - 1.0) < 1e-12);
        CHECK(norm_cdf(z + 0.01) >= norm_cdf(z));
    }
}

TEST_CASE("alpha pairs") {
    const AlphaPair weak = alphas_for(RegimeTag::Weak, BubbleKind::Gaussian, fig1);
    CHECK(weak.alpha_x == doctest::Approx(-0.75).epsilon(1e-15));
    CHECK(weak.alpha_y == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(weak.sum() == 0.0);
    const AlphaPair strong = alphas_for(RegimeTag::Strong, BubbleKind::Lognormal, fig1);
    CHECK(strong.alpha_x == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(strong.sum() == doctest::Approx(1.5).epsilon(1e-15));
    const AlphaPair neg = alphas_for(RegimeTag::NegSigma, BubbleKind::Gaussian, fig1);
    CHECK(neg.alpha_x == 0.0);
    CHECK(neg.alpha_y == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS((void)alphas_for(RegimeTag::NegSigma, BubbleKind::Lognormal, fig1), Unsupported);
    CHECK_THROWS_AS((void)alphas_for(RegimeTag::Full, BubbleKind::Gaussian, fig1), Unsupported);
    CHECK_THROWS_AS((void)alphas_for(RegimeTag::Weak, BubbleKind::Deterministic, fig1), Unsupported);
}

TEST_CASE("psi call") {
    CHECK(psi_call(10.0, 10.0, 0.4, 1.0, 0.0) == doctest::Approx(oracle::psi_call(10.0, 10.0, 0.4, 1.0, 0.0)).epsilon(1e-13));
    CHECK(psi_call(10.0, 10.0, 0.4, 1.0, 0.0) == doctest::Approx(2.1000990).epsilon(1e-7));
    CHECK(psi_call(12.0, 10.0, 0.4, 0.0, 1.5) == 2.0);
    CHECK(psi_call(12.0, 10.0, 0.4, 1e-12, 0.0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(psi_call(1e-12, 10.0, 0.4, 1.0, 0.0) < 1e-30);
    CHECK(psi_call(0.0, 10.0, 0.4, 1.0, 0.0) == 0.0);
    for (double A : {-1.5, 0.0, 1.5}) {
        double prev = 0.0;
        for (double S = 0.1; S < 40.0; S *= 1.05) {
            const double v = psi_call(S, 10.0, 0.4, 0.7, A);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("regime call prices") {
    const double weak = price_call(RegimeTag::Weak, BubbleKind::Gaussian, 10.0, 0.0, 1.0, fig1, 10.0);
    CHECK(weak == doctest::Approx(std::exp(-0.2) * oracle::psi_call(10, 10, 0.4, 1, 0)).epsilon(1e-13));
    CHECK(weak == doctest::Approx(1.7194156).epsilon(1e-7));
    const double strong = price_call(RegimeTag::Strong, BubbleKind::Gaussian, 10.0, 0.0, 1.0, fig1, 10.0);
    // alpha sum -(r - mu)/sigma = 1.5: d2 = 0.6 / 0.4, d1 = d2 + 0.4.
    const double strong_oracle =
        std::exp(-0.12) * 10.0 * oracle::norm_cdf(1.9) - 10.0 * std::exp(-0.8) * oracle::norm_cdf(1.5);
    CHECK(strong == doctest::Approx(strong_oracle).epsilon(1e-13));
    CHECK(strong == doctest::Approx(std::exp(-0.8) * oracle::psi_call(10, 10, 0.4, 1, 1.5)).epsilon(1e-13));
    const double neg = price_call(RegimeTag::NegSigma, BubbleKind::Gaussian, 10.0, 0.0, 1.0, fig1, 10.0);
    CHECK(neg == doctest::Approx(std::exp(-0.5) * oracle::psi_call(10, 10, 0.4, 1, 0.75)).epsilon(1e-13));
    CHECK_THROWS_AS((void)price_call(RegimeTag::NegSigma, BubbleKind::Lognormal, 10, 0, 1, fig1, 10), Unsupported);
    for (auto tag : {RegimeTag::Weak, RegimeTag::Strong, RegimeTag::NegSigma}) {
        CHECK(price_call(tag, BubbleKind::Gaussian, 12.0, 0.3, 0.0, fig1, 10.0) == 2.0);
        const double ref = price_call(tag, BubbleKind::Gaussian, 9.0, 0.0, 0.6, fig1, 10.0);
        for (double f : {-0.4, 0.1, 3.0, 50.0}) {
            CHECK(price_call(tag, BubbleKind::Gaussian, 9.0, f, 0.6, fig1, 10.0) == ref);
        }
    }
    for (auto tag : {RegimeTag::Weak, RegimeTag::Strong}) {
        CHECK(price_call(tag, BubbleKind::Gaussian, 9.0, 0.1, 0.6, fig1, 10.0) ==
              price_call(tag, BubbleKind::Lognormal, 9.0, 0.1, 0.6, fig1, 10.0));
    }
}

TEST_CASE("moving chart gives textbook prices at the regime rate") {
    const double w = price_call(RegimeTag::Weak, BubbleKind::Gaussian, 9.0, 0.0, 0.8, fig1, 10.0, Chart::Moving);
    CHECK(w == doctest::Approx(oracle::black_scholes(9.0, 10.0, 0.8, 0.2, 0.4)).epsilon(1e-12));
    const double s = price_call(RegimeTag::Strong, BubbleKind::Gaussian, 9.0, 0.0, 0.8, fig1, 10.0, Chart::Moving);
    CHECK(s == doctest::Approx(oracle::black_scholes(9.0, 10.0, 0.8, 0.8, 0.4)).epsilon(1e-12));
    const double n = price_call(RegimeTag::NegSigma, BubbleKind::Gaussian, 9.0, 0.0, 0.8, fig1, 10.0, Chart::Moving);
    CHECK(n == doctest::Approx(oracle::black_scholes(9.0, 10.0, 0.8, 0.5, 0.4)).epsilon(1e-12));
}

TEST_CASE("r equal to mu makes the regimes coincide") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int n = 0; n < 200; ++n) {
        const double rate = u01(gen);
        const MarketParams m{rate, 0.1 + 0.5 * u01(gen), rate};
        const double S = 10.0 * std::exp(2.0 * u01(gen) - 1.0);
        const double tau = 0.05 + 2.0 * u01(gen);
        const double w = price_call(RegimeTag::Weak, BubbleKind::Gaussian, S, 0.0, tau, m, 10.0);
        CHECK(std::abs(price_call(RegimeTag::Strong, BubbleKind::Gaussian, S, 0.0, tau, m, 10.0) - w) <= 1e-12 * w);
        CHECK(std::abs(price_call(RegimeTag::NegSigma, BubbleKind::Gaussian, S, 0.0, tau, m, 10.0) - w) <= 1e-12 * w);
    }
}

TEST_CASE("bond prices") {
    CHECK(price_bond(RegimeTag::Weak, 1.0, fig1) == doctest::Approx(std::exp(-0.2)).epsilon(1e-15));
    CHECK(price_bond(RegimeTag::Strong, 1.0, fig1) == doctest::Approx(std::exp(-0.8)).epsilon(1e-15));
    CHECK(price_bond(RegimeTag::NegSigma, 1.0, fig1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("textbook reference") {
    CHECK(bs_reference(10.0, 10.0, 1.0, 0.2, 0.4) == doctest::Approx(oracle::black_scholes(10, 10, 1, 0.2, 0.4)).epsilon(1e-13));
    CHECK(bs_reference(10.0, 10.0, 1.0, 0.2, 0.4) == doctest::Approx(2.5213326).epsilon(1e-7));
    CHECK(bs_reference(12.0, 10.0, 0.0, 0.2, 0.4) == 2.0);
    CHECK(bs_reference(10.0, 5.0, 1.0, 0.2, 0.0) == doctest::Approx(10.0 - 5.0 * std::exp(-0.2)).epsilon(1e-15));
}
