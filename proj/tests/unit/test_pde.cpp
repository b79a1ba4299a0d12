#include <doctest.h>

#include <sstream>

#include "bubble/closed_form.hpp"
#include "bubble/pde.hpp"
#include "oracles.hpp"

using namespace bubble;

namespace {

const MarketParams fig1{0.8, 0.4, 0.2};
constexpr double kStrike = 10.0;

std::vector<double> s_axis(std::size_t n) { return log_axis(kStrike / 20.0, kStrike * 20.0, n, kStrike); }

Grid1D line_grid(std::size_t ns, std::size_t nt) { return Grid1D{s_axis(ns), nt}; }

/// Max relative error against `ref` over interior nodes at the final level.
template <class Ref>
double interior_error(const LineSurface& v, Ref ref) {
    const auto [lo, hi] = interior_s_range(v.s, kStrike);
    double err = 0.0;
    for (std::size_t i = 0; i < v.s.size(); ++i) {
        if (v.s[i] < lo || v.s[i] > hi) continue;
        err = std::max(err, oracle::rel(v.at(i, v.tau.size() - 1), ref(v.s[i])));
    }
    return err;
}

} // namespace

TEST_CASE("axes") {
    const auto s = log_axis(0.5, 200.0, 64, 10.0);
    CHECK(s.size() == 64);
    CHECK(std::find(s.begin(), s.end(), 10.0) != s.end());
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
    const auto f = linear_axis(-0.3, 0.3, 31, 0.0);
    CHECK(std::find(f.begin(), f.end(), 0.0) != f.end());
    const Grid2D g = Grid2D::make(s, linear_axis(0.0, 0.8, 41), 10, fig1);
    CHECK(g.f.size() == 40);
    const auto parts = g.f_subdomains(fig1);
    REQUIRE(parts.size() == 2);
    CHECK(g.f[parts[0].second - 1] < 0.4);
    CHECK(g.f[parts[1].first] > 0.4);
    CHECK_THROWS_AS((void)Grid2D::make(s, linear_axis(0.0, 0.1, 8), 10, fig1), DomainError);
    CHECK_THROWS_AS((void)log_axis(0.0, 1.0, 16), DomainError);
}

TEST_CASE("one-factor solver") {
    const Contract call = make_call(kStrike, 1.0);
    SUBCASE("zero bubble reproduces Black-Scholes at rate r") {
        const auto v = solve_deterministic(fig1, [](double, double) { return 0.0; }, call, line_grid(256, 256));
        CHECK(interior_error(v, [](double S) { return oracle::black_scholes(S, kStrike, 1.0, 0.2, 0.4); }) < 2e-3);
    }
    SUBCASE("payoff is copied at expiry and V = S is preserved") {
        const Contract lin{1.0, underlying_payoff(), std::nullopt};
        const auto v = solve_deterministic(fig1, [](double S, double t) { return 0.1 * std::sin(S + t); }, lin,
                                           line_grid(64, 50));
        for (std::size_t i = 0; i < v.s.size(); ++i) {
            CHECK(v.at(i, 0) == v.s[i]);
            for (std::size_t k = 0; k < v.tau.size(); ++k) CHECK(std::abs(v.at(i, k) - v.s[i]) < 1e-10 * v.s[i]);
        }
    }
    SUBCASE("zero payoff stays zero") {
        const Contract zero{1.0, Payoff{[](double, double) { return 0.0; }, {}, "zero"}, std::nullopt};
        const auto v = solve_deterministic(fig1, [](double, double) { return 0.1; }, zero, line_grid(32, 20));
        for (double x : v.values) CHECK(x == 0.0);
    }
    SUBCASE("linearity") {
        const Contract put{1.0, put_payoff(9.0), 9.0};
        const Contract mix{1.0, Payoff{[](double S, double f) { return 2.0 * std::max(S - 10.0, 0.0) - 3.0 * std::max(9.0 - S, 0.0) + 0.0 * f; }, {9.0, 10.0}, "mix"}, std::nullopt};
        auto f = [](double S, double t) { return 0.05 * std::log(S) * (1.0 - t); };
        const auto a = solve_deterministic(fig1, f, call, line_grid(64, 40));
        const auto b = solve_deterministic(fig1, f, put, line_grid(64, 40));
        const auto c = solve_deterministic(fig1, f, mix, line_grid(64, 40));
        for (std::size_t n = 0; n < c.values.size(); ++n) {
            CHECK(std::abs(c.values[n] - (2.0 * a.values[n] - 3.0 * b.values[n])) < 1e-10 * std::max(1.0, std::abs(c.values[n])));
        }
    }
    SUBCASE("second-order convergence in space") {
        auto err_at = [&](std::size_t n) {
            const auto v = solve_deterministic(fig1, [](double, double) { return 0.0; }, call, line_grid(n, 2000));
            const std::size_t i = static_cast<std::size_t>(std::find(v.s.begin(), v.s.end(), kStrike) - v.s.begin());
            return std::abs(v.at(i, v.tau.size() - 1) - oracle::black_scholes(kStrike, kStrike, 1.0, 0.2, 0.4));
        };
        const double coarse = err_at(65);
        const double fine = err_at(129);
        CHECK(coarse / fine >= 3.0);
    }
    SUBCASE("csv layout") {
        const auto v = solve_deterministic(fig1, [](double, double t) { return 0.1 * t; }, call, line_grid(16, 2));
        std::ostringstream os;
        v.write_csv(os);
        std::istringstream is(os.str());
        std::string line;
        std::getline(is, line);
        CHECK(line == "S,f,tau,V");
        std::getline(is, line);
        CHECK(line.substr(line.find(',')) == ",0.10000000000000001,0,0");
    }
}

TEST_CASE("two-factor solver") {
    const Contract call = make_call(kStrike, 1.0);
    SUBCASE("gamma = 0 at f = 0 reproduces Black-Scholes") {
        const Grid2D g = Grid2D::make(s_axis(129), linear_axis(-0.3, 0.3, 16, 0.0), 100, fig1);
        const auto v = solve_full(fig1, GaussianBubble{0.0, 0.0}, call, g);
        const std::size_t j = static_cast<std::size_t>(std::find(g.f.begin(), g.f.end(), 0.0) - g.f.begin());
        const auto [lo, hi] = interior_s_range(g.s, kStrike);
        for (std::size_t i = 0; i < g.s.size(); ++i) {
            if (g.s[i] < lo || g.s[i] > hi) continue;
            CHECK(oracle::rel(v.at(i, j, v.tau.size() - 1), oracle::black_scholes(g.s[i], kStrike, 1.0, 0.2, 0.4)) < 5e-3);
        }
    }
    SUBCASE("V = S with a stochastic bubble and a split f-axis") {
        const Contract lin{1.0, underlying_payoff(), std::nullopt};
        const Grid2D g = Grid2D::make(s_axis(40), linear_axis(-0.2, 1.0, 40), 40, fig1);
        const auto v = solve_full(fig1, GaussianBubble{0.1, 0.05}, lin, g);
        for (std::size_t i = 0; i < g.s.size(); ++i) {
            for (std::size_t j = 0; j < g.f.size(); ++j) {
                CHECK(v.at(i, j, 0) == g.s[i]);
                CHECK(std::abs(v.at(i, j, v.tau.size() - 1) - g.s[i]) < 1e-10 * g.s[i]);
            }
        }
        const auto w = solve_full(fig1, LognormalBubble{0.1, 0.3}, lin, Grid2D::make(s_axis(24), linear_axis(0.05, 2.0, 24), 20, fig1));
        for (std::size_t n = 0; n < w.values.size(); n += w.tau.size()) {
            CHECK(std::abs(w.values[n + w.tau.size() - 1] - w.values[n]) < 1e-10 * w.values[n]);
        }
    }
    SUBCASE("zero payoff and linearity") {
        const Grid2D g = Grid2D::make(s_axis(32), linear_axis(-0.3, 0.3, 20), 20, fig1);
        const Contract zero{1.0, Payoff{[](double, double) { return 0.0; }, {}, "zero"}, std::nullopt};
        for (double x : solve_full(fig1, GaussianBubble{0.0, 0.1}, zero, g).values) CHECK(x == 0.0);
        const Contract bond{1.0, bond_payoff(), std::nullopt};
        const Contract both{1.0, Payoff{[](double S, double) { return std::max(S - kStrike, 0.0) + 0.5; }, {kStrike}, "c+b"}, std::nullopt};
        const auto a = solve_full(fig1, GaussianBubble{0.0, 0.1}, call, g);
        const auto b = solve_full(fig1, GaussianBubble{0.0, 0.1}, bond, g);
        const auto c = solve_full(fig1, GaussianBubble{0.0, 0.1}, both, g);
        for (std::size_t n = 0; n < c.values.size(); ++n) {
            CHECK(std::abs(c.values[n] - a.values[n] - 0.5 * b.values[n]) < 1e-10 * std::max(1.0, std::abs(c.values[n])));
        }
    }
    SUBCASE("large bubble approaches the rate-mu price") {
        const double sig = fig1.sigma;
        const Grid2D g = Grid2D::make(s_axis(129), linear_axis(100.0 * sig, 1000.0 * sig, 19), 100, fig1);
        const auto v = solve_full(fig1, GaussianBubble{0.0, 0.05}, call, g);
        const auto [lo, hi] = interior_s_range(g.s, kStrike);
        for (std::size_t i = 0; i < g.s.size(); ++i) {
            if (g.s[i] < lo || g.s[i] > hi) continue;
            for (std::size_t j = 1; j + 1 < g.f.size(); ++j) {
                if (g.f[j] < 500.0 * sig) continue;
                const double strong = price_call(RegimeTag::Strong, BubbleKind::Gaussian, g.s[i], g.f[j], 1.0, fig1,
                                                 kStrike, Chart::Moving);
                CHECK(oracle::rel(v.at(i, j, v.tau.size() - 1), strong) < 1e-2);
            }
        }
    }
    SUBCASE("diagnostics") {
        const Grid2D g = Grid2D::make(s_axis(24), linear_axis(0.1, 0.3, 16, 0.2), 20, fig1);
        SchemeOptions tight;
        tight.blowup_factor = 1.2;
        const Contract bond{1.0, bond_payoff(), std::nullopt};
        CHECK_THROWS_AS((void)solve_full(fig1, GaussianBubble{0.0, 0.0}, bond, g, tight), InstabilityDetected);
        Grid2D raw = g;
        raw.f.back() = 0.4;
        CHECK_THROWS_AS((void)solve_full(fig1, GaussianBubble{0.0, 0.0}, bond, raw), SingularBand);
        CHECK_THROWS_AS((void)solve_full(fig1, DeterministicBubble{[](double, double) { return 0.0; }}, bond, g), Unsupported);
    }
    SUBCASE("csv ordering") {
        const Grid2D g = Grid2D::make(s_axis(16), linear_axis(-0.3, 0.3, 16), 2, fig1);
        const auto v = solve_full(fig1, GaussianBubble{0.0, 0.1}, call, g);
        std::ostringstream os;
        v.write_csv(os);
        std::istringstream is(os.str());
        std::string line;
        std::getline(is, line);
        CHECK(line == "S,f,tau,V");
        std::size_t rows = 0;
        while (std::getline(is, line)) ++rows;
        CHECK(rows == 16 * 16 * 3);
        CHECK(v.interpolate(g.s[5], g.f[7], 2) == doctest::Approx(v.at(5, 7, 2)).epsilon(1e-14));
    }
}

TEST_CASE("gamma = 0 reduction") {
    const Contract call = make_call(kStrike, 1.0);
    const GaussianBubble b{0.0, 0.0};
    const Grid1D g1 = line_grid(129, 100);
    SUBCASE("f0 = 0") {
        const Grid2D g2 = Grid2D::make(s_axis(129), linear_axis(-0.3, 0.3, 16, 0.0), 100, fig1);
        CHECK(reduction_check_gamma0(fig1, b, 0.0, call, g2, g1).max_rel_deviation < 1e-3);
    }
    SUBCASE("f0 = 0.2") {
        // Same S-axis, different time grids.
        const Grid2D g2 = Grid2D::make(s_axis(129), linear_axis(0.0, 0.3, 16, 0.2), 50, fig1);
        const auto rep = reduction_check_gamma0(fig1, b, 0.2, call, g2, g1);
        CHECK(rep.nodes > 0);
        CHECK(rep.max_rel_deviation < 1e-2);
    }
    SUBCASE("payoff S") {
        const Contract lin{1.0, underlying_payoff(), std::nullopt};
        const Grid2D g2 = Grid2D::make(s_axis(65), linear_axis(0.0, 0.3, 16, 0.2), 50, fig1);
        CHECK(reduction_check_gamma0(fig1, b, 0.2, lin, g2, g1).max_rel_deviation < 1e-10);
    }
    CHECK_THROWS_AS((void)reduction_check_gamma0(fig1, GaussianBubble{0.0, 0.1}, 0.0, call,
                                                 Grid2D::make(s_axis(16), linear_axis(-0.3, 0.3, 16), 4, fig1), g1),
                    DomainError);
}

TEST_CASE("asymptotic solver") {
    ChartGrid grid;
    const double h = 0.025;
    for (int i = -400; i <= 400; ++i) grid.x.push_back(i * h);
    for (int j = -4; j <= 4; ++j) grid.eta.push_back(j * h);
    grid.n_steps = 400;
    grid.expiry = 1.0;

    SUBCASE("constants") {
        const auto v = solve_asymptotic(AlphaPair{0.4, -0.7}, [](double, double) { return 1.0; }, grid);
        for (double x : v.values) CHECK(std::abs(x - 1.0) < 1e-12);
    }
    SUBCASE("heat kernel spreads variance") {
        const double v0 = 0.5;
        auto gauss = [](double x, double var) { return std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var); };
        const auto v = solve_asymptotic(AlphaPair{}, [&](double x, double) { return gauss(x, v0); }, grid);
        for (std::size_t k : {v.tau.size() / 2, v.tau.size() - 1}) {
            for (std::size_t i = 300; i <= 500; i += 20) {
                CHECK(std::abs(v.at(i, 4, k) - gauss(grid.x[i], v0 + v.tau[k])) < 1e-4);
            }
        }
    }
    SUBCASE("call terminal data") {
        for (auto tag : {RegimeTag::Weak, RegimeTag::Strong}) {
            const AlphaPair a = alphas_for(tag, BubbleKind::Gaussian, fig1);
            ChartGrid g = grid;
            const double x0 = std::log(kStrike) / fig1.sigma;
            for (double& x : g.x) x += x0;
            auto terminal = [&](double x, double y) { return std::max(std::exp(fig1.sigma * (x + y)) - kStrike, 0.0); };
            const auto v = solve_asymptotic(a, terminal, g);
            for (std::size_t k : {v.tau.size() / 2, v.tau.size() - 1}) {
                for (std::size_t j = 0; j < g.eta.size(); ++j) {
                    for (std::size_t i = 0; i < g.x.size(); ++i) {
                        const double S = std::exp(fig1.sigma * (g.x[i] + v.y_at(j, k)));
                        if (S < 0.8 * kStrike || S > 1.25 * kStrike) continue;
                        CHECK(oracle::rel(v.at(i, j, k), oracle::psi_call(S, kStrike, fig1.sigma, v.tau[k], a.sum())) < 1e-3);
                    }
                }
            }
        }
    }
    SUBCASE("affine data is transported exactly") {
        const AlphaPair a{0.75, -0.3};
        const auto v = solve_asymptotic(a, [](double x, double y) { return 2.0 + 0.5 * x - 0.25 * y; }, grid);
        for (std::size_t k = 0; k < v.tau.size(); k += 40) {
            for (std::size_t j = 0; j < v.eta.size(); ++j) {
                for (std::size_t i = 0; i < v.x.size(); i += 7) {
                    const double exact = 2.0 + 0.5 * (v.x[i] + a.alpha_x * v.tau[k]) - 0.25 * (v.y_at(j, k) + a.alpha_y * v.tau[k]);
                    CHECK(std::abs(v.at(i, j, k) - exact) < 1e-10);
                }
            }
        }
    }
}
