#include "bubble/validation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iterator>
#include <limits>
#include <ostream>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bubble/closed_form.hpp"
#include "bubble/figures.hpp"
#include "bubble/monte_carlo.hpp"
#include "bubble/pde.hpp"
#include "bubble/quadrature.hpp"
#include "bubble/transforms.hpp"
#include "csv.hpp"

namespace bubble {

namespace {

const MarketParams kFig1{0.8, 0.4, 0.2};
constexpr double kStrike = 10.0;

double rel_err(double actual, double ref) {
    if (actual == ref) return 0.0;
    return std::abs(actual - ref) / std::max(std::abs(ref), std::numeric_limits<double>::min());
}

std::vector<double> s_axis(std::size_t n) { return log_axis(kStrike / 20.0, kStrike * 20.0, n, kStrike); }

/// Max relative error of the final level of `v` against `ref` on the interior S-band.
template <class Ref>
double line_interior_error(const LineSurface& v, Ref ref) {
    const auto [lo, hi] = interior_s_range(v.s, kStrike);
    double err = 0.0;
    for (std::size_t i = 0; i < v.s.size(); ++i) {
        if (v.s[i] < lo || v.s[i] > hi) continue;
        err = std::max(err, rel_err(v.at(i, v.tau.size() - 1), ref(v.s[i])));
    }
    return err;
}

struct Combo {
    RegimeTag regime;
    BubbleKind kind;
};

constexpr Combo kCombos[] = {
    {RegimeTag::Weak, BubbleKind::Gaussian},     {RegimeTag::Strong, BubbleKind::Gaussian},
    {RegimeTag::NegSigma, BubbleKind::Gaussian}, {RegimeTag::Weak, BubbleKind::Lognormal},
    {RegimeTag::Strong, BubbleKind::Lognormal},
};

std::string combo_name(const Combo& c) {
    return std::string(to_string(c.regime)) + "_" + std::string(to_string(c.kind));
}

} // namespace

CheckRow make_row(std::string check, double expected, double actual, double tolerance) {
    const bool pass = std::abs(actual - expected) <= tolerance;
    return CheckRow{std::move(check), expected, actual, tolerance, pass};
}

std::vector<CheckRow> check_oracle(const ValidationConfig& cfg) {
    std::mt19937_64 gen(cfg.seed);
    std::uniform_real_distribution<double> moneyness(0.25, 4.0), vol(0.1, 0.6), expiry(0.05, 2.0), rate(0.0, 1.0);
    std::vector<CheckRow> rows;
    std::vector<double> worst(std::size(kCombos), 0.0);
    for (std::size_t d = 0; d < cfg.draws; ++d) {
        const double S = kStrike * moneyness(gen);
        MarketParams m;
        m.sigma = vol(gen);
        const double tau = expiry(gen);
        m.r = rate(gen);
        m.mu = rate(gen);
        for (std::size_t c = 0; c < std::size(kCombos); ++c) {
            const auto [regime, kind] = kCombos[c];
            const BubbleModel bubble = kind == BubbleKind::Gaussian ? BubbleModel{GaussianBubble{0.05, 0.1}}
                                                                    : BubbleModel{LognormalBubble{0.1, 0.3}};
            const double f = 0.1;
            const double closed = price_call(regime, kind, S, f, tau, m, kStrike);
            const double quad = price_generic(regime, bubble, S, f, tau, m, call_payoff(kStrike));
            worst[c] = std::max(worst[c], rel_err(quad, closed));
        }
    }
    for (std::size_t c = 0; c < std::size(kCombos); ++c) {
        rows.push_back(make_row("quadrature_vs_closed_" + combo_name(kCombos[c]), 0.0, worst[c], 1e-6));
    }
    return rows;
}

std::vector<CheckRow> check_zero_bubble(const ValidationConfig&) {
    const Contract call = make_call(kStrike, 1.0);
    const auto v = solve_deterministic(kFig1, [](double, double) { return 0.0; }, call, Grid1D{s_axis(256), 256});
    const double err = line_interior_error(v, [](double S) { return bs_reference(S, kStrike, 1.0, kFig1.r, kFig1.sigma); });
    return {make_row("deterministic_f0_vs_bs_rate_r", 0.0, err, 5e-3)};
}

std::vector<CheckRow> check_large_bubble(const ValidationConfig&) {
    const Contract call = make_call(kStrike, 1.0);
    const double f = 100.0 * kFig1.sigma;
    const auto v = solve_deterministic(kFig1, [=](double, double) { return f; }, call, Grid1D{s_axis(256), 256});
    const double err = line_interior_error(v, [](double S) { return bs_reference(S, kStrike, 1.0, kFig1.mu, kFig1.sigma); });
    // At finite f the potential gives the rate r + v(f), not exactly mu.
    const double rate = kFig1.r + potential_v(f, kFig1);
    const double err_eff = line_interior_error(v, [=](double S) { return bs_reference(S, kStrike, 1.0, rate, kFig1.sigma); });
    return {make_row("deterministic_f100sigma_vs_bs_rate_mu", 0.0, err, 5e-3),
            make_row("deterministic_f100sigma_vs_bs_rate_r_plus_v", 0.0, err_eff, 5e-3)};
}

std::vector<CheckRow> check_reduction(const ValidationConfig&) {
    const Contract call = make_call(kStrike, 1.0);
    const GaussianBubble b{0.0, 0.0};
    const Grid1D g1{s_axis(129), 100};
    std::vector<CheckRow> rows;
    const Grid2D at0 = Grid2D::make(s_axis(129), linear_axis(-0.3, 0.3, 16, 0.0), 100, kFig1);
    rows.push_back(make_row("gamma0_call_f0_0", 0.0, reduction_check_gamma0(kFig1, b, 0.0, call, at0, g1).max_rel_deviation, 1e-2));
    const Grid2D at2 = Grid2D::make(s_axis(129), linear_axis(0.0, 0.3, 16, 0.2), 50, kFig1);
    rows.push_back(make_row("gamma0_call_f0_0.2", 0.0, reduction_check_gamma0(kFig1, b, 0.2, call, at2, g1).max_rel_deviation, 1e-2));
    const Contract lin{1.0, underlying_payoff(), std::nullopt};
    rows.push_back(make_row("gamma0_payoff_S_f0_0", 0.0, reduction_check_gamma0(kFig1, b, 0.0, lin, at0, g1).max_rel_deviation, 1e-10));
    rows.push_back(make_row("gamma0_payoff_S_f0_0.2", 0.0, reduction_check_gamma0(kFig1, b, 0.2, lin, at2, g1).max_rel_deviation, 1e-10));
    return rows;
}

std::vector<CheckRow> check_asymptotic(const ValidationConfig&) {
    ChartGrid grid;
    const double h = 0.025;
    const double x0 = std::log(kStrike) / kFig1.sigma;
    for (int i = -400; i <= 400; ++i) grid.x.push_back(x0 + i * h);
    for (int j = -4; j <= 4; ++j) grid.eta.push_back(j * h);
    grid.n_steps = 400;
    grid.expiry = 1.0;
    auto terminal = [](double x, double y) { return std::max(std::exp(kFig1.sigma * (x + y)) - kStrike, 0.0); };

    std::vector<CheckRow> rows;
    for (auto tag : {RegimeTag::Weak, RegimeTag::Strong}) {
        const AlphaPair a = alphas_for(tag, BubbleKind::Gaussian, kFig1);
        const auto v = solve_asymptotic(a, terminal, grid);
        double err = 0.0;
        for (std::size_t k : {v.tau.size() / 2, v.tau.size() - 1}) {
            for (std::size_t j = 0; j < v.eta.size(); ++j) {
                for (std::size_t i = 0; i < v.x.size(); ++i) {
                    const double S = std::exp(kFig1.sigma * (v.x[i] + v.y_at(j, k)));
                    if (S < 0.8 * kStrike || S > 1.25 * kStrike) continue;
                    err = std::max(err, rel_err(v.at(i, j, k), psi_call(S, kStrike, kFig1.sigma, v.tau[k], a.sum())));
                }
            }
        }
        rows.push_back(make_row("asymptotic_vs_psi_call_" + std::string(to_string(tag)), 0.0, err, 1e-3));
    }
    return rows;
}

std::vector<CheckRow> check_feynman_kac(const ValidationConfig& cfg) {
    const MarketParams m = kFig1;
    const GaussianBubble b{0.0, 0.05};
    const double S0 = 10.0, f0 = 0.1;
    const Contract call = make_call(kStrike, 1.0);

    const Grid2D g = Grid2D::make(log_axis(0.5, 200.0, cfg.grid_ns, S0), linear_axis(f0 - 0.4, 0.38, cfg.grid_nf, f0),
                                  cfg.grid_nt, m);
    SchemeOptions opt;
    opt.save_every = cfg.grid_nt;
    const auto v = solve_full(m, b, call, g, opt);
    const double pde = v.interpolate(S0, f0, v.tau.size() - 1);

    SimulationSpec spec;
    spec.S0 = S0;
    spec.f0 = f0;
    spec.expiry = 1.0;
    spec.steps = cfg.steps;
    spec.n_paths = cfg.paths;
    spec.rng.seed = cfg.seed;
    spec.workers = cfg.workers;
    const auto paths = simulate(m, b, spec);
    const auto mc = feynman_kac_price(m, call, paths);

    return {make_row("fk_vs_pde_3se", pde, mc.value, 3.0 * mc.std_error),
            make_row("fk_vs_pde_rel", 0.0, rel_err(mc.value, pde), 1e-2),
            make_row("fk_absorbed_fraction", 0.0, mc.absorbed_fraction, 1e-3)};
}

std::vector<CheckRow> check_invariants(const ValidationConfig& cfg) {
    std::vector<CheckRow> rows;
    const MarketParams m = kFig1;
    const Contract lin{1.0, underlying_payoff(), std::nullopt};

    {
        const auto v = solve_deterministic(m, [](double S, double t) { return 0.1 * std::sin(S + t); }, lin,
                                           Grid1D{s_axis(64), 50});
        double err = 0.0;
        for (std::size_t i = 0; i < v.s.size(); ++i)
            for (std::size_t k = 0; k < v.tau.size(); ++k) err = std::max(err, rel_err(v.at(i, k), v.s[i]));
        rows.push_back(make_row("v_equals_s_deterministic", 0.0, err, 1e-10));
    }
    auto full_err = [&](const BubbleModel& b, const Grid2D& g) {
        const auto v = solve_full(m, b, lin, g);
        double err = 0.0;
        for (std::size_t i = 0; i < g.s.size(); ++i)
            for (std::size_t j = 0; j < g.f.size(); ++j)
                for (std::size_t k = 0; k < v.tau.size(); ++k) err = std::max(err, rel_err(v.at(i, j, k), g.s[i]));
        return err;
    };
    rows.push_back(make_row("v_equals_s_full_gaussian", 0.0,
                            full_err(GaussianBubble{0.1, 0.05}, Grid2D::make(s_axis(40), linear_axis(-0.2, 1.0, 40), 40, m)),
                            1e-10));
    rows.push_back(make_row("v_equals_s_full_lognormal", 0.0,
                            full_err(LognormalBubble{0.1, 0.3}, Grid2D::make(s_axis(24), linear_axis(0.05, 2.0, 24), 20, m)),
                            1e-10));
    {
        ChartGrid grid;
        for (int i = -200; i <= 200; ++i) grid.x.push_back(i * 0.05);
        for (int j = -4; j <= 4; ++j) grid.eta.push_back(j * 0.05);
        grid.n_steps = 100;
        const AlphaPair a{0.75, -0.3};
        const auto v = solve_asymptotic(a, [](double x, double y) { return 2.0 + 0.5 * x - 0.25 * y; }, grid);
        double err = 0.0;
        for (std::size_t i = 0; i < v.x.size(); ++i)
            for (std::size_t j = 0; j < v.eta.size(); ++j)
                for (std::size_t k = 0; k < v.tau.size(); ++k) {
                    const double exact = 2.0 + 0.5 * (v.x[i] + a.alpha_x * v.tau[k]) - 0.25 * (v.y_at(j, k) + a.alpha_y * v.tau[k]);
                    err = std::max(err, std::abs(v.at(i, j, k) - exact));
                }
        rows.push_back(make_row("affine_exact_asymptotic", 0.0, err, 1e-10));
    }

    {
        double err = 0.0;
        for (double tau : {0.01, 0.5, 2.0}) {
            for (const AlphaPair a : {AlphaPair{0.75, -0.75}, AlphaPair{-1.5, 0.2}, AlphaPair{0.0, 0.0}}) {
                const double c = -a.alpha_x * tau;
                const double w = 15.0 * std::sqrt(tau);
                const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                    [&](double x) { return propagator(x, 0.0, tau, a).density; }, c - w, c + w, 10, 1e-14);
                err = std::max(err, std::abs(total - 1.0));
            }
        }
        rows.push_back(make_row("propagator_normalization", 0.0, err, 1e-8));
    }

    {
        std::mt19937_64 gen(cfg.seed);
        std::uniform_real_distribution<double> uS(0.5, 50.0), uf(-1.0, 1.0), ufp(0.01, 2.0), ut(0.0, 1.0);
        const GaussianBubble gb{0.3, 0.1};
        const LognormalBubble lb{0.2, 0.5};
        double err = 0.0;
        for (int n = 0; n < 10000; ++n) {
            const double S = uS(gen), t = ut(gen);
            const double f = uf(gen);
            const MarketPoint p = gauss_inverse(gauss_forward(S, f, t, m, gb, 1.0), m, gb, 1.0);
            err = std::max({err, rel_err(p.S, S), std::abs(p.f - f) / std::max(1.0, std::abs(f)), std::abs(p.t - t)});
            const double fp = ufp(gen);
            const MarketPoint q = logn_inverse(logn_forward(S, fp, t, m, lb, 1.0), m, lb, 1.0);
            err = std::max({err, rel_err(q.S, S), rel_err(q.f, fp), std::abs(q.t - t)});
        }
        rows.push_back(make_row("transform_round_trip", 0.0, err, 1e-12));
    }

    {
        std::mt19937_64 gen(cfg.seed + 1);
        std::uniform_real_distribution<double> uf(-2.0, 2.0);
        double err = 0.0;
        for (int n = 0; n < 10000; ++n) {
            const double f = uf(gen);
            if (std::abs(m.sigma - f) <= default_singular_band(m)) continue;
            const double lhs = potential_v(f, m) * (m.sigma - f);
            err = std::max(err, rel_err(lhs, (m.r - m.mu) * f));
        }
        rows.push_back(make_row("potential_identity", 0.0, err, 1e-15));
    }

    {
        const MarketParams flat{0.3, 0.4, 0.3};
        double err = 0.0;
        for (double S : {5.0, 10.0, 20.0}) {
            const double weak = price_call(RegimeTag::Weak, BubbleKind::Gaussian, S, 0.0, 1.0, flat, kStrike);
            for (auto tag : {RegimeTag::Strong, RegimeTag::NegSigma}) {
                err = std::max(err, rel_err(price_call(tag, BubbleKind::Gaussian, S, 0.0, 1.0, flat, kStrike), weak));
            }
            err = std::max(err, rel_err(price_call(RegimeTag::Strong, BubbleKind::Lognormal, S, 0.0, 1.0, flat, kStrike), weak));
        }
        rows.push_back(make_row("r_equals_mu_degeneracy", 0.0, err, 1e-12));
    }

    {
        SimulationSpec spec;
        spec.S0 = 10.0;
        spec.f0 = 0.1;
        spec.steps = 50;
        spec.n_paths = 2001;
        spec.rng.seed = cfg.seed;
        spec.record = RecordMode::Full;
        const GaussianBubble b{0.1, 0.2};
        const auto one = simulate(m, b, spec);
        double mismatches = 0.0;
        for (unsigned w : {2u, 3u, 8u}) {
            spec.workers = w;
            const auto other = simulate(m, b, spec);
            // Compare bit patterns so NaN after absorption counts as equal.
            auto same = [](const std::vector<double>& a, const std::vector<double>& c) {
                return a.size() == c.size() &&
                       std::equal(a.begin(), a.end(), c.begin(), [](double x, double y) {
                           return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
                       });
            };
            if (!same(one.S, other.S) || !same(one.f, other.f) || !same(one.D, other.D) || one.absorbed != other.absorbed) {
                mismatches += 1.0;
            }
        }
        rows.push_back(make_row("seed_determinism_across_workers", 0.0, mismatches, 0.0));
    }
    return rows;
}

std::vector<CheckRow> check_figures(const ValidationConfig&) {
    std::vector<CheckRow> rows;
    for (int fig : {1, 2}) {
        const std::string tag = "figure" + std::to_string(fig) + "_";
        const FigureSpec base = FigureSpec::published(fig);
        const FigureData d = figure_data(base);
        double negative = 0.0, decrease = 0.0;
        for (const auto* col : {&d.weak, &d.strong}) {
            for (std::size_t i = 0; i < col->size(); ++i) {
                negative = std::max(negative, -(*col)[i]);
                if (i > 0) decrease = std::max(decrease, (*col)[i - 1] - (*col)[i]);
            }
        }
        rows.push_back(make_row(tag + "nonnegative", 0.0, std::max(negative, 0.0), 0.0));
        rows.push_back(make_row(tag + "nondecreasing", 0.0, std::max(decrease, 0.0), 0.0));

        FigureSpec near = base;
        near.tau = 1e-4;
        const FigureData e = figure_data(near);
        double dev = 0.0;
        for (std::size_t i = 0; i < e.s.size(); ++i) {
            const double payoff = std::max(e.s[i] - near.strike, 0.0);
            dev = std::max({dev, std::abs(e.weak[i] - payoff), std::abs(e.strong[i] - payoff)});
        }
        rows.push_back(make_row(tag + "tau_1e-4_vs_payoff", 0.0, dev, 1e-2));

        FigureSpec flat = base;
        flat.params.r = flat.params.mu;
        const FigureData g = figure_data(flat);
        double gap = 0.0;
        for (std::size_t i = 0; i < g.s.size(); ++i) gap = std::max(gap, std::abs(g.weak[i] - g.strong[i]));
        rows.push_back(make_row(tag + "r_equals_mu_weak_vs_strong", 0.0, gap, 1e-12));
    }
    return rows;
}

std::vector<std::string_view> suite_names() {
    return {"oracle", "deterministic", "reduction", "asymptotic", "mc", "invariants", "figures", "all"};
}

std::vector<CheckRow> run_suite(std::string_view name, const ValidationConfig& cfg) {
    auto append = [](std::vector<CheckRow>& to, std::vector<CheckRow> from) {
        to.insert(to.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
    };
    std::vector<CheckRow> rows;
    const bool all = name == "all";
    if (all || name == "oracle") append(rows, check_oracle(cfg));
    if (all || name == "deterministic") {
        append(rows, check_zero_bubble(cfg));
        append(rows, check_large_bubble(cfg));
    }
    if (all || name == "reduction") append(rows, check_reduction(cfg));
    if (all || name == "asymptotic") append(rows, check_asymptotic(cfg));
    if (all || name == "mc") append(rows, check_feynman_kac(cfg));
    if (all || name == "invariants") append(rows, check_invariants(cfg));
    if (all || name == "figures") append(rows, check_figures(cfg));
    if (rows.empty()) throw DomainError("unknown validation suite '" + std::string(name) + "'");
    return rows;
}

void write_report(std::ostream& os, const std::vector<CheckRow>& rows) {
    os << "check,expected,actual,tolerance,pass\n";
    for (const auto& r : rows) {
        os << r.check << ',' << csv::num(r.expected) << ',' << csv::num(r.actual) << ',' << csv::num(r.tolerance) << ','
           << (r.pass ? "true" : "false") << '\n';
    }
}

bool all_pass(const std::vector<CheckRow>& rows) noexcept {
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

} // namespace bubble
