#include "bubble/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "bubble/transforms.hpp"

namespace bubble {

namespace {

using Rule = boost::math::quadrature::gauss<double, 20>;

// Largest distance from the kernel mean the tail extension may reach.
constexpr double kMaxReach = 40.0;

class KernelIntegrator {
public:
    KernelIntegrator(std::function<double(double)> integrand, const QuadratureSpec& spec)
        : g_(std::move(integrand)), spec_(spec) {}

    double panel(double a, double b) const { return Rule::integrate(g_, a, b); }

    double adaptive(double a, double b, double whole, double tol, int depth) const {
        const double mid = 0.5 * (a + b);
        const double left = panel(a, mid);
        const double right = panel(mid, b);
        const double halves = left + right;
        if (depth >= spec_.max_depth || std::abs(halves - whole) <= tol) {
            return halves;
        }
        return adaptive(a, mid, left, 0.5 * tol, depth + 1) + adaptive(mid, b, right, 0.5 * tol, depth + 1);
    }

    /// Sum over consecutive breakpoints, in breakpoint order.
    double integrate(const std::vector<double>& breaks, double abs_tol) const {
        const double width = breaks.back() - breaks.front();
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const double a = breaks[i];
            const double b = breaks[i + 1];
            if (b <= a) continue;
            const double tol = abs_tol * (b - a) / width;
            total += adaptive(a, b, panel(a, b), tol, 0);
        }
        return total;
    }

    double operator()(double u) const { return g_(u); }

private:
    std::function<double(double)> g_;
    QuadratureSpec spec_;
};

std::vector<double> breakpoints(double lo, double hi, int panels, const std::vector<double>& log_kinks) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(panels) + 1 + log_kinks.size());
    for (int i = 0; i <= panels; ++i) {
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / panels);
    }
    for (double k : log_kinks) {
        if (k > lo && k < hi) out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void check_growth(const Payoff& payoff, const std::function<double(double)>& f0_at, double lo, double hi) {
    auto probe = [&](double S) {
        const double v = payoff(S, f0_at(std::log(S)));
        if (!std::isfinite(v)) {
            throw NonIntegrablePayoff("payoff is not finite at S' = " + std::to_string(S));
        }
        return std::abs(v);
    };
    const double up_near = std::exp(hi) * 10.0;
    const double up_far = std::exp(hi) * 100.0;
    if (probe(up_far) / (1.0 + up_far) > 2.0 * probe(up_near) / (1.0 + up_near) + 1e-300) {
        throw NonIntegrablePayoff("payoff grows faster than linearly in S'");
    }
    const double down_near = std::exp(lo) / 10.0;
    const double down_far = std::exp(lo) / 100.0;
    if (probe(down_far) > 2.0 * probe(down_near) + 1e-300) {
        throw NonIntegrablePayoff("payoff diverges as S' -> 0");
    }
}

} // namespace

void QuadratureSpec::validate() const {
    if (!(half_width >= 6.0)) throw DomainError("quadrature half-width must be >= 6");
    if (!(rel_tol > 0.0 && rel_tol <= 1e-4)) throw DomainError("quadrature tolerance must lie in (0, 1e-4]");
    if (base_panels < 1 || max_depth < 0) throw DomainError("invalid quadrature panel settings");
}

PropagatorValue propagator(double x, double y, double tau, const AlphaPair& alphas) {
    if (!(tau > 0.0)) throw DomainError("propagator requires tau > 0");
    const double z = x + alphas.alpha_x * tau;
    const double density = std::exp(-z * z / (2.0 * tau)) / std::sqrt(2.0 * std::numbers::pi * tau);
    return PropagatorValue{density, y + alphas.alpha_y * tau};
}

double price_generic(RegimeTag regime, const BubbleModel& bubble, double S, double f, double tau,
                     const MarketParams& m, const Payoff& payoff, const QuadratureSpec& spec) {
    spec.validate();
    if (tau < 0.0) throw DomainError("tau must be non-negative");
    if (!(S > 0.0)) throw DomainError("S must be positive");
    const BubbleKind kind = kind_of(bubble);
    const AlphaPair alphas = alphas_for(regime, kind, m);
    if (tau == 0.0) {
        return payoff(S, f);
    }

    std::function<double(double)> f0_at;
    if (kind == BubbleKind::Gaussian) {
        const auto& b = std::get<GaussianBubble>(bubble);
        f0_at = [=](double u) { return f0_gaussian(S, std::exp(u), f, tau, m, b, alphas.alpha_y); };
    } else {
        const auto& b = std::get<LognormalBubble>(bubble);
        if (!(f > 0.0)) throw DomainError("lognormal bubble requires f > 0");
        f0_at = [=](double u) { return f0_lognormal(S, std::exp(u), f, tau, m, b, alphas.alpha_y); };
    }

    const double sd = m.sigma * std::sqrt(tau);
    const double mean = std::log(S) + alphas.sum() * m.sigma * tau;
    const double norm = 1.0 / (sd * std::sqrt(2.0 * std::numbers::pi));
    KernelIntegrator integrand(
        [=, &payoff](double u) {
            const double z = (u - mean) / sd;
            const double w = norm * std::exp(-0.5 * z * z);
            return w == 0.0 ? 0.0 : w * payoff(std::exp(u), f0_at(u));
        },
        spec);

    std::vector<double> log_kinks;
    for (double k : payoff.kinks) {
        if (k > 0.0) log_kinks.push_back(std::log(k));
    }

    double lo = mean - spec.half_width * sd;
    double hi = mean + spec.half_width * sd;
    check_growth(payoff, f0_at, lo, hi);

    // A kink outside the window still bounds the support of e.g. a far OTM call.
    const double reach = kMaxReach * sd;
    for (double k : log_kinks) {
        if (k > hi) hi = std::max(hi, std::min(k + spec.half_width * sd, mean + reach));
        if (k < lo) lo = std::min(lo, std::max(k - spec.half_width * sd, mean - reach));
    }

    const double window = 2.0 * spec.half_width * sd;
    const int panels = static_cast<int>(std::ceil(spec.base_panels * (hi - lo) / window));
    const auto breaks = breakpoints(lo, hi, panels, log_kinks);

    // Rough magnitude first, then the adaptive pass against it.
    double scale = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        scale += std::abs(integrand.panel(breaks[i], breaks[i + 1]));
    }
    if (scale == 0.0) {
        return 0.0;
    }
    double psi = integrand.integrate(breaks, spec.rel_tol * scale);

    // Extend a tail while it still carries weight relative to the total.
    auto extend = [&](double edge, double step) {
        while (std::abs(edge - mean) < reach) {
            if (std::abs(integrand(edge)) * sd <= 1e-3 * spec.rel_tol * std::abs(psi)) break;
            const double next = edge + step;
            const double a = std::min(edge, next);
            const double b = std::max(edge, next);
            psi += integrand.integrate(breakpoints(a, b, 1, log_kinks), 1e-2 * spec.rel_tol * std::abs(psi));
            edge = next;
        }
    };
    extend(hi, sd);
    extend(lo, -sd);

    return regime_discount(regime, tau, m) * psi;
}

} // namespace bubble
