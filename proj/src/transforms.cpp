#include "bubble/transforms.hpp"

#include <cmath>

namespace bubble {

namespace {

double log_drift(const MarketParams& m) { return m.r - 0.5 * m.sigma * m.sigma; }

void check_time(double t, double T) {
    if (!(t >= 0.0 && t <= T)) {
        throw DomainError("time must lie in [0, T]");
    }
}

} // namespace

GaussCoords gauss_forward(double S, double f, double t, const MarketParams& m, const GaussianBubble& b,
                          double T) {
    if (!(S > 0.0)) throw DomainError("gauss_forward requires S > 0");
    if (b.gamma == 0.0) throw DomainError("gauss_forward requires Gamma != 0");
    check_time(t, T);
    const double u_bar = std::log(S) - log_drift(m) * t;
    const double a = u_bar / m.sigma;
    const double c = f / b.gamma;
    const double shift = b.mu_f * t / (2.0 * b.gamma);
    return GaussCoords{0.5 * (a + c) - shift, 0.5 * (a - c) + shift, T - t};
}

MarketPoint gauss_inverse(const GaussCoords& c, const MarketParams& m, const GaussianBubble& b, double T) {
    const double t = T - c.tau;
    const double u_bar = m.sigma * (c.x_bar + c.y_bar);
    return MarketPoint{std::exp(u_bar + log_drift(m) * t), f_of_gauss_coords(c, b, T), t};
}

double f_of_gauss_coords(const GaussCoords& c, const GaussianBubble& b, double T) {
    return b.gamma * (c.x_bar - c.y_bar) + b.mu_f * (T - c.tau);
}

LognCoords logn_forward(double S, double f, double t, const MarketParams& m, const LognormalBubble& b,
                        double T) {
    if (!(S > 0.0)) throw DomainError("logn_forward requires S > 0");
    if (!(f > 0.0)) throw DomainError("lognormal bubble requires f > 0");
    if (!(b.gamma_bar > 0.0)) throw DomainError("logn_forward requires Gamma_bar > 0");
    check_time(t, T);
    const double u_bar = std::log(S) - log_drift(m) * t;
    const double v_bar = std::log(f) - (b.mu_f_bar - 0.5 * b.gamma_bar * b.gamma_bar) * t;
    const double a = u_bar / m.sigma;
    const double c = v_bar / b.gamma_bar;
    return LognCoords{0.5 * (a + c), 0.5 * (a - c), T - t};
}

MarketPoint logn_inverse(const LognCoords& c, const MarketParams& m, const LognormalBubble& b, double T) {
    const double t = T - c.tau;
    const double u_bar = m.sigma * (c.x + c.y);
    return MarketPoint{std::exp(u_bar + log_drift(m) * t), f_of_logn_coords(c, b, T), t};
}

double f_of_logn_coords(const LognCoords& c, const LognormalBubble& b, double T) {
    return std::exp(b.gamma_bar * (c.x - c.y) + (b.mu_f_bar - 0.5 * b.gamma_bar * b.gamma_bar) * (T - c.tau));
}

double f0_gaussian(double S, double S_prime, double f, double tau, const MarketParams& m, const GaussianBubble& b,
                   double alpha_y_bar) {
    return f - (b.gamma / m.sigma) * std::log(S / S_prime) - 2.0 * b.gamma * alpha_y_bar * tau;
}

double f0_lognormal(double S, double S_prime, double f, double tau, const MarketParams& m, const LognormalBubble& b,
                    double alpha_y) {
    return f * std::pow(S_prime / S, b.gamma_bar / m.sigma) * std::exp(-2.0 * b.gamma_bar * alpha_y * tau);
}

} // namespace bubble
