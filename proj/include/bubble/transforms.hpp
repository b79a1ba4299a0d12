/**
 * @file transforms.hpp
 * @brief Coordinate changes that turn the bubble PDE into a free diffusion.
 *
 * Gaussian bubble:
 *   u_bar = ln S - (r - sigma^2/2) t
 *   x_bar = (u_bar/sigma + f/Gamma)/2 - mu_f t / (2 Gamma)
 *   y_bar = (u_bar/sigma - f/Gamma)/2 + mu_f t / (2 Gamma)
 *
 * Lognormal bubble:
 *   v_bar = ln f - (mu_f_bar - Gamma_bar^2/2) t
 *   x = (u_bar/sigma + v_bar/Gamma_bar)/2,  y = (u_bar/sigma - v_bar/Gamma_bar)/2
 *
 * All charts use tau = T - t as the time coordinate.
 */
#pragma once

#include "bubble/model.hpp"

namespace bubble {

struct GaussCoords {
    double x_bar = 0.0;
    double y_bar = 0.0;
    double tau = 0.0;
};

struct LognCoords {
    double x = 0.0;
    double y = 0.0;
    double tau = 0.0;
};

/// A point of the original (S, f, t) space.
struct MarketPoint {
    double S = 0.0;
    double f = 0.0;
    double t = 0.0;
};

/**
 * Which chart the propagator solutions are read in.
 *
 * Frozen evaluates both the terminal and the current point in the t = 0 chart,
 * which is how the closed-form call prices are usually written. Moving keeps the
 * (r - sigma^2/2) t drift of u_bar, so the current point is shifted by
 * (r - sigma^2/2) tau in ln S relative to the terminal slice.
 */
enum class Chart { Frozen, Moving };

[[nodiscard]] GaussCoords gauss_forward(double S, double f, double t, const MarketParams& m,
                                        const GaussianBubble& b, double T);
[[nodiscard]] MarketPoint gauss_inverse(const GaussCoords& c, const MarketParams& m, const GaussianBubble& b,
                                        double T);
/// f = Gamma (x_bar - y_bar) + mu_f (T - tau), the exact inverse of the f-part of gauss_forward.
[[nodiscard]] double f_of_gauss_coords(const GaussCoords& c, const GaussianBubble& b, double T);

[[nodiscard]] LognCoords logn_forward(double S, double f, double t, const MarketParams& m,
                                      const LognormalBubble& b, double T);
[[nodiscard]] MarketPoint logn_inverse(const LognCoords& c, const MarketParams& m, const LognormalBubble& b,
                                       double T);
/// f = exp(Gamma_bar (x - y) + (mu_f_bar - Gamma_bar^2/2)(T - tau)); always positive.
[[nodiscard]] double f_of_logn_coords(const LognCoords& c, const LognormalBubble& b, double T);

/// Bubble level at the integration node S' after collapsing the y-delta (Gaussian).
[[nodiscard]] double f0_gaussian(double S, double S_prime, double f, double tau, const MarketParams& m,
                                 const GaussianBubble& b, double alpha_y_bar);

/// Bubble level at the integration node S' after collapsing the y-delta (lognormal).
[[nodiscard]] double f0_lognormal(double S, double S_prime, double f, double tau, const MarketParams& m,
                                  const LognormalBubble& b, double alpha_y);

} // namespace bubble
