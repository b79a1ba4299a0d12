/**
 * @file figures.hpp
 * @brief Weak and strong pure-call curves for the two published parameter sets.
 */
#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bubble/closed_form.hpp"
#include "bubble/model.hpp"

namespace bubble {

struct FigureSpec {
    MarketParams params;
    double strike = 10.0;
    double tau = 1.0; ///< the captions give no time to expiry
    double s_min = 0.1;
    double s_max = 30.0;
    std::size_t points = 300; ///< evenly spaced on [s_min, s_max]
    Chart chart = Chart::Frozen;

    /// Figure 1: mu = 0.8, r = 0.2, sigma = 0.4, E = 10. Figure 2 swaps mu and r.
    [[nodiscard]] static FigureSpec published(int figure);
};

struct FigureData {
    std::vector<double> s, weak, strong;

    /// CSV with header `S,V_weak,V_strong`.
    void write_csv(std::ostream& os) const;
};

[[nodiscard]] FigureData figure_data(const FigureSpec& spec);

} // namespace bubble
