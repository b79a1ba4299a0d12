#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <ostream>

#include "bubble/pde.hpp"
#include "csv.hpp"

namespace bubble {

namespace {

std::vector<double> lattice(double lo, double hi, std::size_t n, std::optional<double> anchor) {
    if (n < 2 || !(hi > lo)) throw DomainError("axis needs at least two nodes and hi > lo");
    const double h = (hi - lo) / static_cast<double>(n - 1);
    double origin = lo;
    std::size_t pinned = n;
    if (anchor && *anchor > lo && *anchor < hi) {
        const double k = std::round((*anchor - lo) / h);
        origin = *anchor - k * h;
        pinned = static_cast<std::size_t>(k);
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = origin + static_cast<double>(i) * h;
    if (pinned < n) x[pinned] = *anchor;
    return x;
}

/// Index of the first node of the 3-point stencil around x.
std::size_t stencil_start(const std::vector<double>& axis, double x) {
    const auto it = std::lower_bound(axis.begin(), axis.end(), x);
    std::size_t i = static_cast<std::size_t>(it - axis.begin());
    if (i > 0 && (i == axis.size() || x - axis[i - 1] < axis[i] - x)) --i;
    return std::clamp<std::size_t>(i, 1, axis.size() - 2) - 1;
}

std::array<double, 3> lagrange3(const double* n, double x) {
    return {(x - n[1]) * (x - n[2]) / ((n[0] - n[1]) * (n[0] - n[2])),
            (x - n[0]) * (x - n[2]) / ((n[1] - n[0]) * (n[1] - n[2])),
            (x - n[0]) * (x - n[1]) / ((n[2] - n[0]) * (n[2] - n[1]))};
}

} // namespace

std::vector<double> log_axis(double lo, double hi, std::size_t n, std::optional<double> anchor) {
    if (!(lo > 0.0)) throw DomainError("log axis requires lo > 0");
    std::optional<double> log_anchor;
    if (anchor) {
        if (!(*anchor > 0.0)) throw DomainError("log axis anchor must be positive");
        log_anchor = std::log(*anchor);
    }
    auto x = lattice(std::log(lo), std::log(hi), n, log_anchor);
    for (double& v : x) v = std::exp(v);
    if (anchor && *anchor > lo && *anchor < hi) {
        *std::min_element(x.begin(), x.end(), [&](double a, double b) {
            return std::abs(a - *anchor) < std::abs(b - *anchor);
        }) = *anchor;
    }
    return x;
}

std::vector<double> linear_axis(double lo, double hi, std::size_t n, std::optional<double> anchor) {
    return lattice(lo, hi, n, anchor);
}

std::pair<double, double> interior_s_range(const std::vector<double>& s, std::optional<double> strike) {
    if (strike) return {0.8 * *strike, 1.25 * *strike};
    const double a = std::log(s.front());
    const double b = std::log(s.back());
    return {std::exp(a + 0.25 * (b - a)), std::exp(b - 0.25 * (b - a))};
}

Grid2D Grid2D::make(std::vector<double> s, std::vector<double> f, std::size_t n_steps, const MarketParams& m,
                    double band) {
    m.validate();
    std::erase_if(f, [&](double x) { return std::abs(x - m.sigma) <= band; });
    Grid2D g{std::move(s), std::move(f), n_steps};
    if (g.s.size() < 16 || g.f.size() < 16) throw DomainError("grid axes need at least 16 nodes");
    if (!(g.s.front() > 0.0)) throw DomainError("S axis must be positive");
    if (!std::is_sorted(g.s.begin(), g.s.end(), std::less_equal<>{}) ||
        !std::is_sorted(g.f.begin(), g.f.end(), std::less_equal<>{})) {
        throw DomainError("grid axes must be strictly increasing");
    }
    if (n_steps < 1) throw DomainError("grid needs at least one time step");
    for (const auto& [a, b] : g.f_subdomains(m)) {
        if (b - a < 4) throw DomainError("the singular band leaves an f sub-domain with fewer than 4 nodes");
    }
    return g;
}

Grid2D Grid2D::make(std::vector<double> s, std::vector<double> f, std::size_t n_steps, const MarketParams& m) {
    return make(std::move(s), std::move(f), n_steps, m, default_singular_band(m));
}

std::vector<std::pair<std::size_t, std::size_t>> Grid2D::f_subdomains(const MarketParams& m) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t start = 0;
    for (std::size_t j = 0; j + 1 < f.size(); ++j) {
        if (f[j] < m.sigma && f[j + 1] > m.sigma) {
            out.emplace_back(start, j + 1);
            start = j + 1;
        }
    }
    out.emplace_back(start, f.size());
    return out;
}

double PriceSurface::interpolate(double S, double fv, std::size_t k) const {
    const std::size_t i0 = stencil_start(s, S);
    const std::size_t j0 = stencil_start(f, fv);
    const auto ws = lagrange3(&s[i0], S);
    const auto wf = lagrange3(&f[j0], fv);
    double v = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) v += ws[a] * wf[b] * at(i0 + a, j0 + b, k);
    }
    return v;
}

void PriceSurface::write_csv(std::ostream& os) const {
    os << "S,f,tau,V\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < f.size(); ++j) {
            for (std::size_t k = 0; k < tau.size(); ++k) {
                os << csv::num(s[i]) << ',' << csv::num(f[j]) << ',' << csv::num(tau[k]) << ','
                   << csv::num(at(i, j, k)) << '\n';
            }
        }
    }
}

double LineSurface::interpolate(double S, std::size_t k) const {
    const std::size_t i0 = stencil_start(s, S);
    const auto w = lagrange3(&s[i0], S);
    return w[0] * at(i0, k) + w[1] * at(i0 + 1, k) + w[2] * at(i0 + 2, k);
}

void LineSurface::write_csv(std::ostream& os) const {
    os << "S,f,tau,V\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t k = 0; k < tau.size(); ++k) {
            const double fv = bubble ? bubble(s[i], expiry - tau[k]) : 0.0;
            os << csv::num(s[i]) << ',' << csv::num(fv) << ',' << csv::num(tau[k]) << ',' << csv::num(at(i, k))
               << '\n';
        }
    }
}

} // namespace bubble
