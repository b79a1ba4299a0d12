// Finite-difference building blocks shared by the PDE solvers.
//
// All line operators act on node values v_0..v_{n-1}. Interior rows are
// three-point stencils on a possibly non-uniform axis; the two end values are
// closed by linear extrapolation from the interior (discrete second
// difference zero), which keeps every linear function an exact solution.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bubble::fd {

struct Row3 {
    double l = 0.0;
    double d = 0.0;
    double u = 0.0;
};

struct Weights3 {
    double m = 0.0;
    double c = 0.0;
    double p = 0.0;
};

/// Central first derivative on spacings hm = x_i - x_{i-1}, hp = x_{i+1} - x_i.
inline Weights3 first_central(double hm, double hp) {
    return Weights3{-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

inline Weights3 second_central(double hm, double hp) {
    return Weights3{2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

/**
 * Row of diff * D2 + conv * D1 + react. Central differencing for D1 unless
 * that gives a negative off-diagonal, in which case D1 is upwinded toward the
 * side the information comes from (forward for conv > 0).
 */
inline Row3 convection_diffusion_row(double diff, double conv, double react, double hm, double hp) {
    const Weights3 d2 = second_central(hm, hp);
    const Weights3 d1 = first_central(hm, hp);
    Row3 row{diff * d2.m + conv * d1.m, diff * d2.c + conv * d1.c + react, diff * d2.p + conv * d1.p};
    if (row.l < 0.0 || row.u < 0.0) {
        if (conv > 0.0) {
            row = Row3{diff * d2.m, diff * d2.c - conv / hp + react, diff * d2.p + conv / hp};
        } else {
            row = Row3{diff * d2.m - conv / hm, diff * d2.c + conv / hm + react, diff * d2.p};
        }
    }
    return row;
}

/// Extrapolation ratios: v_0 = (1 + lo) v_1 - lo v_2, v_{n-1} = (1 + hi) v_{n-2} - hi v_{n-3}.
struct EndClosure {
    double lo = 0.0;
    double hi = 0.0;

    static EndClosure for_axis(std::span<const double> x) {
        const std::size_t n = x.size();
        return EndClosure{(x[1] - x[0]) / (x[2] - x[1]), (x[n - 1] - x[n - 2]) / (x[n - 2] - x[n - 3])};
    }

    template <class Get, class Set>
    void fill(std::size_t n, Get get, Set set) const {
        set(0, (1.0 + lo) * get(1) - lo * get(2));
        set(n - 1, (1.0 + hi) * get(n - 2) - hi * get(n - 3));
    }

    void fill(std::span<double> v) const {
        fill(
            v.size(), [&](std::size_t i) { return v[i]; }, [&](std::size_t i, double x) { v[i] = x; });
    }
};

/// out_i = (A v)_i on the interior; ends set to zero.
inline void apply_line(std::span<const Row3> rows, std::span<const double> v, std::span<double> out) {
    const std::size_t n = v.size();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out[i] = rows[i].l * v[i - 1] + rows[i].d * v[i] + rows[i].u * v[i + 1];
    }
}

/// Scratch space for the tridiagonal solves, reused across lines.
struct LineWorkspace {
    std::vector<double> sub, diag, super, rhs;

    void resize(std::size_t n) {
        sub.resize(n);
        diag.resize(n);
        super.resize(n);
        rhs.resize(n);
    }
};

/**
 * Solves (I - k A) y = rhs on the interior nodes with the end values tied to
 * the interior by `closure`, then fills the two ends. `rows` and `rhs` are
 * indexed by node; their end entries are ignored.
 */
inline void solve_implicit_line(std::span<const Row3> rows, double k, const EndClosure& closure,
                                std::span<const double> rhs, std::span<double> y, LineWorkspace& ws) {
    const std::size_t n = y.size();
    const std::size_t m = n - 2;
    ws.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        const Row3& row = rows[r + 1];
        ws.sub[r] = -k * row.l;
        ws.diag[r] = 1.0 - k * row.d;
        ws.super[r] = -k * row.u;
        ws.rhs[r] = rhs[r + 1];
    }
    // Substitute the extrapolated end values into the first and last rows.
    ws.diag[0] += ws.sub[0] * (1.0 + closure.lo);
    ws.super[0] -= ws.sub[0] * closure.lo;
    ws.sub[0] = 0.0;
    ws.diag[m - 1] += ws.super[m - 1] * (1.0 + closure.hi);
    ws.sub[m - 1] -= ws.super[m - 1] * closure.hi;
    ws.super[m - 1] = 0.0;

    // Thomas algorithm.
    for (std::size_t r = 1; r < m; ++r) {
        const double w = ws.sub[r] / ws.diag[r - 1];
        ws.diag[r] -= w * ws.super[r - 1];
        ws.rhs[r] -= w * ws.rhs[r - 1];
    }
    y[m] = ws.rhs[m - 1] / ws.diag[m - 1];
    for (std::size_t r = m - 1; r-- > 0;) {
        y[r + 1] = (ws.rhs[r] - ws.super[r] * y[r + 2]) / ws.diag[r];
    }
    closure.fill(y);
}

} // namespace bubble::fd
