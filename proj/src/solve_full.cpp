#include <algorithm>
#include <cmath>

#include "bubble/pde.hpp"
#include "fd.hpp"

namespace bubble {

namespace {

using fd::Row3;

/// Discrete operators of the two-factor equation; values are stored S-major (i * nf + j).
class FullOperator {
public:
    FullOperator(const MarketParams& m, const BubbleModel& bubble, const Grid2D& grid, double band)
        : m_(m), bubble_(bubble), s_(grid.s), f_(grid.f), ns_(grid.s.size()), nf_(grid.f.size()), band_(band),
          domains_(grid.f_subdomains(m)), s_close_(fd::EndClosure::for_axis(s_)) {
        for (const auto& [a, b] : domains_) {
            f_close_.push_back(fd::EndClosure::for_axis(std::span(f_).subspan(a, b - a)));
        }
        a1_.resize(ns_ * nf_);
        a2_.resize(ns_ * nf_);
        mixed_.resize(ns_ * nf_);
        v_.resize(nf_);
        for (std::size_t j = 0; j < nf_; ++j) v_[j] = potential_v(f_[j], m_, band_);
    }

    std::size_t size() const { return ns_ * nf_; }

    /// Rebuilds the coefficient rows at calendar time t.
    void assemble(double t) {
        const double half_var = 0.5 * m_.sigma * m_.sigma;
        for (std::size_t j = 0; j < nf_; ++j) {
            const double rate = m_.r + v_[j];
            for (std::size_t i = 1; i + 1 < ns_; ++i) {
                const double S = s_[i];
                a1_[j * ns_ + i] = fd::convection_diffusion_row(half_var * S * S, rate * S, -rate, S - s_[i - 1],
                                                                s_[i + 1] - S);
            }
        }
        for (std::size_t i = 0; i < ns_; ++i) {
            for (const auto& [a, b] : domains_) {
                for (std::size_t j = a + 1; j + 1 < b; ++j) {
                    const double g = bubble_vol(bubble_, s_[i], f_[j], t);
                    const double drift = effective_f_drift(s_[i], f_[j], t, m_, bubble_, band_);
                    a2_[i * nf_ + j] =
                        fd::convection_diffusion_row(0.5 * g * g, drift, 0.0, f_[j] - f_[j - 1], f_[j + 1] - f_[j]);
                    mixed_[i * nf_ + j] = s_[i] * m_.sigma * g;
                }
            }
        }
    }

    template <class Fn>
    void for_interior(Fn fn) const {
        for (std::size_t i = 1; i + 1 < ns_; ++i) {
            for (const auto& [a, b] : domains_) {
                for (std::size_t j = a + 1; j + 1 < b; ++j) fn(i, j);
            }
        }
    }

    /// out = A1 u on interior nodes, zero elsewhere.
    void apply_a1(const std::vector<double>& u, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for_interior([&](std::size_t i, std::size_t j) {
            const Row3& r = a1_[j * ns_ + i];
            const std::size_t p = i * nf_ + j;
            out[p] = r.l * u[p - nf_] + r.d * u[p] + r.u * u[p + nf_];
        });
    }

    void apply_a2(const std::vector<double>& u, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for_interior([&](std::size_t i, std::size_t j) {
            const Row3& r = a2_[i * nf_ + j];
            const std::size_t p = i * nf_ + j;
            out[p] = r.l * u[p - 1] + r.d * u[p] + r.u * u[p + 1];
        });
    }

    void apply_a0(const std::vector<double>& u, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for_interior([&](std::size_t i, std::size_t j) {
            const double c = mixed_[i * nf_ + j];
            if (c == 0.0) return;
            const fd::Weights3 ws = fd::first_central(s_[i] - s_[i - 1], s_[i + 1] - s_[i]);
            const fd::Weights3 wf = fd::first_central(f_[j] - f_[j - 1], f_[j + 1] - f_[j]);
            const double wsv[3] = {ws.m, ws.c, ws.p};
            const double wfv[3] = {wf.m, wf.c, wf.p};
            double sum = 0.0;
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) sum += wsv[a] * wfv[b] * u[(i + a - 1) * nf_ + (j + b - 1)];
            }
            out[i * nf_ + j] = c * sum;
        });
    }

    /// out = (A0 + A1 + A2) u.
    void apply_all(const std::vector<double>& u, std::vector<double>& out) {
        apply_a0(u, out);
        tmp_.resize(size());
        apply_a1(u, tmp_);
        for (std::size_t p = 0; p < out.size(); ++p) out[p] += tmp_[p];
        apply_a2(u, tmp_);
        for (std::size_t p = 0; p < out.size(); ++p) out[p] += tmp_[p];
    }

    /// Solves (I - k A1) y = rhs along every S-line, then fills the f-ends.
    void solve_a1(double k, const std::vector<double>& rhs, std::vector<double>& y) {
        line_rhs_.resize(ns_);
        line_y_.resize(ns_);
        for (const auto& [a, b] : domains_) {
            for (std::size_t j = a + 1; j + 1 < b; ++j) {
                for (std::size_t i = 0; i < ns_; ++i) line_rhs_[i] = rhs[i * nf_ + j];
                fd::solve_implicit_line(std::span(a1_).subspan(j * ns_, ns_), k, s_close_, line_rhs_, line_y_, ws_);
                for (std::size_t i = 0; i < ns_; ++i) y[i * nf_ + j] = line_y_[i];
            }
        }
        fill_f(y);
    }

    /// Solves (I - k A2) y = rhs along every f-line of every sub-domain, then fills the S-ends.
    void solve_a2(double k, const std::vector<double>& rhs, std::vector<double>& y) {
        for (std::size_t i = 1; i + 1 < ns_; ++i) {
            for (std::size_t d = 0; d < domains_.size(); ++d) {
                const auto [a, b] = domains_[d];
                const std::size_t off = i * nf_ + a;
                fd::solve_implicit_line(std::span(a2_).subspan(off, b - a), k, f_close_[d],
                                        std::span(rhs).subspan(off, b - a), std::span(y).subspan(off, b - a), ws_);
            }
        }
        fill_s(y);
    }

    void fill_s(std::vector<double>& y) const {
        for (std::size_t j = 0; j < nf_; ++j) {
            s_close_.fill(
                ns_, [&](std::size_t i) { return y[i * nf_ + j]; }, [&](std::size_t i, double x) { y[i * nf_ + j] = x; });
        }
    }

    void fill_f(std::vector<double>& y) const {
        for (std::size_t i = 0; i < ns_; ++i) {
            for (std::size_t d = 0; d < domains_.size(); ++d) {
                const auto [a, b] = domains_[d];
                f_close_[d].fill(std::span(y).subspan(i * nf_ + a, b - a));
            }
        }
    }

    void fill_all(std::vector<double>& y) const {
        fill_s(y);
        fill_f(y);
    }

private:
    MarketParams m_;
    const BubbleModel& bubble_;
    const std::vector<double>& s_;
    const std::vector<double>& f_;
    std::size_t ns_, nf_;
    double band_;
    std::vector<std::pair<std::size_t, std::size_t>> domains_;
    fd::EndClosure s_close_;
    std::vector<fd::EndClosure> f_close_;
    std::vector<Row3> a1_; // S-lines contiguous: j * ns + i
    std::vector<Row3> a2_; // f-lines contiguous: i * nf + j
    std::vector<double> mixed_;
    std::vector<double> v_;
    std::vector<double> tmp_, line_rhs_, line_y_;
    fd::LineWorkspace ws_;
};

/// Buffers for one time step.
struct StepBuffers {
    std::vector<double> fu, y0, y1, y2, rhs, work;

    explicit StepBuffers(std::size_t n) : fu(n), y0(n), y1(n), y2(n), rhs(n), work(n) {}
};

/// Douglas step with theta = 1: fully implicit in each direction, explicit mixed term.
void douglas_step(FullOperator& op, double dt, std::vector<double>& u, StepBuffers& b) {
    op.apply_all(u, b.fu);
    for (std::size_t p = 0; p < u.size(); ++p) b.y0[p] = u[p] + dt * b.fu[p];
    op.apply_a1(u, b.work);
    for (std::size_t p = 0; p < u.size(); ++p) b.rhs[p] = b.y0[p] - dt * b.work[p];
    op.solve_a1(dt, b.rhs, b.y1);
    op.apply_a2(u, b.work);
    for (std::size_t p = 0; p < u.size(); ++p) b.rhs[p] = b.y1[p] - dt * b.work[p];
    op.solve_a2(dt, b.rhs, u);
}

/// Modified Craig-Sneyd step.
void mcs_step(FullOperator& op, double dt, double theta, std::vector<double>& u, StepBuffers& b) {
    const std::size_t n = u.size();
    std::vector<double>& a1u = b.work;
    std::vector<double> a2u(n), a0u(n), scratch(n);

    op.apply_all(u, b.fu);
    op.apply_a1(u, a1u);
    op.apply_a2(u, a2u);
    op.apply_a0(u, a0u);
    for (std::size_t p = 0; p < n; ++p) b.y0[p] = u[p] + dt * b.fu[p];

    auto sweeps = [&](const std::vector<double>& start, std::vector<double>& out) {
        for (std::size_t p = 0; p < n; ++p) b.rhs[p] = start[p] - theta * dt * a1u[p];
        op.solve_a1(theta * dt, b.rhs, b.y1);
        for (std::size_t p = 0; p < n; ++p) b.rhs[p] = b.y1[p] - theta * dt * a2u[p];
        op.solve_a2(theta * dt, b.rhs, out);
    };

    sweeps(b.y0, b.y2);

    op.apply_a0(b.y2, scratch);
    for (std::size_t p = 0; p < n; ++p) b.y0[p] += theta * dt * (scratch[p] - a0u[p]);
    op.apply_all(b.y2, scratch);
    for (std::size_t p = 0; p < n; ++p) b.y0[p] += (0.5 - theta) * dt * (scratch[p] - b.fu[p]);

    sweeps(b.y0, u);
}

} // namespace

PriceSurface solve_full(const MarketParams& m, const BubbleModel& bubble, const Contract& contract,
                        const Grid2D& grid, const SchemeOptions& options) {
    m.validate();
    contract.validate();
    const BubbleKind kind = kind_of(bubble);
    if (kind == BubbleKind::Deterministic) {
        throw Unsupported("solve_full needs a stochastic bubble; use solve_deterministic");
    }
    const double band = options.band.value_or(default_singular_band(m));
    for (double fv : grid.f) {
        if (std::abs(fv - m.sigma) <= band) throw SingularBand("f-grid has a node inside the singular band");
    }
    if (grid.s.size() < 4 || grid.n_steps < 1) throw DomainError("grid too small");
    for (const auto& [a, b] : grid.f_subdomains(m)) {
        if (b - a < 4) throw DomainError("f sub-domain with fewer than 4 nodes");
    }
    if (options.save_every < 1) throw DomainError("save_every must be >= 1");

    const std::size_t ns = grid.s.size();
    const std::size_t nf = grid.f.size();
    const double T = contract.expiry;
    const double dt = T / static_cast<double>(grid.n_steps);

    std::vector<std::size_t> saved;
    for (std::size_t n = 0; n <= grid.n_steps; ++n) {
        if (n % options.save_every == 0 || n == grid.n_steps) saved.push_back(n);
    }

    PriceSurface out;
    out.s = grid.s;
    out.f = grid.f;
    out.params = m;
    out.bubble = bubble;
    out.contract = contract;
    out.scheme = "mcs-adi theta=" + std::to_string(options.theta) + " damping=" + std::to_string(options.damping_steps);
    for (std::size_t n : saved) out.tau.push_back(static_cast<double>(n) * dt);
    out.values.assign(ns * nf * saved.size(), 0.0);

    std::vector<double> u(ns * nf);
    double bound = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t j = 0; j < nf; ++j) {
            u[i * nf + j] = contract.payoff(grid.s[i], grid.f[j]);
            if (!std::isfinite(u[i * nf + j])) throw DomainError("payoff is not finite on the grid");
            bound = std::max(bound, std::abs(u[i * nf + j]));
        }
    }

    std::size_t level = 0;
    auto store = [&](std::size_t n) {
        if (level < saved.size() && saved[level] == n) {
            for (std::size_t p = 0; p < ns * nf; ++p) out.values[p * saved.size() + level] = u[p];
            ++level;
        }
    };
    store(0);

    FullOperator op(m, bubble, grid, band);
    const bool time_dependent = kind == BubbleKind::Generic;
    op.assemble(T);
    StepBuffers buf(ns * nf);

    for (std::size_t n = 0; n < grid.n_steps; ++n) {
        const double tau_mid = (static_cast<double>(n) + 0.5) * dt;
        if (time_dependent) op.assemble(T - tau_mid);
        if (n < options.damping_steps) {
            douglas_step(op, 0.5 * dt, u, buf);
            douglas_step(op, 0.5 * dt, u, buf);
        } else {
            mcs_step(op, dt, options.theta, u, buf);
        }
        for (double x : u) {
            if (!std::isfinite(x) || std::abs(x) > options.blowup_factor * bound) {
                throw InstabilityDetected("solution exceeded the payoff bound at tau = " +
                                          std::to_string(tau_mid + 0.5 * dt));
            }
        }
        store(n + 1);
    }
    return out;
}

} // namespace bubble
