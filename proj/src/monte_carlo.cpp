#include "bubble/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "csv.hpp"
#include "fd.hpp"

namespace bubble {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate(const MarketParams& m, const BubbleModel& bubble, const SimulationSpec& spec) {
    if (!std::isfinite(m.mu) || !std::isfinite(m.r) || !std::isfinite(m.sigma) || m.sigma < 0.0) {
        throw DomainError("simulate requires finite mu, r and sigma >= 0");
    }
    if (spec.steps < 1) throw DomainError("simulate requires at least one step");
    if (spec.n_paths < 1) throw DomainError("simulate requires at least one path");
    if (!(spec.S0 > 0.0)) throw DomainError("simulate requires S0 > 0");
    if (!(spec.expiry > 0.0)) throw DomainError("simulate requires T > 0");
    if (kind_of(bubble) == BubbleKind::Lognormal && !(spec.f0 > 0.0)) {
        throw DomainError("lognormal bubble requires f0 > 0");
    }
}

/// Simulates one path into the bundle slots of that path.
class PathStepper {
public:
    PathStepper(const MarketParams& m, const BubbleModel& bubble, const SimulationSpec& spec, double band)
        : m_(m), bubble_(bubble), spec_(spec), band_(band), kind_(kind_of(bubble)),
          dt_(spec.expiry / static_cast<double>(spec.steps)), sqdt_(std::sqrt(dt_)) {}

    void run(std::size_t path, PathBundle& out) const {
        PathRng rng(spec_.rng.seed, path);
        const bool pricing = spec_.drift == DriftMode::Pricing;
        const bool full = spec_.record == RecordMode::Full;
        const double half_var = 0.5 * m_.sigma * m_.sigma;

        double lnS = std::log(spec_.S0);
        double S = spec_.S0;
        double f = kind_ == BubbleKind::Deterministic ? det().f(S, 0.0) : spec_.f0;
        double lnf = kind_ == BubbleKind::Lognormal ? std::log(f) : 0.0;
        double D = 1.0;

        std::size_t level = 0;
        auto record = [&](double s, double ff, double d) {
            const std::size_t p = out.index(path, level++);
            out.S[p] = s;
            out.f[p] = ff;
            out.D[p] = d;
        };
        record(S, f, D);

        bool absorbed = false;
        for (std::size_t k = 0; k < spec_.steps; ++k) {
            const double gap = m_.sigma - f;
            if (std::abs(gap) <= band_) {
                absorbed = true;
                break;
            }
            const double t = static_cast<double>(k) * dt_;
            const double v = (m_.r - m_.mu) * f / gap;
            const double dW = sqdt_ * rng.normal();
            const double s_drift = pricing ? m_.r + v : m_.mu;

            switch (kind_) {
            case BubbleKind::Gaussian: {
                const auto& b = std::get<GaussianBubble>(bubble_);
                const double drift = pricing ? b.mu_f - (m_.mu - m_.r) * b.gamma / gap : b.mu_f;
                f += drift * dt_ + b.gamma * dW;
                break;
            }
            case BubbleKind::Lognormal: {
                const auto& b = std::get<LognormalBubble>(bubble_);
                const double rel = pricing ? b.mu_f_bar - (m_.mu - m_.r) * b.gamma_bar / gap : b.mu_f_bar;
                lnf += (rel - 0.5 * b.gamma_bar * b.gamma_bar) * dt_ + b.gamma_bar * dW;
                f = std::exp(lnf);
                break;
            }
            case BubbleKind::Generic: {
                const double g = bubble_vol(bubble_, S, f, t);
                const double drift =
                    pricing ? effective_f_drift(S, f, t, m_, bubble_, band_) : bubble_drift(bubble_, S, f, t);
                f += drift * dt_ + g * dW;
                break;
            }
            case BubbleKind::Deterministic: break;
            }

            lnS += (s_drift - half_var) * dt_ + m_.sigma * dW;
            S = std::exp(lnS);
            if (kind_ == BubbleKind::Deterministic) f = det().f(S, t + dt_);
            D *= std::exp(-(m_.r + v) * dt_);

            // Jumping across the pole between two steps also leaves the model.
            if ((m_.sigma - f) * gap < 0.0) {
                absorbed = true;
                break;
            }
            if (full || k + 1 == spec_.steps) record(S, f, D);
        }
        if (!absorbed && std::abs(m_.sigma - f) <= band_) absorbed = true;
        if (absorbed) {
            while (level < out.levels) record(kNaN, kNaN, kNaN);
        }
        out.absorbed[path] = absorbed ? 1 : 0;
    }

private:
    const DeterministicBubble& det() const { return std::get<DeterministicBubble>(bubble_); }

    MarketParams m_;
    const BubbleModel& bubble_;
    const SimulationSpec& spec_;
    double band_;
    BubbleKind kind_;
    double dt_, sqdt_;
};

/// Derivatives of the surface at one node.
struct Fields {
    double V = 0, VS = 0, Vf = 0, VSS = 0, Vff = 0, VSf = 0;

    Fields& operator+=(const Fields& o) {
        V += o.V;
        VS += o.VS;
        Vf += o.Vf;
        VSS += o.VSS;
        Vff += o.Vff;
        VSf += o.VSf;
        return *this;
    }
    Fields operator*(double w) const { return Fields{V * w, VS * w, Vf * w, VSS * w, Vff * w, VSf * w}; }
};

Fields node_fields(const PriceSurface& s, std::size_t i, std::size_t j, std::size_t k) {
    const fd::Weights3 d1s = fd::first_central(s.s[i] - s.s[i - 1], s.s[i + 1] - s.s[i]);
    const fd::Weights3 d2s = fd::second_central(s.s[i] - s.s[i - 1], s.s[i + 1] - s.s[i]);
    const fd::Weights3 d1f = fd::first_central(s.f[j] - s.f[j - 1], s.f[j + 1] - s.f[j]);
    const fd::Weights3 d2f = fd::second_central(s.f[j] - s.f[j - 1], s.f[j + 1] - s.f[j]);
    auto v = [&](int a, int b) { return s.at(i + a, j + b, k); };
    Fields out;
    out.V = v(0, 0);
    out.VS = d1s.m * v(-1, 0) + d1s.c * v(0, 0) + d1s.p * v(1, 0);
    out.VSS = d2s.m * v(-1, 0) + d2s.c * v(0, 0) + d2s.p * v(1, 0);
    out.Vf = d1f.m * v(0, -1) + d1f.c * v(0, 0) + d1f.p * v(0, 1);
    out.Vff = d2f.m * v(0, -1) + d2f.c * v(0, 0) + d2f.p * v(0, 1);
    const double ws[3] = {d1s.m, d1s.c, d1s.p};
    const double wf[3] = {d1f.m, d1f.c, d1f.p};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) out.VSf += ws[a] * wf[b] * v(a - 1, b - 1);
    }
    return out;
}

} // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) noexcept
    : state_(mix(seed + kGolden) ^ mix(path * kGolden + 0x632BE59BD9B4E019ULL)) {}

std::uint64_t PathRng::next_u64() noexcept {
    state_ += kGolden;
    return mix(state_);
}

double PathRng::uniform() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

double PathRng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double a = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::size_t PathBundle::step_of(std::size_t level) const noexcept {
    return spec.record == RecordMode::Full ? level : (level == 0 ? 0 : spec.steps);
}

double PathBundle::time_of(std::size_t level) const noexcept {
    return spec.expiry * static_cast<double>(step_of(level)) / static_cast<double>(spec.steps);
}

std::size_t PathBundle::absorbed_count() const noexcept {
    return static_cast<std::size_t>(std::count(absorbed.begin(), absorbed.end(), std::uint8_t{1}));
}

void PathBundle::write_csv(std::ostream& os) const {
    os << "path,step,t,S,f,D\n";
    for (std::size_t p = 0; p < spec.n_paths; ++p) {
        for (std::size_t l = 0; l < levels; ++l) {
            const std::size_t q = index(p, l);
            os << p << ',' << step_of(l) << ',' << csv::num(time_of(l)) << ',' << csv::num(S[q]) << ','
               << csv::num(f[q]) << ',' << csv::num(D[q]) << '\n';
        }
    }
}

PathBundle simulate(const MarketParams& m, const BubbleModel& bubble, const SimulationSpec& spec) {
    validate(m, bubble, spec);
    PathBundle out;
    out.spec = spec;
    out.levels = spec.record == RecordMode::Full ? spec.steps + 1 : 2;
    const std::size_t n = spec.n_paths * out.levels;
    out.S.assign(n, 0.0);
    out.f.assign(n, 0.0);
    out.D.assign(n, 0.0);
    out.absorbed.assign(spec.n_paths, 0);

    const double band = spec.band.value_or(default_singular_band(m));
    const PathStepper stepper(m, bubble, out.spec, band);

    unsigned workers = spec.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.workers;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, spec.n_paths));
    if (workers <= 1) {
        for (std::size_t p = 0; p < spec.n_paths; ++p) stepper.run(p, out);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (spec.n_paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t end = std::min(spec.n_paths, (w + 1) * chunk);
                for (std::size_t p = w * chunk; p < end; ++p) stepper.run(p, out);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

double pairwise_sum(const double* v, std::size_t n) noexcept {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

FeynmanKacResult feynman_kac_price(const MarketParams& m, const Contract& contract, const PathBundle& paths) {
    contract.validate();
    (void)m;
    if (paths.spec.drift != DriftMode::Pricing) {
        throw DomainError("Feynman-Kac pricing needs paths simulated with pricing drifts");
    }
    if (std::abs(paths.spec.expiry - contract.expiry) > 1e-12 * contract.expiry) {
        throw DomainError("path horizon differs from the contract expiry");
    }
    std::vector<double> x;
    x.reserve(paths.spec.n_paths);
    const std::size_t last = paths.levels - 1;
    for (std::size_t p = 0; p < paths.spec.n_paths; ++p) {
        if (paths.absorbed[p]) continue;
        const std::size_t q = paths.index(p, last);
        x.push_back(paths.D[q] * contract.payoff(paths.S[q], paths.f[q]));
    }
    FeynmanKacResult r;
    r.used_paths = x.size();
    r.absorbed_fraction = static_cast<double>(paths.absorbed_count()) / static_cast<double>(paths.spec.n_paths);
    if (x.size() < 100) throw TooFewPaths("fewer than 100 non-absorbed paths");
    const double n = static_cast<double>(x.size());
    r.value = pairwise_sum(x.data(), x.size()) / n;
    for (double& v : x) v = (v - r.value) * (v - r.value);
    r.std_error = std::sqrt(pairwise_sum(x.data(), x.size()) / (n - 1.0) / n);
    return r;
}

ResidualStats replication_residual(const PriceSurface& surface, const PathBundle& paths, const MarketParams& m,
                                   const BubbleModel& bubble, const ResidualOptions& options) {
    if (paths.spec.record != RecordMode::Full) throw DomainError("replication residual needs full path records");
    const double T = surface.contract.expiry;
    if (std::abs(paths.spec.expiry - T) > 1e-12 * T) throw DomainError("path horizon differs from the surface expiry");
    if (surface.tau.size() < 2) throw DomainError("surface needs at least two time levels");

    const auto& sa = surface.s;
    const auto& fa = surface.f;
    const auto [s_lo, s_hi] = interior_s_range(sa, surface.contract.strike);
    std::vector<int> side(fa.size()); // sub-domain id per f-node
    const auto domains = Grid2D{sa, fa, 1}.f_subdomains(m);
    std::vector<std::uint8_t> f_interior(fa.size(), 0);
    for (std::size_t d = 0; d < domains.size(); ++d) {
        for (std::size_t j = domains[d].first; j < domains[d].second; ++j) {
            side[j] = static_cast<int>(d);
            f_interior[j] = j > domains[d].first && j + 1 < domains[d].second;
        }
    }

    auto cell = [](const std::vector<double>& axis, double x) -> std::optional<std::size_t> {
        const auto it = std::upper_bound(axis.begin(), axis.end(), x);
        if (it == axis.begin() || it == axis.end()) return std::nullopt;
        return static_cast<std::size_t>(it - axis.begin()) - 1;
    };

    auto fields_at = [&](std::size_t i0, std::size_t j0, double wS, double wf, std::size_t k) {
        Fields out;
        out += node_fields(surface, i0, j0, k) * ((1 - wS) * (1 - wf));
        out += node_fields(surface, i0 + 1, j0, k) * (wS * (1 - wf));
        out += node_fields(surface, i0, j0 + 1, k) * ((1 - wS) * wf);
        out += node_fields(surface, i0 + 1, j0 + 1, k) * (wS * wf);
        return out;
    };

    std::vector<double> squares;
    ResidualStats stats;
    for (std::size_t p = 0; p < paths.spec.n_paths; ++p) {
        if (paths.absorbed[p]) continue;
        for (std::size_t l = 0; l < paths.levels; ++l) {
            const std::size_t q = paths.index(p, l);
            const double S = paths.S[q];
            const double f = paths.f[q];
            const double t = paths.time_of(l);
            const double tau = T - t;
            if (tau < options.min_tau || tau <= 0.0) continue;
            if (options.interior_only && (S < s_lo || S > s_hi)) continue;
            const auto ci = cell(sa, S);
            const auto cj = cell(fa, f);
            if (!ci || !cj) continue;
            const std::size_t i0 = *ci;
            const std::size_t j0 = *cj;
            if (i0 < 1 || i0 + 2 >= sa.size()) continue;
            if (side[j0] != side[j0 + 1] || !f_interior[j0] || !f_interior[j0 + 1]) continue;
            const auto ck = cell(surface.tau, tau);
            if (!ck) continue;
            const std::size_t k0 = *ck;
            const double wS = (S - sa[i0]) / (sa[i0 + 1] - sa[i0]);
            const double wf = (f - fa[j0]) / (fa[j0 + 1] - fa[j0]);
            const double dtau = surface.tau[k0 + 1] - surface.tau[k0];
            const double wt = (tau - surface.tau[k0]) / dtau;
            const Fields a = fields_at(i0, j0, wS, wf, k0);
            const Fields b = fields_at(i0, j0, wS, wf, k0 + 1);
            Fields x = a * (1 - wt);
            x += b * wt;
            const double Vt = -(b.V - a.V) / dtau;

            const double g = bubble_vol(bubble, S, f, t);
            const double muf = bubble_drift(bubble, S, f, t);
            const double L = Vt + m.mu * S * x.VS + muf * x.Vf + 0.5 * m.sigma * m.sigma * S * S * x.VSS +
                             0.5 * g * g * x.Vff + m.sigma * g * S * x.VSf;
            const double R = (m.mu - m.r) * S * (m.sigma * S * x.VS + g * x.Vf - x.V * f) -
                             (m.sigma - f) * S * (L - m.r * x.V);
            const double scale = std::abs(m.mu - m.r) * m.sigma * S * S * std::abs(x.V) + options.epsilon;
            const double z = std::abs(R) / scale;
            stats.max = std::max(stats.max, z);
            squares.push_back(z * z);
        }
    }
    stats.points = squares.size();
    if (!squares.empty()) {
        stats.rms = std::sqrt(pairwise_sum(squares.data(), squares.size()) / static_cast<double>(squares.size()));
    }
    return stats;
}

} // namespace bubble
