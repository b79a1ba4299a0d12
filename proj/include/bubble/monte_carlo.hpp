/**
 * @file monte_carlo.hpp
 * @brief Path simulation of the coupled (S, f) dynamics and the Feynman-Kac price.
 *
 * One Brownian increment drives both factors on every step. S is stepped in
 * log space; a lognormal bubble is stepped in log space too, every other
 * bubble with plain Euler-Maruyama.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bubble/model.hpp"
#include "bubble/pde.hpp"

namespace bubble {

/// Master seed; path p always draws from the substream keyed by (seed, p).
struct RngSpec {
    std::uint64_t seed = 42;
};

/// Counter-based normal generator for one path (SplitMix64 + Box-Muller).
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on (0, 1].
    double uniform() noexcept;
    double normal() noexcept;

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/**
 * Physical: drifts mu S and mu_f.
 * Pricing: drifts (r + v(f)) S and mu_f - (mu - r) Gamma / (sigma - f), read off the PDE.
 */
enum class DriftMode { Physical, Pricing };

/// Full keeps every step; Endpoints keeps t = 0 and t = T only.
enum class RecordMode { Full, Endpoints };

struct SimulationSpec {
    double S0 = 1.0;
    double f0 = 0.0;
    double expiry = 1.0;
    std::size_t steps = 100;
    std::size_t n_paths = 1000;
    RngSpec rng;
    DriftMode drift = DriftMode::Pricing;
    RecordMode record = RecordMode::Endpoints;
    unsigned workers = 1;           ///< 0 picks std::thread::hardware_concurrency()
    std::optional<double> band;     ///< singular-band half-width; default 1e-3 sigma
};

struct PathBundle {
    SimulationSpec spec;
    std::size_t levels = 0;           ///< recorded time levels per path
    std::vector<double> S, f, D;      ///< path-major: path * levels + level
    std::vector<std::uint8_t> absorbed;

    [[nodiscard]] std::size_t index(std::size_t path, std::size_t level) const noexcept { return path * levels + level; }
    /// Step number of a recorded level.
    [[nodiscard]] std::size_t step_of(std::size_t level) const noexcept;
    [[nodiscard]] double time_of(std::size_t level) const noexcept;
    [[nodiscard]] std::size_t absorbed_count() const noexcept;

    /// CSV with header `path,step,t,S,f,D`; values after absorption are written as nan.
    void write_csv(std::ostream& os) const;
};

/// Simulates n_paths paths. Absorbed paths carry NaN after the absorbing step.
[[nodiscard]] PathBundle simulate(const MarketParams& m, const BubbleModel& bubble, const SimulationSpec& spec);

struct FeynmanKacResult {
    double value = 0.0;
    double std_error = 0.0;
    double absorbed_fraction = 0.0;
    std::size_t used_paths = 0;
};

/**
 * E[D_T Phi(S_T, f_T)] over non-absorbed paths. The bundle must be simulated
 * with DriftMode::Pricing. Throws TooFewPaths below 100 usable paths.
 */
[[nodiscard]] FeynmanKacResult feynman_kac_price(const MarketParams& m, const Contract& contract,
                                                 const PathBundle& paths);

struct ResidualOptions {
    double min_tau = 0.0;      ///< skip path points closer to expiry than this
    bool interior_only = true; ///< restrict S to interior_s_range of the surface
    double epsilon = 1e-12;    ///< added to the normalization
};

struct ResidualStats {
    double max = 0.0;
    double rms = 0.0;
    std::size_t points = 0;
};

/**
 * Hedging-determinant residual along paths:
 *
 *   R = (mu - r) S (sigma S V_S + Gamma V_f - V f) - (sigma - f) S (L - r V),
 *   L = V_t + mu S V_S + mu_f V_f + 1/2 sigma^2 S^2 V_SS + 1/2 Gamma^2 V_ff + sigma Gamma S V_Sf,
 *
 * normalized by |mu - r| sigma S^2 |V| + epsilon. Derivatives are central
 * differences at grid nodes, interpolated linearly in S and f and in tau
 * between stored levels. Only points whose surrounding cell has interior
 * nodes on both axes are used. The bundle must record every step.
 */
[[nodiscard]] ResidualStats replication_residual(const PriceSurface& surface, const PathBundle& paths,
                                                 const MarketParams& m, const BubbleModel& bubble,
                                                 const ResidualOptions& options = {});

/// Deterministic pairwise sum; the result depends only on the order of `v`.
[[nodiscard]] double pairwise_sum(const double* v, std::size_t n) noexcept;

} // namespace bubble
