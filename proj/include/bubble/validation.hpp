/**
 * @file validation.hpp
 * @brief Self-checks of the pricing engines against independent references.
 *
 * Every suite returns rows of the form (check, expected, actual, tolerance);
 * a row passes iff |actual - expected| <= tolerance. Error metrics are
 * reported with expected = 0.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bubble {

struct CheckRow {
    std::string check;
    double expected = 0.0;
    double actual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

[[nodiscard]] CheckRow make_row(std::string check, double expected, double actual, double tolerance);

struct ValidationConfig {
    std::uint64_t seed = 42;
    std::size_t draws = 50;          ///< random parameter draws for the oracle suite
    std::size_t paths = 1'000'000;
    std::size_t steps = 200;
    unsigned workers = 0;            ///< 0 = hardware concurrency
    std::size_t grid_ns = 257;       ///< two-factor grid used against Monte Carlo
    std::size_t grid_nf = 129;
    std::size_t grid_nt = 256;
};

/// Quadrature vs closed form over random draws, every regime x model pair.
[[nodiscard]] std::vector<CheckRow> check_oracle(const ValidationConfig& cfg);
/// One-factor solver with f == 0 against Black-Scholes at rate r.
[[nodiscard]] std::vector<CheckRow> check_zero_bubble(const ValidationConfig& cfg);
/// One-factor solver with f == 100 sigma against Black-Scholes at rate mu.
[[nodiscard]] std::vector<CheckRow> check_large_bubble(const ValidationConfig& cfg);
/// Two-factor solver with Gamma = 0 against the one-factor solver.
[[nodiscard]] std::vector<CheckRow> check_reduction(const ValidationConfig& cfg);
/// Chart solver with call data against psi_call, weak and strong.
[[nodiscard]] std::vector<CheckRow> check_asymptotic(const ValidationConfig& cfg);
/// Feynman-Kac Monte Carlo against the two-factor solver.
[[nodiscard]] std::vector<CheckRow> check_feynman_kac(const ValidationConfig& cfg);
[[nodiscard]] std::vector<CheckRow> check_invariants(const ValidationConfig& cfg);
/// Structural checks on the two published figure curves.
[[nodiscard]] std::vector<CheckRow> check_figures(const ValidationConfig& cfg);

/// Suite names: oracle, deterministic, reduction, asymptotic, mc, invariants, figures, all.
[[nodiscard]] std::vector<std::string_view> suite_names();
/// Throws DomainError for an unknown name.
[[nodiscard]] std::vector<CheckRow> run_suite(std::string_view name, const ValidationConfig& cfg);

/// CSV with header `check,expected,actual,tolerance,pass`.
void write_report(std::ostream& os, const std::vector<CheckRow>& rows);
[[nodiscard]] bool all_pass(const std::vector<CheckRow>& rows) noexcept;

} // namespace bubble
