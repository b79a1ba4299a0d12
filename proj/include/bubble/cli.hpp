/**
 * @file cli.hpp
 * @brief Command-line front end: config handling and the five commands.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bubble::cli {

/// Flat run configuration; every field corresponds to the flag of the same name.
struct RunConfig {
    double S = 10.0;
    double f = 0.1;
    double strike = 10.0;
    double tau = 1.0;
    double r = 0.2;
    double mu = 0.8;
    double sigma = 0.4;
    double gamma = 0.05;  ///< Gamma (gaussian) or Gamma_bar (lognormal)
    double muf = 0.0;     ///< mu_f (gaussian, deterministic slope) or mu_f_bar (lognormal)
    std::string model = "gaussian";
    std::string regime = "weak";
    std::string engine = "closed";
    std::string contract = "call";
    std::string chart = "frozen";
    std::size_t grid_ns = 129;
    std::size_t grid_nf = 65;
    std::size_t grid_nt = 128;
    std::size_t paths = 100000;
    std::size_t steps = 100;
    std::uint64_t seed = 42;
    unsigned workers = 0;
    std::string drift = "pricing";
    std::string record = "endpoints";
    std::string out;

    /// Keys given on the command line or in a config file.
    std::set<std::string> explicit_keys;

    [[nodiscard]] bool is_set(const std::string& key) const { return explicit_keys.count(key) > 0; }
};

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2 };

/// Thrown for malformed or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Checks enumerations, positivity and engine/regime compatibility.
void validate_config(const RunConfig& cfg);

/// Flat JSON object keyed by flag names (without leading dashes).
[[nodiscard]] std::string to_json(const RunConfig& cfg);
/// Overlays the keys of a JSON object; unknown keys or wrong types throw ConfigError.
void apply_json(RunConfig& cfg, const std::string& text, bool mark_explicit = true);

/// Runs the command line; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace bubble::cli
