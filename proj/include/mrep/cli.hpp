#pragma once

// Command implementations behind the mrep executable. Each returns the process exit code and
// writes human-readable output to `out` and diagnostics to `err`.

#include <iosfwd>
#include <optional>
#include <random>
#include <string>

#include "mrep/scenario.hpp"
#include "mrep/stopping.hpp"

namespace mrep {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int solve_failure = 1;
inline constexpr int validation = 2;
inline constexpr int parse = 3;
inline constexpr int too_large = 4;
}  // namespace exit_code

int exit_code_for(ErrorCode code);

struct CommandOptions {
    std::optional<std::string> out;
    std::optional<std::string> residuals;  // solve: residual CSV, defaults to <out>.residuals.csv
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<double> tol_ell;
    std::optional<double> tol_eq;
    std::optional<std::size_t> cap;
    int random = 0;                        // oracle: number of random fixtures instead of a file
    std::string mode = "simulate";         // levy: simulate | signal | compare
    std::optional<double> eta;             // levy: sensor threshold override
};

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err);
int cmd_solve(const std::string& path, const CommandOptions& options, std::ostream& out, std::ostream& err);
/// Runs on the scenario at `path`, or on `options.random` random fixtures when that is positive.
int cmd_oracle(const std::optional<std::string>& path, const CommandOptions& options, std::ostream& out,
               std::ostream& err);
int cmd_levy(const std::string& path, const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Locale-independent, 17 significant digits; infinities as inf / -inf.
std::string format_double(double v);
std::string format_value(const ExtReal& v);

/// Every stopping time T ≥ 0 when there are at most `cap`, else all deterministic times plus
/// `samples` random ones.
std::vector<StoppingTime> verification_times(const FilteredTree& tree, std::size_t cap, int samples,
                                             std::uint64_t seed);

/// A random Λ-stopping time: at each instant every unstopped cell stops with probability 1/2.
StoppingTime random_stopping_time(const FilteredTree& tree, std::mt19937_64& rng);

/// Largest absolute disagreements between each solver and its brute-force oracle.
struct OracleGaps {
    double ess_inf = 0.0;           // L_S vs ess inf ℓ_{S,T} at finite enumerated S
    double envelope = 0.0;          // Y^ℓ_0 vs the stopping-time enumeration
    double divided = 0.0;           // Y^ℓ_0 vs the divided optimum and the classified contact time
    double universal_signal = 0.0;  // τ_ℓ vs the divided optimum
    [[nodiscard]] double max() const;
};

OracleGaps oracle_gaps(const Model& model, const RepresentationSolution& solution, const std::vector<double>& levels,
                       std::size_t cap = kDefaultEnumerationCap, double tol_eq = kDefaultTolEq);

/// Random fixtures with M ∈ {2, 3, 4} and N ∈ {1, 2, 3}, hypotheses holding by construction.
std::vector<Model> random_fixture_batch(std::uint64_t seed, int count, bool full_support = true);

}  // namespace mrep
