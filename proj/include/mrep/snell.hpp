#pragma once

// Optimal stopping with running reward g_t(ℓ)μ_t: Snell envelopes, contact times,
// divided stopping times, and exhaustive oracles for small trees.

#include <vector>

#include "mrep/processes.hpp"

namespace mrep {

inline constexpr double kDefaultTolEq = 1e-9;

struct SnellEnvelope {
    double level = 0.0;
    LadlagProcess value;         // Y^ℓ
    LadlagProcess continuation;  // expected value of continuing, per slot
};

/// Backward recursion on the phase grid. Throws InvalidInput.
SnellEnvelope snell_envelope(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                             const CostField& g, double level);

/// One envelope per level, computed by up to `workers` threads; output order follows `levels`.
std::vector<SnellEnvelope> snell_envelope_grid(const FilteredTree& tree, const LadlagProcess& x,
                                               const RandomMeasure& mu, const CostField& g,
                                               const std::vector<double>& levels, int workers = 1);

/// Stopping times T ≥ S grouped by the cell of F^Λ_S on which they may differ from ∞.
struct CellStoppingTimes {
    std::vector<Outcome> cell;
    std::vector<StoppingTime> times;
};

std::vector<CellStoppingTimes> stopping_times_by_cell(const FilteredTree& tree, const StoppingTime& s, bool strict,
                                                      std::size_t cap = kDefaultEnumerationCap);

/// X_T + Σ_{[S,T)} g(ℓ)μ per outcome.
std::vector<double> stopped_payoff(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                   const CostField& g, double level, const StoppingTime& s, const StoppingTime& t);

/// ess sup over Λ-stopping times T ≥ S (both phases) of E[X_T + Σ_{[S,T)} g(ℓ)μ | F^Λ_S],
/// by enumeration. Throws TooLarge.
std::vector<double> envelope_oracle(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                    const CostField& g, double level, const StoppingTime& s,
                                    std::size_t cap = kDefaultEnumerationCap);

/// First instant k ≥ S with |Y_k − X_k| ≤ tol_eq·(1 + |X_k|); ∞ when there is none.
StoppingTime contact_time(const FilteredTree& tree, const LadlagProcess& x, const SnellEnvelope& y,
                          const StoppingTime& s, double tol_eq = kDefaultTolEq);

// --- divided stopping times -------------------------------------------------

/// Left stops at X_{T-}, At at X_T, Right at X_{T+}.
enum class StopMode : std::uint8_t { Left, At, Right };

/// (T, H^-, H, H^+) stored per outcome as an at-phase time (or ∞) and the set it belongs to.
class DividedStoppingTime {
public:
    DividedStoppingTime() = default;
    DividedStoppingTime(std::vector<int> times, std::vector<StopMode> modes);

    /// τ = (S, ∅, Ω, ∅) for an at-phase S.
    static DividedStoppingTime immediate(const StoppingTime& s);

    [[nodiscard]] int size() const { return static_cast<int>(times_.size()); }
    [[nodiscard]] int time(Outcome w) const { return times_.at(w); }
    [[nodiscard]] StopMode mode(Outcome w) const { return modes_.at(w); }
    [[nodiscard]] const std::vector<int>& times() const { return times_; }
    [[nodiscard]] const std::vector<StopMode>& modes() const { return modes_; }

    [[nodiscard]] std::vector<Outcome> members(StopMode mode) const;
    /// The phase-grid instant whose value τ collects: (T-1)+ on H^-, T on H, T+ on H^+.
    [[nodiscard]] Instant effective(Outcome w) const;
    [[nodiscard]] StoppingTime effective_time() const;
    /// Cost window end: [S, T) on H^- ∪ H, [S, T] on H^+.
    [[nodiscard]] WindowEnd window_end(Outcome w) const;

    friend bool operator==(const DividedStoppingTime&, const DividedStoppingTime&) = default;

private:
    std::vector<int> times_;
    std::vector<StopMode> modes_;
};

/// Empty string when τ is a valid divided stopping time, else the first reason it is not.
std::string divided_time_problem(const FilteredTree& tree, const DividedStoppingTime& tau);
inline bool is_divided_stopping_time(const FilteredTree& tree, const DividedStoppingTime& tau) {
    return divided_time_problem(tree, tau).empty();
}

/// T := contact time; contacts at an at-phase instant go to H, contacts on the interval after
/// t to H^+ at t. Throws ClassificationInconsistent if the result is not a valid τ.
DividedStoppingTime classify_contact(const FilteredTree& tree, const LadlagProcess& x, const SnellEnvelope& y,
                                     const StoppingTime& s, double tol_eq = kDefaultTolEq);

/// E[X_τ + Σ over the τ-window from S of g(ℓ)μ | F^Λ_S]. Throws InvalidDividedTime.
std::vector<double> divided_value(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                  const CostField& g, double level, const DividedStoppingTime& tau,
                                  const StoppingTime& s);

/// Every valid divided stopping time with effective instant ≥ S. Throws TooLarge.
std::vector<DividedStoppingTime> enumerate_divided_stopping_times(const FilteredTree& tree, const StoppingTime& s,
                                                                  std::size_t cap = kDefaultEnumerationCap);

struct DividedOptimum {
    std::vector<double> value;
    DividedStoppingTime tau;
};

/// Enumerates divided stopping times once per cell of F^Λ_S and maximizes for any level.
class DividedOracle {
public:
    DividedOracle(const FilteredTree& tree, const StoppingTime& s, std::size_t cap = kDefaultEnumerationCap);

    [[nodiscard]] DividedOptimum optimum(const LadlagProcess& x, const RandomMeasure& mu, const CostField& g,
                                         double level) const;
    [[nodiscard]] std::size_t candidate_count() const;

private:
    struct Cell {
        std::vector<Outcome> members;
        std::vector<DividedStoppingTime> candidates;
    };

    FilteredTree tree_;
    StoppingTime start_;
    std::vector<Cell> cells_;
};

/// Exhaustive maximum of divided_value over valid τ ≥ S. Ties prefer earlier T, then H over
/// H^+ over H^-, then the lexicographic order of the per-outcome choices.
DividedOptimum brute_force_divided_optimum(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                           const CostField& g, double level, const StoppingTime& s,
                                           std::size_t cap = kDefaultEnumerationCap);

}  // namespace mrep
