#pragma once

// Finite filtered probability spaces on a two-phase time grid.
//
// Grid times are 0..N. Each grid time t carries two phases: `At` (the instant
// t itself) and `Post` (the open interval (t, t+1); for t = N the interval
// (N, ∞)). The filtration F_t is a refining sequence of partitions, and the
// Meyer field is given by one partition G_t per grid time with
// F_{t-1} ≼ G_t ≼ F_t. At-phase values are read through G_t, post-phase values
// through F_t, and the time ∞ through F_N.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mrep/errors.hpp"

namespace mrep {

using Outcome = int;

enum class Phase : std::uint8_t { At = 0, Post = 1 };

/// A point of the phase grid, ordered (t, At) < (t, Post) < (t+1, At) < ... < never.
struct Instant {
    static constexpr int kNever = std::numeric_limits<int>::max();

    int time = 0;
    Phase phase = Phase::At;

    static constexpr Instant at(int t) { return {t, Phase::At}; }
    static constexpr Instant post(int t) { return {t, Phase::Post}; }
    static constexpr Instant never() { return {kNever, Phase::At}; }

    [[nodiscard]] constexpr bool is_never() const { return time == kNever; }
    [[nodiscard]] constexpr bool is_post() const { return phase == Phase::Post; }

    friend constexpr auto operator<=>(const Instant&, const Instant&) = default;
};

std::string to_string(Instant instant);

/// Dense index of an instant: 2t + phase, with ∞ mapped to 2(N+1).
constexpr int slot_index(Instant instant, int horizon) {
    return instant.is_never() ? 2 * (horizon + 1) : 2 * instant.time + static_cast<int>(instant.phase);
}

constexpr Instant instant_at_slot(int slot, int horizon) {
    if (slot >= 2 * (horizon + 1)) return Instant::never();
    return {slot / 2, slot % 2 == 0 ? Phase::At : Phase::Post};
}

/// Partition of {0..n-1} into nonempty disjoint cells. Cells are kept sorted and
/// ordered by smallest member, so equality is structural.
class Partition {
public:
    Partition() = default;
    Partition(std::vector<std::vector<Outcome>> cells, int outcome_count);

    static Partition trivial(int outcome_count);
    static Partition finest(int outcome_count);

    [[nodiscard]] int outcome_count() const { return static_cast<int>(cell_of_.size()); }
    [[nodiscard]] int cell_count() const { return static_cast<int>(cells_.size()); }
    [[nodiscard]] const std::vector<std::vector<Outcome>>& cells() const { return cells_; }
    [[nodiscard]] const std::vector<Outcome>& cell(int index) const { return cells_.at(index); }
    [[nodiscard]] int cell_of(Outcome w) const { return cell_of_.at(w); }

    /// True when every cell of this partition lies inside a single cell of `coarser`.
    [[nodiscard]] bool refines(const Partition& coarser) const;

    /// True when `members` (an indicator per outcome) is a union of cells.
    [[nodiscard]] bool is_union_of_cells(std::span<const char> members) const;

    /// True when `values` is constant on every cell up to `tol`.
    [[nodiscard]] bool is_constant_on_cells(std::span<const double> values, double tol = 0.0) const;

    friend bool operator==(const Partition& a, const Partition& b) { return a.cells_ == b.cells_; }

private:
    std::vector<std::vector<Outcome>> cells_;
    std::vector<int> cell_of_;
};

class FilteredTree {
public:
    /// Validates and builds the tree. Throws BadWeights, ShapeMismatch,
    /// NonRefining or MeyerOutOfBand.
    FilteredTree(std::vector<double> probs, std::vector<Partition> filtration,
                 std::vector<Partition> meyer);

    [[nodiscard]] int outcome_count() const { return static_cast<int>(probs_.size()); }
    [[nodiscard]] int horizon() const { return static_cast<int>(filtration_.size()) - 1; }
    [[nodiscard]] int slot_count() const { return 2 * (horizon() + 1); }
    [[nodiscard]] const std::vector<double>& probs() const { return probs_; }

    /// F_t for t in -1..N; F_{-1} is the trivial partition.
    [[nodiscard]] const Partition& filtration(int t) const;
    /// G_t for t in 0..N.
    [[nodiscard]] const Partition& meyer(int t) const { return meyer_.at(t); }
    /// The information available at `instant`: G_t at-phase, F_t post-phase, F_N at ∞.
    [[nodiscard]] const Partition& partition_at(Instant instant) const;

    [[nodiscard]] double probability(std::span<const Outcome> outcomes) const;

    friend bool operator==(const FilteredTree&, const FilteredTree&) = default;

private:
    std::vector<double> probs_;
    std::vector<Partition> filtration_;
    std::vector<Partition> meyer_;
    Partition trivial_;
};

/// Convenience form taking raw cell lists per time.
FilteredTree make_tree(std::vector<double> probs,
                       const std::vector<std::vector<std::vector<Outcome>>>& filtration,
                       const std::vector<std::vector<std::vector<Outcome>>>& meyer);

/// Cell-wise probability-weighted average of `values`.
std::vector<double> conditional_expectation(const FilteredTree& tree, std::span<const double> values,
                                            const Partition& partition);

class StoppingTime {
public:
    StoppingTime() = default;
    explicit StoppingTime(std::vector<Instant> values) : values_(std::move(values)) {}

    static StoppingTime constant(int outcome_count, Instant value) {
        return StoppingTime(std::vector<Instant>(static_cast<std::size_t>(outcome_count), value));
    }

    [[nodiscard]] Instant operator[](Outcome w) const { return values_.at(w); }
    [[nodiscard]] int size() const { return static_cast<int>(values_.size()); }
    [[nodiscard]] const std::vector<Instant>& values() const { return values_; }
    [[nodiscard]] bool is_finite() const;

    friend bool operator==(const StoppingTime&, const StoppingTime&) = default;

private:
    std::vector<Instant> values_;
};

/// Λ-stopping-time predicate: {S ≤ k} is a union of cells of the partition at k for every instant k.
bool is_stopping_time(const FilteredTree& tree, const StoppingTime& time);

/// Predictable surrogate: at-phase values only, and {S ≤ t} is F_{t-1}-measurable.
bool is_predictable_time(const FilteredTree& tree, const StoppingTime& time);

/// Partition generating F^Λ_S. Throws NotAStoppingTime.
Partition sigma_field_at(const FilteredTree& tree, const StoppingTime& time);

enum class PhaseSet { AtOnly, AtAndPost };

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

/// All Λ-stopping times T with T ≥ lower (T > lower on {lower < ∞} when `strict`),
/// taking finite values only in the phases of `phases`. Throws TooLarge past `cap`.
std::vector<StoppingTime> enumerate_stopping_times(const FilteredTree& tree, const StoppingTime& lower,
                                                   bool strict, PhaseSet phases = PhaseSet::AtAndPost,
                                                   std::size_t cap = kDefaultEnumerationCap);

/// Restriction of `time` to the outcomes in `members`, ∞ elsewhere.
StoppingTime restrict_to(const StoppingTime& time, std::span<const Outcome> members);

}  // namespace mrep
