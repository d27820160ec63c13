#include "mrep/probspace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace mrep {

std::string to_string(Instant instant) {
    if (instant.is_never()) return "inf";
    return std::to_string(instant.time) + (instant.is_post() ? "+" : "");
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(std::vector<std::vector<Outcome>> cells, int outcome_count)
    : cells_(std::move(cells)), cell_of_(static_cast<std::size_t>(outcome_count), -1) {
    if (outcome_count <= 0) throw Error(ErrorCode::ShapeMismatch, "partition of an empty outcome set");
    for (auto& c : cells_) {
        if (c.empty()) throw Error(ErrorCode::ShapeMismatch, "empty partition cell");
        std::sort(c.begin(), c.end());
    }
    std::sort(cells_.begin(), cells_.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (int i = 0; i < cell_count(); ++i) {
        for (Outcome w : cells_[i]) {
            if (w < 0 || w >= outcome_count)
                throw Error(ErrorCode::ShapeMismatch, "outcome " + std::to_string(w) + " out of range");
            if (cell_of_[w] != -1)
                throw Error(ErrorCode::ShapeMismatch, "outcome " + std::to_string(w) + " in two cells");
            cell_of_[w] = i;
        }
    }
    for (int w = 0; w < outcome_count; ++w)
        if (cell_of_[w] == -1) throw Error(ErrorCode::ShapeMismatch, "outcome " + std::to_string(w) + " uncovered");
}

Partition Partition::trivial(int outcome_count) {
    std::vector<Outcome> all(static_cast<std::size_t>(outcome_count));
    std::iota(all.begin(), all.end(), 0);
    return Partition({all}, outcome_count);
}

Partition Partition::finest(int outcome_count) {
    std::vector<std::vector<Outcome>> cells;
    for (int w = 0; w < outcome_count; ++w) cells.push_back({w});
    return Partition(std::move(cells), outcome_count);
}

bool Partition::refines(const Partition& coarser) const {
    if (coarser.outcome_count() != outcome_count()) return false;
    return std::all_of(cells_.begin(), cells_.end(), [&](const auto& c) {
        const int target = coarser.cell_of(c.front());
        return std::all_of(c.begin(), c.end(), [&](Outcome w) { return coarser.cell_of(w) == target; });
    });
}

bool Partition::is_union_of_cells(std::span<const char> members) const {
    if (static_cast<int>(members.size()) != outcome_count()) return false;
    return std::all_of(cells_.begin(), cells_.end(), [&](const auto& c) {
        const char first = members[c.front()] != 0;
        return std::all_of(c.begin(), c.end(), [&](Outcome w) { return (members[w] != 0) == first; });
    });
}

bool Partition::is_constant_on_cells(std::span<const double> values, double tol) const {
    if (static_cast<int>(values.size()) != outcome_count()) return false;
    return std::all_of(cells_.begin(), cells_.end(), [&](const auto& c) {
        const double first = values[c.front()];
        return std::all_of(c.begin(), c.end(), [&](Outcome w) {
            return std::abs(values[w] - first) <= tol * (1.0 + std::abs(first));
        });
    });
}

// ---------------------------------------------------------------------------
// FilteredTree

FilteredTree::FilteredTree(std::vector<double> probs, std::vector<Partition> filtration,
                           std::vector<Partition> meyer)
    : probs_(std::move(probs)), filtration_(std::move(filtration)), meyer_(std::move(meyer)) {
    if (probs_.empty()) throw Error(ErrorCode::BadWeights, "no outcomes");
    double total = 0.0;
    for (double p : probs_) {
        if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorCode::BadWeights, "nonpositive outcome weight");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::BadWeights, "weights do not sum to 1");
    if (filtration_.empty() || filtration_.size() != meyer_.size())
        throw Error(ErrorCode::ShapeMismatch, "filtration and Meyer field need the same nonzero length");

    const int n = outcome_count();
    trivial_ = Partition::trivial(n);
    for (std::size_t t = 0; t < filtration_.size(); ++t) {
        if (filtration_[t].outcome_count() != n || meyer_[t].outcome_count() != n)
            throw Error(ErrorCode::ShapeMismatch, "partition at time " + std::to_string(t) + " has wrong size");
        const Partition& previous = t == 0 ? trivial_ : filtration_[t - 1];
        if (!filtration_[t].refines(previous))
            throw Error(ErrorCode::NonRefining, "F_" + std::to_string(t) + " does not refine F_" + std::to_string(static_cast<int>(t) - 1));
        if (!meyer_[t].refines(previous) || !filtration_[t].refines(meyer_[t]))
            throw Error(ErrorCode::MeyerOutOfBand, "G_" + std::to_string(t) + " not between F_" +
                                                       std::to_string(static_cast<int>(t) - 1) + " and F_" + std::to_string(t));
    }
}

const Partition& FilteredTree::filtration(int t) const {
    if (t < 0) return trivial_;
    return filtration_.at(t);
}

const Partition& FilteredTree::partition_at(Instant instant) const {
    if (instant.is_never()) return filtration_.back();
    return instant.is_post() ? filtration_.at(instant.time) : meyer_.at(instant.time);
}

double FilteredTree::probability(std::span<const Outcome> outcomes) const {
    double total = 0.0;
    for (Outcome w : outcomes) total += probs_.at(w);
    return total;
}

FilteredTree make_tree(std::vector<double> probs,
                       const std::vector<std::vector<std::vector<Outcome>>>& filtration,
                       const std::vector<std::vector<std::vector<Outcome>>>& meyer) {
    const int n = static_cast<int>(probs.size());
    std::vector<Partition> f, g;
    for (const auto& cells : filtration) f.emplace_back(cells, n);
    for (const auto& cells : meyer) g.emplace_back(cells, n);
    return FilteredTree(std::move(probs), std::move(f), std::move(g));
}

std::vector<double> conditional_expectation(const FilteredTree& tree, std::span<const double> values,
                                            const Partition& partition) {
    const int n = tree.outcome_count();
    if (static_cast<int>(values.size()) != n || partition.outcome_count() != n)
        throw Error(ErrorCode::ShapeMismatch, "conditional expectation: size mismatch");
    std::vector<double> out(values.size());
    const auto& probs = tree.probs();
    for (const auto& cell : partition.cells()) {
        double mass = 0.0, weighted = 0.0;
        for (Outcome w : cell) {
            mass += probs[w];
            weighted += probs[w] * values[w];
        }
        const double mean = weighted / mass;
        for (Outcome w : cell) out[w] = mean;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stopping times

bool StoppingTime::is_finite() const {
    return std::none_of(values_.begin(), values_.end(), [](Instant i) { return i.is_never(); });
}

namespace {

bool well_formed(const FilteredTree& tree, const StoppingTime& time) {
    if (time.size() != tree.outcome_count()) return false;
    return std::all_of(time.values().begin(), time.values().end(), [&](Instant i) {
        if (i.is_never()) return i.phase == Phase::At;
        return i.time >= 0 && i.time <= tree.horizon();
    });
}

}  // namespace

bool is_stopping_time(const FilteredTree& tree, const StoppingTime& time) {
    if (!well_formed(tree, time)) return false;
    const int n = tree.outcome_count();
    std::vector<char> stopped(static_cast<std::size_t>(n));
    for (int slot = 0; slot < tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, tree.horizon());
        for (int w = 0; w < n; ++w) stopped[w] = time[w] <= k;
        if (!tree.partition_at(k).is_union_of_cells(stopped)) return false;
    }
    return true;
}

bool is_predictable_time(const FilteredTree& tree, const StoppingTime& time) {
    if (!well_formed(tree, time)) return false;
    const int n = tree.outcome_count();
    if (std::any_of(time.values().begin(), time.values().end(), [](Instant i) { return i.is_post(); }))
        return false;
    std::vector<char> stopped(static_cast<std::size_t>(n));
    for (int t = 0; t <= tree.horizon(); ++t) {
        for (int w = 0; w < n; ++w) stopped[w] = time[w] <= Instant::at(t);
        if (!tree.filtration(t - 1).is_union_of_cells(stopped)) return false;
    }
    return true;
}

Partition sigma_field_at(const FilteredTree& tree, const StoppingTime& time) {
    if (!is_stopping_time(tree, time)) throw Error(ErrorCode::NotAStoppingTime, "sigma_field_at");
    std::vector<std::vector<Outcome>> cells;
    for (int slot = 0; slot <= tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, tree.horizon());
        for (const auto& cell : tree.partition_at(k).cells()) {
            // {S = k} is a union of cells of the partition at k, so a cell is inside or disjoint.
            if (time[cell.front()] == k) cells.push_back(cell);
        }
    }
    return Partition(std::move(cells), tree.outcome_count());
}

StoppingTime restrict_to(const StoppingTime& time, std::span<const Outcome> members) {
    std::vector<Instant> values(time.values().size(), Instant::never());
    for (Outcome w : members) values.at(w) = time[w];
    return StoppingTime(std::move(values));
}

std::vector<StoppingTime> enumerate_stopping_times(const FilteredTree& tree, const StoppingTime& lower,
                                                   bool strict, PhaseSet phases, std::size_t cap) {
    const int n = tree.outcome_count();
    if (lower.size() != n) throw Error(ErrorCode::ShapeMismatch, "lower bound has wrong size");
    if (n > 63) throw Error(ErrorCode::TooLarge, "enumeration supports at most 63 outcomes");
    using Mask = std::uint64_t;

    auto eligible = [&](Outcome w, Instant k) {
        const Instant lo = lower[w];
        return (strict && !lo.is_never()) ? k > lo : k >= lo;
    };

    std::vector<StoppingTime> result;
    std::vector<Instant> current(static_cast<std::size_t>(n), Instant::never());
    const int last = tree.slot_count();

    std::function<void(int, Mask)> recurse = [&](int slot, Mask alive) {
        if (slot == last) {
            for (int w = 0; w < n; ++w)
                if (alive >> w & 1U) current[w] = Instant::never();
            if (result.size() >= cap) throw Error(ErrorCode::TooLarge, "stopping-time enumeration exceeds cap");
            result.emplace_back(current);
            return;
        }
        const Instant k = instant_at_slot(slot, tree.horizon());
        if (phases == PhaseSet::AtOnly && k.is_post()) {
            recurse(slot + 1, alive);
            return;
        }
        std::vector<Mask> candidates;
        for (const auto& cell : tree.partition_at(k).cells()) {
            Mask m = 0;
            bool ok = true;
            for (Outcome w : cell) {
                m |= Mask{1} << w;
                ok = ok && eligible(w, k);
            }
            if (ok && (m & alive) == m) candidates.push_back(m);
        }
        if (candidates.size() > 24) throw Error(ErrorCode::TooLarge, "too many candidate cells at one instant");
        const std::uint64_t subsets = std::uint64_t{1} << candidates.size();
        for (std::uint64_t s = 0; s < subsets; ++s) {
            Mask stop = 0;
            for (std::size_t i = 0; i < candidates.size(); ++i)
                if (s >> i & 1U) stop |= candidates[i];
            for (int w = 0; w < n; ++w)
                if (stop >> w & 1U) current[w] = k;
            recurse(slot + 1, alive & ~stop);
        }
    };
    const Mask everyone = n == 64 ? ~Mask{0} : (Mask{1} << n) - 1;
    recurse(0, everyone);
    return result;
}

}  // namespace mrep
