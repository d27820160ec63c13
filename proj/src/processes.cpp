#include "mrep/processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrep {

// ---------------------------------------------------------------------------
// ExtReal

double ExtReal::to_double() const {
    switch (kind_) {
        case Kind::MinusInfinity: return -std::numeric_limits<double>::infinity();
        case Kind::PlusInfinity: return std::numeric_limits<double>::infinity();
        case Kind::Finite: break;
    }
    return value_;
}

std::string to_string(const ExtReal& x) {
    if (x.is_minus_infinity()) return "-inf";
    if (x.is_plus_infinity()) return "+inf";
    return std::to_string(x.value());
}

ExtReal max(const ExtReal& a, const ExtReal& b) { return a < b ? b : a; }

// ---------------------------------------------------------------------------
// LadlagProcess

LadlagProcess::LadlagProcess(int horizon, int outcome_count)
    : horizon_(horizon), outcomes_(outcome_count),
      data_(static_cast<std::size_t>(2 * (horizon + 1)) * static_cast<std::size_t>(outcome_count), 0.0) {
    if (horizon < 0 || outcome_count <= 0) throw Error(ErrorCode::ShapeMismatch, "empty process");
}

LadlagProcess::LadlagProcess(const std::vector<std::vector<double>>& at, const std::vector<std::vector<double>>& post) {
    if (at.empty() || at.size() != post.size() || at.front().empty())
        throw Error(ErrorCode::ShapeMismatch, "at/post matrices must be nonempty and of equal length");
    *this = LadlagProcess(static_cast<int>(at.size()) - 1, static_cast<int>(at.front().size()));
    for (int t = 0; t <= horizon_; ++t) {
        if (static_cast<int>(at[t].size()) != outcomes_ || static_cast<int>(post[t].size()) != outcomes_)
            throw Error(ErrorCode::ShapeMismatch, "row " + std::to_string(t) + " has wrong width");
        for (int w = 0; w < outcomes_; ++w) {
            this->at(t, w) = at[t][w];
            this->post(t, w) = post[t][w];
        }
    }
}

double LadlagProcess::value(Instant instant, Outcome w) const {
    if (instant.is_never()) return 0.0;
    return data_.at(index(slot_index(instant, horizon_), w));
}

void LadlagProcess::set(Instant instant, Outcome w, double v) {
    if (instant.is_never()) throw Error(ErrorCode::InvalidInput, "the value at infinity is fixed");
    data_.at(index(slot_index(instant, horizon_), w)) = v;
}

std::span<const double> LadlagProcess::slice(Instant instant) const {
    return {data_.data() + index(slot_index(instant, horizon_), 0), static_cast<std::size_t>(outcomes_)};
}

std::span<double> LadlagProcess::slice(Instant instant) {
    return {data_.data() + index(slot_index(instant, horizon_), 0), static_cast<std::size_t>(outcomes_)};
}

bool is_lambda_measurable(const FilteredTree& tree, const LadlagProcess& process, double tol) {
    if (process.horizon() != tree.horizon() || process.outcome_count() != tree.outcome_count()) return false;
    for (int slot = 0; slot < tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, tree.horizon());
        if (!tree.partition_at(k).is_constant_on_cells(process.slice(k), tol)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// RandomMeasure

RandomMeasure::RandomMeasure(std::vector<std::vector<double>> weights) : weights_(std::move(weights)) {
    if (weights_.empty() || weights_.front().empty()) throw Error(ErrorCode::ShapeMismatch, "empty measure");
    for (const auto& row : weights_) {
        if (row.size() != weights_.front().size()) throw Error(ErrorCode::ShapeMismatch, "ragged measure rows");
        for (double v : row)
            if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "measure weights must be finite and nonnegative");
    }
}

double RandomMeasure::mass_from(Instant from, Outcome w) const {
    if (from.is_never()) return 0.0;
    double total = 0.0;
    for (int t = from.time + (from.is_post() ? 1 : 0); t <= horizon(); ++t) total += weights_[t].at(w);
    return total;
}

bool is_adapted(const FilteredTree& tree, const RandomMeasure& measure) {
    if (measure.horizon() != tree.horizon() || measure.outcome_count() != tree.outcome_count()) return false;
    for (int t = 0; t <= tree.horizon(); ++t)
        if (!tree.filtration(t).is_constant_on_cells(measure.weights()[t], 0.0)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Cost functions

namespace {

double evaluate_piecewise(const PiecewiseLinearCost& g, double level) {
    const auto& xs = g.levels;
    const auto& ys = g.values;
    const std::size_t n = xs.size();
    std::size_t i;
    if (level <= xs.front()) {
        i = 0;
    } else if (level >= xs.back()) {
        i = n - 2;
    } else {
        i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), level) - xs.begin()) - 1;
    }
    const double slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + slope * (level - xs[i]);
}

}  // namespace

double evaluate(const CostFunction& g, double level) {
    return std::visit(
        [level](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, LinearCost>) {
                return f.slope * level + f.intercept;
            } else if constexpr (std::is_same_v<F, CubicOddCost>) {
                return (f.cubic * level * level + f.linear) * level;
            } else if constexpr (std::is_same_v<F, PiecewiseLinearCost>) {
                return evaluate_piecewise(f, level);
            } else {
                return f.evaluate(level);
            }
        },
        g);
}

void check_cost_function(const CostFunction& g) {
    std::visit(
        [](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, LinearCost>) {
                if (!(f.slope > 0.0) || !std::isfinite(f.slope) || !std::isfinite(f.intercept))
                    throw Error(ErrorCode::InvalidInput, "linear cost needs a finite positive slope");
            } else if constexpr (std::is_same_v<F, CubicOddCost>) {
                if (!(f.cubic > 0.0) || !(f.linear >= 0.0) || !std::isfinite(f.cubic) || !std::isfinite(f.linear))
                    throw Error(ErrorCode::InvalidInput, "cubic cost needs cubic > 0 and linear >= 0");
            } else if constexpr (std::is_same_v<F, PiecewiseLinearCost>) {
                if (f.levels.size() < 2 || f.levels.size() != f.values.size())
                    throw Error(ErrorCode::InvalidInput, "piecewise cost needs at least two matching knots");
                for (std::size_t i = 1; i < f.levels.size(); ++i)
                    if (!(f.levels[i] > f.levels[i - 1]) || !(f.values[i] > f.values[i - 1]))
                        throw Error(ErrorCode::InvalidInput, "piecewise cost knots must be strictly increasing");
            } else {
                if (!f.evaluate || !f.lower_bracket || !f.upper_bracket)
                    throw Error(ErrorCode::InvalidInput, "custom cost '" + f.name + "' is missing callbacks");
            }
        },
        g);
}

double invert(const CostFunction& g, double y) {
    if (const auto* lin = std::get_if<LinearCost>(&g)) return (y - lin->intercept) / lin->slope;

    double lo, hi;
    if (const auto* custom = std::get_if<CustomCost>(&g)) {
        lo = custom->lower_bracket(y);
        hi = custom->upper_bracket(y);
        if (!(evaluate(g, lo) <= y && y <= evaluate(g, hi)))
            throw Error(ErrorCode::BracketFailure, "custom cost brackets do not enclose the target");
    } else {
        lo = -1.0;
        hi = 1.0;
        while (evaluate(g, lo) > y) {
            lo *= 2.0;
            if (!std::isfinite(lo)) throw Error(ErrorCode::BracketFailure, "cost inversion: no lower bracket");
        }
        while (evaluate(g, hi) < y) {
            hi *= 2.0;
            if (!std::isfinite(hi)) throw Error(ErrorCode::BracketFailure, "cost inversion: no upper bracket");
        }
    }
    for (;;) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        (evaluate(g, mid) < y ? lo : hi) = mid;
    }
    return std::abs(evaluate(g, lo) - y) <= std::abs(evaluate(g, hi) - y) ? lo : hi;
}

// ---------------------------------------------------------------------------
// CostField

CostField::CostField(int horizon, int outcome_count, CostFunction shared)
    : functions_(static_cast<std::size_t>(horizon + 1),
                 std::vector<CostFunction>(static_cast<std::size_t>(outcome_count), shared)) {
    check_cost_function(shared);
}

CostField::CostField(std::vector<std::vector<CostFunction>> functions) : functions_(std::move(functions)) {
    if (functions_.empty() || functions_.front().empty()) throw Error(ErrorCode::ShapeMismatch, "empty cost field");
    for (const auto& row : functions_) {
        if (row.size() != functions_.front().size()) throw Error(ErrorCode::ShapeMismatch, "ragged cost field");
        for (const auto& g : row) check_cost_function(g);
    }
}

bool is_adapted(const FilteredTree& tree, const CostField& cost) {
    if (cost.horizon() != tree.horizon() || cost.outcome_count() != tree.outcome_count()) return false;
    for (int t = 0; t <= tree.horizon(); ++t)
        for (const auto& cell : tree.filtration(t).cells())
            for (Outcome w : cell)
                if (!(cost.function(t, w) == cost.function(t, cell.front()))) return false;
    return true;
}

// ---------------------------------------------------------------------------
// SignalProcess

SignalProcess::SignalProcess(int horizon, int outcome_count, ExtReal fill)
    : horizon_(horizon), outcomes_(outcome_count),
      data_(static_cast<std::size_t>(2 * (horizon + 1)) * static_cast<std::size_t>(outcome_count), fill) {}

ExtReal SignalProcess::value(Instant instant, Outcome w) const {
    if (instant.is_never()) return ExtReal::plus_infinity();
    return data_.at(static_cast<std::size_t>(slot_index(instant, horizon_)) * outcomes_ + w);
}

void SignalProcess::set(Instant instant, Outcome w, ExtReal v) {
    if (instant.is_never()) throw Error(ErrorCode::InvalidInput, "the signal at infinity is fixed");
    data_.at(static_cast<std::size_t>(slot_index(instant, horizon_)) * outcomes_ + w) = v;
}

// ---------------------------------------------------------------------------
// Operations

LadlagProcess lambda_projection(const FilteredTree& tree, const std::vector<std::vector<double>>& raw_at,
                                const std::vector<std::vector<double>>& raw_post) {
    LadlagProcess raw(raw_at, raw_post);
    if (raw.horizon() != tree.horizon() || raw.outcome_count() != tree.outcome_count())
        throw Error(ErrorCode::ShapeMismatch, "raw values do not match the tree");
    LadlagProcess out(tree.horizon(), tree.outcome_count());
    for (int slot = 0; slot < tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, tree.horizon());
        const auto projected = conditional_expectation(tree, raw.slice(k), tree.partition_at(k));
        std::copy(projected.begin(), projected.end(), out.slice(k).begin());
    }
    return out;
}

ExtReal running_sup(const SignalProcess& signal, Instant from, Instant to, Outcome w) {
    if (to < from) throw Error(ErrorCode::EmptyWindow, "window ends at " + to_string(to) + " before " + to_string(from));
    const int first = slot_index(from, signal.horizon());
    const int last = slot_index(to, signal.horizon());
    ExtReal best = ExtReal::minus_infinity();
    for (int slot = first; slot <= last; ++slot)
        best = max(best, signal.value(instant_at_slot(slot, signal.horizon()), w));
    return best;
}

std::vector<double> integrate_cost(const FilteredTree& tree, const RandomMeasure& mu, const CostField& g,
                                   const LevelPath& level, const CostWindow& window) {
    const int n = tree.outcome_count();
    if (static_cast<int>(window.start.size()) != n || static_cast<int>(window.end.size()) != n)
        throw Error(ErrorCode::BadWindow, "window has wrong size");
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int w = 0; w < n; ++w) {
        const Instant start = window.start[w];
        const Instant stop = window.end[w].exclusive_bound();
        if (stop < start)
            throw Error(ErrorCode::BadWindow, "window on outcome " + std::to_string(w) + " ends before it starts");
        if (!stop.is_never() && stop.time > tree.horizon())
            throw Error(ErrorCode::BadWindow, "window end beyond the horizon");
        double total = 0.0;
        for (int s = 0; s <= tree.horizon(); ++s) {
            const Instant atom = Instant::at(s);
            if (atom < start || !(atom < stop)) continue;
            const double weight = mu.weight(s, w);
            if (weight == 0.0) continue;
            total += g(s, w, level(s, w)) * weight;
        }
        out[w] = total;
    }
    return out;
}

ValidationReport validate_inputs(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                 const CostField& g, double tol) {
    check_model(tree, x, mu, g);
    ValidationReport report;
    const int N = tree.horizon();
    auto fail = [](ValidationCheck& check, Outcome w, Instant k) {
        check.passed = false;
        check.violations.push_back({w, k});
    };
    auto exceeds = [tol](double small, double big) { return small > big + tol * (1.0 + std::abs(big)); };

    // (a) terminal: X vanishes on cells with no mass ahead.
    for (int slot = 0; slot < tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, N);
        for (const auto& cell : tree.partition_at(k).cells()) {
            const bool no_mass = std::all_of(cell.begin(), cell.end(), [&](Outcome w) { return mu.mass_from(k, w) == 0.0; });
            if (!no_mass) continue;
            for (Outcome w : cell)
                if (std::abs(x.value(k, w)) > tol) fail(report.terminal, w, k);
        }
    }

    // (b) left-USC: the F_{t-1} projection of X_t dominates X_{t-}.
    for (int t = 1; t <= N; ++t) {
        const auto projected = conditional_expectation(tree, x.slice(Instant::at(t)), tree.filtration(t - 1));
        for (int w = 0; w < tree.outcome_count(); ++w)
            if (exceeds(x.left_limit(t, w), projected[w])) fail(report.left_usc, w, Instant::at(t));
    }

    // (c) mu-right-USC: at atom-free cells X_t ≥ E[X_{t+} | G_t]; on every interval X_{t+} ≥ E[X_{t+1} | F_t].
    for (int t = 0; t <= N; ++t) {
        const auto after = conditional_expectation(tree, x.slice(Instant::post(t)), tree.meyer(t));
        for (const auto& cell : tree.meyer(t).cells()) {
            const bool atom_free = std::all_of(cell.begin(), cell.end(), [&](Outcome w) { return mu.weight(t, w) == 0.0; });
            if (!atom_free) continue;
            for (Outcome w : cell)
                if (exceeds(after[w], x.at(t, w))) fail(report.right_usc, w, Instant::at(t));
        }
        if (t == N) continue;
        const auto next = conditional_expectation(tree, x.slice(Instant::at(t + 1)), tree.filtration(t));
        for (int w = 0; w < tree.outcome_count(); ++w)
            if (exceeds(next[w], x.post(t, w))) fail(report.right_usc, w, Instant::post(t));
    }
    return report;
}

void check_model(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu, const CostField& g) {
    const int n = tree.outcome_count();
    const int N = tree.horizon();
    if (x.horizon() != N || x.outcome_count() != n) throw Error(ErrorCode::InvalidInput, "X does not match the tree");
    if (mu.horizon() != N || mu.outcome_count() != n) throw Error(ErrorCode::InvalidInput, "mu does not match the tree");
    if (g.horizon() != N || g.outcome_count() != n) throw Error(ErrorCode::InvalidInput, "cost field does not match the tree");
    if (!is_lambda_measurable(tree, x)) throw Error(ErrorCode::InvalidInput, "X is not measurable for the Meyer field");
    if (!is_adapted(tree, mu)) throw Error(ErrorCode::InvalidInput, "mu is not adapted");
    if (!is_adapted(tree, g)) throw Error(ErrorCode::InvalidInput, "cost field is not adapted");
    for (int t = 0; t <= N; ++t)
        for (int w = 0; w < n; ++w) check_cost_function(g.function(t, w));
}

}  // namespace mrep
