#include "mrep/snell.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

namespace mrep {

namespace {

// g_t(ℓ)μ_t per (t, outcome) for a constant level.
class AtomCosts {
public:
    AtomCosts(const RandomMeasure& mu, const CostField& g, double level)
        : horizon_(mu.horizon()), outcomes_(mu.outcome_count()),
          values_(static_cast<std::size_t>((horizon_ + 1) * outcomes_), 0.0) {
        for (int t = 0; t <= horizon_; ++t)
            for (int w = 0; w < outcomes_; ++w) {
                const double weight = mu.weight(t, w);
                if (weight != 0.0) values_[static_cast<std::size_t>(t * outcomes_ + w)] = g(t, w, level) * weight;
            }
    }

    [[nodiscard]] double at(int t, Outcome w) const { return values_[static_cast<std::size_t>(t * outcomes_ + w)]; }

    /// Sum over atoms s with start ≤ (s, At) < stop.
    [[nodiscard]] double window(Instant start, Instant stop, Outcome w) const {
        if (start.is_never()) return 0.0;
        const int first = start.time + (start.is_post() ? 1 : 0);
        const int last = stop.is_never() ? horizon_ : stop.time - (stop.is_post() ? 0 : 1);
        double total = 0.0;
        for (int s = first; s <= last; ++s) total += at(s, w);
        return total;
    }

private:
    int horizon_;
    int outcomes_;
    std::vector<double> values_;
};

WindowEnd stopping_window_end(Instant t) {
    if (t.is_never()) return WindowEnd{};
    return WindowEnd{t.time, t.is_post()};
}

double cell_average(const FilteredTree& tree, const std::vector<Outcome>& cell, const std::vector<double>& v) {
    double mass = 0.0, total = 0.0;
    for (Outcome w : cell) {
        mass += tree.probs()[w];
        total += tree.probs()[w] * v[w];
    }
    return total / mass;
}

}  // namespace

// ---------------------------------------------------------------------------
// Envelope

SnellEnvelope snell_envelope(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                             const CostField& g, double level) {
    check_model(tree, x, mu, g);
    if (!std::isfinite(level)) throw Error(ErrorCode::InvalidInput, "snell_envelope needs a finite level");
    const int n = tree.outcome_count();
    const int N = tree.horizon();
    const AtomCosts costs(mu, g, level);

    SnellEnvelope env{level, LadlagProcess(N, n), LadlagProcess(N, n)};
    std::vector<double> buffer(static_cast<std::size_t>(n));
    for (int t = N; t >= 0; --t) {
        // Interval after t: continue to t+1, or stop at ∞ (value 0) after the horizon.
        if (t == N) {
            std::fill(buffer.begin(), buffer.end(), 0.0);
        } else {
            const auto ce = conditional_expectation(tree, env.value.slice(Instant::at(t + 1)), tree.filtration(t));
            std::copy(ce.begin(), ce.end(), buffer.begin());
        }
        for (int w = 0; w < n; ++w) {
            env.continuation.post(t, w) = buffer[w];
            env.value.post(t, w) = std::max(x.post(t, w), buffer[w]);
        }
        // Atom at t: collect g_t(ℓ)μ_t, then continue on the interval.
        for (int w = 0; w < n; ++w) buffer[w] = costs.at(t, w) + env.value.post(t, w);
        const auto ce = conditional_expectation(tree, buffer, tree.meyer(t));
        for (int w = 0; w < n; ++w) {
            env.continuation.at(t, w) = ce[w];
            env.value.at(t, w) = std::max(x.at(t, w), ce[w]);
        }
    }
    return env;
}

std::vector<SnellEnvelope> snell_envelope_grid(const FilteredTree& tree, const LadlagProcess& x,
                                               const RandomMeasure& mu, const CostField& g,
                                               const std::vector<double>& levels, int workers) {
    std::vector<SnellEnvelope> out(levels.size());
    const int count = static_cast<int>(levels.size());
    const int threads = std::clamp(workers, 1, std::max(1, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) out[i] = snell_envelope(tree, x, mu, g, levels[i]);
        return out;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) {
        pool.emplace_back([&, k] {
            try {
                for (int i = k; i < count; i += threads) out[i] = snell_envelope(tree, x, mu, g, levels[i]);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------
// Enumeration oracles

std::vector<CellStoppingTimes> stopping_times_by_cell(const FilteredTree& tree, const StoppingTime& s, bool strict,
                                                      std::size_t cap) {
    const Partition field = sigma_field_at(tree, s);
    std::vector<CellStoppingTimes> out;
    std::size_t total = 0;
    for (const auto& cell : field.cells()) {
        const StoppingTime lower = restrict_to(s, cell);
        auto times = enumerate_stopping_times(tree, lower, strict, PhaseSet::AtAndPost, cap - std::min(cap, total));
        total += times.size();
        out.push_back({cell, std::move(times)});
    }
    return out;
}

std::vector<double> stopped_payoff(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                   const CostField& g, double level, const StoppingTime& s, const StoppingTime& t) {
    const int n = tree.outcome_count();
    CostWindow window{s.values(), {}};
    for (int w = 0; w < n; ++w) window.end.push_back(stopping_window_end(t[w]));
    auto out = integrate_cost(tree, mu, g, [level](int, Outcome) { return level; }, window);
    for (int w = 0; w < n; ++w) out[w] += x.value(t[w], w);
    return out;
}

std::vector<double> envelope_oracle(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                    const CostField& g, double level, const StoppingTime& s, std::size_t cap) {
    check_model(tree, x, mu, g);
    const AtomCosts costs(mu, g, level);
    std::vector<double> out(static_cast<std::size_t>(tree.outcome_count()), 0.0);
    std::vector<double> payoff(out.size(), 0.0);
    for (const auto& group : stopping_times_by_cell(tree, s, false, cap)) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& t : group.times) {
            // Atoms before T are collected; stopping on the interval after t keeps the atom at t.
            for (Outcome w : group.cell) payoff[w] = x.value(t[w], w) + costs.window(s[w], t[w], w);
            best = std::max(best, cell_average(tree, group.cell, payoff));
        }
        for (Outcome w : group.cell) out[w] = best;
    }
    return out;
}

StoppingTime contact_time(const FilteredTree& tree, const LadlagProcess& x, const SnellEnvelope& y,
                          const StoppingTime& s, double tol_eq) {
    const int n = tree.outcome_count();
    std::vector<Instant> out(static_cast<std::size_t>(n), Instant::never());
    for (int w = 0; w < n; ++w) {
        for (int slot = slot_index(s[w], tree.horizon()); slot < tree.slot_count(); ++slot) {
            const Instant k = instant_at_slot(slot, tree.horizon());
            const double xv = x.value(k, w);
            if (std::abs(y.value.value(k, w) - xv) <= tol_eq * (1.0 + std::abs(xv))) {
                out[w] = k;
                break;
            }
        }
    }
    return StoppingTime(std::move(out));
}

// ---------------------------------------------------------------------------
// Divided stopping times

DividedStoppingTime::DividedStoppingTime(std::vector<int> times, std::vector<StopMode> modes)
    : times_(std::move(times)), modes_(std::move(modes)) {
    if (times_.size() != modes_.size()) throw Error(ErrorCode::InvalidDividedTime, "times and modes differ in size");
}

DividedStoppingTime DividedStoppingTime::immediate(const StoppingTime& s) {
    std::vector<int> times;
    for (Instant i : s.values()) {
        if (i.is_post()) throw Error(ErrorCode::InvalidDividedTime, "immediate stop needs an at-phase time");
        times.push_back(i.time);
    }
    std::vector<StopMode> modes(times.size(), StopMode::At);
    return {std::move(times), std::move(modes)};
}

std::vector<Outcome> DividedStoppingTime::members(StopMode mode) const {
    std::vector<Outcome> out;
    for (int w = 0; w < size(); ++w)
        if (modes_[w] == mode) out.push_back(w);
    return out;
}

Instant DividedStoppingTime::effective(Outcome w) const {
    const int t = times_.at(w);
    if (t == Instant::kNever) return Instant::never();
    switch (modes_[w]) {
        case StopMode::Left: return Instant::post(t - 1);
        case StopMode::At: return Instant::at(t);
        case StopMode::Right: return Instant::post(t);
    }
    return Instant::never();
}

StoppingTime DividedStoppingTime::effective_time() const {
    std::vector<Instant> out;
    for (int w = 0; w < size(); ++w) out.push_back(effective(w));
    return StoppingTime(std::move(out));
}

WindowEnd DividedStoppingTime::window_end(Outcome w) const {
    return WindowEnd{times_.at(w), modes_.at(w) == StopMode::Right};
}

std::string divided_time_problem(const FilteredTree& tree, const DividedStoppingTime& tau) {
    const int n = tree.outcome_count();
    const int N = tree.horizon();
    if (tau.size() != n) return "wrong number of outcomes";
    for (int w = 0; w < n; ++w) {
        const int t = tau.time(w);
        if (t == Instant::kNever) {
            if (tau.mode(w) != StopMode::At) return "outcome " + std::to_string(w) + ": only H may contain T = inf";
            continue;
        }
        if (t < 0 || t > N) return "outcome " + std::to_string(w) + ": time out of range";
        if (tau.mode(w) == StopMode::Left && t == 0) return "outcome " + std::to_string(w) + ": H- at time 0";
    }
    std::vector<char> mark(static_cast<std::size_t>(n));
    auto mark_where = [&](auto&& pred) {
        for (int w = 0; w < n; ++w) mark[w] = pred(w) ? 1 : 0;
        return std::span<const char>(mark);
    };
    for (int t = 0; t <= N; ++t) {
        const std::string at = " at time " + std::to_string(t);
        if (!tree.filtration(t).is_union_of_cells(mark_where([&](Outcome w) { return tau.time(w) <= t; })))
            return "{T <= t} not in F_t" + at;
        if (!tree.filtration(t - 1).is_union_of_cells(
                mark_where([&](Outcome w) { return tau.time(w) == t && tau.mode(w) == StopMode::Left; })))
            return "H- not announced by F_{t-1}" + at;
        if (!tree.meyer(t).is_union_of_cells(
                mark_where([&](Outcome w) { return tau.time(w) == t && tau.mode(w) == StopMode::At; })))
            return "H not in the Meyer field" + at;
        if (!tree.filtration(t).is_union_of_cells(
                mark_where([&](Outcome w) { return tau.time(w) == t && tau.mode(w) == StopMode::Right; })))
            return "H+ not in F_t" + at;
        for (const auto& cell : tree.meyer(t).cells()) {
            bool any_right = false, any_other = false;
            for (Outcome w : cell) {
                if (tau.time(w) != t) continue;
                (tau.mode(w) == StopMode::Right ? any_right : any_other) = true;
            }
            if (any_right && any_other) return "H+ not in the Meyer trace on {T = t}" + at;
        }
    }
    return {};
}

DividedStoppingTime classify_contact(const FilteredTree& tree, const LadlagProcess& x, const SnellEnvelope& y,
                                     const StoppingTime& s, double tol_eq) {
    const StoppingTime contact = contact_time(tree, x, y, s, tol_eq);
    std::vector<int> times;
    std::vector<StopMode> modes;
    for (Instant k : contact.values()) {
        times.push_back(k.time);
        modes.push_back(k.is_post() ? StopMode::Right : StopMode::At);
    }
    DividedStoppingTime tau(std::move(times), std::move(modes));
    if (const auto problem = divided_time_problem(tree, tau); !problem.empty())
        throw Error(ErrorCode::ClassificationInconsistent, problem);
    return tau;
}

std::vector<double> divided_value(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                  const CostField& g, double level, const DividedStoppingTime& tau,
                                  const StoppingTime& s) {
    if (const auto problem = divided_time_problem(tree, tau); !problem.empty())
        throw Error(ErrorCode::InvalidDividedTime, problem);
    if (s.size() != tree.outcome_count()) throw Error(ErrorCode::ShapeMismatch, "start time has wrong size");
    const int n = tree.outcome_count();
    CostWindow window{s.values(), {}};
    for (int w = 0; w < n; ++w) {
        if (tau.effective(w) < s[w])
            throw Error(ErrorCode::InvalidDividedTime, "tau stops before S on outcome " + std::to_string(w));
        window.end.push_back(tau.window_end(w));
    }
    auto raw = integrate_cost(tree, mu, g, [level](int, Outcome) { return level; }, window);
    for (int w = 0; w < n; ++w) raw[w] += x.value(tau.effective(w), w);
    return conditional_expectation(tree, raw, sigma_field_at(tree, s));
}

std::vector<DividedStoppingTime> enumerate_divided_stopping_times(const FilteredTree& tree, const StoppingTime& s,
                                                                  std::size_t cap) {
    const int n = tree.outcome_count();
    const int N = tree.horizon();
    if (s.size() != n) throw Error(ErrorCode::ShapeMismatch, "start time has wrong size");

    struct Choice {
        int time;
        StopMode mode;
    };
    // Per-outcome options, in tie-break order: earlier T first, then H, H+, H-.
    std::vector<std::vector<Choice>> options(static_cast<std::size_t>(n));
    double product = 1.0;
    for (int w = 0; w < n; ++w) {
        for (int t = 0; t <= N; ++t)
            for (StopMode m : {StopMode::At, StopMode::Right, StopMode::Left}) {
                if (m == StopMode::Left && t == 0) continue;
                const DividedStoppingTime probe({t}, {m});
                if (probe.effective(0) >= s[w]) options[w].push_back({t, m});
            }
        options[w].push_back({Instant::kNever, StopMode::At});
        product *= static_cast<double>(options[w].size());
    }
    if (product > static_cast<double>(cap)) throw Error(ErrorCode::TooLarge, "divided stopping-time enumeration exceeds cap");

    std::vector<DividedStoppingTime> out;
    std::vector<int> times(static_cast<std::size_t>(n));
    std::vector<StopMode> modes(static_cast<std::size_t>(n));
    std::function<void(int)> recurse = [&](int w) {
        if (w == n) {
            DividedStoppingTime tau(times, modes);
            if (divided_time_problem(tree, tau).empty()) out.push_back(std::move(tau));
            return;
        }
        for (const auto& c : options[w]) {
            times[w] = c.time;
            modes[w] = c.mode;
            recurse(w + 1);
        }
    };
    recurse(0);
    return out;
}

DividedOracle::DividedOracle(const FilteredTree& tree, const StoppingTime& s, std::size_t cap)
    : tree_(tree), start_(s) {
    const Partition field = sigma_field_at(tree, s);
    for (const auto& cell : field.cells())
        cells_.push_back({cell, enumerate_divided_stopping_times(tree, restrict_to(s, cell), cap)});
}

std::size_t DividedOracle::candidate_count() const {
    std::size_t total = 0;
    for (const auto& c : cells_) total += c.candidates.size();
    return total;
}

DividedOptimum DividedOracle::optimum(const LadlagProcess& x, const RandomMeasure& mu, const CostField& g,
                                      double level) const {
    const FilteredTree& tree = tree_;
    check_model(tree, x, mu, g);
    const int n = tree.outcome_count();
    const AtomCosts costs(mu, g, level);
    DividedOptimum result{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                          DividedStoppingTime(std::vector<int>(static_cast<std::size_t>(n), Instant::kNever),
                                              std::vector<StopMode>(static_cast<std::size_t>(n), StopMode::At))};
    std::vector<int> times = result.tau.times();
    std::vector<StopMode> modes = result.tau.modes();
    std::vector<double> payoff(static_cast<std::size_t>(n), 0.0);
    for (const auto& cell : cells_) {
        const DividedStoppingTime* best_tau = nullptr;
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& tau : cell.candidates) {
            for (Outcome w : cell.members) {
                const WindowEnd end = tau.window_end(w);
                payoff[w] = x.value(tau.effective(w), w) + costs.window(start_[w], end.exclusive_bound(), w);
            }
            const double v = cell_average(tree, cell.members, payoff);
            // Candidates arrive in tie-break order, so only a strict improvement replaces the incumbent.
            if (best_tau == nullptr || v > best + 1e-12 * (1.0 + std::abs(best))) {
                best = v;
                best_tau = &tau;
            }
        }
        for (Outcome w : cell.members) {
            result.value[w] = best;
            times[w] = best_tau->time(w);
            modes[w] = best_tau->mode(w);
        }
    }
    result.tau = DividedStoppingTime(std::move(times), std::move(modes));
    return result;
}

DividedOptimum brute_force_divided_optimum(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                           const CostField& g, double level, const StoppingTime& s, std::size_t cap) {
    return DividedOracle(tree, s, cap).optimum(x, mu, g, level);
}

}  // namespace mrep
