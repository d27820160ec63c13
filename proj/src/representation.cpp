#include "mrep/representation.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace mrep {

namespace {

constexpr double kBracketLimit = 1152921504606846976.0;  // 2^60

struct Bisection {
    ExtReal value;
    double width = 0.0;
};

/// sup{ℓ : below(ℓ)} for a predicate that holds on a down-set of ℝ. Brackets grow by doubling
/// from ±1; a down-set with no member above -2^60 is reported as -∞.
Bisection sup_of_down_set(const std::function<bool(double)>& below, double tol) {
    double lo, hi;
    if (below(-1.0)) {
        lo = -1.0;
        hi = 1.0;
        while (below(hi)) {
            lo = hi;
            if (hi >= kBracketLimit) throw Error(ErrorCode::BracketFailure, "no upper bracket below 2^60");
            hi *= 2.0;
        }
    } else {
        hi = -1.0;
        lo = -2.0;
        while (!below(lo)) {
            hi = lo;
            if (lo <= -kBracketLimit) return {ExtReal::minus_infinity(), 0.0};
            lo *= 2.0;
        }
    }
    while (hi - lo > tol) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        (below(mid) ? lo : hi) = mid;
    }
    return {ExtReal(lo + 0.5 * (hi - lo)), hi - lo};
}

double cell_mean(const FilteredTree& tree, const std::vector<Outcome>& cell, const std::function<double(Outcome)>& f) {
    double mass = 0.0, total = 0.0;
    for (Outcome w : cell) {
        mass += tree.probs()[w];
        total += tree.probs()[w] * f(w);
    }
    return total / mass;
}

struct Atom {
    Outcome outcome;
    int time;
    double weight;  // μ_t(ω) times the outcome's share of the cell mass
};

/// ℓ_{S,T} on one cell of F^Λ_S, where S and T are given per outcome.
ExtReal solve_on_cell(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu, const CostField& g,
                      const std::vector<Outcome>& cell, const StoppingTime& s, const StoppingTime& t, double tol) {
    const double mass = tree.probability(cell);
    std::vector<Atom> atoms;
    for (Outcome w : cell)
        for (int u = 0; u <= tree.horizon(); ++u) {
            const Instant atom = Instant::at(u);
            if (atom < s[w] || !(atom < t[w])) continue;
            if (mu.weight(u, w) > 0.0) atoms.push_back({w, u, mu.weight(u, w) * tree.probs()[w] / mass});
        }
    if (atoms.empty()) return ExtReal::plus_infinity();
    const double drop = cell_mean(tree, cell, [&](Outcome w) { return x.value(s[w], w) - x.value(t[w], w); });
    auto below = [&](double level) {
        double total = 0.0;
        for (const auto& a : atoms) total += g(a.time, a.outcome, level) * a.weight;
        return total <= drop;
    };
    const auto root = sup_of_down_set(below, tol);
    if (!root.value.is_finite()) throw Error(ErrorCode::BracketFailure, "no lower bracket for l_{S,T}");
    return root.value;
}

}  // namespace

RepresentationSolution construct_L(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                   const CostField& g, const SolveOptions& options) {
    auto report = validate_inputs(tree, x, mu, g);
    if (!report.hard_ok()) {
        const auto& v = report.terminal.violations.front();
        throw Error(ErrorCode::InvalidInput, "terminal condition fails at outcome " + std::to_string(v.outcome) +
                                                 ", time " + to_string(v.instant));
    }
    const int n = tree.outcome_count();
    const int N = tree.horizon();

    struct Entry {
        Instant instant;
        const std::vector<Outcome>* cell;
    };
    std::vector<Entry> entries;
    for (int slot = 0; slot < tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, N);
        for (const auto& cell : tree.partition_at(k).cells()) entries.push_back({k, &cell});
    }

    RepresentationSolution out{SignalProcess(N, n), LadlagProcess(N, n), std::move(report)};
    std::vector<Bisection> results(entries.size());
    detail::parallel_for(static_cast<int>(entries.size()), options.workers, [&](int i) {
        const Instant k = entries[i].instant;
        const auto& cell = *entries[i].cell;
        const Outcome rep = cell.front();
        const bool mass_ahead = std::any_of(cell.begin(), cell.end(), [&](Outcome w) { return mu.mass_from(k, w) > 0.0; });
        if (!mass_ahead) {
            results[i] = {ExtReal::plus_infinity(), 0.0};
            return;
        }
        const double xv = x.value(k, rep);
        const double slack = 1e-12 * (1.0 + std::abs(xv));
        results[i] = sup_of_down_set(
            [&](double level) { return snell_envelope(tree, x, mu, g, level).continuation.value(k, rep) <= xv + slack; },
            options.tol_ell);
    });
    for (std::size_t i = 0; i < entries.size(); ++i)
        for (Outcome w : *entries[i].cell) {
            out.L.set(entries[i].instant, w, results[i].value);
            out.width.set(entries[i].instant, w, results[i].width);
        }
    return out;
}

std::vector<ExtReal> solve_ell_ST(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                  const CostField& g, const StoppingTime& s, const StoppingTime& t, double tol_ell) {
    check_model(tree, x, mu, g);
    if (!is_stopping_time(tree, t)) throw Error(ErrorCode::NotAStoppingTime, "T is not a stopping time");
    const Partition field = sigma_field_at(tree, s);
    for (int w = 0; w < tree.outcome_count(); ++w)
        if (!s[w].is_never() && !(t[w] > s[w]))
            throw Error(ErrorCode::NotStrictlyLater, "T <= S on outcome " + std::to_string(w));
    std::vector<ExtReal> out(static_cast<std::size_t>(tree.outcome_count()));
    for (const auto& cell : field.cells()) {
        const ExtReal v = solve_on_cell(tree, x, mu, g, cell, s, t, tol_ell);
        for (Outcome w : cell) out[w] = v;
    }
    return out;
}

EssInfOracle::EssInfOracle(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                           const CostField& g, double tol_ell, std::size_t cap)
    : tree_(tree), x_(x), mu_(mu), g_(g), tol_ell_(tol_ell), cap_(cap) {
    check_model(tree_, x_, mu_, g_);
}

ExtReal EssInfOracle::cell_value(Instant k, const std::vector<Outcome>& cell) {
    const auto key = std::make_pair(slot_index(k, tree_.horizon()), cell);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    std::vector<Instant> start(static_cast<std::size_t>(tree_.outcome_count()), Instant::never());
    for (Outcome w : cell) start[w] = k;
    const StoppingTime s(std::move(start));
    ExtReal best = ExtReal::plus_infinity();
    for (const auto& t : enumerate_stopping_times(tree_, s, true, PhaseSet::AtAndPost, cap_)) {
        const ExtReal v = solve_on_cell(tree_, x_, mu_, g_, cell, s, t, tol_ell_);
        if (v < best) best = v;
    }
    std::lock_guard lock(mutex_);
    cache_.emplace(key, best);
    return best;
}

std::vector<ExtReal> EssInfOracle::operator()(const StoppingTime& s) {
    const Partition field = sigma_field_at(tree_, s);
    std::vector<ExtReal> out(static_cast<std::size_t>(tree_.outcome_count()), ExtReal::plus_infinity());
    for (const auto& cell : field.cells()) {
        const Instant k = s[cell.front()];
        if (k.is_never()) continue;
        const ExtReal v = cell_value(k, cell);
        for (Outcome w : cell) out[w] = v;
    }
    return out;
}

std::vector<ExtReal> ess_inf_ell(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                 const CostField& g, const StoppingTime& s, std::size_t cap) {
    EssInfOracle oracle(tree, x, mu, g, kDefaultTolEll, cap);
    return oracle(s);
}

Verification verify_representation(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                   const CostField& g, const SignalProcess& l, const StoppingTime& s) {
    const int n = tree.outcome_count();
    std::vector<double> reward(static_cast<std::size_t>(n), 0.0), absolute(static_cast<std::size_t>(n), 0.0);
    for (int w = 0; w < n; ++w) {
        if (s[w].is_never()) continue;
        for (int t = 0; t <= tree.horizon(); ++t) {
            const Instant atom = Instant::at(t);
            const double weight = mu.weight(t, w);
            if (atom < s[w] || weight == 0.0) continue;
            const double level = running_sup(l, s[w], atom, w).to_double();
            const double v = g(t, w, level) * weight;
            reward[w] += v;
            absolute[w] += std::abs(v);
        }
    }
    const Partition field = sigma_field_at(tree, s);
    Verification out{conditional_expectation(tree, reward, field), conditional_expectation(tree, absolute, field)};
    for (int w = 0; w < n; ++w) out.residual[w] = x.value(s[w], w) - out.residual[w];
    return out;
}

double max_scaled_residual(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                           const CostField& g, const SignalProcess& l, const std::vector<StoppingTime>& times) {
    double worst = 0.0;
    for (const auto& s : times) {
        const auto v = verify_representation(tree, x, mu, g, l, s);
        for (int w = 0; w < s.size(); ++w) {
            const double scaled = std::abs(v.residual[w]) / (1.0 + std::abs(x.value(s[w], w)));
            if (std::isnan(scaled)) return std::numeric_limits<double>::infinity();
            worst = std::max(worst, scaled);
        }
    }
    return worst;
}

MaximalityReport maximality_check(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                  const CostField& g, const SignalProcess& l, const SignalProcess& candidate,
                                  const std::vector<StoppingTime>& times) {
    MaximalityReport report;
    report.max_scaled_residual = max_scaled_residual(tree, x, mu, g, candidate, times);
    if (!(report.max_scaled_residual <= 1e-8)) {
        report.status = MaximalityStatus::CandidateNotASolution;
        return report;
    }
    for (int slot = 0; slot < tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, tree.horizon());
        for (int w = 0; w < tree.outcome_count(); ++w) {
            const ExtReal a = candidate.value(k, w), b = l.value(k, w);
            bool above = false;
            if (a.is_finite() && b.is_finite()) above = a.value() > b.value() + 1e-6 * (1.0 + std::abs(b.value()));
            else above = b < a;
            if (above) report.exceedances.push_back({w, k});
        }
    }
    report.status = report.exceedances.empty() ? MaximalityStatus::Maximal : MaximalityStatus::NotMaximal;
    return report;
}

std::string to_string(MaximalityStatus status) {
    switch (status) {
        case MaximalityStatus::Maximal: return "maximal";
        case MaximalityStatus::NotMaximal: return "not-maximal";
        case MaximalityStatus::CandidateNotASolution: return "CandidateNotASolution";
    }
    return "unknown";
}

}  // namespace mrep
