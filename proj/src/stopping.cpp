#include "mrep/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace mrep {

namespace {

void check_signal(const FilteredTree& tree, const SignalProcess& l) {
    if (l.horizon() != tree.horizon() || l.outcome_count() != tree.outcome_count())
        throw Error(ErrorCode::InvalidSignal, "signal shape does not match the tree");
    for (int slot = 0; slot < tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, tree.horizon());
        for (const auto& cell : tree.partition_at(k).cells())
            for (Outcome w : cell)
                if (!(l.value(k, w) == l.value(k, cell.front())))
                    throw Error(ErrorCode::InvalidSignal, "signal is not measurable at time " + to_string(k));
    }
}

}  // namespace

DividedStoppingTime signal_stopping_time(const FilteredTree& tree, const SignalProcess& l, double level) {
    if (std::isnan(level)) throw Error(ErrorCode::InvalidSignal, "level is NaN");
    check_signal(tree, l);
    const int n = tree.outcome_count();
    std::vector<int> times(static_cast<std::size_t>(n), Instant::kNever);
    std::vector<StopMode> modes(static_cast<std::size_t>(n), StopMode::At);
    if (level != std::numeric_limits<double>::infinity()) {
        for (int w = 0; w < n; ++w) {
            ExtReal running = ExtReal::minus_infinity();
            for (int slot = 0; slot < tree.slot_count(); ++slot) {
                const Instant k = instant_at_slot(slot, tree.horizon());
                running = max(running, l.value(k, w));
                if (!(running < ExtReal(level))) {
                    times[w] = k.time;
                    modes[w] = k.is_post() ? StopMode::Right : StopMode::At;
                    break;
                }
            }
        }
    }
    DividedStoppingTime tau(std::move(times), std::move(modes));
    if (auto problem = divided_time_problem(tree, tau); !problem.empty())
        throw Error(ErrorCode::InvalidSignal, "signal stopping time is not a divided stopping time: " + problem);
    return tau;
}

std::vector<double> default_level_grid(const SignalProcess& l, int points) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int slot = 0; slot < 2 * (l.horizon() + 1); ++slot) {
        const Instant k = instant_at_slot(slot, l.horizon());
        for (int w = 0; w < l.outcome_count(); ++w)
            if (const ExtReal v = l.value(k, w); v.is_finite()) {
                lo = std::min(lo, v.value());
                hi = std::max(hi, v.value());
            }
    }
    if (lo > hi) lo = hi = 0.0;
    std::vector<double> grid;
    for (int i = 0; i < points; ++i)
        grid.push_back(points == 1 ? lo : (lo - 1.0) + (hi - lo + 2.0) * i / (points - 1));
    return grid;
}

std::vector<SignalStoppingResult> certify_universal_signal(const FilteredTree& tree, const LadlagProcess& x,
                                                           const RandomMeasure& mu, const CostField& g,
                                                           const SignalProcess& l, const std::vector<double>& levels,
                                                           std::size_t cap, int workers) {
    check_model(tree, x, mu, g);
    const auto s = StoppingTime::constant(tree.outcome_count(), Instant::at(0));
    const DividedOracle oracle(tree, s, cap);
    std::vector<SignalStoppingResult> out(levels.size());
    detail::parallel_for(static_cast<int>(levels.size()), workers, [&](int i) {
        auto& r = out[static_cast<std::size_t>(i)];
        r.level = levels[static_cast<std::size_t>(i)];
        r.tau = signal_stopping_time(tree, l, r.level);
        r.achieved = divided_value(tree, x, mu, g, r.level, r.tau, s);
        r.oracle = oracle.optimum(x, mu, g, r.level).value;
        for (std::size_t w = 0; w < r.achieved.size(); ++w)
            r.gap = std::max(r.gap, std::abs(r.achieved[w] - (*r.oracle)[w]));
    });
    return out;
}

}  // namespace mrep
