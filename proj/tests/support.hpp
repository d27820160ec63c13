#pragma once

#include <random>
#include <vector>

#include "mrep/fixtures.hpp"
#include "mrep/processes.hpp"

namespace support {

using namespace mrep;

inline std::vector<std::vector<double>> zeros(int rows, int cols) {
    return std::vector<std::vector<double>>(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols), 0.0));
}

inline FilteredTree single_outcome(int horizon) {
    std::vector<std::vector<std::vector<Outcome>>> cells(static_cast<std::size_t>(horizon + 1), {{0}});
    return make_tree({1.0}, cells, cells);
}

/// Two equally likely outcomes, N = 1, revealed at t = 1; X_0 = 1, X_1 = (2, 0), μ ≡ 1, g = id.
/// `interval` is X_{0+}; the conforming choice is E[X_1] = 1.
inline Model two_outcome(double interval = 1.0) {
    return Model{make_tree({0.5, 0.5}, {{{0, 1}}, {{0}, {1}}}, {{{0, 1}}, {{0}, {1}}}),
                 LadlagProcess({{1, 1}, {2, 0}}, {{interval, interval}, {0, 0}}), RandomMeasure({{1, 1}, {1, 1}}),
                 CostField(1, 2, LinearCost{})};
}

/// One outcome, N = 1, X = (1, 2) with zero interval values, μ = (1, 0), g = id.
inline Model one_outcome_atoms() {
    return Model{single_outcome(1), LadlagProcess({{1}, {2}}, {{0}, {0}}), RandomMeasure({{1}, {0}}),
                 CostField(1, 1, LinearCost{})};
}

/// One outcome, N = 1, X_0 = 0, X_{0+} = X_1 = 1, μ = (1, 0), g = id: stopping just after 0 pays.
inline Model jump_after_atom() {
    return Model{single_outcome(1), LadlagProcess({{0}, {1}}, {{1}, {0}}), RandomMeasure({{1}, {0}}),
                 CostField(1, 1, LinearCost{})};
}

inline Model zero_model(const FilteredTree& tree) {
    const int n = tree.outcome_count();
    const int N = tree.horizon();
    std::vector<std::vector<double>> w(static_cast<std::size_t>(N + 1), std::vector<double>(static_cast<std::size_t>(n), 1.0));
    return Model{tree, LadlagProcess(N, n), RandomMeasure(w), CostField(N, n, LinearCost{})};
}

/// Random small models of varying size.
inline std::vector<Model> random_models(std::uint64_t seed, int count, int max_outcomes, int max_horizon,
                                        bool full_support = true) {
    std::mt19937_64 rng(seed);
    std::vector<Model> out;
    for (int i = 0; i < count; ++i) {
        FixtureOptions opt;
        opt.outcomes = 2 + i % (max_outcomes - 1);
        opt.horizon = 1 + (i / 3) % max_horizon;
        opt.full_support = full_support;
        opt.meyer = static_cast<MeyerChoice>(i % 3);
        opt.mixed_costs = i % 4 != 0;
        out.push_back(random_fixture(rng, opt));
    }
    return out;
}

inline StoppingTime start(const Model& m) { return StoppingTime::constant(m.tree.outcome_count(), Instant::at(0)); }

inline std::vector<StoppingTime> all_stopping_times(const FilteredTree& tree) {
    return enumerate_stopping_times(tree, StoppingTime::constant(tree.outcome_count(), Instant::at(0)), false);
}

inline std::vector<double> linspace(double lo, double hi, int points) {
    std::vector<double> out;
    for (int i = 0; i < points; ++i) out.push_back(lo + (hi - lo) * i / (points - 1));
    return out;
}

}  // namespace support
