#include "mrep/fixtures.hpp"

#include <algorithm>
#include <map>

namespace mrep {

namespace {

Partition split_cells(std::mt19937_64& rng, const Partition& p) {
    std::bernoulli_distribution split(0.7);
    std::vector<std::vector<Outcome>> cells;
    for (auto cell : p.cells()) {
        if (cell.size() < 2 || !split(rng)) {
            cells.push_back(cell);
            continue;
        }
        std::shuffle(cell.begin(), cell.end(), rng);
        std::uniform_int_distribution<std::size_t> cut(1, cell.size() - 1);
        const auto at = static_cast<std::ptrdiff_t>(cut(rng));
        cells.emplace_back(cell.begin(), cell.begin() + at);
        cells.emplace_back(cell.begin() + at, cell.end());
    }
    return Partition(std::move(cells), p.outcome_count());
}

CostFunction random_cost(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> family(0, 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (family(rng)) {
        case 0: return LinearCost{0.5 + 1.5 * u(rng), u(rng) - 0.5};
        case 1: return CubicOddCost{0.2 + 0.8 * u(rng), u(rng)};
        default: {
            PiecewiseLinearCost pl;
            double level = -1.0 - u(rng), value = -1.0 - u(rng);
            for (int i = 0; i < 4; ++i) {
                pl.levels.push_back(level);
                pl.values.push_back(value);
                level += 0.3 + u(rng);
                value += 0.2 + 2.0 * u(rng);
            }
            return pl;
        }
    }
}

}  // namespace

Partition random_between(std::mt19937_64& rng, const Partition& coarse, const Partition& fine) {
    std::map<int, std::vector<int>> children;  // coarse cell -> fine cells inside it
    for (int c = 0; c < fine.cell_count(); ++c) children[coarse.cell_of(fine.cell(c).front())].push_back(c);
    std::vector<std::vector<Outcome>> cells;
    for (const auto& [parent, kids] : children) {
        std::uniform_int_distribution<std::size_t> label(0, kids.size() - 1);
        std::map<std::size_t, std::vector<Outcome>> groups;
        for (int c : kids) {
            auto& g = groups[label(rng)];
            g.insert(g.end(), fine.cell(c).begin(), fine.cell(c).end());
        }
        for (auto& [l, members] : groups) cells.push_back(std::move(members));
    }
    return Partition(std::move(cells), fine.outcome_count());
}

LadlagProcess conforming_process(const FilteredTree& tree, const RandomMeasure& mu,
                                 const std::vector<std::vector<double>>& raw_at) {
    const int n = tree.outcome_count();
    const int N = tree.horizon();
    LadlagProcess x(N, n);
    for (int t = N; t >= 0; --t) {
        if (t < N) {
            const auto next = conditional_expectation(tree, x.slice(Instant::at(t + 1)), tree.filtration(t));
            std::copy(next.begin(), next.end(), x.slice(Instant::post(t)).begin());
        }
        auto at = conditional_expectation(tree, raw_at.at(t), tree.meyer(t));
        const auto after = conditional_expectation(tree, x.slice(Instant::post(t)), tree.meyer(t));
        for (const auto& cell : tree.meyer(t).cells()) {
            const bool atom_free = std::all_of(cell.begin(), cell.end(), [&](Outcome w) { return mu.weight(t, w) == 0.0; });
            const bool no_mass = std::all_of(cell.begin(), cell.end(), [&](Outcome w) { return mu.mass_from(Instant::at(t), w) == 0.0; });
            for (Outcome w : cell) {
                if (no_mass) at[w] = 0.0;
                else if (atom_free) at[w] = std::max(at[w], after[w]);
            }
        }
        std::copy(at.begin(), at.end(), x.slice(Instant::at(t)).begin());
    }
    return x;
}

Model random_fixture(std::mt19937_64& rng, const FixtureOptions& options) {
    const int n = options.outcomes;
    const int N = options.horizon;
    if (n < 1 || n > 63 || N < 0) throw Error(ErrorCode::InvalidInput, "fixture size out of range");
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::vector<double> probs(static_cast<std::size_t>(n));
    double total = 0.0;
    for (auto& p : probs) total += (p = 0.5 + u(rng));
    for (auto& p : probs) p /= total;

    std::vector<Partition> f, g;
    Partition previous = Partition::trivial(n);
    for (int t = 0; t <= N; ++t) {
        Partition next = split_cells(rng, previous);
        switch (options.meyer) {
            case MeyerChoice::Optional: g.push_back(next); break;
            case MeyerChoice::Predictable: g.push_back(previous); break;
            case MeyerChoice::Band: g.push_back(random_between(rng, previous, next)); break;
        }
        f.push_back(next);
        previous = std::move(next);
    }
    FilteredTree tree(std::move(probs), f, g);

    std::vector<std::vector<double>> weights(static_cast<std::size_t>(N + 1), std::vector<double>(static_cast<std::size_t>(n)));
    std::bernoulli_distribution zero_row(0.3);
    for (int t = 0; t <= N; ++t) {
        const bool empty = !options.full_support && zero_row(rng);
        for (const auto& cell : tree.filtration(t).cells()) {
            const double w = empty ? 0.0 : 0.2 + 1.3 * u(rng);
            for (Outcome o : cell) weights[t][o] = w;
        }
    }
    RandomMeasure mu(std::move(weights));

    std::vector<std::vector<CostFunction>> costs(static_cast<std::size_t>(N + 1),
                                                 std::vector<CostFunction>(static_cast<std::size_t>(n)));
    for (int t = 0; t <= N; ++t)
        for (const auto& cell : tree.filtration(t).cells()) {
            const CostFunction c = options.mixed_costs ? random_cost(rng) : CostFunction{LinearCost{}};
            for (Outcome o : cell) costs[t][o] = c;
        }

    std::normal_distribution<double> z;
    std::vector<std::vector<double>> raw(static_cast<std::size_t>(N + 1), std::vector<double>(static_cast<std::size_t>(n)));
    for (auto& row : raw)
        for (auto& v : row) v = z(rng);
    LadlagProcess x = conforming_process(tree, mu, raw);
    return Model{std::move(tree), std::move(x), std::move(mu), CostField(std::move(costs))};
}

Model band_sensitivity_fixture(MeyerChoice meyer) {
    const std::vector<std::vector<std::vector<Outcome>>> f{{{0, 1, 2, 3}}, {{0}, {1}, {2, 3}}, {{0}, {1}, {2}, {3}}};
    std::vector<std::vector<std::vector<Outcome>>> g;
    switch (meyer) {
        case MeyerChoice::Predictable: g = {f[0], f[0], f[1]}; break;
        case MeyerChoice::Band: g = {f[0], {{0}, {1, 2, 3}}, f[2]}; break;
        case MeyerChoice::Optional: g = f; break;
    }
    FilteredTree tree = make_tree({0.1, 0.2, 0.3, 0.4}, f, g);
    RandomMeasure mu(std::vector<std::vector<double>>(3, std::vector<double>(4, 1.0)));
    const std::vector<std::vector<double>> raw{{0.0, 0.0, 0.0, 0.0}, {3.0, 1.0, 0.0, -1.0}, {1.0, 2.0, 4.0, -2.0}};
    LadlagProcess x = conforming_process(tree, mu, raw);
    return Model{std::move(tree), std::move(x), std::move(mu), CostField(2, 4, LinearCost{})};
}

}  // namespace mrep
