#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "mrep/probspace.hpp"

using namespace mrep;

namespace {

FilteredTree two_outcome_optional() {
    return make_tree({0.5, 0.5}, {{{0, 1}}, {{0}, {1}}}, {{{0, 1}}, {{0}, {1}}});
}

// Three outcomes, N = 2: F_0 trivial, F_1 = {{0,1},{2}}, F_2 finest; G_1 = F_0, G_2 = F_2.
FilteredTree three_outcome_band() {
    return make_tree({0.2, 0.3, 0.5}, {{{0, 1, 2}}, {{0, 1}, {2}}, {{0}, {1}, {2}}},
                     {{{0, 1, 2}}, {{0, 1, 2}}, {{0}, {1}, {2}}});
}

// Every assignment of outcomes to instants, filtered by the stopping-time predicate.
std::vector<StoppingTime> brute_force_stopping_times(const FilteredTree& tree, const StoppingTime& lower, bool strict,
                                                     PhaseSet phases) {
    const int n = tree.outcome_count();
    std::vector<Instant> choices;
    for (int slot = 0; slot <= tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, tree.horizon());
        if (phases == PhaseSet::AtOnly && k.is_post()) continue;
        choices.push_back(k);
    }
    std::vector<StoppingTime> out;
    std::vector<std::size_t> digits(static_cast<std::size_t>(n), 0);
    for (;;) {
        std::vector<Instant> values;
        bool ok = true;
        for (int w = 0; w < n; ++w) {
            const Instant k = choices[digits[w]];
            values.push_back(k);
            const Instant lo = lower[w];
            ok = ok && ((strict && !lo.is_never()) ? k > lo : k >= lo);
        }
        StoppingTime s(values);
        if (ok && is_stopping_time(tree, s)) out.push_back(s);
        std::size_t i = 0;
        while (i < digits.size() && ++digits[i] == choices.size()) digits[i++] = 0;
        if (i == digits.size()) break;
    }
    return out;
}

std::set<std::vector<Instant>> as_set(const std::vector<StoppingTime>& times) {
    std::set<std::vector<Instant>> out;
    for (const auto& s : times) out.insert(s.values());
    return out;
}

// Partition generated by the values at S of all indicator processes 1{ω ∈ c, time = k}, which
// span the Λ-measurable step processes.
Partition generated_partition(const FilteredTree& tree, const StoppingTime& s) {
    const int n = tree.outcome_count();
    std::vector<std::vector<int>> signature(static_cast<std::size_t>(n));
    for (int slot = 0; slot <= tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, tree.horizon());
        const Partition& p = tree.partition_at(k);
        for (int c = 0; c < p.cell_count(); ++c)
            for (int w = 0; w < n; ++w) signature[w].push_back(s[w] == k && p.cell_of(w) == c);
    }
    std::map<std::vector<int>, std::vector<Outcome>> classes;
    for (int w = 0; w < n; ++w) classes[signature[w]].push_back(w);
    std::vector<std::vector<Outcome>> cells;
    for (auto& [key, members] : classes) cells.push_back(members);
    return Partition(cells, n);
}

}  // namespace

TEST_CASE("make_tree accepts optional and predictable Meyer fields") {
    CHECK_NOTHROW(two_outcome_optional());
    CHECK_NOTHROW(make_tree({0.5, 0.5}, {{{0, 1}}, {{0}, {1}}}, {{{0, 1}}, {{0, 1}}}));
}

TEST_CASE("make_tree rejects malformed inputs") {
    auto code_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        FAIL("expected an error");
        return ErrorCode::SolveFailure;
    };
    CHECK(code_of([] { make_tree({0.5, 0.5}, {{{0, 1}}, {{0, 1}}}, {{{0, 1}}, {{0}, {1}}}); }) ==
          ErrorCode::MeyerOutOfBand);
    CHECK(code_of([] { make_tree({0.5, 0.5}, {{{0}, {1}}, {{0, 1}}}, {{{0}, {1}}, {{0, 1}}}); }) ==
          ErrorCode::NonRefining);
    CHECK(code_of([] { make_tree({0.6, 0.5}, {{{0, 1}}}, {{{0, 1}}}); }) == ErrorCode::BadWeights);
    CHECK(code_of([] { make_tree({1.0, 0.0}, {{{0, 1}}}, {{{0, 1}}}); }) == ErrorCode::BadWeights);
    CHECK(code_of([] { make_tree({0.5, 0.5}, {{{0}}}, {{{0, 1}}}); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("conditional expectation on small partitions") {
    const auto tree = two_outcome_optional();
    const std::vector<double> v{2.0, 4.0};
    CHECK(conditional_expectation(tree, v, Partition::trivial(2)) == std::vector<double>{3.0, 3.0});
    CHECK(conditional_expectation(tree, v, Partition::finest(2)) == v);

    const auto three = make_tree({0.25, 0.25, 0.5}, {{{0, 1, 2}}}, {{{0, 1, 2}}});
    const auto out = conditional_expectation(three, std::vector<double>{1, 3, 5}, Partition({{0, 1}, {2}}, 3));
    CHECK(out[0] == doctest::Approx(2.0));
    CHECK(out[1] == doctest::Approx(2.0));
    CHECK(out[2] == doctest::Approx(5.0));
    CHECK_THROWS_AS(conditional_expectation(three, std::vector<double>{1, 2}, Partition::trivial(3)), Error);
}

TEST_CASE("conditional expectation is a projection and satisfies the tower property") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    const auto tree = make_tree({0.1, 0.2, 0.3, 0.15, 0.25}, {{{0, 1, 2, 3, 4}}}, {{{0, 1, 2, 3, 4}}});
    const Partition coarse({{0, 1, 2}, {3, 4}}, 5);
    const Partition fine({{0}, {1, 2}, {3}, {4}}, 5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(5);
        for (auto& x : v) x = u(rng);
        const auto once = conditional_expectation(tree, v, fine);
        const auto twice = conditional_expectation(tree, once, fine);
        const auto tower = conditional_expectation(tree, once, coarse);
        const auto direct = conditional_expectation(tree, v, coarse);
        for (int w = 0; w < 5; ++w) {
            CHECK(std::abs(once[w] - twice[w]) <= 1e-12);
            CHECK(std::abs(tower[w] - direct[w]) <= 1e-12);
        }
    }
}

TEST_CASE("instant ordering and slot indices") {
    CHECK(Instant::at(1) < Instant::post(1));
    CHECK(Instant::post(1) < Instant::at(2));
    CHECK(Instant::post(5) < Instant::never());
    for (int slot = 0; slot <= 6; ++slot) CHECK(slot_index(instant_at_slot(slot, 2), 2) == slot);
    CHECK(to_string(Instant::post(3)) == "3+");
    CHECK(to_string(Instant::never()) == "inf");
}

TEST_CASE("sigma field at deterministic and mixed times") {
    const auto tree = three_outcome_band();
    for (int t = 0; t <= tree.horizon(); ++t) {
        CHECK(sigma_field_at(tree, StoppingTime::constant(3, Instant::at(t))) == tree.meyer(t));
        CHECK(sigma_field_at(tree, StoppingTime::constant(3, Instant::post(t))) == tree.filtration(t));
    }
    CHECK(sigma_field_at(tree, StoppingTime::constant(3, Instant::never())) == tree.filtration(2));

    const auto separated = make_tree({0.5, 0.5}, {{{0}, {1}}, {{0}, {1}}}, {{{0}, {1}}, {{0}, {1}}});
    const StoppingTime mixed({Instant::at(0), Instant::at(1)});
    CHECK(sigma_field_at(separated, mixed) == Partition({{0}, {1}}, 2));
    CHECK(sigma_field_at(separated, mixed) == generated_partition(separated, mixed));

    CHECK_THROWS_AS(sigma_field_at(two_outcome_optional(), mixed), Error);
}

TEST_CASE("sigma field matches the generated partition at every stopping time") {
    for (const auto& tree : {two_outcome_optional(), three_outcome_band()}) {
        const auto all = enumerate_stopping_times(tree, StoppingTime::constant(tree.outcome_count(), Instant::at(0)), false);
        REQUIRE(!all.empty());
        for (const auto& s : all) CHECK(sigma_field_at(tree, s) == generated_partition(tree, s));
    }
}

TEST_CASE("stopping-time enumeration on one outcome") {
    const auto tree = make_tree({1.0}, {{{0}}, {{0}}}, {{{0}}, {{0}}});
    const auto zero = StoppingTime::constant(1, Instant::at(0));
    CHECK(enumerate_stopping_times(tree, zero, false, PhaseSet::AtOnly).size() == 3);
    CHECK(enumerate_stopping_times(tree, zero, true, PhaseSet::AtOnly).size() == 2);
    CHECK(enumerate_stopping_times(tree, zero, false, PhaseSet::AtAndPost).size() == 5);
}

TEST_CASE("stopping-time enumeration on the two-outcome optional tree") {
    const auto tree = two_outcome_optional();
    const auto zero = StoppingTime::constant(2, Instant::at(0));
    const auto at_only = enumerate_stopping_times(tree, zero, false, PhaseSet::AtOnly);
    // T ≡ 0, plus the four F_1-measurable maps into {1, ∞}.
    CHECK(at_only.size() == 5);
    CHECK(as_set(at_only) == as_set(brute_force_stopping_times(tree, zero, false, PhaseSet::AtOnly)));
}

TEST_CASE("stopping-time enumeration agrees with brute force") {
    const std::vector<FilteredTree> trees{
        two_outcome_optional(),
        make_tree({0.5, 0.5}, {{{0, 1}}, {{0}, {1}}}, {{{0, 1}}, {{0, 1}}}),
        three_outcome_band(),
    };
    for (const auto& tree : trees) {
        const int n = tree.outcome_count();
        std::vector<StoppingTime> lowers{StoppingTime::constant(n, Instant::at(0)),
                                         StoppingTime::constant(n, Instant::post(0))};
        const auto all = enumerate_stopping_times(tree, lowers[0], false);
        lowers.push_back(all[all.size() / 2]);
        lowers.push_back(all[all.size() / 3]);
        for (const auto& lower : lowers)
            for (bool strict : {false, true})
                for (PhaseSet phases : {PhaseSet::AtOnly, PhaseSet::AtAndPost}) {
                    const auto fast = enumerate_stopping_times(tree, lower, strict, phases);
                    const auto slow = brute_force_stopping_times(tree, lower, strict, phases);
                    CHECK(fast.size() == as_set(fast).size());
                    CHECK(as_set(fast) == as_set(slow));
                    for (const auto& s : fast) CHECK(is_stopping_time(tree, s));
                }
    }
}

TEST_CASE("enumeration cap") {
    const auto tree = three_outcome_band();
    CHECK_THROWS_AS(enumerate_stopping_times(tree, StoppingTime::constant(3, Instant::at(0)), false,
                                             PhaseSet::AtAndPost, 3),
                    Error);
}

TEST_CASE("predictable times and restriction") {
    const auto tree = two_outcome_optional();
    CHECK(is_predictable_time(tree, StoppingTime::constant(2, Instant::at(1))));
    CHECK_FALSE(is_predictable_time(tree, StoppingTime({Instant::at(1), Instant::never()})));
    CHECK(is_stopping_time(tree, StoppingTime({Instant::at(1), Instant::never()})));
    const std::vector<Outcome> first{0};
    CHECK(restrict_to(StoppingTime::constant(2, Instant::at(1)), first) ==
          StoppingTime({Instant::at(1), Instant::never()}));
}
