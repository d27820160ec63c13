#include "doctest.h"

#include <cmath>
#include <random>

#include "mrep/processes.hpp"

using namespace mrep;

namespace {

FilteredTree optional_two() { return make_tree({0.5, 0.5}, {{{0, 1}}, {{0}, {1}}}, {{{0, 1}}, {{0}, {1}}}); }

FilteredTree single(int horizon) {
    std::vector<std::vector<std::vector<Outcome>>> cells(static_cast<std::size_t>(horizon + 1), {{0}});
    return make_tree({1.0}, cells, cells);
}

std::vector<std::vector<double>> matrix(int rows, int cols, double v = 0.0) {
    return std::vector<std::vector<double>>(static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(cols), v));
}

SignalProcess one_outcome_signal() {
    // at-values (1, 5), post-values (3, 0)
    SignalProcess l(1, 1);
    l.set(Instant::at(0), 0, ExtReal(1));
    l.set(Instant::post(0), 0, ExtReal(3));
    l.set(Instant::at(1), 0, ExtReal(5));
    l.set(Instant::post(1), 0, ExtReal(0));
    return l;
}

}  // namespace

TEST_CASE("extended reals order the infinities around the finite values") {
    CHECK(ExtReal::minus_infinity() < ExtReal(-1e300));
    CHECK(ExtReal(1e300) < ExtReal::plus_infinity());
    CHECK(ExtReal(2) == ExtReal(2));
    CHECK(max(ExtReal::minus_infinity(), ExtReal(-3)) == ExtReal(-3));
    CHECK(std::isinf(ExtReal::minus_infinity().to_double()));
    CHECK(to_string(ExtReal::plus_infinity()) == "+inf");
}

TEST_CASE("ladlag accessors") {
    LadlagProcess x({{1, 2}, {3, 4}}, {{5, 6}, {0, 0}});
    CHECK(x.at(1, 0) == 3);
    CHECK(x.post(0, 1) == 6);
    CHECK(x.left_limit(0, 0) == 1);
    CHECK(x.left_limit(1, 1) == 6);
    CHECK(x.right_limit(0, 0) == 5);
    CHECK(x.value(Instant::never(), 0) == 0);
    CHECK(x.value(Instant::post(0), 1) == 6);
    CHECK_THROWS_AS(LadlagProcess({{1, 2}}, {{1}}), Error);
}

TEST_CASE("lambda projection examples") {
    const auto predictable = make_tree({0.5, 0.5}, {{{0, 1}}, {{0}, {1}}}, {{{0, 1}}, {{0, 1}}});
    const auto projected = lambda_projection(predictable, {{0, 0}, {2, 0}}, matrix(2, 2));
    CHECK(projected.at(1, 0) == 1.0);
    CHECK(projected.at(1, 1) == 1.0);

    const LadlagProcess measurable({{1, 1}, {2, 0}}, {{1, 1}, {0, 0}});
    const auto same = lambda_projection(optional_two(), {{1, 1}, {2, 0}}, {{1, 1}, {0, 0}});
    CHECK(same == measurable);
}

TEST_CASE("lambda projection: duality, idempotence and linearity") {
    // N = 2 with a proper Meyer band at t = 2.
    const auto tree = make_tree({0.1, 0.2, 0.3, 0.4}, {{{0, 1, 2, 3}}, {{0, 1}, {2, 3}}, {{0}, {1}, {2}, {3}}},
                                {{{0, 1, 2, 3}}, {{0, 1, 2, 3}}, {{0, 1}, {2}, {3}}});
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    auto draw = [&] {
        auto m = matrix(3, 4);
        for (auto& row : m)
            for (auto& v : row) v = z(rng);
        return m;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const auto ra = draw(), rp = draw();
        const auto p = lambda_projection(tree, ra, rp);
        CHECK(is_lambda_measurable(tree, p));
        const LadlagProcess raw(ra, rp);
        // Increasing Λ-measurable integrators are nonnegative combinations of one-cell increments.
        for (int slot = 0; slot < tree.slot_count(); ++slot) {
            const Instant k = instant_at_slot(slot, tree.horizon());
            for (const auto& cell : tree.partition_at(k).cells()) {
                double lhs = 0.0, rhs = 0.0;
                for (Outcome w : cell) {
                    lhs += tree.probs()[w] * raw.value(k, w);
                    rhs += tree.probs()[w] * p.value(k, w);
                }
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
            }
        }
        std::vector<std::vector<double>> pa(3), pp(3);
        for (int t = 0; t <= 2; ++t)
            for (int w = 0; w < 4; ++w) {
                pa[t].push_back(p.at(t, w));
                pp[t].push_back(p.post(t, w));
            }
        const auto twice = lambda_projection(tree, pa, pp);
        const auto rb = draw(), rq = draw();
        auto sa = ra, sp = rp;
        for (int t = 0; t <= 2; ++t)
            for (int w = 0; w < 4; ++w) {
                sa[t][w] = 2.0 * ra[t][w] - rb[t][w];
                sp[t][w] = 2.0 * rp[t][w] - rq[t][w];
            }
        const auto sum = lambda_projection(tree, sa, sp);
        const auto q = lambda_projection(tree, rb, rq);
        for (int slot = 0; slot < tree.slot_count(); ++slot) {
            const Instant k = instant_at_slot(slot, tree.horizon());
            for (int w = 0; w < 4; ++w) {
                CHECK(std::abs(twice.value(k, w) - p.value(k, w)) <= 1e-12);
                CHECK(std::abs(sum.value(k, w) - (2.0 * p.value(k, w) - q.value(k, w))) <= 1e-12);
            }
        }
        for (int t = 0; t <= 2; ++t) {
            const auto ce = conditional_expectation(tree, ra[t], tree.meyer(t));
            for (int w = 0; w < 4; ++w) CHECK(p.at(t, w) == ce[w]);
        }
    }
}

TEST_CASE("running sup windows") {
    const auto l = one_outcome_signal();
    CHECK(running_sup(l, Instant::at(1), Instant::at(1), 0) == ExtReal(5));
    CHECK(running_sup(l, Instant::at(0), Instant::at(1), 0) == ExtReal(5));
    CHECK(running_sup(l, Instant::post(0), Instant::at(1), 0) == ExtReal(5));
    CHECK(running_sup(l, Instant::post(0), Instant::post(0), 0) == ExtReal(3));
    CHECK(running_sup(l, Instant::at(0), Instant::at(0), 0) == ExtReal(1));
    CHECK(running_sup(l, Instant::at(0), Instant::never(), 0) == ExtReal::plus_infinity());
    CHECK_THROWS_AS(running_sup(l, Instant::at(1), Instant::post(0), 0), Error);

    SignalProcess low(1, 1, ExtReal::minus_infinity());
    CHECK(running_sup(low, Instant::at(0), Instant::post(1), 0).is_minus_infinity());
    low.set(Instant::at(1), 0, ExtReal(-2));
    CHECK(running_sup(low, Instant::at(0), Instant::post(1), 0) == ExtReal(-2));
}

TEST_CASE("running sup is monotone in the window") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    SignalProcess l(3, 1);
    for (int slot = 0; slot < 8; ++slot) l.set(instant_at_slot(slot, 3), 0, ExtReal(u(rng)));
    for (int a = 0; a < 8; ++a)
        for (int b = a; b < 8; ++b) {
            const auto inner = running_sup(l, instant_at_slot(a, 3), instant_at_slot(b, 3), 0);
            if (a > 0) CHECK(inner <= running_sup(l, instant_at_slot(a - 1, 3), instant_at_slot(b, 3), 0));
            if (b < 7) CHECK(inner <= running_sup(l, instant_at_slot(a, 3), instant_at_slot(b + 1, 3), 0));
        }
}

TEST_CASE("integrate cost examples") {
    const auto tree = single(1);
    const RandomMeasure mu({{1.0}, {1.0}});
    const CostField g(1, 1, LinearCost{});
    const LevelPath two = [](int, Outcome) { return 2.0; };
    auto window = [](Instant start, int end, bool atom) { return CostWindow{{start}, {WindowEnd{end, atom}}}; };

    CHECK(integrate_cost(tree, mu, g, two, window(Instant::at(0), 0, false))[0] == 0.0);
    CHECK(integrate_cost(tree, mu, g, two, window(Instant::at(0), 1, false))[0] == 2.0);
    CHECK(integrate_cost(tree, mu, g, two, window(Instant::at(0), 1, true))[0] == 4.0);
    CHECK(integrate_cost(tree, mu, g, two, window(Instant::at(0), Instant::kNever, false))[0] == 4.0);
    CHECK(integrate_cost(tree, mu, g, two, window(Instant::post(0), Instant::kNever, false))[0] == 2.0);
    CHECK(integrate_cost(tree, mu, g, two, window(Instant::post(0), 0, true))[0] == 0.0);
    CHECK_THROWS_AS(integrate_cost(tree, mu, g, two, window(Instant::at(1), 0, true)), Error);
    CHECK_THROWS_AS(integrate_cost(tree, mu, g, two, CostWindow{}), Error);
}

TEST_CASE("integrate cost is additive over windows and monotone in the level") {
    const auto tree = single(3);
    const RandomMeasure mu({{0.5}, {0.0}, {2.0}, {1.0}});
    const CostField g(3, 1, CubicOddCost{1.0, 0.5});
    for (double level : {-2.0, -0.1, 0.0, 0.7, 3.0}) {
        const LevelPath f = [level](int t, Outcome) { return level + 0.1 * t; };
        const LevelPath higher = [level](int t, Outcome) { return level + 0.1 * t + 0.25; };
        for (int mid = 0; mid <= 3; ++mid)
            for (bool atom : {false, true}) {
                const WindowEnd split{mid, atom};
                const auto left = integrate_cost(tree, mu, g, f, {{Instant::at(0)}, {split}});
                const auto right = integrate_cost(tree, mu, g, f, {{split.exclusive_bound()}, {WindowEnd{}}});
                const auto whole = integrate_cost(tree, mu, g, f, {{Instant::at(0)}, {WindowEnd{}}});
                CHECK(left[0] + right[0] == doctest::Approx(whole[0]).epsilon(1e-14));
            }
        const auto base = integrate_cost(tree, mu, g, f, {{Instant::at(0)}, {WindowEnd{}}});
        const auto up = integrate_cost(tree, mu, g, higher, {{Instant::at(0)}, {WindowEnd{}}});
        CHECK(up[0] > base[0]);
        const auto empty_mass = integrate_cost(tree, mu, g, f, {{Instant::at(1)}, {WindowEnd{2, false}}});
        CHECK(empty_mass[0] == 0.0);
    }
}

TEST_CASE("cost families: validation and inversion") {
    CHECK_THROWS_AS(check_cost_function(LinearCost{0.0, 1.0}), Error);
    CHECK_THROWS_AS(check_cost_function(CubicOddCost{1.0, -1.0}), Error);
    CHECK_THROWS_AS(check_cost_function(PiecewiseLinearCost{{0, 1}, {1, 1}}), Error);
    CHECK_THROWS_AS(check_cost_function(CustomCost{"empty", {}, {}, {}}), Error);

    const PiecewiseLinearCost pl{{-1.0, 0.0, 2.0}, {-3.0, 0.0, 1.0}};
    CHECK(evaluate(pl, -2.0) == doctest::Approx(-6.0));
    CHECK(evaluate(pl, 1.0) == doctest::Approx(0.5));
    CHECK(evaluate(pl, 4.0) == doctest::Approx(2.0));

    const CustomCost sinh_cost{"sinh", [](double l) { return std::sinh(l); }, [](double y) { return std::asinh(y) - 1.0; },
                               [](double y) { return std::asinh(y) + 1.0; }};
    const std::vector<CostFunction> families{LinearCost{2.5, -1.0}, CubicOddCost{1.0, 0.0}, CubicOddCost{0.3, 2.0}, pl,
                                             sinh_cost};
    for (const auto& g : families) {
        const double lo = evaluate(g, -1e6), hi = evaluate(g, 1e6);
        if (std::isinf(lo) || std::isinf(hi)) {
            // sinh overflows at ±1e6; sample its finite range instead.
            for (double y : {-1e300, -1.0, 0.0, 3.5, 1e300}) {
                const double l = invert(g, y);
                CHECK(std::abs(evaluate(g, l) - y) <= 1e-10 * std::max(1.0, std::abs(y)));
            }
            continue;
        }
        for (int i = 0; i <= 400; ++i) {
            const double s = -1.0 + i / 200.0;
            // Cover both the bulk and the extreme ends of [g(-1e6), g(1e6)].
            const double y = s < 0 ? lo * std::pow(std::abs(s), 3) : hi * std::pow(s, 3);
            const double l = invert(g, y);
            CHECK(std::abs(evaluate(g, l) - y) <= 1e-10 * std::max(1.0, std::abs(y)));
        }
    }
}

TEST_CASE("adaptedness of measures and cost fields") {
    const auto tree = optional_two();
    CHECK(is_adapted(tree, RandomMeasure({{1, 1}, {2, 0}})));
    CHECK_FALSE(is_adapted(tree, RandomMeasure({{1, 2}, {2, 0}})));
    CostField g(1, 2, LinearCost{});
    CHECK(is_adapted(tree, g));
    g.set(1, 0, LinearCost{2.0, 0.0});
    CHECK(is_adapted(tree, g));
    g.set(0, 0, LinearCost{2.0, 0.0});
    CHECK_FALSE(is_adapted(tree, g));
    CHECK_THROWS_AS(RandomMeasure(std::vector<std::vector<double>>{{-1.0}}), Error);
}

TEST_CASE("validator: zero process passes") {
    const auto tree = optional_two();
    const LadlagProcess x(1, 2);
    const auto report = validate_inputs(tree, x, RandomMeasure({{1, 1}, {1, 1}}), CostField(1, 2, LinearCost{}));
    CHECK(report.all_passed());
}

TEST_CASE("validator: terminal violation") {
    const auto tree = optional_two();
    const LadlagProcess x({{0, 0}, {0, 1}}, matrix(2, 2));
    const auto report = validate_inputs(tree, x, RandomMeasure({{1, 1}, {1, 0}}), CostField(1, 2, LinearCost{}));
    CHECK_FALSE(report.hard_ok());
    REQUIRE(report.terminal.violations.size() == 1);
    CHECK(report.terminal.violations[0] == Violation{1, Instant::at(1)});

    const LadlagProcess tail({{0, 0}, {0, 0}}, {{0, 0}, {0, 2}});
    const auto r2 = validate_inputs(tree, tail, RandomMeasure({{1, 1}, {1, 1}}), CostField(1, 2, LinearCost{}));
    REQUIRE(r2.terminal.violations.size() == 1);
    CHECK(r2.terminal.violations[0] == Violation{1, Instant::post(1)});
}

TEST_CASE("validator: two-outcome fixture") {
    const auto tree = optional_two();
    const RandomMeasure mu({{1, 1}, {1, 1}});
    const CostField g(1, 2, LinearCost{});
    // Interval value after 0 equal to the expected value at 1.
    const LadlagProcess x({{1, 1}, {2, 0}}, {{1, 1}, {0, 0}});
    CHECK(validate_inputs(tree, x, mu, g).all_passed());

    // With a zero interval value the process jumps up in expectation across (0, 1).
    const LadlagProcess dip({{1, 1}, {2, 0}}, {{0, 0}, {0, 0}});
    const auto report = validate_inputs(tree, dip, mu, g);
    CHECK(report.hard_ok());
    CHECK(report.left_usc.passed);
    CHECK_FALSE(report.right_usc.passed);
    CHECK(report.right_usc.violations == std::vector<Violation>{{0, Instant::post(0)}, {1, Instant::post(0)}});
}

TEST_CASE("validator: left semicontinuity and atom-free right check") {
    const auto tree = single(1);
    const CostField g(1, 1, LinearCost{});
    // X_{0+} = 3 > X_1 = 1: left limit above the value.
    const LadlagProcess up({{0}, {1}}, {{3}, {0}});
    const auto r = validate_inputs(tree, up, RandomMeasure({{1}, {1}}), g);
    CHECK_FALSE(r.left_usc.passed);
    CHECK(r.left_usc.violations[0] == Violation{0, Instant::at(1)});

    // No atom at 0 and X_{0+} > X_0.
    const LadlagProcess jump({{0}, {1}}, {{1}, {0}});
    const auto r2 = validate_inputs(tree, jump, RandomMeasure({{0}, {1}}), g);
    CHECK_FALSE(r2.right_usc.passed);
    CHECK(r2.right_usc.violations[0] == Violation{0, Instant::at(0)});
    CHECK(validate_inputs(tree, jump, RandomMeasure({{1}, {1}}), g).right_usc.passed);
}

TEST_CASE("check_model rejects non-measurable inputs") {
    const auto tree = make_tree({0.5, 0.5}, {{{0, 1}}, {{0}, {1}}}, {{{0, 1}}, {{0, 1}}});
    const LadlagProcess x({{0, 0}, {1, 0}}, matrix(2, 2));
    CHECK_THROWS_AS(check_model(tree, x, RandomMeasure({{1, 1}, {1, 1}}), CostField(1, 2, LinearCost{})), Error);
}
