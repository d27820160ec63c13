#include <cmath>
#include <random>

#include "doctest.h"
#include "mrep/representation.hpp"
#include "support.hpp"

using namespace mrep;
using namespace support;

namespace {

double finite(const ExtReal& v) {
    REQUIRE(v.is_finite());
    return v.value();
}

std::vector<Model> conforming_models(std::uint64_t seed, int count, int max_outcomes, int max_horizon,
                                     bool full_support = true) {
    auto models = random_models(seed, count, max_outcomes, max_horizon, full_support);
    for (const auto& m : models) REQUIRE(validate_inputs(m.tree, m.x, m.mu, m.g).all_passed());
    return models;
}

}  // namespace

TEST_CASE("horizon zero: L_0 = X_0 / mu_0") {
    const Model m{single_outcome(0), LadlagProcess({{3.0}}, {{0.0}}), RandomMeasure(std::vector<std::vector<double>>{{2.0}}),
                  CostField(0, 1, LinearCost{})};
    const auto sol = construct_L(m);
    CHECK(finite(sol.L.value(Instant::at(0), 0)) == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(sol.L.value(Instant::post(0), 0) == ExtReal::plus_infinity());
    CHECK(sol.width.at(0, 0) <= kDefaultTolEll);
}

TEST_CASE("zero process with normalized costs gives L = 0") {
    std::mt19937_64 rng(11);
    FixtureOptions opt;
    opt.outcomes = 4;
    opt.horizon = 2;
    opt.mixed_costs = false;
    const Model fixture = random_fixture(rng, opt);
    const Model m{fixture.tree, LadlagProcess(2, 4), fixture.mu, fixture.g};
    const auto sol = construct_L(m);
    for (int slot = 0; slot < m.tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, 2);
        for (int w = 0; w < 4; ++w) {
            const ExtReal v = sol.L.value(k, w);
            if (m.mu.mass_from(k, w) > 0.0) CHECK(std::abs(finite(v)) <= 1e-9);
            else CHECK(v == ExtReal::plus_infinity());
        }
    }
}

TEST_CASE("two-outcome fixture") {
    const Model m = two_outcome();
    const auto sol = construct_L(m);
    CHECK(sol.report.all_passed());
    CHECK(std::abs(finite(sol.L.value(Instant::at(0), 0))) <= 1e-9);
    CHECK(std::abs(finite(sol.L.value(Instant::post(0), 1))) <= 1e-9);
    CHECK(finite(sol.L.value(Instant::at(1), 0)) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(finite(sol.L.value(Instant::at(1), 1))) <= 1e-9);
    CHECK(sol.L.value(Instant::post(1), 0) == ExtReal::plus_infinity());
    CHECK(max_scaled_residual(m.tree, m.x, m.mu, m.g, sol.L, all_stopping_times(m.tree)) <= 1e-8);
}

TEST_CASE("interval value below the conditional mean breaks the representation") {
    const Model m = two_outcome(0.0);
    const auto sol = construct_L(m);
    CHECK_FALSE(sol.report.right_usc.passed);
    CHECK(sol.L.value(Instant::post(0), 0) == ExtReal::minus_infinity());
    const auto s = StoppingTime::constant(2, Instant::post(0));
    const auto v = verify_representation(m.tree, m.x, m.mu, m.g, sol.L, s);
    CHECK(std::abs(v.residual[0]) > residual_tolerance(0.0));
    CHECK(v.residual[0] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("terminal violation is rejected") {
    Model m = two_outcome();
    m.x.set(Instant::post(1), 0, 1.0);
    CHECK_THROWS_AS(construct_L(m), Error);
    try {
        construct_L(m);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidInput);
    }
}

TEST_CASE("l_{S,T} examples") {
    const Model m = two_outcome();
    const auto s0 = StoppingTime::constant(2, Instant::at(0));
    auto solve = [&](const StoppingTime& s, const StoppingTime& t) {
        return solve_ell_ST(m.tree, m.x, m.mu, m.g, s, t);
    };
    const auto to_one = solve(s0, StoppingTime::constant(2, Instant::at(1)));
    CHECK(std::abs(finite(to_one[0])) <= 1e-9);
    CHECK(to_one[0] == to_one[1]);
    CHECK(finite(solve(s0, StoppingTime::constant(2, Instant::never()))[0]) == doctest::Approx(0.5).epsilon(1e-9));
    const auto gap = solve(StoppingTime::constant(2, Instant::post(0)), StoppingTime::constant(2, Instant::at(1)));
    CHECK(gap[0] == ExtReal::plus_infinity());
    CHECK(gap[1] == ExtReal::plus_infinity());

    try {
        solve(s0, s0);
        FAIL("expected NotStrictlyLater");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotStrictlyLater);
    }
    const StoppingTime peeking({Instant::post(0), Instant::never()});
    try {
        solve(s0, peeking);
        FAIL("expected NotAStoppingTime");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotAStoppingTime);
    }
}

TEST_CASE("l_{S,T} is cell-wise on F^S") {
    const Model m = two_outcome();
    const StoppingTime s({Instant::at(1), Instant::at(1)});
    const auto l = solve_ell_ST(m.tree, m.x, m.mu, m.g, s, StoppingTime::constant(2, Instant::never()));
    CHECK(finite(l[0]) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(finite(l[1])) <= 1e-9);
}

TEST_CASE("construction is independent of the worker count") {
    for (const auto& m : conforming_models(21, 6, 4, 3)) {
        const auto one = construct_L(m, {kDefaultTolEll, 1});
        const auto many = construct_L(m, {kDefaultTolEll, 4});
        CHECK(one.L == many.L);
        CHECK(one.width == many.width);
    }
}

TEST_CASE("L solves the representation at every stopping time") {
    for (bool full : {true, false})
        for (const auto& m : conforming_models(full ? 5 : 6, 18, 4, 3, full)) {
            const auto sol = construct_L(m);
            const auto times = all_stopping_times(m.tree);
            CHECK(max_scaled_residual(m.tree, m.x, m.mu, m.g, sol.L, times) <= 1e-8);
            for (const auto& s : {times.front(), times.back()}) {
                const auto v = verify_representation(m.tree, m.x, m.mu, m.g, sol.L, s);
                for (double i : v.integrability) CHECK(std::isfinite(i));
            }
        }
}

TEST_CASE("L is measurable for the information at each instant") {
    for (const auto& m : conforming_models(8, 12, 5, 3)) {
        const auto sol = construct_L(m);
        for (int slot = 0; slot < m.tree.slot_count(); ++slot) {
            const Instant k = instant_at_slot(slot, m.tree.horizon());
            for (const auto& cell : m.tree.partition_at(k).cells())
                for (Outcome w : cell) CHECK(sol.L.value(k, w) == sol.L.value(k, cell.front()));
        }
    }
}

TEST_CASE("L agrees with the essential infimum of l_{S,T}") {
    for (bool full : {true, false})
        for (const auto& m : conforming_models(full ? 31 : 32, 12, 4, 3, full)) {
            const auto sol = construct_L(m);
            EssInfOracle oracle(m.tree, m.x, m.mu, m.g);
            for (int slot = 0; slot < m.tree.slot_count(); ++slot) {
                const Instant k = instant_at_slot(slot, m.tree.horizon());
                const auto s = StoppingTime::constant(m.tree.outcome_count(), k);
                const auto inf = oracle(s);
                for (int w = 0; w < m.tree.outcome_count(); ++w) {
                    const ExtReal a = sol.L.value(k, w), b = inf[w];
                    if (a.is_finite() && b.is_finite()) CHECK(std::abs(a.value() - b.value()) <= 1e-6 * (1 + std::abs(b.value())));
                    else CHECK(a == b);
                }
            }
        }
}

TEST_CASE("fixed point: the envelope at level L_k touches X at k and leaves it above") {
    for (const auto& m : conforming_models(41, 9, 4, 3)) {
        const auto sol = construct_L(m);
        for (int slot = 0; slot < m.tree.slot_count(); ++slot) {
            const Instant k = instant_at_slot(slot, m.tree.horizon());
            for (int w = 0; w < m.tree.outcome_count(); ++w) {
                const ExtReal l = sol.L.value(k, w);
                if (!l.is_finite()) continue;
                const double xk = m.x.value(k, w);
                const double below = snell_envelope(m.tree, m.x, m.mu, m.g, l.value() - 1e-6).continuation.value(k, w);
                const double above = snell_envelope(m.tree, m.x, m.mu, m.g, l.value() + 1e-6).continuation.value(k, w);
                CHECK(below <= xk + 1e-9 * (1 + std::abs(xk)));
                CHECK(above > xk);
            }
        }
    }
}

TEST_CASE("maximality") {
    const Model m = two_outcome();
    const auto sol = construct_L(m);
    const auto times = all_stopping_times(m.tree);

    SUBCASE("L itself is maximal") {
        const auto r = maximality_check(m.tree, m.x, m.mu, m.g, sol.L, sol.L, times);
        CHECK(r.status == MaximalityStatus::Maximal);
    }
    SUBCASE("raising L everywhere is not a solution") {
        SignalProcess raised = sol.L;
        for (int slot = 0; slot < m.tree.slot_count(); ++slot) {
            const Instant k = instant_at_slot(slot, 1);
            for (int w = 0; w < 2; ++w) {
                const ExtReal v = sol.L.value(k, w);
                if (v.is_finite()) raised.set(k, w, ExtReal(v.value() + 0.1));
            }
        }
        const auto r = maximality_check(m.tree, m.x, m.mu, m.g, sol.L, raised, times);
        CHECK(r.status == MaximalityStatus::CandidateNotASolution);
        CHECK(r.max_scaled_residual > 1e-8);
    }
    SUBCASE("lowering a value that is never a running record keeps a solution") {
        // L_{0+} = 0 never exceeds L_0 = 0, so lowering it leaves every running sup unchanged.
        SignalProcess lowered = sol.L;
        for (int w = 0; w < 2; ++w) lowered.set(Instant::post(0), w, ExtReal(finite(sol.L.value(Instant::post(0), w)) - 1.0));
        const auto r = maximality_check(m.tree, m.x, m.mu, m.g, sol.L, lowered, times);
        CHECK(r.status == MaximalityStatus::Maximal);
        CHECK(r.max_scaled_residual <= 1e-8);
    }
    CHECK(to_string(MaximalityStatus::CandidateNotASolution) == "CandidateNotASolution");
}

TEST_CASE("no perturbed solution lies above L") {
    std::mt19937_64 rng(99);
    const auto models = conforming_models(51, 8, 4, 2);
    std::vector<RepresentationSolution> solved;
    for (const auto& m : models) solved.push_back(construct_L(m));
    int solutions = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto i = static_cast<std::size_t>(trial) % models.size();
        const Model& m = models[i];
        const auto& sol = solved[i];
        SignalProcess candidate = sol.L;
        const int slot = std::uniform_int_distribution<int>(0, m.tree.slot_count() - 1)(rng);
        const Instant k = instant_at_slot(slot, m.tree.horizon());
        const auto& cells = m.tree.partition_at(k).cells();
        const auto& cell = cells[std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng)];
        const ExtReal base = sol.L.value(k, cell.front());
        if (!base.is_finite()) continue;
        const double delta = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
        for (Outcome w : cell) candidate.set(k, w, ExtReal(base.value() + delta));
        const auto r = maximality_check(m.tree, m.x, m.mu, m.g, sol.L, candidate, all_stopping_times(m.tree));
        CHECK(r.status != MaximalityStatus::NotMaximal);
        if (r.status == MaximalityStatus::Maximal) ++solutions;
    }
    CHECK(solutions > 0);
}

TEST_CASE("the Meyer band changes the signal") {
    std::vector<SignalProcess> signals;
    for (auto choice : {MeyerChoice::Predictable, MeyerChoice::Band, MeyerChoice::Optional}) {
        const Model m = band_sensitivity_fixture(choice);
        REQUIRE(validate_inputs(m.tree, m.x, m.mu, m.g).all_passed());
        const auto sol = construct_L(m);
        CHECK(max_scaled_residual(m.tree, m.x, m.mu, m.g, sol.L, all_stopping_times(m.tree)) <= 1e-8);
        signals.push_back(sol.L);
    }
    CHECK(signals[0] != signals[1]);
    CHECK(signals[1] != signals[2]);
    CHECK(signals[0] != signals[2]);
    // G_1 = {{0}, {1, 2, 3}}: outcome 0 is separated at time 1, the rest share one value.
    const auto& band = signals[1];
    CHECK(band.value(Instant::at(1), 1) == band.value(Instant::at(1), 3));
    CHECK(band.value(Instant::at(1), 0) != band.value(Instant::at(1), 1));
}
