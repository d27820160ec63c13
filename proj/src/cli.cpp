#include "mrep/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "mrep/fixtures.hpp"

namespace mrep {

namespace {

constexpr double kResidualTol = 1e-8;
constexpr double kOracleTol = 1e-6;

/// Writes to the named file, or to `fallback` when no name is given.
class Sink {
public:
    Sink(const std::optional<std::string>& path, std::ostream& fallback) {
        if (path) {
            file_.open(*path, std::ios::binary);
            if (!file_) throw Error(ErrorCode::InvalidInput, "cannot write " + *path);
        }
        stream_ = path ? static_cast<std::ostream*>(&file_) : &fallback;
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

std::string phase_name(Instant k) { return k.is_post() ? "post" : "at"; }

int report_error(const Error& e, std::ostream& err) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
}

void print_check(const ValidationCheck& check, bool hard, std::ostream& out) {
    out << check.name << ": " << (check.passed ? "pass" : (hard ? "FAIL" : "warning")) << "\n";
    for (const auto& v : check.violations)
        out << "  outcome " << v.outcome << ", time " << to_string(v.instant) << "\n";
}

struct LoadedModel {
    Scenario scenario;
    Model model;
};

LoadedModel load(const std::string& path, const CommandOptions& options) {
    Scenario s = parse_scenario(read_file(path));
    if (options.tol_ell) s.options.tol_ell = *options.tol_ell;
    if (options.tol_eq) s.options.tol_eq = *options.tol_eq;
    if (options.cap) s.options.cap = *options.cap;
    if (options.seed) s.options.seed = *options.seed;
    if (options.workers) s.options.workers = *options.workers;
    Model m = build_model(s);
    return {std::move(s), std::move(m)};
}

double gap(const ExtReal& a, const ExtReal& b) {
    if (a.is_finite() && b.is_finite()) return std::abs(a.value() - b.value());
    return a == b ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError: return exit_code::parse;
        case ErrorCode::TooLarge: return exit_code::too_large;
        case ErrorCode::NonRefining:
        case ErrorCode::MeyerOutOfBand:
        case ErrorCode::BadWeights:
        case ErrorCode::ShapeMismatch:
        case ErrorCode::InvalidInput:
        case ErrorCode::BadConfig:
        case ErrorCode::DegenerateSensor: return exit_code::validation;
        default: return exit_code::solve_failure;
    }
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string format_value(const ExtReal& v) {
    if (v.is_finite()) return format_double(v.value());
    return v == ExtReal::plus_infinity() ? "inf" : "-inf";
}

StoppingTime random_stopping_time(const FilteredTree& tree, std::mt19937_64& rng) {
    std::vector<Instant> values(static_cast<std::size_t>(tree.outcome_count()), Instant::never());
    std::bernoulli_distribution coin(0.5);
    for (int slot = 0; slot < tree.slot_count(); ++slot) {
        const Instant k = instant_at_slot(slot, tree.horizon());
        for (const auto& cell : tree.partition_at(k).cells()) {
            if (!values[cell.front()].is_never() || !coin(rng)) continue;
            for (Outcome w : cell) values[w] = k;
        }
    }
    return StoppingTime(std::move(values));
}

std::vector<StoppingTime> verification_times(const FilteredTree& tree, std::size_t cap, int samples,
                                             std::uint64_t seed) {
    const auto zero = StoppingTime::constant(tree.outcome_count(), Instant::at(0));
    try {
        return enumerate_stopping_times(tree, zero, false, PhaseSet::AtAndPost, cap);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::TooLarge) throw;
    }
    std::vector<StoppingTime> out;
    for (int slot = 0; slot <= tree.slot_count(); ++slot)
        out.push_back(StoppingTime::constant(tree.outcome_count(), instant_at_slot(slot, tree.horizon())));
    std::mt19937_64 rng(seed);
    for (int i = 0; i < samples; ++i) out.push_back(random_stopping_time(tree, rng));
    return out;
}

double OracleGaps::max() const { return std::max({ess_inf, envelope, divided, universal_signal}); }

OracleGaps oracle_gaps(const Model& m, const RepresentationSolution& solution, const std::vector<double>& levels,
                       std::size_t cap, double tol_eq) {
    OracleGaps gaps;
    const int n = m.tree.outcome_count();
    const auto zero = StoppingTime::constant(n, Instant::at(0));

    EssInfOracle ess(m.tree, m.x, m.mu, m.g, kDefaultTolEll, cap);
    for (const auto& s : enumerate_stopping_times(m.tree, zero, false, PhaseSet::AtAndPost, cap)) {
        const auto inf = ess(s);
        for (int w = 0; w < n; ++w)
            if (!s[w].is_never()) gaps.ess_inf = std::max(gaps.ess_inf, gap(solution.L.value(s[w], w), inf[w]));
    }

    const DividedOracle divided(m.tree, zero, cap);
    for (double level : levels) {
        const auto y = snell_envelope(m.tree, m.x, m.mu, m.g, level);
        const auto enumerated = envelope_oracle(m.tree, m.x, m.mu, m.g, level, zero, cap);
        const auto best = divided.optimum(m.x, m.mu, m.g, level).value;
        const auto tau = classify_contact(m.tree, m.x, y, zero, tol_eq);
        const auto attained = divided_value(m.tree, m.x, m.mu, m.g, level, tau, zero);
        for (int w = 0; w < n; ++w) {
            const double y0 = y.value.at(0, w);
            gaps.envelope = std::max(gaps.envelope, std::abs(y0 - enumerated[w]));
            gaps.divided = std::max({gaps.divided, std::abs(y0 - best[w]), std::abs(y0 - attained[w])});
        }
    }
    for (const auto& r : certify_universal_signal(m.tree, m.x, m.mu, m.g, solution.L, levels, cap))
        gaps.universal_signal = std::max(gaps.universal_signal, r.gap);
    return gaps;
}

std::vector<Model> random_fixture_batch(std::uint64_t seed, int count, bool full_support) {
    std::mt19937_64 rng(seed);
    std::vector<Model> out;
    for (int i = 0; i < count; ++i) {
        FixtureOptions opt;
        opt.outcomes = 2 + i % 3;
        opt.horizon = 1 + (i / 3) % 3;
        opt.full_support = full_support;
        opt.meyer = static_cast<MeyerChoice>(i % 3);
        opt.mixed_costs = i % 4 != 0;
        out.push_back(random_fixture(rng, opt));
    }
    return out;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
    try {
        const auto [scenario, m] = load(path, {});
        const auto report = validate_inputs(m.tree, m.x, m.mu, m.g);
        print_check(report.terminal, true, out);
        print_check(report.left_usc, false, out);
        print_check(report.right_usc, false, out);
        if (!report.hard_ok()) {
            out << "status: invalid\n";
            return exit_code::validation;
        }
        out << (report.all_passed() ? "status: ok\n" : "status: ok with warnings\n");
        return exit_code::ok;
    } catch (const Error& e) {
        return report_error(e, err);
    }
}

int cmd_solve(const std::string& path, const CommandOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const auto [scenario, m] = load(path, options);
        const auto report = validate_inputs(m.tree, m.x, m.mu, m.g);
        if (!report.hard_ok()) {
            print_check(report.terminal, true, err);
            err << "refusing to solve: terminal condition fails\n";
            return exit_code::validation;
        }
        if (!report.all_passed()) {
            err << "warning: semicontinuity surrogate fails; a representation may not exist\n";
            print_check(report.left_usc, false, err);
            print_check(report.right_usc, false, err);
        }
        const auto& opt = scenario.options;
        const auto solution = construct_L(m, {opt.tol_ell, opt.workers});

        {
            Sink sink(options.out, out);
            *sink << "outcome,time,phase,value\n";
            for (int w = 0; w < m.tree.outcome_count(); ++w)
                for (int slot = 0; slot < m.tree.slot_count(); ++slot) {
                    const Instant k = instant_at_slot(slot, m.tree.horizon());
                    *sink << w << ',' << k.time << ',' << phase_name(k) << ',' << format_value(solution.L.value(k, w)) << '\n';
                }
        }

        const auto times = verification_times(m.tree, opt.cap, opt.samples, opt.seed);
        std::optional<std::string> residual_path = options.residuals;
        if (!residual_path && options.out) residual_path = *options.out + ".residuals.csv";
        double worst = 0.0;
        {
            Sink sink(residual_path, out);
            if (!residual_path) *sink << '\n';
            *sink << "stopping_time,outcome,time,phase,residual,scaled_residual\n";
            for (std::size_t i = 0; i < times.size(); ++i) {
                const auto v = verify_representation(m.tree, m.x, m.mu, m.g, solution.L, times[i]);
                for (int w = 0; w < m.tree.outcome_count(); ++w) {
                    const Instant s = times[i][w];
                    const double scaled = std::abs(v.residual[w]) / (1.0 + std::abs(m.x.value(s, w)));
                    worst = std::isnan(scaled) ? std::numeric_limits<double>::infinity() : std::max(worst, scaled);
                    *sink << i << ',' << w << ',' << (s.is_never() ? "inf" : std::to_string(s.time)) << ','
                          << (s.is_never() ? "at" : phase_name(s)) << ',' << format_double(v.residual[w]) << ','
                          << format_double(scaled) << '\n';
                }
            }
        }
        const bool ok = worst <= kResidualTol;
        out << "max_scaled_residual " << format_double(worst) << " tolerance " << format_double(kResidualTol)
            << " stopping_times " << times.size() << (ok ? " ok" : " FAIL") << "\n";
        return ok ? exit_code::ok : exit_code::solve_failure;
    } catch (const Error& e) {
        return report_error(e, err);
    }
}

int cmd_oracle(const std::optional<std::string>& path, const CommandOptions& options, std::ostream& out,
               std::ostream& err) {
    try {
        std::vector<Model> models;
        std::size_t cap = options.cap.value_or(kDefaultEnumerationCap);
        double tol_eq = options.tol_eq.value_or(kDefaultTolEq);
        if (options.random > 0) {
            models = random_fixture_batch(options.seed.value_or(1), options.random);
        } else {
            if (!path) throw Error(ErrorCode::ParseError, "oracle needs a scenario file or --random");
            auto loaded = load(*path, options);
            cap = loaded.scenario.options.cap;
            tol_eq = loaded.scenario.options.tol_eq;
            models.push_back(std::move(loaded.model));
        }
        OracleGaps worst;
        for (const auto& m : models) {
            const auto solution = construct_L(m, {options.tol_ell.value_or(kDefaultTolEll), options.workers.value_or(1)});
            const auto g = oracle_gaps(m, solution, default_level_grid(solution.L), cap, tol_eq);
            worst.ess_inf = std::max(worst.ess_inf, g.ess_inf);
            worst.envelope = std::max(worst.envelope, g.envelope);
            worst.divided = std::max(worst.divided, g.divided);
            worst.universal_signal = std::max(worst.universal_signal, g.universal_signal);
        }
        out << "check,max_gap\n";
        out << "ess_inf," << format_double(worst.ess_inf) << "\n";
        out << "envelope," << format_double(worst.envelope) << "\n";
        out << "divided," << format_double(worst.divided) << "\n";
        out << "universal_signal," << format_double(worst.universal_signal) << "\n";
        out << "fixtures " << models.size() << (worst.max() <= kOracleTol ? " ok" : " FAIL") << "\n";
        return worst.max() <= kOracleTol ? exit_code::ok : exit_code::solve_failure;
    } catch (const Error& e) {
        return report_error(e, err);
    }
}

int cmd_levy(const std::string& path, const CommandOptions& options, std::ostream& out, std::ostream& err) {
    try {
        LevyScenario s = parse_levy_scenario(read_file(path));
        if (options.eta) s.config.eta = *options.eta;
        if (options.seed) s.mc.seed = *options.seed;
        if (options.workers) s.mc.workers = s.signal.mc.workers = *options.workers;
        check_config(s.config);
        const auto& c = s.config;

        if (options.mode == "simulate") {
            const LevySignal signal(c, s.signal);
            const auto path_sample = simulate_path(c, s.mc.seed);
            Sink sink(options.out, out);
            *sink << "t,P_tilde,sensor,L_lambda,C_lambda\n";
            for (const auto& p : control_path(c, path_sample, signal))
                *sink << format_double(p.t) << ',' << format_double(p.p_tilde) << ',' << format_double(p.sensor) << ','
                      << format_double(p.signal) << ',' << format_double(p.control) << '\n';
            return exit_code::ok;
        }
        if (options.mode == "signal") {
            const LevySignal signal(c, s.signal);
            double lo = s.z_min, hi = s.z_max;
            if (!(lo < hi)) {
                const double half = std::max(1.0, std::abs(c.b() - c.p_tilde));
                lo = c.b() - half;
                hi = c.b() + half;
            }
            Sink sink(options.out, out);
            *sink << "z,large_jump,regime,value,std_err\n";
            for (int i = 0; i < s.z_points; ++i) {
                const double z = s.z_points == 1 ? lo : lo + (hi - lo) * i / (s.z_points - 1);
                for (bool large : {false, true}) {
                    const auto v = signal({z, large});
                    *sink << format_double(z) << ',' << (large ? 1 : 0) << ',' << v.regime << ','
                          << format_double(v.value) << ',' << format_double(v.std_err) << '\n';
                }
            }
            return exit_code::ok;
        }
        if (options.mode == "compare") {
            const LevySignal signal(c, s.signal);
            const auto levels = s.levels.empty() ? default_threshold_levels(c) : s.levels;
            auto results = compare_policies(c, threshold_policies(signal, levels), s.mc);
            const auto reference = results.front();
            double best_diff = 0.0, best_se = 0.0;
            for (const auto& r : results)
                if (r.diff > best_diff) {
                    best_diff = r.diff;
                    best_se = r.diff_std_err;
                }
            std::stable_sort(results.begin(), results.end(),
                             [](const PolicyResult& a, const PolicyResult& b) { return a.estimate > b.estimate; });
            Sink sink(options.out, out);
            *sink << "policy,estimate,std_err,diff_vs_C_Lambda,diff_std_err,paths\n";
            for (const auto& r : results)
                *sink << r.name << ',' << format_double(r.estimate) << ',' << format_double(r.std_err) << ','
                      << format_double(r.diff) << ',' << format_double(r.diff_std_err) << ',' << r.paths << '\n';
            const bool within = best_diff <= 2.0 * best_se;
            err << "C_Lambda " << format_double(reference.estimate) << " +- " << format_double(reference.std_err)
                << (within ? "; no alternative is better by more than 2 paired std-err\n"
                           : "; an alternative is better by more than 2 paired std-err\n");
            return exit_code::ok;
        }
        throw Error(ErrorCode::ParseError, "unknown levy mode '" + options.mode + "'");
    } catch (const Error& e) {
        return report_error(e, err);
    }
}

}  // namespace mrep
