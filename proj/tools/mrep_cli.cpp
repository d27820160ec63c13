#include <iostream>

#include "CLI11.hpp"
#include "mrep/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Signal processes for representation problems on finite trees, and the Lévy investment example"};
    app.require_subcommand(1);

    mrep::CommandOptions options;
    std::string scenario;
    std::optional<std::string> oracle_scenario;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", options.out, "Write the main CSV here instead of stdout");
        sub->add_option("--seed", options.seed, "Random seed");
        sub->add_option("--workers", options.workers, "Worker threads")->check(CLI::PositiveNumber);
    };
    auto add_tolerances = [&](CLI::App* sub) {
        sub->add_option("--tol-ell", options.tol_ell, "Bisection tolerance for signal levels")->check(CLI::PositiveNumber);
        sub->add_option("--tol-eq", options.tol_eq, "Relative tolerance for contact with the envelope")->check(CLI::PositiveNumber);
        sub->add_option("--cap", options.cap, "Enumeration cap")->check(CLI::PositiveNumber);
    };

    auto* validate = app.add_subcommand("validate", "Check a scenario against the model hypotheses");
    validate->add_option("scenario", scenario, "Scenario file")->required();

    auto* solve = app.add_subcommand("solve", "Compute the signal L and verify the representation");
    solve->add_option("scenario", scenario, "Scenario file")->required();
    solve->add_option("--residuals", options.residuals, "Residual CSV (default: <out>.residuals.csv)");
    add_common(solve);
    add_tolerances(solve);

    auto* oracle = app.add_subcommand("oracle", "Compare every solver with its brute-force oracle");
    oracle->add_option("scenario", oracle_scenario, "Scenario file");
    oracle->add_option("--random", options.random, "Use this many random fixtures instead")->check(CLI::NonNegativeNumber);
    add_common(oracle);
    add_tolerances(oracle);

    auto* levy = app.add_subcommand("levy", "Monte-Carlo runs of the compound Poisson investment example");
    levy->add_option("scenario", scenario, "Lévy scenario file")->required();
    levy->add_option("--mode", options.mode, "simulate | signal | compare")
        ->check(CLI::IsMember({"simulate", "signal", "compare"}));
    levy->add_option("--eta", options.eta, "Override the sensor threshold")->check(CLI::NonNegativeNumber);
    add_common(levy);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mrep::exit_code::parse;
    }

    if (*validate) return mrep::cmd_validate(scenario, std::cout, std::cerr);
    if (*solve) return mrep::cmd_solve(scenario, options, std::cout, std::cerr);
    if (*oracle) return mrep::cmd_oracle(oracle_scenario, options, std::cout, std::cerr);
    return mrep::cmd_levy(scenario, options, std::cout, std::cerr);
}
