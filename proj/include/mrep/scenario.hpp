#pragma once

// Scenario files: JSON documents describing a finite model or a Lévy configuration.

#include <cstdint>
#include <string>
#include <string_view>

#include "mrep/levy.hpp"
#include "mrep/processes.hpp"

namespace mrep {

struct ScenarioOptions {
    double tol_ell = 1e-10;
    double tol_eq = 1e-9;
    std::size_t cap = 1'000'000;
    std::uint64_t seed = 1;
    int workers = 1;
    int samples = 200;  // sampled stopping times when enumeration exceeds the cap

    friend bool operator==(const ScenarioOptions&, const ScenarioOptions&) = default;
};

/// Unvalidated contents of a model scenario; build_model turns it into a Model.
struct Scenario {
    std::vector<double> probs;
    int horizon = 0;
    std::vector<std::vector<std::vector<Outcome>>> filtration;
    std::vector<std::vector<std::vector<Outcome>>> meyer;
    std::vector<std::vector<double>> x_at;
    std::vector<std::vector<double>> x_post;
    std::vector<std::vector<double>> mu;
    CostField cost;
    ScenarioOptions options;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ParseError naming the line and column of a syntax error or the JSON pointer of a bad field.
Scenario parse_scenario(std::string_view text);
/// Throws InvalidInput for costs without a serialized form.
std::string emit_scenario(const Scenario& scenario);

/// Throws the tree and model errors (MeyerOutOfBand, NonRefining, ShapeMismatch, InvalidInput, ...).
Model build_model(const Scenario& scenario);
Scenario scenario_from_model(const Model& model, const ScenarioOptions& options = {});

struct LevyScenario {
    LevyConfig config;
    MonteCarlo mc;
    SignalOptions signal;
    std::vector<double> levels;  // constant policies for comparison; empty means the default set
    double z_min = 0.0;          // signal table range; equal bounds mean "around b"
    double z_max = 0.0;
    int z_points = 21;
};

/// `eta` may be a number, "inf", or "median" (the median of the jump distribution).
LevyScenario parse_levy_scenario(std::string_view text);
std::string emit_levy_scenario(const LevyScenario& scenario);

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace mrep
