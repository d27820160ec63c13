#pragma once

// The maximal Λ-measurable solution L of
//   X_S = E[ Σ_{t ≥ S} g_t(sup_{v∈[S,t]} L_v) μ_t | F^Λ_S ]   for all Λ-stopping times S,
// together with the ℓ_{S,T} characterization used to check it.

#include <map>
#include <mutex>
#include <utility>

#include "mrep/snell.hpp"

namespace mrep {

inline constexpr double kDefaultTolEll = 1e-10;

struct RepresentationSolution {
    SignalProcess L;
    /// Final bisection bracket width per entry; 0 where L is infinite.
    LadlagProcess width;
    ValidationReport report;
};

struct SolveOptions {
    double tol_ell = kDefaultTolEll;
    int workers = 1;
};

/// L_k = sup{ℓ : Y^ℓ_k = X_k} per instant and cell, by bisection on the continuation value.
/// Throws InvalidInput when the terminal condition fails and BracketFailure when no finite
/// upper bracket exists below 2^60.
RepresentationSolution construct_L(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                   const CostField& g, const SolveOptions& options = {});
inline RepresentationSolution construct_L(const Model& m, const SolveOptions& options = {}) {
    return construct_L(m.tree, m.x, m.mu, m.g, options);
}

/// ℓ_{S,T} per outcome (constant on cells of F^Λ_S): +∞ where the window [S,T) carries no mass,
/// else the root of E[Σ_{[S,T)} g(ℓ)μ | F^Λ_S] = E[X_S − X_T | F^Λ_S]. Throws NotStrictlyLater.
std::vector<ExtReal> solve_ell_ST(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                  const CostField& g, const StoppingTime& s, const StoppingTime& t,
                                  double tol_ell = kDefaultTolEll);

/// ess inf of ℓ_{S,T} over Λ-stopping times T > S, by enumeration. Results depend only on
/// (instant, cell of F^Λ_S) and are cached on that key.
class EssInfOracle {
public:
    EssInfOracle(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu, const CostField& g,
                 double tol_ell = kDefaultTolEll, std::size_t cap = kDefaultEnumerationCap);

    std::vector<ExtReal> operator()(const StoppingTime& s);

private:
    ExtReal cell_value(Instant k, const std::vector<Outcome>& cell);

    FilteredTree tree_;
    LadlagProcess x_;
    RandomMeasure mu_;
    CostField g_;
    double tol_ell_;
    std::size_t cap_;
    std::map<std::pair<int, std::vector<Outcome>>, ExtReal> cache_;
    std::mutex mutex_;
};

std::vector<ExtReal> ess_inf_ell(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                 const CostField& g, const StoppingTime& s,
                                 std::size_t cap = kDefaultEnumerationCap);

struct Verification {
    std::vector<double> residual;       // X_S − E[Σ g(running sup of L) μ | F^Λ_S]
    std::vector<double> integrability;  // E[Σ |g(running sup of L)| μ | F^Λ_S]
};

Verification verify_representation(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                   const CostField& g, const SignalProcess& l, const StoppingTime& s);

/// Residual tolerance used throughout: 1e-8·(1 + |X_S|).
inline double residual_tolerance(double x_s) { return 1e-8 * (1.0 + std::abs(x_s)); }

/// Largest |residual| / (1 + |X_S|) over the given stopping times.
double max_scaled_residual(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                           const CostField& g, const SignalProcess& l, const std::vector<StoppingTime>& times);

enum class MaximalityStatus { Maximal, NotMaximal, CandidateNotASolution };

struct MaximalityReport {
    MaximalityStatus status = MaximalityStatus::Maximal;
    double max_scaled_residual = 0.0;
    std::vector<Violation> exceedances;  // entries where the candidate lies above L
};

/// If the candidate solves the representation at every stopping time in `times`, checks that it
/// lies below L at every finite instant.
MaximalityReport maximality_check(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                  const CostField& g, const SignalProcess& l, const SignalProcess& candidate,
                                  const std::vector<StoppingTime>& times);

std::string to_string(MaximalityStatus status);

}  // namespace mrep
