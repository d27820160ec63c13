#pragma once

// Optimal divided stopping driven by the signal L: stop the first time the running maximum of L
// reaches the level.

#include <optional>

#include "mrep/representation.hpp"

namespace mrep {

/// T_ℓ = first instant (phase order) where sup_{[0,k]} L ≥ ℓ. An at-phase trigger goes to H, a
/// post-phase trigger to H^+; outcomes that never trigger get T = ∞ in H. ℓ = +∞ never triggers.
/// Throws InvalidSignal for a mis-shaped or non-measurable L or a NaN level.
DividedStoppingTime signal_stopping_time(const FilteredTree& tree, const SignalProcess& l, double level);

struct SignalStoppingResult {
    double level = 0.0;
    DividedStoppingTime tau;
    std::vector<double> achieved;               // divided_value(τ_ℓ) at S ≡ 0, per outcome
    std::optional<std::vector<double>> oracle;  // brute-force divided optimum at S ≡ 0
    double gap = 0.0;                           // max |achieved − oracle| over outcomes
};

/// `points` equally spaced levels over [min finite L − 1, max finite L + 1].
std::vector<double> default_level_grid(const SignalProcess& l, int points = 21);

/// τ_ℓ against the exhaustive divided optimum at each level. Throws TooLarge.
std::vector<SignalStoppingResult> certify_universal_signal(const FilteredTree& tree, const LadlagProcess& x,
                                                           const RandomMeasure& mu, const CostField& g,
                                                           const SignalProcess& l, const std::vector<double>& levels,
                                                           std::size_t cap = kDefaultEnumerationCap, int workers = 1);

}  // namespace mrep
