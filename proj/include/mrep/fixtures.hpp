#pragma once

// Random small models satisfying the representation hypotheses by construction.

#include <random>

#include "mrep/processes.hpp"

namespace mrep {

enum class MeyerChoice { Optional, Predictable, Band };

struct FixtureOptions {
    int outcomes = 3;
    int horizon = 2;
    bool full_support = true;  // otherwise whole time rows of μ may vanish
    MeyerChoice meyer = MeyerChoice::Band;
    bool mixed_costs = true;  // otherwise g_t(ℓ) = ℓ everywhere
};

/// Binary-branching filtration, Meyer band from random coarsening of F_t toward F_{t-1},
/// Λ-projected Gaussian at-values with interval values E[X_{t+1} | F_t], positive μ.
Model random_fixture(std::mt19937_64& rng, const FixtureOptions& options);

/// Random partition between `coarse` and `fine` (fine must refine coarse).
Partition random_between(std::mt19937_64& rng, const Partition& coarse, const Partition& fine);

/// Builds X from raw at-values: at-values projected onto the Meyer field, interval values
/// E[X_{t+1} | F_t], raised where needed so the model meets the terminal and semicontinuity
/// conditions for μ.
LadlagProcess conforming_process(const FilteredTree& tree, const RandomMeasure& mu,
                                 const std::vector<std::vector<double>>& raw_at);

/// Four outcomes, N = 2, F_1 = {{0}, {1}, {2, 3}} and F_2 discrete, with the same raw at-values
/// projected onto the chosen Meyer field. The band uses G_1 = {{0}, {1, 2, 3}}, strictly between
/// F_0 and F_1, and G_2 = F_2.
Model band_sensitivity_fixture(MeyerChoice meyer);

}  // namespace mrep
