#pragma once

// Irreversible investment driven by a compound Poisson price seen through a threshold sensor:
// path simulation, the closed-form signal L^Λ, the induced control and its discounted reward.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mrep {

struct ExponentialJumps {
    double mean = 1.0;
};
struct LogNormalJumps {
    double mu_ln = 0.0;
    double sigma_ln = 1.0;
};
/// y_lo with probability p_lo, else y_hi.
struct TwoPointJumps {
    double y_lo = 1.0;
    double y_hi = 1.0;
    double p_lo = 1.0;
};
using JumpDistribution = std::variant<ExponentialJumps, LogNormalJumps, TwoPointJumps>;

double jump_mean(const JumpDistribution& d);
/// P(Y < y).
double jump_cdf_below(const JumpDistribution& d, double y);
/// Smallest y with P(Y ≤ y) ≥ 1/2.
double jump_median(const JumpDistribution& d);
std::string to_string(const JumpDistribution& d);

struct LevyConfig {
    double p_tilde = 0.0;
    double lambda = 1.0;
    double r = 0.1;
    JumpDistribution jumps = ExponentialJumps{};
    double eta = 0.0;  // may be +∞
    double phi = 0.0;
    double horizon = 200.0;
    std::optional<double> m_override;  // replaces E[Y_1] in b = mλ/r

    [[nodiscard]] double m() const { return m_override ? *m_override : jump_mean(jumps); }
    [[nodiscard]] double b() const { return m() * lambda / r; }
    /// p(η) = P(Y_1 < η).
    [[nodiscard]] double p_eta() const;
};

/// Throws BadConfig.
void check_config(const LevyConfig& config);

struct MonteCarlo {
    int paths = 100'000;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct PathSample {
    std::vector<double> times;  // jump times in (0, horizon], strictly increasing
    std::vector<double> sizes;
    double p_tilde = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;

    /// N_t.
    [[nodiscard]] int count_at(double t) const;
    /// P̃_t (right-continuous).
    [[nodiscard]] double level_at(double t) const;
    /// P̃ after the first k jumps.
    [[nodiscard]] double level_after(int k) const;
};

PathSample simulate_path(const LevyConfig& config, std::uint64_t seed);

/// P̃^η at each jump time: the left limit plus the jump when it is at least η.
std::vector<double> sensor_path(const PathSample& path, double eta);

struct TGamma {
    double time = 0.0;
    int jumps = 0;  // N_{T(γ)}
    bool censored = false;
};

/// First jump whose size is ≥ η or at which the running jump sum is ≥ γ; censored at the horizon.
TGamma stopping_T_gamma(const PathSample& path, double gamma, double eta);

struct FEtaEstimate {
    double gamma = 0.0;
    double z = 0.0;
    double value = 0.0;
    double std_err = 0.0;
    int count = 0;
    double censored_fraction = 0.0;
};

/// The three expectations behind f^η(·, z) for every γ in [0, gamma_max] on one set of paths.
/// Each path contributes a step function of γ with steps at its partial jump sums, so the
/// aggregate is a sorted breakpoint table and evaluation is a binary search.
class FEtaSurface {
public:
    FEtaSurface(const LevyConfig& config, double gamma_max, const MonteCarlo& mc);

    [[nodiscard]] FEtaEstimate evaluate(double gamma, double z) const;
    [[nodiscard]] double gamma_max() const { return gamma_max_; }
    [[nodiscard]] int paths() const { return paths_; }

private:
    static constexpr int kMoments = 10;  // a, b, d, aa, bb, dd, ab, ad, bd, censored
    using Moments = std::array<double, kMoments>;

    LevyConfig config_;
    double gamma_max_;
    int paths_;
    std::vector<double> positions_;  // breakpoints, ascending
    std::vector<Moments> totals_;    // totals_[i] = sums for γ in (positions_[i-1], positions_[i]]
};

/// Monte-Carlo f^η(γ, z) with a delta-method standard error. Throws BadConfig.
FEtaEstimate f_eta(double gamma, double z, const LevyConfig& config, const MonteCarlo& mc);

/// f^η(0, z) from the exponential first-jump time.
double f_eta_gamma_zero(const LevyConfig& config, double z);

struct SensorState {
    double z = 0.0;            // P̃^η_t
    bool large_jump = false;   // ΔP̃^η_t ≥ η
};

struct SignalOptions {
    int grid_points = 64;
    MonteCarlo mc{20'000, 7, 1};
    double tol = 1e-9;  // golden-section bracket width, relative to 1 + domain length
};

struct SignalValue {
    double value = 0.0;
    double std_err = 0.0;
    int regime = 0;  // 1..4
    double gamma = 0.0;  // minimizer in regime 3
};

/// L^Λ for one sensor state. Regime 3 minimizes f^η(·, z) over the half-open domain by a grid
/// scan refined with golden-section search, on one common set of paths. Throws DegenerateSensor.
class LevySignal {
public:
    LevySignal(const LevyConfig& config, const SignalOptions& options = {});

    [[nodiscard]] SignalValue operator()(const SensorState& state) const;
    [[nodiscard]] const LevyConfig& config() const { return config_; }

    /// Right end of the search domain for regime 3, closed off by 1e-9.
    [[nodiscard]] double domain_end(double z) const;

private:
    [[nodiscard]] SignalValue regime_three(double z, const FEtaSurface& surface) const;

    LevyConfig config_;
    SignalOptions options_;
    std::optional<FEtaSurface> surface_;  // covers z ≥ p̃
};

struct ControlPoint {
    double t = 0.0;
    bool post = false;  // false: value at the instant t, true: just after t
    double p_tilde = 0.0;
    double sensor = 0.0;
    double signal = 0.0;
    double control = 0.0;
};

/// Sensor, signal and C = φ ∨ running max of the signal at 0, at every jump time and just after.
using TargetFunction = std::function<double(const SensorState&)>;
std::vector<ControlPoint> control_path(const LevyConfig& config, const PathSample& path, const TargetFunction& target);
std::vector<ControlPoint> control_path(const LevyConfig& config, const PathSample& path, const LevySignal& signal);

/// Σ e^{-rt} P̃_t ΔC_{t+} − Σ_{jumps} e^{-rt} ½ C_t². Throws NonMonotoneControl.
double reward(const LevyConfig& config, const std::vector<ControlPoint>& control, const PathSample& path);

struct Policy {
    std::string name;
    TargetFunction target;
};

struct PolicyResult {
    std::string name;
    double estimate = 0.0;
    double std_err = 0.0;
    double diff = 0.0;          // estimate minus the first policy's, on common paths
    double diff_std_err = 0.0;
    int paths = 0;
};

/// Common-random-number rewards, in input order, paired against the first policy.
std::vector<PolicyResult> compare_policies(const LevyConfig& config, const std::vector<Policy>& policies,
                                           const MonteCarlo& mc);

/// `count` constant targets from 0 to twice the best constant control c* = p̃(r/λ)/(1 − e^{-r·horizon}),
/// floored at φ; [0, 1] when c* is not positive.
std::vector<double> default_threshold_levels(const LevyConfig& config, int count = 11);

/// C^Λ followed by constant targets at `levels`.
std::vector<Policy> threshold_policies(const LevySignal& signal, const std::vector<double>& levels);

}  // namespace mrep
