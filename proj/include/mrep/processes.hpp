#pragma once

#include <compare>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mrep/probspace.hpp"

namespace mrep {

/// Real number extended by ±∞ through an explicit kind tag.
class ExtReal {
public:
    enum class Kind : std::uint8_t { MinusInfinity, Finite, PlusInfinity };

    constexpr ExtReal() = default;
    constexpr explicit ExtReal(double value) : kind_(Kind::Finite), value_(value) {}

    static constexpr ExtReal minus_infinity() { return ExtReal(Kind::MinusInfinity); }
    static constexpr ExtReal plus_infinity() { return ExtReal(Kind::PlusInfinity); }

    [[nodiscard]] constexpr Kind kind() const { return kind_; }
    [[nodiscard]] constexpr bool is_finite() const { return kind_ == Kind::Finite; }
    [[nodiscard]] constexpr bool is_minus_infinity() const { return kind_ == Kind::MinusInfinity; }
    [[nodiscard]] constexpr bool is_plus_infinity() const { return kind_ == Kind::PlusInfinity; }
    /// Finite value; 0 for the infinite kinds.
    [[nodiscard]] constexpr double value() const { return value_; }
    /// Conversion to IEEE double, mapping the infinite kinds to ±inf.
    [[nodiscard]] double to_double() const;

    friend constexpr std::partial_ordering operator<=>(const ExtReal& a, const ExtReal& b) {
        if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
        if (a.kind_ != Kind::Finite) return std::partial_ordering::equivalent;
        return a.value_ <=> b.value_;
    }
    friend constexpr bool operator==(const ExtReal& a, const ExtReal& b) {
        return (a <=> b) == std::partial_ordering::equivalent;
    }

private:
    constexpr explicit ExtReal(Kind kind) : kind_(kind) {}

    Kind kind_ = Kind::Finite;
    double value_ = 0.0;
};

std::string to_string(const ExtReal& x);
ExtReal max(const ExtReal& a, const ExtReal& b);

/// Step process on the phase grid: one at-value and one post-value per (t, outcome).
/// The value at ∞ is 0.
class LadlagProcess {
public:
    LadlagProcess() = default;
    LadlagProcess(int horizon, int outcome_count);
    /// `at[t][w]`, `post[t][w]` for t in 0..N.
    LadlagProcess(const std::vector<std::vector<double>>& at, const std::vector<std::vector<double>>& post);

    [[nodiscard]] int horizon() const { return horizon_; }
    [[nodiscard]] int outcome_count() const { return outcomes_; }

    [[nodiscard]] double at(int t, Outcome w) const { return data_[index(2 * t, w)]; }
    [[nodiscard]] double post(int t, Outcome w) const { return data_[index(2 * t + 1, w)]; }
    double& at(int t, Outcome w) { return data_[index(2 * t, w)]; }
    double& post(int t, Outcome w) { return data_[index(2 * t + 1, w)]; }

    /// Value at an instant; 0 at ∞.
    [[nodiscard]] double value(Instant instant, Outcome w) const;
    void set(Instant instant, Outcome w, double v);
    /// X_{t-}: the post-value at t-1, with X_{0-} := X_0.
    [[nodiscard]] double left_limit(int t, Outcome w) const { return t == 0 ? at(0, w) : post(t - 1, w); }
    /// X_{t+}: the post-value at t.
    [[nodiscard]] double right_limit(int t, Outcome w) const { return post(t, w); }

    /// All outcome values at one (finite) instant.
    [[nodiscard]] std::span<const double> slice(Instant instant) const;
    std::span<double> slice(Instant instant);

    friend bool operator==(const LadlagProcess&, const LadlagProcess&) = default;

private:
    [[nodiscard]] std::size_t index(int slot, Outcome w) const {
        return static_cast<std::size_t>(slot) * static_cast<std::size_t>(outcomes_) + static_cast<std::size_t>(w);
    }

    int horizon_ = 0;
    int outcomes_ = 0;
    std::vector<double> data_;
};

/// At-values G_t-measurable and post-values F_t-measurable.
bool is_lambda_measurable(const FilteredTree& tree, const LadlagProcess& process, double tol = 1e-12);

/// Optional random measure with atoms at grid times only.
class RandomMeasure {
public:
    RandomMeasure() = default;
    /// `weights[t][w]` for t in 0..N; throws InvalidInput on negative weights.
    explicit RandomMeasure(std::vector<std::vector<double>> weights);

    [[nodiscard]] int horizon() const { return static_cast<int>(weights_.size()) - 1; }
    [[nodiscard]] int outcome_count() const { return weights_.empty() ? 0 : static_cast<int>(weights_.front().size()); }
    [[nodiscard]] double weight(int t, Outcome w) const { return weights_.at(t).at(w); }
    [[nodiscard]] const std::vector<std::vector<double>>& weights() const { return weights_; }

    /// μ([from, ∞)) on outcome w, counting only atoms at or after `from`.
    [[nodiscard]] double mass_from(Instant from, Outcome w) const;

    friend bool operator==(const RandomMeasure&, const RandomMeasure&) = default;

private:
    std::vector<std::vector<double>> weights_;
};

/// Weights at t are F_t-measurable.
bool is_adapted(const FilteredTree& tree, const RandomMeasure& measure);

// --- cost functions ℓ ↦ g_t(ω, ℓ) -------------------------------------------

struct LinearCost {
    double slope = 1.0;  // > 0
    double intercept = 0.0;
    friend bool operator==(const LinearCost&, const LinearCost&) = default;
};

struct CubicOddCost {
    double cubic = 1.0;   // > 0
    double linear = 0.0;  // ≥ 0
    friend bool operator==(const CubicOddCost&, const CubicOddCost&) = default;
};

/// Strictly increasing interpolant through the knots, continued linearly with the
/// end slopes outside them.
struct PiecewiseLinearCost {
    std::vector<double> levels;
    std::vector<double> values;
    friend bool operator==(const PiecewiseLinearCost&, const PiecewiseLinearCost&) = default;
};

/// Extension point: any continuous strictly increasing surjection ℝ → ℝ. `evaluate`
/// must be pure; `lower_bracket(y)` / `upper_bracket(y)` return levels whose values lie
/// below / above y.
struct CustomCost {
    std::string name;
    std::function<double(double)> evaluate;
    std::function<double(double)> lower_bracket;
    std::function<double(double)> upper_bracket;
    friend bool operator==(const CustomCost& a, const CustomCost& b) { return a.name == b.name; }
};

using CostFunction = std::variant<LinearCost, CubicOddCost, PiecewiseLinearCost, CustomCost>;

double evaluate(const CostFunction& g, double level);
/// Throws InvalidInput when the parameters do not give a strictly increasing surjection.
void check_cost_function(const CostFunction& g);
/// Solves g(ℓ) = y by bracketed bisection down to floating resolution.
double invert(const CostFunction& g, double y);

/// Per (t, outcome) cost function; must be identical across each F_t-cell.
class CostField {
public:
    CostField() = default;
    CostField(int horizon, int outcome_count, CostFunction shared);
    explicit CostField(std::vector<std::vector<CostFunction>> functions);

    [[nodiscard]] int horizon() const { return static_cast<int>(functions_.size()) - 1; }
    [[nodiscard]] int outcome_count() const { return functions_.empty() ? 0 : static_cast<int>(functions_.front().size()); }
    [[nodiscard]] const CostFunction& function(int t, Outcome w) const { return functions_.at(t).at(w); }
    void set(int t, Outcome w, CostFunction g) { functions_.at(t).at(w) = std::move(g); }
    [[nodiscard]] double operator()(int t, Outcome w, double level) const { return evaluate(function(t, w), level); }

    friend bool operator==(const CostField&, const CostField&) = default;

private:
    std::vector<std::vector<CostFunction>> functions_;
};

bool is_adapted(const FilteredTree& tree, const CostField& cost);

/// Λ-measurable process with values in [-∞, ∞]; the value at ∞ is +∞.
class SignalProcess {
public:
    SignalProcess() = default;
    SignalProcess(int horizon, int outcome_count, ExtReal fill = ExtReal(0.0));

    [[nodiscard]] int horizon() const { return horizon_; }
    [[nodiscard]] int outcome_count() const { return outcomes_; }
    [[nodiscard]] ExtReal value(Instant instant, Outcome w) const;
    void set(Instant instant, Outcome w, ExtReal v);

    friend bool operator==(const SignalProcess&, const SignalProcess&) = default;

private:
    int horizon_ = 0;
    int outcomes_ = 0;
    std::vector<ExtReal> data_;
};

// --- operations -------------------------------------------------------------

/// Λ-projection on the phase grid: at-values averaged over G_t, post-values over F_t.
LadlagProcess lambda_projection(const FilteredTree& tree, const std::vector<std::vector<double>>& raw_at,
                                const std::vector<std::vector<double>>& raw_post);

/// sup of L over the closed phase window [from, to] on outcome w. Throws EmptyWindow.
ExtReal running_sup(const SignalProcess& signal, Instant from, Instant to, Outcome w);
inline ExtReal running_sup(const SignalProcess& signal, const StoppingTime& start, Instant to, Outcome w) {
    return running_sup(signal, start[w], to, w);
}

/// End of a cost window: atoms strictly before `time` are included, and the atom at
/// `time` itself too when `include_atom` is set.
struct WindowEnd {
    int time = Instant::kNever;
    bool include_atom = false;

    [[nodiscard]] Instant exclusive_bound() const {
        if (time == Instant::kNever) return Instant::never();
        return include_atom ? Instant::post(time) : Instant::at(time);
    }
};

struct CostWindow {
    std::vector<Instant> start;
    std::vector<WindowEnd> end;
};

/// Level ℓ as a function of (grid time, outcome).
using LevelPath = std::function<double(int, Outcome)>;

/// Σ_{s in window} g_s(ω, level(s, ω)) μ_s(ω) for every outcome. Throws BadWindow.
std::vector<double> integrate_cost(const FilteredTree& tree, const RandomMeasure& mu, const CostField& g,
                                   const LevelPath& level, const CostWindow& window);

struct Violation {
    Outcome outcome;
    Instant instant;
    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationCheck {
    std::string name;
    bool passed = true;
    std::vector<Violation> violations;
};

/// Terminal condition failures are hard errors; the two semicontinuity surrogates
/// are advisory.
struct ValidationReport {
    ValidationCheck terminal{"terminal", true, {}};
    ValidationCheck left_usc{"left-usc", true, {}};
    ValidationCheck right_usc{"mu-right-usc", true, {}};

    [[nodiscard]] bool hard_ok() const { return terminal.passed; }
    [[nodiscard]] bool all_passed() const { return terminal.passed && left_usc.passed && right_usc.passed; }
};

ValidationReport validate_inputs(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu,
                                 const CostField& g, double tol = 1e-12);

/// A complete input set for the representation problem.
struct Model {
    FilteredTree tree;
    LadlagProcess x;
    RandomMeasure mu;
    CostField g;
};

/// Throws InvalidInput unless shapes agree, X is Λ-measurable, μ is adapted, and g
/// is adapted with valid cost functions. X_{N+} = 0 is left to the terminal check.
void check_model(const FilteredTree& tree, const LadlagProcess& x, const RandomMeasure& mu, const CostField& g);
inline void check_model(const Model& m) { check_model(m.tree, m.x, m.mu, m.g); }

}  // namespace mrep
