#include "mrep/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mrep/errors.hpp"
#include "parallel.hpp"

namespace mrep {

namespace {

constexpr std::uint32_t kSurfaceStream = 1;
constexpr std::uint32_t kPolicyStream = 2;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... F>
struct Overloaded : F... {
    using F::operator()...;
};
template <class... F>
Overloaded(F...) -> Overloaded<F...>;

/// Seed of path `index` in substream `stream` of a Monte-Carlo run.
std::uint64_t path_seed(std::uint64_t base, std::uint32_t stream, int index) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32), stream,
                      static_cast<std::uint32_t>(index)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Neumaier-compensated running sum.
class Accumulator {
public:
    void add(double v) {
        const double t = sum_ + v;
        comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Inter-arrival times and jump sizes drawn alternately from one generator.
class JumpStream {
public:
    JumpStream(const LevyConfig& config, std::uint64_t seed)
        : rng_(seed), gap_(config.lambda), jumps_(config.jumps) {}

    double next_gap() { return gap_(rng_); }

    double next_size() {
        return std::visit(Overloaded{
                              [&](const ExponentialJumps& d) { return std::exponential_distribution<double>(1.0 / d.mean)(rng_); },
                              [&](const LogNormalJumps& d) { return std::lognormal_distribution<double>(d.mu_ln, d.sigma_ln)(rng_); },
                              [&](const TwoPointJumps& d) {
                                  return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < d.p_lo ? d.y_lo : d.y_hi;
                              },
                          },
                          jumps_);
    }

private:
    std::mt19937_64 rng_;
    std::exponential_distribution<double> gap_;
    JumpDistribution jumps_;
};

struct Summary {
    double mean = 0.0;
    double std_err = 0.0;
};

Summary summarize(const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    Accumulator sum;
    for (double v : values) sum.add(v);
    const double mean = sum.value() / n;
    Accumulator squares;
    for (double v : values) squares.add((v - mean) * (v - mean));
    const double var = values.size() > 1 ? squares.value() / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

}  // namespace

double jump_mean(const JumpDistribution& d) {
    return std::visit(Overloaded{
                          [](const ExponentialJumps& e) { return e.mean; },
                          [](const LogNormalJumps& l) { return std::exp(l.mu_ln + 0.5 * l.sigma_ln * l.sigma_ln); },
                          [](const TwoPointJumps& t) { return t.p_lo * t.y_lo + (1.0 - t.p_lo) * t.y_hi; },
                      },
                      d);
}

double jump_cdf_below(const JumpDistribution& d, double y) {
    return std::visit(Overloaded{
                          [y](const ExponentialJumps& e) { return y <= 0.0 ? 0.0 : -std::expm1(-y / e.mean); },
                          [y](const LogNormalJumps& l) {
                              if (y <= 0.0) return 0.0;
                              if (y == kInf) return 1.0;
                              return 0.5 * std::erfc(-(std::log(y) - l.mu_ln) / (l.sigma_ln * std::sqrt(2.0)));
                          },
                          [y](const TwoPointJumps& t) {
                              return (t.y_lo < y ? t.p_lo : 0.0) + (t.y_hi < y ? 1.0 - t.p_lo : 0.0);
                          },
                      },
                      d);
}

double jump_median(const JumpDistribution& d) {
    return std::visit(Overloaded{
                          [](const ExponentialJumps& e) { return e.mean * std::log(2.0); },
                          [](const LogNormalJumps& l) { return std::exp(l.mu_ln); },
                          [](const TwoPointJumps& t) { return t.p_lo >= 0.5 ? t.y_lo : t.y_hi; },
                      },
                      d);
}

std::string to_string(const JumpDistribution& d) {
    return std::visit(Overloaded{
                          [](const ExponentialJumps& e) { return "exponential(" + std::to_string(e.mean) + ")"; },
                          [](const LogNormalJumps& l) {
                              return "lognormal(" + std::to_string(l.mu_ln) + ", " + std::to_string(l.sigma_ln) + ")";
                          },
                          [](const TwoPointJumps& t) {
                              return "two_point(" + std::to_string(t.y_lo) + ", " + std::to_string(t.y_hi) + ", " +
                                     std::to_string(t.p_lo) + ")";
                          },
                      },
                      d);
}

double LevyConfig::p_eta() const { return jump_cdf_below(jumps, eta); }

void check_config(const LevyConfig& c) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::BadConfig, what); };
    if (!(c.lambda > 0.0) || !std::isfinite(c.lambda)) fail("lambda must be positive");
    if (!(c.r > 0.0) || !std::isfinite(c.r)) fail("r must be positive");
    if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) fail("horizon must be positive");
    if (!std::isfinite(c.p_tilde)) fail("p_tilde must be finite");
    if (!std::isfinite(c.phi)) fail("phi must be finite");
    if (std::isnan(c.eta) || c.eta < 0.0) fail("eta must lie in [0, inf]");
    if (c.m_override && !std::isfinite(*c.m_override)) fail("m must be finite");
    std::visit(Overloaded{
                   [&](const ExponentialJumps& e) {
                       if (!(e.mean > 0.0) || !std::isfinite(e.mean)) fail("exponential mean must be positive");
                   },
                   [&](const LogNormalJumps& l) {
                       if (!std::isfinite(l.mu_ln) || !(l.sigma_ln > 0.0) || !std::isfinite(l.sigma_ln))
                           fail("lognormal parameters must be finite with sigma > 0");
                   },
                   [&](const TwoPointJumps& t) {
                       if (!(t.y_lo > 0.0) || !(t.y_hi >= t.y_lo) || !std::isfinite(t.y_hi))
                           fail("two-point sizes must satisfy 0 < y_lo <= y_hi");
                       if (!(t.p_lo >= 0.0 && t.p_lo <= 1.0)) fail("p_lo must lie in [0, 1]");
                   },
               },
               c.jumps);
}

int PathSample::count_at(double t) const {
    return static_cast<int>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

double PathSample::level_at(double t) const { return level_after(count_at(t)); }

double PathSample::level_after(int k) const {
    Accumulator sum;
    sum.add(p_tilde);
    for (int i = 0; i < k; ++i) sum.add(sizes[static_cast<std::size_t>(i)]);
    return sum.value();
}

PathSample simulate_path(const LevyConfig& config, std::uint64_t seed) {
    check_config(config);
    PathSample path;
    path.p_tilde = config.p_tilde;
    path.horizon = config.horizon;
    path.seed = seed;
    JumpStream stream(config, seed);
    double t = 0.0;
    for (;;) {
        t += stream.next_gap();
        if (t > config.horizon) break;
        path.times.push_back(t);
        path.sizes.push_back(stream.next_size());
    }
    return path;
}

std::vector<double> sensor_path(const PathSample& path, double eta) {
    std::vector<double> out;
    double level = path.p_tilde;
    for (double y : path.sizes) {
        out.push_back(y >= eta ? level + y : level);
        level += y;
    }
    return out;
}

TGamma stopping_T_gamma(const PathSample& path, double gamma, double eta) {
    double sum = 0.0;
    for (std::size_t k = 0; k < path.sizes.size(); ++k) {
        sum += path.sizes[k];
        if (path.sizes[k] >= eta || sum >= gamma) return {path.times[k], static_cast<int>(k) + 1, false};
    }
    return {path.horizon, static_cast<int>(path.sizes.size()), true};
}

FEtaSurface::FEtaSurface(const LevyConfig& config, double gamma_max, const MonteCarlo& mc)
    : config_(config), gamma_max_(gamma_max), paths_(mc.paths) {
    check_config(config);
    if (!(gamma_max >= 0.0) || !std::isfinite(gamma_max)) throw Error(ErrorCode::BadConfig, "gamma must be finite and >= 0");
    if (mc.paths < 100) throw Error(ErrorCode::BadConfig, "at least 100 paths are required");

    struct PathSteps {
        std::vector<double> positions;  // partial sums after which the next value applies
        std::vector<Moments> values;    // one more entry than positions
    };
    auto moments = [](double a, double b, double d, bool censored) {
        return Moments{a, b, d, a * a, b * b, d * d, a * b, a * d, b * d, censored ? 1.0 : 0.0};
    };
    std::vector<PathSteps> steps(static_cast<std::size_t>(paths_));
    detail::parallel_for(paths_, mc.workers, [&](int i) {
        auto& s = steps[static_cast<std::size_t>(i)];
        JumpStream stream(config_, path_seed(mc.seed, kSurfaceStream, i));
        double t = 0.0, sum = 0.0;
        for (;;) {
            t += stream.next_gap();
            if (t > config_.horizon) {
                const double a = std::exp(-config_.r * config_.horizon);
                if (!s.values.empty()) s.positions.push_back(sum);
                s.values.push_back(moments(a, a * sum, 0.0, true));
                break;
            }
            const double y = stream.next_size();
            sum += y;
            const double a = std::exp(-config_.r * t);
            const bool large = y >= config_.eta;
            if (!s.values.empty()) s.positions.push_back(sum - y);
            s.values.push_back(moments(a, a * sum, large ? a : 0.0, false));
            if (large || sum >= gamma_max_) break;
        }
    });

    struct Event {
        double position;
        int path;
        int step;
    };
    std::vector<Event> events;
    Moments base{};
    for (int i = 0; i < paths_; ++i) {
        const auto& s = steps[static_cast<std::size_t>(i)];
        for (int k = 0; k < kMoments; ++k) base[k] += s.values.front()[k];
        for (std::size_t j = 0; j < s.positions.size(); ++j) events.push_back({s.positions[j], i, static_cast<int>(j) + 1});
    }
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.position < b.position; });

    positions_.reserve(events.size());
    totals_.reserve(events.size() + 1);
    std::array<long double, kMoments> running{};
    for (int k = 0; k < kMoments; ++k) running[k] = base[k];
    auto snapshot = [&] {
        Moments m{};
        for (int k = 0; k < kMoments; ++k) m[k] = static_cast<double>(running[k]);
        totals_.push_back(m);
    };
    snapshot();
    for (const auto& e : events) {
        const auto& values = steps[static_cast<std::size_t>(e.path)].values;
        for (int k = 0; k < kMoments; ++k)
            running[k] += static_cast<long double>(values[e.step][k]) - values[e.step - 1][k];
        positions_.push_back(e.position);
        snapshot();
    }
}

FEtaEstimate FEtaSurface::evaluate(double gamma, double z) const {
    if (!(gamma >= 0.0) || gamma > gamma_max_) throw Error(ErrorCode::BadConfig, "gamma outside the simulated range");
    const auto index = static_cast<std::size_t>(std::lower_bound(positions_.begin(), positions_.end(), gamma) - positions_.begin());
    const Moments& m = totals_[index];
    const double n = paths_;
    const double a = m[0] / n, b = m[1] / n, d = m[2] / n;
    const double kappa = config_.lambda / config_.r;
    const double numerator = (1.0 - a) * z - b;
    const double denominator = 1.0 + kappa * (1.0 - a) - d;
    const double f = numerator / denominator;

    // h_i = numerator_i − f·denominator_i is affine in (a_i, b_i, d_i) with these coefficients.
    const std::array<double, 3> c{-z + f * kappa, -1.0, f};
    const std::array<double, 3> mean{a, b, d};
    const double second[3][3] = {{m[3] / n, m[6] / n, m[7] / n}, {m[6] / n, m[4] / n, m[8] / n}, {m[7] / n, m[8] / n, m[5] / n}};
    double var = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) var += c[i] * c[j] * (second[i][j] - mean[i] * mean[j]);
    var = std::max(0.0, var) * n / (n - 1.0);
    return {gamma, z, f, std::sqrt(var / n) / std::abs(denominator), paths_, m[9] / n};
}

FEtaEstimate f_eta(double gamma, double z, const LevyConfig& config, const MonteCarlo& mc) {
    return FEtaSurface(config, gamma, mc).evaluate(gamma, z);
}

double f_eta_gamma_zero(const LevyConfig& config, double z) {
    const double a = config.lambda / (config.lambda + config.r);
    const double b = a * jump_mean(config.jumps);
    const double d = a * (1.0 - config.p_eta());
    return ((1.0 - a) * z - b) / (1.0 + config.lambda / config.r * (1.0 - a) - d);
}

LevySignal::LevySignal(const LevyConfig& config, const SignalOptions& options) : config_(config), options_(options) {
    check_config(config_);
    const double p = config_.p_eta();
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorCode::DegenerateSensor, "p(eta) = " + std::to_string(p) + " lies outside (0, 1)");
    if (options_.grid_points < 2) throw Error(ErrorCode::BadConfig, "grid needs at least 2 points");
    if (!(options_.tol > 0.0)) throw Error(ErrorCode::BadConfig, "golden-section tolerance must be positive");
    if (config_.p_tilde < config_.b()) surface_.emplace(config_, domain_end(config_.p_tilde), options_.mc);
}

double LevySignal::domain_end(double z) const {
    const double shrink = 1.0 - config_.lambda / (1.0 + config_.lambda) * config_.p_eta();
    return std::max(0.0, shrink * (config_.b() - z) - 1e-9);
}

SignalValue LevySignal::operator()(const SensorState& state) const {
    const double z = state.z;
    const double b = config_.b();
    const double slope = config_.r / config_.lambda;
    if (z >= b) return state.large_jump ? SignalValue{0.0, 0.0, 1, 0.0} : SignalValue{slope * (z - b), 0.0, 2, 0.0};
    if (!state.large_jump) return {slope * (z - b) / config_.p_eta(), 0.0, 4, 0.0};
    if (surface_ && z >= config_.p_tilde) return regime_three(z, *surface_);
    return regime_three(z, FEtaSurface(config_, domain_end(z), options_.mc));
}

SignalValue LevySignal::regime_three(double z, const FEtaSurface& surface) const {
    const double hi = domain_end(z);
    const int points = options_.grid_points;
    auto grid = [&](int i) { return std::min(hi, hi * i / (points - 1)); };
    FEtaEstimate best = surface.evaluate(0.0, z);
    int best_index = 0;
    for (int i = 1; i < points; ++i) {
        const auto e = surface.evaluate(grid(i), z);
        if (e.value < best.value) {
            best = e;
            best_index = i;
        }
    }
    double lo_g = grid(std::max(0, best_index - 1));
    double hi_g = grid(std::min(points - 1, best_index + 1));
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi_g - ratio * (hi_g - lo_g), x2 = lo_g + ratio * (hi_g - lo_g);
    auto e1 = surface.evaluate(x1, z), e2 = surface.evaluate(x2, z);
    while (hi_g - lo_g > options_.tol * (1.0 + hi)) {
        if (e1.value <= e2.value) {
            hi_g = x2;
            x2 = x1;
            e2 = e1;
            x1 = hi_g - ratio * (hi_g - lo_g);
            e1 = surface.evaluate(x1, z);
        } else {
            lo_g = x1;
            x1 = x2;
            e1 = e2;
            x2 = lo_g + ratio * (hi_g - lo_g);
            e2 = surface.evaluate(x2, z);
        }
        if (e1.value < best.value) best = e1;
        if (e2.value < best.value) best = e2;
    }
    return {best.value, best.std_err, 3, best.gamma};
}

std::vector<ControlPoint> control_path(const LevyConfig& config, const PathSample& path, const TargetFunction& target) {
    std::vector<ControlPoint> out;
    out.reserve(2 * path.times.size() + 1);
    double control = config.phi;
    auto push = [&](double t, bool post, double price, SensorState state) {
        const double signal = target(state);
        control = std::max(control, signal);
        out.push_back({t, post, price, state.z, signal, control});
    };
    push(0.0, false, path.p_tilde, {path.p_tilde, false});
    Accumulator level;
    level.add(path.p_tilde);
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        const double before = level.value();
        const double y = path.sizes[k];
        level.add(y);
        const double after = level.value();
        const bool large = y >= config.eta;
        push(path.times[k], false, after, {large ? after : before, large});
        push(path.times[k], true, after, {after, false});
    }
    return out;
}

std::vector<ControlPoint> control_path(const LevyConfig& config, const PathSample& path, const LevySignal& signal) {
    return control_path(config, path, [&signal](const SensorState& s) { return signal(s).value; });
}

double reward(const LevyConfig& config, const std::vector<ControlPoint>& control, const PathSample& /*path*/) {
    Accumulator total;
    double previous = config.phi;
    for (std::size_t i = 0; i < control.size(); ++i) {
        const auto& p = control[i];
        if (p.control < previous) throw Error(ErrorCode::NonMonotoneControl, "control decreases at t = " + std::to_string(p.t));
        const double discount = std::exp(-config.r * p.t);
        total.add(discount * p.p_tilde * (p.control - previous));
        if (!p.post && i > 0) total.add(-discount * 0.5 * p.control * p.control);
        previous = p.control;
    }
    return total.value();
}

std::vector<PolicyResult> compare_policies(const LevyConfig& config, const std::vector<Policy>& policies,
                                           const MonteCarlo& mc) {
    check_config(config);
    if (policies.empty()) throw Error(ErrorCode::BadConfig, "no policies to compare");
    if (mc.paths < 2) throw Error(ErrorCode::BadConfig, "at least 2 paths are required");
    const std::size_t count = policies.size();
    std::vector<std::vector<double>> rewards(count, std::vector<double>(static_cast<std::size_t>(mc.paths)));
    detail::parallel_for(mc.paths, mc.workers, [&](int i) {
        const auto path = simulate_path(config, path_seed(mc.seed, kPolicyStream, i));
        for (std::size_t p = 0; p < count; ++p)
            rewards[p][static_cast<std::size_t>(i)] = reward(config, control_path(config, path, policies[p].target), path);
    });
    std::vector<PolicyResult> out;
    for (std::size_t p = 0; p < count; ++p) {
        const auto own = summarize(rewards[p]);
        std::vector<double> diff(rewards[p].size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = rewards[p][i] - rewards[0][i];
        const auto paired = summarize(diff);
        out.push_back({policies[p].name, own.mean, own.std_err, paired.mean, paired.std_err, mc.paths});
    }
    return out;
}

std::vector<double> default_threshold_levels(const LevyConfig& config, int count) {
    const double best = std::max(config.phi, config.p_tilde * config.r / config.lambda /
                                                 -std::expm1(-config.r * config.horizon));
    const double top = best > 0.0 ? 2.0 * best : 1.0;
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(count == 1 ? top / 2.0 : top * i / (count - 1));
    return out;
}

std::vector<Policy> threshold_policies(const LevySignal& signal, const std::vector<double>& levels) {
    std::vector<Policy> out;
    out.push_back({"C_Lambda", [&signal](const SensorState& s) { return signal(s).value; }});
    for (double c : levels) {
        std::string name = "constant_" + std::to_string(c);
        out.push_back({std::move(name), [c](const SensorState&) { return c; }});
    }
    return out;
}

}  // namespace mrep
