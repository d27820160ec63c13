#include "mrep/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace mrep {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
    throw Error(ErrorCode::ParseError, "field " + pointer + ": " + what);
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto end = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
        const auto last = text.substr(0, end).rfind('\n');
        const auto column = last == std::string_view::npos ? end : end - last - 1;
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                               ": " + e.what());
    }
}

/// Typed access by JSON pointer with located errors.
template <typename T>
T get(const json& doc, const std::string& pointer) {
    const json::json_pointer ptr(pointer);
    if (!doc.contains(ptr)) fail(pointer, "missing");
    try {
        return doc.at(ptr).get<T>();
    } catch (const json::exception& e) {
        fail(pointer, e.what());
    }
}

template <typename T>
T get_or(const json& doc, const std::string& pointer, T fallback) {
    return doc.contains(json::json_pointer(pointer)) ? get<T>(doc, pointer) : fallback;
}

double get_number(const json& doc, const std::string& pointer) {
    const json::json_pointer ptr(pointer);
    if (!doc.contains(ptr)) fail(pointer, "missing");
    const json& v = doc.at(ptr);
    if (v.is_number()) return v.get<double>();
    if (v == "inf") return std::numeric_limits<double>::infinity();
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    fail(pointer, "expected a number");
}

json number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

CostFunction parse_cost(const json& doc, const std::string& pointer) {
    const auto family = get<std::string>(doc, pointer + "/family");
    if (family == "linear")
        return LinearCost{get_or(doc, pointer + "/slope", 1.0), get_or(doc, pointer + "/intercept", 0.0)};
    if (family == "cubic")
        return CubicOddCost{get_or(doc, pointer + "/cubic", 1.0), get_or(doc, pointer + "/linear", 0.0)};
    if (family == "piecewise")
        return PiecewiseLinearCost{get<std::vector<double>>(doc, pointer + "/levels"),
                                   get<std::vector<double>>(doc, pointer + "/values")};
    fail(pointer + "/family", "unknown cost family '" + family + "'");
}

json emit_cost(const CostFunction& g) {
    if (const auto* c = std::get_if<LinearCost>(&g)) return {{"family", "linear"}, {"slope", c->slope}, {"intercept", c->intercept}};
    if (const auto* c = std::get_if<CubicOddCost>(&g)) return {{"family", "cubic"}, {"cubic", c->cubic}, {"linear", c->linear}};
    if (const auto* c = std::get_if<PiecewiseLinearCost>(&g))
        return {{"family", "piecewise"}, {"levels", c->levels}, {"values", c->values}};
    throw Error(ErrorCode::InvalidInput, "custom cost '" + std::get<CustomCost>(g).name + "' cannot be written to a scenario");
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "line 1: scenario must be a JSON object");
    Scenario s;
    s.probs = get<std::vector<double>>(doc, "/space/probs");
    s.horizon = get<int>(doc, "/space/horizon");
    if (s.horizon < 0) fail("/space/horizon", "must be >= 0");
    const int n = static_cast<int>(s.probs.size());
    s.filtration = get<decltype(s.filtration)>(doc, "/filtration");
    s.meyer = get<decltype(s.meyer)>(doc, "/meyer");
    s.x_at = get<std::vector<std::vector<double>>>(doc, "/process_x/at");
    s.x_post = get<std::vector<std::vector<double>>>(doc, "/process_x/post");
    s.mu = get<std::vector<std::vector<double>>>(doc, "/measure_mu");

    const auto rows = static_cast<std::size_t>(s.horizon + 1);
    auto check_matrix = [&](const std::vector<std::vector<double>>& m, const std::string& pointer) {
        if (m.size() != rows) fail(pointer, "expected " + std::to_string(rows) + " rows");
        for (std::size_t t = 0; t < rows; ++t)
            if (m[t].size() != static_cast<std::size_t>(n))
                fail(pointer + "/" + std::to_string(t), "expected " + std::to_string(n) + " entries");
    };
    check_matrix(s.x_at, "/process_x/at");
    check_matrix(s.x_post, "/process_x/post");
    check_matrix(s.mu, "/measure_mu");

    if (doc.contains(json::json_pointer("/cost/per_entry"))) {
        std::vector<std::vector<CostFunction>> functions(rows);
        for (std::size_t t = 0; t < rows; ++t)
            for (int w = 0; w < n; ++w)
                functions[t].push_back(parse_cost(doc, "/cost/per_entry/" + std::to_string(t) + "/" + std::to_string(w)));
        s.cost = CostField(std::move(functions));
    } else {
        s.cost = CostField(s.horizon, n, parse_cost(doc, "/cost/shared"));
    }

    s.options.tol_ell = get_or(doc, "/options/tol_ell", s.options.tol_ell);
    s.options.tol_eq = get_or(doc, "/options/tol_eq", s.options.tol_eq);
    s.options.cap = get_or(doc, "/options/cap", s.options.cap);
    s.options.seed = get_or(doc, "/options/seed", s.options.seed);
    s.options.workers = get_or(doc, "/options/workers", s.options.workers);
    s.options.samples = get_or(doc, "/options/samples", s.options.samples);
    return s;
}

std::string emit_scenario(const Scenario& s) {
    json doc;
    doc["space"] = {{"probs", s.probs}, {"horizon", s.horizon}};
    doc["filtration"] = s.filtration;
    doc["meyer"] = s.meyer;
    doc["process_x"] = {{"at", s.x_at}, {"post", s.x_post}};
    doc["measure_mu"] = s.mu;
    const auto& first = s.cost.function(0, 0);
    bool shared = true;
    for (int t = 0; t <= s.cost.horizon(); ++t)
        for (int w = 0; w < s.cost.outcome_count(); ++w) shared = shared && s.cost.function(t, w) == first;
    if (shared) {
        doc["cost"]["shared"] = emit_cost(first);
    } else {
        json rows = json::array();
        for (int t = 0; t <= s.cost.horizon(); ++t) {
            json row = json::array();
            for (int w = 0; w < s.cost.outcome_count(); ++w) row.push_back(emit_cost(s.cost.function(t, w)));
            rows.push_back(row);
        }
        doc["cost"]["per_entry"] = rows;
    }
    doc["options"] = {{"tol_ell", s.options.tol_ell}, {"tol_eq", s.options.tol_eq}, {"cap", s.options.cap},
                      {"seed", s.options.seed},       {"workers", s.options.workers}, {"samples", s.options.samples}};
    return doc.dump(2) + "\n";
}

Model build_model(const Scenario& s) {
    FilteredTree tree = make_tree(s.probs, s.filtration, s.meyer);
    Model m{std::move(tree), LadlagProcess(s.x_at, s.x_post), RandomMeasure(s.mu), s.cost};
    check_model(m);
    return m;
}

Scenario scenario_from_model(const Model& m, const ScenarioOptions& options) {
    Scenario s;
    const int n = m.tree.outcome_count();
    const int N = m.tree.horizon();
    s.probs = m.tree.probs();
    s.horizon = N;
    for (int t = 0; t <= N; ++t) {
        s.filtration.push_back(m.tree.filtration(t).cells());
        s.meyer.push_back(m.tree.meyer(t).cells());
        std::vector<double> at, post, mu;
        for (int w = 0; w < n; ++w) {
            at.push_back(m.x.at(t, w));
            post.push_back(m.x.post(t, w));
            mu.push_back(m.mu.weight(t, w));
        }
        s.x_at.push_back(std::move(at));
        s.x_post.push_back(std::move(post));
        s.mu.push_back(std::move(mu));
    }
    s.cost = m.g;
    s.options = options;
    return s;
}

LevyScenario parse_levy_scenario(std::string_view text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "line 1: Lévy scenario must be a JSON object");
    LevyScenario s;
    auto& c = s.config;
    c.p_tilde = get<double>(doc, "/p_tilde");
    c.lambda = get<double>(doc, "/lambda");
    c.r = get<double>(doc, "/r");
    const auto family = get<std::string>(doc, "/jumps/family");
    if (family == "exponential") c.jumps = ExponentialJumps{get<double>(doc, "/jumps/mean")};
    else if (family == "lognormal") c.jumps = LogNormalJumps{get<double>(doc, "/jumps/mu_ln"), get<double>(doc, "/jumps/sigma_ln")};
    else if (family == "two_point")
        c.jumps = TwoPointJumps{get<double>(doc, "/jumps/y_lo"), get<double>(doc, "/jumps/y_hi"), get<double>(doc, "/jumps/p_lo")};
    else fail("/jumps/family", "unknown jump family '" + family + "'");
    if (doc.contains("eta") && doc["eta"] == "median") c.eta = jump_median(c.jumps);
    else c.eta = get_number(doc, "/eta");
    c.phi = get_or(doc, "/phi", 0.0);
    c.horizon = get<double>(doc, "/horizon");
    if (doc.contains("m")) c.m_override = get<double>(doc, "/m");

    s.mc.paths = get_or(doc, "/mc/paths", s.mc.paths);
    s.mc.seed = get_or(doc, "/mc/seed", s.mc.seed);
    s.mc.workers = get_or(doc, "/mc/workers", s.mc.workers);
    s.signal.grid_points = get_or(doc, "/opt/grid", s.signal.grid_points);
    s.signal.tol = get_or(doc, "/opt/tol", s.signal.tol);
    s.signal.mc.paths = get_or(doc, "/opt/paths", s.signal.mc.paths);
    s.signal.mc.seed = get_or(doc, "/opt/seed", s.signal.mc.seed);
    s.signal.mc.workers = s.mc.workers;
    s.levels = get_or(doc, "/compare/levels", s.levels);
    s.z_min = get_or(doc, "/signal_grid/z_min", s.z_min);
    s.z_max = get_or(doc, "/signal_grid/z_max", s.z_max);
    s.z_points = get_or(doc, "/signal_grid/points", s.z_points);
    try {
        check_config(c);
    } catch (const Error& e) {
        throw Error(ErrorCode::BadConfig, e.what());
    }
    return s;
}

std::string emit_levy_scenario(const LevyScenario& s) {
    json doc;
    const auto& c = s.config;
    doc["p_tilde"] = c.p_tilde;
    doc["lambda"] = c.lambda;
    doc["r"] = c.r;
    if (const auto* e = std::get_if<ExponentialJumps>(&c.jumps)) doc["jumps"] = {{"family", "exponential"}, {"mean", e->mean}};
    else if (const auto* l = std::get_if<LogNormalJumps>(&c.jumps))
        doc["jumps"] = {{"family", "lognormal"}, {"mu_ln", l->mu_ln}, {"sigma_ln", l->sigma_ln}};
    else {
        const auto& t = std::get<TwoPointJumps>(c.jumps);
        doc["jumps"] = {{"family", "two_point"}, {"y_lo", t.y_lo}, {"y_hi", t.y_hi}, {"p_lo", t.p_lo}};
    }
    doc["eta"] = number(c.eta);
    doc["phi"] = c.phi;
    doc["horizon"] = c.horizon;
    if (c.m_override) doc["m"] = *c.m_override;
    doc["mc"] = {{"paths", s.mc.paths}, {"seed", s.mc.seed}, {"workers", s.mc.workers}};
    doc["opt"] = {{"grid", s.signal.grid_points}, {"tol", s.signal.tol}, {"paths", s.signal.mc.paths}, {"seed", s.signal.mc.seed}};
    if (!s.levels.empty()) doc["compare"]["levels"] = s.levels;
    doc["signal_grid"] = {{"z_min", s.z_min}, {"z_max", s.z_max}, {"points", s.z_points}};
    return doc.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace mrep
