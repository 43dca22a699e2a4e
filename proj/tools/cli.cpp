#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "riskgen/chernoff.hpp"
#include "riskgen/conjugate.hpp"
#include "riskgen/errors.hpp"
#include "riskgen/genlab.hpp"
#include "riskgen/oracles.hpp"
#include "riskgen/suite.hpp"

namespace riskgen::cli {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

// bumped whenever a module's numerical output changes
const std::map<std::string, std::string> kModuleVersions{
    {"conjugate", "1.0.0"}, {"measures", "1.0.0"}, {"reference", "1.0.0"}, {"onestep", "1.0.0"},
    {"genlab", "1.0.0"},    {"chernoff", "1.0.0"}, {"oracles", "1.0.0"},   {"cli", "1.0.0"},
};

// ---- schema helpers

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
    throw ValidationError("config." + path + ": " + msg);
}

std::string sub(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) bad(path.empty() ? "(root)" : path, "must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) bad(sub(path, it.key()), "unknown key");
    }
}

const json& need(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) bad(sub(path, key), "required");
    return j.at(key);
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) bad(path, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad(path, "must be finite");
    return x;
}

double number_at(const json& j, const std::string& path, const char* key) {
    return number(need(j, path, key), sub(path, key));
}

double number_or(const json& j, const std::string& path, const char* key, double def) {
    return j.contains(key) ? number(j.at(key), sub(path, key)) : def;
}

double positive_at(const json& j, const std::string& path, const char* key, std::optional<double> def = {}) {
    const double x = (def && !j.contains(key)) ? *def : number_at(j, path, key);
    if (!(x > 0.0)) bad(sub(path, key), "must be positive");
    return x;
}

std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) bad(path, "must be an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

std::string text_at(const json& j, const std::string& path, const char* key) {
    const auto& v = need(j, path, key);
    if (!v.is_string()) bad(sub(path, key), "must be a string");
    return v.get<std::string>();
}

std::int64_t integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) bad(path, "must be an integer");
    return v.get<std::int64_t>();
}

bool boolean_or(const json& j, const std::string& path, const char* key, bool def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_boolean()) bad(sub(path, key), "must be a boolean");
    return j.at(key).get<bool>();
}

// rethrows library validation messages under the config path
template <typename F>
auto guarded(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        bad(path, e.what());
    } catch (const DomainError& e) {
        bad(path, e.what());
    }
}

// ---- sections

DiscreteMeasure measure(const json& j, const std::string& path) {
    allow_keys(j, path, {"points", "weights"});
    auto p = numbers(need(j, path, "points"), sub(path, "points"));
    auto w = numbers(need(j, path, "weights"), sub(path, "weights"));
    if (p.size() != w.size() || p.empty()) bad(path, "points and weights must be nonempty and of equal length");
    return guarded(path, [&] { return DiscreteMeasure::from_atoms(p, w); });
}

CostTail tail(const json& j, const std::string& path) {
    allow_keys(j, path, {"infinite", "curvature"});
    CostTail t;
    t.infinite = boolean_or(j, path, "infinite", false);
    t.curvature = number_or(j, path, "curvature", 1.0);
    return t;
}

CostFunction cost(const json& j, const std::string& path) {
    const std::string type = j.is_object() ? text_at(j, path, "type") : "";
    CostFunction c = CostFunction::quadratic(1.0);
    if (type == "quadratic") {
        allow_keys(j, path, {"type", "gamma"});
        c = CostFunction::quadratic(positive_at(j, path, "gamma"));
    } else if (type == "power") {
        allow_keys(j, path, {"type", "p", "scale"});
        c = CostFunction::power(positive_at(j, path, "p"), positive_at(j, path, "scale", 1.0));
    } else if (type == "piecewise_linear") {
        allow_keys(j, path, {"type", "knots", "tail"});
        const auto& k = need(j, path, "knots");
        if (!k.is_array()) bad(sub(path, "knots"), "must be an array of [v, c] pairs");
        std::vector<std::pair<double, double>> knots;
        for (std::size_t i = 0; i < k.size(); ++i) {
            const auto pair = numbers(k[i], sub(path, "knots") + "[" + std::to_string(i) + "]");
            if (pair.size() != 2) bad(sub(path, "knots") + "[" + std::to_string(i) + "]", "must be a [v, c] pair");
            knots.emplace_back(pair[0], pair[1]);
        }
        const CostTail t = j.contains("tail") ? tail(j.at("tail"), sub(path, "tail")) : CostTail{};
        c = guarded(path, [&] { return CostFunction::piecewise_linear(knots, t); });
    } else if (type == "tabulated") {
        allow_keys(j, path, {"type", "dv", "values", "tail"});
        const double dv = positive_at(j, path, "dv");
        const auto vals = numbers(need(j, path, "values"), sub(path, "values"));
        const CostTail t = j.contains("tail") ? tail(j.at("tail"), sub(path, "tail")) : CostTail{};
        c = guarded(path, [&] { return CostFunction::tabulated(dv, vals, t); });
    } else {
        bad(sub(path, "type"), "must be one of quadratic, power, piecewise_linear, tabulated");
    }
    guarded(path, [&] {
        c.validate();
        return 0;
    });
    return c;
}

PenaltySpec penalty(const json& j, const std::string& path) {
    allow_keys(j, path, {"kind", "phi", "p", "h0"});
    const std::string kind = text_at(j, path, "kind");
    const auto phi = cost(need(j, path, "phi"), sub(path, "phi"));
    const double h0 = positive_at(j, path, "h0", 1.0);
    PenaltySpec s;
    if (kind == "ot") {
        if (j.contains("p")) bad(sub(path, "p"), "not used by kind ot");
        s = PenaltySpec::ot(phi, h0);
    } else if (kind == "wasserstein") {
        s = PenaltySpec::wasserstein(positive_at(j, path, "p"), phi, h0);
    } else if (kind == "mart_wasserstein") {
        s = PenaltySpec::mart_wasserstein(positive_at(j, path, "p"), phi, h0);
    } else if (kind == "mart_ot") {
        if (j.contains("p")) bad(sub(path, "p"), "not used by kind mart_ot");
        s = PenaltySpec::mart_ot(phi, h0);
    } else {
        bad(sub(path, "kind"), "must be one of ot, wasserstein, mart_wasserstein, mart_ot");
    }
    const auto v = s.basic_violations();
    if (!v.empty()) bad(path, v.front());
    return s;
}

Grid grid(const json& j, const std::string& path) {
    allow_keys(j, path, {"xmin", "xmax", "dx"});
    const double lo = number_at(j, path, "xmin"), hi = number_at(j, path, "xmax");
    const double dx = number_at(j, path, "dx");
    if (!(dx > 0.0)) bad(sub(path, "dx"), "must be positive");
    if (!(hi > lo)) bad(sub(path, "xmax"), "must exceed xmin");
    if ((hi - lo) / dx > 5e6) bad(sub(path, "dx"), "more than 5e6 grid nodes");
    return guarded(path, [&] { return Grid(lo, hi, dx); });
}

ReferenceModel model(const json& j, const std::string& path, const std::optional<Grid>& g) {
    allow_keys(j, path, {"increments", "drift", "psi", "truncation"});
    ReferenceModel m;
    const std::string ip = sub(path, "increments");
    const auto& inc = need(j, path, "increments");
    const std::string type = inc.is_object() ? text_at(inc, ip, "type") : "";
    if (type == "gaussian") {
        allow_keys(inc, ip, {"type", "s0"});
        m.increments = GaussianIncrements{positive_at(inc, ip, "s0")};
    } else if (type == "compound_poisson") {
        allow_keys(inc, ip, {"type", "rate", "jumps"});
        m.increments = CompoundPoissonIncrements{positive_at(inc, ip, "rate"),
                                                 measure(need(inc, ip, "jumps"), sub(ip, "jumps"))};
    } else if (type == "scaled_fixed") {
        allow_keys(inc, ip, {"type", "points", "weights"});
        m.increments = ScaledFixedIncrements{measure(inc, ip)};
    } else {
        bad(sub(ip, "type"), "must be one of gaussian, compound_poisson, scaled_fixed");
    }
    if (j.contains("drift")) {
        const std::string dp = sub(path, "drift");
        const auto& d = j.at("drift");
        const std::string dt = d.is_object() ? text_at(d, dp, "type") : "";
        if (dt == "zero") {
            allow_keys(d, dp, {"type"});
        } else if (dt == "linear") {
            allow_keys(d, dp, {"type", "slope"});
            m.drift = Drift::linear(number_at(d, dp, "slope"));
        } else if (dt == "tabulated") {
            allow_keys(d, dp, {"type", "values"});
            if (!g) bad(dp, "tabulated drift needs the grid section");
            const auto vals = numbers(need(d, dp, "values"), sub(dp, "values"));
            if (vals.size() != g->n) bad(sub(dp, "values"), "must have one value per grid node");
            m.drift = Drift::tabulated(GridFunction(*g, vals));
        } else {
            bad(sub(dp, "type"), "must be one of zero, linear, tabulated");
        }
    }
    if (j.contains("psi")) {
        const std::string ps = text_at(j, path, "psi");
        if (ps == "identity")
            m.psi = PsiScheme::identity;
        else if (ps == "euler")
            m.psi = PsiScheme::euler;
        else
            bad(sub(path, "psi"), "must be identity or euler");
    }
    if (j.contains("truncation")) {
        const std::string tp = sub(path, "truncation");
        const auto& t = j.at("truncation");
        allow_keys(t, tp, {"half_width", "relative_step"});
        m.truncation.half_width = positive_at(t, tp, "half_width", 6.0);
        m.truncation.relative_step = positive_at(t, tp, "relative_step", 0.02);
    }
    guarded(path, [&] {
        m.validate();
        return 0;
    });
    return m;
}

TestFunction test_function(const json& j, const std::string& path, const std::optional<Grid>& g) {
    const std::string type = j.is_object() ? text_at(j, path, "type") : "";
    if (type == "sine") {
        allow_keys(j, path, {"type", "frequency", "amplitude"});
        return TestFunction::sine(number_at(j, path, "frequency"), number_or(j, path, "amplitude", 1.0));
    }
    if (type == "bump") {
        allow_keys(j, path, {"type", "center", "width", "height"});
        return TestFunction::bump(number_at(j, path, "center"), positive_at(j, path, "width"),
                                  number_at(j, path, "height"));
    }
    if (type == "abs_clipped") {
        allow_keys(j, path, {"type", "clip"});
        return TestFunction::abs_clipped(positive_at(j, path, "clip"));
    }
    if (type == "tabulated") {
        allow_keys(j, path, {"type", "values"});
        if (!g) bad(path, "tabulated test function needs the grid section");
        const auto vals = numbers(need(j, path, "values"), sub(path, "values"));
        if (vals.size() != g->n) bad(sub(path, "values"), "must have one value per grid node");
        return TestFunction::tabulated(g->xmin, g->dx, vals);
    }
    bad(sub(path, "type"), "must be one of sine, bump, abs_clipped, tabulated");
}

OracleConfig oracle(const json& j, const std::string& path) {
    allow_keys(j, path, {"type", "hamiltonian", "scan_points", "paths", "steps", "points", "controls"});
    OracleConfig o;
    o.type = text_at(j, path, "type");
    if (o.type != "hjb" && o.type != "entropic" && o.type != "variance_scan" && o.type != "monte_carlo")
        bad(sub(path, "type"), "must be one of hjb, entropic, variance_scan, monte_carlo");
    if (j.contains("hamiltonian")) {
        const std::string hp = sub(path, "hamiltonian");
        const auto& h = j.at("hamiltonian");
        allow_keys(h, hp, {"lo", "hi", "points"});
        o.hamiltonian_lo = number_at(h, hp, "lo");
        o.hamiltonian_hi = number_at(h, hp, "hi");
        if (!(*o.hamiltonian_hi > *o.hamiltonian_lo)) bad(sub(hp, "hi"), "must exceed lo");
        if (h.contains("points")) {
            const auto n = integer(h.at("points"), sub(hp, "points"));
            if (n < 3) bad(sub(hp, "points"), "must be at least 3");
            o.hamiltonian_points = static_cast<std::size_t>(n);
        }
    }
    if (j.contains("scan_points")) {
        o.scan_points = static_cast<int>(integer(j.at("scan_points"), sub(path, "scan_points")));
        if (o.scan_points < 2) bad(sub(path, "scan_points"), "must be at least 2");
    }
    if (j.contains("paths")) {
        const auto n = integer(j.at("paths"), sub(path, "paths"));
        if (n < 2) bad(sub(path, "paths"), "must be at least 2");
        o.paths = static_cast<std::size_t>(n);
    }
    if (j.contains("steps")) {
        o.steps = static_cast<int>(integer(j.at("steps"), sub(path, "steps")));
        if (o.steps < 1) bad(sub(path, "steps"), "must be at least 1");
    }
    if (j.contains("points")) o.points = numbers(j.at("points"), sub(path, "points"));
    if (j.contains("controls")) o.controls = numbers(j.at("controls"), sub(path, "controls"));
    return o;
}

Tolerances tolerances(const json& j, const std::string& path) {
    allow_keys(j, path, {"abs_error", "slack", "decay_factor", "invariant", "conjugate"});
    Tolerances t;
    t.abs_error = positive_at(j, path, "abs_error", t.abs_error);
    t.slack = number_or(j, path, "slack", t.slack);
    if (t.slack < 0.0) bad(sub(path, "slack"), "must be nonnegative");
    t.decay_factor = j.contains("decay_factor") ? positive_at(j, path, "decay_factor") : 0.0;
    t.invariant = positive_at(j, path, "invariant", t.invariant);
    t.conjugate = positive_at(j, path, "conjugate", t.conjugate);
    return t;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    allow_keys(j, "", {"description", "model", "penalty", "grid", "t", "h_list", "n_list", "args", "test_function",
                       "output", "seed", "radius", "comparator", "oracle", "tolerances", "criteria"});
    ExperimentConfig c;
    if (j.contains("description") && !j.at("description").is_string()) bad("description", "must be a string");
    if (j.contains("grid")) c.grid = grid(j.at("grid"), "grid");
    if (j.contains("model")) c.model = model(j.at("model"), "model", c.grid);
    if (j.contains("penalty")) c.penalty = penalty(j.at("penalty"), "penalty");
    if (j.contains("t")) c.t = positive_at(j, "", "t");
    if (j.contains("h_list")) {
        c.h_list = numbers(j.at("h_list"), "h_list");
        for (std::size_t k = 0; k < c.h_list.size(); ++k)
            if (!(c.h_list[k] > 0.0)) bad("h_list[" + std::to_string(k) + "]", "must be positive");
    }
    if (j.contains("n_list")) {
        const auto& v = j.at("n_list");
        if (!v.is_array()) bad("n_list", "must be an array of integers");
        for (std::size_t k = 0; k < v.size(); ++k) {
            const auto n = integer(v[k], "n_list[" + std::to_string(k) + "]");
            if (n < 1) bad("n_list[" + std::to_string(k) + "]", "must be at least 1");
            c.n_list.push_back(static_cast<int>(n));
        }
    }
    if (j.contains("args")) c.args = numbers(j.at("args"), "args");
    if (j.contains("test_function")) c.test_function = test_function(j.at("test_function"), "test_function", c.grid);
    if (j.contains("output")) {
        const auto& o = j.at("output");
        allow_keys(o, "output", {"csv", "json"});
        if (o.contains("csv")) c.output.csv = text_at(o, "output", "csv");
        if (o.contains("json")) c.output.json = text_at(o, "output", "json");
    }
    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        if (!s.is_number_unsigned()) bad("seed", "must be a nonnegative integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (j.contains("radius")) c.radius = positive_at(j, "", "radius");
    if (j.contains("comparator")) {
        c.comparator = text_at(j, "", "comparator");
        if (c.comparator != "entropic" && c.comparator != "variance_scan" && c.comparator != "hjb")
            bad("comparator", "must be one of entropic, variance_scan, hjb");
    }
    if (j.contains("oracle")) c.oracle = oracle(j.at("oracle"), "oracle");
    if (j.contains("tolerances")) c.tolerances = tolerances(j.at("tolerances"), "tolerances");
    if (j.contains("criteria")) {
        const auto& v = j.at("criteria");
        if (!v.is_array()) bad("criteria", "must be an array of integers");
        for (std::size_t k = 0; k < v.size(); ++k) {
            const auto id = integer(v[k], "criteria[" + std::to_string(k) + "]");
            if (id < 1 || id > kCriterionCount)
                bad("criteria[" + std::to_string(k) + "]", "must be between 1 and " + std::to_string(kCriterionCount));
            c.criteria.push_back(static_cast<int>(id));
        }
    }
    return c;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"conjugate", "validate-model", "gh",     "Gh",
                                            "residual",  "chernoff",       "oracle", "suite"};
    return s;
}

namespace {

// ---- reports

std::string cell(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

std::string cell(int x) { return std::to_string(x); }
std::string cell(bool b) { return b ? "true" : "false"; }

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    template <typename... Cells>
    void add(Cells&&... cells) {
        rows.push_back({cell(cells)...});
    }
    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t k = 0; k < r.size(); ++k) out += (k ? "," : "") + r[k];
            out += "\r\n";
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

void write_atomic(const std::filesystem::path& path, const std::string& data) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f << data;
        if (!f.flush()) throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
}

// json cannot hold infinities; they are written as strings
ordered num(double x) {
    if (std::isfinite(x)) return x;
    return cell(x);
}

struct Report {
    Table table;
    ordered summary = ordered::object();
    ordered verdicts = ordered::object();
    bool pass = true;

    void verdict(const std::string& name, bool ok) {
        verdicts[name] = ok;
        pass = pass && ok;
    }
};

// ---- subcommand helpers

const ReferenceModel& need_model(const ExperimentConfig& c, const std::string& cmd) {
    if (!c.model) throw ValidationError("config.model: required for " + cmd);
    return *c.model;
}
const PenaltySpec& need_penalty(const ExperimentConfig& c, const std::string& cmd) {
    if (!c.penalty) throw ValidationError("config.penalty: required for " + cmd);
    return *c.penalty;
}
const Grid& need_grid(const ExperimentConfig& c, const std::string& cmd) {
    if (!c.grid) throw ValidationError("config.grid: required for " + cmd);
    return *c.grid;
}
const TestFunction& need_test_function(const ExperimentConfig& c, const std::string& cmd) {
    if (!c.test_function) throw ValidationError("config.test_function: required for " + cmd);
    return *c.test_function;
}
double need_t(const ExperimentConfig& c, const std::string& cmd) {
    if (!c.t) throw ValidationError("config.t: required for " + cmd);
    return *c.t;
}
const std::vector<double>& need_h_list(const ExperimentConfig& c, const std::string& cmd) {
    if (c.h_list.empty()) throw ValidationError("config.h_list: required for " + cmd);
    return c.h_list;
}

ordered number_list(const std::vector<double>& xs) {
    ordered a = ordered::array();
    for (double x : xs) a.push_back(num(x));
    return a;
}

// ---- subcommands

Report cmd_conjugate(const ExperimentConfig& c) {
    const auto& phi = need_penalty(c, "conjugate").phi;
    std::vector<double> ws = c.args;
    if (ws.empty())
        for (int k = 0; k <= 100; ++k) ws.push_back(0.1 * k);
    for (std::size_t k = 0; k < ws.size(); ++k)
        if (ws[k] < 0.0) throw ValidationError("config.args[" + std::to_string(k) + "]: must be nonnegative");
    std::sort(ws.begin(), ws.end());
    const auto cc = biconjugate(phi);
    Report r;
    r.table.header = {"v", "c", "c_star", "c_star_argmax", "c_biconjugate"};
    std::vector<double> cs;
    for (double w : ws) {
        cs.push_back(conjugate(phi, w));
        r.table.add(w, phi(w), cs.back(), conjugate_argmax(phi, w), cc(w));
    }
    const double tol = c.tolerances.conjugate;
    double fy = 0.0, mono = 0.0, conv = 0.0, sandwich = 0.0;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        for (std::size_t k = 0; k < ws.size(); ++k) fy = std::max(fy, ws[i] * ws[k] - phi(ws[i]) - cs[k]);
        if (i > 0) mono = std::max(mono, cs[i - 1] - cs[i]);
        if (i > 0 && i + 1 < ws.size()) {
            const double lam = (ws[i] - ws[i - 1]) / (ws[i + 1] - ws[i - 1]);
            conv = std::max(conv, cs[i] - ((1 - lam) * cs[i - 1] + lam * cs[i + 1]));
        }
        sandwich = std::max({sandwich, cc(ws[i]) - phi(ws[i]), phi(0.0) - cc(ws[i])});
    }
    r.summary["cost"] = phi.describe();
    r.summary["max_fenchel_young_violation"] = fy;
    r.summary["max_monotonicity_violation"] = mono;
    r.summary["max_convexity_violation"] = conv;
    r.summary["max_sandwich_violation"] = sandwich;
    r.verdict("fenchel_young", fy <= tol);
    r.verdict("monotone", mono <= tol);
    r.verdict("convex", conv <= tol);
    r.verdict("sandwich", sandwich <= tol);
    return r;
}

Report cmd_validate_model(const ExperimentConfig& c) {
    const auto& m = need_model(c, "validate-model");
    const auto rep = validate_conditions(m, need_h_list(c, "validate-model"));
    Report r;
    r.table.header = {"h", "m_quotient", "mass_outside", "d_violation"};
    for (double lvl : rep.tail_levels) {
        std::ostringstream name;
        name << "tail_quotient_" << lvl;
        r.table.header.push_back(name.str());
    }
    for (const auto& row : rep.rows) {
        r.table.rows.push_back({cell(row.h), cell(row.m_quotient), cell(row.mass_outside), cell(row.d_violation)});
        for (double q : row.tail_quotients) r.table.rows.back().push_back(cell(q));
    }
    auto verdict = [&](const char* name, const ConditionVerdict& v) {
        r.summary["conditions"][name] = {{"verdict", v.pass ? "pass" : "fail"}, {"note", v.note}};
        r.verdict(std::string("condition_") + name, v.pass);
    };
    verdict("A", rep.a);
    verdict("M", rep.m);
    verdict("T", rep.t);
    verdict("D", rep.d);
    r.summary["label"] = rep.label;
    return r;
}

Report cmd_generator(const ExperimentConfig& c, bool second) {
    const std::string cmd = second ? "Gh" : "gh";
    const auto& spec = need_penalty(c, cmd);
    if (spec.martingale() != second)
        throw ValidationError(std::string("config.penalty.kind: ") + cmd + " needs a " +
                              (second ? "martingale" : "first-order") + " penalty kind");
    std::vector<double> args = c.args;
    if (args.empty())
        args = second ? std::vector<double>{-1, 0, 0.5, 1, 2} : std::vector<double>{-2, -1, -0.5, 0, 0.5, 1, 2};
    const auto prof = limit_profile(spec, need_model(c, cmd), need_h_list(c, cmd), args);
    Report r;
    r.table.header = second ? std::vector<std::string>{"h", "a", "G_h_over_h", "analytic", "abs_error"}
                            : std::vector<std::string>{"h", "m", "g_h_over_h", "analytic", "abs_error"};
    double worst = 0.0;
    for (std::size_t k = 0; k < prof.h.size(); ++k)
        for (std::size_t j = 0; j < args.size(); ++j) {
            const double a = prof.analytic.empty() ? std::numeric_limits<double>::quiet_NaN() : prof.analytic[j];
            const double e = std::isfinite(a) ? std::abs(prof.scaled[k][j] - a) : std::numeric_limits<double>::quiet_NaN();
            if (std::isfinite(e)) worst = std::max(worst, e);
            r.table.add(prof.h[k], args[j], prof.scaled[k][j], a, e);
        }
    r.summary["max_abs_error"] = worst;
    r.summary["cauchy"] = number_list(prof.cauchy);
    r.summary["analytic_available"] = !prof.analytic.empty();
    r.verdict("abs_error_within_tolerance", worst <= c.tolerances.abs_error);
    r.verdict("limit_convex", prof.convex);
    if (second) r.verdict("limit_monotone", prof.monotone);
    return r;
}

Report cmd_residual(const ExperimentConfig& c) {
    const auto& spec = need_penalty(c, "residual");
    const auto& model = need_model(c, "residual");
    const auto& tf = need_test_function(c, "residual");
    if (!tf.smooth()) throw ValidationError("config.test_function.type: residual needs a smooth (sine or bump) function");
    const auto& g = need_grid(c, "residual");
    const auto f = tf.on(g);
    const bool second = spec.martingale();
    const auto d = GridFunction::sample(g, [&](double x) { return second ? tf.hessian(x) : tf.gradient(x); });
    Report r;
    r.table.header = {"h", "residual"};
    std::vector<double> res;
    for (double h : need_h_list(c, "residual")) {
        res.push_back(second ? generator_residual_second(spec, model, h, f, d, c.radius)
                             : generator_residual_first(spec, model, h, f, d, c.radius));
        r.table.add(h, res.back());
    }
    const double factor = c.tolerances.decay_factor > 0.0 ? c.tolerances.decay_factor : 5.0;
    bool positive = true;
    for (double x : res) positive = positive && x > 0.0;
    r.summary["order"] = second ? "second" : "first";
    r.summary["residuals"] = number_list(res);
    r.verdict("positive", positive);
    r.verdict("decay", decreasing_verdict(res, c.tolerances.slack, factor));
    return r;
}

// first order: [-M, M] with M = 2 Lip + 1; second order: [-1, 40]
SampledHamiltonian hamiltonian(const ExperimentConfig& c, const PenaltySpec& spec, const GridFunction& f) {
    const double M = 2.0 * f.lipschitz() + 1.0;
    const double lo = c.oracle.hamiltonian_lo.value_or(spec.martingale() ? -1.0 : -M);
    const double hi = c.oracle.hamiltonian_hi.value_or(spec.martingale() ? 40.0 : M);
    const std::size_t n = c.oracle.hamiltonian_points ? c.oracle.hamiltonian_points : (spec.martingale() ? 4101 : 801);
    return SampledHamiltonian::from_penalty(spec, lo, hi, n);
}

GridFunction hjb_value(const ExperimentConfig& c, const PenaltySpec& spec, const GridFunction& f, double t) {
    HjbProblem p;
    p.order = spec.martingale() ? GeneratorOrder::second : GeneratorOrder::first;
    p.hamiltonian = hamiltonian(c, spec, f);
    p.model = *c.model;
    p.terminal = f;
    p.t = t;
    return hjb_solve(p);
}

double entropic_gamma(const PenaltySpec& spec) {
    if (spec.kind != PenaltyKind::ot || spec.phi.kind() != CostFunction::Kind::quadratic)
        throw ValidationError("config.penalty: the entropic oracle needs kind ot with a quadratic phi");
    return spec.phi.gamma();
}

void check_scan_setting(const ExperimentConfig& c, const PenaltySpec& spec) {
    if (spec.kind != PenaltyKind::mart_wasserstein)
        throw ValidationError("config.penalty.kind: the variance-scan oracle needs mart_wasserstein");
    if (!c.model->gaussian() || !c.model->drift.is_zero())
        throw ValidationError("config.model: the variance-scan oracle needs a Gaussian model without drift");
}

Report cmd_chernoff(const ExperimentConfig& c) {
    const auto& spec = need_penalty(c, "chernoff");
    const auto& model = need_model(c, "chernoff");
    const auto& g = need_grid(c, "chernoff");
    const double t = need_t(c, "chernoff");
    if (c.n_list.empty()) throw ValidationError("config.n_list: required for chernoff");
    if (c.comparator.empty()) throw ValidationError("config.comparator: required for chernoff");
    const auto f = need_test_function(c, "chernoff").on(g);
    GridFunction ref;
    if (c.comparator == "entropic") {
        ref = entropic_oracle(model, entropic_gamma(spec), t, f);
    } else if (c.comparator == "variance_scan") {
        check_scan_setting(c, spec);
        VarianceScanOptions o;
        o.radius = c.radius;
        o.points = c.oracle.scan_points;
        ref = variance_scan_oracle(model.s0(), spec.phi, t, f, o).value;
    } else {
        ref = hjb_value(c, spec, f, t);
    }
    ChernoffOptions opt;
    opt.radius = c.radius;
    opt.tolerance = c.tolerances.invariant;
    Report r;
    r.table.header = {"n", "error", "trust_lo", "trust_hi"};
    std::vector<double> errors;
    for (int n : c.n_list) {
        const auto run = iterate(spec, model, t, n, f, opt);
        errors.push_back(sup_distance(run.final(), ref, c.radius));
        r.table.add(n, errors.back(), run.trust_lo, run.trust_hi);
    }
    const double factor = c.tolerances.decay_factor > 0.0 ? c.tolerances.decay_factor : 4.0;
    r.summary["comparator"] = c.comparator;
    r.summary["errors"] = number_list(errors);
    r.summary["ratio_last_first"] = num(errors.back() / errors.front());
    r.verdict("converges", decreasing_verdict(errors, c.tolerances.slack, factor));
    return r;
}

Report cmd_oracle(const ExperimentConfig& c) {
    const auto& model = need_model(c, "oracle");
    const auto& g = need_grid(c, "oracle");
    const double t = need_t(c, "oracle");
    const auto f = need_test_function(c, "oracle").on(g);
    const auto& o = c.oracle;
    if (o.type.empty()) throw ValidationError("config.oracle: required for oracle");
    const auto& spec = need_penalty(c, "oracle");
    Report r;
    r.summary["oracle"] = o.type;
    if (o.type == "monte_carlo") {
        if (spec.martingale()) throw ValidationError("config.penalty.kind: Monte Carlo drift controls need ot or wasserstein");
        if (!c.seed) throw ValidationError("config.seed: required for the Monte Carlo oracle");
        MonteCarloOptions mo;
        mo.paths = o.paths;
        mo.steps = o.steps;
        mo.seed = c.seed;
        mo.points = o.points.empty() ? std::vector<double>{0.0} : o.points;
        std::vector<GridFunction> controls{GridFunction::constant(g, 0.0)};
        for (double b : o.controls)
            if (b != 0.0) controls.push_back(GridFunction::constant(g, b));
        const auto est = mc_drift_lower_bound(model, spec.phi, t, f, controls, mo);
        r.table.header = {"x", "value", "std_error", "best_control", "zero_control_value"};
        for (std::size_t p = 0; p < est.points.size(); ++p)
            r.table.add(est.points[p], est.value[p], est.std_error[p], controls[est.best_control[p]][0],
                        est.zero_value.empty() ? std::numeric_limits<double>::quiet_NaN() : est.zero_value[p]);
        r.summary["paths"] = o.paths;
        r.summary["steps"] = o.steps;
        return r;
    }
    r.table.header = {"x", "value"};
    GridFunction v;
    std::vector<double> argmax;
    if (o.type == "hjb") {
        v = hjb_value(c, spec, f, t);
    } else if (o.type == "entropic") {
        v = entropic_oracle(model, entropic_gamma(spec), t, f);
    } else {
        check_scan_setting(c, spec);
        VarianceScanOptions so;
        so.radius = c.radius;
        so.points = o.scan_points;
        auto s = variance_scan_oracle(model.s0(), spec.phi, t, f, so);
        v = std::move(s.value);
        argmax = std::move(s.argmax);
        r.table.header.push_back("argmax_variance");
        r.summary["v_max"] = num(s.v_max);
    }
    for (std::size_t i = 0; i < g.n; ++i) {
        r.table.rows.push_back({cell(g.x(i)), cell(v[i])});
        if (!argmax.empty()) r.table.rows.back().push_back(cell(argmax[i]));
    }
    return r;
}

Report cmd_suite(const ExperimentConfig& c, std::ostream& out) {
    const auto results = run_acceptance(c.criteria, &out);
    Report r;
    r.table.header = {"id", "name", "pass", "detail"};
    ordered rows = ordered::array();
    for (const auto& res : results) {
        r.table.add(res.id, res.name, res.pass, res.detail);
        rows.push_back({{"id", res.id}, {"name", res.name}, {"pass", res.pass}, {"seconds", res.seconds},
                        {"limit_seconds", res.limit}, {"info", res.info}});
        r.verdict("criterion_" + std::to_string(res.id), res.pass);
    }
    r.summary["criteria"] = rows;
    return r;
}

}  // namespace

int run(const std::string& subcommand, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
    try {
        const auto& subs = subcommands();
        if (std::find(subs.begin(), subs.end(), subcommand) == subs.end())
            throw ValidationError("unknown subcommand '" + subcommand + "'");
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw ValidationError("cannot read config file '" + config_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ValidationError(std::string("config is not valid JSON: ") + e.what());
        }
        auto cfg = parse_config(j);
        if (seed) cfg.seed = seed;

        Report rep;
        if (subcommand == "conjugate")
            rep = cmd_conjugate(cfg);
        else if (subcommand == "validate-model")
            rep = cmd_validate_model(cfg);
        else if (subcommand == "gh" || subcommand == "Gh")
            rep = cmd_generator(cfg, subcommand == "Gh");
        else if (subcommand == "residual")
            rep = cmd_residual(cfg);
        else if (subcommand == "chernoff")
            rep = cmd_chernoff(cfg);
        else if (subcommand == "oracle")
            rep = cmd_oracle(cfg);
        else
            rep = cmd_suite(cfg, out);

        const std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
        const auto csv_path = dir / (cfg.output.csv.empty() ? subcommand + ".csv" : cfg.output.csv);
        const auto json_path = dir / (cfg.output.json.empty() ? subcommand + ".json" : cfg.output.json);
        const std::string csv = rep.table.str();

        ordered doc;
        doc["subcommand"] = subcommand;
        doc["config_hash"] = fnv1a_hex(text);
        if (cfg.seed) doc["seed"] = *cfg.seed;
        doc["module_versions"] = kModuleVersions;
        doc["csv"] = {{"path", csv_path.filename().string()}, {"columns", rep.table.header}, {"fnv1a", fnv1a_hex(csv)}};
        doc["summary"] = rep.summary;
        doc["verdicts"] = rep.verdicts;
        doc["pass"] = rep.pass;

        write_atomic(csv_path, csv);
        write_atomic(json_path, doc.dump(2) + "\n");
        out << subcommand << ": " << (rep.pass ? "pass" : "FAIL") << " -> " << csv_path.string() << ", "
            << json_path.string() << '\n';
        return rep.pass ? ExitCode::ok : ExitCode::verdict_failed;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return ExitCode::validation_failed;
    } catch (const HorizonError& e) {
        err << "validation error: " << e.what() << '\n';
        return ExitCode::validation_failed;
    } catch (const WindowError& e) {
        err << "validation error: " << e.what() << '\n';
        return ExitCode::validation_failed;
    } catch (const DomainError& e) {
        err << "validation error: " << e.what() << '\n';
        return ExitCode::validation_failed;
    } catch (const InvariantError& e) {
        err << "invariant violated: " << e.what() << '\n';
        return ExitCode::invariant_violated;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::internal_error;
    }
}

}  // namespace riskgen::cli
