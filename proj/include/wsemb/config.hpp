#pragma once

#include <wsemb/core.hpp>
#include <wsemb/domain.hpp>
#include <wsemb/expression.hpp>
#include <wsemb/flow.hpp>
#include <wsemb/necessary.hpp>
#include <wsemb/profile.hpp>
#include <wsemb/weight.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace wsemb {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Pipeline stages that `only` may select.
inline const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names{"necessary", "sufficient", "spectral"};
    return names;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"auto",          "none",          "boundary_profile",
                                                "radial",        "singular_boundary", "singular_point",
                                                "log_example",   "expression_flow"};
    return names;
}

struct PipelinePlan {
    double p = 2.0;
    std::set<std::string> only;  // empty: every stage
    std::string preset = "auto";
    bool spectral = false;  // the probe runs only on request
    std::optional<ExpressionFlowSpec> flow;

    double quad_rel = 1e-10;
    double eps = 1.0;
    std::vector<double> radii{4, 8, 12, 16, 24, 32, 48, 64};
    double tail_delta = 0.05;
    std::vector<double> decay_k{0.5, 1.0, 2.0};
    double cube_h = 1.0;
    double cube_lambda = 0.0;  // 0: canonical (2 (3^n - 1))^-1
    std::vector<double> cube_windows{4, 8, 16};
    std::vector<int> spectral_nodes;          // empty: dimension default
    std::vector<double> spectral_truncations; // empty: dimension default
    std::vector<double> spectral_lambdas;     // empty: dimension default
    int eigenpairs = 6;

    std::string out_dir = "wsemb_out";
    std::string format = "both";  // text | structured | both

    bool runs(const std::string& stage) const { return only.empty() || only.count(stage) > 0; }
};

struct Config {
    Domain domain = Domain::interval(0, 1);
    Weight weight = Weight::constant(1);
    PipelinePlan plan;
    Json source;  // domain and weight sections as given
};

namespace detail {

class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }
    bool has(const char* k) const { return j_.contains(k); }
    const Json& raw(const char* k) const {
        if (!j_.contains(k)) throw ConfigError(at(k), "missing required key");
        return j_.at(k);
    }
    std::string at(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    double number(const char* k) const { return to_number(raw(k), at(k)); }
    double number(const char* k, double def) const { return has(k) ? number(k) : def; }
    double positive(const char* k, double def) const {
        const double v = number(k, def);
        if (!(v > 0)) throw ConfigError(at(k), "must be > 0");
        return v;
    }
    int integer(const char* k, int def) const {
        if (!has(k)) return def;
        const Json& v = raw(k);
        if (!v.is_number_integer()) throw ConfigError(at(k), "expected an integer");
        return v.get<int>();
    }
    bool boolean(const char* k, bool def) const {
        if (!has(k)) return def;
        if (!raw(k).is_boolean()) throw ConfigError(at(k), "expected true or false");
        return raw(k).get<bool>();
    }
    std::string string(const char* k) const {
        if (!raw(k).is_string()) throw ConfigError(at(k), "expected a string");
        return raw(k).get<std::string>();
    }
    std::string string(const char* k, const std::string& def) const { return has(k) ? string(k) : def; }
    std::string choice(const char* k, const std::string& def, const std::vector<std::string>& options) const {
        const std::string v = string(k, def);
        for (const auto& o : options)
            if (o == v) return v;
        throw ConfigError(at(k), "unsupported value '" + v + "'");
    }
    std::vector<double> numbers(const char* k, std::vector<double> def) const {
        if (!has(k)) return def;
        const Json& v = raw(k);
        if (!v.is_array() || v.empty()) throw ConfigError(at(k), "expected a non-empty array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_number(v[i], at(k) + "[" + std::to_string(i) + "]"));
        return out;
    }
    Point point(const char* k) const {
        const std::vector<double> xs = numbers(k, {});
        if (xs.empty() || xs.size() > static_cast<std::size_t>(kMaxDim))
            throw ConfigError(at(k), "expected 1 to 3 coordinates");
        return Point::from(xs);
    }
    Reader sub(const char* k) const { return Reader(raw(k), at(k)); }

    static double to_number(const Json& v, const std::string& path) {
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
            if (s == "-inf") return -std::numeric_limits<double>::infinity();
        }
        throw ConfigError(path, "expected a number (or \"inf\" / \"-inf\")");
    }

private:
    const Json& j_;
    std::string path_;
};

inline std::vector<double> increasing(const Reader& r, const char* k, std::vector<double> def) {
    std::vector<double> v = r.numbers(k, std::move(def));
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) throw ConfigError(r.at(k), "values must increase");
    return v;
}

inline Domain parse_domain(const Reader& r) {
    const std::string type =
        r.choice("type", "", {"interval", "half_line", "real_line", "full_space", "box", "ball", "bounded_smooth"});
    try {
        if (type == "interval") {
            r.allow({"type", "a", "b"});
            const double a = r.number("a"), b = r.number("b");
            if (!(a < b)) throw ConfigError(r.at("b"), "interval needs a < b");
            return Domain::interval(a, b);
        }
        if (type == "half_line") {
            r.allow({"type", "a"});
            return Domain::half_line(r.number("a"));
        }
        if (type == "real_line") {
            r.allow({"type", "truncation"});
            return Domain::full_space(1, r.positive("truncation", kDefaultTruncationRadius));
        }
        if (type == "full_space") {
            r.allow({"type", "dim", "truncation"});
            const int n = r.integer("dim", 1);
            if (n < 1 || n > kMaxDim) throw ConfigError(r.at("dim"), "dimension must be 1, 2 or 3");
            return Domain::full_space(n, r.positive("truncation", kDefaultTruncationRadius));
        }
        if (type == "box") {
            r.allow({"type", "lo", "hi"});
            const Point lo = r.point("lo"), hi = r.point("hi");
            if (lo.dim() != hi.dim()) throw ConfigError(r.at("hi"), "corner dimensions differ");
            return Domain::box(lo, hi);
        }
        if (type == "ball") {
            r.allow({"type", "center", "radius"});
            return Domain::ball(r.point("center"), r.number("radius"));
        }
        r.allow({"type", "distance", "tubular_depth", "lo", "hi"});
        const Point lo = r.point("lo"), hi = r.point("hi");
        if (lo.dim() != hi.dim()) throw ConfigError(r.at("hi"), "corner dimensions differ");
        return Domain(BoundedSmooth{lo.dim(), Expression(r.string("distance"), {"x", "y", "z"}),
                                    r.positive("tubular_depth", 0), Box{lo, hi}});
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(r.at("type"), e.what());
    }
}

inline Profile parse_profile(const Reader& r) {
    const std::string kind = r.choice(
        "kind", "", {"power", "shifted_power", "exponential", "gaussian", "log_power", "exp_inverse", "expression"});
    if (kind == "expression") {
        r.allow({"kind", "expr"});
        try {
            return Profile::expression(r.string("expr"));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(r.at("expr"), e.what());
        }
    }
    r.allow({"kind", "c", "a"});
    const double c = r.positive("c", 1.0), a = r.number("a", 1.0);
    if (kind == "power") return Profile::power(c, a);
    if (kind == "shifted_power") return Profile::shifted_power(c, a);
    if (kind == "exponential") return Profile::exponential(c, a);
    if (kind == "gaussian") return Profile::gaussian(c, a);
    if (kind == "log_power") return Profile::log_power(c, a);
    return Profile::exp_inverse(c, a);
}

inline std::vector<Point> parse_points(const Reader& r, const char* k) {
    std::vector<Point> out;
    if (!r.has(k)) return out;
    const Json& v = r.raw(k);
    if (!v.is_array()) throw ConfigError(r.at(k), "expected an array of points");
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string path = r.at(k) + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].empty() || v[i].size() > static_cast<std::size_t>(kMaxDim))
            throw ConfigError(path, "expected 1 to 3 coordinates");
        std::vector<double> xs;
        for (const auto& c : v[i]) xs.push_back(Reader::to_number(c, path));
        out.push_back(Point::from(xs));
    }
    return out;
}

inline Weight parse_weight(const Reader& r) {
    const std::string fam = r.choice("family", "",
                                     {"constant", "boundary_profile", "radial", "point_singular", "expression",
                                      "tabulated", "product", "equivalent_to", "piecewise", "log_example"});
    Weight w = Weight::constant(1);
    try {
        if (fam == "constant") {
            r.allow({"family", "zero_set", "infinity_set", "doubling", "periodic", "c"});
            w = Weight::constant(r.positive("c", 1.0));
        } else if (fam == "boundary_profile") {
            r.allow({"family", "zero_set", "infinity_set", "doubling", "periodic", "profile", "faces"});
            const std::string faces = r.choice("faces", "both", {"both", "lower", "upper"});
            w = Weight::boundary_profile(parse_profile(r.sub("profile")),
                                         faces == "lower"   ? Faces::Lower
                                         : faces == "upper" ? Faces::Upper
                                                            : Faces::Both);
        } else if (fam == "radial") {
            r.allow({"family", "zero_set", "infinity_set", "doubling", "periodic", "profile"});
            w = Weight::radial(parse_profile(r.sub("profile")));
        } else if (fam == "point_singular") {
            r.allow({"family", "zero_set", "infinity_set", "doubling", "periodic", "profile", "center"});
            w = Weight::point_singular(parse_profile(r.sub("profile")), r.point("center"));
        } else if (fam == "expression") {
            r.allow({"family", "zero_set", "infinity_set", "doubling", "periodic", "expr"});
            w = Weight::expression(r.string("expr"));
        } else if (fam == "tabulated") {
            r.allow({"family", "zero_set", "infinity_set", "doubling", "periodic", "axes", "values"});
            const Json& ax = r.raw("axes");
            if (!ax.is_array() || ax.empty()) throw ConfigError(r.at("axes"), "expected an array of axes");
            std::vector<std::vector<double>> axes;
            for (std::size_t i = 0; i < ax.size(); ++i) {
                const std::string path = r.at("axes") + "[" + std::to_string(i) + "]";
                if (!ax[i].is_array()) throw ConfigError(path, "expected an array of numbers");
                std::vector<double> a;
                for (const auto& v : ax[i]) a.push_back(Reader::to_number(v, path));
                axes.push_back(std::move(a));
            }
            w = Weight::tabulated(std::move(axes), r.numbers("values", {}));
        } else if (fam == "product") {
            r.allow({"family", "zero_set", "infinity_set", "doubling", "periodic", "factors"});
            const Json& fs = r.raw("factors");
            if (!fs.is_array() || fs.empty()) throw ConfigError(r.at("factors"), "expected a non-empty array");
            std::vector<Weight> factors;
            for (std::size_t i = 0; i < fs.size(); ++i)
                factors.push_back(parse_weight(Reader(fs[i], r.at("factors") + "[" + std::to_string(i) + "]")));
            w = Weight::product(std::move(factors));
        } else if (fam == "equivalent_to") {
            r.allow({"family", "zero_set", "infinity_set", "doubling", "periodic", "actual", "reference", "alpha",
                     "beta"});
            const double al = r.positive("alpha", 0), be = r.positive("beta", 0);
            if (al > be) throw ConfigError(r.at("alpha"), "equivalence needs alpha <= beta");
            w = Weight::equivalent_to(parse_weight(r.sub("actual")), parse_weight(r.sub("reference")), al, be);
        } else if (fam == "piecewise") {
            r.allow({"family", "zero_set", "infinity_set", "doubling", "periodic", "breakpoint", "left", "right"});
            w = Weight::piecewise(r.number("breakpoint"), parse_weight(r.sub("left")), parse_weight(r.sub("right")));
        } else {
            r.allow({"family"});
            w = log_example_weight();
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(r.at("family"), e.what());
    }
    if (r.has("zero_set")) w = w.with_zero_set(parse_points(r, "zero_set"));
    if (r.has("infinity_set")) w = w.with_infinity_set(parse_points(r, "infinity_set"));
    if (r.boolean("doubling", false)) w = w.with_doubling();
    if (r.boolean("periodic", false)) w = w.with_periodic();
    return w;
}

inline ExpressionFlowSpec parse_flow(const Reader& r) {
    r.allow({"x_map", "y_map", "c", "N_grid", "exhaustion", "base_points"});
    ExpressionFlowSpec s;
    s.x_map = r.string("x_map");
    s.y_map = r.string("y_map");
    s.c = r.positive("c", s.c);
    s.N_grid = increasing(r, "N_grid", s.N_grid);
    s.exhaustion = r.choice("exhaustion", "high", {"high", "near_boundary"}) == "high"
                       ? ExpressionFlowSpec::Exhaustion::High
                       : ExpressionFlowSpec::Exhaustion::NearBoundary;
    s.base_points = r.integer("base_points", s.base_points);
    if (s.base_points < 4) throw ConfigError(r.at("base_points"), "must be >= 4");
    return s;
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

}  // namespace detail

/// Validates a parsed document. Unknown keys anywhere are rejected.
inline Config parse_config_json(const Json& doc) {
    detail::Reader top(doc, "");
    top.allow({"schema", "domain", "weight", "p", "checks", "tolerances", "output"});
    if (top.has("schema") && top.integer("schema", 0) != kSchemaVersion)
        throw ConfigError("schema", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");

    Config cfg;
    cfg.domain = detail::parse_domain(top.sub("domain"));
    cfg.weight = detail::parse_weight(top.sub("weight"));
    cfg.source = Json::object();
    cfg.source["domain"] = doc.at("domain");
    cfg.source["weight"] = doc.at("weight");
    PipelinePlan& plan = cfg.plan;
    plan.p = top.number("p", 2.0);
    if (!(plan.p >= 1.0) || !std::isfinite(plan.p)) throw ConfigError("p", "exponent must satisfy 1 <= p < inf");

    if (top.has("checks")) {
        const detail::Reader c = top.sub("checks");
        c.allow({"only", "preset", "spectral", "flow"});
        if (c.has("only")) {
            const Json& o = c.raw("only");
            if (!o.is_array()) throw ConfigError(c.at("only"), "expected an array of stage names");
            for (const auto& s : o) {
                if (!s.is_string()) throw ConfigError(c.at("only"), "expected stage names");
                const std::string name = s.get<std::string>();
                bool known = false;
                for (const auto& k : stage_names()) known = known || k == name;
                if (!known) throw ConfigError(c.at("only"), "unknown stage '" + name + "'");
                plan.only.insert(name);
            }
        }
        plan.preset = c.choice("preset", plan.preset, preset_names());
        plan.spectral = c.boolean("spectral", plan.spectral);
        if (c.has("flow")) plan.flow = detail::parse_flow(c.sub("flow"));
    }
    if (plan.preset == "expression_flow" && !plan.flow)
        throw ConfigError("checks.preset", "expression_flow needs a checks.flow section");

    if (top.has("tolerances")) {
        const detail::Reader t = top.sub("tolerances");
        t.allow({"quad_rel", "eps", "radii", "tail_delta", "decay_k", "cube_h", "cube_lambda",
                 "cube_windows", "spectral_nodes", "spectral_truncations", "spectral_lambdas", "eigenpairs"});
        plan.quad_rel = t.positive("quad_rel", plan.quad_rel);
        plan.eps = t.positive("eps", plan.eps);
        plan.radii = detail::increasing(t, "radii", plan.radii);
        if (plan.radii.size() < 4) throw ConfigError(t.at("radii"), "at least four radii are required");
        plan.tail_delta = t.positive("tail_delta", plan.tail_delta);
        plan.decay_k = t.numbers("decay_k", plan.decay_k);
        plan.cube_h = t.positive("cube_h", plan.cube_h);
        plan.cube_lambda = t.number("cube_lambda", plan.cube_lambda);
        if (plan.cube_lambda < 0) throw ConfigError(t.at("cube_lambda"), "must be >= 0");
        plan.cube_windows = detail::increasing(t, "cube_windows", plan.cube_windows);
        for (double v : t.numbers("spectral_nodes", {})) {
            if (!(v >= 3) || v != std::floor(v)) throw ConfigError(t.at("spectral_nodes"), "node counts are integers >= 3");
            plan.spectral_nodes.push_back(static_cast<int>(v));
        }
        plan.spectral_truncations = detail::increasing(t, "spectral_truncations", {});
        plan.spectral_lambdas = t.numbers("spectral_lambdas", {});
        plan.eigenpairs = t.integer("eigenpairs", plan.eigenpairs);
        if (plan.eigenpairs < 1) throw ConfigError(t.at("eigenpairs"), "must be >= 1");
    }

    if (top.has("output")) {
        const detail::Reader o = top.sub("output");
        o.allow({"dir", "format"});
        plan.out_dir = o.string("dir", plan.out_dir);
        plan.format = o.choice("format", plan.format, {"text", "structured", "both"});
    }

    // preset preconditions that the config alone decides
    const std::string& ps = plan.preset;
    if (ps == "radial" && !cfg.domain.is_full_space())
        throw ConfigError("checks.preset", "preset radial requires the full space");
    if ((ps == "boundary_profile" || ps == "singular_boundary") && !cfg.domain.bounded())
        throw ConfigError("checks.preset", "preset " + ps + " requires a bounded domain");
    if (ps == "expression_flow" && !(cfg.domain.is_interval() && cfg.domain.dim() == 1))
        throw ConfigError("checks.preset", "expression flows need a one-dimensional interval");
    return cfg;
}

inline Config parse_config_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError("line " + std::to_string(detail::line_of(text, e.byte)), e.what());
    }
    return parse_config_json(doc);
}

inline Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Plan with every default made explicit, echoed into reports.
inline Json plan_json(const PipelinePlan& p) {
    Json j;
    j["p"] = p.p;
    j["only"] = Json::array();
    for (const auto& s : p.only) j["only"].push_back(s);
    j["preset"] = p.preset;
    j["spectral"] = p.spectral;
    if (p.flow) {
        j["flow"] = {{"x_map", p.flow->x_map}, {"y_map", p.flow->y_map}, {"c", p.flow->c}, {"N_grid", p.flow->N_grid},
                     {"exhaustion", p.flow->exhaustion == ExpressionFlowSpec::Exhaustion::High ? "high" : "near_boundary"},
                     {"base_points", p.flow->base_points}};
    }
    j["tolerances"] = {{"quad_rel", p.quad_rel},
                       {"eps", p.eps},
                       {"radii", p.radii},
                       {"tail_delta", p.tail_delta},
                       {"decay_k", p.decay_k},
                       {"cube_h", p.cube_h},
                       {"cube_lambda", p.cube_lambda},
                       {"cube_windows", p.cube_windows},
                       {"spectral_nodes", p.spectral_nodes},
                       {"spectral_truncations", p.spectral_truncations},
                       {"spectral_lambdas", p.spectral_lambdas},
                       {"eigenpairs", p.eigenpairs}};
    j["output"] = {{"dir", p.out_dir}, {"format", p.format}};
    return j;
}

}  // namespace wsemb
