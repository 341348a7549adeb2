#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mgeo/errors.hpp"
#include "mgeo/families.hpp"

namespace mgeo {

/// Checks the runner knows how to execute, in report order.
inline const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> v = {"gauss",    "codazzi",  "ricci", "semiparallel",
                                               "parallel", "identities", "classify", "ode"};
    return v;
}

/**
 * Run configuration parsed from flat key=value text ('#' comments,
 * '[section]' headers prefixing the keys that follow, dotted keys inline).
 */
struct RunConfig {
    // immersion selection
    std::string family;  // family tag or "custom"
    FamilyInstance instance;
    // custom chart
    int custom_n = 0;
    std::vector<std::string> custom_components;
    std::vector<std::pair<double, double>> custom_domain;
    expr::Bindings constants;

    // sampling
    std::vector<int> grid;  // per-axis counts
    double inset = 0.1;
    std::vector<VectorXd> explicit_points;

    std::vector<std::string> checks;
    double tol_default = 1e-7;
    std::map<std::string, double> tol_override;

    std::string out_path = "report.json";
    std::string csv_path;  // empty = no CSV
    uint64_t seed = 42;
    int jobs = 0;  // 0 = decide from environment / hardware

    std::map<std::string, std::string> echo;  // raw key-values, report round-trip

    double tolerance_for(const std::string& check) const {
        auto it = tol_override.find(check);
        if (it != tol_override.end()) return it->second;
        if (check == "ode") return 1e-10;
        return tol_default;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline long to_int(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        long d = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    }
}

inline int edit_distance(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (size_t j = 1; j <= b.size(); ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "family", "n", "p", "k", "lambda", "r", "radii",
        "curve.kappa", "curve.a", "curve.b", "curve.c3", "curve.c4", "curve.range",
        "curve.step", "chart.n", "domain", "checks",
        "samples.grid", "samples.inset", "samples.points",
        "output.path", "output.csv", "seed", "jobs", "tolerance.default",
    };
    return keys;
}

inline bool dynamic_key(const std::string& k) {
    if (k.rfind("chart.f", 0) == 0) return true;
    if (k.rfind("const.", 0) == 0) return true;
    if (k.rfind("tolerance.", 0) == 0) {
        std::string check = k.substr(10);
        return std::find(known_checks().begin(), known_checks().end(), check) !=
               known_checks().end();
    }
    return false;
}

inline void check_key_known(const std::string& k) {
    if (known_keys().count(k) || dynamic_key(k)) return;
    std::string best;
    int best_d = 1 << 20;
    for (const auto& cand : known_keys()) {
        int d = edit_distance(k, cand);
        if (d < best_d) {
            best_d = d;
            best = cand;
        }
    }
    std::ostringstream os;
    os << "unknown key '" << k << "'";
    if (best_d <= std::max<int>(2, static_cast<int>(k.size()) / 3))
        os << " (did you mean '" << best << "'?)";
    throw ConfigError(os.str());
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::string section;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "config line " << lineno << ": expected key = value";
            throw ConfigError(os.str());
        }
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::unquote(detail::trim(line.substr(eq + 1)));
        if (!section.empty()) key = section + "." + key;
        detail::check_key_known(key);
        if (kv.count(key)) throw ConfigError("duplicate key '" + key + "'");
        kv[key] = val;
    }
    cfg.echo = kv;

    auto get = [&](const std::string& k) -> std::optional<std::string> {
        auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    cfg.family = get("family").value_or("");
    if (cfg.family.empty()) throw ConfigError("missing required key 'family'");

    if (auto v = get("seed")) cfg.seed = static_cast<uint64_t>(detail::to_int("seed", *v));
    if (auto v = get("jobs")) cfg.jobs = static_cast<int>(detail::to_int("jobs", *v));
    if (auto v = get("samples.inset")) cfg.inset = detail::to_double("samples.inset", *v);
    if (!(cfg.inset > 0.0 && cfg.inset < 0.5))
        throw ConfigError("samples.inset must lie in (0, 0.5)");
    if (auto v = get("tolerance.default"))
        cfg.tol_default = detail::to_double("tolerance.default", *v);
    for (const auto& c : known_checks())
        if (auto v = get("tolerance." + c))
            cfg.tol_override[c] = detail::to_double("tolerance." + c, *v);
    if (auto v = get("output.path")) cfg.out_path = *v;
    if (auto v = get("output.csv")) cfg.csv_path = *v;

    // checks
    {
        std::string cs = get("checks").value_or("all");
        if (detail::trim(cs).empty()) throw ConfigError("no checks selected");
        if (cs == "all") {
            cfg.checks = known_checks();
        } else {
            for (const auto& c : detail::split(cs, ',')) {
                if (c.empty()) continue;
                if (std::find(known_checks().begin(), known_checks().end(), c) ==
                    known_checks().end())
                    throw ConfigError("unknown check '" + c + "'");
                cfg.checks.push_back(c);
            }
            if (cfg.checks.empty()) throw ConfigError("no checks selected");
        }
    }

    // constants for expressions
    for (const auto& [k, v] : kv)
        if (k.rfind("const.", 0) == 0) cfg.constants[k.substr(6)] = detail::to_double(k, v);

    // immersion
    if (cfg.family == "custom") {
        cfg.custom_n = static_cast<int>(detail::to_int("chart.n", get("chart.n").value_or("")));
        for (int i = 1; i <= 16; ++i) {
            std::ostringstream key;
            key << "chart.f" << i;
            auto v = get(key.str());
            if (!v) break;
            cfg.custom_components.push_back(*v);
        }
        if (cfg.custom_components.empty())
            throw ConfigError("custom family needs chart.f1..chart.fm components");
        auto dom = get("domain");
        if (!dom) throw ConfigError("custom family needs a domain ('lo:hi,lo:hi,...')");
        for (const auto& iv : detail::split(*dom, ',')) {
            auto parts = detail::split(iv, ':');
            if (parts.size() != 2)
                throw ConfigError("domain intervals must look like lo:hi");
            cfg.custom_domain.emplace_back(detail::to_double("domain", parts[0]),
                                           detail::to_double("domain", parts[1]));
        }
        if (static_cast<int>(cfg.custom_domain.size()) != cfg.custom_n)
            throw ConfigError("domain must list one interval per chart variable");
    } else {
        FamilyInstance& fi = cfg.instance;
        fi.tag = family_tag_from_name(cfg.family);
        if (auto v = get("n")) fi.n = static_cast<int>(detail::to_int("n", *v));
        if (auto v = get("p")) fi.p = static_cast<int>(detail::to_int("p", *v));
        if (auto v = get("k")) fi.k = static_cast<int>(detail::to_int("k", *v));
        if (auto v = get("lambda")) fi.lambda = static_cast<int>(detail::to_int("lambda", *v));
        if (auto v = get("r")) fi.sphere_radius = detail::to_double("r", *v);
        if (auto v = get("radii"))
            for (const auto& r : detail::split(*v, ','))
                fi.radii.push_back(detail::to_double("radii", r));
        if (auto v = get("curve.step")) fi.curve_step = detail::to_double("curve.step", *v);

        using Tag = FamilyInstance::Tag;
        bool needs_curve = fi.tag == Tag::Cylinder || fi.tag == Tag::GeneralizedCone ||
                           fi.tag == Tag::Rotational;
        if (needs_curve) {
            CurveSpec cs;
            cs.form = fi.tag == Tag::Cylinder ? SpaceForm::Euclidean
                      : fi.tag == Tag::GeneralizedCone ? SpaceForm::Sphere
                                                       : SpaceForm::Hyperbolic;
            std::string kappa = get("curve.kappa").value_or("exponential");
            if (kappa == "exponential" || kappa == "exp") {
                double b = get("curve.b") ? detail::to_double("curve.b", *get("curve.b")) : 1.0;
                double a = get("curve.a") ? detail::to_double("curve.a", *get("curve.a")) : 0.0;
                cs.kappa = KappaFn::exponential(b, a);
            } else if (kappa == "inverse_sqrt") {
                double c3 = get("curve.c3") ? detail::to_double("curve.c3", *get("curve.c3")) : 1.0;
                double c4 = get("curve.c4") ? detail::to_double("curve.c4", *get("curve.c4")) : 1.0;
                cs.kappa = KappaFn::inverse_sqrt(c3, c4);
            } else {
                cs.kappa = KappaFn::expression(kappa);
            }
            if (auto v = get("curve.range")) {
                auto parts = detail::split(*v, ':');
                if (parts.size() != 2) throw ConfigError("curve.range must look like a:b");
                cs.s0 = detail::to_double("curve.range", parts[0]);
                cs.s1 = detail::to_double("curve.range", parts[1]);
            }
            cs.validate();
            fi.curve = cs;
        }
    }

    // sampling
    if (auto v = get("samples.points")) {
        for (const auto& pt : detail::split(*v, ';')) {
            if (pt.empty()) continue;
            std::istringstream ps(pt);
            std::vector<double> coords;
            double c;
            while (ps >> c) coords.push_back(c);
            VectorXd x(static_cast<Eigen::Index>(coords.size()));
            for (size_t i = 0; i < coords.size(); ++i) x[static_cast<Eigen::Index>(i)] = coords[i];
            cfg.explicit_points.push_back(x);
        }
        if (cfg.explicit_points.empty()) throw ConfigError("samples.points is empty");
    } else {
        std::string grid = get("samples.grid").value_or("3");
        for (const auto& c : detail::split(grid, 'x')) {
            long v = detail::to_int("samples.grid", c);
            if (v < 1) throw ConfigError("samples.grid counts must be >= 1");
            cfg.grid.push_back(static_cast<int>(v));
        }
    }

    return cfg;
}

inline ImmersionSpec build_spec(const RunConfig& cfg) {
    if (cfg.family == "custom") {
        Box box = detail::make_box(cfg.custom_domain);
        return finalize_spec(chart_from_expressions("custom", cfg.custom_n,
                                                    cfg.custom_components, box, cfg.constants));
    }
    return build_family(cfg.instance);
}

}  // namespace mgeo
