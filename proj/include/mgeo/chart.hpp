#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mgeo/errors.hpp"
#include "mgeo/expr.hpp"
#include "mgeo/jet.hpp"

namespace mgeo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Axis-aligned chart domain.
struct Box {
    VectorXd lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const VectorXd& x, double margin = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (!(x[i] > lo[i] + margin && x[i] < hi[i] - margin)) return false;
        return true;
    }

    VectorXd center() const { return 0.5 * (lo + hi); }
};

/// A chart point; must lie strictly inside the immersion's domain box.
struct ChartPoint {
    VectorXd coords;
};

using ChartFn = std::function<std::vector<Jet>(const std::vector<Jet>&)>;

/**
 * A chart-parametrized immersion f: U in R^n -> R^m, m > n, evaluable on
 * jet-valued inputs. Built-in families supply closures; user charts come
 * from parsed expressions; conformal maps post-compose.
 */
struct ImmersionSpec {
    std::string name;
    int n = 0;  // intrinsic dimension
    int m = 0;  // ambient dimension
    Box domain;
    ChartFn chart;

    // Normal-completion pivot order (ambient indices), frozen per spec at the
    // domain center so frames vary smoothly over a connected sample run.
    std::vector<int> normal_pivots;

    int codim() const { return m - n; }
};

/// Highest chart-jet order the engine evaluates (order 5 feeds psi-field
/// derivatives; the public jet_eval contract stays at 4).
inline constexpr int kMaxChartOrder = 5;

inline std::vector<Jet> make_variable_jets(const VectorXd& x, int order) {
    auto sp = JetSpace::get(static_cast<int>(x.size()), kMaxChartOrder);
    std::vector<Jet> xs;
    xs.reserve(static_cast<size_t>(x.size()));
    for (int i = 0; i < x.size(); ++i) xs.push_back(Jet::variable(sp, i, x[i], order));
    return xs;
}

/// Evaluate the chart at a point on variable jets of the given order, with
/// domain and finiteness checks. Errors carry chart and point context.
inline std::vector<Jet> eval_chart(const ImmersionSpec& spec, const VectorXd& x, int order) {
    if (x.size() != spec.n) throw DomainError(spec.name + ": point dimension mismatch");
    if (!spec.domain.contains(x)) {
        std::ostringstream os;
        os << spec.name << ": point (";
        for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
        os << ") outside the declared domain";
        throw DomainError(os.str());
    }
    auto out = spec.chart(make_variable_jets(x, order));
    if (static_cast<int>(out.size()) != spec.m)
        throw NonFiniteError(spec.name + ": chart produced wrong ambient dimension");
    for (const auto& j : out) {
        if (!j.finite()) {
            std::ostringstream os;
            os << spec.name << ": non-finite chart jet at (";
            for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
            os << ")";
            throw NonFiniteError(os.str());
        }
    }
    return out;
}

/// Chart from per-component expression strings over x1..xn.
inline ImmersionSpec chart_from_expressions(const std::string& name, int n,
                                            const std::vector<std::string>& comps,
                                            const Box& domain,
                                            const expr::Bindings& consts = {}) {
    if (static_cast<int>(comps.size()) <= n)
        throw ConfigError("custom chart needs positive codimension (m > n)");
    std::vector<std::string> const_names;
    for (const auto& [k, v] : consts) const_names.push_back(k);
    std::vector<expr::Expr> parsed;
    parsed.reserve(comps.size());
    for (const auto& c : comps) parsed.push_back(expr::Expr::parse(c, n, const_names));

    ImmersionSpec spec;
    spec.name = name;
    spec.n = n;
    spec.m = static_cast<int>(comps.size());
    spec.domain = domain;
    spec.chart = [parsed, consts](const std::vector<Jet>& xs) {
        std::vector<Jet> out;
        out.reserve(parsed.size());
        for (const auto& e : parsed) out.push_back(e.eval_jet(xs, consts));
        return out;
    };
    return spec;
}

// ---------------------------------------------------------------------------
// Conformal maps between space-form models, applied as chart post-compositions.
// ---------------------------------------------------------------------------

enum class ConformalMapTag { Sigma, Tau, InverseSigma, ThetaCone, ThetaRot };

struct ConformalMapParams {
    // ThetaCone: input split (p+2 | n-1); ThetaRot: input split (p+1 | n's sphere block)
    int split = 0;
};

/// sigma: R^m -> S^m subset R^{m+1}, u |-> ((1-|u|^2)/(1+|u|^2), 2u/(1+|u|^2)).
inline std::vector<Jet> map_sigma(const std::vector<Jet>& u) {
    Jet n2 = u[0] * u[0];
    for (size_t i = 1; i < u.size(); ++i) n2 += u[i] * u[i];
    Jet denom = 1.0 + n2;
    std::vector<Jet> out;
    out.reserve(u.size() + 1);
    out.push_back((1.0 - n2) / denom);
    for (const auto& c : u) out.push_back(2.0 * c / denom);
    return out;
}

/// tau: hyperboloid H^m -> upper hemisphere, (y0, y1) |-> (1/y0, y1/y0).
inline std::vector<Jet> map_tau(const std::vector<Jet>& y) {
    if (!(y[0].value() > 0.0)) throw EvalDomainError("tau: first coordinate must be positive");
    std::vector<Jet> out;
    out.reserve(y.size());
    out.push_back(1.0 / y[0]);
    for (size_t i = 1; i < y.size(); ++i) out.push_back(y[i] / y[0]);
    return out;
}

/// Stereographic projection back to R^m from the pole (-1, 0...): y |-> y1/(1+y0).
inline std::vector<Jet> map_inverse_sigma(const std::vector<Jet>& y) {
    Jet denom = 1.0 + y[0];
    if (!(std::abs(denom.value()) > 1e-12))
        throw EvalDomainError("inverse_sigma: image point hits the projection pole");
    std::vector<Jet> out;
    out.reserve(y.size() - 1);
    for (size_t i = 1; i < y.size(); ++i) out.push_back(y[i] / denom);
    return out;
}

/// Theta for cones: (y in S^{p+1}, z in half-space) |-> (z1*y, z2..z_{n-1}).
inline std::vector<Jet> map_theta_cone(const std::vector<Jet>& in, int sphere_block) {
    const Jet& z1 = in[static_cast<size_t>(sphere_block)];
    if (!(z1.value() > 0.0)) throw EvalDomainError("theta_cone: z1 must be positive");
    std::vector<Jet> out;
    out.reserve(in.size() - 1);
    for (int a = 0; a < sphere_block; ++a) out.push_back(z1 * in[static_cast<size_t>(a)]);
    for (size_t a = static_cast<size_t>(sphere_block) + 1; a < in.size(); ++a) out.push_back(in[a]);
    return out;
}

/// Theta for rotational submanifolds: (z in H^{p+1}, y in S^{n-1}) |->
/// (z1..zp, z_{p+1}*y).
inline std::vector<Jet> map_theta_rot(const std::vector<Jet>& in, int half_space_block) {
    const Jet& zl = in[static_cast<size_t>(half_space_block) - 1];
    if (!(zl.value() > 0.0)) throw EvalDomainError("theta_rot: z_{p+1} must be positive");
    std::vector<Jet> out;
    out.reserve(in.size() - 1);
    for (int a = 0; a + 1 < half_space_block; ++a) out.push_back(in[static_cast<size_t>(a)]);
    for (size_t a = static_cast<size_t>(half_space_block); a < in.size(); ++a) out.push_back(zl * in[a]);
    return out;
}

inline int conformal_map_out_dim(ConformalMapTag tag, int in_dim) {
    switch (tag) {
        case ConformalMapTag::Sigma: return in_dim + 1;
        case ConformalMapTag::Tau: return in_dim;
        case ConformalMapTag::InverseSigma: return in_dim - 1;
        case ConformalMapTag::ThetaCone:
        case ConformalMapTag::ThetaRot: return in_dim - 1;
    }
    return in_dim;
}

/// Post-compose a chart with one of the model maps; jets flow through the
/// fused composition.
inline ImmersionSpec apply_conformal_map(const ImmersionSpec& spec, ConformalMapTag tag,
                                         const ConformalMapParams& params = {}) {
    ImmersionSpec out = spec;
    out.normal_pivots.clear();
    ChartFn inner = spec.chart;
    switch (tag) {
        case ConformalMapTag::Sigma:
            out.name = spec.name + "+sigma";
            out.chart = [inner](const std::vector<Jet>& xs) { return map_sigma(inner(xs)); };
            break;
        case ConformalMapTag::Tau:
            out.name = spec.name + "+tau";
            out.chart = [inner](const std::vector<Jet>& xs) { return map_tau(inner(xs)); };
            break;
        case ConformalMapTag::InverseSigma:
            out.name = spec.name + "+inv_sigma";
            out.chart = [inner](const std::vector<Jet>& xs) { return map_inverse_sigma(inner(xs)); };
            break;
        case ConformalMapTag::ThetaCone: {
            int split = params.split;
            out.name = spec.name + "+theta_cone";
            out.chart = [inner, split](const std::vector<Jet>& xs) {
                return map_theta_cone(inner(xs), split);
            };
            break;
        }
        case ConformalMapTag::ThetaRot: {
            int split = params.split;
            out.name = spec.name + "+theta_rot";
            out.chart = [inner, split](const std::vector<Jet>& xs) {
                return map_theta_rot(inner(xs), split);
            };
            break;
        }
    }
    out.m = conformal_map_out_dim(tag, spec.m);
    if (out.m <= out.n) throw ConfigError("conformal map would destroy positive codimension");
    return out;
}

/// Post-compose with a fixed ambient affine isometry or scaling y -> s*Q*y + t.
inline ImmersionSpec apply_ambient_affine(const ImmersionSpec& spec, double scale,
                                          const MatrixXd& Q, const VectorXd& t,
                                          const std::string& suffix = "+affine") {
    ImmersionSpec out = spec;
    out.normal_pivots.clear();
    out.name = spec.name + suffix;
    ChartFn inner = spec.chart;
    MatrixXd Qc = Q;
    VectorXd tc = t;
    out.chart = [inner, scale, Qc, tc](const std::vector<Jet>& xs) {
        auto y = inner(xs);
        std::vector<Jet> out_j;
        out_j.reserve(y.size());
        for (int r = 0; r < Qc.rows(); ++r) {
            Jet acc = Jet::constant(y[0].space(), tc[r], y[0].order());
            for (int c = 0; c < Qc.cols(); ++c)
                if (Qc(r, c) != 0.0) acc += (scale * Qc(r, c)) * y[static_cast<size_t>(c)];
            out_j.push_back(acc);
        }
        return out_j;
    };
    return out;
}

}  // namespace mgeo
