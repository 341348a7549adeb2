#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>
#include <vector>

#include "mgeo/errors.hpp"
#include "mgeo/expr.hpp"
#include "mgeo/jet.hpp"

namespace mgeo {

/// Ambient model the generating curve lives in.
enum class SpaceForm { Euclidean, Sphere, Hyperbolic };

inline const char* space_form_name(SpaceForm f) {
    switch (f) {
        case SpaceForm::Euclidean: return "euclidean";
        case SpaceForm::Sphere: return "sphere";
        case SpaceForm::Hyperbolic: return "hyperbolic";
    }
    return "?";
}

/// Prescribed first-curvature function of arc length.
struct KappaFn {
    enum class Kind { Exponential, InverseSqrt, Expression };
    Kind kind = Kind::Exponential;
    double b = 1.0, a = 0.0;    // exponential: kappa(s) = b e^{a s}, b > 0
    double c3 = 0.0, c4 = 1.0;  // inverse_sqrt: kappa(s) = 1/sqrt(c3 s + c4)
    expr::Expr ex;              // expression in s (variable x1 / alias s)

    static KappaFn exponential(double b_, double a_) {
        if (!(b_ > 0.0)) throw ConfigError("exponential curvature needs b > 0");
        KappaFn k;
        k.kind = Kind::Exponential;
        k.b = b_;
        k.a = a_;
        return k;
    }

    static KappaFn inverse_sqrt(double c3_, double c4_) {
        KappaFn k;
        k.kind = Kind::InverseSqrt;
        k.c3 = c3_;
        k.c4 = c4_;
        return k;
    }

    static KappaFn expression(const std::string& src) {
        KappaFn k;
        k.kind = Kind::Expression;
        k.ex = expr::Expr::parse(src, 1, {}, {{"s", 0}});
        return k;
    }

    double eval(double s) const {
        switch (kind) {
            case Kind::Exponential: return b * std::exp(a * s);
            case Kind::InverseSqrt: {
                double t = c3 * s + c4;
                if (!(t > 0.0))
                    throw EvalDomainError("inverse_sqrt curvature: argument nonpositive");
                return 1.0 / std::sqrt(t);
            }
            case Kind::Expression: return ex.eval({s});
        }
        return 0.0;
    }

    /// Closed-form derivative rules evaluated on a jet-valued arc length.
    Jet eval_jet(const Jet& s) const {
        switch (kind) {
            case Kind::Exponential: return b * exp(a * s);
            case Kind::InverseSqrt: {
                Jet t = c3 * s + c4;
                if (!(t.value() > 0.0))
                    throw EvalDomainError("inverse_sqrt curvature: argument nonpositive");
                return 1.0 / sqrt(t);
            }
            case Kind::Expression: return ex.eval_jet({s});
        }
        return s;
    }
};

/// A curve prescription: space form, curvature function, arc-length range.
struct CurveSpec {
    SpaceForm form = SpaceForm::Euclidean;
    KappaFn kappa;
    double s0 = 0.0, s1 = 1.0;

    void validate() const {
        if (!(s1 > s0)) throw ConfigError("curve range must be nonempty");
        for (int i = 0; i <= 64; ++i) {
            double s = s0 + (s1 - s0) * i / 64.0;
            if (!(kappa.eval(s) > 0.0))
                throw ConfigError("curvature must stay positive on the arc-length range");
        }
    }
};

/**
 * Closed-form solutions of the semi-parallelity reduction, keyed by the
 * branch selector c in {0, 1, -1}: c=0 or c=-1 give kappa = b1 e^{b2 s}
 * (curve in R^{p+1} resp. S^{p+1}); c=1 gives kappa = 1/sqrt(b3 s + b4)
 * (curve in the upper half-space model of H^{p+1}).
 */
inline CurveSpec closed_form_kappa(int c, double p1, double p2, double s0, double s1) {
    CurveSpec cs;
    cs.s0 = s0;
    cs.s1 = s1;
    if (c == 0 || c == -1) {
        cs.form = c == 0 ? SpaceForm::Euclidean : SpaceForm::Sphere;
        cs.kappa = KappaFn::exponential(p1, p2);
    } else if (c == 1) {
        cs.form = SpaceForm::Hyperbolic;
        if (!(p1 * s0 + p2 > 0.0) || !(p1 * s1 + p2 > 0.0)) {
            std::ostringstream os;
            os << "closed_form_kappa: b3*s+b4 must stay positive on [" << s0 << ", " << s1
               << "]";
            throw ConfigError(os.str());
        }
        cs.kappa = KappaFn::inverse_sqrt(p1, p2);
    } else {
        throw ConfigError("closed_form_kappa: c must be 0, 1 or -1");
    }
    cs.validate();
    return cs;
}

/**
 * Residual of the curvature reduction at arc length s, branch selected by
 * the curve's space form: kappa_ss/kappa^3 - kappa_s^2/kappa^4 for curves in
 * R^{p+1} or S^{p+1}, kappa_ss/kappa^3 - 3 kappa_s^2/kappa^4 for curves in
 * H^{p+1}.
 */
inline double ode_residual(const CurveSpec& cs, double s) {
    auto sp = JetSpace::get(1, 2);
    Jet sj = Jet::variable(sp, 0, s, 2);
    Jet kj = cs.kappa.eval_jet(sj);
    double k = kj.value();
    double ks = kj.partial({1});
    double kss = kj.partial({2});
    double r = kss / (k * k * k) - ks * ks / (k * k * k * k);
    if (cs.form == SpaceForm::Hyperbolic) r -= 2.0 * ks * ks / (k * k * k * k);
    return r;
}

/// Same residual keyed by the numeric branch selector used by the CLI.
inline double ode_residual_for_c(int c, const KappaFn& kappa, double s) {
    CurveSpec cs;
    cs.kappa = kappa;
    cs.form = c == 1 ? SpaceForm::Hyperbolic : (c == 0 ? SpaceForm::Euclidean : SpaceForm::Sphere);
    return ode_residual(cs, s);
}

/**
 * Unit-speed curve with prescribed first curvature and vanishing higher
 * curvatures (plane-curve convention), integrated by classic RK4 on the
 * frame system. Sphere states are re-projected onto the quadric and
 * re-orthonormalized each step. Jets at arbitrary arc length come from a
 * Taylor cascade of the frame ODE seeded at the nearest table node, never
 * from differentiating the integrator.
 *
 * Model coordinates: Euclidean -> (x, y) plane; Sphere -> unit S^2 in R^3;
 * Hyperbolic -> upper half-plane (x, y), y > 0 (metric (dx^2+dy^2)/y^2).
 */
class Curve {
public:
    Curve(const CurveSpec& cs, double step = 1e-3) : cs_(cs), h_(step) {
        if (!(h_ > 0.0)) throw ConfigError("curve integration step must be positive");
        cs_.validate();
        integrate_table();
        cascades_.resize(table_.size());
    }

    const CurveSpec& spec() const { return cs_; }
    int model_dim() const { return cs_.form == SpaceForm::Sphere ? 3 : 2; }
    double max_drift() const { return max_drift_; }

    /// Model coordinates of gamma at a jet-valued arc length.
    std::vector<Jet> eval(const Jet& s_jet) const {
        const double s = s_jet.value();
        const int node = nearest_node(s);
        const Cascade& casc = cascade_at(node);
        Jet delta = s_jet - node_s(node);
        const int dim = model_dim();
        std::vector<Jet> out;
        out.reserve(static_cast<size_t>(dim));
        for (int c = 0; c < dim; ++c) {
            // Horner on the cascade polynomial
            const auto& a = casc.coef[static_cast<size_t>(c)];
            Jet acc = Jet::constant(s_jet.space(), a.back(), s_jet.order());
            for (int k = static_cast<int>(a.size()) - 2; k >= 0; --k) {
                acc = acc * delta;
                acc += a[static_cast<size_t>(k)];
            }
            out.push_back(acc);
        }
        return out;
    }

    /// Plain model coordinates (convenience for tests).
    std::vector<double> eval_point(double s) const {
        auto sp = JetSpace::get(1, 0);
        Jet sj = Jet::variable(sp, 0, s, 0);
        auto jets = eval(sj);
        std::vector<double> out;
        for (const auto& j : jets) out.push_back(j.value());
        return out;
    }

    /// Curvature recomputed from second derivatives, per space-form formula.
    double recovered_curvature(double s) const {
        auto sp = JetSpace::get(1, 2);
        Jet sj = Jet::variable(sp, 0, s, 2);
        auto g = eval(sj);
        if (cs_.form == SpaceForm::Euclidean) {
            double xss = g[0].partial({2}), yss = g[1].partial({2});
            return std::hypot(xss, yss);
        }
        if (cs_.form == SpaceForm::Sphere) {
            double c2 = 0.0;
            for (int i = 0; i < 3; ++i) {
                double v = g[static_cast<size_t>(i)].partial({2}) + g[static_cast<size_t>(i)].value();
                c2 += v * v;
            }
            return std::sqrt(c2);
        }
        double x1 = g[0].partial({1}), y1 = g[1].partial({1});
        double x2 = g[0].partial({2}), y2 = g[1].partial({2});
        double y = g[1].value();
        double vx = x2 - 2.0 * x1 * y1 / y;
        double vy = y2 + (x1 * x1 - y1 * y1) / y;
        return std::hypot(vx, vy) / y;
    }

private:
    struct Cascade {
        // Taylor coefficients of the model coordinates around a node
        std::vector<std::vector<double>> coef;
    };

    static constexpr int kCascadeOrder = 12;

    int state_dim() const { return cs_.form == SpaceForm::Sphere ? 9 : 3; }

    // state layouts:
    //  Euclidean:  (x, y, phi),            x' = cos phi, y' = sin phi, phi' = kappa
    //  Sphere:     (gamma, T, N) in R^9,   gamma' = T, T' = kappa N - gamma, N' = -kappa T
    //  Hyperbolic: (x, y, phi),            x' = y cos phi, y' = y sin phi,
    //                                      phi' = kappa - cos phi
    template <class S>
    std::vector<S> rhs(const std::vector<S>& q, const S& kappa) const {
        std::vector<S> d;
        d.reserve(q.size());
        switch (cs_.form) {
            case SpaceForm::Euclidean:
                d.push_back(cos(q[2]));
                d.push_back(sin(q[2]));
                d.push_back(kappa);
                break;
            case SpaceForm::Hyperbolic:
                d.push_back(q[1] * cos(q[2]));
                d.push_back(q[1] * sin(q[2]));
                d.push_back(kappa - cos(q[2]));
                break;
            case SpaceForm::Sphere:
                for (int i = 0; i < 3; ++i) d.push_back(q[static_cast<size_t>(3 + i)]);
                for (int i = 0; i < 3; ++i)
                    d.push_back(kappa * q[static_cast<size_t>(6 + i)] - q[static_cast<size_t>(i)]);
                for (int i = 0; i < 3; ++i)
                    d.push_back(-(kappa * q[static_cast<size_t>(3 + i)]));
                break;
        }
        return d;
    }

    std::vector<double> rhs_d(const std::vector<double>& q, double s) const {
        double k = cs_.kappa.eval(s);
        std::vector<double> d;
        d.reserve(q.size());
        switch (cs_.form) {
            case SpaceForm::Euclidean:
                d = {std::cos(q[2]), std::sin(q[2]), k};
                break;
            case SpaceForm::Hyperbolic:
                d = {q[1] * std::cos(q[2]), q[1] * std::sin(q[2]), k - std::cos(q[2])};
                break;
            case SpaceForm::Sphere: {
                d.assign(9, 0.0);
                for (int i = 0; i < 3; ++i) d[static_cast<size_t>(i)] = q[static_cast<size_t>(3 + i)];
                for (int i = 0; i < 3; ++i)
                    d[static_cast<size_t>(3 + i)] = k * q[static_cast<size_t>(6 + i)] - q[static_cast<size_t>(i)];
                for (int i = 0; i < 3; ++i)
                    d[static_cast<size_t>(6 + i)] = -k * q[static_cast<size_t>(3 + i)];
                break;
            }
        }
        return d;
    }

    void project(std::vector<double>& q) const {
        if (cs_.form != SpaceForm::Sphere) {
            if (cs_.form == SpaceForm::Hyperbolic && !(q[1] > 0.0))
                throw NonFiniteError("hyperbolic curve left the upper half-plane");
            return;
        }
        auto norm3 = [](const double* v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); };
        double ng = norm3(&q[0]);
        for (int i = 0; i < 3; ++i) q[static_cast<size_t>(i)] /= ng;
        double gt = q[0] * q[3] + q[1] * q[4] + q[2] * q[5];
        for (int i = 0; i < 3; ++i) q[static_cast<size_t>(3 + i)] -= gt * q[static_cast<size_t>(i)];
        double nt = norm3(&q[3]);
        for (int i = 0; i < 3; ++i) q[static_cast<size_t>(3 + i)] /= nt;
        double gn = q[0] * q[6] + q[1] * q[7] + q[2] * q[8];
        double tn = q[3] * q[6] + q[4] * q[7] + q[5] * q[8];
        for (int i = 0; i < 3; ++i)
            q[static_cast<size_t>(6 + i)] -= gn * q[static_cast<size_t>(i)] + tn * q[static_cast<size_t>(3 + i)];
        double nn = norm3(&q[6]);
        for (int i = 0; i < 3; ++i) q[static_cast<size_t>(6 + i)] /= nn;

        double drift = std::max({std::abs(norm3(&q[0]) - 1.0), std::abs(norm3(&q[3]) - 1.0),
                                 std::abs(q[0] * q[3] + q[1] * q[4] + q[2] * q[5])});
        max_drift_ = std::max(max_drift_, drift);
        if (drift > 1e-9)
            throw CrossCheckError("curve constraint drift above 1e-9 after re-projection");
    }

    void integrate_table() {
        // pad two steps beyond both ends so nearest-node queries stay interior
        lo_ = cs_.s0 - 2.0 * h_;
        const double hi = cs_.s1 + 2.0 * h_;
        std::vector<double> q;
        switch (cs_.form) {
            case SpaceForm::Euclidean: q = {0.0, 0.0, 0.0}; break;
            case SpaceForm::Hyperbolic: q = {0.0, 1.0, 0.0}; break;
            case SpaceForm::Sphere: q = {1, 0, 0, 0, 1, 0, 0, 0, 1}; break;
        }
        // march from s0 down to lo, store, then reset and march up
        std::vector<std::vector<double>> down;
        std::vector<double> qd = q;
        for (double s = cs_.s0; s > lo_ - 0.5 * h_; s -= h_) {
            down.push_back(qd);
            qd = rk4_step(qd, s, -h_);
            project(qd);
        }
        // down[i] is the state at s0 - i*h; reverse into the table
        table_.assign(down.rbegin(), down.rend());
        lo_ = cs_.s0 - h_ * static_cast<double>(down.size() - 1);
        std::vector<double> qu = q;
        for (double s = cs_.s0; s + h_ < hi + 0.5 * h_; s += h_) {
            qu = rk4_step(qu, s, h_);
            project(qu);
            table_.push_back(qu);
        }
    }

    std::vector<double> rk4_step(const std::vector<double>& q, double s, double dt) const {
        auto add = [](const std::vector<double>& a, const std::vector<double>& b, double f) {
            std::vector<double> r = a;
            for (size_t i = 0; i < r.size(); ++i) r[i] += f * b[i];
            return r;
        };
        auto k1 = rhs_d(q, s);
        auto k2 = rhs_d(add(q, k1, dt / 2), s + dt / 2);
        auto k3 = rhs_d(add(q, k2, dt / 2), s + dt / 2);
        auto k4 = rhs_d(add(q, k3, dt), s + dt);
        std::vector<double> r = q;
        for (size_t i = 0; i < r.size(); ++i)
            r[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        return r;
    }

    double node_s(int node) const { return lo_ + h_ * node; }

    int nearest_node(double s) const {
        int node = static_cast<int>(std::lround((s - lo_) / h_));
        if (node < 0 || node >= static_cast<int>(table_.size())) {
            std::ostringstream os;
            os << "arc length " << s << " outside the integrated curve range";
            throw DomainError(os.str());
        }
        return node;
    }

    const Cascade& cascade_at(int node) const {
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (cascades_[static_cast<size_t>(node)]) return *cascades_[static_cast<size_t>(node)];
        }
        auto casc = std::make_unique<Cascade>(build_cascade(node));
        std::lock_guard<std::mutex> lock(mu_);
        auto& slot = cascades_[static_cast<size_t>(node)];
        if (!slot) slot = std::move(casc);
        return *slot;
    }

    /// Taylor coefficients of the exact solution through the node state,
    /// generated by iterating the frame ODE on univariate jets.
    Cascade build_cascade(int node) const {
        auto sp = JetSpace::get(1, kCascadeOrder);
        const double s0 = node_s(node);
        Jet sj = Jet::variable(sp, 0, s0, kCascadeOrder);
        Jet kj = cs_.kappa.eval_jet(sj);

        const int sd = state_dim();
        std::vector<Jet> state;
        state.reserve(static_cast<size_t>(sd));
        for (int c = 0; c < sd; ++c)
            state.push_back(Jet::constant(sp, table_[static_cast<size_t>(node)][static_cast<size_t>(c)],
                                          kCascadeOrder));
        for (int k = 0; k < kCascadeOrder; ++k) {
            auto dq = rhs<Jet>(state, kj);
            for (int c = 0; c < sd; ++c)
                state[static_cast<size_t>(c)].set_coeff(k + 1,
                                                        dq[static_cast<size_t>(c)].coeff(k) / (k + 1));
        }

        Cascade casc;
        const int dim = model_dim();
        casc.coef.resize(static_cast<size_t>(dim));
        for (int c = 0; c < dim; ++c) {
            auto& a = casc.coef[static_cast<size_t>(c)];
            a.resize(kCascadeOrder + 1);
            for (int k = 0; k <= kCascadeOrder; ++k) a[static_cast<size_t>(k)] = state[static_cast<size_t>(c)].coeff(k);
        }
        return casc;
    }

    CurveSpec cs_;
    double h_;
    double lo_ = 0.0;
    std::vector<std::vector<double>> table_;
    mutable std::vector<std::unique_ptr<Cascade>> cascades_;
    mutable std::mutex mu_;
    mutable double max_drift_ = 0.0;
};

using CurvePtr = std::shared_ptr<const Curve>;

}  // namespace mgeo
