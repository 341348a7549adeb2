#pragma once

#include <Eigen/Dense>
#include <sstream>
#include <vector>

#include "mgeo/chart.hpp"
#include "mgeo/linalg.hpp"
#include "mgeo/tensors.hpp"

namespace mgeo {

/// Umbilic threshold on rho^2; below it beta and 1/rho lose all significance.
inline constexpr double kUmbilicEps = 1e-10;
/// Immersion check threshold on the smallest eigenvalue of g.
inline constexpr double kMetricEps = 1e-10;

/**
 * First-order extrinsic package at a point, carried on jets so that every
 * downstream tensor can be differentiated as a field: induced metric,
 * orthonormal tangent/normal frames (Gram-Schmidt, frozen pivot order),
 * second fundamental form, mean curvature and the conformal factor rho.
 */
struct ExtrinsicJets {
    int n = 0, m = 0, p = 0, order = 0;
    std::vector<Jet> F;               // chart components
    std::vector<JVec> dF;             // dF[i] = ambient vector of order-1 jets
    JMat g, g_inv;
    std::vector<JVec> tangent;        // n orthonormal ambient vectors
    std::vector<JVec> normal;         // p orthonormal ambient vectors
    std::vector<Jet> alpha;           // (n,n,p) flattened, chart basis against normal frame
    JVec H;                           // p components
    Jet norm_alpha2, norm_H2, rho2, rho;

    Jet& al(int i, int j, int a) { return alpha[(static_cast<size_t>(i) * n + j) * p + a]; }
    const Jet& al(int i, int j, int a) const {
        return alpha[(static_cast<size_t>(i) * n + j) * p + a];
    }
};

/// g_ij = <d_i f, d_j f> from first-order jets; errors when the smallest
/// eigenvalue drops below the immersion threshold.
inline JMat induced_metric(const std::vector<JVec>& dF) {
    const int n = static_cast<int>(dF.size());
    JMat g(n, n, dF[0][0]);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            g(i, j) = jdot(dF[static_cast<size_t>(i)], dF[static_cast<size_t>(j)]);
            if (j != i) g(j, i) = g(i, j);
        }
    Eigen::MatrixXd gv(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gv(i, j) = g(i, j).value();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gv);
    if (es.eigenvalues()[0] < kMetricEps) {
        std::ostringstream os;
        os << "degenerate induced metric (min eigenvalue " << es.eigenvalues()[0]
           << "): immersion fails at this point";
        throw DegenerateMetricError(os.str());
    }
    return g;
}

/**
 * Normal-completion pivot order at the domain's center point:
 * largest-residual-first over the ambient canonical basis, then frozen for
 * the whole run so the normal frame varies smoothly over the chart.
 */
inline std::vector<int> compute_normal_pivots(const ImmersionSpec& spec) {
    const VectorXd c = spec.domain.center();
    auto F = eval_chart(spec, c, 1);
    std::vector<JVec> dF(static_cast<size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) {
        JVec v;
        v.reserve(static_cast<size_t>(spec.m));
        for (int a = 0; a < spec.m; ++a) v.push_back(F[static_cast<size_t>(a)].d(i));
        dF[static_cast<size_t>(i)] = v;
    }
    // value-level Gram-Schmidt of the tangent space
    MatrixXd T(spec.m, spec.n);
    for (int i = 0; i < spec.n; ++i)
        for (int a = 0; a < spec.m; ++a) T(a, i) = dF[static_cast<size_t>(i)][static_cast<size_t>(a)].value();
    Eigen::HouseholderQR<MatrixXd> qr(T);
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(spec.m, spec.n);

    MatrixXd resid = MatrixXd::Identity(spec.m, spec.m) - Q * Q.transpose();
    std::vector<int> pivots;
    std::vector<VectorXd> chosen;
    const int p = spec.m - spec.n;
    for (int pick = 0; pick < p; ++pick) {
        int best = -1;
        double best_norm = 0.0;
        for (int a = 0; a < spec.m; ++a) {
            if (std::find(pivots.begin(), pivots.end(), a) != pivots.end()) continue;
            VectorXd v = resid.col(a);
            for (const auto& q : chosen) v -= v.dot(q) * q;
            double nv = v.norm();
            if (nv > best_norm + 1e-15) {
                best_norm = nv;
                best = a;
            }
        }
        if (best < 0 || best_norm < 1e-8)
            throw RankDeficiencyError(spec.name + ": normal completion is rank deficient");
        VectorXd v = resid.col(best);
        for (const auto& q : chosen) v -= v.dot(q) * q;
        chosen.push_back(v.normalized());
        pivots.push_back(best);
    }
    return pivots;
}

/// Finalize a spec: freeze the normal pivot order at the domain center.
inline ImmersionSpec finalize_spec(ImmersionSpec spec) {
    spec.normal_pivots = compute_normal_pivots(spec);
    return spec;
}

/// Everything up to alpha and H (no conformal factor); usable at umbilic
/// points, where rho and the Moebius package are undefined.
inline ExtrinsicJets compute_extrinsic_raw(const ImmersionSpec& spec, const VectorXd& x, int order,
                                           const std::vector<int>* pivot_override = nullptr) {
    if (spec.n < 2) throw ConfigError(spec.name + ": intrinsic dimension must be >= 2");
    ExtrinsicJets E;
    E.n = spec.n;
    E.m = spec.m;
    E.p = spec.m - spec.n;
    E.order = order;
    E.F = eval_chart(spec, x, order);

    E.dF.resize(static_cast<size_t>(E.n));
    for (int i = 0; i < E.n; ++i) {
        JVec v;
        v.reserve(static_cast<size_t>(E.m));
        for (int a = 0; a < E.m; ++a) v.push_back(E.F[static_cast<size_t>(a)].d(i));
        E.dF[static_cast<size_t>(i)] = v;
    }

    E.g = induced_metric(E.dF);
    E.g_inv = jinverse(E.g);
    E.tangent = gram_schmidt(E.dF, {});

    std::vector<int> pivots =
        pivot_override ? *pivot_override
                       : (!spec.normal_pivots.empty() ? spec.normal_pivots
                                                      : compute_normal_pivots(spec));
    if (static_cast<int>(pivots.size()) != E.p)
        throw RankDeficiencyError(spec.name + ": pivot order has wrong length");

    const auto& sp = E.F[0].space();
    std::vector<JVec> cands;
    for (int a : pivots) {
        JVec e(static_cast<size_t>(E.m), Jet::constant(sp, 0.0, order - 1));
        e[static_cast<size_t>(a)] = Jet::constant(sp, 1.0, order - 1);
        cands.push_back(std::move(e));
    }
    try {
        E.normal = gram_schmidt(cands, E.tangent, 1e-8);
    } catch (const RankDeficiencyError&) {
        throw RankDeficiencyError(spec.name + ": frozen pivot order degenerates at this point");
    }

    // alpha(d_i, d_j) . xi_a = <d_i d_j f, xi_a>
    E.alpha.assign(static_cast<size_t>(E.n) * E.n * E.p, Jet());
    for (int i = 0; i < E.n; ++i) {
        for (int j = i; j < E.n; ++j) {
            JVec d2(static_cast<size_t>(E.m), Jet());
            for (int a = 0; a < E.m; ++a)
                d2[static_cast<size_t>(a)] = E.dF[static_cast<size_t>(i)][static_cast<size_t>(a)].d(j);
            for (int a = 0; a < E.p; ++a) {
                Jet v = jdot(d2, E.normal[static_cast<size_t>(a)]);
                E.al(i, j, a) = v;
                if (j != i) E.al(j, i, a) = v;
            }
        }
    }

    // H = (1/n) trace_g(alpha)
    E.H.assign(static_cast<size_t>(E.p), Jet::constant(sp, 0.0, order - 2));
    for (int a = 0; a < E.p; ++a) {
        Jet acc = Jet::constant(sp, 0.0, order - 2);
        for (int i = 0; i < E.n; ++i)
            for (int j = 0; j < E.n; ++j) acc += E.g_inv(i, j) * E.al(i, j, a);
        E.H[static_cast<size_t>(a)] = acc / static_cast<double>(E.n);
    }

    // ||alpha||^2 in a g-orthonormal basis and ||H||^2
    Jet na2 = Jet::constant(sp, 0.0, order - 2);
    for (int a = 0; a < E.p; ++a)
        for (int i = 0; i < E.n; ++i)
            for (int j = 0; j < E.n; ++j)
                for (int k = 0; k < E.n; ++k)
                    for (int l = 0; l < E.n; ++l)
                        na2 += E.g_inv(i, k) * E.g_inv(j, l) * E.al(i, j, a) * E.al(k, l, a);
    E.norm_alpha2 = na2;
    Jet nh2 = E.H[0] * E.H[0];
    for (int a = 1; a < E.p; ++a) nh2 += E.H[static_cast<size_t>(a)] * E.H[static_cast<size_t>(a)];
    E.norm_H2 = nh2;

    E.rho2 = (static_cast<double>(E.n) / (E.n - 1.0)) * (E.norm_alpha2 - static_cast<double>(E.n) * E.norm_H2);
    return E;
}

inline ExtrinsicJets compute_extrinsic(const ImmersionSpec& spec, const VectorXd& x, int order,
                                       const std::vector<int>* pivot_override = nullptr,
                                       double eps_umb = kUmbilicEps) {
    ExtrinsicJets E = compute_extrinsic_raw(spec, x, order, pivot_override);
    if (E.rho2.value() < eps_umb) {
        std::ostringstream os;
        os << spec.name << ": umbilic point (rho^2 = " << E.rho2.value() << " < " << eps_umb
           << "); Moebius invariants are undefined here";
        throw UmbilicError(os.str());
    }
    E.rho = sqrt(E.rho2);
    return E;
}

/// Value-level extrinsic package (the spec's ExtrinsicData carrier).
struct ExtrinsicData {
    MatrixXd g;
    std::vector<VectorXd> tangent_frame, normal_frame;
    Ten3 alpha;  // (n, n, p)
    VectorXd H;
    double rho = 0.0;
};

inline ExtrinsicData extrinsic_values(const ExtrinsicJets& E) {
    ExtrinsicData d;
    d.g.resize(E.n, E.n);
    for (int i = 0; i < E.n; ++i)
        for (int j = 0; j < E.n; ++j) d.g(i, j) = E.g(i, j).value();
    auto tovec = [&](const JVec& v) {
        VectorXd r(E.m);
        for (int a = 0; a < E.m; ++a) r[a] = v[static_cast<size_t>(a)].value();
        return r;
    };
    for (const auto& t : E.tangent) d.tangent_frame.push_back(tovec(t));
    for (const auto& q : E.normal) d.normal_frame.push_back(tovec(q));
    d.alpha = Ten3(E.n, E.n, E.p);
    for (int i = 0; i < E.n; ++i)
        for (int j = 0; j < E.n; ++j)
            for (int a = 0; a < E.p; ++a) d.alpha(i, j, a) = E.al(i, j, a).value();
    d.H.resize(E.p);
    for (int a = 0; a < E.p; ++a) d.H[a] = E.H[static_cast<size_t>(a)].value();
    d.rho = E.rho.value();
    return d;
}

/// rho = sqrt(n/(n-1) (||alpha||^2 - n ||H||^2)); umbilic-point error below
/// threshold. Exposed for direct use; the jet pipeline computes it inline.
inline double conformal_factor(const ExtrinsicData& d) {
    const int n = static_cast<int>(d.g.rows());
    MatrixXd ginv = d.g.inverse();
    double na2 = 0.0;
    const int p = static_cast<int>(d.H.size());
    for (int a = 0; a < p; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        na2 += ginv(i, k) * ginv(j, l) * d.alpha(i, j, a) * d.alpha(k, l, a);
    double rho2 = (n / (n - 1.0)) * (na2 - n * d.H.squaredNorm());
    if (rho2 < kUmbilicEps) throw UmbilicError("umbilic point: rho^2 below threshold");
    return std::sqrt(rho2);
}

}  // namespace mgeo
