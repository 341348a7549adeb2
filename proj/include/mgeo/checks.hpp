#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mgeo/analysis.hpp"

namespace mgeo::checks {

using mgeo::MatrixXd;
using mgeo::VectorXd;

/// Residuals are reported on tensors expressed in a g*-orthonormal frame and
/// scaled by max(1, tensor magnitude).

namespace detail {

/// Columns of E = L^{-T}: a g*-orthonormal basis in chart coordinates.
inline MatrixXd on_basis(const PointAnalysis& A) {
    return A.Lstar.transpose()
        .triangularView<Eigen::Upper>()
        .solve(MatrixXd::Identity(A.n, A.n));
}

inline MatrixXd mat_to_frame(const MatrixXd& M, const MatrixXd& E) {
    return E.transpose() * M * E;
}

/// Transform the tangent slots of a (slots x ... x p) tensor; the normal slot
/// (last) is already orthonormal.
inline Ten3 ten3_to_frame(const Ten3& T, const MatrixXd& E) {
    const int n = T.d0, n2 = T.d1, p = T.d2;
    Ten3 half(n, n2, p), out(n, n2, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n2; ++j)
            for (int a = 0; a < p; ++a) {
                double acc = 0.0;
                for (int u = 0; u < n; ++u) acc += T(u, j, a) * E(u, i);
                half(i, j, a) = acc;
            }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n2; ++j)
            for (int a = 0; a < p; ++a) {
                double acc = 0.0;
                for (int u = 0; u < n2; ++u) acc += half(i, u, a) * E(u, j);
                out(i, j, a) = acc;
            }
    return out;
}

inline Ten4 ten4_to_frame_t3(const Ten4& T, const MatrixXd& E) {
    // transform the first three (tangent) slots of an (n,n,n,p) tensor
    const int n = T.d0, p = T.d3;
    Ten4 t1(n, n, n, p), t2(n, n, n, p), t3(n, n, n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int a = 0; a < p; ++a) {
                    double acc = 0.0;
                    for (int u = 0; u < n; ++u) acc += T(u, j, k, a) * E(u, i);
                    t1(i, j, k, a) = acc;
                }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int a = 0; a < p; ++a) {
                    double acc = 0.0;
                    for (int u = 0; u < n; ++u) acc += t1(i, u, k, a) * E(u, j);
                    t2(i, j, k, a) = acc;
                }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int a = 0; a < p; ++a) {
                    double acc = 0.0;
                    for (int u = 0; u < n; ++u) acc += t2(i, j, u, a) * E(u, k);
                    t3(i, j, k, a) = acc;
                }
    return t3;
}

inline Ten4 riemann_to_frame(const Ten4& R, const MatrixXd& E) {
    const int n = R.d0;
    Ten4 cur = R;
    for (int slot = 0; slot < 4; ++slot) {
        Ten4 next(n, n, n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double acc = 0.0;
                        for (int u = 0; u < n; ++u) {
                            double v = slot == 0   ? cur(u, j, k, l)
                                       : slot == 1 ? cur(i, u, k, l)
                                       : slot == 2 ? cur(i, j, u, l)
                                                   : cur(i, j, k, u);
                            int idx = slot == 0 ? i : slot == 1 ? j : slot == 2 ? k : l;
                            acc += v * E(u, idx);
                        }
                        next(i, j, k, l) = acc;
                    }
        cur = next;
    }
    return cur;
}

inline double scaled(double residual, double magnitude) {
    return residual / std::max(1.0, magnitude);
}

}  // namespace detail

/// Conformal Gauss equation residual: curvature of g* against the beta/psi
/// right-hand side, maximized over an orthonormal 4-tuple.
inline double gauss_residual(const PointAnalysis& A) {
    const int n = A.n, p = A.p;
    MatrixXd E = detail::on_basis(A);
    Ten4 R = detail::riemann_to_frame(A.R_low, E);
    Ten3 b = detail::ten3_to_frame(A.beta, E);
    MatrixXd ps = detail::mat_to_frame(A.psi, E);

    double worst = 0.0, mag = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double rhs = 0.0;
                    for (int a = 0; a < p; ++a)
                        rhs += b(i, l, a) * b(j, k, a) - b(i, k, a) * b(j, l, a);
                    rhs += ps(i, l) * (j == k ? 1.0 : 0.0) + ps(j, k) * (i == l ? 1.0 : 0.0) -
                           ps(i, k) * (j == l ? 1.0 : 0.0) - ps(j, l) * (i == k ? 1.0 : 0.0);
                    mag = std::max({mag, std::abs(R(i, j, k, l)), std::abs(rhs)});
                    worst = std::max(worst, std::abs(R(i, j, k, l) - rhs));
                }
    return detail::scaled(worst, mag);
}

/// First conformal Codazzi equation: antisymmetry of the covariant
/// derivative of beta against omega((X wedge Y) Z).
inline double codazzi1_residual(const PointAnalysis& A) {
    const int n = A.n, p = A.p;
    MatrixXd E = detail::on_basis(A);
    Ten4 T = detail::ten4_to_frame_t3(A.nabla_beta, E);
    MatrixXd om = E.transpose() * A.omega;  // omega in the orthonormal tangent frame

    double worst = 0.0, mag = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int a = 0; a < p; ++a) {
                    double lhs = T(i, j, k, a) - T(j, i, k, a);
                    double rhs = (j == k ? om(i, a) : 0.0) - (i == k ? om(j, a) : 0.0);
                    mag = std::max({mag, std::abs(lhs), std::abs(rhs)});
                    worst = std::max(worst, std::abs(lhs - rhs));
                }
    return detail::scaled(worst, mag);
}

/// Second conformal Codazzi equation, on the Blaschke tensor; needs the
/// order-5 analysis (nabla_psi present).
inline double codazzi2_residual(const PointAnalysis& A) {
    if (!A.has_nabla_psi)
        throw EvalDomainError("codazzi2 residual needs an analysis with psi derivatives");
    const int n = A.n, p = A.p;
    MatrixXd E = detail::on_basis(A);
    Ten3 S = detail::ten3_to_frame(A.nabla_psi, E);  // (i, j, k) with k... tangent slots
    // nabla_psi is (n,n,n): transform all three tangent slots; reuse the
    // (n,n,p)-helper twice by viewing the last slot via explicit loop
    Ten3 Sf(n, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int u = 0; u < n; ++u) acc += S(i, j, u) * E(u, k);
                Sf(i, j, k) = acc;
            }
    Ten3 b = detail::ten3_to_frame(A.beta, E);
    MatrixXd om = E.transpose() * A.omega;

    double worst = 0.0, mag = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double lhs = Sf(i, j, k) - Sf(j, i, k);
                double rhs = 0.0;
                for (int a = 0; a < p; ++a)
                    rhs += om(j, a) * b(i, k, a) - om(i, a) * b(j, k, a);
                mag = std::max({mag, std::abs(lhs), std::abs(rhs)});
                worst = std::max(worst, std::abs(lhs - rhs));
            }
    return detail::scaled(worst, mag);
}

/// First conformal Ricci equation: d-omega against the beta/psi-hat pairing.
inline double ricci1_residual(const PointAnalysis& A) {
    const int n = A.n, p = A.p;
    MatrixXd E = detail::on_basis(A);
    Ten3 dom = detail::ten3_to_frame(A.domega, E);
    Ten3 b = detail::ten3_to_frame(A.beta, E);
    MatrixXd ps = detail::mat_to_frame(A.psi, E);  // equals psi-hat in the ON frame

    double worst = 0.0, mag = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < p; ++a) {
                double rhs = 0.0;
                for (int k = 0; k < n; ++k)
                    rhs += ps(i, k) * b(j, k, a) - ps(j, k) * b(i, k, a);
                double lhs = dom(i, j, a);
                mag = std::max({mag, std::abs(lhs), std::abs(rhs)});
                worst = std::max(worst, std::abs(lhs - rhs));
            }
    return detail::scaled(worst, mag);
}

/// Second conformal Ricci equation: normal curvature from the connection
/// derivative against the shape-operator commutator form.
inline double ricci2_residual(const PointAnalysis& A) {
    double worst = 0.0, mag = 0.0;
    for (size_t i = 0; i < A.R_perp.a.size(); ++i) {
        mag = std::max({mag, std::abs(A.R_perp.a[i]), std::abs(A.R_perp_comm.a[i])});
        worst = std::max(worst, std::abs(A.R_perp.a[i] - A.R_perp_comm.a[i]));
    }
    return detail::scaled(worst, mag);
}

/// Max component of the curvature action on beta over an orthonormal frame.
inline double semiparallel_tensor_residual(const PointAnalysis& A) {
    const int n = A.n, p = A.p;
    MatrixXd E = detail::on_basis(A);
    // transform the four tangent slots of (n,n,n,n,p)
    double worst = 0.0;
    Ten5 cur = A.semiparallel;
    for (int slot = 0; slot < 4; ++slot) {
        Ten5 next(n, n, n, n, p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        for (int a = 0; a < p; ++a) {
                            double acc = 0.0;
                            for (int u = 0; u < n; ++u) {
                                double v = slot == 0   ? cur(u, j, k, l, a)
                                           : slot == 1 ? cur(i, u, k, l, a)
                                           : slot == 2 ? cur(i, j, u, l, a)
                                                       : cur(i, j, k, u, a);
                                int idx = slot == 0 ? i : slot == 1 ? j : slot == 2 ? k : l;
                                acc += v * E(u, idx);
                            }
                            next(i, j, k, l, a) = acc;
                        }
        cur = next;
    }
    for (double v : cur.a) worst = std::max(worst, std::abs(v));
    return worst;
}

/// Dual-path agreement between the curvature action on beta and the
/// antisymmetrized second covariant derivative.
inline double semiparallel_dualpath_residual(const PointAnalysis& A) {
    double worst = 0.0, mag = 0.0;
    for (size_t i = 0; i < A.semiparallel.a.size(); ++i) {
        mag = std::max({mag, std::abs(A.semiparallel.a[i]), std::abs(A.nabla2_asym.a[i])});
        worst = std::max(worst, std::abs(A.semiparallel.a[i] - A.nabla2_asym.a[i]));
    }
    return detail::scaled(worst, mag);
}

/// Pairwise residuals <eta_i, eta_j> + theta_i + theta_j over distinct
/// principal-normal clusters.
inline double criterion_residual(const SpectralData& S) {
    double worst = 0.0;
    for (int i = 0; i < S.k; ++i)
        for (int j = i + 1; j < S.k; ++j) {
            double r = S.eta_bar[static_cast<size_t>(i)].dot(S.eta_bar[static_cast<size_t>(j)]) +
                       S.theta[static_cast<size_t>(i)] + S.theta[static_cast<size_t>(j)];
            worst = std::max(worst, std::abs(r));
        }
    return worst;
}

/// Max norm of the covariant derivative of beta over an orthonormal frame
/// (zero means Moebius parallel).
inline double parallel_residual(const PointAnalysis& A) {
    MatrixXd E = detail::on_basis(A);
    Ten4 T = detail::ten4_to_frame_t3(A.nabla_beta, E);
    double worst = 0.0;
    for (double v : T.a) worst = std::max(worst, std::abs(v));
    return worst;
}

inline double omega_residual(const PointAnalysis& A) {
    MatrixXd E = detail::on_basis(A);
    MatrixXd om = E.transpose() * A.omega;
    return om.cwiseAbs().maxCoeff();
}

struct IdentityResiduals {
    double trace_beta = 0.0;     // |trace_g* beta| per normal component
    double beta_norm = 0.0;      // | ||beta||^2_* - (n-1)/n |
    double trace_psi = 0.0;      // | tr psi - (n^2 s* + 1)/(2n) |
    double eta_sum = 0.0;        // | sum m_i eta_i |
    double eta_norm_sq_sum = 0.0;  // | sum m_i ||eta_i||^2 - (n-1)/n |
    std::optional<double> eta_closed_form;  // k = 2 only

    double max() const {
        double m = std::max({trace_beta, beta_norm, trace_psi, eta_sum, eta_norm_sq_sum});
        if (eta_closed_form) m = std::max(m, *eta_closed_form);
        return m;
    }
};

inline IdentityResiduals identity_residuals(const PointAnalysis& A) {
    const int n = A.n, p = A.p;
    IdentityResiduals r;
    MatrixXd gs_inv = A.g_star.inverse();

    for (int a = 0; a < p; ++a) {
        double tr = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) tr += gs_inv(i, j) * A.beta(i, j, a);
        r.trace_beta = std::max(r.trace_beta, std::abs(tr));
    }

    double norm2 = 0.0;
    for (int a = 0; a < p; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        norm2 += gs_inv(i, k) * gs_inv(j, l) * A.beta(i, j, a) * A.beta(k, l, a);
    r.beta_norm = std::abs(norm2 - (n - 1.0) / n);

    double trps = (gs_inv * A.psi).trace();
    r.trace_psi = std::abs(trps - (n * n * A.s_star + 1.0) / (2.0 * n));

    if (A.spectral) {
        const auto& S = *A.spectral;
        VectorXd sum = VectorXd::Zero(p);
        double nsum = 0.0;
        for (int c = 0; c < S.k; ++c) {
            sum += S.mult[static_cast<size_t>(c)] * S.eta_bar[static_cast<size_t>(c)];
            nsum += S.mult[static_cast<size_t>(c)] * S.eta_bar[static_cast<size_t>(c)].squaredNorm();
        }
        r.eta_sum = sum.norm();
        r.eta_norm_sq_sum = std::abs(nsum - (n - 1.0) / n);
        if (S.k == 2) {
            double worst = 0.0;
            for (int c = 0; c < 2; ++c) {
                double mi = S.mult[static_cast<size_t>(c)];
                double expect = std::sqrt((n - 1.0) * (n - mi) / (mi * static_cast<double>(n) * n));
                worst = std::max(worst,
                                 std::abs(S.eta_bar[static_cast<size_t>(c)].norm() - expect));
            }
            r.eta_closed_form = worst;
        }
    }
    return r;
}

/// Spectral-structure record: counts, case tag, orthogonality checks and the
/// isoparametric flag inputs.
struct ClassificationRecord {
    int k = 0;
    std::vector<int> mult;
    std::vector<double> h;
    int zero_h_count = 0;
    char case_tag = 'b';         // 'a' when exactly one h vanishes
    int vanishing_index = -1;
    bool lemma52_ok = true;      // at most one vanishing h
    bool k_le_p_plus_1 = true;   // checked in case (a)
    double orthogonality_residual = 0.0;  // case (a), k >= 3
    double omega_max = 0.0;
    double mixed_K_max = 0.0;    // max |K*| over cluster-crossing eigenframe pairs
    bool isoparametric = false;
    double eta_parallel_residual = -1.0;  // filled by the runner's probe when used
};

inline ClassificationRecord classify_spectrum(const PointAnalysis& A, double tol = 1e-6) {
    if (!A.spectral)
        throw NonCommutingError("classification needs spectral data: " + A.spectral_error);
    const auto& S = *A.spectral;
    ClassificationRecord rec;
    rec.k = S.k;
    rec.mult = S.mult;
    rec.h = S.h;
    for (size_t i = 0; i < S.h.size(); ++i)
        if (std::abs(S.h[i]) < tol) {
            rec.zero_h_count++;
            rec.vanishing_index = static_cast<int>(i);
        }
    rec.lemma52_ok = rec.zero_h_count <= 1;
    rec.case_tag = rec.zero_h_count == 1 ? 'a' : 'b';
    rec.omega_max = omega_residual(A);

    if (rec.case_tag == 'a' && S.k >= 3) {
        rec.k_le_p_plus_1 = S.k <= A.p + 1;
        const int v = rec.vanishing_index;
        double worst = 0.0;
        for (int i = 0; i < S.k; ++i) {
            if (i == v) continue;
            for (int j = i + 1; j < S.k; ++j) {
                if (j == v) continue;
                VectorXd di = S.eta_bar[static_cast<size_t>(i)] - S.eta_bar[static_cast<size_t>(v)];
                VectorXd dj = S.eta_bar[static_cast<size_t>(j)] - S.eta_bar[static_cast<size_t>(v)];
                worst = std::max(worst, std::abs(di.dot(dj)));
            }
        }
        rec.orthogonality_residual = worst;
    }

    if (A.K_star.size() > 0) {
        for (int i = 0; i < A.n; ++i)
            for (int j = 0; j < A.n; ++j) {
                if (i == j) continue;
                if (S.cluster_of[static_cast<size_t>(i)] == S.cluster_of[static_cast<size_t>(j)])
                    continue;
                rec.mixed_K_max = std::max(rec.mixed_K_max, std::abs(A.K_star(i, j)));
            }
    }

    bool all_mult_ge2 = true;
    for (int mclust : S.mult) all_mult_ge2 = all_mult_ge2 && mclust >= 2;
    rec.isoparametric = rec.omega_max < tol && all_mult_ge2;  // refined by the parallel probe
    return rec;
}

/**
 * Finite-difference probe for parallel Moebius principal normals:
 * nabla-perp of each eta_bar cluster along every chart direction, with
 * clusters matched by proximity across the step.
 */
inline double eta_parallel_probe(const ImmersionSpec& spec, const PointAnalysis& A,
                                 const AnalysisOptions& opt, double step = 1e-3) {
    if (!A.spectral) return std::numeric_limits<double>::infinity();
    const auto& S0 = *A.spectral;
    const int p = A.p;
    double worst = 0.0;
    for (int d = 0; d < A.n; ++d) {
        VectorXd xp = A.x, xm = A.x;
        xp[d] += step;
        xm[d] -= step;
        if (!spec.domain.contains(xp) || !spec.domain.contains(xm))
            return std::numeric_limits<double>::infinity();
        AnalysisOptions o2 = opt;
        o2.psi_derivatives = false;
        PointAnalysis Ap = analyze_point(spec, xp, o2);
        PointAnalysis Am = analyze_point(spec, xm, o2);
        if (!Ap.spectral || !Am.spectral) return std::numeric_limits<double>::infinity();
        if (Ap.spectral->k != S0.k || Am.spectral->k != S0.k)
            return std::numeric_limits<double>::infinity();
        for (int c = 0; c < S0.k; ++c) {
            auto nearest = [&](const SpectralData& S) {
                int best = 0;
                double bd = std::numeric_limits<double>::infinity();
                for (int cc = 0; cc < S.k; ++cc) {
                    double dd = (S.eta_bar[static_cast<size_t>(cc)] -
                                 S0.eta_bar[static_cast<size_t>(c)])
                                    .norm();
                    if (dd < bd) {
                        bd = dd;
                        best = cc;
                    }
                }
                return best;
            };
            VectorXd ep = Ap.spectral->eta_bar[static_cast<size_t>(nearest(*Ap.spectral))];
            VectorXd em = Am.spectral->eta_bar[static_cast<size_t>(nearest(*Am.spectral))];
            VectorXd deriv = (ep - em) / (2.0 * step);
            // connection correction: (nabla-perp_d eta)^b = d_d eta^b + eta^a A_d^{ab}
            for (int b = 0; b < p; ++b) {
                double corr = deriv[b];
                for (int a = 0; a < p; ++a)
                    corr += S0.eta_bar[static_cast<size_t>(c)][a] * A.Aperp(d, a, b);
                worst = std::max(worst, std::abs(corr));
            }
        }
    }
    return worst;
}

}  // namespace mgeo::checks
