#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "mgeo/extrinsic.hpp"
#include "mgeo/spectral.hpp"
#include "mgeo/tensors.hpp"

namespace mgeo {

struct AnalysisOptions {
    bool psi_derivatives = false;  // evaluate at order 5 and fill nabla_psi
    bool spectral = true;
    uint64_t seed = 42;
    double eps_umb = kUmbilicEps;
    double eps_flat = 1e-8;
    double eps_cluster = 1e-6;
    const std::vector<int>* pivot_override = nullptr;
};

/**
 * Everything the residual suite consumes at one chart point, in the chart
 * basis unless stated otherwise. The whole extrinsic pipeline runs on
 * jet-valued arithmetic, so every field derivative below is exact to
 * rounding: Hess* rho inside psi, the normal-connection coefficients, and
 * the second covariant derivative of beta all come from the same pass.
 */
struct PointAnalysis {
    int n = 0, p = 0, m = 0;
    VectorXd x;

    ExtrinsicData ext;

    // Moebius package
    MatrixXd g_star;
    Ten3 beta;      // (n, n, p)
    MatrixXd psi;   // (n, n)
    MatrixXd omega; // (n, p)
    std::vector<MatrixXd> B;  // shape operator per normal index, (1,1) in chart basis
    MatrixXd psi_hat;

    // curvature package
    Ten3 gamma_star;  // [k][i][j]
    Ten4 R_up;        // R(e_i,e_j)e_k = sum_m R_up(m,i,j,k) e_m
    Ten4 R_low;       // <R(e_i,e_j)e_k, e_l>_*
    double scal_star = 0.0;  // raw g*-trace of the curvature operator
    double s_star = 0.0;     // normalized scalar curvature scal*/(n(n-1))
    Ten3 Aperp;       // [i][a][b] = <d_i xi_a, xi_b>
    Ten4 R_perp;      // derivative route, [i][j][a][b]
    Ten4 R_perp_comm; // commutator route (conformal Ricci form)
    Ten4 nabla_beta;  // [i][j][k][a] = (nabla'_{e_i} beta)(e_j, e_k) . xi_a
    Ten5 semiparallel;  // [i][j][k][l][a]
    Ten5 nabla2_asym;   // antisymmetrized second covariant derivative
    Ten3 domega;        // [i][j][a]
    Ten3 nabla_psi;     // [i][j][k] = (nabla*_{e_i} psi)(e_j, e_k); order-5 runs only
    bool has_nabla_psi = false;

    MatrixXd Lstar;  // lower Cholesky factor of g_star

    std::optional<SpectralData> spectral;
    std::string spectral_error;
    MatrixXd K_star;  // sectional curvatures of eigenframe pairs (when spectral)
};

namespace detail {

inline MatrixXd jmat_values(const JMat& M) {
    MatrixXd r(M.rows, M.cols);
    for (int i = 0; i < M.rows; ++i)
        for (int j = 0; j < M.cols; ++j) r(i, j) = M(i, j).value();
    return r;
}

}  // namespace detail

inline PointAnalysis analyze_point(const ImmersionSpec& spec, const VectorXd& x,
                                   const AnalysisOptions& opt = {}) {
    const int order = opt.psi_derivatives ? 5 : 4;
    ExtrinsicJets E = compute_extrinsic(spec, x, order, opt.pivot_override, opt.eps_umb);
    const int n = E.n, p = E.p, m = E.m;

    PointAnalysis A;
    A.n = n;
    A.p = p;
    A.m = m;
    A.x = x;
    A.ext = extrinsic_values(E);

    const auto& sp = E.F[0].space();
    auto czero = [&](int ord) { return Jet::constant(sp, 0.0, ord); };

    // Moebius metric and second fundamental form
    JMat gs(n, n, czero(order - 2));
    std::vector<Jet> beta_j(static_cast<size_t>(n) * n * p, czero(order - 2));
    auto bj = [&](int i, int j, int a) -> Jet& {
        return beta_j[(static_cast<size_t>(i) * n + j) * p + a];
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            gs(i, j) = E.rho2 * E.g(i, j);
            for (int a = 0; a < p; ++a)
                bj(i, j, a) = E.rho * (E.al(i, j, a) - E.H[static_cast<size_t>(a)] * E.g(i, j));
        }
    JMat gs_inv = jinverse(gs);

    A.g_star = detail::jmat_values(gs);
    A.beta = Ten3(n, n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < p; ++a) A.beta(i, j, a) = bj(i, j, a).value();

    // Christoffel symbols of g*
    std::vector<Jet> gamma(static_cast<size_t>(n) * n * n, czero(order - 3));
    auto gm = [&](int k, int i, int j) -> Jet& {
        return gamma[(static_cast<size_t>(k) * n + i) * n + j];
    };
    {
        // dgs[k](i,j) = d_k g*_{ij}
        std::vector<JMat> dgs(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k) {
            dgs[static_cast<size_t>(k)] = JMat(n, n, czero(order - 3));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) dgs[static_cast<size_t>(k)](i, j) = gs(i, j).d(k);
        }
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    Jet acc = czero(order - 3);
                    for (int l = 0; l < n; ++l)
                        acc += gs_inv(k, l) *
                               (dgs[static_cast<size_t>(i)](l, j) + dgs[static_cast<size_t>(j)](i, l) -
                                dgs[static_cast<size_t>(l)](i, j));
                    gm(k, i, j) = 0.5 * acc;
                    if (j != i) gm(k, j, i) = gm(k, i, j);
                }
    }
    A.gamma_star = Ten3(n, n, n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A.gamma_star(k, i, j) = gm(k, i, j).value();

    // Curvature of g*: R(e_i,e_j)e_k = d_i Gamma^m_{jk} - d_j Gamma^m_{ik}
    //                  + Gamma^m_{il} Gamma^l_{jk} - Gamma^m_{jl} Gamma^l_{ik}
    A.R_up = Ten4(n, n, n, n);
    A.R_low = Ten4(n, n, n, n);
    {
        Ten4 dgamma(n, n, n, n);  // [i][m][j][k] = d_i Gamma^m_{jk}
        for (int i = 0; i < n; ++i)
            for (int mm = 0; mm < n; ++mm)
                for (int j = 0; j < n; ++j)
                    for (int k = j; k < n; ++k) {
                        double v = gm(mm, j, k).d(i).value();
                        dgamma(i, mm, j, k) = v;
                        dgamma(i, mm, k, j) = v;
                    }
        for (int mm = 0; mm < n; ++mm)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) {
                        double acc = dgamma(i, mm, j, k) - dgamma(j, mm, i, k);
                        for (int l = 0; l < n; ++l)
                            acc += A.gamma_star(mm, i, l) * A.gamma_star(l, j, k) -
                                   A.gamma_star(mm, j, l) * A.gamma_star(l, i, k);
                        A.R_up(mm, i, j, k) = acc;
                    }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double acc = 0.0;
                        for (int mm = 0; mm < n; ++mm) acc += A.g_star(mm, l) * A.R_up(mm, i, j, k);
                        A.R_low(i, j, k, l) = acc;
                    }
    }

    // rho as a field: grad* rho and Hess* rho feed the Blaschke tensor
    std::vector<Jet> drho(static_cast<size_t>(n), czero(order - 3));
    for (int i = 0; i < n; ++i) drho[static_cast<size_t>(i)] = E.rho.d(i);
    std::vector<Jet> grad_star(static_cast<size_t>(n), czero(order - 3));
    for (int i = 0; i < n; ++i) {
        Jet acc = czero(order - 3);
        for (int j = 0; j < n; ++j) acc += gs_inv(i, j) * drho[static_cast<size_t>(j)];
        grad_star[static_cast<size_t>(i)] = acc;
    }
    Jet grad_norm2 = czero(order - 3);
    for (int i = 0; i < n; ++i) grad_norm2 += drho[static_cast<size_t>(i)] * grad_star[static_cast<size_t>(i)];

    std::vector<Jet> psi_j(static_cast<size_t>(n) * n, czero(order - 4));
    auto pj = [&](int i, int j) -> Jet& { return psi_j[static_cast<size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Jet hess = E.rho.d(i).d(j);
            for (int k = 0; k < n; ++k) hess -= gm(k, i, j) * drho[static_cast<size_t>(k)];
            Jet bh = czero(order - 2);
            for (int a = 0; a < p; ++a) bh += bj(i, j, a) * E.H[static_cast<size_t>(a)];
            Jet val = bh / E.rho + (0.5 / E.rho2) * (grad_norm2 + E.norm_H2) * gs(i, j) -
                      hess / E.rho;
            pj(i, j) = val;
            if (j != i) pj(j, i) = val;
        }
    A.psi.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A.psi(i, j) = pj(i, j).value();

    if (opt.psi_derivatives) {
        A.nabla_psi = Ten3(n, n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double acc = pj(j, k).d(i).value();
                    for (int l = 0; l < n; ++l)
                        acc -= A.gamma_star(l, i, j) * A.psi(l, k) +
                               A.gamma_star(l, i, k) * A.psi(j, l);
                    A.nabla_psi(i, j, k) = acc;
                }
        A.has_nabla_psi = true;
    }

    // normal connection coefficients A_i^{ab} = <d_i xi_a, xi_b>
    std::vector<Jet> Aj(static_cast<size_t>(n) * p * p, czero(order - 2));
    auto aj = [&](int i, int a, int b) -> Jet& {
        return Aj[(static_cast<size_t>(i) * p + a) * p + b];
    };
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a) {
            JVec dxi(static_cast<size_t>(m), czero(order - 2));
            for (int c = 0; c < m; ++c)
                dxi[static_cast<size_t>(c)] = E.normal[static_cast<size_t>(a)][static_cast<size_t>(c)].d(i);
            for (int b = 0; b < p; ++b) aj(i, a, b) = jdot(dxi, E.normal[static_cast<size_t>(b)]);
        }
    A.Aperp = Ten3(n, p, p);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) A.Aperp(i, a, b) = aj(i, a, b).value();

    // Moebius form omega(e_i) = -(1/rho)(nabla-perp_i H + beta(e_i, grad* rho))
    std::vector<Jet> omega_j(static_cast<size_t>(n) * p, czero(order - 3));
    auto oj = [&](int i, int b) -> Jet& { return omega_j[static_cast<size_t>(i) * p + b]; };
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < p; ++b) {
            Jet acc = E.H[static_cast<size_t>(b)].d(i);
            for (int a = 0; a < p; ++a) acc += E.H[static_cast<size_t>(a)] * aj(i, a, b);
            for (int j = 0; j < n; ++j) acc += grad_star[static_cast<size_t>(j)] * bj(i, j, b);
            oj(i, b) = -(acc / E.rho);
        }
    A.omega.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < p; ++b) A.omega(i, b) = oj(i, b).value();

    // exterior covariant derivative of omega
    A.domega = Ten3(n, n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int b = 0; b < p; ++b) {
                double acc = oj(j, b).d(i).value() - oj(i, b).d(j).value();
                for (int a = 0; a < p; ++a)
                    acc += A.omega(j, a) * A.Aperp(i, a, b) - A.omega(i, a) * A.Aperp(j, a, b);
                A.domega(i, j, b) = acc;
            }

    // covariant derivative of beta under the combined connection
    std::vector<Jet> Tj(static_cast<size_t>(n) * n * n * p, czero(order - 3));
    auto tj = [&](int i, int j, int k, int a) -> Jet& {
        return Tj[((static_cast<size_t>(i) * n + j) * n + k) * p + a];
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k)
                for (int a = 0; a < p; ++a) {
                    Jet acc = bj(j, k, a).d(i);
                    for (int c = 0; c < p; ++c) acc += bj(j, k, c) * aj(i, c, a);
                    for (int l = 0; l < n; ++l)
                        acc -= gm(l, i, j) * bj(l, k, a) + gm(l, i, k) * bj(j, l, a);
                    tj(i, j, k, a) = acc;
                    if (k != j) tj(i, k, j, a) = acc;
                }
    A.nabla_beta = Ten4(n, n, n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int a = 0; a < p; ++a) A.nabla_beta(i, j, k, a) = tj(i, j, k, a).value();

    // normal curvature, by differentiation and by the commutator form
    A.R_perp = Ten4(n, n, p, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < p; ++a)
                for (int b = 0; b < p; ++b) {
                    double acc = aj(j, a, b).d(i).value() - aj(i, a, b).d(j).value();
                    for (int c = 0; c < p; ++c)
                        acc += A.Aperp(j, a, c) * A.Aperp(i, c, b) -
                               A.Aperp(i, a, c) * A.Aperp(j, c, b);
                    A.R_perp(i, j, a, b) = acc;
                }

    MatrixXd gs_inv_val = detail::jmat_values(gs_inv);
    A.B.assign(static_cast<size_t>(p), MatrixXd::Zero(n, n));
    for (int a = 0; a < p; ++a) {
        MatrixXd beta_a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) beta_a(i, j) = A.beta(i, j, a);
        A.B[static_cast<size_t>(a)] = gs_inv_val * beta_a;
    }
    A.psi_hat = gs_inv_val * A.psi;

    A.R_perp_comm = Ten4(n, n, p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            MatrixXd comm = A.B[static_cast<size_t>(a)] * A.B[static_cast<size_t>(b)] -
                            A.B[static_cast<size_t>(b)] * A.B[static_cast<size_t>(a)];
            MatrixXd low = A.g_star * comm;  // <comm e_i, e_j>_* = (g* comm)(j, i)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) A.R_perp_comm(i, j, a, b) = low(j, i);
        }

    // second covariant derivative of beta, antisymmetrized, and the direct
    // curvature action on beta; the two must agree identically
    A.nabla2_asym = Ten5(n, n, n, n, p);
    A.semiparallel = Ten5(n, n, n, n, p);
    {
        Ten5 n2(n, n, n, n, p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = k; l < n; ++l)
                        for (int a = 0; a < p; ++a) {
                            double acc = tj(j, k, l, a).d(i).value();
                            for (int c = 0; c < p; ++c)
                                acc += A.nabla_beta(j, k, l, c) * A.Aperp(i, c, a);
                            for (int mmm = 0; mmm < n; ++mmm)
                                acc -= A.gamma_star(mmm, i, j) * A.nabla_beta(mmm, k, l, a) +
                                       A.gamma_star(mmm, i, k) * A.nabla_beta(j, mmm, l, a) +
                                       A.gamma_star(mmm, i, l) * A.nabla_beta(j, k, mmm, a);
                            n2(i, j, k, l, a) = acc;
                            n2(i, j, l, k, a) = acc;
                        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        for (int a = 0; a < p; ++a) {
                            A.nabla2_asym(i, j, k, l, a) = n2(i, j, k, l, a) - n2(j, i, k, l, a);
                            double acc = 0.0;
                            for (int c = 0; c < p; ++c)
                                acc += A.R_perp(i, j, c, a) * A.beta(k, l, c);
                            for (int mmm = 0; mmm < n; ++mmm)
                                acc -= A.R_up(mmm, i, j, k) * A.beta(mmm, l, a) +
                                       A.R_up(mmm, i, j, l) * A.beta(k, mmm, a);
                            A.semiparallel(i, j, k, l, a) = acc;
                        }
    }

    // scalar curvature in a g*-orthonormal basis
    Eigen::LLT<MatrixXd> llt(A.g_star);
    if (llt.info() != Eigen::Success)
        throw DegenerateMetricError(spec.name + ": Moebius metric not positive definite");
    A.Lstar = llt.matrixL();
    {
        MatrixXd Einv = A.Lstar.transpose().inverse();  // columns: ON basis in chart coords
        double scal = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                // K(E_i, E_j) = <R(E_i,E_j)E_j, E_i>_*
                double acc = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        for (int c = 0; c < n; ++c)
                            for (int d = 0; d < n; ++d)
                                acc += A.R_low(a, b, c, d) * Einv(a, i) * Einv(b, j) * Einv(c, j) *
                                       Einv(d, i);
                scal += acc;
            }
        A.scal_star = scal;
        A.s_star = scal / (static_cast<double>(n) * (n - 1));
    }

    if (opt.spectral) {
        try {
            A.spectral = principal_normals_impl(n, p, A.beta, A.psi, A.g_star, A.Lstar,
                                                opt.eps_flat, opt.eps_cluster, opt.seed);
            // sectional curvatures over eigenframe pairs
            const MatrixXd& X = A.spectral->eigenframe;
            A.K_star = MatrixXd::Zero(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    double acc = 0.0;
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b)
                            for (int c = 0; c < n; ++c)
                                for (int d = 0; d < n; ++d)
                                    acc += A.R_low(a, b, c, d) * X(a, i) * X(b, j) * X(c, j) * X(d, i);
                    A.K_star(i, j) = acc;
                }
        } catch (const Error& e) {
            A.spectral_error = e.what();
        }
    }

    return A;
}

}  // namespace mgeo
