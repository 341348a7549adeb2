#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "mgeo/errors.hpp"
#include "mgeo/tensors.hpp"

namespace mgeo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/**
 * Moebius principal normal data at a point: distinct beta-diagonal normal
 * vectors with their Blaschke eigenvalues, multiplicities and the joint
 * eigenframe. Clusters are keyed on the full normal vectors, not on
 * per-direction eigenvalues.
 */
struct SpectralData {
    int k = 0;
    std::vector<VectorXd> eta_bar;  // p-vector per cluster (normal-frame components)
    std::vector<double> theta;
    std::vector<int> mult;
    std::vector<double> h;  // ||eta_bar||^2 + 2 theta
    MatrixXd eigenframe;    // chart-basis columns, g*-orthonormal, grouped by cluster
    std::vector<int> cluster_of;
};

namespace detail {

inline void apply_givens(MatrixXd& M, int i, int j, double c, double s) {
    const int n = static_cast<int>(M.rows());
    for (int k = 0; k < n; ++k) {
        double mi = M(i, k), mj = M(j, k);
        M(i, k) = c * mi - s * mj;
        M(j, k) = s * mi + c * mj;
    }
    for (int k = 0; k < n; ++k) {
        double mi = M(k, i), mj = M(k, j);
        M(k, i) = c * mi - s * mj;
        M(k, j) = s * mi + c * mj;
    }
}

inline void apply_givens_cols(MatrixXd& V, int i, int j, double c, double s) {
    const int n = static_cast<int>(V.rows());
    for (int k = 0; k < n; ++k) {
        double vi = V(k, i), vj = V(k, j);
        V(k, i) = c * vi - s * vj;
        V(k, j) = s * vi + c * vj;
    }
}

/// One cyclic sweep of joint Jacobi rotations over a family of symmetric
/// matrices; each pair rotation maximizes the summed diagonal separation.
inline void joint_jacobi_sweep(std::vector<MatrixXd>& ops, MatrixXd& V) {
    const int n = static_cast<int>(V.rows());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double gpp = 0.0, gpq = 0.0, gqq = 0.0;
            for (const auto& M : ops) {
                double a = M(i, i) - M(j, j);
                double b = 2.0 * M(i, j);
                gpp += a * a;
                gpq += a * b;
                gqq += b * b;
            }
            double diff = gpp - gqq;
            double disc = std::hypot(diff, 2.0 * gpq);
            if (disc < 1e-30) continue;
            double vx = diff + disc, vy = 2.0 * gpq;
            double norm = std::hypot(vx, vy);
            if (norm < 1e-30) continue;
            double c2 = vx / norm, s2 = vy / norm;
            double c = std::sqrt(0.5 * (1.0 + c2));
            double s = c > 1e-15 ? s2 / (2.0 * c) : 1.0;
            if (std::abs(s) < 1e-16) continue;
            for (auto& M : ops) apply_givens(M, i, j, c, s);
            apply_givens_cols(V, i, j, c, s);
        }
    }
}

inline double max_offdiag(const std::vector<MatrixXd>& ops) {
    double worst = 0.0;
    for (const auto& M : ops) {
        double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
        const int n = static_cast<int>(M.rows());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) worst = std::max(worst, std::abs(M(i, j)) / scale);
    }
    return worst;
}

}  // namespace detail

/**
 * Joint eigenframe and principal-normal clusters from the shape operators
 * and the Blaschke operator. Requires the flat-normal-bundle certificate
 * (all commutators small); diagonalizes a seeded random combination of the
 * shape operators, refines with one joint Jacobi sweep, retries degenerate
 * draws, and clusters the diagonal normal vectors.
 */
inline SpectralData principal_normals_impl(int n, int p, const Ten3& beta, const MatrixXd& psi,
                                           const MatrixXd& g_star, const MatrixXd& Lstar,
                                           double eps_flat, double eps_cluster, uint64_t seed) {
    MatrixXd Linv = Lstar.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(n, n));

    std::vector<MatrixXd> sym_ops;  // g*-orthonormal-basis versions of B_a, then psi-hat
    sym_ops.reserve(static_cast<size_t>(p) + 1);
    for (int a = 0; a < p; ++a) {
        MatrixXd beta_a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) beta_a(i, j) = beta(i, j, a);
        sym_ops.push_back(Linv * beta_a * Linv.transpose());
    }
    MatrixXd psi_t = Linv * psi * Linv.transpose();
    sym_ops.push_back(psi_t);

    // flat normal bundle certificate
    for (size_t a = 0; a < sym_ops.size(); ++a) {
        for (size_t b = a + 1; b < sym_ops.size(); ++b) {
            MatrixXd comm = sym_ops[a] * sym_ops[b] - sym_ops[b] * sym_ops[a];
            double scale = std::max(1.0, sym_ops[a].norm() * sym_ops[b].norm());
            if (comm.norm() > eps_flat * scale) {
                std::ostringstream os;
                os << "shape/Blaschke operator family does not commute at tolerance "
                   << eps_flat << " (residual " << comm.norm() / scale
                   << "): normal bundle not certified flat";
                throw NonCommutingError(os.str());
            }
        }
    }

    const double accept_off = 1e-7;
    MatrixXd V;
    std::vector<MatrixXd> rotated;
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(attempt + 1));
        std::normal_distribution<double> gauss(0.0, 1.0);
        MatrixXd M = MatrixXd::Zero(n, n);
        for (int a = 0; a < p; ++a) M += gauss(rng) * sym_ops[static_cast<size_t>(a)];
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
        V = es.eigenvectors();
        rotated.clear();
        for (const auto& op : sym_ops) rotated.push_back(V.transpose() * op * V);
        detail::joint_jacobi_sweep(rotated, V);
        ok = detail::max_offdiag(rotated) <= accept_off;
    }
    if (!ok) {
        // full joint Jacobi from the identity as fallback
        V = MatrixXd::Identity(n, n);
        rotated = sym_ops;
        for (int sweep = 0; sweep < 50; ++sweep) {
            detail::joint_jacobi_sweep(rotated, V);
            if (detail::max_offdiag(rotated) <= accept_off) {
                ok = true;
                break;
            }
        }
    }
    if (!ok)
        throw NonCommutingError("joint diagonalization failed to converge at tolerance 1e-7");

    // diagonal data per eigendirection
    std::vector<VectorXd> eta(static_cast<size_t>(n), VectorXd::Zero(p));
    std::vector<double> theta_dir(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        for (int a = 0; a < p; ++a) eta[static_cast<size_t>(j)][a] = rotated[static_cast<size_t>(a)](j, j);
        theta_dir[static_cast<size_t>(j)] = rotated[static_cast<size_t>(p)](j, j);
    }

    double scale = 1.0;
    for (const auto& e : eta) scale = std::max(scale, e.norm());
    const double merge_tol = eps_cluster * scale;

    // union-find over directions keyed on the full normal vectors
    std::vector<int> parent(static_cast<size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int i) {
        while (parent[static_cast<size_t>(i)] != i) {
            parent[static_cast<size_t>(i)] = parent[static_cast<size_t>(parent[static_cast<size_t>(i)])];
            i = parent[static_cast<size_t>(i)];
        }
        return i;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if ((eta[static_cast<size_t>(i)] - eta[static_cast<size_t>(j)]).norm() <= merge_tol)
                parent[static_cast<size_t>(find(j))] = find(i);

    std::vector<int> roots;
    std::vector<int> cluster_index(static_cast<size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        int r = find(i);
        auto it = std::find(roots.begin(), roots.end(), r);
        if (it == roots.end()) {
            roots.push_back(r);
            cluster_index[static_cast<size_t>(i)] = static_cast<int>(roots.size()) - 1;
        } else {
            cluster_index[static_cast<size_t>(i)] = static_cast<int>(it - roots.begin());
        }
    }
    const int k = static_cast<int>(roots.size());

    std::vector<VectorXd> centers(static_cast<size_t>(k), VectorXd::Zero(p));
    std::vector<double> thetas(static_cast<size_t>(k), 0.0);
    std::vector<int> mult(static_cast<size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
        int c = cluster_index[static_cast<size_t>(i)];
        centers[static_cast<size_t>(c)] += eta[static_cast<size_t>(i)];
        thetas[static_cast<size_t>(c)] += theta_dir[static_cast<size_t>(i)];
        mult[static_cast<size_t>(c)]++;
    }
    for (int c = 0; c < k; ++c) {
        centers[static_cast<size_t>(c)] /= mult[static_cast<size_t>(c)];
        thetas[static_cast<size_t>(c)] /= mult[static_cast<size_t>(c)];
    }

    // ambiguity: distinct clusters closer than twice the merge tolerance are
    // reported, never guessed
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            if ((centers[static_cast<size_t>(a)] - centers[static_cast<size_t>(b)]).norm() <
                2.0 * merge_tol) {
                std::ostringstream os;
                os << "cluster ambiguity: principal normals " << a << " and " << b
                   << " closer than twice the cluster tolerance";
                throw ClusterAmbiguityError(os.str());
            }
    for (int i = 0; i < n; ++i) {
        int c = cluster_index[static_cast<size_t>(i)];
        if (std::abs(theta_dir[static_cast<size_t>(i)] - thetas[static_cast<size_t>(c)]) >
            eps_cluster * std::max(1.0, std::abs(thetas[static_cast<size_t>(c)])))
            throw ClusterAmbiguityError(
                "Blaschke eigenvalues inconsistent within a principal-normal cluster");
    }

    // canonical cluster order: descending norm, then descending theta
    std::vector<int> order(static_cast<size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double na = centers[static_cast<size_t>(a)].norm(), nb = centers[static_cast<size_t>(b)].norm();
        if (std::abs(na - nb) > 1e-12) return na > nb;
        if (std::abs(thetas[static_cast<size_t>(a)] - thetas[static_cast<size_t>(b)]) > 1e-12)
            return thetas[static_cast<size_t>(a)] > thetas[static_cast<size_t>(b)];
        for (int c = 0; c < p; ++c) {
            double da = centers[static_cast<size_t>(a)][c], db = centers[static_cast<size_t>(b)][c];
            if (std::abs(da - db) > 1e-12) return da > db;
        }
        return a < b;
    });
    std::vector<int> rank(static_cast<size_t>(k));
    for (int r = 0; r < k; ++r) rank[static_cast<size_t>(order[static_cast<size_t>(r)])] = r;

    SpectralData out;
    out.k = k;
    out.eta_bar.resize(static_cast<size_t>(k));
    out.theta.resize(static_cast<size_t>(k));
    out.mult.resize(static_cast<size_t>(k));
    out.h.resize(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c) {
        int r = rank[static_cast<size_t>(c)];
        out.eta_bar[static_cast<size_t>(r)] = centers[static_cast<size_t>(c)];
        out.theta[static_cast<size_t>(r)] = thetas[static_cast<size_t>(c)];
        out.mult[static_cast<size_t>(r)] = mult[static_cast<size_t>(c)];
        out.h[static_cast<size_t>(r)] =
            centers[static_cast<size_t>(c)].squaredNorm() + 2.0 * thetas[static_cast<size_t>(c)];
    }

    // chart-basis eigenframe, columns grouped by cluster rank
    MatrixXd X = Lstar.transpose().triangularView<Eigen::Upper>().solve(V);
    std::vector<int> col_order(static_cast<size_t>(n));
    std::iota(col_order.begin(), col_order.end(), 0);
    std::stable_sort(col_order.begin(), col_order.end(), [&](int a, int b) {
        return rank[static_cast<size_t>(cluster_index[static_cast<size_t>(a)])] <
               rank[static_cast<size_t>(cluster_index[static_cast<size_t>(b)])];
    });
    out.eigenframe.resize(n, n);
    out.cluster_of.resize(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) {
        out.eigenframe.col(c) = X.col(col_order[static_cast<size_t>(c)]);
        out.cluster_of[static_cast<size_t>(c)] =
            rank[static_cast<size_t>(cluster_index[static_cast<size_t>(col_order[static_cast<size_t>(c)])])];
    }
    return out;
}

}  // namespace mgeo
