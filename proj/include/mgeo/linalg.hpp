#pragma once

#include <vector>

#include "mgeo/errors.hpp"
#include "mgeo/jet.hpp"

namespace mgeo {

using JVec = std::vector<Jet>;

/// Dense matrix of jets, row-major.
struct JMat {
    int rows = 0, cols = 0;
    std::vector<Jet> a;

    JMat() = default;
    JMat(int r, int c, const Jet& fill) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    Jet& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const Jet& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

inline Jet jdot(const JVec& a, const JVec& b) {
    Jet s = a[0] * b[0];
    for (size_t i = 1; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline JVec jaxpy(const JVec& x, const Jet& c, const JVec& y) {
    // x - c*y
    JVec r = x;
    for (size_t i = 0; i < r.size(); ++i) r[i] -= c * y[i];
    return r;
}

inline JVec jscale(const JVec& x, const Jet& c) {
    JVec r = x;
    for (auto& v : r) v = v * c;
    return r;
}

/**
 * Modified Gram-Schmidt in fixed input order. `pre` vectors are projected
 * out first (already orthonormal). Throws RankDeficiencyError when a
 * residual norm falls below `tol`.
 */
inline std::vector<JVec> gram_schmidt(const std::vector<JVec>& vs,
                                      const std::vector<JVec>& pre,
                                      double tol = 1e-10) {
    std::vector<JVec> out;
    out.reserve(vs.size());
    for (const auto& v0 : vs) {
        JVec v = v0;
        for (const auto& q : pre) v = jaxpy(v, jdot(v, q), q);
        for (const auto& q : out) v = jaxpy(v, jdot(v, q), q);
        Jet n2 = jdot(v, v);
        if (!(n2.value() > tol * tol))
            throw RankDeficiencyError("gram_schmidt: dependent direction");
        Jet inv_n = 1.0 / sqrt(n2);
        out.push_back(jscale(v, inv_n));
    }
    return out;
}

/// Gauss-Jordan inverse with partial pivoting on coefficient values.
inline JMat jinverse(const JMat& m) {
    const int n = m.rows;
    JMat a = m;
    JMat inv(n, n, Jet::constant(m.a[0].space(), 0.0, m.a[0].order()));
    for (int i = 0; i < n; ++i) inv(i, i) += 1.0;

    std::vector<int> perm(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;

    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a(col, col).value());
        for (int r = col + 1; r < n; ++r) {
            double v = std::abs(a(r, col).value());
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (!(best > 0.0)) throw DegenerateMetricError("jinverse: singular matrix");
        if (piv != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(a(piv, c), a(col, c));
                std::swap(inv(piv, c), inv(col, c));
            }
        }
        Jet d = Jet::constant(a(col, col).space(), 1.0, a(col, col).order()) / a(col, col);
        for (int c = 0; c < n; ++c) {
            a(col, c) = a(col, c) * d;
            inv(col, c) = inv(col, c) * d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            Jet f = a(r, col);
            for (int c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

}  // namespace mgeo
