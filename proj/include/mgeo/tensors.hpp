#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace mgeo {

// Small dense value-level tensors; desk scale (n <= 8, p <= 4), so dense
// storage with inline indexing is the clear choice.

struct Ten3 {
    int d0 = 0, d1 = 0, d2 = 0;
    std::vector<double> a;
    Ten3() = default;
    Ten3(int a0, int a1, int a2) : d0(a0), d1(a1), d2(a2), a(static_cast<size_t>(a0) * a1 * a2, 0.0) {}
    double& operator()(int i, int j, int k) { return a[(static_cast<size_t>(i) * d1 + j) * d2 + k]; }
    double operator()(int i, int j, int k) const { return a[(static_cast<size_t>(i) * d1 + j) * d2 + k]; }
};

struct Ten4 {
    int d0 = 0, d1 = 0, d2 = 0, d3 = 0;
    std::vector<double> a;
    Ten4() = default;
    Ten4(int a0, int a1, int a2, int a3)
        : d0(a0), d1(a1), d2(a2), d3(a3), a(static_cast<size_t>(a0) * a1 * a2 * a3, 0.0) {}
    double& operator()(int i, int j, int k, int l) {
        return a[((static_cast<size_t>(i) * d1 + j) * d2 + k) * d3 + l];
    }
    double operator()(int i, int j, int k, int l) const {
        return a[((static_cast<size_t>(i) * d1 + j) * d2 + k) * d3 + l];
    }
};

struct Ten5 {
    int d0 = 0, d1 = 0, d2 = 0, d3 = 0, d4 = 0;
    std::vector<double> a;
    Ten5() = default;
    Ten5(int a0, int a1, int a2, int a3, int a4)
        : d0(a0), d1(a1), d2(a2), d3(a3), d4(a4),
          a(static_cast<size_t>(a0) * a1 * a2 * a3 * a4, 0.0) {}
    double& operator()(int i, int j, int k, int l, int q) {
        return a[(((static_cast<size_t>(i) * d1 + j) * d2 + k) * d3 + l) * d4 + q];
    }
    double operator()(int i, int j, int k, int l, int q) const {
        return a[(((static_cast<size_t>(i) * d1 + j) * d2 + k) * d3 + l) * d4 + q];
    }
};

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace mgeo
