#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "mgeo/errors.hpp"
#include "mgeo/multiindex.hpp"

namespace mgeo {

/**
 * Truncated multivariate Taylor scalar: coefficients c_alpha of
 * sum_{|alpha| <= order} c_alpha (x - x0)^alpha, so c_alpha = d^alpha f / alpha!.
 *
 * One arithmetic pass through a smooth expression yields all partial
 * derivatives up to `order` at once. Differentiation (d) lowers the
 * truncation order by one; binary operations truncate to the lower of
 * the two operand orders, which keeps every stored coefficient exact.
 */
class Jet {
public:
    Jet() = default;

    static Jet constant(const JetSpacePtr& sp, double v, int order) {
        Jet j;
        j.sp_ = sp;
        j.order_ = order;
        j.c_.assign(static_cast<size_t>(sp->count(order)), 0.0);
        j.c_[0] = v;
        return j;
    }

    static Jet variable(const JetSpacePtr& sp, int var, double v, int order) {
        Jet j = constant(sp, v, order);
        if (order >= 1) {
            std::vector<int> e(static_cast<size_t>(sp->nvars()), 0);
            e[static_cast<size_t>(var)] = 1;
            j.c_[static_cast<size_t>(sp->position(e))] = 1.0;
        }
        return j;
    }

    const JetSpacePtr& space() const { return sp_; }
    int order() const { return order_; }
    double value() const { return c_.empty() ? 0.0 : c_[0]; }

    double coeff(int pos) const {
        return pos < static_cast<int>(c_.size()) ? c_[static_cast<size_t>(pos)] : 0.0;
    }

    void set_coeff(int pos, double v) {
        if (pos >= static_cast<int>(c_.size()))
            throw EvalDomainError("jet set_coeff: position beyond truncation order");
        c_[static_cast<size_t>(pos)] = v;
    }

    /// Derivative d^alpha f (coefficient times alpha!).
    double partial(const std::vector<int>& alpha) const {
        int pos = sp_->position(alpha);
        if (pos < 0 || pos >= static_cast<int>(c_.size()))
            throw EvalDomainError("jet partial: multi-index beyond truncation order");
        return c_[static_cast<size_t>(pos)] * sp_->factorial(pos);
    }

    /// Partial derivative with respect to variable v, as a jet of order-1.
    Jet d(int v) const {
        Jet r;
        r.sp_ = sp_;
        r.order_ = order_ - 1;
        if (r.order_ < 0) throw EvalDomainError("jet derivative: order exhausted");
        const int cnt = sp_->count(r.order_);
        r.c_.assign(static_cast<size_t>(cnt), 0.0);
        const int tc = sp_->total_count();
        (void)tc;
        for (int pos = 0; pos < cnt; ++pos) {
            int up = sp_->shift_up(v, pos);
            if (up >= 0 && up < static_cast<int>(c_.size()))
                r.c_[static_cast<size_t>(pos)] =
                    c_[static_cast<size_t>(up)] * (sp_->exponent(pos, v) + 1);
        }
        return r;
    }

    bool finite() const {
        for (double v : c_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Jet operator-() const {
        Jet r = *this;
        for (double& v : r.c_) v = -v;
        return r;
    }

    Jet& operator+=(const Jet& o) {
        truncate_to(o.order_);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        truncate_to(o.order_);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        r.sp_ = a.sp_;
        r.order_ = std::min(a.order_, b.order_);
        const int cnt = r.sp_->count(r.order_);
        r.c_.assign(static_cast<size_t>(cnt), 0.0);
        const size_t na = a.c_.size(), nb = b.c_.size();
        for (int g = 0; g < cnt; ++g) {
            double s = 0.0;
            for (const auto& [i, j] : r.sp_->conv_pairs(g)) {
                if (static_cast<size_t>(i) < na && static_cast<size_t>(j) < nb)
                    s += a.c_[static_cast<size_t>(i)] * b.c_[static_cast<size_t>(j)];
            }
            r.c_[static_cast<size_t>(g)] = s;
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) {
        if (b.value() == 0.0) throw EvalDomainError("jet division by zero");
        Jet r;
        r.sp_ = a.sp_;
        r.order_ = std::min(a.order_, b.order_);
        const int cnt = r.sp_->count(r.order_);
        r.c_.assign(static_cast<size_t>(cnt), 0.0);
        const double b0 = b.c_[0];
        for (int g = 0; g < cnt; ++g) {
            double s = g < static_cast<int>(a.c_.size()) ? a.c_[static_cast<size_t>(g)] : 0.0;
            for (const auto& [i, j] : r.sp_->conv_pairs(g)) {
                if (i == 0) continue;  // position 0 is the degree-0 index
                if (static_cast<size_t>(i) < b.c_.size())
                    s -= b.c_[static_cast<size_t>(i)] * r.c_[static_cast<size_t>(j)];
            }
            r.c_[static_cast<size_t>(g)] = s / b0;
        }
        return r;
    }

    Jet& operator+=(double s) {
        c_[0] += s;
        return *this;
    }
    Jet& operator-=(double s) {
        c_[0] -= s;
        return *this;
    }
    Jet& operator*=(double s) {
        for (double& v : c_) v *= s;
        return *this;
    }
    Jet& operator/=(double s) {
        if (s == 0.0) throw EvalDomainError("jet division by zero");
        for (double& v : c_) v /= s;
        return *this;
    }

    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a -= s; }
    friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, double s) { return a /= s; }
    friend Jet operator/(double s, const Jet& a) {
        return constant(a.sp_, s, a.order_) / a;
    }

    /**
     * Composition with a univariate analytic function given by its Taylor
     * coefficients at value(): taylor[k] = phi^(k)(f0) / k!. Evaluated by
     * Horner on the zero-constant part of *this.
     */
    Jet compose(const std::vector<double>& taylor) const {
        Jet ft = *this;
        ft.c_[0] = 0.0;
        Jet h = constant(sp_, taylor[static_cast<size_t>(order_)], order_);
        for (int k = order_ - 1; k >= 0; --k) {
            h = h * ft;
            h.c_[0] += taylor[static_cast<size_t>(k)];
        }
        return h;
    }

private:
    void truncate_to(int other_order) {
        if (other_order < order_) {
            order_ = other_order;
            c_.resize(static_cast<size_t>(sp_->count(order_)));
        }
    }

    JetSpacePtr sp_;
    int order_ = -1;
    std::vector<double> c_;
};

inline Jet exp(const Jet& f) {
    const double e0 = std::exp(f.value());
    std::vector<double> t(static_cast<size_t>(f.order()) + 1);
    double fact = 1.0;
    for (int k = 0; k <= f.order(); ++k) {
        if (k > 1) fact *= k;
        t[static_cast<size_t>(k)] = e0 / fact;
    }
    return f.compose(t);
}

inline Jet log(const Jet& f) {
    const double f0 = f.value();
    if (!(f0 > 0.0)) throw EvalDomainError("log of nonpositive value");
    std::vector<double> t(static_cast<size_t>(f.order()) + 1);
    t[0] = std::log(f0);
    double p = 1.0;
    for (int k = 1; k <= f.order(); ++k) {
        p *= f0;
        t[static_cast<size_t>(k)] = (k % 2 ? 1.0 : -1.0) / (k * p);
    }
    return f.compose(t);
}

inline Jet sqrt(const Jet& f) {
    const double f0 = f.value();
    if (!(f0 > 0.0)) throw EvalDomainError("sqrt of nonpositive value");
    std::vector<double> t(static_cast<size_t>(f.order()) + 1);
    // binom(1/2, k) * f0^(1/2 - k)
    double coef = 1.0, powv = std::sqrt(f0);
    t[0] = powv;
    for (int k = 1; k <= f.order(); ++k) {
        coef *= (0.5 - (k - 1)) / k;
        powv /= f0;
        t[static_cast<size_t>(k)] = coef * powv;
    }
    return f.compose(t);
}

inline Jet sin(const Jet& f) {
    const double f0 = f.value();
    std::vector<double> t(static_cast<size_t>(f.order()) + 1);
    double fact = 1.0;
    for (int k = 0; k <= f.order(); ++k) {
        if (k > 1) fact *= k;
        switch (k % 4) {
            case 0: t[static_cast<size_t>(k)] = std::sin(f0) / fact; break;
            case 1: t[static_cast<size_t>(k)] = std::cos(f0) / fact; break;
            case 2: t[static_cast<size_t>(k)] = -std::sin(f0) / fact; break;
            default: t[static_cast<size_t>(k)] = -std::cos(f0) / fact; break;
        }
    }
    return f.compose(t);
}

inline Jet cos(const Jet& f) {
    const double f0 = f.value();
    std::vector<double> t(static_cast<size_t>(f.order()) + 1);
    double fact = 1.0;
    for (int k = 0; k <= f.order(); ++k) {
        if (k > 1) fact *= k;
        switch (k % 4) {
            case 0: t[static_cast<size_t>(k)] = std::cos(f0) / fact; break;
            case 1: t[static_cast<size_t>(k)] = -std::sin(f0) / fact; break;
            case 2: t[static_cast<size_t>(k)] = -std::cos(f0) / fact; break;
            default: t[static_cast<size_t>(k)] = std::sin(f0) / fact; break;
        }
    }
    return f.compose(t);
}

/// Integer power by repeated multiplication; exact on jets.
inline Jet pow_int(const Jet& f, long long e) {
    if (e == 0) return Jet::constant(f.space(), 1.0, f.order());
    bool neg = e < 0;
    unsigned long long k = neg ? static_cast<unsigned long long>(-e)
                               : static_cast<unsigned long long>(e);
    Jet acc = Jet::constant(f.space(), 1.0, f.order());
    Jet base = f;
    while (k) {
        if (k & 1ULL) acc = acc * base;
        k >>= 1ULL;
        if (k) base = base * base;
    }
    if (neg) return Jet::constant(f.space(), 1.0, f.order()) / acc;
    return acc;
}

/// Real-exponent power; base must be positive at the evaluation point.
inline Jet pow_real(const Jet& f, double a) {
    const double f0 = f.value();
    if (!(f0 > 0.0)) throw EvalDomainError("pow with real exponent needs positive base");
    std::vector<double> t(static_cast<size_t>(f.order()) + 1);
    double coef = 1.0, powv = std::pow(f0, a);
    t[0] = powv;
    for (int k = 1; k <= f.order(); ++k) {
        coef *= (a - (k - 1)) / k;
        powv /= f0;
        t[static_cast<size_t>(k)] = coef * powv;
    }
    return f.compose(t);
}

}  // namespace mgeo
