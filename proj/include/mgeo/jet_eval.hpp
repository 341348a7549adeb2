#pragma once

#include <map>
#include <vector>

#include "mgeo/chart.hpp"

namespace mgeo {

/**
 * All partial derivatives of an immersion's components up to total order 4
 * at a chart point. Multi-indices are stored as exponent tuples (canonical
 * sorted form is implicit: one entry per distinct mixed partial), and the
 * map is complete over the order simplex.
 */
struct Jet4 {
    int dim_domain = 0;
    int dim_ambient = 0;
    int order = 0;
    std::map<std::vector<int>, VectorXd> partials;

    const VectorXd& at(const std::vector<int>& alpha) const {
        auto it = partials.find(alpha);
        if (it == partials.end())
            throw EvalDomainError("Jet4: multi-index beyond stored order");
        return it->second;
    }
};

/// Evaluate all chart partials up to `order` in one truncated-Taylor pass.
inline Jet4 jet_eval(const ImmersionSpec& spec, const ChartPoint& x, int order) {
    if (order < 1 || order > 4) throw DomainError("jet_eval: order must lie in {1,2,3,4}");
    auto jets = eval_chart(spec, x.coords, order);

    Jet4 out;
    out.dim_domain = spec.n;
    out.dim_ambient = spec.m;
    out.order = order;

    const auto& sp = jets[0].space();
    for (int pos = 0; pos < sp->count(order); ++pos) {
        std::vector<int> alpha(static_cast<size_t>(spec.n));
        for (int v = 0; v < spec.n; ++v) alpha[static_cast<size_t>(v)] = sp->exponent(pos, v);
        VectorXd vals(spec.m);
        for (int a = 0; a < spec.m; ++a)
            vals[a] = jets[static_cast<size_t>(a)].coeff(pos) * sp->factorial(pos);
        out.partials.emplace(std::move(alpha), std::move(vals));
    }
    return out;
}

/**
 * Max relative deviation between truncated-Taylor partials and central finite
 * differences over all order-1 and order-2 partials:
 * max |AD - FD| / (1 + |AD|).
 */
inline double fd_crosscheck(const ImmersionSpec& spec, const ChartPoint& x, double h) {
    if (!(h > 0.0)) throw DomainError("fd_crosscheck: invalid step, h must be positive");
    if (!spec.domain.contains(x.coords, 4.0 * h))
        throw DomainError("fd_crosscheck: point closer than 4h to the domain boundary");

    auto value_at = [&](const VectorXd& p) {
        auto jets = eval_chart(spec, p, 0);
        VectorXd v(spec.m);
        for (int a = 0; a < spec.m; ++a) v[a] = jets[static_cast<size_t>(a)].value();
        return v;
    };

    Jet4 jet = jet_eval(spec, x, 2);
    const VectorXd f0 = value_at(x.coords);

    double worst = 0.0;
    auto update = [&](double ad, double fd) {
        double dev = std::abs(ad - fd) / (1.0 + std::abs(ad));
        if (dev > worst) worst = dev;
    };

    std::vector<VectorXd> fp(static_cast<size_t>(spec.n)), fm(static_cast<size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) {
        VectorXd xp = x.coords, xm = x.coords;
        xp[i] += h;
        xm[i] -= h;
        fp[static_cast<size_t>(i)] = value_at(xp);
        fm[static_cast<size_t>(i)] = value_at(xm);
    }

    for (int i = 0; i < spec.n; ++i) {
        std::vector<int> e(static_cast<size_t>(spec.n), 0);
        e[static_cast<size_t>(i)] = 1;
        VectorXd ad = jet.at(e);
        VectorXd fd = (fp[static_cast<size_t>(i)] - fm[static_cast<size_t>(i)]) / (2.0 * h);
        for (int a = 0; a < spec.m; ++a) update(ad[a], fd[a]);

        e[static_cast<size_t>(i)] = 2;
        VectorXd ad2 = jet.at(e);
        VectorXd fd2 = (fp[static_cast<size_t>(i)] - 2.0 * f0 + fm[static_cast<size_t>(i)]) / (h * h);
        for (int a = 0; a < spec.m; ++a) update(ad2[a], fd2[a]);
    }

    for (int i = 0; i < spec.n; ++i) {
        for (int j = i + 1; j < spec.n; ++j) {
            VectorXd xpp = x.coords, xpm = x.coords, xmp = x.coords, xmm = x.coords;
            xpp[i] += h; xpp[j] += h;
            xpm[i] += h; xpm[j] -= h;
            xmp[i] -= h; xmp[j] += h;
            xmm[i] -= h; xmm[j] -= h;
            VectorXd fd = (value_at(xpp) - value_at(xpm) - value_at(xmp) + value_at(xmm)) /
                          (4.0 * h * h);
            std::vector<int> e(static_cast<size_t>(spec.n), 0);
            e[static_cast<size_t>(i)] = 1;
            e[static_cast<size_t>(j)] = 1;
            VectorXd ad = jet.at(e);
            for (int a = 0; a < spec.m; ++a) update(ad[a], fd[a]);
        }
    }
    return worst;
}

}  // namespace mgeo
