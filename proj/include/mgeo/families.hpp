#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mgeo/chart.hpp"
#include "mgeo/curve.hpp"
#include "mgeo/extrinsic.hpp"

namespace mgeo {

/**
 * Built-in immersion families: cylinders / generalized cones / rotational
 * submanifolds over prescribed-curvature curves, the standard cylinder,
 * cone and torus, and products of circles with a flat factor.
 */
struct FamilyInstance {
    enum class Tag {
        Cylinder,
        GeneralizedCone,
        Rotational,
        StandardCylinder,
        StandardCone,
        StandardTorus,
        CirclesProduct,
    };

    Tag tag = Tag::Cylinder;
    int n = 3;               // intrinsic dimension
    int p = 1;               // codimension (curve families)
    int k = 1;               // sphere factor dimension (standard families)
    int lambda = 0;          // flat factor dimension (circles product)
    double sphere_radius = 0.6;  // radius split for cone/torus constructions
    std::vector<double> radii;   // circle radii (circles product)
    std::optional<CurveSpec> curve;
    double curve_step = 1e-3;
};

inline FamilyInstance::Tag family_tag_from_name(const std::string& name) {
    using Tag = FamilyInstance::Tag;
    if (name == "cylinder") return Tag::Cylinder;
    if (name == "generalized_cone") return Tag::GeneralizedCone;
    if (name == "rotational") return Tag::Rotational;
    if (name == "standard_cylinder") return Tag::StandardCylinder;
    if (name == "standard_cone") return Tag::StandardCone;
    if (name == "standard_torus") return Tag::StandardTorus;
    if (name == "circles_product") return Tag::CirclesProduct;
    throw ConfigError("unknown family '" + name + "'");
}

namespace detail {

/// Unit sphere S^k chart on k angles (iterated polar recursion); immersive
/// while |theta_j| < pi/2 for j >= 2.
inline std::vector<Jet> unit_sphere_chart(const std::vector<Jet>& th) {
    std::vector<Jet> u{cos(th[0]), sin(th[0])};
    for (size_t j = 1; j < th.size(); ++j) {
        Jet c = cos(th[j]);
        for (auto& comp : u) comp = comp * c;
        u.push_back(sin(th[j]));
    }
    return u;
}

inline Box make_box(const std::vector<std::pair<double, double>>& iv) {
    Box b;
    b.lo.resize(static_cast<Eigen::Index>(iv.size()));
    b.hi.resize(static_cast<Eigen::Index>(iv.size()));
    for (size_t i = 0; i < iv.size(); ++i) {
        b.lo[static_cast<Eigen::Index>(i)] = iv[i].first;
        b.hi[static_cast<Eigen::Index>(i)] = iv[i].second;
    }
    return b;
}

inline std::vector<std::pair<double, double>> angle_intervals(int count) {
    std::vector<std::pair<double, double>> iv;
    for (int j = 0; j < count; ++j)
        iv.emplace_back(j == 0 ? -0.9 : -0.55, j == 0 ? 0.9 : 0.55);
    return iv;
}

}  // namespace detail

inline ImmersionSpec build_family(const FamilyInstance& fi) {
    using Tag = FamilyInstance::Tag;
    ImmersionSpec spec;
    const int n = fi.n;
    if (n < 2 || n > 8) throw ConfigError("family: n must lie in [2, 8]");

    switch (fi.tag) {
        case Tag::Cylinder: {
            // f(s, u) = (gamma(s), u), gamma a plane curve in R^{p+1}
            if (!fi.curve) throw ConfigError("cylinder needs a curve");
            if (fi.curve->form != SpaceForm::Euclidean)
                throw ConfigError("cylinder takes a curve in R^{p+1} (euclidean space form)");
            if (fi.p < 1 || fi.p > 4) throw ConfigError("cylinder: p must lie in [1, 4]");
            auto curve = std::make_shared<Curve>(*fi.curve, fi.curve_step);
            const int p = fi.p, m = n + p;
            std::ostringstream nm;
            nm << "cylinder(n=" << n << ",p=" << p << ")";
            spec.name = nm.str();
            spec.n = n;
            spec.m = m;
            std::vector<std::pair<double, double>> iv{{fi.curve->s0, fi.curve->s1}};
            for (int i = 1; i < n; ++i) iv.emplace_back(-1.0, 1.0);
            spec.domain = detail::make_box(iv);
            spec.chart = [curve, n, m](const std::vector<Jet>& xs) {
                auto g = curve->eval(xs[0]);  // plane coords (x, y)
                std::vector<Jet> out;
                out.reserve(static_cast<size_t>(m));
                out.push_back(g[0]);
                out.push_back(g[1]);
                for (int a = 2; a < m - (n - 1); ++a)
                    out.push_back(Jet::constant(xs[0].space(), 0.0, xs[0].order()));
                for (int i = 1; i < n; ++i) out.push_back(xs[static_cast<size_t>(i)]);
                return out;
            };
            break;
        }

        case Tag::GeneralizedCone: {
            // f(s, z) = (z1 gamma(s), z2..z_{n-1}), gamma in S^{p+1}
            if (!fi.curve) throw ConfigError("generalized_cone needs a curve");
            if (fi.curve->form != SpaceForm::Sphere)
                throw ConfigError("generalized_cone takes a curve in S^{p+1} (sphere space form)");
            if (fi.p < 1 || fi.p > 4) throw ConfigError("generalized_cone: p must lie in [1, 4]");
            auto curve = std::make_shared<Curve>(*fi.curve, fi.curve_step);
            const int p = fi.p, m = n + p;
            std::ostringstream nm;
            nm << "generalized_cone(n=" << n << ",p=" << p << ")";
            spec.name = nm.str();
            spec.n = n;
            spec.m = m;
            std::vector<std::pair<double, double>> iv{{fi.curve->s0, fi.curve->s1}, {0.6, 1.8}};
            for (int i = 2; i < n; ++i) iv.emplace_back(-1.0, 1.0);
            spec.domain = detail::make_box(iv);
            spec.chart = [curve, n, p, m](const std::vector<Jet>& xs) {
                auto g = curve->eval(xs[0]);  // on S^2 in R^3
                const Jet& z1 = xs[1];
                std::vector<Jet> out;
                out.reserve(static_cast<size_t>(m));
                for (int a = 0; a < 3; ++a) out.push_back(z1 * g[static_cast<size_t>(a)]);
                for (int a = 3; a < p + 2; ++a)
                    out.push_back(Jet::constant(xs[0].space(), 0.0, xs[0].order()));
                for (int i = 2; i < n; ++i) out.push_back(xs[static_cast<size_t>(i)]);
                return out;
            };
            break;
        }

        case Tag::Rotational: {
            // f(s, y) = (z1..zp, z_{p+1} y), gamma = (z1, 0.., z_{p+1}) in the
            // upper half-space, y on S^{n-1}
            if (!fi.curve) throw ConfigError("rotational needs a curve");
            if (fi.curve->form != SpaceForm::Hyperbolic)
                throw ConfigError("rotational takes a curve in H^{p+1} (hyperbolic space form)");
            if (fi.p < 1 || fi.p > 4) throw ConfigError("rotational: p must lie in [1, 4]");
            auto curve = std::make_shared<Curve>(*fi.curve, fi.curve_step);
            const int p = fi.p, m = n + p;
            std::ostringstream nm;
            nm << "rotational(n=" << n << ",p=" << p << ")";
            spec.name = nm.str();
            spec.n = n;
            spec.m = m;
            std::vector<std::pair<double, double>> iv{{fi.curve->s0, fi.curve->s1}};
            auto ang = detail::angle_intervals(n - 1);
            iv.insert(iv.end(), ang.begin(), ang.end());
            spec.domain = detail::make_box(iv);
            spec.chart = [curve, n, p, m](const std::vector<Jet>& xs) {
                auto g = curve->eval(xs[0]);  // half-plane coords (x, y), y > 0
                std::vector<Jet> out;
                out.reserve(static_cast<size_t>(m));
                out.push_back(g[0]);
                for (int a = 1; a < p; ++a)
                    out.push_back(Jet::constant(xs[0].space(), 0.0, xs[0].order()));
                std::vector<Jet> th(xs.begin() + 1, xs.end());
                auto y = detail::unit_sphere_chart(th);  // S^{n-1} in R^n
                for (const auto& comp : y) out.push_back(g[1] * comp);
                return out;
            };
            break;
        }

        case Tag::StandardCylinder: {
            // S^k x R^{n-k} in R^{n+1}
            const int k = fi.k;
            if (k < 1 || k > n - 1) throw ConfigError("standard_cylinder: k must lie in [1, n-1]");
            std::ostringstream nm;
            nm << "standard_cylinder(k=" << k << ",n=" << n << ")";
            spec.name = nm.str();
            spec.n = n;
            spec.m = n + 1;
            auto iv = detail::angle_intervals(k);
            for (int i = k; i < n; ++i) iv.emplace_back(-1.0, 1.0);
            spec.domain = detail::make_box(iv);
            spec.chart = [k, n](const std::vector<Jet>& xs) {
                std::vector<Jet> th(xs.begin(), xs.begin() + k);
                auto out = detail::unit_sphere_chart(th);
                for (int i = k; i < n; ++i) out.push_back(xs[static_cast<size_t>(i)]);
                return out;
            };
            break;
        }

        case Tag::StandardCone: {
            // cone over S^k(r) inside S^{k+1}: (z1 (r U_k, sqrt(1-r^2)), z2..)
            const int k = fi.k;
            const double r = fi.sphere_radius;
            if (k < 1 || k > n - 1) throw ConfigError("standard_cone: k must lie in [1, n-1]");
            if (!(r > 0.0 && r < 1.0))
                throw ConfigError("standard_cone: sphere_radius must lie in (0, 1)");
            std::ostringstream nm;
            nm << "standard_cone(k=" << k << ",n=" << n << ",r=" << r << ")";
            spec.name = nm.str();
            spec.n = n;
            spec.m = n + 1;
            auto iv = detail::angle_intervals(k);
            iv.emplace_back(0.6, 1.8);  // z1 > 0
            for (int i = k + 1; i < n; ++i) iv.emplace_back(-1.0, 1.0);
            spec.domain = detail::make_box(iv);
            const double h = std::sqrt(1.0 - r * r);
            spec.chart = [k, n, r, h](const std::vector<Jet>& xs) {
                std::vector<Jet> th(xs.begin(), xs.begin() + k);
                auto u = detail::unit_sphere_chart(th);
                const Jet& z1 = xs[static_cast<size_t>(k)];
                std::vector<Jet> out;
                for (const auto& comp : u) out.push_back(z1 * (r * comp));
                out.push_back(z1 * h);
                for (int i = k + 1; i < n; ++i) out.push_back(xs[static_cast<size_t>(i)]);
                return out;
            };
            break;
        }

        case Tag::StandardTorus: {
            // S^k(r) x S^{n-k}(sqrt(1-r^2)) in S^{n+1}, then stereographic
            // projection from a pole off the image
            const int k = fi.k;
            const double r = fi.sphere_radius;
            if (k < 1 || k > n - 1) throw ConfigError("standard_torus: k must lie in [1, n-1]");
            if (!(r > 0.0 && r < 1.0))
                throw ConfigError("standard_torus: sphere_radius must lie in (0, 1)");
            std::ostringstream nm;
            nm << "standard_torus(k=" << k << ",n=" << n << ",r=" << r << ")";
            spec.name = nm.str();
            spec.n = n;
            spec.m = n + 1;
            auto iv = detail::angle_intervals(k);
            auto iv2 = detail::angle_intervals(n - k);
            iv.insert(iv.end(), iv2.begin(), iv2.end());
            spec.domain = detail::make_box(iv);
            const double r2 = std::sqrt(1.0 - r * r);

            // image on the unit sphere in R^{n+2}
            auto on_sphere = [k, n, r, r2](const std::vector<Jet>& xs) {
                std::vector<Jet> th1(xs.begin(), xs.begin() + k);
                std::vector<Jet> th2(xs.begin() + k, xs.end());
                auto u1 = detail::unit_sphere_chart(th1);
                auto u2 = detail::unit_sphere_chart(th2);
                std::vector<Jet> out;
                for (const auto& c : u1) out.push_back(r * c);
                for (const auto& c : u2) out.push_back(r2 * c);
                return out;
            };

            // pole: antipode of the image centroid direction, from a coarse grid
            VectorXd centroid = VectorXd::Zero(n + 2);
            {
                std::vector<int> counts(static_cast<size_t>(n), 3);
                std::vector<int> idx(static_cast<size_t>(n), 0);
                auto sp0 = JetSpace::get(n, kMaxChartOrder);
                bool done = false;
                while (!done) {
                    std::vector<Jet> xs;
                    for (int i = 0; i < n; ++i) {
                        double t = (idx[static_cast<size_t>(i)] + 0.5) / 3.0;
                        double lo = spec.domain.lo[i], hi = spec.domain.hi[i];
                        xs.push_back(Jet::variable(sp0, i, lo + t * (hi - lo), 0));
                    }
                    auto y = on_sphere(xs);
                    for (int a = 0; a < n + 2; ++a) centroid[a] += y[static_cast<size_t>(a)].value();
                    done = true;
                    for (int i = 0; i < n; ++i) {
                        if (++idx[static_cast<size_t>(i)] < counts[static_cast<size_t>(i)]) {
                            done = false;
                            break;
                        }
                        idx[static_cast<size_t>(i)] = 0;
                    }
                }
            }
            if (centroid.norm() < 1e-8)
                throw ConfigError("standard_torus: centroid direction degenerate");
            VectorXd pole = -centroid.normalized();

            // orthonormal basis of the pole's orthogonal hyperplane
            MatrixXd basis;
            {
                MatrixXd A(n + 2, n + 2);
                A.col(0) = pole;
                A.block(0, 1, n + 2, n + 1).setIdentity();
                Eigen::HouseholderQR<MatrixXd> qr(A);
                MatrixXd Q = qr.householderQ();
                if ((Q.col(0) - pole).norm() > 1e-8) Q = -Q;
                basis = Q.rightCols(n + 1);
            }

            spec.chart = [on_sphere, pole, basis, n](const std::vector<Jet>& xs) {
                auto y = on_sphere(xs);
                Jet dot_pole = pole[0] * y[0];
                for (int a = 1; a < n + 2; ++a) dot_pole += pole[a] * y[static_cast<size_t>(a)];
                Jet denom = 1.0 - dot_pole;
                if (!(std::abs(denom.value()) > 0.1))
                    throw EvalDomainError("standard_torus: image too close to the projection pole");
                std::vector<Jet> out;
                for (int c = 0; c < n + 1; ++c) {
                    Jet num = basis(0, c) * y[0];
                    for (int a = 1; a < n + 2; ++a) num += basis(a, c) * y[static_cast<size_t>(a)];
                    out.push_back(num / denom);
                }
                return out;
            };
            break;
        }

        case Tag::CirclesProduct: {
            // S^1(r_1) x ... x S^1(r_q) x R^lambda in R^{2q+lambda}
            const int lambda = fi.lambda;
            const int q = n - lambda;
            if (lambda < 0 || q < 1) throw ConfigError("circles_product: need n - lambda >= 1");
            if (q + (lambda > 0 ? 1 : 0) < 2)
                throw ConfigError("circles_product: fewer than two principal normals (umbilic)");
            if (static_cast<int>(fi.radii.size()) != q)
                throw ConfigError("circles_product: need one radius per circle factor");
            for (double r : fi.radii)
                if (!(r > 0.0)) throw ConfigError("circles_product: radii must be positive");
            const int m = 2 * q + lambda;
            if (m - n > 4) throw ConfigError("circles_product: codimension exceeds 4");
            std::ostringstream nm;
            nm << "circles_product(q=" << q << ",lambda=" << lambda << ")";
            spec.name = nm.str();
            spec.n = n;
            spec.m = m;
            std::vector<std::pair<double, double>> iv;
            for (int i = 0; i < q; ++i) iv.emplace_back(-0.9, 0.9);
            for (int i = 0; i < lambda; ++i) iv.emplace_back(-1.0, 1.0);
            spec.domain = detail::make_box(iv);
            std::vector<double> radii = fi.radii;
            spec.chart = [radii, q, lambda](const std::vector<Jet>& xs) {
                std::vector<Jet> out;
                for (int i = 0; i < q; ++i) {
                    out.push_back(radii[static_cast<size_t>(i)] * cos(xs[static_cast<size_t>(i)]));
                    out.push_back(radii[static_cast<size_t>(i)] * sin(xs[static_cast<size_t>(i)]));
                }
                for (int i = 0; i < lambda; ++i) out.push_back(xs[static_cast<size_t>(q + i)]);
                return out;
            };
            break;
        }
    }

    return finalize_spec(std::move(spec));
}

/// One-line descriptions for the CLI's list-families subcommand.
inline std::vector<std::pair<std::string, std::string>> family_descriptions() {
    return {
        {"cylinder",
         "gamma x Id over a plane curve in R^{p+1}; params: n, p, curve.kappa "
         "(exponential b*e^{a*s} or expression), curve.range"},
        {"generalized_cone",
         "(z1*gamma(s), z2..) over a curve in S^{p+1}; params: n, p, curve.kappa, curve.range"},
        {"rotational",
         "(z1..zp, z_{p+1}*y) over a curve in the upper half-space H^{p+1}; params: n, p, "
         "curve.kappa (inverse_sqrt 1/sqrt(c3*s+c4) or expression), curve.range"},
        {"standard_cylinder", "S^k x R^{n-k} in R^{n+1}; params: n, k"},
        {"standard_cone", "cone over S^k(r) inside S^{k+1}, ruled flat factor; params: n, k, r"},
        {"standard_torus",
         "S^k(r) x S^{n-k}(sqrt(1-r^2)) in S^{n+1}, stereographically projected; params: n, k, r"},
        {"circles_product",
         "S^1(r_1) x ... x S^1(r_q) x R^lambda in R^{2q+lambda}; params: n, lambda, radii"},
    };
}

}  // namespace mgeo
