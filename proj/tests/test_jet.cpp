#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mgeo/extrinsic.hpp"
#include "mgeo/jet_eval.hpp"

using namespace mgeo;

TEST_CASE("multi-index table is a complete graded simplex") {
    auto sp = JetSpace::get(3, 4);
    REQUIRE(sp->count(0) == 1);
    REQUIRE(sp->count(1) == 4);
    REQUIRE(sp->count(4) == 35);  // C(3+4, 3)
    // every index of degree <= 4 has a position, and degrees are graded
    int last_deg = 0;
    for (int pos = 0; pos < sp->total_count(); ++pos) {
        REQUIRE(sp->degree(pos) >= last_deg);
        last_deg = sp->degree(pos);
    }
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; a + b <= 4; ++b)
            for (int c = 0; a + b + c <= 4; ++c) REQUIRE(sp->position({a, b, c}) >= 0);
    REQUIRE(sp->position({5, 0, 0}) == -1);
}

TEST_CASE("univariate jets reproduce classic Taylor data") {
    auto sp = JetSpace::get(1, 4);
    Jet t = Jet::variable(sp, 0, 0.0, 4);

    Jet e = exp(t);
    for (int k = 0; k <= 4; ++k) REQUIRE(e.partial({k}) == Catch::Approx(1.0).margin(1e-15));

    Jet s = sin(t);
    REQUIRE(s.partial({0}) == Catch::Approx(0.0).margin(1e-16));
    REQUIRE(s.partial({1}) == Catch::Approx(1.0));
    REQUIRE(s.partial({2}) == Catch::Approx(0.0).margin(1e-16));
    REQUIRE(s.partial({3}) == Catch::Approx(-1.0));
}

TEST_CASE("polynomial partials are exact") {
    auto sp = JetSpace::get(2, 4);
    Jet u = Jet::variable(sp, 0, 1.0, 4);
    Jet v = Jet::variable(sp, 1, 2.0, 4);
    REQUIRE((u * v).partial({1, 1}) == 1.0);
    REQUIRE((u * u).partial({2, 0}) == 2.0);
    // all third-order partials of the degree-2 chart vanish identically
    for (int a = 0; a <= 3; ++a) {
        int b = 3 - a;
        REQUIRE((u * v).partial({a, b}) == 0.0);
        REQUIRE((u * u).partial({a, b}) == 0.0);
    }
}

TEST_CASE("jet arithmetic matches closed forms on random data") {
    auto sp = JetSpace::get(2, 4);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.3, 1.7);
    for (int trial = 0; trial < 50; ++trial) {
        double a = U(rng), b = U(rng);
        Jet x = Jet::variable(sp, 0, a, 4);
        Jet y = Jet::variable(sp, 1, b, 4);
        // log(exp(x)*exp(y)) == x + y, coefficientwise
        Jet lhs = log(exp(x) * exp(y));
        Jet rhs = x + y;
        for (int pos = 0; pos < sp->count(4); ++pos)
            REQUIRE(lhs.coeff(pos) == Catch::Approx(rhs.coeff(pos)).margin(1e-12));
        // sqrt(x)^2 == x
        Jet s2 = sqrt(x) * sqrt(x);
        for (int pos = 0; pos < sp->count(4); ++pos)
            REQUIRE(s2.coeff(pos) == Catch::Approx(x.coeff(pos)).margin(1e-13));
        // 1/(x/y) == y/x
        Jet q = Jet::constant(sp, 1.0, 4) / (x / y);
        Jet q2 = y / x;
        for (int pos = 0; pos < sp->count(4); ++pos)
            REQUIRE(q.coeff(pos) == Catch::Approx(q2.coeff(pos)).margin(1e-12));
        // pow_int vs repeated product
        Jet p5 = pow_int(x + y, 5);
        Jet p5m = (x + y) * (x + y) * (x + y) * (x + y) * (x + y);
        for (int pos = 0; pos < sp->count(4); ++pos)
            REQUIRE(p5.coeff(pos) == Catch::Approx(p5m.coeff(pos)).margin(1e-11));
    }
}

TEST_CASE("derivative-of-jet agrees with higher coefficients") {
    auto sp = JetSpace::get(2, 4);
    Jet x = Jet::variable(sp, 0, 0.7, 4);
    Jet y = Jet::variable(sp, 1, -0.4, 4);
    Jet f = sin(x * y) + exp(x) / (2.0 + y);
    Jet fx = f.d(0);
    REQUIRE(fx.order() == 3);
    REQUIRE(fx.partial({0, 0}) == Catch::Approx(f.partial({1, 0})));
    REQUIRE(fx.partial({1, 1}) == Catch::Approx(f.partial({2, 1})));
    REQUIRE(fx.d(1).partial({1, 0}) == Catch::Approx(f.partial({2, 1})));
}

TEST_CASE("domain guards throw located errors") {
    auto sp = JetSpace::get(1, 3);
    Jet x = Jet::variable(sp, 0, -1.0, 3);
    REQUIRE_THROWS_AS(log(x), EvalDomainError);
    REQUIRE_THROWS_AS(sqrt(x), EvalDomainError);
    REQUIRE_THROWS_AS(pow_real(x, 0.5), EvalDomainError);
    Jet z = Jet::constant(sp, 0.0, 3);
    REQUIRE_THROWS_AS(x / z, EvalDomainError);
}

// --- jet_eval / fd_crosscheck -------------------------------------------------

static ImmersionSpec poly_chart() {
    Box box;
    box.lo = VectorXd::Constant(2, -3.0);
    box.hi = VectorXd::Constant(2, 3.0);
    return finalize_spec(
        chart_from_expressions("poly", 2, {"x1*x2", "x1^2", "x2"}, box));
}

TEST_CASE("jet_eval returns the complete simplex of partials") {
    ImmersionSpec spec = poly_chart();
    ChartPoint x{(VectorXd(2) << 1.0, 2.0).finished()};
    Jet4 jet = jet_eval(spec, x, 4);
    REQUIRE(jet.partials.size() == 15);  // C(2+4, 2)
    REQUIRE(jet.at({0, 0})[0] == Catch::Approx(2.0));
    REQUIRE(jet.at({1, 1})[0] == Catch::Approx(1.0));  // d2 f1 / dx1 dx2
    REQUIRE(jet.at({2, 0})[1] == Catch::Approx(2.0));  // d2 f2 / dx1^2
    for (const auto& [alpha, vals] : jet.partials) {
        int deg = alpha[0] + alpha[1];
        if (deg == 3) REQUIRE(vals.norm() == Catch::Approx(0.0).margin(1e-14));
    }
    REQUIRE_THROWS_AS(jet_eval(spec, x, 5), DomainError);
    REQUIRE_THROWS_AS(jet_eval(spec, x, 0), DomainError);
    ChartPoint outside{(VectorXd(2) << 5.0, 0.0).finished()};
    REQUIRE_THROWS_AS(jet_eval(spec, outside, 2), DomainError);
}

TEST_CASE("fd_crosscheck bounds") {
    ImmersionSpec poly = poly_chart();
    ChartPoint x{(VectorXd(2) << 0.4, -0.3).finished()};
    REQUIRE(fd_crosscheck(poly, x, 1e-3) < 1e-9);  // FD exact on degree <= 2

    Box box1;
    box1.lo = VectorXd::Constant(1, -1.0);
    box1.hi = VectorXd::Constant(1, 1.0);
    auto ex = finalize_spec(chart_from_expressions("exp", 1, {"exp(x1)", "x1"}, box1));
    REQUIRE(fd_crosscheck(ex, ChartPoint{VectorXd::Zero(1)}, 1e-4) < 1e-7);

    REQUIRE_THROWS_AS(fd_crosscheck(poly, x, 0.0), DomainError);
    ChartPoint near_edge{(VectorXd(2) << 1.9999, 0.0).finished()};
    REQUIRE_THROWS_AS(fd_crosscheck(poly, near_edge, 1e-3), DomainError);
}

TEST_CASE("composed conformal map jets equal the hand-fused chart") {
    // sigma applied to a polynomial plane chart, against the written-out
    // composition evaluated as one expression chart
    Box box;
    box.lo = VectorXd::Constant(2, -0.8);
    box.hi = VectorXd::Constant(2, 0.8);
    auto base = chart_from_expressions("plane", 2, {"x1", "x2", "x1*x2"}, box);
    auto composed = finalize_spec(apply_conformal_map(base, ConformalMapTag::Sigma));

    std::vector<std::string> fused;
    const std::string n2 = "(x1^2 + x2^2 + (x1*x2)^2)";
    fused.push_back("(1 - " + n2 + ")/(1 + " + n2 + ")");
    for (const std::string c : {"x1", "x2", "x1*x2"})
        fused.push_back("2*" + c + "/(1 + " + n2 + ")");
    auto hand = finalize_spec(chart_from_expressions("fused", 2, fused, box));

    ChartPoint x{(VectorXd(2) << 0.3, -0.5).finished()};
    Jet4 a = jet_eval(composed, x, 4);
    Jet4 b = jet_eval(hand, x, 4);
    for (const auto& [alpha, va] : a.partials) {
        const VectorXd& vb = b.at(alpha);
        for (int c = 0; c < va.size(); ++c)
            REQUIRE(va[c] == Catch::Approx(vb[c]).margin(1e-12 * (1.0 + std::abs(va[c]))));
    }
}

TEST_CASE("fd_crosscheck stays below 1e-5 on built-in style charts") {
    Box box;
    box.lo = VectorXd::Constant(2, -1.0);
    box.hi = VectorXd::Constant(2, 1.0);
    auto spec = finalize_spec(chart_from_expressions(
        "wavy", 2, {"cos(x1)", "sin(x1)*exp(0.3*x2)", "x2", "x1*x2"}, box));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    for (int t = 0; t < 100; ++t) {
        ChartPoint x{(VectorXd(2) << U(rng), U(rng)).finished()};
        REQUIRE(fd_crosscheck(spec, x, 1e-4) < 1e-5);
    }
}

TEST_CASE("non-finite chart values raise located errors") {
    Box box;
    box.lo = VectorXd::Constant(2, -2.0);
    box.hi = VectorXd::Constant(2, 2.0);
    auto spec = finalize_spec(chart_from_expressions("singular", 2,
                                                     {"1/(x1 - 1)", "x2", "x1*x1*x1"}, box));
    REQUIRE_THROWS_AS(eval_chart(spec, (VectorXd(2) << 1.0, 0.0).finished(), 2),
                      EvalDomainError);
}
