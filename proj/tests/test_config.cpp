#include <catch2/catch_amalgamated.hpp>

#include "mgeo/config.hpp"
#include "mgeo/runner.hpp"

using namespace mgeo;

namespace {

const char* kCylinderConfig = R"(
# Theorem-style run: log-spiral cylinder
family = cylinder
n = 3
p = 1
checks = gauss,ricci,semiparallel,identities
seed = 42
samples.grid = 4x3x3
samples.inset = 0.1

[curve]
kappa = exp
a = 1
b = 1
range = 0:1
)";

}  // namespace

TEST_CASE("parse_config fills defaults and echoes keys") {
    auto cfg = parse_config(kCylinderConfig);
    REQUIRE(cfg.family == "cylinder");
    REQUIRE(cfg.instance.n == 3);
    REQUIRE(cfg.instance.curve.has_value());
    REQUIRE(cfg.instance.curve->kappa.eval(1.0) == Catch::Approx(std::exp(1.0)));
    REQUIRE(cfg.checks == std::vector<std::string>{"gauss", "ricci", "semiparallel", "identities"});
    REQUIRE(cfg.tol_default == 1e-7);
    REQUIRE(cfg.seed == 42);
    REQUIRE(cfg.inset == 0.1);
    REQUIRE(cfg.grid == std::vector<int>{4, 3, 3});
    REQUIRE(cfg.echo.count("curve.kappa") == 1);
}

TEST_CASE("grid sampling respects counts and inset") {
    Box box;
    box.lo = VectorXd::Zero(3);
    box.hi = VectorXd::Ones(3);
    auto pts = detail::sample_grid(box, {10, 10, 10}, 0.1);
    REQUIRE(pts.size() == 1000);
    for (const auto& x : pts)
        for (int i = 0; i < 3; ++i) {
            REQUIRE(x[i] >= 0.1 - 1e-12);
            REQUIRE(x[i] <= 0.9 + 1e-12);
        }
    REQUIRE(detail::sample_grid(box, {1, 1, 1}, 0.1).size() == 1);
}

TEST_CASE("config validation errors") {
    REQUIRE_THROWS_AS(parse_config("family = cylinder\nchecks = \n"), ConfigError);
    REQUIRE_THROWS_AS(parse_config("checks = all\n"), ConfigError);  // missing family
    REQUIRE_THROWS_AS(parse_config("family = cylinder\nsamples.inset = 0.7\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_config("family = nosuch\nchecks = all\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_config("family = cylinder\nn = abc\n"), ConfigError);
    REQUIRE_THROWS_AS(parse_config("family = cylinder\nchecks = gauss,frobnicate\n"),
                      ConfigError);

    // unknown keys come back with a nearest-match suggestion
    try {
        parse_config("family = cylinder\nsamples.gird = 3\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("samples.grid") != std::string::npos);
    }
}

TEST_CASE("runner executes checks and honors the exit-code contract") {
    auto cfg = parse_config(kCylinderConfig);
    cfg.jobs = 2;
    auto rr = run(cfg);
    REQUIRE(rr.exit_code == 0);
    REQUIRE(rr.report["status"] == "passed");
    bool saw_semi = false;
    for (const auto& c : rr.report["checks"]) {
        REQUIRE(c["passed"].get<bool>());
        if (c["name"] == "moebius_semiparallel") {
            saw_semi = true;
            REQUIRE(c["max_residual"].get<double>() < 1e-7);
        }
    }
    REQUIRE(saw_semi);

    // perturbed curvature: structure equations pass, semi-parallelity fails
    std::string bad = kCylinderConfig;
    auto pos = bad.find("kappa = exp");
    bad.replace(pos, std::string("kappa = exp").size(), "kappa = \"exp(s) + 0.1*s^2\"");
    auto cfg2 = parse_config(bad);
    cfg2.jobs = 2;
    auto rr2 = run(cfg2);
    REQUIRE(rr2.exit_code == 2);
    for (const auto& c : rr2.report["checks"]) {
        if (c["name"] == "moebius_semiparallel")
            REQUIRE_FALSE(c["passed"].get<bool>());
        else if (c["name"] == "conformal_gauss" || c["name"] == "conformal_ricci")
            REQUIRE(c["passed"].get<bool>());
    }
}

TEST_CASE("reports are deterministic apart from the timestamp") {
    auto cfg = parse_config(kCylinderConfig);
    cfg.jobs = 3;
    auto r1 = run(cfg);
    auto r2 = run(cfg);
    r1.report.erase("generated_at");
    r2.report.erase("generated_at");
    REQUIRE(r1.report.dump() == r2.report.dump());
    REQUIRE(r1.csv == r2.csv);
}

TEST_CASE("custom expression charts run end to end") {
    const char* custom = R"(
family = custom
chart.n = 2
chart.f1 = x1
chart.f2 = x2
chart.f3 = x1^2 - x2^2
chart.f4 = 2*x1*x2
domain = -1:1,-1:1
checks = gauss,codazzi,ricci
samples.grid = 4x4
)";
    auto cfg = parse_config(custom);
    auto rr = run(cfg);
    REQUIRE(rr.exit_code == 0);
    for (const auto& c : rr.report["checks"]) REQUIRE(c["passed"].get<bool>());
}

TEST_CASE("ode check appears in reports for curve families") {
    const char* conf = R"(
family = rotational
n = 3
p = 1
curve.kappa = inverse_sqrt
curve.c3 = 1
curve.c4 = 1
curve.range = 0:1
checks = ode
samples.grid = 2x2x2
)";
    auto cfg = parse_config(conf);
    auto rr = run(cfg);
    REQUIRE(rr.exit_code == 0);
    REQUIRE(rr.report["checks"][0]["name"] == "curvature_ode");
    REQUIRE(rr.report["checks"][0]["max_residual"].get<double>() < 1e-10);
}

TEST_CASE("umbilic sample points are skipped with notice, not dropped silently") {
    const char* conf = R"(
family = custom
chart.n = 2
chart.f1 = cos(x1)*cos(x2)
chart.f2 = sin(x1)*cos(x2)
chart.f3 = sin(x2)
domain = -0.5:0.5,-0.5:0.5
checks = gauss
samples.grid = 3x3
)";
    auto cfg = parse_config(conf);
    auto rr = run(cfg);
    // the whole sample set is umbilic: nothing evaluated, check cannot pass
    REQUIRE(rr.report["skipped_points"].get<int>() == 9);
    REQUIRE(rr.exit_code == 2);
}
