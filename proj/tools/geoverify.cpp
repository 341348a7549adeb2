// Command-line front-end: run the verification suite over a configured
// immersion, list the built-in families, or check a curvature function
// against the closed-form reduction.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "mgeo/config.hpp"
#include "mgeo/runner.hpp"

namespace {

int cmd_verify(const std::string& config_path, const std::string& out_override,
               const std::string& format, int jobs) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open config file '" << config_path << "'\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    mgeo::RunConfig cfg;
    try {
        cfg = mgeo::parse_config(buf.str());
    } catch (const mgeo::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    if (!out_override.empty()) cfg.out_path = out_override;
    if (jobs > 0) cfg.jobs = jobs;
    if (format == "csv" && cfg.csv_path.empty()) {
        std::string stem = cfg.out_path;
        auto dot = stem.rfind('.');
        if (dot != std::string::npos) stem = stem.substr(0, dot);
        cfg.csv_path = stem + ".csv";
    }

    mgeo::RunResult rr = mgeo::run(cfg);

    std::ofstream out(cfg.out_path);
    if (!out) {
        std::cerr << "error: cannot write report to '" << cfg.out_path << "'\n";
        return 1;
    }
    out << rr.report.dump(2) << "\n";
    if (!cfg.csv_path.empty()) {
        std::ofstream csv(cfg.csv_path);
        csv << rr.csv;
    }

    if (rr.report.contains("checks")) {
        for (const auto& c : rr.report["checks"]) {
            std::printf("%-24s max residual %11.4e  tol %8.1e  %s\n",
                        c["name"].get<std::string>().c_str(),
                        c["max_residual"].get<double>(), c["tolerance"].get<double>(),
                        c["passed"].get<bool>() ? "PASS" : "FAIL");
        }
    }
    std::string status = rr.report.value("status", "unknown");
    std::printf("status: %s (report: %s)\n", status.c_str(), cfg.out_path.c_str());
    if (rr.report.contains("error"))
        std::printf("error: %s\n", rr.report["error"].get<std::string>().c_str());
    return rr.exit_code;
}

int cmd_list_families() {
    for (const auto& [name, desc] : mgeo::family_descriptions())
        std::printf("%-18s %s\n", name.c_str(), desc.c_str());
    return 0;
}

int cmd_ode_check(int c, const std::string& kappa, const std::string& range, int samples,
                  double tol) {
    double a = 0.0, b = 1.0;
    auto colon = range.find(':');
    if (colon == std::string::npos) {
        std::cerr << "error: --range must look like a:b\n";
        return 1;
    }
    try {
        a = std::stod(range.substr(0, colon));
        b = std::stod(range.substr(colon + 1));
    } catch (...) {
        std::cerr << "error: --range must look like a:b\n";
        return 1;
    }
    if (!(b > a)) {
        std::cerr << "error: empty range\n";
        return 1;
    }
    try {
        mgeo::KappaFn fn;
        if (kappa == "exponential" || kappa == "exp")
            fn = mgeo::KappaFn::exponential(1.0, 1.0);
        else
            fn = mgeo::KappaFn::expression(kappa);
        double worst = 0.0, worst_s = a;
        for (int t = 0; t <= samples; ++t) {
            double s = a + (b - a) * t / samples;
            double r = std::abs(mgeo::ode_residual_for_c(c, fn, s));
            if (r > worst) {
                worst = r;
                worst_s = s;
            }
        }
        std::printf("ode residual: max %.6e at s = %g over [%g, %g] (branch c=%d)\n", worst,
                    worst_s, a, b, c);
        bool pass = worst <= tol;
        std::printf("%s (tolerance %.1e)\n", pass ? "PASS" : "FAIL", tol);
        return pass ? 0 : 2;
    } catch (const mgeo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Moebius-geometric invariants of chart immersions: compute the conformal "
        "invariant tensors and verify the compatibility equations, semi-parallelity "
        "criteria and curvature reductions at sampled points"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "json", kappa, range = "0:1";
    int jobs = 0, c_branch = 0, samples = 100;
    double ode_tol = 1e-10;

    auto* verify = app.add_subcommand("verify", "run configured checks and write a report");
    verify->add_option("--config", config_path, "run configuration file")->required();
    verify->add_option("--out", out_path, "report path (overrides output.path)");
    verify->add_option("--format", format, "json | csv (csv adds a per-point residual table)")
        ->check(CLI::IsMember({"json", "csv"}));
    verify->add_option("--jobs", jobs, "worker thread count (default: GEOVERIFY_JOBS or cores)");

    auto* lf = app.add_subcommand("list-families", "list built-in immersion families");

    auto* ode = app.add_subcommand("ode-check",
                                   "evaluate the closed-form curvature reduction residual");
    ode->add_option("--c", c_branch,
                    "branch selector: 0 = cylinder (curve in R^{p+1}), -1 = cone (curve in "
                    "S^{p+1}), 1 = rotational (curve in H^{p+1})")
        ->required()
        ->check(CLI::IsMember({-1, 0, 1}));
    ode->add_option("--kappa", kappa, "curvature expression in s (or 'exp' for e^s)")->required();
    ode->add_option("--range", range, "arc-length interval a:b");
    ode->add_option("--samples", samples, "sample count across the range")
        ->check(CLI::PositiveNumber);
    ode->add_option("--tol", ode_tol, "pass/fail tolerance");

    CLI11_PARSE(app, argc, argv);

    if (verify->parsed()) return cmd_verify(config_path, out_path, format, jobs);
    if (lf->parsed()) return cmd_list_families();
    if (ode->parsed()) return cmd_ode_check(c_branch, kappa, range, samples, ode_tol);
    return 1;
}
