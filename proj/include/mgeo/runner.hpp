#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mgeo/checks.hpp"
#include "mgeo/config.hpp"

namespace mgeo {

using ordered_json = nlohmann::ordered_json;

/// Aggregated result of one named check over a point set.
struct ResidualReport {
    std::string check_name;
    double tolerance = 0.0;
    double max_residual = 0.0;
    int argmax = -1;  // index into the sampled point list
    bool passed = false;
    int evaluated = 0;
    int skipped = 0;  // umbilic / domain-edge points, skipped with notice
    ordered_json metadata;
};

struct RunResult {
    int exit_code = 1;
    ordered_json report;
    std::string csv;
};

namespace detail {

inline std::vector<VectorXd> sample_grid(const Box& box, const std::vector<int>& counts,
                                         double inset) {
    const int n = box.dim();
    std::vector<int> c(static_cast<size_t>(n), counts.empty() ? 3 : counts.back());
    for (int i = 0; i < n && i < static_cast<int>(counts.size()); ++i)
        c[static_cast<size_t>(i)] = counts[static_cast<size_t>(i)];

    std::vector<std::vector<double>> axes(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double lo = box.lo[i], hi = box.hi[i];
        double a = lo + inset * (hi - lo), b = hi - inset * (hi - lo);
        int cnt = c[static_cast<size_t>(i)];
        for (int t = 0; t < cnt; ++t)
            axes[static_cast<size_t>(i)].push_back(
                cnt == 1 ? 0.5 * (a + b) : a + (b - a) * t / (cnt - 1));
    }
    std::vector<VectorXd> pts;
    std::vector<int> idx(static_cast<size_t>(n), 0);
    for (;;) {
        VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = axes[static_cast<size_t>(i)][static_cast<size_t>(idx[static_cast<size_t>(i)])];
        pts.push_back(x);
        int i = 0;
        for (; i < n; ++i) {
            if (++idx[static_cast<size_t>(i)] < c[static_cast<size_t>(i)]) break;
            idx[static_cast<size_t>(i)] = 0;
        }
        if (i == n) break;
        if (pts.size() > 200000) throw ConfigError("sample grid too large");
    }
    return pts;
}

inline int job_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GEOVERIFY_JOBS")) {
        int j = std::atoi(env);
        if (j > 0) return j;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Per-point scalar residuals gathered in one analysis pass.
struct PointChecks {
    bool skipped = false;
    std::string skip_reason;
    std::map<std::string, double> residual;
    std::optional<checks::ClassificationRecord> classify;
    double s_star = 0.0;
    std::optional<SpectralData> spectral;
};

inline std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%FT%TZ");
    return os.str();
}

}  // namespace detail

/**
 * Execute the configured checks over sampled points. Point evaluations run
 * in parallel; reduction is in sorted point order so reports are identical
 * regardless of scheduling.
 */
inline RunResult run(const RunConfig& cfg) {
    RunResult rr;
    ordered_json& rep = rr.report;
    rep["schema_version"] = "1";
    rep["generated_at"] = detail::iso_timestamp();
    {
        ordered_json echo = ordered_json::object();
        for (const auto& [k, v] : cfg.echo) echo[k] = v;
        rep["config"] = echo;
    }

    ImmersionSpec spec;
    std::vector<VectorXd> points;
    try {
        spec = build_spec(cfg);
        points = cfg.explicit_points.empty()
                     ? detail::sample_grid(spec.domain, cfg.grid, cfg.inset)
                     : cfg.explicit_points;
        for (const auto& x : points)
            if (static_cast<int>(x.size()) != spec.n)
                throw ConfigError("explicit sample point has wrong dimension");
    } catch (const Error& e) {
        rep["status"] = "config_error";
        rep["error"] = e.what();
        rr.exit_code = 1;
        return rr;
    }

    rep["run"] = {{"family", cfg.family},
                  {"immersion", spec.name},
                  {"n", spec.n},
                  {"m", spec.m},
                  {"p", spec.m - spec.n},
                  {"seed", cfg.seed},
                  {"num_points", points.size()},
                  {"checks", cfg.checks}};

    auto selected = [&](const std::string& c) {
        return std::find(cfg.checks.begin(), cfg.checks.end(), c) != cfg.checks.end();
    };

    const bool need_psi_deriv = selected("codazzi");
    const bool need_spectral =
        selected("semiparallel") || selected("identities") || selected("classify");

    AnalysisOptions base_opt;
    base_opt.psi_derivatives = need_psi_deriv;
    base_opt.spectral = need_spectral;

    std::vector<detail::PointChecks> results(points.size());
    std::atomic<size_t> next{0};
    std::mutex err_mu;
    std::pair<size_t, std::string> fatal{points.size(), ""};  // lowest failing index wins

    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            detail::PointChecks& out = results[i];
            try {
                AnalysisOptions opt = base_opt;
                opt.seed = cfg.seed + i;
                PointAnalysis A = analyze_point(spec, points[i], opt);
                out.s_star = A.s_star;
                if (selected("gauss")) out.residual["gauss"] = checks::gauss_residual(A);
                if (selected("codazzi"))
                    out.residual["codazzi"] =
                        std::max(checks::codazzi1_residual(A), checks::codazzi2_residual(A));
                if (selected("ricci"))
                    out.residual["ricci"] =
                        std::max(checks::ricci1_residual(A), checks::ricci2_residual(A));
                if (selected("parallel")) out.residual["parallel"] = checks::parallel_residual(A);
                if (selected("semiparallel")) {
                    out.residual["semiparallel"] = checks::semiparallel_tensor_residual(A);
                    out.residual["semiparallel_dualpath"] =
                        checks::semiparallel_dualpath_residual(A);
                    if (!A.spectral)
                        throw NonCommutingError("semiparallel criterion needs spectral data: " +
                                                A.spectral_error);
                    out.residual["semiparallel_criterion"] = checks::criterion_residual(*A.spectral);
                }
                if (selected("identities"))
                    out.residual["identities"] = checks::identity_residuals(A).max();
                if (selected("classify")) {
                    out.classify = checks::classify_spectrum(A, cfg.tolerance_for("classify"));
                    out.spectral = A.spectral;
                }
            } catch (const UmbilicError& e) {
                out.skipped = true;
                out.skip_reason = e.what();
            } catch (const DomainError& e) {
                out.skipped = true;
                out.skip_reason = e.what();
            } catch (const Error& e) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (i < fatal.first) fatal = {i, e.what()};
                return;
            }
        }
    };

    {
        int jobs = detail::job_count(cfg.jobs);
        std::vector<std::thread> ts;
        for (int j = 1; j < jobs; ++j) ts.emplace_back(worker);
        worker();
        for (auto& t : ts) t.join();
    }

    ordered_json checks_json = ordered_json::array();
    std::ostringstream csv;
    csv << "point_index,check,residual\n";
    csv.setf(std::ios::scientific);
    csv.precision(12);

    bool all_passed = true;
    std::string runtime_error_msg;
    if (!fatal.second.empty()) runtime_error_msg = fatal.second;

    auto point_json = [&](int idx) {
        ordered_json pj = ordered_json::array();
        if (idx >= 0)
            for (int c = 0; c < points[static_cast<size_t>(idx)].size(); ++c)
                pj.push_back(points[static_cast<size_t>(idx)][c]);
        return pj;
    };

    auto reduce_scalar = [&](const std::string& key, const std::string& report_name,
                             double tol) -> ResidualReport {
        ResidualReport r;
        r.check_name = report_name;
        r.tolerance = tol;
        for (size_t i = 0; i < results.size(); ++i) {
            if (results[i].skipped) {
                r.skipped++;
                continue;
            }
            auto it = results[i].residual.find(key);
            if (it == results[i].residual.end()) continue;
            r.evaluated++;
            csv << i << "," << key << "," << it->second << "\n";
            if (it->second > r.max_residual || r.argmax < 0) {
                r.max_residual = it->second;
                r.argmax = static_cast<int>(i);
            }
        }
        r.passed = r.evaluated > 0 && r.max_residual <= tol;
        return r;
    };

    auto emit = [&](const ResidualReport& r) {
        ordered_json j;
        j["name"] = r.check_name;
        j["tolerance"] = r.tolerance;
        j["max_residual"] = r.max_residual;
        j["point_of_max"] = point_json(r.argmax);
        j["passed"] = r.passed;
        j["evaluated_points"] = r.evaluated;
        j["skipped_points"] = r.skipped;
        if (!r.metadata.is_null()) j["metadata"] = r.metadata;
        checks_json.push_back(j);
        if (!r.passed) all_passed = false;
    };

    if (runtime_error_msg.empty()) {
        for (const auto& name : cfg.checks) {
            if (name == "gauss") {
                emit(reduce_scalar("gauss", "conformal_gauss", cfg.tolerance_for("gauss")));
            } else if (name == "codazzi") {
                emit(reduce_scalar("codazzi", "conformal_codazzi", cfg.tolerance_for("codazzi")));
            } else if (name == "ricci") {
                emit(reduce_scalar("ricci", "conformal_ricci", cfg.tolerance_for("ricci")));
            } else if (name == "parallel") {
                emit(reduce_scalar("parallel", "moebius_parallel", cfg.tolerance_for("parallel")));
            } else if (name == "semiparallel") {
                double tol = cfg.tolerance_for("semiparallel");
                ResidualReport tensor = reduce_scalar("semiparallel", "moebius_semiparallel", tol);
                ResidualReport crit =
                    reduce_scalar("semiparallel_criterion", "semiparallel_criterion", tol);
                ResidualReport dual =
                    reduce_scalar("semiparallel_dualpath", "semiparallel_dualpath", tol);
                if (tensor.evaluated > 0 && crit.evaluated > 0 && tensor.passed != crit.passed) {
                    runtime_error_msg =
                        "verdict disagreement between the pairwise criterion and the tensor "
                        "residual (tolerance miscalibration)";
                    break;
                }
                tensor.metadata = {{"criterion_max_residual", crit.max_residual},
                                   {"criterion_passed", crit.passed},
                                   {"dualpath_max_residual", dual.max_residual}};
                emit(tensor);
            } else if (name == "identities") {
                emit(reduce_scalar("identities", "norm_trace_identities",
                                   cfg.tolerance_for("identities")));
            } else if (name == "classify") {
                ResidualReport r;
                r.check_name = "classify_spectrum";
                r.tolerance = cfg.tolerance_for("classify");
                const detail::PointChecks* first = nullptr;
                bool consistent = true, lemma52 = true;
                double smin = 0.0, smax = 0.0;
                for (size_t i = 0; i < results.size(); ++i) {
                    if (results[i].skipped || !results[i].classify) {
                        r.skipped += results[i].skipped ? 1 : 0;
                        continue;
                    }
                    const auto& rec = *results[i].classify;
                    if (!first) {
                        first = &results[i];
                        smin = smax = results[i].s_star;
                    } else {
                        smin = std::min(smin, results[i].s_star);
                        smax = std::max(smax, results[i].s_star);
                        consistent = consistent && rec.k == first->classify->k &&
                                     rec.mult == first->classify->mult;
                    }
                    lemma52 = lemma52 && rec.lemma52_ok;
                    r.evaluated++;
                }
                if (first) {
                    const auto& rec = *first->classify;
                    bool iso = rec.isoparametric;
                    double probe = -1.0;
                    if (!iso && rec.omega_max < r.tolerance && rec.k >= 3) {
                        PointAnalysis A0 = analyze_point(
                            spec, points[static_cast<size_t>(first - results.data())], base_opt);
                        probe = checks::eta_parallel_probe(spec, A0, base_opt);
                        iso = probe < 5e-4;
                    }
                    r.metadata = {{"k", rec.k},
                                  {"multiplicities", rec.mult},
                                  {"h_values", rec.h},
                                  {"case_tag", std::string(1, rec.case_tag)},
                                  {"zero_h_count", rec.zero_h_count},
                                  {"k_le_p_plus_1", rec.k_le_p_plus_1},
                                  {"orthogonality_residual", rec.orthogonality_residual},
                                  {"omega_max", rec.omega_max},
                                  {"mixed_sectional_max", rec.mixed_K_max},
                                  {"isoparametric", iso},
                                  {"eta_parallel_probe", probe},
                                  {"s_star_spread", smax - smin},
                                  {"consistent_across_points", consistent}};
                    rep["spectral_summary"] = r.metadata;
                }
                r.passed = first != nullptr && lemma52 && consistent;
                r.max_residual = first ? first->classify->orthogonality_residual : 0.0;
                emit(r);
            } else if (name == "ode") {
                ResidualReport r;
                r.check_name = "curvature_ode";
                r.tolerance = cfg.tolerance_for("ode");
                if (cfg.family != "custom" && cfg.instance.curve) {
                    const CurveSpec& cs = *cfg.instance.curve;
                    for (int t = 0; t <= 100; ++t) {
                        double s = cs.s0 + (cs.s1 - cs.s0) * t / 100.0;
                        double res = std::abs(ode_residual(cs, s));
                        r.evaluated++;
                        if (res > r.max_residual) r.max_residual = res;
                    }
                    r.passed = r.max_residual <= r.tolerance;
                    r.metadata = {{"space_form", space_form_name(cs.form)}};
                    emit(r);
                } else {
                    r.metadata = {{"note", "family has no generating curve; check skipped"}};
                    r.passed = true;
                    emit(r);
                }
            }
        }
    }

    rep["checks"] = checks_json;
    int total_skipped = 0;
    for (const auto& pc : results) total_skipped += pc.skipped ? 1 : 0;
    rep["skipped_points"] = total_skipped;

    if (!runtime_error_msg.empty()) {
        rep["status"] = "runtime_error";
        rep["error"] = runtime_error_msg;
        rr.exit_code = 1;  // partial report still flushed by the caller
    } else {
        rep["status"] = all_passed ? "passed" : "failed";
        rr.exit_code = all_passed ? 0 : 2;
    }
    rr.csv = csv.str();
    return rr;
}

}  // namespace mgeo
