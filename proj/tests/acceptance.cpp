// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Returns nonzero if any criterion
// failed. Criterion families and tolerances are pinned in code below.

#include <sys/wait.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "mgeo/checks.hpp"
#include "mgeo/config.hpp"
#include "mgeo/jet_eval.hpp"
#include "mgeo/runner.hpp"

using namespace mgeo;

namespace {

struct Harness {
    int failed = 0;
    std::vector<std::string> notes;

    void criterion(int idx, const std::string& name, bool ok, const std::string& detail = "") {
        std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", idx, name.c_str(),
                    detail.empty() ? "" : " -- ", detail.c_str());
        if (!ok) ++failed;
    }

    void note(const std::string& s) { std::printf("       note: %s\n", s.c_str()); }
};

std::vector<VectorXd> interior_points(const ImmersionSpec& spec, int count, uint64_t seed,
                                      double inset = 0.12) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(inset, 1.0 - inset);
    std::vector<VectorXd> pts;
    pts.reserve(static_cast<size_t>(count));
    for (int t = 0; t < count; ++t) {
        VectorXd x(spec.n);
        for (int i = 0; i < spec.n; ++i)
            x[i] = spec.domain.lo[i] + U(rng) * (spec.domain.hi[i] - spec.domain.lo[i]);
        pts.push_back(x);
    }
    return pts;
}

/// max over points of fn(analysis); point analyses run in parallel
double max_over_points(const ImmersionSpec& spec, const std::vector<VectorXd>& pts,
                       const AnalysisOptions& opt,
                       const std::function<double(const PointAnalysis&)>& fn) {
    std::atomic<size_t> next{0};
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<double> vals(pts.size(), 0.0);
    std::vector<std::string> errors(pts.size());
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= pts.size()) return;
            try {
                AnalysisOptions o = opt;
                o.seed = opt.seed + i;
                PointAnalysis A = analyze_point(spec, pts[i], o);
                vals[i] = fn(A);
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> ts;
    for (unsigned j = 1; j < jobs; ++j) ts.emplace_back(worker);
    worker();
    for (auto& t : ts) t.join();
    for (const auto& e : errors)
        if (!e.empty()) throw Error("point analysis failed: " + e);
    double worst = 0.0;
    for (double v : vals) worst = std::max(worst, v);
    return worst;
}

ImmersionSpec make_std(FamilyInstance::Tag tag, int n = 3, int k = 1, double r = 0.6) {
    FamilyInstance fi;
    fi.tag = tag;
    fi.n = n;
    fi.k = k;
    fi.sphere_radius = r;
    return build_family(fi);
}

ImmersionSpec make_curve_family(FamilyInstance::Tag tag, const CurveSpec& cs, int n = 3,
                                int p = 1) {
    FamilyInstance fi;
    fi.tag = tag;
    fi.n = n;
    fi.p = p;
    fi.curve = cs;
    return build_family(fi);
}

CurveSpec curve(SpaceForm form, const KappaFn& k, double s0 = 0.0, double s1 = 1.0) {
    CurveSpec cs;
    cs.form = form;
    cs.kappa = k;
    cs.s0 = s0;
    cs.s1 = s1;
    return cs;
}

ImmersionSpec make_circles(int n, int lambda, std::vector<double> radii) {
    FamilyInstance fi;
    fi.tag = FamilyInstance::Tag::CirclesProduct;
    fi.n = n;
    fi.lambda = lambda;
    fi.radii = std::move(radii);
    return build_family(fi);
}

struct NamedSpec {
    std::string name;
    ImmersionSpec spec;
};

std::vector<NamedSpec> all_families() {
    std::vector<NamedSpec> v;
    v.push_back({"standard_cylinder", make_std(FamilyInstance::Tag::StandardCylinder)});
    v.push_back({"standard_cone", make_std(FamilyInstance::Tag::StandardCone)});
    v.push_back({"standard_torus", make_std(FamilyInstance::Tag::StandardTorus)});
    v.push_back({"cylinder_exp",
                 make_curve_family(FamilyInstance::Tag::Cylinder,
                                   curve(SpaceForm::Euclidean, KappaFn::exponential(1.0, 1.0)))});
    v.push_back({"cone_exp",
                 make_curve_family(FamilyInstance::Tag::GeneralizedCone,
                                   curve(SpaceForm::Sphere, KappaFn::exponential(0.8, 0.5)))});
    v.push_back({"rotational_invsqrt",
                 make_curve_family(FamilyInstance::Tag::Rotational,
                                   curve(SpaceForm::Hyperbolic, KappaFn::inverse_sqrt(1.0, 1.0)))});
    v.push_back({"circles_product", make_circles(3, 1, {0.8, 1.25})});
    return v;
}

int run_cli(const std::string& bin, const std::string& args, std::string& out) {
    std::string cmd = bin + " " + args + " > /tmp/geoverify_out.txt 2>&1";
    int rc = std::system(cmd.c_str());
    std::ifstream f("/tmp/geoverify_out.txt");
    std::stringstream ss;
    ss << f.rdbuf();
    out = ss.str();
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    Harness H;
    std::printf("acceptance suite (tolerances pinned in code)\n");

    // ---------------------------------------------------------------- 1
    try {
        AnalysisOptions opt;
        opt.psi_derivatives = true;
        opt.spectral = false;
        double worst = 0.0;
        std::string worst_at;
        auto configs = all_families();
        configs.push_back(
            {"perturbed_cylinder",
             make_curve_family(FamilyInstance::Tag::Cylinder,
                               curve(SpaceForm::Euclidean,
                                     KappaFn::expression("exp(s) + 0.1*s^2")))});
        for (const auto& ns : configs) {
            auto pts = interior_points(ns.spec, 100, 1001);
            double r = max_over_points(ns.spec, pts, opt, [](const PointAnalysis& A) {
                return std::max({checks::gauss_residual(A), checks::codazzi1_residual(A),
                                 checks::codazzi2_residual(A), checks::ricci1_residual(A),
                                 checks::ricci2_residual(A)});
            });
            if (r > worst) {
                worst = r;
                worst_at = ns.name;
            }
        }
        std::ostringstream os;
        os << "max residual " << worst << " (at " << worst_at << "), tol 1e-7";
        H.criterion(1, "structure-equation universality (Gauss, Codazzi, Ricci)", worst < 1e-7,
                    os.str());
    } catch (const Error& e) {
        H.criterion(1, "structure-equation universality", false, e.what());
    }

    // ---------------------------------------------------------------- 2
    try {
        const double tol = 1e-6;
        bool cyl_ok = true, cone_ok = true, rot_beta_ok = true, rot_fiber_ok = true,
             rot_profile_paper = true;
        double rot_profile_dev = 0.0;

        auto beta_matches = [&](const SpectralData& S, int n) {
            double e1 = (n - 1.0) / n, e2 = -1.0 / n;
            double s1 = S.eta_bar[0][0], s2 = S.eta_bar[1][0];
            return (std::abs(s1 - e1) < tol && std::abs(s2 - e2) < tol) ||
                   (std::abs(-s1 - e1) < tol && std::abs(-s2 - e2) < tol);
        };

        // Example 3.1: cylinder over kappa = e^s
        auto cyl = make_curve_family(FamilyInstance::Tag::Cylinder,
                                     curve(SpaceForm::Euclidean, KappaFn::exponential(1.0, 1.0)));
        for (double s : {0.0 + 0.02, 0.5, 1.0 - 0.02}) {  // sampled strictly inside the domain
            auto A = analyze_point(cyl, (VectorXd(3) << s, 0.1, -0.2).finished(), {});
            double kap2 = std::exp(2.0 * s);
            cyl_ok = cyl_ok && beta_matches(*A.spectral, 3);
            cyl_ok = cyl_ok && std::abs(A.spectral->theta[0] - (0.5 / kap2 + 5.0 / 18.0)) < tol;
            cyl_ok =
                cyl_ok && std::abs(A.spectral->theta[1] - (-0.5 * (1.0 / kap2 + 1.0 / 9.0))) < tol;
        }

        // Example 3.2: generalized cone over kappa = 0.8 e^{0.5 s} in S^{p+1}
        auto cone = make_curve_family(FamilyInstance::Tag::GeneralizedCone,
                                      curve(SpaceForm::Sphere, KappaFn::exponential(0.8, 0.5)));
        auto sp1 = JetSpace::get(1, 2);
        for (double s : {0.02, 0.5, 0.98}) {
            auto A = analyze_point(cone, (VectorXd(3) << s, 1.0, 0.1).finished(), {});
            Jet kj = KappaFn::exponential(0.8, 0.5).eval_jet(Jet::variable(sp1, 0, s, 2));
            double k = kj.value(), ks = kj.partial({1}), kss = kj.partial({2});
            double t1 = -kss / (k * k * k) + 1.5 * ks * ks / (k * k * k * k) +
                        0.5 / (k * k) + 5.0 / 18.0;
            double t2 = -0.5 * (ks * ks / (k * k * k * k) + 1.0 / (k * k) + 1.0 / 9.0);
            cone_ok = cone_ok && beta_matches(*A.spectral, 3);
            cone_ok = cone_ok && std::abs(A.spectral->theta[0] - t1) < tol &&
                      std::abs(A.spectral->theta[1] - t2) < tol;
        }

        // Example 3.3: rotational over kappa = 1/sqrt(s+1) in H^{p+1}
        auto rot = make_curve_family(FamilyInstance::Tag::Rotational,
                                     curve(SpaceForm::Hyperbolic, KappaFn::inverse_sqrt(1.0, 1.0)));
        for (double s : {0.02, 0.5, 0.98}) {
            auto A = analyze_point(rot, (VectorXd(3) << s, 0.2, 0.1).finished(), {});
            Jet kj = KappaFn::inverse_sqrt(1.0, 1.0).eval_jet(Jet::variable(sp1, 0, s, 2));
            double k = kj.value(), ks = kj.partial({1}), kss = kj.partial({2});
            rot_beta_ok = rot_beta_ok && beta_matches(*A.spectral, 3);
            double fiber = -0.5 * (ks * ks / (k * k * k * k) - 1.0 / (k * k) + 1.0 / 9.0);
            rot_fiber_ok = rot_fiber_ok && std::abs(A.spectral->theta[1] - fiber) < tol;
            // profile entry as printed in the source text
            double profile_paper = kss / (k * k * k) - 2.5 * ks * ks / (k * k * k * k) -
                                   0.5 / (k * k) + 5.0 / 18.0;
            double dev = std::abs(A.spectral->theta[0] - profile_paper);
            rot_profile_dev = std::max(rot_profile_dev, dev);
            rot_profile_paper = rot_profile_paper && dev < tol;
        }

        bool ok = cyl_ok && cone_ok && rot_beta_ok && rot_fiber_ok && rot_profile_paper;
        std::ostringstream os;
        os << "cylinder " << (cyl_ok ? "ok" : "FAIL") << ", cone " << (cone_ok ? "ok" : "FAIL")
           << ", rotational beta " << (rot_beta_ok ? "ok" : "FAIL") << ", rotational fiber psi "
           << (rot_fiber_ok ? "ok" : "FAIL") << ", rotational profile psi "
           << (rot_profile_paper ? "ok" : "FAIL");
        H.criterion(2, "example table reproduction (beta and psi diagonals)", ok, os.str());
        if (!rot_profile_paper) {
            std::ostringstream ns;
            ns << "rotational profile psi deviates from the printed display by "
               << rot_profile_dev
               << "; the display is inconsistent with the same example's Moebius metric "
                  "(see the measured-value check below)";
            H.note(ns.str());
            // corrected-sign evidence: the measured profile entry satisfies the
            // cylinder-pattern formula with the extra -1/(2 kappa^2) term
            bool corrected_ok = true;
            for (double s : {0.02, 0.5, 0.98}) {
                auto A = analyze_point(rot, (VectorXd(3) << s, 0.2, 0.1).finished(), {});
                Jet kj = KappaFn::inverse_sqrt(1.0, 1.0).eval_jet(Jet::variable(sp1, 0, s, 2));
                double k = kj.value(), ks = kj.partial({1}), kss = kj.partial({2});
                double corrected = -kss / (k * k * k) + 1.5 * ks * ks / (k * k * k * k) -
                                   0.5 / (k * k) + 5.0 / 18.0;
                corrected_ok = corrected_ok && std::abs(A.spectral->theta[0] - corrected) < tol;
            }
            H.note(std::string("measured profile psi matches -k_ss/k^3 + (3/2)k_s^2/k^4 - "
                               "1/(2k^2) + (2n-1)/(2n^2): ") +
                   (corrected_ok ? "yes" : "no"));
        }
    } catch (const Error& e) {
        H.criterion(2, "example table reproduction", false, e.what());
    }

    // ---------------------------------------------------------------- 3
    try {
        struct Cfg {
            std::string name;
            ImmersionSpec spec;
            bool expect_semiparallel;
        };
        std::vector<Cfg> cfgs;
        cfgs.push_back({"standard_cylinder", make_std(FamilyInstance::Tag::StandardCylinder), true});
        cfgs.push_back({"standard_cone", make_std(FamilyInstance::Tag::StandardCone), true});
        cfgs.push_back({"standard_torus", make_std(FamilyInstance::Tag::StandardTorus), true});
        cfgs.push_back({"cylinder_exp",
                        make_curve_family(FamilyInstance::Tag::Cylinder,
                                          curve(SpaceForm::Euclidean, KappaFn::exponential(1.0, 1.0))),
                        true});
        cfgs.push_back({"cone_exp",
                        make_curve_family(FamilyInstance::Tag::GeneralizedCone,
                                          curve(SpaceForm::Sphere, KappaFn::exponential(0.8, 0.5))),
                        true});
        cfgs.push_back({"rotational_invsqrt",
                        make_curve_family(FamilyInstance::Tag::Rotational,
                                          curve(SpaceForm::Hyperbolic, KappaFn::inverse_sqrt(1.0, 1.0))),
                        true});
        cfgs.push_back({"cylinder_1+s^2",
                        make_curve_family(FamilyInstance::Tag::Cylinder,
                                          curve(SpaceForm::Euclidean, KappaFn::expression("1 + s^2"))),
                        false});
        cfgs.push_back({"cylinder_exp+0.1s^2",
                        make_curve_family(FamilyInstance::Tag::Cylinder,
                                          curve(SpaceForm::Euclidean,
                                                KappaFn::expression("exp(s) + 0.1*s^2"))),
                        false});
        cfgs.push_back({"cone_1+0.3s^2",
                        make_curve_family(FamilyInstance::Tag::GeneralizedCone,
                                          curve(SpaceForm::Sphere, KappaFn::expression("1 + 0.3*s^2"))),
                        false});
        cfgs.push_back({"rotational_0.8+0.2s",
                        make_curve_family(FamilyInstance::Tag::Rotational,
                                          curve(SpaceForm::Hyperbolic,
                                                KappaFn::expression("0.8 + 0.2*s"))),
                        false});

        int agreements = 0, labels_ok = 0;
        std::vector<std::string> label_misses;
        for (const auto& cfg : cfgs) {
            auto pts = interior_points(cfg.spec, 12, 303);
            double tensor = 0.0, criterion = 0.0;
            for (const auto& x : pts) {
                auto A = analyze_point(cfg.spec, x, {});
                tensor = std::max(tensor, checks::semiparallel_tensor_residual(A));
                if (!A.spectral) throw Error(cfg.name + ": " + A.spectral_error);
                criterion = std::max(criterion, checks::criterion_residual(*A.spectral));
            }
            bool tv = tensor <= 1e-7, cv = criterion <= 1e-7;
            if (tv == cv) ++agreements;
            if (tv == cfg.expect_semiparallel) {
                ++labels_ok;
            } else {
                std::ostringstream m;
                m << cfg.name << " measured " << (tv ? "semi-parallel" : "not semi-parallel")
                  << " (tensor " << tensor << ", pairwise " << criterion << ")";
                label_misses.push_back(m.str());
            }
        }
        std::ostringstream os;
        os << "verdict agreement " << agreements << "/10, expected labels " << labels_ok
           << "/10";
        H.criterion(3, "pairwise criterion vs tensor verdicts on 10 configurations",
                    agreements == 10 && labels_ok == 10, os.str());
        for (const auto& m : label_misses) H.note(m);
    } catch (const Error& e) {
        H.criterion(3, "pairwise criterion vs tensor verdicts", false, e.what());
    }

    // ---------------------------------------------------------------- 4
    try {
        bool ode_ok = true;
        double ode_worst = 0.0;
        struct Closed {
            int c;
            CurveSpec cs;
            FamilyInstance::Tag tag;
        };
        std::vector<Closed> closed = {
            {0, closed_form_kappa(0, 1.0, 1.0, 0.0, 1.0), FamilyInstance::Tag::Cylinder},
            {-1, closed_form_kappa(-1, 0.8, 0.5, 0.0, 1.0), FamilyInstance::Tag::GeneralizedCone},
            {1, closed_form_kappa(1, 1.0, 1.0, 0.0, 1.0), FamilyInstance::Tag::Rotational},
        };
        for (const auto& cl : closed) {
            for (int t = 0; t <= 50; ++t) {
                double s = cl.cs.s0 + (cl.cs.s1 - cl.cs.s0) * t / 50.0;
                ode_worst = std::max(ode_worst, std::abs(ode_residual(cl.cs, s)));
            }
        }
        ode_ok = ode_worst < 1e-10;

        std::vector<std::string> branch_notes;
        bool pipeline_ok = true;
        for (const auto& cl : closed) {
            auto spec = make_curve_family(cl.tag, cl.cs);
            auto pts = interior_points(spec, 10, 404);
            double r = max_over_points(spec, pts, {}, checks::semiparallel_tensor_residual);
            std::ostringstream m;
            m << "closed form c=" << cl.c << ": pipeline semi-parallel residual " << r;
            branch_notes.push_back(m.str());
            pipeline_ok = pipeline_ok && r < 1e-7;
        }

        bool negatives_ok = true;
        for (const std::string& kappa : {"1 + s^2", "exp(s) + 0.1*s^2", "1/sqrt(s+1)"}) {
            auto spec = make_curve_family(FamilyInstance::Tag::Cylinder,
                                          curve(SpaceForm::Euclidean, KappaFn::expression(kappa)));
            auto pts = interior_points(spec, 10, 505);
            double r = max_over_points(spec, pts, {}, checks::semiparallel_tensor_residual);
            negatives_ok = negatives_ok && r > 1e-4;
        }

        std::ostringstream os;
        os << "ode residual max " << ode_worst << " (tol 1e-10); negatives "
           << (negatives_ok ? "ok" : "FAIL") << "; closed-form pipeline "
           << (pipeline_ok ? "ok" : "FAIL");
        H.criterion(4, "curvature reduction, both directions", ode_ok && pipeline_ok && negatives_ok,
                    os.str());
        for (const auto& m : branch_notes) H.note(m);
        if (!pipeline_ok) {
            auto rot_exp = make_curve_family(
                FamilyInstance::Tag::Rotational,
                curve(SpaceForm::Hyperbolic, KappaFn::exponential(1.0, 0.7)));
            auto pts = interior_points(rot_exp, 10, 606);
            double r = max_over_points(rot_exp, pts, {}, checks::semiparallel_tensor_residual);
            std::ostringstream m;
            m << "supplementary: rotational over exponential curvature gives residual " << r
              << " (< 1e-7 confirms the construction is semi-parallel on the other branch)";
            H.note(m.str());
        }
    } catch (const Error& e) {
        H.criterion(4, "curvature reduction, both directions", false, e.what());
    }

    // ---------------------------------------------------------------- 5
    try {
        double parallel_worst = 0.0;
        for (auto tag : {FamilyInstance::Tag::StandardCylinder, FamilyInstance::Tag::StandardCone,
                         FamilyInstance::Tag::StandardTorus}) {
            auto spec = make_std(tag);
            auto pts = interior_points(spec, 15, 707);
            parallel_worst =
                std::max(parallel_worst, max_over_points(spec, pts, {}, checks::parallel_residual));
        }
        auto spiral = make_curve_family(FamilyInstance::Tag::Cylinder,
                                        curve(SpaceForm::Euclidean, KappaFn::exponential(1.0, 1.0)));
        auto pts = interior_points(spiral, 15, 808);
        double spiral_parallel = max_over_points(spiral, pts, {}, checks::parallel_residual);
        double spiral_semi = max_over_points(spiral, pts, {}, checks::semiparallel_tensor_residual);
        bool ok = parallel_worst < 1e-7 && spiral_parallel > 1e-3 && spiral_semi < 1e-7;
        std::ostringstream os;
        os << "standard families |nabla beta| " << parallel_worst << "; log-spiral |nabla beta| "
           << spiral_parallel << ", |Rbar.beta| " << spiral_semi;
        H.criterion(5, "parallel vs semi-parallel separation", ok, os.str());
    } catch (const Error& e) {
        H.criterion(5, "parallel vs semi-parallel separation", false, e.what());
    }

    // ---------------------------------------------------------------- 6
    try {
        double worst = 0.0;
        for (const auto& ns : all_families()) {
            auto pts = interior_points(ns.spec, 20, 909);
            worst = std::max(worst, max_over_points(ns.spec, pts, {}, [](const PointAnalysis& A) {
                        auto ids = checks::identity_residuals(A);
                        return std::max({ids.trace_beta, ids.beta_norm, ids.trace_psi});
                    }));
        }
        auto anchor = analyze_point(make_std(FamilyInstance::Tag::StandardCylinder),
                                    (VectorXd(3) << 0.2, 0.1, 0.4).finished(), {});
        double tr_psi = (anchor.g_star.inverse() * anchor.psi).trace();
        bool anchor_ok =
            std::abs(tr_psi - 1.0 / 6.0) < 1e-8 && std::abs(anchor.s_star) < 1e-8;
        std::ostringstream os;
        os << "max identity residual " << worst << "; anchor tr psi = " << tr_psi
           << ", s* = " << anchor.s_star;
        H.criterion(6, "norm and trace identities with the scalar-curvature anchor",
                    worst < 1e-8 && anchor_ok, os.str());
    } catch (const Error& e) {
        H.criterion(6, "norm and trace identities", false, e.what());
    }

    // ---------------------------------------------------------------- 7
    try {
        double worst = 0.0;
        std::vector<NamedSpec> two_cluster;
        two_cluster.push_back({"standard_cylinder", make_std(FamilyInstance::Tag::StandardCylinder)});
        two_cluster.push_back({"standard_cone", make_std(FamilyInstance::Tag::StandardCone)});
        two_cluster.push_back(
            {"cylinder_exp",
             make_curve_family(FamilyInstance::Tag::Cylinder,
                               curve(SpaceForm::Euclidean, KappaFn::exponential(1.0, 1.0)))});
        for (const auto& ns : two_cluster) {
            auto pts = interior_points(ns.spec, 10, 111);
            worst = std::max(worst, max_over_points(ns.spec, pts, {}, [](const PointAnalysis& A) {
                        auto ids = checks::identity_residuals(A);
                        return ids.eta_closed_form ? *ids.eta_closed_form : 1.0;
                    }));
        }
        auto A = analyze_point(make_std(FamilyInstance::Tag::StandardCylinder),
                               (VectorXd(3) << 0.3, 0.2, 0.1).finished(), {});
        bool anchor = std::abs(A.spectral->eta_bar[0].norm() - 2.0 / 3.0) < 1e-8;
        std::ostringstream os;
        os << "max closed-form deviation " << worst << "; n=3, k=1 norm "
           << A.spectral->eta_bar[0].norm();
        H.criterion(7, "two-cluster principal normal closed forms", worst < 1e-8 && anchor,
                    os.str());
    } catch (const Error& e) {
        H.criterion(7, "two-cluster principal normal closed forms", false, e.what());
    }

    // ---------------------------------------------------------------- 8
    try {
        bool ok = true;
        std::ostringstream os;
        for (int lambda : {1, 2}) {
            int n = 2 + lambda;
            auto spec = make_circles(n, lambda, {0.8, 1.25});
            auto pts = interior_points(spec, 50, 222);
            double omega_max = max_over_points(spec, pts, {}, checks::omega_residual);
            double smin = 1e300, smax = -1e300;
            int k_seen = 0, lemma52 = 1;
            double orth = 0.0;
            bool kp1 = true;
            for (const auto& x : pts) {
                auto A = analyze_point(spec, x, {});
                auto rec = checks::classify_spectrum(A, 1e-6);
                k_seen = rec.k;
                lemma52 = lemma52 && rec.lemma52_ok;
                orth = std::max(orth, rec.orthogonality_residual);
                kp1 = kp1 && rec.k_le_p_plus_1;
                smin = std::min(smin, A.s_star);
                smax = std::max(smax, A.s_star);
            }
            bool this_ok = omega_max < 1e-7 && k_seen >= 3 && lemma52 && orth < 1e-7 && kp1 &&
                           (smax - smin) < 1e-8;
            os << "lambda=" << lambda << ": omega " << omega_max << ", k=" << k_seen
               << ", s* spread " << (smax - smin) << (this_ok ? " ok; " : " FAIL; ");
            ok = ok && this_ok;
        }
        H.criterion(8, "circle-product suite (isoparametric, clusters, constant s*)", ok,
                    os.str());
    } catch (const Error& e) {
        H.criterion(8, "circle-product suite", false, e.what());
    }

    // ---------------------------------------------------------------- 9
    try {
        auto spec = make_circles(3, 0, {0.7, 1.0, 1.4});
        auto pts = interior_points(spec, 20, 333);
        double worst = max_over_points(spec, pts, {}, [](const PointAnalysis& A) {
            if (!A.spectral || A.spectral->k != A.n) return 1.0;
            double m = 0.0;
            for (int i = 0; i < A.n; ++i)
                for (int j = 0; j < A.n; ++j)
                    if (i != j) m = std::max(m, std::abs(A.K_star(i, j)));
            return m;
        });
        std::ostringstream os;
        os << "n distinct principal normals, max |K*| = " << worst;
        H.criterion(9, "vanishing Moebius curvature probe", worst < 1e-7, os.str());
    } catch (const Error& e) {
        H.criterion(9, "vanishing Moebius curvature probe", false, e.what());
    }

    // ---------------------------------------------------------------- 10
    try {
        double fd_worst = 0.0;
        for (const auto& ns : all_families()) {
            auto pts = interior_points(ns.spec, 100, 444);
            for (const auto& x : pts)
                fd_worst = std::max(fd_worst, fd_crosscheck(ns.spec, ChartPoint{x}, 1e-4));
        }

        double dual_worst = 0.0;
        for (const auto& ns : all_families()) {
            auto pts = interior_points(ns.spec, 50, 555);
            AnalysisOptions opt;
            opt.spectral = false;
            dual_worst = std::max(
                dual_worst, max_over_points(ns.spec, pts, opt, [](const PointAnalysis& A) {
                    return std::max(checks::ricci2_residual(A),
                                    checks::semiparallel_dualpath_residual(A));
                }));
        }

        // conformal-invariance probe through sigma and back from a moved pole
        auto base = make_curve_family(FamilyInstance::Tag::Cylinder,
                                      curve(SpaceForm::Euclidean, KappaFn::exponential(1.0, 1.0)));
        auto spec1 = apply_conformal_map(base, ConformalMapTag::Sigma);
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> g(0.0, 1.0);
        MatrixXd Q(spec1.m, spec1.m);
        for (int i = 0; i < spec1.m; ++i)
            for (int j = 0; j < spec1.m; ++j) Q(i, j) = g(rng);
        MatrixXd Qo = Eigen::HouseholderQR<MatrixXd>(Q).householderQ();
        auto spec3 = finalize_spec(apply_conformal_map(
            apply_ambient_affine(spec1, 1.0, Qo, VectorXd::Zero(spec1.m), "+rot"),
            ConformalMapTag::InverseSigma));
        double sigma_shift = 0.0;
        for (const auto& x : interior_points(base, 10, 666)) {
            auto A0 = analyze_point(base, x, {});
            auto A1 = analyze_point(spec3, x, {});
            if (!A0.spectral || !A1.spectral || A0.spectral->k != A1.spectral->k) {
                sigma_shift = 1.0;
                break;
            }
            for (int c = 0; c < A0.spectral->k; ++c) {
                sigma_shift = std::max(sigma_shift,
                                       std::abs(A0.spectral->eta_bar[static_cast<size_t>(c)].norm() -
                                                A1.spectral->eta_bar[static_cast<size_t>(c)].norm()));
                sigma_shift = std::max(sigma_shift,
                                       std::abs(A0.spectral->theta[static_cast<size_t>(c)] -
                                                A1.spectral->theta[static_cast<size_t>(c)]));
            }
        }

        bool ok = fd_worst < 1e-5 && dual_worst < 1e-7 && sigma_shift < 1e-6;
        std::ostringstream os;
        os << "fd " << fd_worst << " (tol 1e-5); dual paths " << dual_worst
           << " (tol 1e-7); sigma probe " << sigma_shift << " (tol 1e-6)";
        H.criterion(10, "engine self-consistency", ok, os.str());
    } catch (const Error& e) {
        H.criterion(10, "engine self-consistency", false, e.what());
    }

    // ---------------------------------------------------------------- 11
    try {
        const char* bin = std::getenv("GEOVERIFY_BIN");
        if (!bin) {
            H.criterion(11, "CLI determinism and exit codes", false,
                        "GEOVERIFY_BIN not set (run through ctest)");
        } else {
            const std::string dir = "/tmp/geoverify_accept";
            std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
            {
                std::ofstream f(dir + "/good.cfg");
                f << "family = cylinder\nn = 3\np = 1\ncurve.kappa = exp\ncurve.a = 1\n"
                     "curve.b = 1\ncurve.range = 0:1\nchecks = gauss,ricci,semiparallel\n"
                     "samples.grid = 3x3x3\nseed = 42\n";
            }
            {
                std::ofstream f(dir + "/fail.cfg");
                f << "family = cylinder\nn = 3\np = 1\ncurve.kappa = \"1 + s^2\"\n"
                     "curve.range = 0:1\nchecks = gauss,semiparallel\nsamples.grid = 3x3x3\n";
            }
            {
                std::ofstream f(dir + "/bad.cfg");
                f << "family = cylinder\nfrobnicate = 1\n";
            }
            std::string out;
            int rc1 = run_cli(bin, "verify --config " + dir + "/good.cfg --out " + dir + "/r1.json",
                              out);
            int rc2 = run_cli(bin, "verify --config " + dir + "/good.cfg --out " + dir + "/r2.json",
                              out);
            int rcf = run_cli(bin, "verify --config " + dir + "/fail.cfg --out " + dir + "/rf.json",
                              out);
            int rcb = run_cli(bin, "verify --config " + dir + "/bad.cfg --out " + dir + "/rb.json",
                              out);
            bool no_report_on_bad = read_file(dir + "/rb.json").empty();

            auto strip = [](std::string s) {
                auto p = s.find("\"generated_at\"");
                if (p != std::string::npos) {
                    auto e = s.find('\n', p);
                    s.erase(p, e - p);
                }
                return s;
            };
            std::string r1 = strip(read_file(dir + "/r1.json"));
            std::string r2 = strip(read_file(dir + "/r2.json"));
            bool deterministic = !r1.empty() && r1 == r2;

            // ode-check branch behaviour through the CLI
            std::string ode_out;
            int rc_ode = run_cli(bin, "ode-check --c 1 --kappa \"1/sqrt(s+1)\" --range 0:3",
                                 ode_out);
            int rc_ode_wrong =
                run_cli(bin, "ode-check --c 0 --kappa \"1/sqrt(s+1)\" --range 0:3", ode_out);

            bool ok = rc1 == 0 && rc2 == 0 && rcf == 2 && rcb == 1 && no_report_on_bad &&
                      deterministic && rc_ode == 0 && rc_ode_wrong == 2;
            std::ostringstream os;
            os << "exit codes " << rc1 << "/" << rc2 << "/" << rcf << "/" << rcb
               << " (want 0/0/2/1), deterministic " << (deterministic ? "yes" : "NO")
               << ", ode-check " << rc_ode << "/" << rc_ode_wrong << " (want 0/2)";
            H.criterion(11, "CLI determinism and exit codes", ok, os.str());
        }
    } catch (const std::exception& e) {
        H.criterion(11, "CLI determinism and exit codes", false, e.what());
    }

    std::printf("%d criterion(s) failed\n", H.failed);
    return H.failed == 0 ? 0 : 1;
}
