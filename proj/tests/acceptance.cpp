// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Thresholds and tolerances are pinned in code; fitted
// constants come from configs/calibration.cfg (frozen, see that file).
//
// Criteria 4, 6 and 9 evaluate the scheme at tau = 1e-3, h = 1/256, where
// kappa tau / h ~ 0.26 sits below the cell-dissipation quantum of the
// minimizing-movements discretization: the discrete flow pins (see the
// "pinning" unit test). Those criteria are implemented exactly as stated and
// report their measured values; supplementary lines show the same benchmark
// in the convergent coupling tau ~ sqrt(h) where the error does contract.

#include "dropflow/io.hpp"
#include "dropflow/runner.hpp"
#include "dropflow/shapes.hpp"
#include "dropflow/verify.hpp"

#include "test_support.hpp"

#include <chrono>
#include <iomanip>
#include <iostream>

using namespace dropflow;
using namespace dropflow::testing;

namespace {

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<Criterion> g_results;

void record(const std::string& name, bool pass, const std::string& detail) {
    g_results.push_back({name, pass, detail});
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << std::endl;
}

template <class Fn>
void guarded_criterion(const std::string& name, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        record(name, false, std::string("exception: ") + e.what());
    }
}

void info(const std::string& line) { std::cout << "[info] " << line << std::endl; }

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// ---------------------------------------------------------------------------

void criterion_exhaustive_optimality() {
    auto phi = Anisotropy<2>::euclidean();
    auto st = PerimeterStencil<2>::calibrate(phi, 8);
    std::mt19937_64 rng(90210);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double t0 = now_seconds();
    double worst_gap = 0.0;
    int nested_ok = 0, ran = 0;
    for (int inst = 0; inst < 50; ++inst) {
        auto g = GridDomain<2>::make(Vec<2>(0, 0), Vec<2>(1, 1), 0.25);  // 4x4 = 16 cells
        BinarySet<2> e0(g);
        for (std::int64_t c = 0; c < 16; ++c)
            if (u(rng) < 0.5) e0.set(c, true);
        if (e0.empty()) continue;
        const double tau = 0.02 + 0.6 * u(rng);
        auto beta = ContactAngleField<2>::constant(g, -0.8 + 1.6 * u(rng), 1.0);
        auto f = ForcingField<2>::constant(-1.5 + 3.0 * u(rng));
        ++ran;
        BruteStep<2> brute(e0, tau, 1, phi, st, beta, f);
        auto [mask, best] = brute.minimize();
        (void)mask;
        auto mn = minimize_step(e0, tau, 1, phi, st, beta, f, MinimizerSelect::Minimal);
        auto mx = minimize_step(e0, tau, 1, phi, st, beta, f, MinimizerSelect::Maximal);
        worst_gap = std::max({worst_gap, brute.energy(to_mask(mn)) - best,
                              brute.energy(to_mask(mx)) - best});
        if (mn.subset_of(mx)) ++nested_ok;
    }
    const double elapsed = now_seconds() - t0;
    const bool pass = ran >= 45 && worst_gap <= 1e-9 && nested_ok == ran && elapsed < 1.0;
    record("exhaustive-oracle-optimality", pass,
           "instances=" + std::to_string(ran) + " max energy gap=" + fmt(worst_gap, 3) +
               " minimal-in-maximal=" + std::to_string(nested_ok) + "/" + std::to_string(ran) +
               " runtime=" + fmt(elapsed, 3) + "s (<1s)");
}

void criterion_coercivity() {
    std::mt19937_64 rng(777);
    auto g = GridDomain<2>::make(Vec<2>(-1, 0), Vec<2>(1, 1), 1.0 / 64);
    Mat<2> a;
    a << 2, 0, 0, 1;
    std::vector<std::pair<std::string, Anisotropy<2>>> phis = {
        {"euclidean", Anisotropy<2>::euclidean()},
        {"diag21", Anisotropy<2>::linear_map(a)},
        {"smoothed_l1", Anisotropy<2>::smoothed_l1(0.1)}};
    int failures = 0, checked = 0;
    for (auto& [name, phi] : phis) {
        auto st = PerimeterStencil<2>::calibrate(phi, 12);  // floor-safe
        const double phi_en = phi.value(Vec<2>::UnitY());
        for (double scale : {0.0, 0.5, -0.5}) {
            const double eta = 0.5 * (1.0 - std::abs(scale));
            auto beta = ContactAngleField<2>::constant(g, scale * phi_en, phi_en);
            for (int t = 0; t < 100; ++t) {
                auto e = random_droplet(g, rng);
                if (e.empty()) continue;
                ++checked;
                if (!check_coercivity(e, phi, st, beta, eta).pass) ++failures;
            }
        }
    }
    record("coercivity-suite", failures == 0 && checked > 800,
           std::to_string(checked) + " droplets x {Phi} x {beta}, violations=" +
               std::to_string(failures) + " (zero tolerance)");
}

void criterion_isoperimetric() {
    auto euc = Anisotropy<2>::euclidean();
    DualAnisotropy<2> deuc(euc);
    const double c_euc = isoperimetric_constant(euc, 8192, &deuc);
    const double err_euc = std::abs(c_euc - 2.0 * std::sqrt(kPi));
    const double c_wb = winterbottom_constant(euc, 0.0, 8192, &deuc);
    const double err_wb = std::abs(c_wb - std::sqrt(2.0 * kPi));

    Mat<2> a;
    a << 2, 0, 0, 1;
    auto lm = Anisotropy<2>::linear_map(a);
    DualAnisotropy<2> dlm(lm);
    const double lm1 = isoperimetric_constant(lm, 4096, &dlm);
    const double lm2 = isoperimetric_constant(lm, 8192, &dlm);
    auto sl = Anisotropy<2>::smoothed_l1(0.1);
    DualAnisotropy<2> dsl(sl);
    const double sl1c = isoperimetric_constant(sl, 4096, &dsl);
    const double sl2c = isoperimetric_constant(sl, 8192, &dsl);
    const double wb1 = winterbottom_constant(lm, -0.5, 4096, &dlm);
    const double wb2 = winterbottom_constant(lm, -0.5, 8192, &dlm);
    const double drift_lm = std::abs(lm2 - lm1) / lm1;
    const double drift_sl = std::abs(sl2c - sl1c) / sl1c;
    const double drift_wb = std::abs(wb2 - wb1) / std::abs(wb1);

    const bool pass = err_euc <= 1e-3 && err_wb <= 1e-3 && drift_lm <= 5e-3 &&
                      drift_sl <= 5e-3 && drift_wb <= 5e-3;
    record("isoperimetric-constants", pass,
           "|c_euclid - 2 sqrt(pi)|=" + fmt(err_euc, 2) + " (<=1e-3), |c_wb0 - sqrt(2 pi)|=" +
               fmt(err_wb, 2) + " (<=1e-3), doubling drift diag21=" + fmt(drift_lm, 2) +
               " sl1=" + fmt(drift_sl, 2) + " wb(-0.5)=" + fmt(drift_wb, 2) + " (<=0.5%)");
}

// Shared baseline family for criteria 4, 6, 7, 8a, 9.
struct Baseline {
    double h = 0.0, tau = 0.0;
    FlatFlowState<2> state;
};

std::vector<Baseline> run_baseline_ladder(const Anisotropy<2>& phi, double radius, double T,
                                          const std::vector<std::pair<double, double>>& levels) {
    std::vector<Baseline> out;
    auto dual = std::make_shared<DualAnisotropy<2>>(phi);
    for (auto [h, tau] : levels) {
        auto g = GridDomain<2>::make(Vec<2>(-1.25 * radius - 0.75, 0),
                                     Vec<2>(1.25 * radius + 0.75, 1.25 * radius), h);
        // the beta0 = 0 Winterbottom shape is the upper half of the Wulff shape
        WinterbottomShape<2> shape(dual, 0.0, radius);
        auto e0 = rasterize(shape, g).set;
        auto st = PerimeterStencil<2>::calibrate(phi, 16);
        auto beta = ContactAngleField<2>::constant(g, 0.0, phi.value(Vec<2>::UnitY()));
        Baseline b;
        b.h = h;
        b.tau = tau;
        b.state = run_flat_flow(e0, tau, T, phi, st, beta, ForcingField<2>::zero());
        out.push_back(std::move(b));
    }
    return out;
}

void criterion_benchmark(const std::vector<Baseline>& ladder, const OracleRun& oracle) {
    // area at t = 0.25 of the stated pairing (tau = 1e-3, h = 1/256)
    const double exact = kPi / 4.0;
    std::vector<double> errs;
    for (const auto& b : ladder)
        errs.push_back(std::abs(b.state.at_time(0.25).volume() - exact) / exact);
    const double finest_err = errs.back();
    const bool decreasing = errs[0] > errs[1] && errs[1] > errs[2];

    // oracle radius against sqrt(1 - 2t)
    double worst_radius_err = 0.0;
    for (const auto& snap : oracle.snapshots) {
        if (snap.time <= 0.0) continue;
        const double r_exact = std::sqrt(1.0 - 2.0 * snap.time);
        const double r_meas = std::sqrt(2.0 * snap.area() / kPi);
        worst_radius_err = std::max(worst_radius_err, std::abs(r_meas - r_exact) / r_exact);
    }

    const bool pass = finest_err <= 0.03 && decreasing && worst_radius_err <= 0.01;
    record("exact-solution-benchmark", pass,
           "area err at t=0.25: h=1/64:" + fmt(errs[0], 3) + " 1/128:" + fmt(errs[1], 3) +
               " 1/256:" + fmt(errs[2], 3) + " (finest<=3%, decreasing=" +
               (decreasing ? "yes" : "no") + "); oracle radius err=" +
               fmt(worst_radius_err, 3) + " (<=1%)");
}

void criterion_comparison() {
    auto phi = Anisotropy<2>::euclidean();
    auto st = PerimeterStencil<2>::calibrate(phi, 8);
    auto g = GridDomain<2>::make(Vec<2>(0, 0), Vec<2>(1, 1), 1.0 / 64);
    auto rep = check_comparison_suite(2026, g, phi, st, 20, 6, 8e-3);

    // GMM-level ordering between finest-tau trajectories of nested data
    std::mt19937_64 rng(4242);
    auto e2 = random_droplet(g, rng);
    auto e1 = erode(e2, 2);
    auto beta1 = ContactAngleField<2>::constant(g, 0.2, 1.0);
    auto beta2 = ContactAngleField<2>::constant(g, -0.2, 1.0);
    auto f1 = ForcingField<2>::constant(0.5);
    auto f2 = ForcingField<2>::zero();
    bool gmm_ordered = true;
    if (!e1.empty()) {
        auto flow1 = run_flat_flow(e1, 2e-3, 0.03, phi, st, beta1, f1, MinimizerSelect::Minimal);
        auto flow2 = run_flat_flow(e2, 2e-3, 0.03, phi, st, beta2, f2, MinimizerSelect::Maximal);
        for (double t : {0.01, 0.02, 0.03})
            gmm_ordered = gmm_ordered && flow1.at_time(t).subset_of(flow2.at_time(t));
    }
    const bool pass = rep.pass && gmm_ordered;
    record("discrete-comparison", pass,
           fmt(rep.metrics.at("instances"), 3) + " nested instances, violating cells=" +
               fmt(rep.metrics.at("violating_cells"), 3) + " (zero tolerance); finest-tau " +
               "trajectory ordering=" + (gmm_ordered ? "held" : "violated"));
}

void criterion_holder(const std::vector<Baseline>& tau_ladder) {
    std::vector<double> constants;
    std::string detail = "C0 per tau at h=1/256:";
    for (const auto& b : tau_ladder) {
        const double c0 = holder_constant(b.state, 4.0 * b.tau, 0.1);
        constants.push_back(c0);
        detail += " " + fmt(b.tau, 2) + "->" + fmt(c0, 3);
    }
    const double cmax = *std::max_element(constants.begin(), constants.end());
    const double cmin = *std::min_element(constants.begin(), constants.end());
    const double ratio = cmin > 0 ? cmax / cmin : std::numeric_limits<double>::infinity();
    record("holder-continuity", ratio < 2.0, detail + "; max/min=" + fmt(ratio, 3) + " (<2)");
}

void criterion_density_linf(const std::vector<Baseline>& ladder,
                            const std::map<std::string, double>& cal) {
    const double theta_cal = cal.at("theta_cal");
    const double theta_fit = cal.at("theta_fit");
    const double rcells = cal.at("density_radius_cells");
    double theta_min = std::numeric_limits<double>::infinity();
    bool linf_ok = true;
    std::string detail = "theta per level:";
    for (const auto& b : ladder) {
        auto dens = check_density_estimates(b.state, {rcells * b.h}, 0.5 * theta_cal);
        const double theta = dens.skipped ? 0.0 : dens.metrics.at("theta_emp");
        theta_min = std::min(theta_min, theta);
        detail += " " + fmt(theta, 3);
        auto linf = check_linf_displacement(b.state, theta_fit);
        linf_ok = linf_ok && linf.pass;
    }
    const bool pass = theta_min >= 0.5 * theta_cal && linf_ok;
    record("density-linf-estimates", pass,
           detail + "; floor=" + fmt(0.5 * theta_cal, 3) +
               ", displacement<=sqrt(tau)/theta on all steps=" + (linf_ok ? "yes" : "no"));
}

void criterion_fixtures(const std::vector<Baseline>& ladder,
                        const std::map<std::string, double>& cal) {
    auto phi = Anisotropy<2>::euclidean();
    auto st = PerimeterStencil<2>::calibrate(phi, 16);
    bool outside_ok = true, inside_ok = true, contain_ok = true, forced_ok = true;

    // (a) exterior Wulff ball against the shrinking half-disk (finest level)
    {
        // dist(p, boundary(E0)) = 0.3 up to one cell of rasterization
        // clearance so the touching configuration stays disjoint on the grid
        const auto& base = ladder.back();
        const Vec<2> p = 1.302 * Vec<2>(std::cos(0.45), std::sin(0.45));
        WulffShape<2> ball(phi, p, 0.3);
        auto rep = check_wulff_avoidance(base.state, ball, 0.0, 0.05, false);
        outside_ok = rep.pass && !rep.skipped;
    }

    // (b) ball inside a stationary Winterbottom droplet
    const double h = 1.0 / 128;
    auto g = GridDomain<2>::make(Vec<2>(-2, 0), Vec<2>(2, 1.25), h);
    auto beta = ContactAngleField<2>::constant(g, -0.4, 1.0);
    WinterbottomShape<2> shape(phi, -0.7, 0.6);
    auto e0 = rasterize(shape, g).set;
    auto stationary = run_flat_flow(e0, 2e-3, 0.05, phi, st, beta, ForcingField<2>::zero());
    {
        WulffShape<2> ball(phi, Vec<2>(0.0, 0.14), 0.14);
        auto rep = check_wulff_avoidance(stationary, ball, 0.4, 0.05, true);
        inside_ok = rep.pass && !rep.skipped;
    }

    // (c) Winterbottom containment: unforced non-expansion within 4h/r0
    {
        auto rep = check_winterbottom_containment(stationary, shape, 0.3, false);
        contain_ok = rep.pass;
    }
    // forced variant: fitted growth constants stay below the frozen bounds
    {
        auto forced =
            run_flat_flow(e0, 2e-3, 0.04, phi, st, beta, ForcingField<2>::constant(-4.0));
        auto rep = check_winterbottom_containment(forced, shape, 0.3, true,
                                                  cal.at("wb_c6_bound"), cal.at("wb_c7_bound"));
        forced_ok = rep.pass;
    }

    record("wulff-winterbottom-fixtures", outside_ok && inside_ok && contain_ok && forced_ok,
           std::string("stay-outside=") + (outside_ok ? "ok" : "violated") +
               ", stay-inside=" + (inside_ok ? "ok" : "violated") +
               ", unforced non-expansion (4h/r0 slack)=" + (contain_ok ? "ok" : "violated") +
               ", forced growth fit within frozen bounds=" + (forced_ok ? "ok" : "violated"));
}

void criterion_consistency(const std::vector<Baseline>& euclid,
                           const std::vector<Baseline>& aniso, const OracleRun& oracle_euc,
                           const OracleRun& oracle_aniso) {
    std::vector<double> dists;
    for (const auto& b : euclid) {
        auto rep = check_consistency(b.state, oracle_euc, {0.25}, 1e9);
        dists.push_back(rep.metrics.at("hausdorff_max"));
    }
    const bool euc_budget = dists.back() <= 0.02;  // 2% of R0 = 1
    const bool euc_monotone = dists[0] > dists[1] && dists[1] > dists[2];

    std::vector<double> adists;
    for (const auto& b : aniso) {
        auto rep = check_consistency(b.state, oracle_aniso, {0.1}, 1e9);
        adists.push_back(rep.metrics.at("hausdorff_max"));
    }
    const bool aniso_monotone = adists[0] > adists[1] && adists[1] > adists[2];

    record("consistency-with-smooth-flow", euc_budget && euc_monotone && aniso_monotone,
           "euclid Hausdorff at t=0.25: " + fmt(dists[0], 3) + " " + fmt(dists[1], 3) + " " +
               fmt(dists[2], 3) + " (finest<=0.02, monotone=" + (euc_monotone ? "yes" : "no") +
               "); diag21 at t=0.1: " + fmt(adists[0], 3) + " " + fmt(adists[1], 3) + " " +
               fmt(adists[2], 3) + " (monotone=" + (aniso_monotone ? "yes" : "no") + ")");
}

void criterion_ellipticity() {
    auto euc = Anisotropy<2>::euclidean();
    auto rep = certify_ellipticity(euc, 2048);
    const bool euc_ok = rep.elliptic && std::abs(rep.gamma - 1.0) < 1e-6;

    bool monotone = true;
    double prev = 0.0;
    std::string gammas;
    for (double eps : {0.05, 0.1, 0.2}) {
        auto r = certify_ellipticity(Anisotropy<2>::smoothed_l1(eps), 2048);
        monotone = monotone && r.elliptic && r.gamma >= prev - 1e-12;
        gammas += " " + fmt(r.gamma, 3);
        prev = r.gamma;
    }
    bool rejected = false;
    try {
        Anisotropy<2>::smoothed_l1(0.0);
    } catch (const ConfigError&) {
        rejected = true;
    }
    record("ellipticity-certification", euc_ok && monotone && rejected,
           "euclid gamma=" + fmt(rep.gamma, 8) + " (=1), smoothed-l1 gamma(eps):" + gammas +
               " monotone=" + (monotone ? "yes" : "no") + ", eps=0 rejected=" +
               (rejected ? "yes" : "no"));
}

}  // namespace

int main() {
    std::cout << "dropflow acceptance suite\n==========================\n";
    std::map<std::string, double> cal =
        parse_calibration(std::string(DROPFLOW_SOURCE_DIR) + "/configs/calibration.cfg");

    guarded_criterion("exhaustive-oracle-optimality", criterion_exhaustive_optimality);
    guarded_criterion("coercivity-suite", criterion_coercivity);
    guarded_criterion("isoperimetric-constants", criterion_isoperimetric);

    // Shared runs: the stated benchmark family under simultaneous halving.
    auto euc = Anisotropy<2>::euclidean();
    const std::vector<std::pair<double, double>> levels = {
        {1.0 / 64, 4e-3}, {1.0 / 128, 2e-3}, {1.0 / 256, 1e-3}};
    auto ladder = run_baseline_ladder(euc, 1.0, 0.3, levels);

    auto zero_beta = [](double) { return 0.0; };
    auto zero_f = [](double, const Vec<2>&) { return 0.0; };
    auto curve = SmoothCurve::half_circle(1.0, 0.0, 512);
    std::vector<double> snaps;
    for (double t = 0.05; t <= 0.3; t += 0.05) snaps.push_back(t);
    auto oracle = run_front_tracking(curve, euc, zero_beta, zero_f, 5e-4, 0.3, snaps);

    guarded_criterion("exact-solution-benchmark", [&] { criterion_benchmark(ladder, oracle); });
    guarded_criterion("discrete-comparison", criterion_comparison);

    // the Holder and density ladders vary tau on the fixed h = 1/256 grid
    const std::vector<std::pair<double, double>> tau_levels = {
        {1.0 / 256, 4e-3}, {1.0 / 256, 2e-3}};
    auto tau_ladder = run_baseline_ladder(euc, 1.0, 0.3, tau_levels);
    tau_ladder.push_back(ladder.back());  // shares the (1/256, 1e-3) run
    guarded_criterion("holder-continuity", [&] { criterion_holder(tau_ladder); });
    guarded_criterion("density-linf-estimates",
                      [&] { criterion_density_linf(tau_ladder, cal); });
    guarded_criterion("wulff-winterbottom-fixtures", [&] { criterion_fixtures(ladder, cal); });

    Mat<2> a;
    a << 2, 0, 0, 1;
    auto lm = Anisotropy<2>::linear_map(a);
    auto aniso_ladder = run_baseline_ladder(lm, 1.0, 0.12, levels);
    DualAnisotropy<2> dlm(lm);
    auto acurve = SmoothCurve::half_wulff(dlm, 1.0, 0.0, 512);
    auto aoracle = run_front_tracking(acurve, lm, zero_beta, zero_f, 5e-4, 0.12, {0.05, 0.1});

    guarded_criterion("consistency-with-smooth-flow",
                      [&] { criterion_consistency(ladder, aniso_ladder, oracle, aoracle); });
    guarded_criterion("ellipticity-certification", criterion_ellipticity);

    // Supplementary: the same benchmark in the convergent coupling tau ~
    // sqrt(h), where the quantization error contracts under refinement.
    {
        const std::vector<std::pair<double, double>> conv = {
            {1.0 / 64, 0.024}, {1.0 / 128, 0.017}, {1.0 / 256, 0.012}};
        auto cl = run_baseline_ladder(euc, 1.0, 0.26, conv);
        std::string line = "convergent coupling tau~sqrt(h), area err at t=0.25:";
        for (const auto& b : cl)
            line += " h=1/" + fmt(1.0 / b.h, 3) + ":" +
                    fmt(std::abs(b.state.at_time(0.25).volume() - kPi / 4.0) / (kPi / 4.0), 3);
        info(line);
    }

    int fails = 0;
    for (const auto& r : g_results)
        if (!r.pass) ++fails;
    std::cout << "==========================\n"
              << (g_results.size() - fails) << "/" << g_results.size()
              << " acceptance criteria passed\n";
    return fails;
}
