#pragma once

// Property checks over flat-flow and oracle outputs: density and displacement
// estimates, comparison principles, Wulff avoidance, Winterbottom
// containment, the discrete Euler-Lagrange relation, coercivity chains, and
// stepper-vs-oracle consistency. Each check is a pure, deterministic function
// of the recorded artifacts and the seed.

#include "dropflow/droplets.hpp"
#include "dropflow/oracle2d.hpp"
#include "dropflow/shapes.hpp"
#include "dropflow/stepper.hpp"

#include <map>

namespace dropflow {

struct CheckReport {
    std::string name;
    bool pass = false;
    bool skipped = false;
    std::map<std::string, double> metrics;
    std::string notes;

    CheckReport& metric(const std::string& key, double v) {
        metrics[key] = v;
        return *this;
    }
};

// ---------------------------------------------------------------------------
// Density estimates: for sampled free-boundary cells x and radii r,
//   theta <= |B_r(x) . E| / |B_r| <= 1 - theta   and   P(E, B_r(x)) / r >= theta.

template <int N>
CheckReport check_density_estimates(const FlatFlowState<N>& state,
                                    const std::vector<double>& radii, double theta_floor,
                                    int samples_per_step = 128) {
    CheckReport rep;
    rep.name = "density-estimates";
    if (state.sets.empty()) {
        rep.skipped = true;
        rep.notes = "no recorded sets";
        return rep;
    }
    const auto& g = state.sets.front().grid();
    const double h = g.h;
    double frac_min = 1.0, frac_max = 0.0, per_min = std::numeric_limits<double>::infinity();
    std::int64_t checked = 0;
    for (size_t k = 1; k < state.sets.size(); ++k) {
        const auto& e = state.sets[k];
        if (e.empty()) continue;  // vacuous step
        std::vector<std::int64_t> boundary;
        e.for_each_cell([&](std::int64_t c) {
            const auto idx = g.unflatten(c);
            for (int a = 0; a < N; ++a)
                for (int sgn = -1; sgn <= 1; sgn += 2) {
                    auto nb = idx;
                    nb[a] += sgn;
                    if (nb[N - 1] < 0) continue;
                    if (!g.in_bounds(nb) || !e.contains(nb)) {
                        boundary.push_back(c);
                        return;
                    }
                }
        });
        if (boundary.empty()) continue;
        const size_t stride = std::max<size_t>(1, boundary.size() / samples_per_step);
        for (size_t bi = 0; bi < boundary.size(); bi += stride) {
            const auto cidx = g.unflatten(boundary[bi]);
            const Vec<N> x = g.cell_center(cidx);
            for (double r : radii) {
                if (r < 2.0 * h) continue;  // skipped radius, noted below
                // the measurement ball must fit inside the computational box
                // (the floor may truncate it); boundary cells produced by the
                // lateral/top truncation are not free boundary
                bool fits = true;
                const int need = static_cast<int>(std::ceil(r / h)) + 1;
                for (int i = 0; i < N; ++i) {
                    if (cidx[i] >= g.counts[i] - need) fits = false;
                    if (i < N - 1 && cidx[i] < need) fits = false;
                }
                if (!fits) continue;
                const double ball = unit_ball_volume(N) * std::pow(r, N);
                double occupied = 0.0, per = 0.0;
                const int reach = static_cast<int>(std::ceil(r / h)) + 1;
                auto center_idx = g.unflatten(boundary[bi]);
                std::array<int, N> it{};
                std::function<void(int)> walk = [&](int depth) {
                    if (depth == N) {
                        std::array<int, N> idx{};
                        for (int i = 0; i < N; ++i) idx[i] = center_idx[i] + it[i];
                        if (!g.in_bounds(idx)) return;
                        const Vec<N> y = g.cell_center(idx);
                        if ((y - x).norm() > r) return;
                        const bool inside = e.contains(idx);
                        if (inside) occupied += g.cell_volume();
                        for (int a = 0; a < N; ++a) {
                            auto nb = idx;
                            nb[a] += 1;
                            if (nb[N - 1] < 0 || !g.in_bounds(nb)) continue;
                            if (inside != e.contains(nb)) per += g.facet_area();
                        }
                        return;
                    }
                    for (it[depth] = -reach; it[depth] <= reach; ++it[depth]) walk(depth + 1);
                };
                walk(0);
                const double frac = occupied / ball;
                frac_min = std::min(frac_min, frac);
                frac_max = std::max(frac_max, frac);
                per_min = std::min(per_min, per / std::pow(r, N - 1));
                ++checked;
            }
        }
    }
    if (checked == 0) {
        rep.skipped = true;
        rep.notes = "all radii below 2h or flow empty";
        return rep;
    }
    rep.metric("vol_frac_min", frac_min);
    rep.metric("vol_frac_max", frac_max);
    rep.metric("perimeter_ratio_min", per_min);
    const double theta_emp = std::min({frac_min, 1.0 - frac_max, per_min});
    rep.metric("theta_emp", theta_emp);
    rep.metric("theta_floor", theta_floor);
    rep.pass = theta_emp >= theta_floor;
    return rep;
}

// Max flipped-cell distance per step against sqrt(tau)/theta.
template <int N>
CheckReport check_linf_displacement(const FlatFlowState<N>& state, double theta_fit) {
    CheckReport rep;
    rep.name = "linf-displacement";
    double worst = 0.0;
    for (const auto& s : state.steps) worst = std::max(worst, s.max_flip_distance);
    const double ratio = worst / std::sqrt(state.tau);
    rep.metric("max_flip_distance", worst);
    rep.metric("ratio_to_sqrt_tau", ratio);
    rep.metric("bound_1_over_theta", 1.0 / theta_fit);
    rep.pass = ratio <= 1.0 / theta_fit;
    return rep;
}

// Per-step minimality inequality: testing E(tau,k) against E(tau,k-1) in the
// ATW functional can only lower the energy.
template <int N>
CheckReport check_minimality(const FlatFlowState<N>& state, const Anisotropy<N>& phi,
                             const PerimeterStencil<N>& stencil,
                             const ContactAngleField<N>& beta, const ForcingField<N>& f,
                             double rel_tol = 1e-9) {
    CheckReport rep;
    rep.name = "step-minimality";
    const auto& g = state.sets.front().grid();
    double worst = -std::numeric_limits<double>::infinity();
    for (size_t k = 1; k < state.sets.size(); ++k) {
        const auto& prev = state.sets[k - 1];
        if (prev.empty()) continue;
        const auto& d = state.steps[k - 1];
        double prev_forcing = 0.0;
        if (!f.is_zero()) {
            const auto favg = f.step_cell_averages(static_cast<int>(k), state.tau, g);
            prev.for_each_cell([&](std::int64_t c) { prev_forcing += (*favg)[c]; });
            prev_forcing *= g.cell_volume();
        }
        const double lhs = d.capillary + d.dissipation + d.forcing;
        const double rhs = capillary_energy(prev, phi, stencil, beta) + prev_forcing;
        worst = std::max(worst, (lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    rep.metric("max_relative_violation", worst);
    rep.pass = worst <= rel_tol;
    return rep;
}

// Coercivity chain on a single droplet, all inequalities exact at the
// discrete level (floor-safe stencils): with r = ||beta||_inf / phi(e_n),
//   eta P_phi(E) <= C_beta(E) <= P_phi(E)
//   (phi(e_n) + inf beta) / (2 phi(e_n)) P_phi(E) <= C_beta(E)
//   C_beta(E) <= max(sup beta / phi(e_n), 1) P_phi(E),
// with P_phi(E) the full perimeter (floor facet weighted by phi_D(e_n)).
template <int N>
CheckReport check_coercivity(const BinarySet<N>& e, const Anisotropy<N>& phi,
                             const PerimeterStencil<N>& stencil,
                             const ContactAngleField<N>& beta, double eta,
                             double ulp_slack = 1e-11) {
    CheckReport rep;
    rep.name = "coercivity";
    const double p_full = perimeter_phi(e, phi, stencil, PerimeterRegion::Full);
    const double cb = capillary_energy(e, phi, stencil, beta);
    const double phi_en = stencil.floor_weight();
    const double slack = ulp_slack * std::max(1.0, p_full);
    const double lower_15 = eta * p_full;
    const double lower_app = (phi_en + beta.inf()) / (2.0 * phi_en) * p_full;
    const double upper_app = std::max(beta.sup() / phi_en, 1.0) * p_full;
    rep.metric("P_full", p_full);
    rep.metric("capillary", cb);
    rep.metric("eta_P", lower_15);
    rep.metric("appendix_lower", lower_app);
    rep.metric("appendix_upper", upper_app);
    rep.pass = (lower_15 <= cb + slack) && (cb <= p_full + slack) && (lower_app <= cb + slack) &&
               (cb <= upper_app + slack);
    return rep;
}

// ---------------------------------------------------------------------------
// Randomized discrete-comparison suite (zero tolerance): nested data, nested
// minimizers, cellwise per step.

template <int N>
CheckReport check_comparison_suite(std::uint64_t seed, const GridDomain<N>& g,
                                   const Anisotropy<N>& phi, const PerimeterStencil<N>& stencil,
                                   int instances, int steps, double tau) {
    CheckReport rep;
    rep.name = "discrete-comparison";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec<N> en = Vec<N>::Zero();
    en[N - 1] = 1.0;
    const double phi_en = phi.value(en);
    std::int64_t violations = 0;
    int ran = 0;
    for (int inst = 0; inst < instances; ++inst) {
        BinarySet<N> e2 = random_droplet(g, rng);
        BinarySet<N> e1 = erode(e2, 1 + static_cast<int>(unit(rng) * 2));
        if (e1.empty() || e2.empty()) continue;
        const double b2 = -0.4 * phi_en + 0.5 * unit(rng) * phi_en;
        const double b1 = b2 + 0.3 * unit(rng) * phi_en;
        if (std::abs(b1) >= 0.95 * phi_en || std::abs(b2) >= 0.95 * phi_en) continue;
        auto beta1 = ContactAngleField<N>::constant(g, b1, phi_en);
        auto beta2 = ContactAngleField<N>::constant(g, b2, phi_en);
        const double f2v = -0.5 + unit(rng);
        const double f1v = f2v + unit(rng);
        auto f1 = ForcingField<N>::constant(f1v);
        auto f2 = ForcingField<N>::constant(f2v);
        ++ran;
        BinarySet<N> cur1 = e1, cur2 = e2;
        for (int k = 1; k <= steps; ++k) {
            cur1 = minimize_step(cur1, tau, k, phi, stencil, beta1, f1, MinimizerSelect::Minimal);
            cur2 = minimize_step(cur2, tau, k, phi, stencil, beta2, f2, MinimizerSelect::Maximal);
            if (!cur1.subset_of(cur2)) {
                auto bad = cur1 - cur2;
                violations += bad.cell_count();
            }
            if (cur1.empty() && cur2.empty()) break;
        }
    }
    rep.metric("instances", ran);
    rep.metric("violating_cells", static_cast<double>(violations));
    rep.pass = ran > 0 && violations == 0;
    return rep;
}

// ---------------------------------------------------------------------------
// Wulff avoidance (stay-outside) / containment (stay-inside) against the
// shrunk Wulff ball of radius beta0 R0 / (16 phi(e_n)), beta0 = (||beta||_inf
// + phi(e_n)) / 2, over the configured time window.

template <int N>
CheckReport check_wulff_avoidance(const FlatFlowState<N>& state, const WulffShape<N>& ball,
                                  double beta_sup_abs, double window_T, bool inside) {
    CheckReport rep;
    rep.name = inside ? "wulff-stay-inside" : "wulff-stay-outside";
    const auto& g = state.sets.front().grid();
    const double h = g.h;
    const double R0 = ball.radius();
    if (R0 < 4.0 * h) {
        rep.skipped = true;
        rep.notes = "R0 below 4h, resolution too coarse";
        return rep;
    }
    Vec<N> en = Vec<N>::Zero();
    en[N - 1] = 1.0;
    const double phi_en = ball.phi().value(en);
    const double beta0 = 0.5 * (beta_sup_abs + phi_en);
    const double r_small = beta0 * R0 / (16.0 * phi_en);

    // Precondition: the full ball starts outside (resp. inside) E0.
    const auto& e0 = state.sets.front();
    bool pre_ok = true;
    for (std::int64_t c = 0; c < g.cell_count() && pre_ok; ++c) {
        const Vec<N> x = g.cell_center(g.unflatten(c));
        const bool in_ball = ball.gauge(x) <= R0;
        if (!in_ball) continue;
        if (inside && !e0.contains(c)) pre_ok = false;
        if (!inside && e0.contains(c)) pre_ok = false;
    }
    if (!pre_ok) throw SetupError("wulff avoidance: ball/initial-set precondition violated");

    std::int64_t violations = 0;
    int k_checked = 0;
    for (size_t k = 0; k < state.sets.size(); ++k) {
        if (static_cast<double>(k) * state.tau > window_T) break;
        ++k_checked;
        const auto& e = state.sets[k];
        for (std::int64_t c = 0; c < g.cell_count(); ++c) {
            const Vec<N> x = g.cell_center(g.unflatten(c));
            if (ball.gauge(x) > r_small) continue;
            if (x[N - 1] < 0) continue;
            const bool occ = e.contains(c);
            if (inside && !occ) ++violations;
            if (!inside && occ) ++violations;
        }
    }
    rep.metric("r_small", r_small);
    rep.metric("steps_checked", k_checked);
    rep.metric("violating_cells", static_cast<double>(violations));
    rep.pass = violations == 0 && k_checked > 0;
    return rep;
}

// Smallest containing Winterbottom radius per step; unforced flows must stay
// within r0 (1 + 4h/r0), forced flows within affine growth with bounded
// fitted constants.
template <int N>
CheckReport check_winterbottom_containment(const FlatFlowState<N>& state,
                                           const WinterbottomShape<N>& shape, double eta,
                                           bool forced, double c6_bound = 0.0,
                                           double c7_bound = 0.0) {
    CheckReport rep;
    rep.name = "winterbottom-containment";
    const double beta0 = shape.beta0();
    Vec<N> en = Vec<N>::Zero();
    en[N - 1] = 1.0;
    const double phi_en = shape.phi().value(en);
    if (!(-phi_en < beta0 && beta0 < -(1.0 - 2.0 * eta) * phi_en))
        throw SetupError("winterbottom containment: beta0 outside (-phi(e_n), -(1-2eta) phi(e_n))");

    const auto& g = state.sets.front().grid();
    const double h = g.h;
    const double r0 = shape.radius();
    std::vector<double> radii;
    for (const auto& e : state.sets) {
        double r = 0.0;
        e.for_each_cell([&](std::int64_t c) {
            const auto idx = g.unflatten(c);
            bool boundary = idx[N - 1] == 0;
            for (int a = 0; a < N && !boundary; ++a)
                for (int sgn = -1; sgn <= 1 && !boundary; sgn += 2) {
                    auto nb = idx;
                    nb[a] += sgn;
                    if (nb[N - 1] < 0) continue;
                    if (!g.in_bounds(nb) || !e.contains(nb)) boundary = true;
                }
            if (!boundary) return;
            r = std::max(r, shape.containing_radius(g.cell_center(idx)));
        });
        radii.push_back(r);
    }
    if (radii.front() > r0 * (1.0 + 1e-9) + h)
        throw SetupError("winterbottom containment: E0 not contained in W_{beta0, r0}");

    const double r_max = *std::max_element(radii.begin(), radii.end());
    rep.metric("r0", radii.front());
    rep.metric("r_max", r_max);
    if (!forced) {
        const double slack = 4.0 * h / r0;
        rep.metric("slack", slack);
        rep.pass = r_max <= radii.front() * (1.0 + slack);
        return rep;
    }
    // Fit positive increments against Delta r <= (C6 r + C7) tau.
    double c6 = 0.0, c7 = 0.0;
    for (size_t k = 1; k < radii.size(); ++k) {
        const double dr = radii[k] - radii[k - 1];
        if (dr <= 0) continue;
        const double rate = dr / state.tau;
        // attribute half to each coefficient for a conservative fit
        c6 = std::max(c6, 0.5 * rate / std::max(radii[k - 1], 1e-9));
        c7 = std::max(c7, 0.5 * rate);
    }
    rep.metric("C6_fit", c6);
    rep.metric("C7_fit", c7);
    rep.pass = std::isfinite(c6) && std::isfinite(c7) &&
               (c6_bound <= 0.0 || c6 <= c6_bound) && (c7_bound <= 0.0 || c7 <= c7_bound);
    return rep;
}

// ---------------------------------------------------------------------------
// Discrete Euler-Lagrange residual (n = 2): (1/tau) sd_{E0} + kappa^phi + fbar
// at free-boundary contour points away from the floor, kappa^phi evaluated as
// Tr[Hess phi(nu) Hess sd_E] from the grid signed distance of the step set
// (the first-variation curvature of P_phi; it reduces to the usual mean
// curvature for the Euclidean norm).

inline CheckReport check_euler_lagrange(const BinarySet<2>& step_set, const BinarySet<2>& e0,
                                        double tau, int k, const Anisotropy<2>& phi,
                                        const ForcingField<2>& f,
                                        double pass_fraction = 0.2) {
    CheckReport rep;
    rep.name = "euler-lagrange";
    const auto& g = step_set.grid();
    const double h = g.h;
    const auto sd0 = euclidean_distance_field(e0, true);
    const auto sde = euclidean_distance_field(step_set, true);

    // Curvature of the staircase contour from the boundary sample points (the
    // raw signed-distance Hessian is kinked at lattice wavelength and useless
    // there): PCA of the window cloud gives the local frame, a parabola fit
    // in that frame the curvature. Staircase scatter is ~h/2, so a window
    // resolves curvature only when its sagitta kappa W^2 / 8 clears a couple
    // of cells: windows widen adaptively until that holds, else the contour
    // counts as flat at the resolvable scale.
    const auto boundary = free_boundary_points(step_set);
    auto parabola_fit = [&](const Vec<2>& x, double window, double& kappa_e, Vec<2>& nu,
                            double& rms) {
        std::vector<Vec<2>> pts;
        for (const auto& b : boundary)
            if ((b - x).norm() <= window) pts.push_back(b);
        if (pts.size() < 8) return false;
        Vec<2> mean = Vec<2>::Zero();
        for (const auto& p : pts) mean += p;
        mean /= static_cast<double>(pts.size());
        Mat<2> cov = Mat<2>::Zero();
        for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
        Eigen::SelfAdjointEigenSolver<Mat<2>> es(cov);
        const Vec<2> tangent = es.eigenvectors().col(1);  // largest spread
        Vec<2> normal(-tangent[1], tangent[0]);
        // orient outward: the signed distance grows along the outward normal
        if (sde.sample(mean + 4.0 * h * normal) < sde.sample(mean - 4.0 * h * normal))
            normal = -normal;
        Eigen::MatrixXd A(pts.size(), 3);
        Eigen::VectorXd d(pts.size());
        for (size_t r = 0; r < pts.size(); ++r) {
            const double s = (pts[r] - mean).dot(tangent);
            A(r, 0) = 1.0;
            A(r, 1) = s;
            A(r, 2) = 0.5 * s * s;
            d(r) = (pts[r] - mean).dot(normal);
        }
        const Eigen::Vector3d sol = A.colPivHouseholderQr().solve(d);
        rms = std::sqrt((A * sol - d).squaredNorm() / pts.size());
        const double slope2 = sol[1] * sol[1];
        kappa_e = -sol[2] / std::pow(1.0 + slope2, 1.5);  // positive = convex droplet
        nu = (normal - sol[1] * tangent).normalized();
        return std::isfinite(kappa_e);
    };
    auto fit_curvature = [&](const Vec<2>& x, double& kappa_e, Vec<2>& nu) {
        for (double window = 8.0 * h; window <= 64.0 * h; window *= 2.0) {
            double kw = 0.0, rms = 0.0;
            Vec<2> nw = Vec<2>::Zero();
            if (!parabola_fit(x, window, kw, nw, rms)) return false;
            // accept when the sagitta clears the staircase scatter and
            // dominates the fit residual (signal over noise); otherwise the
            // window is either too small to resolve or too heterogeneous
            const double sagitta = std::abs(kw) * window * window / 8.0;
            const bool local = std::abs(kw) * window <= 2.0;  // radius >= window/2
            if (sagitta >= 2.0 * h && local && rms <= std::max(0.75 * h, 0.3 * sagitta)) {
                kappa_e = kw;
                nu = nw;
                return true;
            }
        }
        kappa_e = 0.0;  // flat at every resolvable scale
        return true;
    };

    std::vector<double> residuals;
    detail::for_each_free_facet(step_set, [&](const std::array<int, 2>& idx, int axis, int side) {
        const int i = idx[0], j = idx[1];
        if (j < 8 || j >= g.counts[1] - 8 || i < 8 || i >= g.counts[0] - 8) return;
        Vec<2> x = g.cell_center(idx);
        x[axis] += side * 0.5 * h;  // contour point on the facet
        if (x[1] < 6.0 * h) return;  // away from the floor
        double kappa_e = 0.0;
        Vec<2> nu = Vec<2>::Zero();
        if (!fit_curvature(x, kappa_e, nu)) return;
        if (kappa_e == 0.0) {
            nu = Vec<2>::Zero();
            nu[axis] = side;  // flat window: the facet orientation is exact
        }
        const Vec<2> t(nu[1], -nu[0]);
        const double kappa_phi = (phi.hessian(nu) * t).dot(t) * kappa_e;
        const double res = sd0.sample(x) / tau + kappa_phi + f.step_average(k, tau, x);
        residuals.push_back(std::abs(res));
    });
    if (residuals.size() < 8) {
        rep.skipped = true;
        rep.notes = "contour too short";
        return rep;
    }
    std::sort(residuals.begin(), residuals.end());
    const double median = residuals[residuals.size() / 2];
    const double dominant = h / tau;  // scale of the distance term across one cell
    rep.metric("median_residual", median);
    rep.metric("dominant_term", dominant);
    rep.metric("relative", median / dominant);
    rep.pass = median <= pass_fraction * dominant;
    return rep;
}

// ---------------------------------------------------------------------------
// Stepper-vs-oracle consistency: Hausdorff distance between the rasterized
// free boundary and the tracked curve at a sampled time.

inline double hausdorff_contour_curve(const BinarySet<2>& e, const SmoothCurve& curve) {
    const auto pts = free_boundary_points(e);
    double d1 = 0.0;
    for (const auto& p : pts) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i + 1 < curve.nodes.size(); ++i) {
            const Vec<2>&u = curve.nodes[i], &v = curve.nodes[i + 1];
            const Vec<2> d = v - u;
            const double t = std::clamp((p - u).dot(d) / d.squaredNorm(), 0.0, 1.0);
            best = std::min(best, (p - (u + t * d)).norm());
        }
        d1 = std::max(d1, best);
    }
    double d2 = 0.0;
    for (const auto& q : curve.nodes) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : pts) best = std::min(best, (q - p).norm());
        d2 = std::max(d2, best);
    }
    return std::max(d1, d2);
}

inline CheckReport check_consistency(const FlatFlowState<2>& state, const OracleRun& oracle,
                                     const std::vector<double>& sample_times, double budget) {
    CheckReport rep;
    rep.name = "consistency";
    double worst = 0.0;
    int used = 0;
    for (double t : sample_times) {
        if (t > oracle.t_end + 1e-12) break;  // oracle stopped early: truncate
        const SmoothCurve* best_curve = &oracle.snapshots.front();
        double best_dt = std::numeric_limits<double>::infinity();
        for (const auto& c : oracle.snapshots)
            if (std::abs(c.time - t) < best_dt) {
                best_dt = std::abs(c.time - t);
                best_curve = &c;
            }
        worst = std::max(worst, hausdorff_contour_curve(state.at_time(t), *best_curve));
        ++used;
    }
    rep.metric("hausdorff_max", worst);
    rep.metric("budget", budget);
    rep.metric("times_used", used);
    rep.pass = used > 0 && worst <= budget;
    return rep;
}

// Time-Holder constant of a flat flow: max over sampled pairs of
// |E(t) Delta E(s)| / sqrt(|t - s|) with |t - s| in [gap_min, gap_max].
template <int N>
double holder_constant(const FlatFlowState<N>& state, double gap_min, double gap_max) {
    double worst = 0.0;
    const int m = static_cast<int>(state.sets.size());
    const int stride = std::max(1, m / 64);
    for (int a = 0; a < m; a += stride)
        for (int b = a + 1; b < m; b += stride) {
            const double gap = (b - a) * state.tau;
            if (gap < gap_min || gap > gap_max) continue;
            const double d = symmetric_difference_measure(state.sets[a], state.sets[b]);
            worst = std::max(worst, d / std::sqrt(gap));
        }
    return worst;
}

// Volume-distance inequality with the frozen constant C4 at p = sqrt(tau):
// |E_k Delta E_{k-1}| <= C4 sqrt(tau) C_beta(E_{k-1}) + sqrt(tau) dissipation.
template <int N>
CheckReport check_volume_distance(const FlatFlowState<N>& state, const Anisotropy<N>& phi,
                                  const PerimeterStencil<N>& stencil,
                                  const ContactAngleField<N>& beta, double c4_frozen) {
    CheckReport rep;
    rep.name = "volume-distance";
    double c4_needed = 0.0;
    const double p = std::sqrt(state.tau);
    for (size_t k = 1; k < state.sets.size(); ++k) {
        const auto& prev = state.sets[k - 1];
        if (prev.empty()) continue;
        const double lhs = symmetric_difference_measure(state.sets[k], prev);
        const double dis = state.steps[k - 1].dissipation * p;
        const double cb = capillary_energy(prev, phi, stencil, beta);
        if (cb <= 0) continue;
        c4_needed = std::max(c4_needed, (lhs - dis) / (p * state.tau * cb / state.tau) );
    }
    rep.metric("C4_needed", c4_needed);
    rep.metric("C4_frozen", c4_frozen);
    rep.pass = c4_needed <= c4_frozen;
    return rep;
}

}  // namespace dropflow
