#pragma once

// Front-tracking solver for the smooth flow in the plane: a polyline droplet
// boundary with endpoints on the floor evolves by
//     V = -kappa^phi - f,
// V the outward normal velocity, with the anisotropic contact-angle condition
// grad phi(nu) . e_2 = -beta enforced exactly at the endpoints after every
// step by sliding them along the floor (1-D root finding on the tangent
// angle). The second-derivative term is treated semi-implicitly with frozen
// coefficients; nodes are resampled to near-uniform arclength each step.
//
// Stability: dt <= kFrontStabilityC * (min node spacing). The constant was
// determined empirically on the shrinking half-disk benchmark.
//
// Node order: p_0 is the right contact point, p_M the left one, traversal
// counterclockwise over the apex (droplet on the left of travel), so the
// outward unit normal at a node with unit tangent t is (t_y, -t_x).

#include "dropflow/anisotropy.hpp"

#include <functional>

namespace dropflow {

inline constexpr double kFrontStabilityC = 0.5;

struct SmoothCurve {
    std::vector<Vec<2>> nodes;
    double time = 0.0;

    int segments() const { return static_cast<int>(nodes.size()) - 1; }

    double min_spacing() const {
        double m = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i + 1 < nodes.size(); ++i)
            m = std::min(m, (nodes[i + 1] - nodes[i]).norm());
        return m;
    }

    // Enclosed droplet area (curve closed along the floor).
    double area() const {
        double a2 = 0.0;
        const size_t m = nodes.size();
        for (size_t i = 0; i + 1 < m; ++i)
            a2 += nodes[i][0] * nodes[i + 1][1] - nodes[i + 1][0] * nodes[i][1];
        // closing floor segment from p_M to p_0 contributes zero (y = 0)
        return 0.5 * a2;
    }

    double contact_length() const { return nodes.front()[0] - nodes.back()[0]; }

    Vec<2> tangent(int i) const {
        const int m = static_cast<int>(nodes.size());
        const Vec<2> d = nodes[std::min(i + 1, m - 1)] - nodes[std::max(i - 1, 0)];
        return d / d.norm();
    }

    Vec<2> outward_normal(int i) const {
        const Vec<2> t = tangent(i);
        return Vec<2>(t[1], -t[0]);
    }

    bool is_simple() const {
        const int m = segments();
        for (int i = 0; i < m; ++i)
            for (int j = i + 2; j < m; ++j) {
                if (i == 0 && j == m - 1) { /* endpoints may meet only at extinction */ }
                if (segments_intersect(nodes[i], nodes[i + 1], nodes[j], nodes[j + 1]))
                    return false;
            }
        return true;
    }

    bool valid_droplet() const {
        if (nodes.size() < 5) return false;
        if (std::abs(nodes.front()[1]) > 1e-12 || std::abs(nodes.back()[1]) > 1e-12) return false;
        for (size_t i = 1; i + 1 < nodes.size(); ++i)
            if (!(nodes[i][1] > 0.0)) return false;
        return is_simple();
    }

    bool contains(const Vec<2>& p) const {
        if (p[1] < 0.0) return false;
        // ray casting on the closed polygon (curve + floor segment)
        bool inside = false;
        const size_t m = nodes.size();
        auto edge = [&](const Vec<2>& a, const Vec<2>& b) {
            if ((a[1] > p[1]) != (b[1] > p[1])) {
                const double xint = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if (xint > p[0]) inside = !inside;
            }
        };
        for (size_t i = 0; i + 1 < m; ++i) edge(nodes[i], nodes[i + 1]);
        edge(nodes[m - 1], nodes[0]);
        return inside;
    }

    static bool segments_intersect(const Vec<2>& a, const Vec<2>& b, const Vec<2>& c,
                                   const Vec<2>& d) {
        auto orient = [](const Vec<2>& p, const Vec<2>& q, const Vec<2>& r) {
            const double v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
            return (v > 0) - (v < 0);
        };
        const int o1 = orient(a, b, c), o2 = orient(a, b, d);
        const int o3 = orient(c, d, a), o4 = orient(c, d, b);
        return o1 != o2 && o3 != o4;
    }

    static SmoothCurve half_circle(double radius, double center_x, int node_count) {
        SmoothCurve c;
        c.nodes.resize(node_count + 1);
        for (int i = 0; i <= node_count; ++i) {
            const double th = kPi * i / node_count;
            c.nodes[i] = Vec<2>(center_x + radius * std::cos(th), radius * std::sin(th));
        }
        c.nodes.front()[1] = 0.0;
        c.nodes.back()[1] = 0.0;
        return c;
    }

    // Upper half of a Wulff shape of the given radius: the beta = 0
    // equilibrium profile for any even anisotropy.
    static SmoothCurve half_wulff(const DualAnisotropy<2>& dual, double radius, double center_x,
                                  int node_count) {
        SmoothCurve c;
        c.nodes.resize(node_count + 1);
        for (int i = 0; i <= node_count; ++i) {
            const double th = kPi * i / node_count;
            const Vec<2> d(std::cos(th), std::sin(th));
            Vec<2> p = radius * d / dual.value(d);
            p[0] += center_x;
            if (i == 0 || i == node_count) p[1] = 0.0;
            c.nodes[i] = p;
        }
        return c;
    }
};

// kappa^phi at an interior node: (Hess phi(nu) t . t) times the Euclidean
// curvature (Menger three-point formula); positive for convex droplets.
inline double phi_curvature(const SmoothCurve& curve, const Anisotropy<2>& phi, int node) {
    const int m = static_cast<int>(curve.nodes.size());
    if (node <= 0 || node >= m - 1)
        throw SetupError("phi_curvature: boundary node (curvature not needed there)");
    const Vec<2>&a = curve.nodes[node - 1], &b = curve.nodes[node], &c = curve.nodes[node + 1];
    const Vec<2> u = b - a, v = c - b, w = c - a;
    const double cross = u[0] * v[1] - u[1] * v[0];
    const double kappa = 2.0 * cross / (u.norm() * v.norm() * w.norm());
    const Vec<2> t = w / w.norm();
    const Vec<2> nu(t[1], -t[0]);
    return (phi.hessian(nu) * t).dot(t) * kappa;
}

enum class FrontStop { None, Extinct, SelfIntersection, AngleNotBracketed, ResolutionLoss };

inline const char* to_string(FrontStop s) {
    switch (s) {
        case FrontStop::None: return "none";
        case FrontStop::Extinct: return "extinct";
        case FrontStop::SelfIntersection: return "self-intersection";
        case FrontStop::AngleNotBracketed: return "angle-not-bracketed";
        case FrontStop::ResolutionLoss: return "resolution-loss";
    }
    return "?";
}

namespace detail {

// Slide an endpoint along the floor so the one-sided tangent satisfies
// grad phi(nu) . e_2 = -beta. The tangent is the second-order one-sided
// derivative through the endpoint and its two neighbors (the chord version
// straightens the polyline at the contact and drags the contact line).
// Monotone in the tangent angle for elliptic phi; solved by bisection.
// right_end: the p_0 side.
inline Vec<2> solve_contact_point(const Vec<2>& q1, const Vec<2>& q2, bool right_end,
                                  const Anisotropy<2>& phi,
                                  const std::function<double(double)>& beta) {
    if (!(q1[1] > 0)) throw TopologyError("contact neighbor collapsed onto the floor");
    // One-sided derivative at the end of a parabola through e, q1, q2 with
    // near-uniform spacing: T ~ 4 q1 - q2 - 3 e (pointing into the curve at
    // the right end, out of it at the left end). Falls back to the chord when
    // the parabola degenerates.
    Vec<2> lead = 4.0 * q1 - q2;
    double weight = 3.0;
    if (!(lead[1] > 0)) {
        lead = q1;
        weight = 1.0;
    }
    // T(psi) = (cos psi, sin psi); at the right endpoint the curve leaves
    // upward (sin > 0), at the left it arrives downward (sin < 0).
    auto endpoint = [&](double psi) {
        const double s = std::sin(psi), c = std::cos(psi);
        // right: lead - weight e = t T with t > 0; left: t < 0
        const double t = lead[1] / s;  // positive at the right end, negative at the left
        return Vec<2>((lead[0] - t * c) / weight, 0.0);
    };
    auto residual = [&](double psi) {
        const Vec<2> T(std::cos(psi), std::sin(psi));
        const Vec<2> nu(T[1], -T[0]);
        const Vec<2> e = endpoint(psi);
        return phi.gradient(nu).dot(Vec<2>::UnitY()) + beta(e[0]);
    };
    const double eps = 1e-9;
    double lo = right_end ? eps : kPi + eps;
    double hi = right_end ? kPi - eps : 2.0 * kPi - eps;
    double flo = residual(lo), fhi = residual(hi);
    if (flo * fhi > 0.0)
        throw AdmissibilityError(
            "contact-angle root not bracketed: |beta| too close to phi(e_2)");
    // residual is increasing on (0, pi), decreasing on (pi, 2 pi)
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = residual(mid);
        if ((fm > 0) == (flo > 0)) { lo = mid; flo = fm; }
        else { hi = mid; fhi = fm; }
        if (hi - lo < 1e-13) break;
    }
    return endpoint(0.5 * (lo + hi));
}

inline SmoothCurve resample_uniform(const SmoothCurve& in, int node_count) {
    std::vector<double> s(in.nodes.size(), 0.0);
    for (size_t i = 1; i < in.nodes.size(); ++i)
        s[i] = s[i - 1] + (in.nodes[i] - in.nodes[i - 1]).norm();
    const double total = s.back();
    SmoothCurve out;
    out.time = in.time;
    out.nodes.resize(node_count + 1);
    size_t j = 0;
    for (int i = 0; i <= node_count; ++i) {
        const double target = total * i / node_count;
        while (j + 2 < s.size() && s[j + 1] < target) ++j;
        const double seg = s[j + 1] - s[j];
        const double w = seg > 0 ? (target - s[j]) / seg : 0.0;
        out.nodes[i] = (1.0 - w) * in.nodes[j] + w * in.nodes[j + 1];
    }
    out.nodes.front()[1] = 0.0;
    out.nodes.back()[1] = 0.0;
    return out;
}

}  // namespace detail

// One semi-implicit step. Throws AdmissibilityError / TopologyError per the
// maximal-time semantics; extinction must be detected by the caller from the
// area (see run_front_tracking).
inline SmoothCurve step_front(const SmoothCurve& curve, const Anisotropy<2>& phi,
                              const std::function<double(double)>& beta,
                              const std::function<double(double, const Vec<2>&)>& f, double dt) {
    const int m = static_cast<int>(curve.nodes.size()) - 1;
    if (m < 4) throw TopologyError("front curve has too few nodes");
    if (!(dt > 0) || dt > kFrontStabilityC * curve.min_spacing() + 1e-15)
        throw ConfigError("step_front: dt exceeds the stability bound C * min spacing");

    // Semi-implicit interior update: (q - p)/dt = mu p_ss - f nu, with the
    // arclength second difference implicit and mu, nu, f frozen. The
    // endpoints enter as Dirichlet data; solving once with the old endpoints
    // drags the contact line, so the solve and the contact-angle slide are
    // iterated to a joint fixed point (three passes suffice: the endpoint
    // update per pass is O(dt^2)).
    std::vector<double> lower(m + 1, 0.0), diag(m + 1, 1.0), upper(m + 1, 0.0);
    std::vector<double> rhsx(m + 1), rhsy(m + 1);
    for (int i = 1; i < m; ++i) {
        const Vec<2>& p = curve.nodes[i];
        const double dm = (curve.nodes[i] - curve.nodes[i - 1]).norm();
        const double dp = (curve.nodes[i + 1] - curve.nodes[i]).norm();
        const Vec<2> t = curve.tangent(i);
        const Vec<2> nu(t[1], -t[0]);
        const double mu = (phi.hessian(nu) * t).dot(t);
        const double alpha = dt * mu * 2.0 / (dm + dp);
        lower[i] = -alpha / dm;
        upper[i] = -alpha / dp;
        diag[i] = 1.0 + alpha / dm + alpha / dp;
        const Vec<2> rhs = p - dt * f(curve.time, p) * nu;
        rhsx[i] = rhs[0];
        rhsy[i] = rhs[1];
    }
    // Thomas solve (shared matrix for both components).
    auto solve = [&](std::vector<double> r) {
        std::vector<double> d = diag, out(m + 1);
        for (int i = 1; i <= m; ++i) {
            const double w = lower[i] / d[i - 1];
            d[i] -= w * upper[i - 1];
            r[i] -= w * r[i - 1];
        }
        out[m] = r[m] / d[m];
        for (int i = m - 1; i >= 0; --i) out[i] = (r[i] - upper[i] * out[i + 1]) / d[i];
        return out;
    };

    SmoothCurve next;
    next.time = curve.time + dt;
    next.nodes.resize(m + 1);
    Vec<2> end_r = curve.nodes[0], end_l = curve.nodes[m];
    for (int pass = 0; pass < 80; ++pass) {
        rhsx[0] = end_r[0];
        rhsy[0] = end_r[1];
        rhsx[m] = end_l[0];
        rhsy[m] = end_l[1];
        const auto qx = solve(rhsx);
        const auto qy = solve(rhsy);
        for (int i = 0; i <= m; ++i) next.nodes[i] = Vec<2>(qx[i], qy[i]);
        const Vec<2> new_r =
            detail::solve_contact_point(next.nodes[1], next.nodes[2], true, phi, beta);
        const Vec<2> new_l = detail::solve_contact_point(next.nodes[m - 1], next.nodes[m - 2],
                                                         false, phi, beta);
        const double moved =
            std::max((new_r - end_r).norm(), (new_l - end_l).norm());
        end_r = new_r;
        end_l = new_l;
        if (moved < 1e-12) break;
    }
    next.nodes[0] = end_r;
    next.nodes[m] = end_l;
    for (int i = 1; i < m; ++i)
        if (!(next.nodes[i][1] > 0)) throw TopologyError("interior node reached the floor");
    if (!(next.nodes[0][0] > next.nodes[m][0]))
        throw TopologyError("contact points crossed");

    next = detail::resample_uniform(next, m);
    next.nodes[0] = detail::solve_contact_point(next.nodes[1], next.nodes[2], true, phi, beta);
    next.nodes[m] = detail::solve_contact_point(next.nodes[m - 1], next.nodes[m - 2], false, phi, beta);
    if (!next.is_simple()) throw TopologyError("front self-intersects");
    return next;
}

struct OracleRun {
    std::vector<SmoothCurve> snapshots;  // at the requested times (plus t = 0)
    SmoothCurve last;
    FrontStop stop = FrontStop::None;
    double t_end = 0.0;
};

// Drives step_front until T or the maximal time, recording snapshots at the
// requested times. Extinction is detected from the enclosed area.
inline OracleRun run_front_tracking(const SmoothCurve& curve0, const Anisotropy<2>& phi,
                                    const std::function<double(double)>& beta,
                                    const std::function<double(double, const Vec<2>&)>& f,
                                    double dt, double T,
                                    const std::vector<double>& snapshot_times = {}) {
    OracleRun run;
    SmoothCurve cur = curve0;
    run.snapshots.push_back(cur);
    size_t next_snap = 0;
    const double extinct_area = 4.0 * cur.min_spacing() * cur.min_spacing();
    const double spacing0 = cur.min_spacing();
    while (cur.time < T - 1e-12) {
        const double step = std::min({dt, kFrontStabilityC * cur.min_spacing(), T - cur.time});
        try {
            cur = step_front(cur, phi, beta, f, step);
        } catch (const TopologyError&) {
            run.stop = FrontStop::SelfIntersection;
            break;
        } catch (const AdmissibilityError&) {
            run.stop = FrontStop::AngleNotBracketed;
            break;
        }
        if (cur.area() < extinct_area) {
            run.stop = FrontStop::Extinct;
            break;
        }
        if (cur.min_spacing() < 1e-3 * spacing0) {
            run.stop = FrontStop::ResolutionLoss;
            break;
        }
        while (next_snap < snapshot_times.size() && cur.time >= snapshot_times[next_snap] - 1e-12) {
            run.snapshots.push_back(cur);
            ++next_snap;
        }
    }
    run.last = cur;
    run.t_end = cur.time;
    return run;
}

// Free-boundary capillary energy of a curve.
inline double curve_capillary_energy(const SmoothCurve& curve, const Anisotropy<2>& phi,
                                     const std::function<double(double)>& beta) {
    double per = 0.0;
    for (size_t i = 0; i + 1 < curve.nodes.size(); ++i) {
        const Vec<2> e = curve.nodes[i + 1] - curve.nodes[i];
        per += phi.value(Vec<2>(e[1], -e[0]));
    }
    const double xl = curve.nodes.back()[0], xr = curve.nodes.front()[0];
    double wet = 0.0;
    const int q = 64;
    for (int i = 0; i < q; ++i) {
        const double x = xl + (xr - xl) * (i + 0.5) / q;
        wet += beta(x) * (xr - xl) / q;
    }
    return per + wet;
}

// Residual of grad phi(nu) . e_2 + beta at both contact points, measured on
// the same second-order one-sided tangents the stepping enforces.
inline double contact_angle_residual(const SmoothCurve& curve, const Anisotropy<2>& phi,
                                     const std::function<double(double)>& beta) {
    const size_t m = curve.nodes.size() - 1;
    const Vec<2> tr =
        (4.0 * curve.nodes[1] - curve.nodes[2] - 3.0 * curve.nodes[0]).normalized();
    const Vec<2> nur(tr[1], -tr[0]);
    const double r_right = phi.gradient(nur).dot(Vec<2>::UnitY()) + beta(curve.nodes[0][0]);
    const Vec<2> tl =
        (3.0 * curve.nodes[m] - 4.0 * curve.nodes[m - 1] + curve.nodes[m - 2]).normalized();
    const Vec<2> nul(tl[1], -tl[0]);
    const double r_left = phi.gradient(nul).dot(Vec<2>::UnitY()) + beta(curve.nodes[m][0]);
    return std::max(std::abs(r_right), std::abs(r_left));
}

inline double polyline_distance(const SmoothCurve& a, const SmoothCurve& b) {
    auto point_to_segments = [](const Vec<2>& p, const SmoothCurve& c) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i + 1 < c.nodes.size(); ++i) {
            const Vec<2>&u = c.nodes[i], &v = c.nodes[i + 1];
            const Vec<2> d = v - u;
            const double t = std::clamp((p - u).dot(d) / d.squaredNorm(), 0.0, 1.0);
            best = std::min(best, (p - (u + t * d)).norm());
        }
        return best;
    };
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : a.nodes) m = std::min(m, point_to_segments(p, b));
    for (const auto& p : b.nodes) m = std::min(m, point_to_segments(p, a));
    return m;
}

struct StrongComparisonResult {
    bool ordered = false;
    double min_gap = 0.0;
    double t_end = 0.0;
    FrontStop inner_stop = FrontStop::None;
    FrontStop outer_stop = FrontStop::None;
};

// Evolves a strictly nested pair (inner with beta_a >= beta_b, f_a >= f_b) and
// reports whether the free boundaries keep a strictly positive distance.
inline StrongComparisonResult strong_comparison_check(
    const SmoothCurve& inner0, const SmoothCurve& outer0, const Anisotropy<2>& phi,
    const std::function<double(double)>& beta_a, const std::function<double(double)>& beta_b,
    const std::function<double(double, const Vec<2>&)>& f_a,
    const std::function<double(double, const Vec<2>&)>& f_b, double dt, double T) {
    for (const auto& p : inner0.nodes)
        if (!outer0.contains(Vec<2>(p[0], std::max(p[1], 1e-12))))
            throw SetupError("strong comparison: initial droplets are not nested");
    const double gap0 = polyline_distance(inner0, outer0);
    if (!(gap0 > 0.0))
        throw SetupError("strong comparison: initial free-boundary gap must be positive");

    StrongComparisonResult res;
    res.ordered = true;
    res.min_gap = gap0;
    SmoothCurve a = inner0, b = outer0;
    const double ext_a = 4.0 * a.min_spacing() * a.min_spacing();
    while (a.time < T - 1e-12) {
        const double step =
            std::min({dt, kFrontStabilityC * a.min_spacing(), kFrontStabilityC * b.min_spacing(),
                      T - a.time});
        try {
            a = step_front(a, phi, beta_a, f_a, step);
        } catch (const Error&) {
            res.inner_stop = FrontStop::SelfIntersection;
            break;
        }
        try {
            b = step_front(b, phi, beta_b, f_b, step);
        } catch (const Error&) {
            res.outer_stop = FrontStop::SelfIntersection;
            break;
        }
        if (a.area() < ext_a) {
            res.inner_stop = FrontStop::Extinct;
            break;
        }
        const double gap = polyline_distance(a, b);
        res.min_gap = std::min(res.min_gap, gap);
        if (!(gap > 0.0)) {
            res.ordered = false;
            break;
        }
        res.t_end = a.time;
    }
    return res;
}

}  // namespace dropflow
