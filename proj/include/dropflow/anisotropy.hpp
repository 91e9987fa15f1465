#pragma once

// Even, positively 1-homogeneous convex surface-tension norms and their duals.
//
// Supported families:
//   Euclidean            |x|
//   LinearMap(A)         |Ax| for symmetric positive-definite A
//   SmoothedL1(eps)      sum_i sqrt(x_i^2 + eps^2 |x|^2), eps > 0
//   Tabulated            angular samples with C^2 spline interpolation (2-D),
//                        lat-long grid with Catmull-Rom interpolation (3-D)
//
// All evaluators are pure; an Anisotropy is immutable after construction.

#include "dropflow/common.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

namespace dropflow {

enum class AnisotropyKind { Euclidean, LinearMap, SmoothedL1, Tabulated };

inline const char* to_string(AnisotropyKind k) {
    switch (k) {
        case AnisotropyKind::Euclidean: return "euclidean";
        case AnisotropyKind::LinearMap: return "linear_map";
        case AnisotropyKind::SmoothedL1: return "smoothed_l1";
        case AnisotropyKind::Tabulated: return "tabulated";
    }
    return "?";
}

// C^2 periodic cubic spline on uniform knots over [0, period).
class PeriodicSpline {
public:
    PeriodicSpline() = default;

    PeriodicSpline(std::vector<double> values, double period)
        : period_(period), y_(std::move(values)) {
        const int m = static_cast<int>(y_.size());
        if (m < 4) throw ResolutionError("periodic spline needs >= 4 knots");
        dx_ = period_ / m;
        solve_moments();
    }

    double period() const { return period_; }
    int size() const { return static_cast<int>(y_.size()); }

    double eval(double x) const {
        int j; double t;
        locate(x, j, t);
        const int jp = next(j);
        const double a = y_[j], b = y_[jp];
        const double ma = m2_[j], mb = m2_[jp];
        const double u = 1.0 - t;
        return u * a + t * b +
               dx_ * dx_ / 6.0 * ((u * u * u - u) * ma + (t * t * t - t) * mb);
    }

    double deriv(double x) const {
        int j; double t;
        locate(x, j, t);
        const int jp = next(j);
        const double u = 1.0 - t;
        return (y_[jp] - y_[j]) / dx_ +
               dx_ / 6.0 * ((3.0 * t * t - 1.0) * m2_[jp] - (3.0 * u * u - 1.0) * m2_[j]);
    }

    double deriv2(double x) const {
        int j; double t;
        locate(x, j, t);
        const int jp = next(j);
        return (1.0 - t) * m2_[j] + t * m2_[jp];
    }

private:
    int next(int j) const { return (j + 1) % static_cast<int>(y_.size()); }

    void locate(double x, int& j, double& t) const {
        const int m = static_cast<int>(y_.size());
        double s = std::fmod(x, period_);
        if (s < 0) s += period_;
        double q = s / dx_;
        j = static_cast<int>(std::floor(q));
        if (j >= m) j = m - 1;
        t = q - j;
    }

    // Cyclic tridiagonal system for the second-derivative moments
    // (Sherman-Morrison on top of the Thomas algorithm).
    void solve_moments() {
        const int m = static_cast<int>(y_.size());
        std::vector<double> rhs(m);
        for (int j = 0; j < m; ++j) {
            const double yl = y_[(j + m - 1) % m], yc = y_[j], yr = y_[(j + 1) % m];
            rhs[j] = 6.0 * (yr - 2.0 * yc + yl) / (dx_ * dx_);
        }
        const double diag = 4.0, off = 1.0;
        auto thomas = [&](std::vector<double> d, const std::vector<double>& r) {
            std::vector<double> c(m, off), out(m);
            std::vector<double> rr = r;
            for (int i = 1; i < m; ++i) {
                const double w = off / d[i - 1];
                d[i] -= w * c[i - 1];
                rr[i] -= w * rr[i - 1];
            }
            out[m - 1] = rr[m - 1] / d[m - 1];
            for (int i = m - 2; i >= 0; --i) out[i] = (rr[i] - c[i] * out[i + 1]) / d[i];
            return out;
        };
        // Cyclic correction vector.
        std::vector<double> d(m, diag);
        const double gamma = -diag;
        d[0] -= gamma;
        d[m - 1] -= off * off / gamma;
        std::vector<double> u(m, 0.0);
        u[0] = gamma;
        u[m - 1] = off;
        auto x1 = thomas(d, rhs);
        auto x2 = thomas(d, u);
        const double vx1 = x1[0] + (off / gamma) * x1[m - 1];
        const double vx2 = x2[0] + (off / gamma) * x2[m - 1];
        const double factor = vx1 / (1.0 + vx2);
        m2_.resize(m);
        for (int i = 0; i < m; ++i) m2_[i] = x1[i] - factor * x2[i];
    }

    double period_ = kPi;
    double dx_ = 0.0;
    std::vector<double> y_;
    std::vector<double> m2_;
};

namespace detail {

// Lat-long table of log(phi) on the sphere, Catmull-Rom in both angles.
// Derivatives of the 1-homogeneous extension are taken by finite differences,
// so Tabulated 3-D gradients/Hessians are interpolation-limited.
struct SphereTable {
    int n_az = 0, n_pol = 0;
    std::vector<double> logv;  // row-major [pol][az]

    double at(int ip, int ia) const {
        ia = ((ia % n_az) + n_az) % n_az;
        if (ip < 0) { ip = -ip; ia = (ia + n_az / 2) % n_az; }
        if (ip >= n_pol) { ip = 2 * (n_pol - 1) - ip; ia = (ia + n_az / 2) % n_az; }
        return logv[static_cast<size_t>(ip) * n_az + ia];
    }

    static double catmull(double pm1, double p0, double p1, double p2, double t) {
        return 0.5 * ((2.0 * p0) + (-pm1 + p1) * t +
                      (2.0 * pm1 - 5.0 * p0 + 4.0 * p1 - p2) * t * t +
                      (-pm1 + 3.0 * p0 - 3.0 * p1 + p2) * t * t * t);
    }

    double log_value(const Vec<3>& u) const {
        const double pol = std::acos(std::clamp(u[2], -1.0, 1.0));
        double az = std::atan2(u[1], u[0]);
        if (az < 0) az += 2.0 * kPi;
        const double fa = az / (2.0 * kPi) * n_az;
        const double fp = pol / kPi * (n_pol - 1);
        const int ia = static_cast<int>(std::floor(fa));
        const int ip = static_cast<int>(std::floor(fp));
        const double ta = fa - ia, tp = std::min(fp - ip, 1.0);
        double col[4];
        for (int r = -1; r <= 2; ++r)
            col[r + 1] = catmull(at(ip + r, ia - 1), at(ip + r, ia), at(ip + r, ia + 1),
                                 at(ip + r, ia + 2), ta);
        return catmull(col[0], col[1], col[2], col[3], tp);
    }
};

}  // namespace detail

template <int N>
class Anisotropy {
    static_assert(N == 2 || N == 3, "anisotropies are supported in dimensions 2 and 3");

public:
    static Anisotropy euclidean() {
        Anisotropy a;
        a.kind_ = AnisotropyKind::Euclidean;
        a.finish();
        return a;
    }

    static Anisotropy linear_map(const Mat<N>& A) {
        if (!A.isApprox(A.transpose(), 1e-12))
            throw ConfigError("linear_map anisotropy requires a symmetric matrix");
        Eigen::SelfAdjointEigenSolver<Mat<N>> es(A);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw ConfigError("linear_map anisotropy requires a positive-definite matrix");
        Anisotropy a;
        a.kind_ = AnisotropyKind::LinearMap;
        a.A_ = A;
        a.B_ = A.transpose() * A;
        a.Ainv_ = A.inverse();
        a.sigma_min_ = es.eigenvalues().minCoeff();
        a.sigma_max_ = es.eigenvalues().maxCoeff();
        a.finish();
        return a;
    }

    static Anisotropy smoothed_l1(double eps) {
        if (!(eps > 0.0))
            throw ConfigError("smoothed_l1 requires eps > 0 (eps = 0 is crystalline, not C^2)");
        Anisotropy a;
        a.kind_ = AnisotropyKind::SmoothedL1;
        a.eps_ = eps;
        a.finish();
        return a;
    }

    // 2-D tabulated kind from (angle, value) samples. Evenness is enforced by
    // folding all samples modulo pi; log(phi) is interpolated with a periodic
    // C^2 cubic spline.
    static Anisotropy tabulated(const std::vector<double>& angles,
                                const std::vector<double>& values) {
        static_assert(N == 2, "tabulated(angles, values) is the 2-D constructor");
        if (angles.size() != values.size() || angles.size() < 8)
            throw ConfigError("tabulated anisotropy needs >= 8 (angle, value) samples");
        for (double v : values)
            if (!(v > 0.0)) throw ConfigError("tabulated anisotropy values must be positive");
        std::vector<std::pair<double, double>> folded;
        folded.reserve(angles.size());
        for (size_t i = 0; i < angles.size(); ++i) {
            double t = std::fmod(angles[i], kPi);
            if (t < 0) t += kPi;
            folded.emplace_back(t, std::log(values[i]));
        }
        std::sort(folded.begin(), folded.end());
        const int m = std::max<int>(256, 2 * static_cast<int>(folded.size()));
        std::vector<double> knots(m);
        const size_t s = folded.size();
        for (int j = 0; j < m; ++j) {
            const double t = kPi * j / m;
            size_t hi = 0;
            while (hi < s && folded[hi].first <= t) ++hi;
            const size_t i1 = hi % s, i0 = (hi + s - 1) % s;
            double t0 = folded[i0].first, t1 = folded[i1].first;
            if (t1 <= t0) t1 += kPi;
            double tt = t < t0 ? t + kPi : t;
            const double w = (t1 > t0) ? (tt - t0) / (t1 - t0) : 0.0;
            knots[j] = (1.0 - w) * folded[i0].second + w * folded[i1].second;
        }
        return from_log_spline(PeriodicSpline(std::move(knots), kPi));
    }

    static Anisotropy from_log_spline(PeriodicSpline spline) {
        static_assert(N == 2);
        Anisotropy a;
        a.kind_ = AnisotropyKind::Tabulated;
        a.spline_ = std::make_shared<PeriodicSpline>(std::move(spline));
        a.finish();
        return a;
    }

    // 3-D tabulated kind from (azimuth, polar, value) samples on a lat-long grid.
    static Anisotropy tabulated_sphere(int n_az, int n_pol, const std::vector<double>& values) {
        static_assert(N == 3, "tabulated_sphere is the 3-D constructor");
        if (n_az < 8 || n_pol < 5 || values.size() != static_cast<size_t>(n_az) * n_pol)
            throw ConfigError("tabulated_sphere: bad grid dimensions");
        auto table = std::make_shared<detail::SphereTable>();
        table->n_az = n_az;
        table->n_pol = n_pol;
        table->logv.resize(values.size());
        // Symmetrize: phi(u) and phi(-u) are averaged in log space.
        for (int ip = 0; ip < n_pol; ++ip)
            for (int ia = 0; ia < n_az; ++ia) {
                const double v = values[static_cast<size_t>(ip) * n_az + ia];
                const int ipo = n_pol - 1 - ip, iao = (ia + n_az / 2) % n_az;
                const double vo = values[static_cast<size_t>(ipo) * n_az + iao];
                if (!(v > 0.0) || !(vo > 0.0))
                    throw ConfigError("tabulated_sphere values must be positive");
                table->logv[static_cast<size_t>(ip) * n_az + ia] =
                    0.5 * (std::log(v) + std::log(vo));
            }
        Anisotropy a;
        a.kind_ = AnisotropyKind::Tabulated;
        a.sphere_ = std::move(table);
        a.finish();
        return a;
    }

    AnisotropyKind kind() const { return kind_; }
    int dimension() const { return N; }

    double operator()(const Vec<N>& x) const { return value(x); }

    double value(const Vec<N>& x) const {
        switch (kind_) {
            case AnisotropyKind::Euclidean:
                return x.norm();
            case AnisotropyKind::LinearMap:
                return (A_ * x).norm();
            case AnisotropyKind::SmoothedL1: {
                const double r2 = x.squaredNorm();
                double s = 0.0;
                for (int i = 0; i < N; ++i) s += std::sqrt(x[i] * x[i] + eps_ * eps_ * r2);
                return s;
            }
            case AnisotropyKind::Tabulated: {
                const double r = x.norm();
                if (r == 0.0) return 0.0;
                if constexpr (N == 2) {
                    return r * std::exp(spline_->eval(std::atan2(x[1], x[0])));
                } else {
                    Vec<3> u = x / r;
                    return r * std::exp(sphere_->log_value(u));
                }
            }
        }
        return 0.0;
    }

    Vec<N> gradient(const Vec<N>& x) const {
        if (x.squaredNorm() == 0.0)
            throw SingularPointError("anisotropy gradient is undefined at the origin");
        switch (kind_) {
            case AnisotropyKind::Euclidean:
                return x / x.norm();
            case AnisotropyKind::LinearMap:
                return B_ * x / (A_ * x).norm();
            case AnisotropyKind::SmoothedL1: {
                const double r2 = x.squaredNorm();
                Vec<N> g = Vec<N>::Zero();
                double inv_sum = 0.0;
                for (int i = 0; i < N; ++i) {
                    const double si = std::sqrt(x[i] * x[i] + eps_ * eps_ * r2);
                    g[i] += x[i] / si;
                    inv_sum += 1.0 / si;
                }
                g += eps_ * eps_ * inv_sum * x;
                return g;
            }
            case AnisotropyKind::Tabulated: {
                if constexpr (N == 2) {
                    const double th = std::atan2(x[1], x[0]);
                    const double g = std::exp(spline_->eval(th));
                    const double gp = g * spline_->deriv(th);
                    const Vec<2> rhat(std::cos(th), std::sin(th));
                    const Vec<2> that(-std::sin(th), std::cos(th));
                    return g * rhat + gp * that;
                } else {
                    return fd_gradient(x);
                }
            }
        }
        return Vec<N>::Zero();
    }

    Mat<N> hessian(const Vec<N>& x) const {
        if (x.squaredNorm() == 0.0)
            throw SingularPointError("anisotropy Hessian is undefined at the origin");
        switch (kind_) {
            case AnisotropyKind::Euclidean: {
                const double r = x.norm();
                const Vec<N> u = x / r;
                return (Mat<N>::Identity() - u * u.transpose()) / r;
            }
            case AnisotropyKind::LinearMap: {
                const double m = (A_ * x).norm();
                const Vec<N> bx = B_ * x;
                return B_ / m - bx * bx.transpose() / (m * m * m);
            }
            case AnisotropyKind::SmoothedL1: {
                const double r2 = x.squaredNorm();
                Mat<N> H = Mat<N>::Zero();
                for (int i = 0; i < N; ++i) {
                    const double si = std::sqrt(x[i] * x[i] + eps_ * eps_ * r2);
                    Vec<N> pi = eps_ * eps_ * x;
                    pi[i] += x[i];
                    Mat<N> base = eps_ * eps_ * Mat<N>::Identity();
                    base(i, i) += 1.0;
                    H += base / si - pi * pi.transpose() / (si * si * si);
                }
                return H;
            }
            case AnisotropyKind::Tabulated: {
                if constexpr (N == 2) {
                    const double th = std::atan2(x[1], x[0]);
                    const double r = x.norm();
                    const double s = spline_->eval(th), s1 = spline_->deriv(th),
                                 s2 = spline_->deriv2(th);
                    const double g = std::exp(s);
                    const double gpp = g * (s2 + s1 * s1);
                    const Vec<2> that(-std::sin(th), std::cos(th));
                    return (g + gpp) / r * that * that.transpose();
                } else {
                    return fd_hessian(x);
                }
            }
        }
        return Mat<N>::Zero();
    }

    // Norm-equivalence constants: min/max of phi over the unit sphere.
    std::pair<double, double> norm_bounds() const { return {c_lower_, c_upper_}; }
    double c_lower() const { return c_lower_; }
    double c_upper() const { return c_upper_; }

    std::optional<double> ellipticity_gamma() const { return gamma_; }
    void set_ellipticity_gamma(double g) const { gamma_ = g; }

    bool has_closed_form_dual() const {
        return kind_ == AnisotropyKind::Euclidean || kind_ == AnisotropyKind::LinearMap;
    }
    const Mat<N>& linear_matrix() const { return A_; }
    const Mat<N>& linear_matrix_inverse() const { return Ainv_; }
    double smoothing() const { return eps_; }

    // Identifies the anisotropy for stencil-calibration matching.
    std::string fingerprint() const {
        std::ostringstream os;
        os.precision(17);
        os << "n" << N << ":" << to_string(kind_);
        switch (kind_) {
            case AnisotropyKind::LinearMap:
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < N; ++j) os << ":" << A_(i, j);
                break;
            case AnisotropyKind::SmoothedL1:
                os << ":" << eps_;
                break;
            case AnisotropyKind::Tabulated:
                os << ":" << (spline_ ? static_cast<const void*>(spline_.get())
                                      : static_cast<const void*>(sphere_.get()));
                break;
            default:
                break;
        }
        return os.str();
    }

private:
    void finish() {
        switch (kind_) {
            case AnisotropyKind::Euclidean:
                c_lower_ = c_upper_ = 1.0;
                break;
            case AnisotropyKind::LinearMap:
                c_lower_ = sigma_min_;
                c_upper_ = sigma_max_;
                break;
            default: {
                auto [lo, hi] = sampled_bounds();
                c_lower_ = lo;
                c_upper_ = hi;
            }
        }
    }

    std::pair<double, double> sampled_bounds() const {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        if constexpr (N == 2) {
            const int m = 8192;
            for (int i = 0; i < m; ++i) {
                const double th = kPi * i / m;  // evenness: half circle suffices
                const double v = value(Vec<2>(std::cos(th), std::sin(th)));
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        } else {
            const int m = 32768;
            for (int i = 0; i < m; ++i) {
                const Vec<3> u = fibonacci_dir(i, m);
                const double v = value(u);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        return {lo, hi};
    }

    Vec<N> fd_gradient(const Vec<N>& x) const {
        const double d = 1e-5 * x.norm();
        Vec<N> g;
        for (int i = 0; i < N; ++i) {
            Vec<N> xp = x, xm = x;
            xp[i] += d;
            xm[i] -= d;
            g[i] = (value(xp) - value(xm)) / (2.0 * d);
        }
        return g;
    }

    Mat<N> fd_hessian(const Vec<N>& x) const {
        const double d = 1e-4 * x.norm();
        Mat<N> H;
        for (int i = 0; i < N; ++i) {
            Vec<N> xp = x, xm = x;
            xp[i] += d;
            xm[i] -= d;
            const Vec<N> col = (fd_gradient(xp) - fd_gradient(xm)) / (2.0 * d);
            H.col(i) = col;
        }
        return 0.5 * (H + H.transpose());
    }

public:
    static Vec<3> fibonacci_dir(int i, int m) {
        static_assert(N == 3 || N == 2);
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        const double z = 1.0 - 2.0 * (i + 0.5) / m;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double az = 2.0 * kPi * i / golden;
        return Vec<3>(r * std::cos(az), r * std::sin(az), z);
    }

private:
    AnisotropyKind kind_ = AnisotropyKind::Euclidean;
    Mat<N> A_ = Mat<N>::Identity();
    Mat<N> B_ = Mat<N>::Identity();
    Mat<N> Ainv_ = Mat<N>::Identity();
    double sigma_min_ = 1.0, sigma_max_ = 1.0;
    double eps_ = 0.0;
    std::shared_ptr<PeriodicSpline> spline_;          // N == 2
    std::shared_ptr<detail::SphereTable> sphere_;     // N == 3
    double c_lower_ = 1.0, c_upper_ = 1.0;
    mutable std::optional<double> gamma_;
};

// ---------------------------------------------------------------------------
// Dual anisotropy  phi^o(x) = max { x.y : phi(y) = 1 }.

namespace detail {

// One evaluation of phi^o by maximizing x.d / phi(d) over unit directions d.
// Coarse scan followed by local ascent; falls back to a dense scan when the
// ascent stalls.
template <int N>
struct DualMax {
    double value;
    Vec<N> argmax;   // the maximizing y with phi(y) = 1
    bool converged;
};

template <int N>
DualMax<N> maximize_dual(const Anisotropy<N>& phi, const Vec<N>& x, int coarse, int fallback) {
    DualMax<N> out{0.0, Vec<N>::Zero(), true};
    const double r = x.norm();
    if (r == 0.0) return out;

    auto ratio = [&](const Vec<N>& d) { return x.dot(d) / phi.value(d); };

    if constexpr (N == 2) {
        double best = -std::numeric_limits<double>::infinity();
        double best_th = 0.0;
        for (int i = 0; i < coarse; ++i) {
            const double th = 2.0 * kPi * i / coarse;
            const double v = ratio(Vec<2>(std::cos(th), std::sin(th)));
            if (v > best) { best = v; best_th = th; }
        }
        // Golden-section ascent on the bracketing window.
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = best_th - 2.0 * kPi / coarse, b = best_th + 2.0 * kPi / coarse;
        auto f = [&](double th) { return ratio(Vec<2>(std::cos(th), std::sin(th))); };
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = f(c), fd = f(d);
        double prev = best;
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            if (fc > fd) { b = d; d = c; fd = fc; c = b - gr * (b - a); fc = f(c); }
            else         { a = c; c = d; fc = fd; d = a + gr * (b - a); fd = f(d); }
            const double cur = std::max(fc, fd);
            if (cur - prev < 1e-10 * std::max(1.0, std::abs(cur)) && it > 8) {
                converged = true;
                prev = std::max(prev, cur);
                break;
            }
            prev = std::max(prev, cur);
        }
        double th = (fc > fd) ? c : d;
        if (!converged) {
            out.converged = false;
            for (int i = 0; i < fallback; ++i) {
                const double t = 2.0 * kPi * i / fallback;
                const double v = f(t);
                if (v > prev) { prev = v; th = t; }
            }
        }
        Vec<2> dbest(std::cos(th), std::sin(th));
        out.value = std::max(prev, ratio(dbest));
        out.argmax = dbest / phi.value(dbest);
        return out;
    } else {
        Vec<3> best_d = Vec<3>::UnitX();
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < coarse; ++i) {
            const Vec<3> d = Anisotropy<3>::fibonacci_dir(i, coarse);
            const double v = ratio(d);
            if (v > best) { best = v; best_d = d; }
        }
        // Projected gradient ascent on the sphere with backtracking.
        double step = 2.0 * kPi / std::sqrt(static_cast<double>(coarse));
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            const double pv = phi.value(best_d);
            const Vec<3> g = x / pv - x.dot(best_d) / (pv * pv) * phi.gradient(best_d);
            const Vec<3> gt = g - g.dot(best_d) * best_d;
            if (gt.norm() * step < 1e-14) { converged = true; break; }
            Vec<3> cand = (best_d + step * gt).normalized();
            const double v = ratio(cand);
            if (v > best + 1e-16) {
                if (v - best < 1e-10 * std::max(1.0, std::abs(v)) && it > 8) {
                    best = v; best_d = cand; converged = true; break;
                }
                best = v; best_d = cand;
            } else {
                step *= 0.5;
                if (step < 1e-12) { converged = true; break; }
            }
        }
        if (!converged) {
            out.converged = false;
            for (int i = 0; i < fallback; ++i) {
                const Vec<3> d = Anisotropy<3>::fibonacci_dir(i, fallback);
                const double v = ratio(d);
                if (v > best) { best = v; best_d = d; }
            }
        }
        out.value = best;
        out.argmax = best_d / phi.value(best_d);
        return out;
    }
}

}  // namespace detail

// Evaluator surface for phi^o. Closed forms are used where available
// (Euclidean is self-dual, |Ax| dualizes to |A^{-1}x|); otherwise the dual is
// fitted once as a Tabulated anisotropy from refined maximizer samples.
template <int N>
class DualAnisotropy {
public:
    explicit DualAnisotropy(const Anisotropy<N>& base)
        : base_(base), rep_(build_representation(base)) {}

    const Anisotropy<N>& base() const { return base_; }
    const Anisotropy<N>& rep() const { return rep_; }
    bool closed_form() const { return base_.has_closed_form_dual(); }

    double value(const Vec<N>& x) const { return rep_.value(x); }
    double operator()(const Vec<N>& x) const { return rep_.value(x); }
    Vec<N> gradient(const Vec<N>& x) const { return rep_.gradient(x); }
    Mat<N> hessian(const Vec<N>& x) const { return rep_.hessian(x); }

    // Direct evaluation by maximization (used to cross-validate the fit).
    detail::DualMax<N> value_by_maximization(const Vec<N>& x) const {
        return detail::maximize_dual(base_, x, coarse_resolution(), fallback_resolution());
    }

    static constexpr int coarse_resolution() { return N == 2 ? 1024 : 4096; }
    static constexpr int fallback_resolution() { return N == 2 ? 8192 : 160000; }

private:
    static Anisotropy<N> build_representation(const Anisotropy<N>& base) {
        if (base.kind() == AnisotropyKind::Euclidean) return Anisotropy<N>::euclidean();
        if (base.kind() == AnisotropyKind::LinearMap)
            return Anisotropy<N>::linear_map(base.linear_matrix_inverse());
        if constexpr (N == 2) {
            const int m = 2048;
            std::vector<double> knots(m);
            for (int i = 0; i < m; ++i) {
                const double th = kPi * i / m;
                const Vec<2> x(std::cos(th), std::sin(th));
                knots[i] = std::log(
                    detail::maximize_dual(base, x, coarse_resolution(), fallback_resolution())
                        .value);
            }
            return Anisotropy<2>::from_log_spline(PeriodicSpline(std::move(knots), kPi));
        } else {
            const int n_az = 128, n_pol = 65;
            std::vector<double> vals(static_cast<size_t>(n_az) * n_pol);
            for (int ip = 0; ip < n_pol; ++ip)
                for (int ia = 0; ia < n_az; ++ia) {
                    const double pol = kPi * ip / (n_pol - 1);
                    const double az = 2.0 * kPi * ia / n_az;
                    const Vec<3> u(std::sin(pol) * std::cos(az), std::sin(pol) * std::sin(az),
                                   std::cos(pol));
                    vals[static_cast<size_t>(ip) * n_az + ia] =
                        detail::maximize_dual(base, u, coarse_resolution(),
                                              fallback_resolution())
                            .value;
                }
            return Anisotropy<3>::tabulated_sphere(n_az, n_pol, vals);
        }
    }

    Anisotropy<N> base_;
    Anisotropy<N> rep_;
};

template <int N>
DualAnisotropy<N> dual(const Anisotropy<N>& phi) {
    return DualAnisotropy<N>(phi);
}

// ---------------------------------------------------------------------------

template <int N>
std::pair<double, double> norm_bounds(const Anisotropy<N>& phi) {
    return phi.norm_bounds();
}

struct EllipticityReport {
    bool elliptic = false;
    double gamma = 0.0;        // min of Hess(phi)(x) y . y over unit x, unit y _|_ x
    bool ball_condition_ok = false;
    bool agreement = false;    // Hessian criterion vs inner/outer ball criterion
    double inner_radius = 0.0;
    double outer_radius = 0.0;
};

// Ellipticity certificate: samples the tangential Hessian of phi on the unit
// sphere and cross-checks against the inner/outer rolling-ball condition of
// the Wulff boundary.
template <int N>
EllipticityReport certify_ellipticity(const Anisotropy<N>& phi, int sphere_resolution,
                                      double tolerance = 1e-8) {
    if (sphere_resolution < 16)
        throw ResolutionError("certify_ellipticity: sphere_resolution must be >= 16");
    EllipticityReport rep;
    double gmin = std::numeric_limits<double>::infinity();
    if constexpr (N == 2) {
        for (int i = 0; i < sphere_resolution; ++i) {
            const double th = kPi * i / sphere_resolution;
            const Vec<2> x(std::cos(th), std::sin(th));
            const Vec<2> y(-x[1], x[0]);
            gmin = std::min(gmin, (phi.hessian(x) * y).dot(y));
        }
    } else {
        const int mt = 8;
        for (int i = 0; i < sphere_resolution; ++i) {
            const Vec<3> x = Anisotropy<3>::fibonacci_dir(i, sphere_resolution);
            Vec<3> t1 = x.cross(std::abs(x[0]) < 0.9 ? Vec<3>::UnitX() : Vec<3>::UnitY());
            t1.normalize();
            const Vec<3> t2 = x.cross(t1);
            const Mat<3> H = phi.hessian(x);
            for (int j = 0; j < mt; ++j) {
                const double a = kPi * j / mt;
                const Vec<3> y = std::cos(a) * t1 + std::sin(a) * t2;
                gmin = std::min(gmin, (H * y).dot(y));
            }
        }
    }
    rep.gamma = gmin;
    rep.elliptic = gmin > tolerance;
    phi.set_ellipticity_gamma(gmin);

    // Inner/outer ball condition on the rasterized Wulff boundary.
    if constexpr (N == 2) {
        const int m = std::max(512, sphere_resolution);
        std::vector<Vec<2>> pts(m);
        for (int i = 0; i < m; ++i) {
            const double th = 2.0 * kPi * i / m;
            const Vec<2> d(std::cos(th), std::sin(th));
            pts[i] = d / detail::maximize_dual(phi, d, 512, 4096).value;
        }
        double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0;
        for (int i = 0; i < m; ++i) {
            const Vec<2>&a = pts[(i + m - 1) % m], &b = pts[i], &c = pts[(i + 1) % m];
            const Vec<2> u = b - a, v = c - b, w = c - a;
            const double cross = u[0] * v[1] - u[1] * v[0];
            const double kappa = 2.0 * cross / (u.norm() * v.norm() * w.norm());
            kmin = std::min(kmin, kappa);
            kmax = std::max(kmax, kappa);
        }
        rep.inner_radius = kmax > 0 ? 1.0 / kmax : 0.0;
        rep.outer_radius = kmin > 0 ? 1.0 / kmin : std::numeric_limits<double>::infinity();
        rep.ball_condition_ok = kmin > tolerance && std::isfinite(rep.outer_radius);
    } else {
        // Dual tangential Hessian bounds stand in for the rolling-ball radii.
        DualAnisotropy<3> dl(phi);
        double hmin = std::numeric_limits<double>::infinity(), hmax = 0.0;
        for (int i = 0; i < 256; ++i) {
            const Vec<3> x = Anisotropy<3>::fibonacci_dir(i, 256);
            Vec<3> t1 = x.cross(std::abs(x[0]) < 0.9 ? Vec<3>::UnitX() : Vec<3>::UnitY());
            t1.normalize();
            const Vec<3> t2 = x.cross(t1);
            const Mat<3> H = dl.hessian(x);
            for (int j = 0; j < 4; ++j) {
                const double a = kPi * j / 4;
                const Vec<3> y = std::cos(a) * t1 + std::sin(a) * t2;
                const double q = (H * y).dot(y);
                hmin = std::min(hmin, q);
                hmax = std::max(hmax, q);
            }
        }
        rep.inner_radius = hmin;
        rep.outer_radius = hmax;
        rep.ball_condition_ok = hmin > tolerance && std::isfinite(hmax);
    }
    rep.agreement = (rep.ball_condition_ok == rep.elliptic);
    return rep;
}

}  // namespace dropflow
