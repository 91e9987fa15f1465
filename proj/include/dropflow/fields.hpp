#pragma once

// Relative adhesion coefficient beta on the floor and the forcing term f(t,x),
// plus the report-only validator for the existence hypotheses on f.

#include "dropflow/anisotropy.hpp"
#include "dropflow/grid.hpp"

#include <functional>
#include <map>
#include <memory>

namespace dropflow {

// beta at floor-cell centers. Admissibility: there must be eta in (0, 1/2)
// with ||beta||_inf <= (1 - 2 eta) phi(e_n); equivalently ||beta||_inf <
// phi(e_n). Construction fails otherwise.
template <int N>
class ContactAngleField {
public:
    ContactAngleField() = default;

    static ContactAngleField constant(const GridDomain<N>& grid, double beta, double phi_en) {
        return from_function(grid, [beta](const Vec<N>&) { return beta; }, phi_en);
    }

    static ContactAngleField from_function(const GridDomain<N>& grid,
                                           const std::function<double(const Vec<N>&)>& fn,
                                           double phi_en) {
        ContactAngleField b;
        b.grid_ = grid;
        std::int64_t floor_cells = 1;
        for (int i = 0; i + 1 < N; ++i) floor_cells *= grid.counts[i];
        b.values_.resize(floor_cells);
        b.sup_abs_ = 0.0;
        b.inf_ = std::numeric_limits<double>::infinity();
        for (std::int64_t f = 0; f < floor_cells; ++f) {
            std::array<int, N> idx{};
            std::int64_t rem = f;
            for (int i = 0; i + 1 < N; ++i) {
                idx[i] = static_cast<int>(rem % grid.counts[i]);
                rem /= grid.counts[i];
            }
            idx[N - 1] = 0;
            Vec<N> x = grid.cell_center(idx);
            x[N - 1] = 0.0;
            b.values_[f] = fn(x);
            b.sup_abs_ = std::max(b.sup_abs_, std::abs(b.values_[f]));
            b.inf_ = std::min(b.inf_, b.values_[f]);
        }
        b.phi_en_ = phi_en;
        if (b.sup_abs_ >= phi_en) {
            std::ostringstream os;
            os << "contact angle field violates the admissibility bound "
               << "||beta||_inf <= (1 - 2 eta) phi(e_n): ||beta||_inf = " << b.sup_abs_
               << " >= phi(e_n) = " << phi_en;
            throw AdmissibilityError(os.str());
        }
        b.eta_ = 0.5 * (1.0 - b.sup_abs_ / phi_en);
        return b;
    }

    const GridDomain<N>& grid() const { return grid_; }

    // beta at the floor cell below column index (first N-1 coordinates).
    double at_floor(const std::array<int, N>& idx) const {
        std::int64_t f = 0;
        for (int i = N - 2; i >= 0; --i) f = f * grid_.counts[i] + idx[i];
        return values_[f];
    }

    double sup_abs() const { return sup_abs_; }
    double inf() const { return inf_; }
    double sup() const {
        double s = -std::numeric_limits<double>::infinity();
        for (double v : values_) s = std::max(s, v);
        return s;
    }
    double eta() const { return eta_; }
    double phi_en() const { return phi_en_; }

    bool dominates(const ContactAngleField& other) const {
        if (values_.size() != other.values_.size()) return false;
        for (size_t i = 0; i < values_.size(); ++i)
            if (values_[i] < other.values_[i] - 1e-15) return false;
        return true;
    }

private:
    GridDomain<N> grid_;
    std::vector<double> values_;
    double sup_abs_ = 0.0;
    double inf_ = 0.0;
    double eta_ = 0.5;
    double phi_en_ = 1.0;
};

// ---------------------------------------------------------------------------

enum class ForcingKind { Zero, Constant, Separable, Tabulated };

// f(t, x). The separable family is a(t) h(x) with polynomial a and a bounded
// spatial profile; the tabulated family is piecewise linear in time and
// cellwise constant in space.
template <int N>
class ForcingField {
public:
    struct SpatialProfile {
        // h(x) = offset + amp * exp(-|x - center|^2 / (2 sigma^2))
        double offset = 1.0;
        double amp = 0.0;
        Vec<N> center = Vec<N>::Zero();
        double sigma = 1.0;

        double operator()(const Vec<N>& x) const {
            if (amp == 0.0) return offset;
            const double q = (x - center).squaredNorm() / (2.0 * sigma * sigma);
            return offset + amp * std::exp(-q);
        }
    };

    static ForcingField zero() { return ForcingField(); }

    static ForcingField constant(double c) {
        ForcingField f;
        f.kind_ = c == 0.0 ? ForcingKind::Zero : ForcingKind::Constant;
        f.const_ = c;
        return f;
    }

    // a(t) = sum_j a_poly[j] t^j
    static ForcingField separable(std::vector<double> a_poly, SpatialProfile h) {
        ForcingField f;
        f.kind_ = ForcingKind::Separable;
        f.a_poly_ = std::move(a_poly);
        f.profile_ = h;
        return f;
    }

    static ForcingField tabulated(const GridDomain<N>& grid, std::vector<double> times,
                                  std::vector<std::vector<double>> slices) {
        if (times.size() < 2 || times.size() != slices.size())
            throw ConfigError("tabulated forcing needs >= 2 time slices");
        for (auto& s : slices)
            if (static_cast<std::int64_t>(s.size()) != grid.cell_count())
                throw ConfigError("tabulated forcing slice does not match the grid");
        ForcingField f;
        f.kind_ = ForcingKind::Tabulated;
        f.grid_ = grid;
        f.times_ = std::move(times);
        f.slices_ = std::move(slices);
        return f;
    }

    ForcingKind kind() const { return kind_; }
    bool is_zero() const { return kind_ == ForcingKind::Zero; }

    double operator()(double t, const Vec<N>& x) const { return value(t, x); }

    double value(double t, const Vec<N>& x) const {
        switch (kind_) {
            case ForcingKind::Zero: return 0.0;
            case ForcingKind::Constant: return const_;
            case ForcingKind::Separable: {
                double a = 0.0, p = 1.0;
                for (double c : a_poly_) { a += c * p; p *= t; }
                return a * profile_(x);
            }
            case ForcingKind::Tabulated: {
                size_t j = 0;
                while (j + 2 < times_.size() && times_[j + 1] <= t) ++j;
                const double t0 = times_[j], t1 = times_[j + 1];
                const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
                std::array<int, N> idx{};
                for (int i = 0; i < N; ++i) {
                    idx[i] = static_cast<int>(std::floor((x[i] - grid_.lower[i]) / grid_.h));
                    idx[i] = std::clamp(idx[i], 0, grid_.counts[i] - 1);
                }
                const std::int64_t f = grid_.flatten(idx);
                return (1.0 - w) * slices_[j][f] + w * slices_[j + 1][f];
            }
        }
        return 0.0;
    }

    // (1/tau) \int_{k tau}^{(k+1) tau} f(s, x) ds by 3-point Gauss-Legendre;
    // exact for the constant and separable-polynomial families.
    double step_average(int k, double tau, const Vec<N>& x) const {
        if (kind_ == ForcingKind::Zero) return 0.0;
        if (kind_ == ForcingKind::Constant) return const_;
        static const double gl_x[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
        static const double gl_w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        const double a = k * tau, b = (k + 1) * tau;
        double s = 0.0;
        for (int q = 0; q < 3; ++q) {
            const double t = 0.5 * (a + b) + 0.5 * (b - a) * gl_x[q];
            s += gl_w[q] * value(t, x);
        }
        return 0.5 * s;
    }

    // Per-step cell averages with a one-slot cache keyed on (k, tau).
    std::shared_ptr<const std::vector<double>> step_cell_averages(int k, double tau,
                                                                  const GridDomain<N>& grid) const {
        if (cache_ && cache_k_ == k && cache_tau_ == tau && cache_grid_ == grid) return cache_;
        auto vals = std::make_shared<std::vector<double>>(grid.cell_count());
        if (!is_zero())
            for (std::int64_t f = 0; f < grid.cell_count(); ++f)
                (*vals)[f] = step_average(k, tau, grid.cell_center(grid.unflatten(f)));
        cache_ = vals;
        cache_k_ = k;
        cache_tau_ = tau;
        cache_grid_ = grid;
        return vals;
    }

    std::vector<double> step_cell_averages_fresh(int k, double tau,
                                                 const GridDomain<N>& grid) const {
        std::vector<double> vals(grid.cell_count(), 0.0);
        if (!is_zero())
            for (std::int64_t f = 0; f < grid.cell_count(); ++f)
                vals[f] = step_average(k, tau, grid.cell_center(grid.unflatten(f)));
        return vals;
    }

private:
    ForcingKind kind_ = ForcingKind::Zero;
    double const_ = 0.0;
    std::vector<double> a_poly_;
    SpatialProfile profile_;
    GridDomain<N> grid_;
    std::vector<double> times_;
    std::vector<std::vector<double>> slices_;

    mutable std::shared_ptr<const std::vector<double>> cache_;
    mutable int cache_k_ = -1;
    mutable double cache_tau_ = -1.0;
    mutable GridDomain<N> cache_grid_;
};

// ---------------------------------------------------------------------------
// Report-only validation of the hypotheses on the forcing term.

struct ForcingReport {
    bool h1_ok = true;          // local integrability (evaluability on the box)
    double gamma_T = 0.0;       // radius for the concentration bound; +inf if unconstrained
    bool h2_ok = true;
    double h3_limsup = 0.0;
    bool h3_ok = true;
    double c_T_sup = 0.0;       // sup-norm over [0,T] x box
    bool h4_sup_ok = true;
    double c_T_lipschitz = 0.0; // L^1-in-time Lipschitz estimate
    bool h4_lip_ok = true;
    double h5_a = 0.0, h5_b = 0.0;
    bool h5_ok = true;
    bool all_ok = true;
};

template <int N>
ForcingReport validate_forcing(const ForcingField<N>& f, double T, const Anisotropy<N>& phi,
                               double eta, const GridDomain<N>& grid, int time_samples = 33) {
    ForcingReport rep;
    const double c_phi = phi.c_lower();
    const int n = N;

    double sup = 0.0;
    double lip = 0.0;
    const double dt_probe = T / (time_samples - 1);
    std::vector<double> prev;
    for (int ti = 0; ti < time_samples; ++ti) {
        const double t = T * ti / (time_samples - 1);
        double l1_diff = 0.0;
        std::vector<double> cur(grid.cell_count());
        for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
            const double v = f.value(t, grid.cell_center(grid.unflatten(c)));
            cur[c] = v;
            sup = std::max(sup, std::abs(v));
            if (!prev.empty()) l1_diff += std::abs(v - prev[c]) * grid.cell_volume();
        }
        if (!prev.empty()) lip = std::max(lip, l1_diff / dt_probe);
        prev = std::move(cur);
    }
    rep.c_T_sup = sup;
    rep.h4_sup_ok = std::isfinite(sup);
    rep.c_T_lipschitz = lip;
    rep.h4_lip_ok = std::isfinite(lip);

    // (H2) via the L^inf bound: int_A |f| <= ||f||_inf |A|^{1/n} |A|^{(n-1)/n}.
    const double target = c_phi * eta * n * std::pow(unit_ball_volume(n), 1.0 / n) / 4.0;
    if (sup == 0.0) {
        rep.gamma_T = std::numeric_limits<double>::infinity();
    } else {
        rep.gamma_T = c_phi * eta * n / (4.0 * sup);
    }
    rep.h2_ok = rep.gamma_T > 0.0;
    (void)target;

    // (H3): (1/tau) int_0^tau int |f| for a shrinking run of tau.
    double h3 = 0.0;
    for (double tau : {1e-2, 1e-3, 1e-4}) {
        double acc = 0.0;
        for (int q = 0; q < 4; ++q) {
            const double t = tau * (q + 0.5) / 4.0;
            for (std::int64_t c = 0; c < grid.cell_count(); ++c)
                acc += std::abs(f.value(t, grid.cell_center(grid.unflatten(c)))) *
                       grid.cell_volume() / 4.0;
        }
        h3 = std::max(h3, acc);
    }
    rep.h3_limsup = h3;
    rep.h3_ok = std::isfinite(h3);

    // (H5): linear growth bound on the negative part; trivially a_T = sup f^-,
    // b_T = 0 for the bounded families handled here.
    double supneg = 0.0;
    for (int ti = 0; ti < time_samples; ++ti) {
        const double t = T * ti / (time_samples - 1);
        for (std::int64_t c = 0; c < grid.cell_count(); c += std::max<std::int64_t>(1, grid.cell_count() / 512)) {
            const double v = f.value(t, grid.cell_center(grid.unflatten(c)));
            supneg = std::max(supneg, std::max(0.0, -v));
        }
    }
    rep.h5_a = supneg;
    rep.h5_b = 0.0;
    rep.h5_ok = std::isfinite(supneg);

    rep.all_ok = rep.h1_ok && rep.h2_ok && rep.h3_ok && (rep.h4_sup_ok || rep.h4_lip_ok) && rep.h5_ok;
    return rep;
}

}  // namespace dropflow
