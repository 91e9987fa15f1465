#pragma once

// Wulff and Winterbottom shapes, their isoperimetric constants, and
// rasterization onto grids.
//
// W_R(x) = x + R {phi^o <= 1};  the Winterbottom shape is the upper-half-space
// part of a Wulff shape whose center sits at height beta0 R (or, tilted, at
// (beta0 R / phi(e_n)) grad phi(e_n), which has the same height).

#include "dropflow/anisotropy.hpp"
#include "dropflow/grid.hpp"

#include <memory>

namespace dropflow {

template <int N>
class WulffShape {
public:
    WulffShape(const Anisotropy<N>& phi, const Vec<N>& center, double radius)
        : phi_(phi),
          dual_(std::make_shared<DualAnisotropy<N>>(phi)),
          center_(center),
          radius_(radius) {
        if (!(radius > 0)) throw ConfigError("Wulff shape needs radius > 0");
    }

    WulffShape(std::shared_ptr<DualAnisotropy<N>> dual, const Vec<N>& center, double radius)
        : phi_(dual->base()), dual_(std::move(dual)), center_(center), radius_(radius) {}

    const Anisotropy<N>& phi() const { return phi_; }
    const DualAnisotropy<N>& dual() const { return *dual_; }
    const Vec<N>& center() const { return center_; }
    double radius() const { return radius_; }

    double gauge(const Vec<N>& x) const { return dual_->value(x - center_); }
    bool contains(const Vec<N>& x) const { return gauge(x) <= radius_; }

private:
    Anisotropy<N> phi_;
    std::shared_ptr<DualAnisotropy<N>> dual_;
    Vec<N> center_;
    double radius_;
};

template <int N>
class WinterbottomShape {
public:
    WinterbottomShape(const Anisotropy<N>& phi, double beta0, double radius,
                      const Vec<N>& horizontal_center = Vec<N>::Zero(), bool tilted = false)
        : WinterbottomShape(std::make_shared<DualAnisotropy<N>>(phi), beta0, radius,
                            horizontal_center, tilted) {}

    WinterbottomShape(std::shared_ptr<DualAnisotropy<N>> dual, double beta0, double radius,
                      const Vec<N>& horizontal_center = Vec<N>::Zero(), bool tilted = false)
        : phi_(dual->base()), dual_(std::move(dual)), beta0_(beta0), radius_(radius),
          base_(horizontal_center), tilted_(tilted) {
        Vec<N> en = Vec<N>::Zero();
        en[N - 1] = 1.0;
        const double phi_en = phi_.value(en);
        if (!(std::abs(beta0) < phi_en))
            throw AdmissibilityError("Winterbottom shape needs |beta0| < phi(e_n)");
        if (!(radius > 0)) throw ConfigError("Winterbottom shape needs radius > 0");
        base_[N - 1] = 0.0;
        if (tilted_) {
            drift_ = beta0_ / phi_en * phi_.gradient(en);  // eta = grad phi(e_n), smooth phi
        } else {
            drift_ = beta0_ * en;
        }
    }

    const Anisotropy<N>& phi() const { return phi_; }
    const DualAnisotropy<N>& dual() const { return *dual_; }
    double beta0() const { return beta0_; }
    double radius() const { return radius_; }
    bool tilted() const { return tilted_; }

    Vec<N> center() const { return base_ + radius_ * drift_; }
    Vec<N> center_at(double r) const { return base_ + r * drift_; }

    bool contains(const Vec<N>& x) const {
        if (x[N - 1] < 0.0) return false;
        return dual_->value(x - center()) <= radius_;
    }

    // Smallest r with x in closure(W_{beta0, r}) over the shared center line;
    // the gauge r -> phi^o(x - center(r)) - r is strictly decreasing because
    // phi^o(drift) = |beta0| / phi(e_n) < 1.
    double containing_radius(const Vec<N>& x) const {
        if (x[N - 1] < 0.0) throw SetupError("containing_radius: point below the floor");
        double lo = 0.0, hi = std::max(1.0, 4.0 * dual_->value(x - base_));
        auto g = [&](double r) { return dual_->value(x - center_at(r)) - r; };
        while (g(hi) > 0) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (g(mid) > 0) lo = mid;
            else hi = mid;
            if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
        }
        return hi;
    }

private:
    Anisotropy<N> phi_;
    std::shared_ptr<DualAnisotropy<N>> dual_;
    double beta0_;
    double radius_;
    Vec<N> base_;
    bool tilted_;
    Vec<N> drift_ = Vec<N>::Zero();
};

// ---------------------------------------------------------------------------
// Boundary quadrature of the Wulff shape.

namespace detail {

// CCW polygon of the unit Wulff boundary {phi^o = 1} in 2-D.
inline std::vector<Vec<2>> wulff_polygon(const DualAnisotropy<2>& dual, int vertices) {
    std::vector<Vec<2>> pts(vertices);
    for (int i = 0; i < vertices; ++i) {
        const double th = 2.0 * kPi * i / vertices;
        const Vec<2> d(std::cos(th), std::sin(th));
        pts[i] = d / dual.value(d);
    }
    return pts;
}

struct Tri3 {
    Vec<3> a, b, c;
};

// Icosphere triangulation of {phi^o = 1}, outward-oriented.
inline std::vector<Tri3> wulff_triangulation(const DualAnisotropy<3>& dual, int subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec<3>> v = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<std::array<int, 3>> f = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    std::vector<Tri3> tris;
    for (auto& face : f) tris.push_back({v[face[0]], v[face[1]], v[face[2]]});
    for (int s = 0; s < subdivisions; ++s) {
        std::vector<Tri3> next;
        next.reserve(tris.size() * 4);
        for (auto& tr : tris) {
            Vec<3> ab = (tr.a + tr.b).normalized();
            Vec<3> bc = (tr.b + tr.c).normalized();
            Vec<3> ca = (tr.c + tr.a).normalized();
            next.push_back({tr.a, ab, ca});
            next.push_back({ab, tr.b, bc});
            next.push_back({ca, bc, tr.c});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }
    for (auto& tr : tris) {
        tr.a /= dual.value(tr.a);
        tr.b /= dual.value(tr.b);
        tr.c /= dual.value(tr.c);
        if (tr.a.dot((tr.b - tr.a).cross(tr.c - tr.a)) < 0) std::swap(tr.b, tr.c);
    }
    return tris;
}

// Clip a CCW polygon against the half-plane y >= 0.
inline std::vector<Vec<2>> clip_upper(const std::vector<Vec<2>>& poly) {
    std::vector<Vec<2>> out;
    const int m = static_cast<int>(poly.size());
    for (int i = 0; i < m; ++i) {
        const Vec<2>& p = poly[i];
        const Vec<2>& q = poly[(i + 1) % m];
        const bool pin = p[1] >= 0.0, qin = q[1] >= 0.0;
        if (pin) out.push_back(p);
        if (pin != qin) {
            const double w = p[1] / (p[1] - q[1]);
            out.push_back(p + w * (q - p));
        }
    }
    return out;
}

// Clip an oriented triangle against z >= 0; returns a polygon (<= 4 vertices).
inline std::vector<Vec<3>> clip_tri_upper(const Tri3& t) {
    std::vector<Vec<3>> out;
    const Vec<3>* pts[3] = {&t.a, &t.b, &t.c};
    for (int i = 0; i < 3; ++i) {
        const Vec<3>& p = *pts[i];
        const Vec<3>& q = *pts[(i + 1) % 3];
        const bool pin = p[2] >= 0.0, qin = q[2] >= 0.0;
        if (pin) out.push_back(p);
        if (pin != qin) {
            const double w = p[2] / (p[2] - q[2]);
            out.push_back(p + w * (q - p));
        }
    }
    return out;
}

}  // namespace detail

// c_{phi,n} = P_phi(W) / |W|^{(n-1)/n}, by polygonal/triangulated boundary
// quadrature of the unit Wulff shape.
template <int N>
double isoperimetric_constant(const Anisotropy<N>& phi, int resolution,
                              const DualAnisotropy<N>* dual_in = nullptr) {
    std::shared_ptr<DualAnisotropy<N>> owned;
    const DualAnisotropy<N>* dl = dual_in;
    if (!dl) {
        owned = std::make_shared<DualAnisotropy<N>>(phi);
        dl = owned.get();
    }
    if constexpr (N == 2) {
        auto poly = detail::wulff_polygon(*dl, std::max(resolution, 64));
        double per = 0.0, area2 = 0.0;
        const int m = static_cast<int>(poly.size());
        for (int i = 0; i < m; ++i) {
            const Vec<2> e = poly[(i + 1) % m] - poly[i];
            per += phi.value(Vec<2>(e[1], -e[0]));  // outward normal, length absorbed
            area2 += poly[i][0] * poly[(i + 1) % m][1] - poly[(i + 1) % m][0] * poly[i][1];
        }
        const double area = 0.5 * area2;
        return per / std::sqrt(area);
    } else {
        int sub = 3;
        while (20 * (1 << (2 * sub)) < resolution && sub < 7) ++sub;
        auto tris = detail::wulff_triangulation(*dl, sub);
        double per = 0.0, vol = 0.0;
        for (auto& t : tris) {
            const Vec<3> av = 0.5 * (t.b - t.a).cross(t.c - t.a);
            per += phi.value(av);
            vol += t.a.dot((t.b - t.a).cross(t.c - t.a)) / 6.0;
        }
        return per / std::pow(vol, 2.0 / 3.0);
    }
}

// c_{phi,beta0,n} = C_{beta0}(W_{beta0,R}) / |W_{beta0,R}|^{(n-1)/n};
// independent of R and of horizontal translations.
template <int N>
double winterbottom_constant(const Anisotropy<N>& phi, double beta0, int resolution,
                             const DualAnisotropy<N>* dual_in = nullptr, double radius = 1.0) {
    Vec<N> en = Vec<N>::Zero();
    en[N - 1] = 1.0;
    if (!(std::abs(beta0) < phi.value(en)))
        throw AdmissibilityError("winterbottom_constant needs |beta0| < phi(e_n)");
    std::shared_ptr<DualAnisotropy<N>> owned;
    const DualAnisotropy<N>* dl = dual_in;
    if (!dl) {
        owned = std::make_shared<DualAnisotropy<N>>(phi);
        dl = owned.get();
    }
    if constexpr (N == 2) {
        auto poly = detail::wulff_polygon(*dl, std::max(resolution, 64));
        for (auto& p : poly) p = radius * p + Vec<2>(0.0, beta0 * radius);
        auto clipped = detail::clip_upper(poly);
        if (clipped.size() < 3) throw SetupError("Winterbottom shape degenerated in clipping");
        double free_per = 0.0, contact = 0.0, area2 = 0.0;
        const int m = static_cast<int>(clipped.size());
        for (int i = 0; i < m; ++i) {
            const Vec<2>&p = clipped[i], &q = clipped[(i + 1) % m];
            const Vec<2> e = q - p;
            if (std::abs(p[1]) < 1e-12 * radius && std::abs(q[1]) < 1e-12 * radius)
                contact += e.norm();
            else
                free_per += phi.value(Vec<2>(e[1], -e[0]));
            area2 += p[0] * q[1] - q[0] * p[1];
        }
        const double area = 0.5 * area2;
        return (free_per + beta0 * contact) / std::sqrt(area);
    } else {
        int sub = 3;
        while (20 * (1 << (2 * sub)) < resolution && sub < 7) ++sub;
        auto tris = detail::wulff_triangulation(*dl, sub);
        double free_per = 0.0, vol = 0.0, contact = 0.0;
        for (auto& t : tris) {
            detail::Tri3 ts{radius * t.a + beta0 * radius * Vec<3>::UnitZ(),
                            radius * t.b + beta0 * radius * Vec<3>::UnitZ(),
                            radius * t.c + beta0 * radius * Vec<3>::UnitZ()};
            auto poly = detail::clip_tri_upper(ts);
            if (poly.size() < 3) continue;
            for (size_t j = 1; j + 1 < poly.size(); ++j) {
                const Vec<3> av = 0.5 * (poly[j] - poly[0]).cross(poly[j + 1] - poly[0]);
                free_per += phi.value(av);
                contact += av[2];
                const double zbar = (poly[0][2] + poly[j][2] + poly[j + 1][2]) / 3.0;
                vol += zbar * av[2];
            }
        }
        return (free_per + beta0 * contact) / std::pow(vol, 2.0 / 3.0);
    }
}

// ---------------------------------------------------------------------------

template <int N>
struct RasterizeResult {
    BinarySet<N> set;
    bool empty_warning = false;
};

template <int N, class Shape>
RasterizeResult<N> rasterize(const Shape& shape, const GridDomain<N>& grid) {
    RasterizeResult<N> out{BinarySet<N>(grid), false};
    for (std::int64_t c = 0; c < grid.cell_count(); ++c)
        if (shape.contains(grid.cell_center(grid.unflatten(c)))) out.set.set(c, true);
    out.empty_warning = out.set.empty();
    return out;
}

}  // namespace dropflow
