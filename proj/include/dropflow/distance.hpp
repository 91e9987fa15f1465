#pragma once

// Distance transforms to the free boundary of a droplet.
//
// The free boundary is the union of interface facets between occupied and
// empty cells (vacuum beyond the lateral/top faces included); floor facets
// are never distance sources. Distances are measured to the facet surfaces,
// whose centers and corners sit at half-integer grid positions: on a
// 2x-refined point grid every facet is covered exactly by its sample points
// for cell-center queries, so the Euclidean transform below is exact. This
// makes the ordering   E subset of F  =>  sd_E >= sd_F   hold exactly, which
// the discrete comparison principle relies on.

#include "dropflow/anisotropy.hpp"
#include "dropflow/grid.hpp"
#include "dropflow/stencil.hpp"

#include <numeric>
#include <queue>

namespace dropflow {

template <int N>
struct ScalarField {
    GridDomain<N> grid;
    std::vector<double> values;

    double operator[](std::int64_t flat) const { return values[flat]; }
    double at(const std::array<int, N>& idx) const { return values[grid.flatten(idx)]; }

    // Multilinear interpolation between cell centers, clamped at the box.
    double sample(const Vec<N>& x) const {
        std::array<int, N> base{};
        std::array<double, N> w{};
        for (int i = 0; i < N; ++i) {
            const double q = (x[i] - grid.lower[i]) / grid.h - 0.5;
            double fl = std::floor(q);
            base[i] = static_cast<int>(fl);
            w[i] = q - fl;
            if (base[i] < 0) { base[i] = 0; w[i] = 0.0; }
            if (base[i] >= grid.counts[i] - 1) { base[i] = grid.counts[i] - 2; w[i] = 1.0; }
        }
        double acc = 0.0;
        for (int corner = 0; corner < (1 << N); ++corner) {
            double weight = 1.0;
            std::array<int, N> idx = base;
            for (int i = 0; i < N; ++i) {
                if (corner & (1 << i)) {
                    idx[i] += 1;
                    weight *= w[i];
                } else {
                    weight *= 1.0 - w[i];
                }
            }
            acc += weight * values[grid.flatten(idx)];
        }
        return acc;
    }
};

enum class DistanceMetric { Euclidean, Anisotropic };

namespace detail {

// One axis of the Felzenszwalb-Huttenlocher exact squared-distance transform.
// Infinite entries contribute no parabola.
inline void edt_1d(const double* f, double* d, int n, int* v, double* z) {
    const double inf = std::numeric_limits<double>::infinity();
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == inf) continue;
        if (k < 0) {
            k = 0; v[0] = q; z[0] = -inf; z[1] = inf;
            continue;
        }
        double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            if (k < 0) break;
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        if (k < 0) {
            k = 0; v[0] = q; z[0] = -inf; z[1] = inf;
        } else {
            ++k; v[k] = q; z[k] = s; z[k + 1] = inf;
        }
    }
    if (k < 0) {
        for (int q = 0; q < n; ++q) d[q] = inf;
        return;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

// Enumerates free-boundary facets as (cell, axis, side): side +1 means the
// facet between idx and idx + e_axis.
template <int N, class Fn>
void for_each_free_facet(const BinarySet<N>& e, Fn&& fn) {
    const auto& g = e.grid();
    for (std::int64_t c = 0; c < g.cell_count(); ++c) {
        const bool in_c = e.contains(c);
        const auto idx = g.unflatten(c);
        for (int a = 0; a < N; ++a) {
            auto nb = idx;
            nb[a] += 1;
            if (g.in_bounds(nb)) {
                if (in_c != e.contains(nb)) fn(idx, a, +1);
            } else if (in_c) {
                fn(idx, a, +1);  // vacuum beyond the box
            }
            if (in_c) {
                auto pb = idx;
                pb[a] -= 1;
                if (pb[a] < 0) {
                    if (a != N - 1) fn(idx, a, -1);  // lateral vacuum; floor excluded
                } // in-box pb handled from the pb side
            }
        }
    }
}

}  // namespace detail

// Exact Euclidean distance from every cell center to the free-boundary facet
// set. signed_variant: negative inside E (sd convention of the continuum
// rewrite). Throws DegenerateSetError per the preconditions.
template <int N>
ScalarField<N> euclidean_distance_field(const BinarySet<N>& e, bool signed_variant) {
    const auto& g = e.grid();
    if (e.empty()) throw DegenerateSetError("distance transform of the empty set");
    if (signed_variant && e.full())
        throw DegenerateSetError("signed distance of the full box is degenerate");

    std::array<int, N> dd{};
    std::int64_t dsize = 1;
    for (int i = 0; i < N; ++i) {
        dd[i] = 2 * g.counts[i] + 1;
        dsize *= dd[i];
    }
    auto dflat = [&](const std::array<int, N>& p) {
        std::int64_t f = 0;
        for (int i = N - 1; i >= 0; --i) f = f * dd[i] + p[i];
        return f;
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> field(dsize, inf);

    bool any = false;
    detail::for_each_free_facet(e, [&](const std::array<int, N>& idx, int axis, int side) {
        any = true;
        // Facet plane position on the doubled grid.
        std::array<int, N> base{};
        for (int i = 0; i < N; ++i) base[i] = 2 * idx[i] + 1;
        base[axis] += side;
        // Mark the 3^{N-1} sample points covering the facet.
        if constexpr (N == 2) {
            const int t = 1 - axis;
            for (int o = -1; o <= 1; ++o) {
                auto p = base;
                p[t] += o;
                field[dflat(p)] = 0.0;
            }
        } else {
            int t1 = -1, t2 = -1;
            for (int i = 0; i < N; ++i)
                if (i != axis) (t1 < 0 ? t1 : t2) = i;
            for (int o1 = -1; o1 <= 1; ++o1)
                for (int o2 = -1; o2 <= 1; ++o2) {
                    auto p = base;
                    p[t1] += o1;
                    p[t2] += o2;
                    field[dflat(p)] = 0.0;
                }
        }
    });
    if (!any) throw DegenerateSetError("droplet has no free boundary");

    // Separable squared-distance passes.
    int maxdim = 0;
    for (int i = 0; i < N; ++i) maxdim = std::max(maxdim, dd[i]);
    std::vector<double> fbuf(maxdim), dbuf(maxdim), z(maxdim + 1);
    std::vector<int> v(maxdim);
    for (int axis = 0; axis < N; ++axis) {
        std::int64_t stride = 1;
        for (int i = 0; i < axis; ++i) stride *= dd[i];
        const std::int64_t lines = dsize / dd[axis];
        for (std::int64_t line = 0; line < lines; ++line) {
            std::array<int, N> ip{};
            std::int64_t rem = line;
            for (int i = 0; i < N; ++i) {
                if (i == axis) continue;
                ip[i] = static_cast<int>(rem % dd[i]);
                rem /= dd[i];
            }
            ip[axis] = 0;
            const std::int64_t base = dflat(ip);
            for (int q = 0; q < dd[axis]; ++q) fbuf[q] = field[base + q * stride];
            bool all_inf = true;
            for (int q = 0; q < dd[axis]; ++q)
                if (fbuf[q] != inf) { all_inf = false; break; }
            if (all_inf) continue;
            detail::edt_1d(fbuf.data(), dbuf.data(), dd[axis], v.data(), z.data());
            for (int q = 0; q < dd[axis]; ++q) field[base + q * stride] = dbuf[q];
        }
    }

    ScalarField<N> out{g, std::vector<double>(g.cell_count())};
    const double half_h = 0.5 * g.h;
    for (std::int64_t c = 0; c < g.cell_count(); ++c) {
        const auto idx = g.unflatten(c);
        std::array<int, N> p{};
        for (int i = 0; i < N; ++i) p[i] = 2 * idx[i] + 1;
        double dval = std::sqrt(field[dflat(p)]) * half_h;
        if (signed_variant && e.contains(c)) dval = -dval;
        out.values[c] = dval;
    }
    return out;
}

// Anisotropic variant: Dijkstra sweep over the cell graph with edge costs
// phi(offset), anchored at the boundary cell layer (the occupied cells that
// carry a free facet); accurate to the chordal-metric bias of the move set.
template <int N>
ScalarField<N> anisotropic_distance_field(const BinarySet<N>& e, const Anisotropy<N>& phi,
                                          bool signed_variant) {
    const auto& g = e.grid();
    if (e.empty()) throw DegenerateSetError("distance transform of the empty set");
    if (signed_variant && e.full())
        throw DegenerateSetError("signed distance of the full box is degenerate");

    // Chordal move set: coprime lattice vectors up to radius 6 (2-D) keep the
    // path-metric overshoot below the documented 2% for moderate anisotropies
    // (measured 1.2% for the 2:1 linear map).
    std::vector<std::pair<std::array<int, N>, double>> steps;
    auto add_move = [&](const std::array<int, N>& m) {
        Vec<N> d;
        for (int i = 0; i < N; ++i) d[i] = m[i] * g.h;
        steps.push_back({m, phi.value(d)});
    };
    if constexpr (N == 2) {
        for (int a = -6; a <= 6; ++a)
            for (int b = -6; b <= 6; ++b) {
                if (a == 0 && b == 0) continue;
                if (std::gcd(std::abs(a), std::abs(b)) != 1) continue;
                add_move({a, b});
            }
    } else {
        for (int a = -2; a <= 2; ++a)
            for (int b = -2; b <= 2; ++b)
                for (int c = -2; c <= 2; ++c) {
                    if (a == 0 && b == 0 && c == 0) continue;
                    if (std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c)) != 1) continue;
                    add_move({a, b, c});
                }
    }

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.cell_count(), inf);
    using QE = std::pair<double, std::int64_t>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> heap;

    // Sources: the occupied cells carrying a free facet (the discrete
    // representatives of the reduced boundary).
    bool any = false;
    detail::for_each_free_facet(e, [&](const std::array<int, N>& idx, int axis, int side) {
        any = true;
        auto cell = idx;
        if (!e.contains(idx)) cell[axis] += side;
        if (!g.in_bounds(cell) || !e.contains(cell)) return;
        const std::int64_t f = g.flatten(cell);
        if (dist[f] > 0.0) {
            dist[f] = 0.0;
            heap.push({0.0, f});
        }
    });
    if (!any) throw DegenerateSetError("droplet has no free boundary");

    while (!heap.empty()) {
        auto [dcur, c] = heap.top();
        heap.pop();
        if (dcur > dist[c]) continue;
        const auto idx = g.unflatten(c);
        for (const auto& [off, cost] : steps) {
            auto nb = idx;
            for (int i = 0; i < N; ++i) nb[i] += off[i];
            if (!g.in_bounds(nb)) continue;
            const std::int64_t f = g.flatten(nb);
            const double cand = dcur + cost;
            if (cand < dist[f]) {
                dist[f] = cand;
                heap.push({cand, f});
            }
        }
    }

    ScalarField<N> out{g, std::move(dist)};
    if (signed_variant)
        e.for_each_cell([&](std::int64_t c) { out.values[c] = -out.values[c]; });
    return out;
}

template <int N>
ScalarField<N> distance_transform(const BinarySet<N>& e, bool signed_variant,
                                  DistanceMetric metric = DistanceMetric::Euclidean,
                                  const Anisotropy<N>* phi = nullptr) {
    if (metric == DistanceMetric::Euclidean) return euclidean_distance_field(e, signed_variant);
    if (!phi) throw ConfigError("anisotropic distance transform needs an anisotropy");
    return anisotropic_distance_field(e, *phi, signed_variant);
}

// Sample points of the free boundary (facet centers and corners) in physical
// coordinates; used for contours and Hausdorff measurements in 2-D.
template <int N>
std::vector<Vec<N>> free_boundary_points(const BinarySet<N>& e) {
    const auto& g = e.grid();
    std::vector<Vec<N>> pts;
    detail::for_each_free_facet(e, [&](const std::array<int, N>& idx, int axis, int side) {
        Vec<N> c = g.cell_center(idx);
        c[axis] += side * 0.5 * g.h;
        if constexpr (N == 2) {
            const int t = 1 - axis;
            for (int o = -1; o <= 1; ++o) {
                Vec<N> p = c;
                p[t] += o * 0.5 * g.h;
                pts.push_back(p);
            }
        } else {
            pts.push_back(c);
        }
    });
    return pts;
}

}  // namespace dropflow
