#pragma once

// Seeded random droplet fixtures for property tests and comparison suites.

#include "dropflow/grid.hpp"

#include <random>

namespace dropflow {

// Union of a few random circular bumps (floor-anchored and interior),
// clipped away from the lateral/top faces by `margin` cells.
template <int N>
BinarySet<N> random_droplet(const GridDomain<N>& g, std::mt19937_64& rng, int max_blobs = 4,
                            int margin = 6) {
    std::uniform_int_distribution<int> nblob(2, std::max(2, max_blobs));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Vec<N> lo = g.lower, hi = g.upper();
    const double width = (hi - lo).minCoeff();
    const int blobs = nblob(rng);
    std::vector<std::pair<Vec<N>, double>> balls;
    for (int b = 0; b < blobs; ++b) {
        Vec<N> c;
        for (int i = 0; i < N; ++i) c[i] = lo[i] + (0.25 + 0.5 * unit(rng)) * (hi[i] - lo[i]);
        if (unit(rng) < 0.6) c[N - 1] = 0.0;  // floor-anchored bump
        else c[N - 1] = (0.05 + 0.25 * unit(rng)) * (hi[N - 1] - lo[N - 1]);
        const double r = (0.08 + 0.15 * unit(rng)) * width;
        balls.push_back({c, r});
    }
    BinarySet<N> out(g);
    for (std::int64_t f = 0; f < g.cell_count(); ++f) {
        const auto idx = g.unflatten(f);
        bool safe = true;
        for (int i = 0; i < N; ++i) {
            if (idx[i] >= g.counts[i] - margin) safe = false;
            if (i < N - 1 && idx[i] < margin) safe = false;
        }
        if (!safe) continue;
        const Vec<N> x = g.cell_center(idx);
        for (auto& [c, r] : balls)
            if ((x - c).norm() <= r) {
                out.set(f, true);
                break;
            }
    }
    return out;
}

// Morphological erosion by `steps` layers of axis neighbors (cells beyond the
// box count as vacuum, the floor as solid support).
template <int N>
BinarySet<N> erode(const BinarySet<N>& e, int steps) {
    const auto& g = e.grid();
    BinarySet<N> cur = e;
    for (int s = 0; s < steps; ++s) {
        BinarySet<N> next(g);
        cur.for_each_cell([&](std::int64_t c) {
            const auto idx = g.unflatten(c);
            for (int a = 0; a < N; ++a)
                for (int sgn = -1; sgn <= 1; sgn += 2) {
                    auto nb = idx;
                    nb[a] += sgn;
                    if (a == N - 1 && nb[a] < 0) continue;  // floor supports
                    if (!g.in_bounds(nb) || !cur.contains(nb)) return;
                }
            next.set(c, true);
        });
        cur = std::move(next);
    }
    return cur;
}

}  // namespace dropflow
