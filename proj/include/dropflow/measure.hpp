#pragma once

// Geometric measurements on binary droplets: anisotropic perimeter
// (pairwise-cut sum), adhesion energy on the floor, capillary energy.

#include "dropflow/fields.hpp"
#include "dropflow/stencil.hpp"

namespace dropflow {

enum class PerimeterRegion {
    Interior,  // P_phi(E, Omega): free facets only, the floor facet excluded
    Full       // P_phi(E): adds the floor facet weighted by phi_D(e_n)
};

// Number of occupied bottom-row cells.
template <int N>
std::int64_t wetted_cell_count(const BinarySet<N>& e) {
    const auto& g = e.grid();
    std::int64_t w = 0;
    e.for_each_cell([&](std::int64_t c) {
        if (g.unflatten(c)[N - 1] == 0) ++w;
    });
    return w;
}

// Pairwise-cut perimeter. A pair is discordant when exactly one side is
// occupied; cells beyond the lateral/top faces are vacuum, pairs crossing the
// floor plane do not exist (the floor facet belongs to the adhesion term).
template <int N>
double perimeter_phi(const BinarySet<N>& e, const Anisotropy<N>& phi,
                     const PerimeterStencil<N>& stencil,
                     PerimeterRegion region = PerimeterRegion::Interior) {
    stencil.require_calibrated_for(phi);
    const auto& g = e.grid();
    const double fa = g.facet_area();
    double total = 0.0;
    for (const auto& dir : stencil.directions()) {
        if (dir.rho == 0.0) continue;
        std::int64_t cut = 0;
        for (std::int64_t c = 0; c < g.cell_count(); ++c) {
            const bool in_c = e.contains(c);
            const auto idx = g.unflatten(c);
            // Pair {c, c + v}, visited once from the c side.
            auto nb = idx;
            for (int i = 0; i < N; ++i) nb[i] += dir.offset[i];
            if (nb[N - 1] >= 0) {
                if (g.in_bounds(nb)) {
                    if (in_c != e.contains(nb)) ++cut;
                } else if (in_c) {
                    ++cut;  // vacuum beyond a lateral/top face
                }
            }
            // Pair {c - v, c} when c - v is vacuum (never visited otherwise).
            if (in_c) {
                auto pb = idx;
                for (int i = 0; i < N; ++i) pb[i] -= dir.offset[i];
                if (pb[N - 1] >= 0 && !g.in_bounds(pb)) ++cut;
            }
        }
        total += dir.rho * fa * static_cast<double>(cut);
    }
    if (region == PerimeterRegion::Full)
        total += stencil.floor_weight() * fa * static_cast<double>(wetted_cell_count(e));
    return total;
}

// \int_{dOmega} beta chi_E dH^{n-1} over the wetted floor cells.
template <int N>
double adhesion_energy(const BinarySet<N>& e, const ContactAngleField<N>& beta) {
    if (e.grid() != beta.grid()) throw GridMismatchError("beta field lives on a different grid");
    const auto& g = e.grid();
    double total = 0.0;
    e.for_each_cell([&](std::int64_t c) {
        const auto idx = g.unflatten(c);
        if (idx[N - 1] == 0) total += beta.at_floor(idx) * g.facet_area();
    });
    return total;
}

// C_beta(E) = P_phi(E, Omega) + \int_{dOmega} beta chi_E.
template <int N>
double capillary_energy(const BinarySet<N>& e, const Anisotropy<N>& phi,
                        const PerimeterStencil<N>& stencil, const ContactAngleField<N>& beta) {
    return perimeter_phi(e, phi, stencil, PerimeterRegion::Interior) + adhesion_energy(e, beta);
}

}  // namespace dropflow
