#pragma once

// The minimizing-movements scheme: per-step global minimization of the forced
// capillary Almgren-Taylor-Wang functional by max-flow/min-cut, iterated flat
// flows, and limit extraction across time steps.
//
// The minimized form per step is the rewritten functional
//     C_beta(E) + (1/tau) \int_E sd_{E0} + (1/tau) \int_{k tau}^{(k+1) tau} \int_E f,
// which differs from the |E Delta E0| dissipation form by a constant in E:
// a pure unary term plus the submodular pairwise perimeter, hence exactly
// solvable. Capacities are scaled to 64-bit integers (2^40 / max coefficient);
// tie-breaking between distinct global minimizers follows the select policy
// through extreme min-cuts.

#include "dropflow/distance.hpp"
#include "dropflow/maxflow.hpp"
#include "dropflow/measure.hpp"

#include <chrono>

namespace dropflow {

enum class MinimizerSelect { Minimal, Maximal, Any };

inline const char* to_string(MinimizerSelect s) {
    switch (s) {
        case MinimizerSelect::Minimal: return "minimal";
        case MinimizerSelect::Maximal: return "maximal";
        case MinimizerSelect::Any: return "any";
    }
    return "?";
}

struct StepDiagnostics {
    int k = 0;
    double t = 0.0;
    double volume = 0.0;
    double perimeter_phi = 0.0;
    double adhesion = 0.0;
    double capillary = 0.0;
    double dissipation = 0.0;  // (1/tau) \int_{E_k Delta E_{k-1}} d_{E_{k-1}}
    double forcing = 0.0;      // (1/tau) \int_{k tau}^{(k+1) tau} \int_{E_k} f
    double mincut_value = 0.0; // minimized sd-form energy, unscaled
    double max_flip_distance = 0.0;
    double ms = 0.0;
};

template <int N>
struct FlatFlowState {
    double tau = 0.0;
    double T = 0.0;
    MinimizerSelect select = MinimizerSelect::Any;
    std::vector<BinarySet<N>> sets;       // E(tau, 0), ..., E(tau, k_last)
    std::vector<StepDiagnostics> steps;   // one entry per k >= 1
    bool truncated = false;

    const BinarySet<N>& at_time(double t) const {
        const auto k = static_cast<size_t>(std::floor(t / tau));
        return sets[std::min(k, sets.size() - 1)];
    }
};

// The forced ATW value of a candidate set against E0 (dissipation in the
// |E Delta E0| form of the definition). k = 0 reduces to |E Delta E0|.
template <int N>
double atw_energy(const BinarySet<N>& e, const BinarySet<N>& e0, double tau, int k,
                  const Anisotropy<N>& phi, const PerimeterStencil<N>& stencil,
                  const ContactAngleField<N>& beta, const ForcingField<N>& f) {
    e.require_same_grid(e0);
    if (k == 0) return symmetric_difference_measure(e, e0);
    if (!(tau > 0)) throw ConfigError("atw_energy: tau must be positive");
    if (e0.empty()) throw DegenerateSetError("atw_energy: E0 is empty, distance undefined");
    const auto& g = e.grid();
    const double cv = g.cell_volume();
    const auto dist = euclidean_distance_field(e0, false);
    double dissip = 0.0;
    const auto sym = e ^ e0;
    sym.for_each_cell([&](std::int64_t c) { dissip += dist.values[c]; });
    dissip *= cv / tau;
    const auto favg = f.step_cell_averages(k, tau, g);
    double force = 0.0;
    if (!f.is_zero()) e.for_each_cell([&](std::int64_t c) { force += (*favg)[c]; });
    force *= cv;
    return capillary_energy(e, phi, stencil, beta) + dissip + force;
}

namespace detail {

// Unary coefficients of the sd-form step energy, including the vacuum-facet
// perimeter contributions of cells against the lateral/top box faces.
template <int N>
std::vector<double> step_unaries(const GridDomain<N>& g, const ScalarField<N>& sd, double tau,
                                 const std::vector<double>* favg,
                                 const ContactAngleField<N>& beta,
                                 const PerimeterStencil<N>& stencil) {
    const double cv = g.cell_volume();
    const double fa = g.facet_area();
    std::vector<double> u(g.cell_count());
    for (std::int64_t c = 0; c < g.cell_count(); ++c) {
        const auto idx = g.unflatten(c);
        double val = sd.values[c] / tau * cv;
        if (favg) val += (*favg)[c] * cv;
        if (idx[N - 1] == 0) val += beta.at_floor(idx) * fa;
        for (const auto& dir : stencil.directions()) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                auto nb = idx;
                for (int i = 0; i < N; ++i) nb[i] += sgn * dir.offset[i];
                if (nb[N - 1] >= 0 && !g.in_bounds(nb)) val += dir.rho * fa;
            }
        }
        u[c] = val;
    }
    return u;
}

}  // namespace detail

// One globally optimal step. E0 empty returns the empty set by definition.
template <int N>
BinarySet<N> minimize_step(const BinarySet<N>& e0, double tau, int k, const Anisotropy<N>& phi,
                           const PerimeterStencil<N>& stencil, const ContactAngleField<N>& beta,
                           const ForcingField<N>& f,
                           MinimizerSelect select = MinimizerSelect::Any,
                           double* mincut_value = nullptr) {
    stencil.require_calibrated_for(phi);
    if (k < 1) throw ConfigError("minimize_step: k must be >= 1 (E(tau,0) := E0)");
    if (!(tau > 0)) throw ConfigError("minimize_step: tau must be positive");
    const auto& g = e0.grid();
    if (e0.empty()) {
        if (mincut_value) *mincut_value = 0.0;
        return BinarySet<N>(g);
    }

    const auto sd = euclidean_distance_field(e0, true);
    std::shared_ptr<const std::vector<double>> favg;
    if (!f.is_zero()) favg = f.step_cell_averages(k, tau, g);
    const auto unary = detail::step_unaries(g, sd, tau, favg ? favg.get() : nullptr, beta, stencil);

    double maxcoef = 0.0;
    for (double v : unary) maxcoef = std::max(maxcoef, std::abs(v));
    const double fa = g.facet_area();
    for (const auto& dir : stencil.directions()) maxcoef = std::max(maxcoef, dir.rho * fa);
    if (maxcoef == 0.0) maxcoef = 1.0;
    const double scale = std::ldexp(1.0, 40) / maxcoef;
    auto to_int = [&](double v) {
        const double s = v * scale;
        if (std::abs(s) > 9.0e18) throw CapacityScaleError("capacity scaling overflow");
        return static_cast<std::int64_t>(std::llround(s));
    };

    const int n_cells = static_cast<int>(g.cell_count());
    MaxFlowGraph mf(n_cells);
    for (int c = 0; c < n_cells; ++c) mf.add_unary(c, to_int(unary[c]));
    for (const auto& dir : stencil.directions()) {
        if (dir.rho == 0.0) continue;
        const std::int64_t w = to_int(dir.rho * fa);
        if (w == 0) continue;
        for (std::int64_t c = 0; c < g.cell_count(); ++c) {
            auto nb = g.unflatten(c);
            for (int i = 0; i < N; ++i) nb[i] += dir.offset[i];
            if (nb[N - 1] >= 0 && g.in_bounds(nb))
                mf.add_pair(static_cast<int>(c), static_cast<int>(g.flatten(nb)), w);
        }
    }

    const std::int64_t emin = mf.solve();
    if (mincut_value) *mincut_value = static_cast<double>(emin) / scale;

    std::vector<char> side;
    switch (select) {
        case MinimizerSelect::Minimal: side = mf.minimal_source_side(); break;
        case MinimizerSelect::Maximal: side = mf.maximal_source_side(); break;
        case MinimizerSelect::Any: side = mf.minimal_source_side(); break;
    }
    BinarySet<N> out(g);
    for (int c = 0; c < n_cells; ++c)
        if (side[c]) out.set(c, true);
    return out;
}

// Iterated flat flow E(tau, k), k = 1..floor(T/tau), with per-step
// diagnostics. Stops early with the truncation flag when the droplet comes
// within `margin` cells of a lateral/top box face; extinction is not an error.
template <int N>
FlatFlowState<N> run_flat_flow(const BinarySet<N>& e0, double tau, double T,
                               const Anisotropy<N>& phi, const PerimeterStencil<N>& stencil,
                               const ContactAngleField<N>& beta, const ForcingField<N>& f,
                               MinimizerSelect select = MinimizerSelect::Any, int margin = 4) {
    if (!(tau > 0 && tau < T)) throw ConfigError("run_flat_flow: need 0 < tau < T");
    FlatFlowState<N> state;
    state.tau = tau;
    state.T = T;
    state.select = select;
    state.sets.push_back(e0);
    if (near_box_faces(e0, margin)) {
        state.truncated = true;
        return state;
    }
    const int kmax = static_cast<int>(std::floor(T / tau + 1e-9));
    const auto& g = e0.grid();
    for (int k = 1; k <= kmax; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        const BinarySet<N>& prev = state.sets.back();
        double mincut = 0.0;
        BinarySet<N> next = minimize_step(prev, tau, k, phi, stencil, beta, f, select, &mincut);

        StepDiagnostics d;
        d.k = k;
        d.t = k * tau;
        d.volume = next.volume();
        d.perimeter_phi = perimeter_phi(next, phi, stencil, PerimeterRegion::Interior);
        d.adhesion = adhesion_energy(next, beta);
        d.capillary = d.perimeter_phi + d.adhesion;
        d.mincut_value = mincut;
        if (!prev.empty()) {
            const auto dist = euclidean_distance_field(prev, false);
            const auto sym = next ^ prev;
            double dissip = 0.0, dmax = 0.0;
            sym.for_each_cell([&](std::int64_t c) {
                dissip += dist.values[c];
                dmax = std::max(dmax, dist.values[c]);
            });
            d.dissipation = dissip * g.cell_volume() / tau;
            d.max_flip_distance = dmax;
        }
        if (!f.is_zero()) {
            const auto favg = f.step_cell_averages(k, tau, g);
            double force = 0.0;
            next.for_each_cell([&](std::int64_t c) { force += (*favg)[c]; });
            d.forcing = force * g.cell_volume();
        }
        d.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                   .count();
        state.steps.push_back(d);
        state.sets.push_back(std::move(next));
        if (near_box_faces(state.sets.back(), margin)) {
            state.truncated = true;
            break;
        }
    }
    return state;
}

// ---------------------------------------------------------------------------
// Limit extraction across a descending list of time steps.

template <int N>
struct GmmReport {
    std::vector<double> taus;
    std::vector<double> sample_times;
    // diff[i][j] = |E(tau_i, .) Delta E(tau_{i+1}, .)| at sample time j
    std::vector<std::vector<double>> consecutive_diffs;
    bool cauchy = false;
    std::vector<FlatFlowState<N>> runs;  // finest is runs.back()

    const FlatFlowState<N>& finest() const { return runs.back(); }
};

template <int N>
GmmReport<N> gmm_extract(const BinarySet<N>& e0, std::vector<double> tau_list, double T,
                         const Anisotropy<N>& phi, const PerimeterStencil<N>& stencil,
                         const ContactAngleField<N>& beta, const ForcingField<N>& f,
                         MinimizerSelect select = MinimizerSelect::Any,
                         std::vector<double> sample_times = {}) {
    if (tau_list.size() < 3) throw ConfigError("gmm_extract: need at least 3 tau values");
    for (size_t i = 1; i < tau_list.size(); ++i)
        if (!(tau_list[i] < tau_list[i - 1]))
            throw ConfigError("gmm_extract: tau list must be strictly descending");
    GmmReport<N> rep;
    rep.taus = tau_list;
    if (sample_times.empty())
        for (double q : {0.25, 0.5, 0.75, 1.0}) sample_times.push_back(q * T * 0.9);
    rep.sample_times = sample_times;
    for (double tau : tau_list)
        rep.runs.push_back(run_flat_flow(e0, tau, T, phi, stencil, beta, f, select));
    rep.cauchy = true;
    for (size_t i = 0; i + 1 < rep.runs.size(); ++i) {
        std::vector<double> diffs;
        for (double t : sample_times)
            diffs.push_back(
                symmetric_difference_measure(rep.runs[i].at_time(t), rep.runs[i + 1].at_time(t)));
        if (i > 0) {
            const double slack = e0.grid().cell_volume();
            for (size_t j = 0; j < diffs.size(); ++j)
                if (diffs[j] > rep.consecutive_diffs.back()[j] + slack) rep.cauchy = false;
        }
        rep.consecutive_diffs.push_back(std::move(diffs));
    }
    return rep;
}

}  // namespace dropflow
