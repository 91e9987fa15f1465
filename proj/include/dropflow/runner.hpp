#pragma once

// Run orchestration behind the CLI subcommands. Exit codes: 0 ok, 2 config
// error, 3 admissibility error, 4 truncation abort, 5 check failure.

#include "dropflow/config.hpp"
#include "dropflow/io.hpp"
#include "dropflow/verify.hpp"

#include <cstdlib>
#include <future>
#include <iostream>
#include <regex>

namespace dropflow {

inline int thread_budget() {
    if (const char* env = std::getenv("DROPFLOW_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

inline std::map<std::string, double> parse_calibration(const std::filesystem::path& path) {
    std::map<std::string, double> out;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open calibration file " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
        if (!key.empty()) out[key] = std::stod(line.substr(eq + 1));
    }
    return out;
}

template <class Fn>
int guarded(std::ostream& log, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const AdmissibilityError& e) {
        log << "admissibility error: " << e.what() << "\n";
        return 3;
    } catch (const TruncationAbort& e) {
        log << "truncation abort: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

// ---------------------------------------------------------------------------

template <int N>
int simulate_impl(const RunConfig& cfg, std::ostream& log) {
    const auto g = build_grid<N>(cfg);
    const auto phi = build_anisotropy<N>(cfg.phi_spec);
    const auto stencil = PerimeterStencil<N>::calibrate(phi, cfg.stencil_order);
    const auto beta = build_beta(cfg, g, phi);
    const auto f = build_forcing<N>(cfg, g);
    const auto e0 = build_initial(cfg, g, phi);

    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ofstream echo(std::filesystem::path(cfg.out_dir) / "config.echo");
        echo << cfg.echo();
    }

    bool truncated = false;
    const int workers = std::min<int>(thread_budget(), static_cast<int>(cfg.tau_list.size()));
    std::vector<FlatFlowState<N>> states(cfg.tau_list.size());
    auto run_one = [&](size_t i) {
        states[i] = run_flat_flow(e0, cfg.tau_list[i], cfg.T, phi, stencil, beta, f, cfg.select,
                                  cfg.margin);
    };
    if (workers <= 1) {
        for (size_t i = 0; i < cfg.tau_list.size(); ++i) run_one(i);
    } else {
        std::vector<std::future<void>> futs;
        for (size_t i = 0; i < cfg.tau_list.size(); ++i)
            futs.push_back(std::async(std::launch::async, run_one, i));
        for (auto& ft : futs) ft.get();
    }
    for (size_t i = 0; i < cfg.tau_list.size(); ++i) {
        const auto& state = states[i];
        const double tau = cfg.tau_list[i];
        std::ostringstream mname;
        mname << "metrics_tau" << std::setprecision(12) << tau << ".csv";
        write_metrics_csv(std::filesystem::path(cfg.out_dir) / mname.str(), state);
        for (size_t k = 0; k < state.sets.size(); ++k) {
            if (k % std::max(1, cfg.snapshot_stride) != 0 && k + 1 != state.sets.size()) continue;
            if constexpr (N == 2)
                write_pgm(std::filesystem::path(cfg.out_dir) /
                              snapshot_name(tau, static_cast<int>(k)),
                          state.sets[k]);
            else
                write_bitfield3(std::filesystem::path(cfg.out_dir) /
                                    (snapshot_name(tau, static_cast<int>(k)) + ".bin"),
                                state.sets[k]);
        }
        log << "tau = " << tau << ": " << state.steps.size() << " steps, final volume "
            << (state.sets.back().volume()) << (state.truncated ? " [TRUNCATED]" : "") << "\n";
        truncated = truncated || state.truncated;
    }
    if (truncated) {
        log << "truncation abort: droplet reached the box margin\n";
        return 4;
    }
    return 0;
}

inline int run_simulate(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&] {
        return cfg.n == 2 ? simulate_impl<2>(cfg, log) : simulate_impl<3>(cfg, log);
    });
}

// ---------------------------------------------------------------------------

inline std::function<double(double)> build_beta_function(const RunConfig& cfg, double phi_en) {
    const auto toks = detail::split_ws(cfg.beta_spec);
    if (toks.empty()) throw ConfigError("empty beta spec");
    if (toks[0] == "constant") {
        const double b = std::stod(toks.at(1));
        if (std::abs(b) >= phi_en)
            throw AdmissibilityError("beta violates ||beta||_inf <= (1-2 eta) phi(e_n)");
        return [b](double) { return b; };
    }
    if (toks[0] == "table") {
        std::ifstream in(toks.at(1));
        if (!in) throw ConfigError("cannot open beta table " + toks[1]);
        auto samples = std::make_shared<std::vector<std::pair<double, double>>>();
        double x, b;
        while (in >> x >> b) samples->emplace_back(x, b);
        std::sort(samples->begin(), samples->end());
        for (auto& s : *samples)
            if (std::abs(s.second) >= phi_en)
                throw AdmissibilityError("beta table violates the admissibility bound");
        return [samples](double x0) {
            if (x0 <= samples->front().first) return samples->front().second;
            if (x0 >= samples->back().first) return samples->back().second;
            size_t j = 1;
            while ((*samples)[j].first < x0) ++j;
            const auto& a = (*samples)[j - 1];
            const auto& c = (*samples)[j];
            const double w = (x0 - a.first) / (c.first - a.first);
            return (1 - w) * a.second + w * c.second;
        };
    }
    throw ConfigError("unknown beta kind '" + toks[0] + "'");
}

inline int run_oracle(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        if (cfg.n != 2) throw ConfigError("the oracle is 2-D only");
        const auto phi = build_anisotropy<2>(cfg.phi_spec);
        const double phi_en = phi.value(Vec<2>::UnitY());
        auto beta = build_beta_function(cfg, phi_en);
        GridDomain<2> fgrid = cfg.box.size() == 4
                                  ? build_grid<2>(cfg)
                                  : GridDomain<2>::make(Vec<2>(-2, 0), Vec<2>(2, 2), 1.0 / 64);
        const auto f = build_forcing<2>(cfg, fgrid);
        auto ffun = [f](double t, const Vec<2>& x) { return f.value(t, x); };

        SmoothCurve curve0;
        const auto toks = detail::split_ws(cfg.initial_spec);
        if (toks[0] == "half_disk" && toks.size() == 3)
            curve0 = SmoothCurve::half_circle(std::stod(toks[2]), std::stod(toks[1]), cfg.nodes);
        else if (toks[0] == "half_wulff" && toks.size() == 3) {
            DualAnisotropy<2> dual(phi);
            curve0 = SmoothCurve::half_wulff(dual, std::stod(toks[2]), std::stod(toks[1]),
                                             cfg.nodes);
        } else
            throw ConfigError("oracle initial must be 'half_disk cx R' or 'half_wulff cx R'");

        const double dt = cfg.dt > 0 ? cfg.dt : 0.4 * curve0.min_spacing();
        std::vector<double> snaps;
        for (double t = 0; t <= cfg.T + 1e-12; t += std::max(1, cfg.snapshot_stride) * dt)
            snaps.push_back(t);
        auto run = run_front_tracking(curve0, phi, beta, ffun, dt, cfg.T, snaps);

        std::filesystem::create_directories(cfg.out_dir);
        {
            std::ofstream echo(std::filesystem::path(cfg.out_dir) / "config.echo");
            echo << cfg.echo();
        }
        std::ofstream metrics(std::filesystem::path(cfg.out_dir) / "metrics.csv");
        metrics << "# dropflow oracle metrics v1\n"
                << "snapshot,t,volume,perimeter_phi,adhesion,capillary\n"
                << std::setprecision(17);
        int idx = 0;
        for (const auto& c : run.snapshots) {
            std::ostringstream name;
            name << "curve_" << idx << ".csv";
            write_curve_csv(std::filesystem::path(cfg.out_dir) / name.str(), c);
            double per = 0.0;
            for (size_t i = 0; i + 1 < c.nodes.size(); ++i) {
                const Vec<2> e = c.nodes[i + 1] - c.nodes[i];
                per += phi.value(Vec<2>(e[1], -e[0]));
            }
            const double cap = curve_capillary_energy(c, phi, beta);
            metrics << idx << "," << c.time << "," << c.area() << "," << per << ","
                    << cap - per << "," << cap << "\n";
            ++idx;
        }
        log << "oracle: " << run.snapshots.size() << " snapshots, t_end = " << run.t_end
            << ", stop = " << to_string(run.stop) << "\n";
        return 0;
    });
}

// ---------------------------------------------------------------------------

inline int run_compare(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        if (cfg.n != 2) throw ConfigError("compare is desk-scale 2-D");
        const auto g = build_grid<2>(cfg);
        const auto phi = build_anisotropy<2>(cfg.phi_spec);
        const auto stencil = PerimeterStencil<2>::calibrate(phi, cfg.stencil_order);
        auto rep = check_comparison_suite(cfg.seed, g, phi, stencil, cfg.instances, cfg.steps,
                                          cfg.tau());
        std::filesystem::create_directories(cfg.out_dir);
        write_check_reports_csv(std::filesystem::path(cfg.out_dir) / "report.csv", {rep});
        log << rep.name << ": " << (rep.pass ? "PASS" : "FAIL") << " ("
            << rep.metrics.at("instances") << " instances, " << rep.metrics.at("violating_cells")
            << " violating cells)\n";
        return rep.pass ? 0 : 5;
    });
}

// ---------------------------------------------------------------------------

inline int run_shapes(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream table(std::filesystem::path(cfg.out_dir) / "constants.csv");
        table << "phi,n,kind,beta0,resolution,value\n" << std::setprecision(12);
        if (cfg.n == 2) {
            const auto phi = build_anisotropy<2>(cfg.phi_spec);
            DualAnisotropy<2> dual(phi);
            const double phi_en = phi.value(Vec<2>::UnitY());
            for (int res : {4096, 8192}) {
                table << cfg.phi_spec << ",2,isoperimetric,," << res << ","
                      << isoperimetric_constant(phi, res, &dual) << "\n";
                for (double b0 : {0.0, 0.5 * phi_en, -0.5 * phi_en})
                    table << cfg.phi_spec << ",2,winterbottom," << b0 << "," << res << ","
                          << winterbottom_constant(phi, b0, res, &dual) << "\n";
            }
            if (!cfg.box.empty()) {
                const auto g = build_grid<2>(cfg);
                const auto e0 = build_initial(cfg, g, phi,
                                              std::make_shared<DualAnisotropy<2>>(phi));
                write_pgm(std::filesystem::path(cfg.out_dir) / "fixture.pgm", e0);
            }
        } else {
            const auto phi = build_anisotropy<3>(cfg.phi_spec);
            DualAnisotropy<3> dual(phi);
            const double phi_en = phi.value(Vec<3>::UnitZ());
            for (int res : {5120, 20480}) {
                table << cfg.phi_spec << ",3,isoperimetric,," << res << ","
                      << isoperimetric_constant(phi, res, &dual) << "\n";
                for (double b0 : {0.0, 0.5 * phi_en})
                    table << cfg.phi_spec << ",3,winterbottom," << b0 << "," << res << ","
                          << winterbottom_constant(phi, b0, res, &dual) << "\n";
            }
        }
        log << "shapes: constants written to " << cfg.out_dir << "/constants.csv\n";
        return 0;
    });
}

// ---------------------------------------------------------------------------
// verify: load a simulate run directory and execute the named checks.

inline int run_verify(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&]() -> int {
        if (cfg.run_dir.empty()) throw ConfigError("verify needs run_dir");
        const std::filesystem::path dir(cfg.run_dir);
        RunConfig run_cfg = RunConfig::parse_file(dir / "config.echo");
        if (run_cfg.n != 2) throw ConfigError("verify handles 2-D runs");
        const auto g = build_grid<2>(run_cfg);
        const auto phi = build_anisotropy<2>(run_cfg.phi_spec);
        const auto stencil = PerimeterStencil<2>::calibrate(phi, run_cfg.stencil_order);
        const auto beta = build_beta(run_cfg, g, phi);
        const auto f = build_forcing<2>(run_cfg, g);

        std::map<std::string, double> cal;
        if (!cfg.calibration_file.empty()) cal = parse_calibration(cfg.calibration_file);
        auto cal_or = [&](const std::string& key, double dflt) {
            const auto it = cal.find(key);
            return it == cal.end() ? dflt : it->second;
        };

        // Load the snapshot sequence of the finest tau present.
        const double tau = *std::min_element(run_cfg.tau_list.begin(), run_cfg.tau_list.end());
        FlatFlowState<2> state;
        state.tau = tau;
        state.T = run_cfg.T;
        const std::regex name_re("E_tau(.+)_k([0-9]+)\\.pgm");
        std::map<int, std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            std::smatch m;
            const std::string fname = entry.path().filename().string();
            if (!std::regex_match(fname, m, name_re)) continue;
            if (std::abs(std::stod(m[1]) - tau) > 1e-12 * tau) continue;
            files[std::stoi(m[2])] = entry.path();
        }
        if (files.empty()) throw ConfigError("run directory has no snapshots for tau");
        int expect = 0;
        bool contiguous = true;
        for (auto& [k, path] : files) {
            if (k != expect) contiguous = false;
            ++expect;
            state.sets.push_back(read_pgm(path));
        }
        if (contiguous) {
            for (size_t k = 1; k < state.sets.size(); ++k) {
                StepDiagnostics d;
                d.k = static_cast<int>(k);
                d.t = k * tau;
                const auto& prev = state.sets[k - 1];
                const auto& curr = state.sets[k];
                d.volume = curr.volume();
                d.perimeter_phi = perimeter_phi(curr, phi, stencil);
                d.adhesion = adhesion_energy(curr, beta);
                d.capillary = d.perimeter_phi + d.adhesion;
                if (!prev.empty()) {
                    const auto dist = euclidean_distance_field(prev, false);
                    const auto sym = curr ^ prev;
                    double dis = 0.0, dmax = 0.0;
                    sym.for_each_cell([&](std::int64_t c) {
                        dis += dist.values[c];
                        dmax = std::max(dmax, dist.values[c]);
                    });
                    d.dissipation = dis * g.cell_volume() / tau;
                    d.max_flip_distance = dmax;
                }
                if (!f.is_zero()) {
                    const auto favg = f.step_cell_averages(static_cast<int>(k), tau, g);
                    double force = 0.0;
                    curr.for_each_cell([&](std::int64_t c) { force += (*favg)[c]; });
                    d.forcing = force * g.cell_volume();
                }
                state.steps.push_back(d);
            }
        }

        std::vector<CheckReport> reports;
        std::istringstream cs(cfg.checks);
        std::string name;
        while (std::getline(cs, name, ',')) {
            if (name == "minimality") {
                if (!contiguous) {
                    CheckReport r;
                    r.name = name;
                    r.skipped = true;
                    r.notes = "needs snapshot_stride = 1";
                    reports.push_back(r);
                    continue;
                }
                reports.push_back(check_minimality(state, phi, stencil, beta, f));
            } else if (name == "coercivity") {
                CheckReport agg;
                agg.name = "coercivity";
                agg.pass = true;
                for (const auto& e : state.sets) {
                    if (e.empty()) continue;
                    auto r = check_coercivity(e, phi, stencil, beta, beta.eta());
                    agg.pass = agg.pass && r.pass;
                }
                reports.push_back(agg);
            } else if (name == "linf") {
                if (!contiguous) continue;
                reports.push_back(check_linf_displacement(state, cal_or("theta_fit", 0.1)));
            } else if (name == "density") {
                reports.push_back(check_density_estimates(
                    state, {cal_or("density_radius", 8.0 * g.h)}, cal_or("theta_floor", 0.05)));
            } else if (name == "volume_distance") {
                if (!contiguous) continue;
                reports.push_back(
                    check_volume_distance(state, phi, stencil, beta, cal_or("c4", 50.0)));
            } else if (name == "euler_lagrange") {
                if (state.sets.size() < 2) continue;
                // measure a developed step: the first one only smooths the
                // rasterized initial set
                const size_t k_el = std::min<size_t>(2, state.sets.size() - 1);
                reports.push_back(check_euler_lagrange(state.sets[k_el], state.sets[k_el - 1],
                                                       tau, static_cast<int>(k_el), phi, f,
                                                       cal_or("el_pass_fraction", 0.2)));
            } else if (!name.empty()) {
                throw ConfigError("unknown check '" + name + "'");
            }
        }

        std::filesystem::create_directories(cfg.out_dir);
        write_check_reports_csv(std::filesystem::path(cfg.out_dir) / "report.csv", reports);
        bool all_ok = true;
        for (const auto& r : reports) {
            log << (r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL")) << "  " << r.name;
            for (const auto& [k, v] : r.metrics) log << "  " << k << "=" << v;
            if (!r.notes.empty()) log << "  (" << r.notes << ")";
            log << "\n";
            all_ok = all_ok && (r.pass || r.skipped);
        }
        return all_ok ? 0 : 5;
    });
}

inline int dispatch(const std::string& sub, const RunConfig& cfg, std::ostream& log) {
    if (sub == "simulate") return run_simulate(cfg, log);
    if (sub == "oracle") return run_oracle(cfg, log);
    if (sub == "compare") return run_compare(cfg, log);
    if (sub == "verify") return run_verify(cfg, log);
    if (sub == "shapes") return run_shapes(cfg, log);
    log << "unknown subcommand '" << sub << "'\n";
    return 2;
}

}  // namespace dropflow
