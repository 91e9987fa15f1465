#pragma once

// Plain-text run configuration: one `key = value` per line, '#' comments,
// unknown keys rejected.

#include "dropflow/fields.hpp"
#include "dropflow/io.hpp"
#include "dropflow/shapes.hpp"
#include "dropflow/stepper.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace dropflow {

struct RunConfig {
    std::string experiment = "run";
    int n = 2;
    std::vector<double> box;  // lo..., hi...
    double h = 1.0 / 128;
    std::string phi_spec = "euclidean";
    std::string beta_spec = "constant 0";
    std::string f_spec = "zero";
    std::vector<double> tau_list = {1e-3};
    double T = 0.1;
    MinimizerSelect select = MinimizerSelect::Any;
    int stencil_order = 16;
    int snapshot_stride = 1;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    std::string initial_spec = "half_disk 0 0.5";
    int margin = 4;
    // oracle
    int nodes = 256;
    double dt = 0.0;  // 0: stability-bound default
    // verify
    std::string run_dir;
    std::string checks = "minimality,coercivity,linf,density,volume_distance";
    std::string calibration_file;
    // compare
    int instances = 10;
    int steps = 5;

    double tau() const { return tau_list.back(); }

    static RunConfig parse_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open configuration " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    static RunConfig parse(const std::string& text) {
        RunConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                if (b == std::string::npos) return std::string();
                const auto e = s.find_last_not_of(" \t\r");
                return s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            cfg.apply(key, value, lineno);
        }
        cfg.validate();
        return cfg;
    }

    void apply(const std::string& key, const std::string& value, int lineno) {
        auto bad = [&](const std::string& why) {
            throw ConfigError("config line " + std::to_string(lineno) + " (" + key + "): " + why);
        };
        auto num = [&](const std::string& s) {
            try {
                size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size()) bad("trailing characters in number '" + s + "'");
                return v;
            } catch (const std::exception&) {
                bad("not a number: '" + s + "'");
                return 0.0;
            }
        };
        if (key == "experiment") experiment = value;
        else if (key == "n") {
            n = static_cast<int>(num(value));
            if (n != 2 && n != 3) bad("n must be 2 or 3");
        } else if (key == "box") {
            box.clear();
            std::istringstream vs(value);
            std::string tok;
            while (vs >> tok) box.push_back(num(tok));
        } else if (key == "h") h = num(value);
        else if (key == "phi") phi_spec = value;
        else if (key == "beta") beta_spec = value;
        else if (key == "f") f_spec = value;
        else if (key == "tau") {
            tau_list.clear();
            std::string item;
            std::istringstream vs(value);
            while (std::getline(vs, item, ',')) tau_list.push_back(num(item));
        } else if (key == "T") T = num(value);
        else if (key == "select") {
            if (value == "minimal") select = MinimizerSelect::Minimal;
            else if (value == "maximal") select = MinimizerSelect::Maximal;
            else if (value == "any") select = MinimizerSelect::Any;
            else bad("select must be minimal, maximal or any");
        } else if (key == "stencil_order") stencil_order = static_cast<int>(num(value));
        else if (key == "snapshot_stride") snapshot_stride = static_cast<int>(num(value));
        else if (key == "out_dir") out_dir = value;
        else if (key == "seed") seed = static_cast<std::uint64_t>(num(value));
        else if (key == "initial") initial_spec = value;
        else if (key == "margin") margin = static_cast<int>(num(value));
        else if (key == "nodes") nodes = static_cast<int>(num(value));
        else if (key == "dt") dt = num(value);
        else if (key == "run_dir") run_dir = value;
        else if (key == "checks") checks = value;
        else if (key == "calibration_file") calibration_file = value;
        else if (key == "instances") instances = static_cast<int>(num(value));
        else if (key == "steps") steps = static_cast<int>(num(value));
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }

    void validate() const {
        if (!box.empty() && box.size() != static_cast<size_t>(2 * n))
            throw ConfigError("box needs " + std::to_string(2 * n) + " numbers for n = " +
                              std::to_string(n));
        for (double t : tau_list)
            if (!(t > 0 && t < T)) throw ConfigError("each tau must satisfy 0 < tau < T");
    }

    std::string echo() const {
        std::ostringstream os;
        os.precision(17);
        os << "experiment = " << experiment << "\nn = " << n << "\nbox =";
        for (double b : box) os << " " << b;
        os << "\nh = " << h << "\nphi = " << phi_spec << "\nbeta = " << beta_spec
           << "\nf = " << f_spec << "\ntau = ";
        for (size_t i = 0; i < tau_list.size(); ++i) os << (i ? "," : "") << tau_list[i];
        os << "\nT = " << T << "\nselect = " << to_string(select)
           << "\nstencil_order = " << stencil_order << "\nsnapshot_stride = " << snapshot_stride
           << "\nout_dir = " << out_dir << "\nseed = " << seed << "\ninitial = " << initial_spec
           << "\nmargin = " << margin << "\nnodes = " << nodes << "\ndt = " << dt << "\n";
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// Builders from the spec strings.

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> toks;
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

}  // namespace detail

template <int N>
GridDomain<N> build_grid(const RunConfig& cfg) {
    if (cfg.n != N) throw ConfigError("configuration dimension does not match the requested build");
    if (cfg.box.size() != 2 * N) throw ConfigError("box must be set");
    Vec<N> lo, hi;
    for (int i = 0; i < N; ++i) {
        lo[i] = cfg.box[i];
        hi[i] = cfg.box[N + i];
    }
    return GridDomain<N>::make(lo, hi, cfg.h);
}

template <int N>
Anisotropy<N> build_anisotropy(const std::string& spec) {
    const auto toks = detail::split_ws(spec);
    if (toks.empty()) throw ConfigError("empty anisotropy spec");
    if (toks[0] == "euclidean") return Anisotropy<N>::euclidean();
    if (toks[0] == "linear_map") {
        if (toks.size() != 1 + N * N)
            throw ConfigError("linear_map needs the row-major matrix entries");
        Mat<N> a;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) a(i, j) = std::stod(toks[1 + i * N + j]);
        return Anisotropy<N>::linear_map(a);
    }
    if (toks[0] == "smoothed_l1") {
        if (toks.size() != 2) throw ConfigError("smoothed_l1 needs eps");
        return Anisotropy<N>::smoothed_l1(std::stod(toks[1]));
    }
    if (toks[0] == "tabulated") {
        if (toks.size() != 2) throw ConfigError("tabulated needs a sample file");
        std::ifstream in(toks[1]);
        if (!in) throw ConfigError("cannot open anisotropy table " + toks[1]);
        if constexpr (N == 2) {
            std::vector<double> ang, val;
            double a, v;
            while (in >> a >> v) {
                ang.push_back(a);
                val.push_back(v);
            }
            return Anisotropy<2>::tabulated(ang, val);
        } else {
            std::vector<double> az, pol, val;
            double a, p, v;
            while (in >> a >> p >> v) {
                az.push_back(a);
                pol.push_back(p);
                val.push_back(v);
            }
            std::set<double> uaz(az.begin(), az.end()), upol(pol.begin(), pol.end());
            const int n_az = static_cast<int>(uaz.size()), n_pol = static_cast<int>(upol.size());
            if (static_cast<size_t>(n_az) * n_pol != val.size())
                throw ConfigError("3-D anisotropy table must be a full lat-long grid");
            std::vector<double> grid_vals(val.size());
            std::map<double, int> azi, poli;
            int i = 0;
            for (double x : uaz) azi[x] = i++;
            i = 0;
            for (double x : upol) poli[x] = i++;
            for (size_t s = 0; s < val.size(); ++s)
                grid_vals[static_cast<size_t>(poli[pol[s]]) * n_az + azi[az[s]]] = val[s];
            return Anisotropy<3>::tabulated_sphere(n_az, n_pol, grid_vals);
        }
    }
    throw ConfigError("unknown anisotropy kind '" + toks[0] + "'");
}

template <int N>
ContactAngleField<N> build_beta(const RunConfig& cfg, const GridDomain<N>& g,
                                const Anisotropy<N>& phi) {
    Vec<N> en = Vec<N>::Zero();
    en[N - 1] = 1.0;
    const double phi_en = phi.value(en);
    const auto toks = detail::split_ws(cfg.beta_spec);
    if (toks.empty()) throw ConfigError("empty beta spec");
    if (toks[0] == "constant") {
        if (toks.size() != 2) throw ConfigError("beta constant needs a value");
        return ContactAngleField<N>::constant(g, std::stod(toks[1]), phi_en);
    }
    if (toks[0] == "table") {
        if (toks.size() != 2) throw ConfigError("beta table needs a file");
        std::ifstream in(toks[1]);
        if (!in) throw ConfigError("cannot open beta table " + toks[1]);
        std::vector<std::pair<double, double>> samples;
        double x, b;
        while (in >> x >> b) samples.emplace_back(x, b);
        if (samples.size() < 2) throw ConfigError("beta table needs >= 2 samples");
        std::sort(samples.begin(), samples.end());
        auto interp = [samples](const Vec<N>& p) {
            const double x0 = p[0];
            if (x0 <= samples.front().first) return samples.front().second;
            if (x0 >= samples.back().first) return samples.back().second;
            size_t j = 1;
            while (samples[j].first < x0) ++j;
            const double w =
                (x0 - samples[j - 1].first) / (samples[j].first - samples[j - 1].first);
            return (1 - w) * samples[j - 1].second + w * samples[j].second;
        };
        return ContactAngleField<N>::from_function(g, interp, phi_en);
    }
    throw ConfigError("unknown beta kind '" + toks[0] + "'");
}

template <int N>
ForcingField<N> build_forcing(const RunConfig& cfg, const GridDomain<N>& g) {
    const auto toks = detail::split_ws(cfg.f_spec);
    if (toks.empty() || toks[0] == "zero") return ForcingField<N>::zero();
    if (toks[0] == "constant") {
        if (toks.size() != 2) throw ConfigError("f constant needs a value");
        return ForcingField<N>::constant(std::stod(toks[1]));
    }
    if (toks[0] == "separable") {
        // separable poly:c0,c1,... [gaussian cx .. cz sigma amp offset | constant c]
        if (toks.size() < 3 || toks[1].rfind("poly:", 0) != 0)
            throw ConfigError("separable forcing: expected 'separable poly:c0,c1,... <profile>'");
        std::vector<double> coeffs;
        std::istringstream cs(toks[1].substr(5));
        std::string item;
        while (std::getline(cs, item, ',')) coeffs.push_back(std::stod(item));
        typename ForcingField<N>::SpatialProfile prof;
        if (toks[2] == "constant" && toks.size() == 4) {
            prof.offset = std::stod(toks[3]);
        } else if (toks[2] == "gaussian" && toks.size() == 3 + N + 3) {
            for (int i = 0; i < N; ++i) prof.center[i] = std::stod(toks[3 + i]);
            prof.sigma = std::stod(toks[3 + N]);
            prof.amp = std::stod(toks[4 + N]);
            prof.offset = std::stod(toks[5 + N]);
        } else {
            throw ConfigError("separable forcing: bad spatial profile");
        }
        return ForcingField<N>::separable(coeffs, prof);
    }
    if (toks[0] == "tabulated") {
        if (toks.size() != 2) throw ConfigError("tabulated forcing needs a file");
        std::ifstream in(toks[1]);
        if (!in) throw ConfigError("cannot open forcing table " + toks[1]);
        int nt = 0;
        in >> nt;
        std::vector<double> times(nt);
        for (auto& t : times) in >> t;
        std::vector<std::vector<double>> slices(nt, std::vector<double>(g.cell_count()));
        for (auto& s : slices)
            for (auto& v : s)
                if (!(in >> v)) throw ConfigError("forcing table truncated");
        return ForcingField<N>::tabulated(g, times, slices);
    }
    throw ConfigError("unknown forcing kind '" + toks[0] + "'");
}

template <int N>
BinarySet<N> build_initial(const RunConfig& cfg, const GridDomain<N>& g,
                           const Anisotropy<N>& phi,
                           std::shared_ptr<DualAnisotropy<N>> dual = nullptr) {
    const auto toks = detail::split_ws(cfg.initial_spec);
    if (toks.empty()) throw ConfigError("empty initial spec");
    auto need_dual = [&]() {
        if (!dual) dual = std::make_shared<DualAnisotropy<N>>(phi);
        return dual;
    };
    if (toks[0] == "half_disk") {
        if (toks.size() != 3) throw ConfigError("initial half_disk needs: cx R");
        const double cx = std::stod(toks[1]), r = std::stod(toks[2]);
        BinarySet<N> e(g);
        Vec<N> c = Vec<N>::Zero();
        c[0] = cx;
        for (std::int64_t f = 0; f < g.cell_count(); ++f)
            if ((g.cell_center(g.unflatten(f)) - c).norm() <= r) e.set(f, true);
        return e;
    }
    if (toks[0] == "wulff") {
        if (toks.size() != 2 + N) throw ConfigError("initial wulff needs: center... R");
        Vec<N> c;
        for (int i = 0; i < N; ++i) c[i] = std::stod(toks[1 + i]);
        WulffShape<N> w(need_dual(), c, std::stod(toks[1 + N]));
        return rasterize(w, g).set;
    }
    if (toks[0] == "winterbottom") {
        if (toks.size() < 3) throw ConfigError("initial winterbottom needs: beta0 R [cx] [tilted]");
        const double beta0 = std::stod(toks[1]), r = std::stod(toks[2]);
        Vec<N> base = Vec<N>::Zero();
        bool tilted = false;
        size_t next = 3;
        if (toks.size() > next && toks[next] != "tilted") base[0] = std::stod(toks[next++]);
        if (toks.size() > next && toks[next] == "tilted") tilted = true;
        WinterbottomShape<N> w(need_dual(), beta0, r, base, tilted);
        return rasterize(w, g).set;
    }
    if (toks[0] == "pgm") {
        if constexpr (N == 2) {
            if (toks.size() != 2) throw ConfigError("initial pgm needs a file");
            BinarySet<2> e = read_pgm(toks[1]);
            if (e.grid() != g)
                throw ConfigError("initial pgm grid does not match the configured grid");
            return e;
        } else {
            throw ConfigError("pgm initial data is 2-D only");
        }
    }
    throw ConfigError("unknown initial kind '" + toks[0] + "'");
}

}  // namespace dropflow
