#pragma once

// Snapshot and metrics persistence.
//
// 2-D droplets: binary PGM (P5), one byte per cell, 255 = occupied, row 0 at
// the top of the box; grid metadata in a comment line.
// 3-D droplets: flat little-endian bitfield with a 32-byte header
// (magic "DFBF", u32 n, u32 counts[3], f64 h, zero padding).
// Metrics: CSV with a versioned header comment.

#include "dropflow/stepper.hpp"
#include "dropflow/verify.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>

namespace dropflow {

inline void write_pgm(const std::filesystem::path& path, const BinarySet<2>& e) {
    const auto& g = e.grid();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "P5\n# dropflow lower " << std::setprecision(17) << g.lower[0] << " " << g.lower[1]
        << " h " << g.h << "\n"
        << g.counts[0] << " " << g.counts[1] << "\n255\n";
    std::vector<unsigned char> row(g.counts[0]);
    for (int j = g.counts[1] - 1; j >= 0; --j) {
        for (int i = 0; i < g.counts[0]; ++i) row[i] = e.contains({i, j}) ? 255 : 0;
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
}

inline BinarySet<2> read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError(path.string() + ": not a P5 PGM");
    double lx = 0, ly = 0, h = 0;
    int w = -1, ht = -1, maxval = -1;
    while (ht < 0 || maxval < 0) {
        in >> std::ws;
        if (in.peek() == '#') {
            std::string line;
            std::getline(in, line);
            std::istringstream ls(line.substr(1));
            std::string tag;
            ls >> tag;
            if (tag == "dropflow") {
                std::string kw;
                ls >> kw >> lx >> ly >> kw >> h;
            }
            continue;
        }
        if (w < 0) in >> w;
        else if (ht < 0) in >> ht;
        else in >> maxval;
    }
    in.get();  // single whitespace after maxval
    if (h <= 0) throw IoError(path.string() + ": missing dropflow grid metadata");
    auto g = GridDomain<2>::make(Vec<2>(lx, ly), Vec<2>(lx + w * h, ly + ht * h), h);
    BinarySet<2> e(g);
    std::vector<unsigned char> row(w);
    for (int j = ht - 1; j >= 0; --j) {
        in.read(reinterpret_cast<char*>(row.data()), row.size());
        if (!in) throw IoError(path.string() + ": truncated pixel data");
        for (int i = 0; i < w; ++i)
            if (row[i] >= 128) e.set({i, j}, true);
    }
    return e;
}

inline void write_bitfield3(const std::filesystem::path& path, const BinarySet<3>& e) {
    const auto& g = e.grid();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    char header[32] = {0};
    std::memcpy(header, "DFBF", 4);
    const std::uint32_t n = 3;
    std::memcpy(header + 4, &n, 4);
    for (int i = 0; i < 3; ++i) {
        const std::uint32_t c = g.counts[i];
        std::memcpy(header + 8 + 4 * i, &c, 4);
    }
    std::memcpy(header + 20, &g.h, 8);
    out.write(header, 32);
    const std::int64_t cells = g.cell_count();
    std::vector<unsigned char> bytes((cells + 7) / 8, 0);
    for (std::int64_t c = 0; c < cells; ++c)
        if (e.contains(c)) bytes[c >> 3] |= static_cast<unsigned char>(1u << (c & 7));
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

inline BinarySet<3> read_bitfield3(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char header[32];
    in.read(header, 32);
    if (!in || std::memcmp(header, "DFBF", 4) != 0)
        throw IoError(path.string() + ": bad bitfield header");
    std::uint32_t n, counts[3];
    double h;
    std::memcpy(&n, header + 4, 4);
    std::memcpy(counts, header + 8, 12);
    std::memcpy(&h, header + 20, 8);
    if (n != 3) throw DimensionError(path.string() + ": expected n = 3 bitfield");
    auto g = GridDomain<3>::make(Vec<3>::Zero(),
                                 Vec<3>(counts[0] * h, counts[1] * h, counts[2] * h), h);
    BinarySet<3> e(g);
    const std::int64_t cells = g.cell_count();
    std::vector<unsigned char> bytes((cells + 7) / 8);
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) throw IoError(path.string() + ": truncated bitfield");
    for (std::int64_t c = 0; c < cells; ++c)
        if (bytes[c >> 3] & (1u << (c & 7))) e.set(c, true);
    return e;
}

// ---------------------------------------------------------------------------

inline constexpr const char* kMetricsColumns =
    "k,t,volume,perimeter_phi,adhesion,capillary,dissipation,forcing,mincut_value,ms";

template <int N>
void write_metrics_csv(const std::filesystem::path& path, const FlatFlowState<N>& state) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "# dropflow metrics v1\n" << kMetricsColumns << "\n";
    out << std::setprecision(17);
    for (const auto& s : state.steps)
        out << s.k << "," << s.t << "," << s.volume << "," << s.perimeter_phi << ","
            << s.adhesion << "," << s.capillary << "," << s.dissipation << "," << s.forcing
            << "," << s.mincut_value << "," << s.ms << "\n";
}

inline void write_curve_csv(const std::filesystem::path& path, const SmoothCurve& curve) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "# t = " << std::setprecision(17) << curve.time << "\n";
    out << "x,y\n";
    for (const auto& p : curve.nodes) out << p[0] << "," << p[1] << "\n";
}

inline SmoothCurve read_curve_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    SmoothCurve c;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) c.time = std::stod(line.substr(eq + 1));
            continue;
        }
        if (line[0] == 'x') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        c.nodes.push_back(
            Vec<2>(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))));
    }
    return c;
}

inline void write_check_reports_csv(const std::filesystem::path& path,
                                    const std::vector<CheckReport>& reports) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "check,status,metric,threshold\n" << std::setprecision(17);
    for (const auto& r : reports) {
        const char* status = r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL");
        if (r.metrics.empty()) out << r.name << "," << status << ",,\n";
        for (const auto& [k, v] : r.metrics) out << r.name << "," << status << "," << k << "=" << v << ",\n";
    }
}

inline std::string snapshot_name(double tau, int k) {
    std::ostringstream os;
    os << "E_tau" << std::setprecision(12) << tau << "_k" << k << ".pgm";
    return os.str();
}

}  // namespace dropflow
