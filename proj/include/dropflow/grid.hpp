#pragma once

// Uniform-grid discretization of a computational box inside the upper
// half-space; droplets are binary cell fields. Cells outside the box are
// vacuum, cells below the floor do not exist.

#include "dropflow/common.hpp"

#include <bit>
#include <cstring>
#include <functional>
#include <vector>

namespace dropflow {

template <int N>
struct GridDomain {
    Vec<N> lower = Vec<N>::Zero();
    double h = 1.0;
    std::array<int, N> counts{};

    static GridDomain make(const Vec<N>& lower, const Vec<N>& upper, double h) {
        if (!(h > 0)) throw ConfigError("grid: h must be positive");
        if (std::abs(lower[N - 1]) > 1e-12 * h)
            throw ConfigError("grid: the box floor must sit on the boundary plane");
        GridDomain g;
        g.lower = lower;
        g.lower[N - 1] = 0.0;
        g.h = h;
        for (int i = 0; i < N; ++i) {
            const double ext = upper[i] - lower[i];
            if (!(ext > 0)) throw ConfigError("grid: upper must exceed lower");
            g.counts[i] = static_cast<int>(std::llround(ext / h));
            if (g.counts[i] < 1) throw ConfigError("grid: box thinner than one cell");
            if (std::abs(g.counts[i] * h - ext) > 1e-9 * ext)
                throw ConfigError("grid: box extents must be integer multiples of h");
        }
        return g;
    }

    Vec<N> upper() const {
        Vec<N> u = lower;
        for (int i = 0; i < N; ++i) u[i] += counts[i] * h;
        return u;
    }

    std::int64_t cell_count() const {
        std::int64_t n = 1;
        for (int i = 0; i < N; ++i) n *= counts[i];
        return n;
    }

    std::int64_t flatten(const std::array<int, N>& idx) const {
        std::int64_t f = 0;
        for (int i = N - 1; i >= 0; --i) f = f * counts[i] + idx[i];
        return f;
    }

    std::array<int, N> unflatten(std::int64_t f) const {
        std::array<int, N> idx{};
        for (int i = 0; i < N; ++i) {
            idx[i] = static_cast<int>(f % counts[i]);
            f /= counts[i];
        }
        return idx;
    }

    bool in_bounds(const std::array<int, N>& idx) const {
        for (int i = 0; i < N; ++i)
            if (idx[i] < 0 || idx[i] >= counts[i]) return false;
        return true;
    }

    Vec<N> cell_center(const std::array<int, N>& idx) const {
        Vec<N> x = lower;
        for (int i = 0; i < N; ++i) x[i] += (idx[i] + 0.5) * h;
        return x;
    }

    double cell_volume() const { return std::pow(h, N); }
    double facet_area() const { return std::pow(h, N - 1); }

    bool operator==(const GridDomain& o) const {
        return counts == o.counts && h == o.h && (lower - o.lower).norm() < 1e-12;
    }
    bool operator!=(const GridDomain& o) const { return !(*this == o); }
};

template <int N>
class BinarySet {
public:
    BinarySet() = default;
    explicit BinarySet(const GridDomain<N>& grid)
        : grid_(grid), words_((grid.cell_count() + 63) / 64, 0ull) {}

    const GridDomain<N>& grid() const { return grid_; }

    bool contains(std::int64_t flat) const {
        return (words_[flat >> 6] >> (flat & 63)) & 1ull;
    }
    bool contains(const std::array<int, N>& idx) const { return contains(grid_.flatten(idx)); }

    void set(std::int64_t flat, bool v) {
        const std::uint64_t m = 1ull << (flat & 63);
        if (v) words_[flat >> 6] |= m;
        else words_[flat >> 6] &= ~m;
    }
    void set(const std::array<int, N>& idx, bool v) { set(grid_.flatten(idx), v); }

    std::int64_t cell_count() const {
        std::int64_t c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }

    double volume() const { return static_cast<double>(cell_count()) * grid_.cell_volume(); }
    bool empty() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }
    bool full() const { return cell_count() == grid_.cell_count(); }

    void for_each_cell(const std::function<void(std::int64_t)>& fn) const {
        for (size_t wi = 0; wi < words_.size(); ++wi) {
            std::uint64_t w = words_[wi];
            while (w) {
                const int b = std::countr_zero(w);
                fn(static_cast<std::int64_t>(wi) * 64 + b);
                w &= w - 1;
            }
        }
    }

    bool subset_of(const BinarySet& other) const {
        require_same_grid(other);
        for (size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~other.words_[i]) return false;
        return true;
    }

    BinarySet operator&(const BinarySet& o) const { return combine(o, [](auto a, auto b) { return a & b; }); }
    BinarySet operator|(const BinarySet& o) const { return combine(o, [](auto a, auto b) { return a | b; }); }
    BinarySet operator^(const BinarySet& o) const { return combine(o, [](auto a, auto b) { return a ^ b; }); }
    BinarySet operator-(const BinarySet& o) const { return combine(o, [](auto a, auto b) { return a & ~b; }); }

    bool operator==(const BinarySet& o) const {
        return grid_ == o.grid_ && words_ == o.words_;
    }

    void require_same_grid(const BinarySet& o) const {
        if (grid_ != o.grid_) throw GridMismatchError("binary sets live on different grids");
    }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

private:
    template <class Op>
    BinarySet combine(const BinarySet& o, Op op) const {
        require_same_grid(o);
        BinarySet out(grid_);
        for (size_t i = 0; i < words_.size(); ++i) out.words_[i] = op(words_[i], o.words_[i]);
        // mask tail bits beyond cell_count
        const std::int64_t n = grid_.cell_count();
        if (n & 63) out.words_.back() &= (1ull << (n & 63)) - 1ull;
        return out;
    }

    GridDomain<N> grid_;
    std::vector<std::uint64_t> words_;
};

// |E Delta F| on a common grid.
template <int N>
double symmetric_difference_measure(const BinarySet<N>& e, const BinarySet<N>& f) {
    e.require_same_grid(f);
    std::int64_t c = 0;
    for (size_t i = 0; i < e.words().size(); ++i)
        c += std::popcount(e.words()[i] ^ f.words()[i]);
    return static_cast<double>(c) * e.grid().cell_volume();
}

// True when any occupied cell lies within `margin` cells of a lateral or top
// box face; the floor does not count. Used for the truncation guard.
template <int N>
bool near_box_faces(const BinarySet<N>& e, int margin) {
    const auto& g = e.grid();
    bool hit = false;
    e.for_each_cell([&](std::int64_t flat) {
        if (hit) return;
        const auto idx = g.unflatten(flat);
        for (int i = 0; i < N; ++i) {
            if (idx[i] >= g.counts[i] - margin) { hit = true; return; }
            if (i < N - 1 && idx[i] < margin) { hit = true; return; }
        }
    });
    return hit;
}

}  // namespace dropflow
