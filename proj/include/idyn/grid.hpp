#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "idyn/error.hpp"

namespace idyn {

/// Compact habitat [a, b].
struct Habitat {
    double a = 0.0;
    double b = 1.0;

    [[nodiscard]] double length() const noexcept { return b - a; }
    [[nodiscard]] bool contains(double x) const noexcept { return x >= a && x <= b; }

    void validate() const {
        if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
            throw InputError("habitat requires finite a < b, got [" + std::to_string(a) + ", " +
                             std::to_string(b) + "]");
    }
};

/// Strictly increasing partition a = x_0 < x_1 < ... < x_n = b.
class Grid {
public:
    explicit Grid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
        if (nodes_.size() < 2) throw InputError("grid needs at least 2 nodes");
        h_min_ = std::numeric_limits<double>::infinity();
        h_max_ = 0.0;
        for (std::size_t j = 0; j + 1 < nodes_.size(); ++j) {
            const double h = nodes_[j + 1] - nodes_[j];
            if (!(h > 0.0) || !std::isfinite(h))
                throw InputError("grid nodes must be finite and strictly increasing (index " +
                                 std::to_string(j) + ")");
            h_min_ = std::min(h_min_, h);
            h_max_ = std::max(h_max_, h);
        }
    }

    /// x_j = a + j (b - a) / n; the endpoint is set exactly to b.
    static Grid uniform(const Habitat& habitat, std::size_t n) {
        habitat.validate();
        if (n == 0) throw InputError("uniform grid needs n >= 1 subintervals");
        std::vector<double> x(n + 1);
        const double h = habitat.length() / static_cast<double>(n);
        for (std::size_t j = 0; j <= n; ++j) x[j] = habitat.a + static_cast<double>(j) * h;
        x[n] = habitat.b;
        Grid g(std::move(x));
        g.uniform_ = true;
        return g;
    }

    [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t intervals() const noexcept { return nodes_.size() - 1; }
    [[nodiscard]] double a() const noexcept { return nodes_.front(); }
    [[nodiscard]] double b() const noexcept { return nodes_.back(); }
    [[nodiscard]] Habitat habitat() const noexcept { return {a(), b()}; }
    [[nodiscard]] double h_max() const noexcept { return h_max_; }
    [[nodiscard]] double h_min() const noexcept { return h_min_; }
    [[nodiscard]] bool is_uniform() const noexcept { return uniform_; }

    /// Index i of the interval [x_i, x_{i+1}] containing x; b maps to the last interval.
    [[nodiscard]] std::size_t interval_of(double x) const noexcept {
        if (x <= nodes_.front()) return 0;
        if (x >= nodes_.back()) return intervals() - 1;
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
        return static_cast<std::size_t>(it - nodes_.begin()) - 1;
    }

    friend bool operator==(const Grid& l, const Grid& r) { return l.nodes_ == r.nodes_; }

private:
    std::vector<double> nodes_;
    double h_min_ = 0.0;
    double h_max_ = 0.0;
    bool uniform_ = false;
};

/// `count` equispaced points covering [a, b] including both endpoints.
inline std::vector<double> equispaced(const Habitat& habitat, std::size_t count) {
    if (count < 2) throw InputError("equispaced sampling needs at least 2 points");
    std::vector<double> x(count);
    const double h = habitat.length() / static_cast<double>(count - 1);
    for (std::size_t j = 0; j < count; ++j) x[j] = habitat.a + static_cast<double>(j) * h;
    x.back() = habitat.b;
    return x;
}

} // namespace idyn
