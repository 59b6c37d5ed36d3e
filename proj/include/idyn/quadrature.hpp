#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "idyn/error.hpp"
#include "idyn/grid.hpp"

namespace idyn {

/// Nodes and nonnegative weights of a composite quadrature rule on [a, b].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

/// Composite trapezoidal rule on the grid nodes.
inline QuadratureRule trapezoid_rule(const Grid& grid) {
    const auto x = grid.nodes();
    const std::size_t m = x.size();
    QuadratureRule rule{std::vector<double>(x.begin(), x.end()), std::vector<double>(m, 0.0)};
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double half = 0.5 * (x[j + 1] - x[j]);
        rule.weights[j] += half;
        rule.weights[j + 1] += half;
    }
    return rule;
}

inline QuadratureRule trapezoid_rule(std::span<const double> nodes) {
    return trapezoid_rule(Grid(std::vector<double>(nodes.begin(), nodes.end())));
}

/// Sum_j w_j * values_j.
inline double integrate(std::span<const double> values, const QuadratureRule& rule) {
    if (values.size() != rule.size())
        throw InputError("integrate: " + std::to_string(values.size()) + " values for " +
                         std::to_string(rule.size()) + " quadrature nodes");
    double sum = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) sum += rule.weights[j] * values[j];
    return sum;
}

/// Integrate a callable sampled at the rule's nodes.
template <typename F>
    requires std::is_invocable_r_v<double, F, double>
double integrate(F&& f, const QuadratureRule& rule) {
    double sum = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j) sum += rule.weights[j] * f(rule.nodes[j]);
    return sum;
}

} // namespace idyn
