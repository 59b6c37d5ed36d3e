#pragma once

// Randomised property checks of the discrete operators: stability of the
// projections, linear growth and Lipschitz bounds, order preservation,
// positivity and positive invariance of absorbing balls.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "idyn/analysis.hpp"
#include "idyn/dynamics.hpp"
#include "idyn/model.hpp"
#include "idyn/splines.hpp"

namespace idyn {

struct CheckResult {
    std::string name;
    std::size_t trials = 0;
    std::size_t failures = 0;
    /// Largest observed lhs / rhs (<= 1 means the inequality held everywhere).
    double worst_ratio = 0.0;

    [[nodiscard]] bool passed() const noexcept { return trials > 0 && failures == 0; }
};

namespace detail {

inline void record(CheckResult& r, double lhs, double rhs, double rel_tol) {
    ++r.trials;
    if (rhs > 0.0) r.worst_ratio = std::max(r.worst_ratio, lhs / rhs);
    else if (lhs > 0.0) r.worst_ratio = std::numeric_limits<double>::infinity();
    if (lhs > rhs * (1.0 + rel_tol) + 1e-300) ++r.failures;
}

/// Random state with coefficients in [lo, hi]; for degree 1 these are the nodal values.
inline StateFunction random_state(const Discretization& disc, Time t, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> c(disc.space->dim());
    for (auto& v : c) v = dist(rng);
    return {SplineFunction(disc.space, std::move(c)), t};
}

inline double nodal_distance(const StateFunction& u, const StateFunction& v) {
    double d = 0.0;
    for (std::size_t j = 0; j < u.values().size(); ++j) d = std::max(d, std::abs(u.values()[j] - v.values()[j]));
    return d;
}

inline std::vector<double> sample_points(const Discretization& disc) {
    return equispaced(disc.habitat(), default_sample_count(disc.intervals()));
}

inline double sampled_norm(const StateFunction& u, const std::vector<double>& pts) {
    double m = 0.0;
    for (double x : pts) m = std::max(m, std::abs(u(x)));
    return m;
}

} // namespace detail

/// sum_j beta_j(x) = 1 on sampled points.
inline CheckResult check_partition_of_unity(const SplineSpace& space, std::size_t samples = 1001) {
    CheckResult r{"partition_of_unity_l" + std::to_string(space.degree())};
    for (double x : equispaced(space.habitat(), samples)) {
        const LocalBasis lb = space.local_basis(x);
        double s = 0.0;
        for (int k = 0; k <= space.degree(); ++k) s += lb.values[static_cast<std::size_t>(k)];
        ++r.trials;
        r.worst_ratio = std::max(r.worst_ratio, std::abs(s - 1.0));
        if (std::abs(s - 1.0) > 1e-10) ++r.failures;
    }
    return r;
}

/// Empirical ||pi_n|| never exceeds p (+ 1e-9).
inline CheckResult check_projection_stability(const std::shared_ptr<const SplineSpace>& space, std::size_t trials,
                                              std::uint64_t seed) {
    CheckResult r{"projection_stability_l" + std::to_string(space->degree())};
    const double p = space->stability_constant();
    const auto samples = default_sample_count(space->intervals());
    for (std::size_t i = 0; i < trials; ++i) {
        const double est = lebesgue_estimate(space, 1, samples, seed + i);
        ++r.trials;
        r.worst_ratio = std::max(r.worst_ratio, est / p);
        if (est > p + 1e-9) ++r.failures;
    }
    return r;
}

/// ||F^n_t(u)|| <= p (b_t + a_t ||u||) for random nonnegative u.
inline CheckResult check_boundedness(const IdeModel& model, const Discretization& disc, Time t, double radius,
                                     std::size_t trials, std::uint64_t seed, double rel_tol = 1e-8) {
    CheckResult r{"boundedness"};
    std::mt19937_64 rng(seed);
    const auto grid = disc.sup_grid();
    const double p = disc.p();
    const auto zeta = default_zeta(model, p, t, t, grid);
    const GrowthBounds gb = linear_growth_bounds(model, t, zeta, grid);
    const auto pts = detail::sample_points(disc);
    for (std::size_t i = 0; i < trials; ++i) {
        const StateFunction u = detail::random_state(disc, t, 0.0, radius, rng);
        const StateFunction fu = step(model, disc, t, u);
        detail::record(r, detail::sampled_norm(fu, pts), p * (gb.b_t + gb.a_t * u.nodal_norm()), rel_tol);
    }
    return r;
}

/// ||F^n_t(u) - F^n_t(v)|| <= p ell_t(r) ||u - v|| on the ball of radius r.
inline CheckResult check_lipschitz(const IdeModel& model, const Discretization& disc, Time t, double radius,
                                   std::size_t trials, std::uint64_t seed, double rel_tol = 1e-8) {
    CheckResult r{"lipschitz"};
    std::mt19937_64 rng(seed);
    const double bound = disc.p() * lipschitz_bound(model, t, radius, disc.sup_grid());
    const auto pts = detail::sample_points(disc);
    std::uniform_real_distribution<double> scale(1e-3, 1.0);
    for (std::size_t i = 0; i < trials; ++i) {
        const StateFunction u = detail::random_state(disc, t, 0.0, radius, rng);
        // nearby and far-apart pairs
        const double s = scale(rng);
        std::vector<double> c(u.spline().coefficients().begin(), u.spline().coefficients().end());
        std::uniform_real_distribution<double> jitter(-s * radius, s * radius);
        for (auto& x : c) x = std::clamp(x + jitter(rng), 0.0, radius);
        const StateFunction v{SplineFunction(disc.space, std::move(c)), t};
        const double lhs = sup_distance(step(model, disc, t, u), step(model, disc, t, v), pts);
        detail::record(r, lhs, bound * detail::nodal_distance(u, v), rel_tol);
    }
    return r;
}

/// u <= v at the nodes implies F^n_t(u) <= F^n_t(v) at the nodes.
inline CheckResult check_order_preservation(const IdeModel& model, const Discretization& disc, Time t, double radius,
                                            std::size_t trials, std::uint64_t seed) {
    CheckResult r{"order_preservation"};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < trials; ++i) {
        const StateFunction u = detail::random_state(disc, t, 0.0, radius, rng);
        std::vector<double> c(u.spline().coefficients().begin(), u.spline().coefficients().end());
        for (auto& x : c) x += radius * unit(rng) * unit(rng);
        const StateFunction v{SplineFunction(disc.space, std::move(c)), t};
        const StateFunction fu = step(model, disc, t, u), fv = step(model, disc, t, v);
        double worst = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < fu.values().size(); ++j) {
            worst = std::max(worst, fu.values()[j] - fv.values()[j]);
            scale = std::max(scale, std::abs(fv.values()[j]));
        }
        ++r.trials;
        r.worst_ratio = std::max(r.worst_ratio, worst / std::max(scale, 1e-300));
        if (worst > 1e-13 * std::max(scale, 1.0)) ++r.failures;
    }
    return r;
}

/// Nonnegative input gives nonnegative nodal output.
inline CheckResult check_positivity(const IdeModel& model, const Discretization& disc, Time t, double radius,
                                    std::size_t trials, std::uint64_t seed) {
    CheckResult r{"positivity"};
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < trials; ++i) {
        const StateFunction fu = step(model, disc, t, detail::random_state(disc, t, 0.0, radius, rng));
        ++r.trials;
        const double lowest = *std::min_element(fu.values().begin(), fu.values().end());
        if (lowest < 0.0) {
            ++r.failures;
            r.worst_ratio = std::max(r.worst_ratio, -lowest);
        }
    }
    return r;
}

/// Positive invariance of the absorbing ball: states with ||u|| = rho R_tau
/// (or anywhere up to `start_factor` rho R_tau when a_t = 0) are mapped into
/// the ball of radius rho R_{tau+1}.
inline CheckResult check_absorbing_invariance(const IdeModel& model, const Discretization& disc, Time tau,
                                              std::size_t trials, std::uint64_t seed, double rho = 1.1,
                                              double start_factor = 1.0, double rel_tol = 1e-8) {
    CheckResult r{"absorbing_invariance"};
    std::mt19937_64 rng(seed);
    const auto grid = disc.sup_grid();
    const double p = disc.p();
    const auto zeta = default_zeta(model, p, tau - 64, tau, grid);
    const auto coeffs = growth_coefficients(model, zeta, grid);
    RadiusOptions ro;
    ro.rho = rho;
    const AbsorbingRadius now = absorbing_radius(coeffs, p, Direction::pullback, tau, 1e-12, ro);
    const AbsorbingRadius next = absorbing_radius(coeffs, p, Direction::pullback, tau + 1, 1e-12, ro);
    const auto pts = detail::sample_points(disc);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < trials; ++i) {
        const double target = now.ball() * (start_factor > 1.0 ? start_factor * unit(rng) : 1.0);
        StateFunction u = detail::random_state(disc, tau, 0.0, 1.0, rng);
        std::vector<double> c(u.spline().coefficients().begin(), u.spline().coefficients().end());
        const double m = std::max(u.nodal_norm(), 1e-300);
        for (auto& x : c) x *= target / m;
        // pin one node to the boundary of the ball
        c[std::uniform_int_distribution<std::size_t>(0, c.size() - 1)(rng)] = target;
        const StateFunction boundary{SplineFunction(disc.space, std::move(c)), tau};
        detail::record(r, detail::sampled_norm(step(model, disc, tau, boundary), pts), next.ball(), rel_tol);
    }
    return r;
}

} // namespace idyn
