#pragma once

// Integrodifference right-hand sides of Hammerstein type
//
//   u_{t+1}(x) = int_a^b k_t(x, y) g_t(y, u_t(y)) dy  [+ b(x)]
//
// together with the linear growth and Lipschitz coefficients used for
// absorbing-set radii and error propagation bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "idyn/error.hpp"
#include "idyn/grid.hpp"
#include "idyn/quadrature.hpp"

namespace idyn {

using Time = std::int64_t;
using TimeFn = std::function<double(Time)>;
using SpaceFn = std::function<double(double)>;
using SpaceTimeFn = std::function<double(Time, double)>;

/// Integer time interval; defaults to all of Z.
struct TimeDomain {
    Time first = std::numeric_limits<Time>::min();
    Time last = std::numeric_limits<Time>::max();

    [[nodiscard]] bool contains(Time t) const noexcept { return t >= first && t <= last; }
};

/// k_t(x,y) = delta_t / 2 * exp(-delta_t |x - y|)
struct LaplaceKernel {
    TimeFn dispersal;
};

/// Arbitrary nonnegative kernel. `k0` is sup_x int |k(x,y)| dy when known.
struct CustomKernel {
    std::function<double(Time, double, double)> eval;
    std::optional<double> k0;
};

using KernelSpec = std::variant<LaplaceKernel, CustomKernel>;

/// g_t(y,z) = gamma_t(y) z / (1 + z^alpha)
struct BevertonHolt {
    double alpha = 1.0;
    SpaceTimeFn gamma;
};

/// g_t(y,z) = gamma_t z exp(-z)
struct Ricker {
    TimeFn gamma;
};

using GrowthSpec = std::variant<BevertonHolt, Ricker>;

struct IdeModel {
    Habitat habitat;
    KernelSpec kernel;
    GrowthSpec growth;
    std::optional<SpaceFn> inhomogeneity;
    TimeDomain time_domain;

    [[nodiscard]] bool is_ricker() const noexcept { return std::holds_alternative<Ricker>(growth); }

    void validate() const {
        habitat.validate();
        if (const auto* bh = std::get_if<BevertonHolt>(&growth)) {
            if (!(bh->alpha > 0.0) || !std::isfinite(bh->alpha))
                throw InputError("Beverton-Holt exponent alpha must be positive");
            if (!bh->gamma) throw InputError("Beverton-Holt growth rate gamma is missing");
        } else {
            if (!std::get<Ricker>(growth).gamma) throw InputError("Ricker growth rate gamma is missing");
            if (!inhomogeneity) throw InputError("Ricker model requires an inhomogeneity b(x) (possibly zero)");
        }
        if (const auto* lap = std::get_if<LaplaceKernel>(&kernel)) {
            if (!lap->dispersal) throw InputError("Laplace kernel dispersal rate is missing");
        } else if (!std::get<CustomKernel>(kernel).eval) {
            throw InputError("custom kernel has no evaluation function");
        }
        if (time_domain.first > time_domain.last) throw InputError("empty time domain");
    }
};

/// Linear growth bound |f_t(x,y,z)| <= beta_t + alpha_t |z| after integration
/// over y and maximisation over x, plus the Lipschitz bound on balls.
struct GrowthBounds {
    double a_t = 0.0;
    double b_t = 0.0;
    std::function<double(double)> ell;
};

namespace detail {

inline void check_point(const Habitat& h, double x, const char* name) {
    // A relative slack absorbs grid endpoints assembled in floating point.
    const double slack = 1e-12 * std::max(1.0, std::abs(h.a) + std::abs(h.b));
    if (!(x >= h.a - slack && x <= h.b + slack))
        throw InputError(std::string(name) + " = " + std::to_string(x) + " lies outside the habitat [" +
                         std::to_string(h.a) + ", " + std::to_string(h.b) + "]");
}

inline double checked_rate(double delta, Time t) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw InputError("Laplace dispersal rate must be positive (t = " + std::to_string(t) + ")");
    return delta;
}

} // namespace detail

/// Kernel frozen at one time step, for tight inner loops.
class KernelSlice {
public:
    KernelSlice(const KernelSpec& kernel, Time t) : t_(t) {
        if (const auto* lap = std::get_if<LaplaceKernel>(&kernel)) {
            delta_ = detail::checked_rate(lap->dispersal(t), t);
        } else {
            custom_ = &std::get<CustomKernel>(kernel);
        }
    }

    [[nodiscard]] double operator()(double x, double y) const {
        if (custom_ == nullptr) return 0.5 * delta_ * std::exp(-delta_ * std::abs(x - y));
        return custom_->eval(t_, x, y);
    }

    /// delta_t for the Laplace kernel, empty otherwise.
    [[nodiscard]] std::optional<double> laplace_rate() const {
        if (custom_ == nullptr) return delta_;
        return std::nullopt;
    }

private:
    Time t_;
    double delta_ = 0.0;
    const CustomKernel* custom_ = nullptr;
};

inline double kernel_eval(const IdeModel& model, Time t, double x, double y) {
    detail::check_point(model.habitat, x, "x");
    detail::check_point(model.habitat, y, "y");
    const double k = KernelSlice(model.kernel, t)(x, y);
    if (!(k >= 0.0)) throw InputError("kernel value is negative or NaN at t = " + std::to_string(t));
    return k;
}

/// Growth rate gamma_t(y) (Ricker rates do not depend on y).
inline double growth_rate(const GrowthSpec& growth, Time t, double y) {
    const double gamma = std::visit(
        [&](const auto& g) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(g)>, BevertonHolt>)
                return g.gamma(t, y);
            else
                return g.gamma(t);
        },
        growth);
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw InputError("growth rate must be finite and nonnegative (t = " + std::to_string(t) + ")");
    return gamma;
}

/// z / (1 + z^alpha) without the rate factor.
inline double beverton_holt_shape(double alpha, double z) { return z / (1.0 + std::pow(z, alpha)); }

/// z exp(-z) without the rate factor.
inline double ricker_shape(double z) { return z * std::exp(-z); }

inline double growth_eval(const GrowthSpec& growth, Time t, double y, double z) {
    if (!(z >= 0.0)) throw InputError("growth_eval: state value " + std::to_string(z) + " is negative");
    const double gamma = growth_rate(growth, t, y);
    if (const auto* bh = std::get_if<BevertonHolt>(&growth)) return gamma * beverton_holt_shape(bh->alpha, z);
    return gamma * ricker_shape(z);
}

/// sup_{z >= 0} z / (1 + z^alpha) = (1/alpha) (alpha - 1)^{1 - 1/alpha} for alpha >= 1.
inline double beverton_holt_sup(double alpha) {
    if (alpha < 1.0) return std::numeric_limits<double>::infinity();
    if (alpha == 1.0) return 1.0;
    return std::pow(alpha - 1.0, 1.0 - 1.0 / alpha) / alpha;
}

/// Tangent of z / (1 + z^alpha) at zeta, written as slope * z + offset.
struct Tangent {
    double slope;
    double offset;
};

inline Tangent beverton_holt_tangent(double alpha, double zeta) {
    if (!(zeta > 0.0)) throw InputError("tangent point zeta must be positive");
    const double za = std::pow(zeta, alpha);
    const double denom = (1.0 + za) * (1.0 + za);
    return {(1.0 + (1.0 - alpha) * za) / denom, alpha * zeta * za / denom};
}

/// Where sup_x int(...) dy is evaluated: a quadrature rule in y and
/// a finite set of x locations standing in for the supremum.
struct SupIntegralGrid {
    QuadratureRule rule;
    std::vector<double> eval_points;

    /// Trapezoid rule with `n` intervals, sup over 4 n + 1 points.
    static SupIntegralGrid uniform(const Habitat& habitat, std::size_t n = 256) {
        return {trapezoid_rule(Grid::uniform(habitat, n)), equispaced(habitat, 4 * n + 1)};
    }
};

/// max_x sum_q w_q |k_t(x, y_q)| weight(y_q).
template <typename Weight>
double weighted_kernel_mass(const IdeModel& model, Time t, const SupIntegralGrid& grid, Weight&& weight) {
    const KernelSlice kernel(model.kernel, t);
    std::vector<double> wy(grid.rule.size());
    for (std::size_t q = 0; q < wy.size(); ++q) wy[q] = grid.rule.weights[q] * weight(grid.rule.nodes[q]);
    double best = 0.0;
    for (double x : grid.eval_points) {
        double s = 0.0;
        for (std::size_t q = 0; q < wy.size(); ++q) s += std::abs(kernel(x, grid.rule.nodes[q])) * wy[q];
        best = std::max(best, s);
    }
    return best;
}

/// k0 = sup_x int |k_t(x,y)| dy (a supplied value wins for custom kernels).
inline double kernel_mass(const IdeModel& model, Time t, const SupIntegralGrid& grid) {
    if (const auto* custom = std::get_if<CustomKernel>(&model.kernel); custom && custom->k0) return *custom->k0;
    return weighted_kernel_mass(model, t, grid, [](double) { return 1.0; });
}

/// sup_x int k_t(x,y) gamma_t(y) dy; for Ricker this is gamma_t k0.
inline double rate_kernel_mass(const IdeModel& model, Time t, const SupIntegralGrid& grid) {
    if (std::holds_alternative<BevertonHolt>(model.growth))
        return weighted_kernel_mass(model, t, grid, [&](double y) { return growth_rate(model.growth, t, y); });
    return growth_rate(model.growth, t, model.habitat.a) * kernel_mass(model, t, grid);
}

inline double inhomogeneity_sup(const IdeModel& model, const SupIntegralGrid& grid) {
    if (!model.inhomogeneity) return 0.0;
    double s = 0.0;
    for (double x : grid.eval_points) s = std::max(s, std::abs((*model.inhomogeneity)(x)));
    return s;
}

/// sup_{z >= 0} |g'(z)| for the Ricker shape z e^{-z}, attained at z = 0.
/// (The smaller constant e^{-2} only holds on z >= 2.)
inline constexpr double ricker_lipschitz = 1.0;

/// ell_t(r): both growth shapes have sup |g'| = 1 (attained at z = 0), so the
/// constant is sup_x int k gamma dy for BH and gamma_t k0 for Ricker,
/// independent of r.
inline double lipschitz_bound(const IdeModel& model, Time t, double r, const SupIntegralGrid& grid) {
    if (!(r > 0.0)) throw InputError("lipschitz_bound: radius must be positive");
    const double mass = rate_kernel_mass(model, t, grid);
    if (model.is_ricker()) return mass * ricker_lipschitz;
    return mass;
}

inline bool needs_tangent(const IdeModel& model) {
    const auto* bh = std::get_if<BevertonHolt>(&model.growth);
    return bh != nullptr && bh->alpha < 1.0;
}

/// (a_t, b_t) for the Beverton-Holt and Ricker right-hand sides. `zeta` is the
/// tangent point and is only used for Beverton-Holt with alpha < 1.
inline GrowthBounds linear_growth_bounds(const IdeModel& model, Time t, std::optional<double> zeta,
                                         const SupIntegralGrid& grid) {
    const double mass = rate_kernel_mass(model, t, grid);
    GrowthBounds out;
    if (const auto* bh = std::get_if<BevertonHolt>(&model.growth)) {
        if (bh->alpha < 1.0) {
            if (!zeta || !(*zeta > 0.0))
                throw InputError("Beverton-Holt with alpha < 1 needs a positive tangent point zeta");
            const Tangent tan = beverton_holt_tangent(bh->alpha, *zeta);
            out.a_t = tan.slope * mass;
            out.b_t = tan.offset * mass;
        } else {
            out.a_t = 0.0;
            out.b_t = beverton_holt_sup(bh->alpha) * mass;
        }
        out.ell = [mass](double) { return mass; };
    } else {
        out.a_t = 0.0;
        out.b_t = mass / std::numbers::e + inhomogeneity_sup(model, grid);
        const double lip = mass * ricker_lipschitz;
        out.ell = [lip](double) { return lip; };
    }
    return out;
}

/// Tangent point for alpha < 1 minimising the constant-coefficient radius
/// p b / (1 - p a) over a logarithmic grid zeta = 2^{k/8}, subject to p a < 1.
/// `ell_sup` is the largest sup_x int k gamma over the time window of interest.
inline double choose_zeta(double alpha, double ell_sup, double p) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("choose_zeta: requires alpha in (0,1)");
    if (!(ell_sup > 0.0)) return 1.0;
    std::optional<double> best_zeta;
    double best_radius = std::numeric_limits<double>::infinity();
    for (int k = -80; k <= 320; ++k) {
        const double zeta = std::exp2(k / 8.0);
        const Tangent tan = beverton_holt_tangent(alpha, zeta);
        const double pa = p * tan.slope * ell_sup;
        if (pa >= 1.0) continue;
        const double radius = p * tan.offset * ell_sup / (1.0 - pa);
        if (radius < best_radius) {
            best_radius = radius;
            best_zeta = zeta;
        }
    }
    if (!best_zeta)
        throw PreconditionError("no tangent point zeta <= 2^40 gives p a_t < 1 for alpha = " +
                                std::to_string(alpha));
    return *best_zeta;
}

/// Second derivative of the inhomogeneity at x by one-sided differences
/// pointing into the habitat.
inline double inhomogeneity_second_derivative(const IdeModel& model, double x) {
    if (!model.inhomogeneity) return 0.0;
    const auto& f = *model.inhomogeneity;
    const double h = 1e-3 * model.habitat.length();
    const double s = (x - model.habitat.a <= model.habitat.b - x) ? h : -h;
    return (2.0 * f(x) - 5.0 * f(x + s) + 4.0 * f(x + 2 * s) - f(x + 3 * s)) / (h * h);
}

} // namespace idyn
