#pragma once

// Ready-made models for the two experiments: a Beverton-Holt equation with
// almost periodic dispersal and growth on [-3, 3], and an asymptotically
// autonomous Ricker equation.

#include <cmath>

#include "idyn/model.hpp"

namespace idyn {

/// Laplace kernel with delta_t = 2 + sin(t/3), gamma_t(x) = 3 - sin(t x / 5).
inline IdeModel beverton_holt_setup(double alpha) {
    IdeModel m;
    m.habitat = {-3.0, 3.0};
    m.kernel = LaplaceKernel{[](Time t) { return 2.0 + std::sin(static_cast<double>(t) / 3.0); }};
    m.growth = BevertonHolt{alpha, [](Time t, double x) { return 3.0 - std::sin(static_cast<double>(t) * x / 5.0); }};
    return m;
}

/// Ricker equation u_{t+1} = gamma_t int k(., y) u e^{-u} dy + b with a
/// time-invariant Laplace kernel and gamma_t = gamma (1 + c q^t), q = k0 gamma.
struct RickerSetup {
    Habitat habitat{-3.0, 3.0};
    double dispersal = 2.0;
    double gamma = 0.2;
    double c = 0.5;
    double inhomogeneity = 0.9;
    Time tau = 0;

    /// sup_x int k(x,y) dy = 1 - exp(-delta (b - a) / 2), attained at the midpoint.
    [[nodiscard]] double k0() const { return 1.0 - std::exp(-dispersal * habitat.length() / 2.0); }

    [[nodiscard]] IdeModel model_with_rate(TimeFn rate) const {
        IdeModel m;
        m.habitat = habitat;
        const double delta = dispersal;
        m.kernel = LaplaceKernel{[delta](Time) { return delta; }};
        m.growth = Ricker{std::move(rate)};
        const double b = inhomogeneity;
        m.inhomogeneity = [b](double) { return b; };
        m.time_domain.first = tau;
        return m;
    }

    [[nodiscard]] IdeModel nonautonomous() const {
        const double g = gamma, cc = c, q = k0() * gamma;
        return model_with_rate([g, cc, q](Time t) { return g * (1.0 + cc * std::pow(q, static_cast<double>(t))); });
    }

    [[nodiscard]] IdeModel frozen() const {
        const double g = gamma;
        return model_with_rate([g](Time) { return g; });
    }
};

} // namespace idyn
