#pragma once

// Absorbing radii, discretisation errors, convergence-rate tables and the
// forward limit experiment for asymptotically autonomous Ricker equations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "idyn/dynamics.hpp"
#include "idyn/error.hpp"
#include "idyn/model.hpp"
#include "idyn/parallel.hpp"

namespace idyn {

enum class Direction { pullback, forward };

inline const char* to_string(Direction d) { return d == Direction::pullback ? "pullback" : "forward"; }

struct AbsorbingRadius {
    Time tau = 0;
    double R = 0.0;
    Direction direction = Direction::pullback;
    std::size_t truncation_depth = 0;
    double rho = 1.1;

    /// Radius of the absorbing ball, rho * R.
    [[nodiscard]] double ball() const noexcept { return rho * R; }
};

/// (a_t, b_t) as a function of time.
using CoefficientFn = std::function<std::pair<double, double>(Time)>;

struct RadiusOptions {
    double rho = 1.1;
    /// Times inspected up front to bound sup p a_t and sup b_t.
    std::size_t sup_window = 256;
    std::size_t max_depth = 1'000'000;
};

/// Radius R_tau of the absorbing set for linear growth coefficients.
///
/// Pullback: R_tau = p sum_{l1 <= tau-1} b_{l1} prod_{l2=l1+1}^{tau-1} p a_{l2},
/// truncated once the geometric tail bound p sup b q^K / (1 - q) drops below
/// `tol`, where q = sup p a_t.
/// Forward: R_tau = p lim S_t with S_{t+1} = p a_t S_t + b_t, S_tau = 0. When
/// the coefficients keep oscillating the limit is replaced by the maximum of
/// S_t over `sup_window` steps after the transient has decayed below `tol`.
inline AbsorbingRadius absorbing_radius(const CoefficientFn& coeffs, double p, Direction direction, Time tau,
                                        double tol, const RadiusOptions& opts = {}) {
    if (!(tol > 0.0)) throw InputError("absorbing_radius: tolerance must be positive");
    if (!(p >= 1.0)) throw InputError("absorbing_radius: stability constant p must be >= 1");
    if (!(opts.rho > 1.0)) throw InputError("absorbing_radius: rho must exceed 1");
    // pullback terms run backwards from tau-1, forward ones from tau
    auto time_of = [&](std::size_t k) { return direction == Direction::pullback ? tau - 1 - static_cast<Time>(k)
                                                                                 : tau + static_cast<Time>(k); };

    std::vector<std::pair<double, double>> cache;
    auto coeff = [&](std::size_t k) -> const std::pair<double, double>& {
        while (cache.size() <= k) {
            auto ab = coeffs(time_of(cache.size()));
            if (!(ab.first >= 0.0) || !(ab.second >= 0.0) || !std::isfinite(ab.first) || !std::isfinite(ab.second))
                throw InputError("absorbing_radius: coefficients must be finite and nonnegative");
            cache.push_back(ab);
        }
        return cache[k];
    };

    double ratio = 0.0, sup_b = 0.0;
    for (std::size_t k = 0; k < std::max<std::size_t>(1, opts.sup_window); ++k) {
        ratio = std::max(ratio, p * coeff(k).first);
        sup_b = std::max(sup_b, coeff(k).second);
    }
    if (!(ratio < 1.0))
        throw PreconditionError("absorbing_radius: sup p a_t = " + std::to_string(ratio) +
                                " >= 1, the series is not summable");

    AbsorbingRadius out{tau, 0.0, direction, 0, opts.rho};
    if (direction == Direction::pullback) {
        double sum = 0.0, prod = 1.0;
        for (std::size_t k = 0; k < opts.max_depth; ++k) {
            const auto& [a, b] = coeff(k);
            ratio = std::max(ratio, p * a);
            sup_b = std::max(sup_b, b);
            sum += b * prod;
            prod *= p * a;
            out.truncation_depth = k + 1;
            if (p * sup_b * prod / (1.0 - ratio) < tol) break;
            if (ratio >= 1.0) throw PreconditionError("absorbing_radius: p a_t reached 1 inside the series");
        }
        out.R = p * sum;
    } else {
        double S = 0.0, decay = 1.0;
        std::size_t k = 0;
        for (; k < opts.max_depth; ++k) {
            const auto& [a, b] = coeff(k);
            ratio = std::max(ratio, p * a);
            sup_b = std::max(sup_b, b);
            S = p * a * S + b;
            decay *= ratio;
            if (p * sup_b * decay / (1.0 - ratio) < tol) break;
        }
        double limsup = S;
        for (std::size_t j = 1; j <= opts.sup_window; ++j) {
            const auto& [a, b] = coeff(k + j);
            S = p * a * S + b;
            limsup = std::max(limsup, S);
        }
        out.truncation_depth = k + 1 + opts.sup_window;
        out.R = p * limsup;
    }
    return out;
}

/// (a_t, b_t) from linear_growth_bounds with a fixed tangent point.
inline CoefficientFn growth_coefficients(const IdeModel& model, std::optional<double> zeta, SupIntegralGrid grid) {
    return [&model, zeta, grid = std::move(grid)](Time t) {
        const GrowthBounds gb = linear_growth_bounds(model, t, zeta, grid);
        return std::pair{gb.a_t, gb.b_t};
    };
}

/// Tangent point for the model over a time window (empty unless BH with alpha < 1).
inline std::optional<double> default_zeta(const IdeModel& model, double p, Time first, Time last,
                                          const SupIntegralGrid& grid) {
    if (!needs_tangent(model)) return std::nullopt;
    double ell_sup = 0.0;
    for (Time t = first; t <= last; ++t) ell_sup = std::max(ell_sup, rate_kernel_mass(model, t, grid));
    return choose_zeta(std::get<BevertonHolt>(model.growth).alpha, ell_sup, p);
}

/// e_t^n(u) = ||F^n_t(u) - F^ref_t(u)||, sampled on the reference nodes.
inline double local_error(const IdeModel& model, const Discretization& disc_n, const Discretization& disc_ref,
                          Time t, const StateFunction& u, const StepOptions& opts = {}) {
    if (disc_ref.intervals() < disc_n.intervals())
        throw InputError("local_error: reference discretisation is coarser than the tested one");
    const StateFunction fn = step(model, disc_n, t, u, opts);
    const StateFunction fr = step(model, disc_ref, t, u, opts);
    return sup_distance(fn, fr, disc_ref.rule.nodes);
}

/// Ingredients of the global error bound: convergence function Gamma, error
/// constants C(r) on balls of radius r and Lipschitz constants ell_t(r).
struct ErrorModel {
    std::function<double(double)> gamma = [](double h) { return h * h; };
    std::function<double(double)> C;
    std::function<double(Time, double)> ell;
    /// Enlargement rho of the balls in which the Lipschitz constants are taken.
    double neighbourhood = 1.0;
};

/// Gamma(1/n) sum_{l1=tau}^{t-1} C(r(l1)) prod_{l2=l1+1}^{t-1} ell_{l2}(r(l2) + rho).
inline double global_error_bound(const ErrorModel& err, const std::function<double(Time)>& radii, Time tau, Time t,
                                 std::size_t n) {
    if (tau > t) throw InputError("global_error_bound: tau must not exceed t");
    if (n == 0) throw InputError("global_error_bound: level n must be positive");
    double sum = 0.0, prod = 1.0;
    // accumulate from the most recent term backwards so the product builds up
    for (Time l1 = t - 1; l1 >= tau; --l1) {
        sum += err.C(radii(l1)) * prod;
        prod *= err.ell(l1, radii(l1) + err.neighbourhood);
    }
    return err.gamma(1.0 / static_cast<double>(n)) * sum;
}

struct RateRow {
    std::size_t n = 0;
    double err = 0.0;   // ||xi^n - xi^{2n}||
    double rate = 0.0;  // c(n)
    bool degenerate = false;
};

struct RateTable {
    std::vector<RateRow> rows;
    double seed_value = 0.0;
    std::size_t seed_truncation_depth = 0;
    std::size_t depth = 0;
    Time t = 0;
    std::size_t n_ref = 0;
};

enum class DegeneratePolicy { raise, flag };

/// What the level n of a rate table counts: grid nodes (n - 1 intervals, the
/// convention of the reference rate tables) or intervals (nested grids).
enum class LevelConvention { nodes, intervals };

struct ConvergenceOptions {
    std::vector<std::size_t> n_list{16, 32, 64, 128, 256, 512, 1024};
    std::size_t depth = 15;
    Time t = 0;
    std::size_t n_ref = 4096;
    int degree = 1;
    LevelConvention convention = LevelConvention::nodes;
    double rho = 1.1;
    /// Overrides the absorbing-radius seed when set.
    std::optional<double> seed_value;
    double radius_tol = 1e-10;
    unsigned threads = 1;
    DegeneratePolicy on_degenerate = DegeneratePolicy::raise;
};

/// Seed rho R_{t-depth} from the pullback absorbing radius (p of the degree).
inline AbsorbingRadius pullback_seed_radius(const IdeModel& model, Time start, double p, double rho, double tol) {
    const SupIntegralGrid grid = SupIntegralGrid::uniform(model.habitat);
    const auto zeta = default_zeta(model, p, start - 64, start, grid);
    RadiusOptions ro;
    ro.rho = rho;
    return absorbing_radius(growth_coefficients(model, zeta, grid), p, Direction::pullback, start, tol, ro);
}

/// Pullback witnesses xi^n = phi^n(t; t - s, seed) on levels n, 2n, 4n and
/// c(n) = log2(||xi^n - xi^{2n}|| / ||xi^{2n} - xi^{4n}||). Sup norms are
/// exact for degree 1 and sampled on n_ref + 1 equispaced points otherwise.
inline RateTable convergence_table(const IdeModel& model, const ConvergenceOptions& opts) {
    model.validate();
    if (opts.n_list.empty()) throw InputError("convergence_table: empty n list");
    if (opts.depth < 1) throw InputError("convergence_table: depth must be at least 1");
    std::size_t n_max = 0;
    for (std::size_t i = 0; i < opts.n_list.size(); ++i) {
        const std::size_t n = opts.n_list[i];
        if (n < 2 || (n & (n - 1)) != 0) throw InputError("convergence_table: n = " + std::to_string(n) +
                                                           " is not a power of two");
        if (i > 0 && n <= opts.n_list[i - 1]) throw InputError("convergence_table: n list must be increasing");
        n_max = std::max(n_max, n);
    }
    if (opts.n_ref < 4 * n_max)
        throw InputError("convergence_table: n_ref = " + std::to_string(opts.n_ref) + " < 4 max(n) = " +
                         std::to_string(4 * n_max));

    RateTable table;
    table.depth = opts.depth;
    table.t = opts.t;
    table.n_ref = opts.n_ref;
    const Time start = opts.t - static_cast<Time>(opts.depth);
    if (opts.seed_value) {
        table.seed_value = *opts.seed_value;
    } else {
        const AbsorbingRadius r =
            pullback_seed_radius(model, start, stability_constant(opts.degree), opts.rho, opts.radius_tol);
        table.seed_value = r.ball();
        table.seed_truncation_depth = r.truncation_depth;
    }

    std::vector<std::size_t> levels;
    for (std::size_t n : opts.n_list)
        for (std::size_t m : {n, 2 * n, 4 * n})
            if (std::find(levels.begin(), levels.end(), m) == levels.end()) levels.push_back(m);
    std::sort(levels.begin(), levels.end());

    std::vector<std::optional<StateFunction>> xi(levels.size());
    // Largest levels dominate the cost; parallelism goes to the kernel sums.
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const std::size_t intervals = opts.convention == LevelConvention::nodes ? levels[i] - 1 : levels[i];
        const Discretization disc = Discretization::uniform(model.habitat, intervals, opts.degree);
        const StateFunction seed = StateFunction::constant(disc, table.seed_value, start);
        xi[i] = pullback_state(model, disc, opts.t, opts.depth, seed, StepOptions{opts.threads});
    }
    auto witness = [&](std::size_t n) -> const StateFunction& {
        return *xi[static_cast<std::size_t>(std::find(levels.begin(), levels.end(), n) - levels.begin())];
    };

    const auto ref_nodes = equispaced(model.habitat, opts.n_ref + 1);
    auto dist = [&](const StateFunction& u, const StateFunction& v) {
        return opts.degree == 1 ? linear_sup_distance(u, v) : sup_distance(u, v, ref_nodes);
    };
    for (std::size_t n : opts.n_list) {
        RateRow row;
        row.n = n;
        row.err = dist(witness(n), witness(2 * n));
        const double next = dist(witness(2 * n), witness(4 * n));
        row.rate = std::log2(row.err / next);
        const double scale = std::max(witness(n).nodal_norm(), 1.0);
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
        row.degenerate = !std::isfinite(row.rate) || row.err <= floor || next <= floor;
        if (row.degenerate && opts.on_degenerate == DegeneratePolicy::raise) {
            std::ostringstream msg;
            msg << "convergence_table: degenerate experiment at n = " << n << " (err_n = " << row.err
                << ", err_2n = " << next << ")";
            throw DegenerateExperiment(msg.str());
        }
        table.rows.push_back(row);
    }
    return table;
}

/// Quantities entering the forward-limit hypotheses for Ricker equations
/// with rates gamma_t converging to gamma.
struct RickerConditions {
    double gamma = 0.0;      // limit rate
    double k0 = 0.0;         // sup_x int k(x,y) dy
    double sup_gamma = 0.0;  // sup_t gamma_t over the window
    double K0 = 1.0;         // sup_{s<=t} prod_{l=s}^{t-1} gamma_l / gamma
    double K1 = 1.0;         // sup_t |gamma_t - gamma| / (k0 gamma)^t
    std::vector<std::string> failures;

    [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
};

/// Evaluate the three asymptotic-autonomy conditions on [tau, tau + window].
inline RickerConditions check_ricker_conditions(const IdeModel& model, const IdeModel& frozen, Time tau,
                                                std::size_t window, const SupIntegralGrid& grid) {
    RickerConditions c;
    if (!model.is_ricker() || !frozen.is_ricker()) {
        c.failures.emplace_back("forward-limit experiment requires Ricker growth");
        return c;
    }
    c.gamma = growth_rate(frozen.growth, tau, frozen.habitat.a);
    c.k0 = kernel_mass(frozen, tau, grid);
    const double q = c.k0 * c.gamma;
    if (!(c.gamma > 0.0)) c.failures.emplace_back("limit rate gamma must be positive");
    if (!(q < 1.0)) c.failures.emplace_back("gamma k0 = " + std::to_string(q) + " is not below 1");

    std::vector<double> rates(window + 1);
    for (std::size_t i = 0; i <= window; ++i) rates[i] = growth_rate(model.growth, tau + static_cast<Time>(i), 0.0);
    c.sup_gamma = *std::max_element(rates.begin(), rates.end());

    if (c.gamma > 0.0) {
        // K0: largest product over windows [s, t); track the best suffix product.
        double best_suffix = 1.0;
        for (double r : rates) {
            best_suffix = std::max(1.0, best_suffix) * (r / c.gamma);
            c.K0 = std::max(c.K0, best_suffix);
        }
        if (q > 0.0 && q < 1.0) {
            // the ratio must not grow over the second half of the window
            double first_half = 0.0, second_half = 0.0;
            for (std::size_t i = 0; i <= window; ++i) {
                const double t = static_cast<double>(tau) + static_cast<double>(i);
                const double ratio = std::abs(rates[i] - c.gamma) / std::pow(q, t);
                double& half = i <= window / 2 ? first_half : second_half;
                half = std::max(half, ratio);
            }
            c.K1 = std::max({1.0, first_half, second_half});
            if (!std::isfinite(c.K1) || second_half > first_half * (1.0 + 1e-9) + 1e-300)
                c.failures.emplace_back("|gamma_t - gamma| does not decay like (k0 gamma)^t");
        }
    }
    const double bound = std::exp(2.0) / (1.0 + std::exp(2.0)) * (1.0 - q) / c.K0;
    if (!(c.k0 * c.sup_gamma < bound))
        c.failures.emplace_back("k0 sup gamma_t = " + std::to_string(c.k0 * c.sup_gamma) +
                                " is not below e^2/(1+e^2) (1 - k0 gamma) / K0 = " + std::to_string(bound));
    return c;
}

struct ForwardLimitLevel {
    std::size_t n = 0;
    StateFunction fixed_point;
    std::size_t fixed_point_iterations = 0;
    /// (s, dist(phi^n(tau + s; tau, seeds), {u*})) for s = 1..horizon
    std::vector<std::pair<std::size_t, double>> distances;
};

struct ForwardLimitOptions {
    double tol = 1e-12;
    std::size_t max_iter = 10'000;
    std::size_t condition_window = 200;
    unsigned threads = 1;
};

/// Fixed point u* of the frozen (autonomous) model on every level and the
/// Hausdorff semidistance of forward orbits of the nonautonomous model to {u*}.
template <typename SeedFn>
std::vector<ForwardLimitLevel> forward_limit_experiment(const IdeModel& model, const IdeModel& frozen,
                                                        const std::vector<Discretization>& discs, Time tau,
                                                        std::size_t horizon, const std::vector<SeedFn>& seeds,
                                                        const ForwardLimitOptions& opts = {}) {
    model.validate();
    frozen.validate();
    if (seeds.empty()) throw InputError("forward_limit_experiment: no seeds");
    const RickerConditions cond =
        check_ricker_conditions(model, frozen, tau, opts.condition_window, SupIntegralGrid::uniform(model.habitat));
    if (!cond.ok()) {
        std::string msg = "forward_limit_experiment: hypotheses violated:";
        for (const auto& f : cond.failures) msg += "\n  - " + f;
        throw PreconditionError(msg);
    }
    std::vector<ForwardLimitLevel> out;
    const StepOptions so{opts.threads};
    for (const auto& disc : discs) {
        const StateFunction start = StateFunction::from_function(disc, seeds.front(), tau);
        FixedPointResult fp = fixed_point_autonomous(frozen, disc, start, opts.tol, opts.max_iter, tau, so);
        ForwardLimitLevel level{disc.intervals(), fp.state, fp.iterations, {}};
        const auto samples = equispaced(disc.habitat(), default_sample_count(disc.intervals()));
        std::vector<StateFunction> orbit;
        for (const auto& s : seeds) orbit.push_back(StateFunction::from_function(disc, s, tau));
        for (std::size_t s = 1; s <= horizon; ++s) {
            const Time t = tau + static_cast<Time>(s) - 1;
            for (auto& u : orbit) u = step(model, disc, t, u, so);
            const std::vector<StateFunction> target{level.fixed_point.restamped(t + 1)};
            level.distances.emplace_back(s, hausdorff_semidist(orbit, target, samples));
        }
        out.push_back(std::move(level));
    }
    return out;
}

} // namespace idyn
