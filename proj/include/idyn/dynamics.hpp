#pragma once

// Time stepping of the collocation discretisation u_{t+1} = Pi_n F_t(u_t):
// trajectories, pullback states, fixed points of autonomous models and
// (semi)distances between discretised states.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "idyn/error.hpp"
#include "idyn/grid.hpp"
#include "idyn/model.hpp"
#include "idyn/parallel.hpp"
#include "idyn/quadrature.hpp"
#include "idyn/splines.hpp"

namespace idyn {

/// Spline space plus the trapezoid rule on its grid. Level 0 marks the
/// reference discretisation that stands in for the exact operator.
struct Discretization {
    std::size_t level = 0;
    std::shared_ptr<const SplineSpace> space;
    QuadratureRule rule;

    static Discretization uniform(const Habitat& habitat, std::size_t n, int degree = 1) {
        auto space = std::make_shared<const SplineSpace>(Grid::uniform(habitat, n), degree);
        auto rule = trapezoid_rule(space->grid());
        return {n, std::move(space), std::move(rule)};
    }

    static Discretization reference(const Habitat& habitat, std::size_t n_ref) {
        Discretization d = uniform(habitat, n_ref, 1);
        d.level = 0;
        return d;
    }

    [[nodiscard]] std::size_t intervals() const noexcept { return space->intervals(); }
    [[nodiscard]] int degree() const noexcept { return space->degree(); }
    [[nodiscard]] double p() const { return space->stability_constant(); }
    [[nodiscard]] Habitat habitat() const { return space->habitat(); }

    /// Collocation points and a uniform 4 n + 1 point grid: sup over x of
    /// kernel integrals is then attained on a superset of the points the
    /// discrete operator actually uses.
    [[nodiscard]] SupIntegralGrid sup_grid() const {
        auto pts = space->collocation_points();
        const auto fine = equispaced(habitat(), 4 * intervals() + 1);
        pts.insert(pts.end(), fine.begin(), fine.end());
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return {rule, std::move(pts)};
    }
};

/// A discretised density: nodal values (the quadrature nodes) plus the spline.
class StateFunction {
public:
    StateFunction(SplineFunction spline, Time time) : spline_(std::move(spline)), time_(time) {
        const auto& space = spline_.space();
        const auto nodes = space.grid().nodes();
        if (space.degree() == 1) {
            const auto c = spline_.coefficients();
            values_.assign(c.begin(), c.end());
        } else {
            values_.resize(nodes.size());
            for (std::size_t j = 0; j < nodes.size(); ++j) values_[j] = spline_(nodes[j]);
        }
    }

    /// Project a callable on the discretisation. `dd` is its second
    /// derivative and only consulted for cubic splines.
    template <typename F>
    static StateFunction from_function(const Discretization& disc, F&& f, Time time,
                                       const std::function<double(double)>& dd = [](double) { return 0.0; }) {
        return {project_function(disc.space, std::forward<F>(f), dd), time};
    }

    static StateFunction constant(const Discretization& disc, double c, Time time) {
        return {SplineFunction(disc.space, std::vector<double>(disc.space->dim(), c)), time};
    }

    [[nodiscard]] double operator()(double x) const { return spline_(x); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] const SplineFunction& spline() const noexcept { return spline_; }
    [[nodiscard]] const SplineSpace& space() const noexcept { return spline_.space(); }
    [[nodiscard]] Time time() const noexcept { return time_; }
    [[nodiscard]] Habitat habitat() const { return spline_.space().habitat(); }

    [[nodiscard]] bool lives_on(const Discretization& disc) const {
        return spline_.space_ptr() == disc.space ||
               (space().degree() == disc.degree() && space().grid() == disc.space->grid());
    }

    /// Largest nodal magnitude; equals the sup norm for degree 1.
    [[nodiscard]] double nodal_norm() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    [[nodiscard]] StateFunction restamped(Time t) const { return {spline_, t}; }

private:
    SplineFunction spline_;
    std::vector<double> values_;
    Time time_;
};

/// Re-represent u on another discretisation (identity when it already lives there).
inline StateFunction transfer(const StateFunction& u, const Discretization& disc) {
    if (u.lives_on(disc)) return u;
    const auto& src = u.spline();
    return StateFunction::from_function(
        disc, [&](double x) { return src(x); }, u.time(), [&](double x) { return src.derivative(x, 2); });
}

struct StepOptions {
    unsigned threads = 1;
};

namespace detail {

inline void check_habitat(const IdeModel& model, const Habitat& h) {
    const double tol = 1e-12 * std::max(1.0, std::abs(model.habitat.a) + std::abs(model.habitat.b));
    if (std::abs(h.a - model.habitat.a) > tol || std::abs(h.b - model.habitat.b) > tol)
        throw InputError("state habitat does not match the model habitat");
}

inline void check_times(const IdeModel& model, Time t) {
    if (!model.time_domain.contains(t) || t == model.time_domain.last)
        throw InputError("step: t = " + std::to_string(t) + " and t + 1 must lie in the time domain");
}

} // namespace detail

/// One step of the collocation scheme. For every collocation point c
///   v(c) = sum_q w_q k_t(c, y_q) g_t(y_q, u(y_q)) [+ b(c)]
/// and the result is the spline interpolating v. Cubic end conditions use
/// F'' = delta^2 (F - g) for the Laplace kernel and one-sided differences of
/// the quadrature sum otherwise.
inline StateFunction step(const IdeModel& model, const Discretization& disc, Time t, const StateFunction& u,
                          const StepOptions& opts = {}) {
    detail::check_times(model, t);
    detail::check_habitat(model, u.habitat());
    detail::check_habitat(model, disc.habitat());

    const auto& y = disc.rule.nodes;
    const std::size_t nq = y.size();
    std::vector<double> uq;
    if (u.lives_on(disc)) {
        uq.assign(u.values().begin(), u.values().end());
    } else {
        uq.resize(nq);
        for (std::size_t q = 0; q < nq; ++q) uq[q] = u(y[q]);
    }

    std::vector<double> h(nq), wh(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        if (!(uq[q] >= 0.0)) {
            if (std::isnan(uq[q])) throw NumericalError("step: NaN state value at node " + std::to_string(q));
            throw NumericalError("step: negative state value " + std::to_string(uq[q]) + " at x = " +
                                 std::to_string(y[q]) + " (projection of degree " +
                                 std::to_string(disc.degree()) + " left the nonnegative cone)");
        }
        h[q] = growth_eval(model.growth, t, y[q], uq[q]);
        if (!std::isfinite(h[q])) throw NumericalError("step: non-finite growth value at node " + std::to_string(q));
        wh[q] = disc.rule.weights[q] * h[q];
    }

    const KernelSlice kernel(model.kernel, t);
    const auto pts = disc.space->collocation_points();
    std::vector<double> v(pts.size());
    auto integral_at = [&](double x) {
        double s = 0.0;
        for (std::size_t q = 0; q < nq; ++q) s += kernel(x, y[q]) * wh[q];
        return s;
    };
    parallel_for(pts.size(), opts.threads, [&](std::size_t i) { v[i] = integral_at(pts[i]); });

    std::optional<std::pair<double, double>> ends;
    if (disc.degree() == 3) {
        const double a = disc.space->grid().a(), b = disc.space->grid().b();
        // collocation points of cubic splines are the nodes, so v.front() is F(a)
        if (auto delta = kernel.laplace_rate()) {
            const double d2 = *delta * *delta;
            ends = std::pair{d2 * (v.front() - h.front()), d2 * (v.back() - h.back())};
        } else {
            const double eta = 2e-4 * (b - a);
            auto one_sided = [&](double x, double s) {
                return (2.0 * integral_at(x) - 5.0 * integral_at(x + s) + 4.0 * integral_at(x + 2 * s) -
                        integral_at(x + 3 * s)) /
                       (eta * eta);
            };
            ends = std::pair{one_sided(a, eta), one_sided(b, -eta)};
        }
        ends->first += inhomogeneity_second_derivative(model, a);
        ends->second += inhomogeneity_second_derivative(model, b);
    }
    if (model.inhomogeneity)
        for (std::size_t i = 0; i < pts.size(); ++i) v[i] += (*model.inhomogeneity)(pts[i]);

    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) throw NumericalError("step: non-finite operator value at collocation point " +
                                                       std::to_string(i));

    return {project(disc.space, v, ends), t + 1};
}

/// phi(t; tau, u0) for t = tau, ..., T.
inline std::vector<StateFunction> trajectory(const IdeModel& model, const Discretization& disc, Time tau, Time T,
                                             const StateFunction& u0, const StepOptions& opts = {}) {
    if (tau > T) throw InputError("trajectory: tau must not exceed T");
    if (u0.time() != tau) throw InputError("trajectory: initial state is stamped " + std::to_string(u0.time()) +
                                           ", expected " + std::to_string(tau));
    std::vector<StateFunction> out;
    out.reserve(static_cast<std::size_t>(T - tau + 1));
    out.push_back(transfer(u0, disc));
    for (Time t = tau; t < T; ++t) out.push_back(step(model, disc, t, out.back(), opts));
    return out;
}

/// phi(t; t - depth, seed); the seed is restamped to t - depth.
inline StateFunction pullback_state(const IdeModel& model, const Discretization& disc, Time t, std::size_t depth,
                                    const StateFunction& seed, const StepOptions& opts = {}) {
    const Time start = t - static_cast<Time>(depth);
    if (!model.time_domain.contains(start) || !model.time_domain.contains(t))
        throw InputError("pullback_state: window [" + std::to_string(start) + ", " + std::to_string(t) +
                         "] leaves the time domain");
    StateFunction u = transfer(seed, disc).restamped(start);
    for (Time s = start; s < t; ++s) u = step(model, disc, s, u, opts);
    return u;
}

inline double sup_distance(const StateFunction& u, const StateFunction& v, std::span<const double> points) {
    return sampled_sup_distance(u, v, points);
}

/// Sup distance sampled on `samples` equispaced points of u's habitat.
inline double sup_distance(const StateFunction& u, const StateFunction& v, std::size_t samples) {
    const Habitat hu = u.habitat(), hv = v.habitat();
    if (std::abs(hu.a - hv.a) > 1e-12 || std::abs(hu.b - hv.b) > 1e-12)
        throw InputError("sup_distance: states live on different habitats");
    const auto pts = equispaced(hu, samples);
    return sup_distance(u, v, pts);
}

/// Exact sup distance of two piecewise linear states: the difference is
/// linear between consecutive points of the merged node sets.
inline double linear_sup_distance(const StateFunction& u, const StateFunction& v) {
    if (u.space().degree() != 1 || v.space().degree() != 1)
        throw InputError("linear_sup_distance: both states must be degree-1 splines");
    const auto xu = u.space().grid().nodes(), xv = v.space().grid().nodes();
    std::vector<double> pts(xu.begin(), xu.end());
    pts.insert(pts.end(), xv.begin(), xv.end());
    return sup_distance(u, v, pts);
}

/// Finite sample of a set of states at a common time.
class FunctionSet {
public:
    explicit FunctionSet(std::vector<StateFunction> members) : members_(std::move(members)) {
        if (members_.empty()) throw InputError("function set must be nonempty");
        const Habitat h = members_.front().habitat();
        for (const auto& m : members_) {
            if (m.time() != members_.front().time())
                throw InputError("function set members carry different time stamps");
            if (std::abs(m.habitat().a - h.a) > 1e-12 || std::abs(m.habitat().b - h.b) > 1e-12)
                throw InputError("function set members live on different habitats");
        }
    }

    [[nodiscard]] std::span<const StateFunction> members() const noexcept { return members_; }
    [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
    [[nodiscard]] const StateFunction& operator[](std::size_t i) const { return members_[i]; }

private:
    std::vector<StateFunction> members_;
};

/// dist(A, B) = sup_{a in A} inf_{b in B} ||a - b||, sampled on `points`.
inline double hausdorff_semidist(std::span<const StateFunction> A, std::span<const StateFunction> B,
                                 std::span<const double> points) {
    if (A.empty() || B.empty()) throw InputError("hausdorff_semidist: empty set");
    double worst = 0.0;
    for (const auto& a : A) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& b : B) nearest = std::min(nearest, sup_distance(a, b, points));
        worst = std::max(worst, nearest);
    }
    return worst;
}

inline double hausdorff_semidist(const FunctionSet& A, const FunctionSet& B, std::size_t samples) {
    const auto pts = equispaced(A[0].habitat(), samples);
    return hausdorff_semidist(A.members(), B.members(), pts);
}

struct FixedPointResult {
    StateFunction state;
    std::size_t iterations = 0;
    double residual = 0.0;
    /// Successive residuals ||step(u_k) - u_k||, k = 0, 1, ...
    std::vector<double> residuals;
};

/// Banach iteration for an autonomous model (evaluated at `t`). The map must
/// be a contraction: p * ell(model) < 1 on the discretisation's quadrature.
inline FixedPointResult fixed_point_autonomous(const IdeModel& model, const Discretization& disc,
                                               const StateFunction& seed, double tol, std::size_t max_iter,
                                               Time t = 0, const StepOptions& opts = {}) {
    if (!(tol > 0.0)) throw InputError("fixed_point_autonomous: tolerance must be positive");
    const double factor = disc.p() * lipschitz_bound(model, t, 1.0, disc.sup_grid());
    if (!(factor < 1.0))
        throw PreconditionError("fixed_point_autonomous: contraction factor p * ell = " + std::to_string(factor) +
                                " is not below 1");
    const auto samples = equispaced(disc.habitat(), default_sample_count(disc.intervals()));
    StateFunction u = transfer(seed, disc).restamped(t);
    std::vector<double> residuals;
    for (std::size_t k = 0; k <= max_iter; ++k) {
        StateFunction next = step(model, disc, t, u, opts).restamped(t);
        const double r = sup_distance(next, u, samples);
        residuals.push_back(r);
        if (r <= tol) return {std::move(u), k, r, std::move(residuals)};
        if (k == max_iter) break;
        u = std::move(next);
    }
    throw ConvergenceError("fixed_point_autonomous: no convergence in " + std::to_string(max_iter) +
                               " iterations, last residual " + std::to_string(residuals.back()),
                           residuals.back());
}

} // namespace idyn
