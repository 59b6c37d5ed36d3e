#pragma once

// B-spline spaces of degree 1..3 on a grid a = x_0 < ... < x_n = b and the
// collocation projections onto them:
//
//   degree 1  interpolation at the nodes (hat functions), ||pi_n|| = 1
//   degree 2  interpolation at a, the interval midpoints and b, ||pi_n|| <= 2
//   degree 3  interpolation at the nodes plus u''(a), u''(b),
//             ||pi_n|| <= 1 + 3/2 h_max / h_min
//
// Basis functions are indexed like the knots: beta_j is supported on
// [x_j, x_{j+l+1}] and the space is span{beta_{-l}, ..., beta_{n-1}}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "idyn/banded.hpp"
#include "idyn/error.hpp"
#include "idyn/grid.hpp"

namespace idyn {

/// Nonzero basis functions at one point: beta_first, ..., beta_{first+degree}.
struct LocalBasis {
    int first = 0;
    std::array<double, 4> values{};
};

/// ||pi_n|| bound for the collocation projection of the given degree.
inline double stability_constant(int degree, double mesh_ratio = 1.0) {
    switch (degree) {
    case 1: return 1.0;
    case 2: return 2.0;
    case 3: return 1.0 + 1.5 * mesh_ratio;
    default: throw InputError("spline degree must be 1, 2 or 3");
    }
}

struct ProjectionFamily {
    int degree = 1;
    double p = 1.0;

    /// `mesh_ratio` is sup_n h_max / h_min over the family of grids in use.
    static ProjectionFamily for_degree(int degree, double mesh_ratio = 1.0) {
        return {degree, stability_constant(degree, mesh_ratio)};
    }
};

class SplineSpace {
public:
    SplineSpace(Grid grid, int degree) : grid_(std::move(grid)), degree_(degree) {
        if (degree < 1 || degree > 3)
            throw InputError("spline degree must be 1, 2 or 3, got " + std::to_string(degree));
        build_knots();
        if (degree_ > 1) factor_collocation_matrix();
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] std::size_t intervals() const noexcept { return grid_.intervals(); }
    [[nodiscard]] std::size_t dim() const noexcept { return grid_.intervals() + static_cast<std::size_t>(degree_); }
    [[nodiscard]] Habitat habitat() const noexcept { return grid_.habitat(); }
    [[nodiscard]] double stability_constant() const {
        return idyn::stability_constant(degree_, grid_.h_max() / grid_.h_min());
    }

    /// Knot x_j for j in [-l, n + l].
    [[nodiscard]] double knot(int j) const { return knots_.at(static_cast<std::size_t>(j + degree_)); }
    [[nodiscard]] std::span<const double> extended_knots() const noexcept { return knots_; }

    /// Lower estimate of the collocation matrix condition number (1 for degree 1).
    [[nodiscard]] double condition_estimate() const { return lu_ ? lu_->condition_estimate() : 1.0; }

    [[nodiscard]] std::vector<double> collocation_points() const {
        const auto x = grid_.nodes();
        if (degree_ != 2) return {x.begin(), x.end()};
        std::vector<double> pts;
        pts.reserve(x.size() + 1);
        pts.push_back(x.front());
        for (std::size_t j = 1; j < x.size(); ++j) pts.push_back(0.5 * (x[j] + x[j - 1]));
        pts.push_back(x.back());
        return pts;
    }

    /// Values (derivative = 0) or derivatives of the degree + 1 basis
    /// functions that may be nonzero at x.
    [[nodiscard]] LocalBasis local_basis(double x, int derivative = 0) const {
        check_inside(x);
        const int l = degree_;
        const int i = static_cast<int>(grid_.interval_of(x));
        LocalBasis out;
        out.first = i - l;
        if (derivative > l) return out;
        // Cox-de Boor triangle, keeping every degree so derivatives can be formed.
        double ndu[4][4] = {};
        double left[4] = {}, right[4] = {};
        ndu[0][0] = 1.0;
        for (int j = 1; j <= l; ++j) {
            left[j] = x - knot(i + 1 - j);
            right[j] = knot(i + j) - x;
            double saved = 0.0;
            for (int r = 0; r < j; ++r) {
                ndu[j][r] = right[r + 1] + left[j - r];
                const double temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        if (derivative == 0) {
            for (int r = 0; r <= l; ++r) out.values[static_cast<std::size_t>(r)] = ndu[r][l];
            return out;
        }
        const int k = derivative;
        for (int r = 0; r <= l; ++r) {
            double a[2][4] = {};
            int s1 = 0, s2 = 1;
            a[0][0] = 1.0;
            double d = 0.0;
            for (int kk = 1; kk <= k; ++kk) {
                d = 0.0;
                const int rk = r - kk, pk = l - kk;
                if (r >= kk) {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                    d = a[s2][0] * ndu[rk][pk];
                }
                const int j1 = (rk >= -1) ? 1 : -rk;
                const int j2 = (r - 1 <= pk) ? kk - 1 : l - r;
                for (int j = j1; j <= j2; ++j) {
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                    d += a[s2][j] * ndu[rk + j][pk];
                }
                if (r <= pk) {
                    a[s2][kk] = -a[s1][kk - 1] / ndu[pk + 1][r];
                    d += a[s2][kk] * ndu[r][pk];
                }
                std::swap(s1, s2);
            }
            out.values[static_cast<std::size_t>(r)] = d;
        }
        double factor = 1.0;
        for (int j = 0; j < k; ++j) factor *= static_cast<double>(l - j);
        for (auto& v : out.values) v *= factor;
        return out;
    }

    /// beta_j(x) for -l <= j <= n - 1.
    [[nodiscard]] double basis(int j, double x, int derivative = 0) const {
        if (j < -degree_ || j > static_cast<int>(intervals()) - 1)
            throw InputError("B-spline index " + std::to_string(j) + " outside [" + std::to_string(-degree_) +
                             ", " + std::to_string(static_cast<int>(intervals()) - 1) + "]");
        const LocalBasis lb = local_basis(x, derivative);
        const int r = j - lb.first;
        if (r < 0 || r > degree_) return 0.0;
        return lb.values[static_cast<std::size_t>(r)];
    }

    /// Spline coefficients (indexed from beta_{-l}) interpolating `values` at
    /// collocation_points(); degree 3 also needs (u''(a), u''(b)).
    [[nodiscard]] std::vector<double> solve_coefficients(std::span<const double> values,
                                                         std::optional<std::pair<double, double>> end_dd) const {
        const std::size_t m = collocation_count();
        if (values.size() != m)
            throw InputError("projection expects " + std::to_string(m) + " collocation values, got " +
                             std::to_string(values.size()));
        if (degree_ == 1) return {values.begin(), values.end()};
        std::vector<double> rhs;
        rhs.reserve(dim());
        if (degree_ == 2) {
            rhs.assign(values.begin(), values.end());
        } else {
            if (!end_dd) throw InputError("cubic projection needs the end second derivatives u''(a), u''(b)");
            rhs.push_back(end_dd->first);
            rhs.insert(rhs.end(), values.begin(), values.end());
            rhs.push_back(end_dd->second);
        }
        lu_->solve(rhs);
        return rhs;
    }

    [[nodiscard]] std::size_t collocation_count() const noexcept {
        return degree_ == 2 ? intervals() + 2 : intervals() + 1;
    }

    void check_inside(double x) const {
        const double slack = 1e-12 * std::max(1.0, std::abs(grid_.a()) + std::abs(grid_.b()));
        if (!(x >= grid_.a() - slack && x <= grid_.b() + slack))
            throw InputError("point " + std::to_string(x) + " outside [" + std::to_string(grid_.a()) + ", " +
                             std::to_string(grid_.b()) + "]");
    }

private:
    void build_knots() {
        const auto x = grid_.nodes();
        const int n = static_cast<int>(grid_.intervals());
        const int l = degree_;
        knots_.assign(static_cast<std::size_t>(n + 1 + 2 * l), 0.0);
        for (int j = 0; j <= n; ++j) knots_[static_cast<std::size_t>(j + l)] = x[static_cast<std::size_t>(j)];
        const double a = x.front(), b = x.back();
        const double h = grid_.h_max();
        for (int k = 1; k <= l; ++k) {
            double lo, hi;
            if (grid_.is_uniform()) {
                lo = a - k * h;
                hi = b + k * h;
            } else if (k <= n) {
                // mirror the grid at the endpoints
                lo = a - (x[static_cast<std::size_t>(k)] - a);
                hi = b + (b - x[static_cast<std::size_t>(n - k)]);
            } else {
                lo = knots_[static_cast<std::size_t>(l - k + 1)] - h;
                hi = knots_[static_cast<std::size_t>(n + l + k - 1)] + h;
            }
            knots_[static_cast<std::size_t>(l - k)] = lo;
            knots_[static_cast<std::size_t>(n + l + k)] = hi;
        }
    }

    void factor_collocation_matrix() {
        const std::size_t d = dim();
        auto lu = std::make_shared<BandedLU<double>>(d, 2, 2);
        std::size_t row = 0;
        auto put_row = [&](double x, int derivative) {
            const LocalBasis lb = local_basis(x, derivative);
            for (int r = 0; r <= degree_; ++r) {
                const double v = lb.values[static_cast<std::size_t>(r)];
                if (v == 0.0) continue;
                const auto col = static_cast<std::size_t>(lb.first + r + degree_);
                lu->set(row, col, v);
            }
            ++row;
        };
        const auto pts = collocation_points();
        if (degree_ == 3) put_row(grid_.a(), 2);
        for (double c : pts) put_row(c, 0);
        if (degree_ == 3) put_row(grid_.b(), 2);
        lu->factor();
        lu_ = std::move(lu);
    }

    Grid grid_;
    int degree_;
    std::vector<double> knots_;
    std::shared_ptr<const BandedLU<double>> lu_;
};

/// Element of a spline space: sum_j c_j beta_j.
class SplineFunction {
public:
    SplineFunction(std::shared_ptr<const SplineSpace> space, std::vector<double> coefficients)
        : space_(std::move(space)), coeffs_(std::move(coefficients)) {
        if (!space_) throw InputError("spline function without a space");
        if (coeffs_.size() != space_->dim())
            throw InputError("spline needs " + std::to_string(space_->dim()) + " coefficients, got " +
                             std::to_string(coeffs_.size()));
    }

    static SplineFunction zero(std::shared_ptr<const SplineSpace> space) {
        const std::size_t d = space->dim();
        return {std::move(space), std::vector<double>(d, 0.0)};
    }

    [[nodiscard]] const SplineSpace& space() const noexcept { return *space_; }
    [[nodiscard]] const std::shared_ptr<const SplineSpace>& space_ptr() const noexcept { return space_; }
    [[nodiscard]] std::span<const double> coefficients() const noexcept { return coeffs_; }

    [[nodiscard]] double operator()(double x) const { return derivative(x, 0); }

    [[nodiscard]] double derivative(double x, int order) const {
        const LocalBasis lb = space_->local_basis(x, order);
        double s = 0.0;
        for (int r = 0; r <= space_->degree(); ++r)
            s += coeffs_[static_cast<std::size_t>(lb.first + r + space_->degree())] *
                 lb.values[static_cast<std::size_t>(r)];
        return s;
    }

private:
    std::shared_ptr<const SplineSpace> space_;
    std::vector<double> coeffs_;
};

inline double bspline_eval(const SplineSpace& space, int j, double x) { return space.basis(j, x); }

inline std::vector<double> collocation_points(const SplineSpace& space) { return space.collocation_points(); }

/// Collocation projection of data given at the collocation points.
inline SplineFunction project(const std::shared_ptr<const SplineSpace>& space, std::span<const double> values,
                              std::optional<std::pair<double, double>> end_second_derivatives = std::nullopt) {
    return {space, space->solve_coefficients(values, end_second_derivatives)};
}

/// Projection of a callable; `dd` supplies u'' for the cubic end conditions.
template <typename F>
SplineFunction project_function(const std::shared_ptr<const SplineSpace>& space, F&& u,
                                const std::function<double(double)>& dd = {}) {
    const auto pts = space->collocation_points();
    std::vector<double> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = u(pts[i]);
    std::optional<std::pair<double, double>> ends;
    if (space->degree() == 3) {
        if (!dd) throw InputError("cubic projection needs the second derivative of the projected function");
        ends = std::pair{dd(space->grid().a()), dd(space->grid().b())};
    }
    return project(space, vals, ends);
}

inline double spline_eval(const SplineFunction& f, double x) { return f(x); }

/// Sampled sup-norm of f - g on [a, b] with `samples` equispaced points.
template <typename F, typename G>
double sampled_sup_distance(F&& f, G&& g, std::span<const double> points) {
    double d = 0.0;
    for (double x : points) d = std::max(d, std::abs(f(x) - g(x)));
    return d;
}

/// Default density of sup-norm sampling grids for a space with n intervals.
inline std::size_t default_sample_count(std::size_t n) { return std::max<std::size_t>(1024, 4 * n) + 1; }

/// Empirical lower bound for ||pi_n||: maximum of ||pi_n u|| / ||u|| over
/// random piecewise linear u with values in [-1, 1] on a random mesh.
/// ||u|| is exact (max over the mesh values), ||pi_n u|| is sampled.
inline double lebesgue_estimate(const std::shared_ptr<const SplineSpace>& space, std::size_t trials,
                                std::size_t sample_points, std::uint64_t seed = 1) {
    if (trials == 0 || sample_points < 2) throw InputError("lebesgue_estimate needs trials >= 1 and >= 2 samples");
    std::mt19937_64 rng(seed);
    const double a = space->grid().a(), b = space->grid().b();
    std::uniform_real_distribution<double> pos(a, b), val(-1.0, 1.0);
    const auto samples = equispaced({a, b}, sample_points);
    const auto colloc = space->collocation_points();
    const std::size_t mesh_size = 4 * space->dim() + 2;
    double best = 0.0;
    std::vector<double> mesh(mesh_size), mv(mesh_size), cv(colloc.size());
    for (std::size_t trial = 0; trial < trials; ++trial) {
        mesh[0] = a;
        mesh[1] = b;
        for (std::size_t i = 2; i < mesh_size; ++i) mesh[i] = pos(rng);
        std::sort(mesh.begin(), mesh.end());
        mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());
        mv.resize(mesh.size());
        double unorm = 0.0;
        for (auto& v : mv) {
            v = val(rng);
            unorm = std::max(unorm, std::abs(v));
        }
        auto u = [&](double x) {
            auto it = std::upper_bound(mesh.begin(), mesh.end(), x);
            if (it == mesh.begin()) return mv.front();
            if (it == mesh.end()) return mv.back();
            const auto i = static_cast<std::size_t>(it - mesh.begin());
            const double w = (x - mesh[i - 1]) / (mesh[i] - mesh[i - 1]);
            return (1.0 - w) * mv[i - 1] + w * mv[i];
        };
        for (std::size_t i = 0; i < colloc.size(); ++i) cv[i] = u(colloc[i]);
        std::optional<std::pair<double, double>> ends;
        if (space->degree() == 3) ends = std::pair{0.0, 0.0};
        const SplineFunction pu = project(space, cv, ends);
        double pnorm = 0.0;
        for (double x : samples) pnorm = std::max(pnorm, std::abs(pu(x)));
        if (unorm > 0.0) best = std::max(best, pnorm / unorm);
        mesh.resize(mesh_size);
    }
    return best;
}

} // namespace idyn
