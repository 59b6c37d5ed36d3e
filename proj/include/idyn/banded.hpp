#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "idyn/error.hpp"

namespace idyn {

/// Square band matrix with kl sub- and ku superdiagonals, factorised in place
/// by Gaussian elimination with partial pivoting. Row interchanges widen the
/// upper band to ku + kl, which the storage already accounts for.
template <typename T = double>
class BandedLU {
public:
    BandedLU(std::size_t n, std::size_t kl, std::size_t ku)
        : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), data_(n * (2 * kl + ku + 1), T{0}), pivots_(n) {}

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

    /// Element (i, j); must lie inside the original band.
    void set(std::size_t i, std::size_t j, T value) {
        if (j + kl_ < i || j > i + ku_)
            throw InputError("BandedLU::set: (" + std::to_string(i) + ", " + std::to_string(j) +
                             ") is outside the band");
        ref(i, j) = value;
    }

    [[nodiscard]] T get(std::size_t i, std::size_t j) const {
        if (j + kl_ < i || j > i + ku_ + kl_) return T{0};
        return data_[i * width_ + (j + kl_ - i)];
    }

    /// Factorise. Throws NumericalError when a pivot is negligible relative
    /// to the matrix norm.
    void factor() {
        norm_inf_ = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            T row = 0;
            for (std::size_t j = lo(i); j <= hi(i, ku_); ++j) row += std::abs(get(i, j));
            norm_inf_ = std::max(norm_inf_, static_cast<double>(row));
        }
        const double tiny = static_cast<double>(n_) * std::numeric_limits<T>::epsilon() * norm_inf_;
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t last_row = std::min(n_ - 1, k + kl_);
            std::size_t p = k;
            for (std::size_t i = k + 1; i <= last_row; ++i)
                if (std::abs(ref(i, k)) > std::abs(ref(p, k))) p = i;
            pivots_[k] = p;
            if (!(std::abs(ref(p, k)) > tiny)) {
                std::ostringstream msg;
                msg << "singular collocation matrix: pivot " << k << " of " << n_ << " is "
                    << std::abs(ref(p, k)) << " with ||A||_inf = " << norm_inf_
                    << " (condition number at least ~" << norm_inf_ / std::max(std::abs(ref(p, k)), T{1e-300})
                    << ")";
                throw NumericalError(msg.str());
            }
            const std::size_t last_col = hi(k, ku_ + kl_);
            if (p != k)
                for (std::size_t j = k; j <= last_col; ++j) std::swap(ref(k, j), ref(p, j));
            const T pivot = ref(k, k);
            for (std::size_t i = k + 1; i <= last_row; ++i) {
                const T l = ref(i, k) / pivot;
                ref(i, k) = l;
                if (l == T{0}) continue;
                for (std::size_t j = k + 1; j <= last_col; ++j) ref(i, j) -= l * ref(k, j);
            }
        }
        factored_ = true;
    }

    /// Solve A x = rhs in place.
    void solve(std::span<T> rhs) const {
        if (!factored_) throw InputError("BandedLU::solve called before factor()");
        if (rhs.size() != n_) throw InputError("BandedLU::solve: right-hand side has wrong length");
        for (std::size_t k = 0; k < n_; ++k) {
            if (pivots_[k] != k) std::swap(rhs[k], rhs[pivots_[k]]);
            const std::size_t last_row = std::min(n_ - 1, k + kl_);
            for (std::size_t i = k + 1; i <= last_row; ++i) rhs[i] -= cref(i, k) * rhs[k];
        }
        for (std::size_t k = n_; k-- > 0;) {
            T s = rhs[k];
            const std::size_t last_col = hi(k, ku_ + kl_);
            for (std::size_t j = k + 1; j <= last_col; ++j) s -= cref(k, j) * rhs[j];
            rhs[k] = s / cref(k, k);
        }
    }

    /// Lower estimate of the infinity-norm condition number from a handful of
    /// solves with sign vectors.
    [[nodiscard]] double condition_estimate() const {
        double inv_norm = 0.0;
        std::vector<T> v(n_);
        for (int pattern = 0; pattern < 4; ++pattern) {
            for (std::size_t i = 0; i < n_; ++i) {
                switch (pattern) {
                case 0: v[i] = T{1}; break;
                case 1: v[i] = (i % 2 == 0) ? T{1} : T{-1}; break;
                case 2: v[i] = ((i / 2) % 2 == 0) ? T{1} : T{-1}; break;
                default: v[i] = ((i * 2654435761u) >> 7) % 2 == 0 ? T{1} : T{-1}; break;
                }
            }
            solve(v);
            for (const T& x : v) inv_norm = std::max(inv_norm, static_cast<double>(std::abs(x)));
        }
        return norm_inf_ * inv_norm;
    }

private:
    [[nodiscard]] std::size_t lo(std::size_t i) const noexcept { return i > kl_ ? i - kl_ : 0; }
    [[nodiscard]] std::size_t hi(std::size_t i, std::size_t up) const noexcept { return std::min(n_ - 1, i + up); }
    T& ref(std::size_t i, std::size_t j) { return data_[i * width_ + (j + kl_ - i)]; }
    [[nodiscard]] const T& cref(std::size_t i, std::size_t j) const { return data_[i * width_ + (j + kl_ - i)]; }

    std::size_t n_, kl_, ku_, width_;
    std::vector<T> data_;
    std::vector<std::size_t> pivots_;
    double norm_inf_ = 0.0;
    bool factored_ = false;
};

} // namespace idyn
