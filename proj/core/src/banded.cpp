#include "contactline/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <string>
#include <type_traits>

#include "contactline/error.hpp"

namespace contactline {

static_assert(std::is_same_v<lapack_int, int>, "pivot storage assumes 32-bit lapack_int");

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(ldab_ * n, 0.0) {
    if (n == 0) throw ValidationError("banded matrix must be non-empty");
}

std::size_t BandedMatrix::index(std::size_t row, std::size_t col) const {
    if (row >= n_ || col >= n_ || col + kl_ < row || row + ku_ < col) {
        throw ValidationError("banded matrix entry (" + std::to_string(row) + ", " + std::to_string(col) +
                              ") lies outside the band");
    }
    // LAPACK: AB(kl + ku + i - j, j) = A(i, j), zero-based.
    return col * ldab_ + (kl_ + ku_ + row - col);
}

void BandedMatrix::set(std::size_t row, std::size_t col, double value) { ab_[index(row, col)] = value; }

double BandedMatrix::get(std::size_t row, std::size_t col) const {
    if (row >= n_ || col >= n_ || col + kl_ < row || row + ku_ < col) return 0.0;
    return ab_[index(row, col)];
}

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const {
    if (x.size() != n_) throw ValidationError("banded multiply: length mismatch");
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t lo = i > kl_ ? i - kl_ : 0;
        const std::size_t hi = std::min(n_ - 1, i + ku_);
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) acc += ab_[index(i, j)] * x[j];
        y[i] = acc;
    }
    return y;
}

BandedLu::BandedLu(BandedMatrix matrix) : lu_(std::move(matrix)), pivots_(lu_.n_) {
    const auto n = static_cast<lapack_int>(lu_.n_);
    const lapack_int info =
        LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, static_cast<lapack_int>(lu_.kl_), static_cast<lapack_int>(lu_.ku_),
                       lu_.ab_.data(), static_cast<lapack_int>(lu_.ldab_), pivots_.data());
    if (info > 0) {
        throw NumericalError("singular banded system: zero pivot in column " + std::to_string(info));
    }
    if (info < 0) throw NumericalError("dgbtrf rejected argument " + std::to_string(-info));
}

void BandedLu::solve_in_place(std::span<double> rhs) const {
    if (rhs.size() != lu_.n_) throw ValidationError("banded solve: right-hand side length mismatch");
    const auto n = static_cast<lapack_int>(lu_.n_);
    const lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, static_cast<lapack_int>(lu_.kl_),
                                           static_cast<lapack_int>(lu_.ku_), 1, lu_.ab_.data(),
                                           static_cast<lapack_int>(lu_.ldab_), pivots_.data(), rhs.data(), n);
    if (info != 0) throw NumericalError("dgbtrs failed with info " + std::to_string(info));
}

std::vector<double> BandedLu::solve(std::vector<double> rhs) const {
    solve_in_place(rhs);
    return rhs;
}

}  // namespace contactline
