#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace contactline {

/// Square band matrix with kl sub- and ku super-diagonals, stored in the
/// LAPACK general-band layout with room for the fill-in of pivoted LU.
class BandedMatrix {
public:
    BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

    std::size_t size() const noexcept { return n_; }
    std::size_t lower() const noexcept { return kl_; }
    std::size_t upper() const noexcept { return ku_; }

    /// Sets entry (row, col); throws ValidationError outside the band.
    void set(std::size_t row, std::size_t col, double value);
    double get(std::size_t row, std::size_t col) const;

    /// y = A x.
    std::vector<double> multiply(std::span<const double> x) const;

private:
    friend class BandedLu;
    std::size_t index(std::size_t row, std::size_t col) const;

    std::size_t n_, kl_, ku_, ldab_;
    std::vector<double> ab_;  // column-major, ldab_ x n_
};

/// Partial-pivoting LU of a BandedMatrix (LAPACK dgbtrf/dgbtrs). Factor
/// once, solve many right-hand sides.
class BandedLu {
public:
    /// Throws NumericalError if the matrix is singular.
    explicit BandedLu(BandedMatrix matrix);

    void solve_in_place(std::span<double> rhs) const;
    std::vector<double> solve(std::vector<double> rhs) const;
    std::size_t size() const noexcept { return lu_.n_; }

private:
    BandedMatrix lu_;
    std::vector<int> pivots_;
};

}  // namespace contactline
