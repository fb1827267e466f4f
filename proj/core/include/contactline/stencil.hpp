#pragma once

#include <array>
#include <span>
#include <vector>

#include "contactline/grid.hpp"

namespace contactline {

/// Finite-difference weights on unit spacing. Node j of the stencil sits at
/// offset (first + j) from the evaluation node; divide by dx^order to apply.
struct Stencil {
    int order = 0;
    int accuracy = 0;
    int first = 0;
    std::vector<double> weights;

    std::size_t width() const noexcept { return weights.size(); }
};

/// Fornberg's recursion: weights approximating the order-th derivative at
/// `at` from values at `nodes`.
std::vector<double> fornberg_weights(double at, std::span<const double> nodes, int order);

/// Builds the stencil for derivative `order` at offset 0 using nodes
/// first, first+1, ..., first+width-1. Accuracy is width - order unless the
/// stencil is centred and the order is even or odd-symmetric.
Stencil make_stencil(int order, int first, int width, int accuracy);

inline constexpr int max_interior_order = 4;
inline constexpr int max_boundary_order = 6;

/// One-sided orders 5 and 6 carry one extra order: at accuracy 2 their
/// error is still pre-asymptotic at spacings where rounding allows them.
constexpr int boundary_accuracy(int order) noexcept { return order >= 5 ? 3 : 2; }

/// Interior central stencils (orders 1-4), one-sided stencils at x = 0
/// (orders 1-6, accuracy per boundary_accuracy), and the shifted stencils
/// used at nodes too close to either end for the central stencil. All
/// stencils except the one-sided orders 5 and 6 have accuracy 2.
struct StencilSet {
    std::array<Stencil, max_interior_order + 1> central;
    std::array<Stencil, max_boundary_order + 1> boundary;
    // near_left[k][i]: order-k stencil evaluated at node i (window starts at node 0).
    std::array<std::vector<Stencil>, max_interior_order + 1> near_left;
    // near_right[k][m]: order-k stencil evaluated at node n-1-m (window ends at node n-1).
    std::array<std::vector<Stencil>, max_interior_order + 1> near_right;

    static StencilSet build();
    static const StencilSet& standard();

    /// Minimum field length needed by every stencil in the set.
    std::size_t min_length() const noexcept;
};

std::vector<double> apply_derivative(std::span<const double> values, double dx, int order,
                                     const StencilSet& stencils = StencilSet::standard());
std::vector<double> apply_derivative(const Field& field, int order,
                                     const StencilSet& stencils = StencilSet::standard());

/// One-sided approximation of the order-th derivative at x = 0, orders 1-6.
double boundary_derivative(std::span<const double> values, double dx, int order,
                           const StencilSet& stencils = StencilSet::standard());
double boundary_derivative(const Field& field, int order,
                           const StencilSet& stencils = StencilSet::standard());

}  // namespace contactline
