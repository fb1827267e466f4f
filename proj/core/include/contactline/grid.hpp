#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace contactline {

/// Uniform truncation [0, L] of the half-line.
class Grid {
public:
    static constexpr std::size_t min_nodes = 16;

    /// Throws ValidationError unless length > 0 and nodes >= min_nodes.
    Grid(double length, std::size_t nodes);

    double length() const noexcept { return length_; }
    std::size_t size() const noexcept { return nodes_; }
    double dx() const noexcept { return dx_; }
    double x(std::size_t i) const noexcept { return i + 1 == nodes_ ? length_ : static_cast<double>(i) * dx_; }
    std::vector<double> nodes() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double length_;
    std::size_t nodes_;
    double dx_;
};

Grid build_grid(double length, long long nodes);

/// Sampled profile h (or u = h_x) at one time instant.
struct Field {
    Grid grid;
    std::vector<double> values;
    double time = 0.0;

    Field(Grid g, std::vector<double> v, double t = 0.0);

    std::span<const double> view() const noexcept { return values; }
    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
};

/// Trapezoid-rule approximation of the integral of v^2 over [0, L].
double l2_norm_sq(std::span<const double> values, const Grid& grid);

/// Max-norm of a - b.
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace contactline
