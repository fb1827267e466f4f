#include "contactline/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "contactline/error.hpp"

namespace contactline {

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::validation:
        case ErrorKind::parse:
        case ErrorKind::domain_too_short:
            return 1;
        case ErrorKind::verification:
            return 3;
        default:
            return 2;
    }
}

Grid::Grid(double length, std::size_t nodes) : length_(length), nodes_(nodes), dx_(0.0) {
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw ValidationError("grid length must be positive and finite, got " + std::to_string(length));
    }
    if (nodes < min_nodes) {
        throw ValidationError("grid needs at least " + std::to_string(min_nodes) + " nodes, got " +
                              std::to_string(nodes));
    }
    dx_ = length / static_cast<double>(nodes - 1);
}

std::vector<double> Grid::nodes() const {
    std::vector<double> xs(nodes_);
    for (std::size_t i = 0; i < nodes_; ++i) xs[i] = x(i);
    return xs;
}

Grid build_grid(double length, long long nodes) {
    if (nodes < static_cast<long long>(Grid::min_nodes)) {
        throw ValidationError("grid needs at least " + std::to_string(Grid::min_nodes) + " nodes, got " +
                              std::to_string(nodes));
    }
    return Grid(length, static_cast<std::size_t>(nodes));
}

Field::Field(Grid g, std::vector<double> v, double t) : grid(g), values(std::move(v)), time(t) {
    if (values.size() != grid.size()) {
        throw ValidationError("field has " + std::to_string(values.size()) + " values but grid has " +
                              std::to_string(grid.size()) + " nodes");
    }
    if (!std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); })) {
        throw NumericalError("field contains non-finite values");
    }
    if (!(t >= 0.0)) throw ValidationError("field time must be non-negative");
}

double l2_norm_sq(std::span<const double> values, const Grid& grid) {
    if (values.size() != grid.size()) {
        throw ValidationError("l2_norm_sq: length " + std::to_string(values.size()) + " does not match grid size " +
                              std::to_string(grid.size()));
    }
    double sum = 0.0;
    for (double v : values) sum += v * v;
    sum -= 0.5 * (values.front() * values.front() + values.back() * values.back());
    return sum * grid.dx();
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("max_abs_diff: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace contactline
