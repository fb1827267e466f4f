#include "contactline/stencil.hpp"

#include <cmath>
#include <string>

#include "contactline/error.hpp"

namespace contactline {

std::vector<double> fornberg_weights(double at, std::span<const double> nodes, int order) {
    const auto n = nodes.size();
    if (order < 0 || n <= static_cast<std::size_t>(order)) {
        throw ValidationError("fornberg_weights: need more than " + std::to_string(order) + " nodes");
    }
    const auto m = static_cast<std::size_t>(order);
    // c[i][k]: weight of node i for the k-th derivative; long double keeps
    // the rational weights exact for the widths used here.
    std::vector<std::vector<long double>> c(n, std::vector<long double>(m + 1, 0.0L));
    long double c1 = 1.0L;
    long double c4 = nodes[0] - at;
    c[0][0] = 1.0L;
    for (std::size_t i = 1; i < n; ++i) {
        const auto mn = std::min(i, m);
        long double c2 = 1.0L;
        const long double c5 = c4;
        c4 = nodes[i] - at;
        for (std::size_t j = 0; j < i; ++j) {
            const long double c3 = static_cast<long double>(nodes[i]) - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (static_cast<long double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) {
                c[j][k] = (c4 * c[j][k] - static_cast<long double>(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(c[i][m]);
    return w;
}

Stencil make_stencil(int order, int first, int width, int accuracy) {
    std::vector<double> offsets(static_cast<std::size_t>(width));
    for (int j = 0; j < width; ++j) offsets[static_cast<std::size_t>(j)] = first + j;
    return Stencil{order, accuracy, first, fornberg_weights(0.0, offsets, order)};
}

namespace {

constexpr int kAccuracy = 2;

// Accuracy-2 central stencils: 3 points for orders 1-2, 5 points for orders 3-4.
int central_half_width(int order) { return (order + 1) / 2; }

}  // namespace

StencilSet StencilSet::build() {
    StencilSet s;
    for (int k = 1; k <= max_interior_order; ++k) {
        const int half = central_half_width(k);
        s.central[k] = make_stencil(k, -half, 2 * half + 1, kAccuracy);
        const int width = k + kAccuracy;
        for (int i = 0; i < half; ++i) s.near_left[k].push_back(make_stencil(k, -i, width, kAccuracy));
        for (int m = 0; m < half; ++m) s.near_right[k].push_back(make_stencil(k, m - width + 1, width, kAccuracy));
    }
    for (int k = 1; k <= max_boundary_order; ++k) {
        const int accuracy = boundary_accuracy(k);
        s.boundary[k] = make_stencil(k, 0, k + accuracy, accuracy);
    }
    return s;
}

const StencilSet& StencilSet::standard() {
    static const StencilSet instance = build();
    return instance;
}

std::size_t StencilSet::min_length() const noexcept {
    std::size_t w = 0;
    for (const auto& st : boundary) w = std::max(w, st.width());
    for (const auto& st : central) w = std::max(w, st.width());
    return w;
}

namespace {

double dot(const Stencil& st, std::span<const double> values, std::ptrdiff_t at) {
    double acc = 0.0;
    for (std::size_t j = 0; j < st.width(); ++j) {
        acc += st.weights[j] * values[static_cast<std::size_t>(at + st.first + static_cast<std::ptrdiff_t>(j))];
    }
    return acc;
}

}  // namespace

std::vector<double> apply_derivative(std::span<const double> values, double dx, int order,
                                     const StencilSet& stencils) {
    if (order < 1 || order > max_interior_order) {
        throw ValidationError("apply_derivative: order must be 1-4, got " + std::to_string(order));
    }
    const Stencil& centre = stencils.central[order];
    const auto& left = stencils.near_left[order];
    const auto& right = stencils.near_right[order];
    std::size_t needed = centre.width();
    for (const auto& st : left) needed = std::max(needed, st.width());
    for (const auto& st : right) needed = std::max(needed, st.width());
    const auto n = values.size();
    if (n < needed) {
        throw ValidationError("apply_derivative: field length " + std::to_string(n) + " below stencil width " +
                              std::to_string(needed));
    }
    const double scale = 1.0 / std::pow(dx, order);
    std::vector<double> out(n);
    const auto nl = left.size();
    const auto nr = right.size();
    for (std::size_t i = 0; i < nl; ++i) out[i] = dot(left[i], values, static_cast<std::ptrdiff_t>(i)) * scale;
    for (std::size_t i = nl; i + nr < n; ++i) out[i] = dot(centre, values, static_cast<std::ptrdiff_t>(i)) * scale;
    for (std::size_t m = 0; m < nr; ++m) {
        const auto i = n - 1 - m;
        out[i] = dot(right[m], values, static_cast<std::ptrdiff_t>(i)) * scale;
    }
    return out;
}

std::vector<double> apply_derivative(const Field& field, int order, const StencilSet& stencils) {
    return apply_derivative(field.view(), field.grid.dx(), order, stencils);
}

double boundary_derivative(std::span<const double> values, double dx, int order, const StencilSet& stencils) {
    if (order < 1 || order > max_boundary_order) {
        throw ValidationError("boundary_derivative: order must be 1-6, got " + std::to_string(order));
    }
    const Stencil& st = stencils.boundary[order];
    if (values.size() < st.width()) {
        throw ValidationError("boundary_derivative: field length below one-sided stencil width " +
                              std::to_string(st.width()));
    }
    return dot(st, values, 0) / std::pow(dx, order);
}

double boundary_derivative(const Field& field, int order, const StencilSet& stencils) {
    return boundary_derivative(field.view(), field.grid.dx(), order, stencils);
}

}  // namespace contactline
