#include "contactline/gauge.hpp"

#include <cmath>
#include <string>

#include "contactline/error.hpp"

namespace contactline {

namespace {

void check_shift(double H) {
    if (!(H < 1.0) || !std::isfinite(H)) {
        throw ValidationError("gauge shift H must be below 1, got " + std::to_string(H));
    }
}

}  // namespace

double gauge_length_scale(double H) {
    check_shift(H);
    return std::cbrt(1.0 - H);
}

double gauge_time_scale(double H) {
    check_shift(H);
    const double s = std::cbrt(1.0 - H);
    return s * s * s * s;
}

GaugedSolution gauge_transform(const Field& h, SpeedHistory V, double H) {
    const double ls = gauge_length_scale(H);
    const double ts = gauge_time_scale(H);
    const double amp = 1.0 - H;
    // Node i of the stretched grid sits at (1 - H)^{1/3} x_i, so values map node to node.
    Grid grid(h.grid.length() * ls, h.grid.size());
    std::vector<double> values(h.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = H + amp * h[i];
    SpeedHistory mapped = [V = std::move(V), ts, amp](double t) { return V(t / ts) / amp; };
    return {Field(grid, std::move(values), h.time * ts), std::move(mapped)};
}

}  // namespace contactline
