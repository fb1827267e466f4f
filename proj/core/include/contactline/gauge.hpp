#pragma once

#include <functional>

#include "contactline/grid.hpp"

namespace contactline {

using SpeedHistory = std::function<double(double t)>;

struct GaugedSolution {
    Field field;        // H + (1 - H) h on the stretched grid, at the stretched time
    SpeedHistory V;     // V~(t) = V(t / (1 - H)^{4/3}) / (1 - H)
};

/// Shift-scaling symmetry of the linear problem:
///   h~(x, t) = H + (1 - H) h(x / (1 - H)^{1/3}, t / (1 - H)^{4/3}),
/// which keeps h(0) = 1, h_x(0) = 0, h_xxx(0) = -1/2 and moves the
/// far-field value to H. Requires H < 1.
GaugedSolution gauge_transform(const Field& h, SpeedHistory V, double H);

/// Spatial and temporal stretch factors (1 - H)^{1/3} and (1 - H)^{4/3}.
double gauge_length_scale(double H);
double gauge_time_scale(double H);

}  // namespace contactline
