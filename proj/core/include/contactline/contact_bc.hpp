#pragma once

namespace contactline {

enum class ThirdBcMode {
    flux,     // h_xxx(0) = flux_target (-1/2 from flux conservation)
    selfsim,  // h_xxx(0) = gamma0 * V(t), compatible with self-similar solutions
};

/// The over-determining condition at the contact line that fixes V(t).
struct ThirdBoundaryCondition {
    ThirdBcMode mode = ThirdBcMode::flux;
    double flux_target = -0.5;
    double gamma0 = 0.0;

    /// h_xxx(0) demanded when the speed is V.
    double value(double V) const noexcept { return mode == ThirdBcMode::flux ? flux_target : gamma0 * V; }
    /// Coefficient of V in value(V).
    double slope() const noexcept { return mode == ThirdBcMode::flux ? 0.0 : gamma0; }
};

}  // namespace contactline
