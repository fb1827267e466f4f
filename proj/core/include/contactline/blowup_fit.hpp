#pragma once

#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "contactline/diagnostics.hpp"

namespace contactline {

/// Candidate laws near the singular time t0:
///   log:      V = C1 log(t0 - t) + C2
///   sqrt:     beta^2 = a4 (t0 - t)
///   selfsim:  V = A (t0 - t)^{-3/4}
enum class RateModel { log, sqrt, selfsim };

std::string_view to_string(RateModel model) noexcept;
RateModel rate_model_from_string(std::string_view name);

/// Record range [begin, end) of a trace.
struct Window {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool empty() const noexcept { return end <= begin; }
    std::size_t size() const noexcept { return empty() ? 0 : end - begin; }
};

/// Records with t_a <= t <= t_b.
Window window_between(const Trace& trace, double t_a, double t_b);

/// Trailing window over which |beta| decays monotonically by at least 10x
/// and |V| grows by at least 10x. Empty when no such window exists or the
/// trace has fewer than 50 records.
Window detect_window(const Trace& trace);

struct RateFit {
    static constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    RateModel model = RateModel::log;
    double t0 = nan;
    double C1 = nan, C2 = nan;  // log
    double a4 = nan;            // sqrt, from beta^2
    double a4_from_V = nan;     // sqrt, mean of V^2 (t0 - t)
    double A = nan;             // selfsim

    double rms = 0.0;
    double normalized_rms = 0.0;  // rms over the standard deviation of the fitted data
    bool singular = false;        // the law explains at least half of the data variance
    double t_a = nan, t_b = nan;
    std::size_t points = 0;
};

inline constexpr std::size_t min_fit_points = 8;

/// Golden-section search over t0 in (t_b, t_b + 10 (t_b - t_a)] with the
/// linear coefficients solved exactly for each candidate.
RateFit fit_log(const Trace& trace, Window window);
RateFit fit_selfsim(const Trace& trace, Window window);

/// Linear least squares of beta^2 against t. Throws ConstraintViolation when
/// the fitted a4 is not positive or the implied t0 does not exceed t_b.
RateFit fit_sqrt(const Trace& trace, Window window);

/// Sorted by normalized rms, best first; every input fit is kept.
std::vector<RateFit> select_model(std::vector<RateFit> fits);

}  // namespace contactline
