#include "contactline/blowup_fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "contactline/error.hpp"

namespace contactline {

namespace {

struct Samples {
    std::vector<double> t, y;
};

Samples collect(const Trace& trace, Window w, bool use_beta_squared) {
    if (w.end > trace.size()) throw ValidationError("fit window extends past the trace");
    if (w.size() < min_fit_points) {
        throw ValidationError("fit window has " + std::to_string(w.size()) + " records; at least " +
                              std::to_string(min_fit_points) + " are needed");
    }
    Samples s;
    for (std::size_t k = w.begin; k < w.end; ++k) {
        const auto& r = trace.records[k];
        s.t.push_back(r.t);
        s.y.push_back(use_beta_squared ? r.beta * r.beta : r.V);
    }
    return s;
}

double variance_sum(std::span<const double> y) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sst = 0.0;
    for (double v : y) sst += (v - mean) * (v - mean);
    return sst;
}

void finish(RateFit& fit, const Samples& s, double ssr) {
    const auto m = static_cast<double>(s.t.size());
    const double sst = variance_sum(s.y);
    fit.points = s.t.size();
    fit.t_a = s.t.front();
    fit.t_b = s.t.back();
    fit.rms = std::sqrt(std::max(ssr, 0.0) / m);
    const double scale = std::sqrt(sst / m);
    fit.normalized_rms = scale > 0.0 ? fit.rms / scale : (fit.rms > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    fit.singular = sst > 0.0 && 1.0 - ssr / sst >= 0.5;
}

/// Minimizes ssr(t0) over (t_b, t_b + 10 span]: log-spaced scan of t0 - t_b,
/// then golden-section refinement to 1e-10 in t0.
double search_t0(const Samples& s, const std::function<double(double)>& ssr) {
    const double t_b = s.t.back();
    const double span = t_b - s.t.front();
    if (!(span > 0.0)) throw ValidationError("fit window has zero duration");
    const double lo_log = std::log(span * 1e-8);
    const double hi_log = std::log(10.0 * span);
    constexpr int scan = 240;
    auto at = [&](double g) { return t_b + std::exp(g); };

    int best = scan;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= scan; ++i) {
        const double v = ssr(at(lo_log + (hi_log - lo_log) * i / scan));
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = lo_log + (hi_log - lo_log) * std::max(best - 1, 0) / scan;
    double b = lo_log + (hi_log - lo_log) * std::min(best + 1, scan) / scan;

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = ssr(at(c)), fd = ssr(at(d));
    while (at(b) - at(a) > 1e-10) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ssr(at(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ssr(at(d));
        }
        if (b - a < 1e-15) break;
    }
    return at(0.5 * (a + b));
}

struct Line {
    double slope, intercept, ssr;
};

/// Least-squares y = slope x + intercept, centred for conditioning.
Line fit_line(std::span<const double> x, std::span<const double> y) {
    const auto m = static_cast<double>(x.size());
    double xm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xm += x[i];
        ym += y[i];
    }
    xm /= m;
    ym /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    const double intercept = ym - slope * xm;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - slope * x[i] - intercept;
        ssr += r * r;
    }
    return {slope, intercept, ssr};
}

Line log_fit(const Samples& s, double t0) {
    std::vector<double> x(s.t.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::log(t0 - s.t[i]);
    return fit_line(x, s.y);
}

std::pair<double, double> selfsim_fit(const Samples& s, double t0) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        const double w = std::pow(t0 - s.t[i], -0.75);
        num += s.y[i] * w;
        den += w * w;
    }
    const double A = num / den;
    double ssr = 0.0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        const double r = s.y[i] - A * std::pow(t0 - s.t[i], -0.75);
        ssr += r * r;
    }
    return {A, ssr};
}

}  // namespace

std::string_view to_string(RateModel model) noexcept {
    switch (model) {
        case RateModel::log: return "log";
        case RateModel::sqrt: return "sqrt";
        case RateModel::selfsim: return "selfsim";
    }
    return "unknown";
}

RateModel rate_model_from_string(std::string_view name) {
    for (auto m : {RateModel::log, RateModel::sqrt, RateModel::selfsim}) {
        if (to_string(m) == name) return m;
    }
    throw ValidationError("unknown rate model '" + std::string(name) + "'");
}

Window window_between(const Trace& trace, double t_a, double t_b) {
    Window w{trace.size(), trace.size()};
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double t = trace.records[k].t;
        if (t >= t_a && w.begin == trace.size()) w.begin = k;
        if (t <= t_b) w.end = k + 1;
    }
    if (w.end < w.begin) w.end = w.begin;
    return w;
}

Window detect_window(const Trace& trace) {
    constexpr std::size_t min_records = 50;
    constexpr double factor = 10.0;
    if (trace.size() < min_records) return {};
    const auto& r = trace.records;
    const std::size_t last = r.size() - 1;
    const double beta_end = std::abs(r[last].beta);
    const double v_end = std::abs(r[last].V);
    if (!std::isfinite(beta_end) || !std::isfinite(v_end)) return {};

    // Walk back through the run where |beta| decreases strictly forward in time.
    std::optional<std::size_t> start;
    for (std::size_t k = last; k-- > 0;) {
        if (!(std::abs(r[k].beta) > std::abs(r[k + 1].beta))) break;
        if (std::abs(r[k].beta) >= factor * beta_end && v_end >= factor * std::abs(r[k].V)) {
            start = k;
            break;
        }
    }
    if (!start) return {};
    return {*start, r.size()};
}

RateFit fit_log(const Trace& trace, Window window) {
    const Samples s = collect(trace, window, false);
    RateFit fit;
    fit.model = RateModel::log;
    fit.t0 = search_t0(s, [&](double t0) { return log_fit(s, t0).ssr; });
    const Line line = log_fit(s, fit.t0);
    fit.C1 = line.slope;
    fit.C2 = line.intercept;
    finish(fit, s, line.ssr);
    return fit;
}

RateFit fit_selfsim(const Trace& trace, Window window) {
    const Samples s = collect(trace, window, false);
    RateFit fit;
    fit.model = RateModel::selfsim;
    fit.t0 = search_t0(s, [&](double t0) { return selfsim_fit(s, t0).second; });
    const auto [A, ssr] = selfsim_fit(s, fit.t0);
    fit.A = A;
    finish(fit, s, ssr);
    return fit;
}

RateFit fit_sqrt(const Trace& trace, Window window) {
    const Samples s = collect(trace, window, true);
    const Line line = fit_line(s.t, s.y);
    RateFit fit;
    fit.model = RateModel::sqrt;
    fit.a4 = -line.slope;
    if (!(fit.a4 > 0.0)) {
        throw ConstraintViolation("sqrt fit gives a4 = " + std::to_string(fit.a4) + "; the law needs a4 > 0");
    }
    fit.t0 = line.intercept / fit.a4;
    if (!(fit.t0 > s.t.back())) {
        throw ConstraintViolation("sqrt fit places t0 = " + std::to_string(fit.t0) +
                                  " inside the window ending at " + std::to_string(s.t.back()));
    }
    double acc = 0.0;
    for (std::size_t k = window.begin; k < window.end; ++k) {
        const auto& r = trace.records[k];
        acc += r.V * r.V * (fit.t0 - r.t);
    }
    fit.a4_from_V = acc / static_cast<double>(window.size());
    finish(fit, s, line.ssr);
    return fit;
}

std::vector<RateFit> select_model(std::vector<RateFit> fits) {
    if (fits.empty()) throw ValidationError("select_model needs at least one fit");
    std::stable_sort(fits.begin(), fits.end(),
                     [](const RateFit& a, const RateFit& b) { return a.normalized_rms < b.normalized_rms; });
    return fits;
}

}  // namespace contactline
