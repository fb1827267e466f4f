#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "contactline/blowup_fit.hpp"
#include "contactline/error.hpp"

using namespace contactline;

namespace {

struct Law {
    RateModel model;
    double t0;
};

// V on [t0 / 2, 0.99 t0] from the given law with beta = -1 / |V|; for the
// sqrt law beta^2 = 3 (t0 - t) and V = 3 / beta.
Trace synthetic(Law law, std::size_t n = 500, double noise = 0.0, unsigned seed = 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Trace tr;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = law.t0 * (0.5 + 0.49 * static_cast<double>(k) / static_cast<double>(n - 1));
        const double tau = law.t0 - t;
        TraceRecord r;
        r.t = t;
        switch (law.model) {
            case RateModel::log: r.V = 2.0 * std::log(tau) + 1.0; break;
            case RateModel::selfsim: r.V = 5.0 * std::pow(tau, -0.75); break;
            case RateModel::sqrt: r.V = -std::sqrt(3.0 / tau); break;
        }
        r.beta = law.model == RateModel::sqrt ? -std::sqrt(3.0 * tau) : -1.0 / std::abs(r.V);
        if (noise > 0.0) {
            r.V *= 1.0 + noise * gauss(rng);
            r.beta *= 1.0 + noise * gauss(rng);
        }
        tr.records.push_back(r);
    }
    return tr;
}

RateFit fit(RateModel m, const Trace& tr, Window w) {
    switch (m) {
        case RateModel::log: return fit_log(tr, w);
        case RateModel::sqrt: return fit_sqrt(tr, w);
        case RateModel::selfsim: return fit_selfsim(tr, w);
    }
    return {};
}

Window all(const Trace& tr) { return {0, tr.size()}; }

}  // namespace

TEST_CASE("model names round trip") {
    for (auto m : {RateModel::log, RateModel::sqrt, RateModel::selfsim}) {
        CHECK(rate_model_from_string(to_string(m)) == m);
    }
    CHECK_THROWS_AS(rate_model_from_string("cubic"), ValidationError);
}

TEST_CASE("noiseless traces recover the generating parameters") {
    const Trace log_trace = synthetic({RateModel::log, 1.0});
    const RateFit lf = fit_log(log_trace, all(log_trace));
    CHECK(lf.t0 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(lf.C1 == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(lf.C2 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(lf.singular);
    CHECK(lf.points == log_trace.size());

    const Trace sqrt_trace = synthetic({RateModel::sqrt, 1.5});
    const RateFit sf = fit_sqrt(sqrt_trace, all(sqrt_trace));
    CHECK(sf.t0 == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(sf.a4 == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(sf.a4_from_V == doctest::Approx(3.0).epsilon(1e-9));

    const Trace ss_trace = synthetic({RateModel::selfsim, 2.0});
    const RateFit pf = fit_selfsim(ss_trace, all(ss_trace));
    CHECK(pf.t0 == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(pf.A == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(pf.rms < 1e-6);
}

TEST_CASE("noisy traces keep the blow-up time within tolerance") {
    for (auto m : {RateModel::log, RateModel::sqrt, RateModel::selfsim}) {
        std::vector<double> errors;
        for (unsigned seed = 1; seed <= 25; ++seed) {
            const Trace tr = synthetic({m, 1.0}, 500, 0.01, seed);
            errors.push_back(std::abs(fit(m, tr, all(tr)).t0 - 1.0));
        }
        std::nth_element(errors.begin(), errors.begin() + 12, errors.end());
        INFO(to_string(m));
        CHECK(errors[12] <= 1e-3);
    }
}

TEST_CASE("the generating law ranks first") {
    for (auto m : {RateModel::log, RateModel::sqrt, RateModel::selfsim}) {
        const Trace tr = synthetic({m, 1.0});
        std::vector<RateFit> fits;
        for (auto other : {RateModel::log, RateModel::sqrt, RateModel::selfsim}) {
            try {
                fits.push_back(fit(other, tr, all(tr)));
            } catch (const ConstraintViolation&) {
            }
        }
        const auto ranked = select_model(fits);
        INFO(to_string(m));
        CHECK(ranked.front().model == m);
        CHECK(ranked.size() == fits.size());
        for (std::size_t k = 1; k < ranked.size(); ++k) {
            CHECK(ranked[k - 1].normalized_rms <= ranked[k].normalized_rms);
        }
    }
    CHECK_THROWS_AS(select_model({}), ValidationError);
}

TEST_CASE("sqrt law rejects a growing curvature") {
    Trace tr;
    for (int k = 0; k < 20; ++k) {
        TraceRecord r;
        r.t = 0.01 * k;
        r.beta = -std::sqrt(0.1 + r.t);
        r.V = 1.0;
        tr.records.push_back(r);
    }
    CHECK_THROWS_AS(fit_sqrt(tr, all(tr)), ConstraintViolation);
}

TEST_CASE("fit windows are validated") {
    const Trace tr = synthetic({RateModel::log, 1.0}, 100);
    CHECK_THROWS_AS(fit_log(tr, {0, 5}), ValidationError);
    CHECK_THROWS_AS(fit_log(tr, {0, 200}), ValidationError);
    const Window w = window_between(tr, 0.6, 0.9);
    REQUIRE_FALSE(w.empty());
    CHECK(tr.records[w.begin].t >= 0.6);
    CHECK(tr.records[w.begin - 1].t < 0.6);
    CHECK(tr.records[w.end - 1].t <= 0.9);
    CHECK(tr.records[w.end].t > 0.9);
    CHECK(window_between(tr, 2.0, 3.0).empty());
    const RateFit f = fit_log(tr, w);
    CHECK(f.t_a == tr.records[w.begin].t);
    CHECK(f.t_b == tr.records[w.end - 1].t);
}

TEST_CASE("blow-up window detection") {
    Trace sharp = synthetic({RateModel::selfsim, 1.0}, 400);
    for (auto& r : sharp.records) r.beta = -(1.0 - r.t);
    const Window w = detect_window(sharp);
    REQUIRE_FALSE(w.empty());
    CHECK(w.end == sharp.size());
    CHECK(std::abs(sharp.records[w.begin].beta) >= 10.0 * std::abs(sharp.records.back().beta));
    CHECK(std::abs(sharp.records.back().V) >= 10.0 * std::abs(sharp.records[w.begin].V));

    Trace short_trace = sharp;
    short_trace.records.erase(short_trace.records.begin(), short_trace.records.end() - 40);
    CHECK(detect_window(short_trace).empty());

    Trace flat = sharp;
    for (auto& r : flat.records) r.beta = -1.0;
    CHECK(detect_window(flat).empty());

    Trace bounded = sharp;
    for (auto& r : bounded.records) r.V = 1.0;
    CHECK(detect_window(bounded).empty());
}
