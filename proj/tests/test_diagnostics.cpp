#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "contactline/diagnostics.hpp"
#include "contactline/error.hpp"
#include "contactline/pde_stepper.hpp"

using namespace contactline;

namespace {

// d^k/dx^k exp(-x^2) = (-1)^k H_k(x) exp(-x^2)
double gaussian(double x, int k) {
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    return sign * std::hermite(static_cast<unsigned>(k), x) * std::exp(-x * x);
}

// Composite Simpson of (d^k gaussian)^2 on [0, L].
double gaussian_norm_sq(int k, double L) {
    const int m = 20000;
    const double h = L / m;
    double s = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double w = i == 0 || i == m ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double v = gaussian(i * h, k);
        s += w * v * v;
    }
    return s * h / 3.0;
}

Field gaussian_field(std::size_t n, double L = 8.0) {
    const Grid g(L, n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = gaussian(g.x(i), 0);
    return Field(g, v, 0.0);
}

TraceRecord record(double t, double V, double beta, double E_h, double D_h) {
    TraceRecord r;
    r.t = t;
    r.V = V;
    r.beta = beta;
    r.E_h = E_h;
    r.D_h = D_h;
    r.E_ux = D_h;
    return r;
}

}  // namespace

TEST_CASE("measure matches analytic norms of a gaussian") {
    const Field h = gaussian_field(1601);
    const auto r = measure(h, 0.7);
    CHECK(r.V == 0.7);
    CHECK(r.E_h == doctest::Approx(std::sqrt(std::numbers::pi / 8.0)).epsilon(1e-6));
    CHECK(r.E_u == doctest::Approx(gaussian_norm_sq(1, 8.0)).epsilon(1e-4));
    CHECK(r.D_h == doctest::Approx(gaussian_norm_sq(2, 8.0)).epsilon(1e-4));
    CHECK(r.E_ux == r.D_h);
    CHECK(r.D_u == doctest::Approx(gaussian_norm_sq(3, 8.0)).epsilon(1e-3));
    CHECK(r.D_ux == doctest::Approx(gaussian_norm_sq(4, 8.0)).epsilon(1e-3));
    CHECK(r.beta == doctest::Approx(-2.0).epsilon(1e-4));
}

TEST_CASE("one-sided fifth and sixth derivatives converge at third order") {
    // Finer grids hit the rounding floor of the 1/dx^6 weights.
    const auto coarse = measure(gaussian_field(101), 0.0);
    const auto mid = measure(gaussian_field(201), 0.0);
    const auto fine = measure(gaussian_field(401), 0.0);
    CHECK(observed_order(std::abs(mid.a4), std::abs(fine.a4)) > 2.7);
    CHECK(observed_order(std::abs(coarse.a5 + 120.0), std::abs(mid.a5 + 120.0)) > 2.7);
    CHECK(observed_order(std::abs(mid.a5 + 120.0), std::abs(fine.a5 + 120.0)) > 2.7);
    CHECK(std::abs(fine.a4) < 0.1);
    CHECK(fine.a5 == doctest::Approx(-120.0).epsilon(2e-3));
}

TEST_CASE("u = h_x vanishes at the wall to second order") {
    auto wall_u = [](std::size_t n) {
        const Field h = initial_profile(-1.0, 0.5, Grid(40.0, n));
        const Field u = compute_u(h);
        return std::abs(u[0]);
    };
    const double coarse = wall_u(2001), fine = wall_u(4001);
    CHECK(fine < 1e-4);
    CHECK(observed_order(coarse, fine) > 1.7);
}

TEST_CASE("far-field monitor measures the tail departure") {
    const Grid g(10.0, 201);
    const Field flat(g, std::vector<double>(201, 0.3));
    CHECK(farfield_monitor(flat, 0.3) == doctest::Approx(0.0));
    CHECK(farfield_monitor(flat, 0.0) == doctest::Approx(0.3));
    const Field h = gaussian_field(801, 4.0);
    // The tail covers x >= 3.6 where the first derivative dominates.
    CHECK(farfield_monitor(h) > gaussian(3.6, 0));
    CHECK(farfield_monitor(gaussian_field(801, 12.0)) < 1e-30);
}

TEST_CASE("pointwise residuals on polynomial data") {
    const double beta = -0.8, a4 = 0.6, a5 = -1.5, V = 1.7, beta_dot = 0.25;
    auto residuals = [&](std::size_t n) {
        const Grid g(2.0, n);
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double x = g.x(i);
            v[i] = 1.0 + beta * x * x / 2 - x * x * x / 12 + a4 * std::pow(x, 5) / 120 + a5 * std::pow(x, 6) / 720;
        }
        return pointwise_residuals(Field(g, v), V, beta_dot);
    };
    // The sixth-degree data is inside the exactness range of the high-order
    // stencils; only the second-order curvature stencil leaves an error.
    const auto coarse = residuals(21), fine = residuals(41);
    CHECK(coarse.r2 == doctest::Approx(beta_dot + a5 + 0.5 * V).epsilon(1e-6));
    const double exact_r1 = a4 - V * beta;
    CHECK(observed_order(std::abs(coarse.r1 - exact_r1), std::abs(fine.r1 - exact_r1)) > 1.8);
    CHECK(fine.r1 == doctest::Approx(exact_r1).epsilon(1e-4));
}

TEST_CASE("beta rates are exact for quadratics on uneven spacing") {
    Trace tr;
    for (double t : {0.0, 0.1, 0.25, 0.3, 0.6}) tr.records.push_back(record(t, 0.0, 1.0 + 2.0 * t - 3.0 * t * t, 1.0, 0.0));
    const auto rates = beta_rates(tr);
    for (std::size_t k = 1; k + 1 < rates.size(); ++k) {
        CHECK(rates[k] == doctest::Approx(2.0 - 6.0 * tr.records[k].t).epsilon(1e-12));
    }
}

TEST_CASE("energy balance vanishes on an exact synthetic trace and flags injected errors") {
    // E_h = 1 - t^2, D_h = t, V = -1: dE/dt + 2 D_h = -1 - V holds exactly.
    Trace tr;
    for (int k = 0; k <= 20; ++k) {
        const double t = 0.05 * k;
        tr.records.push_back(record(t, -1.0, -0.5, 1.0 - t * t, t));
    }
    const auto clean = energy_balance(tr, BalanceId::h_energy);
    CHECK(clean.residuals.size() == 20);
    CHECK(clean.max_residual < 1e-12);

    tr.records[7].E_h += 1e-3;
    const auto dirty = energy_balance(tr, BalanceId::h_energy);
    CHECK(dirty.max_residual == doctest::Approx(1e-3 / 0.05).epsilon(1e-6));
    CHECK(std::abs(dirty.residuals[6]) > 1e-2);
    CHECK(std::abs(dirty.residuals[5]) < 1e-12);

    BalanceOptions window;
    window.t_begin = 0.5;
    CHECK(energy_balance(tr, BalanceId::h_energy, window).max_residual < 1e-12);
}

TEST_CASE("balance names round trip") {
    for (auto id : {BalanceId::h_energy, BalanceId::u_energy, BalanceId::ux_energy, BalanceId::pointwise_1,
                    BalanceId::pointwise_2}) {
        CHECK(balance_id_from_string(to_string(id)) == id);
    }
    CHECK_THROWS_AS(balance_id_from_string("momentum"), ValidationError);
    CHECK(halt_reason_from_string(to_string(HaltReason::farfield)) == HaltReason::farfield);
}

TEST_CASE("observed order") {
    CHECK(observed_order(4.0, 1.0) == doctest::Approx(2.0));
    CHECK(observed_order(8.0, 1.0, 2.0) == doctest::Approx(3.0));
    BalanceReport coarse, fine;
    coarse.max_residual = 1.0;
    fine.max_residual = 0.25;
    CHECK(*with_order(fine, coarse).observed_order == doctest::Approx(2.0));
}

TEST_CASE("trace validation") {
    Trace tr;
    tr.records = {record(0.0, 1, -1, 1, 0), record(0.1, 1, -1, 1, 0)};
    tr.validate();
    tr.records.push_back(record(0.1, 1, -1, 1, 0));
    CHECK_THROWS_AS(tr.validate(), ValidationError);
    tr.records.back() = record(0.2, 1, -1, -1, 0);
    CHECK_THROWS_AS(tr.validate(), ValidationError);
}

TEST_CASE("first non-physical record") {
    Trace tr;
    for (double b : {-1.0, -0.5, -1e-3, 0.0, -0.2}) tr.records.push_back(record(tr.size() * 0.1, 0, b, 1, 0));
    CHECK(first_nonphysical(tr) == 3u);
    CHECK(first_nonphysical(tr, -0.6) == 1u);
    tr.records.resize(3);
    CHECK_FALSE(first_nonphysical(tr).has_value());
}

TEST_CASE("existence budget on a synthetic trace with known blow-up bound") {
    // V = -1/2, no dissipation: ||h||^2 = 1 - t / 2 and the bound is T* = 2.
    Trace tr;
    for (int k = 0; k <= 15; ++k) {
        const double t = 0.1 * k;
        tr.records.push_back(record(t, -0.5, -0.25, 1.0 - 0.5 * t, 0.0));
    }
    const auto rep = existence_bound_check(tr);
    CHECK(rep.identity_holds);
    CHECK(rep.max_discrepancy < 1e-12);
    CHECK(rep.initial_energy == 1.0);
    CHECK(rep.h_energy.hypothesis_holds);
    REQUIRE(rep.h_energy.time_bound.has_value());
    CHECK(*rep.h_energy.time_bound == doctest::Approx(2.0));
    CHECK(rep.h_energy.consistent);
    CHECK(rep.h_energy.final_budget == doctest::Approx(0.25));
    CHECK(rep.u_energy.hypothesis_holds);
    CHECK(rep.ux_energy.hypothesis_holds);

    // Running past the bound drives the budget negative.
    for (int k = 16; k <= 25; ++k) {
        const double t = 0.1 * k;
        tr.records.push_back(record(t, -0.5, -0.25, 1.0 - 0.5 * t, 0.0));
    }
    const auto past = existence_bound_check(tr);
    CHECK_FALSE(past.h_energy.consistent);

    tr.records.resize(16);
    tr.records.back().E_h += 1e-2;
    const auto broken = existence_bound_check(tr);
    CHECK_FALSE(broken.identity_holds);
    CHECK(broken.max_discrepancy == doctest::Approx(1e-2));
}

TEST_CASE("existence hypotheses fail when the speed dips below -1") {
    Trace tr;
    for (int k = 0; k <= 10; ++k) tr.records.push_back(record(0.1 * k, -1.5, -0.25, 1.0 + 0.5 * 0.1 * k, 0.0));
    const auto rep = existence_bound_check(tr);
    CHECK_FALSE(rep.h_energy.hypothesis_holds);
    CHECK_FALSE(rep.h_energy.time_bound.has_value());
    CHECK(rep.identity_holds);
}
