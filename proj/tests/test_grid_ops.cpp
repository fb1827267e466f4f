#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "contactline/banded.hpp"
#include "contactline/error.hpp"
#include "contactline/grid.hpp"
#include "contactline/stencil.hpp"
#include "contactline/verification.hpp"

using namespace contactline;

namespace {

std::vector<double> sample(const Grid& g, double (*f)(double)) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.x(i));
    return v;
}

// d^k/dx^k sin(x)
double sin_derivative(double x, int k) {
    switch (k % 4) {
        case 0: return std::sin(x);
        case 1: return std::cos(x);
        case 2: return -std::sin(x);
        default: return -std::cos(x);
    }
}

double max_error(const Grid& g, int order) {
    const auto v = sample(g, [](double x) { return std::sin(x); });
    const auto d = apply_derivative(v, g.dx(), order);
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e = std::max(e, std::abs(d[i] - sin_derivative(g.x(i), order)));
    return e;
}

double boundary_error(const Grid& g, int order) {
    const auto v = sample(g, [](double x) { return std::sin(x); });
    return std::abs(boundary_derivative(v, g.dx(), order) - sin_derivative(0.0, order));
}

// Dense Gaussian elimination with partial pivoting.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const auto n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        }
        std::swap(a[c], a[p]);
        std::swap(b[c], b[p]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double m = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= m * a[c][k];
            b[r] -= m * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace

TEST_CASE("grid spacing and validation") {
    const Grid g(40.0, 4001);
    CHECK(g.dx() == doctest::Approx(0.01));
    CHECK(g.x(0) == 0.0);
    CHECK(g.x(4000) == 40.0);
    CHECK_THROWS_AS(Grid(0.0, 100), ValidationError);
    CHECK_THROWS_AS(Grid(-1.0, 100), ValidationError);
    CHECK_THROWS_AS(Grid(1.0, 8), ValidationError);
    CHECK_THROWS_AS(build_grid(1.0, -5), ValidationError);
    CHECK_THROWS_AS(Field(Grid(1.0, 20), std::vector<double>(19, 0.0)), ValidationError);
    std::vector<double> bad(20, 0.0);
    bad[3] = NAN;
    CHECK_THROWS_AS(Field(Grid(1.0, 20), bad), NumericalError);
}

TEST_CASE("fornberg weights match textbook stencils") {
    const std::vector<double> three{-1, 0, 1};
    const std::vector<double> five{-2, -1, 0, 1, 2};
    const auto d2 = fornberg_weights(0.0, three, 2);
    CHECK(d2[0] == doctest::Approx(1.0));
    CHECK(d2[1] == doctest::Approx(-2.0));
    CHECK(d2[2] == doctest::Approx(1.0));
    const auto d4 = fornberg_weights(0.0, five, 4);
    const double expect4[] = {1, -4, 6, -4, 1};
    for (int j = 0; j < 5; ++j) CHECK(d4[j] == doctest::Approx(expect4[j]));
    const auto d3 = fornberg_weights(0.0, five, 3);
    const double expect3[] = {-0.5, 1, 0, -1, 0.5};
    for (int j = 0; j < 5; ++j) CHECK(d3[j] == doctest::Approx(expect3[j]).epsilon(1e-14));
    const std::vector<double> onesided{0, 1, 2};
    const auto d1 = fornberg_weights(0.0, onesided, 1);
    CHECK(d1[0] == doctest::Approx(-1.5));
    CHECK(d1[1] == doctest::Approx(2.0));
    CHECK(d1[2] == doctest::Approx(-0.5));
    CHECK_THROWS_AS(fornberg_weights(0.0, three, 3), ValidationError);
}

TEST_CASE("every stencil sums to zero and has the documented accuracy") {
    const auto& s = StencilSet::standard();
    for (int k = 1; k <= max_interior_order; ++k) {
        double sum = 0.0;
        for (double w : s.central[k].weights) sum += w;
        CHECK(std::abs(sum) < 1e-12);
        CHECK(s.central[k].accuracy == 2);
    }
    for (int k = 1; k <= max_boundary_order; ++k) {
        CHECK(s.boundary[k].first == 0);
        CHECK(s.boundary[k].accuracy == boundary_accuracy(k));
        CHECK(s.boundary[k].width() == static_cast<std::size_t>(k + boundary_accuracy(k)));
    }
}

TEST_CASE("stencil exactness check passes on the standard set") {
    const auto r = check_stencil_exactness();
    INFO(r.detail);
    CHECK(r.passed);
    CHECK(r.metrics.at(0).second <= 1e-12);
}

TEST_CASE("stencil exactness check names a corrupted stencil") {
    StencilSet broken = StencilSet::build();
    broken.central[2].weights[0] += 1e-6;
    const auto r = check_stencil_exactness(broken);
    CHECK_FALSE(r.passed);
    CHECK(r.detail.find("order 2") != std::string::npos);
}

TEST_CASE("derivatives of sin converge at second order") {
    const Grid coarse(1.0, 33), fine(1.0, 65);
    for (int k = 1; k <= max_interior_order; ++k) {
        const double order = std::log2(max_error(coarse, k) / max_error(fine, k));
        INFO("order " << k);
        CHECK(order > 1.8);
    }
    const Grid bc(1.0, 17), bf(1.0, 33);
    for (int k = 1; k <= max_boundary_order; ++k) {
        const double order = std::log2(boundary_error(bc, k) / boundary_error(bf, k));
        INFO("one-sided order " << k);
        CHECK(order > boundary_accuracy(k) - 0.3);
    }
}

TEST_CASE("apply_derivative rejects short fields and bad orders") {
    const std::vector<double> v(3, 1.0);
    CHECK_THROWS_AS(apply_derivative(v, 0.1, 4), ValidationError);
    const std::vector<double> w(50, 1.0);
    CHECK_THROWS_AS(apply_derivative(w, 0.1, 5), ValidationError);
    CHECK_THROWS_AS(apply_derivative(w, 0.1, 0), ValidationError);
}

TEST_CASE("trapezoid norm carries the expected quadrature error") {
    for (std::size_t n : {17u, 101u}) {
        const Grid g(1.0, n);
        const auto v = sample(g, [](double x) { return x; });
        const double h = g.dx();
        CHECK(l2_norm_sq(v, g) == doctest::Approx(1.0 / 3.0 + h * h / 6.0).epsilon(1e-13));
    }
    const Grid g(1.0, 20);
    CHECK_THROWS_AS(l2_norm_sq(std::vector<double>(19, 0.0), g), ValidationError);
}

TEST_CASE("banded solver agrees with dense elimination") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {1u, 7u, 40u}) {
        const std::size_t kl = 2, ku = 3;
        BandedMatrix a(n, kl, ku);
        std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i > kl ? i - kl : 0; j <= std::min(n - 1, i + ku); ++j) {
                const double v = u(rng);
                a.set(i, j, v);
                dense[i][j] = v;
            }
        }
        std::vector<double> b(n);
        for (auto& x : b) x = u(rng);
        const auto expected = dense_solve(dense, b);
        const BandedLu lu(a);
        const auto x = lu.solve(b);
        for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(expected[i]).epsilon(1e-9));
        const auto back = a.multiply(x);
        for (std::size_t i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(b[i]).epsilon(1e-10));
    }
}

TEST_CASE("banded matrix guards its band and singular systems") {
    BandedMatrix a(5, 1, 1);
    CHECK_THROWS_AS(a.set(0, 2, 1.0), ValidationError);
    CHECK_THROWS_AS(a.set(5, 5, 1.0), ValidationError);
    CHECK(a.get(0, 4) == 0.0);
    CHECK_THROWS_AS(BandedLu{a}, NumericalError);
    for (std::size_t i = 0; i < 5; ++i) a.set(i, i, 2.0);
    const BandedLu lu(a);
    std::vector<double> wrong(4, 1.0);
    CHECK_THROWS_AS(lu.solve_in_place(wrong), ValidationError);
}

TEST_CASE("exit codes follow the error kind") {
    CHECK(exit_code(ErrorKind::validation) == 1);
    CHECK(exit_code(ErrorKind::parse) == 1);
    CHECK(exit_code(ErrorKind::domain_too_short) == 1);
    CHECK(exit_code(ErrorKind::numerical) == 2);
    CHECK(exit_code(ErrorKind::closure) == 2);
    CHECK(exit_code(ErrorKind::certification) == 2);
    CHECK(exit_code(ErrorKind::constraint) == 2);
    CHECK(exit_code(ErrorKind::verification) == 3);
}
