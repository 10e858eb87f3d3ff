#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nanonmr/error.hpp"
#include "nanonmr/numerics.hpp"

using namespace nanonmr;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Plain long-double power series for I0, the reference for the scaled routine.
long double i0_series(long double x) {
    long double term = 1.0L, sum = 1.0L;
    for (int k = 1; k < 400; ++k) {
        term *= (x * x / 4.0L) / (static_cast<long double>(k) * k);
        sum += term;
        if (term < 1e-21L * sum) break;
    }
    return sum;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("Gauss-Legendre rules are exact for polynomials") {
    for (int n : {2, 3, 5, 8, 16, 33}) {
        const Rule1D& r = gauss_legendre(n);
        double w = 0.0;
        for (double v : r.w) w += v;
        CHECK(w == Approx(2.0).epsilon(1e-14));
        // Degree 2n-1 is integrated exactly.
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) s += r.w[i] * std::pow(r.x[i], 2 * n - 2);
        CHECK(s == Approx(2.0 / (2 * n - 1)).epsilon(1e-13));
    }
}

TEST_CASE("integrate_nd reference integrals") {
    const std::array<Interval, 1> unit{{{0.0, 1.0}}};
    auto x2 = integrate_nd([](std::span<const double> p) { return p[0] * p[0]; }, unit, {});
    CHECK(std::abs(x2.value - 1.0 / 3.0) < 1e-12);

    const std::array<Interval, 4> cube{{{0, 1}, {0, 1}, {0, 1}, {0, 1}}};
    auto one = integrate_nd([](std::span<const double>) { return 1.0; }, cube, {});
    CHECK(std::abs(one.value - 1.0) < 1e-14);

    const std::array<Interval, 1> half{{{0.0, kPi}}};
    auto s = integrate_nd([](std::span<const double> p) { return std::sin(p[0]); }, half, {});
    CHECK(std::abs(s.value - 2.0) < 1e-10);
    CHECK(s.error <= 1e-6 * 2.0);
}

TEST_CASE("integrate_nd is linear on random polynomials") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const std::array<Interval, 3> box{{{0, 1}, {-1, 2}, {0.5, 1.5}}};
    for (int trial = 0; trial < 10; ++trial) {
        std::array<double, 4> c{};
        for (auto& v : c) v = u(rng);
        const double a = u(rng), b = u(rng);
        auto f = [&](std::span<const double> p) { return c[0] * p[0] * p[1] + c[1] * p[2] * p[2]; };
        auto g = [&](std::span<const double> p) { return c[2] * p[0] * p[0] * p[0] + c[3] * p[1]; };
        auto fg = [&](std::span<const double> p) { return a * f(p) + b * g(p); };
        const double lhs = integrate_nd(fg, box, {}).value;
        const double rhs = a * integrate_nd(f, box, {}).value + b * integrate_nd(g, box, {}).value;
        CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("integrate_nd reports non-convergence with the best value") {
    QuadratureSpec spec;
    spec.nodes = {2};
    spec.max_refinements = 0;
    spec.rel_tol = 1e-14;
    const std::array<Interval, 1> box{{{0.0, 1.0}}};
    try {
        integrate_nd([](std::span<const double> p) { return std::sqrt(p[0]); }, box, spec);
        FAIL("expected accuracy error");
    } catch (const AccuracyError& e) {
        CHECK(e.kind() == ErrorKind::Accuracy);
        CHECK(e.best_value() == Approx(2.0 / 3.0).epsilon(1e-2));
    }
}

TEST_CASE("quadrature spec validation") {
    QuadratureSpec spec;
    spec.nodes = {1};
    CHECK_THROWS_AS(spec.validate(), Error);
    spec.nodes = {4};
    spec.rel_tol = 1.5;
    CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("scan_roots finds known zeros") {
    RootScanSpec spec{0.0, 10.0, 0.1};
    auto r = scan_roots([](double x) { return std::cos(x); }, spec);
    REQUIRE(r.roots.size() == 3);
    CHECK(r.roots[0] == Approx(kPi / 2).epsilon(1e-12));
    CHECK(r.roots[1] == Approx(3 * kPi / 2).epsilon(1e-12));
    CHECK(r.roots[2] == Approx(5 * kPi / 2).epsilon(1e-12));

    auto s = scan_roots([](double x) { return x * x - 2.0; }, {0.0, 2.0, 0.1});
    REQUIRE(s.roots.size() == 1);
    CHECK(std::abs(s.roots[0] - std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("scan_roots splits at poles and matches a dense oracle") {
    // tan(x) = 0.3/x has one root per branch; without the pole list the
    // sign flips at (k + 1/2) pi would be reported as roots.
    const double a = 0.3;
    auto f = [a](double x) { return std::tan(x) - a / x; };
    std::vector<double> poles;
    for (int k = 0; k < 6; ++k) poles.push_back((k + 0.5) * kPi);
    RootScanSpec spec{1e-6, 6 * kPi - 1e-9, 0.05};
    auto r = scan_roots(f, spec, poles);
    REQUIRE(r.roots.size() == 6);
    for (std::size_t k = 0; k < r.roots.size(); ++k) {
        // Dense-grid oracle: 10^4 samples on the branch, locate the sign change.
        const double lo = k == 0 ? 1e-6 : (k - 0.5) * kPi + 1e-9;
        const double hi = (k + 0.5) * kPi - 1e-9;
        double prev = f(lo), xprev = lo, oracle = -1;
        for (int i = 1; i <= 10000; ++i) {
            const double x = lo + (hi - lo) * i / 10000.0;
            const double v = f(x);
            if (prev < 0 && v >= 0) {
                oracle = 0.5 * (x + xprev);
                break;
            }
            prev = v;
            xprev = x;
        }
        CHECK(std::abs(r.roots[k] - oracle) < (hi - lo) / 10000.0);
    }
    // Sorted, deduplicated, small residuals.
    for (std::size_t k = 1; k < r.roots.size(); ++k) CHECK(r.roots[k] > r.roots[k - 1]);
}

TEST_CASE("scan_roots truncation and resolution errors") {
    RootScanSpec spec{0.0, 20.0, 0.1};
    spec.max_roots = 2;
    auto r = scan_roots([](double x) { return std::sin(x - 0.5); }, spec);
    CHECK(r.roots.size() == 2);
    CHECK(r.truncated);

    RootScanSpec need{0.0, 1.0, 0.1};
    need.min_roots = 1;
    CHECK_THROWS_AS(scan_roots([](double x) { return x + 1.0; }, need), Error);
}

TEST_CASE("bessel_i0e values and overflow safety") {
    CHECK(bessel_i0e(0.0) == 1.0);
    CHECK(bessel_i0e(1.0) == Approx(0.46576).epsilon(1e-5));
    const double big = bessel_i0e(700.0);
    CHECK(std::isfinite(big));
    CHECK(rel(big, 1.0 / std::sqrt(2 * kPi * 700.0)) < 1e-3);
    CHECK(std::isfinite(bessel_i0e(1e300)));
    CHECK_THROWS_AS(bessel_i0e(-1.0), Error);
}

TEST_CASE("bessel_i0e matches the naive series for x <= 30") {
    for (double x = 0.0; x <= 30.0; x += 0.37) {
        const double ref = static_cast<double>(i0_series(x));
        CHECK(rel(bessel_i0e(x) * std::exp(x), ref) < 1e-9);
    }
    // Across the switch to the asymptotic branch, against libstdc++.
    for (double x : {29.9, 30.0, 30.1, 45.0, 120.0, 650.0}) {
        CHECK(rel(bessel_i0e(x), std::cyl_bessel_i(0.0, x) * std::exp(-x)) < 1e-10);
    }
}

TEST_CASE("bessel_j agrees with the standard library") {
    for (double x = 0.0; x < 200.0; x += 0.173) {
        const double j0 = std::cyl_bessel_j(0.0, x);
        const double j1 = std::cyl_bessel_j(1.0, x);
        CHECK(std::abs(bessel_j0(x) - j0) < 1e-10 * std::max(1.0, std::abs(j0)) + 1e-13);
        CHECK(std::abs(bessel_j1(x) - j1) < 1e-10 * std::max(1.0, std::abs(j1)) + 1e-13);
    }
    auto z = bessel_j(0, 0.0);
    CHECK(z.value == 1.0);
    CHECK(z.derivative == 0.0);
    CHECK_THROWS_AS(bessel_j(2, 1.0), Error);
    CHECK_THROWS_AS(bessel_j(0, -1.0), Error);
}

TEST_CASE("J0' = -J1 and J1' from the recurrence") {
    for (double x = 0.05; x < 60.0; x += 0.5) {
        CHECK(bessel_j(0, x).derivative == -bessel_j1(x));
        const double ref = 0.5 * (std::cyl_bessel_j(0.0, x) - std::cyl_bessel_j(2.0, x));
        CHECK(std::abs(bessel_j(1, x).derivative - ref) < 1e-10);
    }
}

TEST_CASE("Bessel zeros recovered by scan_roots") {
    auto j0 = scan_roots([](double x) { return bessel_j0(x); }, {0.0, 3.0, 0.05});
    REQUIRE(j0.roots.size() == 1);
    CHECK(std::abs(j0.roots[0] - 2.404825557695773) < 1e-9);
    auto dj0 = scan_roots([](double x) { return bessel_j(0, x).derivative; }, {0.5, 5.0, 0.05});
    REQUIRE(dj0.roots.size() == 1);
    CHECK(std::abs(dj0.roots[0] - 3.831705970207512) < 1e-9);
}

TEST_CASE("erfcx is smooth across branches") {
    for (double x : {0.0, 0.5, 3.0, 10.0, 25.9, 26.0, 26.1, 100.0}) {
        // Continued-fraction oracle (Lentz) for x > 0.
        double ref;
        if (x < 2.0) {
            ref = std::exp(x * x) * std::erfc(x);
        } else {
            double f = x, c = x, d = 0.0;
            for (int n = 1; n < 200; ++n) {
                const double an = n / 2.0;
                d = x + an * d;
                d = 1.0 / d;
                c = x + an / c;
                f *= c * d;
            }
            ref = 1.0 / (std::sqrt(kPi) * f);
        }
        CHECK(rel(erfcx(x), ref) < 1e-12);
    }
}

TEST_CASE("pairwise_sum") {
    std::vector<double> v(1000, 0.1);
    CHECK(pairwise_sum(v) == Approx(100.0).epsilon(1e-14));
    CHECK(pairwise_sum({}) == 0.0);
}
