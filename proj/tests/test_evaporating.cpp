#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "nanonmr/error.hpp"
#include "nanonmr/evaporating.hpp"
#include "nanonmr/freediff.hpp"
#include "nanonmr/sticky.hpp"

using namespace nanonmr;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST_CASE("eta roots satisfy the parity equations") {
    const auto g = make_geometry(3, 4, 1);
    for (double tau_ev : {0.5, 10.0, 1e3}) {
        const double eta0 = 1.0 / tau_ev;
        const auto r = solve_eta(g, tau_ev, 30);
        REQUIRE(r.even.size() == 30);
        REQUIRE(r.odd.size() == 30);
        for (double e : r.even) {
            // eta0/eta = tan(eta L/2) in the pole-free form.
            const double x = e * g.L / 2;
            CHECK(std::abs(x * std::sin(x) - 0.5 * eta0 * g.L * std::cos(x)) < 1e-10 * std::max(1.0, x));
        }
        for (double e : r.odd) {
            const double x = e * g.L / 2;
            CHECK(std::abs(x * std::cos(x) + 0.5 * eta0 * g.L * std::sin(x)) < 1e-10 * std::max(1.0, x));
        }
        // Merged families alternate +, -, +, - and are strictly increasing.
        for (std::size_t k = 0; k < 30; ++k) {
            CHECK(r.even[k] < r.odd[k]);
            if (k + 1 < 30) CHECK(r.odd[k] < r.even[k + 1]);
        }
    }
}

TEST_CASE("eta roots against a dense-scan oracle") {
    const auto g = make_geometry(1, 2, 1);
    const double tau_ev = 3.0;
    const double a = 0.5 * g.L / tau_ev;
    const auto r = solve_eta(g, tau_ev, 8);
    for (int k = 0; k < 8; ++k) {
        // tan-branch (k pi - pi/2, k pi + pi/2) sampled 1e4 times.
        const double lo = std::max(1e-9, (k - 0.5) * kPi + 1e-9), hi = (k + 0.5) * kPi - 1e-9;
        auto f = [a](double x) { return std::tan(x) - a / x; };
        double xprev = lo, fprev = f(lo), root = -1;
        for (int i = 1; i <= 10000; ++i) {
            const double x = lo + (hi - lo) * i / 10000.0;
            const double v = f(x);
            if (fprev < 0 && v >= 0) root = 0.5 * (x + xprev);
            xprev = x;
            fprev = v;
        }
        CHECK(std::abs(r.even[k] * g.L / 2 - root) < (hi - lo) / 1e4);
    }
}

TEST_CASE("eta small-rate limits") {
    const double L = 5.0;
    const auto g = make_geometry(5, L, 1);
    // eta0 L = 1e-3.
    const double tau_ev = L / 1e-3;
    const auto r = solve_eta(g, tau_ev, 3);
    CHECK(r.even[0] == Approx(std::sqrt(2 * (1 / tau_ev) / L)).epsilon(1e-3));
    // Reflective limit eta0 L = 1e-6.
    const auto n = solve_eta(g, L / 1e-6, 3);
    CHECK(n.odd[0] == Approx(kPi / L).epsilon(1e-3));
    CHECK(n.even[1] == Approx(2 * kPi / L).epsilon(1e-3));
    const auto exact = solve_eta(g, kInf, 3);
    CHECK(exact.even[0] == 0.0);
    CHECK(exact.odd[0] == Approx(kPi / L));
}

TEST_CASE("beta roots") {
    const double R = 5.0;
    const auto g = make_geometry(R, 5, 1);
    const double tau_ev = R / 1e-3;  // eta0 R = 1e-3
    const auto b = solve_beta(g, tau_ev, 20);
    REQUIRE(b.size() == 20);
    CHECK(b[0] * R == Approx(std::sqrt(2e-3)).epsilon(1e-3));
    const double c = R / tau_ev;
    for (std::size_t p = 0; p < b.size(); ++p) {
        const double xi = b[p] * R;
        const auto j0 = bessel_j(0, xi);
        CHECK(std::abs(xi * j0.derivative + c * j0.value) < 1e-10);
        if (p) CHECK(b[p] > b[p - 1]);
    }
    const auto near = solve_beta(g, R / 1e-9, 3);
    CHECK(std::abs(near[1] * R - 3.83171) < 1e-4);
    const auto exact = solve_beta(g, kInf, 3);
    CHECK(exact[0] == 0.0);
    CHECK(exact[1] * R == Approx(3.831705970207512).epsilon(1e-12));
    CHECK_THROWS_AS(solve_beta(g, -1.0, 3), Error);
}

TEST_CASE("mode table completeness and structure") {
    const auto g = make_geometry(5, 5, 1);
    Truncation t;
    t.M = 40;
    t.P = 40;
    const auto table = build_mode_table(g, 1e3, t);
    const double b2 = b_rms_squared(g);
    CHECK(table.weight_sum == Approx(b2).epsilon(0.05));
    CHECK(table.weight_sum == Approx(b2).epsilon(1e-3));
    for (const auto& m : table.modes) {
        CHECK(m.weight >= 0);
        CHECK(std::isfinite(m.weight));
        CHECK(m.tau > 0);
    }
    const auto spec = solve_spectrum(g, 1e3, 1, 1);
    CHECK(table.dominant().tau == Approx(1 / (spec.beta[0] * spec.beta[0] + spec.even[0] * spec.even[0])));
    CHECK(table.dominant().m == 0);
    CHECK(table.dominant().p == 0);
    CHECK(table.dominant().parity == 1);
    // tau decreasing in m and p within a family.
    auto tau_of = [&](int m, int parity, int p) {
        for (const auto& x : table.modes)
            if (x.m == m && x.parity == parity && x.p == p) return x.tau;
        return -1.0;
    };
    for (int m = 0; m < 5; ++m)
        for (int p = 0; p < 5; ++p) {
            CHECK(tau_of(m, 1, p) > tau_of(m + 1, 1, p));
            CHECK(tau_of(m, 1, p) > tau_of(m, 1, p + 1));
            CHECK(tau_of(m, -1, p) > tau_of(m + 1, -1, p));
        }
    // The (0,0) weight is small (about the plateau); its dominance is in
    // decay time: beyond a few tau_V it carries nearly all the correlation.
    CHECK(table.dominant().weight == Approx(plateau_ideal(g)).epsilon(0.01));
    for (double tt : {50.0, 100.0, 1000.0})
        CHECK(table.dominant().weight * std::exp(-tt / table.dominant().tau) / g_evaporating(tt, table) > 0.5);
}

TEST_CASE("reflective table: (0,0) weight is the ideal plateau") {
    for (auto [R, L] : {std::pair{5.0, 5.0}, {1.0, 3.0}, {2.0, 0.5}}) {
        const auto g = make_geometry(R, L, 1);
        const auto table = build_mode_table(g, kInf);
        CHECK(std::isinf(table.dominant().tau));
        CHECK(table.dominant().weight == Approx(plateau_ideal(g)).epsilon(1e-9));
        CHECK(table.weight_sum == Approx(b_rms_squared(g)).epsilon(2e-3));
        CHECK(surviving_fraction(1e6, table) == Approx(1.0).epsilon(1e-9));
    }
    // Far from the side walls, early times follow the half-space free curve.
    const auto big = build_mode_table(make_geometry(5, 5, 1), kInf);
    CHECK(g_evaporating(0.01, big) == Approx(big.b_rms2 * g_free(0.01)).epsilon(2e-3));
}

TEST_CASE("g_evaporating monotone and long-time slope") {
    const auto g = make_geometry(5, 5, 1);
    const auto table = build_mode_table(g, 1e3);
    double prev = 1e9;
    for (double t = 0.0; t < 2e4; t = t == 0 ? 1e-3 : t * 1.3) {
        const double v = g_evaporating(t, table);
        CHECK(v > 0);
        CHECK(v < prev);
        prev = v;
    }
    const double t1 = 500, t2 = 2000;
    const double slope = std::log(g_evaporating(t2, table) / g_evaporating(t1, table)) / (t2 - t1);
    CHECK(slope * table.dominant().tau == Approx(-1.0).epsilon(0.01));
    // Fast evaporation decays faster than the free curve.
    const auto fast = build_mode_table(g, 1.0);
    for (double t : {0.01, 0.1, 1.0, 10.0})
        CHECK(g_evaporating(t, fast) < b_rms_squared(g) * g_free(t));
}

TEST_CASE("reflective limit at five volume times") {
    const auto g = make_geometry(5, 5, 1);
    const auto table = build_mode_table(g, 1e6);
    const double tau_v = std::pow(32 / (15 * std::sqrt(kPi) * plateau_ideal(g)), 2.0 / 3.0);
    CHECK(g_evaporating(5 * tau_v, table) == Approx(plateau_ideal(g)).epsilon(0.05));
}

TEST_CASE("propagator: survival and symmetry") {
    const auto g = make_geometry(1, 1.5, 1);
    Truncation t;
    t.M = 6;
    t.P = 6;
    const auto table = build_mode_table(g, 2.0, t);
    const double tt = 0.5;
    // Uniform initial population: 4D quadrature of P equals the closed form.
    QuadratureSpec q;
    q.nodes = {10};
    q.subdivisions = {1};
    q.rel_tol = 1e-4;
    q.max_refinements = 1;
    const std::array<Interval, 4> box{{{0, g.R}, {g.z_bottom(), g.z_top()}, {0, g.R}, {g.z_bottom(), g.z_top()}}};
    const auto res = integrate_nd(
        [&](std::span<const double> p) {
            return 4 * kPi * kPi * p[0] * p[2] *
                   evaluate_propagator(p[0], 0, p[1], tt, p[2], 0, p[3], table).density;
        },
        box, q);
    CHECK(res.value / g.volume == Approx(surviving_fraction(tt, table)).epsilon(1e-4));
    CHECK(surviving_fraction(tt, table) < 1.0);
    CHECK(surviving_fraction(2 * tt, table) < surviving_fraction(tt, table));
    // Rotation invariance of the n = 0 sector.
    const double a = evaluate_propagator(0.3, 0.1, 1.4, tt, 0.7, 2.0, 2.1, table).density;
    CHECK(evaluate_propagator(0.3, 1.1, 1.4, tt, 0.7, 3.0, 2.1, table).density == a);
    CHECK(evaluate_propagator(0.3, 0.1, 1.4, 1e-6, 0.7, 2.0, 2.1, table).truncation_warning);
    CHECK_THROWS_AS(evaluate_propagator(2.0, 0, 1.4, tt, 0.5, 0, 1.5, table), Error);
    // Near-total evaporation after ten dominant decay times.
    CHECK(surviving_fraction(10 * table.dominant().tau, table) < 1e-3);
}

TEST_CASE("dominant decay time estimate") {
    const auto g = make_geometry(5, 5, 1);
    CHECK(tau_dominant_approx(g, 1e3) == Approx(1250.0));
    CHECK(tau_dominant_approx(g, 2e3) == 2 * tau_dominant_approx(g, 1e3));
    CHECK(tau_dominant_approx(make_geometry(1e4, 1e4, 1), 10) > tau_dominant_approx(g, 10));
    const auto table = build_mode_table(g, 1e3);
    CHECK(table.dominant().tau == Approx(1250.0).epsilon(0.1));
    // Relative error below 10% whenever eta0 L, eta0 R < 0.1 and growing with eta0 R.
    double prev = 0;
    for (double R : {0.5, 1.0, 2.0, 5.0, 10.0}) {
        const auto gg = make_geometry(R, 5, 1);
        for (double tau_ev : {60.0, 100.0, 1e3, 1e4}) {
            if (5.0 / tau_ev < 0.1 && R / tau_ev < 0.1) {
                const auto d = mode_dominance(gg, tau_ev);
                CHECK(std::abs(d.tau00 / tau_dominant_approx(gg, tau_ev) - 1) < 0.1);
            }
        }
    }
    for (double tau_ev : {1e3, 100.0, 30.0, 10.0, 5.0}) {
        const auto gg = make_geometry(5, 5, 1);
        const double diff = std::abs(mode_dominance(gg, tau_ev).tau00 / tau_dominant_approx(gg, tau_ev) - 1);
        CHECK(diff > prev);
        prev = diff;
    }
}

TEST_CASE("mode dominance regimes") {
    CHECK(mode_dominance(make_geometry(8, 2, 1), 1e3).runner_up == RunnerUp::RadialExcitation);
    CHECK(mode_dominance(make_geometry(2, 8, 1), 1e3).runner_up == RunnerUp::OddAxial);
    const auto d = mode_dominance(make_geometry(5, 5, 1), 1e3);
    CHECK(d.gap > 0.1);
    CHECK(d.tau_second < d.tau00);
}

TEST_CASE("simple model") {
    SimpleModelParams p{0.78, 11.0, 0.0329, 1250.0};
    CHECK(g_simple_model(0.0, p) == Approx(0.78 + 0.0329));
    SimpleModelParams inf = p;
    inf.tau_ev_eff = kInf;
    CHECK(g_simple_model(1e6, inf) == Approx(0.0329));
    p.tau_v = -1;
    CHECK_THROWS_AS(g_simple_model(1.0, p), Error);
}
