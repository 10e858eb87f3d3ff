#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "nanonmr/error.hpp"
#include "nanonmr/estimation.hpp"
#include "nanonmr/evaporating.hpp"
#include "nanonmr/freediff.hpp"
#include "nanonmr/montecarlo.hpp"
#include "nanonmr/sticky.hpp"

using namespace nanonmr;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool inside(const Vec3& p, const CylinderGeometry& g, double tol = 1e-12) {
    return p.z >= g.z_bottom() - tol && p.z <= g.z_top() + tol && std::hypot(p.x, p.y) <= g.R + tol;
}

Vec3 uniform_point(const CylinderGeometry& g, McRng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double rho = g.R * std::sqrt(u(rng));
    const double phi = 2 * kPi * u(rng);
    return {rho * std::cos(phi), rho * std::sin(phi), g.z_bottom() + g.L * u(rng)};
}

double z_score(const CorrelationSeries& s, std::size_t i, double expected) {
    return (s.g[i] - expected) / s.err[i];
}

}  // namespace

TEST_CASE("absorption probability per wall contact") {
    const auto g = make_geometry(5, 5, 1);
    FluidParams f;
    f.tau_ev = 100.0;
    CHECK(absorption_probability(g, f, 1e-4) == Approx(0.01 * std::sqrt(kPi * 1e-4)).epsilon(1e-14));
    f.tau_ev = kInf;
    CHECK(absorption_probability(g, f, 1e-4) == 0.0);
    f.tau_ev = 1e-6;
    CHECK(absorption_probability(g, f, 1e-3) == 1.0);
    CHECK_THROWS_AS(absorption_probability(g, f, 0.0), Error);
}

TEST_CASE("vanishing step leaves the particle in place") {
    const auto g = make_geometry(2, 2, 1);
    McRng rng(7);
    const Vec3 p{0.3, -0.2, 1.5};
    for (MCWall w : {MCWall::Reflective, MCWall::Sticky, MCWall::Evaporating, MCWall::Free}) {
        const auto r = step_particle(p, 1e-30, g, {w, 0.5}, rng);
        CHECK(r.status == ParticleStatus::Bulk);
        CHECK(std::abs(r.position.x - p.x) < 1e-13);
        CHECK(std::abs(r.position.y - p.y) < 1e-13);
        CHECK(std::abs(r.position.z - p.z) < 1e-13);
    }
}

TEST_CASE("reflective walk never leaves the cylinder") {
    const auto g = make_geometry(1.5, 0.7, 1);
    McRng rng(11);
    Vec3 p{0.0, 0.0, 1.3};
    int violations = 0;
    for (int k = 0; k < 1000000; ++k) {
        // Alternate tiny and large steps so multi-bounce segments occur.
        const double dt = (k % 3 == 0) ? 0.2 : 1e-3;
        const auto r = step_particle(p, dt, g, {MCWall::Reflective, 0.0}, rng);
        REQUIRE(r.status == ParticleStatus::Bulk);
        p = r.position;
        if (!inside(p, g)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("reflection at a flat wall folds the Gaussian") {
    const auto g = make_geometry(5, 5, 1);
    McRng rng(3);
    const double dt = 1e-3, sigma = std::sqrt(2 * dt);
    const int n = 200000;
    double sum = 0, sum2 = 0, sx = 0;
    for (int i = 0; i < n; ++i) {
        const auto r = step_particle({0, 0, g.z_bottom()}, dt, g, {MCWall::Reflective, 0.0}, rng);
        const double dz = r.position.z - g.z_bottom();
        REQUIRE(dz >= 0.0);
        sum += dz;
        sum2 += dz * dz;
        sx += r.position.x;
    }
    const double mean = sum / n;
    const double expected = sigma * std::sqrt(2 / kPi);
    const double sd = sigma * std::sqrt(1 - 2 / kPi) / std::sqrt(double(n));
    CHECK(std::abs(mean - expected) < 4 * sd);
    CHECK(sum2 / n == Approx(sigma * sigma).epsilon(0.01));
    CHECK(std::abs(sx / n) < 4 * sigma / std::sqrt(double(n)));
}

TEST_CASE("sticky contact stops on the boundary") {
    const auto g = make_geometry(1, 1, 1);
    McRng rng(5);
    int stuck = 0;
    for (int i = 0; i < 20000; ++i) {
        const auto r = step_particle(uniform_point(g, rng), 0.01, g, {MCWall::Sticky, 0.0}, rng);
        if (r.status != ParticleStatus::Stuck) continue;
        ++stuck;
        const auto& p = r.position;
        const double on_face = std::min({std::abs(p.z - g.z_bottom()), std::abs(p.z - g.z_top()),
                                         std::abs(std::hypot(p.x, p.y) - g.R)});
        CHECK(on_face < 1e-12);
        CHECK(inside(p, g));
    }
    CHECK(stuck > 1000);
}

TEST_CASE("sticky loss matches the discretely monitored walk") {
    // Next to a flat absorbing face a uniform density loses E[M_n] per unit
    // area, M_n the running maximum of n Gaussian steps:
    // E[M_n] = sigma/sqrt(2 pi) sum_{k<=n} k^{-1/2}. The two rim edges are
    // counted twice, an overlap of E[M_n]^2 per unit edge length.
    const auto g = make_geometry(50, 2, 1);
    MCConfig c;
    c.particles = 40000;
    c.realizations = 16;
    c.wall = MCWall::Sticky;
    c.times = {0.004, 0.01};
    const auto res = simulate_correlation(c, g, FluidParams{});
    const double sigma = std::sqrt(2 * c.dt);
    const double area = 2 * kPi * g.R * g.R + 2 * kPi * g.R * g.L;
    const double rim = 2 * 2 * kPi * g.R;
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        const int n = static_cast<int>(std::lround(c.times[i] / c.dt));
        double partial = 0;
        for (int k = 1; k <= n; ++k) partial += 1 / std::sqrt(double(k));
        const double m = sigma * partial / std::sqrt(2 * kPi);
        const double expected = 1 - (area * m - rim * m * m) / g.volume;
        CAPTURE(c.times[i]);
        CHECK(std::abs(z_score(res.survival, i, expected)) < 3.5);
    }
}

TEST_CASE("stuck particles freeze the correlation") {
    const auto g = make_geometry(1, 1, 1);
    MCConfig c;
    c.particles = 2000;
    c.realizations = 2;
    c.dt = 5e-4;
    c.wall = MCWall::Sticky;
    c.times = {5.0, 6.0};
    const auto res = simulate_correlation(c, g, FluidParams{});
    REQUIRE(res.survival.g[0] == 0.0);
    CHECK(res.correlation.g[1] == res.correlation.g[0]);
    // Sticking near the starting point keeps most of the initial correlation.
    CHECK(res.correlation.g[0] > 0.5 * b_rms_squared(g));
}

TEST_CASE("reflective walk keeps the uniform density") {
    const auto g = make_geometry(2, 2, 1);
    McRng rng(21);
    const int n = 20000, bins = 10;
    std::vector<int> hist(bins * bins, 0);
    for (int i = 0; i < n; ++i) {
        Vec3 p = uniform_point(g, rng);
        for (int k = 0; k < 500; ++k) p = step_particle(p, 1e-3, g, {MCWall::Reflective, 0.0}, rng).position;
        const double u = (p.x * p.x + p.y * p.y) / (g.R * g.R);
        const double v = (p.z - g.z_bottom()) / g.L;
        const int a = std::min(bins - 1, static_cast<int>(u * bins));
        const int b = std::min(bins - 1, static_cast<int>(v * bins));
        ++hist[a * bins + b];
    }
    const double expected = double(n) / (bins * bins);
    const double sd = std::sqrt(expected * (1 - 1.0 / (bins * bins)));
    int worst = 0;
    for (int count : hist) worst = std::max(worst, static_cast<int>(std::abs(count - expected)));
    CHECK(worst < 4 * sd);
}

TEST_CASE("fixed seed reproduces bit for bit across thread counts") {
    const auto g = make_geometry(2, 2, 1);
    MCConfig c;
    c.particles = 200;
    c.realizations = 4;
    c.times = {0.01, 0.05};
    c.seed = 99;
    for (MCWall w : {MCWall::Reflective, MCWall::Evaporating}) {
        c.wall = w;
        FluidParams f;
        f.tau_ev = 10.0;
        const auto a = simulate_correlation(c, g, f, 1);
        const auto b = simulate_correlation(c, g, f, 3);
        const auto a2 = simulate_correlation(c, g, f, 1);
        CHECK(a.correlation.g == b.correlation.g);
        CHECK(a.correlation.err == b.correlation.err);
        CHECK(a.survival.g == b.survival.g);
        CHECK(a.correlation.g == a2.correlation.g);
    }
    c.seed = 100;
    c.wall = MCWall::Reflective;
    const auto other = simulate_correlation(c, g, FluidParams{});
    const auto base = [&] {
        MCConfig d = c;
        d.seed = 99;
        return simulate_correlation(d, g, FluidParams{});
    }();
    CHECK(other.correlation.g != base.correlation.g);
}

TEST_CASE("reflective correlation follows the mode sum") {
    const auto g = make_geometry(2, 2, 1);
    const auto table = build_mode_table(g, kInf);
    MCConfig c;
    c.particles = 1000;
    c.realizations = 8;
    c.times = {0.01, 0.1, 1.0, 3.0, 15.0};
    const auto res = simulate_correlation(c, g, FluidParams{});
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        CAPTURE(c.times[i]);
        CHECK(std::abs(z_score(res.correlation, i, g_evaporating(res.correlation.t[i], table))) < 3.5);
        CHECK(res.survival.g[i] == 1.0);
    }
    // Several tau_V in, the walk has forgotten its start.
    CHECK(std::abs(z_score(res.correlation, 4, plateau_ideal(g))) < 3.5);
}

TEST_CASE("halving dt leaves the reflective correlation unchanged") {
    const auto g = make_geometry(2, 2, 1);
    MCConfig c;
    c.particles = 1000;
    c.realizations = 4;
    c.times = {0.1, 1.0};
    const auto coarse = simulate_correlation(c, g, FluidParams{});
    c.dt = 5e-4;
    c.seed = 2;
    const auto fine = simulate_correlation(c, g, FluidParams{});
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        const double se = std::hypot(coarse.correlation.err[i], fine.correlation.err[i]);
        CHECK(std::abs(coarse.correlation.g[i] - fine.correlation.g[i]) < 3.5 * se);
    }
}

TEST_CASE("free mode reproduces the half-space correlation") {
    const auto g = make_geometry(2, 2, 1);
    MCConfig c;
    c.particles = 2000;
    c.realizations = 8;
    c.wall = MCWall::Free;
    c.times = {0.01, 0.1, 1.0};
    const auto res = simulate_correlation(c, g, FluidParams{});
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        CAPTURE(c.times[i]);
        CHECK(std::abs(z_score(res.correlation, i, kPi / 4 * g_free(res.correlation.t[i]))) < 3.5);
    }
}

TEST_CASE("evaporating survival decays with the slowest mode") {
    const auto g = make_geometry(2, 2, 1);
    FluidParams f;
    f.tau_ev = 10.0;
    const auto table = build_mode_table(g, f.tau_ev);
    MCConfig c;
    c.particles = 800;
    c.realizations = 8;
    c.wall = MCWall::Evaporating;
    c.times = {1.0, 3.0, 5.0, 10.0};
    const auto res = simulate_correlation(c, g, f);
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        CAPTURE(c.times[i]);
        CHECK(std::abs(z_score(res.survival, i, surviving_fraction(res.survival.t[i], table))) < 3.5);
        CHECK(std::abs(z_score(res.correlation, i, g_evaporating(res.correlation.t[i], table))) < 3.5);
    }
    const double rate = std::log(res.survival.g[2] / res.survival.g[3]) / 5.0;
    CHECK(rate * table.dominant().tau == Approx(1.0).epsilon(0.05));
}

TEST_CASE("configuration checks") {
    const auto g = make_geometry(2, 2, 1);
    MCConfig c;
    c.times = {0.1};
    CHECK_NOTHROW(c.validate(g));
    MCConfig bad = c;
    bad.dt = 2e-3;
    CHECK_THROWS_AS(bad.validate(g), Error);
    bad = c;
    bad.realizations = 1;
    CHECK_THROWS_AS(bad.validate(g), Error);
    bad = c;
    bad.times = {0.1, 0.1};
    CHECK_THROWS_AS(bad.validate(g), Error);
    bad = c;
    bad.times = {};
    CHECK_THROWS_AS(bad.validate(g), Error);
    bad = c;
    bad.particles = 0;
    CHECK_THROWS_AS(bad.validate(g), Error);
    bad = c;
    bad.dt = 1e-3;
    CHECK_NOTHROW(bad.validate(g));
}
