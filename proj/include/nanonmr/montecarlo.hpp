#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nanonmr/geometry.hpp"
#include "nanonmr/series.hpp"

namespace nanonmr {

// Free: half-space above the probe, reflecting only at z = d.
enum class MCWall { Reflective, Sticky, Evaporating, Free };

const char* to_string(MCWall wall);

enum class ParticleStatus { Bulk, Stuck, Evaporated };

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct StepResult {
    Vec3 position;
    ParticleStatus status = ParticleStatus::Bulk;
};

using McRng = std::mt19937_64;

struct WallSpec {
    MCWall model = MCWall::Reflective;
    double p_abs = 0.0;  // per-contact evaporation probability
};

// (d/tau_ev) sqrt(pi dt/D); zero for tau_ev = +inf.
double absorption_probability(const CylinderGeometry& geom, const FluidParams& fluid, double dt);

// One Gaussian step of standard deviation sqrt(2 D dt) per axis, D = 1.
// Each face crossed along the straight segment reflects specularly, sticks, or
// evaporates according to the wall model.
StepResult step_particle(const Vec3& position, double dt, const CylinderGeometry& geom, const WallSpec& walls,
                         McRng& rng);

struct MCConfig {
    std::size_t particles = 100000;  // per realization
    std::size_t realizations = 32;
    double dt = 1e-3;
    std::vector<double> times;  // output grid, T_D units
    MCWall wall = MCWall::Reflective;
    std::uint64_t seed = 1;

    // Throws Domain unless dt <= 1e-3 min(1, tau_V) and counts are positive.
    void validate(const CylinderGeometry& geom) const;
};

struct MCResult {
    CorrelationSeries correlation;  // err = standard error across realizations
    CorrelationSeries survival;     // fraction neither stuck nor evaporated
    MCConfig config;
};

// Correlation V <h(r_t) h(r_0)> over uniform initial positions; stuck particles
// keep their frozen contribution, evaporated ones contribute zero. In Free mode
// initial positions are drawn from h^2 over the half-space and the estimator
// is B_half^2 h(r_t)/h(r_0).
MCResult simulate_correlation(const MCConfig& config, const CylinderGeometry& geom, const FluidParams& fluid,
                              int threads = 1);

// Independent stream for one realization.
McRng realization_stream(std::uint64_t seed, std::uint64_t realization);

}  // namespace nanonmr
