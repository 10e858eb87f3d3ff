#pragma once

#include <utility>
#include <vector>

#include "nanonmr/geometry.hpp"
#include "nanonmr/series.hpp"

namespace nanonmr {

double plateau_ideal(const CylinderGeometry& geom);
double plateau_sticky(const CylinderGeometry& geom);
// plateau_sticky / plateau_ideal in closed form.
double plateau_ratio(const CylinderGeometry& geom);

// Grid for the 4D bulk integral. Panels are at most ridge_width*sqrt(t)
// wide so the Gaussian ridge rho ~ rho0, z ~ z0 is resolved.
struct StickyQuadrature {
    int nodes_per_panel = 8;
    double ridge_width = 4.0;
    double max_panel = 1.0;
    // Kernel entries farther than kernel_cutoff*sqrt(t) from the diagonal
    // are below 1e-15 and skipped.
    double kernel_cutoff = 12.0;
    std::size_t max_nodes_per_axis = 20000;
    // Error estimate from a second pass on a grid with doubled panel width.
    bool estimate_error = true;
    double rel_tol = 1e-4;
};

struct StickyBulk {
    double g = 0.0;
    double g_err = 0.0;
    double density = 0.0;
    double density_err = 0.0;
};

// Free-propagator bulk correlation and surviving density at time t > 0.
StickyBulk sticky_bulk_terms(double t, const CylinderGeometry& geom, const StickyQuadrature& quad = {});
double g_sticky_bulk(double t, const CylinderGeometry& geom, const StickyQuadrature& quad = {});
double bulk_density(double t, const CylinderGeometry& geom, const StickyQuadrature& quad = {});

struct ValueWithError {
    double value = 0.0;
    double error = 0.0;
};

// G_bulk + plateau_sticky (1 - density); t = 0 returns B_rms^2.
ValueWithError g_sticky(double t, const CylinderGeometry& geom, const StickyQuadrature& quad = {});

CorrelationSeries sticky_series(const std::vector<double>& times, const CylinderGeometry& geom,
                                const StickyQuadrature& quad = {}, int threads = 1);

enum class WallModel { Reflective, Sticky };

// Maximizes the plateau over (R, L) in (0, 10d]^2 to 1e-3 d.
std::pair<double, double> optimal_geometry(WallModel model, double d = 1.0);

}  // namespace nanonmr
