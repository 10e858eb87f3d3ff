#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "nanonmr/evaporating.hpp"
#include "nanonmr/geometry.hpp"
#include "nanonmr/series.hpp"

namespace nanonmr {

// [32/(15 sqrt(pi) G)]^(2/3), T_D units.
double volume_time(double plateau);

// D = [32/(15 sqrt(pi) G)]^(2/3) d^2 / tau_v, in whatever units tau_v and d carry.
double estimate_diffusion(double tau_v, double d, double plateau);

// [1 + phi_rms^2 cos(delta t) G]/2.
double signal_probability(double t, double delta, double phi_rms, double g);

struct FisherSetup {
    double delta = 0.0;    // rad per T_D
    double T = 0.0;        // total experiment time
    double shot = 1.0;     // tau + overhead
    double phi_rms = 1.0;

    void validate() const;
};

// phi^4 sum_{j>=1} (T/shot - j)(j shot)^2 sin^2(delta j shot) G(j shot)^2,
// with unit proportionality constant.
double fisher_direct(const FisherSetup& setup, const std::function<double(double)>& g, int threads = 1);

// Same sum with G interpolated linearly in log t; the series must cover [shot, T].
double fisher_direct(const FisherSetup& setup, const CorrelationSeries& series, int threads = 1);

struct FisherClosed {
    double full = 0.0;
    double dominant = 0.0;
    bool long_time = false;    // T >= 10 tau_ev_eff
    bool valid_regime = false;  // also delta T >= 10 and delta tau_ev_eff < 1
};

// Closed-form information for the simple model, scaled by phi^4 like fisher_direct.
// The plateau amplitude is read as sqrt(G_pl) so that it enters squared, as in
// the direct sum.
FisherClosed fisher_evap_closed(const FisherSetup& setup, const SimpleModelParams& params);

struct FisherRatios {
    double sticky_free = 0.0;
    double evap_free = 0.0;
    bool sticky_valid = false;  // T >= 10 tau_V and delta T >= 10
    bool evap_valid = false;    // tau_ev <= T_D, delta T >= 10, delta tau_ev < 1
};

// Sticky plateau (entering squared, see fisher_evap_closed) and fluid
// evaporation time, everything in T_D units.
FisherRatios fisher_ratios(const FisherSetup& setup, const CylinderGeometry& geom, const FluidParams& fluid);

// B_rms^2, volume_time(plateau_ideal), plateau_ideal and V tau_ev/(S d).
SimpleModelParams simple_model_params(const CylinderGeometry& geom, double tau_ev);

struct SimpleModelFit {
    SimpleModelParams params;
    double residual = 0.0;                 // weighted rms of log residuals
    std::array<double, 4> sensitivity{};   // relative standard error per parameter
    int evaluations = 0;
};

// Least squares on log G, weighted uniformly in log t.
SimpleModelFit fit_simple_model(const CorrelationSeries& series);

struct CrossingEstimate {
    double plateau = 0.0;     // normalized by the first sample
    double slope = 0.0;       // log-log slope of the diffusive window
    double intercept = 0.0;
    std::size_t window_begin = 0;
    std::size_t window_end = 0;  // one past the last point
    double crossing_time = 0.0;
    double diffusion = 0.0;
};

// Blind D recovery from a sampled curve: normalize by the first sample, take
// the median of the last decade as plateau, fit a power law over the window
// where the local slope has reached -1 and G stays above 3x plateau, and
// bisect the fitted line against the plateau.
CrossingEstimate estimate_diffusion_from_curve(const std::vector<double>& t, const std::vector<double>& g, double d);

}  // namespace nanonmr
