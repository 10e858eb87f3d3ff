#pragma once

#include <vector>

#include "nanonmr/geometry.hpp"
#include "nanonmr/series.hpp"

namespace nanonmr {

// eta0 = d/(D tau_ev); zero for tau_ev = +inf (reflective walls).
double evaporation_rate(const CylinderGeometry& geom, double tau_ev);

struct EvapEigenSpectrum {
    double eta0 = 0.0;
    std::vector<double> even;  // eta_m^+, cos(eta s) about the mid-plane
    std::vector<double> odd;   // eta_m^-, sin(eta s)
    std::vector<double> beta;  // beta_p, radial J0(beta rho)
};

struct EtaRoots {
    std::vector<double> even;
    std::vector<double> odd;
};

// M roots of each parity. even: (eta0/eta) = tan(eta L/2); odd: -eta/eta0 = tan(eta L/2).
// With eta0 = 0 these are the Neumann values 2k pi/L and (2k+1) pi/L, k >= 0.
EtaRoots solve_eta(const CylinderGeometry& geom, double tau_ev, int M);

// P roots of xi J0'(xi) + eta0 R J0(xi) = 0 returned as beta = xi/R.
std::vector<double> solve_beta(const CylinderGeometry& geom, double tau_ev, int P);

struct EvapMode {
    int m = 0;       // index within its parity family, from 0
    int parity = 1;  // +1 even, -1 odd
    int p = 0;
    double eta = 0.0;
    double beta = 0.0;
    double tau = 0.0;     // 1/(beta^2 + eta^2), T_D units
    double weight = 0.0;  // contribution to G at t = 0
    double norm = 0.0;    // 1/||J0 Z||^2 over the cylinder volume
    double mass = 0.0;    // (int psi dV)^2 / V, survival contribution
};

// Mode counts. M = P = 0 selects every root with decay time >=
// min(tau_min, tau00/1e4), capped at `cap` per family.
struct Truncation {
    int M = 0;
    int P = 0;
    double tau_min = 1e-3;
    int cap = 100;
};

struct ModeQuadrature {
    int nodes_per_panel = 8;
    double max_panel = 0.25;
};

struct EvapModeTable {
    CylinderGeometry geom = make_geometry(1, 1, 1);
    double tau_ev = 0.0;
    double eta0 = 0.0;
    int M = 0;
    int P = 0;
    std::vector<EvapMode> modes;  // sorted by decreasing tau
    double b_rms2 = 0.0;
    double weight_sum = 0.0;

    const EvapMode& dominant() const { return modes.front(); }
    double fastest_tau() const { return modes.back().tau; }
};

EvapEigenSpectrum solve_spectrum(const CylinderGeometry& geom, double tau_ev, int M, int P);

EvapModeTable build_mode_table(const CylinderGeometry& geom, double tau_ev, const Truncation& trunc = {},
                               const ModeQuadrature& quad = {}, int threads = 1);

// Sum of w exp(-t/tau).
double g_evaporating(double t, const EvapModeTable& table);

// Upper bound on the omitted modes at time t: (B^2 - sum w) exp(-t/tau_fastest).
double truncation_error(double t, const EvapModeTable& table);

CorrelationSeries evaporating_series(const std::vector<double>& times, const EvapModeTable& table);

struct PropagatorValue {
    double density = 0.0;
    // t is shorter than the fastest retained decay time.
    bool truncation_warning = false;
};

// Azimuthally symmetric (n = 0) part of the Robin propagator.
PropagatorValue evaluate_propagator(double rho, double phi, double z, double t, double rho0, double phi0,
                                    double z0, const EvapModeTable& table);

// Fraction of a uniform initial population not yet evaporated.
double surviving_fraction(double t, const EvapModeTable& table);

// (tau_ev/d)(V/S).
double tau_dominant_approx(const CylinderGeometry& geom, double tau_ev);

enum class RunnerUp { RadialExcitation, OddAxial };

struct Dominance {
    double tau00 = 0.0;
    double tau_second = 0.0;
    double gap = 0.0;  // (tau00 - tau_second)/tau00
    RunnerUp runner_up = RunnerUp::RadialExcitation;
};

Dominance mode_dominance(const CylinderGeometry& geom, double tau_ev);

struct SimpleModelParams {
    double b_rms2 = 0.0;
    double tau_v = 0.0;
    double plateau = 0.0;
    double tau_ev_eff = 0.0;  // V tau_ev/(S d)

    void validate() const;
};

// B^2 g_free(t) exp(-2t/tau_V) + G_pl exp(-t/tau_ev_eff).
double g_simple_model(double t, const SimpleModelParams& params);

}  // namespace nanonmr
