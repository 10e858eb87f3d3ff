#pragma once

namespace nanonmr {

// Below this time g_free uses its small-time expansion.
inline constexpr double kFreeSeriesSwitch = 1e-2;

// Half-space free-diffusion correlation normalized to g_free(0) = 1.
double g_free(double t);

// Closed form only; accurate for t >= kFreeSeriesSwitch.
double g_free_closed(double t);

// Small-time expansion 1 - 6t + (20/sqrt(pi)) t^{3/2} + ..., carried to
// `terms` half-integer orders.
double g_free_series(double t, int terms = 14);

// 32/(15 sqrt(pi)) t^{-3/2}.
double g_free_long_asymptote(double t);

}  // namespace nanonmr
