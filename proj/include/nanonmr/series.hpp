#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nanonmr/geometry.hpp"

namespace nanonmr {

enum class ModelTag { Reflective, Sticky, Evaporating, Free, MonteCarlo, Fitted };

const char* to_string(ModelTag tag);
ModelTag parse_model_tag(const std::string& text);

// Sampled correlation with its per-point error (quadrature or statistical).
struct CorrelationSeries {
    ModelTag model = ModelTag::Free;
    CylinderGeometry geom = make_geometry(1, 1, 1);
    FluidParams fluid;
    std::uint64_t seed = 0;
    std::vector<double> t;
    std::vector<double> g;
    std::vector<double> err;

    std::size_t size() const { return t.size(); }
    void push(double time, double value, double error);
    // Throws Series errors on non-increasing times, non-finite values or
    // negative error estimates.
    void validate() const;
};

// points_per_decade samples per decade from t_min to t_max inclusive.
std::vector<double> log_time_grid(double t_min, double t_max, int points_per_decade);

// Linear interpolation in log t; throws GridCoverage outside the sampled range.
double interpolate_log_t(const CorrelationSeries& s, double t);

}  // namespace nanonmr
