#include "nanonmr/series.hpp"

#include <algorithm>
#include <cmath>

#include "nanonmr/error.hpp"

namespace nanonmr {

const char* to_string(ModelTag tag) {
    switch (tag) {
        case ModelTag::Reflective: return "reflective";
        case ModelTag::Sticky: return "sticky";
        case ModelTag::Evaporating: return "evaporating";
        case ModelTag::Free: return "free";
        case ModelTag::MonteCarlo: return "monte-carlo";
        case ModelTag::Fitted: return "fitted";
    }
    return "unknown";
}

ModelTag parse_model_tag(const std::string& text) {
    for (ModelTag tag : {ModelTag::Reflective, ModelTag::Sticky, ModelTag::Evaporating,
                         ModelTag::Free, ModelTag::MonteCarlo, ModelTag::Fitted})
        if (text == to_string(tag)) return tag;
    throw Error(ErrorKind::ConfigSemantic, "unknown model tag '" + text + "'");
}

void CorrelationSeries::push(double time, double value, double error) {
    t.push_back(time);
    g.push_back(value);
    err.push_back(error);
}

void CorrelationSeries::validate() const {
    if (t.size() != g.size() || t.size() != err.size())
        throw Error(ErrorKind::Series, "series columns differ in length");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(g[i]))
            throw Error(ErrorKind::Series, "series contains a non-finite entry at row " + std::to_string(i));
        if (!(err[i] >= 0.0))
            throw Error(ErrorKind::Series, "negative error estimate at row " + std::to_string(i));
        if (i > 0 && !(t[i] > t[i - 1]))
            throw Error(ErrorKind::Series, "times not strictly increasing at row " + std::to_string(i));
    }
}

std::vector<double> log_time_grid(double t_min, double t_max, int points_per_decade) {
    if (!(t_min > 0.0) || !(t_max > t_min) || points_per_decade < 1)
        throw Error(ErrorKind::Domain, "log grid needs 0 < t_min < t_max and points_per_decade >= 1");
    const double decades = std::log10(t_max / t_min);
    const int n = std::max(1, static_cast<int>(std::lround(decades * points_per_decade)));
    std::vector<double> out(n + 1);
    for (int i = 0; i <= n; ++i) out[i] = t_min * std::pow(10.0, decades * i / n);
    out.front() = t_min;
    out.back() = t_max;
    return out;
}

double interpolate_log_t(const CorrelationSeries& s, double t) {
    if (s.t.empty()) throw Error(ErrorKind::GridCoverage, "empty series");
    const double tol = 1e-12 * t;
    if (t < s.t.front() - tol || t > s.t.back() + tol)
        throw Error(ErrorKind::GridCoverage, "time " + std::to_string(t) + " outside series range");
    if (t <= s.t.front()) return s.g.front();
    if (t >= s.t.back()) return s.g.back();
    const auto it = std::upper_bound(s.t.begin(), s.t.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - s.t.begin());
    const bool linear = s.t[j - 1] <= 0.0;
    const double x0 = linear ? s.t[j - 1] : std::log(s.t[j - 1]);
    const double x1 = linear ? s.t[j] : std::log(s.t[j]);
    const double w = ((linear ? t : std::log(t)) - x0) / (x1 - x0);
    return (1.0 - w) * s.g[j - 1] + w * s.g[j];
}

}  // namespace nanonmr
