#include "nanonmr/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "nanonmr/error.hpp"
#include "nanonmr/freediff.hpp"
#include "nanonmr/numerics.hpp"
#include "nanonmr/parallel.hpp"
#include "nanonmr/sticky.hpp"

namespace nanonmr {

namespace {

constexpr double kPi = std::numbers::pi;
const double kAsymptote = 32.0 / (15.0 * std::sqrt(kPi));

}  // namespace

double volume_time(double plateau) {
    if (!(plateau > 0.0)) throw Error(ErrorKind::Domain, "plateau must be positive");
    return std::pow(kAsymptote / plateau, 2.0 / 3.0);
}

double estimate_diffusion(double tau_v, double d, double plateau) {
    if (!(tau_v > 0.0) || !(d > 0.0)) throw Error(ErrorKind::Domain, "tau_v and d must be positive");
    return volume_time(plateau) * d * d / tau_v;
}

double signal_probability(double t, double delta, double phi_rms, double g) {
    const double amp = phi_rms * phi_rms * g;
    if (std::abs(amp) > 1.0) throw Error(ErrorKind::Domain, "phi_rms^2 |G| exceeds 1");
    return 0.5 * (1.0 + amp * std::cos(delta * t));
}

void FisherSetup::validate() const {
    if (!(shot > 0.0)) throw Error(ErrorKind::Domain, "shot time must be positive");
    if (!(T >= shot)) throw Error(ErrorKind::Domain, "experiment time must be at least one shot");
    if (!(delta >= 0.0)) throw Error(ErrorKind::Domain, "delta must be non-negative");
    if (!std::isfinite(phi_rms)) throw Error(ErrorKind::Domain, "phi_rms must be finite");
}

double fisher_direct(const FisherSetup& setup, const std::function<double(double)>& g, int threads) {
    setup.validate();
    const double shots = setup.T / setup.shot;
    const auto n = static_cast<std::size_t>(std::floor(shots * (1.0 + 1e-12)));
    std::vector<double> terms(n, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        const double j = static_cast<double>(i + 1);
        const double t = j * setup.shot;
        const double s = std::sin(setup.delta * t);
        const double gv = g(t);
        terms[i] = std::max(0.0, shots - j) * t * t * s * s * gv * gv;
    });
    const double phi2 = setup.phi_rms * setup.phi_rms;
    return phi2 * phi2 * pairwise_sum(terms);
}

double fisher_direct(const FisherSetup& setup, const CorrelationSeries& series, int threads) {
    setup.validate();
    if (series.size() < 2 || series.t.front() > setup.shot * (1.0 + 1e-12) ||
        series.t.back() < setup.T * (1.0 - 1e-12))
        throw Error(ErrorKind::GridCoverage, "series must cover [shot, T] for the Fisher sum");
    return fisher_direct(setup, [&series](double t) { return interpolate_log_t(series, t); }, threads);
}

FisherClosed fisher_evap_closed(const FisherSetup& setup, const SimpleModelParams& p) {
    setup.validate();
    p.validate();
    // Field amplitudes: sqrt of the plateau, so G_pl enters squared as in the direct sum.
    const double b2 = p.b_rms2, gp = std::sqrt(p.plateau), te = p.tau_ev_eff, tv = p.tau_v;
    const double T = setup.T, s2 = setup.shot * setup.shot, d = setup.delta;
    const double gp4 = std::pow(gp, 4);
    const double e2 = std::exp(-2.0 * T / te);
    const double sum = te + tv;
    const double root = std::sqrt(te / sum);

    const double t1 = b2 * b2 * std::pow(tv, 3) * d * d / (4.0 * s2 * (1.0 + std::pow(tv, 3) * d * d));
    const double t2 = gp4 * te * T * (te * te - 2.0 * T * T * e2) / (8.0 * s2);
    const double t3 = gp4 * te / (16.0 * s2) *
                      (3.0 * std::pow(te, 3) -
                       e2 * (4.0 * std::pow(T, 3) + 6.0 * T * T * te + 6.0 * T * te * te + 3.0 * std::pow(te, 3)));
    const double t4 = b2 * gp * gp * te * tv / (4.0 * sum * sum) *
                      (2.0 * std::sqrt(T) * (3.0 * te * tv + 2.0 * T * sum) * std::exp(-T / te - T / tv) -
                       3.0 * std::sqrt(kPi) * te * tv * root);
    const double t5 = b2 * gp * gp * T * te * tv * std::sqrt(kPi) / (2.0 * sum) * root;
    const double t6 = b2 * T / 8.0 * std::log1p(2.0 * te * d * d + std::pow(te, 4) * std::pow(d, 4));

    const double phi4 = std::pow(setup.phi_rms, 4);
    FisherClosed out;
    out.full = phi4 * (t1 + t2 + t3 + t4 + t5 + t6);
    out.dominant = phi4 * gp4 * te * te / (16.0 * s2) * (2.0 * te * T + 2.0 * T * T * e2) * std::tanh(d * d * te * te);
    out.long_time = T >= 10.0 * te;
    out.valid_regime = out.long_time && d * T >= 10.0 && d * te < 1.0;
    return out;
}

FisherRatios fisher_ratios(const FisherSetup& setup, const CylinderGeometry& geom, const FluidParams& fluid) {
    setup.validate();
    const double log_dt = std::log(setup.delta * setup.T);
    const double gp = plateau_sticky(geom);
    const double phi4 = std::pow(setup.phi_rms, 4);
    const double tau_ev = fluid.tau_ev / fluid.diffusion_time(geom.d);
    FisherRatios r;
    r.sticky_free = gp * gp * setup.T * setup.T / (phi4 * log_dt);
    const double x = tau_ev * setup.delta;
    r.evap_free = std::log1p(x * x + std::pow(x, 4)) / (8.0 * log_dt);
    const bool long_record = setup.delta * setup.T >= 10.0;
    r.sticky_valid = long_record && setup.T >= 10.0 * volume_time(gp);
    r.evap_valid = long_record && tau_ev <= 1.0 && x < 1.0;
    return r;
}

SimpleModelParams simple_model_params(const CylinderGeometry& geom, double tau_ev) {
    SimpleModelParams p;
    p.b_rms2 = b_rms_squared(geom);
    p.plateau = plateau_ideal(geom);
    p.tau_v = volume_time(p.plateau);
    p.tau_ev_eff = std::isinf(tau_ev) ? tau_ev : tau_dominant_approx(geom, tau_ev);
    return p;
}

namespace {

struct LogFit {
    std::vector<double> t, log_g, sqrt_w, gfree;

    double residual(double b2, double tv, double gp, double te, std::size_t i) const {
        const double v = b2 * gfree[i] * std::exp(-2.0 * t[i] / tv) + gp * std::exp(-t[i] / te);
        return sqrt_w[i] * (std::log(std::max(v, 1e-300)) - log_g[i]);
    }
    double rms(double b2, double tv, double gp, double te) const {
        double s = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double r = residual(b2, tv, gp, te, i);
            s += r * r;
        }
        return std::sqrt(s);
    }
};

struct LogFunctor {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    const LogFit* fit;
    int inputs() const { return 4; }
    int values() const { return static_cast<int>(fit->t.size()); }
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        const Eigen::VectorXd c = x.cwiseMax(-200.0).cwiseMin(200.0);
        for (std::size_t i = 0; i < fit->t.size(); ++i)
            f[static_cast<Eigen::Index>(i)] =
                fit->residual(std::exp(c[0]), std::exp(c[1]), std::exp(c[2]), std::exp(c[3]), i);
        return 0;
    }
};

}  // namespace

SimpleModelFit fit_simple_model(const CorrelationSeries& series) {
    series.validate();
    const std::size_t n = series.size();
    if (n < 8) throw Error(ErrorKind::FitFailure, "need at least 8 samples to fit the simple model");
    LogFit fit;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(series.t[i] > 0.0) || !(series.g[i] > 0.0))
            throw Error(ErrorKind::FitFailure, "fit requires positive times and correlation values");
        fit.t.push_back(series.t[i]);
        fit.log_g.push_back(std::log(series.g[i]));
        fit.gfree.push_back(g_free(series.t[i]));
    }
    // Trapezoid weights in log t, normalized to unit total.
    const double span = std::log(fit.t.back() / fit.t.front());
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = std::log(fit.t[i > 0 ? i - 1 : 0]);
        const double hi = std::log(fit.t[i + 1 < n ? i + 1 : n - 1]);
        fit.sqrt_w.push_back(std::sqrt(0.5 * (hi - lo) / span));
    }

    // Seed: (tau_V, tau_ev) grid with amplitudes from relative linear least squares.
    const double t0 = fit.t.front(), t1 = fit.t.back();
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x(4);
    constexpr int kGrid = 30;
    for (int a = 0; a < kGrid; ++a) {
        const double tv = t0 * std::pow(t1 / t0, (a + 0.5) / kGrid);
        for (int b = 0; b < kGrid; ++b) {
            const double te = t0 * std::pow(1e3 * t1 / t0, (b + 0.5) / kGrid);
            Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
            Eigen::Vector2d y = Eigen::Vector2d::Zero();
            for (std::size_t i = 0; i < n; ++i) {
                const double w = fit.sqrt_w[i] * fit.sqrt_w[i] / std::exp(2.0 * fit.log_g[i]);
                const Eigen::Vector2d f(fit.gfree[i] * std::exp(-2.0 * fit.t[i] / tv), std::exp(-fit.t[i] / te));
                A += w * f * f.transpose();
                y += w * f * std::exp(fit.log_g[i]);
            }
            const Eigen::Vector2d amp = A.ldlt().solve(y);
            if (!(amp[0] > 0.0) || !(amp[1] > 0.0)) continue;
            const double r = fit.rms(amp[0], tv, amp[1], te);
            if (r < best) {
                best = r;
                x << std::log(amp[0]), std::log(tv), std::log(amp[1]), std::log(te);
            }
        }
    }
    if (!std::isfinite(best)) throw Error(ErrorKind::FitFailure, "no positive seed found for the simple model");

    LogFunctor functor{&fit};
    Eigen::NumericalDiff<LogFunctor> diff(functor);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<LogFunctor>> lm(diff);
    lm.parameters.maxfev = 4000;
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-14;
    const auto status = lm.minimize(x);
    using S = Eigen::LevenbergMarquardtSpace::Status;
    if (status == S::ImproperInputParameters || status == S::TooManyFunctionEvaluation || !x.allFinite())
        throw Error(ErrorKind::FitFailure,
                    "simple-model fit did not converge (status " + std::to_string(static_cast<int>(status)) + ")");

    SimpleModelFit out;
    out.params.b_rms2 = std::exp(x[0]);
    out.params.tau_v = std::exp(x[1]);
    out.params.plateau = std::exp(x[2]);
    out.params.tau_ev_eff = std::exp(x[3]);
    out.evaluations = static_cast<int>(lm.nfev);
    out.residual = fit.rms(out.params.b_rms2, out.params.tau_v, out.params.plateau, out.params.tau_ev_eff);
    if (!std::isfinite(out.residual))
        throw Error(ErrorKind::FitFailure, "simple-model fit produced a non-finite residual");
    if (t0 > 0.1 * out.params.tau_v || t1 < 10.0 * out.params.tau_v)
        throw Error(ErrorKind::FitFailure, "series must span [0.1, 10] tau_V; fitted tau_V = " +
                                               std::to_string(out.params.tau_v));

    Eigen::MatrixXd J(static_cast<Eigen::Index>(n), 4);
    diff.df(x, J);
    const Eigen::Matrix4d JtJ = J.transpose() * J;
    const Eigen::Matrix4d cov = JtJ.completeOrthogonalDecomposition().pseudoInverse();
    // Weights sum to one, so J^T J carries a 1/n that the variance estimate undoes.
    const double sigma2 = out.residual * out.residual / std::max(1.0, static_cast<double>(n) - 4.0);
    for (int k = 0; k < 4; ++k) out.sensitivity[k] = std::sqrt(std::max(0.0, cov(k, k) * sigma2));
    return out;
}

CrossingEstimate estimate_diffusion_from_curve(const std::vector<double>& t, const std::vector<double>& g, double d) {
    const std::size_t n = t.size();
    if (g.size() != n || n < 10) throw Error(ErrorKind::FitFailure, "crossing detection needs at least 10 samples");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(t[i] > 0.0) || !(g[i] > 0.0)) throw Error(ErrorKind::FitFailure, "times and values must be positive");
        if (i > 0 && !(t[i] > t[i - 1])) throw Error(ErrorKind::FitFailure, "times must be increasing");
    }
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::log(t[i]);
        y[i] = std::log(g[i] / g[0]);
    }
    CrossingEstimate out;
    std::vector<double> tail;
    for (std::size_t i = 0; i < n; ++i)
        if (t[i] >= 0.1 * t.back()) tail.push_back(g[i] / g[0]);
    if (tail.size() < 3) throw Error(ErrorKind::FitFailure, "last decade holds fewer than 3 samples");
    std::sort(tail.begin(), tail.end());
    const std::size_t mid = tail.size() / 2;
    out.plateau = tail.size() % 2 ? tail[mid] : 0.5 * (tail[mid - 1] + tail[mid]);
    const double log_cut = std::log(3.0 * out.plateau);

    std::size_t begin = n;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if ((y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]) <= -1.0) {
            begin = i;
            break;
        }
    std::size_t end = begin;
    while (end < n && y[end] > log_cut) ++end;
    if (begin == n || end - begin < 3)
        throw Error(ErrorKind::FitFailure, "no diffusive window with at least 3 samples above 3x plateau");
    out.window_begin = begin;
    out.window_end = end;

    const double m = static_cast<double>(end - begin);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = begin; i < end; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    out.intercept = (sy - out.slope * sx) / m;
    if (!(out.slope < 0.0)) throw Error(ErrorKind::FitFailure, "diffusive window is not decaying");
    out.crossing_time = std::exp((std::log(out.plateau) - out.intercept) / out.slope);
    out.diffusion = estimate_diffusion(out.crossing_time, d, out.plateau);
    return out;
}

}  // namespace nanonmr
