#include "nanonmr/evaporating.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nanonmr/error.hpp"
#include "nanonmr/freediff.hpp"
#include "nanonmr/numerics.hpp"
#include "nanonmr/parallel.hpp"

namespace nanonmr {

namespace {

constexpr double kPi = std::numbers::pi;

void check_tau(double tau_ev) {
    if (!(tau_ev > 0.0)) throw Error(ErrorKind::Domain, "tau_ev must be positive");
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// Half-period poles of tan(x) inside [0, hi].
std::vector<double> tan_poles(double hi) {
    std::vector<double> poles;
    for (double p = 0.5 * kPi; p < hi; p += kPi) poles.push_back(p);
    return poles;
}

}  // namespace

double evaporation_rate(const CylinderGeometry& geom, double tau_ev) {
    check_tau(tau_ev);
    return std::isinf(tau_ev) ? 0.0 : geom.d / tau_ev;
}

EtaRoots solve_eta(const CylinderGeometry& geom, double tau_ev, int M) {
    if (M < 1) throw Error(ErrorKind::Domain, "solve_eta needs M >= 1");
    const double a = 0.5 * evaporation_rate(geom, tau_ev) * geom.L;
    const double scale = 2.0 / geom.L;
    EtaRoots out;
    out.even.reserve(M);
    out.odd.reserve(M);
    if (a == 0.0) {
        for (int k = 0; k < M; ++k) {
            out.even.push_back(scale * k * kPi);
            out.odd.push_back(scale * (k + 0.5) * kPi);
        }
        return out;
    }
    // With x = eta L/2: even roots solve x sin x = a cos x, one in each
    // (k pi, k pi + pi/2); odd roots solve x cos x = -a sin x, one in each
    // (k pi + pi/2, (k+1) pi). Both forms are pole-free; splitting at the tan
    // poles makes every branch endpoint a sample point.
    RootScanSpec even_spec{0.0, (M - 0.5) * kPi, 0.25 * kPi};
    even_spec.max_roots = M;
    even_spec.min_roots = M;
    const auto even = scan_roots([a](double x) { return x * std::sin(x) - a * std::cos(x); }, even_spec,
                                 tan_poles(even_spec.hi));
    RootScanSpec odd_spec{0.5 * kPi, M * kPi, 0.25 * kPi};
    odd_spec.max_roots = M;
    odd_spec.min_roots = M;
    const auto odd = scan_roots([a](double x) { return x * std::cos(x) + a * std::sin(x); }, odd_spec,
                                tan_poles(odd_spec.hi));
    for (double x : even.roots) out.even.push_back(scale * x);
    for (double x : odd.roots) out.odd.push_back(scale * x);
    return out;
}

std::vector<double> solve_beta(const CylinderGeometry& geom, double tau_ev, int P) {
    if (P < 1) throw Error(ErrorKind::Domain, "solve_beta needs P >= 1");
    const double c = evaporation_rate(geom, tau_ev) * geom.R;
    std::vector<double> xi;
    RootScanSpec spec{0.0, (P + 1.0) * kPi, 0.05};
    spec.max_roots = static_cast<std::size_t>(P);
    if (c == 0.0) {
        // Neumann: xi = 0 and the zeros of J1.
        xi.push_back(0.0);
        if (P > 1) {
            spec.lo = 0.1;
            spec.max_roots = static_cast<std::size_t>(P - 1);
            spec.min_roots = spec.max_roots;
            const auto r = scan_roots([](double x) { return bessel_j1(x); }, spec);
            xi.insert(xi.end(), r.roots.begin(), r.roots.end());
        }
    } else {
        spec.min_roots = spec.max_roots;
        const auto r = scan_roots([c](double x) { return x * bessel_j1(x) - c * bessel_j0(x); }, spec);
        xi = r.roots;
    }
    std::vector<double> beta;
    beta.reserve(xi.size());
    for (double x : xi) beta.push_back(x / geom.R);
    return beta;
}

EvapEigenSpectrum solve_spectrum(const CylinderGeometry& geom, double tau_ev, int M, int P) {
    EvapEigenSpectrum s;
    s.eta0 = evaporation_rate(geom, tau_ev);
    auto eta = solve_eta(geom, tau_ev, M);
    s.even = std::move(eta.even);
    s.odd = std::move(eta.odd);
    s.beta = solve_beta(geom, tau_ev, P);
    return s;
}

EvapModeTable build_mode_table(const CylinderGeometry& geom, double tau_ev, const Truncation& trunc,
                               const ModeQuadrature& quad, int threads) {
    check_tau(tau_ev);
    if (trunc.M < 0 || trunc.P < 0 || trunc.cap < 1 || !(trunc.tau_min > 0.0))
        throw Error(ErrorKind::Domain, "invalid truncation settings");
    if (quad.nodes_per_panel < 2 || !(quad.max_panel > 0.0))
        throw Error(ErrorKind::Domain, "invalid mode quadrature settings");

    int M = trunc.M, P = trunc.P;
    const bool automatic = M == 0 || P == 0;
    double tau_floor = trunc.tau_min;
    if (automatic) {
        const EvapEigenSpectrum first = solve_spectrum(geom, tau_ev, 1, 1);
        const double rate00 = first.beta[0] * first.beta[0] + first.even[0] * first.even[0];
        if (rate00 > 0.0) tau_floor = std::min(tau_floor, 1e-4 / rate00);
        // Roots grow by pi per branch, so k_max bounds the useful counts.
        const double k_max = 1.0 / std::sqrt(tau_floor);
        if (M == 0) M = std::clamp(static_cast<int>(std::ceil(k_max * geom.L / (2.0 * kPi))) + 1, 1, trunc.cap);
        if (P == 0) P = std::clamp(static_cast<int>(std::ceil(k_max * geom.R / kPi)) + 1, 1, trunc.cap);
    }
    const EvapEigenSpectrum spec = solve_spectrum(geom, tau_ev, M, P);

    EvapModeTable table;
    table.geom = geom;
    table.tau_ev = tau_ev;
    table.eta0 = spec.eta0;
    table.M = M;
    table.P = P;
    table.b_rms2 = b_rms_squared(geom);

    const double k_max = std::max({spec.beta.back(), spec.even.back(), spec.odd.back(), 1.0});
    const double width = std::min(quad.max_panel, kPi / k_max);
    const Rule1D r = panel_rule_width(0.0, geom.R, width, quad.nodes_per_panel);
    const Rule1D z = panel_rule_width(geom.z_bottom(), geom.z_top(), width, quad.nodes_per_panel);
    const std::size_t nr = r.size(), nz = z.size();
    const double mid = geom.d + 0.5 * geom.L;

    std::vector<double> H(nr * nz);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t k = 0; k < nz; ++k) H[i * nz + k] = r.w[i] * r.x[i] * dipole_kernel(r.x[i], z.x[k]);

    const double c = spec.eta0 * geom.R;
    std::vector<std::vector<EvapMode>> per_p(spec.beta.size());
    parallel_for(spec.beta.size(), threads, [&](std::size_t p) {
        const double beta = spec.beta[p];
        const double xi = beta * geom.R;
        // Radial transform of the weighted kernel, one value per z node.
        std::vector<double> radial(nz, 0.0);
        for (std::size_t i = 0; i < nr; ++i) {
            const double j = bessel_j0(beta * r.x[i]);
            const double* h = &H[i * nz];
            for (std::size_t k = 0; k < nz; ++k) radial[k] += j * h[k];
        }
        const double j0xi = bessel_j0(xi);
        const double nr_factor = xi == 0.0 ? 1.0 : xi * xi / ((c * c + xi * xi) * j0xi * j0xi);
        const double radial_integral =
            xi == 0.0 ? 0.5 * geom.R * geom.R : geom.R * geom.R * bessel_j1(xi) / xi;
        for (int parity : {1, -1}) {
            const auto& etas = parity == 1 ? spec.even : spec.odd;
            for (std::size_t m = 0; m < etas.size(); ++m) {
                const double eta = etas[m];
                const double rate = beta * beta + eta * eta;
                const double tau = rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
                if (automatic && tau < tau_floor) continue;
                double I = 0.0;
                for (std::size_t k = 0; k < nz; ++k) {
                    const double s = z.x[k] - mid;
                    I += z.w[k] * radial[k] * (parity == 1 ? std::cos(eta * s) : std::sin(eta * s));
                }
                const double sl = sinc(eta * geom.L);
                const double nz_factor = parity == 1 ? 1.0 / (1.0 + sl) : 1.0 / (1.0 - sl);
                EvapMode mode;
                mode.m = static_cast<int>(m);
                mode.parity = parity;
                mode.p = static_cast<int>(p);
                mode.eta = eta;
                mode.beta = beta;
                mode.tau = tau;
                mode.norm = 2.0 * nr_factor * nz_factor / geom.volume;
                mode.weight = 8.0 * kPi * kPi / geom.volume * nr_factor * nz_factor * I * I;
                if (parity == 1) {
                    const double axial = eta == 0.0 ? geom.L : 2.0 * std::sin(0.5 * eta * geom.L) / eta;
                    const double integral = 2.0 * kPi * radial_integral * axial;
                    mode.mass = integral * integral * mode.norm / geom.volume;
                }
                per_p[p].push_back(mode);
            }
        }
    });
    for (auto& v : per_p) table.modes.insert(table.modes.end(), v.begin(), v.end());
    if (table.modes.empty()) throw Error(ErrorKind::Domain, "truncation retained no modes");
    std::stable_sort(table.modes.begin(), table.modes.end(),
                     [](const EvapMode& a, const EvapMode& b) { return a.tau > b.tau; });
    std::vector<double> w;
    w.reserve(table.modes.size());
    for (const auto& m : table.modes) w.push_back(m.weight);
    table.weight_sum = pairwise_sum(w);
    return table;
}

double g_evaporating(double t, const EvapModeTable& table) {
    if (t < 0.0) throw Error(ErrorKind::Domain, "g_evaporating requires t >= 0");
    // Summed from the fastest mode upward so small terms are added first.
    double sum = 0.0;
    for (auto it = table.modes.rbegin(); it != table.modes.rend(); ++it) {
        if (std::isinf(it->tau)) {
            sum += it->weight;
            continue;
        }
        const double x = t / it->tau;
        if (x < 745.0) sum += it->weight * std::exp(-x);
    }
    return sum;
}

double truncation_error(double t, const EvapModeTable& table) {
    const double omitted = std::max(0.0, table.b_rms2 - table.weight_sum);
    return omitted * std::exp(-t / table.fastest_tau());
}

CorrelationSeries evaporating_series(const std::vector<double>& times, const EvapModeTable& table) {
    CorrelationSeries s;
    s.model = std::isinf(table.tau_ev) ? ModelTag::Reflective : ModelTag::Evaporating;
    s.geom = table.geom;
    s.fluid.tau_ev = table.tau_ev;
    for (double t : times) s.push(t, g_evaporating(t, table), truncation_error(t, table));
    s.validate();
    return s;
}

PropagatorValue evaluate_propagator(double rho, double /*phi*/, double z, double t, double rho0,
                                    double /*phi0*/, double z0, const EvapModeTable& table) {
    const auto& g = table.geom;
    auto inside = [&g](double r, double zz) {
        return r >= 0.0 && r <= g.R && zz >= g.z_bottom() && zz <= g.z_top();
    };
    if (!inside(rho, z) || !inside(rho0, z0))
        throw Error(ErrorKind::Domain, "propagator points must lie inside the cylinder");
    if (!(t > 0.0)) throw Error(ErrorKind::Domain, "propagator requires t > 0");
    const double mid = g.d + 0.5 * g.L;
    const double s = z - mid, s0 = z0 - mid;
    double sum = 0.0;
    for (auto it = table.modes.rbegin(); it != table.modes.rend(); ++it) {
        const EvapMode& m = *it;
        const double zz = m.parity == 1 ? std::cos(m.eta * s) * std::cos(m.eta * s0)
                                        : std::sin(m.eta * s) * std::sin(m.eta * s0);
        const double rr = bessel_j0(m.beta * rho) * bessel_j0(m.beta * rho0);
        const double decay = std::isinf(m.tau) ? 1.0 : std::exp(-t / m.tau);
        sum += m.norm * rr * zz * decay;
    }
    return {sum, t < table.fastest_tau()};
}

double surviving_fraction(double t, const EvapModeTable& table) {
    if (t < 0.0) throw Error(ErrorKind::Domain, "surviving_fraction requires t >= 0");
    double sum = 0.0;
    for (auto it = table.modes.rbegin(); it != table.modes.rend(); ++it)
        if (it->mass != 0.0) sum += it->mass * (std::isinf(it->tau) ? 1.0 : std::exp(-t / it->tau));
    return sum;
}

double tau_dominant_approx(const CylinderGeometry& geom, double tau_ev) {
    check_tau(tau_ev);
    return tau_ev / geom.d * geom.volume / geom.surface;
}

Dominance mode_dominance(const CylinderGeometry& geom, double tau_ev) {
    const EvapEigenSpectrum s = solve_spectrum(geom, tau_ev, 1, 2);
    const double b0 = s.beta[0], b1 = s.beta[1], e0 = s.even[0], o0 = s.odd[0];
    Dominance d;
    d.tau00 = 1.0 / (b0 * b0 + e0 * e0);
    const double radial = 1.0 / (b1 * b1 + e0 * e0);
    const double odd = 1.0 / (b0 * b0 + o0 * o0);
    d.runner_up = radial >= odd ? RunnerUp::RadialExcitation : RunnerUp::OddAxial;
    d.tau_second = std::max(radial, odd);
    d.gap = (d.tau00 - d.tau_second) / d.tau00;
    return d;
}

void SimpleModelParams::validate() const {
    if (!(b_rms2 > 0.0) || !(tau_v > 0.0) || !(plateau > 0.0) || !(tau_ev_eff > 0.0))
        throw Error(ErrorKind::Domain, "simple-model parameters must be strictly positive");
}

double g_simple_model(double t, const SimpleModelParams& p) {
    p.validate();
    if (t < 0.0) throw Error(ErrorKind::Domain, "g_simple_model requires t >= 0");
    const double decay = std::isinf(p.tau_ev_eff) ? 1.0 : std::exp(-t / p.tau_ev_eff);
    return p.b_rms2 * g_free(t) * std::exp(-2.0 * t / p.tau_v) + p.plateau * decay;
}

}  // namespace nanonmr
