#include "nanonmr/sticky.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

#include "nanonmr/error.hpp"
#include "nanonmr/numerics.hpp"
#include "nanonmr/parallel.hpp"

namespace nanonmr {

namespace {

constexpr double kPi = std::numbers::pi;

double view_difference(const CylinderGeometry& g) { return g.cos_beta - g.sin_alpha; }

// Lateral wall plus both caps: the surface integral of h divided by 2 pi.
double sticky_bracket(const CylinderGeometry& g) {
    const double ca = g.cos_alpha, sa = g.sin_alpha, cb = g.cos_beta, sb = g.sin_beta;
    return ca * ca * ca + sb * sb * sb + sa * ca * ca - sb * sb * cb;
}

struct Contraction {
    double g;
    double density;
};

Contraction contract(double t, const CylinderGeometry& geom, const StickyQuadrature& q, double width) {
    const Rule1D r = panel_rule_width(0.0, geom.R, width, q.nodes_per_panel);
    const Rule1D z = panel_rule_width(geom.z_bottom(), geom.z_top(), width, q.nodes_per_panel);
    if (r.size() > q.max_nodes_per_axis || z.size() > q.max_nodes_per_axis)
        throw AccuracyError("sticky grid exceeds the node budget at t = " + std::to_string(t),
                            std::nan(""), std::nan(""));
    const std::size_t nr = r.size(), nz = z.size();
    const double reach = q.kernel_cutoff * std::sqrt(t);
    const double inv4t = 1.0 / (4.0 * t);

    // Weighted kernel samples H_ik and unit weights U_ik.
    std::vector<double> H(nr * nz), U(nr * nz);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t k = 0; k < nz; ++k) {
            const double w = r.w[i] * z.w[k];
            H[i * nz + k] = w * dipole_kernel(r.x[i], z.x[k]);
            U[i * nz + k] = w;
        }

    // z-kernel band for each node.
    std::vector<std::size_t> zlo(nz), zhi(nz);
    for (std::size_t k = 0, a = 0, b = 0; k < nz; ++k) {
        while (z.x[k] - z.x[a] > reach) ++a;
        if (b < k) b = k;
        while (b + 1 < nz && z.x[b + 1] - z.x[k] <= reach) ++b;
        zlo[k] = a;
        zhi[k] = b;
    }
    std::vector<double> kz_row;
    // A = H Kz, B = U Kz over the band.
    std::vector<double> A(nr * nz, 0.0), B(nr * nz, 0.0);
    for (std::size_t l = 0; l < nz; ++l) {
        kz_row.assign(zhi[l] - zlo[l] + 1, 0.0);
        for (std::size_t k = zlo[l]; k <= zhi[l]; ++k) {
            const double dz = z.x[k] - z.x[l];
            kz_row[k - zlo[l]] = std::exp(-dz * dz * inv4t);
        }
        for (std::size_t i = 0; i < nr; ++i) {
            const double* h = &H[i * nz];
            const double* u = &U[i * nz];
            double sa = 0.0, sb = 0.0;
            for (std::size_t k = zlo[l]; k <= zhi[l]; ++k) {
                const double kv = kz_row[k - zlo[l]];
                sa += h[k] * kv;
                sb += u[k] * kv;
            }
            A[i * nz + l] = sa;
            B[i * nz + l] = sb;
        }
    }

    double g = 0.0, dens = 0.0;
    for (std::size_t i = 0; i < nr; ++i) {
        double gi = 0.0, di = 0.0;
        for (std::size_t j = 0; j < nr; ++j) {
            const double dr = r.x[i] - r.x[j];
            if (std::abs(dr) > reach) continue;
            const double kr = r.x[i] * r.x[j] * bessel_i0e(r.x[i] * r.x[j] * 2.0 * inv4t) *
                              std::exp(-dr * dr * inv4t);
            const double* a = &A[i * nz];
            const double* hj = &H[j * nz];
            const double* b = &B[i * nz];
            const double* uj = &U[j * nz];
            double sg = 0.0, sd = 0.0;
            for (std::size_t l = 0; l < nz; ++l) {
                sg += a[l] * hj[l];
                sd += b[l] * uj[l];
            }
            gi += kr * sg;
            di += kr * sd;
        }
        g += gi;
        dens += di;
    }
    // Azimuthal integrals of the free propagator: 4 pi^2 (4 pi t)^{-3/2}.
    const double pref = std::sqrt(kPi) / (2.0 * t * std::sqrt(t));
    return {pref * g, pref * dens / geom.volume};
}

}  // namespace

double plateau_ideal(const CylinderGeometry& geom) {
    const double c = view_difference(geom);
    return 4.0 * kPi * kPi / geom.volume * c * c;
}

double plateau_sticky(const CylinderGeometry& geom) {
    return 4.0 * kPi * kPi / (geom.surface * geom.R) * view_difference(geom) * sticky_bracket(geom);
}

double plateau_ratio(const CylinderGeometry& geom) {
    const double c = view_difference(geom);
    if (std::abs(c) < 1e-14)
        throw Error(ErrorKind::UndefinedRatio, "plateau ratio undefined for cos(beta) = sin(alpha)");
    return geom.volume / (geom.surface * geom.R) * sticky_bracket(geom) / c;
}

StickyBulk sticky_bulk_terms(double t, const CylinderGeometry& geom, const StickyQuadrature& quad) {
    if (!(t > 0.0)) throw Error(ErrorKind::Domain, "sticky bulk terms require t > 0");
    if (quad.nodes_per_panel < 2 || !(quad.ridge_width > 0.0) || !(quad.max_panel > 0.0))
        throw Error(ErrorKind::Domain, "invalid sticky quadrature settings");
    const double width = std::min(quad.ridge_width * std::sqrt(t), quad.max_panel);
    const Contraction fine = contract(t, geom, quad, width);
    StickyBulk out{fine.g, 0.0, fine.density, 0.0};
    if (quad.estimate_error) {
        const Contraction coarse = contract(t, geom, quad, 2.0 * width);
        out.g_err = std::abs(fine.g - coarse.g);
        out.density_err = std::abs(fine.density - coarse.density);
        if (out.g_err > quad.rel_tol * std::abs(fine.g) + 1e-14 ||
            out.density_err > quad.rel_tol * std::abs(fine.density) + 1e-14)
            throw AccuracyError("sticky bulk integral did not reach tolerance at t = " + std::to_string(t),
                                fine.g, out.g_err);
    }
    return out;
}

double g_sticky_bulk(double t, const CylinderGeometry& geom, const StickyQuadrature& quad) {
    return sticky_bulk_terms(t, geom, quad).g;
}

double bulk_density(double t, const CylinderGeometry& geom, const StickyQuadrature& quad) {
    return sticky_bulk_terms(t, geom, quad).density;
}

ValueWithError g_sticky(double t, const CylinderGeometry& geom, const StickyQuadrature& quad) {
    if (t < 0.0) throw Error(ErrorKind::Domain, "g_sticky requires t >= 0");
    if (t == 0.0) return {b_rms_squared(geom), 0.0};
    const StickyBulk b = sticky_bulk_terms(t, geom, quad);
    const double pl = plateau_sticky(geom);
    return {b.g + pl * (1.0 - b.density), b.g_err + std::abs(pl) * b.density_err};
}

CorrelationSeries sticky_series(const std::vector<double>& times, const CylinderGeometry& geom,
                                const StickyQuadrature& quad, int threads) {
    CorrelationSeries s;
    s.model = ModelTag::Sticky;
    s.geom = geom;
    s.fluid.tau_ev = std::numeric_limits<double>::infinity();
    s.t = times;
    s.g.assign(times.size(), 0.0);
    s.err.assign(times.size(), 0.0);
    parallel_for(times.size(), threads, [&](std::size_t i) {
        const ValueWithError v = g_sticky(times[i], geom, quad);
        s.g[i] = v.value;
        s.err[i] = v.error;
    });
    s.validate();
    return s;
}

std::pair<double, double> optimal_geometry(WallModel model, double d) {
    if (!(d > 0.0)) throw Error(ErrorKind::Domain, "optimal_geometry requires d > 0");
    // Plateaus scale as d^-3 at fixed R/d, L/d: optimize in units of d.
    auto objective = [model](double R, double L) {
        const CylinderGeometry g = make_geometry(R, L, 1.0);
        return model == WallModel::Reflective ? plateau_ideal(g) : plateau_sticky(g);
    };
    double best_r = 1.0, best_l = 1.0, best = -1.0;
    double step = 0.05;
    double r_lo = step, r_hi = 10.0, l_lo = step, l_hi = 10.0;
    while (step > 1e-4) {
        for (double R = r_lo; R <= r_hi + 1e-12; R += step)
            for (double L = l_lo; L <= l_hi + 1e-12; L += step) {
                const double v = objective(R, L);
                if (v > best) {
                    best = v;
                    best_r = R;
                    best_l = L;
                }
            }
        r_lo = std::max(step / 10, best_r - 2 * step);
        r_hi = std::min(10.0, best_r + 2 * step);
        l_lo = std::max(step / 10, best_l - 2 * step);
        l_hi = std::min(10.0, best_l + 2 * step);
        step /= 10.0;
    }
    return {best_r * d, best_l * d};
}

}  // namespace nanonmr
