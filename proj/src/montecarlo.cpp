#include "nanonmr/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "nanonmr/error.hpp"
#include "nanonmr/estimation.hpp"
#include "nanonmr/numerics.hpp"
#include "nanonmr/parallel.hpp"
#include "nanonmr/sticky.hpp"

namespace nanonmr {

namespace {

constexpr double kPi = std::numbers::pi;

double h_at(const Vec3& p) { return dipole_kernel(std::hypot(p.x, p.y), p.z); }

double uniform(McRng& rng) { return boost::random::uniform_01<double>()(rng); }

enum class Face { None, Bottom, Top, Lateral };

}  // namespace

const char* to_string(MCWall wall) {
    switch (wall) {
        case MCWall::Reflective: return "reflective";
        case MCWall::Sticky: return "sticky";
        case MCWall::Evaporating: return "evaporating";
        case MCWall::Free: return "free";
    }
    return "unknown";
}

double absorption_probability(const CylinderGeometry& geom, const FluidParams& fluid, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "dt must be positive");
    if (!(fluid.tau_ev > 0.0)) throw Error(ErrorKind::Domain, "tau_ev must be positive");
    if (std::isinf(fluid.tau_ev)) return 0.0;
    return std::min(1.0, geom.d / fluid.tau_ev * std::sqrt(kPi * dt / fluid.D));
}

StepResult step_particle(const Vec3& position, double dt, const CylinderGeometry& geom, const WallSpec& walls,
                         McRng& rng) {
    const double sigma = std::sqrt(2.0 * dt);
    boost::random::normal_distribution<double> normal(0.0, sigma);
    Vec3 p = position;
    Vec3 v{normal(rng), normal(rng), normal(rng)};
    const bool bounded = walls.model != MCWall::Free;
    const double zb = geom.z_bottom(), zt = geom.z_top(), R2 = geom.R * geom.R;

    // Walk the segment face by face; reflections can chain for large steps.
    for (int bounce = 0; bounce < 64; ++bounce) {
        double s = std::numeric_limits<double>::infinity();
        Face face = Face::None;
        if (v.z < 0.0 && p.z + v.z < zb) {
            s = (zb - p.z) / v.z;
            face = Face::Bottom;
        } else if (bounded && v.z > 0.0 && p.z + v.z > zt) {
            s = (zt - p.z) / v.z;
            face = Face::Top;
        }
        if (bounded) {
            const double ex = p.x + v.x, ey = p.y + v.y;
            if (ex * ex + ey * ey > R2) {
                const double a = v.x * v.x + v.y * v.y;
                const double b = 2.0 * (p.x * v.x + p.y * v.y);
                const double c = std::min(0.0, p.x * p.x + p.y * p.y - R2);
                const double sl = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
                if (sl < s) {
                    s = sl;
                    face = Face::Lateral;
                }
            }
        }
        if (face == Face::None) {
            p = {p.x + v.x, p.y + v.y, p.z + v.z};
            break;
        }
        s = std::clamp(s, 0.0, 1.0);
        Vec3 hit{p.x + s * v.x, p.y + s * v.y, p.z + s * v.z};
        Vec3 rest{(1.0 - s) * v.x, (1.0 - s) * v.y, (1.0 - s) * v.z};
        if (face == Face::Lateral) {
            const double scale = geom.R / std::hypot(hit.x, hit.y);
            hit.x *= scale;
            hit.y *= scale;
        } else {
            hit.z = face == Face::Bottom ? zb : zt;
        }
        if (walls.model == MCWall::Sticky) return {hit, ParticleStatus::Stuck};
        if (walls.model == MCWall::Evaporating && uniform(rng) < walls.p_abs) return {hit, ParticleStatus::Evaporated};
        if (face == Face::Lateral) {
            const double nx = hit.x / geom.R, ny = hit.y / geom.R;
            const double dot = rest.x * nx + rest.y * ny;
            rest.x -= 2.0 * dot * nx;
            rest.y -= 2.0 * dot * ny;
        } else {
            rest.z = -rest.z;
        }
        p = hit;
        v = rest;
    }
    // Guard against rounding at the faces.
    p.z = bounded ? std::clamp(p.z, zb, zt) : std::max(p.z, zb);
    if (bounded) {
        const double r2 = p.x * p.x + p.y * p.y;
        if (r2 > R2) {
            const double scale = geom.R / std::sqrt(r2);
            p.x *= scale;
            p.y *= scale;
        }
    }
    return {p, ParticleStatus::Bulk};
}

void MCConfig::validate(const CylinderGeometry& geom) const {
    if (particles == 0) throw Error(ErrorKind::Domain, "particle count must be positive");
    if (realizations < 2) throw Error(ErrorKind::Domain, "at least 2 realizations are needed for standard errors");
    if (times.empty()) throw Error(ErrorKind::Domain, "Monte Carlo output grid is empty");
    const double tau_v = wall == MCWall::Free ? 1.0 : volume_time(plateau_ideal(geom));
    const double limit = 1e-3 * std::min(1.0, tau_v);
    if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12))
        throw Error(ErrorKind::Domain, "dt must be in (0, " + std::to_string(limit) + "]");
    long long prev = 0;
    for (double t : times) {
        if (!(t > 0.0)) throw Error(ErrorKind::Domain, "Monte Carlo output times must be positive");
        const long long k = std::max(1LL, std::llround(t / dt));
        if (k <= prev) throw Error(ErrorKind::Domain, "output times must map to increasing step counts");
        prev = k;
    }
}

McRng realization_stream(std::uint64_t seed, std::uint64_t realization) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(realization), static_cast<std::uint32_t>(realization >> 32),
                      0x6e6d72u};
    return McRng(seq);
}

MCResult simulate_correlation(const MCConfig& config, const CylinderGeometry& geom, const FluidParams& fluid,
                              int threads) {
    config.validate(geom);
    WallSpec walls{config.wall, 0.0};
    if (config.wall == MCWall::Evaporating) walls.p_abs = absorption_probability(geom, fluid, config.dt);

    const std::size_t nt = config.times.size();
    std::vector<long long> steps(nt);
    for (std::size_t i = 0; i < nt; ++i) steps[i] = std::max(1LL, std::llround(config.times[i] / config.dt));
    const bool free_mode = config.wall == MCWall::Free;
    const double b_half = kPi / (4.0 * geom.d * geom.d * geom.d);
    const double zb = geom.z_bottom();

    std::vector<std::vector<double>> corr(config.realizations, std::vector<double>(nt));
    std::vector<std::vector<double>> surv(config.realizations, std::vector<double>(nt));
    parallel_for(config.realizations, threads, [&](std::size_t r) {
        McRng rng = realization_stream(config.seed, r);
        std::vector<long double> acc(nt, 0.0L);
        std::vector<std::size_t> alive(nt, 0);
        for (std::size_t n = 0; n < config.particles; ++n) {
            Vec3 p;
            double weight;  // estimator = weight * h(r_t)
            if (free_mode) {
                // r^-6 envelope of h^2 above z = d, thinned to h^2.
                for (;;) {
                    const double rad = geom.d * std::pow(1.0 - uniform(rng), -1.0 / 3.0);
                    const double c = uniform(rng);
                    const double phi = 2.0 * kPi * uniform(rng);
                    if (rad * c < geom.d) continue;
                    const double shape = 3.0 * c * c - 1.0;
                    if (4.0 * uniform(rng) >= shape * shape) continue;
                    const double sn = std::sqrt(1.0 - c * c);
                    p = {rad * sn * std::cos(phi), rad * sn * std::sin(phi), rad * c};
                    break;
                }
                weight = b_half / h_at(p);
            } else {
                const double rho = geom.R * std::sqrt(uniform(rng));
                const double phi = 2.0 * kPi * uniform(rng);
                p = {rho * std::cos(phi), rho * std::sin(phi), zb + geom.L * uniform(rng)};
                weight = geom.volume * h_at(p);
            }
            long long k = 0;
            for (std::size_t i = 0; i < nt; ++i) {
                ParticleStatus status = ParticleStatus::Bulk;
                while (k < steps[i]) {
                    const StepResult st = step_particle(p, config.dt, geom, walls, rng);
                    p = st.position;
                    ++k;
                    if (st.status != ParticleStatus::Bulk) {
                        status = st.status;
                        break;
                    }
                }
                if (status == ParticleStatus::Evaporated) break;
                if (status == ParticleStatus::Stuck) {
                    const double frozen = weight * h_at(p);
                    for (std::size_t j = i; j < nt; ++j) acc[j] += frozen;
                    break;
                }
                acc[i] += weight * h_at(p);
                ++alive[i];
            }
        }
        const double inv = 1.0 / static_cast<double>(config.particles);
        for (std::size_t i = 0; i < nt; ++i) {
            corr[r][i] = static_cast<double>(acc[i]) * inv;
            surv[r][i] = static_cast<double>(alive[i]) * inv;
        }
    });

    MCResult out;
    out.config = config;
    for (CorrelationSeries* s : {&out.correlation, &out.survival}) {
        s->model = ModelTag::MonteCarlo;
        s->geom = geom;
        s->fluid = fluid;
        s->seed = config.seed;
    }
    const double nr = static_cast<double>(config.realizations);
    std::vector<double> col(config.realizations), dev(config.realizations);
    auto reduce = [&](const std::vector<std::vector<double>>& data, std::size_t i, double& mean, double& se) {
        for (std::size_t r = 0; r < config.realizations; ++r) col[r] = data[r][i];
        mean = pairwise_sum(col) / nr;
        for (std::size_t r = 0; r < config.realizations; ++r) dev[r] = (col[r] - mean) * (col[r] - mean);
        se = std::sqrt(pairwise_sum(dev) / (nr - 1.0) / nr);
    };
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = static_cast<double>(steps[i]) * config.dt;
        double m, e;
        reduce(corr, i, m, e);
        out.correlation.push(t, m, e);
        reduce(surv, i, m, e);
        out.survival.push(t, m, e);
    }
    return out;
}

}  // namespace nanonmr
