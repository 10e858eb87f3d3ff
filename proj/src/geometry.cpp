#include "nanonmr/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "nanonmr/error.hpp"

namespace nanonmr {

double CylinderGeometry::alpha() const { return std::atan2(sin_alpha, cos_alpha); }
double CylinderGeometry::beta() const { return std::atan2(sin_beta, cos_beta); }

CylinderGeometry make_geometry(double R, double L, double d) {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || !(v > 0.0))
            throw Error(ErrorKind::InvalidGeometry,
                        std::string(name) + " must be positive and finite");
    };
    check(R, "R");
    check(L, "L");
    check(d, "d");
    constexpr double pi = std::numbers::pi;
    CylinderGeometry g;
    g.R = R;
    g.L = L;
    g.d = d;
    g.surface = 2.0 * pi * R * R + 2.0 * pi * R * L;
    g.volume = pi * R * R * L;
    const double ra = std::hypot(d, R);
    g.sin_alpha = d / ra;
    g.cos_alpha = R / ra;
    const double rb = std::hypot(d + L, R);
    g.sin_beta = R / rb;
    g.cos_beta = (d + L) / rb;
    return g;
}

double form_factor(double rho, double z) {
    if (rho == 0.0 && z == 0.0)
        throw Error(ErrorKind::Singularity, "form factor is singular at the origin");
    static const double prefactor = 4.0 * std::sqrt(std::numbers::pi / 5.0);
    return prefactor * dipole_kernel(rho, z);
}

double b_rms_squared(const CylinderGeometry& geom, const QuadratureSpec& quad) {
    QuadratureSpec spec = quad;
    // Panels of unit width resolve the r^-3 scale set by d.
    if (spec.subdivisions.size() == 1 && spec.subdivisions[0] == 1) {
        spec.subdivisions = {std::max(1, static_cast<int>(std::ceil(geom.R / geom.d))),
                             std::max(1, static_cast<int>(std::ceil(geom.L / geom.d)))};
    }
    const std::array<Interval, 2> box{{{0.0, geom.R}, {geom.z_bottom(), geom.z_top()}}};
    const auto integrand = [](std::span<const double> p) {
        const double h = dipole_kernel(p[0], p[1]);
        return p[0] * h * h;
    };
    const QuadResult r = integrate_nd(integrand, box, spec);
    return 2.0 * std::numbers::pi * r.value;
}

}  // namespace nanonmr
