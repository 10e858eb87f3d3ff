#pragma once

#include <cmath>

#include "nanonmr/numerics.hpp"

namespace nanonmr {

// Cylinder of radius R and height L whose lower cap sits a depth d above the
// sensor, which lies on the symmetry axis. Lengths are in units of d.
struct CylinderGeometry {
    double R = 1.0;
    double L = 1.0;
    double d = 1.0;
    double surface = 0.0;
    double volume = 0.0;
    double sin_alpha = 0.0;
    double cos_alpha = 0.0;
    double sin_beta = 0.0;
    double cos_beta = 0.0;

    double alpha() const;
    double beta() const;
    double z_bottom() const { return d; }
    double z_top() const { return d + L; }
};

CylinderGeometry make_geometry(double R, double L, double d = 1.0);

// Diffusion constant and wall evaporation time. Library code works with
// D = 1 and times in units of T_D = d^2/D; tau_ev = +inf means no evaporation.
struct FluidParams {
    double D = 1.0;
    double tau_ev = 1e3;
    double diffusion_time(double d) const { return d * d / D; }
};

// Unnormalized m = 0 kernel 3z^2/r^5 - 1/r^3.
inline double dipole_kernel(double rho, double z) {
    const double q = rho * rho + z * z;
    const double inv = 1.0 / q;
    return (3.0 * z * z * inv - 1.0) * inv / std::sqrt(q);
}

// Y_2^0/r^3 with the spherical-harmonic prefactor 4 sqrt(pi/5).
double form_factor(double rho, double z);

// Equal-time amplitude: the volume integral of the squared kernel,
// 2 pi int rho h^2 drho dz over the cylinder.
double b_rms_squared(const CylinderGeometry& geom, const QuadratureSpec& quad = {});

}  // namespace nanonmr
