#include "nanonmr/freediff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "nanonmr/error.hpp"
#include "nanonmr/numerics.hpp"

namespace nanonmr {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

// c_k multiplies (4/sqrt(pi)) t^{k-3/2}. It comes from expanding
// sqrt(pi/t) erfcx(1/sqrt(t)) = sum_n (-1)^n (2n-1)!! (t/2)^n inside the
// closed form; orders k < 3 cancel exactly.
std::array<double, 40> series_coefficients() {
    std::array<double, 43> a{};
    a[0] = 1.0;
    for (int n = 1; n < 43; ++n) a[n] = -a[n - 1] * (2.0 * n - 1.0) / 2.0;
    auto at = [&](int i) { return i < 0 ? 0.0 : a[i]; };
    std::array<double, 40> c{};
    for (int k = 0; k < 40; ++k)
        c[k] = -at(k) + at(k - 1) - 1.75 * at(k - 2) + 1.5 * at(k - 3);
    return c;
}

// Expansion in u = t^{-1/2}, built from erfcx(u) = sum_n (-u)^n / Gamma(n/2 + 1).
// Entry k multiplies (4/sqrt(pi)) u^k; orders below 3 cancel exactly.
std::array<double, 48> large_time_coefficients() {
    std::array<double, 52> b{};
    for (int n = 0; n < 52; ++n) b[n] = (n % 2 == 0 ? 1.0 : -1.0) / std::tgamma(0.5 * n + 1.0);
    auto at = [&](int i) { return i < 0 ? 0.0 : b[i]; };
    std::array<double, 48> c{};
    c[3] = 8.0 / 15.0;
    for (int k = 4; k < 48; ++k)
        c[k] = kSqrtPi * (-at(k - 4) + 1.5 * at(k + 2) + at(k - 2) - 1.75 * at(k));
    return c;
}

constexpr double kLargeTimeSwitch = 50.0;

double g_free_large(double t) {
    static const auto c = large_time_coefficients();
    const double u = 1.0 / std::sqrt(t);
    double power = u * u * u;
    double sum = 0.0;
    for (int k = 3; k < 48; ++k) {
        const double term = c[k] * power;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        power *= u;
    }
    return 4.0 / kSqrtPi * sum;
}

}  // namespace

double g_free_closed(double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::Domain, "g_free_closed requires t > 0");
    const double s = std::sqrt(t);
    const double t32 = t * s;
    const double ex = std::sqrt(std::numbers::pi / t) * erfcx(1.0 / s);
    const double poly = -1.0 / t32 + 1.5 * t32 + 1.0 / s - 1.75 * s;
    return 4.0 / kSqrtPi *
           (poly * ex + 1.0 / t32 - 1.5 / s - 1.5 * kSqrtPi * t + 3.0 * s + 0.25 * kSqrtPi);
}

double g_free_series(double t, int terms) {
    if (t < 0.0) throw Error(ErrorKind::Domain, "g_free_series requires t >= 0");
    static const auto c = series_coefficients();
    const double s = std::sqrt(t);
    double sum = 0.0;
    double power = t * s;  // t^{3/2}
    const int last = std::min(3 + terms, 40);
    for (int k = 3; k < last; ++k) {
        sum += c[k] * power;
        power *= t;
    }
    return 1.0 - 6.0 * t + 4.0 / kSqrtPi * sum;
}

double g_free(double t) {
    if (!(t >= 0.0) || std::isnan(t)) throw Error(ErrorKind::Domain, "g_free requires t >= 0");
    if (t < kFreeSeriesSwitch) return g_free_series(t);
    if (t >= kLargeTimeSwitch) return g_free_large(t);
    return g_free_closed(t);
}

double g_free_long_asymptote(double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::Domain, "long-time asymptote requires t > 0");
    return 32.0 / (15.0 * kSqrtPi) * std::pow(t, -1.5);
}

}  // namespace nanonmr
