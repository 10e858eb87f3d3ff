#include "nanonmr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "nanonmr/error.hpp"
#include "nanonmr/parallel.hpp"

namespace nanonmr {

namespace {

constexpr double kPi = std::numbers::pi;

Rule1D compute_gauss_legendre(int n) {
    Rule1D rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.x[i] = -x;
        rule.x[n - 1 - i] = x;
        rule.w[i] = w;
        rule.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.x[n / 2] = 0.0;
    return rule;
}

int axis_value(const std::vector<int>& v, std::size_t axis) {
    return v.size() == 1 ? v[0] : v[axis];
}

double tensor_sum(const std::function<double(std::span<const double>)>& f,
                  const std::vector<Rule1D>& rules) {
    const std::size_t k = rules.size();
    std::vector<std::size_t> idx(k, 0);
    std::vector<double> point(k);
    std::vector<double> partial;
    partial.reserve(rules[k - 1].size());
    std::vector<double> outer;
    double total = 0.0;
    // Odometer over all axes but the last; the innermost axis is summed
    // into `partial` and reduced pairwise.
    for (;;) {
        double w_outer = 1.0;
        for (std::size_t a = 0; a + 1 < k; ++a) {
            point[a] = rules[a].x[idx[a]];
            w_outer *= rules[a].w[idx[a]];
        }
        partial.clear();
        const Rule1D& last = rules[k - 1];
        for (std::size_t j = 0; j < last.size(); ++j) {
            point[k - 1] = last.x[j];
            partial.push_back(last.w[j] * f(std::span<const double>(point)));
        }
        outer.push_back(w_outer * pairwise_sum(partial));
        if (k == 1) break;
        std::size_t a = k - 1;
        bool done = true;
        while (a-- > 0) {
            if (++idx[a] < rules[a].size()) {
                done = false;
                break;
            }
            idx[a] = 0;
        }
        if (done) break;
    }
    total = pairwise_sum(outer);
    return total;
}

double series_j(int n, double x) {
    const long double q = -0.25L * static_cast<long double>(x) * x;
    long double term = (n == 0) ? 1.0L : 0.5L * x;
    long double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * (k + n));
        sum += term;
        if (std::abs(term) < 1e-22L * std::max(std::abs(sum), 1e-30L) && k > 4) break;
    }
    return static_cast<double>(sum);
}

double asymptotic_j(int n, double x) {
    const double mu = 4.0 * n * n;
    const double inv8x = 1.0 / (8.0 * x);
    double p = 1.0;
    double q = 0.0;
    double a = 1.0;
    double prev = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        a *= (mu - odd * odd) * inv8x / k;
        if (std::abs(a) > prev) break;
        prev = std::abs(a);
        const int sign = ((k / 2) % 2 == 0) ? 1 : -1;
        if (k % 2 == 1) {
            q += (((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0) * a;
        } else {
            p += sign * a;
        }
        if (std::abs(a) < 1e-17) break;
    }
    const double chi = x - (0.5 * n + 0.25) * kPi;
    return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

void QuadratureSpec::validate() const {
    if (nodes.empty() || subdivisions.empty())
        throw Error(ErrorKind::Domain, "quadrature spec needs node and subdivision counts");
    for (int n : nodes)
        if (n < 2) throw Error(ErrorKind::Domain, "quadrature node count must be >= 2");
    for (int s : subdivisions)
        if (s < 1) throw Error(ErrorKind::Domain, "quadrature subdivision count must be >= 1");
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw Error(ErrorKind::Domain, "quadrature tolerance must lie in (0, 1)");
    if (!(abs_floor >= 0.0)) throw Error(ErrorKind::Domain, "absolute floor must be >= 0");
    if (max_refinements < 0) throw Error(ErrorKind::Domain, "max_refinements must be >= 0");
}

const Rule1D& gauss_legendre(int n) {
    if (n < 1) throw Error(ErrorKind::Domain, "Gauss-Legendre order must be positive");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Rule1D>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Rule1D>(compute_gauss_legendre(n));
    return *slot;
}

Rule1D panel_rule(double a, double b, int panels, int nodes) {
    const Rule1D& base = gauss_legendre(nodes);
    Rule1D out;
    out.x.reserve(static_cast<std::size_t>(panels) * nodes);
    out.w.reserve(out.x.capacity());
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        for (int i = 0; i < nodes; ++i) {
            out.x.push_back(mid + 0.5 * h * base.x[i]);
            out.w.push_back(0.5 * h * base.w[i]);
        }
    }
    return out;
}

Rule1D panel_rule_width(double a, double b, double max_width, int nodes) {
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_width - 1e-9)));
    return panel_rule(a, b, panels, nodes);
}

QuadResult integrate_nd(const std::function<double(std::span<const double>)>& f,
                        std::span<const Interval> bounds, const QuadratureSpec& spec) {
    spec.validate();
    const std::size_t k = bounds.size();
    if (k == 0 || k > 4) throw Error(ErrorKind::Domain, "integrate_nd supports 1 to 4 axes");
    if (spec.nodes.size() != 1 && spec.nodes.size() != k)
        throw Error(ErrorKind::Domain, "node count list does not match the number of axes");
    if (spec.subdivisions.size() != 1 && spec.subdivisions.size() != k)
        throw Error(ErrorKind::Domain, "subdivision list does not match the number of axes");
    for (const auto& b : bounds)
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi))
            throw Error(ErrorKind::Domain, "integration bounds must be finite");

    auto evaluate = [&](int level) {
        std::vector<Rule1D> rules;
        rules.reserve(k);
        for (std::size_t a = 0; a < k; ++a) {
            const int panels = axis_value(spec.subdivisions, a) << level;
            rules.push_back(panel_rule(bounds[a].lo, bounds[a].hi, panels, axis_value(spec.nodes, a)));
        }
        return tensor_sum(f, rules);
    };

    double coarse = evaluate(0);
    double fine = coarse;
    double err = 0.0;
    for (int level = 1; level <= spec.max_refinements + 1; ++level) {
        fine = evaluate(level);
        err = std::abs(fine - coarse);
        if (err <= std::max(spec.rel_tol * std::abs(fine), spec.abs_floor)) return {fine, err};
        coarse = fine;
    }
    throw AccuracyError("quadrature did not converge: error estimate " + std::to_string(err),
                        fine, err);
}

RootScanResult scan_roots(const std::function<double(double)>& f, const RootScanSpec& spec,
                          std::span<const double> poles) {
    if (!(spec.lo >= 0.0) || !(spec.hi > spec.lo))
        throw Error(ErrorKind::Domain, "root scan interval must satisfy 0 <= lo < hi");
    if (!(spec.step > 0.0)) throw Error(ErrorKind::Domain, "root scan step must be positive");

    std::vector<double> cuts;
    for (double p : poles)
        if (p > spec.lo && p < spec.hi) cuts.push_back(p);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<double> edges;
    edges.push_back(spec.lo);
    edges.insert(edges.end(), cuts.begin(), cuts.end());
    edges.push_back(spec.hi);

    RootScanResult result;
    auto tol = [&](double a, double b) {
        return std::abs(b - a) <= spec.rel_tol * std::max(std::abs(a), std::abs(b)) ||
               std::abs(b - a) < 1e-300;
    };
    auto push = [&](double r) {
        if (!result.roots.empty()) {
            const double last = result.roots.back();
            if (std::abs(r - last) <= 4.0 * spec.rel_tol * std::max(std::abs(r), 1e-300)) return true;
        }
        if (result.roots.size() >= spec.max_roots) {
            result.truncated = true;
            return false;
        }
        result.roots.push_back(r);
        return true;
    };

    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        double a = edges[s];
        double b = edges[s + 1];
        const double nudge = 1e-13 * std::max(1.0, std::abs(b));
        if (s > 0) a += nudge;
        if (s + 2 < edges.size()) b -= nudge;
        if (!(b > a)) continue;
        const auto steps = static_cast<std::size_t>(std::ceil((b - a) / spec.step));
        double x0 = a;
        double f0 = f(x0);
        if (f0 == 0.0 && !push(x0)) return result;
        for (std::size_t i = 1; i <= steps; ++i) {
            const double x1 = (i == steps) ? b : a + static_cast<double>(i) * (b - a) / steps;
            const double f1 = f(x1);
            if (f1 == 0.0) {
                if (!push(x1)) return result;
            } else if (f0 != 0.0 && std::signbit(f0) != std::signbit(f1)) {
                std::uintmax_t iters = 200;
                auto [lo, hi] = boost::math::tools::toms748_solve(f, x0, x1, f0, f1, tol, iters);
                if (!push(0.5 * (lo + hi))) return result;
            }
            x0 = x1;
            f0 = f1;
        }
    }
    if (result.roots.size() < spec.min_roots)
        throw Error(ErrorKind::ScanResolution,
                    "root scan found " + std::to_string(result.roots.size()) + " roots, expected " +
                        std::to_string(spec.min_roots));
    return result;
}

double bessel_i0e(double x) {
    if (!(x >= 0.0) || !std::isfinite(x))
        throw Error(ErrorKind::Domain, "bessel_i0e requires finite x >= 0");
    if (x <= 30.0) {
        const double q = 0.25 * x * x;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 500; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return sum * std::exp(-x);
    }
    const double inv8x = 1.0 / (8.0 * x);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * odd * odd * inv8x / k;
        if (next > term) break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum / std::sqrt(2.0 * kPi * x);
}

double bessel_j0(double x) {
    x = std::abs(x);
    return x <= 20.0 ? series_j(0, x) : asymptotic_j(0, x);
}

double bessel_j1(double x) {
    const double s = x < 0 ? -1.0 : 1.0;
    x = std::abs(x);
    return s * (x <= 20.0 ? series_j(1, x) : asymptotic_j(1, x));
}

BesselValue bessel_j(int n, double x) {
    if (!(x >= 0.0) || !std::isfinite(x))
        throw Error(ErrorKind::Domain, "bessel_j requires finite x >= 0");
    if (n == 0) return {bessel_j0(x), -bessel_j1(x)};
    if (n == 1) {
        const double j1 = bessel_j1(x);
        const double d = (x == 0.0) ? 0.5 : bessel_j0(x) - j1 / x;
        return {j1, d};
    }
    throw Error(ErrorKind::Domain, "bessel_j supports orders 0 and 1 only");
}

double erfcx(double x) {
    if (x < 26.0) {
        if (x < -26.0) throw Error(ErrorKind::Domain, "erfcx overflows for x < -26");
        return std::exp(x * x) * std::erfc(x);
    }
    const double inv2x2 = 1.0 / (2.0 * x * x);
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 40; ++n) {
        term *= -(2.0 * n - 1.0) * inv2x2;
        sum += term;
        if (std::abs(term) < 1e-17) break;
    }
    return sum / (x * std::sqrt(kPi));
}

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n <= 16) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

int default_threads() {
    if (const char* env = std::getenv("NANONMR_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

}  // namespace nanonmr
