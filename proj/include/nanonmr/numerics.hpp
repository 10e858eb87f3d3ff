#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nanonmr {

struct Interval {
    double lo;
    double hi;
};

// Tensor-product Gauss-Legendre settings. A single entry in `nodes` or
// `subdivisions` applies to every axis.
struct QuadratureSpec {
    std::vector<int> nodes{8};
    std::vector<int> subdivisions{1};
    double rel_tol = 1e-6;
    double abs_floor = 1e-14;
    int max_refinements = 3;

    void validate() const;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

// Gauss-Legendre rule on [-1, 1]; cached, thread-safe.
const Rule1D& gauss_legendre(int n);

// Composite rule with `panels` equal panels of `nodes` points each.
Rule1D panel_rule(double a, double b, int panels, int nodes);
// Composite rule whose panels are no wider than `max_width`.
Rule1D panel_rule_width(double a, double b, double max_width, int nodes);

// The error estimate is |Q(2s) - Q(s)| where s is the per-axis panel count;
// panels double until the estimate meets the tolerance.
QuadResult integrate_nd(const std::function<double(std::span<const double>)>& f,
                        std::span<const Interval> bounds, const QuadratureSpec& spec);

struct RootScanSpec {
    double lo = 0.0;
    double hi = 1.0;
    double step = 0.1;
    double rel_tol = 1e-12;
    std::size_t max_roots = 100000;
    // Fewer roots than this raises a scan-resolution error.
    std::size_t min_roots = 0;
};

struct RootScanResult {
    std::vector<double> roots;
    bool truncated = false;
};

// Sign-change roots of f on [lo, hi]. `poles` split the scan so that sign
// flips across them are never reported.
RootScanResult scan_roots(const std::function<double(double)>& f, const RootScanSpec& spec,
                          std::span<const double> poles = {});

// I0(x) exp(-x) for x >= 0.
double bessel_i0e(double x);

struct BesselValue {
    double value;
    double derivative;
};

// J_n and J_n' for n in {0, 1}, x >= 0.
BesselValue bessel_j(int n, double x);
double bessel_j0(double x);
double bessel_j1(double x);

// exp(x^2) erfc(x).
double erfcx(double x);

// Pairwise summation, independent of thread count.
double pairwise_sum(std::span<const double> values);

}  // namespace nanonmr
