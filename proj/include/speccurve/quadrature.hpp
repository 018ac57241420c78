// Gauss-Legendre quadrature with adaptive node doubling, plus the
// substitutions used for integrals with square-root endpoint behavior.
#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "complex_util.hpp"

namespace speccurve {

struct GlRule {
    std::vector<double> nodes;   // on (-1, 1)
    std::vector<double> weights;
};

/// Nodes/weights of the n-point Gauss-Legendre rule (cached).
inline const GlRule& gauss_legendre(int n) {
    static std::map<int, GlRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GlRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

/// Integral of f over the real interval [a, b] with n Gauss-Legendre nodes.
template <class F>
cplx integrate_gl(F&& f, double a, double b, int n) {
    const GlRule& rule = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

struct AdaptiveResult {
    cplx value;
    double error;   // estimated from the last doubling
    int nodes;
};

/// Doubles the node count (starting at n0) until the relative change drops
/// below rel_tol. Stops early when the change plateaus (roundoff floor) or a
/// refinement goes non-finite; throws AccuracyError only when the final
/// estimate is far from converged.
template <class F>
AdaptiveResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                                  int n0 = 64, int n_max = 16384, double abs_floor = 1e-300) {
    auto finite = [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); };
    cplx prev = integrate_gl(f, a, b, n0);
    double prev_change = std::numeric_limits<double>::infinity();
    int plateau = 0;
    for (int n = 2 * n0; n <= n_max; n *= 2) {
        cplx cur = integrate_gl(f, a, b, n);
        if (!finite(cur)) {
            if (finite(prev)) return {prev, prev_change, n / 2};
            throw AccuracyError("integrate_adaptive: non-finite integrand", prev_change);
        }
        double change = std::abs(cur - prev);
        double scale = std::max(std::abs(cur), abs_floor);
        if (change <= rel_tol * scale) return {cur, change, n};
        plateau = (change > 0.5 * prev_change) ? plateau + 1 : 0;
        if (plateau >= 2 && change <= 1e4 * rel_tol * scale) return {cur, change, n};
        prev = cur;
        prev_change = change;
    }
    if (finite(prev) && prev_change <= 100.0 * rel_tol * std::max(std::abs(prev), abs_floor))
        return {prev, prev_change, n_max};
    throw AccuracyError("integrate_adaptive: no convergence, achieved " + std::to_string(prev_change),
                        prev_change);
}

/// Integral of g(z) dz along the straight segment from a to b.
template <class F>
AdaptiveResult integrate_segment(F&& g, cplx a, cplx b, double rel_tol = 1e-10,
                                 int n0 = 64, int n_max = 16384) {
    cplx dir = b - a;
    return integrate_adaptive([&](double t) { return g(a + t * dir) * dir; }, 0.0, 1.0,
                              rel_tol, n0, n_max);
}

/// Integral of g(z) dz from z0 to z1 where g may behave like (z-z0)^{±1/2}
/// near z0, using the z = z0 + (z1-z0) t^2 substitution. Gauss nodes never
/// touch t = 0, and the Jacobian factor t regularizes an inverse square root.
template <class F>
AdaptiveResult integrate_from_sqrt_endpoint(F&& g, cplx z0, cplx z1, double rel_tol = 1e-10,
                                            int n0 = 64, int n_max = 16384) {
    cplx d = z1 - z0;
    return integrate_adaptive([&](double t) { return g(z0 + d * t * t) * 2.0 * t * d; },
                              0.0, 1.0, rel_tol, n0, n_max);
}

} // namespace speccurve
