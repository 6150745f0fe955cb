#pragma once

// Derivative-free maximizers: Nelder-Mead simplex with seeded restarts for
// the likelihood fits, golden-section search for one-dimensional problems.

#include "uhedge/error.hpp"
#include "uhedge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace uhedge {

struct MaximizeOptions {
    double tolerance = 1e-6;     ///< simplex diameter (max-norm) at convergence
    int max_iterations = 10000;  ///< per simplex run
    int restarts = 3;
    std::uint64_t seed = 0;
    double initial_step = 0.1;
};

struct MaximizeResult {
    std::vector<double> argmax;
    double value = 0.0;
    long evaluations = 0;
};

namespace detail {

struct SimplexRun {
    std::vector<double> best;
    double best_cost = 0.0;  // minimized quantity, i.e. -objective
    long evaluations = 0;
};

/// Nelder-Mead minimization of `cost` (non-finite values act as +inf).
template <class Cost>
SimplexRun nelder_mead(Cost& cost, const std::vector<double>& start, double step, double tolerance,
                       int max_iterations) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> pts(n + 1, start);
    std::vector<double> vals(n + 1);
    long evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = cost(std::span<const double>(x));
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    auto diameter = [&](std::size_t best) {
        double d = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::abs(pts[i][j] - pts[best][j]));
        return d;
    };

    for (int iter = 0;; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t lo = order.front();
        const std::size_t hi = order.back();
        const std::size_t second = order[n - 1];
        if (diameter(lo) < tolerance) return {pts[lo], vals[lo], evals};
        if (iter >= max_iterations) throw Error("estimation", "optimizer iteration cap exceeded");

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != hi)
                for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j];
        for (double& c : centroid) c /= static_cast<double>(n);

        for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + (centroid[j] - pts[hi][j]);
        const double fr = eval(xr);
        if (fr < vals[lo]) {
            for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - pts[hi][j]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[hi] = xe;
                vals[hi] = fe;
            } else {
                pts[hi] = xr;
                vals[hi] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[hi] = xr;
            vals[hi] = fr;
            continue;
        }
        const bool outside = fr < vals[hi];
        for (std::size_t j = 0; j < n; ++j)
            xc[j] = outside ? centroid[j] + 0.5 * (xr[j] - centroid[j])
                            : centroid[j] + 0.5 * (pts[hi][j] - centroid[j]);
        const double fc = eval(xc);
        if (fc < (outside ? fr : vals[hi])) {
            pts[hi] = xc;
            vals[hi] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == lo) continue;
            for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[lo][j] + 0.5 * (pts[i][j] - pts[lo][j]);
            vals[i] = eval(pts[i]);
        }
    }
}

}  // namespace detail

/// Maximizes `objective` from `start`: one simplex run from the start, then
/// `restarts` further runs from seeded perturbations of the best point found.
/// Deterministic in (start, options).
template <class Objective>
MaximizeResult maximize(Objective&& objective, const std::vector<double>& start, const MaximizeOptions& options = {}) {
    const double f0 = objective(std::span<const double>(start));
    if (!std::isfinite(f0)) throw Error("estimation", "objective is not finite at the starting point");

    auto cost = [&](std::span<const double> x) { return -objective(x); };
    auto run = detail::nelder_mead(cost, start, options.initial_step, options.tolerance, options.max_iterations);
    long evaluations = run.evaluations + 1;

    Rng rng(options.seed);
    for (int r = 0; r < options.restarts; ++r) {
        std::vector<double> from = run.best;
        for (double& x : from) x += options.initial_step * rng.normal();
        auto next = detail::nelder_mead(cost, from, options.initial_step, options.tolerance, options.max_iterations);
        evaluations += next.evaluations;
        if (next.best_cost < run.best_cost) run = std::move(next);
    }
    if (!std::isfinite(run.best_cost)) throw Error("estimation", "optimizer found no finite objective value");
    return {std::move(run.best), -run.best_cost, evaluations};
}

/// Golden-section search for a maximum of a unimodal `f` on [lo, hi].
/// Stops once the bracket is narrower than `tolerance`.
template <class F>
double golden_section_maximize(F&& f, double lo, double hi, double tolerance = 1e-6) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tolerance) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace uhedge
