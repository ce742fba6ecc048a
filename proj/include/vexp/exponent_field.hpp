#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vexp/grid.hpp"

namespace vexp {

/// Per-node data for the variable exponent p(x) and its companions alpha(x)
/// (subcritical growth rate) and a(x) (logarithmic far-field rate), together
/// with the Sobolev conjugate p*(x) and the cached bounds p^-, p^+.
struct ExponentField {
    /// Stands in for p* = infinity where p(x) >= N.
    static constexpr double kPStarSentinel = 1e9;

    const Grid* grid = nullptr;
    std::vector<double> p;
    std::vector<Point> grad_p;
    std::vector<double> alpha;
    std::vector<double> a;
    std::vector<double> p_star;
    double p_min = 0.0, p_max = 0.0;

    static ExponentField build(const Grid& g,
                               const std::function<double(Point)>& p_fn,
                               const std::function<double(Point)>& alpha_fn,
                               const std::function<double(Point)>& a_fn,
                               const std::optional<std::function<Point(Point)>>& grad_p_fn = {},
                               double margin = 1e-9) {
        ExponentField f;
        f.grid = &g;
        const std::size_t n = g.node_count();
        f.p.resize(n);
        f.alpha.resize(n);
        f.a.resize(n);
        f.p_star.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Point x = g.node(i);
            f.p[i] = p_fn(x);
            f.alpha[i] = alpha_fn(x);
            f.a[i] = a_fn(x);
        }
        f.p_min = *std::min_element(f.p.begin(), f.p.end());
        f.p_max = *std::max_element(f.p.begin(), f.p.end());
        const double N = static_cast<double>(g.dim());
        for (std::size_t i = 0; i < n; ++i)
            f.p_star[i] = f.p[i] < N ? N * f.p[i] / (N - f.p[i]) : kPStarSentinel;
        f.grad_p = grad_p_fn ? analytic_gradient(g, *grad_p_fn)
                             : difference_gradient(g, f.p);
        f.validate(margin);
        return f;
    }

    /// Hypothesis checks: p^- > 1, p << alpha << p* (skipped at sentinel
    /// nodes), a >> p. Throws HypothesisViolation naming the first bad node.
    void validate(double margin) const {
        if (!(p_min > 1.0))
            throw HypothesisViolation("hypothesis (p) fails: min p = " + std::to_string(p_min));
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!(alpha[i] > p[i] + margin))
                throw HypothesisViolation("(H0) margin p << alpha fails at node " + std::to_string(i));
            if (p_star[i] < kPStarSentinel && !(alpha[i] < p_star[i] - margin))
                throw HypothesisViolation("(H0) margin alpha << p* fails at node " + std::to_string(i));
            if (!(a[i] > p[i] + margin))
                throw HypothesisViolation("(H1) margin a >> p fails at node " + std::to_string(i));
            if (!std::isfinite(grad_p[i][0]) || !std::isfinite(grad_p[i][1]))
                throw HypothesisViolation("(p) fails: non-finite grad p at node " + std::to_string(i));
        }
    }

    double alpha_min() const { return *std::min_element(alpha.begin(), alpha.end()); }
    double alpha_max() const { return *std::max_element(alpha.begin(), alpha.end()); }

private:
    static std::vector<Point> analytic_gradient(const Grid& g,
                                                const std::function<Point(Point)>& fn) {
        std::vector<Point> out(g.node_count());
        for (std::size_t i = 0; i < g.node_count(); ++i) out[i] = fn(g.node(i));
        return out;
    }

    /// Central differences inside, one-sided at the box faces.
    static std::vector<Point> difference_gradient(const Grid& g,
                                                  const std::vector<double>& v) {
        std::vector<Point> out(g.node_count(), Point{0.0, 0.0});
        const int n = g.nodes_per_axis();
        const double h = g.spacing();
        auto axis_diff = [&](std::size_t i, int k, std::ptrdiff_t stride) {
            if (k == 0) return (v[i + stride] - v[i]) / h;
            if (k == n - 1) return (v[i] - v[i - stride]) / h;
            return (v[i + stride] - v[i - stride]) / (2.0 * h);
        };
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            if (g.dim() == 1) {
                out[i] = {axis_diff(i, static_cast<int>(i), 1), 0.0};
            } else {
                const int ix = static_cast<int>(i % n), iy = static_cast<int>(i / n);
                out[i] = {axis_diff(i, ix, 1), axis_diff(i, iy, n)};
            }
        }
        return out;
    }
};

} // namespace vexp
