#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vexp/exponent_field.hpp"
#include "vexp/grid.hpp"

namespace vexp {

/// rho(u) = integral of |u|^{p(x)}, nodal quadrature.
inline double modular(const GridFunction& u, const std::vector<double>& exponent) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (exponent[i] < 1.0)
            throw HypothesisViolation("modular exponent < 1 at node " + std::to_string(i));
        acc += u.grid->node_weight(i) * std::pow(std::abs(u[i]), exponent[i]);
    }
    return acc;
}

namespace detail {

/// Solves m(lambda) = 1 for a continuous strictly decreasing modular map by
/// doubling bracket expansion and bisection, relative tolerance 1e-12.
template <typename Modular>
double luxemburg_root(const Modular& m, double hint) {
    double hi = std::max(hint, 1e-30);
    while (m(hi) > 1.0) hi *= 2.0;
    double lo = hi;
    while (m(lo) < 1.0) {
        lo *= 0.5;
        if (lo < 1e-300) return 0.0;
    }
    while ((hi - lo) > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        (m(mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Modular as a log-sum-exp: m(lambda) = sum c_j exp(q_j (logb_j - log lambda)).
/// log m is convex and strictly decreasing in log lambda, so Newton on log m
/// from the m > 1 side converges monotonically.
struct ModularTerms {
    std::vector<double> coef, expo, logb;

    void add(double c, double q, double base) {
        if (c <= 0.0 || base <= 0.0) return; // zero terms drop out
        coef.push_back(c);
        expo.push_back(q);
        logb.push_back(std::log(base));
    }

    /// (m, dm/d(log lambda)) at log lambda = l.
    std::pair<double, double> eval(double l) const {
        double m = 0.0, dm = 0.0;
        for (std::size_t j = 0; j < coef.size(); ++j) {
            const double term = coef[j] * std::exp(expo[j] * (logb[j] - l));
            m += term;
            dm -= expo[j] * term;
        }
        return {m, dm};
    }

    /// The lambda with m(lambda) = 1, relative tolerance 1e-12; 0 if empty.
    double root(double hint) const {
        if (coef.empty()) return 0.0;
        double l = std::log(std::max(hint, 1e-300));
        auto [m, dm] = eval(l);
        while (m < 1.0) { // walk down to the m > 1 side
            l -= 1.0;
            std::tie(m, dm) = eval(l);
            if (l < -720.0) return 0.0;
        }
        for (int it = 0; it < 200; ++it) {
            const double step = -std::log(m) * m / dm; // Newton on log m
            l += step;
            if (std::abs(step) < 1e-13) break;
            std::tie(m, dm) = eval(l);
        }
        return std::exp(l);
    }
};

} // namespace detail

/// Luxemburg norm: the unique lambda with modular(u/lambda) = 1 (0 for u = 0).
inline double luxemburg_norm(const GridFunction& u, const std::vector<double>& exponent) {
    if (u.max_abs() == 0.0) return 0.0;
    const double hint = std::max(1.0, u.max_abs() * u.grid->box_measure());
    detail::ModularTerms t;
    for (std::size_t i = 0; i < u.size(); ++i)
        t.add(u.grid->node_weight(i), exponent[i], std::abs(u[i]));
    return t.root(hint);
}

/// d|u|_{e(.)}/du by implicit differentiation of modular(u/lambda) = 1.
inline std::vector<double> luxemburg_gradient(const GridFunction& u,
                                              const std::vector<double>& exponent) {
    std::vector<double> g(u.size(), 0.0);
    const double lambda = luxemburg_norm(u, exponent);
    if (lambda == 0.0) return g;
    double denom = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = std::abs(u[i]) / lambda;
        denom += u.grid->node_weight(i) * exponent[i] * std::pow(v, exponent[i]);
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = std::abs(u[i]) / lambda;
        const double s = u[i] >= 0.0 ? 1.0 : -1.0;
        g[i] = u.grid->node_weight(i) * exponent[i] * std::pow(v, exponent[i] - 1.0) * s / denom;
    }
    return g;
}

/// Per-cell exponent: average of corner values (keeps the energy C^1).
inline std::vector<double> cell_exponents(const Grid& g, const std::vector<double>& p) {
    std::vector<double> pc(g.cell_count());
    const int corners = g.dim() == 1 ? 2 : 4;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const auto k = g.cell_corners(c);
        double s = 0.0;
        for (int j = 0; j < corners; ++j) s += p[k[j]];
        pc[c] = s / corners;
    }
    return pc;
}

/// Modular of the X-norm: cell quadrature of |grad u/lambda|^{p_c} plus
/// nodal quadrature of V |u/lambda|^{p}.
inline double combined_modular(const GridFunction& u, const ExponentField& f,
                               const GridFunction& V, double lambda) {
    const Grid& g = *u.grid;
    const auto grads = cell_gradients(u);
    const auto pc = cell_exponents(g, f.p);
    const double vol = g.cell_volume();
    double acc = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c)
        acc += vol * std::pow(norm(grads[c]) / lambda, pc[c]);
    for (std::size_t i = 0; i < g.node_count(); ++i)
        acc += g.node_weight(i) * V[i] * std::pow(std::abs(u[i]) / lambda, f.p[i]);
    return acc;
}

/// Norm on the working space X (gradient part on cells, potential part on nodes).
inline double x_norm(const GridFunction& u, const ExponentField& f, const GridFunction& V) {
    for (std::size_t i = 0; i < V.size(); ++i)
        if (!(V[i] > 0.0))
            throw HypothesisViolation("hypothesis (V) fails: V <= 0 at node " + std::to_string(i));
    if (u.max_abs() == 0.0) return 0.0;
    const double hint = std::max(1.0, u.max_abs() * u.grid->box_measure());
    const Grid& g = *u.grid;
    const auto grads = cell_gradients(u);
    const auto pc = cell_exponents(g, f.p);
    detail::ModularTerms t;
    for (std::size_t c = 0; c < g.cell_count(); ++c)
        t.add(g.cell_volume(), pc[c], norm(grads[c]));
    for (std::size_t i = 0; i < g.node_count(); ++i)
        t.add(g.node_weight(i) * V[i], f.p[i], std::abs(u[i]));
    return t.root(hint);
}

/// d‖u‖/du by implicit differentiation of the combined modular.
inline std::vector<double> x_norm_gradient(const GridFunction& u, const ExponentField& f,
                                           const GridFunction& V) {
    std::vector<double> g(u.size(), 0.0);
    const double lambda = x_norm(u, f, V);
    if (lambda == 0.0) return g;
    const Grid& gr = *u.grid;
    const auto grads = cell_gradients(u);
    const auto pc = cell_exponents(gr, f.p);
    const double vol = gr.cell_volume();
    const double h = gr.spacing();
    double denom = 0.0;
    for (std::size_t c = 0; c < gr.cell_count(); ++c)
        denom += vol * pc[c] * std::pow(norm(grads[c]) / lambda, pc[c]);
    for (std::size_t i = 0; i < gr.node_count(); ++i)
        denom += gr.node_weight(i) * V[i] * f.p[i] * std::pow(std::abs(u[i]) / lambda, f.p[i]);
    // Cell contributions: d|g_c|/du_corner chained through the difference stencil.
    for (std::size_t c = 0; c < gr.cell_count(); ++c) {
        const double gn = norm(grads[c]);
        if (gn == 0.0) continue;
        const double common = vol * pc[c] * std::pow(gn / lambda, pc[c] - 1.0) / lambda;
        const auto k = gr.cell_corners(c);
        if (gr.dim() == 1) {
            const double d = common * grads[c][0] / gn / h;
            g[k[0]] -= d;
            g[k[1]] += d;
        } else {
            const double dx = common * grads[c][0] / gn * 0.5 / h;
            const double dy = common * grads[c][1] / gn * 0.5 / h;
            g[k[0]] += -dx - dy;
            g[k[1]] += dx - dy;
            g[k[2]] += -dx + dy;
            g[k[3]] += dx + dy;
        }
    }
    for (std::size_t i = 0; i < gr.node_count(); ++i) {
        const double v = std::abs(u[i]) / lambda;
        const double s = u[i] >= 0.0 ? 1.0 : -1.0;
        g[i] += gr.node_weight(i) * V[i] * f.p[i] * std::pow(v, f.p[i] - 1.0) * s / lambda;
    }
    for (double& d : g) d *= lambda / denom;
    return g;
}

/// Conjugate exponents q with 1/p + 1/q = 1.
inline std::vector<double> conjugate_exponent(const std::vector<double>& p) {
    std::vector<double> q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 1.0))
            throw HypothesisViolation("conjugate exponent needs p > 1 at node " + std::to_string(i));
        q[i] = p[i] / (p[i] - 1.0);
    }
    return q;
}

/// (1/p^- + 1/q^-)|u|_p |v|_q - |integral uv|; nonnegative up to roundoff.
inline double holder_defect(const GridFunction& u, const GridFunction& v,
                            const std::vector<double>& p) {
    const auto q = conjugate_exponent(p);
    const double p_min = *std::min_element(p.begin(), p.end());
    const double q_min = *std::min_element(q.begin(), q.end());
    double uv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        uv += u.grid->node_weight(i) * u[i] * v[i];
    const double bound = (1.0 / p_min + 1.0 / q_min) * luxemburg_norm(u, p) * luxemburg_norm(v, q);
    return bound - std::abs(uv);
}

/// Discrete witness exponent s with ‖u‖^s = rho(u); p^- <= s <= p^+.
/// Undefined when the norm is 1 (the rho = 1 case carries the information).
inline std::optional<double> modular_norm_witness(const GridFunction& u,
                                                  const std::vector<double>& p) {
    const double nrm = luxemburg_norm(u, p);
    if (nrm == 0.0 || std::abs(nrm - 1.0) < 1e-12) return std::nullopt;
    return std::log(modular(u, p)) / std::log(nrm);
}

/// Sampled lower bound for the embedding constant sup |u|_alpha / ‖u‖.
/// Reported, not asserted; monotone nondecreasing in the trial count.
inline double embedding_constant(const ExponentField& f, const GridFunction& V,
                                 int trials, unsigned long long seed = 2024) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        GridFunction u(*f.grid);
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = f.grid->is_boundary(i) ? 0.0 : unif(rng);
        const double denom = x_norm(u, f, V);
        if (denom > 0.0) best = std::max(best, luxemburg_norm(u, f.alpha) / denom);
    }
    return best;
}

} // namespace vexp
