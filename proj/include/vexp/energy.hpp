#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vexp/exponent_field.hpp"
#include "vexp/grid.hpp"
#include "vexp/problem.hpp"
#include "vexp/spaces.hpp"

namespace vexp {

/// Sign truncation of the nonlinearity: f^+ keeps f only for t >= 0, f^- only
/// for t <= 0 (the two auxiliary problems behind the signed solutions).
enum class Truncation { none, plus, minus };

/// Discrete energy
///   phi(u) = sum_cells vol (1/p_c)|grad u|^{p_c}
///          + sum_nodes w_i (V_i/p_i)|u_i|^{p_i} - sum_nodes w_i F(x_i, u_i)
/// and its exact partial derivatives in the interior nodal values.
/// Value and gradient are assembled from the identical discrete integrand.
class EnergyAssembly {
public:
    EnergyAssembly(const Grid& g, const ExponentField& field, const ProblemInstance& in)
        : grid_(&g), field_(&field), instance_(&in),
          cell_p_(cell_exponents(g, field.p)), V_(in.sample_V(g)) {
        for (std::size_t i = 0; i < V_.size(); ++i)
            if (!(V_[i] > 0.0))
                throw HypothesisViolation("hypothesis (V) fails: V <= 0 at node " + std::to_string(i));
    }

    const Grid& grid() const { return *grid_; }
    const ExponentField& field() const { return *field_; }
    const ProblemInstance& instance() const { return *instance_; }
    const GridFunction& potential() const { return V_; }
    std::size_t energy_evaluations() const { return energy_evals_; }
    std::size_t gradient_evaluations() const { return gradient_evals_; }

    double truncated_F(Point x, double t, Truncation tr) const {
        if (tr == Truncation::plus) return t > 0.0 ? instance_->F(x, t) : 0.0;
        if (tr == Truncation::minus) return t < 0.0 ? instance_->F(x, t) : 0.0;
        return instance_->F(x, t);
    }
    double truncated_f(Point x, double t, Truncation tr) const {
        if (tr == Truncation::plus) return t > 0.0 ? instance_->f(x, t) : 0.0;
        if (tr == Truncation::minus) return t < 0.0 ? instance_->f(x, t) : 0.0;
        return instance_->f(x, t);
    }

    double energy(const GridFunction& u, Truncation tr = Truncation::none) const {
        ++energy_evals_;
        const Grid& g = *grid_;
        const auto grads = cell_gradients(u);
        const double vol = g.cell_volume();
        double acc = 0.0;
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const double term = vol * std::pow(norm(grads[c]), cell_p_[c]) / cell_p_[c];
            if (!std::isfinite(term))
                throw EnergyOverflow("|grad u|^p overflow in cell " + std::to_string(c) +
                                     "; use a smaller amplitude or a finer grid");
            acc += term;
        }
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const Point x = g.node(i);
            const double w = g.node_weight(i);
            const double term = w * (V_[i] / field_->p[i]) * std::pow(std::abs(u[i]), field_->p[i]) -
                                w * truncated_F(x, u[i], tr);
            if (!std::isfinite(term))
                throw EnergyOverflow("zero-order overflow at node " + std::to_string(i) +
                                     "; use a smaller amplitude or a finer grid");
            acc += term;
        }
        return acc;
    }

    /// Exact derivative of energy() in the interior nodal values; boundary
    /// entries are zero. |grad u| is regularized as sqrt(|g|^2 + eps^2),
    /// eps = 1e-12, inside the gradient only (removes the p < 2 kink at 0).
    GridFunction gradient(const GridFunction& u, Truncation tr = Truncation::none) const {
        ++gradient_evals_;
        const Grid& g = *grid_;
        GridFunction out(g);
        const auto grads = cell_gradients(u);
        const double vol = g.cell_volume();
        const double h = g.spacing();
        constexpr double eps2 = 1e-24;
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const Point gc = grads[c];
            const double reg = std::sqrt(gc[0] * gc[0] + gc[1] * gc[1] + eps2);
            const double common = vol * std::pow(reg, cell_p_[c] - 2.0);
            if (!std::isfinite(common))
                throw EnergyOverflow("|grad u|^{p-2} overflow in cell " + std::to_string(c));
            const auto k = g.cell_corners(c);
            if (g.dim() == 1) {
                const double d = common * gc[0] / h;
                out[k[0]] -= d;
                out[k[1]] += d;
            } else {
                const double dx = common * gc[0] * 0.5 / h;
                const double dy = common * gc[1] * 0.5 / h;
                out[k[0]] += -dx - dy;
                out[k[1]] += dx - dy;
                out[k[2]] += -dx + dy;
                out[k[3]] += dx + dy;
            }
        }
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            const double w = g.node_weight(i);
            const double au = std::abs(u[i]);
            const double zero_order =
                au == 0.0 ? 0.0
                          : V_[i] * std::pow(au, field_->p[i] - 1.0) * (u[i] > 0.0 ? 1.0 : -1.0);
            out[i] += w * (zero_order - truncated_f(g.node(i), u[i], tr));
        }
        out.zero_boundary();
        return out;
    }

    /// Single interior component of gradient(); touches only the cells
    /// adjacent to node i, so pointwise relaxation sweeps stay O(1) per node.
    double gradient_component(const GridFunction& u, std::size_t i, Truncation tr) const {
        const Grid& g = *grid_;
        if (g.is_boundary(i)) return 0.0;
        const double h = g.spacing();
        constexpr double eps2 = 1e-24;
        double out = 0.0;
        auto cell_term = [&](std::size_t c) {
            const auto k = g.cell_corners(c);
            Point gc;
            if (g.dim() == 1) {
                gc = {(u[k[1]] - u[k[0]]) / h, 0.0};
            } else {
                gc = {0.5 * ((u[k[1]] + u[k[3]]) - (u[k[0]] + u[k[2]])) / h,
                      0.5 * ((u[k[2]] + u[k[3]]) - (u[k[0]] + u[k[1]])) / h};
            }
            const double reg = std::sqrt(gc[0] * gc[0] + gc[1] * gc[1] + eps2);
            const double common = g.cell_volume() * std::pow(reg, cell_p_[c] - 2.0);
            if (g.dim() == 1) {
                const double d = common * gc[0] / h;
                if (i == k[0]) out -= d;
                else out += d;
            } else {
                const double dx = common * gc[0] * 0.5 / h;
                const double dy = common * gc[1] * 0.5 / h;
                if (i == k[0]) out += -dx - dy;
                else if (i == k[1]) out += dx - dy;
                else if (i == k[2]) out += -dx + dy;
                else out += dx + dy;
            }
        };
        if (g.dim() == 1) {
            cell_term(i - 1);
            cell_term(i);
        } else {
            const std::size_t n = g.nodes_per_axis();
            const std::size_t m = n - 1;
            const std::size_t ix = i % n, iy = i / n;
            cell_term((iy - 1) * m + (ix - 1));
            cell_term((iy - 1) * m + ix);
            cell_term(iy * m + (ix - 1));
            cell_term(iy * m + ix);
        }
        const double w = g.node_weight(i);
        const double au = std::abs(u[i]);
        const double zero_order =
            au == 0.0 ? 0.0
                      : V_[i] * std::pow(au, field_->p[i] - 1.0) * (u[i] > 0.0 ? 1.0 : -1.0);
        out += w * (zero_order - truncated_f(g.node(i), u[i], tr));
        return out;
    }

    /// Duality bracket: plain interior dot product, the scaling under which
    /// pairing(gradient(u), v) is the directional derivative of energy at u.
    double pairing(const GridFunction& w, const GridFunction& v) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            if (!grid_->is_boundary(i)) acc += w[i] * v[i];
        return acc;
    }

    /// The derivative operator L of the quadratic-free part (f dropped).
    GridFunction operator_L(const GridFunction& u) const {
        GridFunction out = gradient(u, Truncation::none);
        const Grid& g = *grid_;
        for (std::size_t i = 0; i < g.node_count(); ++i)
            if (!g.is_boundary(i)) out[i] += g.node_weight(i) * instance_->f(g.node(i), u[i]);
        return out;
    }

    /// pairing(L(u) - L(v), u - v); strictly positive whenever u != v.
    double monotonicity_gap(const GridFunction& u, const GridFunction& v) const {
        const GridFunction lu = operator_L(u), lv = operator_L(v);
        return pairing(lu - lv, u - v);
    }

    double x_norm(const GridFunction& u) const { return vexp::x_norm(u, *field_, V_); }

private:
    const Grid* grid_;
    const ExponentField* field_;
    const ProblemInstance* instance_;
    std::vector<double> cell_p_;
    GridFunction V_;
    mutable std::size_t energy_evals_ = 0, gradient_evals_ = 0;
};

} // namespace vexp
