#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "vexp/errors.hpp"

namespace vexp {

/// Spatial point; the second coordinate is unused (0) in one dimension.
using Point = std::array<double, 2>;

inline double norm(const Point& x) { return std::hypot(x[0], x[1]); }
inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

/// Uniform tensor grid on an axis-aligned box, with trapezoid quadrature
/// weights on nodes and multilinear cells carrying the gradient.
class Grid {
public:
    /// Box [-R, R]^N.
    static Grid centered(int dim, double half_width, int nodes_per_axis) {
        return Grid(dim, -half_width, half_width, nodes_per_axis);
    }
    /// Box [lo, hi]^N.
    static Grid box(int dim, double lo, double hi, int nodes_per_axis) {
        return Grid(dim, lo, hi, nodes_per_axis);
    }

    int dim() const { return dim_; }
    int nodes_per_axis() const { return n_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double half_width() const { return 0.5 * (hi_ - lo_); }
    double spacing() const { return h_; }
    double box_measure() const { return std::pow(hi_ - lo_, dim_); }
    double cell_volume() const { return std::pow(h_, dim_); }

    std::size_t node_count() const { return nodes_; }
    std::size_t cell_count() const { return cells_; }
    std::size_t interior_count() const { return interior_; }

    Point node(std::size_t i) const {
        if (dim_ == 1) return {lo_ + h_ * static_cast<double>(i), 0.0};
        return {lo_ + h_ * static_cast<double>(i % n_),
                lo_ + h_ * static_cast<double>(i / n_)};
    }

    bool is_boundary(std::size_t i) const {
        if (dim_ == 1) return i == 0 || i + 1 == static_cast<std::size_t>(n_);
        const std::size_t ix = i % n_, iy = i / n_;
        return ix == 0 || ix + 1 == static_cast<std::size_t>(n_) ||
               iy == 0 || iy + 1 == static_cast<std::size_t>(n_);
    }

    /// Tensor-trapezoid weight: product of 1D weights (h/2 at the ends, h inside).
    double node_weight(std::size_t i) const {
        auto axis_w = [this](std::size_t k) {
            return (k == 0 || k + 1 == static_cast<std::size_t>(n_)) ? 0.5 * h_ : h_;
        };
        if (dim_ == 1) return axis_w(i);
        return axis_w(i % n_) * axis_w(i / n_);
    }

    /// Corner node indices of cell c; entries [2..3] unused in one dimension.
    std::array<std::size_t, 4> cell_corners(std::size_t c) const {
        if (dim_ == 1) return {c, c + 1, 0, 0};
        const std::size_t m = static_cast<std::size_t>(n_) - 1;
        const std::size_t ci = c % m, cj = c / m;
        const std::size_t base = cj * n_ + ci;
        return {base, base + 1, base + n_, base + n_ + 1};
    }

    Point cell_center(std::size_t c) const {
        const auto k = cell_corners(c);
        Point a = node(k[0]);
        if (dim_ == 1) return {a[0] + 0.5 * h_, 0.0};
        return {a[0] + 0.5 * h_, a[1] + 0.5 * h_};
    }

private:
    Grid(int dim, double lo, double hi, int n)
        : dim_(dim), n_(n), lo_(lo), hi_(hi) {
        if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
        if (n < 3) throw ConfigError("nodes-per-axis must be at least 3");
        if (!(hi > lo)) throw ConfigError("grid box must have positive extent");
        h_ = (hi - lo) / static_cast<double>(n - 1);
        nodes_ = dim == 1 ? static_cast<std::size_t>(n)
                          : static_cast<std::size_t>(n) * n;
        cells_ = dim == 1 ? static_cast<std::size_t>(n - 1)
                          : static_cast<std::size_t>(n - 1) * (n - 1);
        interior_ = 0;
        for (std::size_t i = 0; i < nodes_; ++i)
            if (!is_boundary(i)) ++interior_;
    }

    int dim_, n_;
    double lo_, hi_, h_;
    std::size_t nodes_, cells_, interior_;
};

/// One real value per node. Members of the discrete working space carry a
/// zero boundary trace; that is the caller's contract, not enforced here.
struct GridFunction {
    const Grid* grid = nullptr;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const Grid& g, double fill = 0.0)
        : grid(&g), values(g.node_count(), fill) {}

    static GridFunction sample(const Grid& g, const std::function<double(Point)>& fn) {
        GridFunction u(g);
        for (std::size_t i = 0; i < g.node_count(); ++i) u.values[i] = fn(g.node(i));
        return u;
    }

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    void zero_boundary() {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (grid->is_boundary(i)) values[i] = 0.0;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    GridFunction r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}
inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    GridFunction r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}
inline GridFunction operator*(double s, const GridFunction& a) {
    GridFunction r = a;
    for (double& v : r.values) v *= s;
    return r;
}

/// Nodal trapezoid quadrature; exact for functions constant on the box.
inline double integrate(const GridFunction& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(g[i]))
            throw IntegrationError("non-finite value at node " + std::to_string(i));
        acc += g.grid->node_weight(i) * g[i];
    }
    return acc;
}

/// Per-cell first differences of corner averages over h; exact for affine u.
inline std::vector<Point> cell_gradients(const GridFunction& u) {
    const Grid& g = *u.grid;
    std::vector<Point> out(g.cell_count());
    const double h = g.spacing();
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const auto k = g.cell_corners(c);
        if (g.dim() == 1) {
            out[c] = {(u[k[1]] - u[k[0]]) / h, 0.0};
        } else {
            out[c] = {0.5 * ((u[k[1]] + u[k[3]]) - (u[k[0]] + u[k[2]])) / h,
                      0.5 * ((u[k[2]] + u[k[3]]) - (u[k[0]] + u[k[1]])) / h};
        }
    }
    return out;
}

} // namespace vexp
