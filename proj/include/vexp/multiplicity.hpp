#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "vexp/energy.hpp"
#include "vexp/grid.hpp"
#include "vexp/mountain_pass.hpp"
#include "vexp/spaces.hpp"

namespace vexp {

// ---------------------------------------------------------------------------
// Discrete eigenbasis and tail subspaces
// ---------------------------------------------------------------------------

/// Eigenvectors of the constant-exponent discrete Dirichlet Laplacian on the
/// interior nodes, ascending eigenvalue. Y_k = span{e_1..e_k},
/// Z_k = span{e_k..e_m}.
struct DiscreteBasis {
    const Grid* grid = nullptr;
    std::vector<GridFunction> vectors; // one per interior mode
    std::vector<double> eigenvalues;   // ascending

    std::size_t size() const { return vectors.size(); }

    static DiscreteBasis build(const Grid& g) {
        DiscreteBasis b;
        b.grid = &g;
        const int n = g.nodes_per_axis();
        const int m = n - 2; // interior modes per axis
        const double h = g.spacing();
        auto lam1d = [&](int k) {
            const double s = std::sin(0.5 * k * M_PI / (n - 1));
            return 4.0 * s * s / (h * h);
        };
        auto mode1d = [&](int k, int i) { return std::sin(k * M_PI * i / double(n - 1)); };
        struct Entry { double lam; int kx, ky; };
        std::vector<Entry> entries;
        if (g.dim() == 1) {
            for (int k = 1; k <= m; ++k) entries.push_back({lam1d(k), k, 0});
        } else {
            for (int kx = 1; kx <= m; ++kx)
                for (int ky = 1; ky <= m; ++ky)
                    entries.push_back({lam1d(kx) + lam1d(ky), kx, ky});
        }
        std::stable_sort(entries.begin(), entries.end(),
                         [](const Entry& a, const Entry& b) { return a.lam < b.lam; });
        for (const Entry& e : entries) {
            GridFunction v(g);
            double nrm2 = 0.0;
            for (std::size_t i = 0; i < g.node_count(); ++i) {
                if (g.is_boundary(i)) continue;
                const int ix = static_cast<int>(i % n);
                const int iy = static_cast<int>(i / n);
                v[i] = g.dim() == 1 ? mode1d(e.kx, ix) : mode1d(e.kx, ix) * mode1d(e.ky, iy);
                nrm2 += v[i] * v[i];
            }
            const double s = 1.0 / std::sqrt(nrm2);
            for (std::size_t i = 0; i < g.node_count(); ++i) v[i] *= s;
            b.vectors.push_back(std::move(v));
            b.eigenvalues.push_back(e.lam);
        }
        return b;
    }

    /// u(c) = sum_j c_j e_{k-1+j} for the tail Z_k (1-based k).
    GridFunction combine(std::size_t k, const std::vector<double>& c) const {
        GridFunction u(*grid);
        for (std::size_t j = 0; j < c.size(); ++j) {
            const GridFunction& e = vectors[k - 1 + j];
            for (std::size_t i = 0; i < u.size(); ++i) u[i] += c[j] * e[i];
        }
        return u;
    }
};

// ---------------------------------------------------------------------------
// beta_k: sup of |u|_alpha over the unit sphere of Z_k
// ---------------------------------------------------------------------------

namespace detail {

/// Minimal field carrying only what the norm machinery reads (p, alpha).
inline ExponentField norm_field(const Grid& g, const std::vector<double>& p,
                                const std::vector<double>& alpha) {
    ExponentField f;
    f.grid = &g;
    f.p = p;
    f.alpha = alpha;
    f.p_min = *std::min_element(p.begin(), p.end());
    f.p_max = *std::max_element(p.begin(), p.end());
    return f;
}

/// Ratio psi(c) = |u(c)|_alpha / ‖u(c)‖ and its coefficient gradient.
struct RatioAscent {
    const DiscreteBasis* basis;
    std::size_t k;
    const ExponentField* field;
    const GridFunction* V;

    double value(const std::vector<double>& c) const {
        const GridFunction u = basis->combine(k, c);
        const double denom = x_norm(u, *field, *V);
        return denom > 0.0 ? luxemburg_norm(u, field->alpha) / denom : 0.0;
    }

    std::vector<double> gradient(const std::vector<double>& c) const {
        const GridFunction u = basis->combine(k, c);
        const double nx = x_norm(u, *field, *V);
        const double na = luxemburg_norm(u, field->alpha);
        const auto ga = luxemburg_gradient(u, field->alpha);
        const auto gx = x_norm_gradient(u, *field, *V);
        std::vector<double> g(c.size(), 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) {
            const GridFunction& e = basis->vectors[k - 1 + j];
            double da = 0.0, dx = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                da += ga[i] * e[i];
                dx += gx[i] * e[i];
            }
            g[j] = (da * nx - na * dx) / (nx * nx);
        }
        return g;
    }
};

inline void normalize_coeffs(std::vector<double>& c) {
    double n2 = 0.0;
    for (double v : c) n2 += v * v;
    if (n2 > 0.0) for (double& v : c) v /= std::sqrt(n2);
}

/// Scale-invariant ascent with adaptive step; returns the best value seen.
inline double ascend(const RatioAscent& fn, std::vector<double> c, int max_iters = 400) {
    normalize_coeffs(c);
    double val = fn.value(c);
    double step = 0.5;
    for (int it = 0; it < max_iters; ++it) {
        const auto g = fn.gradient(c);
        double gn2 = 0.0;
        for (double v : g) gn2 += v * v;
        if (gn2 < 1e-28) break;
        bool improved = false;
        for (int b = 0; b < 30; ++b) {
            std::vector<double> trial = c;
            for (std::size_t j = 0; j < c.size(); ++j) trial[j] += step * g[j];
            normalize_coeffs(trial);
            const double tv = fn.value(trial);
            if (tv > val) {
                c = std::move(trial);
                val = tv;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved || step < 1e-16) break;
    }
    return val;
}

} // namespace detail

/// beta_k = sup { |u|_alpha : u in Z_k, ‖u‖ = 1 } by projected gradient
/// ascent over the tail coefficients, seeded with e_k and `restarts` random
/// starts. Deterministic seeds per (k, restart).
inline double beta_k(const DiscreteBasis& basis, std::size_t k, const std::vector<double>& p,
                     const GridFunction& V, const std::vector<double>& alpha, int restarts = 4) {
    const std::size_t m = basis.size();
    if (k < 1 || k > m) throw std::domain_error("beta_k: k out of range 1..n");
    const ExponentField f = detail::norm_field(*basis.grid, p, alpha);
    detail::RatioAscent fn{&basis, k, &f, &V};
    const std::size_t dim = m - k + 1;

    double best = 0.0;
    {
        std::vector<double> c(dim, 0.0); // seed at the leading tail mode e_k
        c[0] = 1.0;
        best = std::max(best, detail::ascend(fn, std::move(c)));
    }
    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(0x9E3779B97F4A7C15ull * (k + 1) + r);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::vector<double> c(dim);
        for (double& v : c) v = unif(rng);
        best = std::max(best, detail::ascend(fn, std::move(c)));
    }
    return best;
}

/// All beta_k for k = n..1, each seeded with the previous tail's maximizer
/// by inclusion Z_{k+1} ⊂ Z_k, so the sequence is non-increasing by
/// construction (each feasible point of Z_{k+1} is feasible for Z_k).
inline std::vector<double> beta_sequence(const DiscreteBasis& basis, const std::vector<double>& p,
                                         const GridFunction& V, const std::vector<double>& alpha,
                                         int restarts = 4) {
    const std::size_t m = basis.size();
    std::vector<double> beta(m, 0.0);
    for (std::size_t k = m; k >= 1; --k) {
        double b = beta_k(basis, k, p, V, alpha, restarts);
        if (k < m) b = std::max(b, beta[k]); // Z_{k+1} ⊂ Z_k
        beta[k - 1] = b;
    }
    return beta;
}

// ---------------------------------------------------------------------------
// Disjoint-support cone families
// ---------------------------------------------------------------------------

struct ConeFamily {
    std::vector<ConeTestFunction> cones;

    std::size_t size() const { return cones.size(); }

    /// Exhaustive support-overlap scan: no node carries two nonzero cones.
    bool supports_disjoint() const {
        for (std::size_t a = 0; a < cones.size(); ++a)
            for (std::size_t b = a + 1; b < cones.size(); ++b)
                for (std::size_t i = 0; i < cones[a].values.size(); ++i)
                    if (cones[a].values[i] != 0.0 && cones[b].values[i] != 0.0) return false;
        return true;
    }

    GridFunction combine(const std::vector<double>& c) const {
        GridFunction u(*cones.front().values.grid);
        for (std::size_t j = 0; j < cones.size(); ++j)
            for (std::size_t i = 0; i < u.size(); ++i) u[i] += c[j] * cones[j].values[i];
        return u;
    }
};

/// Packs k cones along the first axis with a one-cell gap between supports
/// (keeps the energy exactly additive over the family). Minimal radius is
/// three cells.
inline ConeFamily build_cone_family(const Grid& g, int k) {
    if (k < 1) throw ConfigError("cone family size must be positive");
    const double h = g.spacing();
    const double eps_min = 3.0 * h;
    const double usable = (g.hi() - g.lo()) - 2.0 * h; // stay off the boundary
    const double gap = 2.0 * h;
    const int max_k = static_cast<int>(std::floor((usable + gap) / (2.0 * eps_min + gap)));
    if (k > max_k)
        throw CapacityError("grid fits at most " + std::to_string(max_k) +
                                " disjoint cones of minimal radius",
                            max_k);
    double eps = (usable - (k - 1) * gap) / (2.0 * k);
    if (g.dim() == 2) eps = std::min(eps, g.half_width() - h); // fit in the second axis too
    eps = std::max(eps, eps_min);
    ConeFamily fam;
    const double x_start = g.lo() + h + eps;
    for (int j = 0; j < k; ++j) {
        const Point x0 = {x_start + j * (2.0 * eps + gap), 0.0};
        fam.cones.push_back(ConeTestFunction::build(g, x0, eps));
    }
    if (!fam.supports_disjoint())
        throw CapacityError("cone placement produced overlapping supports", k - 1);
    return fam;
}

// ---------------------------------------------------------------------------
// Geometric conditions (A1)/(A2)
// ---------------------------------------------------------------------------

struct A2Report {
    bool certified = false;
    double rho = 0.0;     // smallest certifying sphere radius
    double max_phi = 0.0; // sampled max at the certifying radius
    std::string detail = "sample-based certificate (heuristic)";
};

/// Samples the sphere ‖u‖ = rho in span(family) and certifies
/// a_k = max phi <= 0 at the smallest rho in the grid where every sampled
/// phi is <= 0.
inline A2Report verify_A2(const EnergyAssembly& assembly, const ConeFamily& family,
                          const std::vector<double>& rho_grid, int samples,
                          Truncation tr = Truncation::none, unsigned long long seed = 7) {
    A2Report rep;
    for (double rho : rho_grid) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        double worst = -std::numeric_limits<double>::infinity();
        bool all_nonpositive = true;
        for (int s = 0; s < samples && all_nonpositive; ++s) {
            std::vector<double> c(family.size());
            for (double& v : c) v = unif(rng);
            GridFunction u = family.combine(c);
            const double nu = assembly.x_norm(u);
            if (nu == 0.0) continue;
            u = (rho / nu) * u;
            double phi;
            try {
                phi = assembly.energy(u, tr);
            } catch (const EnergyOverflow&) {
                all_nonpositive = false;
                break;
            }
            worst = std::max(worst, phi);
            if (phi > 0.0) all_nonpositive = false;
        }
        if (all_nonpositive) {
            rep.certified = true;
            rep.rho = rho;
            rep.max_phi = worst;
            return rep;
        }
    }
    rep.detail = "no rho in the grid gave all sampled phi <= 0";
    return rep;
}

struct A1Row {
    std::size_t k = 0;
    double beta = 0.0;
    double gamma = 0.0;
    double sampled_min = 0.0;
    std::size_t dim_v_minus = 0;   // span{h_1..h_k}
    std::size_t codim_v_plus = 0;  // Z_k
    bool index_mismatch = false;   // codim V+ + 1 != dim V-
};

struct A1Report {
    bool applicable = true;
    bool trend_increasing = false;
    double sigma = 0.0;
    double c_sigma = 0.0;
    std::vector<A1Row> rows;
    std::string detail = "sample-based trend proxy (heuristic)";
};

namespace detail {

/// Smallest C with F(x,t) <= sigma |t|^p + C |t|^alpha over sampled (x, t).
inline double fit_c_sigma(const EnergyAssembly& assembly, double sigma) {
    const ProblemInstance& in = assembly.instance();
    double c = 0.0;
    for (const Point& x : detail::x_samples(assembly.grid(), 9)) {
        for (double t : detail::geometric_ts(1e-3, 1e3, 4)) {
            const double at = std::abs(t);
            const double excess = in.F(x, t) - sigma * std::pow(at, in.p(x));
            if (excess > 0.0) c = std::max(c, excess / std::pow(at, in.alpha(x)));
        }
    }
    return c;
}

} // namespace detail

/// Desk-scale proxy for (A1): gamma_k = (2 C(sigma) alpha+ beta_k^{alpha+})
/// ^{1/(p- − alpha+)}, sampled min of phi on the gamma_k-sphere of Z_k, trend
/// "increasing in k" certified over the k-grid. Inapplicable when
/// alpha+ <= p- (the exponent would change sign).
inline A1Report verify_A1_proxy(const DiscreteBasis& basis, const EnergyAssembly& assembly,
                                const std::vector<std::size_t>& k_grid, int samples = 64,
                                Truncation tr = Truncation::none, unsigned long long seed = 11,
                                int restarts = 2) {
    const ExponentField& f = assembly.field();
    A1Report rep;
    const double alpha_plus = f.alpha_max();
    if (!(alpha_plus > f.p_min)) {
        rep.applicable = false;
        rep.detail = "alpha+ <= p-: the gamma_k exponent 1/(p- − alpha+) changes sign";
        return rep;
    }
    double v0 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < assembly.potential().size(); ++i)
        v0 = std::min(v0, assembly.potential()[i]);
    rep.sigma = v0 / 8.0;
    rep.c_sigma = detail::fit_c_sigma(assembly, rep.sigma);

    for (std::size_t k : k_grid) {
        A1Row row;
        row.k = k;
        row.beta = beta_k(basis, k, f.p, assembly.potential(), f.alpha, restarts);
        row.gamma = std::pow(2.0 * rep.c_sigma * alpha_plus * std::pow(row.beta, alpha_plus),
                             1.0 / (f.p_min - alpha_plus));
        row.dim_v_minus = k;
        row.codim_v_plus = k - 1;
        row.index_mismatch = row.codim_v_plus + 1 != row.dim_v_minus;
        std::mt19937_64 rng(seed * (k + 1));
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        double min_phi = std::numeric_limits<double>::infinity();
        const std::size_t dim = basis.size() - k + 1;
        for (int s = 0; s < samples; ++s) {
            std::vector<double> c(dim);
            for (double& v : c) v = unif(rng);
            GridFunction u = basis.combine(k, c);
            const double nu = assembly.x_norm(u);
            if (nu == 0.0) continue;
            u = (row.gamma / nu) * u;
            try {
                min_phi = std::min(min_phi, assembly.energy(u, tr));
            } catch (const EnergyOverflow&) {
                // an overflowing sample cannot be the minimum candidate we track
            }
        }
        row.sampled_min = min_phi;
        rep.rows.push_back(row);
    }
    rep.trend_increasing = rep.rows.size() >= 2;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].sampled_min > rep.rows[i - 1].sampled_min)) rep.trend_increasing = false;
    return rep;
}

} // namespace vexp
