#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vexp/exponent_field.hpp"
#include "vexp/grid.hpp"

namespace vexp {

using SpatialFn = std::function<double(Point)>;
using NonlinearityFn = std::function<double(Point, double)>;

// ---------------------------------------------------------------------------
// Quadrature for the primitive F(x,t) = integral_0^t f(x,s) ds
// ---------------------------------------------------------------------------

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole,
                                   double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature with absolute tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10, int max_depth = 40) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = detail::simpson(f, a, b, fa, fm, fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

namespace detail {

/// Deterministic composite Simpson (8 panels); used for the short partial
/// segment from the nearest cached knot so that F stays smooth in t.
inline double composite_simpson(const std::function<double(double)>& f, double a, double b) {
    constexpr int panels = 8;
    const double h = (b - a) / (2 * panels);
    double acc = f(a) + f(b);
    for (int i = 1; i < 2 * panels; ++i)
        acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// Lazily extended cumulative table of integral_0^{knot(k)} f(x,s) ds for one
/// spatial point: uniform knots on [0,1], geometric beyond. Positive and
/// negative t sides are kept separately.
struct PrimitiveTable {
    static constexpr double kDt = 1.0 / 64.0;
    static constexpr double kRatio = 1.03125;

    std::vector<double> pos{0.0}, neg{0.0};

    static double knot(std::size_t k) {
        if (k <= 64) return static_cast<double>(k) * kDt;
        return std::pow(kRatio, static_cast<double>(k - 64));
    }
    static std::size_t knot_below(double t) {
        if (t <= 1.0) return static_cast<std::size_t>(t / kDt);
        return 64 + static_cast<std::size_t>(std::log(t) / std::log(kRatio));
    }

    double eval(const std::function<double(double)>& f, double t) {
        const double at = std::abs(t);
        const std::size_t m = knot_below(at);
        auto& cum = t >= 0.0 ? pos : neg;
        const double sign = t >= 0.0 ? 1.0 : -1.0;
        while (cum.size() <= m) {
            const std::size_t k = cum.size();
            const double a = sign * knot(k - 1), b = sign * knot(k);
            // tolerance relative to the segment scale, else large-t segments
            // (|integrand| >> 1) recurse to full depth
            const double scale = std::abs(f(0.5 * (a + b)) * (b - a));
            cum.push_back(cum.back() + adaptive_simpson(f, a, b, 1e-12 * std::max(1.0, scale)));
        }
        return cum[m] + composite_simpson(f, sign * knot(m), t);
    }
};

struct PointKey {
    std::uint64_t a, b;
    bool operator==(const PointKey& o) const { return a == o.a && b == o.b; }
};
struct PointKeyHash {
    std::size_t operator()(const PointKey& k) const {
        return std::hash<std::uint64_t>()(k.a * 0x9e3779b97f4a7c15ull ^ k.b);
    }
};

} // namespace detail

/// Wraps f into its primitive via cached adaptive-Simpson cumulative tables
/// keyed by the spatial point (grid nodes repeat, so the cache is effective).
inline NonlinearityFn make_quadrature_primitive(NonlinearityFn f) {
    auto cache = std::make_shared<
        std::unordered_map<detail::PointKey, detail::PrimitiveTable, detail::PointKeyHash>>();
    return [f = std::move(f), cache](Point x, double t) {
        detail::PointKey key{};
        std::memcpy(&key.a, &x[0], sizeof(double));
        std::memcpy(&key.b, &x[1], sizeof(double));
        auto& table = (*cache)[key];
        return table.eval([&](double s) { return f(x, s); }, t);
    };
}

// ---------------------------------------------------------------------------
// Problem instances
// ---------------------------------------------------------------------------

struct HypothesisFlags {
    bool v = false, h0 = false, h1 = false, h2 = false, h3 = false;
};

/// One concrete problem: exponent data, potential, nonlinearity and primitive.
struct ProblemInstance {
    std::string name;
    SpatialFn p, alpha, a, V;
    std::optional<std::function<Point(Point)>> grad_p;
    NonlinearityFn f;
    NonlinearityFn F;
    bool closed_form_F = false;
    HypothesisFlags certified;

    ExponentField make_field(const Grid& g) const {
        return ExponentField::build(g, p, alpha, a, grad_p);
    }
    GridFunction sample_V(const Grid& g) const { return GridFunction::sample(g, V); }
};

/// Remark-style flagship instance: f = |t|^{p(x)-2} t [ln(1+|t|)]^{a(x)},
/// p = 2 + 1/2/(1+|x|^2) + 0.1 x_1 exp(-|x|^2), a = p + 1, alpha = p + 1/2,
/// V = 1 + |x|^2. Superlinear through a log factor only, so no AR constant.
inline ProblemInstance make_paper_example() {
    ProblemInstance in;
    in.name = "paper-example";
    auto r2 = [](Point x) { return x[0] * x[0] + x[1] * x[1]; };
    in.p = [r2](Point x) {
        return 2.0 + 0.5 / (1.0 + r2(x)) + 0.1 * x[0] * std::exp(-r2(x));
    };
    in.grad_p = [r2](Point x) -> Point {
        const double q = 1.0 + r2(x);
        const double e = std::exp(-r2(x));
        return {-x[0] / (q * q) + 0.1 * e * (1.0 - 2.0 * x[0] * x[0]),
                -x[1] / (q * q) - 0.2 * x[0] * x[1] * e};
    };
    in.alpha = [p = in.p](Point x) { return p(x) + 0.5; };
    in.a = [p = in.p](Point x) { return p(x) + 1.0; };
    in.V = [r2](Point x) { return 1.0 + r2(x); };
    in.f = [p = in.p, a = in.a](Point x, double t) {
        if (t == 0.0) return 0.0;
        const double at = std::abs(t);
        return std::pow(at, p(x) - 2.0) * t * std::pow(std::log1p(at), a(x));
    };
    in.F = make_quadrature_primitive(in.f);
    in.closed_form_F = false;
    return in;
}

/// p = 2, V = 1, f = t^3: the sech-soliton regression instance.
inline ProblemInstance make_cubic_constant_exponent() {
    ProblemInstance in;
    in.name = "cubic-constant-exponent";
    in.p = [](Point) { return 2.0; };
    in.grad_p = [](Point) -> Point { return {0.0, 0.0}; };
    in.alpha = [](Point) { return 4.0; };
    in.a = [](Point) { return 3.0; };
    in.V = [](Point) { return 1.0; };
    in.f = [](Point, double t) { return t * t * t; };
    in.F = [](Point, double t) { return 0.25 * t * t * t * t; };
    in.closed_form_F = true;
    return in;
}

/// f = |t|^{p(x)-2} t: the (H1)/AR counterexample (tf - pF vanishes).
inline ProblemInstance make_pure_power() {
    ProblemInstance in = make_paper_example();
    in.name = "pure-power";
    in.f = [p = in.p](Point x, double t) {
        if (t == 0.0) return 0.0;
        return std::pow(std::abs(t), p(x) - 2.0) * t;
    };
    in.F = [p = in.p](Point x, double t) {
        return std::pow(std::abs(t), p(x)) / p(x);
    };
    in.closed_form_F = true;
    return in;
}

inline ProblemInstance instance_by_name(const std::string& name) {
    if (name == "paper-example") return make_paper_example();
    if (name == "cubic-constant-exponent") return make_cubic_constant_exponent();
    if (name == "pure-power") return make_pure_power();
    throw ConfigError("unknown instance: " + name);
}

// ---------------------------------------------------------------------------
// Hypothesis certification on finite sample sets
// ---------------------------------------------------------------------------

/// Sample-based verdict. "certified" always means certified-on-samples;
/// the hypotheses quantify over all of R^N x R and cannot be proved here.
struct HypothesisReport {
    std::string name;
    bool certified = false;
    bool inconclusive = false;
    std::map<std::string, double> constants;
    std::optional<std::pair<Point, double>> witness; // (x, t); t carries the radius for (V)
    std::string detail;
};

namespace detail {

inline std::vector<Point> x_samples(const Grid& g, std::size_t target = 25) {
    std::vector<Point> xs;
    const std::size_t stride = std::max<std::size_t>(1, g.node_count() / target);
    for (std::size_t i = 0; i < g.node_count(); i += stride) xs.push_back(g.node(i));
    return xs;
}

inline std::vector<double> geometric_ts(double lo, double hi, int per_decade) {
    std::vector<double> ts;
    const double step = std::pow(10.0, 1.0 / per_decade);
    for (double t = lo; t <= hi * (1.0 + 1e-12); t *= step) {
        ts.push_back(t);
        ts.push_back(-t);
    }
    return ts;
}

} // namespace detail

/// (V): positive essential infimum and growth at infinity, probed along rays
/// at radii R0 2^k, k <= 6.
inline HypothesisReport check_V(const ProblemInstance& in, const Grid& g, double R0 = -1.0) {
    HypothesisReport r{.name = "V"};
    if (R0 <= 0.0) R0 = g.half_width();
    double v0 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const double v = in.V(g.node(i));
        if (!std::isfinite(v)) throw IntegrationError("non-finite V at a grid node");
        if (v < v0) {
            v0 = v;
            if (!(v0 > 0.0)) r.witness = {g.node(i), 0.0};
        }
    }
    std::vector<Point> dirs = {{1, 0}, {-1, 0}};
    if (g.dim() == 2)
        dirs.insert(dirs.end(), {{0, 1}, {0, -1}, {std::sqrt(0.5), std::sqrt(0.5)},
                                 {-std::sqrt(0.5), std::sqrt(0.5)}, {std::sqrt(0.5), -std::sqrt(0.5)},
                                 {-std::sqrt(0.5), -std::sqrt(0.5)}});
    bool grows = true;
    for (const Point& d : dirs) {
        double prev = -std::numeric_limits<double>::infinity(), first = 0.0, last = 0.0;
        for (int k = 0; k <= 6; ++k) {
            const double rad = R0 * std::pow(2.0, k);
            const Point x = {rad * d[0], rad * d[1]};
            const double v = in.V(x);
            if (!std::isfinite(v)) throw IntegrationError("non-finite V along a ray");
            v0 = std::min(v0, v);
            if (k == 0) first = v;
            last = v;
            if (v < prev) grows = false;
            prev = v;
        }
        if (!(last >= 2.0 * first)) { // no detectable growth along this ray
            grows = false;
            if (!r.witness) r.witness = {Point{R0 * 64.0 * d[0], R0 * 64.0 * d[1]}, R0 * 64.0};
        }
    }
    r.constants["V0"] = v0;
    r.certified = v0 > 0.0 && grows;
    if (r.certified) r.witness.reset();
    r.detail = r.certified ? "certified-on-samples" : "violated";
    return r;
}

/// (H0): subcritical growth |f| <= C(|t|^{p-1} + |t|^{alpha-1}); the fitted C
/// must stay stable (< 5% growth) when the sample range and density double.
inline HypothesisReport check_H0(const ProblemInstance& in, const Grid& g,
                                 double t_max = 1e3, int per_decade = 12) {
    HypothesisReport r{.name = "H0"};
    const auto xs = detail::x_samples(g);
    auto fit = [&](double tmax, int density) -> std::pair<double, std::optional<std::pair<Point, double>>> {
        double best = 0.0;
        for (const Point& x : xs) {
            const double p = in.p(x), al = in.alpha(x);
            for (double t : detail::geometric_ts(1e-2, tmax, density)) {
                const double fv = in.f(x, t);
                if (!std::isfinite(fv)) return {std::numeric_limits<double>::infinity(), {{x, t}}};
                const double at = std::abs(t);
                const double ratio = std::abs(fv) / (std::pow(at, p - 1.0) + std::pow(at, al - 1.0));
                best = std::max(best, ratio);
            }
        }
        return {best, std::nullopt};
    };
    auto [c_base, w1] = fit(t_max, per_decade);
    auto [c_fine, w2] = fit(2.0 * t_max, 2 * per_decade);
    if (w1 || w2) {
        r.certified = false;
        r.witness = w1 ? w1 : w2;
        r.detail = "violated: f non-finite on samples";
        return r;
    }
    r.constants["C"] = c_fine;
    if (std::isfinite(c_fine) && c_fine <= 1.05 * std::max(c_base, 1e-300)) {
        r.certified = true;
        r.detail = "certified-on-samples";
    } else if (c_base == 0.0 && c_fine == 0.0) {
        r.certified = true; // f identically zero on samples
        r.constants["C"] = 0.0;
        r.detail = "certified-on-samples";
    } else {
        r.certified = false;
        r.detail = "violated: fitted C grows on refinement";
        r.witness = {xs.front(), 2.0 * t_max};
    }
    return r;
}

/// (H1): chained far-field inequality
/// C1 |t|^p [ln(e+|t|)]^{a-1} <= C2 t f / ln(e+|t|) <= t f - p F for |t| >= M.
/// Fits C2 = inf g3/g2 and C1 = inf (C2 g2)/g1 over a geometric t-grid; the
/// smallest certifying M in {1, 5, 10, 50} is reported.
inline HypothesisReport check_H1(const ProblemInstance& in, const Grid& g,
                                 double t_max = 1e6) {
    HypothesisReport r{.name = "H1"};
    const auto xs = detail::x_samples(g);
    constexpr double kPositive = 1e-8;
    for (double M : {1.0, 5.0, 10.0, 50.0}) {
        double c2 = std::numeric_limits<double>::infinity();
        double c1_den = std::numeric_limits<double>::infinity(); // inf g2/g1
        std::optional<std::pair<Point, double>> witness;
        bool ok = true;
        for (const Point& x : xs) {
            const double p = in.p(x), a = in.a(x);
            for (double t : detail::geometric_ts(M, t_max, 6)) {
                const double at = std::abs(t);
                const double lg = std::log(std::exp(1.0) + at);
                const double tf = t * in.f(x, t);
                const double g1 = std::pow(at, p) * std::pow(lg, a - 1.0);
                const double g2 = tf / lg;
                const double g3 = tf - p * in.F(x, t);
                if (!std::isfinite(g2) || !std::isfinite(g3)) { ok = false; witness = {{x, t}}; break; }
                if (g2 <= 0.0) { ok = false; witness = {{x, t}}; break; }
                c2 = std::min(c2, g3 / g2);
                c1_den = std::min(c1_den, g2 / g1);
            }
            if (!ok) break;
        }
        const double c1 = c2 * c1_den;
        if (ok && c2 > kPositive && c1 > kPositive) {
            r.certified = true;
            r.constants["C1"] = c1;
            r.constants["C2"] = c2;
            r.constants["M"] = M;
            r.detail = "certified-on-samples";
            return r;
        }
        if (M == 50.0) {
            r.witness = witness;
            r.constants["C1"] = ok ? c1 : 0.0;
            r.constants["C2"] = ok ? c2 : 0.0;
            r.detail = ok ? "violated: no positive (C1, C2) fit" : "violated: g2 <= 0 on samples";
        }
    }
    r.certified = false;
    return r;
}

/// (H2): f(x,t) = o(|t|^{p-1}) near t = 0, probed at t = 10^-k, k = 1..8.
inline HypothesisReport check_H2(const ProblemInstance& in, const Grid& g) {
    HypothesisReport r{.name = "H2"};
    const auto xs = detail::x_samples(g);
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    double last = 0.0;
    for (int k = 1; k <= 8; ++k) {
        const double t = std::pow(10.0, -k);
        double worst = 0.0;
        for (const Point& x : xs) {
            const double p = in.p(x);
            worst = std::max(worst, std::abs(in.f(x, t)) / std::pow(t, p - 1.0));
            worst = std::max(worst, std::abs(in.f(x, -t)) / std::pow(t, p - 1.0));
        }
        if (worst > prev * (1.0 + 1e-12)) monotone = false;
        prev = worst;
        last = worst;
        r.constants["ratio@1e-" + std::to_string(k)] = worst;
    }
    r.certified = monotone && last < 1e-3;
    if (!r.certified) r.witness = {xs.front(), 1e-8};
    r.detail = r.certified ? "certified-on-samples" : "violated: ratio does not vanish";
    return r;
}

/// (H3): oddness in t.
inline HypothesisReport check_H3(const ProblemInstance& in, const Grid& g) {
    HypothesisReport r{.name = "H3"};
    const auto xs = detail::x_samples(g);
    for (const Point& x : xs) {
        for (double t : detail::geometric_ts(1e-3, 1e3, 4)) {
            const double fv = in.f(x, t);
            if (std::abs(in.f(x, -t) + fv) >= 1e-12 * (1.0 + std::abs(fv))) {
                r.witness = {{x, t}};
                r.detail = "violated";
                return r;
            }
        }
    }
    r.certified = true;
    r.detail = "certified-on-samples";
    return r;
}

/// Ambrosetti-Rabinowitz: exists theta > p^+ with 0 < theta F <= t f for
/// large |t|. Declared violated when every sampled theta admits a witness.
inline HypothesisReport check_AR(const ProblemInstance& in, const Grid& g,
                                 double p_plus) {
    HypothesisReport r{.name = "AR"};
    const auto xs = detail::x_samples(g);
    const std::vector<double> thetas = {p_plus + 0.1, p_plus + 0.5, p_plus + 1.0, p_plus + 2.0};
    const std::vector<double> ts = detail::geometric_ts(10.0, 1e6, 2);
    bool any_positive_F = false;
    std::optional<std::pair<Point, double>> witness;
    for (double theta : thetas) {
        bool theta_ok = true;
        for (const Point& x : xs) {
            for (double t : ts) {
                const double Fv = in.F(x, t);
                const double tf = t * in.f(x, t);
                if (Fv > 0.0) any_positive_F = true;
                if (!(Fv > 0.0) || theta * Fv > tf * (1.0 + 1e-12)) {
                    theta_ok = false;
                    if (Fv > 0.0 && !witness) witness = {{x, t}};
                    break;
                }
            }
            if (!theta_ok) break;
        }
        if (theta_ok) {
            r.certified = true;
            r.constants["theta"] = theta;
            r.detail = "satisfied-on-samples";
            return r;
        }
    }
    if (!any_positive_F) {
        r.inconclusive = true;
        r.detail = "inconclusive: F <= 0 at large t";
        return r;
    }
    r.certified = false;
    r.witness = witness;
    r.detail = "violated: every sampled theta admits a witness";
    return r;
}

/// Runs every checker and stamps the instance's certification flags.
inline std::vector<HypothesisReport> check_all(ProblemInstance& in, const Grid& g) {
    const ExponentField field = in.make_field(g);
    std::vector<HypothesisReport> out;
    out.push_back(check_V(in, g));
    out.push_back(check_H0(in, g));
    out.push_back(check_H1(in, g));
    out.push_back(check_H2(in, g));
    out.push_back(check_H3(in, g));
    out.push_back(check_AR(in, g, field.p_max));
    in.certified = {out[0].certified, out[1].certified, out[2].certified,
                    out[3].certified, out[4].certified};
    return out;
}

} // namespace vexp
