#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "vexp/energy.hpp"

using namespace vexp;

namespace {

GridFunction random_interior(const Grid& g, std::mt19937_64& rng, double amp = 1.0) {
    std::uniform_real_distribution<double> unif(-amp, amp);
    GridFunction u(g);
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = g.is_boundary(i) ? 0.0 : unif(rng);
    return u;
}

} // namespace

TEST_CASE("energy at constant exponent two matches the quadratic oracle") {
    const Grid g = Grid::centered(1, 3.0, 31);
    ProblemInstance in = make_cubic_constant_exponent();
    const ExponentField f = in.make_field(g);
    const EnergyAssembly a(g, f, in);
    const GridFunction u = GridFunction::sample(g, [](Point x) {
        return std::max(0.0, 1.0 - std::abs(x[0]) / 3.0);
    });
    double grad2 = 0.0, mass2 = 0.0, quart = 0.0;
    for (const Point& gr : cell_gradients(u)) grad2 += g.cell_volume() * dot(gr, gr);
    for (std::size_t i = 0; i < u.size(); ++i) {
        mass2 += g.node_weight(i) * u[i] * u[i];
        quart += g.node_weight(i) * 0.25 * std::pow(u[i], 4.0);
    }
    CHECK(a.energy(u) == Catch::Approx(0.5 * grad2 + 0.5 * mass2 - quart).epsilon(1e-13));
}

TEST_CASE("energy gradient matches finite differences in one and two dimensions") {
    for (int dim : {1, 2}) {
        const Grid g = Grid::centered(dim, 2.0, dim == 1 ? 17 : 9);
        ProblemInstance in = make_paper_example();
        const ExponentField f = in.make_field(g);
        const EnergyAssembly a(g, f, in);
        std::mt19937_64 rng(dim);
        const GridFunction u = random_interior(g, rng, 0.8);
        for (Truncation tr : {Truncation::none, Truncation::plus, Truncation::minus}) {
            const GridFunction grad = a.gradient(u, tr);
            const double eps = 1e-6;
            for (std::size_t i = 0; i < u.size(); ++i) {
                if (g.is_boundary(i)) {
                    CHECK(grad[i] == 0.0);
                    continue;
                }
                GridFunction up = u, um = u;
                up[i] += eps;
                um[i] -= eps;
                const double fd = (a.energy(up, tr) - a.energy(um, tr)) / (2.0 * eps);
                CHECK(grad[i] == Catch::Approx(fd).margin(2e-5));
            }
        }
    }
}

TEST_CASE("single gradient components agree with the full gradient") {
    for (int dim : {1, 2}) {
        const Grid g = Grid::centered(dim, 2.0, dim == 1 ? 25 : 11);
        ProblemInstance in = make_paper_example();
        const ExponentField f = in.make_field(g);
        const EnergyAssembly a(g, f, in);
        std::mt19937_64 rng(100 + dim);
        const GridFunction u = random_interior(g, rng, 0.5);
        for (Truncation tr : {Truncation::none, Truncation::plus, Truncation::minus}) {
            const GridFunction grad = a.gradient(u, tr);
            for (std::size_t i = 0; i < u.size(); ++i)
                CHECK(a.gradient_component(u, i, tr) ==
                      Catch::Approx(grad[i]).margin(1e-14).epsilon(1e-12));
        }
    }
}

TEST_CASE("sign truncations split the primitive exactly") {
    const Grid g = Grid::centered(1, 2.0, 9);
    ProblemInstance in = make_paper_example();
    const ExponentField f = in.make_field(g);
    const EnergyAssembly a(g, f, in);
    const Point x = g.node(3);
    for (double t : {-3.0, -0.2, 0.0, 0.7, 5.0}) {
        const double fp = a.truncated_F(x, t, Truncation::plus);
        const double fm = a.truncated_F(x, t, Truncation::minus);
        CHECK(fp + fm == Catch::Approx(a.truncated_F(x, t, Truncation::none)).margin(1e-14));
        if (t > 0.0) CHECK(fm == 0.0);
        if (t < 0.0) CHECK(fp == 0.0);
        CHECK(a.truncated_f(x, t, Truncation::plus) + a.truncated_f(x, t, Truncation::minus) ==
              Catch::Approx(a.truncated_f(x, t, Truncation::none)).margin(1e-14));
    }
}

TEST_CASE("pairing of the gradient is the directional derivative") {
    const Grid g = Grid::centered(1, 2.0, 21);
    ProblemInstance in = make_paper_example();
    const ExponentField f = in.make_field(g);
    const EnergyAssembly a(g, f, in);
    std::mt19937_64 rng(9);
    const GridFunction u = random_interior(g, rng, 0.7);
    for (int t = 0; t < 5; ++t) {
        const GridFunction v = random_interior(g, rng, 1.0);
        const double eps = 1e-6;
        const double fd = (a.energy(u + eps * v) - a.energy(u + (-eps) * v)) / (2.0 * eps);
        CHECK(a.pairing(a.gradient(u), v) == Catch::Approx(fd).margin(1e-5));
    }
}

TEST_CASE("the leading operator is strictly monotone") {
    const Grid g = Grid::centered(1, 2.0, 17);
    ProblemInstance in = make_paper_example();
    const ExponentField f = in.make_field(g);
    const EnergyAssembly a(g, f, in);
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
        const GridFunction u = random_interior(g, rng);
        const GridFunction v = random_interior(g, rng);
        CHECK(a.monotonicity_gap(u, v) > 0.0);
    }
    const GridFunction u = random_interior(g, rng);
    CHECK(a.monotonicity_gap(u, u) == 0.0);
}

TEST_CASE("huge amplitudes raise an overflow with advice") {
    const Grid g = Grid::centered(1, 2.0, 9);
    ProblemInstance in = make_cubic_constant_exponent();
    in.alpha = [](Point) { return 400.0; };
    in.f = [](Point, double t) { return std::pow(std::abs(t), 300.0) * t; };
    in.F = [](Point, double t) { return std::pow(std::abs(t), 302.0) / 302.0; };
    const ExponentField f = in.make_field(g);
    const EnergyAssembly a(g, f, in);
    GridFunction u(g, 0.0);
    u[4] = 1e30;
    try {
        a.energy(u);
        FAIL("expected an overflow");
    } catch (const EnergyOverflow& e) {
        CHECK(std::string(e.what()).find("smaller amplitude") != std::string::npos);
    }
}

TEST_CASE("non-positive potentials are rejected at assembly") {
    const Grid g = Grid::centered(1, 2.0, 9);
    ProblemInstance in = make_cubic_constant_exponent();
    in.V = [](Point x) { return x[0]; };
    const ExponentField f = in.make_field(g);
    CHECK_THROWS_AS(EnergyAssembly(g, f, in), HypothesisViolation);
}

TEST_CASE("evaluation counters track calls") {
    const Grid g = Grid::centered(1, 2.0, 9);
    ProblemInstance in = make_cubic_constant_exponent();
    const ExponentField f = in.make_field(g);
    const EnergyAssembly a(g, f, in);
    const GridFunction u(g, 0.0);
    a.energy(u);
    a.energy(u);
    a.gradient(u);
    CHECK(a.energy_evaluations() == 2);
    CHECK(a.gradient_evaluations() == 1);
}
