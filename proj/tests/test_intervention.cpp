#include <cmath>
#include <limits>

#include "doctest.h"
#include "impulse/intervention.hpp"
#include "impulse/qvi_solver.hpp"
#include "support.hpp"

using namespace impulse;

namespace {

GridFunction brute_cone_min(const GridFunction& u) {
    const Grid& g = u.grid();
    GridFunction m(u.grid_ptr());
    for (std::size_t x = 0; x < g.size(); ++x) {
        const auto ix = g.index(x);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t y = 0; y < g.size(); ++y) {
            const auto iy = g.index(y);
            if (iy[0] >= ix[0] && iy[1] >= ix[1]) best = std::min(best, u[y]);
        }
        m[x] = best;
    }
    return m;
}

QVISolution binding_toy(int m) {
    const auto g = testing::line(-1, 1, m);
    const QVIProblem p{OperatorSpec::laplace(), CostFunction(GridFunction(g, 0.1)), GridFunction(g, 1.0), GridFunction(g)};
    return solve_qvi(p);
}

}  // namespace

TEST_CASE("cone minimum of a constant") {
    const auto g = testing::square(0, 1, 6);
    const GridFunction m = cone_min(GridFunction(g, 2.5));
    CHECK(m.min() == 2.5);
    CHECK(m.max() == 2.5);
}

TEST_CASE("cone minimum in 1D is a suffix minimum") {
    const auto g = testing::line(0, 1, 5);
    const GridFunction m = cone_min(GridFunction(g, std::vector<double>{3, 1, 2, 0, 5}));
    const std::vector<double> expect{0, 0, 0, 0, 5};
    for (std::size_t n = 0; n < 5; ++n) CHECK(m[n] == expect[n]);
}

TEST_CASE("cone minimum matches a brute-force scan") {
    testing::Gen gen(33);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = gen.grid(33);
        const GridFunction u = gen.values(g, -5, 5);
        const GridFunction a = cone_min(u), b = brute_cone_min(u);
        for (std::size_t n = 0; n < g->size(); ++n) CHECK(a[n] == b[n]);
    }
}

TEST_CASE("cone minimum properties") {
    testing::Gen gen(34);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = gen.grid(20);
        const GridFunction u = gen.values(g);
        GridFunction v = u;
        for (std::size_t n = 0; n < g->size(); ++n) v[n] += gen.uniform(0, 1);
        const GridFunction m = cone_min(u), mv = cone_min(v), mm = cone_min(m);
        for (std::size_t n = 0; n < g->size(); ++n) {
            CHECK(m[n] <= u[n]);
            CHECK(mm[n] == m[n]);
            CHECK(m[n] <= mv[n]);
            for (int a = 0; a < g->dim(); ++a) {
                const auto next = g->offset(n, {a == 0, a == 1});
                if (next) CHECK(m[n] <= m[*next]);
            }
        }
    }
}

TEST_CASE("cost function invariants") {
    const auto g = testing::square(0, 1, 5);
    CHECK_NOTHROW(CostFunction(GridFunction(g, 1.0)));
    CHECK_THROWS_AS(CostFunction(GridFunction(g, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(CostFunction(GridFunction::sample(g, [](Point p) { return 1 + p[0]; })), std::invalid_argument);
    CHECK_NOTHROW(CostFunction(GridFunction::sample(g, [](Point p) { return 3 - p[0] - p[1]; })));
    CHECK_THROWS_AS(CostFunction(GridFunction(g, 1.0), -1.0), std::invalid_argument);
    CHECK_THROWS_AS(CostFunction(GridFunction(g, 1.0), 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(CostFunction(GridFunction(g, 1.0), 0.0, 1.5), std::invalid_argument);
}

TEST_CASE("intervention operator") {
    const auto g = testing::square(-1, 1, 9);
    const CostFunction one(GridFunction(g, 1.0));
    const GridFunction Mu0 = intervention_operator(GridFunction(g), one);
    CHECK(Mu0.min() == 1.0);
    CHECK(Mu0.max() == 1.0);

    testing::Gen gen(35);
    const GridFunction u = gen.values(g);
    const GridFunction a = intervention_operator(u + 0.75, one);
    const GridFunction b = intervention_operator(u, one);
    const GridFunction w = u + GridFunction(gen.values(g, 0, 1));
    const GridFunction c = intervention_operator(w, one);
    for (std::size_t n = 0; n < g->size(); ++n) {
        CHECK(a[n] == doctest::Approx(b[n] + 0.75).epsilon(1e-14));
        CHECK(b[n] <= c[n]);
    }
    CHECK_THROWS_AS(intervention_operator(GridFunction(testing::square(-1, 1, 5)), one), std::invalid_argument);
}

TEST_CASE("intervention operator on the solved 1D toy matches direct evaluation") {
    const QVISolution s = binding_toy(81);
    const Grid& g = s.u.grid();
    const GridFunction Mu = intervention_operator(s.u, CostFunction(GridFunction(s.u.grid_ptr(), 0.1)));
    for (std::size_t x = 0; x < g.size(); ++x) {
        double best = s.u[x];
        for (std::size_t y = x; y < g.size(); ++y) best = std::min(best, s.u[y]);
        CHECK(Mu[x] == 0.1 + best);
    }
}

TEST_CASE("argmin sets") {
    SUBCASE("increasing function gives a singleton") {
        const auto g = testing::line(0, 1, 8);
        const auto u = GridFunction::sample(g, [](Point p) { return p[0]; });
        for (std::size_t x = 0; x < g->size(); ++x) CHECK(argmin_set(u, x, 0.0).nodes() == std::vector<std::size_t>{x});
    }
    SUBCASE("ties are kept") {
        const auto g = testing::line(0, 1, 6);
        const GridFunction u(g, std::vector<double>{4, 0, 3, 0, 2, 5});
        CHECK(argmin_set(u, 0, 0.0).nodes() == std::vector<std::size_t>{1, 3});
        CHECK(argmin_set(u, 2, 0.0).nodes() == std::vector<std::size_t>{3});
        CHECK(argmin_set(u, 0, 2.0).nodes() == std::vector<std::size_t>{1, 3, 4});
    }
    SUBCASE("2D cone") {
        const auto g = testing::square(0, 1, 3);
        const GridFunction u(g, std::vector<double>{0, 5, 5, 5, 1, 1, 5, 1, 5});
        CHECK(argmin_set(u, g->node(1, 1), 0.0).nodes() == std::vector<std::size_t>{4, 5, 7});
    }
    SUBCASE("negative tolerance") {
        const auto g = testing::line(0, 1, 4);
        CHECK_THROWS_AS(argmin_set(GridFunction(g), 0, -1.0), std::invalid_argument);
    }
}

TEST_CASE("argmin sets of a solved QVI stay away from the contact set") {
    const QVISolution s = binding_toy(201);
    const CostFunction cost(GridFunction(s.u.grid_ptr(), 0.1));
    const GridFunction Mu = intervention_operator(s.u, cost);
    const double tol = default_contact_tol(s.u);
    const Grid& g = s.u.grid();
    double delta0 = std::numeric_limits<double>::infinity();
    for (std::size_t x : g.interior_nodes()) {
        if (Mu[x] - s.u[x] > tol) continue;
        for (std::size_t y : argmin_set(s.u, x, tol)) delta0 = std::min(delta0, Mu[y] - s.u[y]);
    }
    CHECK(std::isfinite(delta0));
    CHECK(delta0 > 0.05);
}

TEST_CASE("separation") {
    SUBCASE("no contact") {
        const auto g = testing::line(-1, 1, 41);
        const auto u = GridFunction::sample(g, [](Point p) { return (p[0] * p[0] - 1) / 2; });
        const Separation s = separation_delta(u, CostFunction(GridFunction(g, 1.0)), default_contact_tol(u));
        CHECK(s.empty_contact);
        CHECK(std::isinf(s.value));
        CHECK(s.contact_nodes == 0);
    }
    SUBCASE("binding toy is positive and stable under refinement") {
        const QVISolution a = binding_toy(201), b = binding_toy(401);
        const Separation sa = separation_delta(a.u, CostFunction(GridFunction(a.u.grid_ptr(), 0.1)), default_contact_tol(a.u));
        const Separation sb = separation_delta(b.u, CostFunction(GridFunction(b.u.grid_ptr(), 0.1)), default_contact_tol(b.u));
        CHECK_FALSE(sa.empty_contact);
        CHECK(sa.value > 0);
        CHECK(sb.value > 0);
        CHECK(std::abs(sa.value - sb.value) <= 0.25 * sb.value);
    }
    SUBCASE("huge tolerance makes everything contact") {
        const QVISolution a = binding_toy(81);
        const Separation s = separation_delta(a.u, CostFunction(GridFunction(a.u.grid_ptr(), 0.1)), 1e6);
        CHECK(s.value == 0.0);
        CHECK(s.contact_nodes == a.u.grid().interior_count());
    }
}
