#include <cmath>
#include <limits>

#include "doctest.h"
#include "impulse/obstacle_solver.hpp"
#include "impulse/probe.hpp"
#include "impulse/qvi_solver.hpp"
#include "support.hpp"

using namespace impulse;

namespace {

const double kContactEnd = 1 - std::sqrt(2.0) / 2;

GridFunction dome(const GridPtr& g) {
    return GridFunction::sample(g, [](Point p) { return 0.5 - p[0] * p[0] - p[1] * p[1]; });
}

GridFunction dome_solve(const GridPtr& g) {
    const ObstacleProblem p{OperatorSpec::laplace(), ObstacleSide::Lower, dome(g), GridFunction(g), GridFunction(g)};
    return solve_obstacle(p).u;
}

NodeSet all_interior(const GridPtr& g) { return NodeSet(g, g->interior_nodes()); }

// Nodes at least `steps` cells from the boundary, where the mollified slope is exact on quadratics.
ContactSet inner_contact(const GridPtr& g, int steps) {
    std::vector<std::size_t> members;
    for (std::size_t n = 0; n < g->size(); ++n) {
        const auto [i, j] = g->index(n);
        const int far = std::min({i, j, g->count(0) - 1 - i, g->count(1) - 1 - j});
        if (far >= steps) members.push_back(n);
    }
    return {NodeSet(g, members), 0.0, NodeSet(g, {})};
}

void check_finite(const ProbeReport& r) {
    for (const auto& [name, m] : r.metrics) CHECK_MESSAGE(std::isfinite(m.value), name);
}

}  // namespace

TEST_CASE("modulus family") {
    const ModulusFamily quad{};
    CHECK(quad(0.0) == 0.0);
    CHECK(quad(0.5) == doctest::Approx(0.25));
    const ModulusFamily w{3.0, 0.5};
    double prev = 0;
    for (double r = 0; r <= 2; r += 0.01) {
        CHECK(w(r) >= prev);
        prev = w(r);
    }
    CHECK_THROWS_AS(ModulusFamily({1.0, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ModulusFamily({1.0, 1.5}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ModulusFamily({-1.0, 1.0}).validate(), std::invalid_argument);
}

TEST_CASE("directions and step lengths") {
    CHECK(directions(1) == std::vector<Direction>{Direction::Axis0});
    CHECK(directions(2).size() == 4);
    const auto g = testing::square(0, 1, 11);
    CHECK(step_length(*g, Direction::Axis1, 3) == doctest::Approx(0.3));
    CHECK(step_length(*g, Direction::Diagonal, 2) == doctest::Approx(0.2 * std::sqrt(2.0)));
}

TEST_CASE("second increments") {
    const auto g = testing::square(-1, 1, 21);
    const double h = g->h();
    const auto affine = GridFunction::sample(g, [](Point p) { return 1 + 2 * p[0] - 3 * p[1]; });
    const auto sq = GridFunction::sample(g, [](Point p) { return p[0] * p[0] + p[1] * p[1]; });
    const std::size_t c = g->node(10, 10);
    for (Direction e : directions(2)) {
        for (int k : {1, 2, 5}) {
            CHECK(std::abs(second_increment(affine, c, e, k)) <= 1e-13);
            const double len = step_length(*g, e, k);
            CHECK(second_increment(sq, c, e, k) == doctest::Approx(2 * len * len).epsilon(1e-12));
        }
    }
    const auto line = testing::line(-1, 1, 21);
    const auto absx = GridFunction::sample(line, [](Point p) { return std::abs(p[0]); });
    for (int k : {1, 3, 7}) CHECK(second_increment(absx, 10, Direction::Axis0, k) == doctest::Approx(2 * k * h));
    CHECK_THROWS_AS(second_increment(absx, 10, Direction::Axis0, 11), std::out_of_range);
    CHECK_THROWS_AS(second_increment(sq, g->node(1, 1), Direction::Diagonal, 2), std::out_of_range);
    CHECK_THROWS_AS(second_increment(absx, 5, Direction::Axis1, 1), std::invalid_argument);
}

TEST_CASE("contact sets") {
    SUBCASE("u equal to the obstacle") {
        const auto g = testing::square(0, 1, 9);
        const auto phi = dome(g);
        const ContactSet c = extract_contact_set(phi, phi, ObstacleSide::Lower, 0.0);
        CHECK(c.nodes.size() == g->size());
        CHECK(c.free_boundary.size() == 0);
    }
    SUBCASE("1D dome contact interval") {
        for (int m : {101, 201, 401}) {
            const auto g = testing::line(-1, 1, m);
            const double h = g->h();
            const GridFunction u = dome_solve(g);
            const ContactSet tight = extract_contact_set(u, dome(g), ObstacleSide::Lower, 0.1 * h * h);
            REQUIRE(tight.nodes.size() > 0);
            CHECK(std::abs(g->coords(tight.nodes.nodes().front())[0] + kContactEnd) <= h);
            CHECK(std::abs(g->coords(tight.nodes.nodes().back())[0] - kContactEnd) <= h);
            CHECK(tight.free_boundary.nodes() ==
                  std::vector<std::size_t>{tight.nodes.nodes().front(), tight.nodes.nodes().back()});
            // u - phi grows like (x - a)^2 past the contact end, so tol widens the set by about sqrt(tol).
            const double tol = default_probe_tol(u);
            const ContactSet wide = extract_contact_set(u, dome(g), ObstacleSide::Lower, tol);
            CHECK(std::abs(g->coords(wide.nodes.nodes().back())[0] - kContactEnd) <= std::sqrt(tol) + h);
            CHECK(wide.nodes.size() >= tight.nodes.size());
        }
    }
    SUBCASE("zero tolerance on perturbed data is empty") {
        const auto g = testing::line(-1, 1, 51);
        testing::Gen gen(71);
        const auto phi = dome(g);
        GridFunction u = phi;
        for (std::size_t n = 0; n < g->size(); ++n) u[n] += gen.uniform(1e-15, 2e-15);
        CHECK(extract_contact_set(u, phi, ObstacleSide::Lower, 0.0).nodes.size() == 0);
        CHECK(extract_contact_set(u, phi, ObstacleSide::Lower, 1e-12).nodes.size() == g->size());
    }
    SUBCASE("free boundary invariants on random data") {
        testing::Gen gen(72);
        for (int trial = 0; trial < 30; ++trial) {
            const auto g = gen.grid(25);
            const GridFunction phi(g);
            GridFunction u(g);
            for (std::size_t n = 0; n < g->size(); ++n) u[n] = gen.coin(0.6) ? 0.0 : gen.uniform(0.1, 1);
            const ContactSet c = extract_contact_set(u, phi, ObstacleSide::Lower, 1e-3);
            for (std::size_t n : c.free_boundary) {
                CHECK(c.nodes.contains(n));
                bool open = false;
                for (int a = 0; a < g->dim(); ++a)
                    for (int s : {-1, 1}) {
                        const auto nb = g->offset(n, {a == 0 ? s : 0, a == 1 ? s : 0});
                        if (nb && !c.nodes.contains(*nb)) open = true;
                    }
                CHECK(open);
            }
            for (std::size_t n : c.nodes) CHECK(std::abs(u[n] - phi[n]) <= 1e-3);
        }
    }
    SUBCASE("grid mismatch") {
        CHECK_THROWS_AS(extract_contact_set(GridFunction(testing::line(0, 1, 5)), GridFunction(testing::line(0, 1, 6)),
                                            ObstacleSide::Lower, 0.1),
                        std::invalid_argument);
    }
}

TEST_CASE("growth constant vanishes when u equals an affine obstacle") {
    const auto g = testing::square(-1, 1, 41);
    const auto phi = GridFunction::sample(g, [](Point p) { return 0.2 + 0.5 * p[0] - p[1]; });
    std::vector<std::size_t> members;
    for (std::size_t n : g->interior_nodes()) {
        const Point p = g->coords(n);
        if (std::abs(p[0]) <= 0.3 && std::abs(p[1]) <= 0.3) members.push_back(n);
    }
    const ContactSet c{NodeSet(g, members), 0.0, NodeSet(g, {})};
    const ProbeReport r = growth_constant(phi, phi, c, ModulusFamily{});
    CHECK(r.samples.size() > 0);
    CHECK(std::abs(r["K_hat"]) <= 1e-10);
    check_finite(r);
    CHECK_THROWS_AS(growth_constant(phi, phi, ContactSet{NodeSet(g, {}), 0.0, NodeSet(g, {})}, ModulusFamily{}),
                    std::invalid_argument);
}

TEST_CASE("growth constant on the dome obstacle is stable under refinement") {
    std::vector<double> K;
    for (int m : {201, 401}) {
        const auto g = testing::line(-1, 1, m);
        const GridFunction u = dome_solve(g);
        const auto phi = dome(g);
        const ContactSet c = extract_contact_set(u, phi, ObstacleSide::Lower, default_probe_tol(u));
        const ProbeReport r = growth_constant(u, phi, c, ModulusFamily{});
        check_finite(r);
        CHECK(r["K_hat"] > 0);
        for (const ProbeSample& s : r.samples) {
            CHECK_FALSE(c.nodes.contains(s.a));
            CHECK(c.nodes.contains(s.b));
            CHECK(s.scale >= 2 * g->h() * (1 - 1e-12));
        }
        K.push_back(r["K_hat"]);
    }
    CHECK(std::abs(K[1] - K[0]) <= 0.3 * K[0]);
}

TEST_CASE("growth constant diverges for a jump away from the contact set") {
    std::vector<double> K;
    for (int m : {101, 201, 401}) {
        const auto g = testing::line(-1, 1, m);
        GridFunction u = dome_solve(g);
        const auto phi = dome(g);
        const ContactSet c = extract_contact_set(u, phi, ObstacleSide::Lower, default_probe_tol(u));
        for (std::size_t n : g->interior_nodes())
            if (!c.nodes.contains(n)) u[n] += 0.05;
        K.push_back(growth_constant(u, phi, c, ModulusFamily{})["K_hat"]);
    }
    CHECK(K[1] >= 1.5 * K[0]);
    CHECK(K[2] >= 1.5 * K[1]);
}

TEST_CASE("growth constant is consistent with a dilation around a contact point") {
    const auto g = testing::line(-1, 1, 801);
    const double h = g->h();
    const GridFunction u = dome_solve(g);
    const auto phi = dome(g);
    const double tol = default_probe_tol(u);
    const ModulusFamily omega{};
    const ContactSet full = extract_contact_set(u, phi, ObstacleSide::Lower, tol);
    const std::size_t x0 = full.nodes.nodes().front();
    const int half = 80;
    const double rho = half * h;
    const double slope = -2 * g->coords(x0)[0];
    const auto lin = [&](std::size_t n) { return phi[x0] + slope * (g->coords(n)[0] - g->coords(x0)[0]); };

    const auto window = testing::line(g->coords(x0)[0] - rho, g->coords(x0)[0] + rho, 2 * half + 1);
    const auto unit = testing::line(-1, 1, 2 * half + 1);
    GridFunction uw(window), pw(window), v(unit), psi(unit);
    const double scale = omega(4 * rho);
    for (int i = 0; i <= 2 * half; ++i) {
        const std::size_t n = x0 - half + i;
        uw[i] = u[n];
        pw[i] = phi[n];
        v[i] = (u[n] - lin(n)) / scale + 1;
        psi[i] = (phi[n] - lin(n)) / scale + 1;
    }
    const ProbeReport local = growth_constant(uw, pw, extract_contact_set(uw, pw, ObstacleSide::Lower, tol), omega);
    const ProbeReport dilated =
        growth_constant(v, psi, extract_contact_set(v, psi, ObstacleSide::Lower, tol / scale), omega);
    const ProbeReport global = growth_constant(u, phi, full, omega);
    CHECK(local["K_hat"] > 0);
    CHECK(dilated["K_hat"] * scale / (rho * rho) == doctest::Approx(local["K_hat"]).epsilon(1e-6));
    CHECK(local["K_hat"] <= global["K_hat"] * (1 + 1e-12));
    CHECK(local["K_hat"] >= 0.25 * global["K_hat"]);
}

TEST_CASE("probes are scale covariant") {
    const auto g = testing::line(-1, 1, 201);
    const GridFunction u = dome_solve(g);
    const auto phi = dome(g);
    const double tol = default_probe_tol(u);
    const ContactSet c = extract_contact_set(u, phi, ObstacleSide::Lower, tol);
    const ProbeReport g1 = growth_constant(u, phi, c, ModulusFamily{}, {.semiconvexity_constant = 0.0});
    const ProbeReport o1 = contact_oscillation(u, phi, c, ModulusFamily{}, {.semiconvexity_constant = 0.0});
    const ProbeReport s1 = semiconcavity_modulus(u, all_interior(g), {1, 2, 4});
    for (double k : {4.0, 0.5}) {
        const GridFunction ku = k * u, kphi = k * phi;
        const ContactSet kc = extract_contact_set(ku, kphi, ObstacleSide::Lower, k * tol);
        CHECK(kc.nodes.nodes() == c.nodes.nodes());
        const ProbeReport g2 = growth_constant(ku, kphi, kc, ModulusFamily{}, {.semiconvexity_constant = 0.0});
        const ProbeReport o2 = contact_oscillation(ku, kphi, kc, ModulusFamily{}, {.semiconvexity_constant = 0.0});
        const ProbeReport s2 = semiconcavity_modulus(ku, all_interior(g), {1, 2, 4});
        for (const auto* pair : {&g1, &o1, &s1}) {
            const ProbeReport& other = pair == &g1 ? g2 : pair == &o1 ? o2 : s2;
            for (const auto& [name, m] : pair->metrics) {
                if (name == "samples") continue;
                CHECK_MESSAGE(other[name] == doctest::Approx(k * m.value).epsilon(1e-9), name);
                CHECK_MESSAGE(other.metrics.at(name).witness == m.witness, name);
            }
        }
    }
}

TEST_CASE("contact oscillation") {
    SUBCASE("quadratic obstacle with full contact") {
        const auto g = testing::square(-1, 1, 21);
        const auto phi = dome(g);
        const ProbeReport r = contact_oscillation(phi, phi, inner_contact(g, 3), ModulusFamily{});
        check_finite(r);
        CHECK(r["ratio"] <= 2.0);
        CHECK(r["ratio"] >= -2.0);
    }
    SUBCASE("large contact sets are subsampled deterministically") {
        const auto g = testing::square(-1, 1, 61);
        const auto phi = dome(g);
        const ContactSet c = inner_contact(g, 3);
        REQUIRE(c.nodes.size() > 2000);
        const ProbeReport a = contact_oscillation(phi, phi, c, ModulusFamily{}, {}, 5);
        const ProbeReport b = contact_oscillation(phi, phi, c, ModulusFamily{}, {}, 5);
        CHECK(a.samples.size() > 0);
        CHECK(a["ratio"] == b["ratio"]);
        CHECK(a.metrics.at("ratio").witness == b.metrics.at("ratio").witness);
        CHECK(a["ratio"] <= 2.0);
    }
    SUBCASE("dome obstacle is refinement stable") {
        std::vector<double> R;
        for (int m : {201, 401}) {
            const auto g = testing::line(-1, 1, m);
            const GridFunction u = dome_solve(g);
            const auto phi = dome(g);
            const ContactSet c = extract_contact_set(u, phi, ObstacleSide::Lower, default_probe_tol(u));
            R.push_back(contact_oscillation(u, phi, c, ModulusFamily{})["ratio"]);
        }
        CHECK(std::isfinite(R[0]));
        CHECK(std::abs(R[1] - R[0]) <= 0.3 * std::abs(R[0]));
    }
    SUBCASE("a single contact node is rejected") {
        const auto g = testing::line(-1, 1, 11);
        const auto phi = dome(g);
        CHECK_THROWS_AS(contact_oscillation(phi, phi, ContactSet{NodeSet(g, {5}), 0.0, NodeSet(g, {})}, ModulusFamily{}),
                        std::invalid_argument);
    }
}

TEST_CASE("semiconcavity of a concave quadratic is exact") {
    const auto g = testing::square(-1, 1, 31);
    const auto u = GridFunction::sample(g, [](Point p) { return -(p[0] * p[0] + p[1] * p[1]); });
    const ProbeReport r = semiconcavity_modulus(u, all_interior(g), {1, 2, 4});
    for (const char* name : {"C_hat", "c_hat", "C_hat_k1", "C_hat_k2", "C_hat_k4", "c_hat_k4"})
        CHECK_MESSAGE(r[name] == doctest::Approx(-2.0).epsilon(1e-9), name);
    CHECK(r.skipped > 0);
    CHECK_THROWS_AS(semiconcavity_modulus(u, NodeSet(g, {}), {1}), std::invalid_argument);
}

TEST_CASE("a convex kink has no quadratic semiconcavity") {
    std::vector<double> C;
    for (int m : {101, 201, 401}) {
        const auto g = testing::line(-1, 1, m);
        const auto u = GridFunction::sample(g, [](Point p) { return std::abs(p[0]); });
        const ProbeReport r = semiconcavity_modulus(u, all_interior(g), {1, 2});
        CHECK(r["C_hat_k1"] == doctest::Approx(2 / g->h()));
        CHECK(r["C_hat_k2"] == doctest::Approx(1 / g->h()));
        C.push_back(r["C_hat"]);
    }
    CHECK(C[1] >= 1.5 * C[0]);
    CHECK(C[2] >= 1.5 * C[1]);
}

TEST_CASE("intervention of the classical QVI solution is semiconcave") {
    const auto g = testing::line(-1, 1, 201);
    const QVIProblem p{OperatorSpec::laplace(), CostFunction(GridFunction(g, 1.0)), GridFunction(g, 1.0), GridFunction(g)};
    const QVISolution s = solve_qvi(p);
    REQUIRE(s.report.converged);
    const GridFunction Mu = intervention_operator(s.u, p.cost);
    const ProbeReport mu = semiconcavity_modulus(Mu, all_interior(g), {1, 2, 4});
    const ProbeReport uu = semiconcavity_modulus(s.u, all_interior(g), {1, 2, 4});
    const double c11 = std::max(std::abs(uu["C_hat"]), std::abs(uu["c_hat"]));
    CHECK(mu["C_hat"] <= c11 + 1e-6);
    for (const char* k : {"C_hat_k1", "C_hat_k2", "C_hat_k4"}) CHECK(mu[k] <= c11 + 1e-6);
}

TEST_CASE("Hoelder seminorm") {
    SUBCASE("constant Hessian") {
        const auto g = testing::square(-1, 1, 21);
        const auto u = GridFunction::sample(g, [](Point p) { return p[0] * p[0] - 3 * p[0] * p[1]; });
        CHECK(holder_seminorm(hessian_field(u), 0.5).value <= 1e-9);
    }
    SUBCASE("cubic in 1D attains the longest pair") {
        const auto g = testing::line(-1, 1, 101);
        const auto u = GridFunction::sample(g, [](Point p) { return p[0] * p[0] * p[0]; });
        for (double alpha : {0.25, 0.5, 0.75}) {
            const SeminormResult r = holder_seminorm(hessian_field(u), alpha);
            CHECK(r.value == doctest::Approx(6 * std::pow(2 - 2 * g->h(), 1 - alpha)).epsilon(1e-8));
            CHECK(std::abs(g->coords(r.witness_a)[0] - g->coords(r.witness_b)[0]) == doctest::Approx(2 - 2 * g->h()));
            CHECK(r.pairs == 99 * 98 / 2);
        }
    }
    SUBCASE("adding a constant matrix leaves the seminorm unchanged") {
        testing::Gen gen(73);
        const auto g = testing::square(-1, 1, 17);
        const GridFunction u = gen.values(g);
        const auto shifted = u + GridFunction::sample(g, [](Point p) { return 2 * p[0] * p[0] + p[0] * p[1]; });
        const double a = holder_seminorm(hessian_field(u), 0.5).value;
        const double b = holder_seminorm(hessian_field(shifted), 0.5).value;
        CHECK(b == doctest::Approx(a).epsilon(1e-9));
    }
    SUBCASE("sampled pairs are deterministic in the seed") {
        testing::Gen gen(74);
        const auto g = testing::square(-1, 1, 41);
        const GridFunction u = gen.values(g);
        const HessianField H = hessian_field(u, 0.1);
        const SeminormResult a = holder_seminorm(H, 0.5, 1000, 3);
        const SeminormResult b = holder_seminorm(H, 0.5, 1000, 3);
        CHECK(a.value == b.value);
        CHECK(a.witness_a == b.witness_a);
        CHECK(a.pairs == b.pairs);
        const SeminormResult full = holder_seminorm(H, 0.5, 10'000'000);
        CHECK(a.value <= full.value);
        CHECK(full.pairs > a.pairs);
    }
    SUBCASE("margin removes nodes near the boundary") {
        const auto g = testing::square(-1, 1, 21);
        const HessianField H = hessian_field(GridFunction(g), 0.25);
        for (std::size_t n = 0; n < g->size(); ++n) {
            const Point p = g->coords(n);
            const double d = std::min({p[0] + 1, 1 - p[0], p[1] + 1, 1 - p[1]});
            CHECK(static_cast<bool>(H.valid[n]) == (d >= 0.25 - 1e-12));
        }
    }
}
