#include "impulse/obstacle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nodal_sweep.hpp"

namespace impulse {

double default_tolerance(const GridFunction& f) {
    const double diam = f.grid().diameter();
    return 1e-8 * (1.0 + f.max_abs()) * diam * diam;
}

double relaxation_factor(const SolverOptions& opts, const Grid& grid) {
    if (opts.relaxation) {
        const double w = *opts.relaxation;
        if (!(w > 0.0 && w < 2.0)) throw std::invalid_argument("solver: relaxation must lie in (0, 2)");
        return w;
    }
    int m = grid.count(0);
    if (grid.dim() == 2) m = std::max(m, grid.count(1));
    return 2.0 / (1.0 + std::sin(std::numbers::pi / (m - 1)));
}

void ObstacleProblem::validate() const {
    const Grid& g = obstacle.grid();
    require_same_grid(g, f.grid(), "obstacle problem (f)");
    require_same_grid(g, boundary_data.grid(), "obstacle problem (boundary data)");
    spec.validate(g.dim());
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (!g.is_boundary(n)) continue;
        const bool ok = side == ObstacleSide::Lower ? obstacle[n] <= boundary_data[n]
                                                    : obstacle[n] >= boundary_data[n];
        if (!ok) {
            throw std::invalid_argument("obstacle problem: boundary data on the wrong side of the obstacle at node " +
                                        std::to_string(n));
        }
    }
}

Solution solve_unconstrained(const OperatorSpec& spec, const GridFunction& f, const GridFunction& boundary_data,
                             const SolverOptions& opts, const GridFunction* initial) {
    require_same_grid(f.grid(), boundary_data.grid(), "solve_unconstrained");
    spec.validate(f.grid().dim());
    GridFunction u = initial ? *initial : boundary_data;
    require_same_grid(u.grid(), f.grid(), "solve_unconstrained (initial)");

    detail::SweepProblem p;
    p.spec = &spec;
    p.f = &f;
    p.boundary_data = &boundary_data;
    SolveReport rep = detail::run_sweeps(p, u, opts);
    return {std::move(u), rep};
}

Solution solve_obstacle(const ObstacleProblem& prob, const SolverOptions& opts, const GridFunction* initial) {
    prob.validate();
    GridFunction u = initial ? *initial : prob.obstacle;
    require_same_grid(u.grid(), prob.obstacle.grid(), "solve_obstacle (initial)");
    // Start from a feasible point.
    for (std::size_t n = 0; n < u.size(); ++n) {
        u[n] = prob.side == ObstacleSide::Lower ? std::max(u[n], prob.obstacle[n]) : std::min(u[n], prob.obstacle[n]);
    }

    detail::SweepProblem p;
    p.spec = &prob.spec;
    p.f = &prob.f;
    p.boundary_data = &prob.boundary_data;
    p.obstacle = &prob.obstacle;
    p.side = prob.side;
    SolveReport rep = detail::run_sweeps(p, u, opts);
    return {std::move(u), rep};
}

}  // namespace impulse
