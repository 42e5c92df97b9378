#include "impulse/qvi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace impulse {

void QVIProblem::validate() const {
    const Grid& g = cost.phi().grid();
    require_same_grid(g, f.grid(), "QVI problem (f)");
    require_same_grid(g, boundary_data.grid(), "QVI problem (boundary data)");
    spec.validate(g.dim());
}

QVISolution solve_qvi(const QVIProblem& p, const QVIOptions& opts) {
    p.validate();
    const double outer_tol = opts.outer_tol.value_or(1e-6 * p.cost.phi().max_abs());
    const double inner_tol = opts.inner_tol.value_or(default_tolerance(p.f));
    if (!(outer_tol > 0.0) || !(inner_tol > 0.0)) throw std::invalid_argument("solve_qvi: tolerances must be positive");

    SolverOptions inner;
    inner.tol = inner_tol;
    inner.max_iter = opts.inner_max_iter;
    inner.relaxation = opts.relaxation;

    const Grid& g = p.f.grid();
    Solution start = solve_unconstrained(p.spec, p.f, p.boundary_data, inner);
    QVISolution out{std::move(start.u), {}, GridFunction(p.f.grid_ptr())};
    QVIReport& rep = out.report;
    if (!start.report.converged) {
        rep.inner_failure = true;
        rep.final_residual = check_qvi(out.u, p, inner_tol).complementarity_violation;
        return out;
    }
    rep.inner_iterations.push_back(start.report.iterations);

    ObstacleProblem op{p.spec, ObstacleSide::Upper, GridFunction(p.f.grid_ptr()), p.f, p.boundary_data};
    for (int k = 0; k < opts.max_outer; ++k) {
        op.obstacle = intervention_operator(out.u, p.cost);
        for (std::size_t n = 0; n < g.size(); ++n)
            if (g.is_boundary(n)) op.obstacle[n] = std::max(op.obstacle[n], p.boundary_data[n]);

        Solution next = solve_obstacle(op, inner, &out.u);
        rep.inner_iterations.push_back(next.report.iterations);
        ++rep.outer_iterations;
        if (!next.report.converged) {
            rep.inner_failure = true;
            out.u = std::move(next.u);
            break;
        }

        double diff = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n) {
            diff = std::max(diff, std::abs(next.u[n] - out.u[n]));
            if (k >= 1 && next.u[n] > out.u[n] + inner_tol) rep.monotone = false;
        }
        rep.sup_differences.push_back(diff);
        out.u = std::move(next.u);
        if (diff <= outer_tol) {
            rep.converged = true;
            break;
        }
    }
    out.last_obstacle = op.obstacle;

    const QVICheck chk = check_qvi(out.u, p, inner_tol);
    rep.final_residual = chk.complementarity_violation;
    const GridFunction Mu = intervention_operator(out.u, p.cost);
    for (std::size_t n = 0; n < g.size(); ++n)
        if (!g.is_boundary(n)) rep.self_consistency = std::max(rep.self_consistency, std::abs(Mu[n] - op.obstacle[n]));
    return out;
}

QVICheck check_qvi(const GridFunction& u, const QVIProblem& p, double tol) {
    require_same_grid(u.grid(), p.f.grid(), "check_qvi");
    const Grid& g = u.grid();
    const GridFunction Fu = apply_operator(p.spec, u);
    const GridFunction Mu = intervention_operator(u, p.cost);
    QVICheck c;
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (g.is_boundary(n)) {
            const double b = std::abs(u[n] - p.boundary_data[n]);
            if (b > c.boundary_violation) {
                c.boundary_violation = b;
                c.worst_boundary = n;
            }
            continue;
        }
        const double eq = Fu[n] - p.f[n];
        const double slack = Mu[n] - u[n];
        if (-eq > c.equation_violation) {
            c.equation_violation = -eq;
            c.worst_equation = n;
        }
        if (-slack > c.constraint_violation) {
            c.constraint_violation = -slack;
            c.worst_constraint = n;
        }
        const double comp = std::abs(std::min(eq, slack));
        if (comp > c.complementarity_violation) {
            c.complementarity_violation = comp;
            c.worst_complementarity = n;
        }
    }
    c.equation_ok = c.equation_violation <= tol;
    c.constraint_ok = c.constraint_violation <= tol;
    c.complementarity_ok = c.complementarity_violation <= tol;
    c.boundary_ok = c.boundary_violation <= tol;
    return c;
}

}  // namespace impulse
