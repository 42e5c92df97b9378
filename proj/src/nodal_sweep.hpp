#pragma once

// Shared projected nonlinear Gauss-Seidel/SOR engine.

#include "impulse/elliptic_ops.hpp"
#include "impulse/obstacle_solver.hpp"
#include "impulse/penalty.hpp"

namespace impulse::detail {

struct SweepProblem {
    const OperatorSpec* spec = nullptr;
    const GridFunction* f = nullptr;
    const GridFunction* boundary_data = nullptr;
    // Projection onto the obstacle, when set.
    const GridFunction* obstacle = nullptr;
    ObstacleSide side = ObstacleSide::Lower;
    // Penalty term beta(u - penalty_obstacle), when set.
    const PenaltyFamily* penalty = nullptr;
    const GridFunction* penalty_obstacle = nullptr;
};

/// Residual that decides convergence for `p` (max over interior nodes).
double problem_residual(const SweepProblem& p, const GridFunction& u);

/// Solves the scalar equation F(M0 - 2t/h^2 I) - f - beta(t - phi) = 0 for t.
/// `m0` is the Hessian with the centre value removed.
double solve_node(const OperatorSpec& spec, int dim, double h2, const SymMat& m0, double f,
                  const PenaltyFamily* penalty, double phi, double t0);

/// Runs sweeps on `u` in place. Boundary values are overwritten with boundary_data.
SolveReport run_sweeps(const SweepProblem& p, GridFunction& u, const SolverOptions& opts);

}  // namespace impulse::detail
