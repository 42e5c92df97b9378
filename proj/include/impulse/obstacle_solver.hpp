#pragma once

#include <optional>

#include "impulse/elliptic_ops.hpp"
#include "impulse/grid.hpp"

namespace impulse {

struct SolverOptions {
    /// Residual tolerance; default_tolerance() when unset.
    std::optional<double> tol;
    long max_iter = 1'000'000;
    /// Over-relaxation factor in (0, 2). Unset selects 2 / (1 + sin(pi / (m - 1)))
    /// for the largest per-axis node count m; 1 gives plain Gauss-Seidel.
    std::optional<double> relaxation;
};

struct SolveReport {
    long iterations = 0;
    double final_residual = 0.0;
    double sup_update = 0.0;
    bool converged = false;
};

/// 1e-8 * (1 + max|f|) * diam^2.
double default_tolerance(const GridFunction& f);

/// Relaxation factor actually used for `opts` on `grid`.
double relaxation_factor(const SolverOptions& opts, const Grid& grid);

struct Solution {
    GridFunction u;
    SolveReport report;
};

/// Obstacle problem in either orientation (see ObstacleSide).
struct ObstacleProblem {
    OperatorSpec spec;
    ObstacleSide side = ObstacleSide::Lower;
    GridFunction obstacle;
    GridFunction f;
    GridFunction boundary_data;

    /// Throws std::invalid_argument on grid mismatch, an invalid operator,
    /// or boundary data on the wrong side of the obstacle.
    void validate() const;
};

/**
 * F(D^2 u) = f with u = boundary_data on the boundary, by nonlinear
 * Gauss-Seidel/SOR sweeps alternating lexicographic and reverse order.
 * Each node solves its scalar equation with the neighbours frozen
 * (closed form for Laplace, safeguarded Newton otherwise).
 *
 * Sweeping stops once the last sweep's largest update is below tol * h^2 and
 * the residual max |F(D^2 u) - f| is below tol. A report with
 * converged = false is returned when max_iter sweeps are exhausted.
 */
Solution solve_unconstrained(const OperatorSpec& spec, const GridFunction& f,
                             const GridFunction& boundary_data, const SolverOptions& opts = {},
                             const GridFunction* initial = nullptr);

/// Projected variant of solve_unconstrained: each node value is clipped to the
/// obstacle after its scalar solve. Convergence is declared on the
/// complementarity residual.
Solution solve_obstacle(const ObstacleProblem& p, const SolverOptions& opts = {},
                        const GridFunction* initial = nullptr);

}  // namespace impulse
