#pragma once

#include <optional>
#include <vector>

#include "impulse/elliptic_ops.hpp"
#include "impulse/intervention.hpp"
#include "impulse/obstacle_solver.hpp"

namespace impulse {

/// F(D^2 u) >= f, u <= Mu, complementarity, in the interior; u = boundary_data on the boundary.
struct QVIProblem {
    OperatorSpec spec;
    CostFunction cost;
    GridFunction f;
    GridFunction boundary_data;

    void validate() const;
};

struct QVIOptions {
    /// Default 1e-6 * ||phi||_inf.
    std::optional<double> outer_tol;
    /// Inner residual tolerance; default_tolerance(f) when unset.
    std::optional<double> inner_tol;
    int max_outer = 200;
    long inner_max_iter = 1'000'000;
    std::optional<double> relaxation;
};

struct QVIReport {
    int outer_iterations = 0;
    std::vector<double> sup_differences;  ///< ||u^{k+1} - u^k||_inf per outer step
    std::vector<long> inner_iterations;
    double final_residual = 0.0;
    /// u^{k+1} <= u^k + inner_tol held for every k >= 1.
    bool monotone = true;
    bool converged = false;
    bool inner_failure = false;
    /// sup |Mu_final - obstacle of the last inner solve|.
    double self_consistency = 0.0;
};

struct QVISolution {
    GridFunction u;
    QVIReport report;
    GridFunction last_obstacle;
};

/**
 * Bensoussan-Lions iteration: u^0 solves F(D^2 u) = f, then u^{k+1} solves
 * the upper obstacle problem with the obstacle Mu^k frozen, until
 * ||u^{k+1} - u^k||_inf <= outer_tol. The constraint lives on interior nodes
 * only, so the frozen obstacle is lifted to at least the boundary data on
 * boundary nodes.
 */
QVISolution solve_qvi(const QVIProblem& p, const QVIOptions& opts = {});

struct QVICheck {
    double equation_violation = 0.0;        ///< max (f - F(D^2 u))^+
    double constraint_violation = 0.0;      ///< max (u - Mu)^+
    double complementarity_violation = 0.0; ///< max |min(F(D^2 u) - f, Mu - u)|
    double boundary_violation = 0.0;        ///< max |u - boundary_data| on the boundary
    std::size_t worst_equation = 0;
    std::size_t worst_constraint = 0;
    std::size_t worst_complementarity = 0;
    std::size_t worst_boundary = 0;
    bool equation_ok = true;
    bool constraint_ok = true;
    bool complementarity_ok = true;
    bool boundary_ok = true;
};

/// Each violation is measured separately; *_ok compares against tol. Mu is
/// recomputed from u itself.
QVICheck check_qvi(const GridFunction& u, const QVIProblem& p, double tol);

}  // namespace impulse
