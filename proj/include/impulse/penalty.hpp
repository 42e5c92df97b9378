#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "impulse/elliptic_ops.hpp"
#include "impulse/grid.hpp"
#include "impulse/obstacle_solver.hpp"
#include "impulse/probe.hpp"

namespace impulse {

enum class PenaltyKind {
    SmoothExp,        ///< beta(t) = -exp(-t / eps)
    PiecewiseLinear,  ///< beta(t) = t / eps^2 for t < 0, 0 otherwise
};

std::string to_string(PenaltyKind k);
PenaltyKind penalty_kind_from_string(const std::string& s);

struct PenaltyFamily {
    PenaltyKind kind = PenaltyKind::PiecewiseLinear;
    double epsilon = 0.1;
    /// Clamp to [-N, N] when set.
    std::optional<double> cap_N;

    /// Throws unless 0 < epsilon < 1 and cap_N > 0.
    void validate() const;
    bool operator==(const PenaltyFamily&) const = default;
};

double beta(const PenaltyFamily& fam, double t);
/// A one-sided derivative of beta (right derivative at kinks).
double beta_derivative(const PenaltyFamily& fam, double t);

/// Which of the structural penalization conditions a kind satisfies by construction.
struct PenaltyConditions {
    bool strictly_increasing;  ///< beta' > 0
    bool smooth;               ///< C-infinity
    bool vanishes_positive;    ///< beta -> 0 for t > 0 as eps -> 0
    bool diverges_negative;    ///< beta -> -inf for t < 0 as eps -> 0
    bool bounded_above;        ///< beta <= C (C = 0 for both kinds)
    bool concave;              ///< beta'' <= 0
};
PenaltyConditions conditions_of(PenaltyKind kind);

/**
 * Obstacle smoothed as J_delta[phi + (C/2)|x|^2] - (C/2)|x|^2, where J_delta
 * is a discrete convolution with the bump (1 - r^2/delta^2)^4 normalised
 * over the part of its support that lies inside the box.
 */
struct MollifiedObstacle {
    GridFunction phi_delta;
    double delta = 0.0;
    double semiconvexity_constant = 0.0;
};

/// Throws std::invalid_argument if delta < h.
MollifiedObstacle mollify_obstacle(const GridFunction& phi, double delta, double C);

/**
 * F(D^2 u) - beta(u - phi) = f in the interior, u = boundary_data on the
 * boundary. phi must lie strictly below the boundary data on boundary nodes
 * (phi < 0 there for zero data).
 */
Solution solve_penalized(const OperatorSpec& spec, const GridFunction& phi, const PenaltyFamily& fam,
                         const GridFunction& f, const GridFunction& boundary_data,
                         const SolverOptions& opts = {}, const GridFunction* initial = nullptr);

struct DecayPoint {
    double epsilon = 0.0;
    bool resolved = true;  ///< false when epsilon <= 2h; the point is skipped
    double seminorm = 0.0;
    long iterations = 0;
    bool converged = false;
    double max_abs_beta = 0.0;
    double min_second_quotient = 0.0;  ///< min over nodes/axes of delta^2 u / h^2
    GridFunction u;
};

struct DecayReport {
    double alpha = 0.5;
    std::vector<DecayPoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

struct SweepOptions {
    SolverOptions solver;
    std::optional<double> cap_N;
    std::size_t sample_budget = 200000;
    std::uint64_t seed = 0;
    /// Seminorm region: nodes at distance >= interior_fraction * diam from the boundary.
    double interior_fraction = 0.1;
};

/// Least-squares line through (x, y); returns {slope, intercept, r2}.
std::array<double, 3> fit_line(const std::vector<double>& x, const std::vector<double>& y);

/**
 * Solves the penalized problem for every epsilon (zero f and boundary data)
 * and fits log(seminorm) against log(epsilon). Requires at least four
 * geometrically spaced epsilons.
 */
DecayReport epsilon_sweep(const OperatorSpec& spec, const GridFunction& phi, PenaltyKind kind,
                          const std::vector<double>& eps_list, double alpha, const SweepOptions& opts = {});

}  // namespace impulse
