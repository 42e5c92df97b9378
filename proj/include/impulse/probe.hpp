#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impulse/elliptic_ops.hpp"
#include "impulse/grid.hpp"

namespace impulse {

/// omega(r) = constant * r^(1 + exponent); exponent 1 is the quadratic modulus.
struct ModulusFamily {
    double constant = 1.0;
    double exponent = 1.0;

    void validate() const;
    double operator()(double r) const;
    bool operator==(const ModulusFamily&) const = default;
};

struct ContactSet {
    NodeSet nodes;
    double tol = 0.0;
    NodeSet free_boundary;  ///< contact nodes with at least one non-contact axis neighbour
};

struct Metric {
    double value = 0.0;
    std::vector<std::size_t> witness;
};

/// One measured sample: nodes involved, a length scale, and the measured ratio.
struct ProbeSample {
    std::size_t a = 0;
    std::size_t b = 0;
    double scale = 0.0;
    double value = 0.0;
};

struct ProbeReport {
    std::string probe;
    std::map<std::string, Metric> metrics;
    std::vector<ProbeSample> samples;
    std::size_t skipped = 0;

    double operator[](const std::string& name) const { return metrics.at(name).value; }
};

enum class Direction { Axis0, Axis1, Diagonal, AntiDiagonal };

/// Directions available on a grid of the given dimension.
std::vector<Direction> directions(int dim);

/// u(x + k e) + u(x - k e) - 2 u(x) with e a unit index step (diagonals step
/// both indices). Throws std::out_of_range if an offset leaves the grid.
double second_increment(const GridFunction& u, std::size_t x, Direction e, int k);

/// Physical length of k steps in direction e.
double step_length(const Grid& g, Direction e, int k);

/// Contact nodes {|u - obstacle| <= tol} and their free boundary.
ContactSet extract_contact_set(const GridFunction& u, const GridFunction& obstacle, ObstacleSide side, double tol);

/// 10 h^2 (1 + ||u||_inf).
double default_probe_tol(const GridFunction& u);

struct GrowthOptions {
    /// Constant C used when mollifying the obstacle for the slope p. Defaults
    /// to the modulus constant.
    std::optional<double> semiconvexity_constant;
    /// Mollifier radius in units of h.
    double mollifier_steps = 2.0;
    /// Samples with rho below this many h are skipped.
    double min_rho_steps = 2.0;
};

/// Slope p of the linear part L_{x0}: centred gradient of the mollified obstacle.
std::vector<std::array<double, 2>> obstacle_slopes(const GridFunction& obstacle, double C, double delta);

/**
 * Growth away from the free boundary for the lower obstacle orientation.
 * For every interior non-contact node x1 with nearest contact node x0 at
 * distance rho >= min_rho_steps*h:
 *   K_hat = max (u(x1) - L_{x0}(x1)) / omega(2 rho)
 *   L_hat = max (u(x1) - u(x0)) / rho
 * with L_{x0}(x) = obstacle(x0) + <p, x - x0>. Throws if the contact set is empty.
 */
ProbeReport growth_constant(const GridFunction& u, const GridFunction& obstacle, const ContactSet& contact,
                            const ModulusFamily& modulus, const GrowthOptions& opts = {});

/**
 * max over ordered contact pairs (x0, x1) of (u(x1) - L_{x0}(x1)) / omega(|x1 - x0|).
 * All pairs when there are at most 2000 contact nodes, otherwise a seeded
 * subsample stratified by distance decade. Throws with fewer than 2 contact nodes.
 */
ProbeReport contact_oscillation(const GridFunction& u, const GridFunction& obstacle, const ContactSet& contact,
                                const ModulusFamily& modulus, const GrowthOptions& opts = {},
                                std::uint64_t seed = 0);

/**
 * Second increments normalised by |k h e|^(1 + exponent) over the region,
 * every direction, and every step k. Reports the overall maximum C_hat
 * (semiconcavity) and minimum c_hat (semiconvexity), and the same per step
 * as C_hat_k<k> / c_hat_k<k>. Nodes whose offsets leave the grid are skipped.
 */
ProbeReport semiconcavity_modulus(const GridFunction& u, const NodeSet& region, const std::vector<int>& steps,
                                  double exponent = 1.0);

/// Hessian samples on a grid; `valid` marks nodes that carry a value.
struct HessianField {
    GridPtr grid;
    std::vector<SymMat> values;
    std::vector<unsigned char> valid;
};

/// Discrete Hessian at interior nodes whose distance to the boundary is at
/// least `margin` (physical units).
HessianField hessian_field(const GridFunction& u, double margin = 0.0);

struct SeminormResult {
    double value = 0.0;
    std::size_t witness_a = 0;
    std::size_t witness_b = 0;
    std::size_t pairs = 0;
};

/**
 * max ||H(x) - H(y)||_max / |x - y|^alpha over sampled pairs of valid nodes:
 * every pair within 8h, plus long-range pairs. Long-range pairs are
 * enumerated exhaustively when there are at most `sample_budget` of them,
 * otherwise drawn uniformly with a generator seeded by `seed`.
 */
SeminormResult holder_seminorm(const HessianField& H, double alpha, std::size_t sample_budget = 200000,
                               std::uint64_t seed = 0);

}  // namespace impulse
