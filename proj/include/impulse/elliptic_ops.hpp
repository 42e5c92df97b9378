#pragma once

#include <array>
#include <string>
#include <vector>

#include "impulse/grid.hpp"

namespace impulse {

/// Symmetric 2x2 matrix. One-dimensional problems use only `xx`.
struct SymMat {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double trace(int dim) const { return dim == 1 ? xx : xx + yy; }
    /// Eigenvalues in ascending order (closed form); a single value in 1D.
    std::array<double, 2> eigenvalues(int dim) const;
    /// Spectral norm.
    double norm(int dim) const;

    SymMat operator+(const SymMat& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
    SymMat operator-(const SymMat& o) const { return {xx - o.xx, xy - o.xy, yy - o.yy}; }
    SymMat operator*(double c) const { return {c * xx, c * xy, c * yy}; }
    bool operator==(const SymMat&) const = default;
};

/// trace(A M) for symmetric A, M.
double trace_product(const SymMat& a, const SymMat& m, int dim);

enum class OperatorKind { Laplace, PucciPlus, PucciMinus, BellmanMin, BellmanMax };

std::string to_string(OperatorKind k);
/// Accepts the names produced by to_string (case-insensitive). Throws on unknown names.
OperatorKind operator_kind_from_string(const std::string& s);

/**
 * A fully nonlinear uniformly elliptic operator F(M).
 *
 * Pucci kinds use the extremal operators with constants lambda <= Lambda;
 * Bellman kinds take the min (concave) or max (convex) of trace(A M) over a
 * finite family of coefficient matrices with spectra in [lambda, Lambda].
 * Laplace ignores lambda/Lambda for evaluation.
 */
struct OperatorSpec {
    OperatorKind kind = OperatorKind::Laplace;
    double lambda = 1.0;
    double Lambda = 1.0;
    std::vector<SymMat> family;

    static OperatorSpec laplace() { return {}; }
    static OperatorSpec pucci_plus(double lambda, double Lambda) { return {OperatorKind::PucciPlus, lambda, Lambda, {}}; }
    static OperatorSpec pucci_minus(double lambda, double Lambda) { return {OperatorKind::PucciMinus, lambda, Lambda, {}}; }
    static OperatorSpec bellman_min(double lambda, double Lambda, std::vector<SymMat> fam) {
        return {OperatorKind::BellmanMin, lambda, Lambda, std::move(fam)};
    }
    static OperatorSpec bellman_max(double lambda, double Lambda, std::vector<SymMat> fam) {
        return {OperatorKind::BellmanMax, lambda, Lambda, std::move(fam)};
    }

    /// Throws std::invalid_argument if the constants or family violate ellipticity in `dim`.
    void validate(int dim) const;

    double evaluate(const SymMat& m, int dim) const;

    /// The operator F~(M) = -F(-M): Pucci+ <-> Pucci-, BellmanMin <-> BellmanMax.
    OperatorSpec dual() const;

    bool convex() const { return kind == OperatorKind::PucciPlus || kind == OperatorKind::BellmanMax || kind == OperatorKind::Laplace; }
    bool concave() const { return kind == OperatorKind::PucciMinus || kind == OperatorKind::BellmanMin || kind == OperatorKind::Laplace; }

    bool operator==(const OperatorSpec&) const = default;
};

/// Lower: u >= obstacle, F(D^2 u) <= f. Upper: u <= obstacle, F(D^2 u) >= f.
enum class ObstacleSide { Lower, Upper };

std::string to_string(ObstacleSide s);
ObstacleSide obstacle_side_from_string(const std::string& s);

/// Centered second differences at an interior node. Throws for boundary nodes.
SymMat discrete_hessian(const GridFunction& u, std::size_t node);

/// F(D^2 u) at interior nodes; boundary entries are set to 0 and carry no meaning.
GridFunction apply_operator(const OperatorSpec& spec, const GridFunction& u);

/**
 * Lower: min(f - F(D^2 u), u - obstacle). Upper: min(F(D^2 u) - f, obstacle - u).
 * Evaluated at interior nodes; boundary entries are 0.
 */
GridFunction complementarity_residual(const OperatorSpec& spec, const GridFunction& u,
                                      const GridFunction& obstacle, const GridFunction& f,
                                      ObstacleSide side);

/// max |r| over interior nodes.
double max_abs_interior(const GridFunction& r);

}  // namespace impulse
