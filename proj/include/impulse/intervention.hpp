#pragma once

#include <limits>

#include "impulse/grid.hpp"

namespace impulse {

/**
 * Switching cost phi of an impulse. phi must be strictly positive and
 * non-increasing along every +e_i direction; both are checked at
 * construction. The semiconcavity modulus is omega(r) = C r^{1+s}.
 */
class CostFunction {
public:
    CostFunction(GridFunction phi, double semiconcavity_constant = 0.0, double modulus_exponent = 1.0);

    const GridFunction& phi() const { return phi_; }
    double semiconcavity_constant() const { return semiconcavity_constant_; }
    double modulus_exponent() const { return modulus_exponent_; }

private:
    GridFunction phi_;
    double semiconcavity_constant_;
    double modulus_exponent_;
};

/// m(x) = min of u over nodes y >= x componentwise (y = x included), by one
/// reverse-lexicographic sweep.
GridFunction cone_min(const GridFunction& u);

/// Mu = phi + cone_min(u).
GridFunction intervention_operator(const GridFunction& u, const CostFunction& cost);

/// Nodes y >= x with u(y) <= cone_min(u)(x) + tol. Ties are all kept.
NodeSet argmin_set(const GridFunction& u, std::size_t x, double tol);

/// 10 h^2 ||u||_inf.
double default_contact_tol(const GridFunction& u);

struct Separation {
    /// min over contact nodes x0 of dist(argmin_set(u, x0), contact set);
    /// +infinity when there is no contact node.
    double value = std::numeric_limits<double>::infinity();
    bool empty_contact = true;
    std::size_t contact_nodes = 0;
    std::size_t witness_contact = 0;  ///< x0 achieving the minimum
    std::size_t witness_argmin = 0;   ///< node of the argmin set nearest to the contact set
};

/// Contact nodes are interior nodes with Mu - u <= contact_tol.
Separation separation_delta(const GridFunction& u, const CostFunction& cost, double contact_tol);

}  // namespace impulse
