#include "impulse/intervention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace impulse {

CostFunction::CostFunction(GridFunction phi, double semiconcavity_constant, double modulus_exponent)
    : phi_(std::move(phi)),
      semiconcavity_constant_(semiconcavity_constant),
      modulus_exponent_(modulus_exponent) {
    if (!(semiconcavity_constant_ >= 0.0)) throw std::invalid_argument("cost: semiconcavity constant must be >= 0");
    if (!(modulus_exponent_ > 0.0 && modulus_exponent_ <= 1.0)) {
        throw std::invalid_argument("cost: modulus exponent must lie in (0, 1]");
    }
    const Grid& g = phi_.grid();
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (!(phi_[n] > 0.0)) throw std::invalid_argument("cost: phi must be strictly positive (node " + std::to_string(n) + ")");
        for (int a = 0; a < g.dim(); ++a) {
            const auto next = g.offset(n, {a == 0 ? 1 : 0, a == 1 ? 1 : 0});
            if (next && phi_[*next] > phi_[n]) {
                throw std::invalid_argument("cost: phi must be non-increasing along the positive cone (node " +
                                            std::to_string(n) + ")");
            }
        }
    }
}

GridFunction cone_min(const GridFunction& u) {
    const Grid& g = u.grid();
    GridFunction m = u;
    const std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(g.count(0));
    for (std::size_t k = g.size(); k-- > 0;) {
        const auto [i0, i1] = g.index(k);
        if (i0 + 1 < g.count(0)) m[k] = std::min(m[k], m[k + sx]);
        if (g.dim() == 2 && i1 + 1 < g.count(1)) m[k] = std::min(m[k], m[k + sy]);
    }
    return m;
}

GridFunction intervention_operator(const GridFunction& u, const CostFunction& cost) {
    require_same_grid(u.grid(), cost.phi().grid(), "intervention_operator");
    return cost.phi() + cone_min(u);
}

NodeSet argmin_set(const GridFunction& u, std::size_t x, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("argmin_set: tol must be >= 0");
    const Grid& g = u.grid();
    const auto ix = g.index(x);
    double m = u[x];
    for (int i1 = ix[1]; i1 < g.count(1); ++i1)
        for (int i0 = ix[0]; i0 < g.count(0); ++i0) m = std::min(m, u[g.node(i0, i1)]);
    std::vector<std::size_t> out;
    for (int i1 = ix[1]; i1 < g.count(1); ++i1)
        for (int i0 = ix[0]; i0 < g.count(0); ++i0)
            if (u[g.node(i0, i1)] <= m + tol) out.push_back(g.node(i0, i1));
    return NodeSet(u.grid_ptr(), std::move(out));
}

double default_contact_tol(const GridFunction& u) {
    const double h = u.grid().h();
    return 10.0 * h * h * u.max_abs();
}

Separation separation_delta(const GridFunction& u, const CostFunction& cost, double contact_tol) {
    const Grid& g = u.grid();
    const GridFunction Mu = intervention_operator(u, cost);
    std::vector<std::size_t> contact;
    for (std::size_t n = 0; n < g.size(); ++n)
        if (!g.is_boundary(n) && Mu[n] - u[n] <= contact_tol) contact.push_back(n);

    Separation out;
    out.contact_nodes = contact.size();
    if (contact.empty()) return out;
    out.empty_contact = false;

    const NodeSet cset(u.grid_ptr(), contact);
    const GridFunction dist = distance_to_set(cset);
    for (std::size_t x0 : contact) {
        const NodeSet sigma = argmin_set(u, x0, contact_tol);
        for (std::size_t y : sigma) {
            if (dist[y] < out.value) {
                out.value = dist[y];
                out.witness_contact = x0;
                out.witness_argmin = y;
            }
        }
    }
    return out;
}

}  // namespace impulse
