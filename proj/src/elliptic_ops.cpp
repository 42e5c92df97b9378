#include "impulse/elliptic_ops.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace impulse {

std::array<double, 2> SymMat::eigenvalues(int dim) const {
    if (dim == 1) return {xx, xx};
    const double mean = 0.5 * (xx + yy);
    const double rad = std::hypot(0.5 * (xx - yy), xy);
    return {mean - rad, mean + rad};
}

double SymMat::norm(int dim) const {
    const auto e = eigenvalues(dim);
    return std::max(std::abs(e[0]), std::abs(e[1]));
}

double trace_product(const SymMat& a, const SymMat& m, int dim) {
    if (dim == 1) return a.xx * m.xx;
    return a.xx * m.xx + 2.0 * a.xy * m.xy + a.yy * m.yy;
}

std::string to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::Laplace: return "Laplace";
        case OperatorKind::PucciPlus: return "PucciPlus";
        case OperatorKind::PucciMinus: return "PucciMinus";
        case OperatorKind::BellmanMin: return "BellmanMin";
        case OperatorKind::BellmanMax: return "BellmanMax";
    }
    return "?";
}

namespace {
std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}
}  // namespace

OperatorKind operator_kind_from_string(const std::string& s) {
    const std::string l = lower(s);
    for (auto k : {OperatorKind::Laplace, OperatorKind::PucciPlus, OperatorKind::PucciMinus,
                   OperatorKind::BellmanMin, OperatorKind::BellmanMax}) {
        if (lower(to_string(k)) == l) return k;
    }
    throw std::invalid_argument("unknown operator kind '" + s +
                                "' (expected Laplace, PucciPlus, PucciMinus, BellmanMin or BellmanMax)");
}

std::string to_string(ObstacleSide s) { return s == ObstacleSide::Lower ? "lower" : "upper"; }

ObstacleSide obstacle_side_from_string(const std::string& s) {
    const std::string l = lower(s);
    if (l == "lower") return ObstacleSide::Lower;
    if (l == "upper") return ObstacleSide::Upper;
    throw std::invalid_argument("unknown obstacle side '" + s + "' (expected lower or upper)");
}

void OperatorSpec::validate(int dim) const {
    if (!(lambda > 0.0) || !(lambda <= Lambda) || !std::isfinite(Lambda)) {
        throw std::invalid_argument("operator: ellipticity constants must satisfy 0 < lambda <= Lambda");
    }
    if (kind == OperatorKind::BellmanMin || kind == OperatorKind::BellmanMax) {
        if (family.empty()) throw std::invalid_argument("operator: Bellman family is empty");
        constexpr double slack = 1e-12;
        for (const SymMat& a : family) {
            const auto e = a.eigenvalues(dim);
            if (e[0] < lambda * (1 - slack) || e[1] > Lambda * (1 + slack)) {
                throw std::invalid_argument("operator: Bellman coefficient spectrum outside [lambda, Lambda]");
            }
        }
    }
}

double OperatorSpec::evaluate(const SymMat& m, int dim) const {
    switch (kind) {
        case OperatorKind::Laplace:
            return m.trace(dim);
        case OperatorKind::PucciPlus:
        case OperatorKind::PucciMinus: {
            const auto e = m.eigenvalues(dim);
            const double up = kind == OperatorKind::PucciPlus ? Lambda : lambda;
            const double down = kind == OperatorKind::PucciPlus ? lambda : Lambda;
            double v = 0.0;
            for (int i = 0; i < dim; ++i) v += e[i] > 0.0 ? up * e[i] : down * e[i];
            return v;
        }
        case OperatorKind::BellmanMin:
        case OperatorKind::BellmanMax: {
            if (family.empty()) throw std::invalid_argument("operator: Bellman family is empty");
            double v = trace_product(family.front(), m, dim);
            for (std::size_t g = 1; g < family.size(); ++g) {
                const double t = trace_product(family[g], m, dim);
                v = kind == OperatorKind::BellmanMin ? std::min(v, t) : std::max(v, t);
            }
            return v;
        }
    }
    return 0.0;
}

OperatorSpec OperatorSpec::dual() const {
    OperatorSpec d = *this;
    switch (kind) {
        case OperatorKind::Laplace: break;
        case OperatorKind::PucciPlus: d.kind = OperatorKind::PucciMinus; break;
        case OperatorKind::PucciMinus: d.kind = OperatorKind::PucciPlus; break;
        case OperatorKind::BellmanMin: d.kind = OperatorKind::BellmanMax; break;
        case OperatorKind::BellmanMax: d.kind = OperatorKind::BellmanMin; break;
    }
    return d;
}

SymMat discrete_hessian(const GridFunction& u, std::size_t node) {
    const Grid& g = u.grid();
    if (g.is_boundary(node)) {
        throw std::invalid_argument("discrete_hessian: node " + std::to_string(node) + " lacks stencil support");
    }
    const double h2 = g.h() * g.h();
    const auto at = [&](int d0, int d1) { return u[*g.offset(node, {d0, d1})]; };
    const double c = u[node];
    SymMat m;
    m.xx = (at(1, 0) + at(-1, 0) - 2.0 * c) / h2;
    if (g.dim() == 2) {
        m.yy = (at(0, 1) + at(0, -1) - 2.0 * c) / h2;
        m.xy = (at(1, 1) + at(-1, -1) - at(1, -1) - at(-1, 1)) / (4.0 * h2);
    }
    return m;
}

GridFunction apply_operator(const OperatorSpec& spec, const GridFunction& u) {
    const Grid& g = u.grid();
    spec.validate(g.dim());
    if (g.interior_count() == 0) throw std::invalid_argument("apply_operator: grid has no interior nodes");
    GridFunction out(u.grid_ptr());
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (g.is_boundary(n)) continue;
        out[n] = spec.evaluate(discrete_hessian(u, n), g.dim());
    }
    return out;
}

GridFunction complementarity_residual(const OperatorSpec& spec, const GridFunction& u,
                                      const GridFunction& obstacle, const GridFunction& f,
                                      ObstacleSide side) {
    require_same_grid(u.grid(), obstacle.grid(), "complementarity_residual");
    require_same_grid(u.grid(), f.grid(), "complementarity_residual");
    const GridFunction Fu = apply_operator(spec, u);
    const Grid& g = u.grid();
    GridFunction r(u.grid_ptr());
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (g.is_boundary(n)) continue;
        r[n] = side == ObstacleSide::Lower ? std::min(f[n] - Fu[n], u[n] - obstacle[n])
                                           : std::min(Fu[n] - f[n], obstacle[n] - u[n]);
    }
    return r;
}

double max_abs_interior(const GridFunction& r) {
    const Grid& g = r.grid();
    double m = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n)
        if (!g.is_boundary(n)) m = std::max(m, std::abs(r[n]));
    return m;
}

}  // namespace impulse
