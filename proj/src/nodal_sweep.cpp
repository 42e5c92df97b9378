#include "nodal_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace impulse::detail {

namespace {

// F(m0 - s I) with s = 2t/h^2, and dF/dt (right derivative at kinks).
double operator_at(const OperatorSpec& spec, int dim, double h2, const SymMat& m0, double t, double& dF) {
    const double s = 2.0 * t / h2;
    SymMat m = m0;
    m.xx -= s;
    if (dim == 2) m.yy -= s;
    switch (spec.kind) {
        case OperatorKind::Laplace:
            dF = -2.0 * dim / h2;
            return m.trace(dim);
        case OperatorKind::PucciPlus:
        case OperatorKind::PucciMinus: {
            const double up = spec.kind == OperatorKind::PucciPlus ? spec.Lambda : spec.lambda;
            const double down = spec.kind == OperatorKind::PucciPlus ? spec.lambda : spec.Lambda;
            const auto e = m.eigenvalues(dim);
            double v = 0.0, c = 0.0;
            for (int i = 0; i < dim; ++i) {
                const double coef = e[i] > 0.0 ? up : down;
                v += coef * e[i];
                c += coef;
            }
            dF = -2.0 * c / h2;
            return v;
        }
        case OperatorKind::BellmanMin:
        case OperatorKind::BellmanMax: {
            const bool is_min = spec.kind == OperatorKind::BellmanMin;
            double best = 0.0, best_tr = 0.0;
            bool first = true;
            for (const SymMat& a : spec.family) {
                const double v = trace_product(a, m, dim);
                const double tr = a.trace(dim);
                const bool better = first || (is_min ? (v < best || (v == best && tr > best_tr))
                                                     : (v > best || (v == best && tr < best_tr)));
                if (better) {
                    best = v;
                    best_tr = tr;
                    first = false;
                }
            }
            dF = -2.0 * best_tr / h2;
            return best;
        }
    }
    dF = -2.0 * dim / h2;
    return 0.0;
}

double node_equation(const OperatorSpec& spec, int dim, double h2, const SymMat& m0, double f,
                     const PenaltyFamily* penalty, double phi, double t, double& dg) {
    double dF = 0.0;
    double g = operator_at(spec, dim, h2, m0, t, dF) - f;
    dg = dF;
    if (penalty) {
        g -= beta(*penalty, t - phi);
        dg -= beta_derivative(*penalty, t - phi);
    }
    return g;
}

}  // namespace

double solve_node(const OperatorSpec& spec, int dim, double h2, const SymMat& m0, double f,
                  const PenaltyFamily* penalty, double phi, double t0) {
    double d = 0.0;
    double g = node_equation(spec, dim, h2, m0, f, penalty, phi, t0, d);
    if (g == 0.0) return t0;

    // g is strictly decreasing with slope at most -s_min, which brackets the root.
    const double lam = spec.kind == OperatorKind::Laplace ? 1.0 : spec.lambda;
    const double s_min = 2.0 * dim * lam / h2;
    const double reach = std::abs(g) / s_min * (1.0 + 1e-12) + 1e-300;
    double lo = g > 0.0 ? t0 : t0 - reach;
    double hi = g > 0.0 ? t0 + reach : t0;

    double t = t0;
    double best_t = t0, best_g = std::abs(g);
    double prev_abs = std::abs(g);
    bool bisect = false;
    for (int it = 0; it < 200; ++it) {
        double next = (!bisect && d < 0.0) ? t - g / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double gn = node_equation(spec, dim, h2, m0, f, penalty, phi, next, d);
        if (std::abs(gn) < best_g) {
            best_g = std::abs(gn);
            best_t = next;
        }
        if (gn == 0.0) return next;
        if (gn > 0.0) lo = next; else hi = next;
        bisect = std::abs(gn) > 0.5 * prev_abs;
        prev_abs = std::abs(gn);
        const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
        if (std::abs(next - t) <= 1e-16 * scale || hi - lo <= 4e-16 * scale) {
            t = next;
            break;
        }
        t = next;
        g = gn;
    }
    return best_t;
}

double problem_residual(const SweepProblem& p, const GridFunction& u) {
    const Grid& grid = u.grid();
    const int dim = grid.dim();
    double res = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) {
        if (grid.is_boundary(n)) continue;
        const double F = p.spec->evaluate(discrete_hessian(u, n), dim);
        double r = F - (*p.f)[n];
        if (p.penalty) r -= beta(*p.penalty, u[n] - (*p.penalty_obstacle)[n]);
        if (p.obstacle) {
            const double slack = p.side == ObstacleSide::Lower ? u[n] - (*p.obstacle)[n] : (*p.obstacle)[n] - u[n];
            const double eq = p.side == ObstacleSide::Lower ? -r : r;
            r = std::min(eq, slack);
        }
        res = std::max(res, std::abs(r));
    }
    return res;
}

SolveReport run_sweeps(const SweepProblem& p, GridFunction& u, const SolverOptions& opts) {
    const Grid& grid = u.grid();
    const int dim = grid.dim();
    const double h2 = grid.h() * grid.h();
    const double tol = opts.tol.value_or(default_tolerance(*p.f));
    if (!(tol > 0.0)) throw std::invalid_argument("solver: tolerance must be positive");
    const double omega = relaxation_factor(opts, grid);
    const OperatorSpec& spec = *p.spec;
    const bool laplace_closed_form = spec.kind == OperatorKind::Laplace && !p.penalty;

    for (std::size_t n = 0; n < grid.size(); ++n)
        if (grid.is_boundary(n)) u[n] = (*p.boundary_data)[n];

    const std::vector<std::size_t> nodes = grid.interior_nodes();
    const std::ptrdiff_t sx = 1;
    const std::ptrdiff_t sy = grid.count(0);
    double* v = u.values().data();
    const double* fv = p.f->values().data();
    const double* obs = p.obstacle ? p.obstacle->values().data() : nullptr;
    const double* pen = p.penalty ? p.penalty_obstacle->values().data() : nullptr;

    SolveReport rep;
    const std::size_t count = nodes.size();
    // Round-off noise in the sweep grows roughly like eps * m; updates below
    // it carry no information, so the residual decides from there on.
    const double kRoundoff = 4.0 * std::numeric_limits<double>::epsilon() * std::max(grid.count(0), grid.count(1));
    constexpr int kStallSweeps = 64;
    int stalled = 0;
    double best = std::numeric_limits<double>::infinity();
    while (rep.iterations < opts.max_iter) {
        const bool forward = rep.iterations % 2 == 0;
        double sup = 0.0;
        double umax = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t n = nodes[forward ? k : count - 1 - k];
            SymMat m0;
            m0.xx = (v[n + sx] + v[n - sx]) / h2;
            if (dim == 2) {
                m0.yy = (v[n + sy] + v[n - sy]) / h2;
                m0.xy = (v[n + sx + sy] + v[n - sx - sy] - v[n + sx - sy] - v[n - sx + sy]) / (4.0 * h2);
            }
            const double old = v[n];
            double target;
            if (laplace_closed_form) {
                target = (m0.trace(dim) - fv[n]) * h2 / (2.0 * dim);
            } else {
                target = solve_node(spec, dim, h2, m0, fv[n], p.penalty, pen ? pen[n] : 0.0, old);
            }
            double next = old + omega * (target - old);
            if (obs) next = p.side == ObstacleSide::Lower ? std::max(next, obs[n]) : std::min(next, obs[n]);
            v[n] = next;
            sup = std::max(sup, std::abs(next - old));
            umax = std::max(umax, std::abs(next));
        }
        ++rep.iterations;
        rep.sup_update = sup;
        if (!std::isfinite(sup)) break;
        const double floor = kRoundoff * (1.0 + umax);
        if (sup < std::max(tol * h2, floor)) {
            rep.final_residual = problem_residual(p, u);
            if (rep.final_residual <= tol) {
                rep.converged = true;
                return rep;
            }
            if (rep.final_residual < 0.999 * best) {
                best = rep.final_residual;
                stalled = 0;
            } else if (sup <= floor && ++stalled >= kStallSweeps) {
                break;
            }
        }
    }
    rep.final_residual = std::isfinite(rep.sup_update) ? problem_residual(p, u) : std::numeric_limits<double>::infinity();
    rep.converged = rep.final_residual <= tol;
    return rep;
}

}  // namespace impulse::detail
