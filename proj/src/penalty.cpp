#include "impulse/penalty.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "nodal_sweep.hpp"

namespace impulse {

std::string to_string(PenaltyKind k) {
    return k == PenaltyKind::SmoothExp ? "SmoothExp" : "PiecewiseLinear";
}

PenaltyKind penalty_kind_from_string(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "smoothexp") return PenaltyKind::SmoothExp;
    if (l == "piecewiselinear") return PenaltyKind::PiecewiseLinear;
    throw std::invalid_argument("unknown penalty kind '" + s + "' (expected SmoothExp or PiecewiseLinear)");
}

void PenaltyFamily::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("penalty: epsilon must lie in (0, 1)");
    if (cap_N && !(*cap_N > 0.0)) throw std::invalid_argument("penalty: cap_N must be positive");
}

namespace {
// exp(700) is close to the largest finite double exponent we want to see.
constexpr double kMaxExponent = 700.0;

double raw_beta(const PenaltyFamily& fam, double t) {
    if (fam.kind == PenaltyKind::PiecewiseLinear) return t < 0.0 ? t / (fam.epsilon * fam.epsilon) : 0.0;
    return -std::exp(std::min(-t / fam.epsilon, kMaxExponent));
}
}  // namespace

double beta(const PenaltyFamily& fam, double t) {
    const double b = raw_beta(fam, t);
    if (fam.cap_N) return std::max(std::min(b, *fam.cap_N), -*fam.cap_N);
    return b;
}

double beta_derivative(const PenaltyFamily& fam, double t) {
    if (fam.cap_N) {
        const double b = raw_beta(fam, t);
        if (b < -*fam.cap_N || b > *fam.cap_N) return 0.0;
    }
    if (fam.kind == PenaltyKind::PiecewiseLinear) return t < 0.0 ? 1.0 / (fam.epsilon * fam.epsilon) : 0.0;
    if (-t / fam.epsilon > kMaxExponent) return 0.0;
    return std::exp(-t / fam.epsilon) / fam.epsilon;
}

PenaltyConditions conditions_of(PenaltyKind kind) {
    if (kind == PenaltyKind::SmoothExp) return {true, true, true, true, true, true};
    // t/eps^2 on t < 0, 0 after: flat on t >= 0 and kinked at 0.
    return {false, false, true, true, true, true};
}

MollifiedObstacle mollify_obstacle(const GridFunction& phi, double delta, double C) {
    const Grid& g = phi.grid();
    if (delta < g.h() * (1.0 - 1e-12)) throw std::invalid_argument("mollify_obstacle: delta must be >= h");
    const int R = static_cast<int>(std::floor(delta / g.h() + 1e-12));
    const int R1 = g.dim() == 2 ? R : 0;

    struct Tap {
        int d0, d1;
        double w;
    };
    std::vector<Tap> taps;
    for (int d1 = -R1; d1 <= R1; ++d1) {
        for (int d0 = -R; d0 <= R; ++d0) {
            const double r2 = (static_cast<double>(d0) * d0 + static_cast<double>(d1) * d1) * g.h() * g.h();
            const double q = 1.0 - r2 / (delta * delta);
            if (q <= 0.0) continue;
            taps.push_back({d0, d1, q * q * q * q});
        }
    }

    const auto lifted = [&](std::size_t n) {
        const Point x = g.coords(n);
        return 0.5 * C * (x[0] * x[0] + x[1] * x[1]);
    };

    GridFunction out(phi.grid_ptr());
    for (std::size_t n = 0; n < g.size(); ++n) {
        double num = 0.0, den = 0.0;
        for (const Tap& t : taps) {
            const auto m = g.offset(n, {t.d0, t.d1});
            if (!m) continue;
            num += t.w * (phi[*m] + lifted(*m));
            den += t.w;
        }
        out[n] = num / den - lifted(n);
    }
    return {std::move(out), delta, C};
}

Solution solve_penalized(const OperatorSpec& spec, const GridFunction& phi, const PenaltyFamily& fam,
                         const GridFunction& f, const GridFunction& boundary_data, const SolverOptions& opts,
                         const GridFunction* initial) {
    const Grid& g = phi.grid();
    require_same_grid(g, f.grid(), "solve_penalized (f)");
    require_same_grid(g, boundary_data.grid(), "solve_penalized (boundary data)");
    spec.validate(g.dim());
    fam.validate();
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (g.is_boundary(n) && !(phi[n] < boundary_data[n])) {
            throw std::invalid_argument("solve_penalized: obstacle must lie strictly below the boundary data (node " +
                                        std::to_string(n) + ")");
        }
    }
    GridFunction u = initial ? *initial : boundary_data;
    require_same_grid(u.grid(), g, "solve_penalized (initial)");

    detail::SweepProblem p;
    p.spec = &spec;
    p.f = &f;
    p.boundary_data = &boundary_data;
    p.penalty = &fam;
    p.penalty_obstacle = &phi;
    SolveReport rep = detail::run_sweeps(p, u, opts);
    return {std::move(u), rep};
}

std::array<double, 3> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: abscissae are all equal");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return {slope, intercept, r2};
}

DecayReport epsilon_sweep(const OperatorSpec& spec, const GridFunction& phi, PenaltyKind kind,
                          const std::vector<double>& eps_list, double alpha, const SweepOptions& opts) {
    if (eps_list.size() < 4) throw std::invalid_argument("epsilon_sweep: at least four epsilons are required");
    const double ratio = eps_list[1] / eps_list[0];
    for (std::size_t i = 1; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0) || std::abs(eps_list[i] / eps_list[i - 1] - ratio) > 1e-6 * std::abs(ratio)) {
            throw std::invalid_argument("epsilon_sweep: epsilons must form a geometric sequence");
        }
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("epsilon_sweep: alpha must lie in (0, 1)");

    const Grid& g = phi.grid();
    const GridFunction zero(phi.grid_ptr());
    const double margin = opts.interior_fraction * g.diameter();

    DecayReport rep;
    rep.alpha = alpha;
    rep.points.reserve(eps_list.size());
    std::vector<double> lx, ly;
    const GridFunction* warm = nullptr;
    for (double eps : eps_list) {
        DecayPoint pt;
        pt.epsilon = eps;
        pt.u = zero;
        if (!(eps > 2.0 * g.h())) {
            pt.resolved = false;
            rep.points.push_back(std::move(pt));
            continue;
        }
        const PenaltyFamily fam{kind, eps, opts.cap_N};
        Solution sol = solve_penalized(spec, phi, fam, zero, zero, opts.solver, warm);
        pt.iterations = sol.report.iterations;
        pt.converged = sol.report.converged;
        pt.u = std::move(sol.u);
        pt.seminorm = holder_seminorm(hessian_field(pt.u, margin), alpha, opts.sample_budget, opts.seed).value;

        double bmax = 0.0;
        double qmin = std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < g.size(); ++n) {
            if (g.is_boundary(n)) continue;
            bmax = std::max(bmax, std::abs(beta(fam, pt.u[n] - phi[n])));
            const SymMat H = discrete_hessian(pt.u, n);
            qmin = std::min(qmin, H.xx);
            if (g.dim() == 2) qmin = std::min(qmin, H.yy);
        }
        pt.max_abs_beta = bmax;
        pt.min_second_quotient = qmin;
        rep.points.push_back(std::move(pt));
        warm = &rep.points.back().u;
    }
    std::size_t resolved = 0;
    for (const DecayPoint& p : rep.points) {
        resolved += p.resolved;
        if (!p.resolved || !(p.seminorm > 0.0)) continue;
        lx.push_back(std::log(p.epsilon));
        ly.push_back(std::log(p.seminorm));
    }
    if (resolved < 2) throw std::invalid_argument("epsilon_sweep: fewer than two resolvable epsilons");
    // Identically vanishing seminorms do not depend on epsilon.
    if (lx.empty()) {
        rep.r2 = 1.0;
        return rep;
    }
    if (lx.size() < 2) throw std::invalid_argument("epsilon_sweep: fewer than two positive seminorms");
    const auto fit = fit_line(lx, ly);
    rep.slope = fit[0];
    rep.intercept = fit[1];
    rep.r2 = fit[2];
    return rep;
}

}  // namespace impulse
