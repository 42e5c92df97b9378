#include "impulse/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "impulse/penalty.hpp"

namespace impulse {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::array<int, 2> step_of(Direction e) {
    switch (e) {
        case Direction::Axis0: return {1, 0};
        case Direction::Axis1: return {0, 1};
        case Direction::Diagonal: return {1, 1};
        case Direction::AntiDiagonal: return {1, -1};
    }
    return {1, 0};
}

void update_max(Metric& m, double v, std::vector<std::size_t> witness) {
    if (v > m.value) {
        m.value = v;
        m.witness = std::move(witness);
    }
}

void update_min(Metric& m, double v, std::vector<std::size_t> witness) {
    if (v < m.value) {
        m.value = v;
        m.witness = std::move(witness);
    }
}

// Replace untouched extremum sentinels by 0 so every reported metric is finite.
void finalize(ProbeReport& r) {
    for (auto& [name, m] : r.metrics)
        if (!std::isfinite(m.value)) m.value = 0.0;
}

double linear_part(const GridFunction& obstacle, const std::array<double, 2>& p, std::size_t x0, std::size_t x) {
    const Grid& g = obstacle.grid();
    const Point a = g.coords(x0);
    const Point b = g.coords(x);
    return obstacle[x0] + p[0] * (b[0] - a[0]) + p[1] * (b[1] - a[1]);
}
}  // namespace

void ModulusFamily::validate() const {
    if (!(constant >= 0.0)) throw std::invalid_argument("modulus: constant must be >= 0");
    if (!(exponent > 0.0 && exponent <= 1.0)) throw std::invalid_argument("modulus: exponent must lie in (0, 1]");
}

double ModulusFamily::operator()(double r) const { return constant * std::pow(r, 1.0 + exponent); }

std::vector<Direction> directions(int dim) {
    if (dim == 1) return {Direction::Axis0};
    return {Direction::Axis0, Direction::Axis1, Direction::Diagonal, Direction::AntiDiagonal};
}

double second_increment(const GridFunction& u, std::size_t x, Direction e, int k) {
    const Grid& g = u.grid();
    auto s = step_of(e);
    if (g.dim() == 1 && s[1] != 0) throw std::invalid_argument("second_increment: direction not available in 1D");
    const auto fwd = g.offset(x, {k * s[0], k * s[1]});
    const auto bwd = g.offset(x, {-k * s[0], -k * s[1]});
    if (!fwd || !bwd) throw std::out_of_range("second_increment: offset leaves the grid");
    return u[*fwd] + u[*bwd] - 2.0 * u[x];
}

double step_length(const Grid& g, Direction e, int k) {
    const bool diag = e == Direction::Diagonal || e == Direction::AntiDiagonal;
    return k * g.h() * (diag ? std::sqrt(2.0) : 1.0);
}

ContactSet extract_contact_set(const GridFunction& u, const GridFunction& obstacle, ObstacleSide side, double tol) {
    (void)side;  // |u - obstacle| is orientation independent
    require_same_grid(u.grid(), obstacle.grid(), "extract_contact_set");
    const Grid& g = u.grid();
    std::vector<unsigned char> in(g.size(), 0);
    std::vector<std::size_t> nodes;
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (std::abs(u[n] - obstacle[n]) <= tol) {
            in[n] = 1;
            nodes.push_back(n);
        }
    }
    std::vector<std::size_t> fb;
    for (std::size_t n : nodes) {
        for (int a = 0; a < g.dim(); ++a) {
            bool hit = false;
            for (int sgn : {-1, 1}) {
                const auto m = g.offset(n, {a == 0 ? sgn : 0, a == 1 ? sgn : 0});
                if (m && !in[*m]) hit = true;
            }
            if (hit) {
                fb.push_back(n);
                break;
            }
        }
    }
    return {NodeSet(u.grid_ptr(), std::move(nodes)), tol, NodeSet(u.grid_ptr(), std::move(fb))};
}

double default_probe_tol(const GridFunction& u) {
    const double h = u.grid().h();
    return 10.0 * h * h * (1.0 + u.max_abs());
}

std::vector<std::array<double, 2>> obstacle_slopes(const GridFunction& obstacle, double C, double delta) {
    const GridFunction sm = mollify_obstacle(obstacle, delta, C).phi_delta;
    const Grid& g = sm.grid();
    std::vector<std::array<double, 2>> p(g.size(), {0.0, 0.0});
    for (std::size_t n = 0; n < g.size(); ++n) {
        for (int a = 0; a < g.dim(); ++a) {
            const std::array<int, 2> e{a == 0 ? 1 : 0, a == 1 ? 1 : 0};
            const auto f = g.offset(n, e);
            const auto b = g.offset(n, {-e[0], -e[1]});
            if (f && b) p[n][a] = (sm[*f] - sm[*b]) / (2.0 * g.h());
            else if (f) p[n][a] = (sm[*f] - sm[n]) / g.h();
            else if (b) p[n][a] = (sm[n] - sm[*b]) / g.h();
        }
    }
    return p;
}

ProbeReport growth_constant(const GridFunction& u, const GridFunction& obstacle, const ContactSet& contact,
                            const ModulusFamily& modulus, const GrowthOptions& opts) {
    modulus.validate();
    require_same_grid(u.grid(), obstacle.grid(), "growth_constant");
    if (contact.nodes.empty()) throw std::invalid_argument("growth_constant: contact set is empty");
    const Grid& g = u.grid();
    const double C = opts.semiconvexity_constant.value_or(modulus.constant);
    const auto slopes = obstacle_slopes(obstacle, C, opts.mollifier_steps * g.h());
    const NearestField nf = nearest_in_set(contact.nodes);
    const double min_rho = opts.min_rho_steps * g.h() * (1.0 - 1e-12);

    ProbeReport r;
    r.probe = "growth_constant";
    Metric K{kNegInf, {}}, L{kNegInf, {}};
    for (std::size_t x1 = 0; x1 < g.size(); ++x1) {
        if (g.is_boundary(x1) || contact.nodes.contains(x1)) continue;
        const std::size_t x0 = nf.nearest[x1];
        const double rho = nf.distance[x1];
        if (rho < min_rho) {
            ++r.skipped;
            continue;
        }
        const double w = u[x1] - linear_part(obstacle, slopes[x0], x0, x1);
        const double k = w / modulus(2.0 * rho);
        update_max(K, k, {x1, x0});
        update_max(L, (u[x1] - u[x0]) / rho, {x1, x0});
        r.samples.push_back({x1, x0, rho, k});
    }
    r.metrics["K_hat"] = K;
    r.metrics["L_hat"] = L;
    r.metrics["samples"] = {static_cast<double>(r.samples.size()), {}};
    finalize(r);
    return r;
}

ProbeReport contact_oscillation(const GridFunction& u, const GridFunction& obstacle, const ContactSet& contact,
                                const ModulusFamily& modulus, const GrowthOptions& opts, std::uint64_t seed) {
    modulus.validate();
    require_same_grid(u.grid(), obstacle.grid(), "contact_oscillation");
    const auto& nodes = contact.nodes.nodes();
    if (nodes.size() < 2) throw std::invalid_argument("contact_oscillation: need at least two contact nodes");
    const Grid& g = u.grid();
    const double C = opts.semiconvexity_constant.value_or(modulus.constant);
    const auto slopes = obstacle_slopes(obstacle, C, opts.mollifier_steps * g.h());

    ProbeReport r;
    r.probe = "contact_oscillation";
    Metric R{kNegInf, {}};
    const auto pair = [&](std::size_t x0, std::size_t x1) {
        const double d = g.distance(x0, x1);
        const double v = (u[x1] - linear_part(obstacle, slopes[x0], x0, x1)) / modulus(d);
        update_max(R, v, {x1, x0});
        r.samples.push_back({x1, x0, d, v});
    };

    constexpr std::size_t kExhaustive = 2000;
    if (nodes.size() <= kExhaustive) {
        for (std::size_t x0 : nodes)
            for (std::size_t x1 : nodes)
                if (x0 != x1) pair(x0, x1);
    } else {
        // Strided anchors; partners drawn per distance decade (h, 10h, 100h, ...).
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
        const std::size_t stride = (nodes.size() + kExhaustive - 1) / kExhaustive;
        const int decades = 1 + static_cast<int>(std::ceil(std::log10(g.diameter() / g.h())));
        constexpr int kPerDecade = 4;
        constexpr int kTries = 64;
        for (std::size_t i = 0; i < nodes.size(); i += stride) {
            const std::size_t x0 = nodes[i];
            std::vector<int> filled(decades, 0);
            for (int t = 0; t < kTries; ++t) {
                const std::size_t x1 = nodes[pick(rng)];
                if (x1 == x0) continue;
                const int dec = std::clamp(static_cast<int>(std::floor(std::log10(g.distance(x0, x1) / g.h()))), 0,
                                           decades - 1);
                if (filled[dec] >= kPerDecade) continue;
                ++filled[dec];
                pair(x0, x1);
            }
        }
    }
    r.metrics["ratio"] = R;
    r.metrics["samples"] = {static_cast<double>(r.samples.size()), {}};
    finalize(r);
    return r;
}

ProbeReport semiconcavity_modulus(const GridFunction& u, const NodeSet& region, const std::vector<int>& steps,
                                  double exponent) {
    if (region.empty()) throw std::invalid_argument("semiconcavity_modulus: region is empty");
    if (steps.empty()) throw std::invalid_argument("semiconcavity_modulus: no steps given");
    for (int k : steps)
        if (k < 1) throw std::invalid_argument("semiconcavity_modulus: steps must be >= 1");
    if (!(exponent > 0.0 && exponent <= 1.0)) throw std::invalid_argument("semiconcavity_modulus: exponent must lie in (0, 1]");
    require_same_grid(u.grid(), region.grid(), "semiconcavity_modulus");
    const Grid& g = u.grid();

    ProbeReport r;
    r.probe = "semiconcavity_modulus";
    Metric Cmax{kNegInf, {}}, Cmin{std::numeric_limits<double>::infinity(), {}};
    for (int k : steps) {
        Metric kmax{kNegInf, {}}, kmin{std::numeric_limits<double>::infinity(), {}};
        for (std::size_t x : region) {
            for (Direction e : directions(g.dim())) {
                const auto s = step_of(e);
                if (!g.offset(x, {k * s[0], k * s[1]}) || !g.offset(x, {-k * s[0], -k * s[1]})) {
                    ++r.skipped;
                    continue;
                }
                const double len = step_length(g, e, k);
                const double q = second_increment(u, x, e, k) / std::pow(len, 1.0 + exponent);
                update_max(kmax, q, {x, static_cast<std::size_t>(k)});
                update_min(kmin, q, {x, static_cast<std::size_t>(k)});
                r.samples.push_back({x, static_cast<std::size_t>(e), len, q});
            }
        }
        update_max(Cmax, kmax.value, kmax.witness);
        update_min(Cmin, kmin.value, kmin.witness);
        r.metrics["C_hat_k" + std::to_string(k)] = kmax;
        r.metrics["c_hat_k" + std::to_string(k)] = kmin;
    }
    r.metrics["C_hat"] = Cmax;
    r.metrics["c_hat"] = Cmin;
    finalize(r);
    return r;
}

HessianField hessian_field(const GridFunction& u, double margin) {
    const Grid& g = u.grid();
    HessianField H{u.grid_ptr(), std::vector<SymMat>(g.size()), std::vector<unsigned char>(g.size(), 0)};
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (g.is_boundary(n)) continue;
        const Point x = g.coords(n);
        double d = std::numeric_limits<double>::infinity();
        for (int a = 0; a < g.dim(); ++a) d = std::min({d, x[a] - g.lo(a), g.hi(a) - x[a]});
        if (d < margin * (1.0 - 1e-12)) continue;
        H.values[n] = discrete_hessian(u, n);
        H.valid[n] = 1;
    }
    return H;
}

namespace {
double max_entry_diff(const SymMat& a, const SymMat& b) {
    return std::max({std::abs(a.xx - b.xx), std::abs(a.xy - b.xy), std::abs(a.yy - b.yy)});
}
}  // namespace

SeminormResult holder_seminorm(const HessianField& H, double alpha, std::size_t sample_budget, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("holder_seminorm: alpha must lie in (0, 1)");
    if (sample_budget < 1000) throw std::invalid_argument("holder_seminorm: sample budget must be at least 1000");
    const Grid& g = *H.grid;
    std::vector<std::size_t> valid;
    for (std::size_t n = 0; n < g.size(); ++n)
        if (H.valid[n]) valid.push_back(n);

    SeminormResult res;
    const auto consider = [&](std::size_t a, std::size_t b) {
        const double d = g.distance(a, b);
        const double q = max_entry_diff(H.values[a], H.values[b]) / std::pow(d, alpha);
        ++res.pairs;
        if (q > res.value) {
            res.value = q;
            res.witness_a = a;
            res.witness_b = b;
        }
    };

    // Short-range pairs: index offsets within 8 steps, each unordered pair once.
    constexpr int kNear = 8;
    const int r1 = g.dim() == 2 ? kNear : 0;
    std::size_t near_pairs = 0;
    for (std::size_t a : valid) {
        for (int d1 = -r1; d1 <= r1; ++d1) {
            for (int d0 = -kNear; d0 <= kNear; ++d0) {
                if (d0 * d0 + d1 * d1 > kNear * kNear) continue;
                const auto b = g.offset(a, {d0, d1});
                if (!b || *b <= a || !H.valid[*b]) continue;
                consider(a, *b);
                ++near_pairs;
            }
        }
    }

    const std::size_t nv = valid.size();
    const std::size_t all_pairs = nv < 2 ? 0 : nv * (nv - 1) / 2;
    const std::size_t far_pairs = all_pairs - near_pairs;
    const double near_radius = kNear * g.h() * (1.0 + 1e-12);
    if (far_pairs <= sample_budget) {
        for (std::size_t i = 0; i < nv; ++i)
            for (std::size_t j = i + 1; j < nv; ++j)
                if (g.distance(valid[i], valid[j]) > near_radius) consider(valid[i], valid[j]);
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, nv - 1);
        for (std::size_t s = 0; s < sample_budget; ++s) {
            const std::size_t i = pick(rng), j = pick(rng);
            if (i == j || g.distance(valid[i], valid[j]) <= near_radius) continue;
            consider(std::min(valid[i], valid[j]), std::max(valid[i], valid[j]));
        }
    }
    return res;
}

}  // namespace impulse
