#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "impulse/elliptic_ops.hpp"
#include "impulse/grid.hpp"

namespace testing {

/// Small seeded generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

    impulse::SymMat matrix(double scale = 1.0) {
        return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)};
    }

    /// Symmetric matrix with eigenvalues drawn from [lo, hi].
    impulse::SymMat spd(double lo, double hi) {
        const double a = uniform(lo, hi), b = uniform(lo, hi), t = uniform(0.0, 3.14159265358979);
        const double c = std::cos(t), s = std::sin(t);
        return {a * c * c + b * s * s, (a - b) * c * s, a * s * s + b * c * c};
    }

    impulse::GridPtr grid(int max_m = 33, bool allow_1d = true) {
        if (allow_1d && coin(0.3)) return impulse::Grid::line(0.0, 1.0, integer(3, max_m));
        const int m0 = integer(3, max_m), m1 = integer(3, max_m);
        return impulse::Grid::box({0.0, 0.0}, {(m0 - 1) * 0.1, (m1 - 1) * 0.1}, {m0, m1});
    }

    impulse::GridFunction values(const impulse::GridPtr& g, double a = -1.0, double b = 1.0) {
        impulse::GridFunction u(g);
        for (std::size_t n = 0; n < g->size(); ++n) u[n] = uniform(a, b);
        return u;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline impulse::GridPtr line(double lo, double hi, int m) { return impulse::Grid::line(lo, hi, m); }
inline impulse::GridPtr square(double lo, double hi, int m) { return impulse::Grid::box({lo, lo}, {hi, hi}, {m, m}); }

}  // namespace testing
