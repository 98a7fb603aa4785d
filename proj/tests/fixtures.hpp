#pragma once

// Networks and models shared by the unit tests and the acceptance runner.

#include <functional>
#include <random>
#include <vector>

#include "smallgain/gain.hpp"
#include "smallgain/network.hpp"
#include "smallgain/simulate.hpp"

namespace fx {

using smallgain::CgParams;
using smallgain::GainExpr;
using smallgain::GainNetwork;
using smallgain::LinearParams;
using smallgain::Maf;
using smallgain::Vec;

inline GainNetwork linear_network(const std::vector<Vec>& k, const Maf& mu) {
    const std::size_t n = k.size();
    std::vector<std::vector<GainExpr>> g(n, std::vector<GainExpr>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (k[i][j] > 0.0) g[i][j] = GainExpr::linear(k[i][j]);
        }
    }
    return GainNetwork(g, std::vector<GainExpr>(n), std::vector<Maf>(n, mu));
}

inline GainNetwork network(std::vector<std::vector<GainExpr>> g, const Maf& mu,
                           std::vector<GainExpr> gu = {}) {
    const std::size_t n = g.size();
    if (gu.empty()) gu.resize(n);
    return GainNetwork(std::move(g), std::move(gu), std::vector<Maf>(n, mu));
}

/// Two scalar blocks x_i' = -x_i + delta x_j + u, Q = 2, epsilon = 0.5.
inline LinearParams linear_demo(double delta = 0.2, double b = 1.0) {
    LinearParams p;
    p.A = {{{-1.0}}, {{-1.0}}};
    p.Q = {{{2.0}}, {{2.0}}};
    p.Delta = {{{}, {{delta}}}, {{{delta}}, {}}};
    p.input_dim = b != 0.0 ? 1 : 0;
    if (b != 0.0) p.B = {{{b}}, {{b}}};
    p.epsilon = 0.5;
    return p;
}

/// Two neurons, t12 = t21 = 0.2, atan activation bound, b~ = id.
inline CgParams cg_demo(double t = 0.2) {
    CgParams p;
    p.T = {{0.0, t}, {t, 0.0}};
    p.activation = {GainExpr::atan(1.0), GainExpr::atan(1.0)};
    p.b_tilde = {GainExpr::linear(1.0), GainExpr::linear(1.0)};
    p.rho = GainExpr::linear(0.5);
    p.alpha_lo = {1.0, 1.0};
    p.alpha_hi = {1.2, 1.2};
    p.epsilon = 0.2;
    return p;
}

inline GainNetwork three_sum(double c = 0.25) {
    return linear_network({{0, c, c}, {c, 0, c}, {c, c, 0}}, Maf::sum());
}

// Canonical instances, one per path constructor.

inline GainNetwork canonical_bounded() {
    const GainExpr g = GainExpr::saturating(0.4);
    return network({{{}, g, g}, {g, {}, g}, {g, g, {}}}, Maf::sum());
}

inline GainNetwork canonical_irreducible() {
    const GainExpr g12 = GainExpr::sum({GainExpr::linear(0.3), GainExpr::saturating(0.2)});
    const GainExpr g21 = GainExpr::linear(0.4);
    const GainExpr g23 = GainExpr::linear(0.3);
    const GainExpr g32 = GainExpr::max({GainExpr::linear(0.2), GainExpr::atan(0.3)});
    return network({{{}, g12, {}}, {g21, {}, g23}, {{}, g32, {}}}, Maf::sum());
}

inline GainNetwork canonical_max() {
    const GainExpr g12 = GainExpr::linear(2.0);
    const GainExpr g21 = GainExpr::linear(0.3);
    const GainExpr g23 = GainExpr::power(0.5, 1.5);
    const GainExpr g32 = GainExpr::saturating(1.5);
    return network({{{}, g12, {}}, {g21, {}, g23}, {{}, g32, {}}}, Maf::max());
}

inline GainNetwork canonical_homogeneous() { return smallgain::linear_gains(linear_demo(0.2, 0.0)).net; }

inline GainNetwork canonical_mixed() {
    return network({{{}, GainExpr::linear(0.3)}, {GainExpr::saturating(0.5), {}}}, Maf::sum());
}

/// Blocks {1, 2} (a 2-cycle) and {3}, with 3 feeding 1.
inline GainNetwork canonical_reducible() {
    const GainExpr h = GainExpr::linear(0.5);
    return network({{{}, h, GainExpr::linear(0.8)}, {h, {}, {}}, {{}, {}, {}}}, Maf::sum());
}

/// Random gain trees over every leaf and combinator, coefficients spanning
/// six decades (parser round-trip).
inline GainExpr fuzz_tree(std::mt19937_64& rng, int depth = 0) {
    std::uniform_real_distribution<double> c(1e-3, 1e3);
    std::uniform_int_distribution<int> pick(0, 8);
    std::uniform_int_distribution<int> arity(2, 4);
    const int k = depth >= 4 ? pick(rng) % 5 : pick(rng);
    switch (k) {
        case 0: return GainExpr::linear(c(rng));
        case 1: return GainExpr::power(c(rng), c(rng) / 100.0);
        case 2: return GainExpr::saturating(c(rng));
        case 3: return GainExpr::atan(c(rng));
        case 4: return GainExpr::power(c(rng), 0.5);
        case 5:
        case 6: {
            std::vector<GainExpr> ch;
            for (int a = arity(rng); a > 0; --a) ch.push_back(fuzz_tree(rng, depth + 1));
            return k == 5 ? GainExpr::sum(std::move(ch)) : GainExpr::max(std::move(ch));
        }
        case 7: {
            GainExpr outer = fuzz_tree(rng, depth + 1);
            return GainExpr::compose(std::move(outer), fuzz_tree(rng, depth + 1));
        }
        default: return GainExpr::plus_id(fuzz_tree(rng, depth + 1));
    }
}

/// Shallower trees with moderate coefficients (inversion round-trip).
inline GainExpr invertible_tree(std::mt19937_64& rng, int depth = 0) {
    std::uniform_real_distribution<double> c(0.1, 3.0);
    std::uniform_int_distribution<int> pick(0, 7);
    const int k = depth > 2 ? pick(rng) % 4 : pick(rng);
    switch (k) {
        case 0: return GainExpr::linear(c(rng));
        case 1: {
            const double a = c(rng);
            return GainExpr::power(a, c(rng));
        }
        case 2: return GainExpr::saturating(c(rng));
        case 3: return GainExpr::atan(c(rng));
        default: {
            if (k == 7) return GainExpr::plus_id(invertible_tree(rng, depth + 1));
            GainExpr a = invertible_tree(rng, depth + 1);
            GainExpr b = invertible_tree(rng, depth + 1);
            if (k == 4) return GainExpr::sum({std::move(a), std::move(b)});
            if (k == 5) return GainExpr::max({std::move(a), std::move(b)});
            return GainExpr::compose(std::move(a), std::move(b));
        }
    }
}

}  // namespace fx
