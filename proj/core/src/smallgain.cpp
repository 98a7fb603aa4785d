#include "smallgain/smallgain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "smallgain/error.hpp"

namespace smallgain {

const char* sgc_status_name(SgcStatus s) {
    switch (s) {
        case SgcStatus::CertifiedHolds: return "holds";
        case SgcStatus::CertifiedFails: return "fails";
        case SgcStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

bool all_linear(const Cycle& c, const GainNetwork& net) {
    for (std::size_t k = 0; k < c.size(); ++k) {
        const GainExpr& g = net.gain(c[k], c[(k + 1) % c.size()]);
        if (g.kind() != GainExpr::Kind::Linear) return false;
    }
    return true;
}

// gamma_{i1 i2} o ... o gamma_{iK i1}(r): innermost gain is the closing edge.
double compose_cycle(const Cycle& c, const GainNetwork& net, double r) {
    double v = r;
    for (std::size_t k = c.size(); k-- > 0;) v = net.gain(c[k], c[(k + 1) % c.size()])(v);
    return v;
}

// s_{i1} = r and s_{ik} = gamma_{ik,ik+1}(s_{ik+1}) walking backwards, so
// every cycle row reproduces its own entry and row i1 sees the full loop.
Vec cycle_witness(const Cycle& c, const GainNetwork& net, double r) {
    Vec s(net.size(), 0.0);
    s[c[0]] = r;
    double v = r;
    for (std::size_t k = c.size(); k-- > 1;) {
        v = net.gain(c[k], c[(k + 1) % c.size()])(v);
        s[c[k]] = v;
    }
    return s;
}

double min_ratio(std::span<const double> image, std::span<const double> s) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] > 0.0) m = std::min(m, image[i] / s[i]);
    }
    return m;
}

std::vector<Vec> directions(std::size_t n, const GridSpec& grid) {
    std::vector<Vec> dirs;
    for (std::size_t i = 0; i < n; ++i) {
        Vec d(n, 0.0);
        d[i] = 1.0;
        dirs.push_back(std::move(d));
    }
    for (std::size_t i = 0; i < n; ++i) {
        Vec d(n, 0.5);
        d[i] = 1.0;
        dirs.push_back(std::move(d));
    }
    dirs.emplace_back(n, 1.0);
    std::mt19937_64 rng(grid.seed);
    std::exponential_distribution<double> expo(1.0);
    for (std::size_t k = 0; k < grid.random_directions; ++k) {
        Vec d(n);
        for (double& x : d) x = expo(rng);
        const double m = norm_inf(d);
        for (double& x : d) x /= m;
        dirs.push_back(std::move(d));
    }
    return dirs;
}

template <class Op>
SgcVerdict falsify(const Op& op, std::size_t n, const GridSpec& grid, std::string method) {
    SgcVerdict v;
    v.method = std::move(method);
    v.closest_ratio = 0.0;
    const auto dirs = directions(n, grid);
    const Vec radii = log_grid(grid.r_lo, grid.r_hi, grid.radii);

    auto accept = [&](const Vec& s) {
        const Vec image = op(s);
        return norm_inf(s) > 0.0 && dominates(image, s);
    };
    for (double r : radii) {
        for (const Vec& d : dirs) {
            Vec s(n);
            for (std::size_t i = 0; i < n; ++i) s[i] = r * d[i];
            Vec cur = op(s);
            ++v.samples;
            v.closest_ratio = std::max(v.closest_ratio, min_ratio(cur, s));
            if (dominates(cur, s)) {
                v.status = SgcStatus::CertifiedFails;
                v.witness = s;
                return v;
            }
            // If Gamma^m(s) >= s for some m then w = max(s, ..., Gamma^(m-1) s)
            // satisfies Gamma(w) >= w, so short orbit envelopes are tried too.
            Vec w = s;
            for (std::size_t m = 1; m <= n + 1; ++m) {
                for (std::size_t i = 0; i < n; ++i) w[i] = std::max(w[i], cur[i]);
                if (accept(w)) {
                    v.status = SgcStatus::CertifiedFails;
                    v.witness = w;
                    return v;
                }
                cur = op(cur);
            }
        }
    }
    v.status = SgcStatus::Inconclusive;
    return v;
}

// Row i of Gamma_mu is additive in its active slots.
bool row_additive(const Maf& mu, const std::vector<std::size_t>& active) {
    switch (mu.kind()) {
        case Maf::Kind::Sum: return true;
        case Maf::Kind::Max: return active.size() <= 1;
        case Maf::Kind::BlockMaxSum:
            for (const auto& block : mu.blocks()) {
                std::size_t hits = 0;
                for (std::size_t j : block) {
                    hits += std::count(active.begin(), active.end(), j);
                }
                if (hits > 1) return false;
            }
            return true;
        case Maf::Kind::OuterSum: return false;
    }
    return false;
}

// (coefficient, exponent) for Linear and Power leaves.
std::optional<std::pair<double, double>> monomial(const GainExpr& g) {
    if (g.kind() == GainExpr::Kind::Linear) return std::make_pair(g.coeff(), 1.0);
    if (g.kind() == GainExpr::Kind::Power) return std::make_pair(g.coeff(), g.exponent());
    return std::nullopt;
}

bool same_exponent(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)); }

}  // namespace

SgcVerdict check_cycle_condition(const GainNetwork& net) {
    if (!net.all_maf(Maf::Kind::Max)) {
        throw Error(ErrorKind::WrongAggregation, "cycle condition needs max aggregation in every row");
    }
    SgcVerdict v;
    v.method = "cycle";
    const auto cycles = subordinated_cycles(adjacency(net));
    const Vec grid = log_grid(1e-8, 1e8, 400);
    double worst = 0.0;
    for (const Cycle& c : cycles) {
        double fail_at = -1.0;
        if (all_linear(c, net)) {
            const double slope = compose_cycle(c, net, 1.0);
            worst = std::max(worst, slope);
            if (!(slope <= 1.0 - kTolStrict)) fail_at = 1.0;
        } else {
            for (double r : grid) {
                const double ratio = compose_cycle(c, net, r) / r;
                worst = std::max(worst, ratio);
                if (!(ratio <= 1.0 - kTolStrict)) {
                    fail_at = r;
                    break;
                }
            }
        }
        ++v.samples;
        if (fail_at > 0.0) {
            v.status = SgcStatus::CertifiedFails;
            v.cycle = c;
            v.witness = cycle_witness(c, net, fail_at);
            v.closest_ratio = worst;
            return v;
        }
    }
    v.status = SgcStatus::CertifiedHolds;
    v.closest_ratio = worst;
    return v;
}

SgcVerdict falsify_operator(const GainOperator& op, const GridSpec& grid) {
    return falsify(op, op.dim(), grid, op.diag() ? "falsification(D)" : "falsification");
}

SgcVerdict falsify_sgc(const GainNetwork& net, const GridSpec& grid) {
    return falsify([&net](std::span<const double> s) { return net.eval(s); }, net.size(), grid,
                   "falsification");
}

std::optional<Linearization> linearize(const GainNetwork& net) {
    const std::size_t n = net.size();
    std::optional<double> p;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : net.active(i)) {
            auto m = monomial(net.gain(i, j));
            if (!m) return std::nullopt;
            if (p && !same_exponent(*p, m->second)) return std::nullopt;
            p = m->second;
        }
    }
    Linearization lin;
    lin.exponent = p.value_or(1.0);
    lin.G.assign(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& active = net.active(i);
        if (active.empty()) continue;
        const Maf& mu = net.maf(i);
        double scale = 1.0;
        if (mu.kind() == Maf::Kind::OuterSum) {
            auto m = monomial(mu.rho());
            if (!m || !same_exponent(m->second * lin.exponent, 1.0)) return std::nullopt;
            scale = std::pow(m->first, lin.exponent);
        } else if (!same_exponent(lin.exponent, 1.0) || !row_additive(mu, active)) {
            return std::nullopt;
        }
        for (std::size_t j : active) lin.G[i][j] = scale * monomial(net.gain(i, j))->first;
    }
    return lin;
}

double spectral_radius(const std::vector<Vec>& G, Vec* perron) {
    const std::size_t n = G.size();
    AdjacencyMatrix adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && G[i][j] > 0.0) adj.set(i, j);
        }
    }
    const auto scc = scc_decompose(adj);
    double best = -1.0;
    Vec best_vec;
    for (const auto& block : scc.blocks) {
        const std::size_t m = block.size();
        Vec x(m, 1.0);
        double rho = 0.0;
        if (m == 1) {
            rho = G[block[0]][block[0]];
        } else {
            // Power iteration on B + I; the Collatz-Wielandt bounds bracket
            // rho + 1 for every positive iterate.
            Vec y(m);
            double lo = 0.0, hi = 0.0;
            for (int it = 0; it < 100000; ++it) {
                lo = std::numeric_limits<double>::infinity();
                hi = 0.0;
                for (std::size_t a = 0; a < m; ++a) {
                    double acc = x[a];
                    for (std::size_t b = 0; b < m; ++b) acc += G[block[a]][block[b]] * x[b];
                    y[a] = acc;
                    lo = std::min(lo, acc / x[a]);
                    hi = std::max(hi, acc / x[a]);
                }
                const double scale = norm_inf(y);
                for (std::size_t a = 0; a < m; ++a) x[a] = y[a] / scale;
                if (hi - lo <= 1e-13 * hi) break;
            }
            rho = 0.5 * (lo + hi) - 1.0;
        }
        if (rho > best) {
            best = rho;
            best_vec.assign(n, 0.0);
            for (std::size_t a = 0; a < m; ++a) best_vec[block[a]] = x[a];
        }
    }
    if (perron) *perron = best_vec;
    return std::max(best, 0.0);
}

SgcVerdict check_linear_spectral(const GainNetwork& net) {
    auto lin = linearize(net);
    if (!lin) {
        throw Error(ErrorKind::NotLinearizable,
                    "network is neither linear nor conjugate to a linear map by a power law");
    }
    SgcVerdict v;
    v.method = "spectral";
    Vec perron;
    const double rho = spectral_radius(lin->G, &perron);
    v.spectral_radius = rho;
    v.closest_ratio = rho;
    if (rho < 1.0 - kTolStrict) {
        v.status = SgcStatus::CertifiedHolds;
        return v;
    }
    // Map the Perron vector back through D^-1.
    Vec s(perron.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::pow(perron[i], 1.0 / lin->exponent);
    if (norm_inf(s) > 0.0 && dominates(net.eval(s), s, kTolStrict)) {
        v.status = SgcStatus::CertifiedFails;
        v.witness = std::move(s);
    } else {
        v.status = rho >= 1.0 ? SgcStatus::CertifiedFails : SgcStatus::Inconclusive;
    }
    return v;
}

PerronResult nonlinear_perron(const GainOperator& op) {
    const std::size_t n = op.dim();
    if (!is_irreducible(adjacency(op.network()))) {
        throw Error(ErrorKind::NotIrreducible, "Perron iteration needs an irreducible operator");
    }
    std::mt19937_64 rng(0x9e77);
    std::uniform_real_distribution<double> expo(-3.0, 3.0);
    for (int trial = 0; trial < 16; ++trial) {
        Vec s(n), s2(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::pow(10.0, expo(rng));
            s2[i] = 2.0 * s[i];
        }
        const Vec a = op(s2);
        const Vec b = op(s);
        for (std::size_t i = 0; i < n; ++i) {
            if (std::fabs(a[i] - 2.0 * b[i]) > 1e-9 * std::fabs(2.0 * b[i]) + 1e-300) {
                throw Error(ErrorKind::NotHomogeneous, "Gamma(2s) != 2 Gamma(s) at a sampled point");
            }
        }
    }

    // Shifted iteration s <- (Gamma(s) + s) / norm: same fixed directions as
    // the plain one, but it does not oscillate on bipartite networks.
    PerronResult res;
    Vec s(n, 1.0);
    bool converged = false;
    for (std::size_t it = 1; it <= 100000; ++it) {
        Vec t = op(s);
        for (std::size_t i = 0; i < n; ++i) t[i] += s[i];
        const double m = norm_inf(t);
        double step = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            t[i] /= m;
            step = std::max(step, std::fabs(t[i] - s[i]));
        }
        s = std::move(t);
        res.iterations = it;
        if (step < 1e-10) {
            converged = true;
            break;
        }
    }
    if (!converged) throw Error(ErrorKind::NoConvergence, "Perron iteration hit the iteration cap");
    const Vec image = op(s);
    res.lambda = norm_inf(image);
    for (std::size_t i = 0; i < n; ++i) {
        res.residual = std::max(res.residual, std::fabs(image[i] - res.lambda * s[i]));
    }
    res.eigvec = std::move(s);
    return res;
}

PerronResult nonlinear_perron(const GainNetwork& net) { return nonlinear_perron(GainOperator(net)); }

SgcVerdict check_strong_sgc(const GainNetwork& net, const DiagOp& d, DiagSide side,
                            const GridSpec& grid) {
    return falsify_operator(GainOperator(net, d, side), grid);
}

}  // namespace smallgain
