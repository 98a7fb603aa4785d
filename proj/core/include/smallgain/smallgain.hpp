#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/graph.hpp"
#include "smallgain/network.hpp"

namespace smallgain {

enum class SgcStatus { CertifiedHolds, CertifiedFails, Inconclusive };

const char* sgc_status_name(SgcStatus s);

struct SgcVerdict {
    SgcStatus status = SgcStatus::Inconclusive;
    std::string method;
    /// Nonzero s with Gamma(s) >= s; set for every CertifiedFails except a
    /// purely spectral failure too close to 1 to produce one.
    Vec witness;
    /// Violating subordinated cycle (cycle method only).
    Cycle cycle;
    std::optional<double> spectral_radius;
    std::size_t samples = 0;
    /// Largest min_i Gamma_i(s) / s_i seen over the sampled points (>= 1
    /// means a witness).
    double closest_ratio = 0.0;
};

struct GridSpec {
    double r_lo = 1e-6;
    double r_hi = 1e6;
    std::size_t radii = 40;
    /// Random simplex directions on top of the 2n + 1 structured ones.
    std::size_t random_directions = 199;
    std::uint64_t seed = 0x5a17ULL;
};

/// Cycle criterion for networks aggregated by max. Throws
/// Error(WrongAggregation) otherwise.
SgcVerdict check_cycle_condition(const GainNetwork& net);

/// Searches for s != 0 with Gamma_mu(s) >= s. Never certifies the
/// condition: the best outcome is Inconclusive.
SgcVerdict falsify_sgc(const GainNetwork& net, const GridSpec& grid = {});
SgcVerdict falsify_operator(const GainOperator& op, const GridSpec& grid = {});

/// Gamma_mu = D^-1 o G o D with D(s)_i = s_i^p.
struct Linearization {
    std::vector<Vec> G;
    double exponent = 1.0;
};

/// Recognizes linear networks (Linear gains, additive rows) and the
/// power-conjugate form gamma_ij = k_ij s^p with rows rho_i = c_i (.)^(1/p).
std::optional<Linearization> linearize(const GainNetwork& net);

/// Spectral radius of a nonnegative matrix by shifted power iteration per
/// strongly connected block; `perron` receives a nonnegative eigenvector of
/// the dominant block, zero elsewhere.
double spectral_radius(const std::vector<Vec>& G, Vec* perron = nullptr);

/// Throws Error(NotLinearizable) when `linearize` fails.
SgcVerdict check_linear_spectral(const GainNetwork& net);

struct PerronResult {
    double lambda = 0.0;
    Vec eigvec;
    double residual = 0.0;
    std::size_t iterations = 0;
};

/// Eigenpair Gamma(s) = lambda s of a degree-one homogeneous, irreducible
/// operator. Errors: NotHomogeneous, NotIrreducible, NoConvergence.
PerronResult nonlinear_perron(const GainOperator& op);
PerronResult nonlinear_perron(const GainNetwork& net);

/// Falsification on D o Gamma_mu (or Gamma_mu o D).
SgcVerdict check_strong_sgc(const GainNetwork& net, const DiagOp& d,
                            DiagSide side = DiagSide::Outer, const GridSpec& grid = {});

}  // namespace smallgain
