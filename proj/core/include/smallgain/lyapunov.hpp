#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smallgain/network.hpp"
#include "smallgain/omega_path.hpp"

namespace smallgain {

/// How the external input enters the ISS condition.
///  Additive:  Gamma-bar(s, r) = Gamma(s) + gamma_u(r), needs alpha.
///  Max:       Gamma-bar(s, r) = max(Gamma(s), gamma_u(r)).
///  Separated: Gamma-bar(s, r) = (c + gamma_u(r)) Gamma(s), needs c and alpha.
///  General:   any Gamma-bar; phi is read off the operator directly.
enum class ExternalMode { Additive, Max, Separated, General };

const char* external_mode_name(ExternalMode mode);

/// Nondecreasing piecewise-linear function through (x_k, y_k) with
/// x_0 = y_0 = 0. It is held constant beyond the last knot.
class MonotoneInterp {
public:
    MonotoneInterp() = default;
    MonotoneInterp(Vec x, Vec y);
    static MonotoneInterp identity();

    bool is_identity() const { return identity_; }
    const Vec& x() const { return x_; }
    const Vec& y() const { return y_; }

    double operator()(double r) const;
    /// Smallest r with f(r) >= v. OutOfRange above the last knot value.
    double inverse(double v) const;

private:
    Vec x_, y_;
    bool identity_ = false;
};

struct SubsystemSpec {
    std::size_t dim = 1;
    std::function<double(std::span<const double>)> V;
    std::string name;

    /// V(x) = x^T P x.
    static SubsystemSpec quadratic(std::vector<Vec> P);
    /// V(x) = |x|_2.
    static SubsystemSpec norm(std::size_t dim = 1);
};

/// V(0) = 0 and V > 0 on random nonzero samples; throws InvalidArgument.
void audit_subsystem(const SubsystemSpec& spec, std::uint64_t seed = 7);

struct ComposeOptions {
    ExternalMode mode = ExternalMode::General;
    /// alpha for Additive; alpha and separation constant c for Separated.
    std::optional<DiagOp> diag;
    Vec radii = default_validation_radii();
};

struct GeneralCondTable {
    Vec radii;
    Vec phi;
    Vec margin_min;  // min_i (sigma_i(r) - Gamma-bar_i(sigma(r), phi(r)))
};

class CompositeLyapunov {
public:
    struct Value {
        double value = 0.0;
        std::vector<std::size_t> argmax;  // 0-based subsystem indices
    };

    CompositeLyapunov(OmegaPath sigma, std::vector<SubsystemSpec> subs, ExternalMode mode,
                      MonotoneInterp phi, std::vector<GainExpr> gamma_u, GeneralCondTable table);

    const OmegaPath& sigma() const { return sigma_; }
    const std::vector<SubsystemSpec>& subsystems() const { return subs_; }
    ExternalMode mode() const { return mode_; }
    const MonotoneInterp& phi() const { return phi_; }
    const std::vector<GainExpr>& external_gains() const { return gamma_u_; }
    const GeneralCondTable& general_condition() const { return table_; }
    std::size_t state_dim() const;

    /// max_i sigma_i^-1(V_i(x_i)) and the maximizing indices (relative tie
    /// tolerance 1e-12).
    Value eval(std::span<const double> x) const;
    /// max_i phi^-1(gamma_iu(u_norm)).
    double iss_threshold(double u_norm) const;

    /// Same phi and gains, sigma multiplied by `factor`; not re-checked.
    CompositeLyapunov with_scaled_sigma(double factor) const;

private:
    OmegaPath sigma_;
    std::vector<SubsystemSpec> subs_;
    ExternalMode mode_;
    MonotoneInterp phi_;
    std::vector<GainExpr> gamma_u_;
    GeneralCondTable table_;
};

/// phi for the given mode on the path anchors and a log grid in
/// [1e-8, 1e8], reduced to a strictly increasing lower envelope.
MonotoneInterp derive_phi(const GainNetwork& net, const OmegaPath& sigma, const ComposeOptions& opts);

/// Margins of Gamma-bar(sigma(r), phi(r)) < sigma(r) at `radii`.
GeneralCondTable general_condition(const GainNetwork& net, const OmegaPath& sigma, const MonotoneInterp& phi,
                                   const ComposeOptions& opts, const Vec& radii);

/// Validates sigma, derives phi and checks the general condition at
/// opts.radii. Errors: NotInOmega, InvalidArgument, OutOfRange,
/// GeneralCondFails.
CompositeLyapunov compose(const GainNetwork& net, const OmegaPath& sigma, std::vector<SubsystemSpec> subs,
                          const ComposeOptions& opts = {});

inline CompositeLyapunov::Value eval_V(const CompositeLyapunov& cl, std::span<const double> x) {
    return cl.eval(x);
}
inline double iss_threshold(const CompositeLyapunov& cl, double u_norm) { return cl.iss_threshold(u_norm); }

}  // namespace smallgain
