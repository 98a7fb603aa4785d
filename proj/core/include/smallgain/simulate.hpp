#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smallgain/lyapunov.hpp"
#include "smallgain/network.hpp"

namespace smallgain {

/// Dense row-major matrix.
using Matrix = std::vector<Vec>;

/// Solves A^T P + P A = -Q through the Kronecker form (dimension <= 20).
/// Throws NotHurwitz when the residual exceeds 1e-8 or P is not positive
/// definite.
Matrix solve_lyapunov_eq(const Matrix& A, const Matrix& Q);
double lyapunov_residual(const Matrix& A, const Matrix& Q, const Matrix& P);

/// x_i' = A_i x_i + sum_j Delta_ij x_j + B_i u with one shared input u.
struct LinearParams {
    std::vector<Matrix> A;
    std::vector<Matrix> Q;
    std::vector<Matrix> B;                   // N_i x M; empty means no input
    std::vector<std::vector<Matrix>> Delta;  // Delta[i][j] is N_i x N_j; empty means zero
    double epsilon = 0.5;
    std::size_t input_dim = 0;
};

struct LinearGains {
    GainNetwork net;
    Matrix G;  // associated matrix, Gamma = D^-1 o G o D with D = sqrt
    std::vector<Matrix> P;
    Vec a, b, c;  // a^2 = lambda_min(P), b^2 = lambda_max(P), c = lambda_min(Q)
};

LinearGains linear_gains(const LinearParams& p);

/// x_i' = -a_i(x_i) (b_i(x_i) - sum_j t_ij s_j(x_j) + J_i), J = u.
/// The built-in model uses b_i = 1.1 sign(x) b~_i(|x|), s_j = 0.9 sign(x)
/// gamma_j(|x|) and a_i sweeping the open band (alpha_lo, alpha_hi).
struct CgParams {
    Matrix T;                         // n x n, zero diagonal
    std::vector<GainExpr> activation;  // gamma_j, |s_j| < gamma_j(|x_j|)
    std::vector<GainExpr> b_tilde;     // class K-infinity with structural inverse
    GainExpr rho;                      // class K-infinity with structural inverse
    Vec alpha_lo, alpha_hi;
    double epsilon = 0.1;
};

/// mu_i = b~_i^-1 o (id + rho) applied to the row sum, external slot added
/// as b~_i^-1 o (id + rho^-1)(abar_i / (alo_i - eps) r). Throws BadParameters.
GainNetwork cg_gains(const CgParams& p);

class InputSignal {
public:
    static InputSignal constant(Vec value);
    /// 0 before t0, value afterwards.
    static InputSignal step(Vec value, double t0 = 0.0);
    /// amplitude * sin(2 pi freq t).
    static InputSignal sinusoid(Vec amplitude, double freq);
    /// value_k on [t_k, t_{k+1}); 0 before the first breakpoint.
    static InputSignal piecewise(std::vector<std::pair<double, Vec>> pieces);
    static InputSignal zero(std::size_t dim);

    std::size_t dim() const { return dim_; }
    Vec operator()(double t) const;
    /// Upper bound of |u(t)|_2 over t >= 0.
    double sup_norm() const;

private:
    enum class Kind { Constant, Step, Sinusoid, Piecewise } kind_ = Kind::Constant;
    std::size_t dim_ = 0;
    Vec value_;
    double t0_ = 0.0;
    double freq_ = 0.0;
    std::vector<std::pair<double, Vec>> pieces_;
};

using Dynamics = std::function<Vec(std::span<const double> x, std::span<const double> u)>;

struct SystemModel {
    std::string family;
    std::vector<std::size_t> block_dims;
    std::size_t input_dim = 0;
    Dynamics f;

    std::size_t state_dim() const;

    static SystemModel linear(const LinearParams& p);
    static SystemModel cohen_grossberg(const CgParams& p);
    static SystemModel custom(std::vector<std::size_t> block_dims, std::size_t input_dim, Dynamics f);
};

struct Trajectory {
    Vec t;
    std::vector<Vec> x;
    std::vector<Vec> u;
    Vec V;  // empty without a Lyapunov function
    bool diverged = false;
    double diverged_at = 0.0;
};

/// Fixed-step RK4. Stops early with `diverged` set once |x| > 1e12.
Trajectory integrate(const SystemModel& model, const Vec& x0, const InputSignal& u, double T, double dt,
                     const CompositeLyapunov* cl = nullptr);

/// Header `t,x_1..x_N,u_1..u_M,V`.
void write_trajectory_csv(std::ostream& out, const Trajectory& tr);

struct DecreaseSpec {
    std::size_t samples = 10000;
    double r_lo = 1e-3;
    double r_hi = 1e3;
    /// Pair each state with an input whose threshold sits just below V(x).
    bool matched_input = false;
    double guard = 0.05;
    std::uint64_t seed = 1;
};

struct DecreaseReport {
    std::size_t samples = 0;
    std::size_t violations = 0;
    /// Largest derivative estimate seen (violations have estimate >= -tol).
    double worst = 0.0;

    bool pass() const { return violations == 0; }
    /// `verdict=<pass|fail> violations=<k>/<samples> worst=<v>`
    std::string summary() const;
};

/// Flow-directional central differences of V at annulus samples.
DecreaseReport check_decrease(const SystemModel& model, const CompositeLyapunov& cl, const DecreaseSpec& spec = {});

struct IssSpec {
    std::size_t runs = 50;
    double T = 20.0;
    double dt = 1e-2;
    /// 0 checks 0-GAS; otherwise a step input of this norm along `direction`.
    double u_norm = 0.0;
    Vec direction;  // defaults to the first unit vector
    std::uint64_t seed = 2;
};

struct IssReport {
    std::size_t runs = 0;
    std::size_t failures = 0;
    /// Largest increase of V between consecutive steps.
    double max_increase = 0.0;
    /// u = 0: max |x(T)| / |x0|. Otherwise: max over the last quarter of
    /// V / threshold.
    double worst_ratio = 0.0;
    double threshold = 0.0;

    bool pass() const { return failures == 0; }
    /// `verdict=<pass|fail> failures=<k>/<runs> worst_ratio=<v> max_increase=<d>`
    std::string summary() const;
};

IssReport check_iss_bound(const SystemModel& model, const CompositeLyapunov& cl, const IssSpec& spec = {});

}  // namespace smallgain
