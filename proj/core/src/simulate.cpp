#include "smallgain/simulate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "smallgain/error.hpp"

namespace smallgain {

namespace {

using Eigen::MatrixXd;

MatrixXd to_eigen(const Matrix& m, std::size_t rows, std::size_t cols) {
    MatrixXd out = MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (m.empty()) return out;
    if (m.size() != rows) throw Error(ErrorKind::InvalidArgument, "matrix has wrong row count");
    for (std::size_t i = 0; i < rows; ++i) {
        if (m[i].size() != cols) throw Error(ErrorKind::InvalidArgument, "matrix has wrong column count");
        for (std::size_t j = 0; j < cols; ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
    }
    return out;
}

MatrixXd square(const Matrix& m) { return to_eigen(m, m.size(), m.size()); }

Matrix from_eigen(const MatrixXd& m) {
    Matrix out(static_cast<std::size_t>(m.rows()), Vec(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
    return out;
}

double spectral_norm(const MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
}

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

// ---------------------------------------------------------------------------
// Lyapunov equation

double lyapunov_residual(const Matrix& A, const Matrix& Q, const Matrix& P) {
    const MatrixXd a = square(A), q = square(Q), p = square(P);
    const MatrixXd r = a.transpose() * p + p * a + q;
    return r.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix solve_lyapunov_eq(const Matrix& A, const Matrix& Q) {
    const std::size_t n = A.size();
    if (n == 0 || n > 20 || Q.size() != n) {
        throw Error(ErrorKind::InvalidArgument, "Lyapunov equation needs square matrices of size 1..20");
    }
    const MatrixXd a = square(A), q = square(Q);
    const auto N = static_cast<Eigen::Index>(n);
    // vec(A^T P + P A) = (I kron A^T + A^T kron I) vec(P) for column-major vec.
    MatrixXd K = MatrixXd::Zero(N * N, N * N);
    const MatrixXd I = MatrixXd::Identity(N, N);
    const MatrixXd at = a.transpose();
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < N; ++j) {
            K.block(i * N, j * N, N, N) += I(i, j) * at;
            K.block(i * N, j * N, N, N) += at(i, j) * I;
        }
    }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), N * N);
    const Eigen::VectorXd v = K.fullPivLu().solve(rhs);
    MatrixXd p = Eigen::Map<const MatrixXd>(v.data(), N, N);
    p = 0.5 * (p + p.transpose());
    Matrix P = from_eigen(p);
    const double res = lyapunov_residual(A, Q, P);
    if (!(res <= 1e-8) || !v.allFinite()) {
        throw Error(ErrorKind::NotHurwitz, "Lyapunov equation residual " + std::to_string(res));
    }
    if (Eigen::LLT<MatrixXd>(p).info() != Eigen::Success) {
        throw Error(ErrorKind::NotHurwitz, "solution of the Lyapunov equation is not positive definite");
    }
    return P;
}

// ---------------------------------------------------------------------------
// Model gains

LinearGains linear_gains(const LinearParams& p) {
    const std::size_t n = p.A.size();
    if (n == 0 || p.Q.size() != n) throw Error(ErrorKind::BadParameters, "need matching A and Q per block");
    if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) throw Error(ErrorKind::BadParameters, "epsilon must lie in (0, 1)");
    std::vector<Matrix> P(n);
    Vec a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        P[i] = solve_lyapunov_eq(p.A[i], p.Q[i]);
        Eigen::SelfAdjointEigenSolver<MatrixXd> ep(square(P[i]));
        Eigen::SelfAdjointEigenSolver<MatrixXd> eq(square(p.Q[i]));
        a[i] = std::sqrt(ep.eigenvalues().minCoeff());
        b[i] = std::sqrt(ep.eigenvalues().maxCoeff());
        c[i] = eq.eigenvalues().minCoeff();
        if (!(c[i] > 0.0)) throw Error(ErrorKind::BadParameters, "Q must be positive definite");
    }
    Matrix G(n, Vec(n, 0.0));
    std::vector<std::vector<GainExpr>> gamma(n, std::vector<GainExpr>(n));
    std::vector<GainExpr> gamma_u(n);
    std::vector<Maf> mu(n, Maf::outer_sum(GainExpr::power(1.0, 2.0)));
    for (std::size_t i = 0; i < n; ++i) {
        const double k = 2.0 * b[i] * b[i] * b[i] / (c[i] * (1.0 - p.epsilon));
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || p.Delta.size() <= i || p.Delta[i].size() <= j || p.Delta[i][j].empty()) continue;
            const double d = spectral_norm(to_eigen(p.Delta[i][j], p.A[i].size(), p.A[j].size()));
            if (d == 0.0) continue;
            G[i][j] = k * d / a[j];
            gamma[i][j] = GainExpr::power(G[i][j], 0.5);
        }
        if (p.B.size() > i && !p.B[i].empty()) {
            const double nb = spectral_norm(to_eigen(p.B[i], p.A[i].size(), p.input_dim));
            if (nb > 0.0) gamma_u[i] = GainExpr::linear(k * nb);
        }
    }
    return LinearGains{GainNetwork(std::move(gamma), std::move(gamma_u), std::move(mu)), std::move(G), std::move(P),
                       std::move(a), std::move(b), std::move(c)};
}

GainNetwork cg_gains(const CgParams& p) {
    const std::size_t n = p.T.size();
    auto bad = [](const std::string& m) { return Error(ErrorKind::BadParameters, m); };
    if (n < 1 || p.activation.size() != n || p.b_tilde.size() != n || p.alpha_lo.size() != n ||
        p.alpha_hi.size() != n) {
        throw bad("Cohen-Grossberg parameters need one entry per neuron");
    }
    const auto rho_inv = structural_inverse(p.rho);
    if (classify_gain(p.rho) != GainClass::Unbounded || !rho_inv) {
        throw bad("rho must be class K-infinity with a closed-form inverse");
    }
    std::vector<std::vector<GainExpr>> gamma(n, std::vector<GainExpr>(n));
    std::vector<GainExpr> gamma_u(n);
    std::vector<Maf> mu;
    for (std::size_t i = 0; i < n; ++i) {
        if (p.T[i].size() != n) throw bad("T must be square");
        if (p.T[i][i] != 0.0) throw bad("self-coupling t_ii must be zero");
        if (!(p.epsilon > 0.0 && p.epsilon < p.alpha_lo[i] && p.alpha_lo[i] <= p.alpha_hi[i])) {
            throw bad("need 0 < epsilon < alpha_lo <= alpha_hi for neuron " + std::to_string(i + 1));
        }
        const auto b_inv = structural_inverse(p.b_tilde[i]);
        if (classify_gain(p.b_tilde[i]) != GainClass::Unbounded || !b_inv) {
            throw bad("b~ must be class K-infinity with a closed-form inverse");
        }
        const double scale = p.alpha_hi[i] / (p.alpha_lo[i] - p.epsilon);
        for (std::size_t j = 0; j < n; ++j) {
            if (p.T[i][j] == 0.0) continue;
            if (p.activation[j].kind() == GainExpr::Kind::Zero) throw bad("activation bound must be class K");
            gamma[i][j] = GainExpr::compose(GainExpr::linear(scale * std::fabs(p.T[i][j])), p.activation[j]);
        }
        gamma_u[i] = GainExpr::compose(*b_inv, GainExpr::compose(GainExpr::plus_id(*rho_inv), GainExpr::linear(scale)));
        mu.push_back(Maf::outer_sum(GainExpr::compose(*b_inv, GainExpr::plus_id(p.rho))).with_additive_external());
    }
    return GainNetwork(std::move(gamma), std::move(gamma_u), std::move(mu));
}

// ---------------------------------------------------------------------------
// Inputs

InputSignal InputSignal::constant(Vec value) {
    InputSignal s;
    s.dim_ = value.size();
    s.value_ = std::move(value);
    return s;
}

InputSignal InputSignal::step(Vec value, double t0) {
    InputSignal s = constant(std::move(value));
    s.kind_ = Kind::Step;
    s.t0_ = t0;
    return s;
}

InputSignal InputSignal::sinusoid(Vec amplitude, double freq) {
    InputSignal s = constant(std::move(amplitude));
    s.kind_ = Kind::Sinusoid;
    s.freq_ = freq;
    return s;
}

InputSignal InputSignal::piecewise(std::vector<std::pair<double, Vec>> pieces) {
    if (pieces.empty()) throw Error(ErrorKind::InvalidArgument, "piecewise input needs at least one piece");
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    InputSignal s;
    s.kind_ = Kind::Piecewise;
    s.dim_ = pieces.front().second.size();
    for (const auto& pc : pieces) {
        if (pc.second.size() != s.dim_) throw Error(ErrorKind::InvalidArgument, "piecewise input dimension mismatch");
    }
    s.pieces_ = std::move(pieces);
    return s;
}

InputSignal InputSignal::zero(std::size_t dim) { return constant(Vec(dim, 0.0)); }

Vec InputSignal::operator()(double t) const {
    switch (kind_) {
        case Kind::Constant: return value_;
        case Kind::Step: return t >= t0_ ? value_ : Vec(dim_, 0.0);
        case Kind::Sinusoid: {
            Vec v = value_;
            const double f = std::sin(2.0 * std::numbers::pi * freq_ * t);
            for (double& x : v) x *= f;
            return v;
        }
        case Kind::Piecewise: {
            Vec v(dim_, 0.0);
            for (const auto& [start, value] : pieces_) {
                if (t >= start) v = value;
            }
            return v;
        }
    }
    return Vec(dim_, 0.0);
}

double InputSignal::sup_norm() const {
    if (kind_ != Kind::Piecewise) return norm2(value_);
    double m = 0.0;
    for (const auto& pc : pieces_) m = std::max(m, norm2(pc.second));
    return m;
}

// ---------------------------------------------------------------------------
// Models

std::size_t SystemModel::state_dim() const {
    std::size_t d = 0;
    for (std::size_t k : block_dims) d += k;
    return d;
}

SystemModel SystemModel::custom(std::vector<std::size_t> block_dims, std::size_t input_dim, Dynamics f) {
    SystemModel m;
    m.family = "custom";
    m.block_dims = std::move(block_dims);
    m.input_dim = input_dim;
    m.f = std::move(f);
    return m;
}

SystemModel SystemModel::linear(const LinearParams& p) {
    const std::size_t n = p.A.size();
    std::vector<std::size_t> dims(n);
    std::vector<std::size_t> off(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        dims[i] = p.A[i].size();
        off[i + 1] = off[i] + dims[i];
    }
    const auto N = static_cast<Eigen::Index>(off[n]);
    const auto M = static_cast<Eigen::Index>(p.input_dim);
    MatrixXd A = MatrixXd::Zero(N, N), B = MatrixXd::Zero(N, M);
    for (std::size_t i = 0; i < n; ++i) {
        const auto oi = static_cast<Eigen::Index>(off[i]);
        const auto ni = static_cast<Eigen::Index>(dims[i]);
        A.block(oi, oi, ni, ni) += square(p.A[i]);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || p.Delta.size() <= i || p.Delta[i].size() <= j || p.Delta[i][j].empty()) continue;
            A.block(oi, static_cast<Eigen::Index>(off[j]), ni, static_cast<Eigen::Index>(dims[j])) +=
                to_eigen(p.Delta[i][j], dims[i], dims[j]);
        }
        if (p.B.size() > i && !p.B[i].empty()) B.block(oi, 0, ni, M) = to_eigen(p.B[i], dims[i], p.input_dim);
    }
    SystemModel m;
    m.family = "linear";
    m.block_dims = dims;
    m.input_dim = p.input_dim;
    m.f = [A, B](std::span<const double> x, std::span<const double> u) {
        const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
        Eigen::VectorXd dx = A * xv;
        if (B.cols() > 0) dx += B * Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
        return Vec(dx.data(), dx.data() + dx.size());
    };
    return m;
}

SystemModel SystemModel::cohen_grossberg(const CgParams& p) {
    cg_gains(p);  // parameter validation
    const std::size_t n = p.T.size();
    SystemModel m;
    m.family = "cohen_grossberg";
    m.block_dims.assign(n, 1);
    m.input_dim = n;
    m.f = [p, n](std::span<const double> x, std::span<const double> u) {
        Vec dx(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = p.alpha_lo[i], hi = p.alpha_hi[i];
            const double a = hi - (hi - lo) * (0.5 + 0.25 * std::tanh(x[i]));
            const double b = 1.1 * sign(x[i]) * p.b_tilde[i](std::fabs(x[i]));
            double coupling = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (p.T[i][j] != 0.0) coupling += p.T[i][j] * 0.9 * sign(x[j]) * p.activation[j](std::fabs(x[j]));
            }
            dx[i] = -a * (b - coupling + (u.empty() ? 0.0 : u[i]));
        }
        return dx;
    };
    return m;
}

// ---------------------------------------------------------------------------
// Integration

Trajectory integrate(const SystemModel& model, const Vec& x0, const InputSignal& u, double T, double dt,
                     const CompositeLyapunov* cl) {
    if (!(dt > 0.0) || !(T >= dt)) throw Error(ErrorKind::InvalidArgument, "need dt > 0 and T >= dt");
    if (x0.size() != model.state_dim()) throw Error(ErrorKind::InvalidArgument, "x0 has wrong dimension");
    if (u.dim() != model.input_dim) throw Error(ErrorKind::InvalidArgument, "input has wrong dimension");
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    const std::size_t N = x0.size();
    Trajectory tr;
    tr.t.reserve(steps + 1);
    tr.x.reserve(steps + 1);
    Vec x = x0;
    auto record = [&](double t) {
        tr.t.push_back(t);
        tr.x.push_back(x);
        tr.u.push_back(u(t));
        if (cl) tr.V.push_back(cl->eval(x).value);
    };
    auto axpy = [N](const Vec& a, double h, const Vec& k) {
        Vec out(N);
        for (std::size_t i = 0; i < N; ++i) out[i] = a[i] + h * k[i];
        return out;
    };
    record(0.0);
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * dt;
        const Vec u0 = u(t), um = u(t + 0.5 * dt), u1 = u(t + dt);
        const Vec k1 = model.f(x, u0);
        const Vec k2 = model.f(axpy(x, 0.5 * dt, k1), um);
        const Vec k3 = model.f(axpy(x, 0.5 * dt, k2), um);
        const Vec k4 = model.f(axpy(x, dt, k3), u1);
        for (std::size_t i = 0; i < N; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        const double nx = norm2(x);
        if (!(nx <= 1e12)) {
            tr.diverged = true;
            tr.diverged_at = t + dt;
            return tr;
        }
        record(static_cast<double>(s + 1) * dt);
    }
    return tr;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
    const std::size_t N = tr.x.empty() ? 0 : tr.x.front().size();
    const std::size_t M = tr.u.empty() ? 0 : tr.u.front().size();
    out << "t";
    for (std::size_t i = 0; i < N; ++i) out << ",x_" << (i + 1);
    for (std::size_t i = 0; i < M; ++i) out << ",u_" << (i + 1);
    out << ",V\n";
    char buf[64];
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.12g", tr.t[k]);
        out << buf;
        for (double v : tr.x[k]) {
            std::snprintf(buf, sizeof buf, ",%.12g", v);
            out << buf;
        }
        for (double v : tr.u[k]) {
            std::snprintf(buf, sizeof buf, ",%.12g", v);
            out << buf;
        }
        if (tr.V.empty()) {
            out << ",";
        } else {
            std::snprintf(buf, sizeof buf, ",%.12g", tr.V[k]);
            out << buf;
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Verification

std::string DecreaseReport::summary() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "verdict=%s violations=%zu/%zu worst=%.6g", pass() ? "pass" : "fail", violations,
                  samples, worst);
    return buf;
}

std::string IssReport::summary() const {
    char buf[192];
    std::snprintf(buf, sizeof buf, "verdict=%s failures=%zu/%zu worst_ratio=%.6g max_increase=%.3g",
                  pass() ? "pass" : "fail", failures, runs, worst_ratio, max_increase);
    return buf;
}

namespace {

Vec random_direction(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> gauss;
    Vec d(dim);
    double n = 0.0;
    while (n == 0.0) {
        for (double& v : d) v = gauss(rng);
        n = norm2(d);
    }
    for (double& v : d) v /= n;
    return d;
}

// Largest input norm whose threshold, with the guard, stays at or below V.
double matched_norm(const CompositeLyapunov& cl, double V, double guard) {
    auto ok = [&](double u) {
        try {
            return cl.iss_threshold(u) * (1.0 + guard) <= V;
        } catch (const Error&) {
            return false;
        }
    };
    double lo = 0.0, hi = 1.0;
    int k = 0;
    while (ok(hi) && ++k < 200) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid)) lo = mid;
        else hi = mid;
    }
    return lo;
}

}  // namespace

DecreaseReport check_decrease(const SystemModel& model, const CompositeLyapunov& cl, const DecreaseSpec& spec) {
    const std::size_t N = model.state_dim();
    const std::size_t M = model.input_dim;
    if (cl.state_dim() != N) throw Error(ErrorKind::InvalidArgument, "certificate does not match the model");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double llo = std::log(spec.r_lo), lhi = std::log(spec.r_hi);

    DecreaseReport rep;
    rep.worst = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < spec.samples; ++s) {
        const double r = std::exp(llo + (lhi - llo) * unit(rng));
        Vec x = random_direction(rng, N);
        for (double& v : x) v *= r;
        Vec u(M, 0.0);
        const double V = cl.eval(x).value;
        if (spec.matched_input && M > 0) {
            const double un = matched_norm(cl, V, spec.guard) * (0.5 + 0.5 * (1.0 - unit(rng)));
            const Vec d = random_direction(rng, M);
            for (std::size_t i = 0; i < M; ++i) u[i] = un * d[i];
        }
        if (cl.iss_threshold(norm2(u)) * (1.0 + spec.guard) > V) continue;
        const Vec f = model.f(x, u);
        const double tau = 1e-6 * (1.0 + norm2(x)) / (1.0 + norm2(f));
        Vec xp = x, xm = x;
        for (std::size_t i = 0; i < N; ++i) {
            xp[i] += tau * f[i];
            xm[i] -= tau * f[i];
        }
        const double dV = (cl.eval(xp).value - cl.eval(xm).value) / (2.0 * tau);
        ++rep.samples;
        rep.worst = std::max(rep.worst, dV);
        if (dV >= -1e-8 * (1.0 + V)) ++rep.violations;
    }
    return rep;
}

IssReport check_iss_bound(const SystemModel& model, const CompositeLyapunov& cl, const IssSpec& spec) {
    const std::size_t N = model.state_dim();
    const std::size_t M = model.input_dim;
    std::mt19937_64 rng(spec.seed);
    Vec dir = spec.direction;
    if (dir.empty() && M > 0) {
        dir.assign(M, 0.0);
        dir[0] = 1.0;
    }
    Vec uval(M, 0.0);
    if (spec.u_norm > 0.0) {
        if (M == 0) throw Error(ErrorKind::InvalidArgument, "model has no input");
        const double dn = norm2(dir);
        for (std::size_t i = 0; i < M; ++i) uval[i] = spec.u_norm * dir[i] / dn;
    }
    const InputSignal input = spec.u_norm > 0.0 ? InputSignal::step(uval) : InputSignal::zero(M);

    IssReport rep;
    rep.threshold = spec.u_norm > 0.0 ? cl.iss_threshold(spec.u_norm) : 0.0;
    for (std::size_t run = 0; run < spec.runs; ++run) {
        const Vec x0 = random_direction(rng, N);
        const Trajectory tr = integrate(model, x0, input, spec.T, spec.dt, &cl);
        ++rep.runs;
        bool ok = !tr.diverged;
        for (std::size_t k = 1; k < tr.V.size(); ++k) rep.max_increase = std::max(rep.max_increase, tr.V[k] - tr.V[k - 1]);
        if (spec.u_norm == 0.0) {
            double worst_step = 0.0;
            for (std::size_t k = 1; k < tr.V.size(); ++k) worst_step = std::max(worst_step, tr.V[k] - tr.V[k - 1]);
            const double ratio = norm2(tr.x.back()) / norm2(x0);
            rep.worst_ratio = std::max(rep.worst_ratio, ratio);
            ok = ok && worst_step <= 1e-8 && ratio < 1e-3;
        } else {
            const std::size_t start = tr.V.size() - tr.V.size() / 4;
            double vmax = 0.0;
            for (std::size_t k = start; k < tr.V.size(); ++k) vmax = std::max(vmax, tr.V[k]);
            const double ratio = vmax / rep.threshold;
            rep.worst_ratio = std::max(rep.worst_ratio, ratio);
            ok = ok && ratio <= 1.1;
        }
        if (!ok) ++rep.failures;
    }
    return rep;
}

}  // namespace smallgain
