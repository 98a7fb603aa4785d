#include "smallgain/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "smallgain/error.hpp"

namespace smallgain {

const char* external_mode_name(ExternalMode mode) {
    switch (mode) {
        case ExternalMode::Additive: return "sum";
        case ExternalMode::Max: return "max";
        case ExternalMode::Separated: return "separated";
        case ExternalMode::General: return "general";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// MonotoneInterp

MonotoneInterp::MonotoneInterp(Vec x, Vec y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() < 2 || x_.size() != y_.size() || x_[0] != 0.0 || y_[0] != 0.0) {
        throw Error(ErrorKind::InvalidArgument, "interpolant needs knots starting at (0, 0)");
    }
    for (std::size_t k = 1; k < x_.size(); ++k) {
        if (!(x_[k] > x_[k - 1]) || !(y_[k] >= y_[k - 1]) || !std::isfinite(y_[k])) {
            throw Error(ErrorKind::InvalidArgument, "interpolant knots must be increasing");
        }
    }
}

MonotoneInterp MonotoneInterp::identity() {
    MonotoneInterp f({0.0, 1.0}, {0.0, 1.0});
    f.identity_ = true;
    return f;
}

double MonotoneInterp::operator()(double r) const {
    if (identity_) return r;
    if (!(r > 0.0)) return 0.0;
    if (r >= x_.back()) return y_.back();
    const std::size_t k =
        static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), r) - x_.begin()) - 1;
    const double w = (r - x_[k]) / (x_[k + 1] - x_[k]);
    return y_[k] + w * (y_[k + 1] - y_[k]);
}

double MonotoneInterp::inverse(double v) const {
    if (identity_) return v;
    if (!(v > 0.0)) return 0.0;
    if (v > y_.back()) {
        throw Error(ErrorKind::OutOfRange, "phi is bounded by " + std::to_string(y_.back()) +
                                               "; input level " + std::to_string(v) + " not covered");
    }
    const std::size_t k = static_cast<std::size_t>(std::lower_bound(y_.begin(), y_.end(), v) - y_.begin());
    if (y_[k] == y_[k - 1]) return x_[k - 1];
    const double w = (v - y_[k - 1]) / (y_[k] - y_[k - 1]);
    return x_[k - 1] + w * (x_[k] - x_[k - 1]);
}

// ---------------------------------------------------------------------------
// Subsystems

SubsystemSpec SubsystemSpec::quadratic(std::vector<Vec> P) {
    const std::size_t n = P.size();
    for (const Vec& row : P) {
        if (row.size() != n) throw Error(ErrorKind::InvalidArgument, "P must be square");
    }
    SubsystemSpec s;
    s.dim = n;
    s.name = "quadratic";
    s.V = [P = std::move(P)](std::span<const double> x) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (std::size_t j = 0; j < x.size(); ++j) v += x[i] * P[i][j] * x[j];
        }
        return v;
    };
    return s;
}

SubsystemSpec SubsystemSpec::norm(std::size_t dim) {
    SubsystemSpec s;
    s.dim = dim;
    s.name = "norm";
    s.V = [](std::span<const double> x) {
        double v = 0.0;
        for (double xi : x) v += xi * xi;
        return std::sqrt(v);
    };
    return s;
}

void audit_subsystem(const SubsystemSpec& spec, std::uint64_t seed) {
    if (spec.dim == 0 || !spec.V) throw Error(ErrorKind::InvalidArgument, "subsystem '" + spec.name + "' is empty");
    const Vec zero(spec.dim, 0.0);
    if (spec.V(zero) != 0.0) throw Error(ErrorKind::InvalidArgument, "V(0) != 0 for '" + spec.name + "'");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < 64; ++k) {
        Vec x(spec.dim);
        for (double& v : x) v = gauss(rng) * std::pow(10.0, (k % 7) - 3);
        if (!(spec.V(x) > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "V is not positive definite for '" + spec.name + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// phi

namespace {

double row_internal(const GainNetwork& net, std::size_t i, const Vec& s) { return net.eval_row(i, s, 0.0); }

const DiagOp& need_diag(const ComposeOptions& opts) {
    if (!opts.diag) {
        throw Error(ErrorKind::InvalidArgument,
                    std::string(external_mode_name(opts.mode)) + " mode needs the diagonal factor alpha");
    }
    return *opts.diag;
}

// Raw phi at one radius; +inf when no row constrains it.
double phi_at(const GainNetwork& net, const Vec& s, const ComposeOptions& opts) {
    const std::size_t n = net.size();
    double best = std::numeric_limits<double>::infinity();
    if (opts.mode == ExternalMode::General) {
        auto holds = [&](double rho) { return strictly_less(net.eval_ext(s, rho), s); };
        if (!holds(0.0)) return 0.0;
        double hi = std::max(norm_inf(s), 1e-300);
        int k = 0;
        while (holds(hi)) {
            hi *= 2.0;
            if (++k > 200) return best;
        }
        double lo = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (holds(mid)) lo = mid;
            else hi = mid;
        }
        return 0.9 * lo;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const GainExpr& gu = net.external_gain(i);
        if (gu.kind() == GainExpr::Kind::Zero) continue;
        const double gi = row_internal(net, i, s);
        double level = 0.0;
        if (gi == 0.0) {
            if (opts.mode == ExternalMode::Separated) continue;
            level = 0.5 * s[i];
        } else {
            switch (opts.mode) {
                case ExternalMode::Additive: level = need_diag(opts).alpha(gi); break;
                case ExternalMode::Max: level = gi; break;
                case ExternalMode::Separated: level = need_diag(opts).alpha(gi); break;
                case ExternalMode::General: break;
            }
        }
        best = std::min(best, invert_gain(gu, level));
    }
    return best;
}

bool no_external(const GainNetwork& net) {
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (net.external_gain(i).kind() != GainExpr::Kind::Zero) return false;
    }
    return true;
}

void check_mode(const GainNetwork& net, const ComposeOptions& opts) {
    for (std::size_t i = 0; i < net.size(); ++i) {
        const Maf& m = net.maf(i);
        switch (opts.mode) {
            case ExternalMode::Additive:
                need_diag(opts);
                if (!(m.external_additive() || m.kind() == Maf::Kind::Sum)) {
                    throw Error(ErrorKind::InvalidArgument, "row " + std::to_string(i + 1) +
                                                                " does not add the external gain");
                }
                break;
            case ExternalMode::Max:
                if (!(m.kind() == Maf::Kind::Max && !m.external_additive())) {
                    throw Error(ErrorKind::InvalidArgument, "row " + std::to_string(i + 1) +
                                                                " does not maximize over the external gain");
                }
                break;
            case ExternalMode::Separated:
                if (!need_diag(opts).separation) {
                    throw Error(ErrorKind::InvalidArgument, "separated mode needs the constant c");
                }
                break;
            case ExternalMode::General: break;
        }
    }
}

}  // namespace

MonotoneInterp derive_phi(const GainNetwork& net, const OmegaPath& sigma, const ComposeOptions& opts) {
    check_mode(net, opts);
    if (no_external(net)) return MonotoneInterp::identity();

    Vec grid = log_grid(1e-8, 1e8, 1601);
    for (double r : sigma.radii()) {
        if (r > 1e-8 && r < 1e8) grid.push_back(r);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const std::size_t m = grid.size();

    Vec raw(m);
    for (std::size_t k = 0; k < m; ++k) raw[k] = phi_at(net, sigma(grid[k]), opts);

    // Lower envelope that is nondecreasing: on [r_{k-1}, r_k] stay below the
    // raw values at both ends and everything to the right.
    Vec env(m);
    double run = std::numeric_limits<double>::infinity();
    for (std::size_t k = m; k-- > 0;) {
        run = std::min(run, raw[k]);
        env[k] = k > 0 ? std::min(run, raw[k - 1]) : run;
    }
    if (!std::isfinite(env.back())) {
        // Unconstrained at the top of the grid: continue with the identity.
        for (std::size_t k = 0; k < m; ++k) {
            if (!std::isfinite(env[k])) env[k] = grid[k];
        }
        run = std::numeric_limits<double>::infinity();
        for (std::size_t k = m; k-- > 0;) env[k] = run = std::min(run, env[k]);
    }
    Vec x{0.0}, y{0.0};
    for (std::size_t k = 0; k < m; ++k) {
        // Slightly below 1 and increasing in k, so flat stretches still rise.
        const double f = 1.0 - 1e-3 * static_cast<double>(m - k) / static_cast<double>(m);
        const double v = env[k] * f;
        if (!(v > y.back())) continue;
        x.push_back(grid[k]);
        y.push_back(v);
    }
    if (x.size() < 2) {
        throw Error(ErrorKind::OutOfRange, "no positive input level satisfies the general condition");
    }
    return MonotoneInterp(std::move(x), std::move(y));
}

GeneralCondTable general_condition(const GainNetwork& net, const OmegaPath& sigma, const MonotoneInterp& phi,
                                   const ComposeOptions& opts, const Vec& radii) {
    GeneralCondTable t;
    t.radii = radii;
    const std::size_t n = net.size();
    for (double r : radii) {
        const Vec s = sigma(r);
        const double p = phi(r);
        Vec f;
        if (opts.mode == ExternalMode::Separated) {
            f.resize(n);
            const double c = *need_diag(opts).separation;
            for (std::size_t i = 0; i < n; ++i) f[i] = (c + net.external_gain(i)(p)) * row_internal(net, i, s);
        } else {
            f = net.eval_ext(s, p);
        }
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) margin = std::min(margin, s[i] - f[i]);
        t.phi.push_back(p);
        t.margin_min.push_back(strictly_less(f, s) ? margin : std::min(margin, 0.0));
    }
    return t;
}

CompositeLyapunov compose(const GainNetwork& net, const OmegaPath& sigma, std::vector<SubsystemSpec> subs,
                          const ComposeOptions& opts) {
    const std::size_t n = net.size();
    if (sigma.dim() != n || subs.size() != n) {
        throw Error(ErrorKind::InvalidArgument, "path, subsystems and network sizes differ");
    }
    for (const SubsystemSpec& s : subs) audit_subsystem(s);
    check_mode(net, opts);

    const bool diag_path = opts.mode == ExternalMode::Additive || opts.mode == ExternalMode::Separated;
    const GainOperator op = diag_path ? GainOperator(net, *opts.diag, DiagSide::Outer) : GainOperator(net);
    const PathReport rep = validate_path(op, sigma, opts.radii);
    if (!rep.valid()) {
        throw Error(ErrorKind::NotInOmega,
                    "path is not an Omega-path for this network near r=" + std::to_string(rep.first_failure));
    }

    MonotoneInterp phi = derive_phi(net, sigma, opts);
    GeneralCondTable table = general_condition(net, sigma, phi, opts, opts.radii);
    for (std::size_t k = 0; k < table.radii.size(); ++k) {
        if (!(table.margin_min[k] > 0.0)) {
            throw Error(ErrorKind::GeneralCondFails,
                        "general condition fails at r=" + std::to_string(table.radii[k]));
        }
    }
    std::vector<GainExpr> gu(n);
    for (std::size_t i = 0; i < n; ++i) gu[i] = net.external_gain(i);
    return CompositeLyapunov(sigma, std::move(subs), opts.mode, std::move(phi), std::move(gu), std::move(table));
}

// ---------------------------------------------------------------------------
// CompositeLyapunov

CompositeLyapunov::CompositeLyapunov(OmegaPath sigma, std::vector<SubsystemSpec> subs, ExternalMode mode,
                                     MonotoneInterp phi, std::vector<GainExpr> gamma_u, GeneralCondTable table)
    : sigma_(std::move(sigma)),
      subs_(std::move(subs)),
      mode_(mode),
      phi_(std::move(phi)),
      gamma_u_(std::move(gamma_u)),
      table_(std::move(table)) {}

std::size_t CompositeLyapunov::state_dim() const {
    std::size_t d = 0;
    for (const SubsystemSpec& s : subs_) d += s.dim;
    return d;
}

CompositeLyapunov::Value CompositeLyapunov::eval(std::span<const double> x) const {
    if (x.size() != state_dim()) throw Error(ErrorKind::InvalidArgument, "state dimension mismatch");
    Vec w(subs_.size());
    std::size_t off = 0;
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        w[i] = sigma_.inverse(i, subs_[i].V(x.subspan(off, subs_[i].dim)));
        off += subs_[i].dim;
    }
    Value out;
    out.value = *std::max_element(w.begin(), w.end());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] >= out.value - 1e-12 * out.value) out.argmax.push_back(i);
    }
    return out;
}

double CompositeLyapunov::iss_threshold(double u_norm) const {
    if (u_norm < 0.0) throw Error(ErrorKind::InvalidArgument, "input norm must be nonnegative");
    double level = 0.0;
    for (const GainExpr& g : gamma_u_) {
        if (g.kind() == GainExpr::Kind::Zero) continue;
        level = std::max(level, phi_.inverse(g(u_norm)));
    }
    return level;
}

CompositeLyapunov CompositeLyapunov::with_scaled_sigma(double factor) const {
    CompositeLyapunov c = *this;
    c.sigma_ = sigma_.scaled(factor);
    return c;
}

}  // namespace smallgain
