#include "smallgain/omega_path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>

#include "smallgain/error.hpp"
#include "smallgain/smallgain.hpp"

namespace smallgain {

// ---------------------------------------------------------------------------
// OmegaPath

OmegaPath OmegaPath::from_anchors(Vec radii, std::vector<Vec> values) {
    if (radii.size() < 2 || radii.size() != values.size()) {
        throw Error(ErrorKind::InvalidArgument, "path needs at least two anchors with matching values");
    }
    const std::size_t n = values.front().size();
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "path dimension must be positive");
    if (radii.front() != 0.0) throw Error(ErrorKind::InvalidArgument, "first anchor radius must be 0");
    OmegaPath p;
    p.cols_.assign(n, Vec(radii.size()));
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (values[k].size() != n) throw Error(ErrorKind::InvalidArgument, "anchor dimension mismatch");
        if (k > 0 && !(radii[k] > radii[k - 1])) {
            throw Error(ErrorKind::InvalidArgument, "anchor radii must increase strictly");
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double v = values[k][i];
            if (k == 0 && v != 0.0) throw Error(ErrorKind::InvalidArgument, "path must start at the origin");
            if (k > 0 && !(v > p.cols_[i][k - 1]) ) {
                throw Error(ErrorKind::InvalidArgument,
                            "component " + std::to_string(i + 1) + " is not strictly increasing at anchor " +
                                std::to_string(k));
            }
            if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite anchor value");
            p.cols_[i][k] = v;
        }
    }
    p.radii_ = std::move(radii);
    return p;
}

OmegaPath OmegaPath::from_points(std::vector<Vec> points) {
    if (points.empty()) throw Error(ErrorKind::InvalidArgument, "no path points");
    if (norm_inf(points.front()) != 0.0) points.insert(points.begin(), Vec(points.front().size(), 0.0));
    Vec radii;
    radii.reserve(points.size());
    for (const Vec& p : points) radii.push_back(norm_inf(p));
    return from_anchors(std::move(radii), std::move(points));
}

OmegaPath OmegaPath::ray(Vec direction) {
    const std::size_t n = direction.size();
    return from_anchors({0.0, 1.0}, {Vec(n, 0.0), std::move(direction)});
}

std::vector<Vec> OmegaPath::values() const {
    std::vector<Vec> out(radii_.size(), Vec(dim()));
    for (std::size_t k = 0; k < radii_.size(); ++k) {
        for (std::size_t i = 0; i < dim(); ++i) out[k][i] = cols_[i][k];
    }
    return out;
}

double OmegaPath::component(std::size_t i, double r) const {
    if (!(r > 0.0)) return 0.0;
    const Vec& c = cols_[i];
    const std::size_t m = radii_.size() - 1;
    if (r >= radii_[m]) {
        const double slope = (c[m] - c[m - 1]) / (radii_[m] - radii_[m - 1]);
        return c[m] + slope * (r - radii_[m]);
    }
    const std::size_t k = static_cast<std::size_t>(
        std::upper_bound(radii_.begin(), radii_.end(), r) - radii_.begin()) - 1;
    const double w = (r - radii_[k]) / (radii_[k + 1] - radii_[k]);
    return c[k] + w * (c[k + 1] - c[k]);
}

Vec OmegaPath::operator()(double r) const {
    Vec out(dim());
    for (std::size_t i = 0; i < dim(); ++i) out[i] = component(i, r);
    return out;
}

double OmegaPath::inverse(std::size_t i, double v) const {
    if (!(v > 0.0)) return 0.0;
    const Vec& c = cols_[i];
    const std::size_t m = radii_.size() - 1;
    if (v > c[m]) {
        const double slope = (c[m] - c[m - 1]) / (radii_[m] - radii_[m - 1]);
        return radii_[m] + (v - c[m]) / slope;
    }
    // First anchor with value >= v; the segment to its left contains v.
    const std::size_t k = static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), v) - c.begin());
    const double w = (v - c[k - 1]) / (c[k] - c[k - 1]);
    return radii_[k - 1] + w * (radii_[k] - radii_[k - 1]);
}

OmegaPath OmegaPath::scaled(double factor) const {
    if (!(factor > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale factor must be positive");
    OmegaPath p = *this;
    for (Vec& c : p.cols_) {
        for (double& v : c) v *= factor;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Validation

Vec default_validation_radii() { return log_grid(1e-6, 1e6, 1000); }

Vec PathOptions::validation_radii() const { return log_grid(r_min, r_max, validation_points); }

PathReport validate_path(const GainOperator& op, const OmegaPath& sigma, const Vec& radii) {
    if (sigma.dim() != op.dim()) throw Error(ErrorKind::InvalidArgument, "path and operator dimensions differ");
    PathReport rep;
    rep.radii = radii;
    rep.margin_min.reserve(radii.size());
    rep.worst_relative = std::numeric_limits<double>::infinity();
    for (double r : radii) {
        const Vec x = sigma(r);
        const Vec f = op(x);
        double margin = std::numeric_limits<double>::infinity();
        double rel = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < x.size(); ++i) {
            margin = std::min(margin, x[i] - f[i]);
            rel = std::min(rel, (x[i] - f[i]) / std::max(1.0, x[i]));
        }
        rep.margin_min.push_back(margin);
        rep.worst_relative = std::min(rep.worst_relative, rel);
        if (!strictly_less(f, x)) {
            if (rep.grid_failures == 0) rep.first_failure = r;
            ++rep.grid_failures;
        }
    }

    const Vec& ar = sigma.radii();
    const auto anchors = sigma.values();
    rep.anchor_count = ar.size();
    for (std::size_t k = 1; k < ar.size(); ++k) {
        const Vec f = op(anchors[k]);
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (!(f[i] < anchors[k][i])) {
                if (rep.grid_failures == 0 && rep.anchor_failures == 0) rep.first_failure = ar[k];
                ++rep.anchor_failures;
                break;
            }
        }
        for (std::size_t i = 0; i < sigma.dim(); ++i) {
            const double slope = (anchors[k][i] - anchors[k - 1][i]) / (ar[k] - ar[k - 1]);
            if (!(slope > 0.0) || !std::isfinite(slope)) rep.slopes_ok = false;
            const double mid = sigma.component(i, 0.5 * (ar[k] + ar[k - 1]));
            if (!(mid > anchors[k - 1][i] && mid < anchors[k][i])) rep.monotone_ok = false;
        }
    }
    return rep;
}

PathReport validate_path(const GainNetwork& net, const OmegaPath& sigma, const Vec& radii) {
    return validate_path(GainOperator(net), sigma, radii);
}

void write_path_csv(std::ostream& out, const OmegaPath& sigma, const PathReport& report) {
    out << "r";
    for (std::size_t i = 0; i < sigma.dim(); ++i) out << ",sigma_" << (i + 1);
    out << ",margin_min\n";
    char buf[64];
    for (std::size_t k = 0; k < report.radii.size(); ++k) {
        const double r = report.radii[k];
        std::snprintf(buf, sizeof buf, "%.12g", r);
        out << buf;
        for (std::size_t i = 0; i < sigma.dim(); ++i) {
            std::snprintf(buf, sizeof buf, ",%.12g", sigma.component(i, r));
            out << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.12g\n", report.margin_min[k]);
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// Building blocks

namespace {

bool in_omega(const GainOperator& op, const Vec& s) { return strictly_less(op(s), s); }

OmegaPath validated(const GainOperator& op, OmegaPath p, const PathOptions& opts, const char* who) {
    const PathReport rep = validate_path(op, p, opts.validation_radii());
    if (!rep.valid()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: constructed path fails validation near r=%.6g", who,
                      rep.first_failure);
        throw Error(ErrorKind::NotInOmega, buf);
    }
    return p;
}

std::vector<Vec> join(const std::vector<Vec>& down, const std::vector<Vec>& up) {
    std::vector<Vec> pts(down.rbegin(), down.rend());
    for (std::size_t k = 1; k < up.size(); ++k) pts.push_back(up[k]);
    return pts;
}

// sup{t : F(base + t dir) < base}; the returned t satisfies the test.
double max_step(const GainOperator& op, const Vec& base, const Vec& dir) {
    auto holds = [&](double t) {
        Vec x = base;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += t * dir[i];
        return strictly_less(op(x), base);
    };
    double lo = 0.0;
    double hi = norm_inf(base);
    int doublings = 0;
    while (holds(hi)) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 60) return lo;
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (holds(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

// Upward chaining from a point of Omega. Each new anchor satisfies
// F(next) < current, so segments between anchors stay in Omega. Candidate
// directions: the diagonal, the current point itself, and the vector of
// per-coordinate maximal steps (scaled back until jointly admissible).
std::vector<Vec> chain_up(const GainOperator& op, const Vec& seed, double target,
                          const std::function<bool(const Vec&)>& done = {}) {
    const std::size_t n = seed.size();
    std::vector<Vec> anchors{seed};
    Vec base = seed;
    int slow = 0;
    for (int step = 0; step < 200000; ++step) {
        const double m = norm_inf(base);
        if (m >= target && (!done || done(base))) return anchors;

        std::vector<Vec> dirs;
        dirs.emplace_back(n, 1.0);
        dirs.push_back(base);
        for (double& x : dirs.back()) x /= m;
        Vec coord(n);
        for (std::size_t j = 0; j < n; ++j) {
            Vec e(n, 0.0);
            e[j] = 1.0;
            coord[j] = std::min(max_step(op, base, e), 4.0 * m) / m;
        }
        if (norm_inf(coord) > 0.0) dirs.push_back(std::move(coord));

        Vec best;
        double best_score = -1.0;
        for (const Vec& d : dirs) {
            const double t = max_step(op, base, d);
            Vec next = base;
            for (std::size_t i = 0; i < n; ++i) next[i] += 0.5 * t * d[i];
            double score = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) score = std::min(score, next[i] / base[i] - 1.0);
            if (score > best_score) {
                best_score = score;
                best = std::move(next);
            }
        }
        if (!(best_score > 0.0)) {
            throw Error(ErrorKind::PathStalled, "upward chaining cannot leave the current anchor");
        }
        const double growth = norm_inf(best) / m - 1.0;
        slow = growth < 1e-6 ? slow + 1 : 0;
        if (slow >= 50) {
            throw Error(ErrorKind::PathStalled,
                        "upward chaining grew by less than 1e-6 for 50 consecutive steps");
        }
        anchors.push_back(best);
        base = std::move(best);
    }
    throw Error(ErrorKind::PathStalled, "upward chaining hit the step cap");
}

std::optional<Vec> find_seed(const GainOperator& op, std::uint64_t seed) {
    const std::size_t n = op.dim();
    std::vector<Vec> cands;
    cands.emplace_back(n, 1.0);
    for (double low : {0.5, 0.1}) {
        for (std::size_t i = 0; i < n; ++i) {
            Vec d(n, low);
            d[i] = 1.0;
            cands.push_back(std::move(d));
        }
    }
    for (const Vec& d : cands) {
        if (in_omega(op, d)) return d;
    }
    // Shifted power iteration on the unit sphere; for linear operators this
    // converges to the Perron direction, which lies in Omega when rho < 1.
    Vec v(n, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const Vec f = op(v);
        for (std::size_t i = 0; i < n; ++i) v[i] += f[i];
        const double m = norm_inf(v);
        for (double& x : v) x /= m;
        if (in_omega(op, v)) return v;
    }
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    for (int k = 0; k < 500; ++k) {
        Vec d(n);
        for (double& x : d) x = expo(rng);
        const double m = norm_inf(d);
        for (double& x : d) x /= m;
        if (in_omega(op, d)) return d;
    }
    return std::nullopt;
}

OmegaPath chain_path(const GainOperator& op, const PathOptions& opts) {
    auto seed = find_seed(op, opts.seed);
    if (!seed) throw Error(ErrorKind::SeedNotFound, "no point of Omega found on the unit sphere");
    const auto up = chain_up(op, *seed, opts.r_max);
    const auto down = path_downward(op, *seed);
    return OmegaPath::from_points(join(down, up));
}

bool all_rows(const GainNetwork& net, Maf::Kind kind) { return net.all_maf(kind); }

void gain_classes(const GainNetwork& net, bool& bounded, bool& unbounded) {
    bounded = unbounded = false;
    for (std::size_t i = 0; i < net.size(); ++i) {
        for (std::size_t j : net.active(i)) {
            if (classify_gain(net.gain(i, j)) == GainClass::Bounded) bounded = true;
            else unbounded = true;
        }
    }
}

// Componentwise supremum of the operator: mu_i at the gain suprema.
Vec structural_sup(const GainOperator& op) {
    const GainNetwork& net = op.network();
    const std::size_t n = net.size();
    Vec sup(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Vec slots(n, 0.0);
        for (std::size_t j : net.active(i)) slots[j] = gain_supremum(net.gain(i, j));
        sup[i] = net.maf(i)(slots, 0.0);
    }
    if (op.diag() && op.side() == DiagSide::Outer) sup = apply_diag(*op.diag(), sup);
    return sup;
}

}  // namespace

// ---------------------------------------------------------------------------
// Constructors

std::vector<Vec> path_downward(const GainOperator& op, const Vec& s0) {
    if (s0.size() != op.dim()) throw Error(ErrorKind::InvalidArgument, "start point has wrong dimension");
    if (!(norm_inf(s0) > 0.0) || !dominates(s0, op(s0))) {
        throw Error(ErrorKind::NotInOmega, "start point is not in the decay set");
    }
    constexpr double kFloor = 0.01;
    std::vector<Vec> anchors{s0};
    Vec p = s0;
    const double stop = 1e-12 * norm_inf(s0);
    for (int it = 0; it < 200000; ++it) {
        Vec q = op(p);
        for (std::size_t i = 0; i < q.size(); ++i) {
            q[i] = std::max(q[i], kFloor * p[i]);
            if (!(q[i] < p[i])) {
                throw Error(ErrorKind::Stalled, "downward iteration stopped decreasing in component " +
                                                    std::to_string(i + 1) + " (a fixed point contradicts SGC)");
            }
        }
        anchors.push_back(q);
        p = std::move(q);
        if (norm_inf(p) < stop) {
            anchors.emplace_back(p.size(), 0.0);
            return anchors;
        }
    }
    throw Error(ErrorKind::Stalled, "downward iteration hit the iteration cap");
}

std::vector<Vec> path_downward(const GainNetwork& net, const Vec& s0) {
    return path_downward(GainOperator(net), s0);
}

OmegaPath path_bounded(const GainOperator& op, const PathOptions& opts) {
    const GainNetwork& net = op.network();
    bool bounded = false, unbounded = false;
    gain_classes(net, bounded, unbounded);
    if (unbounded) throw Error(ErrorKind::NotBounded, "path_bounded needs every gain bounded");
    const std::size_t n = net.size();

    const Vec sup = structural_sup(op);
    if (norm_inf(sup) == 0.0) return validated(op, OmegaPath::ray(Vec(n, 1.0)), opts, "path_bounded");
    Vec s0 = sup;
    for (double& x : s0) x *= 1.05;
    const double fill = norm_inf(s0);
    for (double& x : s0) {
        if (x == 0.0) x = fill;
    }
    int doublings = 0;
    while (!in_omega(op, s0)) {
        if (++doublings > 40) {
            throw Error(ErrorKind::NotInOmega, "1.05 x supremum is not in Omega even after 40 doublings");
        }
        for (double& x : s0) x *= 2.0;
    }
    // Above s0 the ray eta * s0 stays in Omega because F never exceeds sup.
    const double eta = std::max(2.0, 2.0 * opts.r_max / norm_inf(s0));
    Vec top = s0;
    for (double& x : top) x *= eta;
    const auto down = path_downward(op, s0);
    return validated(op, OmegaPath::from_points(join(down, {s0, top})), opts, "path_bounded");
}

OmegaPath path_bounded(const GainNetwork& net, const PathOptions& opts) {
    return path_bounded(GainOperator(net), opts);
}

OmegaPath path_irreducible(const GainOperator& op, const PathOptions& opts) {
    if (!is_irreducible(adjacency(op.network()))) {
        throw Error(ErrorKind::NotIrreducible, "interconnection is reducible; use path_reducible");
    }
    return validated(op, chain_path(op, opts), opts, "path_irreducible");
}

OmegaPath path_irreducible(const GainNetwork& net, const PathOptions& opts) {
    return path_irreducible(GainOperator(net), opts);
}

OmegaPath path_homogeneous(const GainOperator& op, const PathOptions& opts) {
    const PerronResult pr = nonlinear_perron(op);
    if (!(pr.lambda < 1.0 - kTolStrict)) {
        throw Error(ErrorKind::LambdaNotContractive,
                    "Perron eigenvalue " + std::to_string(pr.lambda) + " is not below 1");
    }
    return validated(op, OmegaPath::ray(pr.eigvec), opts, "path_homogeneous");
}

OmegaPath path_homogeneous(const GainNetwork& net, const PathOptions& opts) {
    return path_homogeneous(GainOperator(net), opts);
}

OmegaPath path_max(const GainNetwork& net, const PathOptions& opts) {
    if (!all_rows(net, Maf::Kind::Max)) {
        throw Error(ErrorKind::WrongAggregation, "path_max needs max aggregation in every row");
    }
    const GainOperator op(net);
    if (net.size() == 1) return validated(op, OmegaPath::ray({1.0}), opts, "path_max");
    const SgcVerdict v = check_cycle_condition(net);
    if (v.status == SgcStatus::CertifiedFails) {
        std::string c;
        for (std::size_t k : v.cycle) c += (c.empty() ? "" : ",") + std::to_string(k + 1);
        throw Error(ErrorKind::CycleConditionFails, "cycle (" + c + ") is not a contraction");
    }
    if (!is_irreducible(adjacency(net))) return path_reducible(op, opts).sigma;
    return validated(op, chain_path(op, opts), opts, "path_max");
}

OmegaPath path_three_sum(const GainNetwork& net, const PathOptions& opts) {
    if (net.size() != 3) throw Error(ErrorKind::InvalidArgument, "path_three_sum needs exactly three subsystems");
    if (!all_rows(net, Maf::Kind::Sum)) {
        throw Error(ErrorKind::WrongAggregation, "path_three_sum needs additive aggregation in every row");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            if (i != j && classify_gain(net.gain(i, j)) != GainClass::Unbounded) {
                if (is_irreducible(adjacency(net))) return path_irreducible(net, opts);
                return path_reducible(net, opts).sigma;
            }
        }
    }
    const GainExpr& g12 = net.gain(0, 1);
    const GainExpr& g13 = net.gain(0, 2);
    const GainExpr& g21 = net.gain(1, 0);
    const GainExpr& g23 = net.gain(1, 2);
    const GainExpr& g31 = net.gain(2, 0);
    const GainExpr& g32 = net.gain(2, 1);

    const double lo_r = opts.r_min * 0.1;
    const double hi_r = opts.r_max * 10.0;
    const auto count = static_cast<std::size_t>(std::ceil(20.0 * std::log10(hi_r / lo_r))) + 1;
    const Vec grid = log_grid(lo_r, hi_r, count);

    // sigma_2(r) solves g13^-1(r - g12(s)) = g23^-1(s - g21(r)); the left
    // side decreases and the right side increases in s.
    auto solve_s2 = [&](double r) {
        auto F = [&](double s) {
            return invert_gain(g13, std::max(r - g12(s), 0.0)) - invert_gain(g23, std::max(s - g21(r), 0.0));
        };
        double lo = g21(r);
        double hi = invert_gain(g12, r);
        if (!(lo < hi) || !(F(lo) > 0.0) || !(F(hi) < 0.0)) {
            throw Error(ErrorKind::EmptyGap, "no strict solution for sigma_2 at r=" + std::to_string(r));
        }
        double mid = 0.5 * (lo + hi);
        for (int it = 0; it < 400; ++it) {
            mid = 0.5 * (lo + hi);
            const double fm = F(mid);
            if (std::fabs(fm) <= 1e-13 * r) break;
            if (fm > 0.0) lo = mid;
            else hi = mid;
        }
        if (!(std::fabs(F(mid)) < 1e-10 * r)) {
            throw Error(ErrorKind::BisectionFailure, "sigma_2 residual too large at r=" + std::to_string(r));
        }
        return mid;
    };

    const std::size_t m = grid.size();
    Vec s2(m), h(m), g(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double r = grid[k];
        s2[k] = solve_s2(r);
        h[k] = g31(r) + g32(s2[k]);
        g[k] = invert_gain(g13, std::max(r - g12(s2[k]), 0.0));
    }
    // g*(r) = min over u >= r of g(u), on the grid.
    Vec gstar = g;
    for (std::size_t k = m - 1; k-- > 0;) gstar[k] = std::min(gstar[k], gstar[k + 1]);

    Vec radii{0.0};
    std::vector<Vec> values{Vec(3, 0.0)};
    for (std::size_t k = 0; k < m; ++k) {
        if (!(h[k] < gstar[k] * (1.0 - 1e-12))) {
            throw Error(ErrorKind::EmptyGap, "h(r) >= g*(r) at r=" + std::to_string(grid[k]));
        }
        radii.push_back(grid[k]);
        values.push_back({grid[k], s2[k], 0.5 * (gstar[k] + h[k])});
    }
    return validated(GainOperator(net), OmegaPath::from_anchors(std::move(radii), std::move(values)), opts,
                     "path_three_sum");
}

OmegaPath path_mixed(const GainNetwork& net, const PathOptions& opts) {
    if (!all_rows(net, Maf::Kind::Sum)) {
        throw Error(ErrorKind::WrongAggregation, "path_mixed needs additive aggregation in every row");
    }
    bool has_b = false, has_u = false;
    gain_classes(net, has_b, has_u);
    if (!has_u) return path_bounded(net, opts);
    if (!has_b) {
        if (is_irreducible(adjacency(net))) return path_irreducible(net, opts);
        return path_reducible(net, opts).sigma;
    }

    const std::size_t n = net.size();
    std::vector<std::vector<GainExpr>> gu(n, std::vector<GainExpr>(n)), gb = gu;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : net.active(i)) {
            if (classify_gain(net.gain(i, j)) == GainClass::Unbounded) gu[i][j] = net.gain(i, j);
            else gb[i][j] = net.gain(i, j);
        }
    }
    const std::vector<Maf> sums(n, Maf::sum());
    const GainNetwork net_u(gu, std::vector<GainExpr>(n), sums);
    const GainNetwork net_b(gb, std::vector<GainExpr>(n), sums);
    Vec sb0 = structural_sup(GainOperator(net_b));
    for (double& x : sb0) x *= 1.05;

    const GainOperator full(net);
    std::string last = "no splice radius found";
    for (double kappa : {0.5, 0.25, 0.1, 0.05, 0.02}) {
        try {
            // sigma_U lives in Omega(Gamma_U o (id + kappa)), which leaves room
            // for sigma_B <= kappa sigma_U inside the unbounded gains.
            const GainOperator op_u(net_u, DiagOp{GainExpr::linear(kappa), std::nullopt}, DiagSide::Inner);
            auto seed = find_seed(op_u, opts.seed);
            if (!seed) continue;
            auto covers = [&](const Vec& s) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (!(kappa * s[i] > sb0[i])) return false;
                }
                return true;
            };
            const auto up = chain_up(op_u, *seed, opts.r_max, covers);
            for (std::size_t k = 0; k < up.size(); ++k) {
                if (!covers(up[k])) continue;
                Vec splice = up[k];
                for (std::size_t i = 0; i < n; ++i) splice[i] += sb0[i];
                if (!in_omega(full, splice)) {
                    last = "splice point outside Omega";
                    continue;
                }
                std::vector<Vec> down;
                try {
                    down = path_downward(full, splice);
                } catch (const Error& e) {
                    last = e.what();
                    continue;
                }
                std::vector<Vec> pts(down.rbegin(), down.rend());
                for (std::size_t m = k + 1; m < up.size(); ++m) {
                    Vec p(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        p[i] = up[m][i] + sb0[i] + 0.5 * kappa * (up[m][i] - up[k][i]);
                    }
                    pts.push_back(std::move(p));
                }
                OmegaPath path = OmegaPath::from_points(std::move(pts));
                const PathReport rep = validate_path(full, path, opts.validation_radii());
                if (rep.valid()) return path;
                last = "validation failed near r=" + std::to_string(rep.first_failure);
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PathStalled && e.kind() != ErrorKind::SeedNotFound) throw;
            last = e.what();
        }
    }
    throw Error(ErrorKind::SpliceFailure, "path_mixed: " + last);
}

ReducibleResult path_reducible(const GainOperator& op, const PathOptions& opts) {
    const GainNetwork& net = op.network();
    const std::size_t n = net.size();
    ReducibleResult res;
    res.scc = scc_decompose(adjacency(net));
    const auto& blocks = res.scc.blocks;
    const std::size_t d = blocks.size();
    if (d < 2) throw Error(ErrorKind::InvalidArgument, "interconnection is irreducible; use path_irreducible");

    for (std::size_t b = 0; b < d; ++b) {
        if (blocks[b].size() == 1) {
            res.block_paths.push_back(OmegaPath::ray({1.0}));
            continue;
        }
        try {
            res.block_paths.push_back(construct_path(op.with_network(net.restrict(blocks[b])), opts).sigma);
        } catch (const Error& e) {
            throw Error(ErrorKind::BlockSgcFails, "block " + std::to_string(b + 1) + ": " +
                                                      std::string(e.name()) + ": " + e.what());
        }
    }

    // Blocks are added from the source (last) to the sink (first). A block
    // only sees itself and later blocks, so its rows can be settled once the
    // later components are fixed: scale its own path until the rows hold
    // with the upstream values at radius r, then double that level.
    auto compose_on = [&](const Vec& grid) {
        const std::size_t m = grid.size();
        std::vector<Vec> pts(m, Vec(n, 0.0));
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t a = 0; a < blocks[d - 1].size(); ++a) {
                pts[k][blocks[d - 1][a]] = res.block_paths[d - 1].component(a, grid[k]);
            }
        }
        for (std::size_t b = d - 1; b-- > 0;) {
            const auto& idx = blocks[b];
            const OmegaPath& tau = res.block_paths[b];
            Vec level(m);
            for (std::size_t k = 0; k < m; ++k) {
                auto ok = [&](double kappa) {
                    Vec x = pts[k];
                    for (std::size_t a = 0; a < idx.size(); ++a) x[idx[a]] = tau.component(a, kappa);
                    const Vec f = op(x);
                    for (std::size_t i : idx) {
                        if (!(x[i] > 0.0) || !(f[i] <= x[i] * (1.0 - 1e-9))) return false;
                    }
                    return true;
                };
                double hi = grid[k];
                int guard = 0;
                while (!ok(hi)) {
                    hi *= 2.0;
                    if (++guard > 2000 || !std::isfinite(hi)) {
                        throw Error(ErrorKind::BlockSgcFails,
                                    "block " + std::to_string(b + 1) + " cannot absorb its upstream input");
                    }
                }
                while (hi > 1e-300 && ok(0.5 * hi)) hi *= 0.5;
                double lo = 0.5 * hi;
                for (int it = 0; it < 40; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (ok(mid)) hi = mid;
                    else lo = mid;
                }
                level[k] = hi;
            }
            // Running maximum including the next sample, so the level at r_k
            // also covers the upstream values up to r_{k+1}.
            double run = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                run = std::max(run, level[std::min(k + 1, m - 1)]);
                run = std::max(run, level[k]);
                const double kappa = 2.0 * run + grid[k];
                for (std::size_t a = 0; a < idx.size(); ++a) pts[k][idx[a]] = tau.component(a, kappa);
            }
        }
        return pts;
    };

    const double top = opts.r_max * 10.0;
    double bottom = std::min(1e-8, opts.r_min * 0.01);
    const double want_low = bottom;
    for (int attempt = 0; attempt < 20; ++attempt) {
        const auto count = static_cast<std::size_t>(std::ceil(20.0 * std::log10(top / bottom))) + 1;
        auto pts = compose_on(log_grid(bottom, top, count));
        if (norm_inf(pts.front()) <= want_low || attempt == 19) {
            res.sigma = validated(op, OmegaPath::from_points(std::move(pts)), opts, "path_reducible");
            return res;
        }
        bottom *= 1e-4;
    }
    return res;
}

ReducibleResult path_reducible(const GainNetwork& net, const PathOptions& opts) {
    return path_reducible(GainOperator(net), opts);
}

PathResult construct_path(const GainOperator& op, const PathOptions& opts) {
    const GainNetwork& net = op.network();
    const bool plain = !op.diag().has_value();
    bool has_b = false, has_u = false;
    gain_classes(net, has_b, has_u);
    PathResult res;

    auto lin = plain ? linearize(net) : std::nullopt;
    const bool power_form = lin && std::fabs(lin->exponent - 1.0) > 1e-12;
    if (net.size() > 1 && (opts.declare_homogeneous || power_form) && is_irreducible(adjacency(net))) {
        res.sigma = path_homogeneous(op, opts);
        res.method = "homogeneous";
    } else if (plain && all_rows(net, Maf::Kind::Max)) {
        res.sigma = path_max(net, opts);
        res.method = "max";
    } else if (plain && net.size() == 3 && all_rows(net, Maf::Kind::Sum) && has_u && !has_b &&
               [&] {
                   for (std::size_t i = 0; i < 3; ++i) {
                       if (net.active(i).size() != 2) return false;
                   }
                   return true;
               }()) {
        res.sigma = path_three_sum(net, opts);
        res.method = "three_sum";
    } else if (plain && all_rows(net, Maf::Kind::Sum) && has_b && has_u) {
        res.sigma = path_mixed(net, opts);
        res.method = "mixed";
    } else if (!has_u) {
        res.sigma = path_bounded(op, opts);
        res.method = "bounded";
    } else if (is_irreducible(adjacency(net))) {
        res.sigma = path_irreducible(op, opts);
        res.method = "irreducible";
    } else {
        res.sigma = path_reducible(op, opts).sigma;
        res.method = "reducible";
    }
    res.report = validate_path(op, res.sigma, opts.validation_radii());
    return res;
}

PathResult construct_path(const GainNetwork& net, const PathOptions& opts) {
    return construct_path(GainOperator(net), opts);
}

}  // namespace smallgain
