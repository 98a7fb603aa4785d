#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "smallgain/graph.hpp"
#include "smallgain/network.hpp"

namespace smallgain {

/// Vector of strictly increasing piecewise-linear functions sigma_i with
/// sigma(0) = 0, extended beyond the last anchor with the last slope.
class OmegaPath {
public:
    OmegaPath() = default;

    /// radii[0] = 0 and values[0] = 0; both strictly increasing.
    static OmegaPath from_anchors(Vec radii, std::vector<Vec> values);
    /// Points with strictly increasing components, parametrized by their
    /// infinity norm. The origin is prepended when missing.
    static OmegaPath from_points(std::vector<Vec> points);
    /// sigma(r) = r * direction.
    static OmegaPath ray(Vec direction);

    std::size_t dim() const { return cols_.size(); }
    const Vec& radii() const { return radii_; }
    /// Anchor values, one vector per radius.
    std::vector<Vec> values() const;

    double component(std::size_t i, double r) const;
    Vec operator()(double r) const;
    /// sigma_i^-1; at an anchor value the left segment is used.
    double inverse(std::size_t i, double v) const;

    OmegaPath scaled(double factor) const;

private:
    Vec radii_;
    std::vector<Vec> cols_;  // cols_[i][k] = sigma_i(radii_[k])
};

struct PathReport {
    Vec radii;
    Vec margin_min;  // min_i (sigma_i(r) - F_i(sigma(r)))
    std::size_t grid_failures = 0;
    std::size_t anchor_count = 0;
    std::size_t anchor_failures = 0;
    bool monotone_ok = true;
    bool slopes_ok = true;
    double first_failure = 0.0;
    /// min over grid radii of min_i margin_i / max(1, sigma_i)
    double worst_relative = 0.0;

    bool valid() const {
        return grid_failures == 0 && anchor_failures == 0 && monotone_ok && slopes_ok;
    }
};

/// 10^3 log-spaced radii in [1e-6, 1e6].
Vec default_validation_radii();

/// Checks F(sigma(r)) < sigma(r) at `radii` (certified margin) and at every
/// anchor (positive margin), and audits monotonicity and slopes.
PathReport validate_path(const GainOperator& op, const OmegaPath& sigma,
                         const Vec& radii = default_validation_radii());
PathReport validate_path(const GainNetwork& net, const OmegaPath& sigma,
                         const Vec& radii = default_validation_radii());

/// Header `r,sigma_1,...,sigma_n,margin_min`, one row per report radius.
void write_path_csv(std::ostream& out, const OmegaPath& sigma, const PathReport& report);

struct PathOptions {
    double r_min = 1e-6;
    double r_max = 1e6;
    std::size_t validation_points = 1000;
    /// Lets the dispatcher try the Perron ray first.
    bool declare_homogeneous = false;
    std::uint64_t seed = 0x0a1b2c3dULL;

    Vec validation_radii() const;
};

/// Anchors s0, F(s0), ... down to the origin (last entry is 0). Each step
/// is max(F(p), 0.01 p), so rows without gains still shrink.
std::vector<Vec> path_downward(const GainOperator& op, const Vec& s0);
std::vector<Vec> path_downward(const GainNetwork& net, const Vec& s0);

OmegaPath path_bounded(const GainOperator& op, const PathOptions& opts = {});
OmegaPath path_bounded(const GainNetwork& net, const PathOptions& opts = {});

OmegaPath path_irreducible(const GainOperator& op, const PathOptions& opts = {});
OmegaPath path_irreducible(const GainNetwork& net, const PathOptions& opts = {});

OmegaPath path_homogeneous(const GainOperator& op, const PathOptions& opts = {});
OmegaPath path_homogeneous(const GainNetwork& net, const PathOptions& opts = {});

OmegaPath path_max(const GainNetwork& net, const PathOptions& opts = {});

/// Explicit construction for three subsystems with additive aggregation;
/// sigma_1(r) = r.
OmegaPath path_three_sum(const GainNetwork& net, const PathOptions& opts = {});

OmegaPath path_mixed(const GainNetwork& net, const PathOptions& opts = {});

struct ReducibleResult {
    OmegaPath sigma;
    SccDecomposition scc;
    std::vector<OmegaPath> block_paths;
};

ReducibleResult path_reducible(const GainOperator& op, const PathOptions& opts = {});
ReducibleResult path_reducible(const GainNetwork& net, const PathOptions& opts = {});

struct PathResult {
    OmegaPath sigma;
    std::string method;
    PathReport report;
};

/// Fixed dispatch: homogeneous, max, three_sum, mixed, bounded,
/// irreducible, reducible. Stages that need the plain operator are skipped
/// when `op` carries a diagonal factor.
PathResult construct_path(const GainOperator& op, const PathOptions& opts = {});
PathResult construct_path(const GainNetwork& net, const PathOptions& opts = {});

}  // namespace smallgain
