#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace smallgain {

using Vec = std::vector<double>;

/// Relative margin used to certify strict inequalities.
inline constexpr double kTolStrict = 1e-9;

/// `a < b` in the certified sense: a <= b - tol * max(1, b).
inline bool strictly_less(double a, double b, double tol = kTolStrict) {
    return a <= b - tol * std::fmax(1.0, std::fabs(b));
}

/// Componentwise certified `a < b`.
bool strictly_less(std::span<const double> a, std::span<const double> b,
                   double tol = kTolStrict);

/// Componentwise a >= b up to a purely relative slack, a_i >= b_i (1 - rel).
/// Used to accept falsification witnesses; the slack only absorbs rounding.
bool dominates(std::span<const double> a, std::span<const double> b, double rel = 1e-12);

double norm_inf(std::span<const double> v);

/// `count` log-spaced points in [lo, hi], endpoints included.
Vec log_grid(double lo, double hi, std::size_t count);

}  // namespace smallgain
