#include "smallgain/numeric.hpp"

#include <algorithm>
#include <stdexcept>

#include "smallgain/error.hpp"

namespace smallgain {

bool strictly_less(std::span<const double> a, std::span<const double> b, double tol) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!strictly_less(a[i], b[i], tol)) return false;
    }
    return true;
}

bool dominates(std::span<const double> a, std::span<const double> b, double rel) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - rel * std::fabs(b[i])) return false;
    }
    return true;
}

double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

Vec log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0) {
        throw Error(ErrorKind::InvalidArgument, "log_grid: need 0 < lo <= hi and count > 0");
    }
    Vec out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::string_view error_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::RejectedNotClassK: return "RejectedNotClassK";
        case ErrorKind::IncompatibleMaf: return "IncompatibleMaf";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::WrongAggregation: return "WrongAggregation";
        case ErrorKind::NotLinearizable: return "NotLinearizable";
        case ErrorKind::NotHomogeneous: return "NotHomogeneous";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::NotInOmega: return "NotInOmega";
        case ErrorKind::Stalled: return "Stalled";
        case ErrorKind::NotBounded: return "NotBounded";
        case ErrorKind::SeedNotFound: return "SeedNotFound";
        case ErrorKind::PathStalled: return "PathStalled";
        case ErrorKind::NotIrreducible: return "NotIrreducible";
        case ErrorKind::LambdaNotContractive: return "LambdaNotContractive";
        case ErrorKind::CycleConditionFails: return "CycleConditionFails";
        case ErrorKind::EmptyGap: return "EmptyGap";
        case ErrorKind::BisectionFailure: return "BisectionFailure";
        case ErrorKind::SpliceFailure: return "SpliceFailure";
        case ErrorKind::BlockSgcFails: return "BlockSgcFails";
        case ErrorKind::GeneralCondFails: return "GeneralCondFails";
        case ErrorKind::NotHurwitz: return "NotHurwitz";
        case ErrorKind::BadParameters: return "BadParameters";
        case ErrorKind::Diverged: return "Diverged";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace smallgain
