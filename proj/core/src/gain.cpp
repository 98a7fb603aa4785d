#include "smallgain/gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "smallgain/error.hpp"

namespace smallgain {

struct GainExpr::Node {
    Kind kind = Kind::Zero;
    double coeff = 0.0;
    double exponent = 1.0;
    std::vector<GainExpr> children;
};

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::RejectedNotClassK,
                    std::string(what) + " must be a positive finite number");
    }
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

GainExpr::GainExpr() : node_(std::make_shared<const Node>()) {}

GainExpr::GainExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

GainExpr GainExpr::zero() { return GainExpr(); }

GainExpr GainExpr::linear(double slope) {
    require_positive(slope, "linear slope");
    return GainExpr(std::make_shared<const Node>(Node{Kind::Linear, slope, 1.0, {}}));
}

GainExpr GainExpr::power(double coeff, double exponent) {
    require_positive(coeff, "power coefficient");
    require_positive(exponent, "power exponent");
    return GainExpr(std::make_shared<const Node>(Node{Kind::Power, coeff, exponent, {}}));
}

GainExpr GainExpr::saturating(double coeff) {
    require_positive(coeff, "saturating coefficient");
    return GainExpr(std::make_shared<const Node>(Node{Kind::Saturating, coeff, 1.0, {}}));
}

GainExpr GainExpr::atan(double coeff) {
    require_positive(coeff, "atan coefficient");
    return GainExpr(std::make_shared<const Node>(Node{Kind::Atan, coeff, 1.0, {}}));
}

GainExpr GainExpr::sum(std::vector<GainExpr> children) {
    if (children.size() < 2) throw Error(ErrorKind::InvalidArgument, "sum needs at least two terms");
    return GainExpr(std::make_shared<const Node>(Node{Kind::Sum, 0.0, 1.0, std::move(children)}));
}

GainExpr GainExpr::max(std::vector<GainExpr> children) {
    if (children.empty()) throw Error(ErrorKind::InvalidArgument, "max needs at least one term");
    return GainExpr(std::make_shared<const Node>(Node{Kind::Max, 0.0, 1.0, std::move(children)}));
}

GainExpr GainExpr::compose(GainExpr outer, GainExpr inner) {
    return GainExpr(std::make_shared<const Node>(
        Node{Kind::Compose, 0.0, 1.0, {std::move(outer), std::move(inner)}}));
}

GainExpr GainExpr::plus_id(GainExpr inner) {
    return GainExpr(std::make_shared<const Node>(Node{Kind::PlusId, 0.0, 1.0, {std::move(inner)}}));
}

GainExpr::Kind GainExpr::kind() const { return node_->kind; }
double GainExpr::coeff() const { return node_->coeff; }
double GainExpr::exponent() const { return node_->exponent; }
const std::vector<GainExpr>& GainExpr::children() const { return node_->children; }

double GainExpr::operator()(double s) const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::Zero: return 0.0;
        case Kind::Linear: return n.coeff * s;
        case Kind::Power: return n.coeff * std::pow(s, n.exponent);
        case Kind::Saturating: return n.coeff * s / (1.0 + s);
        case Kind::Atan: return n.coeff * std::atan(s);
        case Kind::Sum: {
            double acc = 0.0;
            for (const auto& c : n.children) acc += c(s);
            return acc;
        }
        case Kind::Max: {
            double acc = 0.0;
            for (const auto& c : n.children) acc = std::max(acc, c(s));
            return acc;
        }
        case Kind::Compose: return n.children[0](n.children[1](s));
        case Kind::PlusId: return s + n.children[0](s);
    }
    return 0.0;
}

bool operator==(const GainExpr& a, const GainExpr& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    if (a.coeff() != b.coeff() || a.exponent() != b.exponent()) return false;
    const auto& ca = a.children();
    const auto& cb = b.children();
    if (ca.size() != cb.size()) return false;
    for (std::size_t i = 0; i < ca.size(); ++i) {
        if (!(ca[i] == cb[i])) return false;
    }
    return true;
}

const char* gain_class_name(GainClass c) {
    switch (c) {
        case GainClass::Zero: return "Zero";
        case GainClass::Bounded: return "K_bounded";
        case GainClass::Unbounded: return "K_infinity";
    }
    return "?";
}

GainClass classify_gain(const GainExpr& g) {
    using K = GainExpr::Kind;
    switch (g.kind()) {
        case K::Zero: return GainClass::Zero;
        case K::Linear:
        case K::Power:
        case K::PlusId: return GainClass::Unbounded;
        case K::Saturating:
        case K::Atan: return GainClass::Bounded;
        case K::Sum:
        case K::Max: {
            GainClass best = GainClass::Zero;
            for (const auto& c : g.children()) {
                GainClass cc = classify_gain(c);
                if (cc == GainClass::Unbounded) return GainClass::Unbounded;
                if (cc == GainClass::Bounded) best = GainClass::Bounded;
            }
            return best;
        }
        case K::Compose: {
            GainClass outer = classify_gain(g.children()[0]);
            GainClass inner = classify_gain(g.children()[1]);
            if (outer == GainClass::Zero || inner == GainClass::Zero) return GainClass::Zero;
            if (outer == GainClass::Unbounded && inner == GainClass::Unbounded) {
                return GainClass::Unbounded;
            }
            return GainClass::Bounded;
        }
    }
    return GainClass::Zero;
}

double eval_gain(const GainExpr& g, double s) { return g(s); }

double gain_supremum(const GainExpr& g) {
    using K = GainExpr::Kind;
    switch (classify_gain(g)) {
        case GainClass::Zero: return 0.0;
        case GainClass::Unbounded: return kInf;
        case GainClass::Bounded: break;
    }
    switch (g.kind()) {
        case K::Saturating: return g.coeff();
        case K::Atan: return g.coeff() * std::numbers::pi / 2.0;
        case K::Sum: {
            double acc = 0.0;
            for (const auto& c : g.children()) acc += gain_supremum(c);
            return acc;
        }
        case K::Max: {
            double acc = 0.0;
            for (const auto& c : g.children()) acc = std::max(acc, gain_supremum(c));
            return acc;
        }
        case K::Compose: {
            const GainExpr& outer = g.children()[0];
            double inner_sup = gain_supremum(g.children()[1]);
            if (std::isinf(inner_sup)) return gain_supremum(outer);
            return outer(inner_sup);
        }
        default: return kInf;
    }
}

namespace {

[[noreturn]] void out_of_range(double y, double sup) {
    throw Error(ErrorKind::OutOfRange, "level " + std::to_string(y) +
                                           " is not below the gain supremum " +
                                           std::to_string(sup));
}

// Expanding bracket followed by 60 bisection steps.
double invert_by_bisection(const GainExpr& g, double y) {
    double hi = 1.0;
    int guard = 0;
    while (g(hi) < y) {
        hi *= 2.0;
        if (++guard > 1020 || !std::isfinite(hi)) out_of_range(y, gain_supremum(g));
    }
    while (hi > 1e-300 && g(0.5 * hi) >= y) hi *= 0.5;
    double lo = 0.5 * hi;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) < y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double invert_gain(const GainExpr& g, double y) {
    using K = GainExpr::Kind;
    if (!(y >= 0.0)) throw Error(ErrorKind::InvalidArgument, "invert_gain: negative level");
    if (y == 0.0) return 0.0;
    const double sup = gain_supremum(g);
    if (!(y < sup)) out_of_range(y, sup);
    switch (g.kind()) {
        case K::Linear: return y / g.coeff();
        case K::Power: return std::pow(y / g.coeff(), 1.0 / g.exponent());
        case K::Saturating: return y / (g.coeff() - y);
        case K::Atan: return std::tan(y / g.coeff());
        case K::Compose: {
            if (classify_gain(g.children()[0]) != GainClass::Zero &&
                classify_gain(g.children()[1]) != GainClass::Zero) {
                return invert_gain(g.children()[1], invert_gain(g.children()[0], y));
            }
            break;
        }
        default: break;
    }
    return invert_by_bisection(g, y);
}

std::optional<GainExpr> structural_inverse(const GainExpr& g) {
    using K = GainExpr::Kind;
    switch (g.kind()) {
        case K::Linear: return GainExpr::linear(1.0 / g.coeff());
        case K::Power:
            if (g.exponent() == 1.0) return GainExpr::linear(1.0 / g.coeff());
            return GainExpr::power(std::pow(g.coeff(), -1.0 / g.exponent()), 1.0 / g.exponent());
        case K::Compose: {
            auto outer = structural_inverse(g.children()[0]);
            auto inner = structural_inverse(g.children()[1]);
            if (!outer || !inner) return std::nullopt;
            return GainExpr::compose(*inner, *outer);
        }
        default: return std::nullopt;
    }
}

}  // namespace smallgain
