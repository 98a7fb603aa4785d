#pragma once

#include <memory>
#include <optional>
#include <vector>

namespace smallgain {

/// Immutable expression tree for a scalar comparison function on [0, inf).
///
/// Every non-Zero variant is zero at zero and strictly increasing; the tree
/// shape alone decides whether the function is unbounded (class K-infinity)
/// or bounded. Copies share the underlying nodes.
class GainExpr {
public:
    enum class Kind { Zero, Linear, Power, Saturating, Atan, Sum, Max, Compose, PlusId };

    GainExpr();  // Zero

    static GainExpr zero();
    static GainExpr linear(double slope);
    static GainExpr power(double coeff, double exponent);
    /// c * s / (1 + s)
    static GainExpr saturating(double coeff);
    /// c * atan(s)
    static GainExpr atan(double coeff);
    static GainExpr sum(std::vector<GainExpr> children);
    static GainExpr max(std::vector<GainExpr> children);
    /// outer(inner(s))
    static GainExpr compose(GainExpr outer, GainExpr inner);
    /// s + inner(s)
    static GainExpr plus_id(GainExpr inner);

    Kind kind() const;
    double coeff() const;
    double exponent() const;
    const std::vector<GainExpr>& children() const;

    double operator()(double s) const;

    friend bool operator==(const GainExpr& a, const GainExpr& b);

private:
    struct Node;
    explicit GainExpr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

enum class GainClass { Zero, Bounded, Unbounded };

const char* gain_class_name(GainClass c);

/// Structural classification: Zero, bounded class K, or class K-infinity.
GainClass classify_gain(const GainExpr& g);

double eval_gain(const GainExpr& g, double s);

/// Supremum over [0, inf); +inf for unbounded gains.
double gain_supremum(const GainExpr& g);

/// Preimage of `y`. Throws Error(OutOfRange) when y >= sup g for a bounded
/// gain (the caller should treat the preimage as +inf).
double invert_gain(const GainExpr& g, double y);

/// Closed-form inverse as an expression, when one exists in the grammar
/// (Linear, Power, and compositions of those).
std::optional<GainExpr> structural_inverse(const GainExpr& g);

}  // namespace smallgain
