#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "fixtures.hpp"
#include "smallgain/error.hpp"
#include "smallgain/gain.hpp"
#include "smallgain/network.hpp"
#include "smallgain/parser.hpp"

using namespace smallgain;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Gain, EvaluatesLeaves) {
    EXPECT_DOUBLE_EQ(GainExpr::linear(2.0)(3.0), 6.0);
    EXPECT_DOUBLE_EQ(GainExpr::power(0.5, 2.0)(3.0), 4.5);
    EXPECT_DOUBLE_EQ(GainExpr::saturating(2.0)(1.0), 1.0);
    EXPECT_DOUBLE_EQ(GainExpr::atan(1.0)(1.0), std::atan(1.0));
    EXPECT_DOUBLE_EQ(GainExpr::zero()(5.0), 0.0);
}

TEST(Gain, EvaluatesCombinators) {
    const GainExpr a = GainExpr::linear(2.0), b = GainExpr::power(1.0, 2.0);
    EXPECT_DOUBLE_EQ(GainExpr::sum({a, b})(3.0), 15.0);
    EXPECT_DOUBLE_EQ(GainExpr::max({a, b})(1.0), 2.0);
    EXPECT_DOUBLE_EQ(GainExpr::max({a, b})(3.0), 9.0);
    EXPECT_DOUBLE_EQ(GainExpr::compose(a, b)(3.0), 18.0);
    EXPECT_DOUBLE_EQ(GainExpr::plus_id(b)(3.0), 12.0);
}

TEST(Gain, ZeroAtZero) {
    for (const GainExpr& g : {GainExpr::linear(3.0), GainExpr::saturating(1.0), GainExpr::atan(2.0),
                              GainExpr::compose(GainExpr::atan(1.0), GainExpr::power(2.0, 0.5))}) {
        EXPECT_EQ(g(0.0), 0.0);
    }
}

TEST(Gain, Classification) {
    EXPECT_EQ(classify_gain(GainExpr::zero()), GainClass::Zero);
    EXPECT_EQ(classify_gain(GainExpr::linear(0.1)), GainClass::Unbounded);
    EXPECT_EQ(classify_gain(GainExpr::saturating(3.0)), GainClass::Bounded);
    EXPECT_EQ(classify_gain(GainExpr::atan(1.0)), GainClass::Bounded);
    EXPECT_EQ(classify_gain(GainExpr::sum({GainExpr::atan(1.0), GainExpr::linear(1.0)})), GainClass::Unbounded);
    EXPECT_EQ(classify_gain(GainExpr::max({GainExpr::atan(1.0), GainExpr::saturating(1.0)})), GainClass::Bounded);
    EXPECT_EQ(classify_gain(GainExpr::compose(GainExpr::linear(2.0), GainExpr::atan(1.0))), GainClass::Bounded);
    EXPECT_EQ(classify_gain(GainExpr::compose(GainExpr::atan(1.0), GainExpr::linear(2.0))), GainClass::Bounded);
    EXPECT_EQ(classify_gain(GainExpr::plus_id(GainExpr::atan(1.0))), GainClass::Unbounded);
}

TEST(Gain, Supremum) {
    EXPECT_DOUBLE_EQ(gain_supremum(GainExpr::saturating(3.0)), 3.0);
    EXPECT_DOUBLE_EQ(gain_supremum(GainExpr::atan(2.0)), M_PI);
    EXPECT_DOUBLE_EQ(gain_supremum(GainExpr::compose(GainExpr::linear(2.0), GainExpr::saturating(1.0))), 2.0);
    EXPECT_TRUE(std::isinf(gain_supremum(GainExpr::linear(1.0))));
}

TEST(Gain, InverseClosedForms) {
    EXPECT_DOUBLE_EQ(invert_gain(GainExpr::linear(4.0), 2.0), 0.5);
    EXPECT_NEAR(invert_gain(GainExpr::power(0.4, 0.5), 0.2), 0.25, 1e-15);
    EXPECT_NEAR(invert_gain(GainExpr::saturating(2.0), 1.0), 1.0, 1e-15);
    EXPECT_NEAR(invert_gain(GainExpr::atan(1.0), std::atan(3.0)), 3.0, 1e-12);
}

TEST(Gain, InverseOutOfRange) {
    EXPECT_EQ(kind_of([] { invert_gain(GainExpr::saturating(2.0), 2.0); }), ErrorKind::OutOfRange);
    EXPECT_EQ(kind_of([] { invert_gain(GainExpr::atan(1.0), 2.0); }), ErrorKind::OutOfRange);
}

// Property: g^-1(g(s)) = s within 1e-9 relative, for random trees.
TEST(Gain, InverseRoundTripRandomTrees) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 300; ++t) {
        const GainExpr g = fx::invertible_tree(rng);
        for (double s : {1e-4, 0.3, 1.0, 7.0, 50.0}) {
            const double y = g(s);
            if (!(y < gain_supremum(g) * (1 - 1e-9))) continue;
            const double back = invert_gain(g, y);
            // Judge by the image when g is nearly flat at s.
            EXPECT_TRUE(std::fabs(back - s) <= 1e-9 * s || std::fabs(g(back) - y) <= 1e-12 * y)
                << format_gain(g) << " s=" << s;
        }
    }
}

TEST(Gain, StructuralInverse) {
    const auto inv = structural_inverse(GainExpr::compose(GainExpr::linear(2.0), GainExpr::power(1.0, 2.0)));
    ASSERT_TRUE(inv.has_value());
    EXPECT_NEAR((*inv)(8.0), 2.0, 1e-12);
    EXPECT_FALSE(structural_inverse(GainExpr::atan(1.0)).has_value());
}

TEST(Maf, Aggregations) {
    const Vec v{1.0, 3.0, 2.0};
    EXPECT_DOUBLE_EQ(Maf::sum()(v, 0.5), 6.5);
    EXPECT_DOUBLE_EQ(Maf::max()(v, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(Maf::max()(v, 4.0), 4.0);
    EXPECT_DOUBLE_EQ(Maf::outer_sum(GainExpr::power(1.0, 2.0))(v, 1.0), 49.0);
    EXPECT_DOUBLE_EQ(Maf::outer_sum(GainExpr::power(1.0, 2.0)).with_additive_external()(v, 1.0), 37.0);
    // blocks {0, 1} and {2, external}
    EXPECT_DOUBLE_EQ(Maf::block_max_sum({{0, 1}, {2, 3}})(v, 5.0), 8.0);
}

TEST(Network, EvaluatesOperator) {
    const GainNetwork net = fx::linear_network({{0, 0.5}, {2.0, 0}}, Maf::sum());
    const Vec s{1.0, 2.0};
    EXPECT_EQ(net.eval(s), (Vec{1.0, 2.0}));
    EXPECT_EQ(eval_operator(net, s), net.eval(s));
}

TEST(Network, ExternalInput) {
    const GainNetwork net = fx::network({{{}, GainExpr::linear(0.5)}, {GainExpr::linear(0.5), {}}}, Maf::max(),
                                        {GainExpr::linear(1.0), GainExpr::zero()});
    EXPECT_TRUE(net.has_external());
    EXPECT_EQ(net.eval_ext(Vec{1.0, 1.0}, 3.0), (Vec{3.0, 0.5}));
}

TEST(Network, RejectsNonzeroDiagonal) {
    EXPECT_EQ(kind_of([] { fx::linear_network({{1.0, 0}, {0, 0}}, Maf::sum()); }), ErrorKind::InvalidArgument);
}

TEST(Network, RejectsBoundedOuterSum) {
    EXPECT_EQ(kind_of([] { fx::linear_network({{0, 1}, {1, 0}}, Maf::outer_sum(GainExpr::atan(1.0))); }),
              ErrorKind::IncompatibleMaf);
}

TEST(Network, RejectsUncoveredBlockIndex) {
    EXPECT_EQ(kind_of([] { fx::linear_network({{0, 1, 1}, {1, 0, 0}, {1, 0, 0}}, Maf::block_max_sum({{1}})); }),
              ErrorKind::IncompatibleMaf);
}

TEST(Network, RestrictKeepsInternalGains) {
    const GainNetwork net = fx::canonical_reducible();
    const std::vector<std::size_t> idx{0, 1};
    const GainNetwork sub = net.restrict(idx);
    EXPECT_EQ(sub.size(), 2u);
    EXPECT_EQ(sub.eval(Vec{2.0, 4.0}), (Vec{2.0, 1.0}));
}

TEST(GainOperator, DiagonalSides) {
    const GainNetwork net = fx::linear_network({{0, 1.0}, {1.0, 0}}, Maf::sum());
    const DiagOp d{GainExpr::linear(1.0), std::nullopt};
    const Vec s{1.0, 2.0};
    EXPECT_EQ(GainOperator(net, d, DiagSide::Outer)(s), (Vec{4.0, 2.0}));
    EXPECT_EQ(GainOperator(net, d, DiagSide::Inner)(s), (Vec{4.0, 2.0}));
    const DiagOp sep{GainExpr::linear(1.0), 0.5};
    EXPECT_DOUBLE_EQ(sep.apply(2.0), 5.0);
}
