#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "smallgain/error.hpp"
#include "smallgain/omega_path.hpp"
#include "smallgain/smallgain.hpp"

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

void expect_valid(const GainNetwork& net, const OmegaPath& p) {
    const PathReport rep = validate_path(net, p);
    EXPECT_TRUE(rep.valid()) << "grid failures " << rep.grid_failures << ", anchor failures " << rep.anchor_failures
                             << ", first at r=" << rep.first_failure;
}

}  // namespace

TEST(OmegaPath, InterpolatesAndExtrapolates) {
    const OmegaPath p = OmegaPath::from_anchors({0, 1, 3}, {{0, 0}, {1, 2}, {2, 3}});
    EXPECT_DOUBLE_EQ(p.component(0, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(p.component(1, 2.0), 2.5);
    EXPECT_DOUBLE_EQ(p.component(0, 5.0), 3.0);  // last slope 1/2
    EXPECT_EQ(p(0.0), (Vec{0, 0}));
    EXPECT_DOUBLE_EQ(p.inverse(1, 2.5), 2.0);
    EXPECT_DOUBLE_EQ(p.inverse(0, 3.0), 5.0);
}

TEST(OmegaPath, InverseUsesLeftSegmentAtAnchor) {
    const OmegaPath p = OmegaPath::from_anchors({0, 1, 2}, {{0}, {1}, {5}});
    EXPECT_DOUBLE_EQ(p.inverse(0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(p.inverse(0, 3.0), 1.5);
}

TEST(OmegaPath, RejectsNonMonotoneAnchors) {
    EXPECT_EQ(kind_of([] { OmegaPath::from_anchors({0, 1, 2}, {{0}, {1}, {1}}); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([] { OmegaPath::from_points({{1, 1}, {2, 0.5}}); }), ErrorKind::InvalidArgument);
}

TEST(OmegaPath, FromPointsUsesInfinityNorm) {
    const OmegaPath p = OmegaPath::from_points({{0.5, 1.0}, {1.0, 3.0}});
    EXPECT_EQ(p.radii(), (Vec{0.0, 1.0, 3.0}));
    EXPECT_DOUBLE_EQ(p.component(0, 2.0), 0.75);
}

TEST(Validate, RayForContraction) {
    const PathReport rep = validate_path(fx::three_sum(0.25), OmegaPath::ray({1, 1, 1}));
    EXPECT_TRUE(rep.valid());
    EXPECT_EQ(rep.radii.size(), 1000u);
    EXPECT_NEAR(rep.margin_min.front(), 0.5 * rep.radii.front(), 1e-15);
}

TEST(Validate, ReportsFailures) {
    const PathReport rep = validate_path(fx::three_sum(0.6), OmegaPath::ray({1, 1, 1}));
    EXPECT_FALSE(rep.valid());
    EXPECT_EQ(rep.grid_failures, 1000u);
    EXPECT_DOUBLE_EQ(rep.first_failure, 1e-6);
}

TEST(Validate, CsvExport) {
    const OmegaPath p = OmegaPath::ray({1, 2});
    const PathReport rep = validate_path(fx::linear_network({{0, 0.25}, {0.25, 0}}, Maf::sum()), p, {1.0, 2.0});
    std::ostringstream out;
    write_path_csv(out, p, rep);
    EXPECT_EQ(out.str(), "r,sigma_1,sigma_2,margin_min\n1,1,2,0.5\n2,2,4,1\n");
}

TEST(Downward, ReachesOrigin) {
    const GainNetwork net = fx::three_sum(0.25);
    const auto pts = path_downward(net, {1, 1, 1});
    ASSERT_GE(pts.size(), 3u);
    EXPECT_EQ(pts.back(), (Vec{0, 0, 0}));
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
        for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(pts[k][i], pts[k - 1][i]);
    }
}

TEST(Downward, StallsAtFixedPoint) {
    // 2 s / (1 + s) has the fixed point 1 in both components.
    const GainExpr g = GainExpr::saturating(2.0);
    const GainNetwork net = fx::network({{{}, g}, {g, {}}}, Maf::sum());
    EXPECT_EQ(kind_of([&] { path_downward(net, {1.0, 1.0}); }), ErrorKind::Stalled);
    EXPECT_EQ(kind_of([&] { path_downward(net, {2.1, 2.1}); }), ErrorKind::Stalled);
    EXPECT_EQ(kind_of([&] { path_downward(net, {0.5, 0.5}); }), ErrorKind::NotInOmega);
}

TEST(Constructors, Bounded) {
    const GainNetwork net = fx::canonical_bounded();
    expect_valid(net, path_bounded(net));
    EXPECT_EQ(kind_of([] { path_bounded(fx::three_sum(0.25)); }), ErrorKind::NotBounded);
}

TEST(Constructors, Irreducible) {
    const GainNetwork net = fx::canonical_irreducible();
    expect_valid(net, path_irreducible(net));
    EXPECT_EQ(kind_of([] { path_irreducible(fx::canonical_reducible()); }), ErrorKind::NotIrreducible);
}

TEST(Constructors, Max) {
    const GainNetwork net = fx::canonical_max();
    expect_valid(net, path_max(net));
    EXPECT_EQ(kind_of([] { path_max(fx::linear_network({{0, 2}, {1, 0}}, Maf::max())); }),
              ErrorKind::CycleConditionFails);
    EXPECT_EQ(kind_of([] { path_max(fx::three_sum(0.25)); }), ErrorKind::WrongAggregation);
}

TEST(Constructors, Homogeneous) {
    const GainNetwork net = fx::canonical_homogeneous();
    const OmegaPath p = path_homogeneous(net);
    expect_valid(net, p);
    EXPECT_NEAR(p.component(0, 1.0), 1.0, 1e-9);
    EXPECT_NEAR(p.component(1, 1.0), 1.0, 1e-9);
    EXPECT_EQ(kind_of([] { path_homogeneous(smallgain::linear_gains(fx::linear_demo(0.6, 0.0)).net); }),
              ErrorKind::LambdaNotContractive);
}

// sigma_2 solves the balance equation exactly: with all gains s/4 it is
// 4(r - s/4) = 4(s - r/4), i.e. s = r; h = r/2, g = 3r, sigma_3 = 7r/4.
TEST(Constructors, ThreeSumClosedForm) {
    const GainNetwork net = fx::three_sum(0.25);
    const OmegaPath p = path_three_sum(net);
    expect_valid(net, p);
    for (double r : {1e-6, 1e-3, 1.0, 17.0, 1e6}) {
        EXPECT_NEAR(p.component(0, r), r, 1e-12 * r);
        EXPECT_NEAR(p.component(1, r), r, 1e-10 * r);
        EXPECT_NEAR(p.component(2, r), 1.75 * r, 1e-9 * r);
    }
    expect_valid(net, path_irreducible(net));
}

TEST(Constructors, ThreeSumEmptyGapWithoutSmallGain) {
    EXPECT_EQ(kind_of([] { path_three_sum(fx::three_sum(1.0)); }), ErrorKind::EmptyGap);
}

TEST(Constructors, ThreeSumNonlinear) {
    const GainExpr a = GainExpr::linear(0.2), b = GainExpr::power(0.05, 1.1), c = GainExpr::sum({GainExpr::linear(0.1), GainExpr::saturating(0.1)});
    const GainNetwork net = fx::network({{{}, a, b}, {c, {}, a}, {b, c, {}}}, Maf::sum());
    PathOptions o;
    o.r_max = 1e3;  // s^1.1 eventually dominates; keep to the contractive range
    const OmegaPath p = path_three_sum(net, o);
    EXPECT_TRUE(validate_path(net, p, o.validation_radii()).valid());
}

TEST(Constructors, Mixed) {
    const GainNetwork net = fx::canonical_mixed();
    expect_valid(net, path_mixed(net));
}

TEST(Constructors, Reducible) {
    const GainNetwork net = fx::canonical_reducible();
    const ReducibleResult res = path_reducible(net);
    expect_valid(net, res.sigma);
    ASSERT_EQ(res.scc.blocks.size(), 2u);
    EXPECT_EQ(res.block_paths.size(), 2u);
}

TEST(Constructors, ReducibleBlockFailureNamesBlock) {
    const GainExpr h = GainExpr::linear(1.5);
    const GainNetwork net = fx::network({{{}, h, GainExpr::linear(0.8)}, {h, {}, {}}, {{}, {}, {}}}, Maf::sum());
    try {
        path_reducible(net);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BlockSgcFails);
        EXPECT_NE(std::string(e.what()).find("block 1"), std::string::npos);
    }
}

TEST(Dispatch, MethodOrder) {
    EXPECT_EQ(construct_path(fx::canonical_homogeneous()).method, "homogeneous");
    EXPECT_EQ(construct_path(fx::canonical_max()).method, "max");
    EXPECT_EQ(construct_path(fx::three_sum(0.25)).method, "three_sum");
    EXPECT_EQ(construct_path(fx::canonical_mixed()).method, "mixed");
    EXPECT_EQ(construct_path(fx::canonical_bounded()).method, "bounded");
    EXPECT_EQ(construct_path(fx::canonical_irreducible()).method, "irreducible");
    EXPECT_EQ(construct_path(fx::canonical_reducible()).method, "reducible");
}

TEST(Dispatch, StrongConditionPathForDiagonalOperator) {
    const GainNetwork net = smallgain::cg_gains(fx::cg_demo());
    const GainOperator op(net, DiagOp{GainExpr::linear(0.25), std::nullopt}, DiagSide::Outer);
    const PathResult res = construct_path(op);
    EXPECT_EQ(res.method, "bounded");
    EXPECT_TRUE(res.report.valid());
}

// Property: random contractive sum networks always get a valid path.
TEST(Dispatch, RandomContractiveNetworks) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 4);
        std::vector<Vec> k(n, Vec(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && u(rng) < 0.7) k[i][j] = u(rng);
            }
        }
        const double rho = spectral_radius(k);
        if (rho == 0.0) continue;
        for (auto& row : k) {
            for (double& x : row) x *= 0.9 / rho;
        }
        const GainNetwork net = fx::linear_network(k, Maf::sum());
        const PathResult res = construct_path(net);
        EXPECT_TRUE(res.report.valid()) << "trial " << t << " method " << res.method;
    }
}
