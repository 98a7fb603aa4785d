#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "smallgain/error.hpp"
#include "smallgain/smallgain.hpp"

using namespace smallgain;

namespace {

double eigen_radius(const std::vector<Vec>& G) {
    const auto n = static_cast<Eigen::Index>(G.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = G[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_witness(const GainNetwork& net, const Vec& w) {
    const Vec g = net.eval(w);
    if (norm_inf(w) == 0.0) return false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (g[i] < w[i] * (1 - 1e-12)) return false;
    }
    return true;
}

}  // namespace

TEST(CycleCondition, ContractiveMaxHolds) {
    const auto v = check_cycle_condition(fx::linear_network({{0, 0.5}, {0.5, 0}}, Maf::max()));
    EXPECT_EQ(v.status, SgcStatus::CertifiedHolds);
}

TEST(CycleCondition, ExpansiveCycleFailsWithWitness) {
    const GainNetwork net = fx::linear_network({{0, 2}, {2, 0}}, Maf::max());
    const auto v = check_cycle_condition(net);
    ASSERT_EQ(v.status, SgcStatus::CertifiedFails);
    EXPECT_EQ(v.cycle, (Cycle{1, 0}));
    EXPECT_TRUE(is_witness(net, v.witness));
}

TEST(CycleCondition, NonlinearCycleComposition) {
    // gamma_21 o gamma_12 = 0.5 * id even though gamma_12 = s^2 expands.
    const GainNetwork ok = fx::network({{{}, GainExpr::power(1.0, 2.0)}, {GainExpr::power(0.5, 0.5), {}}}, Maf::max());
    EXPECT_EQ(check_cycle_condition(ok).status, SgcStatus::CertifiedHolds);
    // s^2 against 2 sqrt(s): composition 2 s crosses the identity everywhere.
    const GainNetwork bad =
        fx::network({{{}, GainExpr::power(1.0, 2.0)}, {GainExpr::power(2.0, 0.5), {}}}, Maf::max());
    const auto v = check_cycle_condition(bad);
    ASSERT_EQ(v.status, SgcStatus::CertifiedFails);
    EXPECT_TRUE(is_witness(bad, v.witness));
}

TEST(CycleCondition, NeedsMaxAggregation) {
    try {
        check_cycle_condition(fx::linear_network({{0, 0.5}, {0.5, 0}}, Maf::sum()));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WrongAggregation);
    }
}

TEST(Falsification, FindsWitnessForExpansiveSum) {
    const GainNetwork net = fx::linear_network({{0, 2}, {2, 0}}, Maf::sum());
    const auto v = falsify_sgc(net);
    ASSERT_EQ(v.status, SgcStatus::CertifiedFails);
    EXPECT_TRUE(is_witness(net, v.witness));
}

TEST(Falsification, InconclusiveForContraction) {
    const auto v = falsify_sgc(fx::three_sum(0.25));
    EXPECT_EQ(v.status, SgcStatus::Inconclusive);
    EXPECT_LT(v.closest_ratio, 1.0);
    EXPECT_GT(v.samples, 0u);
}

TEST(Falsification, StrongConditionDependsOnAlpha) {
    const GainNetwork net = fx::linear_network({{0, 0.4}, {0.4, 0}}, Maf::sum());
    const DiagOp mild{GainExpr::linear(0.5), std::nullopt};
    const DiagOp strong{GainExpr::linear(2.0), std::nullopt};
    EXPECT_EQ(check_strong_sgc(net, mild).status, SgcStatus::Inconclusive);
    const auto v = check_strong_sgc(net, strong);
    EXPECT_EQ(v.status, SgcStatus::CertifiedFails);
    EXPECT_EQ(v.method, "falsification(D)");
}

TEST(Spectral, LinearDemoMatrix) {
    const auto lin = linearize(fx::canonical_homogeneous());
    ASSERT_TRUE(lin.has_value());
    EXPECT_DOUBLE_EQ(lin->exponent, 0.5);
    EXPECT_NEAR(lin->G[0][1], 0.4, 1e-12);
    EXPECT_NEAR(lin->G[1][0], 0.4, 1e-12);
    Vec perron;
    EXPECT_NEAR(spectral_radius(lin->G, &perron), 0.4, 1e-12);
    EXPECT_NEAR(perron[0], perron[1], 1e-9);
}

TEST(Spectral, MatchesEigenOracleOnRandomMatrices) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution keep(0.6);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 6);
        std::vector<Vec> G(n, Vec(n, 0.0));
        for (auto& row : G) {
            for (double& x : row) x = keep(rng) ? u(rng) : 0.0;
        }
        EXPECT_NEAR(spectral_radius(G), eigen_radius(G), 1e-9 * (1 + eigen_radius(G))) << "trial " << t;
    }
}

TEST(Spectral, VerdictAndWitness) {
    EXPECT_EQ(check_linear_spectral(fx::three_sum(0.25)).status, SgcStatus::CertifiedHolds);
    const GainNetwork bad = fx::linear_network({{0, 2}, {2, 0}}, Maf::sum());
    const auto v = check_linear_spectral(bad);
    ASSERT_EQ(v.status, SgcStatus::CertifiedFails);
    EXPECT_NEAR(*v.spectral_radius, 2.0, 1e-12);
    EXPECT_NEAR(v.witness[0], v.witness[1], 1e-9);
}

TEST(Spectral, RejectsNonlinearNetwork) {
    try {
        check_linear_spectral(fx::canonical_bounded());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotLinearizable);
    }
}

TEST(Perron, LinearNetworkEigenvalueIsSpectralRadius) {
    const auto pr = nonlinear_perron(fx::three_sum(0.25));
    EXPECT_NEAR(pr.lambda, 0.5, 1e-9);
    EXPECT_LT(pr.residual, 1e-8);
}

// Gamma = D^-1 o G o D with D = sqrt, so Gamma(v) = rho(G)^2 v along the
// Perron direction; the verdicts agree because rho < 1 iff rho^2 < 1.
TEST(Perron, ConjugatedOperatorSquaresTheEigenvalue) {
    const GainNetwork net = fx::canonical_homogeneous();
    const auto pr = nonlinear_perron(net);
    EXPECT_NEAR(pr.lambda, 0.16, 1e-9);
    EXPECT_NEAR(pr.eigvec[0], 1.0, 1e-9);
    EXPECT_NEAR(pr.eigvec[1], 1.0, 1e-9);
    const auto lin = linearize(net);
    ASSERT_TRUE(lin);
    EXPECT_EQ(check_linear_spectral(net).status == SgcStatus::CertifiedHolds, pr.lambda < 1.0);
}

TEST(Perron, Errors) {
    auto kind = [](const GainNetwork& net) {
        try {
            nonlinear_perron(net);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    EXPECT_EQ(kind(fx::canonical_bounded()), ErrorKind::NotHomogeneous);
    EXPECT_EQ(kind(fx::canonical_reducible()), ErrorKind::NotIrreducible);
}

// Property: for max networks the cycle verdict agrees with falsification.
TEST(CycleCondition, AgreesWithFalsificationOnRandomNetworks) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> slope(0.2, 1.8);
    std::bernoulli_distribution edge(0.6);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 3);
        std::vector<Vec> k(n, Vec(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && edge(rng)) k[i][j] = slope(rng);
            }
        }
        const GainNetwork net = fx::linear_network(k, Maf::max());
        const auto cyc = check_cycle_condition(net);
        const auto fal = falsify_sgc(net);
        EXPECT_EQ(cyc.status == SgcStatus::CertifiedHolds, fal.status != SgcStatus::CertifiedFails) << "trial " << t;
    }
}
