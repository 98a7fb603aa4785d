#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "smallgain/error.hpp"
#include "smallgain/graph.hpp"

using namespace smallgain;

namespace {

AdjacencyMatrix from_edges(std::size_t n, std::initializer_list<std::pair<std::size_t, std::size_t>> edges) {
    AdjacencyMatrix a(n);
    for (auto [i, j] : edges) a.set(i, j);
    return a;
}

// Oracle: Floyd-Warshall reachability.
std::vector<std::vector<bool>> reach(const AdjacencyMatrix& a) {
    const std::size_t n = a.size();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) r[i][j] = i == j || a(i, j);
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
        }
    }
    return r;
}

}  // namespace

TEST(Graph, AdjacencyFromNetwork) {
    const AdjacencyMatrix a = adjacency(fx::canonical_reducible());
    EXPECT_TRUE(a(0, 1));
    EXPECT_TRUE(a(0, 2));
    EXPECT_TRUE(a(1, 0));
    EXPECT_FALSE(a(2, 0));
    EXPECT_FALSE(a(0, 0));
}

TEST(Graph, Irreducibility) {
    EXPECT_TRUE(is_irreducible(AdjacencyMatrix(1)));
    EXPECT_TRUE(is_irreducible(from_edges(2, {{0, 1}, {1, 0}})));
    EXPECT_FALSE(is_irreducible(from_edges(2, {{0, 1}})));
    EXPECT_FALSE(is_irreducible(AdjacencyMatrix(3)));
}

TEST(Graph, SccUpperTriangular) {
    // 1 <-> 2 and 1 -> 3 (row 1 depends on 3): blocks {1,2} then {3}.
    const auto d = scc_decompose(from_edges(3, {{0, 1}, {1, 0}, {0, 2}}));
    ASSERT_EQ(d.blocks.size(), 2u);
    EXPECT_EQ(d.blocks[0], (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(d.blocks[1], (std::vector<std::size_t>{2}));
    EXPECT_EQ(d.permutation, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Graph, SccSingleBlockWhenIrreducible) {
    const auto d = scc_decompose(from_edges(3, {{0, 1}, {1, 2}, {2, 0}}));
    ASSERT_EQ(d.blocks.size(), 1u);
    EXPECT_EQ(d.blocks[0], (std::vector<std::size_t>{0, 1, 2}));
}

// Property: blocks are exactly the mutual-reachability classes and no edge
// points from a later block into an earlier one.
TEST(Graph, SccMatchesReachabilityOracle) {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution edge(0.25);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 8);
        AdjacencyMatrix a(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && edge(rng)) a.set(i, j);
            }
        }
        const auto r = reach(a);
        const auto d = scc_decompose(a);
        std::size_t total = 0;
        for (const auto& b : d.blocks) total += b.size();
        ASSERT_EQ(total, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const bool same = d.block_of[i] == d.block_of[j];
                ASSERT_EQ(same, r[i][j] && r[j][i]);
                if (a(i, j)) {
                    ASSERT_LE(d.block_of[i], d.block_of[j]);
                }
            }
        }
    }
}

TEST(Graph, SubordinatedCyclesOfCompleteGraph) {
    AdjacencyMatrix a(3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            if (i != j) a.set(i, j);
        }
    }
    const auto c = subordinated_cycles(a);
    // Two 2-cycles rooted at 1 and 2, one more 2-cycle (2,1), two 3-cycles.
    ASSERT_EQ(c.size(), 5u);
    EXPECT_EQ(c[0], (Cycle{1, 0}));
    EXPECT_EQ(c[1], (Cycle{2, 0}));
    EXPECT_EQ(c[2], (Cycle{2, 1}));
    EXPECT_EQ(c[3], (Cycle{2, 0, 1}));
    EXPECT_EQ(c[4], (Cycle{2, 1, 0}));
}

TEST(Graph, CycleCountMatchesCombinatorics) {
    // Complete digraph on n nodes has sum_{k=2}^n C(n,k) (k-1)! simple cycles.
    for (std::size_t n = 2; n <= 6; ++n) {
        AdjacencyMatrix a(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) a.set(i, j);
            }
        }
        std::size_t expected = 0;
        for (std::size_t k = 2; k <= n; ++k) {
            std::size_t binom = 1, fact = 1;
            for (std::size_t m = 0; m < k; ++m) binom = binom * (n - m) / (m + 1);
            for (std::size_t m = 2; m < k; ++m) fact *= m;
            expected += binom * fact;
        }
        EXPECT_EQ(subordinated_cycles(a).size(), expected) << "n=" << n;
    }
}

TEST(Graph, CycleEnumerationLimit) {
    try {
        subordinated_cycles(AdjacencyMatrix(13));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
    }
}
