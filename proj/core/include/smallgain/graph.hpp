#pragma once

#include <cstddef>
#include <vector>

#include "smallgain/network.hpp"

namespace smallgain {

/// a(i, j) = 1 iff gamma_ij is not Zero, i.e. x_j influences x_i.
class AdjacencyMatrix {
public:
    explicit AdjacencyMatrix(std::size_t n) : n_(n), a_(n * n, 0) {}

    std::size_t size() const { return n_; }
    bool operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j] != 0; }
    void set(std::size_t i, std::size_t j, bool v = true) { a_[i * n_ + j] = v ? 1 : 0; }

    friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

private:
    std::size_t n_;
    std::vector<unsigned char> a_;
};

/// Strongly connected components in upper block triangular order: an edge
/// a(i, j) = 1 never points from a later block into an earlier one, so the
/// first block only receives and the last block only feeds.
struct SccDecomposition {
    std::vector<std::vector<std::size_t>> blocks;  // each sorted ascending
    std::vector<std::size_t> permutation;          // concatenation of blocks
    std::vector<std::size_t> block_of;             // node -> block index
};

/// Simple cycle (i_1, ..., i_K) meaning gamma_{i1 i2}, ..., gamma_{iK i1} are
/// all nonzero. Indices are 0-based.
using Cycle = std::vector<std::size_t>;

inline constexpr std::size_t kCycleEnumLimit = 12;

AdjacencyMatrix adjacency(const GainNetwork& net);

/// Strong connectivity; a single node counts as irreducible.
bool is_irreducible(const AdjacencyMatrix& adj);

SccDecomposition scc_decompose(const AdjacencyMatrix& adj);

/// All simple cycles whose first index exceeds the rest, sorted by length
/// and then lexicographically. Throws Error(TooLarge) beyond `limit` nodes.
std::vector<Cycle> subordinated_cycles(const AdjacencyMatrix& adj,
                                       std::size_t limit = kCycleEnumLimit);

}  // namespace smallgain
