#include "smallgain/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <string>

#include "smallgain/error.hpp"

namespace smallgain {

AdjacencyMatrix adjacency(const GainNetwork& net) {
    AdjacencyMatrix adj(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        for (std::size_t j : net.active(i)) adj.set(i, j);
    }
    return adj;
}

namespace {

// Iterative Tarjan; returns component id per node (ids in completion order).
std::vector<std::size_t> tarjan(const AdjacencyMatrix& adj, std::size_t& count) {
    const std::size_t n = adj.size();
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t next = 0;
    count = 0;

    struct Frame {
        std::size_t v;
        std::size_t j;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kUnset) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = next++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.j < n) {
                const std::size_t w = f.j++;
                if (!adj(f.v, w)) continue;
                if (index[w] == kUnset) {
                    index[w] = low[w] = next++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            const std::size_t v = f.v;
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            if (low[v] == index[v]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = count;
                } while (w != v);
                ++count;
            }
        }
    }
    return comp;
}

}  // namespace

bool is_irreducible(const AdjacencyMatrix& adj) {
    if (adj.size() <= 1) return true;
    std::size_t count = 0;
    tarjan(adj, count);
    return count == 1;
}

SccDecomposition scc_decompose(const AdjacencyMatrix& adj) {
    const std::size_t n = adj.size();
    std::size_t count = 0;
    const auto comp = tarjan(adj, count);

    std::vector<std::vector<std::size_t>> members(count);
    for (std::size_t v = 0; v < n; ++v) members[comp[v]].push_back(v);

    // Condensation edges c -> d whenever some a(i, j) = 1 with i in c, j in d.
    // Kahn's algorithm with a min-index tie-break gives the block order.
    std::vector<std::vector<bool>> edge(count, std::vector<bool>(count, false));
    std::vector<std::size_t> indegree(count, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t c = comp[i], d = comp[j];
            if (adj(i, j) && c != d && !edge[c][d]) {
                edge[c][d] = true;
                ++indegree[d];
            }
        }
    }
    using Item = std::pair<std::size_t, std::size_t>;  // (min member, comp)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
    for (std::size_t c = 0; c < count; ++c) {
        if (indegree[c] == 0) ready.push({members[c].front(), c});
    }

    SccDecomposition out;
    out.block_of.assign(n, 0);
    while (!ready.empty()) {
        const std::size_t c = ready.top().second;
        ready.pop();
        for (std::size_t v : members[c]) {
            out.block_of[v] = out.blocks.size();
            out.permutation.push_back(v);
        }
        out.blocks.push_back(members[c]);
        for (std::size_t d = 0; d < count; ++d) {
            if (edge[c][d] && --indegree[d] == 0) ready.push({members[d].front(), d});
        }
    }
    return out;
}

std::vector<Cycle> subordinated_cycles(const AdjacencyMatrix& adj, std::size_t limit) {
    const std::size_t n = adj.size();
    if (n > limit) {
        throw Error(ErrorKind::TooLarge, "cycle enumeration limited to " + std::to_string(limit) +
                                             " subsystems, got " + std::to_string(n));
    }
    std::vector<Cycle> cycles;
    std::vector<bool> used(n, false);
    Cycle path;

    // Depth-first over nodes smaller than the start, so every cycle is found
    // exactly once, rooted at its largest index.
    std::function<void(std::size_t, std::size_t)> extend = [&](std::size_t start, std::size_t v) {
        for (std::size_t w = 0; w < n; ++w) {
            if (!adj(v, w)) continue;
            if (w == start) {
                if (path.size() >= 2) cycles.push_back(path);
            } else if (w < start && !used[w]) {
                used[w] = true;
                path.push_back(w);
                extend(start, w);
                path.pop_back();
                used[w] = false;
            }
        }
    };
    for (std::size_t start = 1; start < n; ++start) {
        path.assign(1, start);
        extend(start, start);
    }
    std::sort(cycles.begin(), cycles.end(), [](const Cycle& a, const Cycle& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return cycles;
}

}  // namespace smallgain
