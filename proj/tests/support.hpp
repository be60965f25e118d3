#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

#include "dynmatch/state.hpp"

namespace dynmatch::testing {

using Edge = std::pair<VertexId, VertexId>;

/// Builds a state directly: edges, matched pairs, and the vertices placed at
/// level 1. Ownership follows the level rule (level-1 endpoint, else the
/// smaller id) and every F(v) is filled with the free neighbours of v.
inline State build_state(std::uint32_t n, std::uint32_t threshold, const std::vector<Edge>& edges,
                         const std::vector<Edge>& matched = {}, const std::vector<VertexId>& level_one = {},
                         std::uint64_t seed = 1) {
    State s(Config(n, threshold, seed));
    for (auto [a, b] : edges) s.add_edge(a, b);
    for (auto [a, b] : matched) s.set_match(a, b);
    for (VertexId v : level_one) s.set_level(v, Level::one);
    for (auto [a, b] : edges) {
        const bool a1 = s.level(a) == Level::one;
        const bool b1 = s.level(b) == Level::one;
        VertexId owner = std::min(a, b);
        if (a1 != b1) owner = a1 ? a : b;
        s.own_add(owner, owner == a ? b : a);
    }
    for (VertexId v = 0; v < n; ++v)
        for (VertexId w : s.neighbors(v))
            if (s.is_free(w)) s.f_insert(v, w);
    return s;
}

inline std::vector<std::vector<VertexId>> adjacency_of(std::uint32_t n, const std::vector<Edge>& edges) {
    std::vector<std::vector<VertexId>> adj(n);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

inline std::vector<VertexId> mate_of(std::uint32_t n, const std::vector<Edge>& matched) {
    std::vector<VertexId> mate(n, kNoVertex);
    for (auto [a, b] : matched) {
        mate[a] = b;
        mate[b] = a;
    }
    return mate;
}

}  // namespace dynmatch::testing
