#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dynmatch/state.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

struct Violation {
    std::string id;  // 1a 1b 2 3 4 5 OWN F SYM MAX
    std::string subject;
    std::string description;
};

struct ViolationReport {
    std::vector<Violation> violations;

    bool clean() const noexcept { return violations.empty(); }
    std::size_t size() const noexcept { return violations.size(); }
    bool contains(const std::string& id) const {
        for (const auto& v : violations)
            if (v.id == id) return true;
        return false;
    }
    void add(std::string id, std::string subject, std::string description) {
        violations.push_back({std::move(id), std::move(subject), std::move(description)});
    }

    /// One line per violation: `<id>\t<subject>\t<description>`.
    std::string to_text() const {
        std::ostringstream out;
        for (const auto& v : violations) out << v.id << '\t' << v.subject << '\t' << v.description << '\n';
        return out.str();
    }
};

namespace detail {

inline std::string vertex_name(VertexId v) { return "v" + std::to_string(v); }
inline std::string edge_name(VertexId u, VertexId v) {
    return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

/// Scans matched edges (v, mate v) for v ascending. `neighbors(x)` must yield
/// ids in ascending order; `mate[x]` is kNoVertex for free x.
template <typename Neighbors>
std::optional<std::tuple<VertexId, VertexId, VertexId, VertexId>> scan_3_aug_path(
    std::uint32_t n, Neighbors&& neighbors, const std::vector<VertexId>& mate) {
    for (VertexId v = 0; v < n; ++v) {
        const VertexId y = mate[v];
        if (y == kNoVertex) continue;
        for (VertexId u : neighbors(v)) {
            if (mate[u] != kNoVertex) continue;
            for (VertexId z : neighbors(y)) {
                if (z != u && mate[z] == kNoVertex) return std::tuple{u, v, y, z};
            }
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Length-3 augmenting path u-v-y-z (u, z free, (v,y) matched), first in
/// ascending (v, u, z) order.
inline std::optional<std::tuple<VertexId, VertexId, VertexId, VertexId>> find_3_aug_path(
    const std::vector<std::vector<VertexId>>& adjacency, const std::vector<VertexId>& mate) {
    if (mate.size() != adjacency.size()) throw std::invalid_argument("find_3_aug_path: size mismatch");
    std::vector<std::vector<VertexId>> sorted = adjacency;
    for (auto& list : sorted) std::sort(list.begin(), list.end());
    return detail::scan_3_aug_path(static_cast<std::uint32_t>(adjacency.size()),
                                   [&](VertexId x) -> const std::vector<VertexId>& { return sorted[x]; }, mate);
}

inline std::optional<std::tuple<VertexId, VertexId, VertexId, VertexId>> find_3_aug_path(const State& state) {
    std::vector<VertexId> mate(state.n(), kNoVertex);
    for (VertexId v = 0; v < state.n(); ++v) mate[v] = state.mate(v).value_or(kNoVertex);
    return detail::scan_3_aug_path(
        state.n(), [&](VertexId x) -> const std::set<VertexId>& { return state.neighbors(x); }, mate);
}

/// Evaluates every invariant from adjacency and the mate map, then checks the
/// ownership lists and free-neighbour indexes against them.
inline ViolationReport check_invariants(const State& state) {
    using detail::edge_name;
    using detail::vertex_name;
    ViolationReport report;
    const std::uint32_t n = state.n();
    const std::uint32_t thr = state.threshold();

    std::vector<VertexId> mate(n, kNoVertex);
    for (VertexId v = 0; v < n; ++v) mate[v] = state.mate(v).value_or(kNoVertex);

    std::size_t matched_vertices = 0;
    for (VertexId v = 0; v < n; ++v) {
        const VertexId m = mate[v];
        if (m == kNoVertex) continue;
        ++matched_vertices;
        if (m >= n || m == v || mate[m] != v) report.add("SYM", vertex_name(v), "mate is not symmetric");
        else if (!state.has_edge(v, m)) report.add("SYM", edge_name(v, m), "matched pair is not an edge");
    }
    if (matched_vertices != 2 * state.matching_size())
        report.add("SYM", "M", "matching size counter disagrees with the mate map");

    std::size_t degree_sum = 0;
    for (VertexId v = 0; v < n; ++v) {
        const bool free = mate[v] == kNoVertex;
        const Level level = state.level(v);
        degree_sum += state.degree(v);

        if (level == Level::one && free) report.add("1a", vertex_name(v), "level-1 vertex is free");
        if (free) {
            if (level != Level::zero) report.add("1b", vertex_name(v), "free vertex is not at level 0");
            for (VertexId w : state.neighbors(v)) {
                if (mate[w] == kNoVertex) {
                    report.add("1b", vertex_name(v), "free vertex has free neighbour " + std::to_string(w));
                    if (v < w) report.add("MAX", edge_name(v, w), "edge with both endpoints free");
                }
            }
        }
        if (level == Level::zero && state.owned(v).size() >= thr)
            report.add("2", vertex_name(v), "level-0 vertex owns " + std::to_string(state.owned(v).size()) + " edges");
        if (!free && level == Level::zero && state.degree(v) >= thr)
            report.add("3", vertex_name(v), "matched level-0 vertex has degree " + std::to_string(state.degree(v)));
        if (!free && mate[v] < n && state.level(mate[v]) != level)
            report.add("4", vertex_name(v), "level differs from its mate's");
    }

    if (auto path = find_3_aug_path(state)) {
        auto [u, v, y, z] = *path;
        report.add("5", edge_name(v, y),
                   "augmenting path " + std::to_string(u) + "-" + std::to_string(v) + "-" + std::to_string(y) + "-" +
                       std::to_string(z));
    }

    // Ownership: every owned entry is an edge, no edge is owned from both
    // sides, and the entries number exactly m.
    std::size_t owned_total = 0;
    for (VertexId v = 0; v < n; ++v) {
        for (VertexId w : state.owned(v)) {
            ++owned_total;
            if (!state.has_edge(v, w)) {
                report.add("OWN", edge_name(v, w), "owned entry is not an edge");
                continue;
            }
            if (state.owns(w, v) && v < w) report.add("OWN", edge_name(v, w), "edge owned by both endpoints");
            if (state.level(v) == Level::zero && state.level(w) == Level::one)
                report.add("OWN", edge_name(v, w), "owned by the level-0 endpoint");
        }
    }
    if (owned_total != state.edge_count() || degree_sum != 2 * state.edge_count())
        report.add("OWN", "E", "ownership entries do not cover each edge exactly once");

    // F(v) must equal the set of free neighbours of v.
    for (VertexId v = 0; v < n; ++v) {
        const auto& index = state.free_index(v);
        std::size_t free_neighbours = 0;
        for (VertexId w : state.neighbors(v)) {
            if (mate[w] != kNoVertex) continue;
            ++free_neighbours;
            if (!index.contains(w)) report.add("F", vertex_name(v), "missing free neighbour " + std::to_string(w));
        }
        if (index.members().size() != free_neighbours) {
            for (VertexId w : index.members())
                if (!state.has_edge(v, w) || mate[w] != kNoVertex)
                    report.add("F", vertex_name(v), "stale entry " + std::to_string(w));
        }
        if (index.total() != index.members().size()) report.add("F", vertex_name(v), "total disagrees with members");
        if (index.total() != 0) {
            std::uint64_t bucket_sum = 0;
            for (std::uint32_t j = 0; j < index.bucket_total(); ++j) bucket_sum += index.bucket_count(j);
            if (bucket_sum != index.total()) report.add("F", vertex_name(v), "bucket counters disagree with total");
        }
    }
    return report;
}

// --- oracle -----------------------------------------------------------------

inline constexpr std::uint32_t kOracleMaxVertices = 20;
inline constexpr std::size_t kOracleMaxEdges = 28;

inline bool oracle_fits(std::uint32_t n, std::size_t m) noexcept {
    return n <= kOracleMaxVertices || m <= kOracleMaxEdges;
}

/// Exact maximum matching size by exhaustive search over vertex subsets:
/// the lowest remaining vertex is either left unmatched or matched to one of
/// its remaining neighbours. Memoised on the remaining set.
inline std::size_t brute_force_mcm(std::uint32_t n, const std::vector<std::pair<VertexId, VertexId>>& edges) {
    if (!oracle_fits(n, edges.size()))
        throw std::length_error("brute_force_mcm: instance exceeds " + std::to_string(kOracleMaxVertices) +
                                " vertices and " + std::to_string(kOracleMaxEdges) + " edges");
    std::vector<int> compact(n, -1);
    std::uint32_t k = 0;
    for (auto [a, b] : edges) {
        if (a >= n || b >= n || a == b) throw std::invalid_argument("brute_force_mcm: bad edge");
        if (compact[a] < 0) compact[a] = static_cast<int>(k++);
        if (compact[b] < 0) compact[b] = static_cast<int>(k++);
    }
    if (k == 0) return 0;
    std::vector<std::uint64_t> adj(k, 0);
    for (auto [a, b] : edges) {
        adj[compact[a]] |= std::uint64_t{1} << compact[b];
        adj[compact[b]] |= std::uint64_t{1} << compact[a];
    }

    const bool dense_memo = k <= 24;
    std::vector<std::int8_t> table(dense_memo ? (std::size_t{1} << k) : 0, -1);
    std::unordered_map<std::uint64_t, std::int8_t> sparse;

    auto solve = [&](auto&& self, std::uint64_t mask) -> int {
        while (mask != 0) {
            const int a = std::countr_zero(mask);
            if ((adj[a] & mask) != 0) break;
            mask &= mask - 1;  // isolated within the remaining set
        }
        if (mask == 0) return 0;
        if (dense_memo) {
            if (table[mask] >= 0) return table[mask];
        } else if (auto it = sparse.find(mask); it != sparse.end()) {
            return it->second;
        }
        const int a = std::countr_zero(mask);
        const std::uint64_t rest = mask & ~(std::uint64_t{1} << a);
        int best = self(self, rest);
        for (std::uint64_t nb = adj[a] & rest; nb != 0; nb &= nb - 1) {
            const int b = std::countr_zero(nb);
            best = std::max(best, 1 + self(self, rest & ~(std::uint64_t{1} << b)));
        }
        if (dense_memo)
            table[mask] = static_cast<std::int8_t>(best);
        else
            sparse.emplace(mask, static_cast<std::int8_t>(best));
        return best;
    };
    const std::uint64_t all = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
    return static_cast<std::size_t>(solve(solve, all));
}

inline std::vector<std::pair<VertexId, VertexId>> edge_list(const State& state) {
    std::vector<std::pair<VertexId, VertexId>> edges;
    edges.reserve(state.edge_count());
    for (VertexId u = 0; u < state.n(); ++u)
        for (VertexId v : state.neighbors(u))
            if (u < v) edges.emplace_back(u, v);
    return edges;
}

inline std::size_t brute_force_mcm(const State& state) { return brute_force_mcm(state.n(), edge_list(state)); }

/// 2 * MCM <= 3 * |M|.
inline bool check_ratio(std::size_t mcm, std::size_t matching) noexcept { return 2 * mcm <= 3 * matching; }

inline bool check_ratio(const State& state) { return check_ratio(brute_force_mcm(state), state.matching_size()); }

}  // namespace dynmatch
