#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynmatch/free_neighbor_index.hpp"
#include "dynmatch/indexed_set.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

using OwnershipList = IndexedSet<VertexId>;

/// Complete persistent state of the dynamic matching structure.
///
/// Holds adjacency, the mate map, levels, per-vertex ownership lists O_u,
/// per-vertex free-neighbour indexes F(v), the per-update flag and the seeded
/// generator. Every primitive here is O(1) (adjacency is O(log deg)); the
/// update procedures that combine them live in engine.hpp.
///
/// The five structural invariants are only promised between updates. The
/// primitives below check their own local preconditions and throw
/// std::logic_error on misuse, but never check global invariants.
class State {
public:
    explicit State(const Config& config)
        : config_(config),
          threshold_(config.effective_threshold()),
          adjacency_(config.n),
          mate_(config.n, kNoVertex),
          level_(config.n, Level::zero),
          owned_(config.n),
          rng_(config.seed) {
        config.validate();
        if (threshold_ == 0) throw std::invalid_argument("config: threshold must be at least 1");
        free_.reserve(config.n);
        for (std::uint32_t i = 0; i < config.n; ++i) free_.emplace_back(config.n, threshold_);
    }

    const Config& config() const noexcept { return config_; }
    std::uint32_t n() const noexcept { return config_.n; }
    std::uint32_t threshold() const noexcept { return threshold_; }

    // --- adjacency --------------------------------------------------------

    const std::set<VertexId>& neighbors(VertexId v) const { return adjacency_.at(v); }
    std::size_t degree(VertexId v) const { return adjacency_.at(v).size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }

    bool has_edge(VertexId u, VertexId v) const {
        return u < n() && v < n() && adjacency_[u].count(v) != 0;
    }

    /// Adds v to N(u) and u to N(v); ownership and matching are untouched.
    void add_edge(VertexId u, VertexId v) {
        check_vertex(u);
        check_vertex(v);
        if (u == v) throw std::invalid_argument("self-loop " + std::to_string(u));
        if (!adjacency_[u].insert(v).second)
            throw std::invalid_argument("duplicate edge " + edge_name(u, v));
        adjacency_[v].insert(u);
        ++edge_count_;
    }

    void remove_edge(VertexId u, VertexId v) {
        check_vertex(u);
        check_vertex(v);
        if (adjacency_[u].erase(v) == 0) throw std::invalid_argument("absent edge " + edge_name(u, v));
        adjacency_[v].erase(u);
        --edge_count_;
    }

    // --- matching -----------------------------------------------------------

    std::optional<VertexId> mate(VertexId v) const {
        const VertexId m = mate_.at(v);
        return m == kNoVertex ? std::nullopt : std::optional<VertexId>(m);
    }
    bool is_free(VertexId v) const { return mate_.at(v) == kNoVertex; }
    bool is_matched(VertexId v) const { return !is_free(v); }
    std::size_t matching_size() const noexcept { return matching_size_; }

    void set_match(VertexId u, VertexId v) {
        if (!has_edge(u, v)) throw std::logic_error("set_match: not an edge " + edge_name(u, v));
        if (is_matched(u) || is_matched(v))
            throw std::logic_error("set_match: endpoint already matched " + edge_name(u, v));
        mate_[u] = v;
        mate_[v] = u;
        ++matching_size_;
    }

    void unset_match(VertexId u, VertexId v) {
        check_vertex(u);
        check_vertex(v);
        if (mate_[u] != v || mate_[v] != u)
            throw std::logic_error("unset_match: not a matched edge " + edge_name(u, v));
        mate_[u] = kNoVertex;
        mate_[v] = kNoVertex;
        --matching_size_;
    }

    /// Matched edges as (smaller, larger) pairs in ascending order.
    std::vector<std::pair<VertexId, VertexId>> matching() const {
        std::vector<std::pair<VertexId, VertexId>> out;
        for (VertexId u = 0; u < n(); ++u)
            if (mate_[u] != kNoVertex && u < mate_[u]) out.emplace_back(u, mate_[u]);
        return out;
    }

    Level level(VertexId v) const { return level_.at(v); }
    void set_level(VertexId v, Level l) { level_.at(v) = l; }

    // --- ownership ----------------------------------------------------------

    const OwnershipList& owned(VertexId v) const { return owned_.at(v); }
    bool owns(VertexId owner, VertexId other) const { return owned_.at(owner).contains(other); }

    std::optional<VertexId> owner_of(VertexId u, VertexId v) const {
        if (owns(u, v)) return u;
        if (owns(v, u)) return v;
        return std::nullopt;
    }

    void own_add(VertexId owner, VertexId other) {
        if (!has_edge(owner, other)) throw std::logic_error("own_add: not an edge " + edge_name(owner, other));
        if (owns(other, owner) || !owned_[owner].insert(other))
            throw std::logic_error("own_add: edge already owned " + edge_name(owner, other));
    }

    void own_remove(VertexId owner, VertexId other) {
        check_vertex(other);
        if (!owned_.at(owner).erase(other))
            throw std::logic_error("own_remove: edge not owned by " + std::to_string(owner));
    }

    /// Moves edge (from, to) out of O_from into O_to.
    void own_move(VertexId from, VertexId to) {
        own_remove(from, to);
        owned_[to].insert(from);
    }

    /// Other endpoint of an edge drawn uniformly from O_owner.
    VertexId own_sample_uniform(VertexId owner) { return owned_.at(owner).sample(rng_); }

    // --- free-neighbour indexes --------------------------------------------

    const FreeNeighborIndex& free_index(VertexId v) const { return free_.at(v); }
    bool has_free(VertexId v) const { return free_.at(v).has_free(); }
    std::optional<VertexId> get_free(VertexId v) const { return free_.at(v).get_free(); }

    void f_insert(VertexId v, VertexId u) {
        check_vertex(u);
        free_.at(v).insert(u);
    }
    void f_delete(VertexId v, VertexId u) {
        check_vertex(u);
        free_.at(v).erase(u);
    }

    // --- per-update flag and randomness -----------------------------------

    bool flag() const noexcept { return flag_; }
    void set_flag(bool f) noexcept { flag_ = f; }
    Rng& rng() noexcept { return rng_; }

private:
    void check_vertex(VertexId v) const {
        if (v >= n()) throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
    }
    static std::string edge_name(VertexId u, VertexId v) {
        return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
    }

    Config config_;
    std::uint32_t threshold_;
    std::vector<std::set<VertexId>> adjacency_;
    std::size_t edge_count_ = 0;
    std::vector<VertexId> mate_;
    std::size_t matching_size_ = 0;
    std::vector<Level> level_;
    std::vector<OwnershipList> owned_;
    std::vector<FreeNeighborIndex> free_;
    bool flag_ = false;
    Rng rng_;
};

/// Fresh state: n isolated free level-0 vertices.
inline State new_state(const Config& config) { return State(config); }

}  // namespace dynmatch
