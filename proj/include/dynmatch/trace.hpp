#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dynmatch/types.hpp"

namespace dynmatch {

enum class Procedure : std::uint8_t {
    naive_settle_augmented,
    random_settle_augmented,
    deterministic_raise_level_to_1,
    randomised_raise_level_to_1,
    fix_3_aug_path_d,
    fix_3_aug_path,
    handle_delete_level1,
    handle_insert_level0,
};

inline constexpr std::size_t kProcedureCount = 8;

inline constexpr std::array<Procedure, kProcedureCount> kAllProcedures = {
    Procedure::naive_settle_augmented,         Procedure::random_settle_augmented,
    Procedure::deterministic_raise_level_to_1, Procedure::randomised_raise_level_to_1,
    Procedure::fix_3_aug_path_d,               Procedure::fix_3_aug_path,
    Procedure::handle_delete_level1,           Procedure::handle_insert_level0,
};

inline constexpr std::string_view procedure_name(Procedure p) noexcept {
    switch (p) {
        case Procedure::naive_settle_augmented: return "naive_settle_augmented";
        case Procedure::random_settle_augmented: return "random_settle_augmented";
        case Procedure::deterministic_raise_level_to_1: return "deterministic_raise_level_to_1";
        case Procedure::randomised_raise_level_to_1: return "randomised_raise_level_to_1";
        case Procedure::fix_3_aug_path_d: return "fix_3_aug_path_d";
        case Procedure::fix_3_aug_path: return "fix_3_aug_path";
        case Procedure::handle_delete_level1: return "handle_delete_level1";
        case Procedure::handle_insert_level0: return "handle_insert_level0";
    }
    return "unknown";
}

struct ProcedureCall {
    Procedure procedure;
    std::array<VertexId, 4> args{kNoVertex, kNoVertex, kNoVertex, kNoVertex};
    bool flag = false;
};

/// Procedure calls made while processing one update, in call order.
struct ProcedureTrace {
    std::vector<ProcedureCall> calls;

    std::size_t size() const noexcept { return calls.size(); }
    bool empty() const noexcept { return calls.empty(); }

    std::size_t count(Procedure p) const noexcept {
        std::size_t k = 0;
        for (const auto& c : calls) k += c.procedure == p;
        return k;
    }
    bool contains(Procedure p) const noexcept { return count(p) != 0; }
};

/// How a matched edge came to be added.
struct MatchOrigin {
    Procedure creator;
    /// Set when the edge was drawn uniformly from the owner's list.
    bool random = false;
    VertexId owner = kNoVertex;
    /// Owner's list at the moment of the draw (other endpoints). Only valid
    /// for the duration of the callback.
    std::span<const VertexId> owner_list{};
};

class State;

/// Hooks the engine calls while it runs. All default to no-ops.
class EngineObserver {
public:
    virtual ~EngineObserver() = default;
    virtual void update_begin(std::uint64_t /*index*/, const UpdateOp& /*op*/) {}
    /// Edge (u,v) has left the graph.
    virtual void edge_removed(VertexId /*u*/, VertexId /*v*/) {}
    virtual void matched(VertexId /*u*/, VertexId /*v*/, const MatchOrigin& /*origin*/) {}
    /// Called before any level change, so `level` is the edge's level while matched.
    virtual void unmatched(VertexId /*u*/, VertexId /*v*/, Level /*level*/) {}
    /// A matched level-0 edge was lifted to level 1 without leaving the matching.
    virtual void raised(VertexId /*u*/, VertexId /*v*/, Procedure /*by*/) {}
    virtual void update_end(std::uint64_t /*index*/, const State& /*state*/, const ProcedureTrace& /*trace*/) {}
};

}  // namespace dynmatch
