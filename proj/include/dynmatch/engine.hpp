#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dynmatch/state.hpp"
#include "dynmatch/trace.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

/// Fully dynamic maximal matching with no augmenting path of length 3.
///
/// Every update restores the following at return (threshold t, ceil(sqrt n)
/// by default):
///   1a. level-1 vertices are matched;
///   1b. free vertices are at level 0 and have no free neighbour;
///   2.  level-0 vertices own fewer than t edges;
///   3.  matched level-0 vertices have degree below t;
///   4.  mates share a level;
///   5.  no path u-v-y-z with u, z free and (v,y) matched.
/// Together 1b and 5 make the matching a 3/2-approximation of the maximum.
///
/// The procedures are public so that tests can drive them on hand-built
/// states; outside an update they must be called with their stated
/// preconditions, which they check and report with std::logic_error.
class Engine {
public:
    explicit Engine(const Config& config) : state_(config) {}
    explicit Engine(State state) : state_(std::move(state)) {}

    const State& state() const noexcept { return state_; }
    /// Direct mutable access, for building test fixtures.
    State& mutable_state() noexcept { return state_; }

    void set_observer(EngineObserver* observer) noexcept { observer_ = observer; }

    std::uint32_t threshold() const noexcept { return state_.threshold(); }
    std::size_t matching_size() const noexcept { return state_.matching_size(); }
    std::uint64_t update_count() const noexcept { return updates_; }
    const ProcedureTrace& trace() const noexcept { return trace_; }
    void clear_trace() noexcept { trace_.calls.clear(); }

    // --- updates ------------------------------------------------------------

    ProcedureTrace apply(const UpdateOp& op) {
        return op.kind == UpdateKind::insert ? insert_edge(op.u, op.v) : delete_edge(op.u, op.v);
    }

    ProcedureTrace insert_edge(VertexId u, VertexId v) {
        if (u >= state_.n() || v >= state_.n()) throw std::out_of_range("insert: vertex out of range");
        if (u == v) throw std::invalid_argument("insert: self-loop " + std::to_string(u));
        if (state_.has_edge(u, v)) throw std::invalid_argument("insert: duplicate edge");
        begin_update(UpdateOp::insertion(u, v));

        state_.add_edge(u, v);
        // F(x) lists the free neighbours of x, the new edge included, so the
        // procedures below see it.
        if (state_.is_free(u)) state_.f_insert(v, u);
        if (state_.is_free(v)) state_.f_insert(u, v);

        const Level lu = state_.level(u);
        const Level lv = state_.level(v);
        if (lu == Level::one && lv == Level::one) {
            state_.own_add(std::min(u, v), std::max(u, v));
        } else if (lu == Level::one) {
            state_.own_add(u, v);
            insert_across_levels(u, v);
        } else if (lv == Level::one) {
            state_.own_add(v, u);
            insert_across_levels(v, u);
        } else {
            handle_insert_level0(u, v);
        }

        sync_endpoint_lists(u, v);
        return end_update();
    }

    ProcedureTrace delete_edge(VertexId u, VertexId v) {
        if (!state_.has_edge(u, v)) throw std::invalid_argument("delete: absent edge");
        begin_update(UpdateOp::deletion(u, v));

        if (auto owner = state_.owner_of(u, v)) state_.own_remove(*owner, *owner == u ? v : u);
        state_.f_delete(u, v);
        state_.f_delete(v, u);
        state_.remove_edge(u, v);
        if (observer_) observer_->edge_removed(u, v);

        if (state_.mate(u) == v) {
            const Level level = state_.level(u);
            unmatch(u, v);
            if (level == Level::zero) {
                naive_settle_augmented(u, false);
                if (state_.is_free(v)) settle_freed(v, false);
            } else {
                handle_delete_level1(u, false);
                if (state_.is_free(v)) settle_freed(v, false);
            }
        }
        return end_update();
    }

    // --- macros --------------------------------------------------------------

    /// For matched v with y = mate(v): a free neighbour z != u of y, if any.
    /// u is taken out of F(y) for the query and put back afterwards.
    std::optional<VertexId> check_3_aug_path(VertexId u, VertexId v) {
        const auto y = state_.mate(v);
        if (!y) throw std::logic_error("check_3_aug_path: vertex " + std::to_string(v) + " is unmatched");
        const bool removed = state_.free_index(*y).contains(u);
        if (removed) state_.f_delete(*y, u);
        auto z = state_.get_free(*y);
        if (removed) state_.f_insert(*y, u);
        return z;
    }

    /// u dropped to level 0: hand edges to level-1 neighbours back to them.
    void transfer_ownership_from(VertexId u) {
        std::vector<VertexId> moving;
        for (VertexId w : state_.owned(u))
            if (state_.level(w) == Level::one) moving.push_back(w);
        for (VertexId w : moving) state_.own_move(u, w);
    }

    /// u rises to level 1: take every edge a level-0 neighbour owns.
    void transfer_ownership_to(VertexId u) {
        for (VertexId w : state_.neighbors(u))
            if (state_.level(w) == Level::zero && state_.owns(w, u)) state_.own_move(w, u);
    }

    /// Take every incident edge regardless of the other endpoint's level.
    void take_ownership(VertexId u) {
        for (VertexId w : state_.neighbors(u))
            if (state_.owns(w, u)) state_.own_move(w, u);
    }

    void insert_to_f_list(VertexId u) {
        for (VertexId w : state_.neighbors(u)) state_.f_insert(w, u);
    }

    void delete_from_f_list(VertexId u) {
        for (VertexId w : state_.neighbors(u)) state_.f_delete(w, u);
    }

    // --- procedures ----------------------------------------------------------

    void naive_settle_augmented(VertexId u, bool flag) {
        CallScope scope(*this, Procedure::naive_settle_augmented, {u}, flag);
        require(state_.is_free(u) && state_.level(u) == Level::zero, "naive_settle_augmented: u must be free at level 0");

        if (auto w = state_.get_free(u)) {
            match(u, *w);
            if (large_degree(u)) {
                if (flag)
                    deterministic_raise_level_to_1(u);
                else
                    randomised_raise_level_to_1(u);
            } else if (large_degree(*w)) {
                if (flag) {
                    deterministic_raise_level_to_1(*w);
                } else {
                    randomised_raise_level_to_1(*w);
                    if (state_.is_free(u)) naive_settle_augmented(u, true);
                }
            }
            return;
        }

        for (VertexId x : state_.neighbors(u)) {
            if (state_.is_free(x)) continue;
            if (auto z = check_3_aug_path(u, x)) {
                const VertexId y = *state_.mate(x);
                if (flag)
                    fix_3_aug_path_d(u, x, y, *z);
                else
                    fix_3_aug_path(u, x, y, *z);
                break;
            }
        }
        if (state_.is_free(u)) insert_to_f_list(u);
    }

    /// Matches u to a uniformly drawn owned edge (u,y) at level 1. Returns
    /// y's previous mate, now free, if there was one.
    std::optional<VertexId> random_settle_augmented(VertexId u) {
        CallScope scope(*this, Procedure::random_settle_augmented, {u});
        require(state_.is_free(u) && state_.level(u) == Level::zero,
                "random_settle_augmented: u must be free at level 0");
        require(state_.owned(u).size() >= threshold(), "random_settle_augmented: |O_u| below threshold");

        const VertexId y = state_.own_sample_uniform(u);
        if (observer_) pending_draw_.assign(state_.owned(u).begin(), state_.owned(u).end());
        transfer_ownership_to(y);

        const auto x = state_.mate(y);
        if (x) unmatch(*x, y);
        match(u, y, /*random_owner=*/u);
        pending_draw_.clear();
        state_.set_level(u, Level::one);
        state_.set_level(y, Level::one);

        if (auto path = find_path_through(u)) {
            auto [a, b, c, d] = *path;
            fix_3_aug_path_d(a, b, c, d);
        }
        state_.set_flag(true);
        return x;
    }

    void deterministic_raise_level_to_1(VertexId u) {
        CallScope scope(*this, Procedure::deterministic_raise_level_to_1, {u});
        require_raisable(u, "deterministic_raise_level_to_1");
        const VertexId v = *state_.mate(u);
        take_ownership(u);
        transfer_ownership_to(v);
        state_.set_level(u, Level::one);
        state_.set_level(v, Level::one);
        if (observer_) observer_->raised(u, v, Procedure::deterministic_raise_level_to_1);
    }

    void randomised_raise_level_to_1(VertexId u) {
        CallScope scope(*this, Procedure::randomised_raise_level_to_1, {u});
        require_raisable(u, "randomised_raise_level_to_1");
        const VertexId v = *state_.mate(u);
        unmatch(u, v);
        take_ownership(u);
        if (auto x = random_settle_augmented(u)) settle_freed(*x, true);
        if (state_.is_free(v)) settle_freed(v, true);
    }

    void fix_3_aug_path_d(VertexId u, VertexId v, VertexId y, VertexId z) {
        CallScope scope(*this, Procedure::fix_3_aug_path_d, {u, v, y, z});
        require_path(u, v, y, z, "fix_3_aug_path_d");
        transfer_ownership_to(u);
        transfer_ownership_to(z);
        if (state_.level(v) == Level::zero) {
            transfer_ownership_to(v);
            transfer_ownership_to(y);
            state_.set_level(v, Level::one);
            state_.set_level(y, Level::one);
        }
        unmatch(v, y);
        match(u, v);
        match(y, z);
        state_.set_level(u, Level::one);
        state_.set_level(z, Level::one);
    }

    void fix_3_aug_path(VertexId u, VertexId v, VertexId y, VertexId z) {
        CallScope scope(*this, Procedure::fix_3_aug_path, {u, v, y, z});
        require_path(u, v, y, z, "fix_3_aug_path");
        const Level level = state_.level(v);
        unmatch(v, y);
        match(u, v);
        match(y, z);

        if (level == Level::one) {
            // The endpoint that is not raised at random joins its level-1
            // mate first, so no matched edge spans two levels while the
            // random raise runs.
            if (large_degree(u)) {
                lift_to_partner(z, y);
                randomised_raise_level_to_1(u);
                if (state_.is_free(v) && state_.level(v) == Level::one) handle_delete_level1(v, true);
            } else if (large_degree(z)) {
                lift_to_partner(u, v);
                randomised_raise_level_to_1(z);
                if (state_.is_free(y) && state_.level(y) == Level::one) handle_delete_level1(y, true);
            } else {
                transfer_ownership_to(u);
                transfer_ownership_to(z);
                state_.set_level(u, Level::one);
                state_.set_level(z, Level::one);
            }
            return;
        }

        if (large_degree(u)) {
            randomised_raise_level_to_1(u);
            if (state_.is_free(v)) settle_freed(v, true);
        }
        if (large_degree(z) && state_.is_matched(z) && state_.level(z) == Level::zero) {
            randomised_raise_level_to_1(z);
            if (state_.is_free(y)) settle_freed(y, true);
        }
    }

    void handle_delete_level1(VertexId u, bool flag) {
        CallScope scope(*this, Procedure::handle_delete_level1, {u}, flag);
        require(state_.is_free(u) && state_.level(u) == Level::one, "handle_delete_level1: u must be free at level 1");
        transfer_ownership_from(u);
        state_.set_level(u, Level::zero);
        if (state_.owned(u).size() >= threshold()) {
            if (auto x = random_settle_augmented(u)) settle_freed(*x, true);
        } else {
            naive_settle_augmented(u, flag);
        }
    }

    /// Insertion of (u,v) between two level-0 vertices; the edge is already in
    /// the adjacency but not yet owned.
    void handle_insert_level0(VertexId u, VertexId v) {
        CallScope scope(*this, Procedure::handle_insert_level0, {u, v});
        require(state_.level(u) == Level::zero && state_.level(v) == Level::zero,
                "handle_insert_level0: both endpoints must be at level 0");
        require(state_.has_edge(u, v) && !state_.owner_of(u, v), "handle_insert_level0: edge must be present and unowned");

        if (state_.owned(u).size() >= state_.owned(v).size())
            state_.own_add(u, v);
        else
            state_.own_add(v, u);

        bool matched_uv = false;
        if (state_.is_free(u) && state_.is_free(v)) {
            match(u, v);
            matched_uv = true;
        }
        if (state_.owned(v).size() > state_.owned(u).size()) std::swap(u, v);

        if (state_.owned(u).size() == threshold()) {
            transfer_ownership_to(u);
            const auto previous = state_.mate(u);
            if (previous) unmatch(u, *previous);
            if (auto x = random_settle_augmented(u)) settle_freed(*x, true);
            if (matched_uv) {
                if (state_.mate(u) != v && state_.is_free(v)) naive_settle_augmented(v, true);
            } else {
                if (previous && state_.is_free(*previous)) settle_freed(*previous, true);
                if (state_.is_matched(v) && large_degree(v) && state_.level(v) == Level::zero)
                    deterministic_raise_level_to_1(v);
            }
        } else if (state_.is_matched(v)) {
            if (large_degree(v)) {
                randomised_raise_level_to_1(v);
                if (state_.is_matched(u) && large_degree(u) && state_.level(u) == Level::zero)
                    deterministic_raise_level_to_1(u);
            } else if (state_.is_free(u)) {
                if (auto z = check_3_aug_path(u, v)) fix_3_aug_path(u, v, *state_.mate(v), *z);
            } else if (large_degree(u)) {
                randomised_raise_level_to_1(u);
            }
        } else if (state_.is_matched(u)) {
            if (large_degree(u)) {
                randomised_raise_level_to_1(u);
            } else if (state_.is_free(v)) {
                if (auto z = check_3_aug_path(v, u)) fix_3_aug_path(v, u, *state_.mate(u), *z);
            }
        }

    }

    /// Length-3 augmenting path through the matched edge at v, found through
    /// the free-neighbour indexes: (a, b, c, d) with a free next to b,
    /// (b,c) matched and d free next to c, a != d.
    std::optional<std::tuple<VertexId, VertexId, VertexId, VertexId>> find_path_through(VertexId v) {
        const auto y = state_.mate(v);
        if (!y) return std::nullopt;
        const auto a = state_.get_free(v);
        if (!a) return std::nullopt;
        if (auto z = check_3_aug_path(*a, v)) return std::tuple{*a, v, *y, *z};
        // F(y) is empty or exactly {a}; in the second case a path b-v-y-a
        // exists whenever v has another free neighbour b.
        if (state_.has_free(*y)) {
            if (auto b = check_3_aug_path(*a, *y)) return std::tuple{*b, v, *y, *a};
        }
        return std::nullopt;
    }

    /// Engine-side augmenting-path test that reads only the F indexes; valid
    /// between updates, when F(x) holds exactly the free neighbours of x.
    bool has_3_aug_path_indexed() const {
        for (VertexId v = 0; v < state_.n(); ++v) {
            const auto y = state_.mate(v);
            if (!y || v > *y) continue;
            const auto& fv = state_.free_index(v);
            const auto& fy = state_.free_index(*y);
            if (!fv.has_free() || !fy.has_free()) continue;
            if (fv.total() > 1 || fy.total() > 1) return true;
            if (*fv.get_free() != *fy.get_free()) return true;
        }
        return false;
    }

private:
    class CallScope {
    public:
        CallScope(Engine& engine, Procedure p, std::initializer_list<VertexId> args, bool flag = false)
            : engine_(engine) {
            ProcedureCall call{p};
            std::size_t i = 0;
            for (VertexId a : args) call.args[i++] = a;
            call.flag = flag;
            engine_.trace_.calls.push_back(call);
            engine_.active_.push_back(p);
        }
        ~CallScope() { engine_.active_.pop_back(); }
        CallScope(const CallScope&) = delete;
        CallScope& operator=(const CallScope&) = delete;

    private:
        Engine& engine_;
    };

    void begin_update(const UpdateOp& op) {
        trace_.calls.clear();
        state_.set_flag(false);
        if (observer_) observer_->update_begin(updates_, op);
    }

    ProcedureTrace end_update() {
        if (observer_) observer_->update_end(updates_, state_, trace_);
        ++updates_;
        return trace_;
    }

    void insert_across_levels(VertexId high, VertexId low) {
        if (state_.is_free(low)) {
            if (auto z = check_3_aug_path(low, high)) fix_3_aug_path(low, high, *state_.mate(high), *z);
        } else if (large_degree(low)) {
            randomised_raise_level_to_1(low);
        }
    }

    /// Leaves F(u) and F(v) agreeing with the final freeness of v and u.
    void sync_endpoint_lists(VertexId u, VertexId v) {
        if (state_.is_free(u))
            state_.f_insert(v, u);
        else
            state_.f_delete(v, u);
        if (state_.is_free(v))
            state_.f_insert(u, v);
        else
            state_.f_delete(u, v);
    }

    /// Repairs a vertex that lost its mate mid-update.
    void settle_freed(VertexId x, bool flag) {
        if (!state_.is_free(x)) return;
        if (state_.level(x) == Level::one)
            handle_delete_level1(x, flag);
        else
            naive_settle_augmented(x, flag);
    }

    /// p was matched to partner at level 0 while partner is at level 1.
    void lift_to_partner(VertexId p, VertexId partner) {
        if (state_.mate(p) != partner || state_.level(p) == Level::one) return;
        transfer_ownership_to(p);
        state_.set_level(p, Level::one);
    }

    bool large_degree(VertexId v) const { return state_.degree(v) >= threshold(); }

    /// A vertex leaves the F lists as soon as it is matched. A vertex that
    /// loses its mate enters them only once its own settle step leaves it
    /// free, so no procedure can pick an unsettled vertex as a free endpoint.
    void match(VertexId u, VertexId v, VertexId random_owner = kNoVertex) {
        state_.set_match(u, v);
        delete_from_f_list(u);
        delete_from_f_list(v);
        if (!observer_) return;
        MatchOrigin origin{active_.empty() ? Procedure::handle_insert_level0 : active_.back()};
        if (random_owner != kNoVertex) {
            origin.random = true;
            origin.owner = random_owner;
            origin.owner_list = pending_draw_;
        }
        observer_->matched(u, v, origin);
    }

    void unmatch(VertexId u, VertexId v) {
        if (observer_) observer_->unmatched(u, v, std::max(state_.level(u), state_.level(v)));
        state_.unset_match(u, v);
    }

    static void require(bool condition, const char* what) {
        if (!condition) throw std::logic_error(what);
    }

    void require_raisable(VertexId u, const char* who) const {
        if (state_.is_free(u) || state_.level(u) != Level::zero || !large_degree(u))
            throw std::logic_error(std::string(who) + ": vertex must be matched at level 0 with degree >= threshold");
    }

    void require_path(VertexId u, VertexId v, VertexId y, VertexId z, const char* who) const {
        const bool ok = u != z && state_.is_free(u) && state_.is_free(z) && state_.level(u) == Level::zero &&
                        state_.mate(v) == y && state_.has_edge(u, v) && state_.has_edge(y, z);
        if (!ok) throw std::logic_error(std::string(who) + ": arguments do not form a 3-augmenting path");
    }

    State state_;
    ProcedureTrace trace_;
    std::vector<Procedure> active_;
    std::vector<VertexId> pending_draw_;
    EngineObserver* observer_ = nullptr;
    std::uint64_t updates_ = 0;
};

}  // namespace dynmatch
