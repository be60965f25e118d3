#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dynmatch/state.hpp"
#include "dynmatch/trace.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

enum class EpochClass : std::uint8_t { none, random, deterministic };

inline constexpr std::string_view epoch_class_name(EpochClass c) noexcept {
    switch (c) {
        case EpochClass::random: return "random";
        case EpochClass::deterministic: return "deterministic";
        case EpochClass::none: break;
    }
    return "none";
}

/// One stay of an edge in the matching.
struct EpochRecord {
    std::size_t id = 0;
    VertexId u = kNoVertex;
    VertexId v = kNoVertex;
    std::uint64_t created = 0;
    std::optional<std::uint64_t> terminated;
    Level level = Level::zero;
    bool level_final = false;
    EpochClass cls = EpochClass::none;
    Procedure creator = Procedure::handle_insert_level0;
    /// Random epochs: the sampling vertex and the size of its list at the draw.
    VertexId owner = kNoVertex;
    std::size_t owner_init_size = 0;
    /// Edges of the initial list deleted from the graph while the epoch lived.
    std::size_t deletions_from_init = 0;
    /// The epoch ended because its own edge left the graph.
    bool ended_by_deletion = false;
    std::optional<std::size_t> set_id;

    bool live() const noexcept { return !terminated.has_value(); }
};

enum class EpochSetClass : std::uint8_t { good, bad };

/// A random level-1 epoch plus the deterministic level-1 epochs created after
/// it in the same update, up to the next random creation.
struct EpochSetRecord {
    std::size_t id = 0;
    std::size_t representative = 0;
    std::vector<std::size_t> members;  // includes the representative
    std::optional<EpochSetClass> cls;
};

/// Bad iff fewer than ceil(init / 3) edges of the representative's initial
/// list were deleted before it terminated.
inline EpochSetClass classify_epoch_set(const EpochSetRecord& set, const EpochRecord& representative) {
    if (representative.id != set.representative) throw std::invalid_argument("classify_epoch_set: wrong representative");
    if (representative.live()) throw std::logic_error("classify_epoch_set: representative epoch is live");
    const std::size_t third = (representative.owner_init_size + 2) / 3;
    return representative.deletions_from_init < third ? EpochSetClass::bad : EpochSetClass::good;
}

struct UpdateRow {
    std::uint64_t index = 0;
    UpdateOp op{};
    std::size_t calls = 0;
    std::size_t matching_size = 0;
    std::size_t edge_count = 0;
    std::uint64_t wall_ns = 0;
};

/// Everything a run reports. `wall_ns` fields are timing; all other fields
/// are a function of (sequence, seed, threshold).
struct RunStats {
    std::uint64_t seed = 0;
    std::uint32_t n = 0;
    std::uint32_t threshold = 0;

    std::uint64_t updates = 0;
    std::uint64_t inserts = 0;
    std::uint64_t deletes = 0;
    std::size_t final_matching_size = 0;
    std::size_t final_edge_count = 0;
    std::uint64_t procedure_calls = 0;
    std::size_t max_calls = 0;
    std::array<std::uint64_t, kProcedureCount> procedure_counts{};
    std::vector<std::uint64_t> calls_histogram;

    std::uint64_t epochs_opened = 0;
    std::uint64_t epochs_closed = 0;
    std::uint64_t epochs_level0 = 0;
    std::uint64_t epochs_level1_random = 0;
    std::uint64_t epochs_level1_deterministic = 0;
    std::uint64_t conservation_violations = 0;
    std::uint64_t unpreceded_deterministic = 0;

    std::uint64_t epoch_sets = 0;
    std::uint64_t epoch_sets_terminated = 0;
    std::uint64_t good_sets = 0;
    std::uint64_t bad_sets = 0;
    std::size_t max_set_members = 0;

    std::vector<UpdateRow> rows;
    std::uint64_t total_ns = 0;

    /// 3 t' / threshold, compared as good * threshold <= 3 * updates.
    bool good_sets_within_bound() const noexcept { return good_sets * threshold <= 3 * updates; }
    double bad_fraction() const noexcept {
        return epoch_sets_terminated == 0 ? 0.0 : static_cast<double>(bad_sets) / epoch_sets_terminated;
    }
    double amortized_ns() const noexcept { return updates == 0 ? 0.0 : static_cast<double>(total_ns) / updates; }
};

/// Engine observer that turns match/unmatch events into epochs and epoch-sets.
///
///     MetricsCollector metrics(config);
///     engine.set_observer(&metrics);
///     for (auto& op : seq.ops) engine.apply(op);
///     RunStats stats = metrics.stats();
class MetricsCollector : public EngineObserver {
public:
    explicit MetricsCollector(const Config& config, bool keep_rows = true)
        : seed_(config.seed), n_(config.n), threshold_(config.effective_threshold()), keep_rows_(keep_rows) {}

    const std::vector<EpochRecord>& epochs() const noexcept { return epochs_; }
    const std::vector<EpochSetRecord>& epoch_sets() const noexcept { return sets_; }
    std::size_t live_epochs() const noexcept { return live_.size(); }

    std::optional<std::size_t> live_epoch(VertexId u, VertexId v) const {
        auto it = live_.find(edge_key(u, v));
        if (it == live_.end()) return std::nullopt;
        return it->second;
    }

    // --- observer hooks ----------------------------------------------------

    void update_begin(std::uint64_t index, const UpdateOp& op) override {
        current_ = index;
        current_op_ = op;
        created_now_.clear();
        started_ = std::chrono::steady_clock::now();
    }

    void edge_removed(VertexId u, VertexId v) override {
        if (auto live = live_.find(edge_key(u, v)); live != live_.end()) epochs_[live->second].ended_by_deletion = true;
        auto it = watchers_.find(edge_key(u, v));
        if (it == watchers_.end()) return;
        for (std::size_t id : it->second) ++epochs_[id].deletions_from_init;
    }

    void matched(VertexId u, VertexId v, const MatchOrigin& origin) override {
        const std::size_t id = open_epoch(u, v, origin.creator);
        if (!origin.random) return;
        EpochRecord& rec = epochs_[id];
        rec.cls = EpochClass::random;
        rec.owner = origin.owner;
        rec.owner_init_size = origin.owner_list.size();
        auto& init = init_edges_[id];
        init.reserve(origin.owner_list.size());
        for (VertexId w : origin.owner_list) {
            const auto key = edge_key(origin.owner, w);
            init.push_back(key);
            watchers_[key].push_back(id);
        }
        EpochSetRecord set{sets_.size(), id, {id}, std::nullopt};
        rec.set_id = set.id;
        sets_.push_back(std::move(set));
    }

    void unmatched(VertexId u, VertexId v, Level level) override {
        auto it = live_.find(edge_key(u, v));
        if (it == live_.end()) throw std::logic_error("metrics: unmatch without an open epoch");
        const std::size_t id = it->second;
        live_.erase(it);
        close_epoch(id, level);
    }

    void raised(VertexId u, VertexId v, Procedure by) override {
        auto it = live_.find(edge_key(u, v));
        if (it == live_.end()) throw std::logic_error("metrics: raise of an edge outside the matching");
        EpochRecord& rec = epochs_[it->second];
        if (rec.created == current_) {
            rec.creator = by;
            return;
        }
        const std::size_t old = it->second;
        live_.erase(it);
        close_epoch(old, Level::zero);
        open_epoch(u, v, by);
    }

    void update_end(std::uint64_t index, const State& state, const ProcedureTrace& trace) override {
        const auto elapsed = std::chrono::steady_clock::now() - started_;
        const auto ns = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count());

        // Levels and classes settle at the end of the creating update.
        std::optional<std::size_t> open_set;
        bool random_seen = false;
        for (std::size_t id : created_now_) {
            EpochRecord& rec = epochs_[id];
            if (!rec.level_final) {
                rec.level = std::max(state.level(rec.u), state.level(rec.v));
                rec.level_final = true;
            }
            if (rec.cls != EpochClass::random)
                rec.cls = rec.level == Level::one ? EpochClass::deterministic : EpochClass::none;
            if (rec.cls == EpochClass::random) {
                open_set = rec.set_id;
                random_seen = true;
            } else if (rec.cls == EpochClass::deterministic) {
                if (open_set) {
                    rec.set_id = open_set;
                    auto& members = sets_[*open_set].members;
                    members.push_back(id);
                    stats_.max_set_members = std::max(stats_.max_set_members, members.size());
                }
                const bool expensive = rec.creator == Procedure::deterministic_raise_level_to_1 ||
                                       rec.creator == Procedure::fix_3_aug_path_d;
                if (expensive && !random_seen) ++stats_.unpreceded_deterministic;
            }
            count_class(rec);
        }

        if (live_.size() != state.matching_size()) ++stats_.conservation_violations;

        ++stats_.updates;
        if (current_op_.kind == UpdateKind::insert)
            ++stats_.inserts;
        else
            ++stats_.deletes;
        stats_.procedure_calls += trace.size();
        stats_.max_calls = std::max(stats_.max_calls, trace.size());
        if (stats_.calls_histogram.size() <= trace.size()) stats_.calls_histogram.resize(trace.size() + 1, 0);
        ++stats_.calls_histogram[trace.size()];
        for (const auto& call : trace.calls) ++stats_.procedure_counts[static_cast<std::size_t>(call.procedure)];
        stats_.final_matching_size = state.matching_size();
        stats_.final_edge_count = state.edge_count();
        stats_.total_ns += ns;
        if (keep_rows_) stats_.rows.push_back({index, current_op_, trace.size(), state.matching_size(), state.edge_count(), ns});
    }

    RunStats stats() const {
        RunStats out = stats_;
        out.seed = seed_;
        out.n = n_;
        out.threshold = threshold_;
        out.epochs_opened = epochs_.size();
        out.epochs_closed = epochs_.size() - live_.size();
        out.epoch_sets = sets_.size();
        for (const auto& set : sets_)
            if (set.cls) {
                ++out.epoch_sets_terminated;
                ++(*set.cls == EpochSetClass::good ? out.good_sets : out.bad_sets);
            }
        return out;
    }

private:
    std::size_t open_epoch(VertexId u, VertexId v, Procedure creator) {
        EpochRecord rec;
        rec.id = epochs_.size();
        rec.u = std::min(u, v);
        rec.v = std::max(u, v);
        rec.created = current_;
        rec.creator = creator;
        epochs_.push_back(rec);
        live_[edge_key(u, v)] = rec.id;
        created_now_.push_back(rec.id);
        return rec.id;
    }

    void close_epoch(std::size_t id, Level level) {
        EpochRecord& rec = epochs_[id];
        rec.terminated = current_;
        if (!rec.level_final) {
            rec.level = level;
            rec.level_final = true;
        }
        if (auto it = init_edges_.find(id); it != init_edges_.end()) {
            for (auto key : it->second) {
                auto w = watchers_.find(key);
                if (w == watchers_.end()) continue;
                auto& ids = w->second;
                ids.erase(std::remove(ids.begin(), ids.end(), id), ids.end());
                if (ids.empty()) watchers_.erase(w);
            }
            init_edges_.erase(it);
        }
        if (rec.cls == EpochClass::random && rec.set_id) {
            EpochSetRecord& set = sets_[*rec.set_id];
            if (set.representative == id) set.cls = classify_epoch_set(set, rec);
        }
    }

    void count_class(const EpochRecord& rec) {
        if (rec.level == Level::zero)
            ++stats_.epochs_level0;
        else if (rec.cls == EpochClass::random)
            ++stats_.epochs_level1_random;
        else
            ++stats_.epochs_level1_deterministic;
    }

    std::uint64_t seed_;
    std::uint32_t n_;
    std::uint32_t threshold_;
    bool keep_rows_;

    std::vector<EpochRecord> epochs_;
    std::vector<EpochSetRecord> sets_;
    std::unordered_map<std::uint64_t, std::size_t> live_;
    std::unordered_map<std::size_t, std::vector<std::uint64_t>> init_edges_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> watchers_;
    std::vector<std::size_t> created_now_;

    std::uint64_t current_ = 0;
    UpdateOp current_op_{};
    std::chrono::steady_clock::time_point started_{};
    RunStats stats_;
};

// --- export -----------------------------------------------------------------

enum class MetricsFormat { json, csv };

inline constexpr std::string_view kMetricsSchema = "dynmatch.metrics/1";

namespace detail {

/// Shared totals, in export order. Both formats emit exactly these keys.
inline std::vector<std::pair<std::string, nlohmann::ordered_json>> total_fields(const RunStats& s) {
    return {
        {"updates", s.updates},
        {"inserts", s.inserts},
        {"deletes", s.deletes},
        {"final_matching_size", s.final_matching_size},
        {"final_edge_count", s.final_edge_count},
        {"procedure_calls", s.procedure_calls},
        {"max_calls_per_update", s.max_calls},
        {"epochs_opened", s.epochs_opened},
        {"epochs_closed", s.epochs_closed},
        {"epochs_level0", s.epochs_level0},
        {"epochs_level1_random", s.epochs_level1_random},
        {"epochs_level1_deterministic", s.epochs_level1_deterministic},
        {"epoch_conservation_violations", s.conservation_violations},
        {"unpreceded_deterministic_epochs", s.unpreceded_deterministic},
        {"epoch_sets", s.epoch_sets},
        {"epoch_sets_terminated", s.epoch_sets_terminated},
        {"good_epoch_sets", s.good_sets},
        {"bad_epoch_sets", s.bad_sets},
        {"max_epoch_set_members", s.max_set_members},
        {"good_epoch_sets_within_bound", s.good_sets_within_bound()},
    };
}

inline const char* op_symbol(const UpdateOp& op) { return op.kind == UpdateKind::insert ? "+" : "-"; }

}  // namespace detail

inline std::string to_json(const RunStats& s) {
    nlohmann::ordered_json doc;
    doc["schema"] = kMetricsSchema;
    doc["seed"] = s.seed;
    doc["config"] = {{"n", s.n}, {"threshold", s.threshold}};
    auto& totals = doc["totals"] = nlohmann::ordered_json::object();
    for (auto& [k, v] : detail::total_fields(s)) totals[k] = v;
    auto& procs = doc["procedures"] = nlohmann::ordered_json::object();
    for (Procedure p : kAllProcedures) procs[std::string(procedure_name(p))] = s.procedure_counts[static_cast<std::size_t>(p)];
    doc["calls_histogram"] = s.calls_histogram;
    doc["bad_epoch_set_fraction"] = s.bad_fraction();
    auto& rows = doc["updates"] = nlohmann::ordered_json::array();
    for (const auto& r : s.rows)
        rows.push_back({{"index", r.index},
                        {"op", detail::op_symbol(r.op)},
                        {"u", r.op.u},
                        {"v", r.op.v},
                        {"calls", r.calls},
                        {"matching_size", r.matching_size},
                        {"edge_count", r.edge_count}});
    auto& timing = doc["timing"];
    timing["total_ns"] = s.total_ns;
    timing["amortized_ns_per_update"] = s.amortized_ns();
    auto& per = timing["per_update_ns"] = nlohmann::ordered_json::array();
    for (const auto& r : s.rows) per.push_back(r.wall_ns);
    return doc.dump(2) + "\n";
}

/// Header lines `# key=value` carry the totals; timing lines start with
/// `# timing.`. Then one row per update.
inline std::string to_csv(const RunStats& s) {
    std::ostringstream out;
    out << "# schema=" << kMetricsSchema << '\n';
    out << "# seed=" << s.seed << '\n';
    out << "# n=" << s.n << '\n';
    out << "# threshold=" << s.threshold << '\n';
    for (auto& [k, v] : detail::total_fields(s)) out << "# " << k << '=' << v.dump() << '\n';
    for (Procedure p : kAllProcedures)
        out << "# procedure." << procedure_name(p) << '=' << s.procedure_counts[static_cast<std::size_t>(p)] << '\n';
    out << "# timing.total_ns=" << s.total_ns << '\n';
    out << "# timing.amortized_ns_per_update=" << nlohmann::json(s.amortized_ns()).dump() << '\n';
    out << "index,op,u,v,calls,matching_size,edge_count\n";
    for (const auto& r : s.rows)
        out << r.index << ',' << detail::op_symbol(r.op) << ',' << r.op.u << ',' << r.op.v << ',' << r.calls << ','
            << r.matching_size << ',' << r.edge_count << '\n';
    return out.str();
}

inline std::string export_metrics(const RunStats& s, MetricsFormat format) {
    return format == MetricsFormat::json ? to_json(s) : to_csv(s);
}

}  // namespace dynmatch
