#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynmatch/indexed_set.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

/// Header plus an ordered list of edge updates over a fixed vertex set.
struct UpdateSequence {
    std::uint32_t n = 0;
    std::string generator;
    std::uint64_t seed = 0;
    std::vector<UpdateOp> ops;

    std::size_t size() const noexcept { return ops.size(); }
    bool operator==(const UpdateSequence&) const = default;
};

/// Malformed or non-replayable sequence. `line()` is 1-based in the source
/// text, or the 1-based op position for sequences built in memory.
class SequenceError : public std::runtime_error {
public:
    SequenceError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Edge set replayed alongside a sequence to reject updates that cannot apply.
class ShadowGraph {
public:
    explicit ShadowGraph(std::uint32_t n) : n_(n) {}

    /// Returns an error message, or an empty string if `op` applies.
    std::string apply(const UpdateOp& op) {
        if (op.u >= n_ || op.v >= n_) return "vertex out of range (n=" + std::to_string(n_) + ")";
        if (op.u == op.v) return "self-loop on " + std::to_string(op.u);
        const auto key = edge_key(op.u, op.v);
        if (op.kind == UpdateKind::insert) {
            if (!edges_.insert(key).second) return "insert of present edge " + describe(op);
        } else if (edges_.erase(key) == 0) {
            return "delete of absent edge " + describe(op);
        }
        return {};
    }

    std::size_t size() const noexcept { return edges_.size(); }

    /// Present edges as (smaller, larger), ascending.
    std::vector<std::pair<VertexId, VertexId>> edges() const {
        std::vector<std::pair<VertexId, VertexId>> out;
        out.reserve(edges_.size());
        for (auto key : edges_) out.push_back(edge_from_key(key));
        return out;
    }

    static std::string describe(const UpdateOp& op) {
        return "(" + std::to_string(op.u) + "," + std::to_string(op.v) + ")";
    }

private:
    std::uint32_t n_;
    std::set<std::uint64_t> edges_;
};

inline void validate_replayable(const UpdateSequence& seq) {
    if (seq.n == 0) throw SequenceError(0, "n must be positive");
    ShadowGraph shadow(seq.n);
    for (std::size_t i = 0; i < seq.ops.size(); ++i)
        if (auto err = shadow.apply(seq.ops[i]); !err.empty()) throw SequenceError(i + 1, err);
}

inline std::vector<std::pair<VertexId, VertexId>> final_edges(const UpdateSequence& seq) {
    ShadowGraph shadow(seq.n);
    for (std::size_t i = 0; i < seq.ops.size(); ++i)
        if (auto err = shadow.apply(seq.ops[i]); !err.empty()) throw SequenceError(i + 1, err);
    return shadow.edges();
}

// --- generators -------------------------------------------------------------

namespace detail {

/// Workload generators draw from a stream separate from the engine's even
/// when given the same seed.
inline Rng workload_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x776c6f64u};
    return Rng(seq);
}

inline bool bernoulli(Rng& rng, double p) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
}

}  // namespace detail

/// t updates; each step inserts a uniformly random absent pair with
/// probability p_insert, otherwise deletes a uniformly random present edge.
/// A complete graph forces a delete and an empty one forces an insert.
inline UpdateSequence gen_random(std::uint32_t n, std::int64_t t, double p_insert, std::uint64_t seed) {
    if (t < 0) throw std::invalid_argument("gen_random: t must be non-negative");
    if (n == 0) throw std::invalid_argument("gen_random: n must be positive");
    if (!(p_insert > 0.0 && p_insert < 1.0)) throw std::invalid_argument("gen_random: p_insert must lie in (0,1)");

    UpdateSequence seq{n, "random", seed, {}};
    seq.ops.reserve(static_cast<std::size_t>(t));
    if (n < 2) {
        if (t > 0) throw std::invalid_argument("gen_random: no pairs exist for n < 2");
        return seq;
    }
    Rng rng = detail::workload_rng(seed);
    IndexedSet<std::uint64_t> present;
    const std::uint64_t pairs = std::uint64_t{n} * (n - 1) / 2;

    auto random_absent = [&]() -> std::uint64_t {
        for (int attempt = 0; attempt < 64; ++attempt) {
            const auto a = static_cast<VertexId>(uniform_index(rng, n));
            auto b = static_cast<VertexId>(uniform_index(rng, n - 1));
            if (b >= a) ++b;
            const auto key = edge_key(std::min(a, b), std::max(a, b));
            if (!present.contains(key)) return key;
        }
        // Dense graph: pick the k-th absent pair in lexicographic order.
        std::uint64_t k = uniform_index(rng, pairs - present.size());
        for (VertexId a = 0; a < n; ++a)
            for (VertexId b = a + 1; b < n; ++b) {
                const auto key = edge_key(a, b);
                if (present.contains(key)) continue;
                if (k-- == 0) return key;
            }
        throw std::logic_error("gen_random: absent pair count mismatch");
    };

    for (std::int64_t i = 0; i < t; ++i) {
        bool insert = detail::bernoulli(rng, p_insert);
        if (present.empty()) insert = true;
        if (present.size() == pairs) insert = false;
        if (insert) {
            const auto key = random_absent();
            present.insert(key);
            auto [a, b] = edge_from_key(key);
            seq.ops.push_back(UpdateOp::insertion(a, b));
        } else {
            const auto key = present.sample(rng);
            present.erase(key);
            auto [a, b] = edge_from_key(key);
            seq.ops.push_back(UpdateOp::deletion(a, b));
        }
    }
    return seq;
}

inline const std::vector<std::string>& named_patterns() {
    static const std::vector<std::string> names{"star-churn", "clique-build-teardown", "path-zipper"};
    return names;
}

/// Structured stress sequences.
///   star-churn: spokes (i,0) for every i, leaf first so that each leaf owns
///     its spoke and the centre's degree outgrows its list; then `rounds`
///     delete/reinsert pairs on random spokes (n rounds when 0).
///   clique-build-teardown: every pair inserted in ascending order, then all
///     deleted in a seeded random order; `rounds` is ignored.
///   path-zipper: blocks of four b..b+3 arrive as (b+1,b+2), (b,b+1),
///     (b+2,b+3), each joined to the previous block by (b-1,b); leftover
///     vertices extend the path. Then `rounds` times a random block drops its
///     three edges and receives them again in the same order.
inline UpdateSequence gen_named(const std::string& pattern, std::uint32_t n, std::uint64_t seed,
                                std::int64_t rounds = 0) {
    if (n == 0) throw std::invalid_argument("gen_named: n must be positive");
    if (rounds < 0) throw std::invalid_argument("gen_named: rounds must be non-negative");
    UpdateSequence seq{n, pattern, seed, {}};
    Rng rng = detail::workload_rng(seed);
    auto& ops = seq.ops;

    if (pattern == "star-churn") {
        for (VertexId i = 1; i < n; ++i) ops.push_back(UpdateOp::insertion(i, 0));
        if (n >= 2) {
            const std::int64_t count = rounds > 0 ? rounds : n;
            for (std::int64_t r = 0; r < count; ++r) {
                const auto leaf = static_cast<VertexId>(1 + uniform_index(rng, n - 1));
                ops.push_back(UpdateOp::deletion(leaf, 0));
                ops.push_back(UpdateOp::insertion(leaf, 0));
            }
        }
    } else if (pattern == "clique-build-teardown") {
        std::vector<std::pair<VertexId, VertexId>> all;
        for (VertexId a = 0; a < n; ++a)
            for (VertexId b = a + 1; b < n; ++b) all.emplace_back(a, b);
        for (auto [a, b] : all) ops.push_back(UpdateOp::insertion(a, b));
        for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[uniform_index(rng, i)]);
        for (auto [a, b] : all) ops.push_back(UpdateOp::deletion(a, b));
    } else if (pattern == "path-zipper") {
        const VertexId blocks = n / 4;
        auto block_edges = [](VertexId b) {
            return std::vector<std::pair<VertexId, VertexId>>{{b + 1, b + 2}, {b, b + 1}, {b + 2, b + 3}};
        };
        for (VertexId k = 0; k < blocks; ++k) {
            const VertexId b = 4 * k;
            if (k > 0) ops.push_back(UpdateOp::insertion(b - 1, b));
            for (auto [x, y] : block_edges(b)) ops.push_back(UpdateOp::insertion(x, y));
        }
        for (VertexId v = std::max<VertexId>(4 * blocks, 1); v < n; ++v) ops.push_back(UpdateOp::insertion(v - 1, v));
        if (blocks > 0) {
            for (std::int64_t r = 0; r < rounds; ++r) {
                const VertexId b = 4 * static_cast<VertexId>(uniform_index(rng, blocks));
                for (auto [x, y] : block_edges(b)) ops.push_back(UpdateOp::deletion(x, y));
                for (auto [x, y] : block_edges(b)) ops.push_back(UpdateOp::insertion(x, y));
            }
        }
    } else {
        throw std::invalid_argument("gen_named: unknown pattern '" + pattern + "'");
    }
    validate_replayable(seq);
    return seq;
}

/// Appends deletions of every edge left at the end of `seq`, ascending.
inline UpdateSequence extend_with_teardown(const UpdateSequence& seq) {
    UpdateSequence out = seq;
    for (auto [a, b] : final_edges(seq)) out.ops.push_back(UpdateOp::deletion(a, b));
    return out;
}

// --- text format ------------------------------------------------------------

inline std::string serialize(const UpdateSequence& seq) {
    std::ostringstream out;
    out << "n=" << seq.n << '\n';
    out << "# seed=" << seq.seed;
    if (!seq.generator.empty()) out << " gen=" << seq.generator;
    out << '\n';
    for (const auto& op : seq.ops) out << (op.kind == UpdateKind::insert ? '+' : '-') << ' ' << op.u << ' ' << op.v << '\n';
    return out.str();
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) parts.push_back(s.substr(i, j - i));
        i = j;
    }
    return parts;
}

}  // namespace detail

/// Parses the text format and checks that every op applies in order.
inline UpdateSequence parse(std::string_view text) {
    UpdateSequence seq;
    bool have_n = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::vector<std::size_t> op_lines;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const std::string_view line = detail::trim(text.substr(pos, end - pos));
        ++line_no;
        pos = end + 1;
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (line.front() == '#') {
            for (auto field : detail::split_ws(line.substr(1))) {
                if (field.starts_with("seed=")) {
                    if (!detail::parse_int(field.substr(5), seq.seed)) throw SequenceError(line_no, "bad seed");
                } else if (field.starts_with("gen=")) {
                    seq.generator = std::string(field.substr(4));
                }
            }
            continue;
        }
        if (!have_n) {
            if (!line.starts_with("n=") || !detail::parse_int(detail::trim(line.substr(2)), seq.n) || seq.n == 0)
                throw SequenceError(line_no, "expected header n=<positive int>");
            have_n = true;
            continue;
        }
        const auto parts = detail::split_ws(line);
        if (parts.size() != 3 || parts[0].size() != 1 || (parts[0][0] != '+' && parts[0][0] != '-'))
            throw SequenceError(line_no, "expected '+ <u> <v>' or '- <u> <v>'");
        UpdateOp op{parts[0][0] == '+' ? UpdateKind::insert : UpdateKind::erase, 0, 0};
        if (!detail::parse_int(parts[1], op.u) || !detail::parse_int(parts[2], op.v))
            throw SequenceError(line_no, "vertex ids must be non-negative integers");
        seq.ops.push_back(op);
        op_lines.push_back(line_no);
        if (end == text.size()) break;
    }
    if (!have_n) throw SequenceError(line_no, "missing header n=<int>");

    ShadowGraph shadow(seq.n);
    for (std::size_t i = 0; i < seq.ops.size(); ++i)
        if (auto err = shadow.apply(seq.ops[i]); !err.empty()) throw SequenceError(op_lines[i], err);
    return seq;
}

}  // namespace dynmatch
