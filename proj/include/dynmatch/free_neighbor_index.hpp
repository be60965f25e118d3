#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "dynmatch/types.hpp"

namespace dynmatch {

/// Free-neighbour index F(v) of one vertex.
///
/// Vertex ids are split into buckets of `width` consecutive ids; a counter per
/// bucket plus a running total give O(1) insert, erase and has_free. get_free
/// walks the counters to the first non-empty bucket and then scans that
/// bucket's id range, so it costs O(n / width + width).
///
/// Membership is a hash set rather than an n-bit array: n bits per vertex is
/// n^2 bits overall, which does not fit at the benchmark sizes. Bucket counters
/// are allocated on first insert.
class FreeNeighborIndex {
public:
    FreeNeighborIndex() = default;
    FreeNeighborIndex(std::uint32_t n, std::uint32_t width) : n_(n), width_(width) {}

    /// Idempotent: returns false if u was already present.
    bool insert(VertexId u) {
        if (!members_.insert(u).second) return false;
        if (counts_.empty()) counts_.assign(bucket_total(), 0);
        ++counts_[u / width_];
        ++total_;
        return true;
    }

    /// Idempotent: returns false if u was absent.
    bool erase(VertexId u) {
        if (members_.erase(u) == 0) return false;
        --counts_[u / width_];
        --total_;
        return true;
    }

    bool contains(VertexId u) const { return members_.count(u) != 0; }
    bool has_free() const noexcept { return total_ > 0; }
    std::uint32_t total() const noexcept { return total_; }

    /// Lowest id inside the lowest-indexed non-empty bucket.
    std::optional<VertexId> get_free() const {
        if (total_ == 0) return std::nullopt;
        for (std::uint32_t j = 0; j < counts_.size(); ++j) {
            if (counts_[j] == 0) continue;
            const std::uint64_t lo = std::uint64_t{j} * width_;
            const std::uint64_t hi = std::min<std::uint64_t>(lo + width_, n_);
            for (std::uint64_t id = lo; id < hi; ++id) {
                if (members_.count(static_cast<VertexId>(id)) != 0) return static_cast<VertexId>(id);
            }
        }
        return std::nullopt;  // unreachable while counters are consistent
    }

    std::uint32_t bucket_total() const noexcept {
        return width_ == 0 ? 0 : static_cast<std::uint32_t>((std::uint64_t{n_} + width_ - 1) / width_);
    }
    std::uint32_t bucket_count(std::uint32_t j) const { return counts_.empty() ? 0 : counts_.at(j); }
    std::uint32_t width() const noexcept { return width_; }
    const std::unordered_set<VertexId>& members() const noexcept { return members_; }

private:
    std::uint32_t n_ = 0;
    std::uint32_t width_ = 1;
    std::uint32_t total_ = 0;
    std::vector<std::uint32_t> counts_;
    std::unordered_set<VertexId> members_;
};

}  // namespace dynmatch
