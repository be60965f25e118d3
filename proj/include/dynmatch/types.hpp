#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace dynmatch {

using VertexId = std::uint32_t;

inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

enum class Level : std::uint8_t { zero = 0, one = 1 };

inline constexpr int to_int(Level level) noexcept { return static_cast<int>(level); }

/// 64-bit Mersenne Twister. Its output sequence is fixed by the standard, so a
/// seed replays identically on every conforming implementation.
using Rng = std::mt19937_64;

/// Unbiased draw from [0, bound). std::uniform_int_distribution is
/// implementation-defined, so replays would differ between standard libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_index: empty range");
    const std::uint64_t reject_below = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= reject_below) return r % bound;
    }
}

/// Smallest integer t with t*t >= n.
inline constexpr std::uint32_t ceil_sqrt(std::uint64_t n) noexcept {
    std::uint64_t t = 0;
    while (t * t < n) ++t;
    return static_cast<std::uint32_t>(t);
}

/// Construction parameters of a matching structure.
///
/// `threshold` is the cutoff that separates small from large ownership lists
/// and degrees. Zero selects the default ceil(sqrt(n)).
struct Config {
    std::uint32_t n = 1;
    std::uint32_t threshold = 0;
    std::uint64_t seed = 1;

    Config() = default;
    Config(std::uint32_t n_, std::uint32_t threshold_ = 0, std::uint64_t seed_ = 1)
        : n(n_), threshold(threshold_), seed(seed_) {}

    std::uint32_t effective_threshold() const noexcept {
        return threshold != 0 ? threshold : ceil_sqrt(n);
    }

    void validate() const {
        if (n == 0) throw std::invalid_argument("config: vertex count must be at least 1");
        if (n == kNoVertex) throw std::invalid_argument("config: vertex count too large");
    }
};

enum class UpdateKind : std::uint8_t { insert, erase };

struct UpdateOp {
    UpdateKind kind = UpdateKind::insert;
    VertexId u = 0;
    VertexId v = 0;

    static UpdateOp insertion(VertexId a, VertexId b) { return {UpdateKind::insert, a, b}; }
    static UpdateOp deletion(VertexId a, VertexId b) { return {UpdateKind::erase, a, b}; }

    friend bool operator==(const UpdateOp&, const UpdateOp&) = default;
};

/// Order-independent key of an undirected edge.
inline constexpr std::uint64_t edge_key(VertexId a, VertexId b) noexcept {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

inline constexpr std::pair<VertexId, VertexId> edge_from_key(std::uint64_t key) noexcept {
    return {static_cast<VertexId>(key >> 32), static_cast<VertexId>(key & 0xffffffffu)};
}

}  // namespace dynmatch
