#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "dynmatch/state.hpp"
#include "support.hpp"

using namespace dynmatch;

TEST(Config, DefaultThresholdIsCeilSqrt) {
    EXPECT_EQ(Config(1).effective_threshold(), 1u);
    EXPECT_EQ(Config(8).effective_threshold(), 3u);
    EXPECT_EQ(Config(9).effective_threshold(), 3u);
    EXPECT_EQ(Config(10).effective_threshold(), 4u);
    EXPECT_EQ(Config(64).effective_threshold(), 8u);
    EXPECT_EQ(Config(65536).effective_threshold(), 256u);
    EXPECT_EQ(Config(16, 2).effective_threshold(), 2u);
}

TEST(NewState, EmptyStart) {
    State s = new_state(Config(4, 0, 1));
    EXPECT_EQ(s.edge_count(), 0u);
    EXPECT_EQ(s.matching_size(), 0u);
    for (VertexId v = 0; v < 4; ++v) {
        EXPECT_TRUE(s.is_free(v));
        EXPECT_EQ(s.level(v), Level::zero);
        EXPECT_TRUE(s.owned(v).empty());
        EXPECT_FALSE(s.has_free(v));
    }
    EXPECT_FALSE(s.flag());
}

TEST(NewState, SingleVertex) {
    State s = new_state(Config(1));
    EXPECT_EQ(s.n(), 1u);
    EXPECT_TRUE(s.is_free(0));
    EXPECT_EQ(s.level(0), Level::zero);
}

TEST(NewState, ZeroVerticesRejected) { EXPECT_THROW(new_state(Config(0)), std::invalid_argument); }

TEST(Adjacency, RejectsSelfLoopsAndParallelEdges) {
    State s(Config(4));
    s.add_edge(0, 1);
    EXPECT_THROW(s.add_edge(1, 0), std::invalid_argument);
    EXPECT_THROW(s.add_edge(2, 2), std::invalid_argument);
    EXPECT_THROW(s.remove_edge(2, 3), std::invalid_argument);
    EXPECT_EQ(s.degree(0), 1u);
    EXPECT_EQ(s.degree(1), 1u);
    EXPECT_TRUE(s.has_edge(1, 0));
}

// --- free-neighbour index ---------------------------------------------------

TEST(HasFree, EmptyGraph) {
    State s(Config(5));
    for (VertexId v = 0; v < 5; ++v) EXPECT_FALSE(s.has_free(v));
}

TEST(HasFree, OneFreeNeighbour) {
    State s(Config(5));
    s.add_edge(0, 1);
    s.f_insert(0, 1);
    EXPECT_TRUE(s.has_free(0));
}

TEST(HasFree, NeighbourMatchedAndRemoved) {
    State s(Config(5));
    s.add_edge(0, 1);
    s.add_edge(1, 2);
    s.f_insert(0, 1);
    s.set_match(1, 2);
    s.f_delete(0, 1);
    EXPECT_FALSE(s.has_free(0));
}

TEST(GetFree, LowestIdInLowestBucket) {
    // Buckets of width 4: {0..3} holds 3, {4..7} holds 7; the scan stops in bucket 0.
    FreeNeighborIndex f(8, 4);
    f.insert(7);
    f.insert(3);
    EXPECT_EQ(f.get_free(), std::optional<VertexId>(3));
}

TEST(GetFree, EmptyIsNone) {
    FreeNeighborIndex f(8, 4);
    EXPECT_EQ(f.get_free(), std::nullopt);
}

TEST(GetFree, SingleMember) {
    FreeNeighborIndex f(8, 4);
    f.insert(7);
    EXPECT_EQ(f.get_free(), std::optional<VertexId>(7));
}

TEST(GetFree, DeterministicForEqualContents) {
    FreeNeighborIndex a(100, 10), b(100, 10);
    for (VertexId x : {55u, 12u, 91u, 18u}) a.insert(x);
    for (VertexId x : {18u, 91u, 12u, 55u}) b.insert(x);
    EXPECT_EQ(a.get_free(), b.get_free());
    EXPECT_EQ(a.get_free(), std::optional<VertexId>(12));
}

TEST(FreeIndex, InsertIsIdempotent) {
    FreeNeighborIndex f(16, 4);
    EXPECT_TRUE(f.insert(5));
    EXPECT_FALSE(f.insert(5));
    EXPECT_EQ(f.total(), 1u);
}

TEST(FreeIndex, InsertThenDelete) {
    FreeNeighborIndex f(16, 4);
    f.insert(5);
    f.erase(5);
    EXPECT_EQ(f.total(), 0u);
    EXPECT_EQ(f.bucket_count(5 / 4), 0u);
    EXPECT_FALSE(f.erase(5));
}

TEST(FreeIndex, BucketArithmetic) {
    const std::uint32_t thr = 4;
    FreeNeighborIndex f(16, thr);
    f.insert(0);
    f.insert(thr);
    EXPECT_EQ(f.bucket_total(), 4u);
    EXPECT_EQ(f.bucket_count(0), 1u);
    EXPECT_EQ(f.bucket_count(1), 1u);
    EXPECT_EQ(f.total(), 2u);
}

TEST(FreeIndex, CountersStayConsistentUnderChurn) {
    const std::uint32_t n = 50, width = 7;
    FreeNeighborIndex f(n, width);
    std::set<VertexId> model;
    Rng rng(42);
    for (int i = 0; i < 5000; ++i) {
        const auto x = static_cast<VertexId>(uniform_index(rng, n));
        if (uniform_index(rng, 2) == 0) {
            f.insert(x);
            model.insert(x);
        } else {
            f.erase(x);
            model.erase(x);
        }
        ASSERT_EQ(f.total(), model.size());
        std::uint32_t sum = 0;
        for (std::uint32_t j = 0; j < f.bucket_total(); ++j) {
            std::uint32_t expect = 0;
            for (VertexId y : model) expect += y / width == j;
            ASSERT_EQ(f.bucket_count(j), expect);
            sum += f.bucket_count(j);
        }
        ASSERT_EQ(sum, f.total());
        if (model.empty())
            ASSERT_FALSE(f.get_free().has_value());
        else
            ASSERT_EQ(f.get_free(), std::optional<VertexId>(*model.begin()));
    }
}

// --- ownership --------------------------------------------------------------

TEST(Ownership, AddThenRemove) {
    State s(Config(4));
    s.add_edge(0, 1);
    s.own_add(0, 1);
    s.own_remove(0, 1);
    EXPECT_EQ(s.owned(0).size(), 0u);
}

TEST(Ownership, DoubleOwnershipRejected) {
    State s(Config(4));
    s.add_edge(0, 1);
    s.own_add(0, 1);
    EXPECT_THROW(s.own_add(1, 0), std::logic_error);
    EXPECT_THROW(s.own_add(0, 1), std::logic_error);
}

TEST(Ownership, RemoveOfUnownedRejected) {
    State s(Config(4));
    s.add_edge(0, 1);
    EXPECT_THROW(s.own_remove(0, 1), std::logic_error);
    EXPECT_THROW(s.own_add(2, 3), std::logic_error);
}

TEST(Ownership, SwapRemoveKeepsRestSampleable) {
    State s(Config(4, 0, 7));
    for (VertexId w : {1u, 2u, 3u}) {
        s.add_edge(0, w);
        s.own_add(0, w);
    }
    s.own_remove(0, 2);
    const auto& list = s.owned(0);
    ASSERT_EQ(list.size(), 2u);
    EXPECT_TRUE(list.contains(1));
    EXPECT_TRUE(list.contains(3));
    for (std::size_t i = 0; i < list.size(); ++i) EXPECT_EQ(list.position(list[i]), i);
    std::set<VertexId> seen;
    for (int i = 0; i < 200; ++i) seen.insert(s.own_sample_uniform(0));
    EXPECT_EQ(seen, (std::set<VertexId>{1, 3}));
}

TEST(Sampling, SingleEdgeIsForced) {
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        State s(Config(3, 0, seed));
        s.add_edge(0, 2);
        s.own_add(0, 2);
        EXPECT_EQ(s.own_sample_uniform(0), 2u);
    }
}

TEST(Sampling, EmptyListRejected) {
    State s(Config(3));
    EXPECT_THROW(s.own_sample_uniform(0), std::logic_error);
}

TEST(Sampling, TwoEdgesFreshSeedsAreBalanced) {
    const int draws = 100000;
    int first = 0;
    for (int seed = 1; seed <= draws; ++seed) {
        State s(Config(3, 0, static_cast<std::uint64_t>(seed)));
        s.add_edge(0, 1);
        s.add_edge(0, 2);
        s.own_add(0, 1);
        s.own_add(0, 2);
        first += s.own_sample_uniform(0) == 1;
    }
    const double freq = static_cast<double>(first) / draws;
    EXPECT_NEAR(freq, 0.5, 0.02);
    EXPECT_NEAR(1.0 - freq, 0.5, 0.02);
}

TEST(Sampling, UniformWithinTolerance) {
    // Each frequency within 4 * sqrt(ln k / R) of 1/k.
    const int k = 5;
    const int draws = 100000;
    IndexedSet<int> set;
    for (int i = 0; i < k; ++i) set.insert(i * 11);
    std::map<int, int> hits;
    for (int seed = 1; seed <= draws; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        ++hits[set.sample(rng)];
    }
    const double tol = 4.0 * std::sqrt(std::log(static_cast<double>(k)) / draws);
    ASSERT_EQ(hits.size(), static_cast<std::size_t>(k));
    for (auto [value, count] : hits) EXPECT_NEAR(static_cast<double>(count) / draws, 1.0 / k, tol) << value;
}

TEST(Sampling, ReplayIsDeterministic) {
    auto draw = [](std::uint64_t seed) {
        State s(Config(6, 0, seed));
        for (VertexId w = 1; w < 6; ++w) {
            s.add_edge(0, w);
            s.own_add(0, w);
        }
        std::vector<VertexId> out;
        for (int i = 0; i < 20; ++i) out.push_back(s.own_sample_uniform(0));
        return out;
    };
    EXPECT_EQ(draw(123), draw(123));
}

TEST(UniformIndex, RejectsZeroBoundAndStaysInRange) {
    Rng rng(5);
    EXPECT_THROW(uniform_index(rng, 0), std::invalid_argument);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(uniform_index(rng, 3), 3u);
}

// --- matching -----------------------------------------------------------------

TEST(Matching, SetAndUnset) {
    State s(Config(4));
    s.add_edge(0, 1);
    s.set_match(0, 1);
    EXPECT_EQ(s.mate(0), std::optional<VertexId>(1));
    EXPECT_EQ(s.mate(1), std::optional<VertexId>(0));
    EXPECT_EQ(s.matching_size(), 1u);
    s.unset_match(0, 1);
    EXPECT_TRUE(s.is_free(0));
    EXPECT_TRUE(s.is_free(1));
    EXPECT_EQ(s.matching_size(), 0u);
}

TEST(Matching, AlreadyMatchedEndpointRejected) {
    State s(Config(4));
    s.add_edge(0, 1);
    s.add_edge(1, 2);
    s.set_match(0, 1);
    EXPECT_THROW(s.set_match(1, 2), std::logic_error);
    EXPECT_THROW(s.unset_match(1, 2), std::logic_error);
    EXPECT_THROW(s.set_match(2, 3), std::logic_error);  // not an edge
}

TEST(Matching, MateSymmetryUnderChurn) {
    State s(Config(10));
    for (VertexId v = 0; v + 1 < 10; ++v) s.add_edge(v, v + 1);
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const auto v = static_cast<VertexId>(uniform_index(rng, 9));
        if (s.mate(v) == v + 1)
            s.unset_match(v, v + 1);
        else if (s.is_free(v) && s.is_free(v + 1))
            s.set_match(v, v + 1);
        for (VertexId x = 0; x < 10; ++x)
            if (auto m = s.mate(x)) {
                ASSERT_EQ(s.mate(*m), std::optional<VertexId>(x));
            }
    }
}

TEST(Fixture, OwnershipFollowsLevels) {
    using dynmatch::testing::build_state;
    State s = build_state(4, 2, {{0, 1}, {1, 2}, {2, 3}}, {{1, 2}}, {1, 2});
    EXPECT_TRUE(s.owns(1, 0));
    EXPECT_TRUE(s.owns(2, 3));
    EXPECT_TRUE(s.owns(1, 2));
    EXPECT_TRUE(s.free_index(1).contains(0));
    EXPECT_TRUE(s.free_index(2).contains(3));
}
