#include <gtest/gtest.h>

#include <json.hpp>
#include <map>
#include <sstream>

#include "dynmatch/engine.hpp"
#include "dynmatch/metrics.hpp"
#include "dynmatch/workload.hpp"

using namespace dynmatch;

namespace {

struct Session {
    Engine engine;
    MetricsCollector metrics;

    explicit Session(const Config& config) : engine(config), metrics(config) { engine.set_observer(&metrics); }
    Session(const Session&) = delete;

    void play(const UpdateSequence& seq) {
        for (const auto& op : seq.ops) {
            engine.apply(op);
            ASSERT_EQ(metrics.live_epochs(), engine.state().matching_size());
        }
    }
};

EpochRecord terminated_random(std::size_t init, std::size_t deletions) {
    EpochRecord rec;
    rec.id = 0;
    rec.cls = EpochClass::random;
    rec.owner_init_size = init;
    rec.deletions_from_init = deletions;
    rec.terminated = 5;
    return rec;
}

/// Totals from the csv header lines, excluding timing.
std::map<std::string, std::string> csv_totals(const std::string& csv) {
    std::map<std::string, std::string> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.starts_with("# ")) continue;
        const auto eq = line.find('=');
        out[line.substr(2, eq - 2)] = line.substr(eq + 1);
    }
    return out;
}

}  // namespace

// --- epoch events -------------------------------------------------------------

TEST(Epochs, FirstInsertOpensLevelZeroEpoch) {
    Session r(Config(4));
    r.engine.insert_edge(0, 1);
    ASSERT_EQ(r.metrics.epochs().size(), 1u);
    const auto& e = r.metrics.epochs()[0];
    EXPECT_EQ(e.level, Level::zero);
    EXPECT_TRUE(e.live());
    EXPECT_EQ(e.created, 0u);
    EXPECT_EQ(r.metrics.live_epoch(1, 0), std::optional<std::size_t>(0));
}

TEST(Epochs, FixExchangeClosesOneOpensTwo) {
    Session r(Config(8));
    r.engine.insert_edge(1, 2);
    r.engine.insert_edge(0, 1);
    ASSERT_EQ(r.metrics.epochs().size(), 1u);
    r.engine.insert_edge(2, 3);
    const auto& epochs = r.metrics.epochs();
    ASSERT_EQ(epochs.size(), 3u);
    EXPECT_EQ(epochs[0].terminated, std::optional<std::uint64_t>(2));
    EXPECT_EQ(epochs[1].created, 2u);
    EXPECT_EQ(epochs[2].created, 2u);
    EXPECT_EQ(epochs[1].creator, Procedure::fix_3_aug_path);
    EXPECT_EQ(r.metrics.live_epochs(), 2u);
}

TEST(Epochs, DeletingMatchedEdgeClosesItsEpoch) {
    Session r(Config(4));
    r.engine.insert_edge(0, 1);
    r.engine.insert_edge(2, 3);
    r.engine.delete_edge(0, 1);
    EXPECT_EQ(r.metrics.epochs()[0].terminated, std::optional<std::uint64_t>(2));
    EXPECT_TRUE(r.metrics.epochs()[1].live());
}

TEST(Epochs, RandomEpochRecordsOwnerList) {
    // Threshold 1: the first edge fills its owner's list, so the level-0
    // match is replaced by a random one within the same update.
    Session r(Config(4, 1, 3));
    r.engine.insert_edge(0, 1);
    ASSERT_EQ(r.metrics.epochs().size(), 2u);
    EXPECT_EQ(r.metrics.epochs()[0].terminated, std::optional<std::uint64_t>(0));
    const auto& e = r.metrics.epochs()[1];
    EXPECT_EQ(e.cls, EpochClass::random);
    EXPECT_EQ(e.level, Level::one);
    EXPECT_EQ(e.owner_init_size, 1u);
    ASSERT_TRUE(e.set_id.has_value());
    EXPECT_EQ(r.metrics.epoch_sets().at(*e.set_id).representative, e.id);
}

TEST(Epochs, InitDeletionsCounted) {
    // Threshold 1: deleting the matched edge counts one init deletion.
    Session r(Config(4, 1, 3));
    r.engine.insert_edge(0, 1);
    r.engine.delete_edge(0, 1);
    const auto& e = r.metrics.epochs().at(1);
    EXPECT_EQ(e.deletions_from_init, 1u);
    EXPECT_TRUE(e.ended_by_deletion);
    EXPECT_FALSE(r.metrics.epochs()[0].ended_by_deletion);
    const auto& set = r.metrics.epoch_sets().at(*e.set_id);
    ASSERT_TRUE(set.cls.has_value());
    EXPECT_EQ(*set.cls, EpochSetClass::good);
}

TEST(Epochs, UnmatchWithoutEpochRejected) {
    MetricsCollector m(Config(4));
    EXPECT_THROW(m.unmatched(0, 1, Level::zero), std::logic_error);
}

// --- classification -----------------------------------------------------------

TEST(ClassifyEpochSet, ThirdOfInitList) {
    EpochSetRecord set{0, 0, {0}, std::nullopt};
    EXPECT_EQ(classify_epoch_set(set, terminated_random(9, 2)), EpochSetClass::bad);
    EXPECT_EQ(classify_epoch_set(set, terminated_random(9, 3)), EpochSetClass::good);
    EXPECT_EQ(classify_epoch_set(set, terminated_random(9, 9)), EpochSetClass::good);
    EXPECT_EQ(classify_epoch_set(set, terminated_random(10, 3)), EpochSetClass::bad);
    EXPECT_EQ(classify_epoch_set(set, terminated_random(10, 4)), EpochSetClass::good);
}

TEST(ClassifyEpochSet, LiveRepresentativeRejected) {
    EpochSetRecord set{0, 0, {0}, std::nullopt};
    auto rec = terminated_random(9, 3);
    rec.terminated.reset();
    EXPECT_THROW(classify_epoch_set(set, rec), std::logic_error);
}

// --- properties over runs -----------------------------------------------------

TEST(MetricsProperties, ConservationAndEpochSetBounds) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto seq = extend_with_teardown(gen_random(32, 1500, 0.6, seed));
        Session r(Config(32, 0, seed));
        r.play(seq);
        const auto s = r.metrics.stats();
        EXPECT_EQ(s.conservation_violations, 0u);
        EXPECT_EQ(s.unpreceded_deterministic, 0u);
        EXPECT_LE(s.max_set_members, 63u);
        EXPECT_TRUE(s.good_sets_within_bound());
        EXPECT_EQ(s.epochs_opened, s.epochs_closed);
        EXPECT_EQ(s.epoch_sets, s.epoch_sets_terminated);
        EXPECT_EQ(s.good_sets + s.bad_sets, s.epoch_sets);
        EXPECT_EQ(s.epochs_level0 + s.epochs_level1_random + s.epochs_level1_deterministic, s.epochs_opened);
        EXPECT_LE(s.max_calls, 30u);
        for (const auto& e : r.metrics.epochs()) {
            ASSERT_LE(e.created, *e.terminated);
            if (e.cls == EpochClass::random) {
                ASSERT_GE(e.owner_init_size, s.threshold);
            }
        }
    }
}

TEST(MetricsProperties, RandomEpochsMeetThreshold) {
    const auto seq = gen_named("star-churn", 25, 6, 60);
    Session r(Config(25, 0, 6));
    r.play(seq);
    std::size_t random = 0;
    for (const auto& e : r.metrics.epochs())
        if (e.cls == EpochClass::random) {
            ++random;
            EXPECT_GE(e.owner_init_size, 5u);
        }
    EXPECT_GT(random, 0u);
}

// --- export -------------------------------------------------------------------

TEST(Export, EmptyRun) {
    MetricsCollector m(Config(5, 0, 11));
    const auto s = m.stats();
    const auto doc = nlohmann::json::parse(to_json(s));
    EXPECT_EQ(doc["schema"], "dynmatch.metrics/1");
    EXPECT_EQ(doc["seed"], 11);
    EXPECT_EQ(doc["config"]["n"], 5);
    EXPECT_EQ(doc["config"]["threshold"], 3);
    EXPECT_EQ(doc["totals"]["updates"], 0);
    EXPECT_TRUE(doc["updates"].empty());
    const auto csv = to_csv(s);
    EXPECT_TRUE(csv.ends_with("index,op,u,v,calls,matching_size,edge_count\n"));
}

TEST(Export, CsvHasOneRowPerUpdate) {
    const auto seq = gen_random(12, 37, 0.6, 2);
    Session r(Config(12, 0, 2));
    r.play(seq);
    const auto csv = to_csv(r.metrics.stats());
    std::istringstream in(csv);
    std::string line;
    std::size_t rows = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.starts_with("#")) continue;
        if (!header) {
            header = true;
            continue;
        }
        ++rows;
    }
    EXPECT_EQ(rows, 37u);
}

TEST(Export, JsonAndCsvAgreeOnTotals) {
    const auto seq = extend_with_teardown(gen_random(20, 400, 0.6, 8));
    Session r(Config(20, 2, 8));
    r.play(seq);
    const auto s = r.metrics.stats();
    const auto doc = nlohmann::json::parse(export_metrics(s, MetricsFormat::json));
    const auto csv = csv_totals(export_metrics(s, MetricsFormat::csv));
    std::size_t compared = 0;
    for (const auto& [key, value] : doc["totals"].items()) {
        ASSERT_TRUE(csv.contains(key)) << key;
        EXPECT_EQ(csv.at(key), value.dump()) << key;
        ++compared;
    }
    for (const auto& [key, value] : doc["procedures"].items()) {
        EXPECT_EQ(csv.at("procedure." + key), value.dump()) << key;
        ++compared;
    }
    EXPECT_EQ(csv.at("seed"), doc["seed"].dump());
    EXPECT_EQ(csv.at("n"), doc["config"]["n"].dump());
    EXPECT_EQ(csv.at("threshold"), doc["config"]["threshold"].dump());
    EXPECT_EQ(compared, 20u + kProcedureCount);
    EXPECT_EQ(doc["totals"]["final_edge_count"], 0);
    EXPECT_EQ(doc["updates"].size(), seq.ops.size());
    EXPECT_EQ(doc["timing"]["per_update_ns"].size(), seq.ops.size());
}
