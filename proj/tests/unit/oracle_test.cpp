#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "seedgrow/error.hpp"
#include "seedgrow/oracle.hpp"

using namespace seedgrow;
using namespace sgtest;
using namespace std::chrono_literals;

namespace {

OracleRequest request_for(const Corpus& c, std::string cls, std::vector<std::string> ids,
                          std::size_t iteration = 1) {
    OracleRequest r;
    r.session = "s";
    r.class_name = std::move(cls);
    r.iteration = iteration;
    for (const auto& id : ids) r.batch.push_back(&c.at(id));
    return r;
}

Corpus small_corpus() {
    Corpus c;
    c.add(make_doc("a", "apple pie", "fruit"), Split::pool);
    c.add(make_doc("b", "sea wave", "sea"), Split::pool);
    c.add(make_doc("c", "cherry", "fruit"), Split::pool);
    return c;
}

} // namespace

TEST(VerdictNames, RoundTrip) {
    EXPECT_EQ(to_string(Verdict::positive), "pos");
    EXPECT_EQ(to_string(Verdict::negative), "neg");
    EXPECT_EQ(parse_verdict("pos"), Verdict::positive);
    EXPECT_EQ(parse_verdict("neg"), Verdict::negative);
    EXPECT_FALSE(parse_verdict("maybe").has_value());
}

TEST(SimulatedOracle, PositiveIffGoldMatchesClass) {
    const auto c = small_corpus();
    SimulatedOracle o(c);
    const auto v = o.judge(request_for(c, "fruit", {"a", "b", "c"}));
    EXPECT_EQ(v.assignments.at("a"), Verdict::positive);
    EXPECT_EQ(v.assignments.at("b"), Verdict::negative);
    EXPECT_EQ(v.assignments.at("c"), Verdict::positive);
    EXPECT_EQ(v.positives(), 2u);
    EXPECT_EQ(o.judge(request_for(c, "sea", {"a"})).positives(), 0u);
}

TEST(SimulatedOracle, UnlabeledPoolDocIsAConfigError) {
    auto c = small_corpus();
    c.add(make_doc("x", "mystery"), Split::pool);
    EXPECT_THROW(SimulatedOracle{c}, ConfigError);
    IdSet scope = {"a", "b"};
    EXPECT_NO_THROW(SimulatedOracle(c, scope));
}

TEST(VerdictLog, JsonlRoundTrip) {
    const std::vector<VerdictRecord> recs = {
        {"s1", "fruit", 1, "a", Verdict::positive},
        {"s1", "fruit", 2, "b", Verdict::negative},
    };
    std::stringstream ss;
    write_verdict_log(ss, recs);
    EXPECT_EQ(read_verdict_log(ss), recs);
    EXPECT_EQ(to_jsonl(recs[0]),
              R"({"class":"fruit","doc_id":"a","iteration":1,"session":"s1","verdict":"pos"})");
}

TEST(VerdictLog, BadLineIsNamed) {
    std::stringstream ss(std::string(R"({"class":"x","iteration":1,"doc_id":"a","verdict":"pos"})") +
                         "\n{not json\n");
    try {
        read_verdict_log(ss);
        FAIL() << "expected IngestError";
    } catch (const IngestError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    std::stringstream bad(R"({"class":"x","iteration":1,"doc_id":"a","verdict":"yes"})");
    EXPECT_THROW(read_verdict_log(bad), IngestError);
}

TEST(ScriptedOracle, ReplaysInOrderPerClass) {
    const auto c = small_corpus();
    ScriptedOracle o({
        {"s", "fruit", 1, "a", Verdict::positive},
        {"s", "sea", 1, "b", Verdict::positive},
        {"s", "fruit", 1, "c", Verdict::negative},
        {"s", "fruit", 2, "b", Verdict::negative},
    });
    EXPECT_EQ(o.remaining("fruit"), 3u);
    const auto v = o.judge(request_for(c, "fruit", {"a", "c"}));
    EXPECT_EQ(v.assignments.at("a"), Verdict::positive);
    EXPECT_EQ(v.assignments.at("c"), Verdict::negative);
    EXPECT_EQ(o.judge(request_for(c, "sea", {"b"})).positives(), 1u);
    EXPECT_EQ(o.judge(request_for(c, "fruit", {"b"}, 2)).positives(), 0u);
    EXPECT_EQ(o.remaining("fruit"), 0u);
    EXPECT_EQ(o.remaining("nothing"), 0u);
}

TEST(ScriptedOracle, DivergenceNamesIteration) {
    const auto c = small_corpus();
    ScriptedOracle o({{"s", "fruit", 1, "a", Verdict::positive}, {"s", "fruit", 2, "c", Verdict::positive}});
    o.judge(request_for(c, "fruit", {"a"}));
    try {
        o.judge(request_for(c, "fruit", {"b"}, 2));
        FAIL() << "expected divergence";
    } catch (const ReplayDivergence& e) {
        EXPECT_EQ(e.iteration(), 2u);
    }
    // The failed request consumed nothing.
    EXPECT_EQ(o.remaining("fruit"), 1u);
    EXPECT_THROW(o.judge(request_for(c, "fruit", {"c"}, 3)), ReplayDivergence);
    EXPECT_THROW(o.judge(request_for(c, "fruit", {"c", "a"}, 2)), ReplayDivergence);
    EXPECT_THROW(o.judge(request_for(c, "sea", {"b"})), ReplayDivergence);
}

TEST(RecordingOracle, LogsWhatTheInnerOracleSaid) {
    const auto c = small_corpus();
    SimulatedOracle inner(c);
    RecordingOracle rec(inner, "s9");
    rec.judge(request_for(c, "fruit", {"b", "a"}, 1));
    rec.judge(request_for(c, "sea", {"c"}, 1));
    rec.judge(request_for(c, "fruit", {"c"}, 2));
    const auto fruit = rec.records("fruit");
    ASSERT_EQ(fruit.size(), 3u);
    EXPECT_EQ(fruit[0], (VerdictRecord{"s9", "fruit", 1, "b", Verdict::negative}));
    EXPECT_EQ(fruit[1], (VerdictRecord{"s9", "fruit", 1, "a", Verdict::positive}));
    EXPECT_EQ(fruit[2], (VerdictRecord{"s9", "fruit", 2, "c", Verdict::positive}));
    EXPECT_EQ(rec.records(std::vector<std::string>{"sea", "fruit"}).size(), 4u);

    // A recorded log replays to the same verdicts.
    ScriptedOracle replay(fruit);
    EXPECT_EQ(replay.judge(request_for(c, "fruit", {"b", "a"}, 1)),
              inner.judge(request_for(c, "fruit", {"b", "a"}, 1)));
}

TEST(InteractiveOracle, SubmitUnblocksJudge) {
    const auto c = small_corpus();
    InteractiveOracle o(5s);
    EXPECT_FALSE(o.pending().has_value());
    EXPECT_THROW(o.submit({}), OracleError);
    BatchVerdict got;
    std::thread t([&] { got = o.judge(request_for(c, "fruit", {"a", "b"})); });
    while (!o.pending()) std::this_thread::sleep_for(1ms);
    EXPECT_EQ(*o.pending(), (std::vector<DocId>{"a", "b"}));
    BatchVerdict partial;
    partial.assignments["a"] = Verdict::positive;
    EXPECT_THROW(o.submit(partial), OracleError);
    BatchVerdict wrong = partial;
    wrong.assignments["c"] = Verdict::negative;
    EXPECT_THROW(o.submit(wrong), OracleError);
    BatchVerdict full = partial;
    full.assignments["b"] = Verdict::negative;
    o.submit(full);
    t.join();
    EXPECT_EQ(got, full);
    EXPECT_FALSE(o.pending().has_value());
}

TEST(InteractiveOracle, TimesOut) {
    const auto c = small_corpus();
    InteractiveOracle o(20ms);
    EXPECT_THROW(o.judge(request_for(c, "fruit", {"a"})), OracleTimeout);
    EXPECT_FALSE(o.pending().has_value());
}
