#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "seedgrow/error.hpp"
#include "seedgrow/weak_models.hpp"

using namespace seedgrow;
using sgtest::make_doc;

namespace {

WeakModel model(std::size_t id, Polarity p, std::vector<DocId> members) {
    return WeakModel{id, p, 1, std::move(members)};
}

} // namespace

TEST(Assemble, ConflictingVotesShareARow) {
    const std::vector<WeakModel> models = {model(0, Polarity::positive, {"d1", "d2"}),
                                           model(1, Polarity::negative, {"d2"})};
    const auto m = assemble(models, {"d1", "d2", "d3"});
    ASSERT_EQ(m.rows(), 2u);
    ASSERT_EQ(m.cols(), 2u);
    EXPECT_EQ(m.row_id(0), "d1");
    EXPECT_EQ(m.at(0, 0), 1);
    EXPECT_EQ(m.at(0, 1), 0);
    EXPECT_EQ(m.at(1, 0), 1);
    EXPECT_EQ(m.at(1, 1), -1);
    EXPECT_DOUBLE_EQ(density(m), 0.75);
    EXPECT_FALSE(m.row_of("d3").has_value());
}

TEST(Assemble, NoModelsGivesEmptyMatrix) {
    const auto m = assemble({}, {"a"});
    EXPECT_EQ(m.rows(), 0u);
    EXPECT_EQ(m.cols(), 0u);
    EXPECT_THROW(density(m), NumericError);
}

TEST(Assemble, DisjointModelsGiveOneVotePerRow) {
    const std::vector<WeakModel> models = {model(0, Polarity::positive, {"a", "b"}),
                                           model(1, Polarity::negative, {"c"}),
                                           model(2, Polarity::positive, {"d"})};
    const auto m = assemble(models, {"a", "b", "c", "d"});
    for (std::size_t r = 0; r < m.rows(); ++r) EXPECT_EQ(m.row(r).size(), 1u);
}

TEST(Assemble, EntrySignEqualsColumnPolarity) {
    const std::vector<WeakModel> models = {model(0, Polarity::negative, {"a", "b"}),
                                           model(1, Polarity::positive, {"b", "c"})};
    const auto m = assemble(models, {"a", "b", "c"});
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (const auto& e : m.row(r)) EXPECT_EQ(e.value, sign(models[e.col].polarity));
}

TEST(Assemble, MemberOutsidePoolIsAnError) {
    EXPECT_THROW(assemble(std::vector<WeakModel>{model(0, Polarity::positive, {"x"})}, {"a"}), ConfigError);
}

TEST(Density, Extremes) {
    LabelMatrix empty_rows(2);
    empty_rows.add_row("a", {});
    EXPECT_DOUBLE_EQ(density(empty_rows), 0.0);
    LabelMatrix full(2);
    full.add_row("a", {{0, 1}, {1, -1}});
    EXPECT_DOUBLE_EQ(density(full), 1.0);
}

TEST(LabelMatrix, RejectsBadRows) {
    LabelMatrix m(2);
    EXPECT_THROW(m.add_row("a", {{2, 1}}), ConfigError);
    EXPECT_THROW(m.add_row("a", {{0, 0}}), ConfigError);
    EXPECT_THROW(m.add_row("a", {{0, 1}, {0, -1}}), ConfigError);
    m.add_row("a", {{1, 1}});
    EXPECT_THROW(m.add_row("a", {{0, 1}}), ConfigError);
}

TEST(Triplets, RoundTrip) {
    const std::vector<WeakModel> models = {model(0, Polarity::positive, {"d1", "d2"}),
                                           model(1, Polarity::negative, {"d2"}),
                                           model(2, Polarity::negative, {})};
    const auto m = assemble(models, {"d1", "d2"});
    std::stringstream ss;
    write_triplets(ss, m);
    const auto back = read_triplets(ss, m.cols());
    EXPECT_EQ(back, m);
}

class WeakModelBuild : public ::testing::Test {
protected:
    void SetUp() override {
        // 80 pool docs mention "pen", 10 mention "cable".
        for (int i = 0; i < 80; ++i) corpus.add(make_doc("p" + std::to_string(100 + i), "pen ink " + std::to_string(i)), Split::pool);
        for (int i = 0; i < 10; ++i) corpus.add(make_doc("c" + std::to_string(100 + i), "cable plug " + std::to_string(i)), Split::pool);
        corpus.add(make_doc("s1", "pen nib"), Split::seed);
        corpus.add(make_doc("s2", "cable box"), Split::seed);
        index = InvertedIndex::build(corpus, corpus.partition(Split::pool));
    }
    Corpus corpus;
    InvertedIndex index;
};

TEST_F(WeakModelBuild, PairWithPolaritiesAndIds) {
    const Document* pos[] = {&corpus.at("s1")};
    const Document* neg[] = {&corpus.at("s2")};
    const auto [plus, minus] = make_weak_models(pos, neg, index, {}, 3, 4);
    EXPECT_EQ(plus.polarity, Polarity::positive);
    EXPECT_EQ(minus.polarity, Polarity::negative);
    EXPECT_EQ(plus.id, 4u);
    EXPECT_EQ(minus.id, 5u);
    EXPECT_EQ(plus.source_iteration, 3u);
    EXPECT_EQ(minus.member_ids.size(), 10u);
}

TEST_F(WeakModelBuild, TruncatesToTopK) {
    const Document* pos[] = {&corpus.at("s1")};
    const auto [plus, minus] = make_weak_models(pos, {}, index, {}, 1, 0);
    // 80 hits, 50 kept, and they are the 50 best by search order.
    ASSERT_EQ(plus.member_ids.size(), 50u);
    const auto full = search(build_mlt_query(pos, index), index, {}, 1000);
    ASSERT_EQ(full.size(), 80u);
    for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(plus.member_ids[i], full[i].id);
}

TEST_F(WeakModelBuild, EmptySideAbstainsEverywhere) {
    const Document* pos[] = {&corpus.at("s1")};
    const auto [plus, minus] = make_weak_models(pos, {}, index, {}, 1, 0);
    EXPECT_TRUE(minus.member_ids.empty());
    const std::vector<WeakModel> models = {plus, minus};
    const auto m = assemble(models, corpus.partition(Split::pool));
    EXPECT_EQ(m.cols(), 2u);
    for (std::size_t r = 0; r < m.rows(); ++r) EXPECT_EQ(m.at(r, 1), 0);
}

TEST_F(WeakModelBuild, LabeledDocsAreNeverMembers) {
    const Document* neg[] = {&corpus.at("s2")};
    const IdSet labeled = {"c100", "c101"};
    const auto [plus, minus] = make_weak_models({}, neg, index, labeled, 1, 0);
    for (const auto& id : minus.member_ids) EXPECT_FALSE(labeled.contains(id));
    EXPECT_EQ(minus.member_ids.size(), 8u);
}

TEST_F(WeakModelBuild, CustomTopK) {
    const Document* pos[] = {&corpus.at("s1")};
    WeakModelOptions opts;
    opts.top_k = 7;
    const auto [plus, minus] = make_weak_models(pos, {}, index, {}, 1, 0, opts);
    EXPECT_EQ(plus.member_ids.size(), 7u);
    EXPECT_THROW(make_weak_models(pos, {}, index, {}, 0, 0), ConfigError);
}
