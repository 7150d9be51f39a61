#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bm25_oracle.hpp"
#include "fixtures.hpp"
#include "seedgrow/index.hpp"

using namespace seedgrow;
using sgtest::BruteDoc;
using sgtest::make_doc;

namespace {

Corpus toy(const std::vector<std::pair<std::string, std::string>>& docs) {
    Corpus c;
    for (const auto& [id, text] : docs) c.add(make_doc(id, text), Split::pool);
    return c;
}

IdSet all_ids(const Corpus& c) { return c.partition(Split::pool); }

std::vector<BruteDoc> brute_docs(const Corpus& c) {
    std::vector<BruteDoc> out;
    for (const auto& id : c.partition(Split::pool)) out.push_back({id, c.at(id).tokens});
    return out;
}

MltQuery terms_query(std::vector<std::string> terms) {
    MltQuery q;
    for (auto& t : terms) q.terms.push_back({std::move(t), 1.0});
    return q;
}

} // namespace

TEST(IndexBuild, CountsDocFreqAndAverageLength) {
    const auto c = toy({{"1", "a b"}, {"2", "b c"}, {"3", "c"}});
    const auto idx = InvertedIndex::build(c, all_ids(c));
    EXPECT_EQ(idx.doc_count(), 3u);
    EXPECT_EQ(idx.doc_freq("a"), 1u);
    EXPECT_EQ(idx.doc_freq("b"), 2u);
    EXPECT_EQ(idx.doc_freq("c"), 2u);
    EXPECT_EQ(idx.doc_freq("zzz"), 0u);
    EXPECT_DOUBLE_EQ(idx.avg_doc_length(), 5.0 / 3.0);
}

TEST(IndexBuild, PostingsSortedByDocIdAndMatchDocFreq) {
    const auto c = toy({{"b", "x y x"}, {"a", "x"}, {"c", "y"}});
    const auto idx = InvertedIndex::build(c, all_ids(c));
    const auto px = idx.postings("x");
    ASSERT_EQ(px.size(), 2u);
    EXPECT_EQ(idx.doc_id(px[0].doc), "a");
    EXPECT_EQ(idx.doc_id(px[1].doc), "b");
    EXPECT_EQ(px[1].tf, 2u);
    EXPECT_EQ(px.size(), idx.doc_freq("x"));
}

TEST(IndexBuild, EmptyScope) {
    const auto c = toy({{"1", "a"}});
    const auto idx = InvertedIndex::build(c, {});
    EXPECT_EQ(idx.doc_count(), 0u);
    EXPECT_TRUE(search(terms_query({"a"}), idx, {}, 10).empty());
}

TEST(IndexBuild, ScopeLimitsCoverage) {
    const auto c = toy({{"1", "a"}, {"2", "a b"}});
    const auto idx = InvertedIndex::build(c, {"2"});
    EXPECT_EQ(idx.doc_count(), 1u);
    EXPECT_FALSE(idx.ordinal_of("1").has_value());
}

TEST(IndexBuild, RebuildIsIdenticalAndSnapshotRoundTrips) {
    const auto c = toy({{"1", "the quick fox"}, {"2", "the lazy dog"}, {"3", "quick quick dog"}});
    const auto a = InvertedIndex::build(c, all_ids(c));
    const auto b = InvertedIndex::build(c, all_ids(c));
    EXPECT_EQ(a, b);
    EXPECT_EQ(InvertedIndex::from_json(a.to_json()), a);
}

TEST(Bm25, IdfIsLuceneFormAndNonIncreasing) {
    EXPECT_NEAR(bm25_idf(100, 2), std::log(1.0 + 98.5 / 2.5), 1e-12);
    for (std::size_t df = 1; df < 100; ++df) EXPECT_GE(bm25_idf(100, df), bm25_idf(100, df + 1));
    EXPECT_GT(bm25_idf(10, 10), 0.0);
}

TEST(Search, MissingTermGivesEmptyList) {
    const auto c = toy({{"1", "a b"}, {"2", "c"}});
    const auto idx = InvertedIndex::build(c, all_ids(c));
    EXPECT_TRUE(search(terms_query({"zzz"}), idx, {}, 10).empty());
}

TEST(Search, ExcludingAllMatchesGivesEmptyList) {
    const auto c = toy({{"1", "router x"}, {"2", "router y"}, {"3", "z"}});
    const auto idx = InvertedIndex::build(c, all_ids(c));
    EXPECT_TRUE(search(terms_query({"router"}), idx, {"1", "2"}, 10).empty());
}

TEST(Search, RouterToyMatchesBruteForce) {
    const auto c = toy({{"1", "wifi router keeps dropping"},
                        {"2", "router router firmware update"},
                        {"3", "my tablet pen broke"},
                        {"4", "the router"},
                        {"5", "replacement pen nib for the tablet and a long cable for my router"}});
    const auto idx = InvertedIndex::build(c, all_ids(c));
    const auto got = search(terms_query({"router"}), idx, {}, 10);
    const auto want = sgtest::brute_force_bm25(brute_docs(c), {"router"}, {}, 10);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].id, want[i].id);
        EXPECT_NEAR(got[i].score, want[i].score, 1e-9);
    }
    // Shorter doc with the same tf ranks above the long one.
    EXPECT_EQ(got[0].id, "2");
    EXPECT_EQ(got.entries.back().id, "5");
}

TEST(Search, TiesBreakByDocId) {
    const auto c = toy({{"b", "same words"}, {"a", "same words!"}, {"c", "same words?"}});
    const auto idx = InvertedIndex::build(c, all_ids(c));
    const auto r = search(terms_query({"same"}), idx, {}, 10);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r.ids(), (std::vector<DocId>{"a", "b", "c"}));
}

TEST(Search, RandomCorporaMatchBruteForce) {
    std::mt19937 rng(11);
    for (int round = 0; round < 20; ++round) {
        Corpus c;
        const std::size_t n = 5 + rng() % 120;
        for (std::size_t i = 0; i < n; ++i) {
            std::string text;
            const std::size_t len = 1 + rng() % 12;
            for (std::size_t k = 0; k < len; ++k) text += "w" + std::to_string(rng() % 30) + " ";
            text += "u" + std::to_string(i);
            c.add(make_doc("doc" + std::to_string(rng() % 100000) + "_" + std::to_string(i), text), Split::pool);
        }
        const auto idx = InvertedIndex::build(c, all_ids(c));
        std::vector<std::string> terms;
        for (int k = 0; k < 1 + static_cast<int>(rng() % 5); ++k) terms.push_back("w" + std::to_string(rng() % 35));
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
        IdSet exclude;
        for (const auto& id : all_ids(c))
            if (rng() % 7 == 0) exclude.insert(id);
        const std::size_t limit = rng() % 40;
        const auto got = search(terms_query(terms), idx, exclude, limit);
        const auto want = sgtest::brute_force_bm25(brute_docs(c), terms, {exclude.begin(), exclude.end()}, limit);
        ASSERT_EQ(got.size(), want.size()) << "round " << round;
        for (std::size_t i = 0; i < got.size(); ++i) {
            ASSERT_EQ(got[i].id, want[i].id) << "round " << round << " rank " << i;
            ASSERT_NEAR(got[i].score, want[i].score, 1e-9);
        }
    }
}

TEST(Search, LimitGivesPrefix) {
    const auto syn = toy({{"1", "a b"}, {"2", "a"}, {"3", "a c c"}, {"4", "b"}, {"5", "a b c"}});
    const auto idx = InvertedIndex::build(syn, all_ids(syn));
    const auto q = terms_query({"a", "b", "c"});
    for (std::size_t k = 0; k < 5; ++k) {
        const auto shorter = search(q, idx, {}, k);
        const auto longer = search(q, idx, {}, k + 1);
        ASSERT_LE(shorter.size(), longer.size());
        for (std::size_t i = 0; i < shorter.size(); ++i) EXPECT_EQ(shorter[i], longer[i]);
    }
    EXPECT_TRUE(search(q, idx, {}, 0).empty());
}

TEST(Mlt, RareTermOutweighsCommonTerm) {
    Corpus c;
    for (int i = 0; i < 100; ++i) {
        std::string text = "filler" + std::to_string(i);
        if (i < 90) text += " the";
        if (i < 2) text += " tablet";
        c.add(make_doc("p" + std::to_string(i), text), Split::pool);
    }
    c.add(make_doc("like", "tablet the tablet the tablet the"), Split::seed);
    const auto idx = InvertedIndex::build(c, c.partition(Split::pool));
    ASSERT_EQ(idx.doc_freq("tablet"), 2u);
    ASSERT_EQ(idx.doc_freq("the"), 90u);
    const Document* like[] = {&c.at("like")};
    const auto q = build_mlt_query(like, idx);
    ASSERT_EQ(q.terms.size(), 2u);
    EXPECT_EQ(q.terms[0].term, "tablet");
    EXPECT_GT(q.terms[0].weight, q.terms[1].weight);

    MltConfig one;
    one.max_query_terms = 1;
    const auto q1 = build_mlt_query(like, idx, one);
    ASSERT_EQ(q1.terms.size(), 1u);
    EXPECT_EQ(q1.terms[0].term, "tablet");
}

TEST(Mlt, TermsBelowMinDocFreqGiveEmptyQuery) {
    const auto c = toy({{"1", "a b"}, {"2", "b c"}});
    Corpus with_like = c;
    with_like.add(make_doc("like", "a zzz"), Split::seed);
    const auto idx = InvertedIndex::build(with_like, with_like.partition(Split::pool));
    MltConfig cfg;
    cfg.min_doc_freq = 2;
    const Document* like[] = {&with_like.at("like")};
    const auto q = build_mlt_query(like, idx, cfg);
    EXPECT_TRUE(q.empty());
    EXPECT_TRUE(search(q, idx, {}, 10).empty());
}

TEST(Mlt, MatchesBruteForceSelection) {
    std::mt19937 rng(5);
    for (int round = 0; round < 10; ++round) {
        Corpus c;
        for (int i = 0; i < 80; ++i) {
            std::string text;
            for (int k = 0; k < 8; ++k) text += "t" + std::to_string(rng() % 50) + " ";
            c.add(make_doc("d" + std::to_string(i), text + "#" + std::to_string(i)), i < 5 ? Split::seed : Split::pool);
        }
        const auto idx = InvertedIndex::build(c, c.partition(Split::pool));
        std::vector<const Document*> like;
        std::vector<std::vector<std::string>> like_tokens;
        for (const auto& id : c.partition(Split::seed)) {
            like.push_back(&c.at(id));
            like_tokens.push_back(c.at(id).tokens);
        }
        MltConfig cfg;
        cfg.max_query_terms = 10;
        cfg.min_term_freq = 1 + round % 2;
        const auto q = build_mlt_query(like, idx, cfg);
        const auto want = sgtest::brute_force_mlt(brute_docs(c), like_tokens, 10, cfg.min_term_freq, 1);
        ASSERT_EQ(q.terms.size(), want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            EXPECT_EQ(q.terms[i].term, want[i].first);
            EXPECT_NEAR(q.terms[i].weight, want[i].second, 1e-9);
        }
    }
}
