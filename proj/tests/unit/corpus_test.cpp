#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "seedgrow/corpus.hpp"
#include "seedgrow/error.hpp"

using namespace seedgrow;
using sgtest::make_doc;

namespace {

Corpus ingest_str(const std::string& s, CorpusFormat f = CorpusFormat::jsonl) {
    std::istringstream in(s);
    return ingest(in, {f, tokenize});
}

} // namespace

TEST(Ingest, NormalizesTextAndKeepsLabel) {
    const auto c = ingest_str(R"({"text": "My tablet  pen\t broke", "label": "graphics_tablet"})" "\n");
    ASSERT_EQ(c.size(), 1u);
    const auto& d = c.documents()[0];
    EXPECT_EQ(d.text, "My tablet pen broke");
    EXPECT_EQ(d.gold_class, "graphics_tablet");
    EXPECT_EQ(d.tokens, tokenize(d.text));
}

TEST(Ingest, DropsDuplicateNormalizedText) {
    const auto c = ingest_str("{\"text\": \"a  b\"}\n{\"text\": \"a b\"}\n{\"text\": \"c\"}\n");
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c.documents()[0].text, "a b");
}

TEST(Ingest, EmptyStream) { EXPECT_TRUE(ingest_str("").empty()); }

TEST(Ingest, AssignsSequentialIdsWhenMissing) {
    const auto c = ingest_str("{\"text\": \"x\"}\n{\"text\": \"y\"}\n");
    EXPECT_TRUE(c.contains("1"));
    EXPECT_TRUE(c.contains("2"));
}

TEST(Ingest, MalformedRecordNamesLine) {
    try {
        ingest_str("{\"text\": \"ok\"}\n\n{\"text\": oops}\n");
        FAIL() << "expected IngestError";
    } catch (const IngestError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Ingest, MissingTextIsAnError) {
    EXPECT_THROW(ingest_str("{\"label\": \"a\"}\n"), IngestError);
}

TEST(Ingest, DuplicateExplicitIdIsAnError) {
    try {
        ingest_str("{\"id\": \"a\", \"text\": \"x\"}\n{\"id\": \"a\", \"text\": \"y\"}\n");
        FAIL() << "expected IngestError";
    } catch (const IngestError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Ingest, ReadsSplits) {
    const auto c = ingest_str(
        "{\"id\":\"s\",\"text\":\"a\",\"split\":\"seed\"}\n"
        "{\"id\":\"p\",\"text\":\"b\",\"split\":\"pool\"}\n"
        "{\"id\":\"t\",\"text\":\"c\",\"split\":\"test\"}\n"
        "{\"id\":\"u\",\"text\":\"d\"}\n");
    EXPECT_EQ(c.split_of("s"), Split::seed);
    EXPECT_EQ(c.split_of("p"), Split::pool);
    EXPECT_EQ(c.split_of("t"), Split::test);
    EXPECT_FALSE(c.split_of("u").has_value());
    EXPECT_THROW(ingest_str("{\"text\":\"a\",\"split\":\"train\"}\n"), IngestError);
}

TEST(Ingest, Csv) {
    const auto c = ingest_str("id,text,label,split\n"
                              "a,\"hello, world\",greet,pool\n"
                              "b,\"multi\nline \"\"quoted\"\"\",,seed\n",
                              CorpusFormat::csv);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c.at("a").text, "hello, world");
    EXPECT_EQ(c.at("a").gold_class, "greet");
    EXPECT_EQ(c.at("b").text, "multi line \"quoted\"");
    EXPECT_FALSE(c.at("b").gold_class.has_value());
    EXPECT_EQ(c.split_of("b"), Split::seed);
}

TEST(Ingest, CsvFieldCountMismatchNamesLine) {
    try {
        ingest_str("id,text\na,x\nb,y,z\n", CorpusFormat::csv);
        FAIL();
    } catch (const IngestError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Ingest, RoundTripIsIdempotent) {
    for (const auto fmt : {CorpusFormat::jsonl, CorpusFormat::csv}) {
        const auto c = ingest_str(
            "{\"id\":\"a\",\"text\":\"One, two\",\"label\":\"x\",\"split\":\"pool\"}\n"
            "{\"id\":\"b\",\"text\":\"say \\\"hi\\\"\",\"split\":\"seed\"}\n"
            "{\"id\":\"c\",\"text\":\"café\"}\n");
        std::ostringstream out;
        write_corpus(out, c, fmt);
        const auto again = ingest_str(out.str(), fmt);
        EXPECT_EQ(again, c) << (fmt == CorpusFormat::csv ? "csv" : "jsonl");
    }
}

TEST(Corpus, PartitionsStayDisjoint) {
    Corpus c;
    c.add(make_doc("a", "x"), Split::pool);
    c.assign("a", Split::seed);
    EXPECT_TRUE(c.partition(Split::seed).contains("a"));
    EXPECT_FALSE(c.partition(Split::pool).contains("a"));
    EXPECT_THROW(c.add(make_doc("a", "y")), ConfigError);
    EXPECT_THROW(c.at("zzz"), ConfigError);
}

TEST(Corpus, GoldClassQueries) {
    Corpus c;
    c.add(make_doc("a", "x", "k1"), Split::pool);
    c.add(make_doc("b", "y", "k2"), Split::pool);
    c.add(make_doc("c", "z", "k1"), Split::test);
    EXPECT_EQ(c.gold_classes(), (std::vector<std::string>{"k1", "k2"}));
    EXPECT_EQ(c.ids_with_class(c.partition(Split::pool), "k1"), (IdSet{"a"}));
}

TEST(ClassTaskValidation, SeedsMustBeSeedPartitionAndAgreeWithGold) {
    Corpus c;
    c.add(make_doc("s1", "x", "k"), Split::seed);
    c.add(make_doc("s2", "y", "other"), Split::seed);
    c.add(make_doc("p", "z", "k"), Split::pool);
    EXPECT_NO_THROW(validate_task({"k", {"s1"}}, c));
    EXPECT_THROW(validate_task({"k", {}}, c), ConfigError);
    EXPECT_THROW(validate_task({"k", {"p"}}, c), ConfigError);
    EXPECT_THROW(validate_task({"k", {"s2"}}, c), ConfigError);
    EXPECT_THROW(validate_task({"k", {"missing"}}, c), ConfigError);
}
