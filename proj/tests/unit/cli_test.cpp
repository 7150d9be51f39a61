#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"

using namespace sgtest;
namespace fs = std::filesystem;

#ifdef SEEDGROW_CLI

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override { dir_ = temp_dir(std::string("cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name()); }
    void TearDown() override { fs::remove_all(dir_); }

    Result run(const std::string& args, const std::string& env = "") {
        const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
        const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" SEEDGROW_CLI "' " + args + " >'" +
                                out.string() + "' 2>'" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        Result r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    fs::path synth() {
        const auto corpus = dir_ / "corpus.jsonl";
        const auto r = run("synth -o " + corpus.string() + " --classes 3 --max-size 120 --min-size 30 --seeds-per-class 4 --seed 2");
        EXPECT_EQ(r.code, 0) << r.err;
        return corpus;
    }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, NoArgumentsIsAUsageError) { EXPECT_EQ(run("").code, 2); }

TEST_F(Cli, UnknownFlagIsAUsageError) { EXPECT_EQ(run("bench --frobnicate").code, 2); }

TEST_F(Cli, MissingCorpusNamesThePath) {
    const auto r = run("bench --corpus /no/such/corpus.jsonl");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("/no/such/corpus.jsonl"), std::string::npos) << r.err;
}

TEST_F(Cli, BadConfigIsAUsageError) {
    const auto corpus = synth();
    EXPECT_EQ(run("bench --corpus " + corpus.string() + " -b 0").code, 2);
    EXPECT_EQ(run("bench --corpus " + corpus.string() + " --strategies best").code, 2);
}

TEST_F(Cli, IngestNormalizesToStdout) {
    std::ofstream(dir_ / "in.jsonl") << "{\"text\": \"  Hello   world \", \"label\": \"x\"}\n{\"text\": \"Hello world\"}\n";
    const auto r = run("ingest in.jsonl");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\"text\":\"Hello world\""), std::string::npos) << r.out;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
    std::ofstream(dir_ / "bad.jsonl") << "{\"text\": \"ok\"}\n{nope\n";
    const auto bad = run("ingest bad.jsonl");
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("line 2"), std::string::npos) << bad.err;
}

TEST_F(Cli, BenchIsDeterministicAndReplayable) {
    const auto corpus = synth();
    const auto a = run("bench --corpus " + corpus.string() + " --strategies i-dp --seed 7 -f 2 -o run_a");
    ASSERT_EQ(a.code, 0) << a.err;
    const auto b = run("bench --corpus " + corpus.string() + " --strategies i-dp --seed 7 -f 2 -o run_b");
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "row,size,accuracy,conflicts");
    for (const auto* f : {"i-dp/trace.jsonl", "i-dp/training_set.jsonl", "i-dp/weak_models.jsonl", "i-dp/verdicts.jsonl",
                          "report/summary.csv", "report/report.json"})
        EXPECT_EQ(slurp(dir_ / "run_a" / f), slurp(dir_ / "run_b" / f)) << f;
    EXPECT_FALSE(fs::exists(dir_ / "run_a" / "random"));

    const auto replay = run("replay run_a");
    EXPECT_EQ(replay.code, 0) << replay.err;
    EXPECT_NE(replay.out.find("i-dp: identical"), std::string::npos) << replay.out;

    const auto report = run("report run_a -o rebuilt");
    EXPECT_EQ(report.code, 0) << report.err;
    EXPECT_EQ(slurp(dir_ / "rebuilt" / "summary.csv"), slurp(dir_ / "run_a" / "report" / "summary.csv"));

    EXPECT_EQ(run("replay nowhere").code, 2);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
    const auto corpus = synth();
    const auto r = run("bench --corpus " + corpus.string() + " --strategies random", "SEEDGROW_OUT=from_env");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir_ / "from_env" / "random" / "trace.jsonl"));
}

TEST_F(Cli, ManifestDrivenRun) {
    const auto corpus = synth();
    std::ofstream(dir_ / "run.json") << R"({"corpus": "corpus.jsonl", "strategies": ["i-mlt"], "output": "m_out",
                                           "config": {"t": 20, "b": 5}})";
    const auto r = run("bench --manifest run.json");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(slurp(dir_ / "m_out" / "manifest.json").find("\"t\": 20"), std::string::npos);
    EXPECT_EQ(run("bench --manifest missing.json").code, 2);
}

TEST_F(Cli, ServeWithMissingCorpusIsAUsageError) {
    const auto r = run("serve --corpus /no/such/file.jsonl --port 0");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("/no/such/file.jsonl"), std::string::npos) << r.err;
}

#endif
