#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seedgrow/corpus.hpp"
#include "seedgrow/eval.hpp"
#include "seedgrow/expansion.hpp"

namespace seedgrow {

enum class SeedSampling { first, random };

/// Either explicit seed ids per class, or `per_class` docs picked per gold class.
struct SeedSpec {
    std::map<std::string, IdSet> ids;
    std::size_t per_class = 10;
    SeedSampling sampling = SeedSampling::first; // first k by id, or seeded random
};

struct RunManifest {
    std::filesystem::path corpus;
    CorpusFormat format = CorpusFormat::jsonl;
    std::vector<std::string> classes; // empty: every gold class
    SeedSpec seeds;
    ExpansionConfig config;           // strategy field is ignored
    std::vector<Strategy> strategies{Strategy::random, Strategy::i_mlt, Strategy::i_dp};
    std::filesystem::path output;
    std::size_t workers = 1;
    double test_fraction = 0.2; // held out when the corpus has no test docs

    /// Throws ConfigError: missing corpus file, no strategies, duplicate strategies,
    /// bad expansion config, test_fraction outside [0, 1).
    void validate() const;
};

/// Manifest JSON, paths resolved relative to `base_dir`.
RunManifest manifest_from_json(std::string_view text, const std::filesystem::path& base_dir = {});
std::string manifest_to_json(const RunManifest& manifest);
RunManifest load_manifest(const std::filesystem::path& path);

/// Corpus ready for a run: seeds assigned, unassigned docs moved to the pool,
/// test docs held out if the corpus had none.
struct PreparedRun {
    Corpus corpus;
    std::vector<ClassTask> tasks;
};

PreparedRun prepare_run(Corpus corpus, const RunManifest& manifest);

struct RunArtifacts {
    std::filesystem::path dir;
    EvalReport report;
    std::vector<StrategyRun> runs;
};

/// For each strategy: expand_all with a simulated oracle, then evaluate. Writes
///   manifest.json, corpus.jsonl (prepared), <strategy>/{trace,verdicts,training_set,
///   weak_models}.jsonl, report/{report.json,summary.csv,curves/}
/// On failure an ERROR file with the message is left next to partial artifacts and
/// the exception propagates.
RunArtifacts run_benchmark(const RunManifest& manifest);

/// Re-runs one strategy of a finished run from its recorded verdicts. Throws
/// ReplayDivergence if the log does not match what the run asks for.
TrainingSet replay(const std::filesystem::path& run_dir, Strategy strategy);

/// Recomputes the report of a finished run from its artifacts on disk.
EvalReport report_from_run(const std::filesystem::path& run_dir);

std::string weak_models_to_jsonl(const ExpansionState& state);

} // namespace seedgrow
