#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seedgrow/corpus.hpp"
#include "seedgrow/expansion.hpp"

namespace seedgrow {

struct RecallPoint {
    std::size_t iteration = 0;
    std::size_t examples = 0; // cumulative examples shown to the labeler
    double recall = 0.0;

    bool operator==(const RecallPoint&) const = default;
};

/// Recall of the class over its gold docs in seeds + pool after every iteration,
/// starting with the seeds-only point at iteration 0. Throws ConfigError if no
/// doc carries `class_name` as gold.
std::vector<RecallPoint> recall_curve(const IdSet& seeds, std::span<const TraceEvent> trace,
                                      const Corpus& corpus, std::string_view class_name);

struct EffortPoint {
    std::size_t iteration = 0;
    std::size_t positives = 0;

    bool operator==(const EffortPoint&) const = default;
};

std::vector<EffortPoint> label_effort(std::span<const TraceEvent> trace);

using TokenCounts = std::map<std::string, std::size_t, std::less<>>;

TokenCounts count_tokens(const IdSet& ids, const Corpus& corpus);

/// D(train || optimal) in nats over the union vocabulary, each distribution
/// smoothed by adding 1e-9 per type and renormalizing. Throws ConfigError on
/// empty inputs.
double kl_divergence(const TokenCounts& train, const TokenCounts& optimal);

struct KlPoint {
    std::size_t iteration = 0;
    double kl = 0.0;

    bool operator==(const KlPoint&) const = default;
};

/// KL of the class's positive set after each iteration against the vocabulary
/// of all its gold docs in seeds + pool.
std::vector<KlPoint> kl_series(const IdSet& seeds, std::span<const TraceEvent> trace,
                               const Corpus& corpus, std::string_view class_name);

/// Multinomial bag-of-tokens classifier with add-one smoothing. Tokens never
/// seen in training are ignored at prediction time.
class SurrogateClassifier {
public:
    /// Throws ConfigError unless at least two classes are present.
    static SurrogateClassifier fit(std::span<const LabeledExample> train, const Corpus& corpus);

    /// argmax of log prior + token log-likelihoods; ties go to the smaller class name.
    const std::string& predict(std::span<const std::string> tokens) const;
    double log_score(std::span<const std::string> tokens, std::size_t class_index) const;
    std::span<const std::string> classes() const noexcept { return classes_; }

private:
    std::vector<std::string> classes_; // sorted
    std::vector<double> log_prior_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> counts_; // token -> per class
    std::vector<double> log_denominator_;                              // per class
};

/// Trains on `train` and returns accuracy on `test` (gold labels).
double fit_and_score(std::span<const LabeledExample> train, std::span<const LabeledExample> test,
                     const Corpus& corpus);

/// Test partition docs with their gold labels.
std::vector<LabeledExample> test_examples(const Corpus& corpus);
/// Seeds of every task under the task's class.
std::vector<LabeledExample> initial_examples(std::span<const ClassTask> tasks);
/// Seeds plus every gold-labeled pool doc of a task class.
std::vector<LabeledExample> optimal_examples(std::span<const ClassTask> tasks, const Corpus& corpus);

/// Rebuilds the per-class state a trace describes (positives, negatives, pool).
ExpansionState replay_trace(const ClassTask& task, std::vector<TraceEvent> trace,
                            const Corpus& corpus);
std::vector<TraceEvent> read_trace(std::istream& in, std::string_view class_name = {});

struct ClassReport {
    std::string class_name;
    std::vector<RecallPoint> recall;
    std::vector<EffortPoint> effort;
    std::vector<KlPoint> kl;
    std::size_t initial_size = 0;
    std::size_t terminal_size = 0;
    std::size_t optimal_size = 0;
};

struct StrategyReport {
    Strategy strategy = Strategy::i_mlt;
    double terminal_accuracy = 0.0;
    std::size_t terminal_size = 0;
    std::size_t conflicts = 0;
    std::vector<ClassReport> classes;
};

struct EvalReport {
    double initial_accuracy = 0.0;
    double optimal_accuracy = 0.0;
    std::size_t initial_size = 0;
    std::size_t optimal_size = 0;
    std::vector<StrategyReport> strategies;
};

struct StrategyRun {
    Strategy strategy = Strategy::i_mlt;
    TrainingSet result;
};

/// Aggregates runs of several strategies over the same corpus and tasks.
EvalReport evaluate(const Corpus& corpus, std::span<const ClassTask> tasks,
                    std::span<const StrategyRun> runs);

std::string report_to_json(const EvalReport& report);
/// Rows Initial, Optimal, then one per strategy: name,size,accuracy,conflicts.
std::string report_summary_csv(const EvalReport& report);
/// report.json, summary.csv and per-class curve CSVs under `dir`.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

} // namespace seedgrow
