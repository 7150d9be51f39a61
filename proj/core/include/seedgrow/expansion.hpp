#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seedgrow/corpus.hpp"
#include "seedgrow/index.hpp"
#include "seedgrow/label_model.hpp"
#include "seedgrow/oracle.hpp"
#include "seedgrow/ranked_list.hpp"
#include "seedgrow/weak_models.hpp"

namespace seedgrow {

enum class Strategy { random, i_mlt, i_dp };

std::string_view to_string(Strategy s) noexcept; // "random", "i-mlt", "i-dp"
std::optional<Strategy> parse_strategy(std::string_view s) noexcept;

struct ExpansionConfig {
    std::size_t termination = 30; // t: max examples shown per iteration without a positive
    std::size_t batch_size = 10;  // b
    std::size_t retrain_every = 3; // f: positive-yielding iterations between label-model fits
    std::size_t top_k = 50;       // weak model truncation
    Strategy strategy = Strategy::i_mlt;
    std::uint64_t seed = 0;
    MltConfig mlt;
    Bm25Params bm25;
    LabelModelConfig label_model;
    DenoisePolicy denoise;

    /// Throws ConfigError unless t >= b >= 1, f >= 1, top_k >= 1.
    void validate() const;
};

/// {"t", "b", "f", "top_k", "seed", "strategy", "k1", "bm25_b", "max_query_terms",
///  "min_term_freq", "min_doc_freq", "label_model": {...}, "denoise": {...}};
/// missing keys keep their defaults. Throws ConfigError.
std::string expansion_config_to_json(const ExpansionConfig& config);
ExpansionConfig expansion_config_from_json(std::string_view text);

enum class RankingSource { random, mlt, dp };

std::string_view to_string(RankingSource s) noexcept;

/// One loop iteration as exported to the trace.
struct TraceEvent {
    std::size_t iteration = 0;
    std::size_t shown = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    RankingSource source = RankingSource::mlt;
    bool retrained = false;
    std::vector<DocId> positive_ids;
    std::vector<DocId> negative_ids;

    bool operator==(const TraceEvent&) const = default;
};

struct ExpansionState {
    std::string class_name;
    std::size_t iteration = 0; // completed iterations == trace.size()
    IdSet tr_pos;              // strict positives, seeds included
    IdSet tr_neg;
    IdSet pool;                // remaining unlabeled docs
    std::vector<WeakModel> weak_models;
    std::optional<ProbLabels> prob_labels; // latest label-model ranking source
    std::vector<TraceEvent> trace;
    std::size_t positive_iterations = 0;
    std::size_t positive_iterations_since_fit = 0;
    std::size_t fits = 0;
    bool terminated = false;

    IdSet labeled() const;
};

/// Fresh state: positives = seeds, pool = the corpus pool partition.
ExpansionState initial_state(const ClassTask& task, const Corpus& corpus);

/// Ranks the remaining pool for the next iteration. Depth is capped at t since a
/// walk never looks further.
RankedList rank_candidates(const ExpansionState& state, const ExpansionConfig& config,
                           const InvertedIndex& index, const Corpus& corpus);

/// Interleaves a[0], b[0], a[1], b[1], ... keeping first occurrences. Scores are
/// positional (size - position) because the sources are not comparable.
RankedList round_robin_merge(const RankedList& a, const RankedList& b);

enum class PageOutcome { next_page, iteration_complete, terminated };

/// One iteration in progress: a ranking walked page by page. Verdicts are held
/// here and only committed to the state when the walk ends, so abandoning a walk
/// (oracle failure, timeout) leaves the state untouched.
struct Walk {
    RankedList ranking;
    RankingSource source = RankingSource::mlt;
    std::size_t limit = 0; // min(t, |ranking|)
    std::size_t offset = 0;
    std::size_t page = 1;
    std::vector<DocId> judged_negatives;

    std::span<const ScoredDoc> current_page(std::size_t batch_size) const;
};

Walk begin_walk(const ExpansionState& state, const ExpansionConfig& config,
                const InvertedIndex& index, const Corpus& corpus);

OracleRequest make_request(const ExpansionState& state, const Walk& walk,
                           const ExpansionConfig& config, const Corpus& corpus,
                           std::string_view session = {});

/// Applies the verdict for the walk's current page. A page with a positive ends
/// the iteration (positives and every negative judged in the walk are committed);
/// exhausting the walk without one terminates the class. Throws OracleError if the
/// verdict keys differ from the page.
PageOutcome apply_verdict(ExpansionState& state, Walk& walk, const BatchVerdict& verdict,
                          const ExpansionConfig& config, const InvertedIndex& index,
                          const Corpus& corpus);

enum class StepOutcome { continued, terminated };

/// Runs one full iteration against the oracle. On oracle failure the exception
/// propagates and the state is unchanged.
StepOutcome step(ExpansionState& state, const ExpansionConfig& config, Oracle& oracle,
                 const InvertedIndex& index, const Corpus& corpus, std::string_view session = {});

/// Steps until termination.
ExpansionState expand_class(const ClassTask& task, const ExpansionConfig& config, Oracle& oracle,
                            const InvertedIndex& index, const Corpus& corpus,
                            std::string_view session = {});

struct LabeledExample {
    DocId id;
    std::string label;

    bool operator==(const LabeledExample&) const = default;
};

/// Union of all per-class positive sets (seeds included), classes in task order.
struct TrainingSet {
    std::vector<LabeledExample> examples;
    std::size_t conflicts = 0;            // docs claimed positive by more than one class
    std::vector<ExpansionState> per_class; // task order
};

/// Expands every task independently against the full pool and merges the
/// positives. `workers` > 1 runs classes concurrently; output is identical.
TrainingSet expand_all(std::span<const ClassTask> tasks, const ExpansionConfig& config,
                       Oracle& oracle, const Corpus& corpus, std::size_t workers = 1,
                       std::string_view session = {});
TrainingSet expand_all(std::span<const ClassTask> tasks, const ExpansionConfig& config,
                       Oracle& oracle, const InvertedIndex& index, const Corpus& corpus,
                       std::size_t workers = 1, std::string_view session = {});

/// Per-iteration trace export:
/// {"class", "iteration", "shown", "positives", "negatives", "source", "retrained",
///  "positive_ids", "negative_ids"}
std::string to_jsonl(const TraceEvent& event, std::string_view class_name);
void write_trace(std::ostream& out, const ExpansionState& state);
/// Final training set in the corpus JSONL schema.
void write_training_set(std::ostream& out, const TrainingSet& set, const Corpus& corpus);

} // namespace seedgrow
