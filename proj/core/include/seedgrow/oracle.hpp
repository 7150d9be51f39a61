#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seedgrow/corpus.hpp"

namespace seedgrow {

enum class Verdict { positive, negative };

std::string_view to_string(Verdict v) noexcept; // "pos" / "neg"
std::optional<Verdict> parse_verdict(std::string_view s) noexcept;

/// Verdicts for exactly the documents of one shown batch.
struct BatchVerdict {
    std::map<DocId, Verdict> assignments;

    std::size_t positives() const;
    bool operator==(const BatchVerdict&) const = default;
};

/// One page shown to the labeler.
struct OracleRequest {
    std::string session;
    std::string class_name;
    std::vector<const Document*> batch;
    std::size_t iteration = 1; // 1-based loop iteration
    std::size_t page = 1;      // 1-based page within the iteration's walk

    std::vector<DocId> ids() const;
};

/// The labeler. Implementations must return a verdict for every doc of the batch.
class Oracle {
public:
    virtual ~Oracle() = default;
    virtual BatchVerdict judge(const OracleRequest& request) = 0;
};

/// Answers from gold labels: positive iff gold class equals the requested class.
class SimulatedOracle final : public Oracle {
public:
    /// Fails with ConfigError if any doc in `scope` lacks a gold class.
    SimulatedOracle(const Corpus& corpus, const IdSet& scope);
    /// Uses the corpus pool partition as scope.
    explicit SimulatedOracle(const Corpus& corpus);

    BatchVerdict judge(const OracleRequest& request) override;
};

/// One line of a verdict log: {"session", "class", "iteration", "doc_id", "verdict"}.
struct VerdictRecord {
    std::string session;
    std::string class_name;
    std::size_t iteration = 1;
    DocId doc_id;
    Verdict verdict = Verdict::negative;

    bool operator==(const VerdictRecord&) const = default;
};

std::string to_jsonl(const VerdictRecord& record);
VerdictRecord parse_verdict_record(std::string_view line, std::size_t line_no = 0);
std::vector<VerdictRecord> read_verdict_log(std::istream& in);
void write_verdict_log(std::ostream& out, const std::vector<VerdictRecord>& records);

/// Replays a recorded log. Each class keeps a cursor; a request must match the next
/// recorded docs of its class in order and iteration, otherwise ReplayDivergence.
class ScriptedOracle final : public Oracle {
public:
    explicit ScriptedOracle(std::vector<VerdictRecord> records);

    BatchVerdict judge(const OracleRequest& request) override;
    /// Unconsumed records for `class_name`.
    std::size_t remaining(std::string_view class_name) const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<VerdictRecord>, std::less<>> by_class_;
    std::map<std::string, std::size_t, std::less<>> cursor_;
};

/// Wraps another oracle and logs every verdict it returns, grouped per class.
class RecordingOracle final : public Oracle {
public:
    RecordingOracle(Oracle& inner, std::string session);

    BatchVerdict judge(const OracleRequest& request) override;
    std::vector<VerdictRecord> records(std::string_view class_name) const;
    /// All records, classes in the order given.
    std::vector<VerdictRecord> records(const std::vector<std::string>& class_order) const;

private:
    Oracle& inner_;
    std::string session_;
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<VerdictRecord>, std::less<>> by_class_;
};

/// Human-in-the-loop queue: `judge` publishes the request and blocks until
/// `submit` delivers a complete verdict, or throws OracleTimeout (the same
/// request may then be judged again). One outstanding request at a time.
class InteractiveOracle final : public Oracle {
public:
    explicit InteractiveOracle(std::chrono::milliseconds timeout = std::chrono::minutes(30));

    BatchVerdict judge(const OracleRequest& request) override;

    /// Ids of the request currently waiting for a verdict, if any.
    std::optional<std::vector<DocId>> pending() const;
    /// Delivers the verdict for the pending request. Throws OracleError if nothing
    /// is pending or the keys differ from the pending batch.
    void submit(BatchVerdict verdict);

private:
    std::chrono::milliseconds timeout_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::optional<std::vector<DocId>> pending_;
    std::optional<BatchVerdict> answer_;
};

} // namespace seedgrow
