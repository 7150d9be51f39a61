#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "seedgrow/corpus.hpp"
#include "seedgrow/error.hpp"
#include "seedgrow/eval.hpp"
#include "seedgrow/expansion.hpp"
#include "seedgrow/index.hpp"
#include "seedgrow/oracle.hpp"

namespace seedgrow {

/// Unknown session (HTTP 404).
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Request conflicts with the session state: wrong batch, stale nonce, terminated
/// session (HTTP 409).
class ConflictError : public Error {
public:
    using Error::Error;
};

enum class SessionStatus { awaiting_verdict, ranking, terminated };

std::string_view to_string(SessionStatus s) noexcept;

struct SessionSpec {
    std::string class_name;
    IdSet seeds;
    ExpansionConfig config;
};

struct BatchItem {
    DocId id;
    std::string text;
};

struct BatchView {
    std::string session;
    std::string class_name;
    SessionStatus status = SessionStatus::ranking;
    std::size_t iteration = 0; // 1-based iteration the batch belongs to
    std::size_t page = 0;      // 1-based page within the walk
    std::size_t max_pages = 0; // ceil(t / b)
    std::string nonce;         // echo back with the verdicts
    std::vector<BatchItem> items; // empty once terminated
};

enum class NextAction { next_page, next_iteration, terminated };

std::string_view to_string(NextAction a) noexcept;

struct SubmitResult {
    SessionStatus status = SessionStatus::ranking;
    NextAction next = NextAction::next_page;
    std::size_t iterations = 0; // completed iterations
    bool replayed = false;      // same nonce resubmitted; nothing applied

    bool operator==(const SubmitResult&) const = default;
};

struct Progress {
    std::string session;
    std::string class_name;
    SessionStatus status = SessionStatus::ranking;
    std::size_t iterations = 0;
    std::vector<EffortPoint> effort;
    std::size_t labeled = 0; // verdicts given, seeds excluded
    std::size_t positives = 0; // tr_pos, seeds included
    std::size_t negatives = 0;
    std::size_t pool_remaining = 0;
    std::size_t seeds = 0;
    std::optional<double> recall; // when the corpus has gold labels for the class
    std::optional<double> kl;
};

/// Interactive labeling sessions over one shared corpus and pool index. Each
/// session drives the same walk machine as `step`, one page per request, so a
/// session's state always equals a scripted replay of its verdict log.
///
/// With a state directory, every session keeps <dir>/<id>/session.json and an
/// append-only verdicts.jsonl; constructing a manager over an existing directory
/// restores all sessions by replaying their logs.
class SessionManager {
public:
    SessionManager(const Corpus& corpus, const InvertedIndex& index,
                   std::optional<std::filesystem::path> state_dir = std::nullopt,
                   std::string corpus_id = "default");
    ~SessionManager();

    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;

    const std::string& corpus_id() const noexcept { return corpus_id_; }

    /// Throws ConfigError for invalid seeds/config.
    std::string create(const SessionSpec& spec);
    std::vector<std::string> sessions() const;

    /// Current batch; ranks lazily when the previous iteration just finished.
    BatchView batch(std::string_view id);
    /// Applies verdicts for the batch identified by `nonce`. Resubmitting the last
    /// applied nonce with the same assignments returns the previous result.
    SubmitResult submit(std::string_view id, std::string_view nonce, const BatchVerdict& verdict);
    /// Never waits for a verdict being applied: reads the last published snapshot.
    Progress progress(std::string_view id) const;
    /// {"session", "class", "status", "positives", "negatives", "trace", "verdicts"} JSON.
    std::string export_json(std::string_view id);

    /// Restarts read this; exposed for tests.
    std::vector<VerdictRecord> verdict_log(std::string_view id);

private:
    struct Session;

    const Corpus& corpus_;
    const InvertedIndex& index_;
    std::optional<std::filesystem::path> state_dir_;
    std::string corpus_id_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::unique_ptr<Session>, std::less<>> sessions_;
    std::size_t next_id_ = 1;

    Session& find(std::string_view id) const;
    void restore();
    void publish(Session& s);
};

struct HttpOptions {
    std::string host = "127.0.0.1";
    int port = 8080; // 0 picks a free port
    std::optional<std::filesystem::path> static_dir; // built UI bundle served at /
};

/// JSON-over-HTTP front end:
///   POST /sessions                 {"class", "seeds": [...], "config"?: {...}, "corpus"?}
///   GET  /sessions/{id}/batch
///   POST /sessions/{id}/verdicts   {"nonce", "assignments": {"doc": "pos"|"neg"}}
///   GET  /sessions/{id}/progress
///   GET  /sessions/{id}/export
/// Errors are {"code", "message"} with 400 / 404 / 409 / 500.
class HttpService {
public:
    HttpService(SessionManager& sessions, HttpOptions options = {});
    ~HttpService();

    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    /// Binds the socket; returns the bound port. Throws Error if binding fails.
    int bind();
    /// Serves until stop(). Call bind() first.
    void serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace seedgrow
