#include "seedgrow/service.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace seedgrow {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(SessionStatus s) noexcept {
    switch (s) {
    case SessionStatus::awaiting_verdict: return "awaiting_verdict";
    case SessionStatus::ranking: return "ranking";
    case SessionStatus::terminated: return "terminated";
    }
    return "?";
}

std::string_view to_string(NextAction a) noexcept {
    switch (a) {
    case NextAction::next_page: return "next_page";
    case NextAction::next_iteration: return "next_iteration";
    case NextAction::terminated: return "terminated";
    }
    return "?";
}

struct SessionManager::Session {
    std::string id;
    SessionSpec spec;
    ExpansionState state;
    std::optional<Walk> walk;
    std::size_t pages_applied = 0;
    std::string last_nonce;
    BatchVerdict last_verdict;
    SubmitResult last_result;
    std::vector<VerdictRecord> log;
    IdSet gold;
    TokenCounts optimal_tokens;
    std::mutex mutex; // serializes operations on this session

    mutable std::mutex snapshot_mutex; // guards only the pointer swap
    std::shared_ptr<const Progress> snapshot;

    SessionStatus status() const {
        if (state.terminated) return SessionStatus::terminated;
        return walk ? SessionStatus::awaiting_verdict : SessionStatus::ranking;
    }
    std::string pending_nonce() const { return "p" + std::to_string(pages_applied + 1); }
};

namespace {

fs::path session_dir(const fs::path& root, std::string_view id) { return root / std::string(id); }

void append_log(const fs::path& path, const std::vector<VerdictRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot open verdict log " + path.string());
    write_verdict_log(out, records);
    out.flush();
    if (!out) throw Error("failed to append verdict log " + path.string());
}

} // namespace

SessionManager::SessionManager(const Corpus& corpus, const InvertedIndex& index,
                               std::optional<fs::path> state_dir, std::string corpus_id)
    : corpus_(corpus), index_(index), state_dir_(std::move(state_dir)),
      corpus_id_(std::move(corpus_id)) {
    if (state_dir_) {
        fs::create_directories(*state_dir_);
        restore();
    }
}

SessionManager::~SessionManager() = default;

SessionManager::Session& SessionManager::find(std::string_view id) const {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + std::string(id) + "'");
    return *it->second;
}

std::vector<std::string> SessionManager::sessions() const {
    std::shared_lock lock(sessions_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

namespace {

// Starts the next walk if none is pending. An empty ranking ends the class at once.
void ensure_walk(ExpansionState& state, std::optional<Walk>& walk, const ExpansionConfig& config,
                 const InvertedIndex& index, const Corpus& corpus) {
    if (walk || state.terminated) return;
    walk = begin_walk(state, config, index, corpus);
    if (walk->current_page(config.batch_size).empty()) {
        apply_verdict(state, *walk, {}, config, index, corpus);
        walk.reset();
    }
}

} // namespace

void SessionManager::publish(Session& s) {
    auto p = std::make_shared<Progress>();
    p->session = s.id;
    p->class_name = s.spec.class_name;
    p->status = s.status();
    p->iterations = s.state.iteration;
    p->effort = label_effort(s.state.trace);
    p->positives = s.state.tr_pos.size();
    p->negatives = s.state.tr_neg.size();
    p->seeds = s.spec.seeds.size();
    p->labeled = p->positives + p->negatives - p->seeds;
    p->pool_remaining = s.state.pool.size();
    if (!s.gold.empty()) {
        std::size_t found = 0;
        for (const auto& id : s.state.tr_pos) found += s.gold.contains(id);
        p->recall = static_cast<double>(found) / static_cast<double>(s.gold.size());
        p->kl = kl_divergence(count_tokens(s.state.tr_pos, corpus_), s.optimal_tokens);
    }
    std::lock_guard lock(s.snapshot_mutex);
    s.snapshot = std::move(p);
}

std::string SessionManager::create(const SessionSpec& spec) {
    spec.config.validate();
    auto s = std::make_unique<Session>();
    s->spec = spec;
    s->state = initial_state(ClassTask{spec.class_name, spec.seeds}, corpus_);
    IdSet scope = corpus_.partition(Split::pool);
    scope.insert(spec.seeds.begin(), spec.seeds.end());
    s->gold = corpus_.ids_with_class(scope, spec.class_name);
    if (!s->gold.empty()) s->optimal_tokens = count_tokens(s->gold, corpus_);

    std::unique_lock lock(sessions_mutex_);
    s->id = "s" + std::to_string(next_id_++);
    if (state_dir_) {
        const auto dir = session_dir(*state_dir_, s->id);
        fs::create_directories(dir);
        json meta = {{"id", s->id},
                     {"class", spec.class_name},
                     {"seeds", std::vector<std::string>(spec.seeds.begin(), spec.seeds.end())},
                     {"config", json::parse(expansion_config_to_json(spec.config))}};
        std::ofstream out(dir / "session.json", std::ios::binary);
        out << meta.dump(2) << '\n';
        if (!out) throw Error("cannot write session metadata for " + s->id);
        std::ofstream(dir / "verdicts.jsonl", std::ios::binary | std::ios::trunc);
    }
    publish(*s);
    const auto id = s->id;
    sessions_.emplace(id, std::move(s));
    return id;
}

BatchView SessionManager::batch(std::string_view id) {
    auto& s = find(id);
    std::lock_guard lock(s.mutex);
    const auto& cfg = s.spec.config;
    const bool had_walk = s.walk.has_value();
    ensure_walk(s.state, s.walk, cfg, index_, corpus_);
    if (!had_walk) publish(s);

    BatchView v;
    v.session = s.id;
    v.class_name = s.spec.class_name;
    v.status = s.status();
    v.max_pages = (cfg.termination + cfg.batch_size - 1) / cfg.batch_size;
    if (!s.walk) {
        v.iteration = s.state.iteration;
        return v;
    }
    v.iteration = s.state.iteration + 1;
    v.page = s.walk->page;
    v.nonce = s.pending_nonce();
    for (const auto& e : s.walk->current_page(cfg.batch_size))
        v.items.push_back({e.id, corpus_.at(e.id).text});
    return v;
}

namespace {

struct Applied {
    ExpansionState state;
    std::optional<Walk> walk;
    SubmitResult result;
    std::vector<VerdictRecord> records;
};

// Validates and applies one page on copies; throws ConflictError on a key mismatch.
Applied apply_page(const std::string& session_id, const ExpansionState& state, const Walk& walk,
                   const BatchVerdict& verdict, const ExpansionConfig& cfg,
                   const InvertedIndex& index, const Corpus& corpus) {
    const auto page = walk.current_page(cfg.batch_size);
    if (verdict.assignments.size() != page.size())
        throw ConflictError("verdict covers " + std::to_string(verdict.assignments.size()) +
                            " docs, the pending batch has " + std::to_string(page.size()));
    Applied a{state, walk, {}, {}};
    for (const auto& e : page) {
        const auto it = verdict.assignments.find(e.id);
        if (it == verdict.assignments.end())
            throw ConflictError("doc '" + e.id + "' of the pending batch has no verdict");
        a.records.push_back({session_id, state.class_name, state.iteration + 1, e.id, it->second});
    }
    const auto outcome = apply_verdict(a.state, *a.walk, verdict, cfg, index, corpus);
    switch (outcome) {
    case PageOutcome::next_page:
        a.result = {SessionStatus::awaiting_verdict, NextAction::next_page, a.state.iteration, false};
        break;
    case PageOutcome::iteration_complete:
        a.walk.reset();
        a.result = {SessionStatus::ranking, NextAction::next_iteration, a.state.iteration, false};
        break;
    case PageOutcome::terminated:
        a.walk.reset();
        a.result = {SessionStatus::terminated, NextAction::terminated, a.state.iteration, false};
        break;
    }
    return a;
}

} // namespace

SubmitResult SessionManager::submit(std::string_view id, std::string_view nonce,
                                    const BatchVerdict& verdict) {
    auto& s = find(id);
    std::lock_guard lock(s.mutex);
    if (!s.last_nonce.empty() && nonce == s.last_nonce) {
        if (verdict.assignments != s.last_verdict.assignments)
            throw ConflictError("nonce " + std::string(nonce) +
                                " was already used with different verdicts");
        auto r = s.last_result;
        r.replayed = true;
        return r;
    }
    if (s.state.terminated) throw ConflictError("session " + s.id + " has terminated");
    if (!s.walk) throw ConflictError("no batch is pending; fetch the next batch first");
    if (nonce != s.pending_nonce())
        throw ConflictError("stale or unknown nonce '" + std::string(nonce) + "'");

    auto applied = apply_page(s.id, s.state, *s.walk, verdict, s.spec.config, index_, corpus_);
    if (state_dir_) append_log(session_dir(*state_dir_, s.id) / "verdicts.jsonl", applied.records);

    s.state = std::move(applied.state);
    s.walk = std::move(applied.walk);
    s.log.insert(s.log.end(), applied.records.begin(), applied.records.end());
    s.last_nonce = s.pending_nonce();
    ++s.pages_applied;
    s.last_verdict = verdict;
    s.last_result = applied.result;
    publish(s);
    return applied.result;
}

Progress SessionManager::progress(std::string_view id) const {
    auto& s = find(id);
    std::lock_guard lock(s.snapshot_mutex);
    return *s.snapshot;
}

std::vector<VerdictRecord> SessionManager::verdict_log(std::string_view id) {
    auto& s = find(id);
    std::lock_guard lock(s.mutex);
    return s.log;
}

std::string SessionManager::export_json(std::string_view id) {
    auto& s = find(id);
    std::lock_guard lock(s.mutex);
    json j = json::object();
    j["session"] = s.id;
    j["class"] = s.spec.class_name;
    j["status"] = std::string(to_string(s.status()));
    j["seeds"] = std::vector<std::string>(s.spec.seeds.begin(), s.spec.seeds.end());
    j["positives"] = std::vector<std::string>(s.state.tr_pos.begin(), s.state.tr_pos.end());
    j["negatives"] = std::vector<std::string>(s.state.tr_neg.begin(), s.state.tr_neg.end());
    json trace = json::array();
    for (const auto& ev : s.state.trace) trace.push_back(json::parse(to_jsonl(ev, s.spec.class_name)));
    j["trace"] = std::move(trace);
    json log = json::array();
    for (const auto& r : s.log) log.push_back(json::parse(to_jsonl(r)));
    j["verdicts"] = std::move(log);
    return j.dump();
}

void SessionManager::restore() {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(*state_dir_))
        if (entry.is_directory() && fs::exists(entry.path() / "session.json"))
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());

    for (const auto& dir : dirs) {
        json meta;
        {
            std::ifstream in(dir / "session.json", std::ios::binary);
            try {
                meta = json::parse(in);
            } catch (const json::exception& e) {
                throw ConfigError("corrupt session metadata in " + dir.string() + ": " + e.what());
            }
        }
        auto s = std::make_unique<Session>();
        s->id = meta.at("id").get<std::string>();
        s->spec.class_name = meta.at("class").get<std::string>();
        for (const auto& id : meta.at("seeds")) s->spec.seeds.insert(id.get<std::string>());
        s->spec.config = expansion_config_from_json(meta.at("config").dump());
        s->state = initial_state(ClassTask{s->spec.class_name, s->spec.seeds}, corpus_);
        IdSet scope = corpus_.partition(Split::pool);
        scope.insert(s->spec.seeds.begin(), s->spec.seeds.end());
        s->gold = corpus_.ids_with_class(scope, s->spec.class_name);
        if (!s->gold.empty()) s->optimal_tokens = count_tokens(s->gold, corpus_);

        std::vector<VerdictRecord> records;
        {
            std::ifstream in(dir / "verdicts.jsonl", std::ios::binary);
            if (in) records = read_verdict_log(in);
        }
        // Replay page by page through the same path live submissions take.
        const auto& cfg = s->spec.config;
        std::size_t pos = 0;
        while (pos < records.size()) {
            ensure_walk(s->state, s->walk, cfg, index_, corpus_);
            if (s->state.terminated)
                throw ReplayDivergence(s->state.iteration,
                                       "log of session " + s->id + " continues past termination");
            const auto page = s->walk->current_page(cfg.batch_size);
            if (pos + page.size() > records.size()) break; // torn final append; never acknowledged
            BatchVerdict v;
            for (std::size_t k = 0; k < page.size(); ++k) {
                const auto& r = records[pos + k];
                if (r.doc_id != page[k].id || r.iteration != s->state.iteration + 1)
                    throw ReplayDivergence(s->state.iteration + 1,
                                           "session " + s->id + " expected '" + page[k].id +
                                               "', log has '" + r.doc_id + "'");
                v.assignments[r.doc_id] = r.verdict;
            }
            auto applied = apply_page(s->id, s->state, *s->walk, v, cfg, index_, corpus_);
            s->state = std::move(applied.state);
            s->walk = std::move(applied.walk);
            s->log.insert(s->log.end(), applied.records.begin(), applied.records.end());
            s->last_nonce = s->pending_nonce();
            ++s->pages_applied;
            s->last_verdict = std::move(v);
            s->last_result = applied.result;
            pos += page.size();
        }
        if (pos < records.size()) {
            std::ofstream out(dir / "verdicts.jsonl", std::ios::binary | std::ios::trunc);
            write_verdict_log(out, s->log);
        }
        publish(*s);
        if (s->id.size() > 1 && s->id[0] == 's') {
            try {
                next_id_ = std::max<std::size_t>(next_id_, std::stoull(s->id.substr(1)) + 1);
            } catch (const std::exception&) {
            }
        }
        const auto id = s->id;
        sessions_.emplace(id, std::move(s));
    }
}

} // namespace seedgrow
