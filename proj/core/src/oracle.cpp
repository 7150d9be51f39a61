#include "seedgrow/oracle.hpp"

#include <istream>
#include <ostream>

#include "json.hpp"
#include "seedgrow/error.hpp"

namespace seedgrow {

using nlohmann::json;

std::string_view to_string(Verdict v) noexcept {
    return v == Verdict::positive ? "pos" : "neg";
}

std::optional<Verdict> parse_verdict(std::string_view s) noexcept {
    if (s == "pos") return Verdict::positive;
    if (s == "neg") return Verdict::negative;
    return std::nullopt;
}

std::size_t BatchVerdict::positives() const {
    std::size_t n = 0;
    for (const auto& [id, v] : assignments) n += v == Verdict::positive;
    return n;
}

std::vector<DocId> OracleRequest::ids() const {
    std::vector<DocId> out;
    out.reserve(batch.size());
    for (const auto* d : batch) out.push_back(d->id);
    return out;
}

// --- simulated -------------------------------------------------------------

SimulatedOracle::SimulatedOracle(const Corpus& corpus, const IdSet& scope) {
    for (const auto& id : scope) {
        const auto& doc = corpus.at(id);
        if (!doc.gold_class)
            throw ConfigError("simulated labeler needs a gold label for every pool doc; '" + id +
                              "' has none");
    }
}

SimulatedOracle::SimulatedOracle(const Corpus& corpus)
    : SimulatedOracle(corpus, corpus.partition(Split::pool)) {}

BatchVerdict SimulatedOracle::judge(const OracleRequest& request) {
    BatchVerdict out;
    for (const auto* doc : request.batch) {
        if (!doc->gold_class) throw OracleError("no gold label for '" + doc->id + "'");
        out.assignments[doc->id] =
            *doc->gold_class == request.class_name ? Verdict::positive : Verdict::negative;
    }
    return out;
}

// --- verdict log -----------------------------------------------------------

std::string to_jsonl(const VerdictRecord& r) {
    json obj = json::object();
    obj["session"] = r.session;
    obj["class"] = r.class_name;
    obj["iteration"] = r.iteration;
    obj["doc_id"] = r.doc_id;
    obj["verdict"] = std::string(to_string(r.verdict));
    return obj.dump();
}

VerdictRecord parse_verdict_record(std::string_view line, std::size_t line_no) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        throw IngestError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw IngestError(line_no, "verdict record must be an object");
    try {
        VerdictRecord r;
        r.session = obj.value("session", std::string{});
        r.class_name = obj.at("class").get<std::string>();
        r.iteration = obj.at("iteration").get<std::size_t>();
        r.doc_id = obj.at("doc_id").get<std::string>();
        const auto v = parse_verdict(obj.at("verdict").get<std::string>());
        if (!v) throw IngestError(line_no, "verdict must be \"pos\" or \"neg\"");
        r.verdict = *v;
        return r;
    } catch (const json::exception& e) {
        throw IngestError(line_no, std::string("bad verdict record: ") + e.what());
    }
}

std::vector<VerdictRecord> read_verdict_log(std::istream& in) {
    std::vector<VerdictRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_verdict_record(line, line_no));
    }
    return out;
}

void write_verdict_log(std::ostream& out, const std::vector<VerdictRecord>& records) {
    for (const auto& r : records) out << to_jsonl(r) << '\n';
}

// --- scripted --------------------------------------------------------------

ScriptedOracle::ScriptedOracle(std::vector<VerdictRecord> records) {
    for (auto& r : records) by_class_[r.class_name].push_back(std::move(r));
}

BatchVerdict ScriptedOracle::judge(const OracleRequest& request) {
    std::lock_guard lock(mutex_);
    const auto it = by_class_.find(request.class_name);
    if (it == by_class_.end())
        throw ReplayDivergence(request.iteration,
                               "no recorded verdicts for class '" + request.class_name + "'");
    const auto& log = it->second;
    std::size_t cursor = cursor_[request.class_name];
    if (cursor + request.batch.size() > log.size())
        throw ReplayDivergence(request.iteration, "log exhausted for class '" +
                                                      request.class_name + "'");
    BatchVerdict out;
    for (std::size_t k = 0; k < request.batch.size(); ++k) {
        const auto& rec = log[cursor + k];
        const auto& id = request.batch[k]->id;
        if (rec.doc_id != id || rec.iteration != request.iteration)
            throw ReplayDivergence(request.iteration,
                                   "expected '" + rec.doc_id + "' (iteration " +
                                       std::to_string(rec.iteration) + "), run asked for '" + id +
                                       "'");
        out.assignments[id] = rec.verdict;
    }
    cursor_[request.class_name] = cursor + request.batch.size();
    return out;
}

std::size_t ScriptedOracle::remaining(std::string_view class_name) const {
    std::lock_guard lock(mutex_);
    const auto it = by_class_.find(class_name);
    if (it == by_class_.end()) return 0;
    const auto c = cursor_.find(class_name);
    return it->second.size() - (c == cursor_.end() ? 0 : c->second);
}

// --- recording -------------------------------------------------------------

RecordingOracle::RecordingOracle(Oracle& inner, std::string session)
    : inner_(inner), session_(std::move(session)) {}

BatchVerdict RecordingOracle::judge(const OracleRequest& request) {
    auto verdict = inner_.judge(request);
    std::lock_guard lock(mutex_);
    auto& log = by_class_[request.class_name];
    for (const auto* doc : request.batch) {
        const auto it = verdict.assignments.find(doc->id);
        if (it == verdict.assignments.end()) continue; // rejected later by the caller
        log.push_back({session_, request.class_name, request.iteration, doc->id, it->second});
    }
    return verdict;
}

std::vector<VerdictRecord> RecordingOracle::records(std::string_view class_name) const {
    std::lock_guard lock(mutex_);
    const auto it = by_class_.find(class_name);
    return it == by_class_.end() ? std::vector<VerdictRecord>{} : it->second;
}

std::vector<VerdictRecord> RecordingOracle::records(
    const std::vector<std::string>& class_order) const {
    std::vector<VerdictRecord> out;
    for (const auto& c : class_order) {
        auto part = records(c);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

// --- interactive -----------------------------------------------------------

InteractiveOracle::InteractiveOracle(std::chrono::milliseconds timeout) : timeout_(timeout) {}

BatchVerdict InteractiveOracle::judge(const OracleRequest& request) {
    std::unique_lock lock(mutex_);
    pending_ = request.ids();
    answer_.reset();
    if (!cv_.wait_for(lock, timeout_, [&] { return answer_.has_value(); })) {
        pending_.reset();
        throw OracleTimeout("no verdict within " + std::to_string(timeout_.count()) + " ms");
    }
    auto out = std::move(*answer_);
    answer_.reset();
    pending_.reset();
    return out;
}

std::optional<std::vector<DocId>> InteractiveOracle::pending() const {
    std::lock_guard lock(mutex_);
    return pending_;
}

void InteractiveOracle::submit(BatchVerdict verdict) {
    {
        std::lock_guard lock(mutex_);
        if (!pending_ || answer_) throw OracleError("no batch is waiting for a verdict");
        if (verdict.assignments.size() != pending_->size())
            throw OracleError("verdict must cover exactly the shown batch");
        for (const auto& id : *pending_)
            if (!verdict.assignments.contains(id))
                throw OracleError("missing verdict for '" + id + "'");
        answer_ = std::move(verdict);
    }
    cv_.notify_all();
}

} // namespace seedgrow
