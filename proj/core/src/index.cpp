#include "seedgrow/index.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"
#include "seedgrow/error.hpp"

namespace seedgrow {

using nlohmann::json;

double bm25_idf(std::size_t doc_count, std::size_t doc_freq) {
    const auto n = static_cast<double>(doc_count);
    const auto df = static_cast<double>(doc_freq);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

InvertedIndex InvertedIndex::build(const Corpus& corpus, const IdSet& scope) {
    InvertedIndex index;
    index.doc_ids_.assign(scope.begin(), scope.end()); // IdSet iterates in id order
    index.doc_lengths_.reserve(scope.size());
    std::unordered_map<std::string, std::uint32_t> tf;
    for (std::uint32_t ord = 0; ord < index.doc_ids_.size(); ++ord) {
        const auto& doc = corpus.at(index.doc_ids_[ord]);
        tf.clear();
        for (const auto& token : doc.tokens) ++tf[token];
        for (const auto& [term, count] : tf) index.postings_[term].push_back({ord, count});
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(doc.tokens.size()));
    }
    index.finalize();
    return index;
}

void InvertedIndex::finalize() {
    ordinals_.clear();
    for (std::uint32_t ord = 0; ord < doc_ids_.size(); ++ord) ordinals_.emplace(doc_ids_[ord], ord);
    double total = 0.0;
    for (auto len : doc_lengths_) total += len;
    avg_doc_length_ = doc_ids_.empty() ? 0.0 : total / static_cast<double>(doc_ids_.size());
}

std::size_t InvertedIndex::doc_freq(std::string_view term) const {
    const auto it = postings_.find(std::string(term));
    return it == postings_.end() ? 0 : it->second.size();
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    const auto it = postings_.find(std::string(term));
    if (it == postings_.end()) return {};
    return it->second;
}

std::optional<std::uint32_t> InvertedIndex::ordinal_of(std::string_view id) const {
    const auto it = ordinals_.find(std::string(id));
    if (it == ordinals_.end()) return std::nullopt;
    return it->second;
}

bool InvertedIndex::operator==(const InvertedIndex& other) const {
    return doc_ids_ == other.doc_ids_ && doc_lengths_ == other.doc_lengths_ &&
           postings_ == other.postings_ && avg_doc_length_ == other.avg_doc_length_;
}

std::string InvertedIndex::to_json() const {
    // std::map gives the snapshot a stable term order
    std::map<std::string, const std::vector<Posting>*> sorted;
    for (const auto& [term, list] : postings_) sorted.emplace(term, &list);
    json postings = json::object();
    for (const auto& [term, list] : sorted) {
        json arr = json::array();
        for (const auto& p : *list) arr.push_back({p.doc, p.tf});
        postings[term] = std::move(arr);
    }
    json out = {{"format", "seedgrow-index/1"},
                {"doc_ids", doc_ids_},
                {"doc_lengths", doc_lengths_},
                {"postings", std::move(postings)}};
    return out.dump();
}

InvertedIndex InvertedIndex::from_json(std::string_view text) {
    InvertedIndex index;
    try {
        const auto in = json::parse(text);
        if (in.value("format", "") != "seedgrow-index/1") {
            throw ConfigError("not a seedgrow index snapshot");
        }
        index.doc_ids_ = in.at("doc_ids").get<std::vector<DocId>>();
        index.doc_lengths_ = in.at("doc_lengths").get<std::vector<std::uint32_t>>();
        if (index.doc_ids_.size() != index.doc_lengths_.size() ||
            !std::is_sorted(index.doc_ids_.begin(), index.doc_ids_.end())) {
            throw ConfigError("corrupt index snapshot");
        }
        for (const auto& [term, arr] : in.at("postings").items()) {
            auto& list = index.postings_[term];
            for (const auto& p : arr) {
                const Posting posting{p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()};
                if (posting.doc >= index.doc_ids_.size()) throw ConfigError("corrupt index snapshot");
                list.push_back(posting);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cannot read index snapshot: ") + e.what());
    }
    index.finalize();
    return index;
}

MltQuery build_mlt_query(std::span<const Document* const> like_docs, const InvertedIndex& index,
                         const MltConfig& config) {
    MltQuery query;
    query.config = config;
    std::unordered_map<std::string, std::size_t> tf;
    for (const auto* doc : like_docs) {
        for (const auto& token : doc->tokens) ++tf[token];
    }
    std::vector<MltTerm> candidates;
    for (const auto& [term, count] : tf) {
        if (count < config.min_term_freq) continue;
        const auto df = index.doc_freq(term);
        if (df == 0 || df < config.min_doc_freq) continue;
        candidates.push_back({term, static_cast<double>(count) * bm25_idf(index.doc_count(), df)});
    }
    auto by_weight = [](const MltTerm& a, const MltTerm& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.term < b.term;
    };
    const auto keep = std::min(config.max_query_terms, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), by_weight);
    candidates.resize(keep);
    query.terms = std::move(candidates);
    return query;
}

RankedList search(const MltQuery& query, const InvertedIndex& index, const IdSet& exclude,
                  std::size_t limit, const Bm25Params& params) {
    if (query.empty() || limit == 0 || index.doc_count() == 0) return {};
    const auto n = index.doc_count();
    std::vector<double> scores(n, 0.0);
    std::vector<std::uint32_t> touched;
    const double avg = index.avg_doc_length();
    for (const auto& qt : query.terms) {
        const auto list = index.postings(qt.term);
        if (list.empty()) continue;
        const double idf = bm25_idf(n, list.size());
        for (const auto& p : list) {
            if (scores[p.doc] == 0.0) touched.push_back(p.doc);
            scores[p.doc] += bm25_term_score(idf, p.tf, index.doc_length(p.doc), avg, params);
        }
    }
    std::vector<bool> excluded(n, false);
    for (const auto& id : exclude) {
        if (auto ord = index.ordinal_of(id)) excluded[*ord] = true;
    }
    // ordinals follow id order, so sorting by (score, ordinal) is the canonical order
    std::vector<std::uint32_t> hits;
    hits.reserve(touched.size());
    for (auto ord : touched) {
        if (!excluded[ord] && scores[ord] > 0.0) hits.push_back(ord);
    }
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    const auto keep = std::min(limit, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                      better);
    RankedList out;
    out.entries.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.entries.push_back({index.doc_id(hits[i]), scores[hits[i]]});
    return out;
}

} // namespace seedgrow
