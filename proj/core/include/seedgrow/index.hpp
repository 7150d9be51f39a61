#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "seedgrow/corpus.hpp"
#include "seedgrow/ranked_list.hpp"

namespace seedgrow {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Term selection knobs for More-Like-This queries. min_term_freq defaults to 1
/// (not 2) because single sentences rarely repeat a word.
struct MltConfig {
    std::size_t max_query_terms = 25;
    std::size_t min_term_freq = 1;
    std::size_t min_doc_freq = 1;
};

struct MltTerm {
    std::string term;
    double weight = 0.0;

    bool operator==(const MltTerm&) const = default;
};

/// Selected terms, weight descending (ties by term ascending). An empty query
/// means no expansion is possible and searches return nothing.
struct MltQuery {
    std::vector<MltTerm> terms;
    MltConfig config;

    bool empty() const noexcept { return terms.empty(); }
};

struct Posting {
    std::uint32_t doc = 0; // ordinal; ordinals follow doc id order
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

/// Lucene's BM25 idf: ln(1 + (N - df + 0.5) / (df + 0.5)). Always positive.
double bm25_idf(std::size_t doc_count, std::size_t doc_freq);

/// Static inverted index over a fixed scope of documents. Built once, never
/// mutated; safe for concurrent searches.
class InvertedIndex {
public:
    InvertedIndex() = default;

    static InvertedIndex build(const Corpus& corpus, const IdSet& scope);

    std::size_t doc_count() const noexcept { return doc_ids_.size(); }
    std::size_t term_count() const noexcept { return postings_.size(); }
    double avg_doc_length() const noexcept { return avg_doc_length_; }

    std::size_t doc_freq(std::string_view term) const;
    std::span<const Posting> postings(std::string_view term) const;
    double idf(std::string_view term) const { return bm25_idf(doc_count(), doc_freq(term)); }

    const DocId& doc_id(std::uint32_t ordinal) const { return doc_ids_[ordinal]; }
    std::uint32_t doc_length(std::uint32_t ordinal) const { return doc_lengths_[ordinal]; }
    std::optional<std::uint32_t> ordinal_of(std::string_view id) const;
    std::span<const DocId> doc_ids() const noexcept { return doc_ids_; }

    /// Snapshot as JSON; `from_json(to_json())` reproduces the index.
    std::string to_json() const;
    static InvertedIndex from_json(std::string_view text);

    bool operator==(const InvertedIndex& other) const;

private:
    std::vector<DocId> doc_ids_;
    std::vector<std::uint32_t> doc_lengths_;
    std::unordered_map<std::string, std::uint32_t> ordinals_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    double avg_doc_length_ = 0.0;

    void finalize();
};

/// Builds a More-Like-This query from example documents: terms of the examples
/// that pass the tf/df filters, weighted by tf * idf, top `max_query_terms` kept.
MltQuery build_mlt_query(std::span<const Document* const> like_docs, const InvertedIndex& index,
                         const MltConfig& config = {});

/// BM25-scores every indexed document against the query terms (query weights
/// select terms, they do not boost them), drops `exclude` and zero scores, and
/// returns the top `limit` in canonical order.
RankedList search(const MltQuery& query, const InvertedIndex& index, const IdSet& exclude,
                  std::size_t limit, const Bm25Params& params = {});

/// Single BM25 term contribution; shared by the index and by reference scorers.
inline double bm25_term_score(double idf, double tf, double doc_len, double avg_len,
                              const Bm25Params& params) {
    return idf * (tf * (params.k1 + 1.0)) /
           (tf + params.k1 * (1.0 - params.b + params.b * doc_len / avg_len));
}

} // namespace seedgrow
