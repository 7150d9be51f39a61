#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seedgrow/text.hpp"

namespace seedgrow {

using DocId = std::string;
using IdSet = std::set<DocId>;

struct Document {
    DocId id;
    std::string text;                      // normalized, never empty
    std::vector<std::string> tokens;       // tokenizer(text)
    std::optional<std::string> gold_class; // hidden from selectors

    bool operator==(const Document&) const = default;
};

enum class Split { seed, pool, test };

std::string_view to_string(Split split) noexcept;
std::optional<Split> parse_split(std::string_view name) noexcept;

/// Immutable-after-ingest document store with three disjoint partitions.
class Corpus {
public:
    Corpus() = default;

    /// Adds a document; throws ConfigError on a duplicate id.
    void add(Document doc, std::optional<Split> split = std::nullopt);
    /// Moves `id` into `split` (removing it from any other partition).
    void assign(const DocId& id, Split split);

    std::span<const Document> documents() const noexcept { return docs_; }
    std::size_t size() const noexcept { return docs_.size(); }
    bool empty() const noexcept { return docs_.empty(); }

    const Document* find(std::string_view id) const;
    /// Throws ConfigError for unknown ids.
    const Document& at(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id) != nullptr; }

    const IdSet& partition(Split split) const noexcept;
    std::optional<Split> split_of(std::string_view id) const;

    /// Distinct gold classes in sorted order.
    std::vector<std::string> gold_classes() const;
    /// Ids in `scope` whose gold class is `class_name`.
    IdSet ids_with_class(const IdSet& scope, std::string_view class_name) const;

    bool operator==(const Corpus& other) const;

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
    IdSet seed_;
    IdSet pool_;
    IdSet test_;

    IdSet& mutable_partition(Split split) noexcept;
};

/// One binarized expansion problem: grow `class_name` starting from its positive seeds.
struct ClassTask {
    std::string class_name;
    IdSet positive_seed_ids;
};

/// Checks the task invariants against the corpus (seeds non-empty, inside the seed
/// partition, gold labels agree when present). Throws ConfigError.
void validate_task(const ClassTask& task, const Corpus& corpus);

enum class CorpusFormat { jsonl, csv };

std::optional<CorpusFormat> parse_format(std::string_view name) noexcept;

struct IngestOptions {
    CorpusFormat format = CorpusFormat::jsonl;
    Tokenizer tokenizer = tokenize;
};

/// Reads JSONL records {"id"?, "text", "label"?, "split"?} or CSV with header
/// id,text,label,split. Text is normalized, duplicates of normalized text are
/// dropped (first kept), missing ids are assigned from the record ordinal.
/// Throws IngestError naming the line of a malformed record or duplicate id.
Corpus ingest(std::istream& in, const IngestOptions& options = {});

/// Writes the corpus back in the ingest schema, in document order.
void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format = CorpusFormat::jsonl);

/// Serializes one document in the JSONL ingest schema (no trailing newline).
std::string document_to_jsonl(const Document& doc, std::optional<Split> split,
                              std::optional<std::string_view> label_override = std::nullopt);

} // namespace seedgrow
