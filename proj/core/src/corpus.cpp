#include "seedgrow/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "seedgrow/error.hpp"

namespace seedgrow {

using nlohmann::json;

std::string_view to_string(Split split) noexcept {
    switch (split) {
    case Split::seed:
        return "seed";
    case Split::pool:
        return "pool";
    case Split::test:
        return "test";
    }
    return "pool";
}

std::optional<Split> parse_split(std::string_view name) noexcept {
    if (name == "seed") return Split::seed;
    if (name == "pool") return Split::pool;
    if (name == "test") return Split::test;
    return std::nullopt;
}

std::optional<CorpusFormat> parse_format(std::string_view name) noexcept {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "csv") return CorpusFormat::csv;
    return std::nullopt;
}

void Corpus::add(Document doc, std::optional<Split> split) {
    if (by_id_.contains(doc.id)) throw ConfigError("duplicate document id '" + doc.id + "'");
    by_id_.emplace(doc.id, docs_.size());
    const auto id = doc.id;
    docs_.push_back(std::move(doc));
    if (split) mutable_partition(*split).insert(id);
}

void Corpus::assign(const DocId& id, Split split) {
    if (!contains(id)) throw ConfigError("cannot assign unknown document '" + id + "'");
    seed_.erase(id);
    pool_.erase(id);
    test_.erase(id);
    mutable_partition(split).insert(id);
}

const Document* Corpus::find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &docs_[it->second];
}

const Document& Corpus::at(std::string_view id) const {
    if (const auto* doc = find(id)) return *doc;
    throw ConfigError("unknown document id '" + std::string(id) + "'");
}

const IdSet& Corpus::partition(Split split) const noexcept {
    switch (split) {
    case Split::seed:
        return seed_;
    case Split::test:
        return test_;
    case Split::pool:
        break;
    }
    return pool_;
}

IdSet& Corpus::mutable_partition(Split split) noexcept {
    return const_cast<IdSet&>(std::as_const(*this).partition(split));
}

std::optional<Split> Corpus::split_of(std::string_view id) const {
    const std::string key(id);
    if (seed_.contains(key)) return Split::seed;
    if (pool_.contains(key)) return Split::pool;
    if (test_.contains(key)) return Split::test;
    return std::nullopt;
}

std::vector<std::string> Corpus::gold_classes() const {
    std::set<std::string> classes;
    for (const auto& doc : docs_) {
        if (doc.gold_class) classes.insert(*doc.gold_class);
    }
    return {classes.begin(), classes.end()};
}

IdSet Corpus::ids_with_class(const IdSet& scope, std::string_view class_name) const {
    IdSet out;
    for (const auto& id : scope) {
        const auto* doc = find(id);
        if (doc && doc->gold_class && *doc->gold_class == class_name) out.insert(out.end(), id);
    }
    return out;
}

bool Corpus::operator==(const Corpus& other) const {
    return docs_ == other.docs_ && seed_ == other.seed_ && pool_ == other.pool_ &&
           test_ == other.test_;
}

void validate_task(const ClassTask& task, const Corpus& corpus) {
    if (task.positive_seed_ids.empty()) {
        throw ConfigError("class '" + task.class_name + "' has no positive seeds");
    }
    const auto& seeds = corpus.partition(Split::seed);
    for (const auto& id : task.positive_seed_ids) {
        const auto& doc = corpus.at(id);
        if (!seeds.contains(id)) {
            throw ConfigError("seed '" + id + "' of class '" + task.class_name +
                              "' is not in the seed partition");
        }
        if (doc.gold_class && *doc.gold_class != task.class_name) {
            throw ConfigError("seed '" + id + "' is labeled '" + *doc.gold_class +
                              "', not '" + task.class_name + "'");
        }
    }
}

namespace {

struct RawRecord {
    std::size_t line = 0;
    std::optional<std::string> id;
    std::string text;
    std::optional<std::string> label;
    std::optional<Split> split;
};

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer() && std::string_view(key) == "id") return it->dump();
    throw IngestError(line, std::string("field '") + key + "' must be a string");
}

std::optional<Split> split_field(const std::optional<std::string>& raw, std::size_t line) {
    if (!raw || raw->empty()) return std::nullopt;
    auto split = parse_split(*raw);
    if (!split) throw IngestError(line, "unknown split '" + *raw + "'");
    return split;
}

RawRecord parse_jsonl_record(const std::string& line_text, std::size_t line) {
    json obj;
    try {
        obj = json::parse(line_text);
    } catch (const json::exception& e) {
        throw IngestError(line, std::string("malformed JSON record: ") + e.what());
    }
    if (!obj.is_object()) throw IngestError(line, "record is not a JSON object");
    RawRecord rec;
    rec.line = line;
    auto text = optional_string(obj, "text", line);
    if (!text) throw IngestError(line, "record has no text field");
    rec.text = std::move(*text);
    rec.id = optional_string(obj, "id", line);
    rec.label = optional_string(obj, "label", line);
    rec.split = split_field(optional_string(obj, "split", line), line);
    return rec;
}

// RFC 4180: quoted fields may contain commas, doubled quotes and newlines.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    bool was_quoted = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty() && !was_quoted) {
            in_quotes = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else if (c == '\r') {
            continue;
        } else if (c == '\n') {
            ++line;
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes) throw IngestError(line, "unterminated quoted CSV field");
    if (any) {
        ++line;
        fields.push_back(std::move(field));
    }
    return any;
}

std::vector<RawRecord> read_csv(std::istream& in) {
    std::vector<RawRecord> records;
    std::vector<std::string> row;
    std::size_t line = 0;
    if (!read_csv_row(in, row, line)) return records;
    const std::size_t header_size = row.size();
    int col_id = -1, col_text = -1, col_label = -1, col_split = -1;
    for (std::size_t i = 0; i < row.size(); ++i) {
        const auto& name = row[i];
        const auto idx = static_cast<int>(i);
        if (name == "id") col_id = idx;
        else if (name == "text") col_text = idx;
        else if (name == "label") col_label = idx;
        else if (name == "split") col_split = idx;
    }
    if (col_text < 0) throw IngestError(1, "CSV header has no text column");
    auto cell = [&](int col) -> std::optional<std::string> {
        if (col < 0 || static_cast<std::size_t>(col) >= row.size() || row[col].empty()) {
            return std::nullopt;
        }
        return row[col];
    };
    while (true) {
        const std::size_t start_line = line + 1;
        if (!read_csv_row(in, row, line)) break;
        if (row.size() == 1 && row[0].empty()) continue; // blank line
        if (row.size() != header_size) {
            throw IngestError(start_line, "unexpected number of CSV fields");
        }
        RawRecord rec;
        rec.line = start_line;
        auto text = cell(col_text);
        if (!text) throw IngestError(start_line, "record has no text field");
        if (!is_valid_utf8(*text)) throw IngestError(start_line, "text is not valid UTF-8");
        rec.text = std::move(*text);
        rec.id = cell(col_id);
        rec.label = cell(col_label);
        rec.split = split_field(cell(col_split), start_line);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<RawRecord> read_jsonl(std::istream& in) {
    std::vector<RawRecord> records;
    std::string line_text;
    std::size_t line = 0;
    while (std::getline(in, line_text)) {
        ++line;
        if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
        if (line_text.find_first_not_of(" \t") == std::string::npos) continue;
        records.push_back(parse_jsonl_record(line_text, line));
    }
    return records;
}

std::string csv_escape(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

Corpus ingest(std::istream& in, const IngestOptions& options) {
    const auto records =
        options.format == CorpusFormat::jsonl ? read_jsonl(in) : read_csv(in);
    Corpus corpus;
    std::unordered_set<std::string> seen_ids;
    std::unordered_set<std::string> seen_texts;
    for (std::size_t ordinal = 0; ordinal < records.size(); ++ordinal) {
        const auto& rec = records[ordinal];
        const std::string id = rec.id.value_or(std::to_string(ordinal + 1));
        if (!seen_ids.insert(id).second) throw IngestError(rec.line, "duplicate id '" + id + "'");
        auto text = normalize_text(rec.text);
        if (text.empty()) throw IngestError(rec.line, "text is empty after normalization");
        if (!seen_texts.insert(text).second) continue;
        Document doc;
        doc.id = id;
        doc.tokens = options.tokenizer(text);
        doc.text = std::move(text);
        doc.gold_class = rec.label;
        corpus.add(std::move(doc), rec.split);
    }
    return corpus;
}

std::string document_to_jsonl(const Document& doc, std::optional<Split> split,
                              std::optional<std::string_view> label_override) {
    json obj = json::object();
    obj["id"] = doc.id;
    obj["text"] = doc.text;
    if (label_override) obj["label"] = std::string(*label_override);
    else if (doc.gold_class) obj["label"] = *doc.gold_class;
    if (split) obj["split"] = std::string(to_string(*split));
    return obj.dump();
}

void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format) {
    if (format == CorpusFormat::jsonl) {
        for (const auto& doc : corpus.documents()) {
            out << document_to_jsonl(doc, corpus.split_of(doc.id)) << '\n';
        }
        return;
    }
    out << "id,text,label,split\n";
    for (const auto& doc : corpus.documents()) {
        const auto split = corpus.split_of(doc.id);
        out << csv_escape(doc.id) << ',' << csv_escape(doc.text) << ','
            << csv_escape(doc.gold_class.value_or("")) << ','
            << (split ? to_string(*split) : std::string_view{}) << '\n';
    }
}

} // namespace seedgrow
