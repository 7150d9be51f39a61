#include "seedgrow/weak_models.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

#include "json.hpp"
#include "seedgrow/error.hpp"

namespace seedgrow {

using nlohmann::json;

namespace {

WeakModel expand(std::span<const Document* const> docs, Polarity polarity,
                 const InvertedIndex& index, const IdSet& labeled, std::size_t iteration,
                 std::size_t id, const WeakModelOptions& options) {
    WeakModel model;
    model.id = id;
    model.polarity = polarity;
    model.source_iteration = iteration;
    if (docs.empty()) return model;
    const auto query = build_mlt_query(docs, index, options.mlt);
    const auto hits = search(query, index, labeled, options.top_k, options.bm25);
    model.member_ids = hits.ids();
    return model;
}

} // namespace

std::pair<WeakModel, WeakModel> make_weak_models(std::span<const Document* const> new_pos,
                                                 std::span<const Document* const> new_neg,
                                                 const InvertedIndex& index, const IdSet& labeled,
                                                 std::size_t iteration, std::size_t first_id,
                                                 const WeakModelOptions& options) {
    if (iteration < 1) throw ConfigError("weak models are built from iteration 1 on");
    if (options.top_k < 1) throw ConfigError("top_k must be at least 1");
    return {expand(new_pos, Polarity::positive, index, labeled, iteration, first_id, options),
            expand(new_neg, Polarity::negative, index, labeled, iteration, first_id + 1, options)};
}

std::size_t LabelMatrix::nonzeros() const noexcept {
    std::size_t total = 0;
    for (const auto& r : entries_) total += r.size();
    return total;
}

std::optional<std::size_t> LabelMatrix::row_of(std::string_view id) const {
    const auto it = row_index_.find(std::string(id));
    if (it == row_index_.end()) return std::nullopt;
    return it->second;
}

int LabelMatrix::at(std::size_t r, std::size_t c) const {
    const auto& row = entries_.at(r);
    const auto it = std::lower_bound(row.begin(), row.end(), c,
                                     [](const MatrixEntry& e, std::size_t col) { return e.col < col; });
    return (it != row.end() && it->col == c) ? it->value : 0;
}

void LabelMatrix::add_row(DocId id, std::vector<MatrixEntry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const MatrixEntry& a, const MatrixEntry& b) { return a.col < b.col; });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].col >= n_) throw ConfigError("matrix column out of range");
        if (entries[i].value != 1 && entries[i].value != -1) throw ConfigError("matrix votes must be +-1");
        if (i > 0 && entries[i].col == entries[i - 1].col) throw ConfigError("duplicate matrix cell");
    }
    if (row_index_.contains(id)) throw ConfigError("duplicate matrix row '" + id + "'");
    row_index_.emplace(id, row_ids_.size());
    row_ids_.push_back(std::move(id));
    entries_.push_back(std::move(entries));
}

void LabelMatrix::set_col_ids(std::vector<std::size_t> ids) {
    if (ids.size() != n_) throw ConfigError("column id count does not match matrix width");
    col_ids_ = std::move(ids);
}

LabelMatrix LabelMatrix::negated() const {
    LabelMatrix out = *this;
    for (auto& row : out.entries_) {
        for (auto& e : row) e.value = static_cast<std::int8_t>(-e.value);
    }
    return out;
}

LabelMatrix assemble(std::span<const WeakModel> models, const IdSet& pool) {
    LabelMatrix matrix(models.size());
    std::vector<std::size_t> col_ids;
    std::map<DocId, std::vector<MatrixEntry>> rows; // doc id order
    for (std::size_t j = 0; j < models.size(); ++j) {
        const auto& model = models[j];
        col_ids.push_back(model.id);
        for (const auto& id : model.member_ids) {
            if (!pool.contains(id)) {
                throw ConfigError("weak model " + std::to_string(model.id) + " member '" + id +
                                  "' is outside the pool");
            }
            rows[id].push_back({static_cast<std::uint32_t>(j), static_cast<std::int8_t>(sign(model.polarity))});
        }
    }
    matrix.set_col_ids(std::move(col_ids));
    for (auto& [id, entries] : rows) matrix.add_row(id, std::move(entries));
    return matrix;
}

double density(const LabelMatrix& matrix) {
    if (matrix.rows() == 0 || matrix.cols() == 0) throw NumericError("undefined density");
    return static_cast<double>(matrix.nonzeros()) /
           (static_cast<double>(matrix.rows()) * static_cast<double>(matrix.cols()));
}

void write_triplets(std::ostream& out, const LabelMatrix& matrix) {
    const auto col_ids = matrix.col_ids();
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (const auto& e : matrix.row(r)) {
            const std::size_t col = col_ids.empty() ? e.col : col_ids[e.col];
            out << json{{"row", matrix.row_id(r)}, {"col", col}, {"value", e.value}}.dump() << '\n';
        }
    }
}

LabelMatrix read_triplets(std::istream& in, std::optional<std::size_t> cols) {
    std::map<DocId, std::vector<std::pair<std::size_t, int>>> cells;
    std::set<std::size_t> model_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto obj = json::parse(line);
            const auto col = obj.at("col").get<std::size_t>();
            const auto value = obj.at("value").get<int>();
            if (value != 1 && value != -1) throw IngestError(line_no, "vote must be +1 or -1");
            cells[obj.at("row").get<std::string>()].emplace_back(col, value);
            model_ids.insert(col);
        } catch (const json::exception& e) {
            throw IngestError(line_no, std::string("malformed triplet: ") + e.what());
        }
    }
    std::vector<std::size_t> ids;
    if (cols) {
        for (std::size_t j = 0; j < *cols; ++j) ids.push_back(j);
        if (!model_ids.empty() && *model_ids.rbegin() >= *cols) {
            throw ConfigError("triplet column exceeds requested width");
        }
    } else {
        ids.assign(model_ids.begin(), model_ids.end());
    }
    std::map<std::size_t, std::uint32_t> col_of;
    for (std::size_t j = 0; j < ids.size(); ++j) col_of[ids[j]] = static_cast<std::uint32_t>(j);
    LabelMatrix matrix(ids.size());
    matrix.set_col_ids(ids);
    for (auto& [id, list] : cells) {
        std::vector<MatrixEntry> entries;
        for (auto [col, value] : list) entries.push_back({col_of.at(col), static_cast<std::int8_t>(value)});
        matrix.add_row(id, std::move(entries));
    }
    return matrix;
}

} // namespace seedgrow
