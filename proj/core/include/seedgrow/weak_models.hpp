#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "seedgrow/corpus.hpp"
#include "seedgrow/index.hpp"

namespace seedgrow {

enum class Polarity : std::int8_t { negative = -1, positive = 1 };

constexpr int sign(Polarity p) noexcept { return static_cast<int>(p); }

/// A neighborhood labeling function: the top results of one More-Like-This
/// expansion, all voting `polarity`. Search scores are discarded.
struct WeakModel {
    std::size_t id = 0;
    Polarity polarity = Polarity::positive;
    std::size_t source_iteration = 1;
    std::vector<DocId> member_ids; // rank order, at most top_k

    bool operator==(const WeakModel&) const = default;
};

struct WeakModelOptions {
    std::size_t top_k = 50;
    MltConfig mlt;
    Bm25Params bm25;
};

/// Builds the (+1, -1) pair for one iteration from that iteration's new positive
/// and negative verdicts. An empty side yields a model with no members so the
/// model count stays 2 per iteration. `labeled` docs are never members.
std::pair<WeakModel, WeakModel> make_weak_models(std::span<const Document* const> new_pos,
                                                 std::span<const Document* const> new_neg,
                                                 const InvertedIndex& index, const IdSet& labeled,
                                                 std::size_t iteration, std::size_t first_id,
                                                 const WeakModelOptions& options = {});

struct MatrixEntry {
    std::uint32_t col = 0;
    std::int8_t value = 0; // -1 or +1

    bool operator==(const MatrixEntry&) const = default;
};

/// Sparse m x n vote matrix over {-1, 0, +1}; absent entries abstain.
/// Rows are documents covered by at least one model, in doc id order.
class LabelMatrix {
public:
    LabelMatrix() = default;
    explicit LabelMatrix(std::size_t cols) : n_(cols) {}

    std::size_t rows() const noexcept { return row_ids_.size(); }
    std::size_t cols() const noexcept { return n_; }
    std::size_t nonzeros() const noexcept;
    bool empty() const noexcept { return rows() == 0 || cols() == 0; }

    const DocId& row_id(std::size_t row) const { return row_ids_[row]; }
    std::span<const DocId> row_ids() const noexcept { return row_ids_; }
    std::optional<std::size_t> row_of(std::string_view id) const;
    /// Non-abstaining entries of a row, sorted by column.
    std::span<const MatrixEntry> row(std::size_t r) const { return entries_[r]; }
    /// Dense value at (row, col); 0 when abstaining.
    int at(std::size_t r, std::size_t c) const;
    /// Model id of each column.
    std::span<const std::size_t> col_ids() const noexcept { return col_ids_; }

    /// Appends a row from (column, value) pairs; columns must be < cols().
    void add_row(DocId id, std::vector<MatrixEntry> entries);
    void set_col_ids(std::vector<std::size_t> ids);

    /// Returns a copy with every vote negated.
    LabelMatrix negated() const;

    bool operator==(const LabelMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<DocId> row_ids_;
    std::vector<std::vector<MatrixEntry>> entries_;
    std::unordered_map<DocId, std::size_t> row_index_;
    std::vector<std::size_t> col_ids_;
};

/// Builds the label matrix: column j is models[j]; a row exists for every pool doc
/// that at least one model votes on. Opposite votes on one doc are kept (conflicts
/// are what the label model resolves). Throws ConfigError if a member is outside `pool`.
LabelMatrix assemble(std::span<const WeakModel> models, const IdSet& pool);

/// Fraction of non-abstaining cells. Throws NumericError("undefined density") on m*n == 0.
double density(const LabelMatrix& matrix);

/// Sparse triplet export, one {"row": doc id, "col": model id, "value": +-1} per line.
void write_triplets(std::ostream& out, const LabelMatrix& matrix);
/// Reads a triplet file back; columns are ordered by model id, rows by doc id.
/// `cols` forces the column count (to keep trailing all-abstain models).
LabelMatrix read_triplets(std::istream& in, std::optional<std::size_t> cols = std::nullopt);

} // namespace seedgrow
