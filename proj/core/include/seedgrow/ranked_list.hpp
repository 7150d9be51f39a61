#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "seedgrow/corpus.hpp"

namespace seedgrow {

struct ScoredDoc {
    DocId id;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

/// Canonical ranking order: score descending, then doc id ascending.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

/// Ordered (doc id, score) sequence without duplicate ids.
struct RankedList {
    std::vector<ScoredDoc> entries;

    std::size_t size() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }
    const ScoredDoc& operator[](std::size_t i) const { return entries[i]; }
    auto begin() const noexcept { return entries.begin(); }
    auto end() const noexcept { return entries.end(); }

    std::vector<DocId> ids() const {
        std::vector<DocId> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.id);
        return out;
    }

    bool operator==(const RankedList&) const = default;
};

/// Sorts into canonical order and keeps the first `limit` entries.
inline RankedList make_ranked(std::vector<ScoredDoc> entries, std::size_t limit) {
    if (limit < entries.size()) {
        std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(limit),
                          entries.end(), ranks_before);
        entries.resize(limit);
    } else {
        std::sort(entries.begin(), entries.end(), ranks_before);
    }
    return RankedList{std::move(entries)};
}

} // namespace seedgrow
