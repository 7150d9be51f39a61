#pragma once

#include <unistd.h>

#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seedgrow/corpus.hpp"
#include "seedgrow/error.hpp"
#include "seedgrow/oracle.hpp"

namespace sgtest {

using namespace seedgrow;

inline Document make_doc(std::string id, std::string text, std::optional<std::string> gold = std::nullopt) {
    Document d;
    d.id = std::move(id);
    d.tokens = tokenize(text);
    d.text = std::move(text);
    d.gold_class = std::move(gold);
    return d;
}

/// Says no to everything; counts what it was shown.
class AlwaysNegative final : public Oracle {
public:
    BatchVerdict judge(const OracleRequest& r) override {
        ++calls;
        BatchVerdict v;
        for (const auto* d : r.batch) {
            v.assignments[d->id] = Verdict::negative;
            ++shown;
        }
        batch_sizes.push_back(r.batch.size());
        return v;
    }
    std::size_t calls = 0;
    std::size_t shown = 0;
    std::vector<std::size_t> batch_sizes;
};

/// Fails on the n-th call (1-based), otherwise delegates.
class FailingOracle final : public Oracle {
public:
    FailingOracle(Oracle& inner, std::size_t fail_at) : inner_(inner), fail_at_(fail_at) {}
    BatchVerdict judge(const OracleRequest& r) override {
        if (++calls_ == fail_at_) throw OracleError("labeler went away");
        return inner_.judge(r);
    }

private:
    Oracle& inner_;
    std::size_t fail_at_;
    std::size_t calls_ = 0;
};

/// Two planted topics: "red" docs talk about fruit, "blue" docs about the sea.
inline Corpus two_cluster_corpus(std::size_t per_class = 40, std::size_t seeds = 3, unsigned seed = 7) {
    const std::vector<std::string> red = {"apple", "cherry", "berry", "plum", "orchard", "juice", "ripe", "sweet"};
    const std::vector<std::string> blue = {"ocean", "wave", "tide", "coral", "reef", "salt", "shore", "current"};
    const std::vector<std::string> shared = {"the", "a", "big", "small", "day", "good"};
    std::mt19937 rng(seed);
    Corpus c;
    std::size_t n = 0;
    for (std::size_t i = 0; i < per_class * 2; ++i) {
        const bool is_red = i % 2 == 0;
        const auto& vocab = is_red ? red : blue;
        std::string text;
        for (int k = 0; k < 6; ++k) {
            const auto& v = k % 3 == 2 ? shared : vocab;
            text += v[rng() % v.size()] + " ";
        }
        text += std::to_string(i); // keep texts unique
        char id[16];
        std::snprintf(id, sizeof id, "d%03zu", n++);
        const bool seed_doc = i / 2 < seeds;
        c.add(make_doc(id, text, is_red ? "red" : "blue"), seed_doc ? Split::seed : Split::pool);
    }
    return c;
}

inline ClassTask task_from_seeds(const Corpus& c, const std::string& cls) {
    ClassTask t{cls, {}};
    for (const auto& id : c.partition(Split::seed))
        if (c.at(id).gold_class == cls) t.positive_seed_ids.insert(id);
    return t;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("seedgrow_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace sgtest
