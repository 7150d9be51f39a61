#include "seedgrow/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "seedgrow/error.hpp"
#include "seedgrow/random.hpp"

namespace seedgrow {

namespace {

std::string class_name(std::size_t c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "class%02zu", c);
    return buf;
}

// Pronounceable pseudo-words keep token strings readable in dumps.
std::string word(std::string_view prefix, std::size_t a, std::size_t b) {
    static constexpr const char* kSyllables[] = {"ka", "lo", "mi", "ru", "te", "zo", "pa", "ne",
                                                 "vi", "su", "do", "ga", "fe", "ho", "bi", "xu"};
    std::string out(prefix);
    std::size_t x = a * 977 + b;
    do {
        out += kSyllables[x % 16];
        x /= 16;
    } while (x > 0);
    return out;
}

// Zipf(1) draw over [0, n) by inverse CDF on precomputed cumulative weights.
std::size_t zipf_draw(const std::vector<double>& cdf, Rng& rng) {
    const double u = uniform01(rng) * cdf.back();
    return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

} // namespace

SyntheticCorpus make_synthetic(const SyntheticConfig& cfg) {
    if (cfg.classes < 2 || cfg.min_size < 1 || cfg.max_size < cfg.min_size || cfg.subtopics < 1 ||
        cfg.min_length < 1 || cfg.max_length < cfg.min_length || cfg.noise_words < 1)
        throw ConfigError("invalid synthetic corpus configuration");

    Rng rng(mix_seed(cfg.seed, stable_hash("synthetic")));
    const double s = std::log10(static_cast<double>(cfg.max_size) / cfg.min_size) /
                     std::log10(static_cast<double>(cfg.classes));

    std::vector<double> noise_cdf(cfg.noise_words);
    double acc = 0.0;
    for (std::size_t i = 0; i < cfg.noise_words; ++i) noise_cdf[i] = acc += 1.0 / (i + 1.0);

    SyntheticCorpus out;
    struct Pending {
        std::string text;
        std::size_t cls;
    };
    std::vector<Pending> docs;
    for (std::size_t c = 0; c < cfg.classes; ++c) {
        const auto size = static_cast<std::size_t>(
            std::llround(cfg.max_size / std::pow(static_cast<double>(c + 1), s)));
        out.class_sizes.push_back(size);
        for (std::size_t d = 0; d < size; ++d) {
            const std::size_t topic = uniform_below(rng, cfg.subtopics);
            const std::size_t len =
                cfg.min_length + uniform_below(rng, cfg.max_length - cfg.min_length + 1);
            std::string text;
            for (std::size_t k = 0; k < len; ++k) {
                std::string w;
                if (uniform01(rng) < cfg.noise_share) {
                    w = word("n", 0, zipf_draw(noise_cdf, rng));
                } else if (uniform01(rng) < cfg.general_share) {
                    w = word("g", c, uniform_below(rng, cfg.general_words));
                } else {
                    w = word("t", c * cfg.subtopics + topic, uniform_below(rng, cfg.subtopic_words));
                }
                if (!text.empty()) text += ' ';
                text += w;
            }
            docs.push_back({std::move(text), c});
        }
    }

    // Interleave classes so document ids carry no class information.
    fisher_yates(docs, rng);
    std::vector<std::vector<DocId>> members(cfg.classes);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "d%06zu", i);
        Document doc;
        doc.id = buf;
        doc.tokens = tokenize(docs[i].text);
        doc.text = std::move(docs[i].text);
        doc.gold_class = class_name(docs[i].cls);
        members[docs[i].cls].push_back(doc.id);
        out.corpus.add(std::move(doc), Split::pool);
    }

    for (std::size_t c = 0; c < cfg.classes; ++c) {
        auto ids = members[c];
        fisher_yates(ids, rng);
        ClassTask task{class_name(c), {}};
        const std::size_t seeds = std::min(cfg.seeds_per_class, ids.size());
        const auto tests = std::min(ids.size() - seeds,
                                    static_cast<std::size_t>(std::llround(cfg.test_fraction * ids.size())));
        for (std::size_t i = 0; i < seeds; ++i) {
            out.corpus.assign(ids[i], Split::seed);
            task.positive_seed_ids.insert(ids[i]);
        }
        for (std::size_t i = seeds; i < seeds + tests; ++i) out.corpus.assign(ids[i], Split::test);
        out.tasks.push_back(std::move(task));
    }
    return out;
}

} // namespace seedgrow
