#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "seedgrow/corpus.hpp"

namespace seedgrow {

/// Skewed multi-class corpus with planted structure. Class r (1-based) has
/// round(max_size / r^s) docs where s = log10(max_size / min_size) / log10(classes),
/// so sizes run from max_size down to min_size. Each class owns a vocabulary core
/// split into subtopics; every doc also draws a share of tokens from a vocabulary
/// shared by all classes.
struct SyntheticConfig {
    std::size_t classes = 10;
    std::size_t max_size = 1000;
    std::size_t min_size = 50;
    std::size_t subtopics = 4;
    std::size_t general_words = 12;  // per class, used by every subtopic
    std::size_t subtopic_words = 15; // per subtopic
    double general_share = 0.2;      // of class tokens
    std::size_t noise_words = 400;
    double noise_share = 0.3;        // of all tokens
    std::size_t min_length = 4; // sentence-length docs keep classes from being trivially separable
    std::size_t max_length = 9;
    std::size_t seeds_per_class = 10;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct SyntheticCorpus {
    Corpus corpus;
    std::vector<ClassTask> tasks; // one per class, seeds in the seed partition
    std::vector<std::size_t> class_sizes;
};

SyntheticCorpus make_synthetic(const SyntheticConfig& config = {});

} // namespace seedgrow
