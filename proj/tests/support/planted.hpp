#pragma once

// Label matrices drawn from the generative model with known accuracies, plus
// brute-force references for the label model: full enumeration of (votes, y)
// per row for the gradient, and a pairwise AUC.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "seedgrow/label_model.hpp"
#include "seedgrow/random.hpp"
#include "seedgrow/weak_models.hpp"

namespace sgtest {

using namespace seedgrow;

struct Planted {
    LabelMatrix matrix;
    std::vector<int> labels; // per row, +1 / -1
};

/// Each row: y uniform; column j abstains with prob `abstain`, otherwise votes y
/// with prob acc[j] and -y otherwise. Rows with no vote are dropped.
inline Planted make_planted(const std::vector<double>& acc, std::size_t rows, double abstain,
                            std::uint64_t seed) {
    Rng rng(seed);
    Planted p{LabelMatrix(acc.size()), {}};
    for (std::size_t i = 0; i < rows; ++i) {
        const int y = uniform01(rng) < 0.5 ? 1 : -1;
        std::vector<MatrixEntry> e;
        for (std::size_t j = 0; j < acc.size(); ++j) {
            if (uniform01(rng) < abstain) continue;
            const int v = uniform01(rng) < acc[j] ? y : -y;
            e.push_back({static_cast<std::uint32_t>(j), static_cast<std::int8_t>(v)});
        }
        if (e.empty()) continue;
        char id[32];
        std::snprintf(id, sizeof id, "r%06zu", i);
        p.matrix.add_row(id, std::move(e));
        p.labels.push_back(y);
    }
    std::vector<std::size_t> ids(acc.size());
    for (std::size_t j = 0; j < ids.size(); ++j) ids[j] = j;
    p.matrix.set_col_ids(ids);
    return p;
}

/// Random sparse matrix with entries in {-1, 0, +1}.
inline LabelMatrix random_matrix(std::size_t rows, std::size_t cols, double fill, Rng& rng) {
    LabelMatrix m(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<MatrixEntry> e;
        for (std::size_t j = 0; j < cols; ++j) {
            if (uniform01(rng) >= fill) continue;
            e.push_back({static_cast<std::uint32_t>(j), static_cast<std::int8_t>(uniform01(rng) < 0.5 ? 1 : -1)});
        }
        char id[32];
        std::snprintf(id, sizeof id, "x%04zu", i);
        m.add_row(id, std::move(e));
    }
    return m;
}

/// Gradient of the mean log marginal likelihood by enumerating every
/// configuration of (votes on the row's non-abstaining columns, y).
inline std::vector<double> enumerated_gradient(const LabelMatrix& m, const std::vector<double>& theta,
                                               double l2) {
    std::vector<double> grad(theta.size(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        const std::size_t k = row.size();
        // Data term: E[y | votes] * vote, enumerating y.
        double s = 0;
        for (const auto& e : row) s += theta[e.col] * e.value;
        const double wp = std::exp(s), wn = std::exp(-s);
        const double ey = (wp - wn) / (wp + wn);
        // Model term: E[vote_j * y] over the joint, enumerating all 2^(k+1) states.
        std::vector<double> model(k, 0.0);
        double z = 0;
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
            for (int y : {-1, 1}) {
                double pot = 0;
                for (std::size_t a = 0; a < k; ++a) {
                    const int v = (mask >> a) & 1u ? 1 : -1;
                    pot += theta[row[a].col] * v * y;
                }
                const double w = std::exp(pot);
                z += w;
                for (std::size_t a = 0; a < k; ++a) {
                    const int v = (mask >> a) & 1u ? 1 : -1;
                    model[a] += w * v * y;
                }
            }
        }
        for (std::size_t a = 0; a < k; ++a) grad[row[a].col] += row[a].value * ey - model[a] / z;
    }
    for (std::size_t j = 0; j < theta.size(); ++j)
        grad[j] = grad[j] / static_cast<double>(m.rows()) - 2.0 * l2 * theta[j];
    return grad;
}

/// Probability that a random positive outscores a random negative (ties count half).
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0, pairs = 0;
    for (std::size_t a = 0; a < scores.size(); ++a) {
        if (labels[a] != 1) continue;
        for (std::size_t b = 0; b < scores.size(); ++b) {
            if (labels[b] == 1) continue;
            pairs += 1;
            if (scores[a] > scores[b]) wins += 1;
            else if (scores[a] == scores[b]) wins += 0.5;
        }
    }
    return pairs > 0 ? wins / pairs : 0.5;
}

inline std::vector<double> row_scores(const ProbLabels& labels, const LabelMatrix& m) {
    std::vector<double> out;
    for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(labels.score(m.row_id(i)));
    return out;
}

} // namespace sgtest
