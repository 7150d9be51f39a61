#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seedgrow/ranked_list.hpp"
#include "seedgrow/weak_models.hpp"

namespace seedgrow {

// Generative model over votes and latent labels y_i in {-1, +1}:
//
//   p(L, y) ~ exp( sum_i sum_j theta_j * L_ij * y_i )
//
// with one accuracy weight per weak model. The abstention pattern is taken as
// given, so only the sign of a non-abstaining vote is random. Training minimizes
// the mean (per row) negative log marginal likelihood -log sum_y p(L, y) plus
// l2 * |theta|^2, alternating Gibbs sweeps that estimate the two expectations of
// the gradient with per-row SGD steps:
//
//   d/dtheta_j = mean_i ( E[L_ij y_i | L_i] - E_model[L_ij y_i] ) - 2 l2 theta_j

struct LabelModelConfig {
    std::size_t epochs = 50;
    double step_size = 0.01;
    std::size_t gibbs_samples = 100; // sweeps per SGD step
    std::size_t burn_in = 10;
    std::uint64_t seed = 0;
    double l2 = 1e-4;
    double init_theta = 0.7;
    bool exact = false; // exact per-row expectations instead of Gibbs estimates
};

struct LabelModelParams {
    std::vector<double> theta;
    LabelModelConfig config;
};

/// Probabilistic labels for covered documents; everything else scores 0.
struct ProbLabels {
    std::unordered_map<DocId, double> scores;

    double score(std::string_view id) const {
        const auto it = scores.find(std::string(id));
        return it == scores.end() ? 0.0 : it->second;
    }
    std::size_t size() const noexcept { return scores.size(); }
};

/// Share of +1 votes among non-abstaining votes; 0.5 for all-abstain rows.
ProbLabels majority_vote(const LabelMatrix& matrix);

/// Fits theta. Deterministic for a given (matrix, config). Throws NumericError on
/// an empty matrix or a non-finite update.
LabelModelParams train(const LabelMatrix& matrix, const LabelModelConfig& config = {});

/// Closed-form posterior p(y_i = +1 | L_i) = logistic(2 * sum_j theta_j L_ij).
ProbLabels posterior(const LabelMatrix& matrix, std::span<const double> theta);
ProbLabels posterior(const LabelMatrix& matrix, const LabelModelParams& params);

/// Posterior marginals estimated from a Gibbs chain over y with votes clamped.
ProbLabels gibbs_posterior(const LabelMatrix& matrix, std::span<const double> theta,
                           std::size_t samples, std::size_t burn_in, std::uint64_t seed);

/// Exact gradient of the training objective (the quantity SGD ascends).
std::vector<double> exact_gradient(const LabelMatrix& matrix, std::span<const double> theta,
                                   double l2 = 0.0);

/// The same gradient with both expectations estimated by Gibbs sampling: one chain
/// with votes clamped to the data and one free-running chain over (votes, y).
std::vector<double> gibbs_gradient(const LabelMatrix& matrix, std::span<const double> theta,
                                   double l2, std::size_t samples, std::size_t burn_in,
                                   std::uint64_t seed);

/// Orders docs by (score desc, id asc), skipping `exclude`. Low scores are kept;
/// this ranks, it does not threshold. Uncovered docs are not enumerated.
RankedList rank(const ProbLabels& labels, const IdSet& exclude, std::size_t limit);

/// When to fall back to majority vote: very sparse or very dense matrices, or too
/// few models to identify accuracies.
struct DenoisePolicy {
    double sparse_below = 0.05;
    double dense_above = 0.95;
    std::size_t min_models = 4;
};

enum class Denoiser { majority_vote, generative };

std::string_view to_string(Denoiser d) noexcept;

Denoiser choose_denoiser(const LabelMatrix& matrix, const DenoisePolicy& policy);

struct Denoised {
    ProbLabels labels;
    Denoiser used = Denoiser::majority_vote;
    std::optional<LabelModelParams> params;
};

/// Policy dispatch: majority vote or train + posterior. Empty matrix -> no labels.
Denoised denoise(const LabelMatrix& matrix, const DenoisePolicy& policy,
                 const LabelModelConfig& config);

/// {"theta": [...], "config": {...}, "seed": ...}
std::string params_to_json(const LabelModelParams& params);
LabelModelParams params_from_json(std::string_view text);

} // namespace seedgrow
