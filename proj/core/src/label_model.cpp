#include "seedgrow/label_model.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"
#include "seedgrow/error.hpp"
#include "seedgrow/random.hpp"

namespace seedgrow {

using nlohmann::json;

namespace {

double logistic(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

int draw_sign(Rng& rng, double p_positive) { return uniform01(rng) < p_positive ? 1 : -1; }

struct ColumnGroups {
    std::vector<std::size_t> of;        // column -> group
    std::vector<std::size_t> first_col; // group -> representative column
    std::size_t count = 0;
};

ColumnGroups tie_identical_columns(const LabelMatrix& matrix) {
    std::vector<std::vector<std::pair<std::size_t, int>>> cols(matrix.cols());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (const auto& e : matrix.row(i)) cols[e.col].emplace_back(i, e.value);
    }
    ColumnGroups groups;
    groups.of.resize(matrix.cols());
    std::map<std::vector<std::pair<std::size_t, int>>, std::size_t> seen;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto [it, inserted] = seen.try_emplace(std::move(cols[c]), groups.count);
        if (inserted) {
            groups.first_col.push_back(c);
            ++groups.count;
        }
        groups.of[c] = it->second;
    }
    return groups;
}

double row_potential(std::span<const MatrixEntry> row, std::span<const double> theta) {
    double s = 0.0;
    for (const auto& e : row) s += theta[e.col] * e.value;
    return s;
}

void check_dims(const LabelMatrix& matrix, std::span<const double> theta) {
    if (theta.size() != matrix.cols()) {
        throw NumericError("theta has " + std::to_string(theta.size()) + " weights but matrix has " +
                           std::to_string(matrix.cols()) + " columns");
    }
}

// Persistent state of the free-running chain: a latent label per row and a
// sampled sign for every non-abstaining cell.
struct FreeChain {
    std::vector<int> y;
    std::vector<std::vector<int>> votes;

    template <typename RowSource>
    FreeChain(const RowSource& rows, std::size_t m, Rng& rng) : y(m), votes(m) {
        for (std::size_t i = 0; i < m; ++i) {
            y[i] = draw_sign(rng, 0.5);
            votes[i].resize(rows(i).size());
            for (auto& v : votes[i]) v = draw_sign(rng, 0.5);
        }
    }

    FreeChain(const LabelMatrix& matrix, Rng& rng)
        : FreeChain([&](std::size_t i) { return matrix.row(i); }, matrix.rows(), rng) {}

    FreeChain(const std::vector<std::vector<MatrixEntry>>& rows, Rng& rng)
        : FreeChain([&](std::size_t i) { return std::span<const MatrixEntry>(rows[i]); }, rows.size(), rng) {}

    // One Gibbs sweep over row i: y | votes, then votes | y.
    void sweep(std::size_t i, std::span<const MatrixEntry> row, std::span<const double> theta,
               Rng& rng) {
        double s = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) s += theta[row[k].col] * votes[i][k];
        y[i] = draw_sign(rng, logistic(2.0 * s));
        for (std::size_t k = 0; k < row.size(); ++k) {
            const double agree = logistic(2.0 * theta[row[k].col]);
            votes[i][k] = uniform01(rng) < agree ? y[i] : -y[i];
        }
    }
};

} // namespace

std::string_view to_string(Denoiser d) noexcept {
    return d == Denoiser::generative ? "generative" : "majority_vote";
}

ProbLabels majority_vote(const LabelMatrix& matrix) {
    ProbLabels out;
    out.scores.reserve(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        std::size_t pos = 0;
        std::size_t neg = 0;
        for (const auto& e : matrix.row(i)) (e.value > 0 ? pos : neg) += 1;
        out.scores[matrix.row_id(i)] =
            pos + neg == 0 ? 0.5 : static_cast<double>(pos) / static_cast<double>(pos + neg);
    }
    return out;
}

ProbLabels posterior(const LabelMatrix& matrix, std::span<const double> theta) {
    check_dims(matrix, theta);
    ProbLabels out;
    out.scores.reserve(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        out.scores[matrix.row_id(i)] = logistic(2.0 * row_potential(matrix.row(i), theta));
    }
    return out;
}

ProbLabels posterior(const LabelMatrix& matrix, const LabelModelParams& params) {
    return posterior(matrix, params.theta);
}

ProbLabels gibbs_posterior(const LabelMatrix& matrix, std::span<const double> theta,
                           std::size_t samples, std::size_t burn_in, std::uint64_t seed) {
    check_dims(matrix, theta);
    if (samples == 0) throw NumericError("gibbs_posterior needs at least one sample");
    Rng rng(seed);
    std::vector<int> y(matrix.rows());
    for (auto& v : y) v = draw_sign(rng, 0.5);
    std::vector<std::size_t> positives(matrix.rows(), 0);
    for (std::size_t sweep = 0; sweep < burn_in + samples; ++sweep) {
        for (std::size_t i = 0; i < matrix.rows(); ++i) {
            y[i] = draw_sign(rng, logistic(2.0 * row_potential(matrix.row(i), theta)));
            if (sweep >= burn_in && y[i] > 0) ++positives[i];
        }
    }
    ProbLabels out;
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        out.scores[matrix.row_id(i)] =
            static_cast<double>(positives[i]) / static_cast<double>(samples);
    }
    return out;
}

std::vector<double> exact_gradient(const LabelMatrix& matrix, std::span<const double> theta,
                                   double l2) {
    check_dims(matrix, theta);
    if (matrix.rows() == 0) throw NumericError("gradient of an empty matrix");
    std::vector<double> grad(theta.size(), 0.0);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        const auto row = matrix.row(i);
        const double t = std::tanh(row_potential(row, theta));
        for (const auto& e : row) grad[e.col] += e.value * t - std::tanh(theta[e.col]);
    }
    const auto m = static_cast<double>(matrix.rows());
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = grad[j] / m - 2.0 * l2 * theta[j];
    return grad;
}

std::vector<double> gibbs_gradient(const LabelMatrix& matrix, std::span<const double> theta,
                                   double l2, std::size_t samples, std::size_t burn_in,
                                   std::uint64_t seed) {
    check_dims(matrix, theta);
    if (matrix.rows() == 0) throw NumericError("gradient of an empty matrix");
    if (samples == 0) throw NumericError("gibbs_gradient needs at least one sample");
    Rng rng(seed);
    FreeChain free_chain(matrix, rng);
    std::vector<double> data(theta.size(), 0.0);
    std::vector<double> model(theta.size(), 0.0);
    for (std::size_t sweep = 0; sweep < burn_in + samples; ++sweep) {
        const bool keep = sweep >= burn_in;
        for (std::size_t i = 0; i < matrix.rows(); ++i) {
            const auto row = matrix.row(i);
            const int y = draw_sign(rng, logistic(2.0 * row_potential(row, theta)));
            free_chain.sweep(i, row, theta, rng);
            if (!keep) continue;
            for (std::size_t k = 0; k < row.size(); ++k) {
                data[row[k].col] += row[k].value * y;
                model[row[k].col] += free_chain.votes[i][k] * free_chain.y[i];
            }
        }
    }
    const double scale = static_cast<double>(samples) * static_cast<double>(matrix.rows());
    std::vector<double> grad(theta.size());
    for (std::size_t j = 0; j < grad.size(); ++j) {
        grad[j] = (data[j] - model[j]) / scale - 2.0 * l2 * theta[j];
    }
    return grad;
}

LabelModelParams train(const LabelMatrix& matrix, const LabelModelConfig& config) {
    if (matrix.rows() == 0 || matrix.cols() == 0) {
        throw NumericError("cannot train a label model on an empty matrix");
    }
    if (!config.exact && config.gibbs_samples == 0) {
        throw NumericError("gibbs_samples must be at least 1");
    }
    const std::size_t m = matrix.rows();

    // Identical columns share one weight: the objective is symmetric in them and
    // strictly concave along their difference, so the optimum has them equal.
    const auto groups = tie_identical_columns(matrix);
    const std::size_t n = groups.count;
    std::vector<std::vector<MatrixEntry>> rows(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (const auto& e : matrix.row(i)) {
            rows[i].push_back({static_cast<std::uint32_t>(groups.of[e.col]), e.value});
        }
    }

    std::vector<double> theta(n, config.init_theta);
    Rng rng(config.seed);
    FreeChain free_chain(rows, rng);
    if (!config.exact) {
        for (std::size_t sweep = 0; sweep < config.burn_in; ++sweep) {
            for (std::size_t i = 0; i < m; ++i) free_chain.sweep(i, rows[i], theta, rng);
        }
    }

    // l2 shrinkage touches every weight each step; applied lazily per weight.
    const double decay = 1.0 - 2.0 * config.step_size * config.l2;
    std::vector<std::size_t> decayed_to(n, 0);
    std::size_t step = 0;
    auto catch_up = [&](std::size_t j) {
        if (decayed_to[j] < step) {
            theta[j] *= std::pow(decay, static_cast<double>(step - decayed_to[j]));
            decayed_to[j] = step;
        }
    };

    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::vector<double> data;
    std::vector<double> model;
    const double samples = static_cast<double>(config.gibbs_samples);
    // iterate averaging over the second half of the epochs
    const std::size_t average_from = config.epochs / 2;
    std::vector<double> theta_sum(n, 0.0);
    std::size_t snapshots = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        fisher_yates(order, rng);
        for (const auto i : order) {
            const auto& row = rows[i];
            for (const auto& e : row) catch_up(e.col);
            data.assign(row.size(), 0.0);
            model.assign(row.size(), 0.0);
            if (config.exact) {
                const double t = std::tanh(row_potential(row, theta));
                for (std::size_t k = 0; k < row.size(); ++k) {
                    data[k] = row[k].value * t;
                    model[k] = std::tanh(theta[row[k].col]);
                }
            } else {
                const double p_pos = logistic(2.0 * row_potential(row, theta));
                for (std::size_t s = 0; s < config.gibbs_samples; ++s) {
                    const int y = draw_sign(rng, p_pos);
                    free_chain.sweep(i, row, theta, rng);
                    for (std::size_t k = 0; k < row.size(); ++k) {
                        data[k] += row[k].value * y;
                        model[k] += free_chain.votes[i][k] * free_chain.y[i];
                    }
                }
                for (std::size_t k = 0; k < row.size(); ++k) {
                    data[k] /= samples;
                    model[k] /= samples;
                }
            }
            // a tied weight may appear more than once in a row; decay it once
            for (const auto& e : row) {
                if (decayed_to[e.col] == step) {
                    theta[e.col] *= decay;
                    decayed_to[e.col] = step + 1;
                }
            }
            for (std::size_t k = 0; k < row.size(); ++k) {
                const auto j = row[k].col;
                const double g = data[k] - model[k];
                theta[j] += config.step_size * g;
                if (!std::isfinite(g) || !std::isfinite(theta[j])) {
                    std::ostringstream msg;
                    msg << "non-finite label model update: epoch " << epoch << ", row '"
                        << matrix.row_id(i) << "', column " << groups.first_col[j] << ", gradient "
                        << g << ", theta " << theta[j];
                    throw NumericError(msg.str());
                }
            }
            ++step;
        }
        if (epoch >= average_from) {
            for (std::size_t j = 0; j < n; ++j) {
                catch_up(j);
                theta_sum[j] += theta[j];
            }
            ++snapshots;
        }
    }
    for (std::size_t j = 0; j < n; ++j) catch_up(j);

    LabelModelParams params;
    params.config = config;
    params.theta.resize(matrix.cols());
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
        const auto g = groups.of[c];
        params.theta[c] = snapshots > 0 ? theta_sum[g] / static_cast<double>(snapshots) : theta[g];
    }
    return params;
}

RankedList rank(const ProbLabels& labels, const IdSet& exclude, std::size_t limit) {
    if (limit == 0) return {};
    std::vector<ScoredDoc> entries;
    entries.reserve(labels.size());
    for (const auto& [id, score] : labels.scores) {
        if (!exclude.contains(id)) entries.push_back({id, score});
    }
    return make_ranked(std::move(entries), limit);
}

Denoiser choose_denoiser(const LabelMatrix& matrix, const DenoisePolicy& policy) {
    if (matrix.empty() || matrix.cols() < policy.min_models) return Denoiser::majority_vote;
    const double d = density(matrix);
    if (d < policy.sparse_below || d > policy.dense_above) return Denoiser::majority_vote;
    return Denoiser::generative;
}

Denoised denoise(const LabelMatrix& matrix, const DenoisePolicy& policy,
                 const LabelModelConfig& config) {
    Denoised out;
    out.used = choose_denoiser(matrix, policy);
    if (out.used == Denoiser::majority_vote) {
        out.labels = majority_vote(matrix);
        return out;
    }
    out.params = train(matrix, config);
    out.labels = posterior(matrix, *out.params);
    return out;
}

std::string params_to_json(const LabelModelParams& params) {
    const auto& c = params.config;
    json out = {{"theta", params.theta},
                {"config",
                 {{"epochs", c.epochs},
                  {"step_size", c.step_size},
                  {"gibbs_samples", c.gibbs_samples},
                  {"burn_in", c.burn_in},
                  {"l2", c.l2},
                  {"init_theta", c.init_theta},
                  {"exact", c.exact}}},
                {"seed", c.seed}};
    return out.dump();
}

LabelModelParams params_from_json(std::string_view text) {
    LabelModelParams params;
    try {
        const auto in = json::parse(text);
        params.theta = in.at("theta").get<std::vector<double>>();
        const auto& c = in.at("config");
        auto& cfg = params.config;
        cfg.epochs = c.value("epochs", cfg.epochs);
        cfg.step_size = c.value("step_size", cfg.step_size);
        cfg.gibbs_samples = c.value("gibbs_samples", cfg.gibbs_samples);
        cfg.burn_in = c.value("burn_in", cfg.burn_in);
        cfg.l2 = c.value("l2", cfg.l2);
        cfg.init_theta = c.value("init_theta", cfg.init_theta);
        cfg.exact = c.value("exact", cfg.exact);
        cfg.seed = in.value("seed", cfg.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cannot read label model parameters: ") + e.what());
    }
    for (double t : params.theta) {
        if (!std::isfinite(t)) throw NumericError("label model parameters contain a non-finite weight");
    }
    return params;
}

} // namespace seedgrow
