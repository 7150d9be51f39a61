#include "seedgrow/expansion.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "seedgrow/error.hpp"
#include "seedgrow/random.hpp"

namespace seedgrow {

using nlohmann::json;

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
    case Strategy::random: return "random";
    case Strategy::i_mlt: return "i-mlt";
    case Strategy::i_dp: return "i-dp";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view s) noexcept {
    if (s == "random") return Strategy::random;
    if (s == "i-mlt" || s == "imlt" || s == "mlt") return Strategy::i_mlt;
    if (s == "i-dp" || s == "idp" || s == "dp") return Strategy::i_dp;
    return std::nullopt;
}

std::string_view to_string(RankingSource s) noexcept {
    switch (s) {
    case RankingSource::random: return "random";
    case RankingSource::mlt: return "mlt";
    case RankingSource::dp: return "dp";
    }
    return "?";
}

void ExpansionConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch size b must be >= 1");
    if (termination < batch_size) throw ConfigError("termination t must be >= batch size b");
    if (retrain_every < 1) throw ConfigError("retrain frequency f must be >= 1");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
}

namespace {

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

} // namespace

std::string expansion_config_to_json(const ExpansionConfig& c) {
    const auto& lm = c.label_model;
    const json j = {{"t", c.termination},
            {"b", c.batch_size},
            {"f", c.retrain_every},
            {"top_k", c.top_k},
            {"seed", c.seed},
            {"strategy", std::string(to_string(c.strategy))},
            {"k1", c.bm25.k1},
            {"bm25_b", c.bm25.b},
            {"max_query_terms", c.mlt.max_query_terms},
            {"min_term_freq", c.mlt.min_term_freq},
            {"min_doc_freq", c.mlt.min_doc_freq},
            {"label_model",
             {{"epochs", lm.epochs},
              {"step_size", lm.step_size},
              {"gibbs_samples", lm.gibbs_samples},
              {"burn_in", lm.burn_in},
              {"seed", lm.seed},
              {"l2", lm.l2},
              {"init_theta", lm.init_theta},
              {"exact", lm.exact}}},
            {"denoise",
             {{"sparse_below", c.denoise.sparse_below},
              {"dense_above", c.denoise.dense_above},
              {"min_models", c.denoise.min_models}}}};
    return j.dump();
}

ExpansionConfig expansion_config_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExpansionConfig c;
    try {
        read_opt(j, "t", c.termination);
        read_opt(j, "b", c.batch_size);
        read_opt(j, "f", c.retrain_every);
        read_opt(j, "top_k", c.top_k);
        read_opt(j, "seed", c.seed);
        read_opt(j, "k1", c.bm25.k1);
        read_opt(j, "bm25_b", c.bm25.b);
        read_opt(j, "max_query_terms", c.mlt.max_query_terms);
        read_opt(j, "min_term_freq", c.mlt.min_term_freq);
        read_opt(j, "min_doc_freq", c.mlt.min_doc_freq);
        if (j.contains("label_model")) {
            const auto& l = j.at("label_model");
            auto& lm = c.label_model;
            read_opt(l, "epochs", lm.epochs);
            read_opt(l, "step_size", lm.step_size);
            read_opt(l, "gibbs_samples", lm.gibbs_samples);
            read_opt(l, "burn_in", lm.burn_in);
            read_opt(l, "seed", lm.seed);
            read_opt(l, "l2", lm.l2);
            read_opt(l, "init_theta", lm.init_theta);
            read_opt(l, "exact", lm.exact);
        }
        if (j.contains("denoise")) {
            const auto& d = j.at("denoise");
            read_opt(d, "sparse_below", c.denoise.sparse_below);
            read_opt(d, "dense_above", c.denoise.dense_above);
            read_opt(d, "min_models", c.denoise.min_models);
        }
        if (j.contains("strategy")) {
            const auto s = parse_strategy(j.at("strategy").get<std::string>());
            if (!s) throw ConfigError("unknown strategy '" + j.at("strategy").get<std::string>() + "'");
            c.strategy = *s;
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    return c;
}

IdSet ExpansionState::labeled() const {
    IdSet out = tr_pos;
    out.insert(tr_neg.begin(), tr_neg.end());
    return out;
}

ExpansionState initial_state(const ClassTask& task, const Corpus& corpus) {
    validate_task(task, corpus);
    ExpansionState s;
    s.class_name = task.class_name;
    s.tr_pos = task.positive_seed_ids;
    s.pool = corpus.partition(Split::pool);
    return s;
}

namespace {

std::uint64_t class_seed(const ExpansionConfig& config, std::string_view class_name) {
    return mix_seed(config.seed, stable_hash(class_name));
}

std::vector<const Document*> docs_of(const IdSet& ids, const Corpus& corpus) {
    std::vector<const Document*> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(&corpus.at(id));
    return out;
}

template <typename Ids>
std::vector<const Document*> docs_of_list(const Ids& ids, const Corpus& corpus) {
    std::vector<const Document*> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(&corpus.at(id));
    return out;
}

RankedList mlt_ranking(const ExpansionState& state, const ExpansionConfig& config,
                       const InvertedIndex& index, const Corpus& corpus, const IdSet& labeled) {
    const auto like = docs_of(state.tr_pos, corpus);
    const auto query = build_mlt_query(like, index, config.mlt);
    return search(query, index, labeled, config.termination, config.bm25);
}

RankedList random_ranking(const ExpansionState& state, const ExpansionConfig& config) {
    std::vector<DocId> ids(state.pool.begin(), state.pool.end());
    Rng rng(mix_seed(class_seed(config, state.class_name), state.iteration + 1));
    fisher_yates(ids, rng);
    const std::size_t n = std::min(ids.size(), config.termination);
    RankedList out;
    out.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.entries.push_back({std::move(ids[i]), static_cast<double>(ids.size() - i)});
    return out;
}

RankingSource source_for(const ExpansionState& state, const ExpansionConfig& config) {
    switch (config.strategy) {
    case Strategy::random: return RankingSource::random;
    case Strategy::i_mlt: return RankingSource::mlt;
    case Strategy::i_dp: return state.prob_labels ? RankingSource::dp : RankingSource::mlt;
    }
    return RankingSource::mlt;
}

void refit(ExpansionState& state, const ExpansionConfig& config, const InvertedIndex& index) {
    const IdSet universe(index.doc_ids().begin(), index.doc_ids().end());
    const auto matrix = assemble(state.weak_models, universe);
    auto lm = config.label_model;
    lm.seed = mix_seed(mix_seed(lm.seed, class_seed(config, state.class_name)), state.fits + 1);
    auto result = denoise(matrix, config.denoise, lm);
    state.prob_labels = std::move(result.labels);
    ++state.fits;
    state.positive_iterations_since_fit = 0;
}

} // namespace

RankedList rank_candidates(const ExpansionState& state, const ExpansionConfig& config,
                           const InvertedIndex& index, const Corpus& corpus) {
    if (state.pool.empty()) return {};
    if (config.strategy == Strategy::random) return random_ranking(state, config);
    const IdSet labeled = state.labeled();
    auto mlt = mlt_ranking(state, config, index, corpus, labeled);
    if (config.strategy == Strategy::i_mlt || !state.prob_labels) return mlt;
    auto merged = round_robin_merge(mlt, rank(*state.prob_labels, labeled, config.termination));
    if (merged.entries.size() > config.termination) merged.entries.resize(config.termination);
    return merged;
}

RankedList round_robin_merge(const RankedList& a, const RankedList& b) {
    std::vector<DocId> order;
    order.reserve(a.size() + b.size());
    IdSet seen;
    const auto take = [&](const ScoredDoc& d) {
        if (seen.insert(d.id).second) order.push_back(d.id);
    };
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        if (i < a.size()) take(a[i]);
        if (i < b.size()) take(b[i]);
    }
    RankedList out;
    out.entries.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        out.entries.push_back({std::move(order[i]), static_cast<double>(order.size() - i)});
    return out;
}

std::span<const ScoredDoc> Walk::current_page(std::size_t batch_size) const {
    if (offset >= limit) return {};
    const std::size_t n = std::min(batch_size, limit - offset);
    return std::span<const ScoredDoc>(ranking.entries).subspan(offset, n);
}

Walk begin_walk(const ExpansionState& state, const ExpansionConfig& config,
                const InvertedIndex& index, const Corpus& corpus) {
    Walk w;
    w.ranking = rank_candidates(state, config, index, corpus);
    w.source = source_for(state, config);
    w.limit = std::min(config.termination, w.ranking.size());
    return w;
}

OracleRequest make_request(const ExpansionState& state, const Walk& walk,
                           const ExpansionConfig& config, const Corpus& corpus,
                           std::string_view session) {
    OracleRequest req;
    req.session = std::string(session);
    req.class_name = state.class_name;
    req.iteration = state.iteration + 1;
    req.page = walk.page;
    for (const auto& e : walk.current_page(config.batch_size)) req.batch.push_back(&corpus.at(e.id));
    return req;
}

namespace {

void finish_terminated(ExpansionState& state, const Walk& walk) {
    TraceEvent ev;
    ev.iteration = state.iteration + 1;
    ev.shown = walk.offset;
    ev.negatives = walk.judged_negatives.size();
    ev.source = walk.source;
    ev.negative_ids = walk.judged_negatives;
    for (const auto& id : walk.judged_negatives) {
        state.pool.erase(id);
        state.tr_neg.insert(id);
    }
    state.trace.push_back(std::move(ev));
    state.iteration = state.trace.size();
    state.terminated = true;
}

} // namespace

PageOutcome apply_verdict(ExpansionState& state, Walk& walk, const BatchVerdict& verdict,
                          const ExpansionConfig& config, const InvertedIndex& index,
                          const Corpus& corpus) {
    if (state.terminated) throw ConfigError("class '" + state.class_name + "' already terminated");
    const auto page = walk.current_page(config.batch_size);
    if (page.empty()) {
        finish_terminated(state, walk);
        return PageOutcome::terminated;
    }
    if (verdict.assignments.size() != page.size())
        throw OracleError("verdict must cover exactly the shown batch of " +
                          std::to_string(page.size()) + " docs");
    std::vector<DocId> pos, neg;
    for (const auto& e : page) {
        const auto it = verdict.assignments.find(e.id);
        if (it == verdict.assignments.end()) throw OracleError("missing verdict for '" + e.id + "'");
        (it->second == Verdict::positive ? pos : neg).push_back(e.id);
    }
    walk.offset += page.size();

    if (pos.empty()) {
        walk.judged_negatives.insert(walk.judged_negatives.end(), neg.begin(), neg.end());
        ++walk.page;
        if (walk.offset >= walk.limit) {
            finish_terminated(state, walk);
            return PageOutcome::terminated;
        }
        return PageOutcome::next_page;
    }

    // Earlier all-negative pages of this walk were judged too; a verdict is final,
    // so they join tr_neg alongside the batch complement.
    TraceEvent ev;
    ev.iteration = state.iteration + 1;
    ev.shown = walk.offset;
    ev.source = walk.source;
    ev.positive_ids = pos;
    ev.negative_ids = walk.judged_negatives;
    ev.negative_ids.insert(ev.negative_ids.end(), neg.begin(), neg.end());
    ev.positives = ev.positive_ids.size();
    ev.negatives = ev.negative_ids.size();
    for (const auto& id : ev.positive_ids) {
        state.pool.erase(id);
        state.tr_pos.insert(id);
    }
    for (const auto& id : ev.negative_ids) {
        state.pool.erase(id);
        state.tr_neg.insert(id);
    }
    ++state.positive_iterations;

    if (config.strategy == Strategy::i_dp) {
        const auto pos_docs = docs_of_list(pos, corpus);
        const auto neg_docs = docs_of_list(neg, corpus);
        WeakModelOptions opts{config.top_k, config.mlt, config.bm25};
        auto [plus, minus] = make_weak_models(pos_docs, neg_docs, index, state.labeled(),
                                              ev.iteration, state.weak_models.size(), opts);
        state.weak_models.push_back(std::move(plus));
        state.weak_models.push_back(std::move(minus));
        if (++state.positive_iterations_since_fit >= config.retrain_every) {
            refit(state, config, index);
            ev.retrained = true;
        }
    }
    state.trace.push_back(std::move(ev));
    state.iteration = state.trace.size();
    if (state.pool.empty()) {
        state.terminated = true;
        return PageOutcome::terminated;
    }
    return PageOutcome::iteration_complete;
}

StepOutcome step(ExpansionState& state, const ExpansionConfig& config, Oracle& oracle,
                 const InvertedIndex& index, const Corpus& corpus, std::string_view session) {
    if (state.terminated) return StepOutcome::terminated;
    Walk walk = begin_walk(state, config, index, corpus);
    // Work on a copy so an oracle failure mid-iteration leaves `state` untouched.
    ExpansionState next = state;
    for (;;) {
        PageOutcome outcome;
        if (walk.current_page(config.batch_size).empty()) {
            outcome = apply_verdict(next, walk, {}, config, index, corpus);
        } else {
            const auto request = make_request(next, walk, config, corpus, session);
            const auto verdict = oracle.judge(request);
            outcome = apply_verdict(next, walk, verdict, config, index, corpus);
        }
        if (outcome == PageOutcome::next_page) continue;
        state = std::move(next);
        return outcome == PageOutcome::terminated ? StepOutcome::terminated
                                                  : StepOutcome::continued;
    }
}

ExpansionState expand_class(const ClassTask& task, const ExpansionConfig& config, Oracle& oracle,
                            const InvertedIndex& index, const Corpus& corpus,
                            std::string_view session) {
    config.validate();
    auto state = initial_state(task, corpus);
    while (step(state, config, oracle, index, corpus, session) == StepOutcome::continued) {
    }
    return state;
}

TrainingSet expand_all(std::span<const ClassTask> tasks, const ExpansionConfig& config,
                       Oracle& oracle, const Corpus& corpus, std::size_t workers,
                       std::string_view session) {
    const auto index = InvertedIndex::build(corpus, corpus.partition(Split::pool));
    return expand_all(tasks, config, oracle, index, corpus, workers, session);
}

TrainingSet expand_all(std::span<const ClassTask> tasks, const ExpansionConfig& config,
                       Oracle& oracle, const InvertedIndex& index, const Corpus& corpus,
                       std::size_t workers, std::string_view session) {
    config.validate();
    {
        std::set<std::string> names;
        for (const auto& t : tasks)
            if (!names.insert(t.class_name).second)
                throw ConfigError("duplicate class task '" + t.class_name + "'");
    }
    TrainingSet out;
    out.per_class.resize(tasks.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto run = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                out.per_class[i] = expand_class(tasks[i], config, oracle, index, corpus, session);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = tasks.size();
            }
        }
    };
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(tasks.size(), 1));
    if (workers == 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    }
    if (failure) std::rethrow_exception(failure);

    std::map<DocId, std::size_t> claims;
    for (const auto& state : out.per_class)
        for (const auto& id : state.tr_pos) {
            out.examples.push_back({id, state.class_name});
            ++claims[id];
        }
    for (const auto& [id, n] : claims) out.conflicts += n > 1;
    return out;
}

std::string to_jsonl(const TraceEvent& ev, std::string_view class_name) {
    json obj = json::object();
    obj["class"] = std::string(class_name);
    obj["iteration"] = ev.iteration;
    obj["shown"] = ev.shown;
    obj["positives"] = ev.positives;
    obj["negatives"] = ev.negatives;
    obj["source"] = std::string(to_string(ev.source));
    obj["retrained"] = ev.retrained;
    obj["positive_ids"] = ev.positive_ids;
    obj["negative_ids"] = ev.negative_ids;
    return obj.dump();
}

void write_trace(std::ostream& out, const ExpansionState& state) {
    for (const auto& ev : state.trace) out << to_jsonl(ev, state.class_name) << '\n';
}

void write_training_set(std::ostream& out, const TrainingSet& set, const Corpus& corpus) {
    for (const auto& ex : set.examples) {
        const auto& doc = corpus.at(ex.id);
        out << document_to_jsonl(doc, corpus.split_of(ex.id), ex.label) << '\n';
    }
}

} // namespace seedgrow
