#include "seedgrow/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "seedgrow/error.hpp"

namespace seedgrow {

using nlohmann::json;

namespace {

constexpr double kSmoothing = 1e-9;

IdSet gold_ids(const IdSet& seeds, const Corpus& corpus, std::string_view class_name) {
    IdSet scope = corpus.partition(Split::pool);
    scope.insert(seeds.begin(), seeds.end());
    auto out = corpus.ids_with_class(scope, class_name);
    if (out.empty()) throw ConfigError("class '" + std::string(class_name) + "' has no gold docs");
    return out;
}

void add_tokens(TokenCounts& counts, const Document& doc) {
    for (const auto& t : doc.tokens) ++counts[t];
}

} // namespace

std::vector<RecallPoint> recall_curve(const IdSet& seeds, std::span<const TraceEvent> trace,
                                      const Corpus& corpus, std::string_view class_name) {
    const IdSet gold = gold_ids(seeds, corpus, class_name);
    const auto denom = static_cast<double>(gold.size());
    std::size_t found = 0;
    for (const auto& id : seeds) found += gold.contains(id);

    std::vector<RecallPoint> out;
    out.reserve(trace.size() + 1);
    out.push_back({0, 0, static_cast<double>(found) / denom});
    std::size_t shown = 0;
    for (const auto& ev : trace) {
        shown += ev.shown;
        for (const auto& id : ev.positive_ids) found += gold.contains(id);
        out.push_back({ev.iteration, shown, static_cast<double>(found) / denom});
    }
    return out;
}

std::vector<EffortPoint> label_effort(std::span<const TraceEvent> trace) {
    std::vector<EffortPoint> out;
    out.reserve(trace.size());
    for (const auto& ev : trace) out.push_back({ev.iteration, ev.positives});
    return out;
}

TokenCounts count_tokens(const IdSet& ids, const Corpus& corpus) {
    TokenCounts out;
    for (const auto& id : ids) add_tokens(out, corpus.at(id));
    return out;
}

double kl_divergence(const TokenCounts& train, const TokenCounts& optimal) {
    const auto total = [](const TokenCounts& c) {
        double s = 0.0;
        for (const auto& [t, n] : c) s += static_cast<double>(n);
        return s;
    };
    const double pt = total(train);
    const double qt = total(optimal);
    if (pt == 0.0) throw ConfigError("KL divergence of an empty token distribution");
    if (qt == 0.0) throw ConfigError("KL divergence against an empty optimal distribution");

    std::set<std::string_view> vocab;
    for (const auto& [t, n] : train) vocab.insert(t);
    for (const auto& [t, n] : optimal) vocab.insert(t);
    const double norm = 1.0 + kSmoothing * static_cast<double>(vocab.size());

    const auto prob = [norm](const TokenCounts& c, double tot, std::string_view t) {
        const auto it = c.find(t);
        const double n = it == c.end() ? 0.0 : static_cast<double>(it->second);
        return (n / tot + kSmoothing) / norm;
    };
    double kl = 0.0;
    for (const auto t : vocab) {
        const double p = prob(train, pt, t);
        const double q = prob(optimal, qt, t);
        kl += p * std::log(p / q);
    }
    return std::max(kl, 0.0);
}

std::vector<KlPoint> kl_series(const IdSet& seeds, std::span<const TraceEvent> trace,
                               const Corpus& corpus, std::string_view class_name) {
    const auto optimal = count_tokens(gold_ids(seeds, corpus, class_name), corpus);
    TokenCounts current = count_tokens(seeds, corpus);
    std::vector<KlPoint> out;
    out.reserve(trace.size() + 1);
    out.push_back({0, kl_divergence(current, optimal)});
    for (const auto& ev : trace) {
        for (const auto& id : ev.positive_ids) add_tokens(current, corpus.at(id));
        out.push_back({ev.iteration, kl_divergence(current, optimal)});
    }
    return out;
}

SurrogateClassifier SurrogateClassifier::fit(std::span<const LabeledExample> train,
                                             const Corpus& corpus) {
    SurrogateClassifier m;
    std::set<std::string> names;
    for (const auto& ex : train) names.insert(ex.label);
    if (names.size() < 2) throw ConfigError("surrogate classifier needs at least two classes");
    m.classes_.assign(names.begin(), names.end());
    const std::size_t k = m.classes_.size();

    std::vector<std::size_t> docs(k, 0);
    std::vector<std::uint64_t> tokens(k, 0);
    for (const auto& ex : train) {
        const auto c = static_cast<std::size_t>(
            std::lower_bound(m.classes_.begin(), m.classes_.end(), ex.label) - m.classes_.begin());
        ++docs[c];
        for (const auto& t : corpus.at(ex.id).tokens) {
            auto& row = m.counts_[t];
            if (row.empty()) row.assign(k, 0);
            ++row[c];
            ++tokens[c];
        }
    }
    const auto vocab = static_cast<double>(m.counts_.size());
    const auto n = static_cast<double>(train.size());
    for (std::size_t c = 0; c < k; ++c) {
        m.log_prior_.push_back(std::log(static_cast<double>(docs[c]) / n));
        m.log_denominator_.push_back(std::log(static_cast<double>(tokens[c]) + vocab));
    }
    return m;
}

double SurrogateClassifier::log_score(std::span<const std::string> tokens,
                                      std::size_t c) const {
    double s = log_prior_[c];
    for (const auto& t : tokens) {
        const auto it = counts_.find(t);
        if (it == counts_.end()) continue;
        s += std::log(static_cast<double>(it->second[c]) + 1.0) - log_denominator_[c];
    }
    return s;
}

const std::string& SurrogateClassifier::predict(std::span<const std::string> tokens) const {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        const double s = log_score(tokens, c);
        if (s > best_score) {
            best = c;
            best_score = s;
        }
    }
    return classes_[best];
}

double fit_and_score(std::span<const LabeledExample> train, std::span<const LabeledExample> test,
                     const Corpus& corpus) {
    if (test.empty()) throw ConfigError("empty test set");
    const auto model = SurrogateClassifier::fit(train, corpus);
    std::size_t correct = 0;
    for (const auto& ex : test) correct += model.predict(corpus.at(ex.id).tokens) == ex.label;
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::vector<LabeledExample> test_examples(const Corpus& corpus) {
    std::vector<LabeledExample> out;
    for (const auto& id : corpus.partition(Split::test)) {
        const auto& doc = corpus.at(id);
        if (doc.gold_class) out.push_back({id, *doc.gold_class});
    }
    return out;
}

std::vector<LabeledExample> initial_examples(std::span<const ClassTask> tasks) {
    std::vector<LabeledExample> out;
    for (const auto& t : tasks)
        for (const auto& id : t.positive_seed_ids) out.push_back({id, t.class_name});
    return out;
}

std::vector<LabeledExample> optimal_examples(std::span<const ClassTask> tasks,
                                             const Corpus& corpus) {
    auto out = initial_examples(tasks);
    for (const auto& t : tasks)
        for (const auto& id : corpus.ids_with_class(corpus.partition(Split::pool), t.class_name))
            out.push_back({id, t.class_name});
    return out;
}

ExpansionState replay_trace(const ClassTask& task, std::vector<TraceEvent> trace,
                            const Corpus& corpus) {
    auto state = initial_state(task, corpus);
    for (const auto& ev : trace) {
        for (const auto& id : ev.positive_ids) {
            state.pool.erase(id);
            state.tr_pos.insert(id);
        }
        for (const auto& id : ev.negative_ids) {
            state.pool.erase(id);
            state.tr_neg.insert(id);
        }
        if (ev.positives > 0) ++state.positive_iterations;
    }
    state.terminated = trace.empty() ? false : trace.back().positives == 0 || state.pool.empty();
    state.trace = std::move(trace);
    state.iteration = state.trace.size();
    return state;
}

std::vector<TraceEvent> read_trace(std::istream& in, std::string_view class_name) {
    std::vector<TraceEvent> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto obj = json::parse(line);
            if (!class_name.empty() && obj.value("class", std::string{}) != class_name) continue;
            TraceEvent ev;
            ev.iteration = obj.at("iteration").get<std::size_t>();
            ev.shown = obj.at("shown").get<std::size_t>();
            ev.positives = obj.at("positives").get<std::size_t>();
            ev.negatives = obj.at("negatives").get<std::size_t>();
            const auto src = obj.at("source").get<std::string>();
            ev.source = src == "dp"       ? RankingSource::dp
                        : src == "random" ? RankingSource::random
                                          : RankingSource::mlt;
            ev.retrained = obj.at("retrained").get<bool>();
            ev.positive_ids = obj.value("positive_ids", std::vector<DocId>{});
            ev.negative_ids = obj.value("negative_ids", std::vector<DocId>{});
            out.push_back(std::move(ev));
        } catch (const json::exception& e) {
            throw IngestError(line_no, std::string("bad trace event: ") + e.what());
        }
    }
    return out;
}

EvalReport evaluate(const Corpus& corpus, std::span<const ClassTask> tasks,
                    std::span<const StrategyRun> runs) {
    EvalReport report;
    const auto test = test_examples(corpus);
    const auto initial = initial_examples(tasks);
    const auto optimal = optimal_examples(tasks, corpus);
    report.initial_size = initial.size();
    report.optimal_size = optimal.size();
    report.initial_accuracy = fit_and_score(initial, test, corpus);
    report.optimal_accuracy = fit_and_score(optimal, test, corpus);

    for (const auto& run : runs) {
        StrategyReport sr;
        sr.strategy = run.strategy;
        sr.terminal_size = run.result.examples.size();
        sr.conflicts = run.result.conflicts;
        sr.terminal_accuracy = fit_and_score(run.result.examples, test, corpus);
        for (std::size_t i = 0; i < run.result.per_class.size(); ++i) {
            const auto& state = run.result.per_class[i];
            const auto& task = tasks[i];
            ClassReport cr;
            cr.class_name = state.class_name;
            cr.recall = recall_curve(task.positive_seed_ids, state.trace, corpus, task.class_name);
            cr.effort = label_effort(state.trace);
            cr.kl = kl_series(task.positive_seed_ids, state.trace, corpus, task.class_name);
            cr.initial_size = task.positive_seed_ids.size();
            cr.terminal_size = state.tr_pos.size();
            cr.optimal_size =
                cr.initial_size +
                corpus.ids_with_class(corpus.partition(Split::pool), task.class_name).size();
            sr.classes.push_back(std::move(cr));
        }
        report.strategies.push_back(std::move(sr));
    }
    return report;
}

std::string report_to_json(const EvalReport& r) {
    json root = json::object();
    root["initial"] = {{"size", r.initial_size}, {"accuracy", r.initial_accuracy}};
    root["optimal"] = {{"size", r.optimal_size}, {"accuracy", r.optimal_accuracy}};
    json strategies = json::array();
    for (const auto& s : r.strategies) {
        json js = json::object();
        js["strategy"] = std::string(to_string(s.strategy));
        js["size"] = s.terminal_size;
        js["accuracy"] = s.terminal_accuracy;
        js["conflicts"] = s.conflicts;
        json classes = json::array();
        for (const auto& c : s.classes) {
            json jc = json::object();
            jc["class"] = c.class_name;
            jc["sizes"] = {{"initial", c.initial_size},
                           {"terminal", c.terminal_size},
                           {"optimal", c.optimal_size}};
            json recall = json::array();
            for (const auto& p : c.recall)
                recall.push_back({{"iteration", p.iteration}, {"examples", p.examples},
                                  {"recall", p.recall}});
            jc["recall"] = std::move(recall);
            json effort = json::array();
            for (const auto& p : c.effort)
                effort.push_back({{"iteration", p.iteration}, {"positives", p.positives}});
            jc["label_effort"] = std::move(effort);
            json kl = json::array();
            for (const auto& p : c.kl) kl.push_back({{"iteration", p.iteration}, {"kl", p.kl}});
            jc["kl"] = std::move(kl);
            classes.push_back(std::move(jc));
        }
        js["classes"] = std::move(classes);
        strategies.push_back(std::move(js));
    }
    root["strategies"] = std::move(strategies);
    return root.dump(2);
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed << v;
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

std::string safe_name(std::string_view s) {
    std::string out;
    for (const char c : s)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
    return out;
}

} // namespace

std::string report_summary_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "row,size,accuracy,conflicts\n";
    os << "Initial," << r.initial_size << ',' << fmt(r.initial_accuracy) << ",0\n";
    os << "Optimal," << r.optimal_size << ',' << fmt(r.optimal_accuracy) << ",0\n";
    for (const auto& s : r.strategies)
        os << to_string(s.strategy) << ',' << s.terminal_size << ',' << fmt(s.terminal_accuracy)
           << ',' << s.conflicts << '\n';
    return os.str();
}

void write_report(const std::filesystem::path& dir, const EvalReport& r) {
    std::filesystem::create_directories(dir / "curves");
    write_file(dir / "report.json", report_to_json(r) + "\n");
    write_file(dir / "summary.csv", report_summary_csv(r));
    for (const auto& s : r.strategies) {
        for (const auto& c : s.classes) {
            const auto stem = std::string(to_string(s.strategy)) + "_" + safe_name(c.class_name);
            std::ostringstream recall, effort, kl;
            recall << "examples,recall\n";
            for (const auto& p : c.recall) recall << p.examples << ',' << fmt(p.recall) << '\n';
            effort << "iteration,positives\n";
            for (const auto& p : c.effort) effort << p.iteration << ',' << p.positives << '\n';
            kl << "iteration,kl\n";
            for (const auto& p : c.kl) kl << p.iteration << ',' << fmt(p.kl) << '\n';
            write_file(dir / "curves" / ("recall_" + stem + ".csv"), recall.str());
            write_file(dir / "curves" / ("effort_" + stem + ".csv"), effort.str());
            write_file(dir / "curves" / ("kl_" + stem + ".csv"), kl.str());
        }
    }
}

} // namespace seedgrow
