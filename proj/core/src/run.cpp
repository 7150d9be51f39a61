#include "seedgrow/run.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "seedgrow/error.hpp"
#include "seedgrow/random.hpp"

namespace seedgrow {

using nlohmann::json;
namespace fs = std::filesystem;

void RunManifest::validate() const {
    if (corpus.empty()) throw ConfigError("manifest has no corpus path");
    if (!fs::is_regular_file(corpus)) throw ConfigError("corpus not found: " + corpus.string());
    if (strategies.empty()) throw ConfigError("manifest lists no strategies");
    std::set<Strategy> seen(strategies.begin(), strategies.end());
    if (seen.size() != strategies.size()) throw ConfigError("duplicate strategy in manifest");
    if (seeds.ids.empty() && seeds.per_class == 0) throw ConfigError("seeds.per_class must be >= 1");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must be in [0, 1)");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    config.validate();
}

namespace {

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

} // namespace

RunManifest manifest_from_json(std::string_view text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    try {
        RunManifest m;
        m.corpus = resolve(base_dir, j.at("corpus").get<std::string>());
        if (j.contains("format")) {
            const auto f = parse_format(j.at("format").get<std::string>());
            if (!f) throw ConfigError("unknown corpus format '" + j.at("format").get<std::string>() + "'");
            m.format = *f;
        }
        read_opt(j, "classes", m.classes);
        if (j.contains("seeds")) {
            const auto& s = j.at("seeds");
            read_opt(s, "per_class", m.seeds.per_class);
            if (s.contains("sampling")) {
                const auto v = s.at("sampling").get<std::string>();
                if (v != "first" && v != "random")
                    throw ConfigError("seeds.sampling must be \"first\" or \"random\"");
                m.seeds.sampling = v == "random" ? SeedSampling::random : SeedSampling::first;
            }
            if (s.contains("ids"))
                for (const auto& [cls, ids] : s.at("ids").items())
                    for (const auto& id : ids) m.seeds.ids[cls].insert(id.get<std::string>());
        }
        if (j.contains("config")) m.config = expansion_config_from_json(j.at("config").dump());
        if (j.contains("strategies")) {
            m.strategies.clear();
            for (const auto& s : j.at("strategies")) {
                const auto st = parse_strategy(s.get<std::string>());
                if (!st) throw ConfigError("unknown strategy '" + s.get<std::string>() + "'");
                m.strategies.push_back(*st);
            }
        }
        if (j.contains("output")) m.output = resolve(base_dir, j.at("output").get<std::string>());
        read_opt(j, "workers", m.workers);
        read_opt(j, "test_fraction", m.test_fraction);
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad manifest: ") + e.what());
    }
}

std::string manifest_to_json(const RunManifest& m) {
    json j = json::object();
    j["corpus"] = m.corpus.string();
    j["format"] = m.format == CorpusFormat::jsonl ? "jsonl" : "csv";
    j["classes"] = m.classes;
    json seeds = {{"per_class", m.seeds.per_class},
                  {"sampling", m.seeds.sampling == SeedSampling::random ? "random" : "first"}};
    if (!m.seeds.ids.empty()) {
        json ids = json::object();
        for (const auto& [cls, set] : m.seeds.ids) ids[cls] = std::vector<std::string>(set.begin(), set.end());
        seeds["ids"] = std::move(ids);
    }
    j["seeds"] = std::move(seeds);
    j["config"] = json::parse(expansion_config_to_json(m.config));
    json st = json::array();
    for (const auto s : m.strategies) st.push_back(std::string(to_string(s)));
    j["strategies"] = std::move(st);
    j["output"] = m.output.string();
    j["workers"] = m.workers;
    j["test_fraction"] = m.test_fraction;
    return j.dump(2);
}

RunManifest load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("manifest not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return manifest_from_json(ss.str(), path.parent_path());
}

PreparedRun prepare_run(Corpus corpus, const RunManifest& m) {
    PreparedRun out;
    const auto unassigned = [&](const DocId& id) { return !corpus.split_of(id).has_value(); };

    std::vector<std::string> classes = m.classes;
    if (!m.seeds.ids.empty()) {
        if (classes.empty())
            for (const auto& [cls, ids] : m.seeds.ids) classes.push_back(cls);
    } else if (classes.empty()) {
        classes = corpus.gold_classes();
    }
    if (classes.empty()) throw ConfigError("no classes to expand: corpus has no gold labels");

    for (const auto& cls : classes) {
        ClassTask task{cls, {}};
        if (!m.seeds.ids.empty()) {
            const auto it = m.seeds.ids.find(cls);
            if (it == m.seeds.ids.end()) throw ConfigError("no seeds given for class '" + cls + "'");
            for (const auto& id : it->second) {
                if (!corpus.contains(id)) throw ConfigError("seed id '" + id + "' not in corpus");
                corpus.assign(id, Split::seed);
                task.positive_seed_ids.insert(id);
            }
        } else {
            // Prefer docs the corpus already marks as seeds; otherwise draw from
            // unassigned and pool docs.
            IdSet in_seed = corpus.ids_with_class(corpus.partition(Split::seed), cls);
            std::vector<DocId> candidates;
            if (!in_seed.empty()) {
                candidates.assign(in_seed.begin(), in_seed.end());
            } else {
                for (const auto& doc : corpus.documents())
                    if (doc.gold_class == cls &&
                        (unassigned(doc.id) || corpus.split_of(doc.id) == Split::pool))
                        candidates.push_back(doc.id);
                std::sort(candidates.begin(), candidates.end());
            }
            if (m.seeds.sampling == SeedSampling::random) {
                Rng rng(mix_seed(m.config.seed, stable_hash(cls)));
                fisher_yates(candidates, rng);
            }
            candidates.resize(std::min(candidates.size(), m.seeds.per_class));
            if (candidates.empty()) throw ConfigError("class '" + cls + "' has no docs to seed from");
            for (const auto& id : candidates) {
                corpus.assign(id, Split::seed);
                task.positive_seed_ids.insert(id);
            }
        }
        out.tasks.push_back(std::move(task));
    }

    if (corpus.partition(Split::test).empty() && m.test_fraction > 0.0) {
        std::vector<DocId> held;
        for (const auto& doc : corpus.documents()) {
            if (!doc.gold_class || corpus.split_of(doc.id) == Split::seed) continue;
            Rng rng(mix_seed(m.config.seed, stable_hash(doc.id)));
            if (uniform01(rng) < m.test_fraction) held.push_back(doc.id);
        }
        for (const auto& id : held) corpus.assign(id, Split::test);
    }
    std::vector<DocId> rest;
    for (const auto& doc : corpus.documents())
        if (unassigned(doc.id)) rest.push_back(doc.id);
    for (const auto& id : rest) corpus.assign(id, Split::pool);

    for (const auto& t : out.tasks) validate_task(t, corpus);
    out.corpus = std::move(corpus);
    return out;
}

std::string weak_models_to_jsonl(const ExpansionState& state) {
    std::string out;
    for (const auto& m : state.weak_models) {
        json j = {{"class", state.class_name},
                  {"id", m.id},
                  {"polarity", sign(m.polarity)},
                  {"iteration", m.source_iteration},
                  {"members", m.member_ids}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

namespace {

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed: " + path.string());
}

Corpus load_corpus(const fs::path& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("corpus not found: " + path.string());
    return ingest(in, {format, tokenize});
}

TrainingSet merge(std::vector<ExpansionState> per_class) {
    TrainingSet out;
    std::map<DocId, std::size_t> claims;
    for (const auto& s : per_class)
        for (const auto& id : s.tr_pos) {
            out.examples.push_back({id, s.class_name});
            ++claims[id];
        }
    for (const auto& [id, n] : claims) out.conflicts += n > 1;
    out.per_class = std::move(per_class);
    return out;
}

std::vector<std::string> class_order(const std::vector<ClassTask>& tasks) {
    std::vector<std::string> out;
    for (const auto& t : tasks) out.push_back(t.class_name);
    return out;
}

void write_strategy(const fs::path& dir, const TrainingSet& set, const Corpus& corpus,
                    const RecordingOracle& recorder, const std::vector<ClassTask>& tasks) {
    fs::create_directories(dir);
    std::ostringstream trace, models, training, verdicts;
    for (const auto& s : set.per_class) {
        write_trace(trace, s);
        models << weak_models_to_jsonl(s);
    }
    write_training_set(training, set, corpus);
    write_verdict_log(verdicts, recorder.records(class_order(tasks)));
    write_text(dir / "trace.jsonl", trace.str());
    write_text(dir / "weak_models.jsonl", models.str());
    write_text(dir / "training_set.jsonl", training.str());
    write_text(dir / "verdicts.jsonl", verdicts.str());
}

// The manifest stored with a run points at the prepared corpus copy and lists
// seeds explicitly, so the run directory alone is enough to replay it.
RunManifest frozen_manifest(const RunManifest& m, const PreparedRun& prepared) {
    RunManifest f = m;
    f.corpus = "corpus.jsonl";
    f.format = CorpusFormat::jsonl;
    f.output = ".";
    f.classes = class_order(prepared.tasks);
    f.seeds.ids.clear();
    for (const auto& t : prepared.tasks) f.seeds.ids[t.class_name] = t.positive_seed_ids;
    return f;
}

struct LoadedRun {
    RunManifest manifest;
    PreparedRun prepared;
};

LoadedRun load_run(const fs::path& run_dir) {
    LoadedRun r;
    r.manifest = load_manifest(run_dir / "manifest.json");
    r.prepared = prepare_run(load_corpus(r.manifest.corpus, r.manifest.format), r.manifest);
    return r;
}

} // namespace

RunArtifacts run_benchmark(const RunManifest& manifest) {
    manifest.validate();
    if (manifest.output.empty()) throw ConfigError("manifest has no output directory");
    fs::create_directories(manifest.output);
    const auto& dir = manifest.output;
    fs::remove(dir / "ERROR");
    try {
        auto prepared = prepare_run(load_corpus(manifest.corpus, manifest.format), manifest);
        const auto& corpus = prepared.corpus;
        write_text(dir / "manifest.json", manifest_to_json(frozen_manifest(manifest, prepared)) + "\n");
        {
            std::ostringstream os;
            write_corpus(os, corpus);
            write_text(dir / "corpus.jsonl", os.str());
        }
        const auto index = InvertedIndex::build(corpus, corpus.partition(Split::pool));
        SimulatedOracle simulated(corpus);

        RunArtifacts out;
        out.dir = dir;
        for (const auto strategy : manifest.strategies) {
            auto config = manifest.config;
            config.strategy = strategy;
            const std::string name(to_string(strategy));
            RecordingOracle recorder(simulated, name);
            auto set = expand_all(prepared.tasks, config, recorder, index, corpus, manifest.workers,
                                  name);
            write_strategy(dir / name, set, corpus, recorder, prepared.tasks);
            out.runs.push_back({strategy, std::move(set)});
        }
        out.report = evaluate(corpus, prepared.tasks, out.runs);
        write_report(dir / "report", out.report);
        return out;
    } catch (const std::exception& e) {
        std::ofstream err(dir / "ERROR", std::ios::binary);
        err << e.what() << '\n';
        throw;
    }
}

TrainingSet replay(const fs::path& run_dir, Strategy strategy) {
    auto run = load_run(run_dir);
    const std::string name(to_string(strategy));
    std::ifstream in(run_dir / name / "verdicts.jsonl", std::ios::binary);
    if (!in) throw ConfigError("no verdict log for strategy " + name + " in " + run_dir.string());
    ScriptedOracle scripted(read_verdict_log(in));
    auto config = run.manifest.config;
    config.strategy = strategy;
    const auto& corpus = run.prepared.corpus;
    const auto index = InvertedIndex::build(corpus, corpus.partition(Split::pool));
    // Classes replay one at a time so a divergence names the first failing class.
    return expand_all(run.prepared.tasks, config, scripted, index, corpus, 1, name);
}

EvalReport report_from_run(const fs::path& run_dir) {
    auto run = load_run(run_dir);
    const auto& corpus = run.prepared.corpus;
    std::vector<StrategyRun> runs;
    for (const auto strategy : run.manifest.strategies) {
        const std::string name(to_string(strategy));
        std::ifstream in(run_dir / name / "trace.jsonl", std::ios::binary);
        if (!in) throw ConfigError("missing trace for strategy " + name + " in " + run_dir.string());
        std::stringstream ss;
        ss << in.rdbuf();
        std::vector<ExpansionState> per_class;
        for (const auto& task : run.prepared.tasks) {
            std::istringstream trace_in(ss.str());
            per_class.push_back(replay_trace(task, read_trace(trace_in, task.class_name), corpus));
        }
        runs.push_back({strategy, merge(std::move(per_class))});
    }
    return evaluate(corpus, run.prepared.tasks, runs);
}

} // namespace seedgrow
