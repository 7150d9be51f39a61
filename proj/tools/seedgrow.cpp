// seedgrow: ingest corpora, run simulated-labeler benchmarks, replay and report
// runs, and serve interactive labeling sessions.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "seedgrow/error.hpp"
#include "seedgrow/eval.hpp"
#include "seedgrow/run.hpp"
#include "seedgrow/service.hpp"
#include "seedgrow/synthetic.hpp"

namespace {

using namespace seedgrow;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

// Thrown for bad arguments that CLI11 cannot check by itself.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path default_output() {
    if (const char* env = std::getenv("SEEDGROW_OUT"); env && *env) return env;
    return "seedgrow-out";
}

CorpusFormat format_or_guess(const std::string& flag, const fs::path& path) {
    if (!flag.empty()) {
        const auto f = parse_format(flag);
        if (!f) throw UsageError("unknown format '" + flag + "' (expected jsonl or csv)");
        return *f;
    }
    return path.extension() == ".csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
}

Corpus read_corpus(const fs::path& path, CorpusFormat format) {
    if (!fs::is_regular_file(path)) throw UsageError("corpus not found: " + path.string());
    std::ifstream in(path, std::ios::binary);
    return ingest(in, {format, tokenize});
}

struct ConfigFlags {
    std::size_t t = 30, b = 10, f = 3, top_k = 50;
    std::uint64_t seed = 0;
    double k1 = 1.2, bm25_b = 0.75;
    std::size_t max_query_terms = 25, min_term_freq = 1, min_doc_freq = 1;
    std::size_t epochs = 50, gibbs_samples = 100;
    double step_size = 0.01;

    void add_to(CLI::App& cmd) {
        cmd.add_option("-t,--termination", t, "Examples shown per iteration without a positive before stopping")
            ->capture_default_str();
        cmd.add_option("-b,--batch-size", b, "Examples per page")->capture_default_str();
        cmd.add_option("-f,--retrain-every", f, "Positive iterations between label-model fits")
            ->capture_default_str();
        cmd.add_option("--top-k", top_k, "Members per weak model")->capture_default_str();
        cmd.add_option("--seed", seed, "Random seed")->capture_default_str();
        cmd.add_option("--k1", k1, "BM25 k1")->capture_default_str();
        cmd.add_option("--bm25-b", bm25_b, "BM25 length normalization b")->capture_default_str();
        cmd.add_option("--max-query-terms", max_query_terms)->capture_default_str();
        cmd.add_option("--min-term-freq", min_term_freq)->capture_default_str();
        cmd.add_option("--min-doc-freq", min_doc_freq)->capture_default_str();
        cmd.add_option("--epochs", epochs, "Label-model epochs")->capture_default_str();
        cmd.add_option("--gibbs-samples", gibbs_samples, "Gibbs sweeps per SGD step")->capture_default_str();
        cmd.add_option("--step-size", step_size, "Label-model SGD step")->capture_default_str();
    }

    ExpansionConfig config() const {
        ExpansionConfig c;
        override(c, nullptr);
        return c;
    }

    /// Copies flags into `c`; with `cmd`, only the flags given on the command line.
    void override(ExpansionConfig& c, const CLI::App* cmd) const {
        const auto given = [cmd](const char* name) { return !cmd || cmd->count(name) > 0; };
        if (given("--termination")) c.termination = t;
        if (given("--batch-size")) c.batch_size = b;
        if (given("--retrain-every")) c.retrain_every = f;
        if (given("--top-k")) c.top_k = top_k;
        if (given("--seed")) c.seed = seed;
        if (given("--k1")) c.bm25.k1 = k1;
        if (given("--bm25-b")) c.bm25.b = bm25_b;
        if (given("--max-query-terms")) c.mlt.max_query_terms = max_query_terms;
        if (given("--min-term-freq")) c.mlt.min_term_freq = min_term_freq;
        if (given("--min-doc-freq")) c.mlt.min_doc_freq = min_doc_freq;
        if (given("--epochs")) c.label_model.epochs = epochs;
        if (given("--gibbs-samples")) c.label_model.gibbs_samples = gibbs_samples;
        if (given("--step-size")) c.label_model.step_size = step_size;
    }
};

std::vector<Strategy> parse_strategies(const std::vector<std::string>& names) {
    std::vector<Strategy> out;
    for (const auto& n : names) {
        std::stringstream ss(n);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (part.empty()) continue;
            const auto s = parse_strategy(part);
            if (!s) throw UsageError("unknown strategy '" + part + "' (random, i-mlt, i-dp)");
            out.push_back(*s);
        }
    }
    return out;
}

void print_summary(const EvalReport& report) { std::cout << report_summary_csv(report); }

// --- subcommands ------------------------------------------------------------

int cmd_ingest(const fs::path& input, const std::string& format, const fs::path& output,
               const std::string& out_format) {
    const auto corpus = read_corpus(input, format_or_guess(format, input));
    const auto of = out_format.empty() ? CorpusFormat::jsonl : format_or_guess(out_format, output);
    if (output.empty() || output == "-") {
        write_corpus(std::cout, corpus, of);
    } else {
        std::ofstream out(output, std::ios::binary);
        if (!out) throw Error("cannot write " + output.string());
        write_corpus(out, corpus, of);
    }
    std::cerr << "ingested " << corpus.size() << " documents (" << corpus.partition(Split::seed).size()
              << " seed, " << corpus.partition(Split::pool).size() << " pool, "
              << corpus.partition(Split::test).size() << " test, " << corpus.gold_classes().size()
              << " classes)\n";
    return kOk;
}

int cmd_synth(const fs::path& output, const SyntheticConfig& cfg) {
    const auto syn = make_synthetic(cfg);
    std::ofstream out(output, std::ios::binary);
    if (!out) throw Error("cannot write " + output.string());
    write_corpus(out, syn.corpus);
    std::cerr << "wrote " << syn.corpus.size() << " documents in " << syn.tasks.size()
              << " classes to " << output.string() << '\n';
    return kOk;
}

struct BenchFlags {
    fs::path manifest;
    fs::path corpus;
    std::string format;
    std::vector<std::string> strategies;
    std::vector<std::string> classes;
    std::size_t seeds_per_class = 10;
    bool random_seeds = false;
    std::size_t workers = 1;
    double test_fraction = 0.2;
    fs::path out;
};

int cmd_bench(const BenchFlags& flags, const ConfigFlags& cfg, const CLI::App& cmd) {
    RunManifest m;
    if (!flags.manifest.empty()) {
        if (!fs::is_regular_file(flags.manifest))
            throw UsageError("manifest not found: " + flags.manifest.string());
        m = load_manifest(flags.manifest);
    } else {
        if (flags.corpus.empty()) throw UsageError("bench needs --corpus or --manifest");
        m.config = cfg.config();
        m.seeds.per_class = flags.seeds_per_class;
        m.seeds.sampling = flags.random_seeds ? SeedSampling::random : SeedSampling::first;
        m.workers = flags.workers;
        m.test_fraction = flags.test_fraction;
    }
    // Command-line flags override the manifest.
    if (!flags.corpus.empty()) {
        m.corpus = flags.corpus;
        m.format = format_or_guess(flags.format, flags.corpus);
    }
    if (!flags.strategies.empty()) m.strategies = parse_strategies(flags.strategies);
    if (!flags.classes.empty()) m.classes = flags.classes;
    if (!flags.out.empty()) m.output = flags.out;
    if (m.output.empty()) m.output = default_output();
    if (!flags.manifest.empty()) {
        if (cmd.count("--workers")) m.workers = flags.workers;
        cfg.override(m.config, &cmd);
    }
    try {
        m.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    const auto artifacts = run_benchmark(m);
    print_summary(artifacts.report);
    std::cerr << "artifacts in " << artifacts.dir.string() << '\n';
    return kOk;
}

int cmd_replay(const fs::path& run_dir, const std::vector<std::string>& strategy_names) {
    if (!fs::is_regular_file(run_dir / "manifest.json"))
        throw UsageError("not a run directory (no manifest.json): " + run_dir.string());
    auto strategies = parse_strategies(strategy_names);
    if (strategies.empty()) strategies = load_manifest(run_dir / "manifest.json").strategies;
    int status = kOk;
    for (const auto s : strategies) {
        const std::string name(to_string(s));
        const auto set = replay(run_dir, s);
        std::ostringstream trace;
        for (const auto& st : set.per_class) write_trace(trace, st);
        std::ifstream in(run_dir / name / "trace.jsonl", std::ios::binary);
        std::stringstream original;
        original << in.rdbuf();
        const bool same = trace.str() == original.str();
        std::cout << name << ": " << (same ? "identical" : "DIFFERENT") << " trace, "
                  << set.examples.size() << " examples\n";
        if (!same) status = kFailure;
    }
    return status;
}

int cmd_report(const fs::path& run_dir, const fs::path& out) {
    if (!fs::is_regular_file(run_dir / "manifest.json"))
        throw UsageError("not a run directory (no manifest.json): " + run_dir.string());
    const auto report = report_from_run(run_dir);
    write_report(out.empty() ? run_dir / "report" : out, report);
    print_summary(report);
    return kOk;
}

HttpService* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

int cmd_serve(const fs::path& corpus_path, const std::string& format, const std::string& host, int port,
              const fs::path& state_dir, const fs::path& static_dir) {
    auto corpus = read_corpus(corpus_path, format_or_guess(format, corpus_path));
    std::vector<DocId> unassigned;
    for (const auto& d : corpus.documents())
        if (!corpus.split_of(d.id)) unassigned.push_back(d.id);
    for (const auto& id : unassigned) corpus.assign(id, Split::pool);
    const auto index = InvertedIndex::build(corpus, corpus.partition(Split::pool));

    std::optional<fs::path> state;
    if (!state_dir.empty()) state = state_dir;
    SessionManager sessions(corpus, index, state, corpus_path.stem().string());
    HttpOptions opts{host, port, std::nullopt};
    if (!static_dir.empty()) opts.static_dir = static_dir;
    HttpService service(sessions, opts);
    const int bound = service.bind();
    std::cerr << "serving " << corpus.size() << " documents on http://" << host << ':' << bound << '\n';
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    service.serve();
    g_service = nullptr;
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"seedgrow: grow labeled text datasets from a few seeds"};
    app.require_subcommand(1);

    auto* ingest_cmd = app.add_subcommand("ingest", "Normalize, deduplicate and re-emit a corpus");
    fs::path ingest_in, ingest_out;
    std::string ingest_format, ingest_out_format;
    ingest_cmd->add_option("input", ingest_in, "Corpus file (jsonl or csv)")->required();
    ingest_cmd->add_option("-o,--output", ingest_out, "Output file (default: stdout)");
    ingest_cmd->add_option("--format", ingest_format, "Input format (default: by extension)");
    ingest_cmd->add_option("--output-format", ingest_out_format, "Output format (default: jsonl)");

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic skewed multi-class corpus");
    fs::path synth_out;
    SyntheticConfig synth;
    synth_cmd->add_option("-o,--output", synth_out, "Output JSONL file")->required();
    synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
    synth_cmd->add_option("--classes", synth.classes)->capture_default_str();
    synth_cmd->add_option("--max-size", synth.max_size)->capture_default_str();
    synth_cmd->add_option("--min-size", synth.min_size)->capture_default_str();
    synth_cmd->add_option("--seeds-per-class", synth.seeds_per_class)->capture_default_str();

    auto* bench_cmd = app.add_subcommand("bench", "Run strategies with a simulated labeler and report");
    BenchFlags bench;
    ConfigFlags bench_cfg;
    bench_cmd->add_option("--manifest", bench.manifest, "Run manifest (JSON)");
    bench_cmd->add_option("--corpus", bench.corpus, "Corpus file; overrides the manifest");
    bench_cmd->add_option("--format", bench.format, "Corpus format (default: by extension)");
    bench_cmd->add_option("--strategy,--strategies", bench.strategies, "random, i-mlt, i-dp (comma separated)");
    bench_cmd->add_option("--classes", bench.classes, "Classes to expand (default: all gold classes)");
    bench_cmd->add_option("--seeds-per-class", bench.seeds_per_class)->capture_default_str();
    bench_cmd->add_flag("--random-seeds", bench.random_seeds, "Sample seeds randomly instead of first by id");
    bench_cmd->add_option("--workers", bench.workers, "Classes expanded concurrently")->capture_default_str();
    bench_cmd->add_option("--test-fraction", bench.test_fraction, "Held out when the corpus has no test split")
        ->capture_default_str();
    bench_cmd->add_option("-o,--out", bench.out, "Output directory (default: $SEEDGROW_OUT or ./seedgrow-out)");
    bench_cfg.add_to(*bench_cmd);

    auto* replay_cmd = app.add_subcommand("replay", "Re-run a benchmark from its recorded verdicts");
    fs::path replay_dir;
    std::vector<std::string> replay_strategies;
    replay_cmd->add_option("run_dir", replay_dir, "Run directory written by bench")->required();
    replay_cmd->add_option("--strategy,--strategies", replay_strategies, "Strategies to replay (default: all)");

    auto* report_cmd = app.add_subcommand("report", "Recompute the evaluation report of a run");
    fs::path report_dir, report_out;
    report_cmd->add_option("run_dir", report_dir, "Run directory written by bench")->required();
    report_cmd->add_option("-o,--out", report_out, "Report directory (default: <run_dir>/report)");

    auto* serve_cmd = app.add_subcommand("serve", "Serve interactive labeling sessions over HTTP");
    fs::path serve_corpus, serve_state, serve_static;
    std::string serve_format, serve_host = "127.0.0.1";
    int serve_port = 8080;
    serve_cmd->add_option("--corpus", serve_corpus, "Corpus file")->required();
    serve_cmd->add_option("--format", serve_format, "Corpus format (default: by extension)");
    serve_cmd->add_option("--host", serve_host)->capture_default_str();
    serve_cmd->add_option("--port", serve_port, "0 picks a free port")->capture_default_str();
    serve_cmd->add_option("--state-dir", serve_state, "Persist sessions here and restore them on start");
    serve_cmd->add_option("--static-dir", serve_static, "Labeler UI bundle to serve at /");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*ingest_cmd) return cmd_ingest(ingest_in, ingest_format, ingest_out, ingest_out_format);
        if (*synth_cmd) return cmd_synth(synth_out, synth);
        if (*bench_cmd) return cmd_bench(bench, bench_cfg, *bench_cmd);
        if (*replay_cmd) return cmd_replay(replay_dir, replay_strategies);
        if (*report_cmd) return cmd_report(report_dir, report_out);
        if (*serve_cmd)
            return cmd_serve(serve_corpus, serve_format, serve_host, serve_port, serve_state, serve_static);
    } catch (const UsageError& e) {
        std::cerr << "seedgrow: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "seedgrow: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}
