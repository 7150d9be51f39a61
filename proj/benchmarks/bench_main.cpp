#include <benchmark/benchmark.h>

#include "seedgrow/expansion.hpp"
#include "seedgrow/index.hpp"
#include "seedgrow/label_model.hpp"
#include "seedgrow/random.hpp"
#include "seedgrow/synthetic.hpp"

namespace {

using namespace seedgrow;

const SyntheticCorpus& corpus() {
    static const SyntheticCorpus c = make_synthetic({});
    return c;
}

const InvertedIndex& pool_index() {
    static const InvertedIndex idx = InvertedIndex::build(corpus().corpus, corpus().corpus.partition(Split::pool));
    return idx;
}

void BM_IndexBuild(benchmark::State& state) {
    for (auto _ : state) {
        auto idx = InvertedIndex::build(corpus().corpus, corpus().corpus.partition(Split::pool));
        benchmark::DoNotOptimize(idx.term_count());
    }
}
BENCHMARK(BM_IndexBuild);

void BM_MltSearch(benchmark::State& state) {
    const auto& syn = corpus();
    const auto& seeds = syn.tasks[0].positive_seed_ids;
    std::vector<const Document*> like;
    for (const auto& id : seeds) like.push_back(&syn.corpus.at(id));
    const IdSet exclude;
    for (auto _ : state) {
        const auto q = build_mlt_query(like, pool_index());
        auto r = search(q, pool_index(), exclude, 50);
        benchmark::DoNotOptimize(r.size());
    }
}
BENCHMARK(BM_MltSearch);

LabelMatrix planted(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    LabelMatrix m(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const int y = uniform01(rng) < 0.5 ? 1 : -1;
        std::vector<MatrixEntry> e;
        for (std::size_t j = 0; j < cols; ++j) {
            if (uniform01(rng) < 0.3) continue;
            const double acc = 0.55 + 0.4 * static_cast<double>(j) / static_cast<double>(cols - 1);
            const int v = uniform01(rng) < acc ? y : -y;
            e.push_back({static_cast<std::uint32_t>(j), static_cast<std::int8_t>(v)});
        }
        if (!e.empty()) m.add_row("r" + std::to_string(100000 + i), std::move(e));
    }
    return m;
}

void BM_LabelModelTrain(benchmark::State& state) {
    const auto m = planted(static_cast<std::size_t>(state.range(0)), 6, 1);
    for (auto _ : state) {
        auto p = train(m, {});
        benchmark::DoNotOptimize(p.theta.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m.nonzeros()));
}
BENCHMARK(BM_LabelModelTrain)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_ExpandClass(benchmark::State& state) {
    const auto& syn = corpus();
    SimulatedOracle oracle(syn.corpus);
    ExpansionConfig cfg;
    cfg.strategy = static_cast<Strategy>(state.range(0));
    for (auto _ : state) {
        auto s = expand_class(syn.tasks[3], cfg, oracle, pool_index(), syn.corpus);
        benchmark::DoNotOptimize(s.tr_pos.size());
    }
}
BENCHMARK(BM_ExpandClass)
    ->Arg(static_cast<int>(Strategy::i_mlt))
    ->Arg(static_cast<int>(Strategy::i_dp))
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
