// Serial reference vs OpenMP kernels: batch search, verifier data and BM25.

#include <benchmark/benchmark.h>

#include "entail/batch.hpp"
#include "entail/bm25.hpp"
#include "entail/verifier_data.hpp"

using namespace entail;

namespace {

std::vector<TaskInstance> const& dataset()
{
    static auto const data = [] {
        DatasetConfig dc;
        dc.n = 200;
        dc.context_size = 25;
        dc.seed = 1;
        return make_dataset(dc);
    }();
    return data;
}

void BM_BatchSearch(benchmark::State& state)
{
    BuiltinSources spec;
    spec.prover = "noisy";
    auto factory = builtin_factory(spec);
    BatchConfig cfg;
    cfg.jobs = static_cast<int>(state.range(0));
    dataset();
    for (auto _ : state) {
        auto preds = cfg.jobs == 1 ? run_batch_serial(dataset(), factory, cfg) : run_batch(dataset(), factory, cfg);
        benchmark::DoNotOptimize(preds);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(dataset().size()));
}
BENCHMARK(BM_BatchSearch)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_VerifierData(benchmark::State& state)
{
    VerifierDataConfig vc;
    vc.jobs = static_cast<int>(state.range(0));
    vc.corpus_pool = true;
    for (auto _ : state) {
        benchmark::DoNotOptimize(make_verifier_data(dataset(), vc));
    }
}
BENCHMARK(BM_VerifierData)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

Bm25Index const& corpus()
{
    static Bm25Index const idx = [] {
        std::vector<std::string> docs;
        for (auto const& inst : dataset()) {
            for (int rep = 0; rep < 20; ++rep) {
                docs.insert(docs.end(), inst.context.begin(), inst.context.end());
            }
        }
        return Bm25Index(std::move(docs));
    }();
    return idx;
}

void BM_Bm25Serial(benchmark::State& state)
{
    auto const& idx = corpus();
    for (auto _ : state) {
        benchmark::DoNotOptimize(idx.scores("the cat is big and red"));
    }
}
BENCHMARK(BM_Bm25Serial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Bm25Parallel(benchmark::State& state)
{
    auto const& idx = corpus();
    for (auto _ : state) {
        benchmark::DoNotOptimize(idx.scores_parallel("the cat is big and red"));
    }
}
BENCHMARK(BM_Bm25Parallel)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
