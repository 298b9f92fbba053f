#include <benchmark/benchmark.h>

#include <algorithm>
#include <map>

#include "refinder/aggregation.hpp"
#include "refinder/corpus_index.hpp"
#include "refinder/evaluation/ndcg.hpp"
#include "refinder/evaluation/random.hpp"
#include "refinder/evaluation/synthetic.hpp"
#include "refinder/feedback/refine.hpp"

using namespace refinder;

namespace {

const CorpusIndex& corpus(std::size_t n) {
    static std::map<std::size_t, CorpusIndex> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        SyntheticConfig cfg;
        cfg.count = n;
        it = cache.emplace(n, build_index(make_synthetic_corpus(cfg).entries)).first;
    }
    return it->second;
}

void BM_KnnEuclidean(benchmark::State& state) {
    const CorpusIndex& index = corpus(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(knn_query(index, index.row(0), 100));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KnnEuclidean)->Arg(5000)->Arg(20000);

void BM_RankFullMetric(benchmark::State& state) {
    const CorpusIndex& index = corpus(5000);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(64, 64);
    const LearnedMetric metric = LearnedMetric::full(a.transpose() * a + Eigen::MatrixXd::Identity(64, 64));
    for (auto _ : state) benchmark::DoNotOptimize(rank_by_distance(index, index.row(0), &metric, 0));
}
BENCHMARK(BM_RankFullMetric);

// One feedback round: 10 marks on top of an earlier round of 10.
void BM_Refine(benchmark::State& state) {
    const auto method = static_cast<Method>(state.range(0));
    const CorpusIndex& index = corpus(5000);
    const Ranking baseline = rank_by_distance(index, index.row(0), nullptr, 0);
    FeedbackState fs(index.id(0));
    for (std::size_t i = 0; i < 20; ++i) {
        const std::size_t pos = baseline.items[i * 3].pos;
        fs.mark(index.id(pos), index.labels(pos) == index.labels(0));
    }
    const BackgroundStats bg = BackgroundStats::compute(index);
    const RefineContext ctx{index, QueryRef{index.row(0), 0}, baseline, &bg};
    for (auto _ : state) benchmark::DoNotOptimize(compute_refined_ranking(ctx, fs, method));
    state.SetLabel(std::string(method_name(method)));
}
BENCHMARK(BM_Refine)->DenseRange(0, 8)->Unit(benchmark::kMillisecond);

void BM_Pooling(benchmark::State& state) {
    Rng rng(1);
    std::vector<float> data(14 * 14 * 512);
    for (float& v : data) v = static_cast<float>(std::max(0.0, rng.normal()));
    const FeatureMap fm(14, 14, 512, std::move(data));
    PoolingOptions opts;
    opts.method = static_cast<PoolingMethod>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(pool(fm, opts));
}
BENCHMARK(BM_Pooling)->DenseRange(0, 5);

void BM_Ndcg(benchmark::State& state) {
    Rng rng(3);
    std::vector<std::uint8_t> y(200);
    for (auto& v : y) v = rng.below(2) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(ndcg_at_k(y, 80, 100));
}
BENCHMARK(BM_Ndcg);

}  // namespace
BENCHMARK_MAIN();
