#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "refinder/errors.hpp"
#include "refinder/evaluation/benchmark.hpp"
#include "refinder/evaluation/synthetic.hpp"

using namespace refinder;

namespace {

struct Corpus {
    CorpusIndex index;
    std::vector<BenchmarkQuery> queries;
};

Corpus setup(std::size_t nq = 4) {
    SyntheticConfig cfg;
    cfg.count = 300;
    cfg.dim = 12;
    cfg.relevant_fraction = 0.2;
    cfg.signal_dims = 4;
    cfg.distractor_clusters = 3;
    cfg.confusers = 1;
    cfg.confuser_offset = 1.0;
    cfg.seed = 5;
    SyntheticCorpus c = make_synthetic_corpus(cfg);
    Corpus s{build_index(std::move(c.entries)), {}};
    for (std::size_t i = 0; i < nq; ++i) s.queries.push_back({c.relevant_ids[i * 7], c.label});
    return s;
}

SimulationConfig small_config() {
    SimulationConfig c;
    c.rounds = 3;
    c.marks_per_round = 5;
    c.pool_depth = 30;
    c.eval_k = 30;
    c.repetitions = 3;
    c.subsample_fraction = 0.75;
    c.rng_seed = 17;
    return c;
}

// Ranks every relevant item first, in baseline order otherwise.
MethodSpec oracle_method(const std::string& label) {
    return {"oracle", [label](const RefineContext& ctx, const FeedbackState&) {
                Ranking r = ctx.baseline;
                std::stable_partition(r.items.begin(), r.items.end(),
                                      [&](const RankedItem& it) { return ctx.index.has_label(it.pos, label); });
                return r;
            }};
}

MethodSpec baseline_method() {
    return {"baseline", [](const RefineContext& ctx, const FeedbackState&) { return ctx.baseline; }};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Benchmark, FullFractionBaselineIsIdenticalAcrossRepetitions) {
    const Corpus s = setup();
    SimulationConfig c = small_config();
    c.subsample_fraction = 1.0;
    c.repetitions = 2;
    const std::vector<MethodSpec> methods{builtin_method(Method::itml)};
    const BenchmarkReport r = run_benchmark(s.index, s.queries, methods, c);
    // Every repetition sees the whole corpus; only the simulated marks differ.
    const RoundStats& st = r.stats[0][0];
    ASSERT_EQ(st.repetition_means.size(), 2u);
    EXPECT_EQ(st.repetition_means[0], st.repetition_means[1]);
    EXPECT_EQ(st.std, 0.0);
}

TEST(Benchmark, SingleMethodHasNoTTests) {
    const Corpus s = setup();
    const std::vector<MethodSpec> methods{builtin_method(Method::kde)};
    const BenchmarkReport r = run_benchmark(s.index, s.queries, methods, small_config());
    EXPECT_TRUE(r.comparisons.empty());
    EXPECT_EQ(r.stats.size(), 1u);
    EXPECT_EQ(r.stats[0].size(), 4u);
}

TEST(Benchmark, DominantMethodIsSignificant) {
    const Corpus s = setup(6);
    const std::vector<MethodSpec> methods{oracle_method(s.queries[0].label), baseline_method()};
    const BenchmarkReport r = run_benchmark(s.index, s.queries, methods, small_config());
    ASSERT_EQ(r.comparisons.size(), 4u);
    for (const PairedComparison& c : r.comparisons) {
        if (c.round == 0) {
            EXPECT_EQ(c.test.p, 1.0);
            continue;
        }
        EXPECT_LT(c.test.p, 0.05) << "round " << c.round;
        EXPECT_TRUE(c.significant());
        EXPECT_GT(c.test.t, 0.0);
    }
    for (std::size_t round = 1; round <= 3; ++round) EXPECT_DOUBLE_EQ(r.at("oracle", round).mean, 1.0);
}

TEST(Benchmark, StatisticsAreConsistent) {
    const Corpus s = setup();
    const std::vector<MethodSpec> methods{builtin_method(Method::itml), builtin_method(Method::svm)};
    const SimulationConfig c = small_config();
    const BenchmarkReport r = run_benchmark(s.index, s.queries, methods, c);
    for (const auto& per_method : r.stats)
        for (const RoundStats& st : per_method) {
            ASSERT_EQ(st.n, c.repetitions);
            ASSERT_EQ(st.samples.size(), c.repetitions * s.queries.size());
            double mean = 0.0;
            for (std::size_t rep = 0; rep < c.repetitions; ++rep) {
                double m = 0.0;
                for (std::size_t q = 0; q < s.queries.size(); ++q) m += st.samples[rep * s.queries.size() + q];
                m /= double(s.queries.size());
                EXPECT_NEAR(st.repetition_means[rep], m, 1e-12);
                mean += m / double(c.repetitions);
            }
            EXPECT_NEAR(st.mean, mean, 1e-12);
            double ss = 0.0;
            for (double m : st.repetition_means) ss += (m - mean) * (m - mean);
            EXPECT_NEAR(st.std, std::sqrt(ss / double(c.repetitions - 1)), 1e-12);
            EXPECT_GE(st.mean, 0.0);
            EXPECT_LE(st.mean, 1.0);
            EXPECT_GE(st.std, 0.0);
        }
}

TEST(Benchmark, InvariantToQueryOrder) {
    const Corpus s = setup(5);
    std::vector<BenchmarkQuery> shuffled(s.queries.rbegin(), s.queries.rend());
    std::swap(shuffled[0], shuffled[2]);
    const std::vector<MethodSpec> methods{builtin_method(Method::itml), builtin_method(Method::kde)};
    const auto a = run_benchmark(s.index, s.queries, methods, small_config());
    const auto b = run_benchmark(s.index, shuffled, methods, small_config());
    EXPECT_EQ(a.to_csv(), b.to_csv());
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(Benchmark, ThreadCountDoesNotChangeResults) {
    const Corpus s = setup();
    const std::vector<MethodSpec> methods{builtin_method(Method::itml), builtin_method(Method::exemplar_lda)};
    const auto a = run_benchmark(s.index, s.queries, methods, small_config(), 1);
    const auto b = run_benchmark(s.index, s.queries, methods, small_config(), 4);
    EXPECT_EQ(a.to_csv(), b.to_csv());
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(Benchmark, SeedChangesSubsamples) {
    const Corpus s = setup();
    const std::vector<MethodSpec> methods{builtin_method(Method::kde)};
    SimulationConfig c = small_config();
    const auto a = run_benchmark(s.index, s.queries, methods, c);
    c.rng_seed = 18;
    const auto b = run_benchmark(s.index, s.queries, methods, c);
    EXPECT_NE(a.to_json().dump(), b.to_json().dump());
}

TEST(Benchmark, CsvLayout) {
    const Corpus s = setup(2);
    const std::vector<MethodSpec> methods{builtin_method(Method::itml), builtin_method(Method::kde)};
    const auto r = run_benchmark(s.index, s.queries, methods, small_config());
    const std::string csv = r.to_csv();
    EXPECT_EQ(csv.rfind("method,round,mean_ndcg,std,n\n", 0), 0u);
    EXPECT_EQ(count_lines(csv), 1u + 2u * 4u);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    EXPECT_EQ(line.rfind("itml,0,", 0), 0u);
    EXPECT_EQ(line.substr(line.size() - 2), ",3");
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
}

TEST(Benchmark, JsonRoundTrip) {
    const Corpus s = setup(3);
    const std::vector<MethodSpec> methods{builtin_method(Method::itml), builtin_method(Method::svm),
                                          builtin_method(Method::kde)};
    const auto r = run_benchmark(s.index, s.queries, methods, small_config());
    const nlohmann::json doc = r.to_json();
    EXPECT_EQ(doc.at("format"), "refinder-benchmark/1");
    EXPECT_EQ(doc.at("t_tests").size(), 3u * 4u);
    EXPECT_EQ(doc.at("p_value_matrix").size(), 4u);
    const BenchmarkReport back = BenchmarkReport::from_json(nlohmann::json::parse(doc.dump()));
    EXPECT_EQ(back.to_json().dump(), doc.dump());
    EXPECT_EQ(back.to_csv(), r.to_csv());
    EXPECT_EQ(back.queries, r.queries);
}

TEST(Benchmark, AtRejectsUnknownKeys) {
    const Corpus s = setup(1);
    const std::vector<MethodSpec> methods{builtin_method(Method::kde)};
    const auto r = run_benchmark(s.index, s.queries, methods, small_config());
    EXPECT_THROW(r.at("svm", 0), NotFoundError);
    EXPECT_THROW(r.at("kde", 99), NotFoundError);
}

TEST(Benchmark, FromJsonRejectsOtherDocuments) {
    EXPECT_THROW(BenchmarkReport::from_json(nlohmann::json::object()), ValidationError);
    EXPECT_THROW(BenchmarkReport::from_json(nlohmann::json{{"format", "refinder-benchmark/1"}}), ValidationError);
}

TEST(Benchmark, InputErrors) {
    const Corpus s = setup();
    const std::vector<MethodSpec> methods{builtin_method(Method::itml)};
    EXPECT_THROW(run_benchmark(s.index, {}, methods, small_config()), ParameterError);
    EXPECT_THROW(run_benchmark(s.index, s.queries, {}, small_config()), ParameterError);
    const std::vector<MethodSpec> dup{builtin_method(Method::itml), builtin_method(Method::itml)};
    EXPECT_THROW(run_benchmark(s.index, s.queries, dup, small_config()), ParameterError);
    const std::vector<BenchmarkQuery> unknown{{"nope", "relevant"}};
    EXPECT_THROW(run_benchmark(s.index, unknown, methods, small_config()), NotFoundError);
    const std::vector<BenchmarkQuery> no_label{{s.queries[0].image_id, "no-such-label"}};
    EXPECT_THROW(run_benchmark(s.index, no_label, methods, small_config()), ParameterError);
}
