#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "refinder/evaluation/simulation.hpp"
#include "refinder/evaluation/stats.hpp"

namespace refinder {

struct BenchmarkQuery {
    std::string image_id;
    std::string label;  // relevant items are those carrying this label
    bool operator==(const BenchmarkQuery&) const = default;
};

/// A named feedback strategy evaluated by run_benchmark.
struct MethodSpec {
    std::string name;
    std::function<Ranking(const RefineContext&, const FeedbackState&)> refine;
    bool needs_background = false;  // fills RefineContext::background
};

MethodSpec builtin_method(Method method, FeedbackParams params = {});

struct RoundStats {
    double mean = 0.0;                     // mean over repetitions of the per-repetition query mean
    double std = 0.0;                      // sample standard deviation of the repetition means
    std::size_t n = 0;                     // number of repetitions
    std::vector<double> repetition_means;  // one per repetition
    std::vector<double> samples;           // NDCG per (repetition, query), repetition-major
};

struct PairedComparison {
    std::size_t round = 0;
    std::string a, b;
    TTestResult test;
    bool significant() const { return test.p < 0.05; }
};

struct BenchmarkReport {
    SimulationConfig config;
    std::vector<std::string> methods;
    std::vector<BenchmarkQuery> queries;  // sorted by (image_id, label)
    std::vector<std::vector<RoundStats>> stats;  // [method][round]
    std::vector<PairedComparison> comparisons;   // every method pair, every round
    std::vector<std::size_t> failed_rounds;      // per method

    const RoundStats& at(const std::string& method, std::size_t round) const;

    /// "method,round,mean_ndcg,std,n" with %.6f reals and LF line endings.
    std::string to_csv() const;
    nlohmann::json to_json() const;
    static BenchmarkReport from_json(const nlohmann::json& doc);
};

/// Repeats every (query, method) session on `config.repetitions` random
/// subsamples of the corpus (queries always kept) and aggregates NDCG@eval_k
/// per round. Sessions run on `threads` workers; results do not depend on it.
BenchmarkReport run_benchmark(const CorpusIndex& index, std::span<const BenchmarkQuery> queries,
                              std::span<const MethodSpec> methods, const SimulationConfig& config,
                              std::size_t threads = 1);

}  // namespace refinder
