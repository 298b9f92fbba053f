#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refinder/corpus_index.hpp"
#include "refinder/feedback/background.hpp"
#include "refinder/feedback/classifiers.hpp"
#include "refinder/feedback/kde.hpp"
#include "refinder/feedback/metric_learning.hpp"
#include "refinder/feedback/state.hpp"
#include "refinder/ranking.hpp"

namespace refinder {

enum class Method {
    kde,
    feature_weighting,
    mmc_diag,
    itml,
    svm,
    exemplar_lda,
    feature_weighting_kde,
    mmc_diag_kde,
    itml_kde,
};

std::string_view method_name(Method m);
/// Throws ParameterError for an unknown name.
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

bool learns_metric(Method m);
bool adds_kde(Method m);

struct FeedbackParams {
    DiagonalOptions diagonal;
    ItmlOptions itml;
    SvmOptions svm;
    double elda_shrinkage_scale = BackgroundStats::kDefaultShrinkageScale;
};

/// The query of a session: its vector and, when it is a corpus item, the
/// position that is excluded from every ranking.
struct QueryRef {
    std::span<const float> vector;
    std::optional<std::size_t> pos;
};

/// Everything a refinement needs besides the feedback itself.
struct RefineContext {
    const CorpusIndex& index;
    QueryRef query;
    const Ranking& baseline;
    const BackgroundStats* background = nullptr;  // required for exemplar_lda
};

/// Scores every corpus item (except the query) from the feedback in `state`
/// and returns the full ranking: descending relevance for KDE and the
/// classifiers, ascending learned distance for the metric-learning methods.
/// The query is always treated as a positive example.
Ranking compute_refined_ranking(const RefineContext& ctx, const FeedbackState& state, Method method,
                                const FeedbackParams& params = {});

struct ScoredId {
    std::string image_id;
    double score;
};

/// Top `k` entries of compute_refined_ranking as (image id, score).
std::vector<ScoredId> refine_ranking(const RefineContext& ctx, const FeedbackState& state, Method method,
                                     std::size_t k, const FeedbackParams& params = {});

/// KDE scorer whose kernel distances are taken under `base`; bandwidth
/// fallback and no-negative surrogate are derived from `index` and `query`.
KdeScorer combine_with_kde(const LearnedMetric& base, const SampleMatrix& positives, const SampleMatrix& negatives,
                           const CorpusIndex& index, const QueryRef& query);

}  // namespace refinder
