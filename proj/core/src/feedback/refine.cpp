#include "refinder/feedback/refine.hpp"

#include <array>
#include <string>

#include "refinder/errors.hpp"

namespace refinder {

namespace {

struct MethodInfo {
    Method method;
    std::string_view name;
};

constexpr std::array<MethodInfo, 9> kMethods{{
    {Method::kde, "kde"},
    {Method::feature_weighting, "feature-weighting"},
    {Method::mmc_diag, "mmc-diag"},
    {Method::itml, "itml"},
    {Method::svm, "svm"},
    {Method::exemplar_lda, "exemplar-lda"},
    {Method::feature_weighting_kde, "feature-weighting+kde"},
    {Method::mmc_diag_kde, "mmc-diag+kde"},
    {Method::itml_kde, "itml+kde"},
}};

std::vector<std::size_t> resolve(const CorpusIndex& index, const std::vector<std::string>& ids,
                                 std::optional<std::size_t> skip) {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto pos = index.find(id);
        if (!pos) throw NotFoundError("image id '" + id + "' is not in the corpus");
        if (skip && *skip == *pos) continue;
        out.push_back(*pos);
    }
    return out;
}

KdeScorer fit_kde_for_query(const SampleMatrix& positives, const SampleMatrix& negatives, const LearnedMetric* metric,
                            const CorpusIndex& index, const QueryRef& query) {
    KdeContext ctx;
    ctx.fallback_bandwidth = median_query_distance(index, query.vector, metric, query.pos);
    if (!(ctx.fallback_bandwidth > 0.0)) ctx.fallback_bandwidth = 1.0;
    if (negatives.rows() == 0) {
        // Fit once without a negative model to measure the corpus-mean positive density.
        ctx.negative_surrogate_log_density = 0.0;
        const KdeScorer probe = kde_fit(positives, negatives, metric, ctx);
        ctx.negative_surrogate_log_density = corpus_mean_log_density(index, probe, query.pos);
    }
    return kde_fit(positives, negatives, metric, ctx);
}

Ranking score_all(const CorpusIndex& index, const RelevanceScorer& scorer, std::optional<std::size_t> exclude) {
    Ranking r;
    r.order = ScoreOrder::descending_relevance;
    r.items.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (exclude && *exclude == i) continue;
        r.items.push_back({static_cast<std::uint32_t>(i), scorer.score(index.row(i))});
    }
    sort_ranking(r, index);
    return r;
}

}  // namespace

std::string_view method_name(Method m) {
    for (const auto& info : kMethods)
        if (info.method == m) return info.name;
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (const auto& info : kMethods)
        if (info.name == name) return info.method;
    throw ParameterError("unknown feedback method '" + std::string(name) + "'");
}

std::vector<Method> all_methods() {
    std::vector<Method> out;
    for (const auto& info : kMethods) out.push_back(info.method);
    return out;
}

bool learns_metric(Method m) {
    switch (m) {
        case Method::feature_weighting:
        case Method::mmc_diag:
        case Method::itml:
        case Method::feature_weighting_kde:
        case Method::mmc_diag_kde:
        case Method::itml_kde: return true;
        default: return false;
    }
}

bool adds_kde(Method m) {
    return m == Method::kde || m == Method::feature_weighting_kde || m == Method::mmc_diag_kde ||
           m == Method::itml_kde;
}

KdeScorer combine_with_kde(const LearnedMetric& base, const SampleMatrix& positives, const SampleMatrix& negatives,
                           const CorpusIndex& index, const QueryRef& query) {
    return fit_kde_for_query(positives, negatives, &base, index, query);
}

Ranking compute_refined_ranking(const RefineContext& ctx, const FeedbackState& state, Method method,
                                const FeedbackParams& params) {
    const CorpusIndex& index = ctx.index;
    if (ctx.query.vector.size() != index.dim()) throw DimensionError("query dimension does not match the corpus");
    const auto exclude = ctx.query.pos;

    const std::vector<std::size_t> pos_ids = resolve(index, state.positives(), exclude);
    const std::vector<std::size_t> neg_ids = resolve(index, state.negatives(), std::nullopt);
    const SampleMatrix negatives = gather_rows(index, neg_ids);

    // The query is always the first relevant example.
    SampleMatrix pos_rows(1 + static_cast<Eigen::Index>(pos_ids.size()), static_cast<Eigen::Index>(index.dim()));
    pos_rows.row(0) = to_vector(ctx.query.vector).transpose();
    if (!pos_ids.empty()) pos_rows.bottomRows(static_cast<Eigen::Index>(pos_ids.size())) = gather_rows(index, pos_ids);

    if (learns_metric(method)) {
        std::optional<LearnedMetric> metric;
        if (!pos_ids.empty() || !neg_ids.empty()) {
            switch (method) {
                case Method::feature_weighting:
                case Method::feature_weighting_kde:
                    metric = feature_weighting_fit(pos_rows, negatives, params.diagonal);
                    break;
                case Method::mmc_diag:
                case Method::mmc_diag_kde:
                    // MMC is unbounded without both pair kinds; feature weighting covers those rounds.
                    metric = negatives.rows() > 0 && pos_rows.rows() > 1
                                 ? mmc_diag_fit(pos_rows, negatives, params.diagonal)
                                 : feature_weighting_fit(pos_rows, negatives, params.diagonal);
                    break;
                default:
                    metric = itml_fit(index, ctx.query.vector, pos_ids, neg_ids, ctx.baseline, params.itml).metric;
                    break;
            }
        }
        if (adds_kde(method)) {
            const LearnedMetric base = metric ? *metric : LearnedMetric::identity(index.dim());
            return score_all(index, combine_with_kde(base, pos_rows, negatives, index, ctx.query), exclude);
        }
        return rank_by_distance(index, ctx.query.vector, metric ? &*metric : nullptr, exclude);
    }

    switch (method) {
        case Method::kde:
            return score_all(index, fit_kde_for_query(pos_rows, negatives, nullptr, index, ctx.query), exclude);
        case Method::svm:
            return score_all(index, svm_fit(pos_rows, negatives, params.svm), exclude);
        case Method::exemplar_lda:
            if (!ctx.background) throw ParameterError("Exemplar-LDA needs background statistics");
            return score_all(index, exemplar_lda_fit(pos_rows, *ctx.background), exclude);
        default: break;
    }
    throw ParameterError("unsupported feedback method");
}

std::vector<ScoredId> refine_ranking(const RefineContext& ctx, const FeedbackState& state, Method method,
                                     std::size_t k, const FeedbackParams& params) {
    if (k < 1) throw ParameterError("k must be at least 1");
    const Ranking r = compute_refined_ranking(ctx, state, method, params);
    const std::size_t n = std::min(k, r.size());
    std::vector<ScoredId> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back({ctx.index.id(r.items[i].pos), r.items[i].score});
    return out;
}

}  // namespace refinder
