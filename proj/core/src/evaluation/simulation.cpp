#include "refinder/evaluation/simulation.hpp"

#include <algorithm>

#include "refinder/errors.hpp"
#include "refinder/evaluation/ndcg.hpp"
#include "refinder/evaluation/random.hpp"

namespace refinder {

void SimulationConfig::validate() const {
    if (rounds == 0) throw ParameterError("simulation needs at least one round");
    if (marks_per_round == 0) throw ParameterError("marks_per_round must be at least 1");
    if (marks_per_round > pool_depth) throw ParameterError("marks_per_round must not exceed pool_depth");
    if (eval_k == 0) throw ParameterError("eval_k must be at least 1");
    if (repetitions == 0) throw ParameterError("repetitions must be at least 1");
    if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
        throw ParameterError("subsample_fraction must lie in (0, 1]");
}

std::vector<std::uint8_t> label_relevance(const CorpusIndex& index, const std::string& label) {
    std::vector<std::uint8_t> out(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) out[i] = index.has_label(i, label) ? 1 : 0;
    return out;
}

double ranking_ndcg(const Ranking& ranking, std::span<const std::uint8_t> relevant, std::size_t total_relevant,
                    std::size_t k) {
    const std::size_t n = std::min(k, ranking.size());
    if (n == 0) return 0.0;
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = relevant[ranking.items[i].pos];
    return ndcg_at_k(y, total_relevant, n);
}

SessionTrajectory simulate_feedback_session(const CorpusIndex& index, std::size_t query_pos,
                                            std::span<const std::uint8_t> relevant, const Ranking& baseline,
                                            const Refiner& refine, const SimulationConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (query_pos >= index.size()) throw ParameterError("query position out of range");
    if (relevant.size() != index.size()) throw DimensionError("relevance labels do not cover the corpus");

    std::size_t total_relevant = 0;
    for (std::size_t i = 0; i < index.size(); ++i)
        if (i != query_pos && relevant[i]) ++total_relevant;

    SessionTrajectory out;
    out.ndcg.reserve(cfg.rounds + 1);
    out.errors.resize(cfg.rounds);
    out.ndcg.push_back(ranking_ndcg(baseline, relevant, total_relevant, cfg.eval_k));

    FeedbackState state(index.id(query_pos));
    std::vector<std::uint8_t> marked(index.size(), 0);
    Ranking current = baseline;
    std::vector<std::uint32_t> pool;
    for (std::size_t round = 1; round <= cfg.rounds; ++round) {
        pool.clear();
        const std::size_t depth = std::min(cfg.pool_depth, current.size());
        for (std::size_t i = 0; i < depth; ++i)
            if (!marked[current.items[i].pos]) pool.push_back(current.items[i].pos);

        Rng rng(derive_seed(seed, {round}));
        for (std::uint32_t pos : rng.sample(pool, cfg.marks_per_round)) {
            marked[pos] = 1;
            state.mark(index.id(pos), relevant[pos] != 0);
        }
        state.advance_round();

        try {
            current = refine(state);
        } catch (const Error& e) {
            out.errors[round - 1] = e.what();
            ++out.failed_rounds;
        }
        out.ndcg.push_back(ranking_ndcg(current, relevant, total_relevant, cfg.eval_k));
    }
    return out;
}

SessionTrajectory simulate_feedback_session(const CorpusIndex& index, std::size_t query_pos,
                                            std::span<const std::uint8_t> relevant, Method method,
                                            const FeedbackParams& params, const BackgroundStats* background,
                                            const SimulationConfig& cfg, std::uint64_t seed) {
    if (query_pos >= index.size()) throw ParameterError("query position out of range");
    const Ranking baseline = rank_by_distance(index, index.row(query_pos), nullptr, query_pos);
    const RefineContext ctx{index, QueryRef{index.row(query_pos), query_pos}, baseline, background};
    const Refiner refine = [&](const FeedbackState& state) {
        return compute_refined_ranking(ctx, state, method, params);
    };
    return simulate_feedback_session(index, query_pos, relevant, baseline, refine, cfg, seed);
}

}  // namespace refinder
