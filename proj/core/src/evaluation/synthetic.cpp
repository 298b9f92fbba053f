#include "refinder/evaluation/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "refinder/errors.hpp"
#include "refinder/evaluation/random.hpp"

namespace refinder {

namespace {

std::vector<double> random_direction(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    double sq = 0.0;
    for (double& x : v) {
        x = rng.normal();
        sq += x * x;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
    return v;
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& cfg) {
    if (cfg.count < 2) throw ParameterError("synthetic corpus needs at least two items");
    if (cfg.signal_dims == 0 || cfg.signal_dims > cfg.dim)
        throw ParameterError("signal_dims must lie in [1, dim]");
    if (!(cfg.relevant_fraction > 0.0 && cfg.relevant_fraction < 1.0))
        throw ParameterError("relevant_fraction must lie in (0, 1)");
    if (cfg.distractor_clusters == 0) throw ParameterError("synthetic corpus needs a distractor cluster");
    if (cfg.confusers > cfg.distractor_clusters) throw ParameterError("more confusers than distractor clusters");

    const auto n_rel = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(cfg.relevant_fraction * static_cast<double>(cfg.count))));
    if (n_rel >= cfg.count) throw ParameterError("relevant class would fill the corpus");

    Rng rng(cfg.seed);
    const std::size_t s = cfg.signal_dims;

    // Cluster 0 is the relevant class; clusters 1..confusers sit close to it.
    std::vector<std::vector<double>> centres(cfg.distractor_clusters + 1);
    centres[0] = random_direction(rng, s);
    for (double& x : centres[0]) x *= cfg.centre_norm;
    for (std::size_t k = 1; k <= cfg.distractor_clusters; ++k) {
        auto dir = random_direction(rng, s);
        if (k <= cfg.confusers) {
            centres[k] = centres[0];
            for (std::size_t i = 0; i < s; ++i) centres[k][i] += cfg.confuser_offset * dir[i];
        } else {
            for (double& x : dir) x *= cfg.centre_norm;
            centres[k] = std::move(dir);
        }
    }

    std::vector<std::size_t> all(cfg.count);
    for (std::size_t i = 0; i < cfg.count; ++i) all[i] = i;
    std::vector<std::uint8_t> is_rel(cfg.count, 0);
    for (std::size_t i : rng.sample(all, n_rel)) is_rel[i] = 1;

    SyntheticCorpus out;
    out.label = cfg.label;
    out.entries.reserve(cfg.count);
    std::size_t next_distractor = 0;
    char id[32];
    for (std::size_t i = 0; i < cfg.count; ++i) {
        const std::size_t cluster = is_rel[i] ? 0 : 1 + (next_distractor++ % cfg.distractor_clusters);
        CorpusEntry e;
        std::snprintf(id, sizeof id, "syn-%05zu", i);
        e.image_id = id;
        e.image_uri = std::string("synthetic://") + id;
        e.values.resize(cfg.dim);
        for (std::size_t d = 0; d < s; ++d)
            e.values[d] = static_cast<float>(centres[cluster][d] + cfg.signal_spread * rng.normal());
        for (std::size_t d = s; d < cfg.dim; ++d) e.values[d] = static_cast<float>(cfg.clutter * rng.normal());
        if (is_rel[i]) {
            e.labels.push_back(cfg.label);
            out.relevant_ids.push_back(e.image_id);
        } else {
            e.labels.push_back("cluster-" + std::to_string(cluster));
        }
        out.entries.push_back(std::move(e));
    }
    return out;
}

}  // namespace refinder
