#include "refinder/feedback/metric_learning.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "refinder/errors.hpp"

namespace refinder {

namespace {

// Per-dimension sums of squared differences over a pair list.
Eigen::VectorXd squared_diff_sum(const PairSet& pairs, const std::vector<std::pair<std::size_t, std::size_t>>& list) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(pairs.points.cols());
    for (auto [i, j] : list) {
        acc += (pairs.points.row(static_cast<Eigen::Index>(i)) - pairs.points.row(static_cast<Eigen::Index>(j)))
                   .array()
                   .square()
                   .matrix()
                   .transpose();
    }
    return acc;
}

Eigen::MatrixXd pair_diffs_squared(const PairSet& pairs, const std::vector<std::pair<std::size_t, std::size_t>>& list) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(list.size()), pairs.points.cols());
    for (std::size_t r = 0; r < list.size(); ++r) {
        auto [i, j] = list[r];
        out.row(static_cast<Eigen::Index>(r)) =
            (pairs.points.row(static_cast<Eigen::Index>(i)) - pairs.points.row(static_cast<Eigen::Index>(j)))
                .array()
                .square()
                .matrix();
    }
    return out;
}

// One normalized projected-gradient step: move at most `step` per coordinate,
// clip at zero and rescale to sum D. Returns false if the iterate collapsed.
bool projected_step(Eigen::VectorXd& w, const Eigen::VectorXd& grad, double step) {
    const double gmax = grad.cwiseAbs().maxCoeff();
    if (!(gmax > 0.0) || !std::isfinite(gmax)) return false;
    Eigen::VectorXd next = (w - (step / gmax) * grad).cwiseMax(0.0);
    const double sum = next.sum();
    if (!(sum > 0.0)) return false;
    w = next * (static_cast<double>(w.size()) / sum);
    return true;
}

double percentile(std::vector<double> v, double pct) {
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v.front();
    const double pos = pct / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

PairSet make_pairs(const SampleMatrix& positives, const SampleMatrix& negatives) {
    if (positives.rows() > 0 && negatives.rows() > 0 && positives.cols() != negatives.cols())
        throw DimensionError("positive and negative exemplars differ in dimension");
    PairSet p;
    const Eigen::Index np = positives.rows();
    const Eigen::Index nn = negatives.rows();
    const Eigen::Index d = np > 0 ? positives.cols() : negatives.cols();
    p.points.resize(np + nn, d);
    if (np > 0) p.points.topRows(np) = positives;
    if (nn > 0) p.points.bottomRows(nn) = negatives;
    for (Eigen::Index i = 0; i < np; ++i)
        for (Eigen::Index j = i + 1; j < np; ++j) p.similar.emplace_back(i, j);
    for (Eigen::Index i = 0; i < np; ++i)
        for (Eigen::Index n = 0; n < nn; ++n) p.dissimilar.emplace_back(i, np + n);
    return p;
}

// ---------------------------------------------------------------------------
// Feature weighting

double feature_weighting_objective(const PairSet& pairs, const Eigen::VectorXd& w) {
    const double sim = w.dot(squared_diff_sum(pairs, pairs.similar));
    if (pairs.dissimilar.empty()) return sim;
    const double dis = w.dot(squared_diff_sum(pairs, pairs.dissimilar));
    if (!(dis > 0.0)) return std::numeric_limits<double>::infinity();
    return sim / dis;
}

LearnedMetric feature_weighting_fit(const SampleMatrix& positives, const SampleMatrix& negatives,
                                    const DiagonalOptions& options) {
    const PairSet pairs = make_pairs(positives, negatives);
    if (pairs.similar.empty() && pairs.dissimilar.empty())
        throw FeedbackError("feature weighting needs two relevant examples or one of each kind");

    const Eigen::VectorXd s = squared_diff_sum(pairs, pairs.similar);
    const Eigen::VectorXd t = squared_diff_sum(pairs, pairs.dissimilar);
    const bool ratio = !pairs.dissimilar.empty();
    auto objective = [&](const Eigen::VectorXd& w) {
        if (!ratio) return w.dot(s);
        const double den = w.dot(t);
        return den > 0.0 ? w.dot(s) / den : std::numeric_limits<double>::infinity();
    };

    Eigen::VectorXd w = Eigen::VectorXd::Ones(pairs.points.cols());
    Eigen::VectorXd best = w;
    double best_obj = objective(w);
    for (std::size_t it = 0; it < options.iterations; ++it) {
        Eigen::VectorXd grad;
        if (ratio) {
            const double S = w.dot(s);
            const double T = w.dot(t);
            if (!(T > 0.0)) break;
            grad = (s * T - t * S) / (T * T);
        } else {
            grad = s;
        }
        if (!projected_step(w, grad, options.step)) break;
        const double obj = objective(w);
        if (obj < best_obj) {
            best_obj = obj;
            best = w;
        }
    }
    return LearnedMetric::diagonal(best);
}

// ---------------------------------------------------------------------------
// Diagonal MMC

double mmc_separation(const PairSet& pairs, const Eigen::VectorXd& w) {
    double acc = 0.0;
    for (auto [i, j] : pairs.dissimilar) {
        const Eigen::RowVectorXd diff =
            pairs.points.row(static_cast<Eigen::Index>(i)) - pairs.points.row(static_cast<Eigen::Index>(j));
        acc += std::sqrt(std::max(0.0, diff.array().square().matrix().dot(w.transpose())));
    }
    return acc;
}

double mmc_similar_sum(const PairSet& pairs, const Eigen::VectorXd& w) {
    return w.dot(squared_diff_sum(pairs, pairs.similar));
}

LearnedMetric mmc_diag_fit(const SampleMatrix& positives, const SampleMatrix& negatives,
                           const DiagonalOptions& options) {
    const PairSet pairs = make_pairs(positives, negatives);
    if (pairs.dissimilar.empty()) throw FeedbackError("diagonal MMC needs at least one dissimilar pair");
    if (pairs.similar.empty()) throw FeedbackError("diagonal MMC needs at least one similar pair");

    // Optimize on differences rescaled by the mean dissimilar distance so the
    // learned direction does not depend on the scale of the data.
    const Eigen::MatrixXd dis_sq_raw = pair_diffs_squared(pairs, pairs.dissimilar);
    const double mean_dis = dis_sq_raw.rowwise().sum().cwiseSqrt().mean();
    if (!(mean_dis > 0.0)) throw FeedbackError("all dissimilar pairs coincide; MMC is infeasible");
    const double scale2 = 1.0 / (mean_dis * mean_dis);
    const Eigen::VectorXd s = squared_diff_sum(pairs, pairs.similar) * scale2;
    const Eigen::MatrixXd dis_sq = dis_sq_raw * scale2;

    // Xing et al.: g(w) = sum_sim d_w - log(sum_dis sqrt(d_w)).
    auto separation = [&](const Eigen::VectorXd& w) { return (dis_sq * w).cwiseMax(0.0).cwiseSqrt().sum(); };
    auto objective = [&](const Eigen::VectorXd& w) {
        const double sep = separation(w);
        return sep > 0.0 ? w.dot(s) - std::log(sep) : std::numeric_limits<double>::infinity();
    };

    Eigen::VectorXd w = Eigen::VectorXd::Ones(pairs.points.cols());
    Eigen::VectorXd best = w;
    double best_obj = objective(w);
    for (std::size_t it = 0; it < options.iterations; ++it) {
        const Eigen::VectorXd dist = dis_sq * w;
        const double sep = dist.cwiseMax(0.0).cwiseSqrt().sum();
        if (!(sep > 0.0)) break;
        Eigen::VectorXd dsep = Eigen::VectorXd::Zero(w.size());
        for (Eigen::Index p = 0; p < dis_sq.rows(); ++p) {
            if (dist[p] > 0.0) dsep += dis_sq.row(p).transpose() / (2.0 * std::sqrt(dist[p]));
        }
        const Eigen::VectorXd grad = s - dsep / sep;
        if (!projected_step(w, grad, options.step)) break;
        const double obj = objective(w);
        if (obj < best_obj) {
            best_obj = obj;
            best = w;
        }
    }

    // Scale onto the constraint boundary: separation(c w) = sqrt(c) separation(w) = 1.
    const double sep = mmc_separation(pairs, best);
    if (!(sep > 0.0)) throw FeedbackError("diagonal MMC collapsed every dissimilar pair");
    return LearnedMetric::diagonal(best / (sep * sep));
}

// ---------------------------------------------------------------------------
// ITML

ItmlThresholds itml_thresholds(const CorpusIndex& index, std::span<const float> query, const Ranking& baseline,
                               std::span<const std::size_t> negatives, const ItmlOptions& options) {
    if (baseline.items.empty()) throw ParameterError("ITML thresholds need a non-empty baseline ranking");
    std::unordered_set<std::size_t> neg(negatives.begin(), negatives.end());
    std::vector<double> d2;
    d2.reserve(baseline.size());
    std::optional<double> first_negative;
    for (const RankedItem& item : baseline.items) {
        const double d = squared_euclidean(index.row(item.pos), query);
        d2.push_back(d);
        if (!first_negative && neg.count(item.pos)) first_negative = d;
    }
    ItmlThresholds t;
    t.lower = percentile(d2, options.lower_percentile);
    t.upper = options.upper_fraction * (first_negative ? *first_negative : percentile(d2, 50.0));
    if (t.upper >= t.lower) {
        t.upper = 0.9 * t.lower;
        t.adjusted = true;
    }
    return t;
}

ItmlResult itml_solve(const PairSet& pairs, const ItmlThresholds& thresholds, const ItmlOptions& options) {
    const SampleMatrix& x = pairs.points;
    const Eigen::Index d = x.cols();
    if (!(thresholds.upper > 0.0) || !(thresholds.lower > 0.0))
        throw ParameterError("ITML thresholds must be positive");
    if (!(options.gamma > 0.0)) throw ParameterError("ITML gamma must be positive");

    struct Constraint {
        Eigen::Index i, j;
        double sign;    // +1 similar, -1 dissimilar
        double target;  // original threshold
        double bhat;    // slack-adjusted threshold
        double lambda;
    };
    std::vector<Constraint> cons;
    constexpr double kEps = 1e-12;
    auto add = [&](const auto& list, double sign, double target) {
        for (auto [i, j] : list) {
            const auto a = static_cast<Eigen::Index>(i);
            const auto b = static_cast<Eigen::Index>(j);
            if ((x.row(a) - x.row(b)).squaredNorm() <= kEps) continue;  // coincident points carry no constraint
            cons.push_back({a, b, sign, target, target, 0.0});
        }
    };
    add(pairs.similar, 1.0, thresholds.upper);
    add(pairs.dissimilar, -1.0, thresholds.lower);

    ItmlResult result{LearnedMetric::identity(static_cast<std::size_t>(d)), thresholds};
    if (cons.empty()) return result;

    const bool hard = std::isinf(options.gamma);
    const double gamma_proj = hard ? 1.0 : options.gamma / (options.gamma + 1.0);

    // M is kept alongside Y = X M and G = X M X^T, so each constraint's
    // current distance G_ii + G_jj - 2 G_ij is available in O(1).
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd Y = x;
    Eigen::MatrixXd G = x * x.transpose();

    auto distance = [&](const Constraint& c) { return G(c.i, c.i) + G(c.j, c.j) - 2.0 * G(c.i, c.j); };
    auto max_violation = [&]() {
        double worst = 0.0;
        for (const Constraint& c : cons) {
            const double v = c.sign > 0 ? distance(c) - c.target : c.target - distance(c);
            worst = std::max(worst, v);
        }
        return worst;
    };

    Eigen::VectorXd lambda_old = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cons.size()));
    result.max_violation = max_violation();
    result.converged = result.max_violation < options.tolerance;
    bool updated = false;
    std::size_t sweep = 0;
    while (!result.converged && sweep < options.max_sweeps) {
        ++sweep;
        for (Constraint& c : cons) {
            const double p = distance(c);
            if (!(p > kEps)) continue;
            const double alpha = std::min(c.lambda, c.sign * gamma_proj * (1.0 / p - 1.0 / c.bhat));
            if (alpha == 0.0) continue;
            c.lambda -= alpha;
            const double beta = c.sign * alpha / (1.0 - c.sign * alpha * p);
            if (!hard) c.bhat = 1.0 / (1.0 / c.bhat + c.sign * alpha / options.gamma);
            const Eigen::RowVectorXd u = Y.row(c.i) - Y.row(c.j);  // (M v)^T
            const Eigen::VectorXd r = G.col(c.i) - G.col(c.j);     // X M v
            M.noalias() += beta * u.transpose() * u;
            Y.noalias() += beta * r * u;
            G.noalias() += beta * r * r.transpose();
            updated = true;
        }
        // Refresh the cached Gram matrix to keep rounding from accumulating.
        G = Y * x.transpose();
        G = 0.5 * (G + G.transpose()).eval();

        result.max_violation = max_violation();
        if (result.max_violation < options.tolerance) {
            result.converged = true;
        } else if (!hard) {
            // Slack variant: constraints are only softly enforced, stop on dual stagnation.
            Eigen::VectorXd lambda(static_cast<Eigen::Index>(cons.size()));
            for (std::size_t k = 0; k < cons.size(); ++k) lambda[static_cast<Eigen::Index>(k)] = cons[k].lambda;
            const double norm = lambda.norm() + lambda_old.norm();
            if (norm > 0.0 && (lambda - lambda_old).cwiseAbs().sum() / norm < options.tolerance) result.converged = true;
            lambda_old = lambda;
        }
    }
    result.sweeps = sweep;
    if (updated) result.metric = LearnedMetric::full(0.5 * (M + M.transpose()));
    return result;
}

ItmlResult itml_fit(const CorpusIndex& index, std::span<const float> query, std::span<const std::size_t> positives,
                    std::span<const std::size_t> negatives, const Ranking& baseline, const ItmlOptions& options) {
    if (query.size() != index.dim()) throw DimensionError("ITML query dimension mismatch");
    if (positives.empty() && negatives.empty()) {
        ItmlResult r{LearnedMetric::identity(index.dim()), {}};
        return r;
    }
    const ItmlThresholds thresholds = itml_thresholds(index, query, baseline, negatives, options);
    const SampleMatrix pos = with_row(SampleMatrix(0, static_cast<Eigen::Index>(index.dim())), query);
    SampleMatrix all_pos(1 + static_cast<Eigen::Index>(positives.size()), static_cast<Eigen::Index>(index.dim()));
    all_pos.row(0) = pos.row(0);
    if (!positives.empty()) all_pos.bottomRows(static_cast<Eigen::Index>(positives.size())) = gather_rows(index, positives);
    const PairSet pairs = make_pairs(all_pos, gather_rows(index, negatives));
    return itml_solve(pairs, thresholds, options);
}

}  // namespace refinder
