#include "refinder/feedback/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "refinder/errors.hpp"

namespace refinder {

LinearScorer svm_two_class_fit(const SampleMatrix& positives, const SampleMatrix& negatives,
                               const SvmOptions& options) {
    if (positives.rows() == 0 || negatives.rows() == 0)
        throw FeedbackError("two-class SVM needs relevant and irrelevant examples");
    if (positives.cols() != negatives.cols()) throw DimensionError("SVM classes differ in dimension");
    if (!(options.c > 0.0)) throw ParameterError("SVM C must be positive");

    // Augmented samples [x, 1] so the bias is learned as an ordinary weight.
    const Eigen::Index d = positives.cols();
    const Eigen::Index n = positives.rows() + negatives.rows();
    Eigen::MatrixXd x(n, d + 1);
    x.topLeftCorner(positives.rows(), d) = positives;
    x.bottomLeftCorner(negatives.rows(), d) = negatives;
    x.col(d).setOnes();
    Eigen::VectorXd y(n);
    y.head(positives.rows()).setOnes();
    y.tail(negatives.rows()).setConstant(-1.0);

    const Eigen::VectorXd qdiag = x.rowwise().squaredNorm();
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    const double c = options.c;

    // Dual coordinate descent for the L1-loss SVM, cyclic order.
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        double pg_max = -std::numeric_limits<double>::infinity();
        double pg_min = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double g = y[i] * w.dot(x.row(i)) - 1.0;
            double pg = g;
            if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
            else if (alpha[i] >= c) pg = std::max(g, 0.0);
            pg_max = std::max(pg_max, pg);
            pg_min = std::min(pg_min, pg);
            if (std::abs(pg) > 0.0) {
                const double old = alpha[i];
                alpha[i] = std::clamp(old - g / qdiag[i], 0.0, c);
                w += (alpha[i] - old) * y[i] * x.row(i).transpose();
            }
        }
        if (pg_max - pg_min < options.tolerance) break;
    }
    return LinearScorer(w.head(d), w[d]);
}

LinearScorer svm_one_class_fit(const SampleMatrix& positives, const SvmOptions& options) {
    const Eigen::Index n = positives.rows();
    if (n == 0) throw FeedbackError("one-class SVM needs at least one relevant example");
    if (!(options.nu > 0.0 && options.nu <= 1.0)) throw ParameterError("one-class SVM nu must lie in (0, 1]");

    // Dual: min 1/2 a^T K a  s.t. 0 <= a_i <= 1/(nu n), sum a = 1.
    const Eigen::MatrixXd k = positives * positives.transpose();
    const double upper = 1.0 / (options.nu * static_cast<double>(n));
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    double remaining = 1.0;
    for (Eigen::Index i = 0; i < n && remaining > 0.0; ++i) {
        alpha[i] = std::min(upper, remaining);
        remaining -= alpha[i];
    }
    Eigen::VectorXd grad = k * alpha;

    const double eps = 1e-15;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        // Maximal violating pair: raise the smallest gradient, lower the largest.
        Eigen::Index up = -1, down = -1;
        double g_up = std::numeric_limits<double>::infinity();
        double g_down = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (alpha[i] < upper - eps && grad[i] < g_up) { g_up = grad[i]; up = i; }
            if (alpha[i] > eps && grad[i] > g_down) { g_down = grad[i]; down = i; }
        }
        if (up < 0 || down < 0 || g_down - g_up < options.tolerance) break;
        const double curvature = std::max(k(up, up) + k(down, down) - 2.0 * k(up, down), 1e-12);
        double t = (g_down - g_up) / curvature;
        t = std::min({t, upper - alpha[up], alpha[down]});
        alpha[up] += t;
        alpha[down] -= t;
        grad += t * (k.col(up) - k.col(down));
    }

    // rho: mean gradient over free multipliers, midpoint of the bounds otherwise.
    double sum = 0.0;
    std::size_t free = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (alpha[i] > eps && alpha[i] < upper - eps) {
            sum += grad[i];
            ++free;
        } else if (alpha[i] <= eps) {
            hi = std::min(hi, grad[i]);
        } else {
            lo = std::max(lo, grad[i]);
        }
    }
    double rho;
    if (free > 0) rho = sum / static_cast<double>(free);
    else if (std::isfinite(lo) && std::isfinite(hi)) rho = 0.5 * (lo + hi);
    else rho = std::isfinite(lo) ? lo : hi;

    const Eigen::VectorXd w = positives.transpose() * alpha;
    return LinearScorer(w, -rho);
}

LinearScorer svm_fit(const SampleMatrix& positives, const SampleMatrix& negatives, const SvmOptions& options) {
    if (positives.rows() == 0) throw FeedbackError("SVM needs at least one relevant example");
    if (negatives.rows() == 0) return svm_one_class_fit(positives, options);
    return svm_two_class_fit(positives, negatives, options);
}

LinearScorer exemplar_lda_fit(const SampleMatrix& positives, const BackgroundStats& background) {
    if (positives.rows() == 0) throw FeedbackError("Exemplar-LDA needs at least one relevant example");
    if (static_cast<std::size_t>(positives.cols()) != background.dim())
        throw DimensionError("Exemplar-LDA exemplars do not match the background dimension");
    const Eigen::VectorXd mu = positives.colwise().mean().transpose();
    Eigen::VectorXd w = background.solve(mu - background.mean());
    if (!w.allFinite()) throw ConditioningError("Exemplar-LDA solve produced non-finite weights");
    return LinearScorer(std::move(w), 0.0);
}

}  // namespace refinder
