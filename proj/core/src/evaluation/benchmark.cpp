#include "refinder/evaluation/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <tuple>

#include "refinder/config.hpp"
#include "refinder/errors.hpp"
#include "refinder/evaluation/random.hpp"
#include "refinder/feedback/background.hpp"

namespace refinder {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t kSubsampleStream = 0x73756273616d706cULL;

// Runs f(0..count-1) on up to `threads` workers; rethrows the first failure.
template <typename F>
void parallel_for(std::size_t count, std::size_t threads, F&& f) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

nlohmann::json real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return v;
}

double real(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw ValidationError("unexpected numeric string '" + s + "' in report");
    }
    return j.get<double>();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

MethodSpec builtin_method(Method method, FeedbackParams params) {
    MethodSpec spec;
    spec.name = std::string(method_name(method));
    spec.needs_background = method == Method::exemplar_lda;
    spec.refine = [method, params](const RefineContext& ctx, const FeedbackState& state) {
        return compute_refined_ranking(ctx, state, method, params);
    };
    return spec;
}

const RoundStats& BenchmarkReport::at(const std::string& method, std::size_t round) const {
    for (std::size_t m = 0; m < methods.size(); ++m)
        if (methods[m] == method) {
            if (round >= stats[m].size()) throw NotFoundError("round " + std::to_string(round) + " not in report");
            return stats[m][round];
        }
    throw NotFoundError("method '" + method + "' not in report");
}

std::string BenchmarkReport::to_csv() const {
    std::string out = "method,round,mean_ndcg,std,n\n";
    char buf[96];
    for (std::size_t m = 0; m < methods.size(); ++m) {
        const std::string name = csv_field(methods[m]);
        for (std::size_t r = 0; r < stats[m].size(); ++r) {
            const RoundStats& s = stats[m][r];
            std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f,%zu\n", r, s.mean, s.std, s.n);
            out += name;
            out += buf;
        }
    }
    return out;
}

nlohmann::json BenchmarkReport::to_json() const {
    using nlohmann::json;
    json doc;
    doc["format"] = "refinder-benchmark/1";
    doc["config"] = simulation_config_to_json(config);
    doc["methods"] = methods;
    json qs = json::array();
    for (const auto& q : queries) qs.push_back({{"image_id", q.image_id}, {"label", q.label}});
    doc["queries"] = qs;

    json results = json::array();
    for (std::size_t m = 0; m < methods.size(); ++m) {
        json rounds = json::array();
        for (std::size_t r = 0; r < stats[m].size(); ++r) {
            const RoundStats& s = stats[m][r];
            rounds.push_back({{"round", r},
                              {"mean", s.mean},
                              {"std", s.std},
                              {"n", s.n},
                              {"repetition_means", s.repetition_means},
                              {"samples", s.samples}});
        }
        results.push_back({{"method", methods[m]},
                           {"failed_rounds", m < failed_rounds.size() ? failed_rounds[m] : 0},
                           {"rounds", rounds}});
    }
    doc["results"] = results;

    json tests = json::array();
    for (const auto& c : comparisons)
        tests.push_back({{"round", c.round},
                         {"a", c.a},
                         {"b", c.b},
                         {"t", real(c.test.t)},
                         {"p", real(c.test.p)},
                         {"significant", c.significant()}});
    doc["t_tests"] = tests;

    // Symmetric p-value matrix per round, rows and columns in `methods` order.
    json matrices = json::array();
    const std::size_t rounds = stats.empty() ? 0 : stats.front().size();
    if (methods.size() > 1) {
        for (std::size_t r = 0; r < rounds; ++r) {
            json mat = json::array();
            for (std::size_t i = 0; i < methods.size(); ++i) {
                json row = json::array();
                for (std::size_t j = 0; j < methods.size(); ++j) row.push_back(i == j ? json(1.0) : json(nullptr));
                mat.push_back(row);
            }
            for (const auto& c : comparisons) {
                if (c.round != r) continue;
                const auto ia = std::find(methods.begin(), methods.end(), c.a) - methods.begin();
                const auto ib = std::find(methods.begin(), methods.end(), c.b) - methods.begin();
                mat[ia][ib] = real(c.test.p);
                mat[ib][ia] = real(c.test.p);
            }
            matrices.push_back({{"round", r}, {"p_values", mat}});
        }
    }
    doc["p_value_matrix"] = matrices;
    return doc;
}

BenchmarkReport BenchmarkReport::from_json(const nlohmann::json& doc) {
    try {
        if (doc.value("format", std::string()) != "refinder-benchmark/1")
            throw ValidationError("not a refinder benchmark report (format tag missing or unknown)");
        BenchmarkReport rep;
        rep.config = simulation_config_from_json(doc.at("config"));
        rep.methods = doc.at("methods").get<std::vector<std::string>>();
        for (const auto& q : doc.at("queries"))
            rep.queries.push_back({q.at("image_id").get<std::string>(), q.at("label").get<std::string>()});
        const auto& results = doc.at("results");
        if (results.size() != rep.methods.size()) throw ValidationError("report results do not match its methods");
        for (const auto& res : results) {
            rep.failed_rounds.push_back(res.value("failed_rounds", std::size_t{0}));
            std::vector<RoundStats> rounds;
            for (const auto& r : res.at("rounds")) {
                RoundStats s;
                s.mean = real(r.at("mean"));
                s.std = real(r.at("std"));
                s.n = r.at("n").get<std::size_t>();
                for (const auto& v : r.at("repetition_means")) s.repetition_means.push_back(real(v));
                for (const auto& v : r.at("samples")) s.samples.push_back(real(v));
                rounds.push_back(std::move(s));
            }
            rep.stats.push_back(std::move(rounds));
        }
        for (const auto& t : doc.at("t_tests")) {
            PairedComparison c;
            c.round = t.at("round").get<std::size_t>();
            c.a = t.at("a").get<std::string>();
            c.b = t.at("b").get<std::string>();
            c.test.t = real(t.at("t"));
            c.test.p = real(t.at("p"));
            rep.comparisons.push_back(std::move(c));
        }
        return rep;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed benchmark report: ") + e.what());
    }
}

BenchmarkReport run_benchmark(const CorpusIndex& index, std::span<const BenchmarkQuery> queries_in,
                              std::span<const MethodSpec> methods, const SimulationConfig& config,
                              std::size_t threads) {
    config.validate();
    if (queries_in.empty()) throw ParameterError("benchmark needs at least one query");
    if (methods.empty()) throw ParameterError("benchmark needs at least one method");
    for (std::size_t i = 0; i < methods.size(); ++i)
        for (std::size_t j = i + 1; j < methods.size(); ++j)
            if (methods[i].name == methods[j].name)
                throw ParameterError("duplicate method name '" + methods[i].name + "'");

    // Canonical query order makes every result independent of the caller's order.
    std::vector<BenchmarkQuery> queries(queries_in.begin(), queries_in.end());
    std::sort(queries.begin(), queries.end(), [](const BenchmarkQuery& a, const BenchmarkQuery& b) {
        return std::tie(a.image_id, a.label) < std::tie(b.image_id, b.label);
    });

    std::vector<std::size_t> query_pos;
    std::vector<std::uint8_t> is_query(index.size(), 0);
    for (const auto& q : queries) {
        const auto pos = index.find(q.image_id);
        if (!pos) throw NotFoundError("query '" + q.image_id + "' is not in the corpus");
        bool any = false;
        for (std::size_t i = 0; i < index.size() && !any; ++i) any = i != *pos && index.has_label(i, q.label);
        if (!any) throw ParameterError("query '" + q.image_id + "' has no relevant items for label '" + q.label + "'");
        query_pos.push_back(*pos);
        is_query[*pos] = 1;
    }
    std::vector<std::size_t> others;
    std::size_t distinct_queries = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (is_query[i]) ++distinct_queries;
        else others.push_back(i);
    }

    const std::size_t nq = queries.size();
    const std::size_t nm = methods.size();
    const std::size_t nr = config.repetitions;
    const std::size_t rounds = config.rounds + 1;
    const bool need_background = std::any_of(methods.begin(), methods.end(), [](const MethodSpec& m) {
        return m.needs_background;
    });

    // trajectories[(rep * nq + q) * nm + m]
    std::vector<SessionTrajectory> trajectories(nr * nq * nm);

    for (std::size_t rep = 0; rep < nr; ++rep) {
        const auto target = static_cast<std::size_t>(
            std::floor(config.subsample_fraction * static_cast<double>(index.size())));
        const std::size_t keep = target > distinct_queries ? target - distinct_queries : 0;
        Rng rng(derive_seed(config.rng_seed, {rep, kSubsampleStream}));
        std::vector<std::size_t> positions = rng.sample(others, keep);
        for (std::size_t i = 0; i < index.size(); ++i)
            if (is_query[i]) positions.push_back(i);
        std::sort(positions.begin(), positions.end());
        const CorpusIndex sub = index.subset(positions);

        std::optional<BackgroundStats> background;
        if (need_background) background = BackgroundStats::compute(sub);

        std::vector<std::size_t> sub_query(nq);
        std::vector<Ranking> baselines(nq);
        std::vector<std::vector<std::uint8_t>> relevance(nq);
        for (std::size_t q = 0; q < nq; ++q) {
            sub_query[q] = *sub.find(queries[q].image_id);
            relevance[q] = label_relevance(sub, queries[q].label);
        }
        parallel_for(nq, threads, [&](std::size_t q) {
            baselines[q] = rank_by_distance(sub, sub.row(sub_query[q]), nullptr, sub_query[q]);
        });

        parallel_for(nq * nm, threads, [&](std::size_t task) {
            const std::size_t q = task / nm;
            const std::size_t m = task % nm;
            const RefineContext ctx{sub, QueryRef{sub.row(sub_query[q]), sub_query[q]}, baselines[q],
                                    background ? &*background : nullptr};
            const MethodSpec& spec = methods[m];
            const Refiner refine = [&](const FeedbackState& state) { return spec.refine(ctx, state); };
            const std::uint64_t seed =
                derive_seed(config.rng_seed, {rep, fnv1a(queries[q].image_id), fnv1a(queries[q].label)});
            trajectories[(rep * nq + q) * nm + m] =
                simulate_feedback_session(sub, sub_query[q], relevance[q], baselines[q], refine, config, seed);
        });
    }

    BenchmarkReport report;
    report.config = config;
    report.queries = queries;
    for (const auto& m : methods) report.methods.push_back(m.name);
    report.stats.assign(nm, std::vector<RoundStats>(rounds));
    report.failed_rounds.assign(nm, 0);
    for (std::size_t m = 0; m < nm; ++m) {
        for (std::size_t rep = 0; rep < nr; ++rep)
            for (std::size_t q = 0; q < nq; ++q) report.failed_rounds[m] += trajectories[(rep * nq + q) * nm + m].failed_rounds;
        for (std::size_t r = 0; r < rounds; ++r) {
            RoundStats& s = report.stats[m][r];
            s.n = nr;
            for (std::size_t rep = 0; rep < nr; ++rep) {
                double sum = 0.0;
                for (std::size_t q = 0; q < nq; ++q) {
                    const double v = trajectories[(rep * nq + q) * nm + m].ndcg[r];
                    s.samples.push_back(v);
                    sum += v;
                }
                s.repetition_means.push_back(sum / static_cast<double>(nq));
            }
            double total = 0.0;
            for (double v : s.repetition_means) total += v;
            s.mean = total / static_cast<double>(nr);
            double ss = 0.0;
            for (double v : s.repetition_means) ss += (v - s.mean) * (v - s.mean);
            s.std = nr > 1 ? std::sqrt(ss / static_cast<double>(nr - 1)) : 0.0;
        }
    }

    if (nr * nq >= 2) {
        for (std::size_t r = 0; r < rounds; ++r)
            for (std::size_t a = 0; a < nm; ++a)
                for (std::size_t b = a + 1; b < nm; ++b)
                    report.comparisons.push_back({r, methods[a].name, methods[b].name,
                                                  paired_t_test(report.stats[a][r].samples, report.stats[b][r].samples)});
    }
    return report;
}

}  // namespace refinder
