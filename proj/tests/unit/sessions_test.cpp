#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <thread>

#include "refinder/errors.hpp"
#include "refinder/evaluation/synthetic.hpp"
#include "refinder/io/containers.hpp"
#include "refinder/service/sessions.hpp"
#include "tempdir.hpp"

using namespace refinder;
using testing_support::TempDir;

namespace {

struct World {
    DatasetRegistry registry;
    std::shared_ptr<const Dataset> dataset;
    std::vector<std::string> relevant;
};

std::unique_ptr<World> make_world() {
    SyntheticConfig cfg;
    cfg.count = 400;
    cfg.dim = 16;
    cfg.relevant_fraction = 0.1;
    cfg.signal_dims = 4;
    cfg.distractor_clusters = 4;
    cfg.confusers = 2;
    cfg.confuser_offset = 1.0;
    cfg.seed = 21;
    SyntheticCorpus c = make_synthetic_corpus(cfg);
    auto w = std::make_unique<World>();
    w->relevant = c.relevant_ids;
    w->dataset = w->registry.add("syn", std::move(c.entries));
    return w;
}

SessionQuery by_id(const std::string& id) { return {id, std::nullopt}; }

bool is_relevant(const World& w, const std::string& id) {
    return std::find(w.relevant.begin(), w.relevant.end(), id) != w.relevant.end();
}

// Marks the unmarked items among the first `n` results by their label.
std::vector<MarkInput> label_marks(const World& w, const std::vector<ResultItem>& page, std::size_t n) {
    std::vector<MarkInput> marks;
    for (const ResultItem& r : page) {
        if (marks.size() == n) break;
        if (r.mark == Mark::none) marks.push_back({r.image_id, is_relevant(w, r.image_id)});
    }
    return marks;
}

void expect_permutation_minus_query(const World& w, SessionManager& sm, const std::string& sid, const std::string& q) {
    const Ranking r = sm.ranking(sid);
    const CorpusIndex& idx = w.dataset->index;
    ASSERT_EQ(r.size(), idx.size() - 1);
    std::set<std::uint32_t> seen;
    for (const auto& it : r.items) seen.insert(it.pos);
    EXPECT_EQ(seen.size(), idx.size() - 1);
    EXPECT_EQ(seen.count(static_cast<std::uint32_t>(*idx.find(q))), 0u);
}

double precision_at_10(const World& w, const std::vector<ResultItem>& page) {
    double hits = 0;
    for (std::size_t i = 0; i < 10; ++i) hits += is_relevant(w, page[i].image_id);
    return hits / 10.0;
}

}  // namespace

TEST(Sessions, CreateByIdExcludesQuery) {
    auto w = make_world();
    SessionManager sm(w->registry);
    const std::string q = w->relevant[0];
    const SessionInfo info = sm.create(w->dataset->handle, by_id(q));
    EXPECT_EQ(info.round, 0u);
    EXPECT_EQ(info.method, "itml");
    EXPECT_EQ(info.total, 399u);
    EXPECT_EQ(info.query_id, q);
    expect_permutation_minus_query(*w, sm, info.session_id, q);
    // Baseline is the exact kNN order.
    const auto knn = knn_query(w->dataset->index, w->dataset->index.row(*w->dataset->index.find(q)), 21);
    const auto page = sm.results(info.session_id, 0, 20);
    for (std::size_t i = 0; i < 20; ++i) {
        EXPECT_EQ(page[i].image_id, knn[i + 1].image_id);
        EXPECT_EQ(page[i].rank, i + 1);
    }
}

TEST(Sessions, CreateByDescriptor) {
    auto w = make_world();
    SessionManager sm(w->registry);
    const auto row = w->dataset->index.row(5);
    const SessionInfo info = sm.create("syn", {std::nullopt, std::vector<float>(row.begin(), row.end())});
    EXPECT_EQ(info.total, 400u);
    EXPECT_FALSE(info.query_id.has_value());
    EXPECT_EQ(sm.results(info.session_id, 0, 1)[0].image_id, w->dataset->index.id(5));
}

TEST(Sessions, CreateErrors) {
    auto w = make_world();
    SessionManager sm(w->registry);
    EXPECT_THROW(sm.create("syn", by_id("nope")), NotFoundError);
    EXPECT_THROW(sm.create("nope", by_id(w->relevant[0])), NotFoundError);
    EXPECT_THROW(sm.create("syn", {std::nullopt, std::vector<float>(15, 1.0f)}), DimensionError);
    EXPECT_THROW(sm.create("syn", {}), ValidationError);
    EXPECT_THROW(sm.create("syn", {w->relevant[0], std::vector<float>(16, 1.0f)}), ValidationError);
}

TEST(Sessions, IndependentStates) {
    auto w = make_world();
    SessionManager sm(w->registry);
    const std::string a = sm.create("syn", by_id(w->relevant[0])).session_id;
    const std::string b = sm.create("syn", by_id(w->relevant[0])).session_id;
    EXPECT_NE(a, b);
    const auto before = sm.results(b, 0, 50);
    sm.submit_feedback(a, label_marks(*w, sm.results(a, 0, 100), 10));
    EXPECT_EQ(sm.info(a).round, 1u);
    EXPECT_EQ(sm.info(b).round, 0u);
    const auto after = sm.results(b, 0, 50);
    for (std::size_t i = 0; i < before.size(); ++i) {
        EXPECT_EQ(before[i].image_id, after[i].image_id);
        EXPECT_EQ(after[i].mark, Mark::none);
    }
}

TEST(Sessions, EmptyMarksIncrementRoundOnly) {
    auto w = make_world();
    SessionManager sm(w->registry);
    const std::string s = sm.create("syn", by_id(w->relevant[1])).session_id;
    sm.submit_feedback(s, label_marks(*w, sm.results(s, 0, 100), 10));
    const Ranking before = sm.ranking(s);
    const SessionInfo info = sm.submit_feedback(s, {});
    EXPECT_EQ(info.round, 2u);
    const Ranking after = sm.ranking(s);
    ASSERT_EQ(before.size(), after.size());
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(before.items[i].pos, after.items[i].pos);
    EXPECT_EQ(sm.history(s).size(), 2u);
}

TEST(Sessions, RemarkFlipsBetweenSets) {
    auto w = make_world();
    SessionManager sm(w->registry);
    const std::string s = sm.create("syn", by_id(w->relevant[0])).session_id;
    const std::string id = sm.results(s, 0, 1)[0].image_id;
    const std::vector<MarkInput> rel{{id, true}}, irr{{id, false}};
    sm.submit_feedback(s, rel);
    auto find_mark = [&] {
        for (const auto& r : sm.results(s, 0, 400))
            if (r.image_id == id) return r.mark;
        return Mark::none;
    };
    EXPECT_EQ(find_mark(), Mark::relevant);
    sm.submit_feedback(s, irr);
    EXPECT_EQ(find_mark(), Mark::irrelevant);
    std::size_t marked = 0;
    for (const auto& r : sm.results(s, 0, 400)) marked += r.mark != Mark::none;
    EXPECT_EQ(marked, 1u);
}

TEST(Sessions, Pagination) {
    auto w = make_world();
    SessionManager sm(w->registry);
    const std::string s = sm.create("syn", by_id(w->relevant[0])).session_id;
    const auto first = sm.results(s, 0, 20);
    ASSERT_EQ(first.size(), 20u);
    const auto second = sm.results(s, 20, 20);
    EXPECT_EQ(second.front().rank, 21u);
    const auto all = sm.results(s, 0, 1000);
    EXPECT_EQ(all.size(), 399u);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(all[20 + i].image_id, second[i].image_id);
    EXPECT_TRUE(sm.results(s, 399, 20).empty());
    EXPECT_TRUE(sm.results(s, 5000, 20).empty());
    const auto again = sm.results(s, 0, 20);
    for (std::size_t i = 0; i < 20; ++i) {
        EXPECT_EQ(again[i].image_id, first[i].image_id);
        EXPECT_EQ(again[i].score, first[i].score);
    }
    EXPECT_THROW(sm.results("missing", 0, 20), NotFoundError);
}

TEST(Sessions, ValidationLeavesSessionUnchanged) {
    auto w = make_world();
    SessionManager sm(w->registry);
    const std::string q = w->relevant[0];
    const std::string s = sm.create("syn", by_id(q)).session_id;
    const std::string a = sm.results(s, 0, 2)[0].image_id, b = sm.results(s, 0, 2)[1].image_id;
    const std::vector<MarkInput> contradictory{{a, true}, {b, false}, {a, false}};
    EXPECT_THROW(sm.submit_feedback(s, contradictory), ValidationError);
    const std::vector<MarkInput> unknown{{a, true}, {"ghost", false}};
    EXPECT_THROW(sm.submit_feedback(s, unknown), NotFoundError);
    const std::vector<MarkInput> query_irrelevant{{q, false}};
    EXPECT_THROW(sm.submit_feedback(s, query_irrelevant), ValidationError);
    EXPECT_EQ(sm.info(s).round, 0u);
    EXPECT_TRUE(sm.history(s).empty());
    for (const auto& r : sm.results(s, 0, 400)) EXPECT_EQ(r.mark, Mark::none);
}

TEST(Sessions, RankingStaysPermutationAfterEveryRound) {
    auto w = make_world();
    SessionManager sm(w->registry);
    const std::string q = w->relevant[2];
    for (Method m : all_methods()) {
        const std::string s = sm.create("syn", by_id(q), m).session_id;
        for (int round = 0; round < 3; ++round) {
            sm.submit_feedback(s, label_marks(*w, sm.results(s, 0, 100), 5));
            expect_permutation_minus_query(*w, sm, s, q);
        }
        EXPECT_EQ(sm.history(s).size(), 3u);
    }
}

TEST(Sessions, ItmlPrecisionNotBelowBaseline) {
    auto w = make_world();
    SessionManager sm(w->registry);
    double base = 0.0, refined = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        const std::string s = sm.create("syn", by_id(w->relevant[k * 3]), Method::itml).session_id;
        const auto page = sm.results(s, 0, 100);
        base += precision_at_10(*w, page);
        sm.submit_feedback(s, label_marks(*w, page, 20));
        refined += precision_at_10(*w, sm.results(s, 0, 10));
    }
    EXPECT_GE(refined, base);
}

TEST(Sessions, HistoryRecordsRounds) {
    auto w = make_world();
    SessionOptions opts;
    opts.history_depth = 7;
    SessionManager sm(w->registry, opts);
    const std::string s = sm.create("syn", by_id(w->relevant[0])).session_id;
    const auto marks = label_marks(*w, sm.results(s, 0, 100), 4);
    sm.submit_feedback(s, marks, Method::kde);
    const auto h = sm.history(s);
    ASSERT_EQ(h.size(), 1u);
    EXPECT_EQ(h[0].round, 1u);
    EXPECT_EQ(h[0].method, "kde");
    EXPECT_EQ(h[0].marks, marks);
    EXPECT_EQ(h[0].top.size(), 7u);
    EXPECT_EQ(h[0].top[0], sm.results(s, 0, 1)[0].image_id);
    EXPECT_EQ(sm.info(s).method, "kde");
}

TEST(Sessions, ReplayReproducesFinalRanking) {
    auto w = make_world();
    SessionManager sm(w->registry);
    const std::string s = sm.create("syn", by_id(w->relevant[4])).session_id;
    const Method methods[] = {Method::itml, Method::kde, Method::svm, Method::itml_kde};
    for (Method m : methods) sm.submit_feedback(s, label_marks(*w, sm.results(s, 0, 100), 6), m);
    const SessionInfo copy = sm.replay(s);
    EXPECT_NE(copy.session_id, s);
    EXPECT_EQ(copy.round, 4u);
    const Ranking a = sm.ranking(s), b = sm.ranking(copy.session_id);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.items[i].pos, b.items[i].pos);
        EXPECT_EQ(a.items[i].score, b.items[i].score);
    }
}

TEST(Sessions, SnapshotsRestoreAcrossManagers) {
    auto w = make_world();
    TempDir dir;
    SessionOptions opts;
    opts.snapshot_dir = dir.path();
    std::string sid;
    Ranking original;
    {
        SessionManager sm(w->registry, opts);
        sid = sm.create("syn", by_id(w->relevant[0])).session_id;
        sm.submit_feedback(sid, label_marks(*w, sm.results(sid, 0, 100), 8));
        sm.submit_feedback(sid, label_marks(*w, sm.results(sid, 0, 100), 8));
        original = sm.ranking(sid);
        const nlohmann::json snap = sm.snapshot(sid);
        EXPECT_EQ(snap.at("format"), "refinder-session/1");
        EXPECT_EQ(snap.at("rounds").size(), 2u);
        EXPECT_TRUE(std::filesystem::exists(dir / (sid + ".json")));
        EXPECT_FALSE(std::filesystem::exists(dir / (sid + ".json.tmp")));
    }
    SessionManager fresh(w->registry, opts);
    EXPECT_EQ(fresh.restore_all(), 1u);
    const SessionInfo info = fresh.info(sid);
    EXPECT_EQ(info.round, 2u);
    const Ranking restored = fresh.ranking(sid);
    ASSERT_EQ(restored.size(), original.size());
    for (std::size_t i = 0; i < restored.size(); ++i) EXPECT_EQ(restored.items[i].pos, original.items[i].pos);

    fresh.remove(sid);
    EXPECT_FALSE(std::filesystem::exists(dir / (sid + ".json")));
    EXPECT_THROW(fresh.info(sid), NotFoundError);
}

TEST(Sessions, RestoreRejectsBadSnapshots) {
    auto w = make_world();
    SessionManager sm(w->registry);
    EXPECT_THROW(sm.restore(nlohmann::json::object()), ValidationError);
    EXPECT_THROW(sm.restore(nlohmann::json{{"format", "refinder-session/1"}}), ValidationError);
    const std::string s = sm.create("syn", by_id(w->relevant[0])).session_id;
    EXPECT_THROW(sm.restore(sm.snapshot(s)), ValidationError);  // id already taken
}

TEST(Sessions, ConcurrentSubmissionsAreSerialized) {
    auto w = make_world();
    SessionManager sm(w->registry);
    const std::string s = sm.create("syn", by_id(w->relevant[0]), Method::kde).session_id;
    const auto page = sm.results(s, 0, 40);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&, t] {
            for (int i = 0; i < 3; ++i) {
                const std::vector<MarkInput> m{{page[std::size_t(t * 10 + i)].image_id, true}};
                sm.submit_feedback(s, m);
            }
        });
    for (auto& th : threads) th.join();
    EXPECT_EQ(sm.info(s).round, 12u);
    EXPECT_EQ(sm.history(s).size(), 12u);
    expect_permutation_minus_query(*w, sm, s, w->relevant[0]);
}

TEST(Sessions, MarkNames) {
    EXPECT_EQ(mark_name(Mark::relevant), "relevant");
    EXPECT_EQ(mark_name(Mark::irrelevant), "irrelevant");
    EXPECT_EQ(mark_name(Mark::none), "none");
}
