#include "refinder/service/sessions.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <unordered_map>

#include "refinder/errors.hpp"
#include "refinder/evaluation/random.hpp"
#include "refinder/io/containers.hpp"

namespace refinder {

struct SessionManager::Session {
    mutable std::mutex mutex;
    std::string id;
    std::shared_ptr<const Dataset> dataset;
    SessionQuery query;  // as supplied, so a restore normalizes identically
    std::vector<float> vector;
    std::optional<std::size_t> query_pos;
    Method initial_method = Method::itml;
    Method method = Method::itml;
    FeedbackState state;
    Ranking baseline;
    Ranking current;
    std::vector<HistoryEntry> history;
};

std::string_view mark_name(Mark m) {
    switch (m) {
        case Mark::relevant: return "relevant";
        case Mark::irrelevant: return "irrelevant";
        default: return "none";
    }
}

SessionManager::SessionManager(DatasetRegistry& registry, SessionOptions options)
    : registry_(registry), options_(std::move(options)), id_seed_(std::random_device{}()) {
    id_seed_ = (id_seed_ << 32) ^ std::random_device{}();
    if (options_.snapshot_dir) std::filesystem::create_directories(*options_.snapshot_dir);
}

std::string SessionManager::next_id() {
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(mix64(id_seed_ + ++counter_)));
    return buf;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
}

std::shared_ptr<SessionManager::Session> SessionManager::make_session(std::string id, const std::string& dataset,
                                                                      const SessionQuery& query, Method method) {
    auto s = std::make_shared<Session>();
    s->id = std::move(id);
    s->dataset = registry_.get(dataset);
    s->query = query;
    s->initial_method = s->method = method;
    const CorpusIndex& index = s->dataset->index;

    if (query.image_id && query.descriptor)
        throw ValidationError("give either a query image id or a descriptor, not both");
    if (query.image_id) {
        s->query_pos = index.find(*query.image_id);
        if (!s->query_pos) throw NotFoundError("query image '" + *query.image_id + "' is not in the dataset");
        auto row = index.row(*s->query_pos);
        s->vector.assign(row.begin(), row.end());
        s->state = FeedbackState(*query.image_id);
    } else if (query.descriptor) {
        if (query.descriptor->size() != index.dim())
            throw DimensionError("query descriptor has dim " + std::to_string(query.descriptor->size()) +
                                 ", dataset has " + std::to_string(index.dim()));
        const Descriptor d = l2_normalize(std::span<const float>(*query.descriptor));
        s->vector.assign(d.values().begin(), d.values().end());
    } else {
        throw ValidationError("a session needs a query image id or descriptor");
    }
    s->baseline = rank_by_distance(index, s->vector, nullptr, s->query_pos);
    s->current = s->baseline;
    return s;
}

void SessionManager::apply(Session& s, std::span<const MarkInput> marks, std::optional<Method> method) {
    const CorpusIndex& index = s.dataset->index;

    std::vector<MarkInput> accepted;
    std::unordered_map<std::string, bool> seen;
    for (const MarkInput& m : marks) {
        if (!index.find(m.image_id)) throw NotFoundError("image '" + m.image_id + "' is not in the dataset");
        auto [it, inserted] = seen.emplace(m.image_id, m.relevant);
        if (!inserted) {
            if (it->second != m.relevant)
                throw ValidationError("image '" + m.image_id + "' is marked both relevant and irrelevant");
            continue;
        }
        if (!m.relevant && s.query_pos && index.id(*s.query_pos) == m.image_id)
            throw ValidationError("the query image cannot be marked irrelevant");
        accepted.push_back(m);
    }

    FeedbackState next = s.state;
    for (const MarkInput& m : accepted) next.mark(m.image_id, m.relevant);
    next.advance_round();
    const Method next_method = method.value_or(s.method);

    Ranking ranking = s.current;
    if (!accepted.empty() || next_method != s.method) {
        const BackgroundStats* bg = s.dataset->background.get();
        if (next_method == Method::exemplar_lda && !bg)
            throw ConditioningError("dataset has no usable background statistics: " + s.dataset->background_error);
        const RefineContext ctx{index, QueryRef{s.vector, s.query_pos}, s.baseline, bg};
        ranking = compute_refined_ranking(ctx, next, next_method, options_.params);
    }

    HistoryEntry entry;
    entry.round = next.round();
    entry.method = std::string(method_name(next_method));
    entry.marks = std::move(accepted);
    const std::size_t depth = std::min(options_.history_depth, ranking.size());
    for (std::size_t i = 0; i < depth; ++i) entry.top.push_back(index.id(ranking.items[i].pos));

    s.state = std::move(next);
    s.method = next_method;
    s.current = std::move(ranking);
    s.history.push_back(std::move(entry));
}

SessionInfo SessionManager::describe(const Session& s) {
    SessionInfo info;
    info.session_id = s.id;
    info.dataset = s.dataset->handle;
    info.query_id = s.query.image_id;
    info.method = std::string(method_name(s.method));
    info.round = s.state.round();
    info.total = s.current.size();
    return info;
}

SessionInfo SessionManager::create(const std::string& dataset, const SessionQuery& query,
                                   std::optional<Method> method) {
    std::string id;
    {
        std::unique_lock lock(mutex_);
        id = next_id();
    }
    auto s = make_session(std::move(id), dataset, query, method.value_or(options_.default_method));
    {
        std::unique_lock lock(mutex_);
        sessions_.emplace(s->id, s);
    }
    std::lock_guard guard(s->mutex);
    persist(*s);
    return describe(*s);
}

SessionInfo SessionManager::info(const std::string& id) const {
    auto s = find(id);
    std::lock_guard guard(s->mutex);
    return describe(*s);
}

std::vector<ResultItem> SessionManager::results(const std::string& id, std::size_t offset, std::size_t limit) const {
    auto s = find(id);
    std::lock_guard guard(s->mutex);
    std::vector<ResultItem> out;
    const CorpusIndex& index = s->dataset->index;
    for (std::size_t i = offset; i < s->current.size() && out.size() < limit; ++i) {
        const RankedItem& item = s->current.items[i];
        out.push_back({i + 1, index.id(item.pos), item.score, index.uri(item.pos), s->state.mark_of(index.id(item.pos))});
    }
    return out;
}

SessionInfo SessionManager::submit_feedback(const std::string& id, std::span<const MarkInput> marks,
                                            std::optional<Method> method) {
    auto s = find(id);
    std::lock_guard guard(s->mutex);
    apply(*s, marks, method);
    persist(*s);
    return describe(*s);
}

std::vector<HistoryEntry> SessionManager::history(const std::string& id) const {
    auto s = find(id);
    std::lock_guard guard(s->mutex);
    return s->history;
}

Ranking SessionManager::ranking(const std::string& id) const {
    auto s = find(id);
    std::lock_guard guard(s->mutex);
    return s->current;
}

void SessionManager::remove(const std::string& id) {
    std::unique_lock lock(mutex_);
    if (sessions_.erase(id) == 0) throw NotFoundError("unknown session '" + id + "'");
    if (options_.snapshot_dir) {
        std::error_code ec;
        std::filesystem::remove(*options_.snapshot_dir / (id + ".json"), ec);
    }
}

std::vector<SessionInfo> SessionManager::list() const {
    std::vector<std::shared_ptr<Session>> all;
    {
        std::shared_lock lock(mutex_);
        for (const auto& [id, s] : sessions_) all.push_back(s);
    }
    std::vector<SessionInfo> out;
    for (const auto& s : all) {
        std::lock_guard guard(s->mutex);
        out.push_back(describe(*s));
    }
    return out;
}

SessionInfo SessionManager::replay(const std::string& id) {
    nlohmann::json snap = snapshot(id);
    std::string fresh;
    {
        std::unique_lock lock(mutex_);
        fresh = next_id();
    }
    snap["session_id"] = fresh;
    return restore(snap);
}

nlohmann::json SessionManager::snapshot_of(const Session& s) {
    nlohmann::json query;
    if (s.query.image_id) query["image_id"] = *s.query.image_id;
    else query["descriptor"] = *s.query.descriptor;
    nlohmann::json rounds = nlohmann::json::array();
    for (const HistoryEntry& h : s.history) {
        nlohmann::json marks = nlohmann::json::array();
        for (const MarkInput& m : h.marks) marks.push_back({{"image_id", m.image_id}, {"relevant", m.relevant}});
        rounds.push_back({{"method", h.method}, {"marks", marks}});
    }
    return {{"format", "refinder-session/1"},
            {"session_id", s.id},
            {"dataset", s.dataset->handle},
            {"query", query},
            {"initial_method", std::string(method_name(s.initial_method))},
            {"rounds", rounds}};
}

nlohmann::json SessionManager::snapshot(const std::string& id) const {
    auto s = find(id);
    std::lock_guard guard(s->mutex);
    return snapshot_of(*s);
}

SessionInfo SessionManager::restore(const nlohmann::json& snap) {
    std::shared_ptr<Session> s;
    try {
        if (snap.value("format", std::string()) != "refinder-session/1")
            throw ValidationError("not a refinder session snapshot");
        SessionQuery query;
        const auto& q = snap.at("query");
        if (q.contains("image_id")) query.image_id = q.at("image_id").get<std::string>();
        if (q.contains("descriptor")) query.descriptor = q.at("descriptor").get<std::vector<float>>();
        const std::string id = snap.at("session_id").get<std::string>();
        s = make_session(id, snap.at("dataset").get<std::string>(), query,
                         parse_method(snap.at("initial_method").get<std::string>()));
        for (const auto& round : snap.at("rounds")) {
            std::vector<MarkInput> marks;
            for (const auto& m : round.at("marks"))
                marks.push_back({m.at("image_id").get<std::string>(), m.at("relevant").get<bool>()});
            apply(*s, marks, parse_method(round.at("method").get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed session snapshot: ") + e.what());
    }
    {
        std::unique_lock lock(mutex_);
        if (!sessions_.emplace(s->id, s).second) throw ValidationError("session '" + s->id + "' already exists");
    }
    std::lock_guard guard(s->mutex);
    persist(*s);
    return describe(*s);
}

std::size_t SessionManager::restore_all() {
    if (!options_.snapshot_dir) return 0;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(*options_.snapshot_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::size_t restored = 0;
    for (const auto& path : files) {
        try {
            restore(nlohmann::json::parse(read_file_bytes(path)));
            ++restored;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "skipping session snapshot %s: %s\n", path.string().c_str(), e.what());
        }
    }
    return restored;
}

void SessionManager::persist(const Session& s) const {
    if (!options_.snapshot_dir) return;
    const auto final_path = *options_.snapshot_dir / (s.id + ".json");
    auto tmp = final_path;
    tmp += ".tmp";
    write_file_bytes(tmp, snapshot_of(s).dump());
    std::filesystem::rename(tmp, final_path);
}

}  // namespace refinder
