#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "refinder/feedback/refine.hpp"
#include "refinder/feedback/state.hpp"
#include "refinder/ranking.hpp"
#include "refinder/service/registry.hpp"

namespace refinder {

/// Either an image id from the dataset or an uploaded descriptor.
struct SessionQuery {
    std::optional<std::string> image_id;
    std::optional<std::vector<float>> descriptor;
};

struct MarkInput {
    std::string image_id;
    bool relevant = false;
    bool operator==(const MarkInput&) const = default;
};

struct ResultItem {
    std::size_t rank = 0;  // 1-based
    std::string image_id;
    double score = 0.0;
    std::string image_uri;
    Mark mark = Mark::none;
};

struct HistoryEntry {
    std::size_t round = 0;  // round reached by this submission
    std::string method;
    std::vector<MarkInput> marks;
    std::vector<std::string> top;  // leading ids of the ranking after the round
};

struct SessionInfo {
    std::string session_id;
    std::string dataset;
    std::optional<std::string> query_id;
    std::string method;
    std::size_t round = 0;
    std::size_t total = 0;  // ranking length
};

struct SessionOptions {
    Method default_method = Method::itml;  // best early-round performer
    FeedbackParams params;
    std::size_t history_depth = 100;  // ids kept per history entry
    std::optional<std::filesystem::path> snapshot_dir;
};

/// In-memory feedback sessions over registered datasets.
///
/// Each session has its own lock, so submissions to one session are applied
/// one at a time while different sessions proceed independently. When a
/// snapshot directory is configured every mutation rewrites the session's
/// snapshot (query, method and marks; rankings are recomputed on restore).
class SessionManager {
public:
    SessionManager(DatasetRegistry& registry, SessionOptions options = {});

    SessionInfo create(const std::string& dataset, const SessionQuery& query,
                       std::optional<Method> method = std::nullopt);
    SessionInfo info(const std::string& id) const;
    std::vector<ResultItem> results(const std::string& id, std::size_t offset, std::size_t limit) const;
    /// Validates all marks first; the session is unchanged if validation or the refit fails.
    SessionInfo submit_feedback(const std::string& id, std::span<const MarkInput> marks,
                                std::optional<Method> method = std::nullopt);
    std::vector<HistoryEntry> history(const std::string& id) const;
    Ranking ranking(const std::string& id) const;
    void remove(const std::string& id);
    std::vector<SessionInfo> list() const;

    /// New session with the same dataset and query, fed the recorded rounds in order.
    SessionInfo replay(const std::string& id);

    nlohmann::json snapshot(const std::string& id) const;
    /// Recreates a session from a snapshot document under its original id.
    SessionInfo restore(const nlohmann::json& snapshot);
    /// Restores every *.json snapshot in the snapshot directory; returns how many.
    std::size_t restore_all();

private:
    struct Session;
    std::shared_ptr<Session> find(const std::string& id) const;
    std::string next_id();
    std::shared_ptr<Session> make_session(std::string id, const std::string& dataset, const SessionQuery& query,
                                          Method method);
    void apply(Session& s, std::span<const MarkInput> marks, std::optional<Method> method);
    void persist(const Session& s) const;
    static SessionInfo describe(const Session& s);
    static nlohmann::json snapshot_of(const Session& s);

    DatasetRegistry& registry_;
    SessionOptions options_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t id_seed_;
    std::uint64_t counter_ = 0;
};

std::string_view mark_name(Mark m);

}  // namespace refinder
