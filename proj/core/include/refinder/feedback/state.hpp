#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace refinder {

enum class Mark { none, relevant, irrelevant };

/// Relevant / irrelevant image ids accumulated over the rounds of one session.
///
/// Both sets keep first-marking order; re-marking an id moves it to the
/// other set instead of duplicating it.
class FeedbackState {
public:
    FeedbackState() = default;
    explicit FeedbackState(std::string query_id) : query_id_(std::move(query_id)) {}

    const std::string& query_id() const noexcept { return query_id_; }
    const std::vector<std::string>& positives() const noexcept { return positives_; }
    const std::vector<std::string>& negatives() const noexcept { return negatives_; }
    std::size_t round() const noexcept { return round_; }
    bool empty() const noexcept { return positives_.empty() && negatives_.empty(); }

    Mark mark_of(const std::string& id) const;

    /// Marks `id`. Marking the query as irrelevant raises ValidationError.
    void mark(const std::string& id, bool relevant);
    void advance_round() noexcept { ++round_; }

private:
    std::string query_id_;
    std::vector<std::string> positives_;
    std::vector<std::string> negatives_;
    std::size_t round_ = 0;
};

}  // namespace refinder
