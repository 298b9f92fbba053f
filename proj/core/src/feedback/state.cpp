#include "refinder/feedback/state.hpp"

#include <algorithm>

#include "refinder/errors.hpp"

namespace refinder {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& id) {
    return std::find(v.begin(), v.end(), id) != v.end();
}

void erase(std::vector<std::string>& v, const std::string& id) {
    v.erase(std::remove(v.begin(), v.end(), id), v.end());
}

}  // namespace

Mark FeedbackState::mark_of(const std::string& id) const {
    if (contains(positives_, id)) return Mark::relevant;
    if (contains(negatives_, id)) return Mark::irrelevant;
    return Mark::none;
}

void FeedbackState::mark(const std::string& id, bool relevant) {
    if (!relevant && id == query_id_) throw ValidationError("the query '" + id + "' cannot be marked irrelevant");
    auto& target = relevant ? positives_ : negatives_;
    auto& other = relevant ? negatives_ : positives_;
    erase(other, id);
    if (!contains(target, id)) target.push_back(id);
}

}  // namespace refinder
