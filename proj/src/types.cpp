#include "fuse/types.hpp"

#include "fuse/errors.hpp"

#include <algorithm>
#include <numeric>

namespace fuse {

const char* task_type_name(TaskType t) {
    switch (t) {
        case TaskType::Primary: return "primary";
        case TaskType::Secondary: return "secondary";
        case TaskType::Distraction: return "distraction";
    }
    return "unknown";
}

TaskType task_type_from_name(const std::string& name) {
    if (name == "primary") return TaskType::Primary;
    if (name == "secondary") return TaskType::Secondary;
    if (name == "distraction") return TaskType::Distraction;
    raise(ErrorCode::InvalidConfig, "unknown task_type '" + name + "'");
}

Second RawSession::span_start() const {
    if (phases.size() < 3) raise(ErrorCode::InvalidConfig, "session has fewer than 3 phases");
    return phases[2].start_s;
}

Second RawSession::span_end() const {
    if (phases.size() < 4) raise(ErrorCode::InvalidConfig, "session has fewer than 4 phases");
    return phases[3].end_s;
}

Second RawSession::session_end() const {
    if (phases.empty()) raise(ErrorCode::InvalidConfig, "session has no phases");
    return phases.back().end_s;
}

std::size_t IntervalRecord::hamming_weight() const {
    return static_cast<std::size_t>(
        std::accumulate(values.begin(), values.end(), std::size_t{0}));
}

const char* outcome_measure_name(OutcomeMeasure m) {
    switch (m) {
        case OutcomeMeasure::TaskSatisfaction: return "task";
        case OutcomeMeasure::CollabSatisfaction: return "collab";
    }
    return "unknown";
}

OutcomeMeasure outcome_measure_from_name(const std::string& name) {
    if (name == "task") return OutcomeMeasure::TaskSatisfaction;
    if (name == "collab") return OutcomeMeasure::CollabSatisfaction;
    raise(ErrorCode::InvalidConfig, "unknown outcome measure '" + name + "' (want task|collab)");
}

std::size_t OutcomeGroups::count(Satisfaction s) const {
    return static_cast<std::size_t>(std::count_if(
        membership.begin(), membership.end(),
        [s](const auto& kv) { return kv.second == s; }));
}

std::string make_unit_id(const std::string& session_id, const std::string& student_id) {
    return session_id + "/" + student_id;
}

OutcomeGroups group_by_outcome(const std::vector<RawSession>& sessions,
                               OutcomeMeasure measure, int threshold) {
    OutcomeGroups groups;
    groups.measure = measure;
    groups.threshold = threshold;
    for (const auto& session : sessions) {
        for (const auto& [student, survey] : session.surveys) {
            int rating = measure == OutcomeMeasure::TaskSatisfaction
                             ? survey.task_satisfaction
                             : survey.collab_satisfaction;
            groups.membership[make_unit_id(session.session_id, student)] =
                rating >= threshold ? Satisfaction::Satisfied : Satisfaction::Unsatisfied;
        }
    }
    return groups;
}

}  // namespace fuse
