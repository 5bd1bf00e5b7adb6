#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fuse {

// Seconds since session start. All streams are rebased and floored to whole
// seconds on ingest; every downstream rule is expressed in whole seconds.
using Second = std::int64_t;

struct PositionSample {
    Second t = 0;
    double x = 0.0;  // metres
    double y = 0.0;  // metres
};

struct HeartRateSample {
    Second t = 0;
    double bpm = 0.0;
};

struct Utterance {
    Second t_start = 0;
    Second t_end = 0;
    std::string code;  // VB.* code name
};

enum class TaskType { Primary, Secondary, Distraction };

const char* task_type_name(TaskType t);
TaskType task_type_from_name(const std::string& name);

struct ZoneSpec {
    std::string name;
    double cx = 0.0;
    double cy = 0.0;
    double radius = 1.5;  // metres
    TaskType task_type = TaskType::Primary;
};

struct PhaseWindow {
    int phase = 0;      // 1-based phase number
    Second start_s = 0;
    Second end_s = 0;   // half-open [start_s, end_s)
};

struct SurveyResponse {
    int task_satisfaction = 0;    // Likert 1-7
    int collab_satisfaction = 0;  // Likert 1-7
};

/// One parsed simulation session. Student ids are kept in sorted order so
/// iteration is deterministic regardless of input file ordering.
struct RawSession {
    std::string session_id;
    std::vector<std::string> students;  // sorted, exactly 4 after validation
    std::map<std::string, std::vector<PositionSample>> positions;
    std::map<std::string, std::vector<Utterance>> utterances;
    std::map<std::string, std::vector<HeartRateSample>> heart_rate;
    std::vector<ZoneSpec> zones;
    std::vector<PhaseWindow> phases;  // exactly 4, ordered, non-overlapping
    std::map<std::string, SurveyResponse> surveys;

    // Analysis span: the window the indicator pipeline operates on.
    // Defaults to phases 3-4 (the stages where all four students work).
    Second span_start() const;
    Second span_end() const;
    Second session_end() const;  // end of the last phase
};

/// One person x interval observation: the LCA unit of analysis.
struct IntervalRecord {
    std::string session_id;
    std::string student_id;
    std::size_t interval_index = 0;        // 0 = first window of the span
    std::vector<std::uint8_t> values;      // 0/1 per catalog code

    std::size_t hamming_weight() const;
};

enum class OutcomeMeasure { TaskSatisfaction, CollabSatisfaction };
enum class Satisfaction { Satisfied, Unsatisfied };

const char* outcome_measure_name(OutcomeMeasure m);
OutcomeMeasure outcome_measure_from_name(const std::string& name);

/// Dichotomized survey outcome. A unit is Satisfied iff its Likert rating
/// is >= threshold (default 4).
struct OutcomeGroups {
    OutcomeMeasure measure = OutcomeMeasure::TaskSatisfaction;
    int threshold = 4;
    std::map<std::string, Satisfaction> membership;  // unit id -> group

    std::size_t count(Satisfaction s) const;
};

/// Unit id used throughout ENA and reports: students are session-scoped.
std::string make_unit_id(const std::string& session_id, const std::string& student_id);

/// Build outcome groups from per-session surveys, keyed by unit id.
OutcomeGroups group_by_outcome(const std::vector<RawSession>& sessions,
                               OutcomeMeasure measure, int threshold = 4);

}  // namespace fuse
