#pragma once

#include "fuse/catalog.hpp"
#include "fuse/physio.hpp"
#include "fuse/sync.hpp"
#include "fuse/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fuse::synth {

/// Generator description for planted-class indicator datasets: the
/// ground-truth oracle behind class-recovery benchmarks.
struct PlantedSpec {
    int n_classes = 0;
    std::vector<double> weights;                  // size K, sums to 1
    std::vector<std::vector<double>> item_probs;  // K x J
    std::vector<std::string> class_names;         // optional labels
    int n_sessions = 25;
    int students_per_session = 4;
    int intervals_per_student = 30;
    std::uint64_t seed = 0;

    std::size_t total_records() const {
        return static_cast<std::size_t>(n_sessions) *
               static_cast<std::size_t>(students_per_session) *
               static_cast<std::size_t>(intervals_per_student);
    }
};

/// Built-in four-class preset over the default 17-code catalog: each class
/// carries its signature codes at probability 0.9 and everything else at
/// 0.05, equal weights. Class profiles (by signature codes):
///   collaborative.communication, embodied.collaboration,
///   distant.interaction, solitary.engagement.
PlantedSpec fourclass_preset(std::uint64_t seed = 0);

/// Known preset names: "fourclass" plus single-class "uniform" (all 0.5).
PlantedSpec preset_by_name(const std::string& name, std::uint64_t seed = 0);

/// Draw records from the planted model: class from weights, then each bit
/// independently from the class's item probabilities. Returns the records
/// and the true class label per record. `total_cap` truncates the layout
/// (0 = emit every session x student x interval record).
std::pair<std::vector<IntervalRecord>, std::vector<int>> sample_indicators(
    const PlantedSpec& spec, std::size_t total_cap = 0);

// --- scripted raw sessions ---------------------------------------------------

struct PositionSegment {
    Second t_start = 0;
    Second t_end = 0;  // half-open; one sample per second, constant position
    double x = 0.0;
    double y = 0.0;
};

struct HrSegment {
    Second t_start = 0;
    Second t_end = 0;  // half-open; bpm interpolates linearly across the segment
    double bpm_from = 0.0;
    double bpm_to = 0.0;
};

/// Hand-written session with ground-truth indicator bits. Every expected
/// bit must be derivable from the emitted streams by the pipeline rules
/// alone; synth_raw_session verifies that before handing the files over.
struct ScenarioScript {
    std::string session_id;
    std::vector<ZoneSpec> zones;
    std::vector<PhaseWindow> phases;  // exactly 4

    struct Student {
        std::string id;
        std::vector<PositionSegment> position_segments;
        std::vector<Utterance> utterances;
        std::vector<HrSegment> hr_segments;
        SurveyResponse survey{4, 4};
    };
    std::vector<Student> students;  // exactly 4

    // student -> per interval -> present code names
    std::map<std::string, std::vector<std::set<std::string>>> expected;

    SyncConfig sync;
    PhysioConfig physio;
};

ScenarioScript load_script(const std::filesystem::path& path);
void save_script(const std::filesystem::path& path, const ScenarioScript& script);

struct SynthSessionResult {
    std::filesystem::path session_dir;
    std::vector<IntervalRecord> expected;  // also written as expected_intervals.csv
};

/// Emit the ingest-format files for the script plus expected_intervals.csv.
/// With verify=true (default) the emitted files are re-ingested, run through
/// the indicator pipeline and compared bit-for-bit against the script's
/// expectations; any disagreement raises InconsistentScript.
SynthSessionResult synth_raw_session(const ScenarioScript& script,
                                     const std::filesystem::path& out_dir, bool verify = true);

/// The interval records a script's expectations describe, in the same
/// order the pipeline emits them.
std::vector<IntervalRecord> expected_records(const ScenarioScript& script,
                                             const IndicatorCatalog& catalog = default_catalog());

}  // namespace fuse::synth
