#pragma once

#include "fuse/ena.hpp"
#include "fuse/lca.hpp"
#include "fuse/physio.hpp"
#include "fuse/sync.hpp"
#include "fuse/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fuse {

/// Everything one end-to-end run needs. The full config is echoed into the
/// run directory (config.json) so every artifact is reproducible from its
/// own provenance.
struct PipelineConfig {
    std::vector<std::filesystem::path> sessions;
    std::filesystem::path out_dir = "out";
    SyncConfig sync;
    PhysioConfig physio;

    struct Lca {
        int k_min = 1;
        int k_max = 10;
        LcaConfig em;
    } lca;

    struct Ena {
        ena::Stanza stanza = ena::Stanza::whole();
        std::vector<OutcomeMeasure> measures{OutcomeMeasure::TaskSatisfaction,
                                             OutcomeMeasure::CollabSatisfaction};
        double alpha = 0.05;
        std::size_t m_tests = 0;  // 0 = number of axes tested per measure
        int likert_threshold = 4;
    } ena;

    int threads = 1;

    /// Run artifacts land in out_dir / "run-<seed>".
    std::filesystem::path run_dir() const;

    void validate() const;
};

PipelineConfig config_from_json_file(const std::filesystem::path& path);
void write_config_json(const std::filesystem::path& path, const PipelineConfig& cfg);

/// Exit status of the composite pipeline.
enum class RunStatus : int { Ok = 0, ValidationFailed = 1, RuntimeFailure = 2 };

/// ingest -> indicators -> sync -> (prescreen, select_k, assign, profiles)
/// -> ENA over monomodal and multimodal codes -> reports and plots.
/// Validation failures stop the run before derivation (exit 1).
RunStatus run_pipeline(const PipelineConfig& cfg);

}  // namespace fuse
