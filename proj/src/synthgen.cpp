#include "fuse/synthgen.hpp"

#include "csv.hpp"
#include "fuse/errors.hpp"
#include "fuse/ingest.hpp"
#include "rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fuse::synth {

namespace {

using nlohmann::ordered_json;

std::vector<double> profile_from_signature(const std::set<std::string>& present,
                                           const IndicatorCatalog& catalog, double p_present,
                                           double p_absent) {
    std::vector<double> theta(catalog.size(), p_absent);
    for (const auto& code : present) theta[catalog.index_of(code)] = p_present;
    return theta;
}

std::string session_label(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%03d", i + 1);
    return buf;
}

}  // namespace

PlantedSpec fourclass_preset(std::uint64_t seed) {
    const auto& catalog = default_catalog();
    PlantedSpec spec;
    spec.n_classes = 4;
    spec.weights = {0.25, 0.25, 0.25, 0.25};
    spec.class_names = {"collaborative.communication", "embodied.collaboration",
                        "distant.interaction", "solitary.engagement"};
    spec.item_probs = {
        profile_from_signature({"SP.collaborate.primary", "SP.collaborate.secondary",
                                "VB.task.allocation", "VB.information.sharing",
                                "VB.information.requesting", "VB.agreement", "PY.arousal",
                                "PY.synchrony"},
                               catalog, 0.9, 0.05),
        profile_from_signature(
            {"SP.collaborate.primary", "SP.collaborate.secondary", "PY.arousal", "PY.synchrony"},
            catalog, 0.9, 0.05),
        profile_from_signature({"SP.individual.primary", "VB.task.allocation",
                                "VB.information.sharing", "VB.information.requesting",
                                "VB.agreement", "PY.arousal", "PY.synchrony"},
                               catalog, 0.9, 0.05),
        profile_from_signature({"SP.individual.secondary", "PY.arousal"}, catalog, 0.9, 0.05),
    };
    spec.seed = seed;
    return spec;
}

PlantedSpec preset_by_name(const std::string& name, std::uint64_t seed) {
    if (name == "fourclass") return fourclass_preset(seed);
    if (name == "uniform") {
        PlantedSpec spec;
        spec.n_classes = 1;
        spec.weights = {1.0};
        spec.class_names = {"uniform"};
        spec.item_probs = {std::vector<double>(default_catalog().size(), 0.5)};
        spec.seed = seed;
        return spec;
    }
    raise(ErrorCode::InvalidConfig, "unknown preset '" + name + "' (want fourclass|uniform)");
}

std::pair<std::vector<IntervalRecord>, std::vector<int>> sample_indicators(
    const PlantedSpec& spec, std::size_t total_cap) {
    if (spec.n_classes < 1 || spec.weights.size() != static_cast<std::size_t>(spec.n_classes) ||
        spec.item_probs.size() != static_cast<std::size_t>(spec.n_classes)) {
        raise(ErrorCode::InvalidConfig, "planted spec dimensions are inconsistent");
    }
    const std::size_t n_items = spec.item_probs.front().size();
    for (const auto& row : spec.item_probs) {
        if (row.size() != n_items) {
            raise(ErrorCode::InvalidConfig, "planted item_probs rows differ in length");
        }
    }
    std::vector<double> cum(spec.weights.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.weights.size(); ++k) {
        acc += spec.weights[k];
        cum[k] = acc;
    }
    if (std::abs(acc - 1.0) > 1e-9) {
        raise(ErrorCode::InvalidConfig, "planted weights must sum to 1");
    }

    const std::size_t total =
        total_cap ? std::min(total_cap, spec.total_records()) : spec.total_records();

    SplitMix64 rng{mix_seed(spec.seed, 0x5eedULL, total)};
    std::vector<IntervalRecord> records;
    std::vector<int> labels;
    records.reserve(total);
    labels.reserve(total);

    std::size_t emitted = 0;
    for (int s = 0; s < spec.n_sessions && emitted < total; ++s) {
        for (int u = 0; u < spec.students_per_session && emitted < total; ++u) {
            for (int i = 0; i < spec.intervals_per_student && emitted < total; ++i) {
                const double draw = rng.uniform();
                int k = 0;
                while (k + 1 < spec.n_classes && draw >= cum[static_cast<std::size_t>(k)]) ++k;

                IntervalRecord rec;
                rec.session_id = session_label(s);
                rec.student_id = "s" + std::to_string(u + 1);
                rec.interval_index = static_cast<std::size_t>(i);
                rec.values.reserve(n_items);
                const auto& theta = spec.item_probs[static_cast<std::size_t>(k)];
                for (std::size_t j = 0; j < n_items; ++j) {
                    rec.values.push_back(rng.uniform() < theta[j] ? 1 : 0);
                }
                records.push_back(std::move(rec));
                labels.push_back(k);
                ++emitted;
            }
        }
    }
    return {std::move(records), std::move(labels)};
}

// --- scripted raw sessions ---------------------------------------------------

namespace {

ScenarioScript script_from_json(const ordered_json& j) {
    ScenarioScript script;
    script.session_id = j.at("session_id").get<std::string>();
    for (const auto& z : j.at("zones")) {
        ZoneSpec zone;
        zone.name = z.at("name").get<std::string>();
        zone.cx = z.at("cx").get<double>();
        zone.cy = z.at("cy").get<double>();
        zone.radius = z.value("radius", 1.5);
        zone.task_type = task_type_from_name(z.at("task_type").get<std::string>());
        script.zones.push_back(zone);
    }
    for (const auto& p : j.at("phases")) {
        script.phases.push_back({p.at("phase").get<int>(), p.at("start_s").get<Second>(),
                                 p.at("end_s").get<Second>()});
    }
    for (const auto& s : j.at("students")) {
        ScenarioScript::Student student;
        student.id = s.at("id").get<std::string>();
        for (const auto& seg : s.value("position_segments", ordered_json::array())) {
            student.position_segments.push_back({seg.at("t_start").get<Second>(),
                                                 seg.at("t_end").get<Second>(),
                                                 seg.at("x").get<double>(),
                                                 seg.at("y").get<double>()});
        }
        for (const auto& u : s.value("utterances", ordered_json::array())) {
            student.utterances.push_back({u.at("t_start").get<Second>(),
                                          u.at("t_end").get<Second>(),
                                          u.at("code").get<std::string>()});
        }
        for (const auto& seg : s.value("hr_segments", ordered_json::array())) {
            student.hr_segments.push_back({seg.at("t_start").get<Second>(),
                                           seg.at("t_end").get<Second>(),
                                           seg.at("bpm_from").get<double>(),
                                           seg.at("bpm_to").get<double>()});
        }
        if (s.contains("survey")) {
            student.survey.task_satisfaction = s["survey"].value("task_satisfaction", 4);
            student.survey.collab_satisfaction = s["survey"].value("collab_satisfaction", 4);
        }
        script.students.push_back(std::move(student));
    }
    for (const auto& [sid, rows] : j.at("expected").items()) {
        auto& per_interval = script.expected[sid];
        for (const auto& row : rows) {
            std::set<std::string> codes;
            for (const auto& code : row) codes.insert(code.get<std::string>());
            per_interval.push_back(std::move(codes));
        }
    }
    if (j.contains("sync")) {
        script.sync.interval_len = j["sync"].value("interval_len", script.sync.interval_len);
        script.sync.sp_min_run = j["sync"].value("sp_min_run", script.sync.sp_min_run);
        script.sync.py_min_seconds =
            j["sync"].value("py_min_seconds", script.sync.py_min_seconds);
    }
    if (j.contains("physio")) {
        script.physio.window = j["physio"].value("window", script.physio.window);
        script.physio.tau = j["physio"].value("tau", script.physio.tau);
    }
    return script;
}

ordered_json script_to_json(const ScenarioScript& script) {
    ordered_json j;
    j["session_id"] = script.session_id;
    j["zones"] = ordered_json::array();
    for (const auto& z : script.zones) {
        j["zones"].push_back({{"name", z.name},
                              {"cx", z.cx},
                              {"cy", z.cy},
                              {"radius", z.radius},
                              {"task_type", task_type_name(z.task_type)}});
    }
    j["phases"] = ordered_json::array();
    for (const auto& p : script.phases) {
        j["phases"].push_back({{"phase", p.phase}, {"start_s", p.start_s}, {"end_s", p.end_s}});
    }
    j["students"] = ordered_json::array();
    for (const auto& s : script.students) {
        ordered_json student;
        student["id"] = s.id;
        student["position_segments"] = ordered_json::array();
        for (const auto& seg : s.position_segments) {
            student["position_segments"].push_back({{"t_start", seg.t_start},
                                                    {"t_end", seg.t_end},
                                                    {"x", seg.x},
                                                    {"y", seg.y}});
        }
        student["utterances"] = ordered_json::array();
        for (const auto& u : s.utterances) {
            student["utterances"].push_back(
                {{"t_start", u.t_start}, {"t_end", u.t_end}, {"code", u.code}});
        }
        student["hr_segments"] = ordered_json::array();
        for (const auto& seg : s.hr_segments) {
            student["hr_segments"].push_back({{"t_start", seg.t_start},
                                              {"t_end", seg.t_end},
                                              {"bpm_from", seg.bpm_from},
                                              {"bpm_to", seg.bpm_to}});
        }
        student["survey"] = {{"task_satisfaction", s.survey.task_satisfaction},
                             {"collab_satisfaction", s.survey.collab_satisfaction}};
        j["students"].push_back(std::move(student));
    }
    ordered_json expected = ordered_json::object();
    for (const auto& [sid, rows] : script.expected) {
        ordered_json per_interval = ordered_json::array();
        for (const auto& codes : rows) {
            per_interval.push_back(std::vector<std::string>(codes.begin(), codes.end()));
        }
        expected[sid] = per_interval;
    }
    j["expected"] = expected;
    j["sync"] = {{"interval_len", script.sync.interval_len},
                 {"sp_min_run", script.sync.sp_min_run},
                 {"py_min_seconds", script.sync.py_min_seconds}};
    j["physio"] = {{"window", script.physio.window}, {"tau", script.physio.tau}};
    return j;
}

void check_script(const ScenarioScript& script, const IndicatorCatalog& catalog) {
    if (script.students.size() != 4) {
        raise(ErrorCode::InvalidConfig, "script needs exactly 4 students");
    }
    if (script.phases.size() != 4) {
        raise(ErrorCode::InvalidConfig, "script needs exactly 4 phases");
    }
    for (const auto& s : script.students) {
        Second last_end = -1;
        for (const auto& seg : s.position_segments) {
            if (seg.t_end <= seg.t_start || seg.t_start < last_end) {
                raise(ErrorCode::InvalidConfig,
                      "position segments for " + s.id + " must be ascending and non-overlapping");
            }
            last_end = seg.t_end;
        }
        last_end = -1;
        for (const auto& seg : s.hr_segments) {
            if (seg.t_end <= seg.t_start || seg.t_start < last_end) {
                raise(ErrorCode::InvalidConfig,
                      "hr segments for " + s.id + " must be ascending and non-overlapping");
            }
            last_end = seg.t_end;
        }
        if (script.expected.find(s.id) == script.expected.end()) {
            raise(ErrorCode::InvalidConfig, "script has no expected bits for " + s.id);
        }
    }
    for (const auto& [sid, rows] : script.expected) {
        for (const auto& codes : rows) {
            for (const auto& code : codes) catalog.index_of(code);
        }
    }
}

}  // namespace

ScenarioScript load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::MissingFile, "cannot open " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        raise(ErrorCode::MalformedRow, path.string() + ": " + e.what());
    }
    return script_from_json(j);
}

void save_script(const std::filesystem::path& path, const ScenarioScript& script) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoFailure, "cannot write " + path.string());
    out << script_to_json(script).dump(2) << '\n';
}

std::vector<IntervalRecord> expected_records(const ScenarioScript& script,
                                             const IndicatorCatalog& catalog) {
    const Second span_start = script.phases[2].start_s;
    const Second span_end = script.phases[3].end_s;
    const auto n_intervals = static_cast<std::size_t>(
        (span_end - span_start) / script.sync.interval_len);

    std::vector<IntervalRecord> records;
    std::map<std::string, const std::vector<std::set<std::string>>*> expected_sorted;
    for (const auto& [sid, rows] : script.expected) expected_sorted[sid] = &rows;

    for (const auto& [sid, rows] : expected_sorted) {
        if (rows->size() != n_intervals) {
            raise(ErrorCode::InvalidConfig,
                  "expected bits for " + sid + " cover " + std::to_string(rows->size()) +
                      " intervals, span has " + std::to_string(n_intervals));
        }
        for (std::size_t i = 0; i < n_intervals; ++i) {
            IntervalRecord rec;
            rec.session_id = script.session_id;
            rec.student_id = sid;
            rec.interval_index = i;
            rec.values.assign(catalog.size(), 0);
            for (const auto& code : (*rows)[i]) rec.values[catalog.index_of(code)] = 1;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

SynthSessionResult synth_raw_session(const ScenarioScript& script,
                                     const std::filesystem::path& out_dir, bool verify) {
    const auto& catalog = default_catalog();
    check_script(script, catalog);

    const auto session_dir = out_dir / script.session_id;
    std::filesystem::create_directories(session_dir);

    {
        csv::Writer positions(session_dir / "positions.csv");
        positions.row({"student_id", "t", "x", "y"});
        for (const auto& s : script.students) {
            for (const auto& seg : s.position_segments) {
                for (Second t = seg.t_start; t < seg.t_end; ++t) {
                    positions.row({s.id, std::to_string(t), csv::format_double(seg.x),
                                   csv::format_double(seg.y)});
                }
            }
        }
    }
    {
        csv::Writer utterances(session_dir / "utterances.csv");
        utterances.row({"student_id", "t_start", "t_end", "code"});
        for (const auto& s : script.students) {
            for (const auto& u : s.utterances) {
                utterances.row({s.id, std::to_string(u.t_start), std::to_string(u.t_end), u.code});
            }
        }
    }
    {
        csv::Writer heartrate(session_dir / "heartrate.csv");
        heartrate.row({"student_id", "t", "bpm"});
        for (const auto& s : script.students) {
            for (const auto& seg : s.hr_segments) {
                const auto len = static_cast<double>(seg.t_end - seg.t_start);
                for (Second t = seg.t_start; t < seg.t_end; ++t) {
                    const double frac = static_cast<double>(t - seg.t_start) / len;
                    const double bpm = seg.bpm_from + (seg.bpm_to - seg.bpm_from) * frac;
                    heartrate.row({s.id, std::to_string(t), csv::format_double(bpm)});
                }
            }
        }
    }
    {
        csv::Writer surveys(session_dir / "surveys.csv");
        surveys.row({"student_id", "task_satisfaction", "collab_satisfaction"});
        for (const auto& s : script.students) {
            surveys.row({s.id, std::to_string(s.survey.task_satisfaction),
                         std::to_string(s.survey.collab_satisfaction)});
        }
    }
    {
        ordered_json zones = ordered_json::array();
        for (const auto& z : script.zones) {
            zones.push_back({{"name", z.name},
                             {"cx", z.cx},
                             {"cy", z.cy},
                             {"radius", z.radius},
                             {"task_type", task_type_name(z.task_type)}});
        }
        std::ofstream out(session_dir / "zones.json", std::ios::binary);
        out << zones.dump(2) << '\n';
    }
    {
        ordered_json phases = ordered_json::array();
        for (const auto& p : script.phases) {
            phases.push_back({{"phase", p.phase}, {"start_s", p.start_s}, {"end_s", p.end_s}});
        }
        std::ofstream out(session_dir / "phases.json", std::ios::binary);
        out << phases.dump(2) << '\n';
    }

    SynthSessionResult result;
    result.session_dir = session_dir;
    result.expected = expected_records(script, catalog);
    write_intervals_csv(session_dir / "expected_intervals.csv", result.expected, catalog);

    if (verify) {
        const auto raw = load_session(session_dir, catalog);
        const auto report = validate(raw);
        if (!report.ok()) {
            raise(ErrorCode::InvalidConfig,
                  "script emits an invalid session: " + report.errors.front().message);
        }
        const auto derived = derive_records(raw, script.sync, script.physio, catalog);
        if (derived.size() != result.expected.size()) {
            raise(ErrorCode::InconsistentScript,
                  script.session_id + ": derived " + std::to_string(derived.size()) +
                      " records, expected " + std::to_string(result.expected.size()));
        }
        for (std::size_t i = 0; i < derived.size(); ++i) {
            const auto& d = derived[i];
            const auto& e = result.expected[i];
            if (d.student_id != e.student_id || d.interval_index != e.interval_index) {
                raise(ErrorCode::InconsistentScript,
                      script.session_id + ": record order mismatch at row " + std::to_string(i));
            }
            for (std::size_t j = 0; j < catalog.size(); ++j) {
                if (d.values[j] != e.values[j]) {
                    raise(ErrorCode::InconsistentScript,
                          script.session_id + ": " + d.student_id + " interval " +
                              std::to_string(d.interval_index) + " code " + catalog.code_at(j) +
                              ": expected " + std::to_string(e.values[j]) + ", rules derive " +
                              std::to_string(d.values[j]));
                }
            }
        }
    }
    return result;
}

}  // namespace fuse::synth
