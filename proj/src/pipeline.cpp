#include "fuse/pipeline.hpp"

#include "csv.hpp"
#include "fuse/errors.hpp"
#include "fuse/ingest.hpp"
#include "fuse/svg.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

namespace fuse {

namespace {

using nlohmann::ordered_json;

ordered_json config_to_json(const PipelineConfig& cfg) {
    ordered_json j;
    j["sessions"] = ordered_json::array();
    for (const auto& s : cfg.sessions) j["sessions"].push_back(s.string());
    j["out_dir"] = cfg.out_dir.string();
    j["sync"] = {{"interval_len", cfg.sync.interval_len},
                 {"sp_min_run", cfg.sync.sp_min_run},
                 {"py_min_seconds", cfg.sync.py_min_seconds}};
    j["physio"] = {{"window", cfg.physio.window}, {"tau", cfg.physio.tau}};
    j["lca"] = {{"k_min", cfg.lca.k_min},     {"k_max", cfg.lca.k_max},
                {"tol", cfg.lca.em.tol},      {"max_iter", cfg.lca.em.max_iter},
                {"restarts", cfg.lca.em.restarts}, {"eps", cfg.lca.em.eps},
                {"seed", cfg.lca.em.seed}};
    ordered_json measures = ordered_json::array();
    for (auto m : cfg.ena.measures) measures.push_back(outcome_measure_name(m));
    j["ena"] = {{"stanza", cfg.ena.stanza.mode == ena::Stanza::Mode::WholeConversation
                               ? "whole"
                               : "window"},
                {"window", cfg.ena.stanza.window},
                {"measures", measures},
                {"alpha", cfg.ena.alpha},
                {"m_tests", cfg.ena.m_tests},
                {"likert_threshold", cfg.ena.likert_threshold}};
    j["threads"] = cfg.threads;
    return j;
}

}  // namespace

std::filesystem::path PipelineConfig::run_dir() const {
    return out_dir / ("run-" + std::to_string(lca.em.seed));
}

void PipelineConfig::validate() const {
    if (sessions.empty()) raise(ErrorCode::InvalidConfig, "no session directories given");
    sync.validate();
    if (lca.k_min < 1 || lca.k_max < lca.k_min) {
        raise(ErrorCode::InvalidConfig, "bad LCA class range");
    }
    if (lca.em.restarts < 1) raise(ErrorCode::InvalidConfig, "need at least one restart");
    if (ena.measures.empty()) raise(ErrorCode::InvalidConfig, "no outcome measures selected");
    if (threads < 1) raise(ErrorCode::InvalidConfig, "threads must be >= 1");
}

PipelineConfig config_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::MissingFile, "cannot open " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        raise(ErrorCode::MalformedRow, path.string() + ": " + e.what());
    }

    PipelineConfig cfg;
    for (const auto& s : j.value("sessions", ordered_json::array())) {
        cfg.sessions.emplace_back(s.get<std::string>());
    }
    cfg.out_dir = j.value("out_dir", std::string("out"));
    if (j.contains("sync")) {
        const auto& s = j["sync"];
        cfg.sync.interval_len = s.value("interval_len", cfg.sync.interval_len);
        cfg.sync.sp_min_run = s.value("sp_min_run", cfg.sync.sp_min_run);
        cfg.sync.py_min_seconds = s.value("py_min_seconds", cfg.sync.interval_len / 2);
    }
    if (j.contains("physio")) {
        cfg.physio.window = j["physio"].value("window", cfg.physio.window);
        cfg.physio.tau = j["physio"].value("tau", cfg.physio.tau);
    }
    if (j.contains("lca")) {
        const auto& l = j["lca"];
        cfg.lca.k_min = l.value("k_min", cfg.lca.k_min);
        cfg.lca.k_max = l.value("k_max", cfg.lca.k_max);
        cfg.lca.em.tol = l.value("tol", cfg.lca.em.tol);
        cfg.lca.em.max_iter = l.value("max_iter", cfg.lca.em.max_iter);
        cfg.lca.em.restarts = l.value("restarts", cfg.lca.em.restarts);
        cfg.lca.em.eps = l.value("eps", cfg.lca.em.eps);
        cfg.lca.em.seed = l.value("seed", cfg.lca.em.seed);
    }
    if (j.contains("ena")) {
        const auto& e = j["ena"];
        const auto stanza = e.value("stanza", std::string("whole"));
        if (stanza == "whole") {
            cfg.ena.stanza = ena::Stanza::whole();
        } else if (stanza == "window") {
            cfg.ena.stanza = ena::Stanza::moving_window(e.value("window", 2));
        } else {
            raise(ErrorCode::InvalidConfig, "ena.stanza must be whole|window");
        }
        if (e.contains("measures")) {
            cfg.ena.measures.clear();
            for (const auto& m : e["measures"]) {
                cfg.ena.measures.push_back(outcome_measure_from_name(m.get<std::string>()));
            }
        }
        cfg.ena.alpha = e.value("alpha", cfg.ena.alpha);
        cfg.ena.m_tests = e.value("m_tests", cfg.ena.m_tests);
        cfg.ena.likert_threshold = e.value("likert_threshold", cfg.ena.likert_threshold);
    }
    cfg.threads = j.value("threads", cfg.threads);
    return cfg;
}

void write_config_json(const std::filesystem::path& path, const PipelineConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoFailure, "cannot write " + path.string());
    out << config_to_json(cfg).dump(2) << '\n';
}

namespace {

void write_validation_json(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, ValidationReport>>& reports,
                           const PipelineConfig& cfg) {
    ordered_json j;
    j["sessions"] = ordered_json::array();
    for (const auto& [session_id, report] : reports) {
        ordered_json r;
        r["session_id"] = session_id;
        r["ok"] = report.ok();
        auto findings = [](const std::vector<ValidationFinding>& fs) {
            ordered_json arr = ordered_json::array();
            for (const auto& f : fs) {
                arr.push_back({{"file", f.file}, {"row", f.row}, {"message", f.message}});
            }
            return arr;
        };
        r["errors"] = findings(report.errors);
        r["warnings"] = findings(report.warnings);
        r["position_coverage"] = report.position_coverage;
        r["heart_rate_coverage"] = report.heart_rate_coverage;
        j["sessions"].push_back(std::move(r));
    }
    j["config"] = config_to_json(cfg);
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoFailure, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_prescreen_csv(const std::filesystem::path& path, const PrescreenResult& prescreen) {
    csv::Writer out(path);
    std::vector<std::string> header{"code"};
    for (const auto& c : prescreen.codes) header.push_back(c);
    out.row(header);
    for (std::size_t a = 0; a < prescreen.codes.size(); ++a) {
        std::vector<std::string> row{prescreen.codes[a]};
        for (std::size_t b = 0; b < prescreen.codes.size(); ++b) {
            row.push_back(csv::format_double(prescreen.rho[a][b]));
        }
        out.row(row);
    }
}

void write_prescreen_flags_csv(const std::filesystem::path& path,
                               const PrescreenResult& prescreen) {
    csv::Writer out(path);
    out.row({"code_a", "code_b", "rho", "note"});
    for (const auto& [a, b] : prescreen.flagged) {
        out.row({prescreen.codes[a], prescreen.codes[b], csv::format_double(prescreen.rho[a][b]),
                 "flagged |rho| > " + csv::format_double(prescreen.rho_max)});
    }
    for (auto j : prescreen.degenerate_columns) {
        out.row({prescreen.codes[j], "", "nan", "degenerate column (all 0 or all 1)"});
    }
}

void write_surveys_csv(const std::filesystem::path& path,
                       const std::vector<RawSession>& sessions) {
    csv::Writer out(path);
    out.row({"session_id", "student_id", "task_satisfaction", "collab_satisfaction"});
    for (const auto& session : sessions) {
        for (const auto& [sid, survey] : session.surveys) {
            out.row({session.session_id, sid, std::to_string(survey.task_satisfaction),
                     std::to_string(survey.collab_satisfaction)});
        }
    }
}

void run_ena_outputs(const std::filesystem::path& dir, const std::string& tag,
                     const std::vector<ena::Unit>& units, const std::vector<std::string>& codes,
                     const OutcomeGroups& groups, const PipelineConfig& cfg) {
    auto report = ena::run(units, codes, groups, cfg.ena.stanza, cfg.ena.alpha, cfg.ena.m_tests);
    const std::string measure = outcome_measure_name(groups.measure);
    ena::write_report_json(dir / ("ena_" + tag + "_" + measure + ".json"), report);
    ena::write_edges_csv(dir / ("edges_" + tag + "_" + measure + ".csv"), report);
    svg::write_network(dir / ("network_" + tag + "_" + measure + ".svg"), codes,
                       report.subtracted_edges, "unsatisfied", "satisfied");
}

}  // namespace

RunStatus run_pipeline(const PipelineConfig& cfg) {
    try {
        cfg.validate();
        const auto dir = cfg.run_dir();
        std::filesystem::create_directories(dir);
        write_config_json(dir / "config.json", cfg);

        const auto& catalog = default_catalog();

        // ingest + validation gate
        std::vector<RawSession> sessions;
        std::vector<std::pair<std::string, ValidationReport>> reports;
        bool all_ok = true;
        for (const auto& path : cfg.sessions) {
            auto session = load_session(path, catalog);
            auto report = validate(session);
            all_ok = all_ok && report.ok();
            reports.emplace_back(session.session_id, std::move(report));
            sessions.push_back(std::move(session));
        }
        write_validation_json(dir / "validation.json", reports, cfg);
        if (!all_ok) {
            std::cerr << "validation failed; see " << (dir / "validation.json") << "\n";
            return RunStatus::ValidationFailed;
        }

        // monomodal indicators -> interval records
        std::vector<IntervalRecord> records;
        for (const auto& session : sessions) {
            auto derived = derive_records(session, cfg.sync, cfg.physio, catalog);
            records.insert(records.end(), std::make_move_iterator(derived.begin()),
                           std::make_move_iterator(derived.end()));
        }
        write_intervals_csv(dir / "intervals.csv", records, catalog);
        write_surveys_csv(dir / "surveys.csv", sessions);

        // correlation pre-screen (reported, nothing auto-removed)
        const auto data = BinaryMatrix::from_records(records);
        const auto prescreen = spearman_prescreen(data, catalog.code_names());
        write_prescreen_csv(dir / "prescreen.csv", prescreen);
        write_prescreen_flags_csv(dir / "prescreen_flags.csv", prescreen);

        // class-count sweep, model, assignments, profiles
        LcaConfig em = cfg.lca.em;
        em.threads = cfg.threads;
        auto [fit, sweep] = select_k(data, cfg.lca.k_min, cfg.lca.k_max, em, catalog.code_names());
        write_sweep_csv(dir / "sweep.csv", sweep);
        write_model_json(dir / "model.json", fit, em);
        svg::write_profiles(dir / "profiles.svg", fit.model);

        const auto assignments = posterior_assign(fit.model, data);
        write_assignments_csv(dir / "assignments.csv", records, assignments);

        // ENA over the monomodal codes and the multimodal class codes
        const auto mono_units = ena::units_from_records(records);
        std::vector<AssignedRecord> assigned;
        assigned.reserve(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            assigned.push_back({records[i].session_id, records[i].student_id,
                                records[i].interval_index, assignments[i].map_class});
        }
        const auto multi_units = ena::units_from_assignments(assigned, fit.model.n_classes);
        const auto class_codes = ena::class_code_names(fit.model.n_classes);

        for (auto measure : cfg.ena.measures) {
            const auto groups = group_by_outcome(sessions, measure, cfg.ena.likert_threshold);
            run_ena_outputs(dir, "monomodal", mono_units, catalog.code_names(), groups, cfg);
            run_ena_outputs(dir, "multimodal", multi_units, class_codes, groups, cfg);
        }
        return RunStatus::Ok;
    } catch (const Error& e) {
        std::cerr << "pipeline failed: " << e.what() << "\n";
        return RunStatus::RuntimeFailure;
    } catch (const std::exception& e) {
        std::cerr << "pipeline failed: " << e.what() << "\n";
        return RunStatus::RuntimeFailure;
    }
}

}  // namespace fuse
