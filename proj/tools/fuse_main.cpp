// fuse: multimodal indicator fusion pipeline CLI.
//
// Subcommands: validate, indicators, fit, assign, ena, report, synth, run.

#include "fuse/catalog.hpp"
#include "fuse/ena.hpp"
#include "fuse/errors.hpp"
#include "fuse/ingest.hpp"
#include "fuse/lca.hpp"
#include "fuse/pipeline.hpp"
#include "fuse/physio.hpp"
#include "fuse/spatial.hpp"
#include "fuse/svg.hpp"
#include "fuse/sync.hpp"
#include "fuse/synthgen.hpp"
#include "fuse/types.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void print_findings(const std::string& kind, const std::vector<fuse::ValidationFinding>& fs) {
    for (const auto& f : fs) {
        std::cout << "  [" << kind << "] " << f.file;
        if (f.row > 0) std::cout << " row " << f.row;
        std::cout << ": " << f.message << "\n";
    }
}

int cmd_validate(const std::vector<std::string>& session_dirs) {
    bool all_ok = true;
    for (const auto& dir : session_dirs) {
        try {
            const auto session = fuse::load_session(dir);
            const auto report = fuse::validate(session);
            std::cout << session.session_id << ": "
                      << (report.ok() ? "OK" : "FAILED") << " (" << report.errors.size()
                      << " errors, " << report.warnings.size() << " warnings)\n";
            print_findings("error", report.errors);
            print_findings("warning", report.warnings);
            all_ok = all_ok && report.ok();
        } catch (const fuse::Error& e) {
            std::cout << dir << ": FAILED (" << e.what() << ")\n";
            all_ok = false;
        }
    }
    return all_ok ? 0 : 1;
}

void dump_spatial_csv(const fs::path& path, const fuse::SpatialStateSeries& series) {
    std::ofstream out(path, std::ios::binary);
    out << "student_id,t,state\n";
    for (const auto& [sid, states] : series.states) {
        for (std::size_t s = 0; s < states.size(); ++s) {
            out << sid << ',' << (series.span_start + static_cast<fuse::Second>(s)) << ','
                << (states[s] ? fuse::sp_state_name(*states[s]) : "") << '\n';
        }
    }
}

void dump_physio_csv(const fs::path& path, const fuse::PhysioFlags& flags) {
    std::ofstream out(path, std::ios::binary);
    out << "student_id,t,arousal,synchrony,mean_pairwise_r\n";
    for (const auto& [sid, arousal] : flags.arousal) {
        const auto& synchrony = flags.synchrony.at(sid);
        const auto& mean_r = flags.mean_pairwise_r.at(sid);
        for (std::size_t s = 0; s < arousal.size(); ++s) {
            out << sid << ',' << (flags.span_start + static_cast<fuse::Second>(s)) << ','
                << (arousal[s] ? (*arousal[s] ? "1" : "0") : "") << ','
                << (synchrony[s] ? (*synchrony[s] ? "1" : "0") : "") << ','
                << (mean_r[s] ? std::to_string(*mean_r[s]) : "") << '\n';
        }
    }
}

fuse::OutcomeGroups groups_from_surveys_csv(const fs::path& path, fuse::OutcomeMeasure measure,
                                            int threshold) {
    std::ifstream in(path);
    if (!in) fuse::raise(fuse::ErrorCode::MissingFile, "cannot open " + path.string());
    fuse::OutcomeGroups groups;
    groups.measure = measure;
    groups.threshold = threshold;
    std::string line;
    std::getline(in, line);  // header: session_id,student_id,task_...,collab_...
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        for (char c : line) {
            if (c == ',') {
                fields.push_back(field);
                field.clear();
            } else if (c != '\r') {
                field.push_back(c);
            }
        }
        fields.push_back(field);
        if (fields.size() != 4) {
            fuse::raise(fuse::ErrorCode::MalformedRow, path.string() + ": bad row '" + line + "'");
        }
        const int rating = std::stoi(measure == fuse::OutcomeMeasure::TaskSatisfaction
                                         ? fields[2]
                                         : fields[3]);
        groups.membership[fuse::make_unit_id(fields[0], fields[1])] =
            rating >= threshold ? fuse::Satisfaction::Satisfied
                                : fuse::Satisfaction::Unsatisfied;
    }
    return groups;
}

int cmd_report(const fs::path& run_dir) {
    const auto model_path = run_dir / "model.json";
    const auto fit = fuse::read_model_json(model_path);
    fuse::svg::write_profiles(run_dir / "profiles.svg", fit.model);

    std::ofstream md(run_dir / "report.md", std::ios::binary);
    md << "# Pipeline report\n\n";
    md << "Model: " << fit.model.n_classes << " classes over " << fit.model.code_names.size()
       << " codes, logL=" << fit.log_likelihood << ", BIC=" << fit.bic << ", n=" << fit.n_obs
       << (fit.converged ? ", converged" : ", NOT converged") << "\n\n";
    md << "## Class weights\n\n";
    for (std::size_t k = 0; k < fit.model.weights.size(); ++k) {
        md << "- class " << (k + 1) << ": " << fit.model.weights[k] << "\n";
    }
    md << "\n## Binary profiles (threshold 0.5)\n\n";
    const auto profiles = fuse::binary_profiles(fit.model);
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        md << "- class " << (k + 1) << ":";
        bool any = false;
        for (std::size_t j = 0; j < profiles[k].size(); ++j) {
            if (profiles[k][j]) {
                md << " " << fit.model.code_names[j];
                any = true;
            }
        }
        if (!any) md << " (none)";
        md << "\n";
    }
    md << "\n## Group comparisons\n\n";
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("ena_", 0) != 0 || entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        ordered_json j;
        in >> j;
        md << "### " << name << "\n\n";
        md << "variance explained:";
        for (const auto& [axis, v] : j["variance_explained"].items()) {
            md << " " << axis << "=" << v.get<double>();
        }
        md << "\n\n";
        for (const auto& c : j["comparisons"]) {
            md << "- " << c["axis"].get<std::string>() << ": U=" << c["U"].get<double>()
               << ", p=" << c["p"].get<double>() << ", r=" << c["r"].get<double>()
               << (c["significant"].get<bool>() ? " (significant)" : "") << "\n";
        }
        md << "\n";
    }
    std::cout << "report written to " << (run_dir / "report.md") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fuse: monomodal indicator derivation, latent class fusion and "
                 "co-occurrence network comparison for collaboration sessions"};
    app.require_subcommand(1);

    // --- validate ---
    auto* validate_cmd = app.add_subcommand("validate", "check session directories");
    std::vector<std::string> validate_sessions;
    validate_cmd->add_option("--session", validate_sessions, "session directory")->required();

    // --- indicators ---
    auto* ind_cmd = app.add_subcommand("indicators", "derive per-interval indicator records");
    std::vector<std::string> ind_sessions;
    std::string ind_out = "intervals.csv";
    std::string ind_surveys_out, ind_dump_spatial, ind_dump_physio;
    fuse::SyncConfig ind_sync;
    fuse::PhysioConfig ind_physio;
    ind_cmd->add_option("--session", ind_sessions, "session directory")->required();
    ind_cmd->add_option("--out", ind_out, "output intervals.csv");
    ind_cmd->add_option("--surveys-out", ind_surveys_out, "also write consolidated surveys.csv");
    ind_cmd->add_option("--interval-len", ind_sync.interval_len, "interval length, seconds");
    ind_cmd->add_option("--sp-min-run", ind_sync.sp_min_run, "min consecutive seconds for SP bits");
    ind_cmd->add_option("--py-min-seconds", ind_sync.py_min_seconds,
                        "PY bit needs strictly more flagged seconds than this");
    ind_cmd->add_option("--sync-window", ind_physio.window, "synchrony Pearson window, seconds");
    ind_cmd->add_option("--sync-tau", ind_physio.tau, "synchrony threshold on mean pairwise r");
    ind_cmd->add_option("--dump-spatial", ind_dump_spatial, "debug dump of per-second SP states");
    ind_cmd->add_option("--dump-physio", ind_dump_physio, "debug dump of per-second PY flags");

    // --- fit ---
    auto* fit_cmd = app.add_subcommand("fit", "class-count sweep and model fit");
    std::string fit_data = "intervals.csv", fit_out_dir = ".";
    fuse::LcaConfig fit_cfg;
    int fit_kmin = 1, fit_kmax = 10;
    fit_cmd->add_option("--data", fit_data, "intervals.csv");
    fit_cmd->add_option("--out-dir", fit_out_dir, "output directory");
    fit_cmd->add_option("--k-min", fit_kmin, "smallest class count");
    fit_cmd->add_option("--k-max", fit_kmax, "largest class count");
    fit_cmd->add_option("--restarts", fit_cfg.restarts, "EM restarts per class count");
    fit_cmd->add_option("--tol", fit_cfg.tol, "relative logL convergence tolerance");
    fit_cmd->add_option("--max-iter", fit_cfg.max_iter, "EM iteration cap");
    fit_cmd->add_option("--eps", fit_cfg.eps, "item-probability clamp");
    fit_cmd->add_option("--seed", fit_cfg.seed, "RNG seed");
    fit_cmd->add_option("--threads", fit_cfg.threads, "parallel restarts");

    // --- assign ---
    auto* assign_cmd = app.add_subcommand("assign", "posterior class assignment");
    std::string assign_model = "model.json", assign_data = "intervals.csv",
                assign_out = "assignments.csv";
    assign_cmd->add_option("--model", assign_model, "model.json");
    assign_cmd->add_option("--data", assign_data, "intervals.csv");
    assign_cmd->add_option("--out", assign_out, "output assignments.csv");

    // --- ena ---
    auto* ena_cmd = app.add_subcommand("ena", "co-occurrence networks and group comparison");
    std::string ena_data = "intervals.csv", ena_surveys = "surveys.csv";
    std::string ena_codes = "monomodal", ena_measure = "task", ena_out_dir = ".";
    std::string ena_assignments, ena_model;
    std::string ena_stanza = "whole";
    int ena_window = 2, ena_threshold = 4;
    double ena_alpha = 0.05;
    std::size_t ena_m_tests = 0;
    ena_cmd->add_option("--data", ena_data, "intervals.csv");
    ena_cmd->add_option("--surveys", ena_surveys,
                        "consolidated surveys.csv (from `indicators --surveys-out`)");
    ena_cmd->add_option("--codes", ena_codes, "monomodal|multimodal");
    ena_cmd->add_option("--assignments", ena_assignments,
                        "assignments.csv (required for --codes multimodal)");
    ena_cmd->add_option("--model", ena_model, "model.json (required for --codes multimodal)");
    ena_cmd->add_option("--measure", ena_measure, "task|collab");
    ena_cmd->add_option("--alpha", ena_alpha, "initial significance level");
    ena_cmd->add_option("--m-tests", ena_m_tests, "Bonferroni divisor (0 = axes tested)");
    ena_cmd->add_option("--stanza", ena_stanza, "whole|window");
    ena_cmd->add_option("--window", ena_window, "stanza window in lines");
    ena_cmd->add_option("--likert-threshold", ena_threshold, "satisfied iff rating >= threshold");
    ena_cmd->add_option("--out-dir", ena_out_dir, "output directory");

    // --- report ---
    auto* report_cmd = app.add_subcommand("report", "summarise a run directory");
    std::string report_dir;
    report_cmd->add_option("--run-dir", report_dir, "pipeline run directory")->required();

    // --- synth ---
    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic datasets or sessions");
    std::string synth_preset, synth_script, synth_out_dir = ".";
    std::size_t synth_n = 0;
    std::uint64_t synth_seed = 0;
    int synth_intervals = 30;
    synth_cmd->add_option("--preset", synth_preset, "planted model preset (fourclass|uniform)");
    synth_cmd->add_option("--script", synth_script, "scenario script JSON -> raw session files");
    synth_cmd->add_option("--n", synth_n, "total records to sample (preset mode)");
    synth_cmd->add_option("--seed", synth_seed, "RNG seed");
    synth_cmd->add_option("--intervals-per-student", synth_intervals,
                          "layout used when sampling records");
    synth_cmd->add_option("--out-dir", synth_out_dir, "output directory");

    // --- run ---
    auto* run_cmd = app.add_subcommand("run", "composite pipeline from a config file");
    std::string run_config;
    int run_threads = 0;
    run_cmd->add_option("--config", run_config, "pipeline config JSON")->required();
    run_cmd->add_option("--threads", run_threads, "override config threads");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto& catalog = fuse::default_catalog();

        if (*validate_cmd) return cmd_validate(validate_sessions);

        if (*ind_cmd) {
            std::vector<fuse::IntervalRecord> records;
            std::vector<fuse::RawSession> sessions;
            for (const auto& dir : ind_sessions) {
                auto session = fuse::load_session(dir, catalog);
                const auto report = fuse::validate(session);
                if (!report.ok()) {
                    std::cerr << session.session_id << ": validation failed ("
                              << report.errors.front().message << ")\n";
                    return 1;
                }
                if (!ind_dump_spatial.empty()) {
                    dump_spatial_csv(ind_dump_spatial, fuse::spatial_states(session));
                }
                if (!ind_dump_physio.empty()) {
                    dump_physio_csv(ind_dump_physio, fuse::physio_flags(session, ind_physio));
                }
                auto derived = fuse::derive_records(session, ind_sync, ind_physio, catalog);
                records.insert(records.end(), derived.begin(), derived.end());
                sessions.push_back(std::move(session));
            }
            fuse::write_intervals_csv(ind_out, records, catalog);
            if (!ind_surveys_out.empty()) {
                std::ofstream out(ind_surveys_out, std::ios::binary);
                out << "session_id,student_id,task_satisfaction,collab_satisfaction\n";
                for (const auto& s : sessions) {
                    for (const auto& [sid, survey] : s.surveys) {
                        out << s.session_id << ',' << sid << ',' << survey.task_satisfaction
                            << ',' << survey.collab_satisfaction << '\n';
                    }
                }
            }
            std::cout << records.size() << " records -> " << ind_out << "\n";
            return 0;
        }

        if (*fit_cmd) {
            const auto records = fuse::read_intervals_csv(fit_data, catalog);
            const auto data = fuse::BinaryMatrix::from_records(records);
            fs::create_directories(fit_out_dir);
            const fs::path out_dir(fit_out_dir);

            const auto prescreen = fuse::spearman_prescreen(data, catalog.code_names());
            {
                std::ofstream flags(out_dir / "prescreen_flags.csv", std::ios::binary);
                flags << "code_a,code_b,rho\n";
                for (const auto& [a, b] : prescreen.flagged) {
                    flags << prescreen.codes[a] << ',' << prescreen.codes[b] << ','
                          << prescreen.rho[a][b] << '\n';
                }
            }
            auto [fit, sweep] = fuse::select_k(data, fit_kmin, fit_kmax, fit_cfg,
                                               catalog.code_names());
            fuse::write_sweep_csv(out_dir / "sweep.csv", sweep);
            fuse::write_model_json(out_dir / "model.json", fit, fit_cfg);
            fuse::svg::write_profiles(out_dir / "profiles.svg", fit.model);
            std::cout << "chosen K=" << sweep.chosen_k << " (BIC " << fit.bic << ") -> "
                      << (out_dir / "model.json") << "\n";
            return 0;
        }

        if (*assign_cmd) {
            const auto fit = fuse::read_model_json(assign_model);
            const auto records = fuse::read_intervals_csv(assign_data, catalog);
            const auto data = fuse::BinaryMatrix::from_records(records);
            const auto assignments = fuse::posterior_assign(fit.model, data);
            fuse::write_assignments_csv(assign_out, records, assignments);
            std::cout << assignments.size() << " assignments -> " << assign_out << "\n";
            return 0;
        }

        if (*ena_cmd) {
            const auto measure = fuse::outcome_measure_from_name(ena_measure);
            const auto groups = groups_from_surveys_csv(ena_surveys, measure, ena_threshold);
            const auto stanza = ena_stanza == "whole"
                                    ? fuse::ena::Stanza::whole()
                                    : fuse::ena::Stanza::moving_window(ena_window);

            std::vector<fuse::ena::Unit> units;
            std::vector<std::string> codes;
            if (ena_codes == "monomodal") {
                const auto records = fuse::read_intervals_csv(ena_data, catalog);
                units = fuse::ena::units_from_records(records);
                codes = catalog.code_names();
            } else if (ena_codes == "multimodal") {
                if (ena_assignments.empty() || ena_model.empty()) {
                    std::cerr << "--codes multimodal needs --assignments and --model\n";
                    return 1;
                }
                const auto fit = fuse::read_model_json(ena_model);
                const auto assigned = fuse::read_assignments_csv(ena_assignments);
                units = fuse::ena::units_from_assignments(assigned, fit.model.n_classes);
                codes = fuse::ena::class_code_names(fit.model.n_classes);
            } else {
                std::cerr << "--codes must be monomodal or multimodal\n";
                return 1;
            }

            fs::create_directories(ena_out_dir);
            const fs::path out_dir(ena_out_dir);
            auto report = fuse::ena::run(units, codes, groups, stanza, ena_alpha, ena_m_tests);
            const std::string tag = ena_codes + "_" + ena_measure;
            fuse::ena::write_report_json(out_dir / ("ena_" + tag + ".json"), report);
            fuse::ena::write_edges_csv(out_dir / ("edges_" + tag + ".csv"), report);
            fuse::svg::write_network(out_dir / ("network_" + tag + ".svg"), codes,
                                     report.subtracted_edges, "unsatisfied", "satisfied");
            for (const auto& c : report.comparisons) {
                std::cout << c.axis << ": U=" << c.u << ", p=" << c.p << ", r=" << c.r
                          << (c.significant ? " (significant at " : " (ns at ")
                          << c.alpha_adjusted << ")\n";
            }
            return 0;
        }

        if (*report_cmd) return cmd_report(report_dir);

        if (*synth_cmd) {
            if (!synth_script.empty()) {
                const auto script = fuse::synth::load_script(synth_script);
                const auto result = fuse::synth::synth_raw_session(script, synth_out_dir);
                std::cout << "session files -> " << result.session_dir << " ("
                          << result.expected.size() << " expected records)\n";
                return 0;
            }
            if (synth_preset.empty()) {
                std::cerr << "synth needs --preset or --script\n";
                return 1;
            }
            auto spec = fuse::synth::preset_by_name(synth_preset, synth_seed);
            spec.intervals_per_student = synth_intervals;
            if (synth_n > 0) {
                const auto per_session = static_cast<std::size_t>(spec.students_per_session) *
                                         static_cast<std::size_t>(spec.intervals_per_student);
                spec.n_sessions = static_cast<int>((synth_n + per_session - 1) / per_session);
            }
            const auto [records, labels] = fuse::synth::sample_indicators(spec, synth_n);
            fs::create_directories(synth_out_dir);
            const fs::path out_dir(synth_out_dir);
            fuse::write_intervals_csv(out_dir / "intervals.csv", records, catalog);
            {
                std::ofstream out(out_dir / "labels.csv", std::ios::binary);
                out << "session_id,student_id,interval_index,true_class\n";
                for (std::size_t i = 0; i < records.size(); ++i) {
                    out << records[i].session_id << ',' << records[i].student_id << ','
                        << records[i].interval_index << ',' << (labels[i] + 1) << '\n';
                }
            }
            std::cout << records.size() << " records -> " << (out_dir / "intervals.csv") << "\n";
            return 0;
        }

        if (*run_cmd) {
            auto cfg = fuse::config_from_json_file(run_config);
            if (run_threads > 0) cfg.threads = run_threads;
            return static_cast<int>(fuse::run_pipeline(cfg));
        }
    } catch (const fuse::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
