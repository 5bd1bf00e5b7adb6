#include "fuse/ingest.hpp"

#include "csv.hpp"
#include "fuse/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace fuse {

namespace {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::MissingFile, "cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        raise(ErrorCode::MalformedRow, path.filename().string() + ": " + e.what());
    }
    return j;
}

struct RawTables {
    csv::Table positions;
    csv::Table utterances;
    csv::Table heartrate;
    csv::Table surveys;
    json zones;
    json phases;
};

Second rebase(double raw_t, double session_start) {
    return static_cast<Second>(std::floor(raw_t - session_start));
}

}  // namespace

RawSession load_session(const std::filesystem::path& dir, const IndicatorCatalog& catalog) {
    RawTables t{
        csv::read_file(dir / "positions.csv"),
        csv::read_file(dir / "utterances.csv"),
        csv::read_file(dir / "heartrate.csv"),
        csv::read_file(dir / "surveys.csv"),
        read_json_file(dir / "zones.json"),
        read_json_file(dir / "phases.json"),
    };

    const std::size_t p_sid = t.positions.column("student_id");
    const std::size_t p_t = t.positions.column("t");
    const std::size_t p_x = t.positions.column("x");
    const std::size_t p_y = t.positions.column("y");
    const std::size_t u_sid = t.utterances.column("student_id");
    const std::size_t u_t0 = t.utterances.column("t_start");
    const std::size_t u_t1 = t.utterances.column("t_end");
    const std::size_t u_code = t.utterances.column("code");
    const std::size_t h_sid = t.heartrate.column("student_id");
    const std::size_t h_t = t.heartrate.column("t");
    const std::size_t h_bpm = t.heartrate.column("bpm");
    const std::size_t s_sid = t.surveys.column("student_id");
    const std::size_t s_task = t.surveys.column("task_satisfaction");
    const std::size_t s_collab = t.surveys.column("collab_satisfaction");

    // Session start = earliest raw timestamp over all streams and phase
    // bounds, so rebased time is non-negative everywhere.
    double session_start = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.positions.rows.size(); ++r) {
        csv::expect_width(t.positions, r, t.positions.header.size());
        session_start = std::min(session_start, csv::parse_double(t.positions, r, p_t));
    }
    for (std::size_t r = 0; r < t.utterances.rows.size(); ++r) {
        csv::expect_width(t.utterances, r, t.utterances.header.size());
        session_start = std::min(session_start, csv::parse_double(t.utterances, r, u_t0));
    }
    for (std::size_t r = 0; r < t.heartrate.rows.size(); ++r) {
        csv::expect_width(t.heartrate, r, t.heartrate.header.size());
        session_start = std::min(session_start, csv::parse_double(t.heartrate, r, h_t));
    }
    if (!t.phases.is_array() || t.phases.size() != 4) {
        raise(ErrorCode::MalformedRow, "phases.json: expected an array of 4 phases");
    }
    for (const auto& p : t.phases) {
        if (!p.contains("start_s") || !p.contains("end_s") || !p.contains("phase")) {
            raise(ErrorCode::MalformedRow, "phases.json: phase needs {phase,start_s,end_s}");
        }
        session_start = std::min(session_start, p["start_s"].get<double>());
    }
    if (!std::isfinite(session_start)) session_start = 0.0;

    RawSession session;
    session.session_id = dir.filename().string();
    if (session.session_id.empty()) {
        session.session_id = dir.parent_path().filename().string();
    }

    for (std::size_t r = 0; r < t.positions.rows.size(); ++r) {
        PositionSample sample;
        sample.t = rebase(csv::parse_double(t.positions, r, p_t), session_start);
        sample.x = csv::parse_double(t.positions, r, p_x);
        sample.y = csv::parse_double(t.positions, r, p_y);
        session.positions[t.positions.rows[r][p_sid]].push_back(sample);
    }
    for (std::size_t r = 0; r < t.utterances.rows.size(); ++r) {
        Utterance u;
        u.t_start = rebase(csv::parse_double(t.utterances, r, u_t0), session_start);
        u.t_end = rebase(csv::parse_double(t.utterances, r, u_t1), session_start);
        u.code = t.utterances.rows[r][u_code];
        if (u.t_end < u.t_start) {
            raise(ErrorCode::MalformedRow, "utterances.csv row " + std::to_string(r + 1) +
                                               ": t_end precedes t_start");
        }
        auto idx = catalog.lookup(u.code);
        if (!idx || catalog.modality_at(*idx) != Modality::Verbal) {
            raise(ErrorCode::UnknownCode,
                  "utterances.csv row " + std::to_string(r + 1) + ": '" + u.code +
                      "' is not a verbal code in the catalog");
        }
        session.utterances[t.utterances.rows[r][u_sid]].push_back(u);
    }
    for (std::size_t r = 0; r < t.heartrate.rows.size(); ++r) {
        HeartRateSample sample;
        sample.t = rebase(csv::parse_double(t.heartrate, r, h_t), session_start);
        sample.bpm = csv::parse_double(t.heartrate, r, h_bpm);
        session.heart_rate[t.heartrate.rows[r][h_sid]].push_back(sample);
    }
    for (std::size_t r = 0; r < t.surveys.rows.size(); ++r) {
        csv::expect_width(t.surveys, r, t.surveys.header.size());
        SurveyResponse survey;
        survey.task_satisfaction = static_cast<int>(csv::parse_int(t.surveys, r, s_task));
        survey.collab_satisfaction = static_cast<int>(csv::parse_int(t.surveys, r, s_collab));
        session.surveys[t.surveys.rows[r][s_sid]] = survey;
    }

    if (!t.zones.is_array()) {
        raise(ErrorCode::MalformedRow, "zones.json: expected an array");
    }
    std::set<std::string> zone_names;
    for (const auto& z : t.zones) {
        ZoneSpec zone;
        zone.name = z.at("name").get<std::string>();
        zone.cx = z.at("cx").get<double>();
        zone.cy = z.at("cy").get<double>();
        zone.radius = z.value("radius", 1.5);
        zone.task_type = task_type_from_name(z.at("task_type").get<std::string>());
        if (zone.radius <= 0.0) {
            raise(ErrorCode::MalformedRow, "zones.json: zone '" + zone.name + "' radius must be > 0");
        }
        if (!zone_names.insert(zone.name).second) {
            raise(ErrorCode::MalformedRow, "zones.json: duplicate zone name '" + zone.name + "'");
        }
        session.zones.push_back(zone);
    }

    for (const auto& p : t.phases) {
        PhaseWindow w;
        w.phase = p["phase"].get<int>();
        w.start_s = rebase(p["start_s"].get<double>(), session_start);
        w.end_s = rebase(p["end_s"].get<double>(), session_start);
        session.phases.push_back(w);
    }
    std::sort(session.phases.begin(), session.phases.end(),
              [](const PhaseWindow& a, const PhaseWindow& b) { return a.phase < b.phase; });

    // Roster = union of ids across streams; the design has exactly 4 beds.
    std::set<std::string> roster;
    for (const auto& [sid, _] : session.positions) roster.insert(sid);
    for (const auto& [sid, _] : session.utterances) roster.insert(sid);
    for (const auto& [sid, _] : session.heart_rate) roster.insert(sid);
    for (const auto& [sid, _] : session.surveys) roster.insert(sid);
    if (roster.size() != 4) {
        raise(ErrorCode::WrongStudentCount,
              session.session_id + ": found " + std::to_string(roster.size()) +
                  " students, expected 4");
    }
    session.students.assign(roster.begin(), roster.end());

    // Timestamps must be strictly increasing per stream per student.
    for (const auto& [sid, samples] : session.positions) {
        for (std::size_t i = 1; i < samples.size(); ++i) {
            if (samples[i].t <= samples[i - 1].t) {
                raise(ErrorCode::NonMonotoneTimestamp,
                      "positions for " + sid + " at t=" + std::to_string(samples[i].t));
            }
        }
    }
    for (const auto& [sid, samples] : session.heart_rate) {
        for (std::size_t i = 1; i < samples.size(); ++i) {
            if (samples[i].t <= samples[i - 1].t) {
                raise(ErrorCode::NonMonotoneTimestamp,
                      "heartrate for " + sid + " at t=" + std::to_string(samples[i].t));
            }
        }
    }
    for (const auto& [sid, events] : session.utterances) {
        for (std::size_t i = 1; i < events.size(); ++i) {
            if (events[i].t_start <= events[i - 1].t_start) {
                raise(ErrorCode::NonMonotoneTimestamp,
                      "utterances for " + sid + " at t_start=" + std::to_string(events[i].t_start));
            }
        }
    }

    return session;
}

ValidationReport validate(const RawSession& raw) {
    ValidationReport report;
    auto error = [&](std::string file, long row, std::string msg) {
        report.errors.push_back({std::move(file), row, std::move(msg)});
    };
    auto warn = [&](std::string file, long row, std::string msg) {
        report.warnings.push_back({std::move(file), row, std::move(msg)});
    };

    if (raw.phases.size() != 4) {
        error("phases.json", 0, "expected 4 phases, got " + std::to_string(raw.phases.size()));
        return report;
    }
    for (std::size_t i = 0; i < raw.phases.size(); ++i) {
        const auto& p = raw.phases[i];
        if (p.end_s <= p.start_s) {
            error("phases.json", 0,
                  "phase " + std::to_string(p.phase) + " is empty or reversed");
        }
        if (i > 0 && p.start_s < raw.phases[i - 1].end_s) {
            error("phases.json", 0,
                  "phase " + std::to_string(p.phase) + " overlaps phase " +
                      std::to_string(raw.phases[i - 1].phase));
        }
    }
    if (raw.zones.empty()) {
        error("zones.json", 0, "no task zones defined");
    }
    if (!report.errors.empty()) return report;

    const Second window_start = raw.phases.front().start_s;
    const Second window_end = raw.phases.back().end_s;
    const double expected = static_cast<double>(window_end - window_start);

    for (const auto& sid : raw.students) {
        auto coverage = [&](const auto& stream_map) {
            auto it = stream_map.find(sid);
            if (it == stream_map.end()) return 0.0;
            std::size_t present = 0;
            for (const auto& s : it->second) {
                if (s.t >= window_start && s.t < window_end) ++present;
            }
            return expected > 0 ? static_cast<double>(present) / expected : 0.0;
        };
        const double pos_cov = coverage(raw.positions);
        const double hr_cov = coverage(raw.heart_rate);
        report.position_coverage[sid] = pos_cov;
        report.heart_rate_coverage[sid] = hr_cov;
        if (pos_cov < 1.0) {
            warn("positions.csv", 0,
                 sid + ": 1 Hz coverage " + csv::format_double(pos_cov) + " over session window");
        }
        if (hr_cov < 1.0) {
            warn("heartrate.csv", 0,
                 sid + ": 1 Hz coverage " + csv::format_double(hr_cov) + " over session window");
        }
    }

    for (const auto& [sid, events] : raw.utterances) {
        for (const auto& u : events) {
            bool inside = false;
            for (const auto& p : raw.phases) {
                if (u.t_start >= p.start_s && u.t_start < p.end_s) {
                    inside = true;
                    break;
                }
            }
            if (!inside) {
                warn("utterances.csv", 0,
                     sid + ": utterance '" + u.code + "' at t=" + std::to_string(u.t_start) +
                         " outside phase bounds");
            }
        }
    }

    for (const auto& [sid, samples] : raw.heart_rate) {
        for (const auto& s : samples) {
            if (s.bpm < kHeartRateMinBpm || s.bpm > kHeartRateMaxBpm) {
                warn("heartrate.csv", 0,
                     sid + ": OutOfPhysiologicalRange " + csv::format_double(s.bpm) +
                         " bpm at t=" + std::to_string(s.t));
            }
        }
    }

    for (const auto& [sid, survey] : raw.surveys) {
        auto check = [&](int v, const char* what) {
            if (v < 1 || v > 7) {
                error("surveys.csv", 0,
                      sid + ": " + what + " rating " + std::to_string(v) + " outside 1-7");
            }
        };
        check(survey.task_satisfaction, "task_satisfaction");
        check(survey.collab_satisfaction, "collab_satisfaction");
    }
    for (const auto& sid : raw.students) {
        if (raw.surveys.find(sid) == raw.surveys.end()) {
            warn("surveys.csv", 0, sid + ": no survey response; unit excluded from group tests");
        }
    }

    return report;
}

}  // namespace fuse
