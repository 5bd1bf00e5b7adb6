#pragma once

// Hand-rolled session fixtures for ingest/pipeline tests. Files are written
// with plain ofstream so the tests do not depend on the library's writers.

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace fixtures {

inline void write_file(const std::filesystem::path& dir, const std::string& name,
                       const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    out << content;
}

inline std::filesystem::path fresh_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    const auto dir = std::filesystem::temp_directory_path() /
                     ("fuse_test_" + tag + "_" + std::to_string(rng()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Standard session: phases [0,120) [120,240) [240,360) [360,480), so the
// analysis span is [240,480) = 4 intervals of 60 s. Students sit far apart
// and outside every zone; heart rate is a flat 80 bpm.
struct SessionBuilder {
    std::string session_id = "S1";
    std::ostringstream positions;
    std::ostringstream utterances;
    std::ostringstream heartrate;
    std::ostringstream surveys;
    std::string zones_json;
    std::string phases_json;

    SessionBuilder() {
        positions << "student_id,t,x,y\n";
        utterances << "student_id,t_start,t_end,code\n";
        heartrate << "student_id,t,bpm\n";
        surveys << "student_id,task_satisfaction,collab_satisfaction\n";
        zones_json =
            R"([{"name":"Bed4","cx":0.0,"cy":0.0,"radius":1.5,"task_type":"primary"},
                {"name":"Bed1","cx":10.0,"cy":0.0,"radius":1.5,"task_type":"secondary"},
                {"name":"Bed3","cx":20.0,"cy":0.0,"radius":1.5,"task_type":"distraction"}])";
        phases_json =
            R"([{"phase":1,"start_s":0,"end_s":120},
                {"phase":2,"start_s":120,"end_s":240},
                {"phase":3,"start_s":240,"end_s":360},
                {"phase":4,"start_s":360,"end_s":480}])";
    }

    void default_positions(long t_begin = 0, long t_end = 480) {
        const double xs[4] = {5.0, 5.0, 30.0, 30.0};
        const double ys[4] = {5.0, 8.0, 5.0, 8.0};
        for (int s = 0; s < 4; ++s) {
            for (long t = t_begin; t < t_end; ++t) {
                positions << 's' << (s + 1) << ',' << t << ',' << xs[s] << ',' << ys[s] << '\n';
            }
        }
    }

    void default_heartrate(long t_begin = 0, long t_end = 480, double bpm = 80.0) {
        for (int s = 0; s < 4; ++s) {
            for (long t = t_begin; t < t_end; ++t) {
                heartrate << 's' << (s + 1) << ',' << t << ',' << bpm << '\n';
            }
        }
    }

    void default_surveys() {
        surveys << "s1,5,6\n" << "s2,4,4\n" << "s3,3,5\n" << "s4,6,2\n";
    }

    std::filesystem::path write(const std::filesystem::path& parent) const {
        const auto dir = parent / session_id;
        write_file(dir, "positions.csv", positions.str());
        write_file(dir, "utterances.csv", utterances.str());
        write_file(dir, "heartrate.csv", heartrate.str());
        write_file(dir, "surveys.csv", surveys.str());
        write_file(dir, "zones.json", zones_json);
        write_file(dir, "phases.json", phases_json);
        return dir;
    }
};

}  // namespace fixtures
