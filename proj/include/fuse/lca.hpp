#pragma once

#include "fuse/catalog.hpp"
#include "fuse/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fuse {

/// Row-major binary observation matrix with at most 64 items. Rows are
/// stored as bitmasks so EM and likelihood evaluation can walk set bits.
class BinaryMatrix {
public:
    explicit BinaryMatrix(std::size_t n_items);

    static BinaryMatrix from_records(const std::vector<IntervalRecord>& records);

    void add_row(const std::vector<std::uint8_t>& bits);
    void add_pattern(std::uint64_t pattern);

    std::size_t rows() const noexcept { return patterns_.size(); }
    std::size_t items() const noexcept { return n_items_; }
    std::uint64_t pattern(std::size_t row) const { return patterns_[row]; }
    bool bit(std::size_t row, std::size_t item) const {
        return (patterns_[row] >> item) & 1u;
    }
    double column_mean(std::size_t item) const;

private:
    std::size_t n_items_;
    std::vector<std::uint64_t> patterns_;
};

struct LcaConfig {
    double tol = 1e-6;     // relative log-likelihood change at convergence
    int max_iter = 500;
    int restarts = 20;
    double eps = 1e-4;     // item-probability clamp: theta in [eps, 1-eps]
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Binary latent class model. Classes are canonically ordered by
/// descending weight so labels are stable across runs and restarts.
struct LcaModel {
    int n_classes = 0;
    std::vector<double> weights;                  // size K, sums to 1
    std::vector<std::vector<double>> item_probs;  // K x J, clamped
    std::vector<std::string> code_names;          // size J

    std::size_t n_items() const { return item_probs.empty() ? 0 : item_probs[0].size(); }
};

struct FitResult {
    LcaModel model;
    double log_likelihood = 0.0;
    double bic = 0.0;
    std::size_t n_obs = 0;
    int n_iter = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    int restarts_used = 0;
    std::vector<double> loglik_series;  // winning restart, one entry per E-step
};

struct ClassAssignment {
    std::vector<double> posterior;  // responsibilities, sums to 1
    int map_class = 0;              // argmax, ties toward the lower index
};

struct PrescreenResult {
    std::vector<std::string> codes;
    std::vector<std::vector<double>> rho;  // J x J; NaN where undefined
    std::vector<std::pair<std::size_t, std::size_t>> flagged;  // |rho| > rho_max
    std::vector<std::size_t> degenerate_columns;               // all-0 or all-1
    double rho_max = 0.8;
};

struct SweepRow {
    int n_classes = 0;
    double log_likelihood = 0.0;
    double bic = 0.0;
    bool converged = false;
    int n_iter = 0;
    bool selected = false;
    std::string warning;  // e.g. nesting violation
    std::string error;    // set when this K failed entirely
};

struct KSweep {
    std::vector<SweepRow> rows;
    int chosen_k = 0;
};

/// Spearman correlations over all code pairs, with |rho| > rho_max flagged
/// for analyst review (pairs are reported, never auto-removed). Degenerate
/// columns make their pairs undefined (NaN) and are listed separately.
PrescreenResult spearman_prescreen(const BinaryMatrix& data,
                                   const std::vector<std::string>& code_names,
                                   double rho_max = 0.8);

/// Maximum-likelihood EM fit, best of cfg.restarts seeded restarts.
/// E-step runs in log space with log-sum-exp; the returned log-likelihood
/// is evaluated on the final parameters. Restarts that hit a non-finite
/// likelihood are dropped; AllRestartsFailed if none survive.
FitResult fit_em(const BinaryMatrix& data, int n_classes, const LcaConfig& cfg,
                 const std::vector<std::string>& code_names = {});

/// Fit every K in [k_min, k_max] and choose the minimum-BIC fit. Per-K
/// failures are recorded in the sweep and skipped.
std::pair<FitResult, KSweep> select_k(const BinaryMatrix& data, int k_min, int k_max,
                                      const LcaConfig& cfg,
                                      const std::vector<std::string>& code_names = {});

/// Bayes-rule responsibilities of each row under a fitted model.
std::vector<ClassAssignment> posterior_assign(const LcaModel& model, const BinaryMatrix& data);

/// Per-class presence profile: 1 iff item probability >= threshold.
std::vector<std::vector<std::uint8_t>> binary_profiles(const LcaModel& model,
                                                       double threshold = 0.5);

/// BIC = -2 logL + [(K-1) + K*J] ln(n).
double bic_score(double log_likelihood, int n_classes, std::size_t n_items, std::size_t n_obs);

// --- persistence -----------------------------------------------------------

void write_model_json(const std::filesystem::path& path, const FitResult& fit,
                      const LcaConfig& cfg);
FitResult read_model_json(const std::filesystem::path& path);

void write_sweep_csv(const std::filesystem::path& path, const KSweep& sweep);

void write_assignments_csv(const std::filesystem::path& path,
                           const std::vector<IntervalRecord>& records,
                           const std::vector<ClassAssignment>& assignments);

struct AssignedRecord {
    std::string session_id;
    std::string student_id;
    std::size_t interval_index = 0;
    int map_class = 0;  // 0-based canonical class index
};

std::vector<AssignedRecord> read_assignments_csv(const std::filesystem::path& path);

}  // namespace fuse
