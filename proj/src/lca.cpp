#include "fuse/lca.hpp"

#include "csv.hpp"
#include "fuse/errors.hpp"
#include "fuse/statkit.hpp"
#include "rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

namespace fuse {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

BinaryMatrix::BinaryMatrix(std::size_t n_items) : n_items_(n_items) {
    if (n_items == 0 || n_items > 64) {
        raise(ErrorCode::InvalidConfig, "BinaryMatrix supports 1..64 items");
    }
}

BinaryMatrix BinaryMatrix::from_records(const std::vector<IntervalRecord>& records) {
    if (records.empty()) raise(ErrorCode::InvalidConfig, "no records");
    BinaryMatrix m(records.front().values.size());
    for (const auto& rec : records) m.add_row(rec.values);
    return m;
}

void BinaryMatrix::add_row(const std::vector<std::uint8_t>& bits) {
    if (bits.size() != n_items_) {
        raise(ErrorCode::DimensionMismatch, "row width does not match matrix");
    }
    std::uint64_t p = 0;
    for (std::size_t j = 0; j < bits.size(); ++j) {
        if (bits[j] > 1) raise(ErrorCode::InvalidConfig, "values must be 0/1");
        if (bits[j]) p |= std::uint64_t{1} << j;
    }
    patterns_.push_back(p);
}

void BinaryMatrix::add_pattern(std::uint64_t pattern) {
    if (n_items_ < 64 && (pattern >> n_items_) != 0) {
        raise(ErrorCode::DimensionMismatch, "pattern has bits beyond item count");
    }
    patterns_.push_back(pattern);
}

double BinaryMatrix::column_mean(std::size_t item) const {
    std::size_t ones = 0;
    for (auto p : patterns_) ones += (p >> item) & 1u;
    return rows() ? static_cast<double>(ones) / static_cast<double>(rows()) : 0.0;
}

double bic_score(double log_likelihood, int n_classes, std::size_t n_items, std::size_t n_obs) {
    const double n_params = static_cast<double>(n_classes - 1) +
                            static_cast<double>(n_classes) * static_cast<double>(n_items);
    return -2.0 * log_likelihood + n_params * std::log(static_cast<double>(n_obs));
}

namespace {

// Observations collapsed to unique response patterns with frequencies.
// For binary items the E-step only depends on the pattern, so EM cost
// scales with distinct patterns rather than rows.
struct Aggregated {
    std::vector<std::uint64_t> patterns;
    std::vector<double> freq;
    double n = 0.0;
};

Aggregated aggregate(const BinaryMatrix& data) {
    std::vector<std::uint64_t> sorted(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) sorted[i] = data.pattern(i);
    std::sort(sorted.begin(), sorted.end());

    Aggregated agg;
    agg.n = static_cast<double>(data.rows());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        agg.patterns.push_back(sorted[i]);
        agg.freq.push_back(static_cast<double>(j - i + 1));
        i = j + 1;
    }
    return agg;
}

struct Params {
    std::vector<double> weights;     // K
    std::vector<double> item_probs;  // K*J, row-major by class
};

struct RestartOutcome {
    bool ok = false;
    Params params;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    std::vector<double> series;
    bool converged = false;
    int n_iter = 0;
};

Params random_init(int K, std::size_t J, SplitMix64& rng, double eps) {
    Params p;
    p.item_probs.resize(static_cast<std::size_t>(K) * J);
    for (auto& theta : p.item_probs) theta = 0.2 + 0.6 * rng.uniform();
    p.weights.resize(static_cast<std::size_t>(K));
    double sum = 0.0;
    for (auto& w : p.weights) {
        w = -std::log(1.0 - rng.uniform());  // Exp(1) => Dirichlet(1) after normalizing
        sum += w;
    }
    for (auto& w : p.weights) w /= sum;
    (void)eps;
    return p;
}

// One E-step: fills resp (patterns x K) and returns the log-likelihood of
// the supplied parameters. delta/base are scratch, sized K*J and K.
double e_step(const Aggregated& agg, const Params& p, int K, std::size_t J,
              std::vector<double>& resp, std::vector<double>& delta_t,
              std::vector<double>& base, std::vector<double>& acc) {
    const auto uK = static_cast<std::size_t>(K);
    for (std::size_t k = 0; k < uK; ++k) {
        double b = p.weights[k] > 0.0 ? std::log(p.weights[k])
                                      : -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < J; ++j) {
            const double theta = p.item_probs[k * J + j];
            b += std::log1p(-theta);
            delta_t[j * uK + k] = std::log(theta) - std::log1p(-theta);
        }
        base[k] = b;
    }

    double ll = 0.0;
    for (std::size_t i = 0; i < agg.patterns.size(); ++i) {
        for (std::size_t k = 0; k < uK; ++k) acc[k] = base[k];
        std::uint64_t mask = agg.patterns[i];
        while (mask) {
            const auto j = static_cast<std::size_t>(std::countr_zero(mask));
            mask &= mask - 1;
            const double* dj = &delta_t[j * uK];
            for (std::size_t k = 0; k < uK; ++k) acc[k] += dj[k];
        }
        double m = acc[0];
        for (std::size_t k = 1; k < uK; ++k) m = std::max(m, acc[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < uK; ++k) {
            const double e = std::isfinite(acc[k]) ? std::exp(acc[k] - m) : 0.0;
            resp[i * uK + k] = e;
            sum += e;
        }
        for (std::size_t k = 0; k < uK; ++k) resp[i * uK + k] /= sum;
        ll += agg.freq[i] * (m + std::log(sum));
    }
    return ll;
}

void m_step(const Aggregated& agg, const std::vector<double>& resp, int K, std::size_t J,
            double eps, Params& p) {
    const auto uK = static_cast<std::size_t>(K);
    std::vector<double> nk(uK, 0.0);
    std::vector<double> item(J * uK, 0.0);  // [j][k]
    std::vector<double> w(uK);

    for (std::size_t i = 0; i < agg.patterns.size(); ++i) {
        for (std::size_t k = 0; k < uK; ++k) {
            w[k] = agg.freq[i] * resp[i * uK + k];
            nk[k] += w[k];
        }
        std::uint64_t mask = agg.patterns[i];
        while (mask) {
            const auto j = static_cast<std::size_t>(std::countr_zero(mask));
            mask &= mask - 1;
            double* ij = &item[j * uK];
            for (std::size_t k = 0; k < uK; ++k) ij[k] += w[k];
        }
    }

    double weight_sum = 0.0;
    for (std::size_t k = 0; k < uK; ++k) {
        p.weights[k] = nk[k] / agg.n;
        weight_sum += p.weights[k];
    }
    for (auto& wk : p.weights) wk /= weight_sum;

    for (std::size_t k = 0; k < uK; ++k) {
        if (nk[k] <= 0.0) continue;  // dead class: keep previous item profile
        for (std::size_t j = 0; j < J; ++j) {
            p.item_probs[k * J + j] = std::clamp(item[j * uK + k] / nk[k], eps, 1.0 - eps);
        }
    }
}

RestartOutcome run_restart(const Aggregated& agg, int K, std::size_t J, const LcaConfig& cfg,
                           std::uint64_t restart_seed) {
    const auto uK = static_cast<std::size_t>(K);
    SplitMix64 rng{restart_seed};
    RestartOutcome out;
    Params p = random_init(K, J, rng, cfg.eps);

    std::vector<double> resp(agg.patterns.size() * uK);
    std::vector<double> delta_t(J * uK);
    std::vector<double> base(uK);
    std::vector<double> acc(uK);

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter <= cfg.max_iter; ++iter) {
        const double ll = e_step(agg, p, K, J, resp, delta_t, base, acc);
        if (!std::isfinite(ll)) return out;  // NonFiniteLikelihood: drop this restart
        out.series.push_back(ll);
        assert(iter == 0 || ll >= prev_ll - 1e-9);  // EM monotonicity
        if (iter > 0) {
            const double rel = std::abs(ll - prev_ll) / std::max(std::abs(prev_ll), 1e-10);
            if (rel < cfg.tol) {
                out.converged = true;
                break;
            }
        }
        prev_ll = ll;
        if (iter == cfg.max_iter) break;
        m_step(agg, resp, K, J, cfg.eps, p);
    }

    out.ok = true;
    out.params = std::move(p);
    out.log_likelihood = out.series.back();
    out.n_iter = static_cast<int>(out.series.size());
    return out;
}

// Canonical class order: descending weight, theta rows break exact ties.
void canonicalize(Params& p, int K, std::size_t J) {
    std::vector<std::size_t> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (p.weights[a] != p.weights[b]) return p.weights[a] > p.weights[b];
        for (std::size_t j = 0; j < J; ++j) {
            const double ta = p.item_probs[a * J + j];
            const double tb = p.item_probs[b * J + j];
            if (ta != tb) return ta > tb;
        }
        return a < b;
    });
    Params sorted;
    sorted.weights.resize(p.weights.size());
    sorted.item_probs.resize(p.item_probs.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        sorted.weights[k] = p.weights[order[k]];
        for (std::size_t j = 0; j < J; ++j) {
            sorted.item_probs[k * J + j] = p.item_probs[order[k] * J + j];
        }
    }
    p = std::move(sorted);
}

std::vector<std::string> default_code_names(std::size_t J) {
    std::vector<std::string> names;
    names.reserve(J);
    for (std::size_t j = 0; j < J; ++j) names.push_back("item_" + std::to_string(j));
    return names;
}

}  // namespace

FitResult fit_em(const BinaryMatrix& data, int n_classes, const LcaConfig& cfg,
                 const std::vector<std::string>& code_names) {
    if (n_classes < 1) raise(ErrorCode::InvalidConfig, "need at least one class");
    if (data.rows() < static_cast<std::size_t>(n_classes)) {
        raise(ErrorCode::InvalidConfig, "need n_obs >= n_classes");
    }
    if (!code_names.empty() && code_names.size() != data.items()) {
        raise(ErrorCode::DimensionMismatch, "code_names size does not match items");
    }

    const std::size_t J = data.items();
    const Aggregated agg = aggregate(data);

    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(cfg.restarts));
    const int n_threads = std::max(1, std::min(cfg.threads, cfg.restarts));
    std::atomic<int> next_restart{0};
    auto worker = [&]() {
        for (;;) {
            const int r = next_restart.fetch_add(1);
            if (r >= cfg.restarts) return;
            const auto seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(n_classes),
                                       static_cast<std::uint64_t>(r));
            outcomes[static_cast<std::size_t>(r)] = run_restart(agg, n_classes, J, cfg, seed);
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Deterministic winner: best final logL, lowest restart index on ties.
    int best = -1;
    int ok_count = 0;
    for (int r = 0; r < cfg.restarts; ++r) {
        const auto& o = outcomes[static_cast<std::size_t>(r)];
        if (!o.ok) continue;
        ++ok_count;
        if (best < 0 || o.log_likelihood > outcomes[static_cast<std::size_t>(best)].log_likelihood) {
            best = r;
        }
    }
    if (best < 0) {
        raise(ErrorCode::AllRestartsFailed,
              "all " + std::to_string(cfg.restarts) + " restarts hit non-finite likelihoods");
    }

    auto& winner = outcomes[static_cast<std::size_t>(best)];
    canonicalize(winner.params, n_classes, J);

    FitResult fit;
    fit.model.n_classes = n_classes;
    fit.model.weights = std::move(winner.params.weights);
    fit.model.item_probs.resize(static_cast<std::size_t>(n_classes));
    for (int k = 0; k < n_classes; ++k) {
        auto first = winner.params.item_probs.begin() + k * static_cast<long>(J);
        fit.model.item_probs[static_cast<std::size_t>(k)].assign(first, first + static_cast<long>(J));
    }
    fit.model.code_names = code_names.empty() ? default_code_names(J) : code_names;
    fit.log_likelihood = winner.log_likelihood;
    fit.n_obs = data.rows();
    fit.bic = bic_score(fit.log_likelihood, n_classes, J, fit.n_obs);
    fit.n_iter = winner.n_iter;
    fit.converged = winner.converged;
    fit.seed = cfg.seed;
    fit.restarts_used = ok_count;
    fit.loglik_series = std::move(winner.series);
    return fit;
}

std::pair<FitResult, KSweep> select_k(const BinaryMatrix& data, int k_min, int k_max,
                                      const LcaConfig& cfg,
                                      const std::vector<std::string>& code_names) {
    if (k_min < 1 || k_max < k_min) raise(ErrorCode::InvalidConfig, "bad class range");

    KSweep sweep;
    std::optional<FitResult> chosen;
    std::optional<double> prev_ll;

    for (int k = k_min; k <= k_max; ++k) {
        SweepRow row;
        row.n_classes = k;
        try {
            FitResult fit = fit_em(data, k, cfg, code_names);
            row.log_likelihood = fit.log_likelihood;
            row.bic = fit.bic;
            row.converged = fit.converged;
            row.n_iter = fit.n_iter;
            // Nesting: the K+1 optimum can never be worse than the K one;
            // a drop means the restarts missed the basin.
            if (prev_ll && fit.log_likelihood < *prev_ll - 1e-6) {
                row.warning = "log-likelihood below the previous K (convergence warning)";
            }
            prev_ll = fit.log_likelihood;
            if (!chosen || fit.bic < chosen->bic) chosen = std::move(fit);
        } catch (const Error& e) {
            row.error = e.what();
            row.log_likelihood = kNaN;
            row.bic = kNaN;
        }
        sweep.rows.push_back(std::move(row));
    }
    if (!chosen) {
        raise(ErrorCode::AllRestartsFailed, "no class count produced a usable fit");
    }
    sweep.chosen_k = chosen->model.n_classes;
    for (auto& row : sweep.rows) row.selected = row.n_classes == sweep.chosen_k;
    return {std::move(*chosen), std::move(sweep)};
}

std::vector<ClassAssignment> posterior_assign(const LcaModel& model, const BinaryMatrix& data) {
    const std::size_t J = model.n_items();
    const auto K = static_cast<std::size_t>(model.n_classes);
    if (data.items() != J) {
        raise(ErrorCode::DimensionMismatch, "model items do not match data items");
    }
    if (model.weights.size() != K || model.item_probs.size() != K) {
        raise(ErrorCode::DimensionMismatch, "model weights/probs do not match n_classes");
    }

    std::vector<double> base(K), delta_t(J * K), acc(K);
    for (std::size_t k = 0; k < K; ++k) {
        double b = model.weights[k] > 0.0 ? std::log(model.weights[k])
                                          : -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < J; ++j) {
            const double theta = model.item_probs[k][j];
            b += std::log1p(-theta);
            delta_t[j * K + k] = std::log(theta) - std::log1p(-theta);
        }
        base[k] = b;
    }

    std::vector<ClassAssignment> out(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t k = 0; k < K; ++k) acc[k] = base[k];
        std::uint64_t mask = data.pattern(i);
        while (mask) {
            const auto j = static_cast<std::size_t>(std::countr_zero(mask));
            mask &= mask - 1;
            for (std::size_t k = 0; k < K; ++k) acc[k] += delta_t[j * K + k];
        }
        double m = acc[0];
        for (std::size_t k = 1; k < K; ++k) m = std::max(m, acc[k]);
        double sum = 0.0;
        auto& a = out[i];
        a.posterior.resize(K);
        for (std::size_t k = 0; k < K; ++k) {
            a.posterior[k] = std::isfinite(acc[k]) ? std::exp(acc[k] - m) : 0.0;
            sum += a.posterior[k];
        }
        a.map_class = 0;
        for (std::size_t k = 0; k < K; ++k) {
            a.posterior[k] /= sum;
            if (a.posterior[k] > a.posterior[static_cast<std::size_t>(a.map_class)]) {
                a.map_class = static_cast<int>(k);
            }
        }
    }
    return out;
}

std::vector<std::vector<std::uint8_t>> binary_profiles(const LcaModel& model, double threshold) {
    std::vector<std::vector<std::uint8_t>> profiles;
    profiles.reserve(model.item_probs.size());
    for (const auto& row : model.item_probs) {
        std::vector<std::uint8_t> bits;
        bits.reserve(row.size());
        for (double theta : row) bits.push_back(theta >= threshold ? 1 : 0);
        profiles.push_back(std::move(bits));
    }
    return profiles;
}

PrescreenResult spearman_prescreen(const BinaryMatrix& data,
                                   const std::vector<std::string>& code_names, double rho_max) {
    if (data.rows() < 2) raise(ErrorCode::InvalidConfig, "prescreen needs >= 2 records");
    const std::size_t J = data.items();

    PrescreenResult result;
    result.rho_max = rho_max;
    result.codes = code_names.empty() ? default_code_names(J) : code_names;
    result.rho.assign(J, std::vector<double>(J, kNaN));

    std::vector<std::vector<double>> cols(J, std::vector<double>(data.rows()));
    std::vector<bool> degenerate(J, false);
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t i = 0; i < data.rows(); ++i) {
            cols[j][i] = data.bit(i, j) ? 1.0 : 0.0;
        }
        const double mean = data.column_mean(j);
        if (mean == 0.0 || mean == 1.0) {
            degenerate[j] = true;
            result.degenerate_columns.push_back(j);
        }
    }

    for (std::size_t a = 0; a < J; ++a) {
        if (!degenerate[a]) result.rho[a][a] = 1.0;
        for (std::size_t b = a + 1; b < J; ++b) {
            if (degenerate[a] || degenerate[b]) continue;
            const double rho = stats::spearman(cols[a], cols[b]);
            result.rho[a][b] = rho;
            result.rho[b][a] = rho;
            if (std::abs(rho) > rho_max) result.flagged.emplace_back(a, b);
        }
    }
    return result;
}

// --- persistence -------------------------------------------------------------

namespace {
using ordered_json = nlohmann::ordered_json;
}

void write_model_json(const std::filesystem::path& path, const FitResult& fit,
                      const LcaConfig& cfg) {
    ordered_json j;
    j["n_classes"] = fit.model.n_classes;
    j["weights"] = fit.model.weights;
    j["item_probs"] = fit.model.item_probs;
    j["code_names"] = fit.model.code_names;
    j["log_likelihood"] = fit.log_likelihood;
    j["bic"] = fit.bic;
    j["n_obs"] = fit.n_obs;
    j["n_iter"] = fit.n_iter;
    j["converged"] = fit.converged;
    j["restarts_used"] = fit.restarts_used;
    j["config"] = {{"tol", cfg.tol},       {"max_iter", cfg.max_iter},
                   {"restarts", cfg.restarts}, {"eps", cfg.eps},
                   {"seed", cfg.seed},     {"threads", cfg.threads}};
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoFailure, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

FitResult read_model_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::MissingFile, "cannot open " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        raise(ErrorCode::MalformedRow, path.string() + ": " + e.what());
    }
    FitResult fit;
    fit.model.n_classes = j.at("n_classes").get<int>();
    fit.model.weights = j.at("weights").get<std::vector<double>>();
    fit.model.item_probs = j.at("item_probs").get<std::vector<std::vector<double>>>();
    fit.model.code_names = j.at("code_names").get<std::vector<std::string>>();
    fit.log_likelihood = j.at("log_likelihood").get<double>();
    fit.bic = j.at("bic").get<double>();
    fit.n_obs = j.at("n_obs").get<std::size_t>();
    fit.n_iter = j.at("n_iter").get<int>();
    fit.converged = j.at("converged").get<bool>();
    fit.restarts_used = j.at("restarts_used").get<int>();
    if (j.contains("config") && j["config"].contains("seed")) {
        fit.seed = j["config"]["seed"].get<std::uint64_t>();
    }
    return fit;
}

void write_sweep_csv(const std::filesystem::path& path, const KSweep& sweep) {
    csv::Writer out(path);
    out.row({"n_classes", "log_likelihood", "bic", "converged", "n_iter", "selected", "warning",
             "error"});
    for (const auto& r : sweep.rows) {
        out.row({std::to_string(r.n_classes), csv::format_double(r.log_likelihood),
                 csv::format_double(r.bic), r.converged ? "1" : "0", std::to_string(r.n_iter),
                 r.selected ? "1" : "0", r.warning, r.error});
    }
}

void write_assignments_csv(const std::filesystem::path& path,
                           const std::vector<IntervalRecord>& records,
                           const std::vector<ClassAssignment>& assignments) {
    if (records.size() != assignments.size()) {
        raise(ErrorCode::DimensionMismatch, "records/assignments size mismatch");
    }
    const std::size_t K = assignments.empty() ? 0 : assignments.front().posterior.size();
    csv::Writer out(path);
    std::vector<std::string> header{"session_id", "student_id", "interval_index", "map_class"};
    for (std::size_t k = 1; k <= K; ++k) header.push_back("p_" + std::to_string(k));
    out.row(header);
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::vector<std::string> row{records[i].session_id, records[i].student_id,
                                     std::to_string(records[i].interval_index),
                                     std::to_string(assignments[i].map_class + 1)};
        for (double p : assignments[i].posterior) row.push_back(csv::format_double(p));
        out.row(row);
    }
}

std::vector<AssignedRecord> read_assignments_csv(const std::filesystem::path& path) {
    const auto table = csv::read_file(path);
    const auto sid = table.column("session_id");
    const auto stu = table.column("student_id");
    const auto idx = table.column("interval_index");
    const auto cls = table.column("map_class");
    std::vector<AssignedRecord> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        csv::expect_width(table, r, table.header.size());
        AssignedRecord rec;
        rec.session_id = table.rows[r][sid];
        rec.student_id = table.rows[r][stu];
        rec.interval_index = static_cast<std::size_t>(csv::parse_int(table, r, idx));
        rec.map_class = static_cast<int>(csv::parse_int(table, r, cls)) - 1;
        if (rec.map_class < 0) {
            raise(ErrorCode::MalformedRow,
                  table.file + " row " + std::to_string(r + 1) + ": map_class must be >= 1");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace fuse
