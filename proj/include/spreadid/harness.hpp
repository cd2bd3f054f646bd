// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spreadid/probing.hpp"
#include "spreadid/solvers.hpp"

namespace spreadid {

/// How the solvers learn the sparsity level.
enum class SparsityProtocol {
    known,  // MUSIC top_k = |Gamma|, OMP max_support = |Gamma|
    blind,  // MUSIC threshold, OMP residual stopping
};

struct CompressiveConfig {
    int P = 0;
    /// Explicit row list; empty means the prefix {0, ..., P-1}.
    std::vector<int> omega;
};

struct ExperimentConfig {
    int L = 19;
    double T = 1.0;
    std::vector<std::pair<int, int>> ed_pairs{{1, 1}};
    ProbingKind probing = ProbingKind::random_disc;
    SolverKind solver = SolverKind::music;
    std::vector<double> delta_grid;
    double snr_db = std::numeric_limits<double>::infinity();
    int trials = 1000;
    std::uint64_t seed = 0;
    double success_threshold = 1e-5;
    std::optional<CompressiveConfig> compressive;
    bool fix_probing = false;
    SparsityProtocol protocol = SparsityProtocol::known;
    double music_threshold = 1e-6;
    double omp_residual_tol = 1e-10;
    bool require_prime_L = true;

    bool noiseless() const { return std::isinf(snr_db) && snr_db > 0; }
    /// round(delta * L), the authoritative support size for a sweep cell.
    int gamma_card(double delta) const;
    /// Throws ValidationError describing the first offending field.
    void validate() const;
};

/// Parses the JSON config (field names as in ExperimentConfig). Errors carry
/// the offending line number.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct TrialRecord {
    int trial_index = 0;
    std::uint64_t trial_id = 0;
    double delta = 0.0;
    int gamma_card = 0;
    int E = 1;
    int D = 1;
    SolverKind solver = SolverKind::music;
    ProbingKind probing = ProbingKind::random_disc;
    double snr_db = 0.0;
    double rel_sq_error = std::numeric_limits<double>::quiet_NaN();
    bool success = false;
    bool support_exact = false;
    /// Noiseless success with a wrong support.
    bool anomaly = false;
    double runtime_ms = 0.0;
    /// Empty unless the trial failed validation or a solver threw.
    std::string error;

    int ed() const { return E * D; }
};

/// One Monte Carlo trial through the full pipeline (simulate, noise, Zak,
/// assemble, solve, score). Deterministic in (cfg.seed, delta, E, D, trial_index).
TrialRecord run_trial(const ExperimentConfig& cfg, double delta, int E, int D, int trial_index);
/// Uses the first (E, D) pair of the config.
TrialRecord run_trial(const ExperimentConfig& cfg, double delta, int trial_index);

struct SweepRow {
    double delta = 0.0;
    int gamma_card = 0;
    int E = 1;
    int D = 1;
    double snr_db = 0.0;
    SolverKind solver = SolverKind::music;
    ProbingKind probing = ProbingKind::random_disc;
    SparsityProtocol protocol = SparsityProtocol::known;
    int trials = 0;
    /// mean(success) over all trials; errored trials count as failures.
    double recovery_prob = 0.0;
    /// mean(rel_sq_error) over trials without an error.
    double ere = 0.0;
    int anomalies = 0;
    int errors = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    /// Ordered by (delta, (E, D), trial_index) as listed in the config.
    std::vector<TrialRecord> trials;
};

/// SPREADID_THREADS if set and positive, else the hardware concurrency.
int default_thread_count();

/// Runs every (delta, (E, D)) cell; `threads` <= 0 selects default_thread_count().
/// Output is independent of the thread count.
SweepResult run_sweep(const ExperimentConfig& cfg, int threads = 0);

/// Aggregates trial records (in the sweep's order) into rows.
std::vector<SweepRow> aggregate(const ExperimentConfig& cfg, const std::vector<TrialRecord>& trials);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
/// runtime_ms is only written when `include_timing` is set, since it is the
/// one non-reproducible field.
void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials,
                      bool include_timing = false);

const char* to_string(SparsityProtocol p);

}  // namespace spreadid
