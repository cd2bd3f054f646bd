// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Criteria that need Monte Carlo sweeps go through the
// full harness pipeline (simulate, Zak, assemble, solve).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "spreadid/analysis.hpp"
#include "spreadid/errors.hpp"
#include "spreadid/harness.hpp"
#include "spreadid/linalg.hpp"
#include "spreadid/pipeline.hpp"
#include "spreadid/solvers.hpp"

using namespace spreadid;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Stats {
    double mean = 0.0;
    double se = 0.0;
};

Stats ere_stats(const std::vector<TrialRecord>& trials, double delta, SolverKind solver, double snr) {
    std::vector<double> v;
    for (const TrialRecord& t : trials) {
        if (t.delta == delta && t.solver == solver && t.snr_db == snr && t.error.empty()) v.push_back(t.rel_sq_error);
    }
    Stats s;
    if (v.empty()) return s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    const double n = static_cast<double>(v.size());
    s.se = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    return s;
}

std::string csv_of(const SweepResult& r) {
    std::ostringstream os;
    write_sweep_csv(os, r.rows);
    write_trials_csv(os, r.trials);
    return os.str();
}

ExperimentConfig phase_transition_config() {
    ExperimentConfig cfg;
    cfg.L = 19;
    cfg.ed_pairs = {{19, 19}};
    cfg.probing = ProbingKind::random_disc;
    cfg.solver = SolverKind::music;
    for (int k = 1; k <= 18; ++k) cfg.delta_grid.push_back(k / 19.0);
    cfg.trials = 200;
    cfg.seed = 20240501;
    return cfg;
}

// ---- criteria ----------------------------------------------------------------

Outcome factorization_and_isometry(double& worst_iso) {
    double worst = 0.0;
    worst_iso = 0.0;
    int instances = 0;
    Rng rng(101);
    for (int L : {3, 5, 19}) {
        for (int E : {1, 2, 4}) {
            for (int D : {1, 2, 4}) {
                const GridParams g = GridParams::make(L, E, D);
                for (ProbingKind kind : {ProbingKind::random_disc, ProbingKind::alltop}) {
                    for (int t = 0; t < 20; ++t) {
                        const ProbingSequence c = kind == ProbingKind::alltop ? alltop(L) : random_disc(L, rng);
                        const int card = std::uniform_int_distribution<int>(1, std::min(L * L, 3 * L))(rng);
                        const SupportSet s = random_support(g, card, rng);
                        const DiscreteSpreadingFunction sf = random_spreading(g, s, rng);
                        const ReceivedSignal y = simulate(sf, c);
                        const CMatrix zak = discrete_zak(y);
                        const MeasurementEnsemble Z = assemble_Z(zak, g);
                        const CMatrix AS = build_matrix(c).matrix() * pack_unknowns(sf);
                        worst = std::max(worst, (Z.Z - AS).norm() / AS.norm());
                        const double lhs = D * zak.squaredNorm();
                        const double rhs = y.samples().squaredNorm();
                        worst_iso = std::max(worst_iso, std::abs(lhs - rhs) / rhs);
                        ++instances;
                    }
                }
            }
        }
    }
    return {worst <= 1e-9, fmt("%d instances, max ||Z - A_c S||_F / ||A_c S||_F = %.3e (limit 1e-9)", instances, worst)};
}

Outcome spark_small() {
    std::string spark_list;
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        const MeasurementMatrix A = build_matrix(random_disc(5, rng));
        const std::optional<int> s = spark_exhaustive(A.matrix(), 6);
        const int v = s.value_or(-1);
        ok = ok && v == 6;
        spark_list += (spark_list.empty() ? "" : ",") + std::to_string(v);
    }
    return {ok, "L=5, 5 random-disc seeds, every subset up to 6 columns checked; spark = {" + spark_list + "}"};
}

Outcome uniqueness_threshold() {
    constexpr int L = 5;
    int agree = 0;
    int total = 0;
    int generic_unique_beyond = 0;
    int generic_beyond = 0;
    std::string mismatches;
    for (int ed = 1; ed <= L; ++ed) {
        const GridParams g = GridParams::make(L, ed, 1);
        for (int card = 1; card <= L; ++card) {
            const int K = std::min(card, ed);
            // Each (|Gamma|, K) pair is visited once, from the smallest ED reaching it.
            if (K < ed) continue;
            const bool predicted = uniqueness_guaranteed(card, L, K);
            for (int t = 0; t < 20; ++t) {
                Rng rng(static_cast<std::uint64_t>(1000 * ed + 100 * card + t));
                const MeasurementMatrix A = build_matrix(random_disc(L, rng));
                bool identified = false;
                if (predicted) {
                    const SupportSet s = random_support(g, card, rng);
                    const DiscreteSpreadingFunction sf = random_spreading(g, s, rng);
                    const MeasurementEnsemble Z = measure(simulate(sf, A.source()));
                    const RecoveryResult r = p0_oracle(Z, A, L, 1e-9);
                    identified = r.diagnostics.unique.value_or(false) && r.support_hat == s;
                } else {
                    // Beyond the threshold the "only if" direction is a statement
                    // about worst-case instances: build one whose truth has |Gamma|
                    // cells and rank K but shares Z with a disjoint support.
                    const AmbiguityWitness w = ambiguous_instance(A, K, rng, card);
                    const CMatrix Z = column_submatrix(A, w.gamma_prime) * w.B_gamma_prime;
                    const RecoveryResult r = p0_oracle(MeasurementEnsemble{g, Z}, A, L, 1e-9);
                    identified = r.diagnostics.unique.value_or(false) && r.support_hat == w.gamma_prime;

                    // Informational: a generic instance at the same (|Gamma|, K).
                    const SupportSet s = random_support(g, card, rng);
                    const DiscreteSpreadingFunction sf = random_spreading(g, s, rng);
                    const RecoveryResult rg = p0_oracle(MeasurementEnsemble{g, A.matrix() * pack_unknowns(sf)}, A, L, 1e-9);
                    generic_unique_beyond += rg.diagnostics.unique.value_or(false) && rg.support_hat == s;
                    ++generic_beyond;
                }
                ++total;
                if (identified == predicted) ++agree;
                else mismatches += fmt(" (|G|=%d,K=%d,t=%d)", card, K, t);
            }
        }
    }

    // Boundary witnesses.
    bool witnesses_ok = true;
    for (int K : {1, 3, 5}) {
        Rng rng(static_cast<std::uint64_t>(77 + K));
        const MeasurementMatrix A = build_matrix(random_disc(L, rng));
        const AmbiguityWitness w = ambiguous_instance(A, K, rng);
        const CMatrix Z1 = column_submatrix(A, w.gamma) * w.B_gamma;
        const CMatrix Z2 = column_submatrix(A, w.gamma_prime) * w.B_gamma_prime;
        const bool same = (Z1 - Z2).norm() <= 1e-9 * Z2.norm();
        const bool rank_ok = linalg::numerical_rank(w.B_gamma_prime, 1e-10) == K;
        const RecoveryResult r = p0_oracle(MeasurementEnsemble{GridParams::make(L, K, 1), Z2}, A, L, 1e-9);
        witnesses_ok = witnesses_ok && same && rank_ok && r.diagnostics.unique == std::optional<bool>(false) &&
                       2 * static_cast<int>(w.gamma_prime.size()) >= L + K;
    }
    return {agree == total && witnesses_ok,
            fmt("oracle uniqueness matches 2|G| < L+K on %d/%d instances; boundary witnesses K=1,3,5 %s; "
                "generic draws beyond the threshold still unique in %d/%d",
                agree, total, witnesses_ok ? "ambiguous" : "NOT ambiguous", generic_unique_beyond, generic_beyond) +
                mismatches};
}

Outcome music_failure_regime() {
    ExperimentConfig cfg;
    cfg.L = 19;
    cfg.ed_pairs = {{2, 2}};
    cfg.solver = SolverKind::music;
    cfg.delta_grid = {10.0 / 19.0};
    cfg.trials = 200;
    cfg.seed = 606;
    const SweepResult r = run_sweep(cfg);
    const SweepRow& row = r.rows.at(0);
    return {row.gamma_card == 10 && row.recovery_prob <= 0.05,
            fmt("L=19, E*D=4, |G|=%d, %d trials: recovery probability %.3f (limit 0.05)", row.gamma_card, row.trials,
                row.recovery_prob)};
}

Outcome noise_ordering() {
    ExperimentConfig cfg;
    cfg.L = 19;
    cfg.ed_pairs = {{19, 19}};
    cfg.delta_grid = {0.4, 0.6, 0.8};
    cfg.snr_db = 20.0;
    cfg.trials = 500;
    cfg.seed = 808;
    std::vector<TrialRecord> all;
    for (SolverKind s : {SolverKind::music, SolverKind::omp}) {
        cfg.solver = s;
        const SweepResult r = run_sweep(cfg);
        all.insert(all.end(), r.trials.begin(), r.trials.end());
    }
    bool ok = true;
    std::string detail = "SNR 20 dB, 500 trials:";
    for (double d : cfg.delta_grid) {
        const Stats m = ere_stats(all, d, SolverKind::music, 20.0);
        const Stats o = ere_stats(all, d, SolverKind::omp, 20.0);
        ok = ok && m.mean < o.mean && m.mean <= 0.1;
        detail += fmt(" D=%.1f music %.4g vs omp %.4g;", d, m.mean, o.mean);
    }
    return {ok, detail + " (need music < omp and music <= 0.1)"};
}

Outcome snr_monotonicity() {
    ExperimentConfig cfg;
    cfg.L = 19;
    cfg.ed_pairs = {{19, 19}};
    cfg.delta_grid = {0.5};
    cfg.trials = 300;
    cfg.seed = 909;
    const std::vector<double> snrs{0.0, 10.0, 20.0, 30.0};
    std::vector<TrialRecord> all;
    for (SolverKind s : {SolverKind::music, SolverKind::omp}) {
        cfg.solver = s;
        for (double snr : snrs) {
            cfg.snr_db = snr;
            const SweepResult r = run_sweep(cfg);
            all.insert(all.end(), r.trials.begin(), r.trials.end());
        }
    }
    bool ok = true;
    bool strict = true;
    std::string detail = "D=0.5, 300 trials, SNR 0/10/20/30 dB:";
    for (SolverKind s : {SolverKind::music, SolverKind::omp}) {
        detail += std::string(" ") + to_string(s);
        Stats prev{};
        for (std::size_t i = 0; i < snrs.size(); ++i) {
            const Stats cur = ere_stats(all, 0.5, s, snrs[i]);
            detail += fmt(" %.3g", cur.mean);
            if (i > 0) {
                const double slack = 3.0 * std::sqrt(prev.se * prev.se + cur.se * cur.se);
                ok = ok && cur.mean < prev.mean + slack;
                strict = strict && cur.mean < prev.mean;
            }
            prev = cur;
        }
        detail += ";";
    }
    return {ok, detail + (strict ? " strictly decreasing" : " decreasing within 3-sigma")};
}

Outcome compressive() {
    constexpr int L = 5;
    const GridParams g = GridParams::make(L, 1, 1);
    const std::vector<Cell> phi_cells{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    const RowSubset omega = RowSubset::prefix(L, 4);
    int exact2 = 0;
    int nonunique3 = 0;
    int nonunique3_phi = 0;
    Rng rng(1010);
    for (int card : {2, 3}) {
        for (int t = 0; t < 50; ++t) {
            const MeasurementMatrix A = build_matrix(random_disc(L, rng));
            std::vector<Cell> cells;
            std::sample(phi_cells.begin(), phi_cells.end(), std::back_inserter(cells), card, rng);
            const SupportSet s(L, cells);
            const DiscreteSpreadingFunction sf = random_spreading(g, s, rng);
            const MeasurementEnsemble Z = measure(simulate(sf, A.source()));
            const RecoveryResult r = compressive_recover(Z, A, omega, SolverKind::oracle, SolverOptions{});
            if (card == 2) {
                exact2 += r.support_hat == s && relative_sq_error(expand_rows(r.S_hat, r.support_hat),
                                                                  pack_unknowns(sf)) <= 1e-5;
            } else {
                nonunique3 += r.diagnostics.unique == std::optional<bool>(false);
                // Same question with the dictionary restricted to Phi.
                const CMatrix A_phi = row_submatrix(column_submatrix(A, SupportSet(L, phi_cells)), omega);
                const CMatrix Z_omega = row_submatrix(Z.Z, omega);
                const RecoveryResult rp = detail::oracle(Z_omega, A_phi, 2, 4, 1e-9);
                nonunique3_phi += rp.diagnostics.unique == std::optional<bool>(false);
            }
        }
    }
    const bool ok = exact2 == 50 && nonunique3 >= 45;
    return {ok, fmt("P=4: |G|=2 exact %d/50 (need 50); |G|=3 non-unique %d/50 over all L^2 columns, %d/50 over Phi "
                    "(need >= 45)",
                    exact2, nonunique3, nonunique3_phi)};
}

Outcome stability_small() {
    constexpr int L = 5;
    Rng rng(1111);
    const GridParams g = GridParams::make(L, 1, 1);
    const MeasurementMatrix A = build_matrix(random_disc(L, rng));
    double min_alpha = 1e300;
    long long subsets = 0;
    for (int k = 1; k <= L; ++k) {
        linalg::for_each_combination(L * L, k, [&](const std::vector<int>& idx) {
            const StabilityBounds b = stability_bounds(A, SupportSet::from_indices(L, idx), g);
            min_alpha = std::min(min_alpha, b.alpha);
            ++subsets;
            return true;
        });
    }
    int zero_alpha = 0;
    int null_found = 0;
    for (int t = 0; t < 20; ++t) {
        const SupportSet s = random_support(g, 6, rng);
        zero_alpha += stability_bounds(A, s, g).alpha == 0.0;
        null_found += linalg::null_space(column_submatrix(A, s), kRankEps).cols() >= 1;
    }
    return {min_alpha > 0.0 && zero_alpha == 20 && null_found == 20,
            fmt("%lld supports with |G| <= 5: min alpha = %.3e; |G| = 6: alpha = 0 on %d/20, null vector on %d/20",
                subsets, min_alpha, zero_alpha, null_found)};
}

}  // namespace

int main() {
    // Library warnings (e.g. alltop at L = 3) are expected here and not part of the report.
    set_warning_sink([](std::string_view) {});

    int failures = 0;
    auto report = [&](int id, const char* name, const Outcome& o, double seconds) {
        std::printf("[%s] criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
                    seconds);
        std::fflush(stdout);
        failures += !o.pass;
    };
    auto timed = [&](int id, const char* name, const std::function<Outcome()>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        report(id, name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };

    double worst_iso = 0.0;
    timed(1, "factorization identity", [&] { return factorization_and_isometry(worst_iso); });
    timed(2, "Zak isometry", [&] {
        return Outcome{worst_iso <= 1e-12,
                       fmt("same instances, max |D sum|Z|^2 - ||y||^2| / ||y||^2 = %.3e (limit 1e-12)", worst_iso)};
    });
    timed(3, "spark at small scale", spark_small);
    timed(4, "oracle uniqueness threshold", uniqueness_threshold);

    // Criteria 5, 7 and 12 share one sweep configuration.
    const ExperimentConfig transition = phase_transition_config();
    SweepResult transition_run;
    timed(5, "MUSIC phase transition", [&] {
        transition_run = run_sweep(transition, 1);
        double worst = 1.0;
        for (const SweepRow& row : transition_run.rows) worst = std::min(worst, row.recovery_prob);
        return Outcome{worst >= 0.99, fmt("L=19, E=D=19, noiseless, 200 trials x 18 deltas: min recovery probability "
                                          "%.3f (limit 0.99)",
                                          worst)};
    });
    timed(6, "MUSIC failure regime", music_failure_regime);
    timed(7, "success threshold semantics", [&] {
        int successes = 0;
        int bad = 0;
        int anomalies = 0;
        for (const TrialRecord& t : transition_run.trials) {
            successes += t.success;
            bad += t.success && !(t.rel_sq_error <= 1e-5 && t.support_exact);
            anomalies += t.anomaly;
        }
        return Outcome{!transition_run.trials.empty() && bad == 0 && anomalies == 0,
                       fmt("%d successes, %d without exact support or above 1e-5, %d anomaly rows", successes, bad,
                           anomalies)};
    });
    timed(8, "noise robustness ordering", noise_ordering);
    timed(9, "SNR monotonicity", snr_monotonicity);
    timed(10, "compressive identification", compressive);
    timed(11, "stability bounds", stability_small);
    timed(12, "determinism", [&] {
        const SweepResult eight = run_sweep(transition, 8);
        const std::string a = csv_of(transition_run);
        const std::string b = csv_of(eight);
        return Outcome{a == b, fmt("criterion 5 sweep at 1 and 8 threads: %zu bytes of CSV, %s", a.size(),
                                   a == b ? "byte-identical" : "DIFFERENT")};
    });

    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
