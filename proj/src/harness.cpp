// SPDX-License-Identifier: Apache-2.0
#include "spreadid/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "spreadid/analysis.hpp"
#include "spreadid/errors.hpp"
#include "spreadid/io.hpp"
#include "spreadid/pipeline.hpp"

namespace spreadid {

namespace {

using nlohmann::json;

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

Rng trial_stream(std::uint64_t seed, double delta, int E, int D, int trial_index) {
    const auto bits = std::bit_cast<std::uint64_t>(delta);
    std::seed_seq seq{lo32(seed), hi32(seed), lo32(bits), hi32(bits), static_cast<std::uint32_t>(E),
                      static_cast<std::uint32_t>(D), static_cast<std::uint32_t>(trial_index)};
    return Rng(seq);
}

Rng probing_stream(std::uint64_t seed) {
    std::seed_seq seq{lo32(seed), hi32(seed), 0x70726f62u};
    return Rng(seq);
}

// 1-based line of the first occurrence of "key" in the source text, or 0.
int line_of_key(const std::string& text, const std::string& key) {
    const std::size_t pos = text.find('"' + key + '"');
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

int line_of_offset(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

[[noreturn]] void config_error(const std::string& text, const std::string& key, const std::string& what) {
    const int line = line_of_key(text, key);
    std::string msg = "config";
    if (line > 0) msg += ": line " + std::to_string(line);
    msg += ": field '" + key + "': " + what;
    throw ValidationError(msg);
}

template <typename T>
T get_field(const json& j, const std::string& text, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(text, key, e.what());
    }
}

}  // namespace

const char* to_string(SparsityProtocol p) { return p == SparsityProtocol::known ? "known" : "blind"; }

int ExperimentConfig::gamma_card(double delta) const {
    return static_cast<int>(std::lround(delta * static_cast<double>(L)));
}

void ExperimentConfig::validate() const {
    (void)GridParams::make(L, 1, 1, T, require_prime_L);
    if (ed_pairs.empty()) throw ValidationError("config: at least one (E, D) pair is required");
    for (const auto& [E, D] : ed_pairs) (void)GridParams::make(L, E, D, T, require_prime_L);
    if (delta_grid.empty()) throw ValidationError("config: delta_grid is empty");
    for (double d : delta_grid) {
        if (!(d > 0.0 && d <= 1.0)) throw ValidationError("config: delta values must lie in (0, 1]");
        if (gamma_card(d) > L * L) throw ValidationError("config: round(delta * L) exceeds L^2");
    }
    if (trials < 1) throw ValidationError("config: trials must be >= 1");
    if (std::isnan(snr_db)) throw ValidationError("config: snr_db is NaN");
    if (!(success_threshold > 0.0)) throw ValidationError("config: success_threshold must be positive");
    if (!(music_threshold > 0.0)) throw ValidationError("config: music_threshold must be positive");
    if (!(omp_residual_tol > 0.0)) throw ValidationError("config: omp_residual_tol must be positive");
    if (probing == ProbingKind::custom) throw ValidationError("config: probing must be alltop or random-disc");
    if (compressive) {
        if (compressive->P < 1 || compressive->P > L) throw ValidationError("config: compressive.P must lie in [1, L]");
        if (!compressive->omega.empty()) {
            if (static_cast<int>(compressive->omega.size()) != compressive->P) {
                throw ValidationError("config: compressive.omega must list exactly P rows");
            }
            (void)RowSubset(L, compressive->omega);
        }
    }
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("config: line " + std::to_string(line_of_offset(text, e.byte)) +
                              ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) throw ValidationError("config: line 1: top level must be a JSON object");

    static const std::set<std::string> known = {
        "L", "T", "E", "D", "ed_pairs", "probing", "solver", "delta_grid", "snr_db", "trials", "seed",
        "success_threshold", "compressive", "fix_probing", "protocol", "music_threshold",
        "omp_residual_tol", "require_prime_L"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) config_error(text, key, "unknown field");
    }

    ExperimentConfig cfg;
    auto opt = [&](const char* key, auto& target) {
        if (j.contains(key)) target = get_field<std::remove_reference_t<decltype(target)>>(j, text, key);
    };
    opt("L", cfg.L);
    opt("T", cfg.T);
    opt("trials", cfg.trials);
    opt("seed", cfg.seed);
    opt("success_threshold", cfg.success_threshold);
    opt("fix_probing", cfg.fix_probing);
    opt("music_threshold", cfg.music_threshold);
    opt("omp_residual_tol", cfg.omp_residual_tol);
    opt("require_prime_L", cfg.require_prime_L);

    if (j.contains("ed_pairs")) {
        if (j.contains("E") || j.contains("D")) config_error(text, "ed_pairs", "give either E/D or ed_pairs, not both");
        cfg.ed_pairs.clear();
        const json& pairs = j.at("ed_pairs");
        if (!pairs.is_array()) config_error(text, "ed_pairs", "expected a list of [E, D] pairs");
        for (const json& p : pairs) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
                config_error(text, "ed_pairs", "each entry must be [E, D] with integer values");
            }
            cfg.ed_pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
        }
    } else {
        int E = 1;
        int D = 1;
        opt("E", E);
        opt("D", D);
        cfg.ed_pairs = {{E, D}};
    }
    if (j.contains("probing")) {
        try {
            cfg.probing = parse_probing_kind(get_field<std::string>(j, text, "probing"));
        } catch (const ValidationError& e) {
            config_error(text, "probing", e.what());
        }
    }
    if (j.contains("solver")) {
        try {
            cfg.solver = parse_solver_kind(get_field<std::string>(j, text, "solver"));
        } catch (const ValidationError& e) {
            config_error(text, "solver", e.what());
        }
    }
    if (j.contains("protocol")) {
        const auto p = get_field<std::string>(j, text, "protocol");
        if (p == "known") cfg.protocol = SparsityProtocol::known;
        else if (p == "blind") cfg.protocol = SparsityProtocol::blind;
        else config_error(text, "protocol", "expected 'known' or 'blind'");
    }
    cfg.delta_grid = get_field<std::vector<double>>(j, text, "delta_grid");
    if (j.contains("snr_db")) {
        const json& s = j.at("snr_db");
        if (s.is_null() || (s.is_string() && (s == "inf" || s == "+inf"))) {
            cfg.snr_db = std::numeric_limits<double>::infinity();
        } else if (s.is_number()) {
            cfg.snr_db = s.get<double>();
        } else {
            config_error(text, "snr_db", "expected a number, \"inf\" or null");
        }
    }
    if (j.contains("compressive")) {
        const json& c = j.at("compressive");
        if (!c.is_null()) {
            if (!c.is_object() || !c.contains("P")) config_error(text, "compressive", "expected {\"P\": int, \"omega\": ...}");
            CompressiveConfig cc;
            cc.P = get_field<int>(c, text, "P");
            if (c.contains("omega")) {
                const json& o = c.at("omega");
                if (o.is_string()) {
                    if (o != "prefix") config_error(text, "omega", "expected \"prefix\" or a list of rows");
                } else {
                    cc.omega = get_field<std::vector<int>>(c, text, "omega");
                }
            }
            cfg.compressive = std::move(cc);
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

TrialRecord run_trial(const ExperimentConfig& cfg, double delta, int E, int D, int trial_index) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.trial_index = trial_index;
    rec.delta = delta;
    rec.gamma_card = cfg.gamma_card(delta);
    rec.E = E;
    rec.D = D;
    rec.solver = cfg.solver;
    rec.probing = cfg.probing;
    rec.snr_db = cfg.snr_db;

    Rng rng = trial_stream(cfg.seed, delta, E, D, trial_index);
    rec.trial_id = rng();

    try {
        const GridParams grid = GridParams::make(cfg.L, E, D, cfg.T, cfg.require_prime_L);
        if (rec.gamma_card == 0) throw ValidationError("zero truth: round(delta * L) = 0");
        const SupportSet support = random_support(grid, rec.gamma_card, rng);
        const DiscreteSpreadingFunction sf = random_spreading(grid, support, rng);

        std::optional<ProbingSequence> probing;
        if (cfg.probing == ProbingKind::alltop) {
            probing = alltop(cfg.L);
        } else if (cfg.fix_probing) {
            Rng fixed = probing_stream(cfg.seed);
            probing = random_disc(cfg.L, fixed);
        } else {
            probing = random_disc(cfg.L, rng);
        }
        const MeasurementMatrix A = build_matrix(*probing);

        ReceivedSignal y = simulate(sf, *probing);
        if (!cfg.noiseless()) y = add_noise(y, cfg.snr_db, rng, rec.trial_id);
        const MeasurementEnsemble Z = measure(y);

        SolverOptions opts;
        opts.omp_residual_tol = cfg.omp_residual_tol;
        const int ed = grid.samples_per_cell();
        if (cfg.protocol == SparsityProtocol::known) {
            opts.music = MusicTopK{rec.gamma_card};
            opts.omp_max_support = rec.gamma_card;
            if (!cfg.noiseless()) opts.signal_dim = std::min(rec.gamma_card, ed);
        } else {
            opts.music = MusicThreshold{cfg.music_threshold};
            if (!cfg.noiseless()) opts.rank_rule = RankRule::noise_floor;
        }

        RecoveryResult result;
        if (cfg.compressive) {
            const RowSubset omega = cfg.compressive->omega.empty()
                                        ? RowSubset::prefix(cfg.L, cfg.compressive->P)
                                        : RowSubset(cfg.L, cfg.compressive->omega);
            result = compressive_recover(Z, A, omega, cfg.solver, opts);
        } else {
            result = recover(Z, A, cfg.solver, opts);
        }
        if (result.diagnostics.failed) rec.error = result.diagnostics.failure;

        const CMatrix truth = pack_unknowns(sf);
        const CMatrix estimate = result.support_hat.empty()
                                     ? CMatrix::Zero(truth.rows(), truth.cols()).eval()
                                     : expand_rows(result.S_hat, result.support_hat);
        rec.rel_sq_error = relative_sq_error(estimate, truth);
        rec.success = rec.rel_sq_error <= cfg.success_threshold;
        rec.support_exact = result.support_hat == support;
        rec.anomaly = cfg.noiseless() && rec.success && !rec.support_exact;
        // A declared solver failure keeps its score but is reported as an error.
        if (!rec.error.empty()) rec.success = false;
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.success = false;
        rec.rel_sq_error = std::numeric_limits<double>::quiet_NaN();
    }
    rec.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

TrialRecord run_trial(const ExperimentConfig& cfg, double delta, int trial_index) {
    const auto [E, D] = cfg.ed_pairs.front();
    return run_trial(cfg, delta, E, D, trial_index);
}

int default_thread_count() {
    if (const char* env = std::getenv("SPREADID_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 1024));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

SweepResult run_sweep(const ExperimentConfig& cfg, int threads) {
    cfg.validate();
    struct Task {
        double delta;
        int E;
        int D;
        int trial;
    };
    std::vector<Task> tasks;
    for (double delta : cfg.delta_grid) {
        for (const auto& [E, D] : cfg.ed_pairs) {
            for (int t = 0; t < cfg.trials; ++t) tasks.push_back({delta, E, D, t});
        }
    }

    SweepResult out;
    out.trials.resize(tasks.size());
    const int workers = std::max(1, std::min<int>(threads > 0 ? threads : default_thread_count(),
                                                  static_cast<int>(tasks.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const Task& t = tasks[i];
            out.trials[i] = run_trial(cfg, t.delta, t.E, t.D, t.trial);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    out.rows = aggregate(cfg, out.trials);
    return out;
}

std::vector<SweepRow> aggregate(const ExperimentConfig& cfg, const std::vector<TrialRecord>& trials) {
    std::vector<SweepRow> rows;
    for (double delta : cfg.delta_grid) {
        for (const auto& [E, D] : cfg.ed_pairs) {
            SweepRow row;
            row.delta = delta;
            row.gamma_card = cfg.gamma_card(delta);
            row.E = E;
            row.D = D;
            row.snr_db = cfg.snr_db;
            row.solver = cfg.solver;
            row.probing = cfg.probing;
            row.protocol = cfg.protocol;
            int successes = 0;
            int scored = 0;
            double err_sum = 0.0;
            for (const TrialRecord& t : trials) {
                if (t.delta != delta || t.E != E || t.D != D) continue;
                ++row.trials;
                successes += t.success ? 1 : 0;
                row.anomalies += t.anomaly ? 1 : 0;
                if (!t.error.empty()) ++row.errors;
                if (!std::isnan(t.rel_sq_error)) {
                    err_sum += t.rel_sq_error;
                    ++scored;
                }
            }
            row.recovery_prob = row.trials > 0 ? static_cast<double>(successes) / row.trials : 0.0;
            row.ere = scored > 0 ? err_sum / scored : std::numeric_limits<double>::quiet_NaN();
            rows.push_back(row);
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "delta,gamma_card,E,D,ed,snr_db,solver,probing,protocol,trials,recovery_prob,ere,anomalies,errors\n";
    for (const SweepRow& r : rows) {
        os << io::format_double(r.delta) << ',' << r.gamma_card << ',' << r.E << ',' << r.D << ','
           << r.E * r.D << ',' << io::format_double(r.snr_db) << ',' << to_string(r.solver) << ','
           << to_string(r.probing) << ',' << to_string(r.protocol) << ',' << r.trials << ','
           << io::format_double(r.recovery_prob) << ',' << io::format_double(r.ere) << ','
           << r.anomalies << ',' << r.errors << '\n';
    }
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials, bool include_timing) {
    os << "trial_index,trial_id,delta,gamma_card,E,D,ed,solver,probing,snr_db,rel_sq_error,success,"
          "support_exact,anomaly,error";
    if (include_timing) os << ",runtime_ms";
    os << '\n';
    for (const TrialRecord& t : trials) {
        std::string err = t.error;
        std::replace(err.begin(), err.end(), '"', '\'');
        os << t.trial_index << ',' << t.trial_id << ',' << io::format_double(t.delta) << ','
           << t.gamma_card << ',' << t.E << ',' << t.D << ',' << t.ed() << ',' << to_string(t.solver)
           << ',' << to_string(t.probing) << ',' << io::format_double(t.snr_db) << ','
           << io::format_double(t.rel_sq_error) << ',' << (t.success ? 1 : 0) << ','
           << (t.support_exact ? 1 : 0) << ',' << (t.anomaly ? 1 : 0) << ",\"" << err << '"';
        if (include_timing) os << ',' << io::format_double(t.runtime_ms);
        os << '\n';
    }
}

}  // namespace spreadid
