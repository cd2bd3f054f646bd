// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the library exclusively through the C API.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "spreadid/spreadid.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

// Carries a status out of a subcommand with the library's message attached.
struct Failure {
    spid_status status;
    std::string message;
};

int exit_code(spid_status s) {
    switch (s) {
        case SPID_OK: return kExitOk;
        case SPID_ERR_NUMERICAL:
        case SPID_ERR_INTERNAL: return kExitNumerical;
        default: return kExitValidation;
    }
}

void check(spid_status s, const std::string& context) {
    if (s != SPID_OK) throw Failure{s, context + ": " + spid_last_error()};
}

template <typename T, void (*F)(T*)>
struct Deleter {
    void operator()(T* p) const { F(p); }
};
using Grid = std::unique_ptr<spid_grid, Deleter<spid_grid, spid_grid_free>>;
using Matrix = std::unique_ptr<spid_matrix, Deleter<spid_matrix, spid_matrix_free>>;
using Probing = std::unique_ptr<spid_probing, Deleter<spid_probing, spid_probing_free>>;
using Spreading = std::unique_ptr<spid_spreading, Deleter<spid_spreading, spid_spreading_free>>;
using Signal = std::unique_ptr<spid_signal, Deleter<spid_signal, spid_signal_free>>;
using Result = std::unique_ptr<spid_result, Deleter<spid_result, spid_result_free>>;
using Witness = std::unique_ptr<spid_witness, Deleter<spid_witness, spid_witness_free>>;

struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { spid_string_free(p); }
};

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << text) || !os.flush()) throw Failure{SPID_ERR_IO, "cannot write '" + path + "'"};
}

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Failure{SPID_ERR_IO, "cannot open '" + path + "'"};
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// Options shared by every command that needs a probing sequence.
struct ProbingArgs {
    std::string kind = "random-disc";
    std::uint64_t seed = 0;
    std::string file;

    void add(CLI::App* app) {
        app->add_option("--probing", kind, "alltop | random-disc")
            ->check(CLI::IsMember({"alltop", "random-disc"}))
            ->capture_default_str();
        app->add_option("--seed", seed, "seed of the random-disc draw")->capture_default_str();
        app->add_option("--probing-file", file, "custom probing sequence (matrix file, L entries)");
    }

    Probing make(int L) const {
        spid_probing* raw = nullptr;
        if (!file.empty()) {
            spid_matrix* c = nullptr;
            check(spid_matrix_load(file.c_str(), &c), "probing file");
            const Matrix owned(c);
            check(spid_probing_custom(c, &raw), "probing file");
            if (spid_probing_L(raw) != L) {
                spid_probing_free(raw);
                throw Failure{SPID_ERR_INVALID, "probing file has the wrong length for L"};
            }
        } else {
            const spid_probing_kind k = kind == "alltop" ? SPID_PROBING_ALLTOP : SPID_PROBING_RANDOM_DISC;
            check(spid_probing_create(k, L, seed, &raw), "probing");
        }
        return Probing(raw);
    }
};

struct GridArgs {
    int L = 19;
    int E = 1;
    int D = 1;
    double T = 1.0;
    bool allow_composite = false;

    void add(CLI::App* app, bool with_ed = true) {
        app->add_option("--L", L, "number of delay/Doppler bins (prime)")->required();
        if (with_ed) {
            app->add_option("--E", E, "delay oversampling")->capture_default_str();
            app->add_option("--D", D, "Doppler oversampling")->capture_default_str();
        }
        app->add_option("--T", T, "sampling period")->capture_default_str();
        app->add_flag("--allow-composite", allow_composite, "accept a non-prime L");
    }

    Grid make() const {
        spid_grid* raw = nullptr;
        check(spid_grid_create(L, E, D, T, allow_composite ? 0 : 1, &raw), "grid");
        return Grid(raw);
    }
};

// ---- subcommands -----------------------------------------------------------

struct GenMatrix {
    GridArgs grid;
    ProbingArgs probing;
    std::string out;
    std::string sequence_out;

    void run() const {
        const Probing p = probing.make(grid.L);
        spid_matrix* A = nullptr;
        check(spid_probing_matrix(p.get(), &A), "gen-matrix");
        const Matrix owned(A);
        check(spid_matrix_save(A, out.c_str()), "gen-matrix");
        if (!sequence_out.empty()) {
            spid_matrix* c = nullptr;
            check(spid_probing_sequence(p.get(), &c), "gen-matrix");
            const Matrix oc(c);
            check(spid_matrix_save(c, sequence_out.c_str()), "gen-matrix");
        }
    }
};

struct Simulate {
    GridArgs grid;
    ProbingArgs probing;
    std::string samples_in;
    int card = -1;
    std::uint64_t spreading_seed = 1;
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t noise_seed = 2;
    std::string out;
    std::string truth_out;
    std::string Z_out;

    void run() const {
        const Grid g = grid.make();
        const Probing p = probing.make(grid.L);
        spid_spreading* raw = nullptr;
        if (!samples_in.empty()) {
            spid_matrix* m = nullptr;
            check(spid_matrix_load(samples_in.c_str(), &m), "simulate");
            const Matrix owned(m);
            check(spid_spreading_from_samples(g.get(), m, &raw), "simulate");
        } else {
            if (card < 0) throw Failure{SPID_ERR_INVALID, "simulate: give --spreading or --card"};
            check(spid_spreading_random(g.get(), card, spreading_seed, &raw), "simulate");
        }
        const Spreading s(raw);

        spid_signal* y = nullptr;
        check(spid_simulate(s.get(), p.get(), snr_db, noise_seed, &y), "simulate");
        const Signal sig(y);
        spid_matrix* ym = nullptr;
        check(spid_signal_samples(y, &ym), "simulate");
        const Matrix yo(ym);
        check(spid_matrix_save(ym, out.c_str()), "simulate");

        if (!truth_out.empty()) {
            spid_matrix* sm = nullptr;
            check(spid_spreading_samples(s.get(), &sm), "simulate");
            const Matrix so(sm);
            check(spid_matrix_save(sm, truth_out.c_str()), "simulate");
        }
        if (!Z_out.empty()) {
            spid_matrix* z = nullptr;
            check(spid_measure(y, &z), "simulate");
            const Matrix zo(z);
            check(spid_matrix_save(z, Z_out.c_str()), "simulate");
        }
    }
};

struct Recover {
    GridArgs grid;
    ProbingArgs probing;
    std::string y_in;
    std::string Z_in;
    std::string solver = "music";
    int top_k = 0;
    double threshold = 0.0;
    double rank_tol = 0.0;
    int signal_dim = 0;
    bool noise_floor = false;
    double omp_tol = 0.0;
    int max_support = 0;
    int oracle_max = 0;
    std::vector<int> rows;
    int P = 0;
    std::string out;
    std::string S_out;

    int run() const {
        const Grid g = grid.make();
        const Probing p = probing.make(grid.L);
        Matrix Z;
        if (!Z_in.empty()) {
            spid_matrix* z = nullptr;
            check(spid_matrix_load(Z_in.c_str(), &z), "recover");
            Z.reset(z);
        } else {
            spid_matrix* ym = nullptr;
            check(spid_matrix_load(y_in.c_str(), &ym), "recover");
            const Matrix yo(ym);
            spid_signal* y = nullptr;
            check(spid_signal_from_samples(g.get(), ym, &y), "recover");
            const Signal so(y);
            spid_matrix* z = nullptr;
            check(spid_measure(y, &z), "recover");
            Z.reset(z);
        }

        spid_solver_options o;
        spid_solver_options_default(&o);
        o.music_top_k = top_k;
        if (threshold > 0.0) o.music_threshold = threshold;
        if (rank_tol > 0.0) o.rank_tol = rank_tol;
        o.signal_dim = signal_dim;
        if (noise_floor) o.rank_rule = SPID_RANK_NOISE_FLOOR;
        if (omp_tol > 0.0) o.omp_residual_tol = omp_tol;
        o.omp_max_support = max_support;
        o.oracle_max_cardinality = oracle_max;
        const spid_solver_kind kind = solver == "music" ? SPID_SOLVER_MUSIC
                                      : solver == "omp" ? SPID_SOLVER_OMP
                                                        : SPID_SOLVER_ORACLE;

        std::vector<int> omega = rows;
        if (omega.empty() && P > 0) {
            for (int i = 0; i < P; ++i) omega.push_back(i);
        }
        spid_result* raw = nullptr;
        if (omega.empty()) {
            check(spid_recover(g.get(), Z.get(), p.get(), kind, &o, &raw), "recover");
        } else {
            check(spid_recover_compressive(g.get(), Z.get(), p.get(), omega.data(), omega.size(), kind, &o, &raw),
                  "recover");
        }
        const Result r(raw);
        OwnedString json;
        check(spid_result_to_json(r.get(), &json.p), "recover");
        emit(out, json.p);
        if (!S_out.empty()) {
            spid_matrix* S = nullptr;
            check(spid_result_coefficients(r.get(), &S), "recover");
            const Matrix so(S);
            check(spid_matrix_save(S, S_out.c_str()), "recover");
        }
        if (spid_result_failed(r.get())) {
            std::cerr << "recover: solver reported failure (see diagnostics.failure)\n";
            return kExitNumerical;
        }
        return kExitOk;
    }
};

struct Sweep {
    std::string config;
    std::string out;
    std::string trials_out;
    int threads = 0;
    bool timing = false;

    void run() const {
        const std::string text = read_text(config);
        check(spid_sweep_run(text.c_str(), threads, out.c_str(), trials_out.empty() ? nullptr : trials_out.c_str(),
                             timing ? 1 : 0),
              config);
    }
};

struct Stability {
    GridArgs grid;
    ProbingArgs probing;
    std::vector<int> columns;
    std::vector<std::string> cells;

    void run() const {
        const Grid g = grid.make();
        const Probing p = probing.make(grid.L);
        std::vector<int> idx = columns;
        for (const std::string& c : cells) {
            const auto colon = c.find(':');
            try {
                if (colon == std::string::npos) throw std::invalid_argument(c);
                idx.push_back(std::stoi(c.substr(0, colon)) * grid.L + std::stoi(c.substr(colon + 1)));
            } catch (const std::exception&) {
                throw Failure{SPID_ERR_INVALID, "stability: cells are written k:m, got '" + c + "'"};
            }
        }
        double alpha = 0.0;
        double beta = 0.0;
        check(spid_stability(g.get(), p.get(), idx.data(), idx.size(), &alpha, &beta), "stability");
        std::printf("gamma_card,alpha,beta\n%zu,%.16e,%.16e\n", idx.size(), alpha, beta);
    }
};

struct Counterexample {
    int L = 5;
    int K = 1;
    std::uint64_t seed = 0;
    ProbingArgs probing;
    std::string out;

    void run() const {
        const Probing p = probing.make(L);
        spid_witness* raw = nullptr;
        check(spid_counterexample(p.get(), K, seed, &raw), "counterexample");
        const Witness w(raw);
        OwnedString json;
        check(spid_witness_to_json(w.get(), &json.p), "counterexample");
        emit(out, json.p);
    }
};

struct Spark {
    int L = 5;
    ProbingArgs probing;
    int max = 0;

    void run() const {
        const Probing p = probing.make(L);
        spid_matrix* A = nullptr;
        check(spid_probing_matrix(p.get(), &A), "spark");
        const Matrix owned(A);
        const int limit = max > 0 ? max : L + 1;
        int spark = 0;
        check(spid_spark(A, limit, &spark), "spark");
        if (spark < 0) std::printf("spark > %d\n", limit);
        else std::printf("spark = %d\n", spark);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse identification of linear time-varying channels"};
    app.require_subcommand(1);
    app.set_version_flag("--version", spid_version());

    GenMatrix gen;
    auto* gen_cmd = app.add_subcommand("gen-matrix", "write the measurement matrix A_c");
    gen.grid.add(gen_cmd, false);
    gen.probing.add(gen_cmd);
    gen_cmd->add_option("--out", gen.out, "matrix file")->required();
    gen_cmd->add_option("--sequence-out", gen.sequence_out, "also write the probing sequence");

    Simulate sim;
    auto* sim_cmd = app.add_subcommand("simulate", "apply a spreading function to the probing signal");
    sim.grid.add(sim_cmd);
    sim.probing.add(sim_cmd);
    auto* spreading_opt = sim_cmd->add_option("--spreading", sim.samples_in, "(E*L) x (D*L) sample matrix file");
    sim_cmd->add_option("--card", sim.card, "random support of this many cells")->excludes(spreading_opt);
    sim_cmd->add_option("--spreading-seed", sim.spreading_seed, "seed for --card")->capture_default_str();
    sim_cmd->add_option("--snr", sim.snr_db, "SNR in dB (default: noiseless)");
    sim_cmd->add_option("--noise-seed", sim.noise_seed)->capture_default_str();
    sim_cmd->add_option("--out", sim.out, "received signal file")->required();
    sim_cmd->add_option("--truth-out", sim.truth_out, "write the spreading samples");
    sim_cmd->add_option("--Z-out", sim.Z_out, "write the assembled measurement matrix Z");

    Recover rec;
    auto* rec_cmd = app.add_subcommand("recover", "identify the support and spreading samples");
    rec.grid.add(rec_cmd);
    rec.probing.add(rec_cmd);
    auto* y_opt = rec_cmd->add_option("--y", rec.y_in, "received signal file");
    auto* z_opt = rec_cmd->add_option("--Z", rec.Z_in, "measurement matrix file (L x E*D)");
    y_opt->excludes(z_opt);
    rec_cmd->add_option("--solver", rec.solver)->check(CLI::IsMember({"music", "omp", "oracle"}))->capture_default_str();
    rec_cmd->add_option("--top-k", rec.top_k, "MUSIC: keep the k best columns");
    rec_cmd->add_option("--threshold", rec.threshold, "MUSIC: score threshold");
    rec_cmd->add_option("--rank-tol", rec.rank_tol, "relative singular-value cutoff");
    rec_cmd->add_option("--signal-dim", rec.signal_dim, "fix the signal-subspace dimension");
    rec_cmd->add_flag("--noise-floor", rec.noise_floor, "estimate the rank against the noise floor");
    rec_cmd->add_option("--omp-tol", rec.omp_tol, "OMP relative residual stopping tolerance");
    rec_cmd->add_option("--max-support", rec.max_support, "OMP: iteration cap");
    rec_cmd->add_option("--oracle-max", rec.oracle_max, "oracle: largest support size tried");
    auto* rows_opt = rec_cmd->add_option("--rows", rec.rows, "compressive: Zak rows to read")->delimiter(',');
    rec_cmd->add_option("--P", rec.P, "compressive: read rows 0..P-1")->excludes(rows_opt);
    rec_cmd->add_option("--out", rec.out, "result JSON (default stdout)");
    rec_cmd->add_option("--S-out", rec.S_out, "write the recovered coefficient rows");

    Sweep sw;
    auto* sw_cmd = app.add_subcommand("sweep", "run a Monte Carlo sweep");
    sw_cmd->add_option("--config", sw.config, "JSON experiment config")->required();
    sw_cmd->add_option("--out", sw.out, "aggregate CSV")->required();
    sw_cmd->add_option("--emit-trials", sw.trials_out, "per-trial CSV");
    sw_cmd->add_option("--threads", sw.threads, "worker threads (default SPREADID_THREADS or all cores)");
    sw_cmd->add_flag("--timing", sw.timing, "add runtime_ms to the per-trial CSV");

    Stability st;
    auto* st_cmd = app.add_subcommand("stability", "frame bounds of A_Gamma");
    st.grid.add(st_cmd);
    st.probing.add(st_cmd);
    st_cmd->add_option("--columns", st.columns, "support as column indices k*L+m")->delimiter(',');
    st_cmd->add_option("--cells", st.cells, "support as k:m pairs")->delimiter(',');

    Counterexample ce;
    auto* ce_cmd = app.add_subcommand("counterexample", "construct two supports with identical measurements");
    ce_cmd->add_option("--L", ce.L)->required();
    ce_cmd->add_option("--K", ce.K, "rank of the coefficient matrices")->required();
    ce.probing.add(ce_cmd);
    ce_cmd->add_option("--out", ce.out, "witness JSON (default stdout)");

    Spark sp;
    auto* sp_cmd = app.add_subcommand("spark", "exhaustive spark of A_c at small L");
    sp_cmd->add_option("--L", sp.L)->required();
    sp.probing.add(sp_cmd);
    sp_cmd->add_option("--max", sp.max, "largest subset size checked (default L+1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*gen_cmd) gen.run();
        else if (*sim_cmd) sim.run();
        else if (*rec_cmd) {
            if (rec.y_in.empty() && rec.Z_in.empty()) throw Failure{SPID_ERR_INVALID, "recover: give --y or --Z"};
            return rec.run();
        } else if (*sw_cmd) sw.run();
        else if (*st_cmd) st.run();
        else if (*ce_cmd) ce.run();
        else if (*sp_cmd) sp.run();
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return exit_code(f.status);
    }
    return kExitOk;
}
