// SPDX-License-Identifier: Apache-2.0
#include "spreadid/spreadid.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <new>
#include <sstream>
#include <string>

#include "spreadid/analysis.hpp"
#include "spreadid/errors.hpp"
#include "spreadid/harness.hpp"
#include "spreadid/io.hpp"
#include "spreadid/pipeline.hpp"
#include "spreadid/solvers.hpp"

using namespace spreadid;

struct spid_grid {
    GridParams g;
};
struct spid_matrix {
    CMatrix m;
};
struct spid_probing {
    MeasurementMatrix A;
};
struct spid_spreading {
    DiscreteSpreadingFunction sf;
};
struct spid_signal {
    ReceivedSignal y;
};
struct spid_result {
    RecoveryResult r;
};
struct spid_witness {
    AmbiguityWitness w;
};

namespace {

thread_local std::string g_last_error;

spid_status fail(spid_status code, const char* what) {
    g_last_error = what;
    return code;
}

// Maps the library's exception taxonomy onto status codes. Every entry point
// funnels through here so no exception crosses the C boundary.
template <typename F>
spid_status guarded(F&& body) {
    try {
        body();
        return SPID_OK;
    } catch (const ValidationError& e) {
        return fail(SPID_ERR_INVALID, e.what());
    } catch (const NumericalError& e) {
        return fail(SPID_ERR_NUMERICAL, e.what());
    } catch (const BudgetError& e) {
        return fail(SPID_ERR_BUDGET, e.what());
    } catch (const IoError& e) {
        return fail(SPID_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SPID_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SPID_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SPID_ERR_INTERNAL, "unknown exception");
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw ValidationError(what);
}

template <typename T>
void require_out(T** out) {
    require(out != nullptr, "output pointer is NULL");
    *out = nullptr;
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

spid_matrix* wrap(CMatrix m) { return new spid_matrix{std::move(m)}; }

size_t copy_indices(const SupportSet& s, int* out, size_t capacity) {
    const std::vector<int> idx = s.indices();
    if (out) {
        for (size_t i = 0; i < idx.size() && i < capacity; ++i) out[i] = idx[i];
    }
    return idx.size();
}

SolverOptions to_options(const spid_solver_options* o) {
    SolverOptions opts;
    if (!o) return opts;
    opts.rank_tol = o->rank_tol;
    opts.rank_rule = o->rank_rule == SPID_RANK_NOISE_FLOOR ? RankRule::noise_floor : RankRule::relative;
    if (o->signal_dim > 0) opts.signal_dim = o->signal_dim;
    if (o->music_top_k > 0) opts.music = MusicTopK{o->music_top_k};
    else opts.music = MusicThreshold{o->music_threshold};
    opts.omp_residual_tol = o->omp_residual_tol;
    if (o->omp_max_support > 0) opts.omp_max_support = o->omp_max_support;
    opts.reconstruction_tol = o->reconstruction_tol;
    if (o->oracle_max_cardinality > 0) opts.oracle_max_cardinality = o->oracle_max_cardinality;
    opts.oracle_tol = o->oracle_tol;
    return opts;
}

SolverKind to_solver(spid_solver_kind k) {
    switch (k) {
        case SPID_SOLVER_MUSIC: return SolverKind::music;
        case SPID_SOLVER_OMP: return SolverKind::omp;
        case SPID_SOLVER_ORACLE: return SolverKind::oracle;
    }
    throw ValidationError("unknown solver kind");
}

MeasurementEnsemble ensemble(const spid_grid* g, const spid_matrix* Z, const spid_probing* p) {
    require(g && Z && p, "NULL argument");
    require(p->A.L() == g->g.L(), "probing sequence and grid disagree on L");
    require(Z->m.rows() == g->g.L() && Z->m.cols() == g->g.samples_per_cell(),
            "Z must be L x (E*D) for the given grid");
    return MeasurementEnsemble{g->g, Z->m};
}

SupportSet support_from_indices(int L, const int* idx, size_t n) {
    require(idx != nullptr || n == 0, "NULL support indices");
    return SupportSet::from_indices(L, std::vector<int>(idx, idx + n));
}

std::mutex g_warning_mutex;
spid_warning_fn g_warning_fn = nullptr;
void* g_warning_user = nullptr;

}  // namespace

extern "C" {

const char* spid_version(void) { return "1.0.0"; }

const char* spid_last_error(void) { return g_last_error.c_str(); }

const char* spid_status_string(spid_status status) {
    switch (status) {
        case SPID_OK: return "ok";
        case SPID_ERR_INVALID: return "invalid argument";
        case SPID_ERR_NUMERICAL: return "numerical failure";
        case SPID_ERR_BUDGET: return "enumeration budget exceeded";
        case SPID_ERR_IO: return "i/o error";
        case SPID_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void spid_set_warning_handler(spid_warning_fn fn, void* user) {
    {
        std::lock_guard lock(g_warning_mutex);
        g_warning_fn = fn;
        g_warning_user = user;
    }
    if (!fn) {
        set_warning_sink(nullptr);
        return;
    }
    set_warning_sink([](std::string_view msg) {
        std::lock_guard lock(g_warning_mutex);
        if (g_warning_fn) g_warning_fn(std::string(msg).c_str(), g_warning_user);
    });
}

void spid_string_free(char* s) { std::free(s); }

/* grid */

spid_status spid_grid_create(int L, int E, int D, double T, int require_prime_L, spid_grid** out) {
    return guarded([&] {
        require_out(out);
        *out = new spid_grid{GridParams::make(L, E, D, T, require_prime_L != 0)};
    });
}
void spid_grid_free(spid_grid* g) { delete g; }
int spid_grid_L(const spid_grid* g) { return g ? g->g.L() : 0; }
int spid_grid_E(const spid_grid* g) { return g ? g->g.E() : 0; }
int spid_grid_D(const spid_grid* g) { return g ? g->g.D() : 0; }

/* matrices */

spid_status spid_matrix_create(size_t rows, size_t cols, const double* interleaved, spid_matrix** out) {
    return guarded([&] {
        require_out(out);
        require(interleaved != nullptr || rows * cols == 0, "NULL matrix data");
        CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (size_t i = 0; i < rows; ++i) {
            for (size_t j = 0; j < cols; ++j) {
                const size_t k = 2 * (i * cols + j);
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cplx(interleaved[k], interleaved[k + 1]);
            }
        }
        *out = wrap(std::move(m));
    });
}
void spid_matrix_free(spid_matrix* m) { delete m; }
size_t spid_matrix_rows(const spid_matrix* m) { return m ? static_cast<size_t>(m->m.rows()) : 0; }
size_t spid_matrix_cols(const spid_matrix* m) { return m ? static_cast<size_t>(m->m.cols()) : 0; }

spid_status spid_matrix_copy_data(const spid_matrix* m, double* interleaved, size_t capacity) {
    return guarded([&] {
        require(m != nullptr, "NULL matrix");
        const size_t rows = static_cast<size_t>(m->m.rows());
        const size_t cols = static_cast<size_t>(m->m.cols());
        require(capacity >= 2 * rows * cols, "buffer too small for matrix data");
        require(interleaved != nullptr || rows * cols == 0, "NULL output buffer");
        for (size_t i = 0; i < rows; ++i) {
            for (size_t j = 0; j < cols; ++j) {
                const cplx v = m->m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                interleaved[2 * (i * cols + j)] = v.real();
                interleaved[2 * (i * cols + j) + 1] = v.imag();
            }
        }
    });
}

spid_status spid_matrix_save(const spid_matrix* m, const char* path) {
    return guarded([&] {
        require(m && path, "NULL argument");
        io::save_matrix(path, m->m);
    });
}

spid_status spid_matrix_load(const char* path, spid_matrix** out) {
    return guarded([&] {
        require_out(out);
        require(path != nullptr, "NULL path");
        *out = wrap(io::load_matrix(path));
    });
}

/* probing */

spid_status spid_probing_alltop(int L, spid_probing** out) {
    return guarded([&] {
        require_out(out);
        *out = new spid_probing{build_matrix(alltop(L))};
    });
}

spid_status spid_probing_random_disc(int L, uint64_t seed, spid_probing** out) {
    return guarded([&] {
        require_out(out);
        Rng rng(seed);
        *out = new spid_probing{build_matrix(random_disc(L, rng))};
    });
}

spid_status spid_probing_custom(const spid_matrix* c, spid_probing** out) {
    return guarded([&] {
        require_out(out);
        require(c != nullptr, "NULL probing matrix");
        require(c->m.rows() == 1 || c->m.cols() == 1, "custom probing must be a vector");
        const CVector v = Eigen::Map<const CVector>(c->m.data(), c->m.size());
        *out = new spid_probing{build_matrix(ProbingSequence(v, ProbingKind::custom))};
    });
}

spid_status spid_probing_create(spid_probing_kind kind, int L, uint64_t seed, spid_probing** out) {
    switch (kind) {
        case SPID_PROBING_RANDOM_DISC: return spid_probing_random_disc(L, seed, out);
        case SPID_PROBING_ALLTOP: return spid_probing_alltop(L, out);
        case SPID_PROBING_CUSTOM: break;
    }
    if (out) *out = nullptr;
    return fail(SPID_ERR_INVALID, "spid_probing_create: use spid_probing_custom for custom sequences");
}

void spid_probing_free(spid_probing* p) { delete p; }
int spid_probing_L(const spid_probing* p) { return p ? p->A.L() : 0; }

spid_status spid_probing_matrix(const spid_probing* p, spid_matrix** out) {
    return guarded([&] {
        require_out(out);
        require(p != nullptr, "NULL probing");
        *out = wrap(p->A.matrix());
    });
}

spid_status spid_probing_sequence(const spid_probing* p, spid_matrix** out) {
    return guarded([&] {
        require_out(out);
        require(p != nullptr, "NULL probing");
        *out = wrap(p->A.source().coefficients());
    });
}

spid_status spid_spark(const spid_matrix* m, int max_cardinality, int* spark) {
    return guarded([&] {
        require(m && spark, "NULL argument");
        const std::optional<int> s = spark_exhaustive(m->m, max_cardinality);
        *spark = s.value_or(-1);
    });
}

/* spreading functions and the channel */

spid_status spid_spreading_random(const spid_grid* g, int cardinality, uint64_t seed, spid_spreading** out) {
    return guarded([&] {
        require_out(out);
        require(g != nullptr, "NULL grid");
        Rng rng(seed);
        const SupportSet s = random_support(g->g, cardinality, rng);
        *out = new spid_spreading{random_spreading(g->g, s, rng)};
    });
}

spid_status spid_spreading_from_samples(const spid_grid* g, const spid_matrix* samples, spid_spreading** out) {
    return guarded([&] {
        require_out(out);
        require(g && samples, "NULL argument");
        const GridParams& grid = g->g;
        require(samples->m.rows() == grid.delay_grid() && samples->m.cols() == grid.doppler_grid(),
                "spreading samples must be (E*L) x (D*L)");
        std::vector<Cell> cells;
        for (int k = 0; k < grid.L(); ++k) {
            for (int m = 0; m < grid.L(); ++m) {
                if (!samples->m.block(k * grid.E(), m * grid.D(), grid.E(), grid.D()).isZero(0.0)) {
                    cells.push_back({k, m});
                }
            }
        }
        *out = new spid_spreading{DiscreteSpreadingFunction(grid, samples->m, SupportSet(grid.L(), cells))};
    });
}

void spid_spreading_free(spid_spreading* s) { delete s; }

spid_status spid_spreading_samples(const spid_spreading* s, spid_matrix** out) {
    return guarded([&] {
        require_out(out);
        require(s != nullptr, "NULL spreading function");
        *out = wrap(s->sf.samples());
    });
}

spid_status spid_spreading_unknowns(const spid_spreading* s, spid_matrix** out) {
    return guarded([&] {
        require_out(out);
        require(s != nullptr, "NULL spreading function");
        *out = wrap(pack_unknowns(s->sf));
    });
}

size_t spid_spreading_support(const spid_spreading* s, int* column_indices, size_t capacity) {
    return s ? copy_indices(s->sf.support(), column_indices, capacity) : 0;
}

spid_status spid_simulate(const spid_spreading* s, const spid_probing* p, double snr_db, uint64_t noise_seed,
                          spid_signal** out) {
    return guarded([&] {
        require_out(out);
        require(s && p, "NULL argument");
        ReceivedSignal y = simulate(s->sf, p->A.source());
        if (!(std::isinf(snr_db) && snr_db > 0)) {
            Rng rng(noise_seed);
            y = add_noise(y, snr_db, rng, noise_seed);
        }
        *out = new spid_signal{std::move(y)};
    });
}

spid_status spid_signal_from_samples(const spid_grid* g, const spid_matrix* y, spid_signal** out) {
    return guarded([&] {
        require_out(out);
        require(g && y, "NULL argument");
        require(y->m.cols() == 1, "received signal must be a column vector");
        *out = new spid_signal{ReceivedSignal(g->g, y->m.col(0))};
    });
}

void spid_signal_free(spid_signal* y) { delete y; }

spid_status spid_signal_samples(const spid_signal* y, spid_matrix** out) {
    return guarded([&] {
        require_out(out);
        require(y != nullptr, "NULL signal");
        *out = wrap(y->y.samples());
    });
}

spid_status spid_measure(const spid_signal* y, spid_matrix** Z_out) {
    return guarded([&] {
        require_out(Z_out);
        require(y != nullptr, "NULL signal");
        *Z_out = wrap(measure(y->y).Z);
    });
}

/* recovery */

void spid_solver_options_default(spid_solver_options* o) {
    if (!o) return;
    const SolverOptions d;
    o->rank_tol = d.rank_tol;
    o->rank_rule = SPID_RANK_RELATIVE;
    o->signal_dim = 0;
    o->music_top_k = 0;
    o->music_threshold = std::get<MusicThreshold>(d.music).delta;
    o->omp_residual_tol = d.omp_residual_tol;
    o->omp_max_support = 0;
    o->reconstruction_tol = d.reconstruction_tol;
    o->oracle_max_cardinality = 0;
    o->oracle_tol = d.oracle_tol;
}

spid_status spid_recover(const spid_grid* g, const spid_matrix* Z, const spid_probing* p, spid_solver_kind solver,
                         const spid_solver_options* opts, spid_result** out) {
    return guarded([&] {
        require_out(out);
        const MeasurementEnsemble ens = ensemble(g, Z, p);
        *out = new spid_result{recover(ens, p->A, to_solver(solver), to_options(opts))};
    });
}

spid_status spid_recover_compressive(const spid_grid* g, const spid_matrix* Z, const spid_probing* p,
                                     const int* rows, size_t P, spid_solver_kind solver,
                                     const spid_solver_options* opts, spid_result** out) {
    return guarded([&] {
        require_out(out);
        const MeasurementEnsemble ens = ensemble(g, Z, p);
        require(rows != nullptr || P == 0, "NULL row list");
        const RowSubset omega(g->g.L(), std::vector<int>(rows, rows + P));
        *out = new spid_result{compressive_recover(ens, p->A, omega, to_solver(solver), to_options(opts))};
    });
}

void spid_result_free(spid_result* r) { delete r; }

size_t spid_result_support(const spid_result* r, int* column_indices, size_t capacity) {
    return r ? copy_indices(r->r.support_hat, column_indices, capacity) : 0;
}

int spid_result_rank(const spid_result* r) { return r ? r->r.rank_hat : 0; }

int spid_result_unique(const spid_result* r) {
    if (!r || !r->r.diagnostics.unique) return -1;
    return *r->r.diagnostics.unique ? 1 : 0;
}

int spid_result_failed(const spid_result* r) { return r && r->r.diagnostics.failed ? 1 : 0; }

spid_status spid_result_coefficients(const spid_result* r, spid_matrix** out) {
    return guarded([&] {
        require_out(out);
        require(r != nullptr, "NULL result");
        *out = wrap(r->r.S_hat);
    });
}

spid_status spid_result_to_json(const spid_result* r, char** json) {
    return guarded([&] {
        require_out(json);
        require(r != nullptr, "NULL result");
        *json = dup_string(io::result_to_json(r->r));
    });
}

/* analysis */

spid_status spid_stability(const spid_grid* g, const spid_probing* p, const int* column_indices, size_t n,
                           double* alpha, double* beta) {
    return guarded([&] {
        require(g && p && alpha && beta, "NULL argument");
        const StabilityBounds b = stability_bounds(p->A, support_from_indices(g->g.L(), column_indices, n), g->g);
        *alpha = b.alpha;
        *beta = b.beta;
    });
}

spid_status spid_counterexample(const spid_probing* p, int K, uint64_t seed, spid_witness** out) {
    return guarded([&] {
        require_out(out);
        require(p != nullptr, "NULL probing");
        Rng rng(seed);
        *out = new spid_witness{ambiguous_instance(p->A, K, rng)};
    });
}

void spid_witness_free(spid_witness* w) { delete w; }

spid_status spid_witness_to_json(const spid_witness* w, char** json) {
    return guarded([&] {
        require_out(json);
        require(w != nullptr, "NULL witness");
        *json = dup_string(io::witness_to_json(w->w));
    });
}

spid_status spid_relative_sq_error(const spid_matrix* estimate, const spid_matrix* truth, double* out) {
    return guarded([&] {
        require(estimate && truth && out, "NULL argument");
        *out = relative_sq_error(estimate->m, truth->m);
    });
}

/* harness */

spid_status spid_config_check(const char* json_text) {
    return guarded([&] {
        require(json_text != nullptr, "NULL config text");
        (void)parse_config(json_text);
    });
}

spid_status spid_sweep_run(const char* json_text, int threads, const char* sweep_csv_path,
                           const char* trials_csv_path, int include_timing) {
    return guarded([&] {
        require(json_text && sweep_csv_path, "NULL argument");
        const ExperimentConfig cfg = parse_config(json_text);
        const SweepResult res = run_sweep(cfg, threads);
        auto write = [](const char* path, auto&& emit) {
            std::ofstream os(path, std::ios::binary);
            if (!os) throw IoError(std::string("cannot open '") + path + "' for writing");
            emit(os);
            if (!os.flush()) throw IoError(std::string("write to '") + path + "' failed");
        };
        write(sweep_csv_path, [&](std::ostream& os) { write_sweep_csv(os, res.rows); });
        if (trials_csv_path) {
            write(trials_csv_path, [&](std::ostream& os) { write_trials_csv(os, res.trials, include_timing != 0); });
        }
    });
}

int spid_default_threads(void) { return default_thread_count(); }

}  // extern "C"
