// SPDX-License-Identifier: Apache-2.0
#include "spreadid/model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numeric>
#include <string>

#include "spreadid/errors.hpp"

namespace spreadid {

namespace {

std::mutex g_sink_mutex;
WarningSink g_sink;

}  // namespace

void set_warning_sink(WarningSink sink) {
    std::lock_guard lock(g_sink_mutex);
    g_sink = std::move(sink);
}

void warn(std::string_view message) {
    std::lock_guard lock(g_sink_mutex);
    if (g_sink) {
        g_sink(message);
    } else {
        std::cerr << "spreadid: warning: " << message << '\n';
    }
}

bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; d * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

GridParams GridParams::make(int L, int E, int D, double T, bool require_prime_L) {
    if (L < 2) throw ValidationError("grid: L must be >= 2, got " + std::to_string(L));
    if (E < 1) throw ValidationError("grid: E must be >= 1, got " + std::to_string(E));
    if (D < 1) throw ValidationError("grid: D must be >= 1, got " + std::to_string(D));
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("grid: T must be positive and finite");
    if (require_prime_L && !is_prime(L)) {
        throw ValidationError("grid: L = " + std::to_string(L) +
                              " is not prime (pass require_prime_L = false to allow it)");
    }
    return GridParams(L, E, D, T);
}

SupportSet::SupportSet(int L, std::vector<Cell> cells) : L_(L), cells_(std::move(cells)) {
    if (L < 1) throw ValidationError("support: L must be positive");
    for (const Cell& c : cells_) {
        if (c.k < 0 || c.k >= L || c.m < 0 || c.m >= L) {
            throw ValidationError("support: cell (" + std::to_string(c.k) + ", " +
                                  std::to_string(c.m) + ") outside [0, " + std::to_string(L) + ")");
        }
    }
    std::sort(cells_.begin(), cells_.end());
    if (std::adjacent_find(cells_.begin(), cells_.end()) != cells_.end()) {
        throw ValidationError("support: duplicate cell");
    }
}

SupportSet SupportSet::from_indices(int L, std::vector<int> column_indices) {
    std::vector<Cell> cells;
    cells.reserve(column_indices.size());
    for (int idx : column_indices) {
        if (idx < 0 || idx >= L * L) {
            throw ValidationError("support: column index " + std::to_string(idx) + " out of range");
        }
        cells.push_back({idx / L, idx % L});
    }
    return SupportSet(L, std::move(cells));
}

SupportSet SupportSet::full(int L) {
    std::vector<int> idx(static_cast<std::size_t>(L) * L);
    std::iota(idx.begin(), idx.end(), 0);
    return from_indices(L, std::move(idx));
}

std::vector<int> SupportSet::indices() const {
    std::vector<int> out;
    out.reserve(cells_.size());
    for (const Cell& c : cells_) out.push_back(c.k * L_ + c.m);
    return out;
}

bool SupportSet::contains(Cell c) const {
    return std::binary_search(cells_.begin(), cells_.end(), c);
}

DiscreteSpreadingFunction::DiscreteSpreadingFunction(GridParams grid, CMatrix samples,
                                                     SupportSet support)
    : grid_(grid), samples_(std::move(samples)), support_(std::move(support)) {
    if (samples_.rows() != grid_.delay_grid() || samples_.cols() != grid_.doppler_grid()) {
        throw ValidationError("spreading function: sample array must be (E*L) x (D*L)");
    }
    if (support_.L() != grid_.L()) {
        throw ValidationError("spreading function: support and grid disagree on L");
    }
    const int E = grid_.E();
    const int D = grid_.D();
    for (Eigen::Index l = 0; l < samples_.cols(); ++l) {
        for (Eigen::Index r = 0; r < samples_.rows(); ++r) {
            if (samples_(r, l) != cplx(0.0) &&
                !support_.contains({static_cast<int>(r) / E, static_cast<int>(l) / D})) {
                throw ValidationError("spreading function: nonzero sample outside the support");
            }
        }
    }
}

DiscreteSpreadingFunction DiscreteSpreadingFunction::zero(GridParams grid) {
    return DiscreteSpreadingFunction(grid, CMatrix::Zero(grid.delay_grid(), grid.doppler_grid()),
                                     SupportSet(grid.L(), {}));
}

SupportSet random_support(const GridParams& grid, int cardinality, Rng& rng) {
    const int cells = grid.cell_count();
    if (cardinality < 0 || cardinality > cells) {
        throw ValidationError("random_support: cardinality " + std::to_string(cardinality) +
                              " outside [0, " + std::to_string(cells) + "]");
    }
    std::vector<int> all(static_cast<std::size_t>(cells));
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(cardinality));
    std::sample(all.begin(), all.end(), std::back_inserter(chosen), cardinality, rng);
    return SupportSet::from_indices(grid.L(), std::move(chosen));
}

DiscreteSpreadingFunction random_spreading(const GridParams& grid, const SupportSet& support,
                                           Rng& rng) {
    if (support.L() != grid.L()) throw ValidationError("random_spreading: L mismatch");
    CMatrix samples = CMatrix::Zero(grid.delay_grid(), grid.doppler_grid());
    const int E = grid.E();
    const int D = grid.D();
    for (const Cell& c : support.cells()) {
        for (int b = 0; b < D; ++b) {
            for (int a = 0; a < E; ++a) {
                samples(a + E * c.k, b + D * c.m) = complex_gaussian(rng);
            }
        }
    }
    return DiscreteSpreadingFunction(grid, std::move(samples), support);
}

CMatrix pack_unknowns(const DiscreteSpreadingFunction& sf) {
    const GridParams& g = sf.grid();
    const int L = g.L();
    const int E = g.E();
    const int D = g.D();
    const std::int64_t N = g.samples_total();
    CMatrix S = CMatrix::Zero(g.cell_count(), g.samples_per_cell());
    for (const Cell& c : sf.support().cells()) {
        const int row = c.k * L + c.m;
        for (int n = 0; n < E; ++n) {
            for (int r = 0; r < D; ++r) {
                S(row, n * D + r) = sf.samples()(n + E * c.k, r + D * c.m) *
                                    unit_phase(static_cast<std::int64_t>(n) * (r + D * c.m), N);
            }
        }
    }
    return S;
}

DiscreteSpreadingFunction unpack_unknowns(const CMatrix& S, const GridParams& g,
                                          const SupportSet& support) {
    if (S.rows() != g.cell_count() || S.cols() != g.samples_per_cell()) {
        throw ValidationError("unpack_unknowns: S must be L^2 x E*D");
    }
    const int L = g.L();
    const int E = g.E();
    const int D = g.D();
    const std::int64_t N = g.samples_total();
    CMatrix samples = CMatrix::Zero(g.delay_grid(), g.doppler_grid());
    for (const Cell& c : support.cells()) {
        const int row = c.k * L + c.m;
        for (int n = 0; n < E; ++n) {
            for (int r = 0; r < D; ++r) {
                samples(n + E * c.k, r + D * c.m) =
                    S(row, n * D + r) *
                    unit_phase(-static_cast<std::int64_t>(n) * (r + D * c.m), N);
            }
        }
    }
    return DiscreteSpreadingFunction(g, std::move(samples), support);
}

DiscreteSpreadingFunction unpack_unknowns(const CMatrix& S, const GridParams& g) {
    if (S.rows() != g.cell_count()) throw ValidationError("unpack_unknowns: S must have L^2 rows");
    std::vector<int> rows;
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
        if (!S.row(i).isZero(0.0)) rows.push_back(static_cast<int>(i));
    }
    return unpack_unknowns(S, g, SupportSet::from_indices(g.L(), std::move(rows)));
}

}  // namespace spreadid
