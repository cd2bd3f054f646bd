// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <vector>

#include "spreadid/types.hpp"

namespace spreadid {

/// Discretization geometry of the delay-Doppler plane.
///
/// The plane [0, T*L) x [0, 1/T) is tiled by L x L cells of size T x 1/(T*L).
/// Each cell is sampled E times in delay (rate B = E/T) and D times in Doppler
/// (resolution 1/V with V = D*T*L), so a received-signal block has B*V = E*D*L
/// samples and the spreading function lives on an (E*L) x (D*L) grid.
class GridParams {
public:
    /// Throws ValidationError unless L >= 2, E >= 1, D >= 1, T > 0 and, when
    /// `require_prime_L` is set, L is prime.
    static GridParams make(int L, int E, int D, double T = 1.0, bool require_prime_L = true);

    int L() const { return L_; }
    int E() const { return E_; }
    int D() const { return D_; }
    double T() const { return T_; }

    double bandwidth() const { return static_cast<double>(E_) / T_; }
    double window() const { return static_cast<double>(D_) * T_ * static_cast<double>(L_); }
    double tau_max() const { return T_ * static_cast<double>(L_); }
    double nu_max() const { return 1.0 / T_; }

    /// B*V = E*D*L, the received-signal length.
    int samples_total() const { return E_ * D_ * L_; }
    int delay_grid() const { return E_ * L_; }
    int doppler_grid() const { return D_ * L_; }
    /// E*D, which is also the number of MMV measurement vectors.
    int samples_per_cell() const { return E_ * D_; }
    int cell_count() const { return L_ * L_; }

    bool operator==(const GridParams&) const = default;

private:
    GridParams(int L, int E, int D, double T) : L_(L), E_(E), D_(D), T_(T) {}
    int L_;
    int E_;
    int D_;
    double T_;
};

bool is_prime(int n);

struct Cell {
    int k = 0;  // delay cell index
    int m = 0;  // Doppler cell index
    auto operator<=>(const Cell&) const = default;
};

/// Set of active cells Gamma. Stored sorted by the column index k*L + m.
class SupportSet {
public:
    SupportSet() = default;
    /// Throws ValidationError on duplicates or indices outside [0, L).
    SupportSet(int L, std::vector<Cell> cells);
    static SupportSet from_indices(int L, std::vector<int> column_indices);
    static SupportSet full(int L);

    int L() const { return L_; }
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    const std::vector<Cell>& cells() const { return cells_; }
    /// Column indices k*L + m, ascending.
    std::vector<int> indices() const;
    bool contains(Cell c) const;

    bool operator==(const SupportSet&) const = default;

private:
    int L_ = 0;
    std::vector<Cell> cells_;
};

/// Complex samples on the (E*L) x (D*L) delay-Doppler grid; zero outside the
/// active cells.
class DiscreteSpreadingFunction {
public:
    /// Throws ValidationError if `samples` has the wrong shape or is nonzero
    /// outside `support`.
    DiscreteSpreadingFunction(GridParams grid, CMatrix samples, SupportSet support);
    static DiscreteSpreadingFunction zero(GridParams grid);

    const GridParams& grid() const { return grid_; }
    const CMatrix& samples() const { return samples_; }
    const SupportSet& support() const { return support_; }

private:
    GridParams grid_;
    CMatrix samples_;
    SupportSet support_;
};

/// Uniformly random subset of the L*L cells with exactly `cardinality` elements.
SupportSet random_support(const GridParams& grid, int cardinality, Rng& rng);

/// i.i.d. CN(0,1) samples inside every active cell, exact zeros elsewhere.
DiscreteSpreadingFunction random_spreading(const GridParams& grid, const SupportSet& support,
                                           Rng& rng);

/// MMV unknown matrix S (L^2 x E*D): row k*L+m, column n*D+r holds the sample
/// at ((n + E*k), (r + D*m)) times e^{j 2 pi n (r + D*m) / (E*D*L)}.
CMatrix pack_unknowns(const DiscreteSpreadingFunction& sf);

/// Inverse of pack_unknowns. Rows outside `support` are ignored.
DiscreteSpreadingFunction unpack_unknowns(const CMatrix& S, const GridParams& grid,
                                          const SupportSet& support);

/// Same, with the support taken as the set of nonzero rows of S.
DiscreteSpreadingFunction unpack_unknowns(const CMatrix& S, const GridParams& grid);

}  // namespace spreadid
