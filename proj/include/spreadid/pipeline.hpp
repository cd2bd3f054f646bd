// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>

#include "spreadid/model.hpp"
#include "spreadid/probing.hpp"

namespace spreadid {

struct NoiseMeta {
    double snr_db = 0.0;
    double noise_power = 0.0;  // per-sample variance sigma^2
    std::uint64_t seed = 0;
};

/// Samples y[n] = y(n/B), n = 0..E*D*L-1, of the operator's response.
class ReceivedSignal {
public:
    ReceivedSignal(GridParams grid, CVector y, std::optional<NoiseMeta> noise = std::nullopt);

    const GridParams& grid() const { return grid_; }
    const CVector& samples() const { return y_; }
    const std::optional<NoiseMeta>& noise() const { return noise_; }

private:
    GridParams grid_;
    CVector y_;
    std::optional<NoiseMeta> noise_;
};

/// L x E*D matrix Z of measurement vectors; column n*D + r holds z[n, r].
struct MeasurementEnsemble {
    GridParams grid;
    CMatrix Z;
};

/// One period (length E*L) of the sampled probing signal:
/// x[E*k] = c_{-k}, zero between the strides.
CVector probe_samples(const ProbingSequence& c, const GridParams& grid);

/// y[n] = (1/BV) sum_{r,l} s(r, l) x[(n - r) mod EL] e^{j 2 pi l n / (BV)}.
ReceivedSignal simulate(const DiscreteSpreadingFunction& sf, const ProbingSequence& c);

/// Adds CN(0, sigma^2) noise with sigma^2 = (||y||^2 / len) 10^{-snr_db/10}.
/// An infinite SNR returns the signal unchanged. `seed` is recorded in the
/// noise metadata only; the draws come from `rng`.
ReceivedSignal add_noise(const ReceivedSignal& y, double snr_db, Rng& rng, std::uint64_t seed = 0);

/// Discrete Zak transform with parameters (E*L, D):
/// Z[n, r] = (1/D) sum_q y[n + E*L*q] e^{-j 2 pi q r / D}, shape (E*L) x D.
CMatrix discrete_zak(const ReceivedSignal& y);

/// Row p, column n*D+r: B*V * zak(n + E*p, r) * e^{-j 2 pi r p / (D*L)}.
/// The B*V factor undoes the 1/(BV) in the sampled response so that the
/// result factors exactly as Z = A_c * S.
MeasurementEnsemble assemble_Z(const CMatrix& zak, const GridParams& grid);

/// discrete_zak followed by assemble_Z.
MeasurementEnsemble measure(const ReceivedSignal& y);

}  // namespace spreadid
