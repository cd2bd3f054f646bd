// SPDX-License-Identifier: Apache-2.0
#include "spreadid/pipeline.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "spreadid/errors.hpp"

namespace spreadid {

ReceivedSignal::ReceivedSignal(GridParams grid, CVector y, std::optional<NoiseMeta> noise)
    : grid_(grid), y_(std::move(y)), noise_(noise) {
    if (y_.size() != grid_.samples_total()) {
        throw ValidationError("received signal: length " + std::to_string(y_.size()) +
                              " differs from E*D*L = " + std::to_string(grid_.samples_total()));
    }
}

CVector probe_samples(const ProbingSequence& c, const GridParams& grid) {
    if (c.L() != grid.L()) throw ValidationError("probe_samples: probing length differs from L");
    CVector x = CVector::Zero(grid.delay_grid());
    for (int k = 0; k < grid.L(); ++k) x(grid.E() * k) = c.at(-k);
    return x;
}

ReceivedSignal simulate(const DiscreteSpreadingFunction& sf, const ProbingSequence& c) {
    const GridParams& g = sf.grid();
    if (c.L() != g.L()) {
        throw ValidationError("simulate: probing length " + std::to_string(c.L()) +
                              " differs from grid L = " + std::to_string(g.L()));
    }
    const int L = g.L();
    const int E = g.E();
    const int D = g.D();
    const std::int64_t N = g.samples_total();

    std::vector<cplx> twiddle(static_cast<std::size_t>(N));
    for (std::int64_t t = 0; t < N; ++t) twiddle[static_cast<std::size_t>(t)] = unit_phase(t, N);

    // x[(n - r) mod EL] is nonzero only for n = (r mod E) + E*j, where it
    // equals c_{(floor(r/E) - j) mod L}. Iterate over those n directly, with
    // the coefficient and twiddle indices advanced incrementally.
    CVector y = CVector::Zero(N);
    const int rows_per_n = D * L;
    // s * c_i for every coefficient, refreshed per sample.
    std::vector<cplx> scaled(static_cast<std::size_t>(L));
    cplx* out = y.data();
    for (const Cell& cell : sf.support().cells()) {
        for (int b = 0; b < D; ++b) {
            const std::int64_t l = b + static_cast<std::int64_t>(D) * cell.m;
            const std::int64_t step = (l * E) % N;
            for (int a = 0; a < E; ++a) {
                const cplx s = sf.samples()(a + E * cell.k, l);
                if (s == cplx(0.0)) continue;
                for (int i = 0; i < L; ++i) scaled[static_cast<std::size_t>(i)] = s * c.coefficients()(i);
                std::int64_t tw = (l * a) % N;
                int ci = cell.k;
                cplx* dst = out + a;
                for (int j = 0; j < rows_per_n; ++j, dst += E) {
                    *dst += scaled[static_cast<std::size_t>(ci)] * twiddle[static_cast<std::size_t>(tw)];
                    tw += step;
                    if (tw >= N) tw -= N;
                    if (--ci < 0) ci += L;
                }
            }
        }
    }
    y /= static_cast<double>(N);
    return ReceivedSignal(g, std::move(y));
}

ReceivedSignal add_noise(const ReceivedSignal& y, double snr_db, Rng& rng, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0) return y;
    if (std::isnan(snr_db)) throw ValidationError("add_noise: SNR is NaN");
    const double len = static_cast<double>(y.samples().size());
    const double signal_power = y.samples().squaredNorm() / len;
    if (signal_power == 0.0) {
        throw ValidationError("add_noise: zero signal has no defined SNR");
    }
    const double sigma2 = signal_power * std::pow(10.0, -snr_db / 10.0);
    CVector noisy = y.samples();
    for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy(i) += complex_gaussian(rng, sigma2);
    return ReceivedSignal(y.grid(), std::move(noisy), NoiseMeta{snr_db, sigma2, seed});
}

CMatrix discrete_zak(const ReceivedSignal& y) {
    const GridParams& g = y.grid();
    const int EL = g.delay_grid();
    const int D = g.D();
    if (y.samples().size() != static_cast<Eigen::Index>(EL) * D) {
        throw ValidationError("discrete_zak: length must equal E*D*L");
    }
    std::vector<cplx> twiddle(static_cast<std::size_t>(D));
    for (int t = 0; t < D; ++t) twiddle[static_cast<std::size_t>(t)] = unit_phase(-t, D);

    CMatrix zak(EL, D);
    for (int r = 0; r < D; ++r) {
        for (int n = 0; n < EL; ++n) {
            cplx acc = 0.0;
            for (int q = 0; q < D; ++q) {
                acc += y.samples()(n + static_cast<Eigen::Index>(EL) * q) *
                       twiddle[static_cast<std::size_t>((q * r) % D)];
            }
            zak(n, r) = acc / static_cast<double>(D);
        }
    }
    return zak;
}

MeasurementEnsemble assemble_Z(const CMatrix& zak, const GridParams& g) {
    const int L = g.L();
    const int E = g.E();
    const int D = g.D();
    if (zak.rows() != g.delay_grid() || zak.cols() != D) {
        throw ValidationError("assemble_Z: Zak array must be (E*L) x D");
    }
    const double scale = static_cast<double>(g.samples_total());
    CMatrix Z(L, g.samples_per_cell());
    for (int p = 0; p < L; ++p) {
        for (int n = 0; n < E; ++n) {
            for (int r = 0; r < D; ++r) {
                Z(p, n * D + r) = scale * zak(n + E * p, r) *
                                  unit_phase(-static_cast<std::int64_t>(r) * p,
                                             static_cast<std::int64_t>(D) * L);
            }
        }
    }
    return {g, std::move(Z)};
}

MeasurementEnsemble measure(const ReceivedSignal& y) { return assemble_Z(discrete_zak(y), y.grid()); }

}  // namespace spreadid
