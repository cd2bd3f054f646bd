// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "spreadid/analysis.hpp"
#include "spreadid/errors.hpp"
#include "spreadid/solvers.hpp"

using namespace spreadid;

namespace {

struct Instance {
    GridParams grid;
    SupportSet support;
    DiscreteSpreadingFunction sf;
    MeasurementMatrix A;
    MeasurementEnsemble Z;
    CMatrix S;  // full L^2-row truth
};

Instance make_instance(int L, int E, int D, int card, Rng& rng, bool through_pipeline = false) {
    const GridParams g = GridParams::make(L, E, D);
    SupportSet s = random_support(g, card, rng);
    DiscreteSpreadingFunction sf = random_spreading(g, s, rng);
    MeasurementMatrix A = build_matrix(random_disc(L, rng));
    CMatrix S = pack_unknowns(sf);
    MeasurementEnsemble Z = through_pipeline ? measure(simulate(sf, A.source()))
                                             : MeasurementEnsemble{g, A.matrix() * S};
    return {g, std::move(s), std::move(sf), std::move(A), std::move(Z), std::move(S)};
}

SolverOptions top_k(int k) {
    SolverOptions o;
    o.music = MusicTopK{k};
    return o;
}

}  // namespace

TEST_CASE("estimate_rank") {
    const GridParams g = GridParams::make(5, 2, 2);
    CHECK(estimate_rank(MeasurementEnsemble{g, CMatrix::Zero(5, 4)}, 1e-8) == 0);

    Rng rng(1);
    const CVector a = CVector::Random(5);
    const CVector b = CVector::Random(4);
    CHECK(estimate_rank(MeasurementEnsemble{g, a * b.transpose()}, 1e-8) == 1);

    const Instance inst = make_instance(19, 3, 3, 8, rng, true);
    const int k = estimate_rank(inst.Z, 1e-8);
    CHECK(k == 8);
    CHECK(oracle::rank_by_elimination(inst.Z.Z, 1e-8) == 8);
    CHECK_THROWS_AS(estimate_rank(MeasurementEnsemble{g, CMatrix(0, 0)}, 1e-8), ValidationError);
}

TEST_CASE("noise-floor rank rule") {
    Rng rng(2);
    const Instance inst = make_instance(19, 19, 19, 4, rng);
    CMatrix noisy = inst.Z.Z;
    for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy(i) += complex_gaussian(rng, 1e-4);
    CHECK(estimate_rank_noise_floor(noisy) == 4);
    CHECK(estimate_rank_noise_floor(CMatrix::Zero(19, 5)) == 0);
}

TEST_CASE("MUSIC recovers the support noiselessly when rank(S) = |Gamma|") {
    Rng rng(3);
    const Instance inst = make_instance(19, 19, 1, 15, rng, true);
    const RecoveryResult r = mmv_music(inst.Z, inst.A, SolverOptions{});
    CHECK_FALSE(r.diagnostics.failed);
    CHECK(r.rank_hat == 15);
    CHECK(r.support_hat == inst.support);
    CHECK(relative_sq_error(expand_rows(r.S_hat, r.support_hat), inst.S) < 1e-20);

    const RecoveryResult rk = mmv_music(inst.Z, inst.A, top_k(15));
    CHECK(rk.support_hat == inst.support);
}

TEST_CASE("MUSIC zero-score separation") {
    Rng rng(4);
    for (int card : {1, 6, 12, 18}) {
        for (int t = 0; t < 5; ++t) {
            const Instance inst = make_instance(19, 19, 1, card, rng);
            const RecoveryResult r = mmv_music(inst.Z, inst.A, top_k(card));
            double in_max = 0.0;
            double out_min = 1e300;
            for (int j = 0; j < 361; ++j) {
                const double s = r.diagnostics.column_scores(j);
                if (inst.support.contains({j / 19, j % 19})) in_max = std::max(in_max, s);
                else out_min = std::min(out_min, s);
            }
            CHECK(out_min >= 1e6 * in_max);
            CHECK(r.support_hat == inst.support);
        }
    }
}

TEST_CASE("MUSIC on Z = 0 sees a full noise subspace") {
    Rng rng(5);
    const GridParams g = GridParams::make(5, 1, 2);
    const MeasurementMatrix A = build_matrix(random_disc(5, rng));
    SolverOptions o;
    o.music = MusicThreshold{0.5};
    const RecoveryResult r = mmv_music(MeasurementEnsemble{g, CMatrix::Zero(5, 2)}, A, o);
    CHECK(r.rank_hat == 0);
    CHECK(r.support_hat.empty());
    for (Eigen::Index j = 0; j < r.diagnostics.column_scores.size(); ++j) {
        CHECK(r.diagnostics.column_scores(j) == doctest::Approx(1.0));
    }
}

TEST_CASE("MUSIC fails when E*D < |Gamma|") {
    Rng rng(6);
    int exact = 0;
    for (int t = 0; t < 10; ++t) {
        const Instance inst = make_instance(19, 2, 2, 10, rng);
        const RecoveryResult r = mmv_music(inst.Z, inst.A, top_k(10));
        CHECK(r.rank_hat == 4);
        exact += r.support_hat == inst.support;
    }
    CHECK(exact == 0);
}

TEST_CASE("MUSIC declares failure without a noise subspace") {
    Rng rng(7);
    const GridParams g = GridParams::make(5, 5, 1);
    const MeasurementMatrix A = build_matrix(random_disc(5, rng));
    const CMatrix Z = CMatrix::Random(5, 5);
    const RecoveryResult r = mmv_music(MeasurementEnsemble{g, Z}, A, top_k(3));
    CHECK(r.diagnostics.failed);
    CHECK(r.support_hat.empty());
    CHECK(r.rank_hat == 5);
    CHECK(r.diagnostics.singular_values.size() == 5);

    const Instance inst = make_instance(5, 2, 1, 1, rng);
    const RecoveryResult wide = mmv_music(inst.Z, inst.A, top_k(7));
    CHECK(wide.support_hat.size() == 7);
    CHECK(wide.diagnostics.warnings.size() >= 1);
}

TEST_CASE("OMP basics") {
    Rng rng(8);
    const GridParams g = GridParams::make(5, 1, 3);
    const MeasurementMatrix A = build_matrix(random_disc(5, rng));

    const CVector gvec = CVector::Random(3);
    const CMatrix Z = A.matrix().col(13) * gvec.transpose();
    const RecoveryResult r = mmv_omp(MeasurementEnsemble{g, Z}, A, SolverOptions{});
    CHECK(r.support_hat.indices() == std::vector<int>{13});
    CHECK(r.diagnostics.iterations == 1);
    CHECK(r.diagnostics.residual_fro <= 1e-12 * Z.norm());

    const RecoveryResult zero = mmv_omp(MeasurementEnsemble{g, CMatrix::Zero(5, 3)}, A, SolverOptions{});
    CHECK(zero.support_hat.empty());
    CHECK(zero.diagnostics.iterations == 0);
}

TEST_CASE("OMP agrees with the oracle at trivial sparsity") {
    Rng rng(9);
    for (int t = 0; t < 10; ++t) {
        const Instance inst = make_instance(5, 1, 1, 1, rng, true);
        const RecoveryResult omp = mmv_omp(inst.Z, inst.A, SolverOptions{});
        const RecoveryResult p0 = p0_oracle(inst.Z, inst.A, 5, 1e-9);
        CHECK(omp.support_hat == inst.support);
        CHECK(p0.support_hat == inst.support);
        CHECK(p0.diagnostics.unique == std::optional<bool>(true));
        CHECK((omp.S_hat - p0.S_hat).norm() <= 1e-10 * p0.S_hat.norm());
    }
}

TEST_CASE("OMP residual never increases") {
    Rng rng(10);
    for (int t = 0; t < 10; ++t) {
        const Instance inst = make_instance(19, 3, 2, 12, rng);
        CMatrix Z = inst.Z.Z;
        for (Eigen::Index i = 0; i < Z.size(); ++i) Z(i) += complex_gaussian(rng, 1e-2);
        SolverOptions o;
        o.omp_max_support = 19;
        const RecoveryResult r = mmv_omp(MeasurementEnsemble{inst.grid, Z}, inst.A, o);
        const auto& h = r.diagnostics.residual_history;
        CHECK(h.size() == static_cast<std::size_t>(r.diagnostics.iterations) + 1);
        for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1] + 1e-12 * h[0]);
    }

    SolverOptions big;
    big.omp_max_support = 10;
    const Instance inst = make_instance(5, 1, 1, 2, rng);
    CHECK(mmv_omp(inst.Z, inst.A, big).diagnostics.warnings.size() == 1);
}

TEST_CASE("P0 oracle") {
    Rng rng(11);
    const GridParams g = GridParams::make(5, 1, 2);
    const MeasurementMatrix A = build_matrix(random_disc(5, rng));
    const RecoveryResult zero = p0_oracle(MeasurementEnsemble{g, CMatrix::Zero(5, 2)}, A, 5, 1e-9);
    CHECK(zero.support_hat.empty());
    CHECK(zero.diagnostics.unique == std::optional<bool>(true));

    // |Gamma| = 3, K = 2: 2*3 < 5 + 2, so the support is the unique sparsest one.
    for (int t = 0; t < 5; ++t) {
        const Instance inst = make_instance(5, 1, 2, 3, rng);
        REQUIRE(oracle::rank_by_elimination(inst.Z.Z) == 2);
        const RecoveryResult r = p0_oracle(inst.Z, inst.A, 5, 1e-9);
        CHECK(r.support_hat == inst.support);
        CHECK(r.diagnostics.unique == std::optional<bool>(true));
    }

    for (int K : {1, 3}) {
        const AmbiguityWitness w = ambiguous_instance(A, K, rng);
        const CMatrix Z = column_submatrix(A, w.gamma_prime) * w.B_gamma_prime;
        const RecoveryResult r = p0_oracle(MeasurementEnsemble{g, Z}, A, 5, 1e-9);
        CHECK(r.diagnostics.unique == std::optional<bool>(false));
        CHECK(r.support_hat.size() == w.gamma_prime.size());
    }

    const MeasurementMatrix big = build_matrix(random_disc(19, rng));
    const GridParams g19 = GridParams::make(19, 1, 1);
    CHECK_THROWS_AS(p0_oracle(MeasurementEnsemble{g19, CMatrix::Random(19, 1)}, big, 5, 1e-9), BudgetError);
}

TEST_CASE("reconstruct") {
    Rng rng(12);
    const Instance inst = make_instance(19, 2, 3, 12, rng);
    const CMatrix S_true = column_submatrix(inst.S.transpose(), inst.support).transpose();
    const CMatrix S_hat = reconstruct(inst.Z, inst.A, inst.support);
    CHECK((S_hat - S_true).norm() <= 1e-10 * S_true.norm());

    const CMatrix A_g = column_submatrix(inst.A, inst.support);
    CHECK((A_g * S_hat - inst.Z.Z).norm() <= 1e-10 * inst.Z.Z.norm());

    CHECK(reconstruct(MeasurementEnsemble{inst.grid, CMatrix::Zero(19, 6)}, inst.A, inst.support).isZero(0.0));

    CMatrix noisy = inst.Z.Z + 0.1 * CMatrix::Random(19, 6);
    const CMatrix S_ls = reconstruct(MeasurementEnsemble{inst.grid, noisy}, inst.A, inst.support);
    const CMatrix stationarity = A_g.adjoint() * (noisy - A_g * S_ls);
    CHECK(stationarity.norm() <= 1e-8 * (A_g.norm() * noisy.norm()));
}

TEST_CASE("spreading_from_result") {
    Rng rng(13);
    const Instance inst = make_instance(5, 2, 2, 3, rng, true);
    RecoveryResult r = p0_oracle(inst.Z, inst.A, 5, 1e-9);
    REQUIRE(r.support_hat == inst.support);
    const DiscreteSpreadingFunction back = spreading_from_result(r, inst.grid);
    CHECK((back.samples() - inst.sf.samples()).norm() <= 1e-10 * inst.sf.samples().norm());

    RecoveryResult empty;
    empty.support_hat = SupportSet(5, {});
    CHECK(spreading_from_result(empty, inst.grid).samples().isZero(0.0));

    // n = 0 columns of S_hat are the raw samples
    for (std::size_t i = 0; i < r.support_hat.size(); ++i) {
        const Cell c = r.support_hat.cells()[i];
        for (int rr = 0; rr < 2; ++rr) {
            CHECK(back.samples()(2 * c.k, rr + 2 * c.m) == r.S_hat(static_cast<Eigen::Index>(i), rr));
        }
    }
}

TEST_CASE("compressive recovery") {
    Rng rng(14);
    {
        const Instance inst = make_instance(5, 1, 1, 2, rng);
        SolverOptions o;
        const RecoveryResult full = recover(inst.Z, inst.A, SolverKind::oracle, o);
        const RecoveryResult comp = compressive_recover(inst.Z, inst.A, RowSubset::all(5), SolverKind::oracle, o);
        CHECK(full.support_hat == comp.support_hat);
        CHECK(full.diagnostics.unique == comp.diagnostics.unique);
        CHECK((full.S_hat - comp.S_hat).norm() <= 1e-12 * full.S_hat.norm());
        CHECK(comp.diagnostics.zak_rows_used == std::vector<int>{0, 1, 2, 3, 4});
    }
    for (int t = 0; t < 10; ++t) {
        const Instance inst = make_instance(5, 1, 1, 2, rng);
        const RecoveryResult r =
            compressive_recover(inst.Z, inst.A, RowSubset::prefix(5, 4), SolverKind::oracle, SolverOptions{});
        CHECK(r.support_hat == inst.support);
        CHECK(r.diagnostics.unique == std::optional<bool>(true));
        CHECK(relative_sq_error(expand_rows(r.S_hat, r.support_hat), inst.S) < 1e-18);
    }
    for (int t = 0; t < 5; ++t) {
        const Instance inst = make_instance(5, 1, 1, 2, rng);
        const RecoveryResult r =
            compressive_recover(inst.Z, inst.A, RowSubset::prefix(5, 2), SolverKind::oracle, SolverOptions{});
        CHECK(r.diagnostics.unique == std::optional<bool>(false));
    }
    {
        const Instance inst = make_instance(5, 2, 2, 3, rng);
        CHECK_THROWS_AS(compressive_recover(inst.Z, inst.A, RowSubset(5, {1, 3, 4}), SolverKind::music, SolverOptions{}),
                        NumericalError);
        const RecoveryResult r =
            compressive_recover(inst.Z, inst.A, RowSubset(5, {4, 1}), SolverKind::omp, SolverOptions{});
        CHECK(r.diagnostics.zak_rows_used == std::vector<int>{2, 3, 8, 9});
    }
}

TEST_CASE("solver options validation") {
    SolverOptions o;
    o.rank_tol = 0.0;
    CHECK_THROWS_AS(o.validate(5), ValidationError);
    o = SolverOptions{};
    o.music = MusicTopK{26};
    CHECK_THROWS_AS(o.validate(5), ValidationError);
    o = SolverOptions{};
    o.signal_dim = 6;
    CHECK_THROWS_AS(o.validate(5), ValidationError);
    CHECK(parse_solver_kind("omp") == SolverKind::omp);
    CHECK_THROWS_AS(parse_solver_kind("lasso"), ValidationError);
}
