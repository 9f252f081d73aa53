#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "aircomp/io_json.hpp"
#include "aircomp/mimo.hpp"
#include "aircomp/power_control.hpp"

using namespace aircomp;

namespace {

MatC random_orthonormal(int rows, int cols, Stream& rng) {
    MatC X(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) X(i, j) = rng.complex_normal(1.0);
    Eigen::HouseholderQR<MatC> qr(X);
    return qr.householderQ() * MatC::Identity(rows, cols);
}

void expect_invariants(const MimoScenario& sc, const BeamformerSet& bf) {
    EXPECT_LE((bf.F.adjoint() * bf.F - MatC::Identity(sc.Q, sc.Q)).norm(), 1e-10);
    for (int k = 0; k < sc.K(); ++k) {
        const MatC id = bf.A().adjoint() * sc.H[static_cast<std::size_t>(k)] * bf.B[static_cast<std::size_t>(k)];
        EXPECT_LE((id - MatC::Identity(sc.Q, sc.Q)).norm(), 1e-8) << "k=" << k;
        EXPECT_LE(bf.B[static_cast<std::size_t>(k)].squaredNorm(), sc.P0 + 1e-9) << "k=" << k;
    }
}

} // namespace

TEST(Mimo, SingleStreamSingleNodeIsScalarInversion) {
    MimoScenario sc;
    sc.Nr = 3;
    sc.Nt = 1;
    sc.Q = 1;
    sc.P0 = 2.0;
    VecC h(3);
    h << cplx{1.0, 1.0}, cplx{0.0, -2.0}, cplx{0.5};
    sc.H = {h};
    const auto bf = aggregation_beamformer(sc);
    // F = h / |h| up to a unit phase
    EXPECT_NEAR(std::abs((bf.F.adjoint() * h)(0)), h.norm(), 1e-12);
    EXPECT_NEAR(bf.eta, 1.0 / (sc.P0 * h.squaredNorm()), 1e-12);
    expect_invariants(sc, bf);
}

TEST(Mimo, SingleNodeSpansTopLeftSingularSubspace) {
    Stream rng(3);
    const auto sc = random_mimo_scenario(1, 5, 3, 2, rng);
    const auto bf = aggregation_beamformer(sc);
    Eigen::JacobiSVD<MatC> svd(sc.H[0], Eigen::ComputeFullU);
    const MatC U = svd.matrixU().leftCols(2);
    // same subspace: projector difference vanishes
    EXPECT_LE((bf.F * bf.F.adjoint() - U * U.adjoint()).norm(), 1e-10);
}

TEST(Mimo, ClosedFormBeatsRandomSearch) {
    Stream rng(17);
    const auto sc = random_mimo_scenario(3, 4, 2, 2, rng);
    const auto bf = aggregation_beamformer(sc);
    const MatC G = subspace_weight_matrix(sc);
    // independent G: lambda_min over the top-Q singular values times U_k U_k^H
    MatC G2 = MatC::Zero(4, 4);
    for (const auto& h : sc.H) {
        Eigen::BDCSVD<MatC> svd(h, Eigen::ComputeThinU);
        const MatC U = svd.matrixU().leftCols(2);
        G2 += std::pow(svd.singularValues()(1), 2) * U * U.adjoint();
    }
    EXPECT_LE((G - G2).norm(), 1e-10 * G.norm());
    const double best = subspace_objective(G, bf.F);
    Stream search(18);
    double beaten = 0.0;
    for (int i = 0; i < 100000; ++i) beaten = std::max(beaten, subspace_objective(G, random_orthonormal(4, 2, search)) - best);
    EXPECT_LE(beaten, 1e-6);
}

TEST(Mimo, InvariantsOverRandomScenarios) {
    Stream rng(21);
    for (int t = 0; t < 1000; ++t) {
        const int Q = 1 + static_cast<int>(rng.uniform_int(0, 1));
        const int Nt = Q + static_cast<int>(rng.uniform_int(0, 2));
        const int Nr = Q + static_cast<int>(rng.uniform_int(0, 3));
        const int K = 1 + static_cast<int>(rng.uniform_int(0, 5));
        auto sc = random_mimo_scenario(K, Nr, Nt, Q, rng, rng.uniform(0.5, 2.0), 0.0);
        const auto bf = aggregation_beamformer(sc);
        expect_invariants(sc, bf);
        if (::testing::Test::HasFailure()) break;
        // noise-free end-to-end recovery
        std::vector<VecC> s;
        VecC truth = VecC::Zero(Q);
        for (int k = 0; k < K; ++k) {
            VecC v(Q);
            for (int q = 0; q < Q; ++q) v(q) = rng.complex_normal(1.0);
            truth += v;
            s.push_back(v);
        }
        Stream n(0);
        EXPECT_LE((mimo_transmit_receive(s, sc, bf, n) - truth).norm(), 1e-8 * (1.0 + truth.norm()));
    }
}

TEST(Mimo, MseFormulaEdgeCases) {
    Stream rng(4);
    auto sc = random_mimo_scenario(3, 4, 2, 2, rng, 1.0, 0.1);
    auto bf = aggregation_beamformer(sc);
    EXPECT_NEAR(mimo_mse(sc, bf), sc.noise_variance * bf.eta * sc.Q, 1e-10);
    for (auto& b : bf.B) b.setZero();
    sc.noise_variance = 0.0;
    EXPECT_NEAR(mimo_mse(sc, bf), sc.K() * sc.Q, 1e-12);
}

TEST(Mimo, MonteCarloMseMatchesFormula) {
    Stream rng(8);
    auto sc = random_mimo_scenario(3, 4, 3, 2, rng, 1.0, 0.2);
    auto bf = aggregation_beamformer(sc);
    // detune node 0 so the misalignment term is live
    bf.B[0] *= 0.8;
    const double want = mimo_mse(sc, bf);
    const int n = 10000;
    double m = 0.0, m2 = 0.0;
    Stream data(9), noise(10);
    for (int t = 0; t < n; ++t) {
        std::vector<VecC> s;
        VecC truth = VecC::Zero(2);
        for (int k = 0; k < 3; ++k) {
            VecC v(2);
            for (int q = 0; q < 2; ++q) v(q) = data.complex_normal(1.0);
            truth += v;
            s.push_back(v);
        }
        const double e = (mimo_transmit_receive(s, sc, bf, noise) - truth).squaredNorm();
        m += e;
        m2 += e * e;
    }
    m /= n;
    EXPECT_NEAR(m, want, 3.0 * std::sqrt((m2 / n - m * m) / n));
}

TEST(Mimo, NoiseOnlyOutputCovariance) {
    Stream rng(30);
    auto sc = random_mimo_scenario(2, 4, 2, 2, rng, 1.0, 0.5);
    const auto bf = aggregation_beamformer(sc);
    const std::vector<VecC> zero(2, VecC::Zero(2));
    MatC C = MatC::Zero(2, 2);
    Stream noise(31);
    const int n = 100000;
    for (int t = 0; t < n; ++t) {
        const VecC y = mimo_transmit_receive(zero, sc, bf, noise);
        C += y * y.adjoint();
    }
    C /= static_cast<double>(n);
    const MatC want = bf.eta * sc.noise_variance * MatC::Identity(2, 2);
    EXPECT_LE((C - want).norm(), 0.02 * want.norm());
}

TEST(Mimo, TwoRankOneChannelsBetweenAndOrthogonalLimit) {
    MimoScenario sc;
    sc.Nr = 2;
    sc.Nt = 1;
    sc.Q = 1;
    VecC h1(2), h2(2);
    h1 << 1.0, 0.0;
    h2 << std::cos(1.0), std::sin(1.0);
    sc.H = {h1, 1.5 * h2};
    const auto bf = aggregation_beamformer(sc);
    const double c1 = std::abs((bf.F.adjoint() * h1)(0)), c2 = std::abs((bf.F.adjoint() * h2)(0));
    EXPECT_GT(c1, 0.1);
    EXPECT_GT(c2, 0.1);
    // orthogonal subspaces: the top eigenvector picks one axis and the other node is nulled
    VecC e2(2);
    e2 << 0.0, 1.0;
    sc.H = {h1, 1.5 * e2};
    EXPECT_THROW(aggregation_beamformer(sc), NumericalFailure);
}

TEST(Mimo, SingleAntennaMatchesFullInversion) {
    Stream rng(40);
    for (int t = 0; t < 50; ++t) {
        auto sc = random_mimo_scenario(5, 1, 1, 1, rng, 1.3);
        const auto bf = aggregation_beamformer(sc);
        std::vector<double> h, P(5, 1.3);
        for (const auto& m : sc.H) h.push_back(std::abs(m(0, 0)));
        const auto pol = solve_optimal_policy(h, P, 0.0);
        EXPECT_NEAR(bf.eta, 1.0 / pol.eta, 1e-12 / pol.eta);
    }
}

TEST(Mimo, ColumnPhaseConvention) {
    Stream rng(50);
    const auto bf = aggregation_beamformer(random_mimo_scenario(2, 4, 2, 2, rng));
    for (int c = 0; c < bf.F.cols(); ++c) {
        Eigen::Index idx = 0;
        bf.F.col(c).cwiseAbs().maxCoeff(&idx);
        EXPECT_NEAR(bf.F(idx, c).imag(), 0.0, 1e-14);
        EXPECT_GT(bf.F(idx, c).real(), 0.0);
    }
}

TEST(Mimo, Validation) {
    Stream rng(60);
    auto sc = random_mimo_scenario(2, 3, 2, 3, rng);
    EXPECT_THROW(sc.validate(), InvalidInput);
    MimoScenario r;
    r.Nr = 2;
    r.Nt = 2;
    r.Q = 2;
    r.H = {MatC::Ones(2, 2)}; // rank 1
    EXPECT_THROW(aggregation_beamformer(r), ConstraintViolation);
}

TEST(Mimo, JsonRoundTrip) {
    Stream rng(70);
    const auto sc = random_mimo_scenario(2, 3, 2, 2, rng, 1.5, 0.1);
    const auto back = mimo_from_json(to_json(sc));
    ASSERT_EQ(back.K(), 2);
    EXPECT_EQ(back.Q, 2);
    EXPECT_EQ(back.P0, 1.5);
    EXPECT_LE((back.H[1] - sc.H[1]).norm(), 1e-15);
}
