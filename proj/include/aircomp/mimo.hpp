#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aircomp/error.hpp"
#include "aircomp/rng.hpp"

namespace aircomp {

using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

struct MimoScenario {
    int Nt = 1;
    int Nr = 1;
    int Q = 1;
    std::vector<MatC> H; // K matrices, Nr x Nt
    double P0 = 1.0;
    double noise_variance = 0.0;

    int K() const { return static_cast<int>(H.size()); }

    void validate() const {
        require(!H.empty(), "MIMO scenario without nodes");
        require(Q >= 1 && Q <= std::min(Nt, Nr), "stream count must be in [1, min(Nt, Nr)]");
        require(P0 > 0.0 && noise_variance >= 0.0, "bad power cap or noise");
        for (const auto& h : H) {
            require(h.rows() == Nr && h.cols() == Nt, "channel shape mismatch");
            Eigen::JacobiSVD<MatC> svd(h);
            const auto& sv = svd.singularValues();
            if (!(sv(Q - 1) > 1e-12 * std::max(1.0, sv(0)))) throw ConstraintViolation("channel rank below stream count");
        }
    }
};

inline MimoScenario random_mimo_scenario(int K, int Nr, int Nt, int Q, Stream& rng, double P0 = 1.0,
                                         double noise_variance = 0.0) {
    MimoScenario sc{Nt, Nr, Q, {}, P0, noise_variance};
    for (int k = 0; k < K; ++k) {
        MatC h(Nr, Nt);
        for (int i = 0; i < Nr; ++i)
            for (int j = 0; j < Nt; ++j) h(i, j) = rng.complex_normal(1.0);
        sc.H.push_back(std::move(h));
    }
    return sc;
}

struct BeamformerSet {
    MatC F;             // Nr x Q, orthonormal columns
    double eta = 0.0;
    std::vector<MatC> B; // Nt x Q per node

    MatC A() const { return std::sqrt(eta) * F; }
};

// Q-dimensional dominant left subspace and its weight (Q-th singular value squared).
struct Subspace {
    MatC U;
    double weight = 0.0;
};

inline Subspace channel_subspace(const MatC& H, int Q) {
    Eigen::JacobiSVD<MatC> svd(H, Eigen::ComputeFullU);
    const double s = svd.singularValues()(Q - 1);
    return {svd.matrixU().leftCols(Q), s * s};
}

inline MatC subspace_weight_matrix(const MimoScenario& sc) {
    MatC G = MatC::Zero(sc.Nr, sc.Nr);
    for (const auto& h : sc.H) {
        const Subspace s = channel_subspace(h, sc.Q);
        G += s.weight * s.U * s.U.adjoint();
    }
    return G;
}

// tr(F^H G F): what the closed form maximizes over orthonormal F.
inline double subspace_objective(const MatC& G, const MatC& F) { return (F.adjoint() * G * F).trace().real(); }

inline void fix_column_phases(MatC& F) {
    for (int c = 0; c < F.cols(); ++c) {
        Eigen::Index idx = 0;
        F.col(c).cwiseAbs().maxCoeff(&idx);
        const std::complex<double> z = F(idx, c);
        if (std::abs(z) > 0.0) F.col(c) *= std::conj(z) / std::abs(z);
    }
}

inline BeamformerSet zero_forcing(const MimoScenario& sc, const MatC& F, double eta) {
    BeamformerSet bf{F, eta, {}};
    const MatC A = bf.A();
    for (int k = 0; k < sc.K(); ++k) {
        const MatC AH = A.adjoint() * sc.H[static_cast<std::size_t>(k)];
        const MatC M = AH * AH.adjoint();
        Eigen::FullPivLU<MatC> lu(M);
        if (!lu.isInvertible()) throw NumericalFailure("singular aggregation system for node " + std::to_string(k));
        bf.B.push_back(AH.adjoint() * lu.inverse());
    }
    return bf;
}

inline BeamformerSet aggregation_beamformer(const MimoScenario& sc) {
    sc.validate();
    const MatC G = subspace_weight_matrix(sc);
    Eigen::SelfAdjointEigenSolver<MatC> es(G);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigendecomposition failed");
    // eigenvalues ascending; keep the top Q, largest first
    MatC F(sc.Nr, sc.Q);
    for (int c = 0; c < sc.Q; ++c) F.col(c) = es.eigenvectors().col(sc.Nr - 1 - c);
    fix_column_phases(F);

    double eta = 0.0;
    for (int k = 0; k < sc.K(); ++k) {
        const MatC FH = F.adjoint() * sc.H[static_cast<std::size_t>(k)];
        const MatC M = FH * FH.adjoint();
        Eigen::FullPivLU<MatC> lu(M);
        if (!lu.isInvertible()) throw NumericalFailure("singular F^H H H^H F for node " + std::to_string(k));
        eta = std::max(eta, lu.inverse().trace().real() / sc.P0);
    }
    if (!std::isfinite(eta) || eta <= 0.0) throw NumericalFailure("degenerate MIMO denoising factor");
    return zero_forcing(sc, F, eta);
}

// sum_k ||A^H H_k B_k - I||_F^2 + noise tr(A^H A).
inline double mimo_mse(const MimoScenario& sc, const BeamformerSet& bf) {
    const MatC A = bf.A();
    require(static_cast<int>(bf.B.size()) == sc.K(), "beamformer count != K");
    double acc = 0.0;
    const MatC I = MatC::Identity(sc.Q, sc.Q);
    for (int k = 0; k < sc.K(); ++k) {
        const MatC E = A.adjoint() * sc.H[static_cast<std::size_t>(k)] * bf.B[static_cast<std::size_t>(k)] - I;
        acc += E.squaredNorm();
    }
    return acc + sc.noise_variance * (A.adjoint() * A).trace().real();
}

// y = sum_k H_k B_k s_k + n, estimate A^H y.
inline VecC mimo_transmit_receive(const std::vector<VecC>& s, const MimoScenario& sc, const BeamformerSet& bf,
                                  Stream& noise) {
    require(static_cast<int>(s.size()) == sc.K(), "reading count != K");
    VecC y = VecC::Zero(sc.Nr);
    for (int k = 0; k < sc.K(); ++k) {
        require(s[static_cast<std::size_t>(k)].size() == sc.Q, "per-node vector length != Q");
        y += sc.H[static_cast<std::size_t>(k)] * (bf.B[static_cast<std::size_t>(k)] * s[static_cast<std::size_t>(k)]);
    }
    if (sc.noise_variance > 0.0)
        for (int i = 0; i < sc.Nr; ++i) y(i) += noise.complex_normal(sc.noise_variance);
    return bf.A().adjoint() * y;
}

} // namespace aircomp
