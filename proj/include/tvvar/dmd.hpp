#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "tvvar/dataset.hpp"
#include "tvvar/linalg.hpp"

namespace tvvar {

template <class Scalar>
using ComplexMatrix = Matrix<std::complex<Scalar>>;
template <class Scalar>
using ComplexVector = Vector<std::complex<Scalar>>;

template <class Scalar>
struct DmdResult {
    Eigen::Index rank = 0;
    ComplexVector<Scalar> eigenvalues;  // nonincreasing |λ|, conjugate pairs adjacent
    ComplexMatrix<Scalar> modes;        // N x R spatial modes Φ
    ComplexVector<Scalar> amplitudes;   // b = Φ^+ s_1
    ComplexMatrix<Scalar> temporal;     // (T-1) x R, temporal(t, k) = b_k λ_k^t
    Vector<Scalar> singular_values;     // of the truncated snapshot matrix
};

// Exact DMD on snapshot pairs (s_t, s_{t+1}).
template <class Scalar>
DmdResult<Scalar> fit_dmd(const TimeSeries<Scalar>& series, Eigen::Index R) {
    using Complex = std::complex<Scalar>;
    const Eigen::Index N = series.N();
    const Eigen::Index T = series.T();
    if (R < 1 || R > std::min(N, T - 1))
        throw ParameterError("DMD rank R=" + std::to_string(R) + " must satisfy 1 <= R <= min(N, T-1) = " +
                             std::to_string(std::min(N, T - 1)));
    const auto S1 = series.values().leftCols(T - 1);
    const auto S2 = series.values().rightCols(T - 1);

    const auto svd = truncated_svd(S1, R);
    const Scalar floor = static_cast<Scalar>(std::max(N, T - 1)) * std::numeric_limits<Scalar>::epsilon() *
                         svd.s(0);
    if (!(svd.s(R - 1) > floor))
        throw RankError("DMD: singular value " + std::to_string(R) +
                        " of the snapshot matrix is numerically zero; use a smaller rank");

    const Matrix<Scalar> projected = S2 * svd.Vt.transpose() * svd.s.cwiseInverse().asDiagonal();
    const Matrix<Scalar> reduced = svd.U.transpose() * projected;
    Eigen::EigenSolver<Matrix<Scalar>> eig(reduced, true);
    if (eig.info() != Eigen::Success) throw NumericalError("DMD: eigendecomposition failed");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(R));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto lambda = eig.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const Scalar ma = std::abs(lambda(a));
        const Scalar mb = std::abs(lambda(b));
        if (ma != mb) return ma > mb;
        if (lambda(a).real() != lambda(b).real()) return lambda(a).real() > lambda(b).real();
        return lambda(a).imag() > lambda(b).imag();
    });

    DmdResult<Scalar> out;
    out.rank = R;
    out.singular_values = svd.s;
    out.eigenvalues.resize(R);
    ComplexMatrix<Scalar> vectors(R, R);
    for (Eigen::Index k = 0; k < R; ++k) {
        out.eigenvalues(k) = lambda(order[static_cast<std::size_t>(k)]);
        vectors.col(k) = eig.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    }
    out.modes = projected.template cast<Complex>() * vectors;
    const ComplexVector<Scalar> first = series.values().col(0).template cast<Complex>();
    out.amplitudes = Eigen::CompleteOrthogonalDecomposition<ComplexMatrix<Scalar>>(out.modes).solve(first);
    out.temporal.resize(T - 1, R);
    for (Eigen::Index k = 0; k < R; ++k) {
        Complex power(1);
        for (Eigen::Index t = 0; t < T - 1; ++t) {
            out.temporal(t, k) = out.amplitudes(k) * power;
            power *= out.eigenvalues(k);
        }
    }
    return out;
}

// Approximation of S_1 = [s_1 ... s_{T-1}] as Φ temporal^T (real part).
template <class Scalar>
Matrix<Scalar> dmd_reconstruct(const DmdResult<Scalar>& r) {
    return (r.modes * r.temporal.transpose()).real();
}

// Approximation of S_2 = [s_2 ... s_T] as Φ diag(λ) temporal^T (real part).
template <class Scalar>
Matrix<Scalar> dmd_reconstruct_next(const DmdResult<Scalar>& r) {
    return (r.modes * r.eigenvalues.asDiagonal() * r.temporal.transpose()).real();
}

template <class Scalar>
struct DmdModeFrequency {
    std::complex<Scalar> eigenvalue;
    Scalar growth = 0;     // ln|λ| / dt, -inf for λ = 0
    Scalar frequency = 0;  // arg(λ) / (2π dt), cycles per unit time
};

template <class Scalar>
std::vector<DmdModeFrequency<Scalar>> dmd_frequency_report(const DmdResult<Scalar>& r, Scalar dt) {
    if (!(dt > 0)) throw ParameterError("dt must be positive");
    std::vector<DmdModeFrequency<Scalar>> out;
    out.reserve(static_cast<std::size_t>(r.eigenvalues.size()));
    for (Eigen::Index k = 0; k < r.eigenvalues.size(); ++k) {
        const auto lambda = r.eigenvalues(k);
        DmdModeFrequency<Scalar> m;
        m.eigenvalue = lambda;
        const Scalar mag = std::abs(lambda);
        m.growth = mag == Scalar(0) ? -std::numeric_limits<Scalar>::infinity() : std::log(mag) / dt;
        m.frequency = std::arg(lambda) / (Scalar(2) * std::numbers::pi_v<Scalar> * dt);
        out.push_back(m);
    }
    return out;
}

// Unit-norm modes; the scale moves into amplitudes and temporal activations.
template <class Scalar>
DmdResult<Scalar> normalize_modes(DmdResult<Scalar> r) {
    for (Eigen::Index k = 0; k < r.rank; ++k) {
        const Scalar n = r.modes.col(k).norm();
        if (n == Scalar(0)) continue;
        r.modes.col(k) /= n;
        r.amplitudes(k) *= n;
        r.temporal.col(k) *= n;
    }
    return r;
}

} // namespace tvvar
