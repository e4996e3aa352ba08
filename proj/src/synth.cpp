#include "tvvar/synth.hpp"

#include <algorithm>

namespace tvvar {

void validate(const SynthSpec& spec) {
    if (spec.N < 1 || spec.T < 2) throw ParameterError("synthetic spec needs N >= 1 and T >= 2");
    if (spec.R < 1) throw ParameterError("synthetic spec needs R >= 1");
    if (!(spec.noise_sd >= 0) || !std::isfinite(spec.noise_sd))
        throw ParameterError("noise standard deviation must be finite and nonnegative");
    if (spec.kind == SynthKind::planted_var) {
        if (spec.d < 1 || spec.d > spec.T - 1)
            throw ParameterError("order d=" + std::to_string(spec.d) + " outside [1, T-1]");
        if (spec.R > std::min(spec.N, spec.T - spec.d))
            throw ParameterError("rank R=" + std::to_string(spec.R) + " exceeds min(N, T-d) = " +
                                 std::to_string(std::min(spec.N, spec.T - spec.d)));
        if (!(spec.spectral_cap > 0)) throw ParameterError("spectral cap must be positive");
    } else {
        if (!(spec.d + 1 < spec.switch_t && spec.switch_t < spec.T))
            throw ParameterError("switch time must satisfy d+1 < switch_t < T");
        if (!(spec.base_freq > 0 && spec.base_freq < 0.25))
            throw ParameterError("base frequency must lie in (0, 0.25) cycles per step");
    }
}

double coefficient_spectral_radius(const FactorSet<double>& f, Eigen::Index t) {
    const Eigen::Index N = f.N();
    const auto x = f.X.row(t - f.d - 1).transpose();
    const MatrixXd K = detail::mixed_core(f, x);
    if (f.d == 1) {
        // Nonzero eigenvalues of W K V^T coincide with those of K V^T W.
        const MatrixXd small = K * (f.V.transpose() * f.W);
        return Eigen::EigenSolver<MatrixXd>(small, false).eigenvalues().cwiseAbs().maxCoeff();
    }
    MatrixXd companion = MatrixXd::Zero(f.d * N, f.d * N);
    companion.topRows(N) = f.W * K * f.V.transpose();
    companion.bottomLeftCorner((f.d - 1) * N, (f.d - 1) * N).setIdentity();
    return Eigen::EigenSolver<MatrixXd>(companion, false).eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

double max_spectral_radius(const FactorSet<double>& f) {
    double rho = 0.0;
    for (Eigen::Index t = f.d + 1; t <= f.T(); ++t) rho = std::max(rho, coefficient_spectral_radius(f, t));
    return rho;
}

} // namespace

PlantedData synth_planted_var(const SynthSpec& spec_in) {
    SynthSpec spec = spec_in;
    spec.kind = SynthKind::planted_var;
    validate(spec);
    const Eigen::Index N = spec.N;
    const Eigen::Index d = spec.d;
    const Eigen::Index R = spec.R;
    const RandomStream root(spec.seed);

    FactorSet<double> f;
    f.d = d;
    f.R = R;
    auto w_rng = root.split(1);
    auto v_rng = root.split(2);
    auto x_rng = root.split(3);
    auto g_rng = root.split(4);
    f.W = w_rng.normal_matrix(N, R);
    f.V = v_rng.normal_matrix(d * N, R);
    f.X = x_rng.normal_matrix(spec.T - d, R);
    f.G = g_rng.normal_matrix(R, R * R);

    const double rho = max_spectral_radius(f);
    if (rho > 0) {
        f.G *= spec.spectral_cap / rho;
        int halvings = 0;
        // Eigenvalue rounding can leave rho a few ulps above the cap.
        while (max_spectral_radius(f) > spec.spectral_cap * (1 + 1e-10)) {
            if (++halvings > 100) throw GenerationError("spectral radius rescaling did not converge");
            f.G *= 0.5;
        }
    }

    MatrixXd S(N, spec.T);
    auto init_rng = root.split(5);
    S.leftCols(d) = init_rng.normal_matrix(N, d);
    auto noise_rng = root.split(6);
    VectorXd z(d * N);
    for (Eigen::Index t = d; t < spec.T; ++t) {
        for (Eigen::Index k = 0; k < d; ++k) z.segment(k * N, N) = S.col(t - k - 1);
        const auto x = f.X.row(t - d).transpose();
        S.col(t) = f.W * (detail::mixed_core(f, x) * (f.V.transpose() * z));
        if (spec.noise_sd > 0)
            for (Eigen::Index i = 0; i < N; ++i) S(i, t) += spec.noise_sd * noise_rng.normal();
    }
    if (!all_finite(S)) throw GenerationError("planted trajectory overflowed");
    return {TimeSeriesMatrix(std::move(S)), std::move(f)};
}

TimeSeriesMatrix synth_multiresolution(const SynthSpec& spec_in) {
    SynthSpec spec = spec_in;
    spec.kind = SynthKind::multiresolution;
    validate(spec);
    const Eigen::Index N = spec.N;
    const RandomStream root(spec.seed);

    // Smooth patterns: a few low-order cosines over the variable index.
    constexpr int kHarmonics = 4;
    auto pattern_rng = root.split(1);
    MatrixXd patterns(N, spec.R);
    VectorXd phases(spec.R);
    for (Eigen::Index k = 0; k < spec.R; ++k) {
        for (Eigen::Index n = 0; n < N; ++n) patterns(n, k) = 0.0;
        for (int j = 0; j < kHarmonics; ++j) {
            const double amp = pattern_rng.normal() / (1.0 + j);
            const double shift = 2.0 * std::numbers::pi * pattern_rng.uniform();
            for (Eigen::Index n = 0; n < N; ++n)
                patterns(n, k) += amp * std::cos(std::numbers::pi * j * (n + 0.5) / N + shift);
        }
        phases(k) = 2.0 * std::numbers::pi * pattern_rng.uniform();
    }

    const double f0 = spec.base_freq;
    const double two_pi = 2.0 * std::numbers::pi;
    auto noise_rng = root.split(2);
    MatrixXd S(N, spec.T);
    for (Eigen::Index t = 0; t < spec.T; ++t) {
        double theta = 0.0;
        if (t < spec.switch_t)
            theta = two_pi * f0 * t;
        else if (spec.hard_splice)
            theta = two_pi * 2.0 * f0 * t;
        else
            theta = two_pi * (f0 * spec.switch_t + 2.0 * f0 * (t - spec.switch_t));
        for (Eigen::Index n = 0; n < N; ++n) {
            double v = 0.0;
            for (Eigen::Index k = 0; k < spec.R; ++k) v += patterns(n, k) * std::sin(theta + phases(k));
            S(n, t) = v;
        }
        if (spec.noise_sd > 0)
            for (Eigen::Index n = 0; n < N; ++n) S(n, t) += spec.noise_sd * noise_rng.normal();
    }
    return TimeSeriesMatrix(std::move(S));
}

} // namespace tvvar
