#pragma once

#include <chrono>
#include <cstdint>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/QR>

#include "tvvar/dataset.hpp"
#include "tvvar/errors.hpp"
#include "tvvar/linalg.hpp"

namespace tvvar {

// Tucker factors of the coefficient tensor. A_t = W G (x_t^T (x) V)^T with
// G the mode-1 unfolding of the R x R x R core (column index j*R + i holds
// core(:, i, j), i.e. mode-2 varies fastest, matching vec()).
template <class Scalar>
struct FactorSet {
    Matrix<Scalar> W;  // N x R     spatial modes
    Matrix<Scalar> G;  // R x R^2   unfolded core
    Matrix<Scalar> V;  // dN x R    lagged spatial modes
    Matrix<Scalar> X;  // (T-d) x R temporal modes, row i is x_{d+1+i}
    Eigen::Index d = 1;
    Eigen::Index R = 1;

    Eigen::Index N() const noexcept { return W.rows(); }
    Eigen::Index T() const noexcept { return X.rows() + d; }

    // Frontal slice k of the core as an R x R block of G.
    auto core_slice(Eigen::Index k) const { return G.middleCols(k * R, R); }

    void validate() const {
        const bool ok = R >= 1 && d >= 1 && W.cols() == R && G.rows() == R &&
                        G.cols() == R * R && V.cols() == R && V.rows() == d * W.rows() &&
                        X.cols() == R;
        if (!ok) throw ParameterError("factor shapes are inconsistent");
    }
};

struct FitConfig {
    Eigen::Index rank = 1;
    Eigen::Index order = 1;
    int sweeps = 50;
    int cg_iters = 5;
    double ridge = 1e-8;
    double rel_tol = 1e-8;
    std::uint64_t seed = 0;   // unused by the deterministic solver
    bool trace_updates = false;
};

struct UpdateTrace {
    int sweep = 0;
    std::string block;  // "G", "W", "V" or "X"
    double objective = 0.0;
};

struct FitReport {
    double initial_objective = 0.0;
    std::vector<double> objective_trace;  // one entry per completed sweep
    std::vector<UpdateTrace> update_trace; // filled when trace_updates is set
    int sweeps_run = 0;
    bool converged = false;
    double wall_time = 0.0;
};

// Thrown when an update fails mid-fit; carries everything recorded so far.
class FitAborted : public NumericalError {
public:
    FitAborted(const std::string& what, FitReport report)
        : NumericalError(what), report_(std::move(report)) {}
    const FitReport& report() const noexcept { return report_; }

private:
    FitReport report_;
};

inline void validate_config(const FitConfig& cfg, Eigen::Index N, Eigen::Index T) {
    if (cfg.order < 1 || cfg.order > T - 1)
        throw ParameterError("order d=" + std::to_string(cfg.order) + " outside [1, T-1=" +
                             std::to_string(T - 1) + "]");
    const Eigen::Index bound = std::min(N, T - cfg.order);
    if (cfg.rank < 1 || cfg.rank > bound)
        throw ParameterError("rank R=" + std::to_string(cfg.rank) + " must satisfy 1 <= R <= min(N, T-d) = " +
                             std::to_string(bound));
    if (cfg.sweeps < 0) throw ParameterError("sweep count must be nonnegative");
    if (cfg.cg_iters < 1) throw ParameterError("cg_iters must be >= 1");
    if (!(cfg.ridge >= 0)) throw ParameterError("ridge must be nonnegative");
    if (!(cfg.rel_tol >= 0)) throw ParameterError("rel_tol must be nonnegative");
}

// ---------------------------------------------------------------------------
// Structured building blocks
// ---------------------------------------------------------------------------

namespace detail {

template <class Scalar>
void check_pairs(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs) {
    f.validate();
    if (f.W.rows() != pairs.N() || f.d != pairs.d() || f.X.rows() != pairs.count())
        throw ParameterError("factors do not match the lag pairs");
}

// Columns c_t = vec(V^T z_t x_t^T) = x_t (x) (V^T z_t), stacked as R^2 x count.
template <class Scalar>
Matrix<Scalar> core_inputs(const Matrix<Scalar>& X, const Matrix<Scalar>& scores) {
    const Eigen::Index R = scores.rows();
    const Eigen::Index count = scores.cols();
    Matrix<Scalar> C(R * R, count);
    for (Eigen::Index t = 0; t < count; ++t)
        for (Eigen::Index j = 0; j < R; ++j) C.col(t).segment(j * R, R) = X(t, j) * scores.col(t);
    return C;
}

// K_t = sum_k x_t[k] G_k  (so that A_t = W K_t V^T).
template <class Scalar, class DX>
Matrix<Scalar> mixed_core(const FactorSet<Scalar>& f, const Eigen::MatrixBase<DX>& x) {
    Matrix<Scalar> K = Matrix<Scalar>::Zero(f.R, f.R);
    for (Eigen::Index k = 0; k < f.R; ++k) K += x(k) * f.core_slice(k);
    return K;
}

// Rows of X become R-vectors m_t = P_t x_t where vec(P_t) = Pv.col(t).
template <class Scalar>
Matrix<Scalar> contract_with_x(const Matrix<Scalar>& Pv, const Matrix<Scalar>& X) {
    const Eigen::Index R = X.cols();
    Matrix<Scalar> M(R, Pv.cols());
    for (Eigen::Index t = 0; t < Pv.cols(); ++t)
        M.col(t) = Eigen::Map<const Matrix<Scalar>>(Pv.col(t).data(), R, R) * X.row(t).transpose();
    return M;
}

} // namespace detail

// Fitted values [ŷ_{d+1} ... ŷ_T] = W G C.
template <class Scalar>
Matrix<Scalar> fitted_values(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs) {
    detail::check_pairs(f, pairs);
    const Matrix<Scalar> scores = f.V.transpose() * pairs.Z();
    const Matrix<Scalar> C = detail::core_inputs(f.X, scores);
    return f.W * (f.G * C);
}

template <class Scalar>
Scalar objective(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs) {
    return Scalar(0.5) * (pairs.Y() - fitted_values(f, pairs)).squaredNorm();
}

template <class Scalar>
Scalar data_energy(const LagPairs<Scalar>& pairs) {
    return Scalar(0.5) * pairs.Y().squaredNorm();
}

// A_t for time index t in [d+1, T] (1-based as in the model definition).
template <class Scalar>
Matrix<Scalar> coefficient_at(const FactorSet<Scalar>& f, Eigen::Index t) {
    f.validate();
    if (t < f.d + 1 || t > f.T())
        throw ParameterError("time index " + std::to_string(t) + " outside [" +
                             std::to_string(f.d + 1) + ", " + std::to_string(f.T()) + "]");
    const auto x = f.X.row(t - f.d - 1).transpose();
    return f.W * detail::mixed_core(f, x) * f.V.transpose();
}

template <class Scalar>
struct Prediction {
    Matrix<Scalar> fitted;     // N x (T-d)
    Vector<Scalar> residuals;  // ||y_t - ŷ_t||
};

template <class Scalar>
Prediction<Scalar> one_step_predict(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs) {
    Prediction<Scalar> out;
    out.fitted = fitted_values(f, pairs);
    out.residuals = (pairs.Y() - out.fitted).colwise().norm().transpose();
    return out;
}

// ---------------------------------------------------------------------------
// Gradients of f = 1/2 sum_t ||y_t - W G c_t||^2
// ---------------------------------------------------------------------------

template <class Scalar>
struct Gradients {
    Matrix<Scalar> W;
    Matrix<Scalar> G;
    Matrix<Scalar> V;
    Matrix<Scalar> X;
};

template <class Scalar>
Gradients<Scalar> gradients(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs) {
    detail::check_pairs(f, pairs);
    const Matrix<Scalar> scores = f.V.transpose() * pairs.Z();
    const Matrix<Scalar> C = detail::core_inputs(f.X, scores);
    const Matrix<Scalar> B = f.G * C;
    const Matrix<Scalar> E = pairs.Y() - f.W * B;  // residuals
    Gradients<Scalar> g;
    g.W = -E * B.transpose();
    g.G = -(f.W.transpose() * E) * C.transpose();
    const Matrix<Scalar> back = (f.W * f.G).transpose() * E;  // vec(B_t) = G^T W^T e_t
    g.V = -pairs.Z() * detail::contract_with_x(back, f.X).transpose();
    g.X.resize(f.X.rows(), f.R);
    for (Eigen::Index t = 0; t < pairs.count(); ++t) {
        // M_t = W K_t with K_t column j = G_j (V^T z_t)
        Matrix<Scalar> K(f.R, f.R);
        for (Eigen::Index j = 0; j < f.R; ++j) K.col(j) = f.core_slice(j) * scores.col(t);
        g.X.row(t) = -(K.transpose() * (f.W.transpose() * E.col(t))).transpose();
    }
    return g;
}

// ---------------------------------------------------------------------------
// Block updates
// ---------------------------------------------------------------------------

// Closed-form W given G, V, X: b_t = G c_t, W = (sum y_t b_t^T)(sum b_t b_t^T + λI)^{-1}.
template <class Scalar>
Matrix<Scalar> update_W(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs, Scalar ridge) {
    detail::check_pairs(f, pairs);
    const Matrix<Scalar> scores = f.V.transpose() * pairs.Z();
    const Matrix<Scalar> B = f.G * detail::core_inputs(f.X, scores);
    const Matrix<Scalar> gram = B * B.transpose();
    const Matrix<Scalar> cross = B * pairs.Y().transpose();  // (sum y_t b_t^T)^T
    return solve_ridge(gram, cross, scaled_ridge(gram, ridge), "update_W").transpose();
}

// Closed-form G: W^+ (sum y_t c_t^T)(sum c_t c_t^T + λI)^{-1}.
template <class Scalar>
Matrix<Scalar> update_G(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs, Scalar ridge) {
    detail::check_pairs(f, pairs);
    const Matrix<Scalar> scores = f.V.transpose() * pairs.Z();
    const Matrix<Scalar> C = detail::core_inputs(f.X, scores);
    const Matrix<Scalar> gram = C * C.transpose();
    const Matrix<Scalar> cross = C * pairs.Y().transpose();  // (sum y_t c_t^T)^T
    const Matrix<Scalar> right = solve_ridge(gram, cross, scaled_ridge(gram, ridge), "update_G");
    return pseudo_inverse(f.W) * right.transpose();
}

// The V subproblem as a linear operator on vec(V) (column-major, dN*R):
// L(V) = vec(sum_t z_t x_t^T P_t(V)^T), vec(P_t) = G^T W^T W G vec(V^T z_t x_t^T).
template <class Scalar>
LinearOperator<Scalar> sylvester_operator(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs) {
    const Matrix<Scalar> WG = f.W * f.G;
    Matrix<Scalar> H = WG.transpose() * WG;
    const Eigen::Index rows = f.V.rows();
    const Eigen::Index R = f.R;
    // Z and X are borrowed: the operator must not outlive `pairs` or `f`.
    const Matrix<Scalar>* Z = &pairs.Z();
    const Matrix<Scalar>* X = &f.X;
    LinearOperator<Scalar> op;
    op.dim_in = op.dim_out = rows * R;
    op.apply = [H = std::move(H), Z, X, rows, R](const Vector<Scalar>& v) {
        const auto Vm = as_matrix(v, rows, R);
        const Matrix<Scalar> scores = Vm.transpose() * *Z;
        const Matrix<Scalar> Pv = H * detail::core_inputs(*X, scores);
        const Matrix<Scalar> out = *Z * detail::contract_with_x(Pv, *X).transpose();
        return Vector<Scalar>(Eigen::Map<const Vector<Scalar>>(out.data(), out.size()));
    };
    return op;
}

// Right-hand side vec(sum_t z_t x_t^T Q_t^T), vec(Q_t) = G^T W^T y_t.
template <class Scalar>
Vector<Scalar> sylvester_rhs(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs) {
    const Matrix<Scalar> Qv = (f.W * f.G).transpose() * pairs.Y();
    const Matrix<Scalar> out = pairs.Z() * detail::contract_with_x(Qv, f.X).transpose();
    return Eigen::Map<const Vector<Scalar>>(out.data(), out.size());
}

template <class Scalar>
struct VUpdate {
    Matrix<Scalar> V;
    int iterations = 0;
    Scalar initial_residual = 0;
    Scalar final_residual = 0;
    Scalar rhs_norm = 0;
};

// CG on the generalized Sylvester system, warm-started from the current V.
template <class Scalar>
VUpdate<Scalar> update_V(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs, int cg_iters) {
    detail::check_pairs(f, pairs);
    const auto op = sylvester_operator(f, pairs);
    const Vector<Scalar> rhs = sylvester_rhs(f, pairs);
    const Vector<Scalar> v0 = Eigen::Map<const Vector<Scalar>>(f.V.data(), f.V.size());
    const auto cg = conjugate_gradient(op, rhs, v0, cg_iters);
    VUpdate<Scalar> out;
    out.V = as_matrix(cg.x, f.V.rows(), f.R);
    out.iterations = cg.iterations;
    out.initial_residual = cg.initial_residual;
    out.final_residual = cg.final_residual;
    out.rhs_norm = rhs.norm();
    return out;
}

// Per-time least squares x_t = (W G (I_R (x) V^T z_t))^+ y_t. With W = Q R_w
// (thin QR, Q orthonormal), M_t^+ = (R_w K_t)^+ Q^T, which keeps each solve
// at R x R.
template <class Scalar>
Matrix<Scalar> update_X(const FactorSet<Scalar>& f, const LagPairs<Scalar>& pairs) {
    detail::check_pairs(f, pairs);
    const Eigen::Index R = f.R;
    const Eigen::Index N = f.W.rows();
    Eigen::HouseholderQR<Matrix<Scalar>> qr(f.W);
    const Matrix<Scalar> Q = qr.householderQ() * Matrix<Scalar>::Identity(N, R);
    const Matrix<Scalar> Rw = Q.transpose() * f.W;
    const Matrix<Scalar> projected = Q.transpose() * pairs.Y();
    const Matrix<Scalar> scores = f.V.transpose() * pairs.Z();
    const Scalar tol_scale = static_cast<Scalar>(std::max(N, R)) * std::numeric_limits<Scalar>::epsilon();

    Matrix<Scalar> X(pairs.count(), R);
    const auto count = static_cast<long>(pairs.count());
#pragma omp parallel for schedule(static)
    for (long t = 0; t < count; ++t) {
        Matrix<Scalar> K(R, R);
        for (Eigen::Index j = 0; j < R; ++j) K.col(j) = f.core_slice(j) * scores.col(t);
        const Matrix<Scalar> B = Rw * K;
        Eigen::JacobiSVD<Matrix<Scalar>> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        Vector<Scalar> x = Vector<Scalar>::Zero(R);
        if (s(0) > Scalar(0)) {
            const Scalar tol = tol_scale * s(0);
            const Vector<Scalar> rhs = svd.matrixU().transpose() * projected.col(t);
            for (Eigen::Index k = 0; k < R && s(k) > tol; ++k)
                x += (rhs(k) / s(k)) * svd.matrixV().col(k);
        }
        X.row(t) = x.transpose();
    }
    return X;
}

// Scales W columns to unit norm and absorbs the scale into G's rows, so every
// A_t is unchanged.
template <class Scalar>
FactorSet<Scalar> normalize_modes(FactorSet<Scalar> f) {
    for (Eigen::Index k = 0; k < f.R; ++k) {
        const Scalar n = f.W.col(k).norm();
        if (n == Scalar(0)) continue;
        f.W.col(k) /= n;
        f.G.row(k) *= n;
    }
    return f;
}

// ---------------------------------------------------------------------------
// Initialization and the fitting loop
// ---------------------------------------------------------------------------

template <class Scalar>
FactorSet<Scalar> initialize(const LagPairs<Scalar>& pairs, const FitConfig& cfg) {
    validate_config(cfg, pairs.N(), pairs.T());
    if (cfg.order != pairs.d()) throw ParameterError("config order does not match the lag pairs");
    const Eigen::Index R = cfg.rank;
    FactorSet<Scalar> f;
    f.d = pairs.d();
    f.R = R;
    f.W = truncated_svd(pairs.Y(), R).U;
    f.V = truncated_svd(pairs.Z(), R).U;
    // Left singular vectors of S^T are indexed by t = 1..T; keep the rows
    // aligned with t = d+1..T.
    f.X = truncated_svd(pairs.S().transpose(), R).U.bottomRows(pairs.count());
    f.G = Matrix<Scalar>::Zero(R, R * R);
    f.G = update_G(f, pairs, static_cast<Scalar>(cfg.ridge));
    return f;
}

template <class Scalar>
struct FitResult {
    FactorSet<Scalar> factors;
    FitReport report;
};

// Algorithm order per sweep: G, W, V (CG), then every x_t.
template <class Scalar>
FitResult<Scalar> fit(const LagPairs<Scalar>& pairs, const FitConfig& cfg,
                      const FactorSet<Scalar>* warm_start = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    validate_config(cfg, pairs.N(), pairs.T());
    FitResult<Scalar> out;
    FitReport& report = out.report;
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    out.factors = warm_start ? *warm_start : initialize(pairs, cfg);
    if (warm_start) {
        detail::check_pairs(out.factors, pairs);
        if (out.factors.R != cfg.rank) throw ParameterError("warm start rank does not match config");
    }
    FactorSet<Scalar>& f = out.factors;
    const auto ridge = static_cast<Scalar>(cfg.ridge);
    double previous = static_cast<double>(objective(f, pairs));
    report.initial_objective = previous;

    auto trace = [&](int sweep, const char* block) {
        if (cfg.trace_updates)
            report.update_trace.push_back({sweep, block, static_cast<double>(objective(f, pairs))});
    };

    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
        try {
            f.G = update_G(f, pairs, ridge);
            trace(sweep, "G");
            f.W = update_W(f, pairs, ridge);
            trace(sweep, "W");
            f.V = update_V(f, pairs, cfg.cg_iters).V;
            trace(sweep, "V");
            f.X = update_X(f, pairs);
            trace(sweep, "X");
        } catch (const std::exception& e) {
            report.wall_time = elapsed();
            throw FitAborted("sweep " + std::to_string(sweep) + ": " + e.what(), report);
        }
        if (!all_finite(f.W) || !all_finite(f.G) || !all_finite(f.V) || !all_finite(f.X)) {
            report.wall_time = elapsed();
            throw FitAborted("sweep " + std::to_string(sweep) + ": non-finite factors", report);
        }
        const double current = static_cast<double>(objective(f, pairs));
        report.objective_trace.push_back(current);
        report.sweeps_run = sweep + 1;
        const double change = std::abs(previous - current) /
                              std::max(previous, std::numeric_limits<double>::min());
        previous = current;
        if (current == 0.0 || change < cfg.rel_tol) {
            report.converged = true;
            break;
        }
    }
    report.wall_time = elapsed();
    return out;
}

} // namespace tvvar
