#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "tvvar/errors.hpp"
#include "tvvar/random.hpp"

namespace tvvar {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.derived().array().isFinite().all();
}

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const std::string& what) {
    if (!all_finite(m)) throw DataError(what + ": non-finite entries");
}

// vec() stacks columns; these views reinterpret contiguous column-major storage.
template <class Scalar>
Eigen::Map<const Matrix<Scalar>> as_matrix(const Vector<Scalar>& v, Eigen::Index rows,
                                           Eigen::Index cols) {
    return Eigen::Map<const Matrix<Scalar>>(v.data(), rows, cols);
}

template <class Derived>
Vector<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& m) {
    Matrix<typename Derived::Scalar> dense = m;
    return Eigen::Map<const Vector<typename Derived::Scalar>>(dense.data(), dense.size());
}

// ---------------------------------------------------------------------------
// Truncated SVD
// ---------------------------------------------------------------------------

template <class Scalar>
struct SvdResult {
    Matrix<Scalar> U;   // rows x R, orthonormal columns
    Vector<Scalar> s;   // nonincreasing
    Matrix<Scalar> Vt;  // R x cols
};

namespace detail {

// Matrices whose short side exceeds this use subspace iteration instead of a
// full dense decomposition.
inline constexpr Eigen::Index kDenseSvdLimit = 1000;

template <class Scalar>
void fix_signs(SvdResult<Scalar>& out) {
    for (Eigen::Index k = 0; k < out.U.cols(); ++k) {
        Eigen::Index arg = 0;
        out.U.col(k).cwiseAbs().maxCoeff(&arg);
        if (out.U(arg, k) < Scalar(0)) {
            out.U.col(k) *= Scalar(-1);
            out.Vt.row(k) *= Scalar(-1);
        }
    }
}

template <class Scalar>
Matrix<Scalar> orthonormal_basis(const Matrix<Scalar>& A) {
    Eigen::HouseholderQR<Matrix<Scalar>> qr(A);
    return qr.householderQ() * Matrix<Scalar>::Identity(A.rows(), A.cols());
}

// Randomized subspace iteration with Rayleigh-Ritz extraction. Deterministic:
// the starting block comes from a fixed-seed counter stream.
template <class Derived>
SvdResult<typename Derived::Scalar> subspace_svd(const Eigen::MatrixBase<Derived>& M,
                                                 Eigen::Index R) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index m = M.rows();
    const Eigen::Index n = M.cols();
    const Eigen::Index k = std::min<Eigen::Index>(R + 10, std::min(m, n));

    RandomStream rng(0x5eed5eedULL);
    Matrix<Scalar> Q = orthonormal_basis<Scalar>(M * rng.normal_matrix<Scalar>(n, k));
    Vector<Scalar> previous = Vector<Scalar>::Zero(R);
    Matrix<Scalar> B;
    Eigen::BDCSVD<Matrix<Scalar>> small;
    constexpr int kMaxIters = 300;
    for (int it = 0; it < kMaxIters; ++it) {
        Matrix<Scalar> P = orthonormal_basis<Scalar>(M.transpose() * Q);
        B.noalias() = M * P;  // m x k, spans the refined range
        Q = orthonormal_basis<Scalar>(B);
        if (it % 4 != 3) continue;
        small.compute(Q.transpose() * B, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vector<Scalar> current = small.singularValues().head(R);
        const Scalar scale = std::max(current(0), std::numeric_limits<Scalar>::min());
        if ((current - previous).cwiseAbs().maxCoeff() <= Scalar(1e-12) * scale) break;
        previous = current;
    }
    // Rayleigh-Ritz on the final basis: M^T Q = V S U_b^T.
    Eigen::BDCSVD<Matrix<Scalar>> ritz(M.transpose() * Q, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult<Scalar> out;
    out.s = ritz.singularValues().head(R);
    out.U = Q * ritz.matrixV().leftCols(R);
    out.Vt = ritz.matrixU().leftCols(R).transpose();
    return out;
}

} // namespace detail

template <class Derived>
SvdResult<typename Derived::Scalar> truncated_svd(const Eigen::MatrixBase<Derived>& M,
                                                  Eigen::Index R) {
    using Scalar = typename Derived::Scalar;
    if (M.rows() < 1 || M.cols() < 1) throw ParameterError("truncated_svd: empty matrix");
    if (R < 1 || R > std::min(M.rows(), M.cols()))
        throw ParameterError("truncated_svd: rank " + std::to_string(R) + " outside [1, " +
                             std::to_string(std::min(M.rows(), M.cols())) + "]");
    require_finite(M, "truncated_svd");

    SvdResult<Scalar> out;
    if (std::min(M.rows(), M.cols()) > detail::kDenseSvdLimit) {
        out = detail::subspace_svd(M, R);
    } else {
        Eigen::BDCSVD<Matrix<Scalar>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.U = svd.matrixU().leftCols(R);
        out.s = svd.singularValues().head(R);
        out.Vt = svd.matrixV().leftCols(R).transpose();
    }
    detail::fix_signs(out);
    return out;
}

// ---------------------------------------------------------------------------
// Pseudo-inverse
// ---------------------------------------------------------------------------

// tol < 0 selects max(rows, cols) * eps * s_max.
template <class Derived>
Matrix<typename Derived::Scalar> pseudo_inverse(const Eigen::MatrixBase<Derived>& M,
                                                typename Derived::Scalar tol = -1) {
    using Scalar = typename Derived::Scalar;
    require_finite(M, "pseudo_inverse");
    Matrix<Scalar> out = Matrix<Scalar>::Zero(M.cols(), M.rows());
    if (M.size() == 0) return out;
    Eigen::JacobiSVD<Matrix<Scalar>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == Scalar(0)) return out;
    if (tol < 0)
        tol = static_cast<Scalar>(std::max(M.rows(), M.cols())) *
              std::numeric_limits<Scalar>::epsilon() * s(0);
    Eigen::Index keep = 0;
    while (keep < s.size() && s(keep) > tol) ++keep;
    if (keep == 0) return out;
    out.noalias() = svd.matrixV().leftCols(keep) *
                    s.head(keep).cwiseInverse().asDiagonal() *
                    svd.matrixU().leftCols(keep).transpose();
    return out;
}

// ---------------------------------------------------------------------------
// Ridge-stabilized symmetric solve
// ---------------------------------------------------------------------------

// Solves (A + ridge*I) X = B with a Cholesky factorization. `context` names the
// caller in the singularity diagnostic.
template <class DerivedA, class DerivedB>
Matrix<typename DerivedA::Scalar> solve_ridge(const Eigen::MatrixBase<DerivedA>& A,
                                              const Eigen::MatrixBase<DerivedB>& B,
                                              typename DerivedA::Scalar ridge,
                                              const std::string& context = "solve_ridge") {
    using Scalar = typename DerivedA::Scalar;
    if (A.rows() != A.cols()) throw ParameterError(context + ": matrix is not square");
    if (A.rows() != B.rows()) throw ParameterError(context + ": dimension mismatch");
    if (ridge < 0) throw ParameterError(context + ": ridge must be nonnegative");
    require_finite(A, context);
    require_finite(B, context);
    const Scalar anorm = A.norm();
    if ((A - A.transpose()).norm() > Scalar(1e-10) * std::max(anorm, Scalar(1)))
        throw ParameterError(context + ": matrix is not symmetric");

    Matrix<Scalar> shifted = A;
    shifted.diagonal().array() += ridge;
    Eigen::LLT<Matrix<Scalar>> llt(shifted);
    const Scalar floor = static_cast<Scalar>(A.rows()) * std::numeric_limits<Scalar>::epsilon();
    if (llt.info() != Eigen::Success || !(llt.rcond() > floor))
        throw SingularityError(context + ": system matrix is numerically singular");
    return llt.solve(B);
}

// Trace-average scaling used for the default ridge: ridge * tr(A) / n.
template <class Derived>
typename Derived::Scalar scaled_ridge(const Eigen::MatrixBase<Derived>& gram,
                                      typename Derived::Scalar ridge) {
    if (ridge == 0 || gram.rows() == 0) return 0;
    return ridge * gram.trace() / static_cast<typename Derived::Scalar>(gram.rows());
}

// ---------------------------------------------------------------------------
// Kronecker-structured products (never materialized)
// ---------------------------------------------------------------------------

// (x^T (x) V)^T z = vec(V^T z x^T). x has length n, V is p x q, z has length p;
// the result has length q * n.
template <class DX, class DV, class DZ>
Vector<typename DV::Scalar> kron_apply_vt_z(const Eigen::MatrixBase<DX>& x,
                                            const Eigen::MatrixBase<DV>& V,
                                            const Eigen::MatrixBase<DZ>& z) {
    using Scalar = typename DV::Scalar;
    if (x.cols() != 1 || z.cols() != 1 || z.rows() != V.rows())
        throw ParameterError("kron_apply_vt_z: dimension mismatch");
    const Vector<Scalar> a = V.transpose() * z;
    Vector<Scalar> out(a.size() * x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) out.segment(j * a.size(), a.size()) = x(j) * a;
    return out;
}

// ((z x^T) (x) I_q) vec(Y) = vec(Y x z^T), Y is q x n with n = len(x) and
// z has length p; the result has length q * p.
template <class DZ, class DX, class DY>
Vector<typename DY::Scalar> kron_apply_zx_I(const Eigen::MatrixBase<DZ>& z,
                                            const Eigen::MatrixBase<DX>& x,
                                            const Eigen::MatrixBase<DY>& y_vec,
                                            Eigen::Index q) {
    using Scalar = typename DY::Scalar;
    if (z.cols() != 1 || x.cols() != 1 || y_vec.cols() != 1 || q < 1 ||
        y_vec.size() != q * x.size())
        throw ParameterError("kron_apply_zx_I: dimension mismatch");
    const Eigen::Map<const Matrix<Scalar>> Y(y_vec.derived().data(), q, x.size());
    const Vector<Scalar> yx = Y * x;
    Vector<Scalar> out(q * z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) out.segment(j * q, q) = z(j) * yx;
    return out;
}

// ---------------------------------------------------------------------------
// Conjugate gradient
// ---------------------------------------------------------------------------

template <class Scalar>
struct LinearOperator {
    Eigen::Index dim_in = 0;
    Eigen::Index dim_out = 0;
    std::function<Vector<Scalar>(const Vector<Scalar>&)> apply;

    Vector<Scalar> operator()(const Vector<Scalar>& v) const { return apply(v); }
};

template <class Scalar>
struct CgResult {
    Vector<Scalar> x;
    int iterations = 0;            // iterations actually taken
    Scalar initial_residual = 0;   // ||rhs - op(x0)||
    Scalar final_residual = 0;
};

namespace detail {

// Randomized check of u^T op(v) == v^T op(u).
template <class Scalar>
void check_symmetric(const LinearOperator<Scalar>& op) {
    RandomStream rng(0xc0ffeeULL);
    const Vector<Scalar> u = rng.normal_matrix<Scalar>(op.dim_in, 1);
    const Vector<Scalar> v = rng.normal_matrix<Scalar>(op.dim_in, 1);
    const Vector<Scalar> ou = op(u);
    const Vector<Scalar> ov = op(v);
    const Scalar lhs = u.dot(ov);
    const Scalar rhs = v.dot(ou);
    const Scalar scale = u.norm() * ov.norm() + v.norm() * ou.norm();
    if (std::abs(lhs - rhs) > Scalar(1e-8) * std::max(scale, Scalar(1)))
        throw ParameterError("conjugate_gradient: operator is not symmetric");
}

} // namespace detail

// Plain CG with the textbook recurrences. Exits early once
// ||r|| <= 1e-12 ||rhs||.
template <class Scalar>
CgResult<Scalar> conjugate_gradient(const LinearOperator<Scalar>& op, const Vector<Scalar>& rhs,
                                    const Vector<Scalar>& x0, int iters) {
    if (op.dim_in != op.dim_out) throw ParameterError("conjugate_gradient: operator is not square");
    if (rhs.size() != op.dim_out || x0.size() != op.dim_in)
        throw ParameterError("conjugate_gradient: dimension mismatch");
    if (iters < 1) throw ParameterError("conjugate_gradient: iters must be >= 1");
#ifndef NDEBUG
    detail::check_symmetric(op);
#endif

    CgResult<Scalar> out;
    out.x = x0;
    Vector<Scalar> r = rhs - op(x0);
    Vector<Scalar> q = r;
    Scalar rr = r.squaredNorm();
    out.initial_residual = std::sqrt(rr);
    const Scalar stop = Scalar(1e-12) * rhs.norm();
    for (int l = 0; l < iters; ++l) {
        if (std::sqrt(rr) <= stop || rr == Scalar(0)) break;
        const Vector<Scalar> Lq = op(q);
        const Scalar curvature = q.dot(Lq);
        if (!(curvature > Scalar(0)))
            throw BreakdownError("conjugate_gradient: breakdown (q^T L q = " +
                                 std::to_string(static_cast<double>(curvature)) +
                                 " with nonzero residual)");
        const Scalar alpha = rr / curvature;
        out.x += alpha * q;
        r -= alpha * Lq;
        const Scalar rr_next = r.squaredNorm();
        const Scalar beta = rr_next / rr;
        q = r + beta * q;
        rr = rr_next;
        ++out.iterations;
    }
    out.final_residual = std::sqrt(rr);
    return out;
}

} // namespace tvvar
