#include "tvvar/oracle.hpp"

#include <complex>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <unsupported/Eigen/FFT>

namespace tvvar::oracle {

MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
    MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            for (Eigen::Index k = 0; k < B.rows(); ++k)
                for (Eigen::Index l = 0; l < B.cols(); ++l)
                    out(i * B.rows() + k, j * B.cols() + l) = A(i, j) * B(k, l);
    return out;
}

VectorXd dense_vt_z(const VectorXd& x, const MatrixXd& V, const VectorXd& z) {
    return kron(x.transpose(), V).transpose() * z;
}

VectorXd dense_zx_I(const VectorXd& z, const VectorXd& x, const VectorXd& y_vec, Eigen::Index q) {
    return kron(z * x.transpose(), MatrixXd::Identity(q, q)) * y_vec;
}

double matrix_form_objective(const FactorSet<double>& f, const LagPairs<double>& pairs) {
    const auto form = build_matrix_form(pairs);
    const MatrixXd XV = kron(f.X, f.V);
    const MatrixXd residual = form.Y - f.W * f.G * XV.transpose() * form.Ztilde;
    return 0.5 * residual.squaredNorm();
}

MatrixXd tucker_coefficient(const FactorSet<double>& f, Eigen::Index t) {
    const Eigen::Index R = f.R;
    const auto x = f.X.row(t - f.d - 1);
    MatrixXd A = MatrixXd::Zero(f.W.rows(), f.V.rows());
    for (Eigen::Index n = 0; n < A.rows(); ++n)
        for (Eigen::Index m = 0; m < A.cols(); ++m) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < R; ++i)
                for (Eigen::Index j = 0; j < R; ++j)
                    for (Eigen::Index k = 0; k < R; ++k)
                        acc += f.G(i, k * R + j) * f.W(n, i) * f.V(m, j) * x(k);
            A(n, m) = acc;
        }
    return A;
}

MatrixXd dense_core_inputs(const FactorSet<double>& f, const LagPairs<double>& pairs) {
    MatrixXd C(f.R * f.R, pairs.count());
    for (Eigen::Index t = 0; t < pairs.count(); ++t)
        C.col(t) = dense_vt_z(f.X.row(t).transpose(), f.V, pairs.z(t));
    return C;
}

MatrixXd least_squares_W(const FactorSet<double>& f, const LagPairs<double>& pairs) {
    const MatrixXd B = f.G * dense_core_inputs(f, pairs);
    const MatrixXd Yt = pairs.Y().transpose();
    return Eigen::CompleteOrthogonalDecomposition<MatrixXd>(B.transpose()).solve(Yt).transpose();
}

MatrixXd least_squares_G(const FactorSet<double>& f, const LagPairs<double>& pairs) {
    const Eigen::Index N = f.W.rows();
    const Eigen::Index R = f.R;
    const MatrixXd C = dense_core_inputs(f, pairs);
    // y_t = (c_t^T (x) W) vec(G)
    MatrixXd design(pairs.count() * N, R * R * R);
    VectorXd target(pairs.count() * N);
    for (Eigen::Index t = 0; t < pairs.count(); ++t) {
        design.middleRows(t * N, N) = kron(C.col(t).transpose(), f.W);
        target.segment(t * N, N) = pairs.y(t);
    }
    const VectorXd g = (design.transpose() * design).ldlt().solve(design.transpose() * target);
    return Eigen::Map<const MatrixXd>(g.data(), R, R * R);
}

MatrixXd least_squares_V(const FactorSet<double>& f, const LagPairs<double>& pairs) {
    const Eigen::Index N = f.W.rows();
    const Eigen::Index R = f.R;
    const Eigen::Index dN = f.V.rows();
    const MatrixXd WG = f.W * f.G;
    const MatrixXd I = MatrixXd::Identity(R, R);
    // y_t = W G ((x_t z_t^T) (x) I_R) vec(V^T)
    MatrixXd design(pairs.count() * N, dN * R);
    VectorXd target(pairs.count() * N);
    for (Eigen::Index t = 0; t < pairs.count(); ++t) {
        const VectorXd x = f.X.row(t).transpose();
        const VectorXd z = pairs.z(t);
        design.middleRows(t * N, N) = WG * kron(x * z.transpose(), I);
        target.segment(t * N, N) = pairs.y(t);
    }
    const VectorXd u = Eigen::CompleteOrthogonalDecomposition<MatrixXd>(design).solve(target);
    return Eigen::Map<const MatrixXd>(u.data(), R, dN).transpose();
}

MatrixXd least_squares_X(const FactorSet<double>& f, const LagPairs<double>& pairs) {
    const Eigen::Index R = f.R;
    const MatrixXd WG = f.W * f.G;
    MatrixXd X(pairs.count(), R);
    for (Eigen::Index t = 0; t < pairs.count(); ++t) {
        const VectorXd a = f.V.transpose() * pairs.z(t);
        const MatrixXd M = WG * kron(MatrixXd::Identity(R, R), a);
        X.row(t) = Eigen::CompleteOrthogonalDecomposition<MatrixXd>(M).solve(VectorXd(pairs.y(t))).transpose();
    }
    return X;
}

MatrixXd finite_difference_gradient(const FactorSet<double>& f, const LagPairs<double>& pairs, Block block,
                                    double step) {
    FactorSet<double> probe = f;
    MatrixXd* target = nullptr;
    switch (block) {
    case Block::W: target = &probe.W; break;
    case Block::G: target = &probe.G; break;
    case Block::V: target = &probe.V; break;
    case Block::X: target = &probe.X; break;
    }
    MatrixXd grad(target->rows(), target->cols());
    for (Eigen::Index j = 0; j < target->cols(); ++j)
        for (Eigen::Index i = 0; i < target->rows(); ++i) {
            const double saved = (*target)(i, j);
            (*target)(i, j) = saved + step;
            const double up = matrix_form_objective(probe, pairs);
            (*target)(i, j) = saved - step;
            const double down = matrix_form_objective(probe, pairs);
            (*target)(i, j) = saved;
            grad(i, j) = (up - down) / (2.0 * step);
        }
    return grad;
}

double dominant_frequency(const VectorXd& series, Eigen::Index padded_length) {
    std::vector<double> padded(static_cast<std::size_t>(std::max(padded_length, series.size())), 0.0);
    const double mean = series.mean();
    for (Eigen::Index t = 0; t < series.size(); ++t) padded[static_cast<std::size_t>(t)] = series(t) - mean;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, padded);
    const std::size_t n = padded.size();
    std::size_t best = 1;
    for (std::size_t k = 1; k <= n / 2; ++k)
        if (std::norm(spectrum[k]) > std::norm(spectrum[best])) best = k;
    return static_cast<double>(best) / static_cast<double>(n);
}

} // namespace tvvar::oracle
