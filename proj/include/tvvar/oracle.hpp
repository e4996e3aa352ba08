#pragma once

// Reference computations that materialize every Kronecker product and solve
// every subproblem as a plain stacked least-squares system. They share no code
// path with the structured kernels in linalg.hpp / model.hpp and exist only to
// check them.

#include "tvvar/dataset.hpp"
#include "tvvar/model.hpp"

namespace tvvar::oracle {

MatrixXd kron(const MatrixXd& A, const MatrixXd& B);

// (x^T (x) V)^T z, fully materialized.
VectorXd dense_vt_z(const VectorXd& x, const MatrixXd& V, const VectorXd& z);
// ((z x^T) (x) I_q) y_vec, fully materialized.
VectorXd dense_zx_I(const VectorXd& z, const VectorXd& x, const VectorXd& y_vec, Eigen::Index q);

// 1/2 ||Y - W G (X (x) V)^T Ztilde||_F^2 with everything dense.
double matrix_form_objective(const FactorSet<double>& f, const LagPairs<double>& pairs);

// A_t by explicit summation over the core entries.
MatrixXd tucker_coefficient(const FactorSet<double>& f, Eigen::Index t);

// Column c_t = (x_t^T (x) V)^T z_t via dense Kronecker materialization.
MatrixXd dense_core_inputs(const FactorSet<double>& f, const LagPairs<double>& pairs);

// Unregularized block minimizers.
MatrixXd least_squares_W(const FactorSet<double>& f, const LagPairs<double>& pairs);
MatrixXd least_squares_G(const FactorSet<double>& f, const LagPairs<double>& pairs);
MatrixXd least_squares_V(const FactorSet<double>& f, const LagPairs<double>& pairs);
MatrixXd least_squares_X(const FactorSet<double>& f, const LagPairs<double>& pairs);

// Central finite differences of the objective with respect to one block.
enum class Block { W, G, V, X };
MatrixXd finite_difference_gradient(const FactorSet<double>& f, const LagPairs<double>& pairs, Block block,
                                    double step = 1e-6);

// Dominant nonzero frequency (cycles per sample) of a mean-removed series,
// from a zero-padded FFT periodogram.
double dominant_frequency(const VectorXd& series, Eigen::Index padded_length = 8192);

} // namespace tvvar::oracle
