#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>

#include "tvvar/errors.hpp"
#include "tvvar/linalg.hpp"

namespace tvvar {

// Observation matrix S (N variables x T time steps); column t is s_t.
template <class Scalar>
class TimeSeries {
public:
    explicit TimeSeries(Matrix<Scalar> S) : S_(std::move(S)) {
        if (S_.rows() < 1) throw DataError("time series needs at least one variable");
        if (S_.cols() < 2) throw DataError("time series needs at least two time steps");
        require_finite(S_, "time series");
    }

    Eigen::Index N() const noexcept { return S_.rows(); }
    Eigen::Index T() const noexcept { return S_.cols(); }
    const Matrix<Scalar>& values() const noexcept { return S_; }

private:
    Matrix<Scalar> S_;
};

using TimeSeriesMatrix = TimeSeries<double>;

// Aligned regression pairs (y_t, z_t) for t = d+1..T with
// z_t = (s_{t-1}; s_{t-2}; ...; s_{t-d}). Pair i (0-based) is time t = d+1+i.
template <class Scalar>
class LagPairs {
public:
    LagPairs(const TimeSeries<Scalar>& series, Eigen::Index d)
        : d_(d), S_(series.values()) {
        const Eigen::Index N = series.N();
        const Eigen::Index T = series.T();
        if (d < 1 || d > T - 1)
            throw ParameterError("lag order d=" + std::to_string(d) + " outside [1, T-1=" +
                                 std::to_string(T - 1) + "]");
        const Eigen::Index count = T - d;
        Z_.resize(d * N, count);
        for (Eigen::Index k = 0; k < d; ++k) Z_.middleRows(k * N, N) = S_.middleCols(d - k - 1, count);
    }

    Eigen::Index d() const noexcept { return d_; }
    Eigen::Index N() const noexcept { return S_.rows(); }
    Eigen::Index T() const noexcept { return S_.cols(); }
    Eigen::Index count() const noexcept { return Z_.cols(); }

    // Y = [y_{d+1} ... y_T], N x count.
    auto Y() const { return S_.rightCols(count()); }
    // Z = [z_{d+1} ... z_T], dN x count.
    const Matrix<Scalar>& Z() const noexcept { return Z_; }
    const Matrix<Scalar>& S() const noexcept { return S_; }

    auto y(Eigen::Index i) const { return S_.col(d_ + i); }
    auto z(Eigen::Index i) const { return Z_.col(i); }

private:
    Eigen::Index d_;
    Matrix<Scalar> S_;
    Matrix<Scalar> Z_;
};

template <class Scalar>
LagPairs<Scalar> lag_embed(const TimeSeries<Scalar>& series, Eigen::Index d) {
    return LagPairs<Scalar>(series, d);
}

template <class Scalar>
struct MatrixForm {
    Matrix<Scalar> Y;       // N x (T-d)
    Matrix<Scalar> Ztilde;  // dN(T-d) x (T-d), block diagonal in z_t
};

inline constexpr std::size_t kMatrixFormCap = 10'000'000;

// Dense matrix-form data for small-scale verification. The cap bounds the
// number of dense entries of Ztilde.
template <class Scalar>
MatrixForm<Scalar> build_matrix_form(const LagPairs<Scalar>& pairs,
                                     std::size_t cap = kMatrixFormCap) {
    const auto count = static_cast<std::size_t>(pairs.count());
    const auto dn = static_cast<std::size_t>(pairs.Z().rows());
    if (dn * count * count > cap)
        throw SizeError("matrix form needs " + std::to_string(dn * count * count) +
                        " entries (cap " + std::to_string(cap) +
                        "); use the vector-form objective instead");
    MatrixForm<Scalar> out;
    out.Y = pairs.Y();
    out.Ztilde = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(dn * count), pairs.count());
    for (Eigen::Index i = 0; i < pairs.count(); ++i)
        out.Ztilde.block(i * static_cast<Eigen::Index>(dn), i, static_cast<Eigen::Index>(dn), 1) =
            pairs.z(i);
    return out;
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

struct CsvOptions {
    bool skip_header = false;
    bool transpose = false;  // file stores time steps as rows
};

// Reads any rectangular numeric CSV (no shape constraints beyond nonempty).
MatrixXd read_csv_matrix(const std::filesystem::path& path, bool skip_header = false);
MatrixXd parse_csv_matrix(const std::string& text, bool skip_header = false);

// 17 significant digits, '\n' line endings.
void write_csv_matrix(const std::filesystem::path& path, const MatrixXd& M);
std::string format_csv_matrix(const MatrixXd& M);

TimeSeriesMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void save_csv(const std::filesystem::path& path, const TimeSeriesMatrix& series);

// "TVM1" | u64 N | u64 T | N*T f64, column-major, little-endian.
MatrixXd read_binary_matrix(const std::filesystem::path& path);
void write_binary_matrix(const std::filesystem::path& path, const MatrixXd& M);

// Dispatches on the TVM1 magic; everything else is parsed as CSV.
TimeSeriesMatrix load_series(const std::filesystem::path& path, const CsvOptions& options = {});

} // namespace tvvar
