#pragma once

#include <Eigen/Dense>

#include <string>

#include "dbnmf/errors.hpp"

namespace dbnmf {

using Index = Eigen::Index;

// Row-major storage matches the on-disk layout and makes row-separable
// kernels walk contiguous memory.
template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using DenseMatrix = Matrix<double>;
using DenseVector = Vector<double>;

inline std::string shape_string(Index rows, Index cols)
{
    return std::to_string(rows) + "x" + std::to_string(cols);
}

template <class DerivedA, class DerivedB>
void require_same_shape(const Eigen::MatrixBase<DerivedA>& a,
                        const Eigen::MatrixBase<DerivedB>& b,
                        const char* where)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(where) + ": shape mismatch " +
                             shape_string(a.rows(), a.cols()) + " vs " +
                             shape_string(b.rows(), b.cols()));
    }
}

/// Entrywise max(M, eps). Signed zeros and negatives both map to eps.
template <class Derived>
Matrix<typename Derived::Scalar> epsilon_floor(const Eigen::MatrixBase<Derived>& m,
                                               typename Derived::Scalar eps)
{
    return m.derived().cwiseMax(eps);
}

/// Divide each row by its sum.
template <class Scalar>
void normalize_rows(Matrix<Scalar>& m)
{
    for (Index i = 0; i < m.rows(); ++i) {
        const Scalar s = m.row(i).sum();
        if (s > Scalar(0)) m.row(i) /= s;
    }
}

/// Divide each column by its sum.
template <class Scalar>
void normalize_cols(Matrix<Scalar>& m)
{
    for (Index j = 0; j < m.cols(); ++j) {
        const Scalar s = m.col(j).sum();
        if (s > Scalar(0)) m.col(j) /= s;
    }
}

} // namespace dbnmf
