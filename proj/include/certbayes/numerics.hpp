#pragma once

#include <certbayes/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace certbayes {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/**
 * Dense symmetric positive-definite matrix together with its Cholesky
 * factor. Construction symmetrizes the input as (M + M^T)/2 after checking
 * that the raw asymmetry is within 1e-12 relative, then factorizes; a
 * failed factorization rejects the matrix.
 *
 * Every instance in this library is I-plus-Gram shaped, so Cholesky is
 * always the right tool and a failed pivot is a real error.
 */
template <typename Scalar>
class SpdMatrix
{
public:
    using Matrix = MatrixX<Scalar>;
    using Vector = VectorX<Scalar>;

    template <typename Derived>
    explicit SpdMatrix(const Eigen::MatrixBase<Derived>& m)
    {
        detail::require(m.rows() == m.cols() && m.rows() > 0, ErrorCode::DimensionMismatch,
                        "SPD matrix must be square and non-empty, got "
                            + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
        detail::require(m.allFinite(), ErrorCode::NonFiniteEntry, "SPD matrix has non-finite entries");
        const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
        const Scalar asym = (m - m.transpose()).cwiseAbs().maxCoeff();
        detail::require(asym <= Scalar(1e-12) * scale, ErrorCode::InvalidArgument,
                        "matrix is not symmetric (max asymmetry " + std::to_string(double(asym)) + ")");
        matrix_ = (m + m.transpose()) / Scalar(2);
        llt_.compute(matrix_);
        detail::require(llt_.info() == Eigen::Success, ErrorCode::NotPositiveDefinite,
                        "Cholesky factorization failed (non-positive pivot)");
    }

    Eigen::Index dim() const noexcept { return matrix_.rows(); }
    const Matrix& matrix() const noexcept { return matrix_; }
    const Eigen::LLT<Matrix>& llt() const noexcept { return llt_; }

    Scalar logdet() const
    {
        return Scalar(2) * llt_.matrixLLT().diagonal().array().log().sum();
    }

    template <typename Derived>
    Vector solve(const Eigen::MatrixBase<Derived>& b) const
    {
        check_length(b.size());
        return llt_.solve(b);
    }

    /// v^T M^{-1} v = |L^{-1} v|^2, nonnegative by construction.
    template <typename Derived>
    Scalar quad_form_inv(const Eigen::MatrixBase<Derived>& v) const
    {
        check_length(v.size());
        return llt_.matrixL().solve(v).squaredNorm();
    }

private:
    void check_length(Eigen::Index len) const
    {
        detail::require(len == dim(), ErrorCode::DimensionMismatch,
                        "vector length " + std::to_string(len) + " does not match matrix dimension "
                            + std::to_string(dim()));
    }

    Matrix matrix_;
    Eigen::LLT<Matrix> llt_;
};

template <typename Derived>
SpdMatrix(const Eigen::MatrixBase<Derived>&) -> SpdMatrix<typename Derived::Scalar>;

template <typename Scalar>
Scalar spd_logdet(const SpdMatrix<Scalar>& m)
{
    return m.logdet();
}

template <typename Scalar, typename Derived>
VectorX<Scalar> spd_solve(const SpdMatrix<Scalar>& m, const Eigen::MatrixBase<Derived>& b)
{
    return m.solve(b);
}

template <typename Scalar, typename Derived>
Scalar quad_form_inv(const SpdMatrix<Scalar>& m, const Eigen::MatrixBase<Derived>& v)
{
    return m.quad_form_inv(v);
}

enum class GramSide {
    Features, ///< d x d: shift*I_d + scale*X^T X
    Samples,  ///< n x n: shift*I_n + scale*X X^T
};

/// shift*I + scale*Gram(X), accumulated through a symmetric rank update.
template <typename Derived>
SpdMatrix<typename Derived::Scalar> shifted_gram(const Eigen::MatrixBase<Derived>& x,
                                                 typename Derived::Scalar shift,
                                                 typename Derived::Scalar scale, GramSide side)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index k = side == GramSide::Features ? x.cols() : x.rows();
    MatrixX<Scalar> g = MatrixX<Scalar>::Identity(k, k) * shift;
    if (side == GramSide::Features)
        g.template selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), scale);
    else
        g.template selfadjointView<Eigen::Lower>().rankUpdate(x, scale);
    g.template triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return SpdMatrix<Scalar>(g);
}

} // namespace certbayes
