///
/// \file linalg.hpp
///
/// Dense complex linear-algebra kernels used by the fitting and compression
/// modules.
///
#ifndef PARAFIT_LINALG_HPP
#define PARAFIT_LINALG_HPP

#include <parafit/common.hpp>

namespace parafit
{

/// Result of a minimal-norm least-squares solve.
struct MinNormSolution
{
    MatrixC solution;
    Index rank = 0;
    double largest_singular_value = 0.0;
};

///
/// Minimal-Frobenius-norm minimizer of ‖A X − B‖_F via the SVD of A.
/// Singular values at or below `rank_tol` are treated as zero; a negative
/// tolerance selects max(m, n) · eps · σ_max.
///
MinNormSolution lstsq_minnorm(const MatrixC& a, const MatrixC& b,
                              double rank_tol = -1.0);

/// Moore–Penrose pseudoinverse with the same rank convention as lstsq_minnorm.
MatrixC pinv(const MatrixC& a, double rank_tol = -1.0);

/// Orthonormal basis of Ran(A) (left singular vectors above the rank cutoff).
MatrixC range_basis(const MatrixC& a, double rank_tol = -1.0);

struct EigenDecomposition
{
    VectorC values;
    MatrixC vectors; ///< right eigenvectors, unit 2-norm columns
};

/// Eigenvalues and right eigenvectors of a general complex matrix.
EigenDecomposition eig_general(const MatrixC& a);

/// Eigenvalues of a real matrix; complex pairs come out as exact conjugates.
VectorC eig_real(const MatrixR& a);

/// Upper-triangular R with Rᴴ R = G and real positive diagonal.
MatrixC cholesky_upper(const MatrixC& g);

/// Solves A x = b with partial pivoting; throws Singular on rank loss.
MatrixC solve_dense(const MatrixC& a, const MatrixC& b);

/// Kronecker product M ⊗ N.
MatrixC kron(const MatrixC& m, const MatrixC& n);

/// Column-stacking vec(·).
VectorC vec(const MatrixC& m);

/// Inverse of vec for an rows × cols matrix.
MatrixC unvec(const VectorC& v, Index rows, Index cols);

} // namespace parafit

#endif /* PARAFIT_LINALG_HPP */
