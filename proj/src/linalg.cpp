#include <parafit/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace parafit
{

const char* to_string(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::PoleEvaluation: return "PoleEvaluation";
    case ErrorCode::BasisPoleHit: return "BasisPoleHit";
    case ErrorCode::SingularResolvent: return "SingularResolvent";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::UnstableSystem: return "UnstableSystem";
    case ErrorCode::GuardViolation: return "GuardViolation";
    case ErrorCode::ProblemTooLarge: return "ProblemTooLarge";
    case ErrorCode::BasisMismatch: return "BasisMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ParameterPoleHit: return "ParameterPoleHit";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SingularProjection: return "SingularProjection";
    case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

namespace
{

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_finite(const MatrixC& m, const char* name)
{
    if (!m.allFinite())
    {
        throw Error(ErrorCode::NonFinite, std::string(name) + " has NaN/Inf");
    }
}

struct ThinSvd
{
    MatrixC u;
    VectorR sigma;
    MatrixC v;
    Index rank;
};

ThinSvd thin_svd(const MatrixC& a, double rank_tol)
{
    Eigen::BDCSVD<MatrixC> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV(), 0};
    const double smax = out.sigma.size() > 0 ? out.sigma(0) : 0.0;
    const double tol =
        rank_tol >= 0.0
            ? rank_tol
            : static_cast<double>(std::max(a.rows(), a.cols())) * kEps * smax;
    for (Index i = 0; i < out.sigma.size(); ++i)
    {
        if (out.sigma(i) > tol)
        {
            ++out.rank;
        }
    }
    return out;
}

} // namespace

MinNormSolution lstsq_minnorm(const MatrixC& a, const MatrixC& b,
                              double rank_tol)
{
    if (a.rows() < 1 || a.cols() < 1 || b.cols() < 1)
    {
        throw Error(ErrorCode::ShapeMismatch, "lstsq_minnorm: empty operand");
    }
    if (a.rows() != b.rows())
    {
        throw Error(ErrorCode::ShapeMismatch,
                    "lstsq_minnorm: row count of A and B differ");
    }
    require_finite(a, "A");
    require_finite(b, "B");

    const ThinSvd s = thin_svd(a, rank_tol);
    MinNormSolution out;
    out.rank = s.rank;
    out.largest_singular_value = s.sigma.size() > 0 ? s.sigma(0) : 0.0;
    const Index r = s.rank;
    if (r == 0)
    {
        out.solution = MatrixC::Zero(a.cols(), b.cols());
        return out;
    }
    MatrixC coeff = s.u.leftCols(r).adjoint() * b;
    for (Index i = 0; i < r; ++i)
    {
        coeff.row(i) /= s.sigma(i);
    }
    out.solution = s.v.leftCols(r) * coeff;
    return out;
}

MatrixC pinv(const MatrixC& a, double rank_tol)
{
    require_finite(a, "A");
    const ThinSvd s = thin_svd(a, rank_tol);
    const Index r = s.rank;
    if (r == 0)
    {
        return MatrixC::Zero(a.cols(), a.rows());
    }
    MatrixC vs = s.v.leftCols(r);
    for (Index i = 0; i < r; ++i)
    {
        vs.col(i) /= s.sigma(i);
    }
    return vs * s.u.leftCols(r).adjoint();
}

MatrixC range_basis(const MatrixC& a, double rank_tol)
{
    require_finite(a, "A");
    const ThinSvd s = thin_svd(a, rank_tol);
    return s.u.leftCols(s.rank);
}

EigenDecomposition eig_general(const MatrixC& a)
{
    if (a.rows() != a.cols() || a.rows() < 1)
    {
        throw Error(ErrorCode::ShapeMismatch, "eig_general: matrix not square");
    }
    require_finite(a, "A");
    Eigen::ComplexEigenSolver<MatrixC> solver(a, true);
    if (solver.info() != Eigen::Success)
    {
        throw Error(ErrorCode::NoConvergence,
                    "eig_general: QR iteration did not converge");
    }
    EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
    for (Index j = 0; j < out.vectors.cols(); ++j)
    {
        const double nrm = out.vectors.col(j).norm();
        if (nrm > 0.0)
        {
            out.vectors.col(j) /= nrm;
        }
    }
    return out;
}

VectorC eig_real(const MatrixR& a)
{
    if (a.rows() != a.cols() || a.rows() < 1)
    {
        throw Error(ErrorCode::ShapeMismatch, "eig_real: matrix not square");
    }
    if (!a.allFinite())
    {
        throw Error(ErrorCode::NonFinite, "eig_real: A has NaN/Inf");
    }
    Eigen::EigenSolver<MatrixR> solver(a, false);
    if (solver.info() != Eigen::Success)
    {
        throw Error(ErrorCode::NoConvergence,
                    "eig_real: QR iteration did not converge");
    }
    return solver.eigenvalues();
}

MatrixC cholesky_upper(const MatrixC& g)
{
    const Index n = g.rows();
    if (n != g.cols() || n < 1)
    {
        throw Error(ErrorCode::ShapeMismatch, "cholesky_upper: not square");
    }
    require_finite(g, "G");
    const double scale = g.cwiseAbs().maxCoeff();
    if ((g - g.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300))
    {
        throw Error(ErrorCode::InvalidArgument, "cholesky_upper: G not Hermitian");
    }

    MatrixC r = MatrixC::Zero(n, n);
    for (Index j = 0; j < n; ++j)
    {
        Complex acc = g(j, j);
        for (Index k = 0; k < j; ++k)
        {
            acc -= std::conj(r(k, j)) * r(k, j);
        }
        const double pivot = acc.real();
        if (!(pivot > 0.0))
        {
            throw Error(ErrorCode::NotPositiveDefinite,
                        "cholesky_upper: non-positive pivot at column " +
                            std::to_string(j));
        }
        const double rjj = std::sqrt(pivot);
        r(j, j) = rjj;
        for (Index i = j + 1; i < n; ++i)
        {
            Complex s = g(j, i);
            for (Index k = 0; k < j; ++k)
            {
                s -= std::conj(r(k, j)) * r(k, i);
            }
            r(j, i) = s / rjj;
        }
    }
    return r;
}

MatrixC solve_dense(const MatrixC& a, const MatrixC& b)
{
    if (a.rows() != a.cols() || a.rows() != b.rows())
    {
        throw Error(ErrorCode::ShapeMismatch, "solve_dense: shape mismatch");
    }
    require_finite(a, "A");
    require_finite(b, "b");
    Eigen::PartialPivLU<MatrixC> lu(a);
    const double rc = lu.rcond();
    if (!(rc > static_cast<double>(a.rows()) * kEps))
    {
        throw Error(ErrorCode::Singular, "solve_dense: matrix is numerically singular");
    }
    MatrixC x = lu.solve(b);
    if (!x.allFinite())
    {
        throw Error(ErrorCode::Singular, "solve_dense: non-finite solution");
    }
    return x;
}

MatrixC kron(const MatrixC& m, const MatrixC& n)
{
    MatrixC out(m.rows() * n.rows(), m.cols() * n.cols());
    for (Index i = 0; i < m.rows(); ++i)
    {
        for (Index j = 0; j < m.cols(); ++j)
        {
            out.block(i * n.rows(), j * n.cols(), n.rows(), n.cols()) = m(i, j) * n;
        }
    }
    return out;
}

VectorC vec(const MatrixC& m)
{
    return Eigen::Map<const VectorC>(m.data(), m.size());
}

MatrixC unvec(const VectorC& v, Index rows, Index cols)
{
    if (v.size() != rows * cols)
    {
        throw Error(ErrorCode::ShapeMismatch, "unvec: size mismatch");
    }
    return Eigen::Map<const MatrixC>(v.data(), rows, cols);
}

} // namespace parafit
