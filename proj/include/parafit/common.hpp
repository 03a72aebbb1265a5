///
/// \file common.hpp
///
/// Scalar and container aliases shared by every parafit module, plus the
/// library's exception type.
///
#ifndef PARAFIT_COMMON_HPP
#define PARAFIT_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace parafit
{

using Index    = Eigen::Index;
using Complex  = std::complex<double>;
using VectorC  = Eigen::VectorXcd;
using VectorR  = Eigen::VectorXd;
using MatrixC  = Eigen::MatrixXcd;
using MatrixR  = Eigen::MatrixXd;

inline constexpr Complex kI{0.0, 1.0};

///
/// Failure categories. Informational conditions (rank deficiency, slow
/// convergence) are reported through result structs instead.
///
enum class ErrorCode
{
    InvalidArgument,
    ShapeMismatch,
    NonFinite,
    PoleEvaluation,
    BasisPoleHit,
    SingularResolvent,
    Singular,
    NoConvergence,
    NotPositiveDefinite,
    Unstable,
    UnstableSystem,
    GuardViolation,
    ProblemTooLarge,
    BasisMismatch,
    OutOfRange,
    ParameterPoleHit,
    SingularSystem,
    SingularProjection,
    Parse,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          code_(code)
    {
    }

    ErrorCode code() const noexcept
    {
        return code_;
    }

private:
    ErrorCode code_;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m)
{
    return m.allFinite();
}

inline bool is_finite(Complex z)
{
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

} // namespace parafit

#endif /* PARAFIT_COMMON_HPP */
