///
/// \file varpro.hpp
///
/// Adaptive rational parametric basis: the linear coefficients are eliminated
/// and damped Gauss–Newton runs on the basis poles alone.
///
#ifndef PARAFIT_VARPRO_HPP
#define PARAFIT_VARPRO_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <parafit/coupled_fit.hpp>

namespace parafit
{

///
/// Real coordinates of a conjugation-closed pole set. Poles are laid out as
/// the real poles followed by (π, conj π) for each pair; the coordinate
/// vector is [real poles…, Re π₁, Im π₁, Re π₂, Im π₂, …].
///
struct PoleCoordinates
{
    std::vector<double> real_poles;
    std::vector<std::pair<double, double>> pair_poles; ///< (Re, Im), Im > 0

    Index count() const;
    Index num_coords() const;
    VectorC poles() const;
    VectorR coords() const;
    static PoleCoordinates from_coords(const VectorR& theta, Index num_real);
    /// Splits a conjugation-closed pole list; throws InvalidArgument otherwise.
    static PoleCoordinates from_poles(const VectorC& poles);
};

enum class JacobianMode
{
    GolubPereyra,
    Kaufman,
    FiniteDifference,
};

struct VarproConfig
{
    int max_iters = 100;
    double grad_tol = 1e-8;
    double armijo = 1e-4;
    int max_halvings = 30;
    /// Negative selects 0.05·(b − a).
    double guard = -1.0;
    JacobianMode jacobian = JacobianMode::GolubPereyra;
    bool enforce_real = false;
};

/// Distance margin actually used for the interval [lower, upper].
double guard_margin(const VarproConfig& config, double lower, double upper);

/// Default start: r_p − 2·pairs real poles alternately left and right of the
/// interval, plus `pairs` conjugate pairs spread over the interval at height (b − a)/2.
PoleCoordinates default_initial_poles(Index r_p, double lower, double upper, Index pairs = 0);

/// vec(H − P H conj(Q)) with P = A A†, Q = B(π) B(π)†.
VectorC varpro_residual(const PoleCoordinates& pi, const MatrixC& a, const MatrixC& h,
                        const VectorC& params, double lower, double upper, double guard);

/// ∂r/∂θ for the real coordinates θ of `pi`.
MatrixC varpro_jacobian(const PoleCoordinates& pi, const MatrixC& a, const MatrixC& h,
                        const VectorC& params, double lower, double upper, double guard,
                        JacobianMode mode);

struct VarproResult
{
    ParametricModel model;
    PoleCoordinates poles;
    int iterations = 0;
    bool converged = false;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    double gradient_norm = 0.0;
    std::string diagnostic;
};

/// Throws GuardViolation when the start violates the guard margin.
VarproResult fit_adaptive_basis(const FrequencyResponseDataset& data,
                                const std::vector<PoleResidueModel>& local_models,
                                double lower, double upper,
                                const PoleCoordinates& initial,
                                const VarproConfig& config);

} // namespace parafit

#endif /* PARAFIT_VARPRO_HPP */
