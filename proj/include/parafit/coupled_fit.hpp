///
/// \file coupled_fit.hpp
///
/// Fixed-basis parametric fitting: one local model per parameter sample,
/// coupled through a two-sided least-squares problem for the coefficients.
///
#ifndef PARAFIT_COUPLED_FIT_HPP
#define PARAFIT_COUPLED_FIT_HPP

#include <optional>
#include <vector>

#include <parafit/model.hpp>
#include <parafit/vecfit.hpp>

namespace parafit
{

struct DesignMatrices
{
    MatrixC a; ///< m_s × r_s, a(i, j) = 𝔥_j(ξ_i)
    MatrixC b; ///< m_p × r_p, b(i, j) = P_j(μ_i)
};

/// Largest (m_s·m_p) row count the weighted solve will materialize.
inline constexpr Index kMaxWeightedRows = 20000;

DesignMatrices build_design(const std::vector<PoleResidueModel>& local_models,
                            const VectorC& freqs, const ParametricBasis& basis,
                            const VectorC& params);

struct CoupledSolution
{
    MatrixC x;
    bool rank_deficient = false;
    Index rank_a = 0; ///< rank of A (unweighted) or of the weighted Kronecker matrix
    Index rank_b = 0; ///< rank of B (unweighted path only)
};

/// X̂ = A†·H·(B†)ᵀ, or the weighted minimal-norm Kronecker solve when weights
/// are given. Throws ProblemTooLarge above kMaxWeightedRows weighted rows.
CoupledSolution solve_coupled(const DesignMatrices& design, const MatrixC& h,
                              const std::optional<MatrixR>& weights = std::nullopt);

/// x_{k,ℓ} ← (x_{k,ℓ} + conj x_{k,ρ(ℓ)}) / 2.
MatrixC project_real(const MatrixC& x, const ParametricBasis& basis);

/// ‖W^{1/2} ∘ (A X Bᵀ − H)‖_F.
double coupled_residual(const DesignMatrices& design, const MatrixC& x, const MatrixC& h,
                        const std::optional<MatrixR>& weights = std::nullopt);

struct Phase1Config
{
    /// Per-column orders; empty means `vf.order` for every column.
    std::vector<int> local_orders;
    VFConfig vf;
    ParametricBasis basis = ParametricBasis::monomial(0, 0.0, 1.0);
    /// Overrides the dataset weights when set.
    std::optional<MatrixR> weights;
    bool enforce_real = false;
};

struct Phase1Result
{
    ParametricModel model;
    std::vector<VFResult> local_fits;
    double residual = 0.0;          ///< weighted Frobenius residual
    double relative_residual = 0.0; ///< residual / ‖W^{1/2} ∘ H‖_F
    VectorR rms_per_parameter;      ///< relative RMS error of each data column
    bool all_converged = true;
    bool rank_deficient = false;
};

/// One VF fit per parameter column (order-preserving parallel map).
std::vector<VFResult> fit_local_models(const FrequencyResponseDataset& data,
                                       const std::vector<int>& orders, const VFConfig& vf,
                                       bool force_real);

/// Coupled solve + optional realness projection for given local fits.
Phase1Result couple_local_models(const FrequencyResponseDataset& data,
                                 std::vector<VFResult> local_fits,
                                 const ParametricBasis& basis,
                                 const std::optional<MatrixR>& weights, bool enforce_real);

Phase1Result fit_fixed_basis(const FrequencyResponseDataset& data, const Phase1Config& config);

} // namespace parafit

#endif /* PARAFIT_COUPLED_FIT_HPP */
