///
/// \file multiparam.hpp
///
/// Two-parameter extension on tensor grids. Column c of the flattened data
/// belongs to (μ_{j1}, η_{j2}) with c = (j1 − 1)·m_q + j2 (1-based), so the
/// q-index varies fastest.
///
#ifndef PARAFIT_MULTIPARAM_HPP
#define PARAFIT_MULTIPARAM_HPP

#include <optional>
#include <vector>

#include <parafit/compress.hpp>
#include <parafit/vecfit.hpp>

namespace parafit
{

/// Largest total local state count the two-parameter fit accepts.
inline constexpr Index kMaxTwoParamStates = 5000;

struct FrequencyResponseDataset2
{
    VectorC frequencies;
    VectorC params_p;
    VectorC params_q;
    MatrixC samples; ///< m_s × (m_p·m_q), q-major columns
    std::optional<MatrixR> weights;
    bool real_symmetric = false;

    Index num_frequencies() const { return frequencies.size(); }
    void validate() const;
};

/// 1-based (j1, j2) → 1-based flattened column. Throws OutOfRange.
Index flatten_index(Index j1, Index j2, Index m_p, Index m_q);

/// Inverse of flatten_index: 1-based column → 1-based (j1, j2).
std::pair<Index, Index> unflatten_index(Index c, Index m_p, Index m_q);

class ParametricModel2
{
public:
    ParametricModel2(std::vector<PoleResidueModel> local_models, ParametricBasis basis_p,
                     ParametricBasis basis_q, MatrixC coefficients, bool real_flag = false);

    const std::vector<PoleResidueModel>& local_models() const { return local_; }
    const ParametricBasis& basis_p() const { return bp_; }
    const ParametricBasis& basis_q() const { return bq_; }
    const MatrixC& coefficients() const { return coeffs_; }
    bool real_flag() const { return real_flag_; }

    Index state_order() const;
    bool stable() const;

    /// Kronecker basis values P(p) ⊗ Q(q), q-major.
    VectorC basis_values(Complex p, Complex q) const;

    Complex operator()(Complex s, Complex p, Complex q) const;

private:
    std::vector<PoleResidueModel> local_;
    ParametricBasis bp_;
    ParametricBasis bq_;
    MatrixC coeffs_;
    bool real_flag_;
};

struct TwoParamConfig
{
    std::vector<int> local_orders; ///< per local model; empty ⇒ vf.order
    VFConfig vf;
    ParametricBasis basis_p = ParametricBasis::monomial(0, 0.0, 1.0);
    ParametricBasis basis_q = ParametricBasis::monomial(0, 0.0, 1.0);
    /// Keep every `stride`-th grid point (row-major over (j1, j2)) as a local model.
    int decimation = 1;
    bool enforce_real = false;
};

struct TwoParamResult
{
    ParametricModel2 model;
    std::vector<VFResult> local_fits;
    double residual = 0.0;
    double relative_residual = 0.0;
    bool all_converged = true;
    bool rank_deficient = false;
};

TwoParamResult fit_two_param(const FrequencyResponseDataset2& data, const TwoParamConfig& config);

struct CompressedParametricModel2
{
    ParametricBasis basis_p;
    ParametricBasis basis_q;
    MatrixC gram_chol; ///< R_p ⊗ R_q
    MatrixC a_red;
    VectorC b_red;
    MatrixC c_red_unweighted;
    bool real_flag = false;

    Complex operator()(Complex s, Complex p, Complex q) const;
};

struct CompressResult2
{
    CompressedParametricModel2 model;
    IRKAResult irka;
    double error = 0.0;
    double reference_norm = 0.0;
};

SIMORealization assemble_simo(const ParametricModel2& model);

/// Phase 2 on the flattened r_p·r_q-member basis with Gram_p ⊗ Gram_q.
CompressResult2 compress_two_param(const ParametricModel2& model, const IRKAConfig& config);

} // namespace parafit

#endif /* PARAFIT_MULTIPARAM_HPP */
