///
/// \file model.hpp
///
/// Domain types: sampled frequency-response data, local rational models,
/// parametric bases, and the parametric models built from them.
///
#ifndef PARAFIT_MODEL_HPP
#define PARAFIT_MODEL_HPP

#include <optional>
#include <vector>

#include <parafit/common.hpp>

namespace parafit
{

///
/// Transfer-function samples H(ξ_i, μ_j) on a frequency × parameter grid.
/// Row i belongs to frequency ξ_i, column j to parameter μ_j.
///
struct FrequencyResponseDataset
{
    VectorC frequencies;
    VectorC parameters;
    MatrixC samples;
    std::optional<MatrixR> weights;
    bool real_symmetric = false;

    Index num_frequencies() const { return frequencies.size(); }
    Index num_parameters() const { return parameters.size(); }

    /// Weights with the all-ones default filled in.
    MatrixR effective_weights() const;

    /// Throws InvalidArgument / ShapeMismatch / NonFinite on a broken invariant.
    void validate() const;
};

///
/// Strictly proper rational function Σ_k φ_k / (s − λ_k).
///
class PoleResidueModel
{
public:
    PoleResidueModel(VectorC poles, VectorC residues, bool real_flag = false);

    const VectorC& poles() const { return poles_; }
    const VectorC& residues() const { return residues_; }
    bool real_flag() const { return real_flag_; }
    Index order() const { return poles_.size(); }

    Complex operator()(Complex s) const;

    /// True iff every pole has negative real part.
    bool stable() const;

private:
    VectorC poles_;
    VectorC residues_;
    bool real_flag_;
};

///
/// Barycentric form n(s)/d(s) with n = Σ ψ_k/(s−λ_k), d = 1 + Σ φ_k/(s−λ_k).
///
class BarycentricModel
{
public:
    BarycentricModel(VectorC nodes, VectorC num_residues, VectorC den_residues);

    const VectorC& nodes() const { return nodes_; }
    const VectorC& num_residues() const { return num_; }
    const VectorC& den_residues() const { return den_; }

    Complex operator()(Complex s) const;

private:
    VectorC nodes_;
    VectorC num_;
    VectorC den_;
};

enum class BasisKind
{
    Monomial,
    Bernstein,
    RationalPoles,
};

///
/// Parametric basis {P_ℓ(p)} over the real interval [lower, upper].
///
/// `conj_perm()[ℓ]` is the index ρ(ℓ) with P_ℓ(conj p) = conj(P_ρ(ℓ)(p));
/// it is the identity for the polynomial kinds.
///
class ParametricBasis
{
public:
    static ParametricBasis monomial(int degree, double lower, double upper);
    static ParametricBasis bernstein(int degree, double lower, double upper);
    static ParametricBasis rational(VectorC poles, double lower, double upper);

    BasisKind kind() const { return kind_; }
    int degree() const { return degree_; }
    const VectorC& poles() const { return poles_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    Index size() const;

    const std::vector<Index>& conj_perm() const { return conj_perm_; }
    /// False when a rational pole set is not closed under conjugation.
    bool conjugation_closed() const { return conj_closed_; }

    /// [P_1(p) … P_r(p)].
    VectorC eval(Complex p) const;

    /// B[i, ℓ] = P_ℓ(params_i).
    MatrixC design(const VectorC& params) const;

    bool operator==(const ParametricBasis& other) const;
    bool operator!=(const ParametricBasis& other) const { return !(*this == other); }

private:
    ParametricBasis() = default;

    BasisKind kind_ = BasisKind::Monomial;
    int degree_ = 0;
    VectorC poles_;
    double lower_ = 0.0;
    double upper_ = 1.0;
    std::vector<Index> conj_perm_;
    bool conj_closed_ = true;
};

/// ρ for a pole list: ρ(ℓ) = index of conj(π_ℓ), or std::nullopt if absent.
std::optional<std::vector<Index>> conjugation_permutation(const VectorC& poles,
                                                          double rel_tol = 1e-12);

///
/// Ĥ(s, p) = Σ_{k,ℓ} x_{kℓ} 𝔥_k(s) P_ℓ(p).
///
class ParametricModel
{
public:
    ParametricModel(std::vector<PoleResidueModel> local_models,
                    ParametricBasis basis, MatrixC coefficients,
                    bool real_flag = false);

    const std::vector<PoleResidueModel>& local_models() const { return local_; }
    const ParametricBasis& basis() const { return basis_; }
    const MatrixC& coefficients() const { return coeffs_; }
    bool real_flag() const { return real_flag_; }

    /// Σ_k ν_k.
    Index state_order() const;

    Complex operator()(Complex s, Complex p) const;

    /// Depends only on the local models, so one check covers every p.
    bool stable() const;

    /// Union of local poles in storage order.
    VectorC poles() const;

private:
    std::vector<PoleResidueModel> local_;
    ParametricBasis basis_;
    MatrixC coeffs_;
    bool real_flag_;
};

///
/// Parameter-free SIMO system 𝔾(s) = C (sI − diag(a))⁻¹ b.
///
struct SIMORealization
{
    VectorC a_diag;
    VectorC b;
    MatrixC c; ///< outputs × states

    Index states() const { return a_diag.size(); }
    Index outputs() const { return c.rows(); }

    VectorC operator()(Complex s) const;
    void validate() const;
};

///
/// Ĥ_red(s, p) = V(p)ᵀ · c_red_unweighted · (sI − a_red)⁻¹ b_red.
///
struct CompressedParametricModel
{
    ParametricBasis basis;
    MatrixC gram_chol;
    MatrixC a_red;
    VectorC b_red;
    MatrixC c_red_unweighted;
    bool real_flag = false;

    Index order() const { return a_red.rows(); }

    Complex operator()(Complex s, Complex p) const;
    VectorC reduced_response(Complex s) const;

    bool stable() const;
    void validate() const;
};

} // namespace parafit

#endif /* PARAFIT_MODEL_HPP */
