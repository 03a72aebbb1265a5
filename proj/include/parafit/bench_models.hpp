///
/// \file bench_models.hpp
///
/// Benchmark transfer functions: a parametrized Penzl-type system, a damped
/// second-order chain with proportional damping, and a 2-D
/// convection–diffusion discretization with two parameters.
///
#ifndef PARAFIT_BENCH_MODELS_HPP
#define PARAFIT_BENCH_MODELS_HPP

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include <parafit/model.hpp>
#include <parafit/multiparam.hpp>

namespace parafit
{

struct PenzlSpec
{
    std::vector<double> zetas{0.0, 0.29, 0.57, 0.86, 1.14, 1.43};
    std::vector<Complex> param_poles{Complex{0.4, 0.0}, Complex{2.0, 1.5}, Complex{2.0, -1.5},
                                     Complex{4.0, 0.8}, Complex{4.0, -0.8}, Complex{5.1, 0.0}};
    std::vector<Complex> mixing{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
};

/// 26×26 A(ζ) = blkdiag((ζ+1)²A₁, A₂, A₃, ζA₄).
MatrixR penzl_matrix(double zeta);
/// b(ζ) = c(ζ) = [10 ×6, 0 ×19, ζ+1].
VectorR penzl_vector(double zeta);

/// True when every parameter pole and mixing weight is real, i.e. H(conj s, p) = conj H(s, p) for real p.
bool penzl_is_real(const PenzlSpec& spec);

/// H(s,p) = Σ_k φ_k/(p − π_k) · G_k(s). Throws ParameterPoleHit.
Complex penzl_eval(const PenzlSpec& spec, Complex s, Complex p);

/// G_k(s) = c(ζ_k)ᵀ(sI − A(ζ_k))⁻¹ b(ζ_k).
Complex penzl_component(double zeta, Complex s);

struct ChainSpec
{
    int n = 200;
};

/// cᵀ(s²M + s(½M + pK) + K)⁻¹b with M = I/n, K = n·tridiag(−1, 2, −1), b = c = e_n.
Complex chain_eval(const ChainSpec& spec, Complex s, Complex p);

struct ConvDiffSpec
{
    int n = 20; ///< interior grid points per direction
};

///
/// Finite-difference operators on the unit square with homogeneous Dirichlet
/// boundary; nodes are numbered with z₁ fastest.
///
class ConvDiffSystem
{
public:
    explicit ConvDiffSystem(const ConvDiffSpec& spec);

    int grid() const { return n_; }
    const Eigen::SparseMatrix<double>& a0() const { return a0_; }
    const Eigen::SparseMatrix<double>& a1() const { return a1_; }
    const Eigen::SparseMatrix<double>& a2() const { return a2_; }
    const VectorR& b() const { return b_; }
    const VectorR& c() const { return c_; }

    /// cᵀ(sI − (A₀ + pA₁ + qA₂))⁻¹b. Throws SingularSystem.
    Complex operator()(Complex s, Complex p, Complex q) const;

private:
    int n_;
    Eigen::SparseMatrix<double> a0_;
    Eigen::SparseMatrix<double> a1_;
    Eigen::SparseMatrix<double> a2_;
    VectorR b_;
    VectorR c_;
};

Complex convdiff_eval(const ConvDiffSpec& spec, Complex s, Complex p, Complex q);

using Evaluator1 = std::function<Complex(Complex, Complex)>;
using Evaluator2 = std::function<Complex(Complex, Complex, Complex)>;

/// Column-parallel sampling; `real_system` marks evaluators with real
/// coefficients so imaginary-axis data is flagged real_symmetric.
FrequencyResponseDataset sample_model(const Evaluator1& eval, const VectorC& freqs,
                                      const VectorC& params, bool real_system = true);

FrequencyResponseDataset2 sample_model(const Evaluator2& eval, const VectorC& freqs,
                                       const VectorC& params_p, const VectorC& params_q,
                                       bool real_system = true);

} // namespace parafit

#endif /* PARAFIT_BENCH_MODELS_HPP */
