///
/// \file compress.hpp
///
/// Joint frequency/parameter compression: the parametric model is rewritten
/// as one parameter-free SIMO system, weighted by the Cholesky factor of the
/// basis Gram matrix, and reduced by tangential IRKA.
///
#ifndef PARAFIT_COMPRESS_HPP
#define PARAFIT_COMPRESS_HPP

#include <functional>
#include <string>

#include <parafit/model.hpp>

namespace parafit
{

enum class IRKAInit
{
    DominantPoles,
    LogSpaced,
};

struct IRKAConfig
{
    int n_red = 1;
    int max_iters = 100;
    double shift_tol = 1e-6;
    bool flip_unstable_reduced = true;
    IRKAInit init = IRKAInit::DominantPoles;
    /// Keep shifts closed under conjugation and project in real coordinates
    /// when the input system is real.
    bool preserve_realness = false;
};

/// Dense reduced realization (a, b, c).
struct ReducedSystem
{
    MatrixC a;
    VectorC b;
    MatrixC c;

    VectorC operator()(Complex s) const;
};

struct IRKAResult
{
    ReducedSystem reduced;   ///< projected system at the final shifts
    ReducedSystem diagonal;  ///< same system diagonalized, poles flipped if requested
    VectorC shifts;          ///< interpolation points of `reduced`
    MatrixC tangents;        ///< r_p × n_red left tangential directions
    int iterations = 0;
    int restarts = 0;
    bool converged = false;
    std::string diagnostic;
};

/// a = concatenated local poles, b = 1, c[ℓ, i] = φ_i · x_{k(i), ℓ}.
/// Poles repeated across local models are perturbed by 1e-10 relative.
SIMORealization assemble_simo(const ParametricModel& model);

/// G_ij = ∫ conj(P_i(p)) P_j(p) dp by 200-point Gauss–Legendre.
MatrixC gram_matrix(const ParametricBasis& basis);

/// Pole-residue H2 norm (extended-precision accumulation). Throws UnstableSystem.
double h2_norm_simo(const SIMORealization& sys);

/// Same system with c ← R·c.
SIMORealization weight_outputs(const SIMORealization& sys, const MatrixC& r);

/// Tangential IRKA for a stable diagonal SIMO system.
IRKAResult irka_simo(const SIMORealization& sys, const IRKAConfig& config);

/// Diagonalizes a reduced realization into SIMO form.
SIMORealization diagonalize(const ReducedSystem& sys);

struct CompressResult
{
    CompressedParametricModel model;
    IRKAResult irka;
    double error = 0.0;          ///< ‖Ĥ − Ĥ_red‖ in H2⊗L2
    double reference_norm = 0.0; ///< ‖Ĥ‖ in H2⊗L2
};

CompressResult compress(const ParametricModel& model, const IRKAConfig& config);

struct ReducedPieces
{
    MatrixC a_red;
    VectorC b_red;
    MatrixC c_red_unweighted;
    IRKAResult irka;
    double error = 0.0;
    double reference_norm = 0.0;
};

/// Weight by R, reduce, unweight. Shared by the one- and two-parameter paths.
ReducedPieces compress_with_gram(const SIMORealization& sys, const MatrixC& gram_chol,
                                 const IRKAConfig& config);

/// Real-input cleanup of a diagonal reduced model: b is folded into c and
/// conjugate eigenvalue pairs (and their c columns) are made exact conjugates.
/// No-op when a_red is not diagonal or the eigenvalues do not pair up.
void close_under_conjugation(ReducedPieces& pieces, double rel_tol = 1e-6);

/// SIMO view of a compressed model (diagonalizing a_red when needed).
SIMORealization to_simo(const CompressedParametricModel& model);

/// ‖R(𝔾_A − 𝔾_B)‖_{H2} for SIMO systems sharing a Gram factor R.
double h2l2_error(const SIMORealization& a, const SIMORealization& b, const MatrixC& gram_chol);

double h2l2_error(const ParametricModel& a, const ParametricModel& b);
double h2l2_error(const ParametricModel& a, const CompressedParametricModel& b);
double h2l2_error(const CompressedParametricModel& a, const CompressedParametricModel& b);

/// ‖Ĥ‖ in H2⊗L2.
double h2l2_norm(const ParametricModel& a);

using ScalarResponse = std::function<Complex(Complex)>;

/// Grid maximum of |f(iω) − g(iω)| refined by golden section around the
/// maximizer; a lower bound of the true supremum.
double hinf_error_at_param(const ScalarResponse& f, const ScalarResponse& g,
                           const VectorR& omega_grid);

/// sqrt(∫|f(iω)|² dω) over the band spanned by a positive log grid
/// (trapezoid rule in log ω). Used for band-limited relative H2 errors.
double band_h2_norm(const ScalarResponse& f, const VectorR& omega_grid);

} // namespace parafit

#endif /* PARAFIT_COMPRESS_HPP */
