///
/// \file vecfit.hpp
///
/// Single-column rational fitting by the Sanathanan–Koerner / vector-fitting
/// iteration with moving barycentric nodes.
///
#ifndef PARAFIT_VECFIT_HPP
#define PARAFIT_VECFIT_HPP

#include <optional>
#include <string>

#include <parafit/model.hpp>

namespace parafit
{

struct VFConfig
{
    int order = 1;
    int max_iters = 50;
    double residue_tol = 1e-8;
    double node_move_tol = 1e-10;
    /// Also stop once the relative fit residual changes by at most this
    /// fraction on two consecutive iterations (0 disables).
    double stagnation_tol = 1e-2;
    bool flip_unstable = true;
    std::optional<VectorR> freq_weights;
    /// Data comes from a real system (h(conj s) = conj h(s)); every step is
    /// then solved in realified coordinates and the result is conjugation-closed.
    bool real_symmetric = false;

    void validate() const;
};

struct SKStep
{
    VectorC psi;
    VectorC phi;
    Index rank = 0;
    bool rank_deficient = false;
    double residual = 0.0; ///< ‖D_w(𝒜x − h)‖₂
};

struct VFResult
{
    PoleResidueModel model;
    int iterations = 0;
    bool converged = false;
    bool rank_deficient = false;
    double first_sk_residual = 0.0;
    double last_sk_residual = 0.0;
    /// ‖D_w(ĥ − h)‖ / ‖D_w h‖ of the returned model (0 for zero data).
    double relative_residual = 0.0;
    std::string diagnostic;
};

/// ⌊ν/2⌋ stable conjugate pairs log-spaced over [freq_min, freq_max]; odd ν adds
/// one real node at −sqrt(freq_min·freq_max). Pairs are stored (λ, conj λ), Im λ > 0.
VectorC init_nodes(double freq_min, double freq_max, int order);

/// One weighted SK linear least-squares step with fixed nodes. With `real` set,
/// nodes must be conjugation-closed in (λ, conj λ) order with real nodes alone.
SKStep sk_vf_step(const VectorC& freqs, const VectorC& data, const VectorR& weights,
                  const VectorC& nodes, bool real = false);

/// Zeros of 1 + Σ φ_k/(s − λ_k): eig(diag(λ) − 𝟙φᵀ).
VectorC relocate_poles(const VectorC& nodes, const VectorC& den_residues);

/// Mirrors Re > 0 across the imaginary axis and nudges Re = 0 to −1e-8·max(1,|Im|).
VectorC flip_unstable(const VectorC& poles);

/// Residues of the best fit Σ ψ_k/(s − λ_k) with the nodes held fixed.
VectorC fit_residues(const VectorC& freqs, const VectorC& data, const VectorR& weights,
                     const VectorC& nodes, bool real = false);

/// Full VF iteration. Throws Unstable only when flipping is disabled and the
/// final poles are unstable; non-convergence is reported in the result.
VFResult vf_fit(const VectorC& freqs, const VectorC& data, const VFConfig& config);

} // namespace parafit

#endif /* PARAFIT_VECFIT_HPP */
