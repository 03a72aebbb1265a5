#include <parafit/vecfit.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <parafit/linalg.hpp>
#include <parafit/quadrature.hpp>

namespace parafit
{

void VFConfig::validate() const
{
    if (order < 1)
    {
        throw Error(ErrorCode::InvalidArgument, "VFConfig: order must be >= 1");
    }
    if (max_iters < 1 || !(residue_tol > 0.0) || !(node_move_tol > 0.0) || !(stagnation_tol >= 0.0))
    {
        throw Error(ErrorCode::InvalidArgument, "VFConfig: max_iters and tolerances must be positive");
    }
    if (freq_weights && ((freq_weights->array() < 0.0).any() || !freq_weights->allFinite()))
    {
        throw Error(ErrorCode::InvalidArgument, "VFConfig: weights must be finite and >= 0");
    }
}

namespace
{

/// Block structure of a conjugation-closed node vector: each entry is the
/// index of a real node (pair == false) or of the Im > 0 member of a pair
/// stored at (idx, idx + 1).
struct NodeBlock
{
    Index idx;
    bool pair;
};

std::vector<NodeBlock> real_layout(const VectorC& nodes)
{
    std::vector<NodeBlock> blocks;
    Index k = 0;
    while (k < nodes.size())
    {
        if (nodes(k).imag() == 0.0)
        {
            blocks.push_back({k, false});
            k += 1;
        }
        else if (nodes(k).imag() > 0.0 && k + 1 < nodes.size() &&
                 nodes(k + 1) == std::conj(nodes(k)))
        {
            blocks.push_back({k, true});
            k += 2;
        }
        else
        {
            throw Error(ErrorCode::InvalidArgument,
                        "real VF step needs nodes ordered as real nodes and (lambda, conj lambda) pairs");
        }
    }
    return blocks;
}

/// Columns of the partial-fraction basis at the given frequencies; in real
/// mode pairs use f1 = 1/(s−λ) + 1/(s−λ̄), f2 = i/(s−λ) − i/(s−λ̄).
MatrixC cauchy_columns(const VectorC& freqs, const VectorC& nodes, bool real)
{
    const Index m = freqs.size();
    const Index n = nodes.size();
    MatrixC c(m, n);
    for (Index j = 0; j < n; ++j)
    {
        for (Index i = 0; i < m; ++i)
        {
            const Complex d = freqs(i) - nodes(j);
            if (std::abs(d) < 1e-300)
            {
                throw Error(ErrorCode::PoleEvaluation, "frequency coincides with a VF node");
            }
            c(i, j) = 1.0 / d;
        }
    }
    if (real)
    {
        for (const NodeBlock& b : real_layout(nodes))
        {
            if (!b.pair)
            {
                continue;
            }
            const VectorC u = c.col(b.idx);
            const VectorC v = c.col(b.idx + 1);
            c.col(b.idx) = u + v;
            c.col(b.idx + 1) = kI * (u - v);
        }
    }
    return c;
}

/// Realified coefficients (c1, c2 per pair) back to conjugate residues.
VectorC unrealify(const VectorC& x, const VectorC& nodes)
{
    VectorC out = x;
    for (const NodeBlock& b : real_layout(nodes))
    {
        if (b.pair)
        {
            const double c1 = x(b.idx).real();
            const double c2 = x(b.idx + 1).real();
            out(b.idx) = Complex{c1, c2};
            out(b.idx + 1) = Complex{c1, -c2};
        }
        else
        {
            out(b.idx) = Complex{x(b.idx).real(), 0.0};
        }
    }
    return out;
}

/// Stacks [Re; Im] so complex rows become real equations.
MatrixC stack_real(const MatrixC& a)
{
    MatrixC out(2 * a.rows(), a.cols());
    out.topRows(a.rows()) = a.real().cast<Complex>();
    out.bottomRows(a.rows()) = a.imag().cast<Complex>();
    return out;
}

struct Solved
{
    VectorC x;
    Index rank;
};

/// Minimal-norm LS after column equilibration.
Solved solve_scaled(const MatrixC& a, const VectorC& rhs)
{
    VectorR scale(a.cols());
    MatrixC as = a;
    for (Index j = 0; j < a.cols(); ++j)
    {
        const double nrm = a.col(j).norm();
        scale(j) = nrm > 0.0 ? 1.0 / nrm : 1.0;
        as.col(j) *= scale(j);
    }
    const MinNormSolution sol = lstsq_minnorm(as, rhs);
    VectorC x = sol.solution.col(0);
    for (Index j = 0; j < x.size(); ++j)
    {
        x(j) *= scale(j);
    }
    return {x, sol.rank};
}

VectorR sqrt_weights(const VectorR& w)
{
    return w.array().sqrt().matrix();
}

void check_column(const VectorC& freqs, const VectorC& data, const VectorR& weights)
{
    if (freqs.size() != data.size() || weights.size() != freqs.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "VF: frequencies, data and weights differ in length");
    }
    if (!freqs.allFinite() || !data.allFinite())
    {
        throw Error(ErrorCode::NonFinite, "VF: non-finite input");
    }
}

double relative_displacement(const VectorC& from, const VectorC& to, double floor)
{
    double worst = 0.0;
    for (Index k = 0; k < to.size(); ++k)
    {
        double best = std::numeric_limits<double>::infinity();
        Index arg = 0;
        for (Index j = 0; j < from.size(); ++j)
        {
            const double d = std::abs(to(k) - from(j));
            if (d < best)
            {
                best = d;
                arg = j;
            }
        }
        worst = std::max(worst, best / std::max(std::abs(from(arg)), floor));
    }
    return worst;
}

/// Real eigenvalues first-come, complex pairs as (Im > 0, conj).
VectorC canonical_pairs(const VectorC& ev)
{
    VectorC out(ev.size());
    Index pos = 0;
    for (Index k = 0; k < ev.size(); ++k)
    {
        if (ev(k).imag() == 0.0)
        {
            out(pos++) = ev(k);
        }
        else if (ev(k).imag() > 0.0)
        {
            out(pos++) = ev(k);
            out(pos++) = std::conj(ev(k));
        }
    }
    if (pos != ev.size())
    {
        throw Error(ErrorCode::InvalidArgument, "eigenvalues are not conjugation-closed");
    }
    return out;
}

/// Zeros of d in real block form: Â − b̂ĉ with 2×2 blocks [[σ, ω], [−ω, σ]],
/// b̂ = [2, 0], ĉ = [Re φ, Im φ] for each pair.
VectorC relocate_real(const VectorC& nodes, const VectorC& phi)
{
    const Index n = nodes.size();
    MatrixR a = MatrixR::Zero(n, n);
    VectorR b = VectorR::Zero(n);
    VectorR c = VectorR::Zero(n);
    for (const NodeBlock& blk : real_layout(nodes))
    {
        const Index k = blk.idx;
        if (!blk.pair)
        {
            a(k, k) = nodes(k).real();
            b(k) = 1.0;
            c(k) = phi(k).real();
            continue;
        }
        const double sg = nodes(k).real();
        const double om = nodes(k).imag();
        a(k, k) = sg;
        a(k, k + 1) = om;
        a(k + 1, k) = -om;
        a(k + 1, k + 1) = sg;
        b(k) = 2.0;
        c(k) = phi(k).real();
        c(k + 1) = phi(k).imag();
    }
    return canonical_pairs(eig_real(a - b * c.transpose()));
}

double weighted_norm(const VectorC& v, const VectorR& sw)
{
    return (v.array() * sw.array().cast<Complex>()).matrix().norm();
}

} // namespace

VectorC init_nodes(double freq_min, double freq_max, int order)
{
    if (!(freq_min > 0.0 && freq_min < freq_max) || order < 1)
    {
        throw Error(ErrorCode::InvalidArgument, "init_nodes: need 0 < freq_min < freq_max and order >= 1");
    }
    const int pairs = order / 2;
    VectorC nodes(order);
    const VectorR im = logspace(freq_min, freq_max, std::max(pairs, 1));
    for (int k = 0; k < pairs; ++k)
    {
        const Complex lam{-im(k) / 100.0, im(k)};
        nodes(2 * k) = lam;
        nodes(2 * k + 1) = std::conj(lam);
    }
    if (order % 2 == 1)
    {
        nodes(order - 1) = Complex{-std::sqrt(freq_min * freq_max), 0.0};
    }
    return nodes;
}

SKStep sk_vf_step(const VectorC& freqs, const VectorC& data, const VectorR& weights,
                  const VectorC& nodes, bool real)
{
    check_column(freqs, data, weights);
    const Index nu = nodes.size();
    const MatrixC c = cauchy_columns(freqs, nodes, real);
    const VectorR sw = sqrt_weights(weights);

    MatrixC a(freqs.size(), 2 * nu);
    a.leftCols(nu) = c;
    a.rightCols(nu) = -(data.asDiagonal() * c);
    a = sw.cast<Complex>().asDiagonal() * a;
    VectorC rhs = (sw.cast<Complex>().array() * data.array()).matrix();

    Solved sol;
    if (real)
    {
        sol = solve_scaled(stack_real(a), stack_real(rhs));
    }
    else
    {
        sol = solve_scaled(a, rhs);
    }

    SKStep out;
    out.rank = sol.rank;
    out.rank_deficient = sol.rank < 2 * nu;
    const VectorC x = sol.x;
    out.residual = (a * x - rhs).norm();
    if (real)
    {
        out.psi = unrealify(x.head(nu), nodes);
        out.phi = unrealify(x.tail(nu), nodes);
    }
    else
    {
        out.psi = x.head(nu);
        out.phi = x.tail(nu);
    }
    return out;
}

VectorC relocate_poles(const VectorC& nodes, const VectorC& den_residues)
{
    if (nodes.size() != den_residues.size() || nodes.size() < 1)
    {
        throw Error(ErrorCode::ShapeMismatch, "relocate_poles: length mismatch");
    }
    MatrixC m = -VectorC::Ones(nodes.size()) * den_residues.transpose();
    m.diagonal() += nodes;
    return eig_general(m).values;
}

VectorC flip_unstable(const VectorC& poles)
{
    VectorC out = poles;
    for (Index k = 0; k < out.size(); ++k)
    {
        const double re = out(k).real();
        const double im = out(k).imag();
        if (re > 0.0)
        {
            out(k) = Complex{-re, im};
        }
        else if (re == 0.0)
        {
            out(k) = Complex{-1e-8 * std::max(1.0, std::abs(im)), im};
        }
    }
    return out;
}

VectorC fit_residues(const VectorC& freqs, const VectorC& data, const VectorR& weights,
                     const VectorC& nodes, bool real)
{
    check_column(freqs, data, weights);
    const VectorR sw = sqrt_weights(weights);
    const MatrixC a = sw.cast<Complex>().asDiagonal() * cauchy_columns(freqs, nodes, real);
    const VectorC rhs = (sw.cast<Complex>().array() * data.array()).matrix();
    if (real)
    {
        return unrealify(solve_scaled(stack_real(a), stack_real(rhs)).x, nodes);
    }
    return solve_scaled(a, rhs).x;
}

VFResult vf_fit(const VectorC& freqs, const VectorC& data, const VFConfig& config)
{
    config.validate();
    if (freqs.size() < 2 || data.size() != freqs.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "vf_fit: need data.len == freqs.len >= 2");
    }
    const VectorR w = config.freq_weights ? *config.freq_weights : VectorR::Ones(freqs.size());
    check_column(freqs, data, w);
    const bool real = config.real_symmetric;
    const VectorR sw = sqrt_weights(w);

    double fmin = std::numeric_limits<double>::infinity();
    double fmax = 0.0;
    for (Index i = 0; i < freqs.size(); ++i)
    {
        const double f = std::abs(freqs(i));
        if (f > 0.0)
        {
            fmin = std::min(fmin, f);
            fmax = std::max(fmax, f);
        }
    }
    if (!(fmax > 0.0))
    {
        fmin = 1.0;
        fmax = 10.0;
    }
    if (!(fmax > fmin))
    {
        fmax = 10.0 * fmin;
    }

    const double data_norm = weighted_norm(data, sw);
    auto residual_for = [&](const VectorC& nd, VectorC& res) {
        res = fit_residues(freqs, data, w, nd, real);
        const VectorC fit = cauchy_columns(freqs, nd, false) * res;
        const double r = weighted_norm(fit - data, sw);
        return data_norm > 0.0 ? r / data_norm : r;
    };

    VectorC nodes = init_nodes(fmin, fmax, config.order);
    VectorC residues;
    double rel = residual_for(nodes, residues);
    VectorC best_nodes = nodes;
    VectorC best_residues = residues;
    double best_rel = rel;
    bool converged = false;
    bool rank_deficient = false;
    double first_res = 0.0;
    double last_res = 0.0;
    int flat_steps = 0;
    int it = 0;
    while (it < config.max_iters)
    {
        ++it;
        const SKStep step = sk_vf_step(freqs, data, w, nodes, real);
        rank_deficient = rank_deficient || step.rank_deficient;
        if (it == 1)
        {
            first_res = step.residual;
        }
        last_res = step.residual;
        if (step.phi.cwiseAbs().maxCoeff() < config.residue_tol)
        {
            converged = true;
            break;
        }
        VectorC moved = real ? relocate_real(nodes, step.phi) : relocate_poles(nodes, step.phi);
        if (config.flip_unstable)
        {
            moved = flip_unstable(moved);
        }
        const double disp = relative_displacement(nodes, moved, fmin);
        nodes = moved;
        const double prev = rel;
        rel = residual_for(nodes, residues);
        if (rel < best_rel && !(config.flip_unstable && (nodes.real().array() >= 0.0).any()))
        {
            best_rel = rel;
            best_nodes = nodes;
            best_residues = residues;
        }
        if (disp < config.node_move_tol)
        {
            converged = true;
            break;
        }
        flat_steps = std::abs(rel - prev) <= config.stagnation_tol * prev ? flat_steps + 1 : 0;
        if (flat_steps >= 2)
        {
            converged = true;
            break;
        }
    }

    std::string diagnostic;
    if (!converged)
    {
        rel = best_rel;
        nodes = best_nodes;
        residues = best_residues;
        diagnostic = "VF did not converge within " + std::to_string(config.max_iters) +
                     " iterations; best iterate returned";
    }
    if (!config.flip_unstable && (nodes.real().array() >= 0.0).any())
    {
        throw Error(ErrorCode::Unstable, "vf_fit: final poles unstable and flipping disabled");
    }

    VFResult out{PoleResidueModel(nodes, residues, real)};
    out.iterations = it;
    out.converged = converged;
    out.rank_deficient = rank_deficient;
    out.first_sk_residual = first_res;
    out.last_sk_residual = last_res;
    out.relative_residual = rel;
    out.diagnostic = diagnostic;
    return out;
}

} // namespace parafit
