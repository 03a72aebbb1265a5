#include <parafit/coupled_fit.hpp>

#include <cmath>

#include <parafit/linalg.hpp>
#include <parafit/parallel.hpp>

namespace parafit
{

DesignMatrices build_design(const std::vector<PoleResidueModel>& local_models,
                            const VectorC& freqs, const ParametricBasis& basis,
                            const VectorC& params)
{
    DesignMatrices d;
    d.a.resize(freqs.size(), static_cast<Index>(local_models.size()));
    for (std::size_t k = 0; k < local_models.size(); ++k)
    {
        for (Index i = 0; i < freqs.size(); ++i)
        {
            d.a(i, static_cast<Index>(k)) = local_models[k](freqs(i));
        }
    }
    d.b = basis.design(params);
    return d;
}

CoupledSolution solve_coupled(const DesignMatrices& design, const MatrixC& h,
                              const std::optional<MatrixR>& weights)
{
    const MatrixC& a = design.a;
    const MatrixC& b = design.b;
    if (h.rows() != a.rows() || h.cols() != b.rows())
    {
        throw Error(ErrorCode::ShapeMismatch, "solve_coupled: H must be m_s x m_p");
    }
    CoupledSolution out;
    if (!weights)
    {
        const MinNormSolution sa = lstsq_minnorm(a, h);
        // X Bᵀ = Y  ⇔  B Xᵀ = Yᵀ
        const MinNormSolution sb = lstsq_minnorm(b, sa.solution.transpose());
        out.x = sb.solution.transpose();
        out.rank_a = sa.rank;
        out.rank_b = sb.rank;
        out.rank_deficient = sa.rank < a.cols() || sb.rank < b.cols();
        return out;
    }

    const MatrixR& w = *weights;
    if (w.rows() != h.rows() || w.cols() != h.cols())
    {
        throw Error(ErrorCode::ShapeMismatch, "solve_coupled: weights shape differs from H");
    }
    if ((w.array() < 0.0).any() || !w.allFinite())
    {
        throw Error(ErrorCode::InvalidArgument, "solve_coupled: weights must be finite and >= 0");
    }
    const Index ms = a.rows();
    const Index mp = b.rows();
    const Index rs = a.cols();
    const Index rp = b.cols();
    if (ms * mp > kMaxWeightedRows)
    {
        throw Error(ErrorCode::ProblemTooLarge,
                    "solve_coupled: weighted problem has " + std::to_string(ms * mp) +
                        " rows (limit " + std::to_string(kMaxWeightedRows) + ")");
    }
    MatrixC k(ms * mp, rs * rp);
    VectorC rhs(ms * mp);
    for (Index j = 0; j < mp; ++j)
    {
        for (Index i = 0; i < ms; ++i)
        {
            const Index row = i + j * ms;
            const double sw = std::sqrt(w(i, j));
            for (Index l = 0; l < rp; ++l)
            {
                for (Index c = 0; c < rs; ++c)
                {
                    k(row, c + l * rs) = sw * b(j, l) * a(i, c);
                }
            }
            rhs(row) = sw * h(i, j);
        }
    }
    const MinNormSolution s = lstsq_minnorm(k, rhs);
    out.x = unvec(s.solution.col(0), rs, rp);
    out.rank_a = s.rank;
    out.rank_deficient = s.rank < rs * rp;
    return out;
}

MatrixC project_real(const MatrixC& x, const ParametricBasis& basis)
{
    if (x.cols() != basis.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "project_real: column count differs from basis size");
    }
    if (!basis.conjugation_closed())
    {
        throw Error(ErrorCode::InvalidArgument, "project_real: basis poles not closed under conjugation");
    }
    const auto& rho = basis.conj_perm();
    MatrixC out(x.rows(), x.cols());
    for (Index l = 0; l < x.cols(); ++l)
    {
        const Index r = rho[static_cast<std::size_t>(l)];
        for (Index k = 0; k < x.rows(); ++k)
        {
            out(k, l) = (x(k, l) + std::conj(x(k, r))) / 2.0;
        }
    }
    return out;
}

double coupled_residual(const DesignMatrices& design, const MatrixC& x, const MatrixC& h,
                        const std::optional<MatrixR>& weights)
{
    MatrixC e = design.a * x * design.b.transpose() - h;
    if (weights)
    {
        e = (e.array() * weights->array().sqrt().cast<Complex>()).matrix();
    }
    return e.norm();
}

std::vector<VFResult> fit_local_models(const FrequencyResponseDataset& data,
                                       const std::vector<int>& orders, const VFConfig& vf,
                                       bool force_real)
{
    const Index mp = data.num_parameters();
    if (!orders.empty() && static_cast<Index>(orders.size()) != mp)
    {
        throw Error(ErrorCode::ShapeMismatch, "local_orders must have one entry per parameter");
    }
    return parallel_map(static_cast<std::size_t>(mp), [&](std::size_t j) {
        VFConfig cfg = vf;
        if (!orders.empty())
        {
            cfg.order = orders[j];
        }
        const bool real_param = data.parameters(static_cast<Index>(j)).imag() == 0.0;
        cfg.real_symmetric = real_param && (force_real || data.real_symmetric);
        return vf_fit(data.frequencies, data.samples.col(static_cast<Index>(j)), cfg);
    });
}

Phase1Result couple_local_models(const FrequencyResponseDataset& data,
                                 std::vector<VFResult> local_fits,
                                 const ParametricBasis& basis,
                                 const std::optional<MatrixR>& weights, bool enforce_real)
{
    std::vector<PoleResidueModel> locals;
    locals.reserve(local_fits.size());
    bool all_conv = true;
    bool locals_real = true;
    for (const VFResult& f : local_fits)
    {
        locals.push_back(f.model);
        all_conv = all_conv && f.converged;
        locals_real = locals_real && f.model.real_flag();
    }
    const DesignMatrices d = build_design(locals, data.frequencies, basis, data.parameters);
    CoupledSolution sol = solve_coupled(d, data.samples, weights);
    const bool real = enforce_real && locals_real && basis.conjugation_closed();
    if (real)
    {
        sol.x = project_real(sol.x, basis);
    }

    const MatrixC fit = d.a * sol.x * d.b.transpose();
    MatrixC err = fit - data.samples;
    MatrixC ref = data.samples;
    if (weights)
    {
        const MatrixC sw = weights->array().sqrt().cast<Complex>().matrix();
        err = err.cwiseProduct(sw);
        ref = ref.cwiseProduct(sw);
    }
    VectorR rms(data.num_parameters());
    for (Index j = 0; j < rms.size(); ++j)
    {
        const double den = data.samples.col(j).norm();
        const double num = (fit.col(j) - data.samples.col(j)).norm();
        rms(j) = den > 0.0 ? num / den : num;
    }

    Phase1Result out{ParametricModel(std::move(locals), basis, sol.x, real)};
    out.local_fits = std::move(local_fits);
    out.residual = err.norm();
    out.relative_residual = ref.norm() > 0.0 ? out.residual / ref.norm() : out.residual;
    out.rms_per_parameter = rms;
    out.all_converged = all_conv;
    out.rank_deficient = sol.rank_deficient;
    return out;
}

Phase1Result fit_fixed_basis(const FrequencyResponseDataset& data, const Phase1Config& config)
{
    data.validate();
    const std::optional<MatrixR> weights = config.weights ? config.weights : data.weights;
    auto fits = fit_local_models(data, config.local_orders, config.vf, config.enforce_real);
    return couple_local_models(data, std::move(fits), config.basis, weights, config.enforce_real);
}

} // namespace parafit
