#include <parafit/multiparam.hpp>

#include <algorithm>

#include <parafit/coupled_fit.hpp>
#include <parafit/linalg.hpp>
#include <parafit/parallel.hpp>

namespace parafit
{

namespace
{

bool distinct(const VectorC& v)
{
    for (Index i = 0; i < v.size(); ++i)
    {
        for (Index j = i + 1; j < v.size(); ++j)
        {
            if (v(i) == v(j))
            {
                return false;
            }
        }
    }
    return true;
}

std::vector<Index> kron_conj_perm(const ParametricBasis& bp, const ParametricBasis& bq)
{
    const Index rq = bq.size();
    std::vector<Index> perm(static_cast<std::size_t>(bp.size() * rq));
    for (Index l1 = 0; l1 < bp.size(); ++l1)
    {
        for (Index l2 = 0; l2 < rq; ++l2)
        {
            perm[static_cast<std::size_t>(l1 * rq + l2)] =
                bp.conj_perm()[static_cast<std::size_t>(l1)] * rq + bq.conj_perm()[static_cast<std::size_t>(l2)];
        }
    }
    return perm;
}

} // namespace

void FrequencyResponseDataset2::validate() const
{
    const Index mp = params_p.size();
    const Index mq = params_q.size();
    if (frequencies.size() < 1 || mp < 1 || mq < 1)
    {
        throw Error(ErrorCode::ShapeMismatch, "dataset2: empty grid");
    }
    if (samples.rows() != frequencies.size() || samples.cols() != mp * mq)
    {
        throw Error(ErrorCode::ShapeMismatch, "dataset2: samples must be m_s x (m_p*m_q)");
    }
    if (!frequencies.allFinite() || !params_p.allFinite() || !params_q.allFinite() ||
        !samples.allFinite())
    {
        throw Error(ErrorCode::NonFinite, "dataset2: non-finite entry");
    }
    if (!distinct(frequencies) || !distinct(params_p) || !distinct(params_q))
    {
        throw Error(ErrorCode::InvalidArgument, "dataset2: grid values must be distinct");
    }
    if (weights)
    {
        if (weights->rows() != samples.rows() || weights->cols() != samples.cols())
        {
            throw Error(ErrorCode::ShapeMismatch, "dataset2: weights shape differs from samples");
        }
        if ((weights->array() < 0.0).any() || !weights->allFinite())
        {
            throw Error(ErrorCode::InvalidArgument, "dataset2: weights must be finite and >= 0");
        }
    }
}

Index flatten_index(Index j1, Index j2, Index m_p, Index m_q)
{
    if (j1 < 1 || j1 > m_p || j2 < 1 || j2 > m_q)
    {
        throw Error(ErrorCode::OutOfRange, "flatten_index: index outside the grid");
    }
    return (j1 - 1) * m_q + j2;
}

std::pair<Index, Index> unflatten_index(Index c, Index m_p, Index m_q)
{
    if (c < 1 || c > m_p * m_q)
    {
        throw Error(ErrorCode::OutOfRange, "unflatten_index: column outside the grid");
    }
    return {(c - 1) / m_q + 1, (c - 1) % m_q + 1};
}

ParametricModel2::ParametricModel2(std::vector<PoleResidueModel> local_models,
                                   ParametricBasis basis_p, ParametricBasis basis_q,
                                   MatrixC coefficients, bool real_flag)
    : local_(std::move(local_models)),
      bp_(std::move(basis_p)),
      bq_(std::move(basis_q)),
      coeffs_(std::move(coefficients)),
      real_flag_(real_flag)
{
    if (local_.empty())
    {
        throw Error(ErrorCode::InvalidArgument, "ParametricModel2: no local models");
    }
    if (coeffs_.rows() != static_cast<Index>(local_.size()) ||
        coeffs_.cols() != bp_.size() * bq_.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "ParametricModel2: coefficients must be r_s x (r_p*r_q)");
    }
}

Index ParametricModel2::state_order() const
{
    Index n = 0;
    for (const auto& h : local_)
    {
        n += h.order();
    }
    return n;
}

bool ParametricModel2::stable() const
{
    return std::all_of(local_.begin(), local_.end(), [](const PoleResidueModel& h) { return h.stable(); });
}

VectorC ParametricModel2::basis_values(Complex p, Complex q) const
{
    const VectorC vp = bp_.eval(p);
    const VectorC vq = bq_.eval(q);
    return kron(vp, vq).col(0);
}

Complex ParametricModel2::operator()(Complex s, Complex p, Complex q) const
{
    const VectorC v = basis_values(p, q);
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < local_.size(); ++k)
    {
        acc += local_[k](s) * coeffs_.row(static_cast<Index>(k)).transpose().cwiseProduct(v).sum();
    }
    return acc;
}

TwoParamResult fit_two_param(const FrequencyResponseDataset2& data, const TwoParamConfig& config)
{
    data.validate();
    if (config.decimation < 1)
    {
        throw Error(ErrorCode::InvalidArgument, "fit_two_param: decimation stride must be >= 1");
    }
    const Index cols = data.samples.cols();
    std::vector<Index> picks;
    for (Index c = 0; c < cols; c += config.decimation)
    {
        picks.push_back(c);
    }
    if (!config.local_orders.empty() && config.local_orders.size() != picks.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "fit_two_param: one local order per local model required");
    }
    Index states = 0;
    for (std::size_t k = 0; k < picks.size(); ++k)
    {
        states += config.local_orders.empty() ? config.vf.order : config.local_orders[k];
    }
    if (states > kMaxTwoParamStates)
    {
        throw Error(ErrorCode::ProblemTooLarge,
                    "fit_two_param: " + std::to_string(states) + " local states exceed the limit of " +
                        std::to_string(kMaxTwoParamStates) + "; increase the decimation stride");
    }

    const Index mq = data.params_q.size();
    auto fits = parallel_map(picks.size(), [&](std::size_t k) {
        VFConfig cfg = config.vf;
        if (!config.local_orders.empty())
        {
            cfg.order = config.local_orders[k];
        }
        const Index c = picks[k];
        const bool real_params = data.params_p(c / mq).imag() == 0.0 && data.params_q(c % mq).imag() == 0.0;
        cfg.real_symmetric = real_params && (config.enforce_real || data.real_symmetric);
        return vf_fit(data.frequencies, data.samples.col(c), cfg);
    });

    std::vector<PoleResidueModel> locals;
    bool all_conv = true;
    bool locals_real = true;
    for (const VFResult& f : fits)
    {
        locals.push_back(f.model);
        all_conv = all_conv && f.converged;
        locals_real = locals_real && f.model.real_flag();
    }

    MatrixC a(data.num_frequencies(), static_cast<Index>(locals.size()));
    for (std::size_t k = 0; k < locals.size(); ++k)
    {
        for (Index i = 0; i < a.rows(); ++i)
        {
            a(i, static_cast<Index>(k)) = locals[k](data.frequencies(i));
        }
    }
    const MatrixC bp = config.basis_p.design(data.params_p);
    const MatrixC bq = config.basis_q.design(data.params_q);

    MatrixC x;
    bool rank_def = false;
    if (data.weights)
    {
        const CoupledSolution sol = solve_coupled(DesignMatrices{a, kron(bp, bq)}, data.samples, data.weights);
        x = sol.x;
        rank_def = sol.rank_deficient;
    }
    else
    {
        const MinNormSolution sa = lstsq_minnorm(a, data.samples);
        const MatrixC kp = kron(pinv(bp), pinv(bq));
        x = sa.solution * kp.transpose();
        rank_def = sa.rank < a.cols();
    }

    const bool real = config.enforce_real && locals_real && config.basis_p.conjugation_closed() &&
                      config.basis_q.conjugation_closed();
    if (real)
    {
        const auto rho = kron_conj_perm(config.basis_p, config.basis_q);
        MatrixC y(x.rows(), x.cols());
        for (Index l = 0; l < x.cols(); ++l)
        {
            const Index r = rho[static_cast<std::size_t>(l)];
            for (Index k = 0; k < x.rows(); ++k)
            {
                y(k, l) = (x(k, l) + std::conj(x(k, r))) / 2.0;
            }
        }
        x = y;
    }

    MatrixC err = a * x * kron(bp, bq).transpose() - data.samples;
    MatrixC ref = data.samples;
    if (data.weights)
    {
        const MatrixC sw = data.weights->array().sqrt().cast<Complex>().matrix();
        err = err.cwiseProduct(sw);
        ref = ref.cwiseProduct(sw);
    }
    TwoParamResult out{ParametricModel2(std::move(locals), config.basis_p, config.basis_q, x, real)};
    out.local_fits = std::move(fits);
    out.residual = err.norm();
    out.relative_residual = ref.norm() > 0.0 ? out.residual / ref.norm() : out.residual;
    out.all_converged = all_conv;
    out.rank_deficient = rank_def;
    return out;
}

Complex CompressedParametricModel2::operator()(Complex s, Complex p, Complex q) const
{
    if (b_red.isZero(0.0))
    {
        return {0.0, 0.0};
    }
    MatrixC m = -a_red;
    m.diagonal().array() += s;
    MatrixC x;
    try
    {
        x = solve_dense(m, b_red);
    }
    catch (const Error& e)
    {
        if (e.code() == ErrorCode::Singular)
        {
            throw Error(ErrorCode::SingularResolvent, "sI - a_red is numerically singular");
        }
        throw;
    }
    const VectorC v = kron(basis_p.eval(p), basis_q.eval(q)).col(0);
    return v.transpose() * (c_red_unweighted * x.col(0));
}

SIMORealization assemble_simo(const ParametricModel2& model)
{
    // same layout as the one-parameter assembly with the flattened basis
    const ParametricBasis flat = ParametricBasis::monomial(
        static_cast<int>(model.basis_p().size() * model.basis_q().size()) - 1, 0.0, 1.0);
    return assemble_simo(ParametricModel(model.local_models(), flat, model.coefficients()));
}

CompressResult2 compress_two_param(const ParametricModel2& model, const IRKAConfig& config)
{
    if (!model.stable())
    {
        throw Error(ErrorCode::UnstableSystem, "compress_two_param: intermediate model is unstable");
    }
    const MatrixC rp = cholesky_upper(gram_matrix(model.basis_p()));
    const MatrixC rq = cholesky_upper(gram_matrix(model.basis_q()));
    const MatrixC r = kron(rp, rq);
    IRKAConfig cfg = config;
    cfg.preserve_realness = cfg.preserve_realness || model.real_flag();
    ReducedPieces pieces = compress_with_gram(assemble_simo(model), r, cfg);
    if (model.real_flag())
    {
        close_under_conjugation(pieces);
    }
    CompressedParametricModel2 cm{model.basis_p(), model.basis_q(), r, pieces.a_red, pieces.b_red,
                                  pieces.c_red_unweighted, model.real_flag()};
    CompressResult2 out{cm};
    out.irka = std::move(pieces.irka);
    out.error = pieces.error;
    out.reference_norm = pieces.reference_norm;
    return out;
}

} // namespace parafit
