#include <parafit/model.hpp>

#include <algorithm>
#include <cmath>

#include <parafit/linalg.hpp>

namespace parafit
{

namespace
{

bool pairwise_distinct(const VectorC& v)
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

Index find_close(const VectorC& v, Complex z, double rel_tol)
{
    for (Index i = 0; i < v.size(); ++i)
    {
        if (std::abs(v(i) - z) <= rel_tol * std::max(1.0, std::abs(z)))
        {
            return i;
        }
    }
    return -1;
}

} // namespace

//------------------------------------------------------------------------------
// FrequencyResponseDataset
//------------------------------------------------------------------------------

MatrixR FrequencyResponseDataset::effective_weights() const
{
    if (weights)
    {
        return *weights;
    }
    return MatrixR::Ones(samples.rows(), samples.cols());
}

void FrequencyResponseDataset::validate() const
{
    const Index ms = frequencies.size();
    const Index mp = parameters.size();
    if (ms < 1 || mp < 1)
    {
        throw Error(ErrorCode::ShapeMismatch, "dataset: empty frequency or parameter grid");
    }
    if (samples.rows() != ms || samples.cols() != mp)
    {
        throw Error(ErrorCode::ShapeMismatch, "dataset: samples must be m_s x m_p");
    }
    if (!frequencies.allFinite() || !parameters.allFinite() || !samples.allFinite())
    {
        throw Error(ErrorCode::NonFinite, "dataset: non-finite entry");
    }
    if (!pairwise_distinct(frequencies) || !pairwise_distinct(parameters))
    {
        throw Error(ErrorCode::InvalidArgument, "dataset: grid values must be distinct");
    }
    if (weights)
    {
        if (weights->rows() != ms || weights->cols() != mp)
        {
            throw Error(ErrorCode::ShapeMismatch, "dataset: weights shape differs from samples");
        }
        if (!weights->allFinite() || (weights->array() < 0.0).any())
        {
            throw Error(ErrorCode::InvalidArgument, "dataset: weights must be finite and >= 0");
        }
    }
    if (real_symmetric)
    {
        for (Index i = 0; i < ms; ++i)
        {
            const Index ic = find_close(frequencies, std::conj(frequencies(i)), 0.0);
            if (ic < 0)
            {
                continue;
            }
            for (Index j = 0; j < mp; ++j)
            {
                const Index jc = find_close(parameters, std::conj(parameters(j)), 0.0);
                if (jc < 0)
                {
                    continue;
                }
                const Complex h = samples(i, j);
                const Complex hc = samples(ic, jc);
                if (std::abs(hc - std::conj(h)) > 1e-12 * std::max(std::abs(h), 1e-300))
                {
                    throw Error(ErrorCode::InvalidArgument,
                                "dataset: real_symmetric set but samples are not conjugate-symmetric");
                }
            }
        }
    }
}

//------------------------------------------------------------------------------
// PoleResidueModel
//------------------------------------------------------------------------------

PoleResidueModel::PoleResidueModel(VectorC poles, VectorC residues, bool real_flag)
    : poles_(std::move(poles)), residues_(std::move(residues)), real_flag_(real_flag)
{
    if (poles_.size() < 1 || poles_.size() != residues_.size())
    {
        throw Error(ErrorCode::ShapeMismatch,
                    "PoleResidueModel: need poles.len == residues.len >= 1");
    }
    if (!poles_.allFinite() || !residues_.allFinite())
    {
        throw Error(ErrorCode::NonFinite, "PoleResidueModel: non-finite pole or residue");
    }
    if (!pairwise_distinct(poles_))
    {
        throw Error(ErrorCode::InvalidArgument, "PoleResidueModel: poles must be distinct");
    }
    if (real_flag_)
    {
        for (Index k = 0; k < poles_.size(); ++k)
        {
            bool found = false;
            for (Index m = 0; m < poles_.size() && !found; ++m)
            {
                found = poles_(m) == std::conj(poles_(k)) &&
                        residues_(m) == std::conj(residues_(k));
            }
            if (!found)
            {
                throw Error(ErrorCode::InvalidArgument,
                            "PoleResidueModel: real_flag requires conjugation-closed pole/residue pairs");
            }
        }
    }
}

Complex PoleResidueModel::operator()(Complex s) const
{
    Complex acc{0.0, 0.0};
    for (Index k = 0; k < poles_.size(); ++k)
    {
        const Complex d = s - poles_(k);
        if (std::abs(d) < 1e-300)
        {
            throw Error(ErrorCode::PoleEvaluation, "evaluation at a pole");
        }
        acc += residues_(k) / d;
    }
    return acc;
}

bool PoleResidueModel::stable() const
{
    return (poles_.real().array() < 0.0).all();
}

//------------------------------------------------------------------------------
// BarycentricModel
//------------------------------------------------------------------------------

BarycentricModel::BarycentricModel(VectorC nodes, VectorC num_residues, VectorC den_residues)
    : nodes_(std::move(nodes)), num_(std::move(num_residues)), den_(std::move(den_residues))
{
    if (nodes_.size() < 1 || num_.size() != nodes_.size() || den_.size() != nodes_.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "BarycentricModel: length mismatch");
    }
    if (!pairwise_distinct(nodes_))
    {
        throw Error(ErrorCode::InvalidArgument, "BarycentricModel: nodes must be distinct");
    }
}

Complex BarycentricModel::operator()(Complex s) const
{
    Complex n{0.0, 0.0};
    Complex d{1.0, 0.0};
    for (Index k = 0; k < nodes_.size(); ++k)
    {
        if (s == nodes_(k))
        {
            if (den_(k) == Complex{0.0, 0.0})
            {
                throw Error(ErrorCode::PoleEvaluation, "barycentric node with zero denominator residue");
            }
            return num_(k) / den_(k);
        }
        const Complex w = 1.0 / (s - nodes_(k));
        n += num_(k) * w;
        d += den_(k) * w;
    }
    return n / d;
}

//------------------------------------------------------------------------------
// ParametricBasis
//------------------------------------------------------------------------------

std::optional<std::vector<Index>> conjugation_permutation(const VectorC& poles, double rel_tol)
{
    std::vector<Index> perm(static_cast<std::size_t>(poles.size()));
    for (Index l = 0; l < poles.size(); ++l)
    {
        const Index m = find_close(poles, std::conj(poles(l)), rel_tol);
        if (m < 0)
        {
            return std::nullopt;
        }
        perm[static_cast<std::size_t>(l)] = m;
    }
    return perm;
}

namespace
{

void check_interval(double lower, double upper)
{
    if (!(std::isfinite(lower) && std::isfinite(upper) && lower < upper))
    {
        throw Error(ErrorCode::InvalidArgument, "basis interval must satisfy a < b");
    }
}

double distance_to_interval(Complex z, double lower, double upper)
{
    const double x = std::clamp(z.real(), lower, upper);
    return std::abs(z - Complex{x, 0.0});
}

} // namespace

ParametricBasis ParametricBasis::monomial(int degree, double lower, double upper)
{
    if (degree < 0)
    {
        throw Error(ErrorCode::InvalidArgument, "monomial basis degree must be >= 0");
    }
    check_interval(lower, upper);
    ParametricBasis b;
    b.kind_ = BasisKind::Monomial;
    b.degree_ = degree;
    b.lower_ = lower;
    b.upper_ = upper;
    b.conj_perm_.resize(static_cast<std::size_t>(degree + 1));
    for (int l = 0; l <= degree; ++l)
    {
        b.conj_perm_[static_cast<std::size_t>(l)] = l;
    }
    return b;
}

ParametricBasis ParametricBasis::bernstein(int degree, double lower, double upper)
{
    ParametricBasis b = monomial(degree, lower, upper);
    b.kind_ = BasisKind::Bernstein;
    return b;
}

ParametricBasis ParametricBasis::rational(VectorC poles, double lower, double upper)
{
    check_interval(lower, upper);
    if (poles.size() < 1)
    {
        throw Error(ErrorCode::InvalidArgument, "rational basis needs at least one pole");
    }
    if (!poles.allFinite())
    {
        throw Error(ErrorCode::NonFinite, "rational basis pole is not finite");
    }
    for (Index l = 0; l < poles.size(); ++l)
    {
        if (!(distance_to_interval(poles(l), lower, upper) > 0.0))
        {
            throw Error(ErrorCode::GuardViolation, "rational basis pole lies on the parameter interval");
        }
    }
    ParametricBasis b;
    b.kind_ = BasisKind::RationalPoles;
    b.lower_ = lower;
    b.upper_ = upper;
    b.poles_ = std::move(poles);
    auto perm = conjugation_permutation(b.poles_);
    b.conj_closed_ = perm.has_value();
    if (perm)
    {
        b.conj_perm_ = std::move(*perm);
    }
    else
    {
        b.conj_perm_.resize(static_cast<std::size_t>(b.poles_.size()));
        for (Index l = 0; l < b.poles_.size(); ++l)
        {
            b.conj_perm_[static_cast<std::size_t>(l)] = l;
        }
    }
    return b;
}

Index ParametricBasis::size() const
{
    return kind_ == BasisKind::RationalPoles ? poles_.size() : degree_ + 1;
}

VectorC ParametricBasis::eval(Complex p) const
{
    const Index r = size();
    VectorC v(r);
    switch (kind_)
    {
    case BasisKind::Monomial:
    {
        Complex pw{1.0, 0.0};
        for (Index l = 0; l < r; ++l)
        {
            v(l) = pw;
            pw *= p;
        }
        break;
    }
    case BasisKind::Bernstein:
    {
        // de Casteljau triangle: after step j, v[0..j] holds B_{k,j}(t).
        const Complex t = (p - lower_) / (upper_ - lower_);
        const Complex u = 1.0 - t;
        v.setZero();
        v(0) = 1.0;
        for (Index j = 1; j < r; ++j)
        {
            for (Index k = j; k >= 1; --k)
            {
                v(k) = u * v(k) + t * v(k - 1);
            }
            v(0) = u * v(0);
        }
        break;
    }
    case BasisKind::RationalPoles:
        for (Index l = 0; l < r; ++l)
        {
            const Complex d = p - poles_(l);
            if (std::abs(d) < 1e-300)
            {
                throw Error(ErrorCode::BasisPoleHit, "parameter coincides with a basis pole");
            }
            v(l) = 1.0 / d;
        }
        break;
    }
    return v;
}

MatrixC ParametricBasis::design(const VectorC& params) const
{
    MatrixC b(params.size(), size());
    for (Index i = 0; i < params.size(); ++i)
    {
        b.row(i) = eval(params(i)).transpose();
    }
    return b;
}

bool ParametricBasis::operator==(const ParametricBasis& other) const
{
    if (kind_ != other.kind_ || lower_ != other.lower_ || upper_ != other.upper_)
    {
        return false;
    }
    if (kind_ == BasisKind::RationalPoles)
    {
        return poles_.size() == other.poles_.size() && poles_ == other.poles_;
    }
    return degree_ == other.degree_;
}

//------------------------------------------------------------------------------
// ParametricModel
//------------------------------------------------------------------------------

ParametricModel::ParametricModel(std::vector<PoleResidueModel> local_models,
                                 ParametricBasis basis, MatrixC coefficients, bool real_flag)
    : local_(std::move(local_models)),
      basis_(std::move(basis)),
      coeffs_(std::move(coefficients)),
      real_flag_(real_flag)
{
    if (local_.empty())
    {
        throw Error(ErrorCode::InvalidArgument, "ParametricModel: no local models");
    }
    if (coeffs_.rows() != static_cast<Index>(local_.size()) || coeffs_.cols() != basis_.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "ParametricModel: coefficients must be r_s x r_p");
    }
    if (!coeffs_.allFinite())
    {
        throw Error(ErrorCode::NonFinite, "ParametricModel: non-finite coefficient");
    }
}

Index ParametricModel::state_order() const
{
    Index n = 0;
    for (const auto& h : local_)
    {
        n += h.order();
    }
    return n;
}

Complex ParametricModel::operator()(Complex s, Complex p) const
{
    const VectorC v = basis_.eval(p);
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < local_.size(); ++k)
    {
        const Complex hk = local_[k](s);
        acc += hk * coeffs_.row(static_cast<Index>(k)).transpose().cwiseProduct(v).sum();
    }
    return acc;
}

bool ParametricModel::stable() const
{
    return std::all_of(local_.begin(), local_.end(),
                       [](const PoleResidueModel& h) { return h.stable(); });
}

VectorC ParametricModel::poles() const
{
    VectorC out(state_order());
    Index pos = 0;
    for (const auto& h : local_)
    {
        out.segment(pos, h.order()) = h.poles();
        pos += h.order();
    }
    return out;
}

//------------------------------------------------------------------------------
// SIMORealization / CompressedParametricModel
//------------------------------------------------------------------------------

VectorC SIMORealization::operator()(Complex s) const
{
    VectorC x(a_diag.size());
    for (Index i = 0; i < a_diag.size(); ++i)
    {
        const Complex d = s - a_diag(i);
        if (std::abs(d) < 1e-300)
        {
            throw Error(ErrorCode::PoleEvaluation, "SIMO evaluation at a pole");
        }
        x(i) = b(i) / d;
    }
    return c * x;
}

void SIMORealization::validate() const
{
    if (b.size() != a_diag.size() || c.cols() != a_diag.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "SIMORealization: inconsistent dimensions");
    }
}

VectorC CompressedParametricModel::reduced_response(Complex s) const
{
    const Index n = a_red.rows();
    const bool diag = (a_red - MatrixC(a_red.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    if (real_flag && diag)
    {
        // pairs summed as units so that conj(s) mirrors s exactly
        const VectorC lam = a_red.diagonal();
        const auto perm = conjugation_permutation(lam, 0.0);
        if (perm)
        {
            VectorC y = VectorC::Zero(c_red_unweighted.rows());
            for (Index k = 0; k < n; ++k)
            {
                const Index m = (*perm)[static_cast<std::size_t>(k)];
                if (m < k)
                {
                    continue;
                }
                const Complex dk = s - lam(k);
                if (dk == Complex{0.0, 0.0})
                {
                    throw Error(ErrorCode::SingularResolvent, "s coincides with a reduced pole");
                }
                VectorC t = c_red_unweighted.col(k) * (b_red(k) / dk);
                if (m != k)
                {
                    const Complex dm = s - lam(m);
                    if (dm == Complex{0.0, 0.0})
                    {
                        throw Error(ErrorCode::SingularResolvent, "s coincides with a reduced pole");
                    }
                    t += c_red_unweighted.col(m) * (b_red(m) / dm);
                }
                y += t;
            }
            return y;
        }
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
    (void)n;
    return c_red_unweighted * x.col(0);
}

Complex CompressedParametricModel::operator()(Complex s, Complex p) const
{
    if (b_red.isZero(0.0))
    {
        return {0.0, 0.0};
    }
    return basis.eval(p).transpose() * reduced_response(s);
}

bool CompressedParametricModel::stable() const
{
    if (a_red.rows() == 0)
    {
        return true;
    }
    const EigenDecomposition ed = eig_general(a_red);
    return (ed.values.real().array() < 0.0).all();
}

void CompressedParametricModel::validate() const
{
    const Index n = a_red.rows();
    const Index r = basis.size();
    if (a_red.cols() != n || b_red.size() != n || c_red_unweighted.rows() != r ||
        c_red_unweighted.cols() != n || gram_chol.rows() != r || gram_chol.cols() != r)
    {
        throw Error(ErrorCode::ShapeMismatch, "CompressedParametricModel: inconsistent dimensions");
    }
    for (Index i = 0; i < r; ++i)
    {
        if (!(gram_chol(i, i).real() > 0.0))
        {
            throw Error(ErrorCode::InvalidArgument, "gram_chol must have positive diagonal");
        }
    }
}

} // namespace parafit
