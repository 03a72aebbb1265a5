#include <parafit/bench_models.hpp>

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include <parafit/parallel.hpp>

namespace parafit
{

namespace
{

constexpr int kPenzlOrder = 26;

void set_rotation_block(MatrixR& a, Index at, double freq, double scale)
{
    a(at, at) = -1.0 * scale;
    a(at, at + 1) = freq * scale;
    a(at + 1, at) = -freq * scale;
    a(at + 1, at + 1) = -1.0 * scale;
}

bool coincides(Complex p, Complex pole)
{
    return std::abs(p - pole) <= 1e-14 * std::max(1.0, std::abs(pole));
}

/// Tridiagonal solve with partial pivoting (LAPACK gtsv scheme).
/// dl: sub-diagonal (n−1), d: diagonal, du: super-diagonal (n−1).
VectorC tridiagonal_solve(VectorC dl, VectorC d, VectorC du, VectorC b)
{
    const Index n = d.size();
    VectorC du2 = VectorC::Zero(std::max<Index>(n - 2, 0));
    for (Index i = 0; i + 1 < n; ++i)
    {
        if (std::abs(d(i)) >= std::abs(dl(i)))
        {
            if (d(i) == Complex{0.0, 0.0})
            {
                throw Error(ErrorCode::SingularSystem, "tridiagonal system is singular");
            }
            const Complex f = dl(i) / d(i);
            d(i + 1) -= f * du(i);
            b(i + 1) -= f * b(i);
            dl(i) = 0.0;
        }
        else
        {
            const Complex f = d(i) / dl(i);
            d(i) = dl(i);
            const Complex tmp = d(i + 1);
            d(i + 1) = du(i) - f * tmp;
            if (i + 2 < n)
            {
                du2(i) = du(i + 1);
                du(i + 1) = -f * du2(i);
            }
            du(i) = tmp;
            std::swap(b(i), b(i + 1));
            b(i + 1) -= f * b(i);
        }
    }
    const double scale = d.cwiseAbs().maxCoeff();
    for (Index i = 0; i < n; ++i)
    {
        if (std::abs(d(i)) <= 1e-15 * scale)
        {
            throw Error(ErrorCode::SingularSystem, "tridiagonal system is numerically singular");
        }
    }
    VectorC x(n);
    x(n - 1) = b(n - 1) / d(n - 1);
    if (n > 1)
    {
        x(n - 2) = (b(n - 2) - du(n - 2) * x(n - 1)) / d(n - 2);
    }
    for (Index i = n - 3; i >= 0; --i)
    {
        x(i) = (b(i) - du(i) * x(i + 1) - du2(i) * x(i + 2)) / d(i);
    }
    return x;
}

} // namespace

MatrixR penzl_matrix(double zeta)
{
    MatrixR a = MatrixR::Zero(kPenzlOrder, kPenzlOrder);
    set_rotation_block(a, 0, 100.0, (zeta + 1.0) * (zeta + 1.0));
    set_rotation_block(a, 2, 200.0, 1.0);
    set_rotation_block(a, 4, 400.0, 1.0);
    for (int k = 0; k < 20; ++k)
    {
        a(6 + k, 6 + k) = -zeta * static_cast<double>(k + 1);
    }
    return a;
}

VectorR penzl_vector(double zeta)
{
    VectorR b = VectorR::Zero(kPenzlOrder);
    b.head(6).setConstant(10.0);
    b(kPenzlOrder - 1) = zeta + 1.0;
    return b;
}

Complex penzl_component(double zeta, Complex s)
{
    MatrixC m = -penzl_matrix(zeta).cast<Complex>();
    m.diagonal().array() += s;
    const VectorC b = penzl_vector(zeta).cast<Complex>();
    Eigen::PartialPivLU<MatrixC> lu(m);
    if (!(lu.rcond() > 1e-15))
    {
        throw Error(ErrorCode::SingularSystem, "penzl: s is an eigenvalue of A(zeta)");
    }
    return b.dot(lu.solve(b));
}

bool penzl_is_real(const PenzlSpec& spec)
{
    auto real = [](Complex z) { return z.imag() == 0.0; };
    return std::all_of(spec.param_poles.begin(), spec.param_poles.end(), real) &&
           std::all_of(spec.mixing.begin(), spec.mixing.end(), real);
}

Complex penzl_eval(const PenzlSpec& spec, Complex s, Complex p)
{
    if (spec.zetas.size() != spec.param_poles.size() || spec.mixing.size() != spec.zetas.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "penzl: zetas, poles and mixing must have equal length");
    }
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < spec.zetas.size(); ++k)
    {
        if (coincides(p, spec.param_poles[k]))
        {
            throw Error(ErrorCode::ParameterPoleHit, "penzl: parameter coincides with a parameter pole");
        }
        if (spec.mixing[k] == Complex{0.0, 0.0})
        {
            continue;
        }
        acc += spec.mixing[k] / (p - spec.param_poles[k]) * penzl_component(spec.zetas[k], s);
    }
    return acc;
}

Complex chain_eval(const ChainSpec& spec, Complex s, Complex p)
{
    const int n = spec.n;
    if (n < 1)
    {
        throw Error(ErrorCode::InvalidArgument, "chain: n must be >= 1");
    }
    const double nn = static_cast<double>(n);
    // s²M + s(½M + pK) + K = (s² + s/2)/n · I + (1 + s p) · K
    const Complex mass = (s * s + 0.5 * s) / nn;
    const Complex stiff = (1.0 + s * p) * nn;
    VectorC d = VectorC::Constant(n, mass + 2.0 * stiff);
    VectorC off = VectorC::Constant(std::max(n - 1, 0), -stiff);
    VectorC rhs = VectorC::Zero(n);
    rhs(n - 1) = 1.0;
    if (n == 1)
    {
        if (d(0) == Complex{0.0, 0.0})
        {
            throw Error(ErrorCode::SingularSystem, "chain: singular system");
        }
        return 1.0 / d(0);
    }
    const VectorC x = tridiagonal_solve(off, d, off, rhs);
    return x(n - 1);
}

ConvDiffSystem::ConvDiffSystem(const ConvDiffSpec& spec) : n_(spec.n)
{
    if (n_ < 1)
    {
        throw Error(ErrorCode::InvalidArgument, "convdiff: grid size must be >= 1");
    }
    const int n = n_;
    const Index dim = static_cast<Index>(n) * n;
    const double h = 1.0 / (n + 1);
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> t0;
    std::vector<Triplet> t1;
    std::vector<Triplet> t2;
    b_ = VectorR::Zero(dim);
    c_ = VectorR::Zero(dim);
    auto id = [n](int i, int j) { return static_cast<Index>(j) * n + i; };
    for (int j = 0; j < n; ++j)
    {
        for (int i = 0; i < n; ++i)
        {
            const Index k = id(i, j);
            const double z1 = (i + 1) * h;
            t0.emplace_back(k, k, -4.0 / (h * h));
            if (i > 0)
            {
                t0.emplace_back(k, id(i - 1, j), 1.0 / (h * h));
                t1.emplace_back(k, id(i - 1, j), -1.0 / (2.0 * h));
            }
            if (i + 1 < n)
            {
                t0.emplace_back(k, id(i + 1, j), 1.0 / (h * h));
                t1.emplace_back(k, id(i + 1, j), 1.0 / (2.0 * h));
            }
            if (j > 0)
            {
                t0.emplace_back(k, id(i, j - 1), 1.0 / (h * h));
                t2.emplace_back(k, id(i, j - 1), -1.0 / (2.0 * h));
            }
            if (j + 1 < n)
            {
                t0.emplace_back(k, id(i, j + 1), 1.0 / (h * h));
                t2.emplace_back(k, id(i, j + 1), 1.0 / (2.0 * h));
            }
            if (z1 <= 0.2)
            {
                b_(k) = 1.0;
            }
            if (z1 >= 0.8)
            {
                c_(k) = h * h;
            }
        }
    }
    a0_.resize(dim, dim);
    a1_.resize(dim, dim);
    a2_.resize(dim, dim);
    a0_.setFromTriplets(t0.begin(), t0.end());
    a1_.setFromTriplets(t1.begin(), t1.end());
    a2_.setFromTriplets(t2.begin(), t2.end());
}

Complex ConvDiffSystem::operator()(Complex s, Complex p, Complex q) const
{
    using SpC = Eigen::SparseMatrix<Complex>;
    const Index dim = a0_.rows();
    SpC id(dim, dim);
    id.setIdentity();
    SpC m = s * id - (a0_.cast<Complex>() + p * a1_.cast<Complex>() + q * a2_.cast<Complex>());
    m.makeCompressed();
    Eigen::SparseLU<SpC> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success)
    {
        throw Error(ErrorCode::SingularSystem, "convdiff: sI - A(p,q) is singular");
    }
    const VectorC x = lu.solve(b_.cast<Complex>());
    if (!x.allFinite())
    {
        throw Error(ErrorCode::SingularSystem, "convdiff: non-finite solution");
    }
    return c_.cast<Complex>().dot(x);
}

Complex convdiff_eval(const ConvDiffSpec& spec, Complex s, Complex p, Complex q)
{
    return ConvDiffSystem(spec)(s, p, q);
}

namespace
{

bool imaginary_axis(const VectorC& freqs)
{
    return (freqs.real().array() == 0.0).all();
}

bool all_real(const VectorC& v)
{
    return (v.imag().array() == 0.0).all();
}

} // namespace

FrequencyResponseDataset sample_model(const Evaluator1& eval, const VectorC& freqs,
                                      const VectorC& params, bool real_system)
{
    FrequencyResponseDataset d;
    d.frequencies = freqs;
    d.parameters = params;
    d.samples.resize(freqs.size(), params.size());
    const auto cols = parallel_map(static_cast<std::size_t>(params.size()), [&](std::size_t j) {
        VectorC col(freqs.size());
        for (Index i = 0; i < freqs.size(); ++i)
        {
            col(i) = eval(freqs(i), params(static_cast<Index>(j)));
        }
        return col;
    });
    for (std::size_t j = 0; j < cols.size(); ++j)
    {
        d.samples.col(static_cast<Index>(j)) = cols[j];
    }
    d.real_symmetric = real_system && imaginary_axis(freqs) && all_real(params);
    return d;
}

FrequencyResponseDataset2 sample_model(const Evaluator2& eval, const VectorC& freqs,
                                       const VectorC& params_p, const VectorC& params_q,
                                       bool real_system)
{
    FrequencyResponseDataset2 d;
    d.frequencies = freqs;
    d.params_p = params_p;
    d.params_q = params_q;
    const Index mq = params_q.size();
    const std::size_t ncols = static_cast<std::size_t>(params_p.size() * mq);
    d.samples.resize(freqs.size(), static_cast<Index>(ncols));
    const auto cols = parallel_map(ncols, [&](std::size_t c) {
        const Index ci = static_cast<Index>(c);
        VectorC col(freqs.size());
        for (Index i = 0; i < freqs.size(); ++i)
        {
            col(i) = eval(freqs(i), params_p(ci / mq), params_q(ci % mq));
        }
        return col;
    });
    for (std::size_t c = 0; c < ncols; ++c)
    {
        d.samples.col(static_cast<Index>(c)) = cols[c];
    }
    d.real_symmetric = real_system && imaginary_axis(freqs) && all_real(params_p) && all_real(params_q);
    return d;
}

} // namespace parafit
