#include <parafit/compress.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <parafit/linalg.hpp>
#include <parafit/quadrature.hpp>
#include <parafit/vecfit.hpp>

namespace parafit
{

namespace
{

using Real128 = __float128;

struct Complex128
{
    Real128 re = 0;
    Real128 im = 0;
};

inline Complex128 to128(Complex z)
{
    return {static_cast<Real128>(z.real()), static_cast<Real128>(z.imag())};
}

inline Complex128 operator*(Complex128 x, Complex128 y)
{
    return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
}

inline Complex128 operator+(Complex128 x, Complex128 y)
{
    return {x.re + y.re, x.im + y.im};
}

inline Complex128 conj128(Complex128 x)
{
    return {x.re, -x.im};
}

inline Complex128 inv128(Complex128 x)
{
    const Real128 d = x.re * x.re + x.im * x.im;
    return {x.re / d, -x.im / d};
}

void require_stable(const VectorC& a)
{
    for (Index i = 0; i < a.size(); ++i)
    {
        if (!(a(i).real() < 0.0))
        {
            throw Error(ErrorCode::UnstableSystem, "H2 norm requested for a system with a pole in Re >= 0");
        }
    }
}

/// Sorts shifts by (Im, Re) and permutes tangents along.
void canonical_sort(VectorC& shifts, MatrixC& tangents)
{
    std::vector<Index> idx(static_cast<std::size_t>(shifts.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index x, Index y) {
        if (shifts(x).imag() != shifts(y).imag())
        {
            return shifts(x).imag() < shifts(y).imag();
        }
        return shifts(x).real() < shifts(y).real();
    });
    VectorC s2(shifts.size());
    MatrixC t2(tangents.rows(), tangents.cols());
    for (std::size_t k = 0; k < idx.size(); ++k)
    {
        s2(static_cast<Index>(k)) = shifts(idx[k]);
        t2.col(static_cast<Index>(k)) = tangents.col(idx[k]);
    }
    shifts = s2;
    tangents = t2;
}

void separate_collisions(VectorC& shifts)
{
    for (Index i = 0; i < shifts.size(); ++i)
    {
        for (Index j = 0; j < i; ++j)
        {
            if (std::abs(shifts(i) - shifts(j)) <= 1e-14 * std::abs(shifts(j)))
            {
                shifts(i) *= 1.0 + 1e-8 * static_cast<double>(i + 1);
            }
        }
    }
}

/// Conjugation permutation of the states when poles pair up and b·c follows
/// the pairing.
std::optional<std::vector<Index>> real_simo(const SIMORealization& sys)
{
    auto perm = conjugation_permutation(sys.a_diag, 1e-12);
    if (!perm)
    {
        return std::nullopt;
    }
    for (Index k = 0; k < sys.states(); ++k)
    {
        const Index m = (*perm)[static_cast<std::size_t>(k)];
        const VectorC rk = sys.c.col(k) * sys.b(k);
        const VectorC rm = sys.c.col(m) * sys.b(m);
        if ((rm - rk.conjugate()).norm() > 1e-10 * std::max(rk.norm(), 1e-300))
        {
            return std::nullopt;
        }
    }
    return perm;
}

Complex unit_phase(const VectorC& t)
{
    Index at = 0;
    t.cwiseAbs().maxCoeff(&at);
    const double a = std::abs(t(at));
    return a > 0.0 ? std::conj(t(at)) / a : Complex{1.0, 0.0};
}

/// Makes the shift set closed under conjugation: near pairs become exact
/// pairs with conjugate tangents, leftovers become real.
void close_shifts(VectorC& shifts, MatrixC& tangents)
{
    const Index r = shifts.size();
    std::vector<bool> done(static_cast<std::size_t>(r), false);
    for (Index k = 0; k < r; ++k)
    {
        if (done[static_cast<std::size_t>(k)])
        {
            continue;
        }
        done[static_cast<std::size_t>(k)] = true;
        const double scale = std::abs(shifts(k));
        if (std::abs(shifts(k).imag()) > 1e-10 * scale)
        {
            Index best = -1;
            double dist = 1e-6 * scale;
            for (Index m = k + 1; m < r; ++m)
            {
                const double dm = std::abs(shifts(m) - std::conj(shifts(k)));
                if (!done[static_cast<std::size_t>(m)] && dm <= dist)
                {
                    best = m;
                    dist = dm;
                }
            }
            if (best >= 0)
            {
                done[static_cast<std::size_t>(best)] = true;
                shifts(k) = 0.5 * (shifts(k) + std::conj(shifts(best)));
                shifts(best) = std::conj(shifts(k));
                tangents.col(best) = tangents.col(k).conjugate();
                continue;
            }
        }
        shifts(k) = Complex{shifts(k).real(), 0.0};
        const VectorC t = tangents.col(k) * unit_phase(tangents.col(k));
        tangents.col(k) = t.real().cast<Complex>();
    }
}

MatrixC orthonormal_columns(const MatrixC& m)
{
    Eigen::HouseholderQR<MatrixC> qr(m);
    return qr.householderQ() * MatrixC::Identity(m.rows(), m.cols());
}

/// ‖G − G_r‖² = ‖G‖² − 2 Re⟨G, G_r⟩ + ‖G_r‖² in double precision; only used to
/// rank IRKA iterates.
double cheap_error2(const SIMORealization& g, double g_norm2, const SIMORealization& r)
{
    auto inner = [](const SIMORealization& x, const SIMORealization& y) {
        Complex acc{0.0, 0.0};
        for (Index i = 0; i < x.states(); ++i)
        {
            for (Index j = 0; j < y.states(); ++j)
            {
                acc += std::conj(x.b(i)) * y.b(j) * x.c.col(i).dot(y.c.col(j)) /
                       (-std::conj(x.a_diag(i)) - y.a_diag(j));
            }
        }
        return acc;
    };
    if ((r.a_diag.real().array() >= 0.0).any())
    {
        return std::numeric_limits<double>::infinity();
    }
    return g_norm2 - 2.0 * inner(g, r).real() + inner(r, r).real();
}

struct Projection
{
    ReducedSystem sys;
    VectorC eigenvalues;
    MatrixC eigenvectors;
};

/// Unitary change to real coordinates for a conjugate-paired modal system:
/// each pair (i, j) maps to ((x_i + x_j)/√2, (x_i − x_j)/(i√2)).
MatrixC to_real_coords(const MatrixC& x, const std::vector<Index>& perm)
{
    MatrixC y = x;
    const double h = 1.0 / std::sqrt(2.0);
    for (Index i = 0; i < x.rows(); ++i)
    {
        const Index j = perm[static_cast<std::size_t>(i)];
        if (j > i)
        {
            y.row(i) = h * (x.row(i) + x.row(j));
            y.row(j) = Complex{0.0, -h} * (x.row(i) - x.row(j));
        }
    }
    return y;
}

/// Orthonormal real basis of span{Re y, Im y}, truncated to r columns.
MatrixR real_basis(const MatrixC& y, Index r)
{
    MatrixR both(y.rows(), 2 * y.cols());
    both << y.real(), y.imag();
    Eigen::BDCSVD<MatrixR> svd(both, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(r);
}

/// Projection in real coordinates; the reduced matrices are real and their
/// eigenpairs come in exact conjugate pairs.
Projection project_real(const SIMORealization& g, const std::vector<Index>& perm, const MatrixC& v,
                        const MatrixC& w)
{
    const Index n = g.states();
    const Index r = v.cols();
    const MatrixR vr = real_basis(to_real_coords(v, perm), r);
    const MatrixR wr = real_basis(to_real_coords(w, perm), r);
    MatrixR ar = MatrixR::Zero(n, n);
    for (Index i = 0; i < n; ++i)
    {
        const Index j = perm[static_cast<std::size_t>(i)];
        const Complex l = g.a_diag(i);
        if (j == i)
        {
            ar(i, i) = l.real();
        }
        else if (j > i)
        {
            ar(i, i) = l.real();
            ar(j, j) = l.real();
            ar(i, j) = -l.imag();
            ar(j, i) = l.imag();
        }
    }
    const MatrixC gb = g.b;
    const MatrixR br = to_real_coords(gb, perm).real();
    const MatrixR cr = to_real_coords(g.c.adjoint(), perm).adjoint().real();
    const MatrixR wv = wr.transpose() * vr;
    Eigen::FullPivLU<MatrixR> lu(wv);
    if (!lu.isInvertible() || lu.rcond() < 1e-15)
    {
        throw Error(ErrorCode::SingularProjection, "W^T V is numerically singular");
    }
    ReducedSystem red;
    red.a = lu.solve(MatrixR(wr.transpose() * ar * vr)).cast<Complex>();
    red.b = lu.solve(MatrixR(wr.transpose() * br)).col(0).cast<Complex>();
    red.c = (cr * vr).cast<Complex>();

    Eigen::EigenSolver<MatrixR> es(red.a.real(), true);
    if (es.info() != Eigen::Success)
    {
        throw Error(ErrorCode::NoConvergence, "reduced eigenproblem did not converge");
    }
    Projection p;
    p.sys = red;
    p.eigenvalues = es.eigenvalues();
    p.eigenvectors = es.eigenvectors();
    for (Index k = 0; k < r; ++k)
    {
        p.eigenvectors.col(k).normalize();
    }
    return p;
}

Projection project(const SIMORealization& g, const VectorC& shifts, const MatrixC& tangents,
                   const std::vector<Index>* perm = nullptr)
{
    const Index n = g.states();
    const Index r = shifts.size();
    MatrixC v(n, r);
    MatrixC w(n, r);
    const MatrixC cadj = g.c.adjoint();
    for (Index k = 0; k < r; ++k)
    {
        const VectorC ct = cadj * tangents.col(k);
        for (Index i = 0; i < n; ++i)
        {
            v(i, k) = g.b(i) / (shifts(k) - g.a_diag(i));
            w(i, k) = ct(i) / (std::conj(shifts(k)) - std::conj(g.a_diag(i)));
        }
    }
    if (!v.allFinite() || !w.allFinite())
    {
        throw Error(ErrorCode::SingularProjection, "IRKA shift coincides with a system pole");
    }
    if (perm)
    {
        return project_real(g, *perm, v, w);
    }
    v = orthonormal_columns(v);
    w = orthonormal_columns(w);
    const MatrixC wv = w.adjoint() * v;
    MatrixC av = g.a_diag.asDiagonal() * v;
    MatrixC rhs(r, r + 1);
    rhs.leftCols(r) = w.adjoint() * av;
    rhs.col(r) = w.adjoint() * g.b;
    MatrixC sol;
    try
    {
        sol = solve_dense(wv, rhs);
    }
    catch (const Error& e)
    {
        if (e.code() == ErrorCode::Singular)
        {
            throw Error(ErrorCode::SingularProjection, "W^H V is numerically singular");
        }
        throw;
    }
    Projection p;
    p.sys.a = sol.leftCols(r);
    p.sys.b = sol.col(r);
    p.sys.c = g.c * v;
    const EigenDecomposition ed = eig_general(p.sys.a);
    p.eigenvalues = ed.values;
    p.eigenvectors = ed.vectors;
    return p;
}

/// Diagonal SIMO form from a projection; falls back to none when the
/// eigenvector matrix is singular.
bool diagonal_form(const Projection& p, SIMORealization& out)
{
    try
    {
        const MatrixC bd = solve_dense(p.eigenvectors, p.sys.b);
        out.a_diag = p.eigenvalues;
        out.b = bd.col(0);
        out.c = p.sys.c * p.eigenvectors;
        return true;
    }
    catch (const Error&)
    {
        return false;
    }
}

} // namespace

VectorC ReducedSystem::operator()(Complex s) const
{
    MatrixC m = -a;
    m.diagonal().array() += s;
    return c * solve_dense(m, b).col(0);
}

SIMORealization assemble_simo(const ParametricModel& model)
{
    const Index n = model.state_order();
    const Index rp = model.basis().size();
    SIMORealization sys;
    sys.a_diag.resize(n);
    sys.b = VectorC::Ones(n);
    sys.c.resize(rp, n);
    const MatrixC& x = model.coefficients();
    Index i = 0;
    for (std::size_t k = 0; k < model.local_models().size(); ++k)
    {
        const PoleResidueModel& h = model.local_models()[k];
        for (Index m = 0; m < h.order(); ++m, ++i)
        {
            Complex lam = h.poles()(m);
            int count = 0;
            for (Index j = 0; j < i; ++j)
            {
                if (std::abs(sys.a_diag(j) - lam) <= 1e-13 * std::abs(lam))
                {
                    ++count;
                }
            }
            if (count > 0)
            {
                lam *= 1.0 + 1e-10 * count;
            }
            sys.a_diag(i) = lam;
            sys.c.col(i) = h.residues()(m) * x.row(static_cast<Index>(k)).transpose();
        }
    }
    return sys;
}

MatrixC gram_matrix(const ParametricBasis& basis)
{
    const QuadratureRule q = gauss_legendre(200, basis.lower(), basis.upper());
    const Index r = basis.size();
    MatrixC v(q.nodes.size(), r);
    for (Index k = 0; k < q.nodes.size(); ++k)
    {
        v.row(k) = basis.eval(Complex{q.nodes(k), 0.0}).transpose() * std::sqrt(q.weights(k));
    }
    MatrixC g = v.adjoint() * v;
    // exact Hermitian symmetry for the Cholesky check
    g = (0.5 * (g + g.adjoint())).eval();
    return g;
}

double h2_norm_simo(const SIMORealization& sys)
{
    sys.validate();
    require_stable(sys.a_diag);
    const Index n = sys.states();
    std::vector<Complex128> k(static_cast<std::size_t>(n * n));
    for (Index i = 0; i < n; ++i)
    {
        const Complex128 ai = conj128(to128(sys.a_diag(i)));
        for (Index j = 0; j < n; ++j)
        {
            const Complex128 aj = to128(sys.a_diag(j));
            k[static_cast<std::size_t>(i * n + j)] = inv128({-(ai.re + aj.re), -(ai.im + aj.im)});
        }
    }
    Real128 total = 0;
    std::vector<Complex128> v(static_cast<std::size_t>(n));
    for (Index l = 0; l < sys.outputs(); ++l)
    {
        for (Index i = 0; i < n; ++i)
        {
            v[static_cast<std::size_t>(i)] = to128(sys.c(l, i)) * to128(sys.b(i));
        }
        for (Index i = 0; i < n; ++i)
        {
            Complex128 row{};
            const Complex128* kr = &k[static_cast<std::size_t>(i * n)];
            for (Index j = 0; j < n; ++j)
            {
                row = row + kr[j] * v[static_cast<std::size_t>(j)];
            }
            total += (conj128(v[static_cast<std::size_t>(i)]) * row).re;
        }
    }
    const double t = static_cast<double>(total);
    return t > 0.0 ? std::sqrt(t) : 0.0;
}

SIMORealization weight_outputs(const SIMORealization& sys, const MatrixC& r)
{
    if (r.cols() != sys.outputs())
    {
        throw Error(ErrorCode::ShapeMismatch, "weight_outputs: R does not match output count");
    }
    SIMORealization out = sys;
    out.c = r * sys.c;
    return out;
}

SIMORealization diagonalize(const ReducedSystem& sys)
{
    const EigenDecomposition ed = eig_general(sys.a);
    SIMORealization out;
    out.a_diag = ed.values;
    out.b = solve_dense(ed.vectors, sys.b).col(0);
    out.c = sys.c * ed.vectors;
    return out;
}

IRKAResult irka_simo(const SIMORealization& sys, const IRKAConfig& config)
{
    sys.validate();
    require_stable(sys.a_diag);
    const Index n = sys.states();
    const Index r = config.n_red;
    if (r < 1 || r > n)
    {
        throw Error(ErrorCode::InvalidArgument, "irka_simo: need 1 <= n_red <= n_s");
    }
    if (config.max_iters < 1 || !(config.shift_tol > 0.0))
    {
        throw Error(ErrorCode::InvalidArgument, "irka_simo: bad iteration settings");
    }

    VectorR score(n);
    for (Index i = 0; i < n; ++i)
    {
        score(i) = sys.c.col(i).norm() * std::abs(sys.b(i)) / std::abs(sys.a_diag(i).real());
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return score(x) > score(y); });

    IRKAResult out;
    if (score.maxCoeff() == 0.0)
    {
        // zero transfer function: any stable reduced model with zero gain
        out.reduced.a = MatrixC::Zero(r, r);
        for (Index k = 0; k < r; ++k)
        {
            out.reduced.a(k, k) = sys.a_diag(order[static_cast<std::size_t>(k)]);
        }
        out.reduced.b = VectorC::Zero(r);
        out.reduced.c = MatrixC::Zero(sys.outputs(), r);
        out.diagonal = out.reduced;
        out.shifts = -out.reduced.a.diagonal().conjugate();
        out.tangents = MatrixC::Zero(sys.outputs(), r);
        out.converged = true;
        return out;
    }

    VectorC shifts(r);
    MatrixC tangents(sys.outputs(), r);
    if (config.init == IRKAInit::DominantPoles)
    {
        for (Index k = 0; k < r; ++k)
        {
            const Index i = order[static_cast<std::size_t>(k)];
            shifts(k) = -std::conj(sys.a_diag(i));
            tangents.col(k) = sys.c.col(i);
        }
    }
    else
    {
        const VectorR im = sys.a_diag.imag().cwiseAbs();
        const VectorR re = sys.a_diag.real().cwiseAbs();
        const double lo = std::max(std::min(im.minCoeff(), re.minCoeff()), 1e-12);
        const double hi = std::max(im.maxCoeff(), re.maxCoeff());
        const VectorR pts = logspace(lo, std::max(hi, 2.0 * lo), r);
        const VectorC dir = sys.c * sys.b;
        for (Index k = 0; k < r; ++k)
        {
            shifts(k) = Complex{pts(k), 0.0};
            tangents.col(k) = dir;
        }
    }
    const std::optional<std::vector<Index>> real_perm =
        config.preserve_realness ? real_simo(sys) : std::nullopt;
    const bool real_input = real_perm.has_value();
    if (real_input)
    {
        close_shifts(shifts, tangents);
    }
    separate_collisions(shifts);
    canonical_sort(shifts, tangents);

    const double g2 = std::pow(h2_norm_simo(sys), 2);
    double best_err = std::numeric_limits<double>::infinity();
    bool have_best = false;
    Projection best;
    VectorC best_shifts;
    MatrixC best_tangents;

    int it = 0;
    int restarts = 0;
    bool converged = false;
    Projection last;
    while (it < config.max_iters)
    {
        ++it;
        Projection p;
        try
        {
            p = project(sys, shifts, tangents, real_input ? &*real_perm : nullptr);
        }
        catch (const Error& e)
        {
            if (e.code() != ErrorCode::SingularProjection || restarts >= 3)
            {
                throw;
            }
            ++restarts;
            for (Index k = 0; k < r; ++k)
            {
                shifts(k) *= 1.0 + 1e-3 * static_cast<double>(restarts) * static_cast<double>(k + 1) / r;
            }
            separate_collisions(shifts);
            canonical_sort(shifts, tangents);
            continue;
        }

        SIMORealization d;
        if (diagonal_form(p, d))
        {
            const double e2 = cheap_error2(sys, g2, d);
            if (e2 < best_err || !have_best)
            {
                best_err = e2;
                best = p;
                best_shifts = shifts;
                best_tangents = tangents;
                have_best = true;
            }
        }

        VectorC next = -flip_unstable(p.eigenvalues).conjugate();
        MatrixC next_t = p.sys.c * p.eigenvectors;
        if (real_input)
        {
            close_shifts(next, next_t);
        }
        separate_collisions(next);
        canonical_sort(next, next_t);
        double change = 0.0;
        for (Index k = 0; k < r; ++k)
        {
            change = std::max(change, std::abs(next(k) - shifts(k)) / std::abs(shifts(k)));
        }
        last = p;
        if (change < config.shift_tol)
        {
            converged = true;
            break;
        }
        shifts = next;
        tangents = next_t;
    }

    if (converged)
    {
        best = last;
        best_shifts = shifts;
        best_tangents = tangents;
        have_best = true;
    }
    else if (!have_best)
    {
        best = last;
        best_shifts = shifts;
        best_tangents = tangents;
    }

    out.reduced = best.sys;
    out.shifts = best_shifts;
    out.tangents = best_tangents;
    out.iterations = it;
    out.restarts = restarts;
    out.converged = converged;
    if (!converged)
    {
        out.diagnostic = "IRKA did not converge within " + std::to_string(config.max_iters) +
                         " iterations; best iterate returned";
    }

    SIMORealization d;
    if (diagonal_form(best, d))
    {
        if (config.flip_unstable_reduced)
        {
            d.a_diag = flip_unstable(d.a_diag);
        }
        out.diagonal.a = d.a_diag.asDiagonal();
        out.diagonal.b = d.b;
        out.diagonal.c = d.c;
    }
    else
    {
        out.diagonal = best.sys;
    }
    return out;
}

SIMORealization to_simo(const CompressedParametricModel& model)
{
    const MatrixC& a = model.a_red;
    const bool diag = (a - MatrixC(a.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    if (diag)
    {
        SIMORealization s;
        s.a_diag = a.diagonal();
        s.b = model.b_red;
        s.c = model.c_red_unweighted;
        return s;
    }
    return diagonalize(ReducedSystem{a, model.b_red, model.c_red_unweighted});
}

double h2l2_error(const SIMORealization& a, const SIMORealization& b, const MatrixC& gram_chol)
{
    if (a.outputs() != b.outputs() || gram_chol.cols() != a.outputs())
    {
        throw Error(ErrorCode::BasisMismatch, "h2l2_error: output dimensions differ");
    }
    SIMORealization d;
    const Index na = a.states();
    const Index nb = b.states();
    d.a_diag.resize(na + nb);
    d.a_diag << a.a_diag, b.a_diag;
    d.b.resize(na + nb);
    d.b << a.b, b.b;
    d.c.resize(a.outputs(), na + nb);
    d.c << a.c, -b.c;
    return h2_norm_simo(weight_outputs(d, gram_chol));
}

double h2l2_error(const ParametricModel& a, const ParametricModel& b)
{
    if (a.basis() != b.basis())
    {
        throw Error(ErrorCode::BasisMismatch, "h2l2_error: models use different bases");
    }
    const MatrixC r = cholesky_upper(gram_matrix(a.basis()));
    return h2l2_error(assemble_simo(a), assemble_simo(b), r);
}

double h2l2_error(const ParametricModel& a, const CompressedParametricModel& b)
{
    if (a.basis() != b.basis)
    {
        throw Error(ErrorCode::BasisMismatch, "h2l2_error: models use different bases");
    }
    const MatrixC r = cholesky_upper(gram_matrix(a.basis()));
    return h2l2_error(assemble_simo(a), to_simo(b), r);
}

double h2l2_error(const CompressedParametricModel& a, const CompressedParametricModel& b)
{
    if (a.basis != b.basis)
    {
        throw Error(ErrorCode::BasisMismatch, "h2l2_error: models use different bases");
    }
    const MatrixC r = cholesky_upper(gram_matrix(a.basis));
    return h2l2_error(to_simo(a), to_simo(b), r);
}

double h2l2_norm(const ParametricModel& a)
{
    const MatrixC r = cholesky_upper(gram_matrix(a.basis()));
    return h2_norm_simo(weight_outputs(assemble_simo(a), r));
}

ReducedPieces compress_with_gram(const SIMORealization& sys, const MatrixC& gram_chol,
                                 const IRKAConfig& config)
{
    const SIMORealization weighted = weight_outputs(sys, gram_chol);
    ReducedPieces out;
    out.irka = irka_simo(weighted, config);
    out.a_red = out.irka.diagonal.a;
    out.b_red = out.irka.diagonal.b;
    out.c_red_unweighted = gram_chol.triangularView<Eigen::Upper>().solve(out.irka.diagonal.c);
    out.reference_norm = h2_norm_simo(weighted);

    SIMORealization red;
    red.a_diag = out.a_red.diagonal();
    red.b = out.b_red;
    red.c = out.c_red_unweighted;
    const bool diag =
        (out.a_red - MatrixC(out.a_red.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    if (!diag)
    {
        red = diagonalize(ReducedSystem{out.a_red, out.b_red, out.c_red_unweighted});
    }
    out.error = h2l2_error(sys, red, gram_chol);
    return out;
}

void close_under_conjugation(ReducedPieces& pieces, double rel_tol)
{
    MatrixC& a = pieces.a_red;
    const Index n = a.rows();
    if (n == 0 || (a - MatrixC(a.diagonal().asDiagonal())).cwiseAbs().maxCoeff() != 0.0)
    {
        return;
    }
    VectorC lam = a.diagonal();
    const auto perm = conjugation_permutation(lam, rel_tol);
    if (!perm)
    {
        return;
    }
    for (Index k = 0; k < n; ++k)
    {
        if ((*perm)[static_cast<std::size_t>((*perm)[static_cast<std::size_t>(k)])] != k)
        {
            return;
        }
    }
    MatrixC c = pieces.c_red_unweighted * pieces.b_red.asDiagonal();
    for (Index k = 0; k < n; ++k)
    {
        const Index m = (*perm)[static_cast<std::size_t>(k)];
        if (m == k)
        {
            lam(k) = Complex{lam(k).real(), 0.0};
            c.col(k) = c.col(k).real().cast<Complex>();
        }
        else if (m > k)
        {
            const Complex l = 0.5 * (lam(k) + std::conj(lam(m)));
            lam(k) = l;
            lam(m) = std::conj(l);
            const VectorC ck = 0.5 * (c.col(k) + c.col(m).conjugate());
            c.col(k) = ck;
            c.col(m) = ck.conjugate();
        }
    }
    a = lam.asDiagonal();
    pieces.b_red = VectorC::Ones(n);
    pieces.c_red_unweighted = c;
}

CompressResult compress(const ParametricModel& model, const IRKAConfig& config)
{
    if (!model.stable())
    {
        throw Error(ErrorCode::UnstableSystem, "compress: intermediate model is unstable");
    }
    const MatrixC r = cholesky_upper(gram_matrix(model.basis()));
    IRKAConfig cfg = config;
    cfg.preserve_realness = cfg.preserve_realness || model.real_flag();
    ReducedPieces pieces = compress_with_gram(assemble_simo(model), r, cfg);
    if (model.real_flag())
    {
        close_under_conjugation(pieces);
    }
    CompressedParametricModel cm{model.basis(), r, pieces.a_red, pieces.b_red,
                                 pieces.c_red_unweighted, model.real_flag()};
    CompressResult out{cm};
    out.irka = std::move(pieces.irka);
    out.error = pieces.error;
    out.reference_norm = pieces.reference_norm;
    return out;
}

double hinf_error_at_param(const ScalarResponse& f, const ScalarResponse& g,
                           const VectorR& omega_grid)
{
    if (omega_grid.size() < 1)
    {
        throw Error(ErrorCode::InvalidArgument, "hinf_error_at_param: empty grid");
    }
    auto err = [&](double w) { return std::abs(f(Complex{0.0, w}) - g(Complex{0.0, w})); };
    Index arg = 0;
    double best = -1.0;
    for (Index k = 0; k < omega_grid.size(); ++k)
    {
        const double e = err(omega_grid(k));
        if (e > best)
        {
            best = e;
            arg = k;
        }
    }
    if (omega_grid.size() < 3)
    {
        return best;
    }
    double lo = omega_grid(std::max<Index>(arg - 1, 0));
    double hi = omega_grid(std::min<Index>(arg + 1, omega_grid.size() - 1));
    const bool logscale = lo > 0.0;
    auto to_w = [&](double u) { return logscale ? std::exp(u) : u; };
    double a = logscale ? std::log(lo) : lo;
    double b = logscale ? std::log(hi) : hi;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = err(to_w(x1));
    double f2 = err(to_w(x2));
    for (int it = 0; it < 60; ++it)
    {
        if (f1 > f2)
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = err(to_w(x1));
        }
        else
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = err(to_w(x2));
        }
    }
    return std::max({best, f1, f2});
}

double band_h2_norm(const ScalarResponse& f, const VectorR& omega_grid)
{
    if (omega_grid.size() < 2 || !(omega_grid.minCoeff() > 0.0))
    {
        throw Error(ErrorCode::InvalidArgument, "band_h2_norm: need >= 2 positive grid points");
    }
    double acc = 0.0;
    double prev_u = std::log(omega_grid(0));
    double prev_v = std::norm(f(Complex{0.0, omega_grid(0)})) * omega_grid(0);
    for (Index k = 1; k < omega_grid.size(); ++k)
    {
        const double u = std::log(omega_grid(k));
        const double v = std::norm(f(Complex{0.0, omega_grid(k)})) * omega_grid(k);
        acc += 0.5 * (u - prev_u) * (v + prev_v);
        prev_u = u;
        prev_v = v;
    }
    return std::sqrt(acc);
}

} // namespace parafit
