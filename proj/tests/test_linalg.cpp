#include <doctest.h>

#include <algorithm>
#include <random>

#include <Eigen/LU>

#include <parafit/linalg.hpp>
#include <parafit/quadrature.hpp>

using namespace parafit;

namespace
{

MatrixC random_matrix(std::mt19937_64& rng, Index r, Index c)
{
    std::normal_distribution<double> n(0.0, 1.0);
    MatrixC m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j)
            m(i, j) = Complex{n(rng), n(rng)};
    return m;
}

double rel(const MatrixC& a, const MatrixC& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

std::vector<Complex> sorted(const VectorC& v)
{
    std::vector<Complex> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

} // namespace

TEST_CASE("lstsq_minnorm identity and overdetermined mean")
{
    std::mt19937_64 rng(1);
    const MatrixC b = random_matrix(rng, 3, 2);
    CHECK(rel(lstsq_minnorm(MatrixC::Identity(3, 3), b).solution, b) < 1e-14);

    MatrixC a(2, 1);
    a << 1.0, 1.0;
    MatrixC rhs(2, 1);
    rhs << 0.0, 2.0;
    const MinNormSolution s = lstsq_minnorm(a, rhs);
    CHECK(std::abs(s.solution(0, 0) - 1.0) < 1e-14);
    CHECK(s.rank == 1);
}

TEST_CASE("lstsq_minnorm picks the minimal-norm minimizer")
{
    MatrixC a = MatrixC::Ones(2, 2);
    MatrixC b = MatrixC::Constant(2, 1, 2.0);
    const MinNormSolution s = lstsq_minnorm(a, b);
    CHECK(s.rank == 1);
    // minimizers satisfy x1 + x2 = 2; the shortest is (1, 1)
    CHECK(std::abs(s.solution(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(s.solution(1, 0) - 1.0) < 1e-14);
}

TEST_CASE("pinv")
{
    MatrixC d = MatrixC::Zero(2, 2);
    d(0, 0) = 2.0;
    const MatrixC pd = pinv(d);
    CHECK(std::abs(pd(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(pd(1, 1)) == 0.0);

    std::mt19937_64 rng(2);
    const MatrixC q = range_basis(random_matrix(rng, 4, 4));
    CHECK(rel(pinv(q), q.adjoint()) < 1e-12);

    const MatrixC a = random_matrix(rng, 4, 2);
    const MatrixC normal = (a.adjoint() * a).inverse() * a.adjoint();
    CHECK(rel(pinv(a), normal) < 1e-12);
}

TEST_CASE("eig_general small cases")
{
    MatrixC d = MatrixC::Zero(2, 2);
    d(0, 0) = -1.0;
    d(1, 1) = -5.0;
    auto v = sorted(eig_general(d).values);
    CHECK(std::abs(v[0] + 5.0) < 1e-14);
    CHECK(std::abs(v[1] + 1.0) < 1e-14);

    MatrixC swap(2, 2);
    swap << 0.0, 1.0, 1.0, 0.0;
    v = sorted(eig_general(swap).values);
    CHECK(std::abs(v[0] + 1.0) < 1e-14);
    CHECK(std::abs(v[1] - 1.0) < 1e-14);

    // companion of z^2 + z - 6, roots by the quadratic formula
    MatrixC comp(2, 2);
    comp << -1.0, 6.0, 1.0, 0.0;
    const double disc = std::sqrt(1.0 + 24.0);
    v = sorted(eig_general(comp).values);
    CHECK(std::abs(v[0] - (-1.0 - disc) / 2.0) < 1e-13);
    CHECK(std::abs(v[1] - (-1.0 + disc) / 2.0) < 1e-13);

    const EigenDecomposition ed = eig_general(comp);
    CHECK(rel(comp * ed.vectors, ed.vectors * ed.values.asDiagonal()) < 1e-13);
}

TEST_CASE("eig_real returns exact conjugate pairs")
{
    MatrixR a(2, 2);
    a << -1.0, 3.0, -3.0, -1.0;
    const VectorC v = eig_real(a);
    CHECK(v(0) == std::conj(v(1)));
    CHECK(std::abs(std::abs(v(0).imag()) - 3.0) < 1e-14);
}

TEST_CASE("cholesky_upper")
{
    CHECK(rel(cholesky_upper(MatrixC::Identity(3, 3)), MatrixC::Identity(3, 3)) == 0.0);

    MatrixC g(2, 2);
    g << 1.0, 0.5, 0.5, 1.0 / 3.0;
    const MatrixC r = cholesky_upper(g);
    CHECK(std::abs(r(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(r(0, 1) - 0.5) < 1e-15);
    CHECK(std::abs(r(1, 0)) == 0.0);
    CHECK(std::abs(r(1, 1) - std::sqrt(1.0 / 12.0)) < 1e-14);

    MatrixC h(2, 2);
    h << 1.0, Complex{0.0, 0.5}, Complex{0.0, -0.5}, 1.0;
    const MatrixC rh = cholesky_upper(h);
    CHECK(rel(rh.adjoint() * rh, h) < 1e-14);
    CHECK(rh(0, 0).imag() == 0.0);
    CHECK(rh(1, 1).real() > 0.0);

    MatrixC bad = MatrixC::Identity(2, 2);
    bad(1, 1) = -1.0;
    CHECK_THROWS_AS(cholesky_upper(bad), Error);
}

TEST_CASE("solve_dense")
{
    std::mt19937_64 rng(3);
    const MatrixC a = random_matrix(rng, 5, 5);
    const MatrixC x = random_matrix(rng, 5, 2);
    CHECK(rel(solve_dense(a, a * x), x) < 1e-12);

    MatrixC sing = MatrixC::Ones(2, 2);
    try
    {
        solve_dense(sing, MatrixC::Ones(2, 1));
        FAIL("expected Singular");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == ErrorCode::Singular);
    }
}

TEST_CASE("kron, vec and unvec")
{
    std::mt19937_64 rng(4);
    const MatrixC m = random_matrix(rng, 3, 2);
    const MatrixC n = random_matrix(rng, 4, 3);
    const MatrixC x = random_matrix(rng, 3, 2);
    // vec(N X Mᵀ) = (M ⊗ N) vec(X)
    const VectorC lhs = vec(n * x * m.transpose());
    const VectorC rhs = kron(m, n) * vec(x);
    CHECK((lhs - rhs).norm() / rhs.norm() < 1e-12);
    CHECK(rel(unvec(vec(x), 3, 2), x) == 0.0);

    const MatrixC k = kron(m, n);
    CHECK(k.rows() == 12);
    CHECK(k.cols() == 6);
    CHECK(k(4 + 1, 3 + 2) == m(1, 1) * n(1, 2));

    CHECK(rel(pinv(k), kron(pinv(m), pinv(n))) < 1e-10);
}

TEST_CASE("quadrature helpers")
{
    const QuadratureRule q = gauss_legendre(10, 1.0, 3.0);
    CHECK(std::abs(q.weights.sum() - 2.0) < 1e-14);
    // exact for degree 19
    double acc = 0.0;
    for (Index i = 0; i < q.nodes.size(); ++i)
    {
        acc += q.weights(i) * std::pow(q.nodes(i), 7);
    }
    CHECK(std::abs(acc - (std::pow(3.0, 8) - 1.0) / 8.0) < 1e-10);

    const VectorR l = logspace(1e-3, 1e3, 7);
    CHECK(l(0) == 1e-3);
    CHECK(l(6) == 1e3);
    CHECK(std::abs(l(3) - 1.0) < 1e-15);
    const VectorR u = linspace(0.0, 1.0, 5);
    CHECK(u(4) == 1.0);
    CHECK(std::abs(u(1) - 0.25) < 1e-16);
}
