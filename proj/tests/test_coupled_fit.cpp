#include <doctest.h>

#include <random>

#include <parafit/coupled_fit.hpp>
#include <parafit/quadrature.hpp>

using namespace parafit;

namespace
{

Complex uniform_c(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return {u(rng), u(rng)};
}

MatrixC random_matrix(std::mt19937_64& rng, Index r, Index c)
{
    MatrixC m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j)
            m(i, j) = uniform_c(rng);
    return m;
}

PoleResidueModel first_order(Complex pole, Complex res)
{
    return PoleResidueModel(VectorC::Constant(1, pole), VectorC::Constant(1, res));
}

} // namespace

TEST_CASE("design matrices")
{
    VectorC freqs(2);
    freqs << 0.0, kI;
    const DesignMatrices d =
        build_design({first_order(-1.0, 1.0)}, freqs, ParametricBasis::monomial(0, 0.0, 1.0), VectorC::Zero(1));
    CHECK(std::abs(d.a(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(d.a(1, 0) - Complex{0.5, -0.5}) < 1e-15);

    VectorC params(2);
    params << 0.0, 1.0;
    const MatrixC bb = build_design({first_order(-1.0, 1.0)}, freqs, ParametricBasis::bernstein(1, 0.0, 1.0), params).b;
    CHECK((bb - MatrixC::Identity(2, 2)).norm() < 1e-15);

    VectorC p2(2);
    p2 << 4.0, 5.0;
    const MatrixC br =
        build_design({first_order(-1.0, 1.0)}, freqs, ParametricBasis::rational(VectorC::Constant(1, 3.0), 0.0, 2.0), p2).b;
    CHECK(std::abs(br(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(br(1, 0) - 0.5) < 1e-15);
}

TEST_CASE("coupled solve recovers in-class coefficients")
{
    std::mt19937_64 rng(31);
    DesignMatrices d{random_matrix(rng, 12, 3), random_matrix(rng, 6, 2)};
    const MatrixC x = random_matrix(rng, 3, 2);
    const MatrixC h = d.a * x * d.b.transpose();
    const CoupledSolution s = solve_coupled(d, h);
    CHECK((s.x - x).norm() / x.norm() < 1e-10);
    CHECK_FALSE(s.rank_deficient);

    const CoupledSolution w = solve_coupled(d, h, MatrixR::Ones(12, 6));
    CHECK((w.x - x).norm() / x.norm() < 1e-10);
    CHECK(coupled_residual(d, s.x, h) < 1e-10 * h.norm());
}

TEST_CASE("coupled solve of a scalar mean")
{
    DesignMatrices d{MatrixC::Ones(2, 1), MatrixC::Ones(2, 1)};
    MatrixC h(2, 2);
    h << 0.0, 2.0, 2.0, 4.0;
    // normal equations: x = 𝟙ᵀ H 𝟙 / 4
    const CoupledSolution s = solve_coupled(d, h);
    CHECK(std::abs(s.x(0, 0) - 2.0) < 1e-14);
}

TEST_CASE("zero weight removes a sample")
{
    std::mt19937_64 rng(32);
    DesignMatrices d{random_matrix(rng, 8, 2), random_matrix(rng, 4, 2)};
    MatrixC h = random_matrix(rng, 8, 4);
    MatrixR w = MatrixR::Ones(8, 4);
    w(3, 1) = 0.0;
    const MatrixC x0 = solve_coupled(d, h, w).x;
    h(3, 1) += Complex{1e3, -7e2};
    const MatrixC x1 = solve_coupled(d, h, w).x;
    CHECK((x1 - x0).norm() <= 1e-12 * x0.norm());
}

TEST_CASE("weighted solve size guard")
{
    DesignMatrices d{MatrixC::Ones(300, 1), MatrixC::Ones(100, 1)};
    CHECK_THROWS_AS(solve_coupled(d, MatrixC::Ones(300, 100), MatrixR::Ones(300, 100)), Error);
}

TEST_CASE("realness projection")
{
    const ParametricBasis mono = ParametricBasis::monomial(1, 0.0, 1.0);
    MatrixC real(1, 2);
    real << 1.0, -2.0;
    CHECK(project_real(real, mono) == real);

    MatrixC x(1, 1);
    x << Complex{1.0, 2.0};
    CHECK(project_real(x, ParametricBasis::monomial(0, 0.0, 1.0))(0, 0) == Complex{1.0, 0.0});

    VectorC pi(2);
    pi << Complex{3.0, 1.0}, Complex{3.0, -1.0};
    const ParametricBasis rat = ParametricBasis::rational(pi, 0.0, 1.0);
    MatrixC y(1, 2);
    const Complex a{1.0, 2.0};
    const Complex b{-0.5, 4.0};
    y << a, b;
    const MatrixC p = project_real(y, rat);
    CHECK(std::abs(p(0, 0) - (a + std::conj(b)) / 2.0) < 1e-15);
    CHECK(std::abs(p(0, 1) - std::conj(p(0, 0))) < 1e-15);
    CHECK((project_real(p, rat) - p).norm() == 0.0);
}

TEST_CASE("fixed-basis fit of in-class data")
{
    std::mt19937_64 rng(33);
    std::vector<PoleResidueModel> locals;
    for (int k = 0; k < 3; ++k)
    {
        VectorC l(2);
        const Complex lam{-0.5 - k, 1.0 + 2.0 * k};
        l << lam, std::conj(lam);
        const Complex r = uniform_c(rng);
        VectorC res(2);
        res << r, std::conj(r);
        locals.emplace_back(l, res);
    }
    const ParametricBasis basis = ParametricBasis::bernstein(2, 0.0, 1.0);
    MatrixR xr = MatrixR::Random(3, 3);
    const ParametricModel truth(locals, basis, xr.cast<Complex>(), true);

    const VectorC freqs = (logspace(0.05, 20.0, 30).cast<Complex>() * kI).eval();
    const VectorC params = linspace(0.0, 1.0, 5).cast<Complex>();
    FrequencyResponseDataset d;
    d.frequencies = freqs;
    d.parameters = params;
    d.samples.resize(30, 5);
    for (Index i = 0; i < 30; ++i)
        for (Index j = 0; j < 5; ++j)
            d.samples(i, j) = truth(freqs(i), params(j));
    d.real_symmetric = true;

    Phase1Config cfg;
    cfg.vf.order = 6;
    cfg.basis = basis;
    cfg.enforce_real = true;
    const Phase1Result r = fit_fixed_basis(d, cfg);
    CHECK(r.relative_residual < 1e-8);
    CHECK(r.model.stable());
    CHECK(r.model.real_flag());
    CHECK(r.rms_per_parameter.size() == 5);
    CHECK(r.rms_per_parameter.maxCoeff() < 1e-8);

    FrequencyResponseDataset z = d;
    z.samples.setZero();
    const Phase1Result rz = fit_fixed_basis(z, cfg);
    CHECK(rz.model.coefficients().norm() == 0.0);
    CHECK(rz.residual == 0.0);
}
