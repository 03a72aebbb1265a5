#include <doctest.h>

#include <random>

#include <parafit/coupled_fit.hpp>
#include <parafit/multiparam.hpp>
#include <parafit/quadrature.hpp>

using namespace parafit;

namespace
{

std::vector<PoleResidueModel> real_locals(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<PoleResidueModel> out;
    for (int k = 0; k < n; ++k)
    {
        VectorC l(2);
        const Complex lam{-0.5 - k, 1.0 + 2.0 * k};
        l << lam, std::conj(lam);
        const Complex r{u(rng), u(rng)};
        VectorC res(2);
        res << r, std::conj(r);
        out.emplace_back(l, res);
    }
    return out;
}

MatrixC real_coeffs(std::mt19937_64& rng, Index r, Index c)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MatrixC x(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j)
            x(i, j) = u(rng);
    return x;
}

FrequencyResponseDataset2 sample2(const ParametricModel2& m, const VectorC& freqs, const VectorC& ps,
                                  const VectorC& qs)
{
    FrequencyResponseDataset2 d;
    d.frequencies = freqs;
    d.params_p = ps;
    d.params_q = qs;
    d.samples.resize(freqs.size(), ps.size() * qs.size());
    for (Index i = 0; i < freqs.size(); ++i)
        for (Index j1 = 0; j1 < ps.size(); ++j1)
            for (Index j2 = 0; j2 < qs.size(); ++j2)
                d.samples(i, flatten_index(j1 + 1, j2 + 1, ps.size(), qs.size()) - 1) = m(freqs(i), ps(j1), qs(j2));
    d.real_symmetric = m.real_flag();
    return d;
}

} // namespace

TEST_CASE("flattened column index")
{
    CHECK(flatten_index(1, 1, 4, 7) == 1);
    CHECK(flatten_index(2, 1, 4, 3) == 4);
    CHECK(flatten_index(3, 2, 4, 5) == 12);
    CHECK_THROWS_AS(flatten_index(0, 1, 4, 3), Error);
    CHECK_THROWS_AS(flatten_index(2, 4, 4, 3), Error);
    CHECK_THROWS_AS(flatten_index(5, 1, 4, 3), Error);
    for (Index c = 1; c <= 12; ++c)
    {
        const auto [j1, j2] = unflatten_index(c, 4, 3);
        CHECK(flatten_index(j1, j2, 4, 3) == c);
    }
    CHECK_THROWS_AS(unflatten_index(13, 4, 3), Error);
}

TEST_CASE("two-parameter evaluation")
{
    std::mt19937_64 rng(61);
    const auto locals = real_locals(rng, 2);
    const ParametricBasis bp = ParametricBasis::monomial(1, 0.0, 1.0);
    const ParametricBasis bq = ParametricBasis::monomial(2, 0.0, 1.0);
    const MatrixC x = real_coeffs(rng, 2, 6);
    const ParametricModel2 m(locals, bp, bq, x, true);
    CHECK(m.state_order() == 4);
    CHECK(m.stable());

    const Complex s{0.2, 1.4};
    const double p = 0.3;
    const double q = 0.8;
    Complex oracle{0.0, 0.0};
    for (int k = 0; k < 2; ++k)
        for (int l1 = 0; l1 < 2; ++l1)
            for (int l2 = 0; l2 < 3; ++l2)
                oracle += x(k, l1 * 3 + l2) * locals[static_cast<std::size_t>(k)](s) * std::pow(p, l1) * std::pow(q, l2);
    CHECK(std::abs(m(s, p, q) - oracle) < 1e-14 * std::abs(oracle));

    const VectorC v = m.basis_values(p, q);
    CHECK(v.size() == 6);
    CHECK(std::abs(v(1 * 3 + 2) - p * q * q) < 1e-15);

    const ParametricModel2 zero(locals, bp, bq, MatrixC::Zero(2, 6));
    CHECK(zero(s, p, q) == Complex{0.0, 0.0});

    MatrixC e = MatrixC::Zero(2, 6);
    e(1, 4) = 1.0;
    const ParametricModel2 one(locals, bp, bq, e);
    CHECK(std::abs(one(s, p, q) - locals[1](s) * p * q) < 1e-15);

    CHECK_THROWS_AS(ParametricModel2(locals, bp, bq, MatrixC::Zero(2, 5)), Error);
}

TEST_CASE("two-parameter fit of in-class data")
{
    std::mt19937_64 rng(62);
    const ParametricBasis bp = ParametricBasis::bernstein(1, 0.0, 1.0);
    const ParametricBasis bq = ParametricBasis::bernstein(2, 0.0, 2.0);
    const ParametricModel2 truth(real_locals(rng, 2), bp, bq, real_coeffs(rng, 2, 6), true);
    const VectorC freqs = (logspace(0.05, 20.0, 30).cast<Complex>() * kI).eval();
    const FrequencyResponseDataset2 d =
        sample2(truth, freqs, linspace(0.0, 1.0, 3).cast<Complex>(), linspace(0.0, 2.0, 4).cast<Complex>());

    TwoParamConfig cfg;
    cfg.vf.order = 4;
    cfg.basis_p = bp;
    cfg.basis_q = bq;
    cfg.enforce_real = true;
    const TwoParamResult r = fit_two_param(d, cfg);
    CHECK(r.relative_residual < 1e-8);
    CHECK(r.model.stable());
    const Complex s{0.0, 2.5};
    CHECK(std::abs(r.model(s, 0.4, 1.3) - truth(s, 0.4, 1.3)) < 1e-7 * std::abs(truth(s, 0.4, 1.3)));
}

TEST_CASE("single q value reduces to the one-parameter fit")
{
    std::mt19937_64 rng(63);
    const ParametricBasis bp = ParametricBasis::bernstein(2, 0.0, 1.0);
    const ParametricBasis bq = ParametricBasis::monomial(0, 0.0, 1.0);
    const ParametricModel2 truth(real_locals(rng, 3), bp, bq, real_coeffs(rng, 3, 3), true);
    const VectorC freqs = (logspace(0.05, 20.0, 40).cast<Complex>() * kI).eval();
    const VectorC ps = linspace(0.0, 1.0, 3).cast<Complex>();
    FrequencyResponseDataset2 d2 = sample2(truth, freqs, ps, VectorC::Constant(1, 0.5));
    // perturb so the fit is not exact
    d2.samples(3, 2) += 1e-3;

    FrequencyResponseDataset d1;
    d1.frequencies = freqs;
    d1.parameters = ps;
    d1.samples = d2.samples;
    d1.real_symmetric = true;

    Phase1Config c1;
    c1.vf.order = 6;
    c1.basis = bp;
    c1.enforce_real = true;
    const Phase1Result r1 = fit_fixed_basis(d1, c1);

    TwoParamConfig c2;
    c2.vf.order = 6;
    c2.basis_p = bp;
    c2.basis_q = bq;
    c2.enforce_real = true;
    const TwoParamResult r2 = fit_two_param(d2, c2);

    CHECK(std::abs(r2.residual - r1.residual) <= 1e-10 * d1.samples.norm());
    const Complex s{0.0, 1.7};
    for (double p : {0.0, 0.45, 1.0})
    {
        CHECK(std::abs(r2.model(s, p, 0.5) - r1.model(s, p)) <= 1e-10 * std::abs(r1.model(s, p)));
    }
}

TEST_CASE("two-parameter compression at full order")
{
    std::mt19937_64 rng(64);
    const ParametricModel2 m(real_locals(rng, 2), ParametricBasis::bernstein(1, 0.0, 1.0),
                             ParametricBasis::bernstein(1, -1.0, 1.0), real_coeffs(rng, 2, 4), true);
    const SIMORealization g = assemble_simo(m);
    CHECK(g.states() == 4);
    CHECK(g.outputs() == 4);

    IRKAConfig cfg;
    cfg.n_red = 4;
    const CompressResult2 r = compress_two_param(m, cfg);
    CHECK(r.error <= 1e-8 * r.reference_norm);
    const Complex s{0.1, 1.9};
    CHECK(std::abs(r.model(s, 0.6, -0.2) - m(s, 0.6, -0.2)) < 1e-7 * std::abs(m(s, 0.6, -0.2)));
    CHECK(std::abs(r.model(std::conj(s), 0.6, -0.2) - std::conj(r.model(s, 0.6, -0.2))) <
          1e-12 * std::abs(m(s, 0.6, -0.2)));
}
