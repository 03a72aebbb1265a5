#include <doctest.h>

#include <random>

#include <parafit/compress.hpp>
#include <parafit/model.hpp>

using namespace parafit;

namespace
{

Complex uniform_c(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return {u(rng), u(rng)};
}

} // namespace

TEST_CASE("pole-residue evaluation")
{
    VectorC l(1);
    l << -1.0;
    VectorC r(1);
    r << 1.0;
    const PoleResidueModel m(l, r);
    CHECK(std::abs(m(0.0) - 1.0) < 1e-15);
    CHECK(std::abs(m(kI) - Complex{0.5, -0.5}) < 1e-15);
    CHECK(m.stable());

    VectorC l2(2);
    l2 << -1.0, -5.0;
    VectorC r2(2);
    r2 << 1.0, 2.0;
    const PoleResidueModel m2(l2, r2);
    const Complex s{0.0, 2.0};
    const Complex hand = 1.0 / (s + 1.0) + 2.0 / (s + 5.0);
    CHECK(std::abs(m2(s) - hand) / std::abs(hand) < 1e-14);

    VectorC unstable(1);
    unstable << 0.5;
    CHECK_FALSE(PoleResidueModel(unstable, r).stable());
}

TEST_CASE("evaluating at a pole is an error")
{
    VectorC l(1);
    l << -2.0;
    VectorC r(1);
    r << 1.0;
    const PoleResidueModel m(l, r);
    CHECK_THROWS_AS(m(Complex{-2.0, 0.0}), Error);
}

TEST_CASE("barycentric evaluation")
{
    VectorC nodes(1);
    nodes << -1.0;
    VectorC num(1);
    num << 2.0;
    VectorC den(1);
    den << 3.0;
    const BarycentricModel b(nodes, num, den);
    // (2/(s+1)) / (1 + 3/(s+1)) = 2/(s+4)
    const Complex s{0.3, 1.7};
    CHECK(std::abs(b(s) - 2.0 / (s + 4.0)) < 1e-14);
}

TEST_CASE("basis evaluation")
{
    const VectorC b = ParametricBasis::bernstein(1, 0.0, 1.0).eval(0.0);
    CHECK(std::abs(b(0) - 1.0) < 1e-15);
    CHECK(std::abs(b(1)) < 1e-15);

    VectorC pi(1);
    pi << 3.0;
    const VectorC r = ParametricBasis::rational(pi, 0.0, 2.0).eval(4.0);
    CHECK(r.size() == 1);
    CHECK(std::abs(r(0) - 1.0) < 1e-15);

    const ParametricBasis mono = ParametricBasis::monomial(2, 0.0, 3.0);
    const VectorC m = mono.eval(2.0);
    CHECK(std::abs(m(0) - 1.0) < 1e-15);
    CHECK(std::abs(m(1) - 2.0) < 1e-15);
    CHECK(std::abs(m(2) - 4.0) < 1e-15);
    CHECK(mono.size() == 3);
}

TEST_CASE("bernstein partition of unity")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 5.0);
    const ParametricBasis b = ParametricBasis::bernstein(20, -2.0, 5.0);
    for (int t = 0; t < 100; ++t)
    {
        CHECK(std::abs(b.eval(u(rng)).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("conjugation permutation of a rational basis")
{
    VectorC pi(3);
    pi << Complex{2.0, 1.5}, 7.0, Complex{2.0, -1.5};
    const ParametricBasis b = ParametricBasis::rational(pi, 0.0, 1.0);
    CHECK(b.conjugation_closed());
    const auto& rho = b.conj_perm();
    CHECK(rho[0] == 2);
    CHECK(rho[1] == 1);
    CHECK(rho[2] == 0);
    const Complex p{0.3, 0.2};
    const VectorC at = b.eval(p);
    const VectorC at_conj = b.eval(std::conj(p));
    for (Index l = 0; l < 3; ++l)
    {
        CHECK(std::abs(at_conj(l) - std::conj(at(rho[static_cast<std::size_t>(l)]))) < 1e-15);
    }

    VectorC open(1);
    open << Complex{2.0, 1.0};
    CHECK_FALSE(ParametricBasis::rational(open, 0.0, 1.0).conjugation_closed());
    CHECK_FALSE(conjugation_permutation(open).has_value());
}

TEST_CASE("rational poles on the interval are rejected")
{
    VectorC pi(1);
    pi << 0.5;
    CHECK_THROWS_AS(ParametricBasis::rational(pi, 0.0, 1.0), Error);
    CHECK_THROWS_AS(ParametricBasis::monomial(2, 1.0, 1.0), Error);
}

TEST_CASE("parametric evaluation")
{
    std::mt19937_64 rng(12);
    std::vector<PoleResidueModel> locals;
    for (int k = 0; k < 2; ++k)
    {
        VectorC l(2);
        l << Complex{-1.0 - k, 2.0}, Complex{-3.0, -0.5 * k};
        VectorC r(2);
        r << uniform_c(rng), uniform_c(rng);
        locals.emplace_back(l, r);
    }
    const ParametricBasis basis = ParametricBasis::monomial(1, 0.0, 2.0);

    MatrixC e11 = MatrixC::Zero(2, 2);
    e11(0, 0) = 1.0;
    const ParametricModel single(locals, basis, e11);
    const Complex s{0.2, 1.1};
    CHECK(std::abs(single(s, 0.7) - locals[0](s)) < 1e-15);

    const ParametricModel zero(locals, basis, MatrixC::Zero(2, 2));
    CHECK(zero(s, 0.7) == Complex{0.0, 0.0});

    MatrixC x(2, 2);
    x << uniform_c(rng), uniform_c(rng), uniform_c(rng), uniform_c(rng);
    const ParametricModel m(locals, basis, x);
    const Complex p{1.3, 0.0};
    Complex oracle{0.0, 0.0};
    for (int k = 0; k < 2; ++k)
    {
        for (int l = 0; l < 2; ++l)
        {
            oracle += x(k, l) * locals[static_cast<std::size_t>(k)](s) * std::pow(p, l);
        }
    }
    CHECK(std::abs(m(s, p) - oracle) / std::abs(oracle) < 1e-14);
    CHECK(m.state_order() == 4);
    CHECK(m.poles().size() == 4);
    CHECK(m.stable());

    CHECK_THROWS_AS(ParametricModel(locals, basis, MatrixC::Zero(3, 2)), Error);
}

TEST_CASE("compressed evaluation")
{
    std::mt19937_64 rng(13);
    const ParametricBasis basis = ParametricBasis::bernstein(2, 0.0, 1.0);
    CompressedParametricModel cm{basis, MatrixC::Identity(3, 3), MatrixC::Constant(1, 1, -2.0),
                                 VectorC::Constant(1, 3.0), MatrixC::Zero(3, 1), false};
    for (Index l = 0; l < 3; ++l)
    {
        cm.c_red_unweighted(l, 0) = uniform_c(rng);
    }
    const Complex s{0.1, 0.9};
    const Complex p{0.4, 0.0};
    const VectorC v = basis.eval(p);
    Complex hand{0.0, 0.0};
    for (Index l = 0; l < 3; ++l)
    {
        hand += v(l) * cm.c_red_unweighted(l, 0) * 3.0 / (s + 2.0);
    }
    CHECK(std::abs(cm(s, p) - hand) / std::abs(hand) < 1e-14);
    CHECK(cm.stable());

    cm.b_red.setZero();
    CHECK(cm(s, p) == Complex{0.0, 0.0});
}

TEST_CASE("full-order compressed form equals the parametric model")
{
    std::mt19937_64 rng(14);
    std::vector<PoleResidueModel> locals;
    for (int k = 0; k < 2; ++k)
    {
        VectorC l(2);
        l << Complex{-1.0 - k, 1.0 + k}, Complex{-0.5 - k, 0.0};
        VectorC r(2);
        r << uniform_c(rng), uniform_c(rng);
        locals.emplace_back(l, r);
    }
    const ParametricBasis basis = ParametricBasis::monomial(2, 0.0, 1.0);
    MatrixC x(2, 3);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 3; ++j)
            x(i, j) = uniform_c(rng);
    const ParametricModel m(locals, basis, x);
    const SIMORealization g = assemble_simo(m);
    const CompressedParametricModel cm{basis, MatrixC::Identity(3, 3), g.a_diag.asDiagonal(), g.b, g.c, false};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t)
    {
        const Complex s{0.0, 10.0 * u(rng)};
        const Complex p{u(rng), 0.0};
        CHECK(std::abs(cm(s, p) - m(s, p)) / std::abs(m(s, p)) < 1e-10);
    }
}
