///
/// \file quadrature.hpp
///
#ifndef PARAFIT_QUADRATURE_HPP
#define PARAFIT_QUADRATURE_HPP

#include <parafit/common.hpp>

namespace parafit
{

struct QuadratureRule
{
    VectorR nodes;
    VectorR weights;
};

/// n-point Gauss–Legendre rule mapped to [lower, upper].
QuadratureRule gauss_legendre(int n, double lower, double upper);

/// n points logarithmically spaced in [lo, hi], endpoints exact.
VectorR logspace(double lo, double hi, Index n);

/// n points equally spaced in [lo, hi], endpoints exact.
VectorR linspace(double lo, double hi, Index n);

} // namespace parafit

#endif /* PARAFIT_QUADRATURE_HPP */
