#include <parafit/quadrature.hpp>

#include <cmath>
#include <numbers>

namespace parafit
{

QuadratureRule gauss_legendre(int n, double lower, double upper)
{
    if (n < 1)
    {
        throw Error(ErrorCode::InvalidArgument, "gauss_legendre: n must be >= 1");
    }
    QuadratureRule q{VectorR(n), VectorR(n)};
    const double half = 0.5 * (upper - lower);
    const double mid = 0.5 * (upper + lower);
    for (int i = 0; i < (n + 1) / 2; ++i)
    {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it)
        {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1)
            {
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
            {
                break;
            }
        }
        // recompute derivative at the converged root
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k)
        {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1)
        {
            p0 = 1.0;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.nodes(i) = mid - half * x;
        q.nodes(n - 1 - i) = mid + half * x;
        q.weights(i) = half * w;
        q.weights(n - 1 - i) = half * w;
    }
    return q;
}

VectorR logspace(double lo, double hi, Index n)
{
    VectorR v(n);
    if (n == 1)
    {
        v(0) = lo;
        return v;
    }
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (Index i = 0; i < n; ++i)
    {
        v(i) = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    v(0) = lo;
    v(n - 1) = hi;
    return v;
}

VectorR linspace(double lo, double hi, Index n)
{
    VectorR v(n);
    if (n == 1)
    {
        v(0) = lo;
        return v;
    }
    for (Index i = 0; i < n; ++i)
    {
        v(i) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    v(n - 1) = hi;
    return v;
}

} // namespace parafit
