#include <parafit/varpro.hpp>

#include <algorithm>
#include <cmath>

#include <parafit/linalg.hpp>

namespace parafit
{

Index PoleCoordinates::count() const
{
    return static_cast<Index>(real_poles.size() + 2 * pair_poles.size());
}

Index PoleCoordinates::num_coords() const
{
    return count();
}

VectorC PoleCoordinates::poles() const
{
    VectorC out(count());
    Index k = 0;
    for (double r : real_poles)
    {
        out(k++) = Complex{r, 0.0};
    }
    for (const auto& [re, im] : pair_poles)
    {
        out(k++) = Complex{re, im};
        out(k++) = Complex{re, -im};
    }
    return out;
}

VectorR PoleCoordinates::coords() const
{
    VectorR out(num_coords());
    Index k = 0;
    for (double r : real_poles)
    {
        out(k++) = r;
    }
    for (const auto& [re, im] : pair_poles)
    {
        out(k++) = re;
        out(k++) = im;
    }
    return out;
}

PoleCoordinates PoleCoordinates::from_coords(const VectorR& theta, Index num_real)
{
    if (num_real < 0 || num_real > theta.size() || (theta.size() - num_real) % 2 != 0)
    {
        throw Error(ErrorCode::ShapeMismatch, "PoleCoordinates: bad coordinate layout");
    }
    PoleCoordinates pc;
    for (Index k = 0; k < num_real; ++k)
    {
        pc.real_poles.push_back(theta(k));
    }
    for (Index k = num_real; k < theta.size(); k += 2)
    {
        pc.pair_poles.emplace_back(theta(k), std::abs(theta(k + 1)));
    }
    return pc;
}

PoleCoordinates PoleCoordinates::from_poles(const VectorC& poles)
{
    PoleCoordinates pc;
    std::vector<bool> used(static_cast<std::size_t>(poles.size()), false);
    for (Index k = 0; k < poles.size(); ++k)
    {
        if (used[static_cast<std::size_t>(k)])
        {
            continue;
        }
        const Complex z = poles(k);
        if (z.imag() == 0.0)
        {
            pc.real_poles.push_back(z.real());
            used[static_cast<std::size_t>(k)] = true;
            continue;
        }
        Index match = -1;
        for (Index m = k + 1; m < poles.size(); ++m)
        {
            if (!used[static_cast<std::size_t>(m)] &&
                std::abs(poles(m) - std::conj(z)) <= 1e-12 * std::abs(z))
            {
                match = m;
                break;
            }
        }
        if (match < 0)
        {
            throw Error(ErrorCode::InvalidArgument, "pole set is not closed under conjugation");
        }
        used[static_cast<std::size_t>(k)] = true;
        used[static_cast<std::size_t>(match)] = true;
        pc.pair_poles.emplace_back(z.real(), std::abs(z.imag()));
    }
    return pc;
}

double guard_margin(const VarproConfig& config, double lower, double upper)
{
    return config.guard > 0.0 ? config.guard : 0.05 * (upper - lower);
}

PoleCoordinates default_initial_poles(Index r_p, double lower, double upper, Index pairs)
{
    if (r_p < 1 || pairs < 0 || 2 * pairs > r_p || !(lower < upper))
    {
        throw Error(ErrorCode::InvalidArgument, "default_initial_poles: bad arguments");
    }
    PoleCoordinates pc;
    const double len = upper - lower;
    const Index nreal = r_p - 2 * pairs;
    for (Index i = 0; i < nreal; ++i)
    {
        const double off = (static_cast<double>(i / 2) + 0.5) * len / static_cast<double>(nreal);
        pc.real_poles.push_back(i % 2 == 0 ? lower - off : upper + off);
    }
    for (Index k = 0; k < pairs; ++k)
    {
        const double re = lower + (static_cast<double>(k) + 0.5) * len / static_cast<double>(pairs);
        pc.pair_poles.emplace_back(re, 0.5 * len);
    }
    return pc;
}

namespace
{

double distance_to_interval(Complex z, double lower, double upper)
{
    const double x = std::clamp(z.real(), lower, upper);
    return std::abs(z - Complex{x, 0.0});
}

bool guard_ok(const PoleCoordinates& pi, double lower, double upper, double guard)
{
    const VectorC p = pi.poles();
    for (Index k = 0; k < p.size(); ++k)
    {
        if (!std::isfinite(p(k).real()) || !std::isfinite(p(k).imag()) ||
            distance_to_interval(p(k), lower, upper) < guard)
        {
            return false;
        }
    }
    for (const auto& pr : pi.pair_poles)
    {
        if (!(pr.second > 1e-10 * (upper - lower)))
        {
            return false;
        }
    }
    return true;
}

/// Nearest guard-feasible pole set: poles inside the margin move radially out
/// to distance `guard` from the interval.
PoleCoordinates project_guard(PoleCoordinates pi, double lower, double upper, double guard)
{
    const double edge = guard * (1.0 + 1e-12);
    for (double& r : pi.real_poles)
    {
        if (distance_to_interval(Complex{r, 0.0}, lower, upper) < guard)
        {
            r = r <= 0.5 * (lower + upper) ? lower - edge : upper + edge;
        }
    }
    for (auto& [re, im] : pi.pair_poles)
    {
        const Complex z{re, im};
        const Complex c{std::clamp(re, lower, upper), 0.0};
        const double d = std::abs(z - c);
        if (d < guard)
        {
            const Complex moved = d > 0.0 ? c + (z - c) * (edge / d) : c + Complex{0.0, edge};
            re = moved.real();
            im = std::abs(moved.imag());
        }
    }
    return pi;
}

void require_guard(const PoleCoordinates& pi, double lower, double upper, double guard)
{
    if (!guard_ok(pi, lower, upper, guard))
    {
        throw Error(ErrorCode::GuardViolation, "basis pole within the guard margin of the parameter interval");
    }
}

/// Gradient with the outward-blocked normal components of poles on the guard
/// boundary removed.
VectorR projected_gradient(const PoleCoordinates& pi, const VectorR& g, Index nr, double lower,
                           double upper, double guard)
{
    VectorR pg = g;
    const double active = guard * (1.0 + 1e-8);
    for (Index k = 0; k < nr; ++k)
    {
        const double r = pi.real_poles[static_cast<std::size_t>(k)];
        if (distance_to_interval(Complex{r, 0.0}, lower, upper) <= active)
        {
            const double inward = r < lower ? 1.0 : -1.0;
            if (-g(k) * inward > 0.0)
            {
                pg(k) = 0.0;
            }
        }
    }
    for (std::size_t q = 0; q < pi.pair_poles.size(); ++q)
    {
        const auto [re, im] = pi.pair_poles[q];
        const Complex z{re, im};
        const Complex c{std::clamp(re, lower, upper), 0.0};
        const double d = std::abs(z - c);
        if (d <= active && d > 0.0)
        {
            const Index k = nr + 2 * static_cast<Index>(q);
            const double nx = (z - c).real() / d;
            const double ny = (z - c).imag() / d;
            const double along = -(g(k) * nx + g(k + 1) * ny);
            if (along < 0.0)
            {
                pg(k) += along * nx;
                pg(k + 1) += along * ny;
            }
        }
    }
    return pg;
}

MatrixC rational_design(const VectorC& poles, const VectorC& params)
{
    MatrixC b(params.size(), poles.size());
    for (Index l = 0; l < poles.size(); ++l)
    {
        for (Index i = 0; i < params.size(); ++i)
        {
            b(i, l) = 1.0 / (params(i) - poles(l));
        }
    }
    return b;
}

MatrixC projector(const MatrixC& m)
{
    const MatrixC u = range_basis(m);
    return u * u.adjoint();
}

/// Quantities shared by residual and Jacobian at one π.
struct Frame
{
    MatrixC ph;  ///< P H
    MatrixC b;   ///< B(π)
    MatrixC q;   ///< B B†
    VectorC r;
};

Frame make_frame(const PoleCoordinates& pi, const MatrixC& ph, const MatrixC& h,
                 const VectorC& params)
{
    Frame f;
    f.ph = ph;
    f.b = rational_design(pi.poles(), params);
    f.q = projector(f.b);
    f.r = vec(h - ph * f.q.conjugate());
    return f;
}

MatrixC analytic_jacobian(const PoleCoordinates& pi, const Frame& f, const VectorC& params,
                          bool kaufman)
{
    const VectorC poles = pi.poles();
    const Index mp = params.size();
    const Index rp = poles.size();
    const MatrixC bpinv = pinv(f.b);
    const MatrixC qperp = MatrixC::Identity(mp, mp) - f.q;

    auto column = [&](const MatrixC& bprime) {
        const MatrixC t = qperp * bprime * bpinv;
        const MatrixC dq = kaufman ? MatrixC(t.adjoint()) : MatrixC(t + t.adjoint());
        return vec(-(f.ph * dq.conjugate()));
    };
    auto dcol = [&](Index l) {
        VectorC d(mp);
        for (Index i = 0; i < mp; ++i)
        {
            const Complex u = params(i) - poles(l);
            d(i) = 1.0 / (u * u);
        }
        return d;
    };

    MatrixC j(f.r.size(), pi.num_coords());
    Index coord = 0;
    Index l = 0;
    for (std::size_t k = 0; k < pi.real_poles.size(); ++k, ++l)
    {
        MatrixC bp = MatrixC::Zero(mp, rp);
        bp.col(l) = dcol(l);
        j.col(coord++) = column(bp);
    }
    for (std::size_t k = 0; k < pi.pair_poles.size(); ++k, l += 2)
    {
        const VectorC d1 = dcol(l);
        const VectorC d2 = dcol(l + 1);
        MatrixC bx = MatrixC::Zero(mp, rp);
        bx.col(l) = d1;
        bx.col(l + 1) = d2;
        MatrixC by = MatrixC::Zero(mp, rp);
        by.col(l) = kI * d1;
        by.col(l + 1) = -kI * d2;
        j.col(coord++) = column(bx);
        j.col(coord++) = column(by);
    }
    return j;
}

MatrixC fd_jacobian(const PoleCoordinates& pi, const MatrixC& ph, const MatrixC& h,
                    const VectorC& params)
{
    const VectorR theta = pi.coords();
    const Index nr = static_cast<Index>(pi.real_poles.size());
    MatrixC j(h.size(), theta.size());
    for (Index c = 0; c < theta.size(); ++c)
    {
        const double step = 1e-6 * std::max(1.0, std::abs(theta(c)));
        VectorR tp = theta;
        VectorR tm = theta;
        tp(c) += step;
        tm(c) -= step;
        const VectorC rp = make_frame(PoleCoordinates::from_coords(tp, nr), ph, h, params).r;
        const VectorC rm = make_frame(PoleCoordinates::from_coords(tm, nr), ph, h, params).r;
        j.col(c) = (rp - rm) / (2.0 * step);
    }
    return j;
}

MatrixC realify(const MatrixC& m)
{
    MatrixC out(2 * m.rows(), m.cols());
    out.topRows(m.rows()) = m.real().cast<Complex>();
    out.bottomRows(m.rows()) = m.imag().cast<Complex>();
    return out;
}

} // namespace

VectorC varpro_residual(const PoleCoordinates& pi, const MatrixC& a, const MatrixC& h,
                        const VectorC& params, double lower, double upper, double guard)
{
    require_guard(pi, lower, upper, guard);
    if (h.rows() != a.rows() || h.cols() != params.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "varpro_residual: shape mismatch");
    }
    return make_frame(pi, projector(a) * h, h, params).r;
}

MatrixC varpro_jacobian(const PoleCoordinates& pi, const MatrixC& a, const MatrixC& h,
                        const VectorC& params, double lower, double upper, double guard,
                        JacobianMode mode)
{
    require_guard(pi, lower, upper, guard);
    if (h.rows() != a.rows() || h.cols() != params.size())
    {
        throw Error(ErrorCode::ShapeMismatch, "varpro_jacobian: shape mismatch");
    }
    const MatrixC ph = projector(a) * h;
    if (mode == JacobianMode::FiniteDifference)
    {
        return fd_jacobian(pi, ph, h, params);
    }
    const Frame f = make_frame(pi, ph, h, params);
    return analytic_jacobian(pi, f, params, mode == JacobianMode::Kaufman);
}

VarproResult fit_adaptive_basis(const FrequencyResponseDataset& data,
                                const std::vector<PoleResidueModel>& local_models,
                                double lower, double upper,
                                const PoleCoordinates& initial,
                                const VarproConfig& config)
{
    data.validate();
    if (initial.count() < 1)
    {
        throw Error(ErrorCode::InvalidArgument, "fit_adaptive_basis: r_p must be >= 1");
    }
    const double guard = guard_margin(config, lower, upper);
    require_guard(initial, lower, upper, guard);

    const MatrixC& h = data.samples;
    const VectorC& params = data.parameters;
    MatrixC a(h.rows(), static_cast<Index>(local_models.size()));
    for (std::size_t k = 0; k < local_models.size(); ++k)
    {
        for (Index i = 0; i < h.rows(); ++i)
        {
            a(i, static_cast<Index>(k)) = local_models[k](data.frequencies(i));
        }
    }
    const MatrixC ph = projector(a) * h;
    const double hnorm2 = h.squaredNorm();
    const Index nr = static_cast<Index>(initial.real_poles.size());

    PoleCoordinates pi = initial;
    Frame f = make_frame(pi, ph, h, params);
    double obj = f.r.squaredNorm();

    const double initial_obj = obj;

    int it = 0;
    bool converged = false;
    double gnorm = 0.0;
    std::string diagnostic;
    while (it < config.max_iters)
    {
        ++it;
        MatrixC j = config.jacobian == JacobianMode::FiniteDifference
                        ? fd_jacobian(pi, ph, h, params)
                        : analytic_jacobian(pi, f, params, config.jacobian == JacobianMode::Kaufman);
        const MatrixC jr = realify(j);
        const VectorC rr = realify(f.r);
        const VectorR g = (jr.adjoint() * rr).real();
        const VectorR theta = pi.coords();
        gnorm = projected_gradient(pi, g, nr, lower, upper, guard).norm();
        if (obj <= 1e-28 * hnorm2 || gnorm <= config.grad_tol * std::max(jr.norm() * std::sqrt(obj), 1e-300))
        {
            converged = true;
            break;
        }
        auto search = [&](const VectorR& dir) {
            double alpha = 1.0;
            for (int hv = 0; hv <= config.max_halvings; ++hv, alpha *= 0.5)
            {
                const PoleCoordinates trial = project_guard(
                    PoleCoordinates::from_coords(theta + alpha * dir, nr), lower, upper, guard);
                if (!guard_ok(trial, lower, upper, guard))
                {
                    continue;
                }
                const double descent = 2.0 * g.dot(trial.coords() - theta);
                Frame ft = make_frame(trial, ph, h, params);
                const double tobj = ft.r.squaredNorm();
                if (tobj <= obj + config.armijo * std::min(descent, 0.0) && tobj < obj)
                {
                    pi = trial;
                    f = std::move(ft);
                    obj = tobj;
                    return true;
                }
            }
            return false;
        };
        const VectorR delta = -lstsq_minnorm(jr, rr).solution.col(0).real();
        const double slope = 2.0 * g.dot(delta);
        bool accepted = slope < 0.0 && search(delta);
        const VectorR pg = projected_gradient(pi, g, nr, lower, upper, guard);
        if (!accepted && pg != g)
        {
            // Gauss-Newton on the coordinates that are free to move
            MatrixC jf = jr;
            for (Index k = 0; k < g.size(); ++k)
            {
                if (pg(k) != g(k))
                {
                    jf.col(k).setZero();
                }
            }
            const VectorR df = -lstsq_minnorm(jf, rr).solution.col(0).real();
            accepted = g.dot(df) < 0.0 && search(df);
        }
        if (!accepted && gnorm > 0.0)
        {
            // projected steepest descent, scaled like the Gauss-Newton step
            const double len = delta.norm() > 0.0 ? delta.norm() : theta.norm() + 1.0;
            accepted = search(-g * (len / g.norm()));
        }
        if (!accepted)
        {
            // no representable decrease left: stationary to working precision
            converged = -slope <= 1e-12 * obj || gnorm <= 1e-6 * std::max(jr.norm() * std::sqrt(obj), 1e-300);
            if (!converged)
            {
                diagnostic = "line search failed after " + std::to_string(config.max_halvings) + " halvings";
            }
            break;
        }
    }
    if (!converged && diagnostic.empty())
    {
        diagnostic = "Gauss-Newton did not converge within " + std::to_string(config.max_iters) + " iterations";
    }

    const ParametricBasis basis = ParametricBasis::rational(pi.poles(), lower, upper);
    DesignMatrices d{a, basis.design(params)};
    CoupledSolution sol = solve_coupled(d, h);
    bool locals_real = std::all_of(local_models.begin(), local_models.end(),
                                   [](const PoleResidueModel& m) { return m.real_flag(); });
    const bool real = config.enforce_real && locals_real && basis.conjugation_closed();
    if (real)
    {
        sol.x = project_real(sol.x, basis);
    }
    VarproResult out{ParametricModel(local_models, basis, sol.x, real), pi};
    out.initial_objective = initial_obj;
    out.iterations = it;
    out.converged = converged;
    out.final_objective = obj;
    out.gradient_norm = gnorm;
    out.diagnostic = diagnostic;
    return out;
}

} // namespace parafit
