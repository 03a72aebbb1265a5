#include <parafit/cli.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include <parafit/bench_models.hpp>
#include <parafit/compress.hpp>
#include <parafit/coupled_fit.hpp>
#include <parafit/io.hpp>
#include <parafit/multiparam.hpp>
#include <parafit/quadrature.hpp>
#include <parafit/varpro.hpp>

namespace parafit
{

namespace
{

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::Parse:
    case ErrorCode::BasisMismatch:
    case ErrorCode::OutOfRange:
    case ErrorCode::GuardViolation:
    case ErrorCode::ProblemTooLarge:
        return kExitUsage;
    default:
        return kExitNumerical;
    }
}

struct Defaults
{
    double fmin;
    double fmax;
    int fcount;
    double pmin;
    double pmax;
    int pcount;
};

Defaults model_defaults(const std::string& model)
{
    if (model == "penzl")
    {
        return {1e-1, 1e5, 100, 1.0, 5.0, 8};
    }
    if (model == "chain")
    {
        return {1e-3, 1e3, 80, 0.01, 0.8, 10};
    }
    if (model == "convdiff")
    {
        return {1e2, 1e6, 100, 0.0, 1.0, 6};
    }
    throw UsageError("unknown model '" + model + "' (expected penzl, chain or convdiff)");
}

VectorC imaginary_grid(double lo, double hi, int count, const std::string& spacing)
{
    if (count < 1 || !(lo > 0.0) || !(hi >= lo))
    {
        throw UsageError("frequency grid needs 0 < min <= max and count >= 1");
    }
    VectorR w;
    if (spacing == "log")
    {
        w = logspace(lo, hi, count);
    }
    else if (spacing == "lin")
    {
        w = linspace(lo, hi, count);
    }
    else
    {
        throw UsageError("spacing must be log or lin");
    }
    return (w.cast<Complex>() * kI).eval();
}

VectorC real_grid(double lo, double hi, int count, const std::string& spacing)
{
    if (count < 1 || !(hi >= lo))
    {
        throw UsageError("parameter grid needs min <= max and count >= 1");
    }
    if (spacing == "log")
    {
        if (!(lo > 0.0))
        {
            throw UsageError("log parameter spacing needs a positive minimum");
        }
        return logspace(lo, hi, count).cast<Complex>();
    }
    if (spacing == "lin")
    {
        return linspace(lo, hi, count).cast<Complex>();
    }
    throw UsageError("spacing must be log or lin");
}

std::string csv_number(double x)
{
    return std::isfinite(x) ? format_number(x) : std::string("nan");
}

//------------------------------------------------------------------------------
// generate
//------------------------------------------------------------------------------

struct GenerateOpts
{
    std::string model;
    double fmin = 0, fmax = 0;
    int fcount = 0;
    std::string fspacing = "log";
    double pmin = 0, pmax = 0;
    int pcount = 0;
    std::string pspacing = "lin";
    double qmin = 0, qmax = 0;
    int qcount = 0;
    int size = 0;
    std::string out;
    CLI::App* app = nullptr;
};

int cmd_generate(const GenerateOpts& o, std::ostream& out)
{
    const Defaults d = model_defaults(o.model);
    auto given = [&](const char* name) { return o.app->count(name) > 0; };
    const double fmin = given("--freq-min") ? o.fmin : d.fmin;
    const double fmax = given("--freq-max") ? o.fmax : d.fmax;
    const int fcount = given("--freq-count") ? o.fcount : d.fcount;
    const double pmin = given("--param-min") ? o.pmin : d.pmin;
    const double pmax = given("--param-max") ? o.pmax : d.pmax;
    const int pcount = given("--param-count") ? o.pcount : d.pcount;
    const VectorC freqs = imaginary_grid(fmin, fmax, fcount, o.fspacing);
    const VectorC params = real_grid(pmin, pmax, pcount, o.pspacing);

    std::string text;
    if (o.model == "convdiff")
    {
        const double qmin = given("--param2-min") ? o.qmin : d.pmin;
        const double qmax = given("--param2-max") ? o.qmax : d.pmax;
        const int qcount = given("--param2-count") ? o.qcount : d.pcount;
        const VectorC qs = real_grid(qmin, qmax, qcount, o.pspacing);
        const ConvDiffSystem sys(ConvDiffSpec{given("--size") ? o.size : 20});
        const auto data = sample_model(
            Evaluator2([&](Complex s, Complex p, Complex q) { return sys(s, p, q); }), freqs, params, qs);
        text = dataset_to_json(data);
        out << "generated convdiff dataset " << data.samples.rows() << "x" << data.samples.cols() << "\n";
    }
    else
    {
        if (given("--param2-min") || given("--param2-max") || given("--param2-count"))
        {
            throw UsageError("--param2-* flags apply to the two-parameter convdiff model only");
        }
        Evaluator1 eval;
        bool real_system = true;
        if (o.model == "penzl")
        {
            real_system = penzl_is_real(PenzlSpec{});
            eval = [spec = PenzlSpec{}](Complex s, Complex p) { return penzl_eval(spec, s, p); };
        }
        else
        {
            eval = [spec = ChainSpec{given("--size") ? o.size : 200}](Complex s, Complex p) {
                return chain_eval(spec, s, p);
            };
        }
        const auto data = sample_model(eval, freqs, params, real_system);
        text = dataset_to_json(data);
        out << "generated " << o.model << " dataset " << data.samples.rows() << "x" << data.samples.cols()
            << "\n";
    }
    write_text_file(o.out, text);
    return kExitOk;
}

//------------------------------------------------------------------------------
// fit
//------------------------------------------------------------------------------

struct BasisSpec
{
    std::string kind;
    int n = 0;
};

BasisSpec parse_basis_spec(const std::string& s)
{
    const auto colon = s.find(':');
    if (colon == std::string::npos)
    {
        throw UsageError("basis must look like monomial:d, bernstein:d or rational:r");
    }
    BasisSpec b;
    b.kind = s.substr(0, colon);
    try
    {
        std::size_t used = 0;
        b.n = std::stoi(s.substr(colon + 1), &used);
        if (used != s.size() - colon - 1)
        {
            throw std::invalid_argument("trailing characters");
        }
    }
    catch (const std::exception&)
    {
        throw UsageError("basis size in '" + s + "' is not an integer");
    }
    if (b.kind != "monomial" && b.kind != "bernstein" && b.kind != "rational")
    {
        throw UsageError("unknown basis kind '" + b.kind + "'");
    }
    if ((b.kind == "rational" && b.n < 1) || b.n < 0)
    {
        throw UsageError("basis size out of range in '" + s + "'");
    }
    return b;
}

ParametricBasis make_basis(const BasisSpec& b, double lo, double hi, int pairs)
{
    if (!(lo < hi))
    {
        throw UsageError("parameter samples must span a non-empty interval");
    }
    if (b.kind == "monomial")
    {
        return ParametricBasis::monomial(b.n, lo, hi);
    }
    if (b.kind == "bernstein")
    {
        return ParametricBasis::bernstein(b.n, lo, hi);
    }
    return ParametricBasis::rational(default_initial_poles(b.n, lo, hi, pairs).poles(), lo, hi);
}

struct FitOpts
{
    std::string data;
    int order = 0;
    std::string basis;
    std::string basis_q;
    bool adaptive = false;
    bool real = false;
    int max_iters = 0;
    int pairs = 0;
    double guard = -1.0;
    std::string out;
    CLI::App* app = nullptr;
};

std::string rms_list(const VectorR& v)
{
    std::string s = "[";
    for (Index i = 0; i < v.size(); ++i)
    {
        s += (i ? "," : "") + format_number(v(i));
    }
    return s + "]";
}

int cmd_fit(const FitOpts& o, std::ostream& out, std::ostream& err)
{
    const DatasetFile file = parse_dataset(read_text_file(o.data));
    const BasisSpec bs = parse_basis_spec(o.basis);
    if (o.adaptive && bs.kind != "rational")
    {
        throw UsageError("--adaptive requires a rational basis");
    }
    if (o.order < 1)
    {
        throw UsageError("--local-order must be >= 1");
    }
    if (o.pairs < 0 || 2 * o.pairs > bs.n)
    {
        throw UsageError("--rational-pairs must satisfy 0 <= 2*pairs <= r");
    }
    const bool max_given = o.app->count("--max-iters") > 0;
    if (max_given && o.max_iters < 1)
    {
        throw UsageError("--max-iters must be >= 1");
    }
    VFConfig vf;
    vf.order = o.order;
    if (max_given)
    {
        vf.max_iters = o.max_iters;
    }

    if (file.two)
    {
        if (o.adaptive)
        {
            throw UsageError("--adaptive is available for one-parameter data only");
        }
        const FrequencyResponseDataset2& d = *file.two;
        const BasisSpec bq = o.basis_q.empty() ? bs : parse_basis_spec(o.basis_q);
        TwoParamConfig cfg;
        cfg.vf = vf;
        cfg.basis_p = make_basis(bs, d.params_p.real().minCoeff(), d.params_p.real().maxCoeff(), o.pairs);
        cfg.basis_q = make_basis(bq, d.params_q.real().minCoeff(), d.params_q.real().maxCoeff(), o.pairs);
        cfg.enforce_real = o.real;
        const TwoParamResult res = fit_two_param(d, cfg);
        write_text_file(o.out, model_to_json(res.model));
        out << "residual=" << format_number(res.residual)
            << " relative_residual=" << format_number(res.relative_residual) << "\n";
        if (!res.all_converged)
        {
            err << "warning: some local VF fits did not converge\n";
            return kExitNotConverged;
        }
        return kExitOk;
    }

    const FrequencyResponseDataset& d = *file.one;
    const double lo = d.parameters.real().minCoeff();
    const double hi = d.parameters.real().maxCoeff();
    bool converged = true;
    Phase1Result res = [&]() {
        if (!o.adaptive)
        {
            Phase1Config cfg;
            cfg.vf = vf;
            cfg.basis = make_basis(bs, lo, hi, o.pairs);
            cfg.enforce_real = o.real;
            return fit_fixed_basis(d, cfg);
        }
        d.validate();
        auto fits = fit_local_models(d, {}, vf, o.real);
        std::vector<PoleResidueModel> locals;
        for (const VFResult& f : fits)
        {
            locals.push_back(f.model);
        }
        VarproConfig vc;
        vc.enforce_real = o.real;
        vc.guard = o.guard;
        if (max_given)
        {
            vc.max_iters = o.max_iters;
        }
        const VarproResult vr =
            fit_adaptive_basis(d, locals, lo, hi, default_initial_poles(bs.n, lo, hi, o.pairs), vc);
        if (!vr.converged)
        {
            converged = false;
            err << "warning: " << vr.diagnostic << "\n";
        }
        return couple_local_models(d, std::move(fits), vr.model.basis(), d.weights, o.real);
    }();
    converged = converged && res.all_converged;
    write_text_file(o.out, model_to_json(res.model));
    out << "residual=" << format_number(res.residual)
        << " relative_residual=" << format_number(res.relative_residual)
        << " rms=" << rms_list(res.rms_per_parameter) << "\n";
    if (!res.all_converged)
    {
        err << "warning: some local VF fits did not converge\n";
    }
    return converged ? kExitOk : kExitNotConverged;
}

//------------------------------------------------------------------------------
// compress
//------------------------------------------------------------------------------

struct CompressOpts
{
    std::string model;
    int order = 0;
    int max_iters = 100;
    std::string out;
};

int cmd_compress(const CompressOpts& o, std::ostream& out, std::ostream& err)
{
    const ModelFile mf = parse_model(read_text_file(o.model));
    if (!mf.parametric)
    {
        throw UsageError("compress expects a one-parameter \"parametric\" model file");
    }
    if (o.order < 1 || o.order > mf.parametric->state_order())
    {
        throw UsageError("--order must lie in [1, " + std::to_string(mf.parametric->state_order()) + "]");
    }
    IRKAConfig cfg;
    cfg.n_red = o.order;
    cfg.max_iters = o.max_iters;
    const CompressResult res = compress(*mf.parametric, cfg);
    write_text_file(o.out, model_to_json(res.model));
    const double rel = res.reference_norm > 0.0 ? res.error / res.reference_norm : res.error;
    out << "h2l2_error=" << format_number(res.error) << " relative_error=" << format_number(rel)
        << " irka_iterations=" << res.irka.iterations << "\n";
    if (!res.irka.converged)
    {
        err << "warning: " << res.irka.diagnostic << "\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

//------------------------------------------------------------------------------
// eval / bode
//------------------------------------------------------------------------------

struct LoadedModel
{
    std::function<Complex(Complex, Complex, Complex)> eval;
    bool two_param = false;
    double lower = 0.0;
    double upper = 1.0;
};

LoadedModel load_model(const std::string& path)
{
    ModelFile mf = parse_model(read_text_file(path));
    LoadedModel lm;
    if (mf.parametric)
    {
        auto m = std::make_shared<ParametricModel>(std::move(*mf.parametric));
        lm.lower = m->basis().lower();
        lm.upper = m->basis().upper();
        lm.eval = [m](Complex s, Complex p, Complex) { return (*m)(s, p); };
    }
    else if (mf.compressed)
    {
        auto m = std::make_shared<CompressedParametricModel>(std::move(*mf.compressed));
        lm.lower = m->basis.lower();
        lm.upper = m->basis.upper();
        lm.eval = [m](Complex s, Complex p, Complex) { return (*m)(s, p); };
    }
    else
    {
        auto m = std::make_shared<ParametricModel2>(std::move(*mf.parametric2));
        lm.two_param = true;
        lm.lower = m->basis_p().lower();
        lm.upper = m->basis_p().upper();
        lm.eval = [m](Complex s, Complex p, Complex q) { return (*m)(s, p, q); };
    }
    return lm;
}

std::function<Complex(Complex, Complex, Complex)> truth_model(const std::string& name, int size,
                                                              bool size_given)
{
    if (name == "penzl")
    {
        return [spec = PenzlSpec{}](Complex s, Complex p, Complex) { return penzl_eval(spec, s, p); };
    }
    if (name == "chain")
    {
        return [spec = ChainSpec{size_given ? size : 200}](Complex s, Complex p, Complex) {
            return chain_eval(spec, s, p);
        };
    }
    if (name == "convdiff")
    {
        auto sys = std::make_shared<ConvDiffSystem>(ConvDiffSpec{size_given ? size : 20});
        return [sys](Complex s, Complex p, Complex q) { return (*sys)(s, p, q); };
    }
    throw UsageError("unknown truth model '" + name + "'");
}

struct ErrorRow
{
    double rms;
    double h2;
    double hinf;
};

/// Relative errors of `fit` against `ref` sampled on the positive grid `omega`.
ErrorRow column_errors(const VectorC& fit, const VectorC& ref, const VectorR& omega)
{
    ErrorRow r{};
    const VectorC e = fit - ref;
    const double rn = ref.norm();
    r.rms = rn > 0.0 ? e.norm() / rn : e.norm();
    auto band = [&](const VectorC& v) {
        double acc = 0.0;
        for (Index k = 1; k < omega.size(); ++k)
        {
            const double du = std::log(omega(k)) - std::log(omega(k - 1));
            acc += 0.5 * du * (std::norm(v(k)) * omega(k) + std::norm(v(k - 1)) * omega(k - 1));
        }
        return std::sqrt(acc);
    };
    const double bref = band(ref);
    r.h2 = bref > 0.0 ? band(e) / bref : band(e);
    const double mref = ref.cwiseAbs().maxCoeff();
    r.hinf = mref > 0.0 ? e.cwiseAbs().maxCoeff() / mref : e.cwiseAbs().maxCoeff();
    return r;
}

struct EvalOpts
{
    std::string model;
    std::string data;
    std::string truth;
    int param_grid = 50;
    std::string metrics = "rms,h2,hinf";
    double param2 = 0.0;
    double fmin = 0, fmax = 0;
    int fcount = 200;
    int size = 0;
    std::string out;
    CLI::App* app = nullptr;
};

int cmd_eval(const EvalOpts& o, std::ostream& out)
{
    bool want_rms = false, want_h2 = false, want_hinf = false;
    {
        std::stringstream ss(o.metrics);
        std::string m;
        while (std::getline(ss, m, ','))
        {
            if (m == "rms")
                want_rms = true;
            else if (m == "h2")
                want_h2 = true;
            else if (m == "hinf")
                want_hinf = true;
            else
                throw UsageError("unknown metric '" + m + "'");
        }
    }
    if (o.data.empty() == o.truth.empty())
    {
        throw UsageError("eval needs exactly one of --data or --truth");
    }
    const LoadedModel lm = load_model(o.model);
    auto given = [&](const char* name) { return o.app->count(name) > 0; };

    std::vector<double> params;
    std::vector<ErrorRow> rows;
    if (!o.data.empty())
    {
        const DatasetFile df = parse_dataset(read_text_file(o.data));
        VectorC freqs;
        VectorC ps;
        MatrixC samples;
        Complex q{0.0, 0.0};
        if (df.one)
        {
            freqs = df.one->frequencies;
            ps = df.one->parameters;
            samples = df.one->samples;
        }
        else
        {
            const auto& d2 = *df.two;
            if (!given("--param2"))
            {
                throw UsageError("two-parameter data needs --param2 to select the q column");
            }
            Index jq = 0;
            for (Index j = 1; j < d2.params_q.size(); ++j)
            {
                if (std::abs(d2.params_q(j) - o.param2) < std::abs(d2.params_q(jq) - o.param2))
                {
                    jq = j;
                }
            }
            q = d2.params_q(jq);
            freqs = d2.frequencies;
            ps = d2.params_p;
            samples.resize(freqs.size(), ps.size());
            for (Index j = 0; j < ps.size(); ++j)
            {
                samples.col(j) = d2.samples.col(j * d2.params_q.size() + jq);
            }
        }
        if (lm.two_param != static_cast<bool>(df.two))
        {
            throw UsageError("model and dataset disagree on the number of parameters");
        }
        const VectorR omega = freqs.imag();
        for (Index j = 0; j < ps.size(); ++j)
        {
            VectorC fit(freqs.size());
            for (Index i = 0; i < freqs.size(); ++i)
            {
                fit(i) = lm.eval(freqs(i), ps(j), q);
            }
            params.push_back(ps(j).real());
            rows.push_back(column_errors(fit, samples.col(j), omega));
        }
    }
    else
    {
        const auto truth = truth_model(o.truth, o.size, given("--size"));
        const Defaults d = model_defaults(o.truth);
        const double fmin = given("--freq-min") ? o.fmin : d.fmin;
        const double fmax = given("--freq-max") ? o.fmax : d.fmax;
        if (o.param_grid < 1 || o.fcount < 2)
        {
            throw UsageError("--param-grid must be >= 1 and --freq-count >= 2");
        }
        const VectorR omega = logspace(fmin, fmax, o.fcount);
        const VectorR ps = linspace(lm.lower, lm.upper, o.param_grid);
        const Complex q{o.param2, 0.0};
        for (Index j = 0; j < ps.size(); ++j)
        {
            const Complex p{ps(j), 0.0};
            VectorC fit(omega.size());
            VectorC ref(omega.size());
            for (Index i = 0; i < omega.size(); ++i)
            {
                fit(i) = lm.eval(Complex{0.0, omega(i)}, p, q);
                ref(i) = truth(Complex{0.0, omega(i)}, p, q);
            }
            ErrorRow r = column_errors(fit, ref, omega);
            if (want_hinf)
            {
                const double mref = ref.cwiseAbs().maxCoeff();
                const double h = hinf_error_at_param([&](Complex s) { return lm.eval(s, p, q); },
                                                     [&](Complex s) { return truth(s, p, q); }, omega);
                r.hinf = mref > 0.0 ? h / mref : h;
            }
            params.push_back(ps(j));
            rows.push_back(r);
        }
    }

    std::string csv = "param,rms,h2_rel,hinf_rel\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        csv += format_number(params[k]) + "," + csv_number(want_rms ? rows[k].rms : nan) + "," +
               csv_number(want_h2 ? rows[k].h2 : nan) + "," + csv_number(want_hinf ? rows[k].hinf : nan) +
               "\n";
    }
    write_text_file(o.out, csv);
    out << "wrote " << rows.size() << " rows to " << o.out << "\n";
    return kExitOk;
}

struct BodeOpts
{
    std::string model;
    double param = 0.0;
    double param2 = 0.0;
    double fmin = 1e-3, fmax = 1e3;
    int fcount = 200;
    std::string truth;
    int size = 0;
    std::string out;
    CLI::App* app = nullptr;
};

int cmd_bode(const BodeOpts& o, std::ostream& out)
{
    const LoadedModel lm = load_model(o.model);
    if (o.fcount < 1 || !(o.fmin > 0.0) || !(o.fmax >= o.fmin))
    {
        throw UsageError("bode needs 0 < freq-min <= freq-max and freq-count >= 1");
    }
    const VectorR omega = logspace(o.fmin, o.fmax, o.fcount);
    const Complex p{o.param, 0.0};
    const Complex q{o.param2, 0.0};
    std::function<Complex(Complex, Complex, Complex)> truth;
    if (!o.truth.empty())
    {
        truth = truth_model(o.truth, o.size, o.app->count("--size") > 0);
    }
    std::string csv = truth ? "omega,abs_true,abs_fit,abs_err\n" : "omega,abs_fit\n";
    for (Index i = 0; i < omega.size(); ++i)
    {
        const Complex s{0.0, omega(i)};
        const Complex fit = lm.eval(s, p, q);
        if (truth)
        {
            const Complex ref = truth(s, p, q);
            csv += format_number(omega(i)) + "," + format_number(std::abs(ref)) + "," +
                   format_number(std::abs(fit)) + "," + format_number(std::abs(fit - ref)) + "\n";
        }
        else
        {
            csv += format_number(omega(i)) + "," + format_number(std::abs(fit)) + "\n";
        }
    }
    write_text_file(o.out, csv);
    out << "wrote " << omega.size() << " rows to " << o.out << "\n";
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"parafit: parametric rational fitting of frequency-response data"};
    app.require_subcommand(1);

    GenerateOpts g;
    auto* gen = app.add_subcommand("generate", "sample a benchmark model into a dataset file");
    g.app = gen;
    gen->add_option("--model", g.model, "penzl | chain | convdiff")->required();
    gen->add_option("--freq-min", g.fmin);
    gen->add_option("--freq-max", g.fmax);
    gen->add_option("--freq-count", g.fcount);
    gen->add_option("--freq-spacing", g.fspacing, "log | lin");
    gen->add_option("--param-min", g.pmin);
    gen->add_option("--param-max", g.pmax);
    gen->add_option("--param-count", g.pcount);
    gen->add_option("--param-spacing", g.pspacing, "lin | log");
    gen->add_option("--param2-min", g.qmin);
    gen->add_option("--param2-max", g.qmax);
    gen->add_option("--param2-count", g.qcount);
    gen->add_option("--size", g.size, "chain states or convdiff grid size");
    gen->add_option("--out", g.out)->required();

    FitOpts f;
    auto* fit = app.add_subcommand("fit", "fit a parametric model to a dataset");
    f.app = fit;
    fit->add_option("--data", f.data)->required();
    fit->add_option("--local-order", f.order)->required();
    fit->add_option("--basis", f.basis, "monomial:d | bernstein:d | rational:r")->required();
    fit->add_option("--basis-q", f.basis_q, "second-parameter basis (two-parameter data)");
    fit->add_flag("--adaptive", f.adaptive);
    fit->add_flag("--real", f.real);
    fit->add_option("--max-iters", f.max_iters);
    fit->add_option("--rational-pairs", f.pairs, "complex-conjugate pairs in the initial rational poles");
    fit->add_option("--guard", f.guard, "varpro guard margin (default 0.05*(b-a))");
    fit->add_option("--out", f.out)->required();

    CompressOpts c;
    auto* cmp = app.add_subcommand("compress", "compress a parametric model");
    cmp->add_option("--model", c.model)->required();
    cmp->add_option("--order", c.order)->required();
    cmp->add_option("--max-iters", c.max_iters);
    cmp->add_option("--out", c.out)->required();

    EvalOpts e;
    auto* ev = app.add_subcommand("eval", "per-parameter error report");
    e.app = ev;
    ev->add_option("--model", e.model)->required();
    ev->add_option("--data", e.data);
    ev->add_option("--truth", e.truth, "penzl | chain | convdiff");
    ev->add_option("--param-grid", e.param_grid);
    ev->add_option("--metrics", e.metrics);
    ev->add_option("--param2", e.param2);
    ev->add_option("--freq-min", e.fmin);
    ev->add_option("--freq-max", e.fmax);
    ev->add_option("--freq-count", e.fcount);
    ev->add_option("--size", e.size);
    ev->add_option("--out", e.out)->required();

    BodeOpts b;
    auto* bode = app.add_subcommand("bode", "magnitude response at one parameter");
    b.app = bode;
    bode->add_option("--model", b.model)->required();
    bode->add_option("--param", b.param)->required();
    bode->add_option("--param2", b.param2);
    bode->add_option("--freq-min", b.fmin);
    bode->add_option("--freq-max", b.fmax);
    bode->add_option("--freq-count", b.fcount);
    bode->add_option("--truth", b.truth);
    bode->add_option("--size", b.size);
    bode->add_option("--out", b.out)->required();

    try
    {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return kExitOk;
    }
    catch (const CLI::ParseError& ex)
    {
        err << "error: " << ex.what() << "\n";
        return kExitUsage;
    }

    try
    {
        if (gen->parsed())
            return cmd_generate(g, out);
        if (fit->parsed())
            return cmd_fit(f, out, err);
        if (cmp->parsed())
            return cmd_compress(c, out, err);
        if (ev->parsed())
            return cmd_eval(e, out);
        if (bode->parsed())
            return cmd_bode(b, out);
    }
    catch (const UsageError& ex)
    {
        err << "error: " << ex.what() << "\n";
        return kExitUsage;
    }
    catch (const Error& ex)
    {
        err << "error: " << ex.what() << "\n";
        return exit_code_for(ex.code());
    }
    catch (const std::exception& ex)
    {
        err << "error: " << ex.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}

} // namespace parafit
