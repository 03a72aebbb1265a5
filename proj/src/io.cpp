#include <parafit/io.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace parafit
{

using nlohmann::json;

std::string format_number(double x)
{
    if (!std::isfinite(x))
    {
        throw Error(ErrorCode::NonFinite, "cannot serialize a non-finite number");
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace
{

//------------------------------------------------------------------------------
// Writer
//------------------------------------------------------------------------------

class Writer
{
public:
    Writer() { out_ = "{\n"; }

    void key(const std::string& k)
    {
        if (!first_)
        {
            out_ += ",\n";
        }
        first_ = false;
        out_ += "  \"" + k + "\": ";
    }

    void raw(const std::string& k, const std::string& v)
    {
        key(k);
        out_ += v;
    }

    std::string finish()
    {
        out_ += "\n}\n";
        return out_;
    }

private:
    std::string out_;
    bool first_ = true;
};

std::string complex_str(Complex z)
{
    return "[" + format_number(z.real()) + ", " + format_number(z.imag()) + "]";
}

std::string complex_array(const VectorC& v)
{
    std::string s = "[";
    for (Index i = 0; i < v.size(); ++i)
    {
        s += (i ? ", " : "") + complex_str(v(i));
    }
    return s + "]";
}

std::string real_array(const VectorR& v)
{
    std::string s = "[";
    for (Index i = 0; i < v.size(); ++i)
    {
        s += (i ? ", " : "") + format_number(v(i));
    }
    return s + "]";
}

/// Real parts only; callers guarantee the imaginary parts vanish.
std::string real_parts(const VectorC& v)
{
    return real_array(v.real());
}

std::string complex_rows(const MatrixC& m)
{
    std::string s = "[";
    for (Index i = 0; i < m.rows(); ++i)
    {
        s += (i ? ",\n    " : "\n    ") + complex_array(m.row(i).transpose());
    }
    return s + (m.rows() ? "\n  ]" : "]");
}

std::string real_rows(const MatrixR& m)
{
    std::string s = "[";
    for (Index i = 0; i < m.rows(); ++i)
    {
        s += (i ? ",\n    " : "\n    ") + real_array(m.row(i).transpose());
    }
    return s + (m.rows() ? "\n  ]" : "]");
}

std::string bool_str(bool b)
{
    return b ? "true" : "false";
}

std::string basis_json(const ParametricBasis& b)
{
    std::string s = "{\"kind\": ";
    switch (b.kind())
    {
    case BasisKind::Monomial:
        s += "\"monomial\", \"degree\": " + std::to_string(b.degree());
        break;
    case BasisKind::Bernstein:
        s += "\"bernstein\", \"degree\": " + std::to_string(b.degree());
        break;
    case BasisKind::RationalPoles:
        s += "\"rational\", \"poles\": " + complex_array(b.poles());
        break;
    }
    s += ", \"interval\": [" + format_number(b.lower()) + ", " + format_number(b.upper()) + "]}";
    return s;
}

std::string local_models_json(const std::vector<PoleResidueModel>& locals)
{
    std::string s = "[";
    for (std::size_t k = 0; k < locals.size(); ++k)
    {
        s += (k ? ",\n    " : "\n    ");
        s += "{\"poles\": " + complex_array(locals[k].poles()) +
             ", \"residues\": " + complex_array(locals[k].residues()) + "}";
    }
    return s + (locals.empty() ? "]" : "\n  ]");
}

//------------------------------------------------------------------------------
// Reader
//------------------------------------------------------------------------------

[[noreturn]] void parse_fail(const std::string& what)
{
    throw Error(ErrorCode::Parse, what);
}

const json& field(const json& j, const char* name)
{
    if (!j.is_object() || !j.contains(name))
    {
        parse_fail(std::string("missing field '") + name + "'");
    }
    return j.at(name);
}

double number(const json& j)
{
    if (!j.is_number())
    {
        parse_fail("expected a number");
    }
    return j.get<double>();
}

Complex complex_value(const json& j)
{
    if (!j.is_array() || j.size() != 2)
    {
        parse_fail("expected a [re, im] pair");
    }
    return {number(j[0]), number(j[1])};
}

VectorC complex_vector(const json& j)
{
    if (!j.is_array())
    {
        parse_fail("expected an array of [re, im] pairs");
    }
    VectorC v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        v(static_cast<Index>(i)) = complex_value(j[i]);
    }
    return v;
}

VectorR real_vector(const json& j)
{
    if (!j.is_array())
    {
        parse_fail("expected an array of numbers");
    }
    VectorR v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        v(static_cast<Index>(i)) = number(j[i]);
    }
    return v;
}

MatrixC complex_matrix(const json& j, Index cols_hint = -1)
{
    if (!j.is_array())
    {
        parse_fail("expected an array of rows");
    }
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : std::max<Index>(cols_hint, 0);
    MatrixC m(rows, cols);
    for (Index i = 0; i < rows; ++i)
    {
        const VectorC r = complex_vector(j[static_cast<std::size_t>(i)]);
        if (r.size() != cols)
        {
            parse_fail("ragged matrix rows");
        }
        m.row(i) = r.transpose();
    }
    return m;
}

MatrixR real_matrix(const json& j)
{
    if (!j.is_array())
    {
        parse_fail("expected an array of rows");
    }
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
    MatrixR m(rows, cols);
    for (Index i = 0; i < rows; ++i)
    {
        const VectorR r = real_vector(j[static_cast<std::size_t>(i)]);
        if (r.size() != cols)
        {
            parse_fail("ragged matrix rows");
        }
        m.row(i) = r.transpose();
    }
    return m;
}

bool boolean(const json& j)
{
    if (!j.is_boolean())
    {
        parse_fail("expected a boolean");
    }
    return j.get<bool>();
}

std::string string_value(const json& j)
{
    if (!j.is_string())
    {
        parse_fail("expected a string");
    }
    return j.get<std::string>();
}

void check_version(const json& j)
{
    if (number(field(j, "version")) != 1.0)
    {
        parse_fail("unsupported version");
    }
}

ParametricBasis parse_basis(const json& j)
{
    const std::string kind = string_value(field(j, "kind"));
    const json& iv = field(j, "interval");
    if (!iv.is_array() || iv.size() != 2)
    {
        parse_fail("basis interval must be [a, b]");
    }
    const double a = number(iv[0]);
    const double b = number(iv[1]);
    if (kind == "monomial")
    {
        return ParametricBasis::monomial(static_cast<int>(number(field(j, "degree"))), a, b);
    }
    if (kind == "bernstein")
    {
        return ParametricBasis::bernstein(static_cast<int>(number(field(j, "degree"))), a, b);
    }
    if (kind == "rational")
    {
        return ParametricBasis::rational(complex_vector(field(j, "poles")), a, b);
    }
    parse_fail("unknown basis kind '" + kind + "'");
}

std::vector<PoleResidueModel> parse_locals(const json& j, bool real_flag)
{
    if (!j.is_array())
    {
        parse_fail("local_models must be an array");
    }
    std::vector<PoleResidueModel> out;
    for (const json& m : j)
    {
        // a local model is real when its poles and residues are conjugation-closed
        const VectorC poles = complex_vector(field(m, "poles"));
        const VectorC res = complex_vector(field(m, "residues"));
        bool closed = real_flag;
        if (closed)
        {
            for (Index k = 0; k < poles.size() && closed; ++k)
            {
                bool found = false;
                for (Index l = 0; l < poles.size() && !found; ++l)
                {
                    found = poles(l) == std::conj(poles(k)) && res(l) == std::conj(res(k));
                }
                closed = found;
            }
        }
        out.emplace_back(poles, res, closed);
    }
    return out;
}

json parse_json(const std::string& text)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::exception& e)
    {
        parse_fail(std::string("invalid JSON: ") + e.what());
    }
}

template <typename Fn>
auto rethrow_as_parse(Fn&& fn) -> decltype(fn())
{
    try
    {
        return fn();
    }
    catch (const Error& e)
    {
        if (e.code() == ErrorCode::Parse)
        {
            throw;
        }
        throw Error(ErrorCode::Parse, e.what());
    }
}

} // namespace

std::string dataset_to_json(const FrequencyResponseDataset& data)
{
    Writer w;
    w.raw("version", "1");
    w.raw("kind", "\"1p\"");
    w.raw("frequencies", complex_array(data.frequencies));
    w.raw("parameters", real_parts(data.parameters));
    w.raw("samples", complex_rows(data.samples));
    if (data.weights)
    {
        w.raw("weights", real_rows(*data.weights));
    }
    w.raw("real_symmetric", bool_str(data.real_symmetric));
    return w.finish();
}

std::string dataset_to_json(const FrequencyResponseDataset2& data)
{
    Writer w;
    w.raw("version", "1");
    w.raw("kind", "\"2p\"");
    w.raw("frequencies", complex_array(data.frequencies));
    w.raw("parameters",
          "{\"p\": " + real_parts(data.params_p) + ", \"q\": " + real_parts(data.params_q) + "}");
    w.raw("samples", complex_rows(data.samples));
    if (data.weights)
    {
        w.raw("weights", real_rows(*data.weights));
    }
    w.raw("real_symmetric", bool_str(data.real_symmetric));
    return w.finish();
}

DatasetFile parse_dataset(const std::string& text)
{
    return rethrow_as_parse([&]() {
        const json j = parse_json(text);
        check_version(j);
        DatasetFile f;
        f.kind = string_value(field(j, "kind"));
        const VectorC freqs = complex_vector(field(j, "frequencies"));
        const MatrixC samples = complex_matrix(field(j, "samples"));
        std::optional<MatrixR> weights;
        if (j.contains("weights"))
        {
            weights = real_matrix(j.at("weights"));
        }
        const bool rs = boolean(field(j, "real_symmetric"));
        if (f.kind == "1p")
        {
            FrequencyResponseDataset d;
            d.frequencies = freqs;
            d.parameters = real_vector(field(j, "parameters")).cast<Complex>();
            d.samples = samples;
            d.weights = weights;
            d.real_symmetric = rs;
            if (d.samples.rows() == 0)
            {
                d.samples.resize(0, d.parameters.size());
            }
            d.validate();
            f.one = d;
        }
        else if (f.kind == "2p")
        {
            const json& pj = field(j, "parameters");
            FrequencyResponseDataset2 d;
            d.frequencies = freqs;
            d.params_p = real_vector(field(pj, "p")).cast<Complex>();
            d.params_q = real_vector(field(pj, "q")).cast<Complex>();
            d.samples = samples;
            d.weights = weights;
            d.real_symmetric = rs;
            d.validate();
            f.two = d;
        }
        else
        {
            parse_fail("dataset kind must be \"1p\" or \"2p\"");
        }
        return f;
    });
}

std::string model_to_json(const ParametricModel& model)
{
    Writer w;
    w.raw("version", "1");
    w.raw("kind", "\"parametric\"");
    w.raw("local_models", local_models_json(model.local_models()));
    w.raw("basis", basis_json(model.basis()));
    w.raw("coefficients", complex_rows(model.coefficients()));
    w.raw("real_flag", bool_str(model.real_flag()));
    return w.finish();
}

std::string model_to_json(const CompressedParametricModel& model)
{
    Writer w;
    w.raw("version", "1");
    w.raw("kind", "\"compressed\"");
    w.raw("basis", basis_json(model.basis));
    w.raw("gram_chol", complex_rows(model.gram_chol));
    w.raw("a_red", complex_rows(model.a_red));
    w.raw("b_red", complex_array(model.b_red));
    w.raw("c_red_unweighted", complex_rows(model.c_red_unweighted));
    w.raw("real_flag", bool_str(model.real_flag));
    return w.finish();
}

std::string model_to_json(const ParametricModel2& model)
{
    Writer w;
    w.raw("version", "1");
    w.raw("kind", "\"parametric2\"");
    w.raw("local_models", local_models_json(model.local_models()));
    w.raw("basis_p", basis_json(model.basis_p()));
    w.raw("basis_q", basis_json(model.basis_q()));
    w.raw("coefficients", complex_rows(model.coefficients()));
    w.raw("real_flag", bool_str(model.real_flag()));
    return w.finish();
}

ModelFile parse_model(const std::string& text)
{
    return rethrow_as_parse([&]() {
        const json j = parse_json(text);
        check_version(j);
        ModelFile f;
        f.kind = string_value(field(j, "kind"));
        const bool real = boolean(field(j, "real_flag"));
        if (f.kind == "parametric")
        {
            auto locals = parse_locals(field(j, "local_models"), real);
            ParametricBasis basis = parse_basis(field(j, "basis"));
            MatrixC x = complex_matrix(field(j, "coefficients"), basis.size());
            f.parametric.emplace(std::move(locals), std::move(basis), std::move(x), real);
        }
        else if (f.kind == "parametric2")
        {
            auto locals = parse_locals(field(j, "local_models"), real);
            ParametricBasis bp = parse_basis(field(j, "basis_p"));
            ParametricBasis bq = parse_basis(field(j, "basis_q"));
            MatrixC x = complex_matrix(field(j, "coefficients"), bp.size() * bq.size());
            f.parametric2.emplace(std::move(locals), std::move(bp), std::move(bq), std::move(x), real);
        }
        else if (f.kind == "compressed")
        {
            CompressedParametricModel m{parse_basis(field(j, "basis")),
                                        complex_matrix(field(j, "gram_chol")),
                                        complex_matrix(field(j, "a_red")),
                                        complex_vector(field(j, "b_red")),
                                        complex_matrix(field(j, "c_red_unweighted")),
                                        real};
            m.validate();
            f.compressed = m;
        }
        else
        {
            parse_fail("unknown model kind '" + f.kind + "'");
        }
        return f;
    });
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
    }
    out << text;
    if (!out)
    {
        throw Error(ErrorCode::InvalidArgument, "write to '" + path + "' failed");
    }
}

} // namespace parafit
