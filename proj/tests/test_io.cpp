#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <parafit/cli.hpp>
#include <parafit/compress.hpp>
#include <parafit/io.hpp>
#include <parafit/multiparam.hpp>
#include <parafit/quadrature.hpp>

using namespace parafit;
namespace fs = std::filesystem;

namespace
{

Complex uniform_c(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return {u(rng), u(rng)};
}

std::vector<PoleResidueModel> real_locals(std::mt19937_64& rng, int n)
{
    std::vector<PoleResidueModel> out;
    for (int k = 0; k < n; ++k)
    {
        VectorC l(2);
        const Complex lam{-0.5 - k, 1.0 + 2.0 * k};
        l << lam, std::conj(lam);
        const Complex r = uniform_c(rng);
        VectorC res(2);
        res << r, std::conj(r);
        out.emplace_back(l, res);
    }
    return out;
}

MatrixC real_coeffs(std::mt19937_64& rng, Index r, Index c)
{
    MatrixC x(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j)
            x(i, j) = uniform_c(rng).real();
    return x;
}

struct TempDir
{
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / ("parafit_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(const std::vector<std::string>& args, std::string* out_text = nullptr)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    if (out_text)
        *out_text = out.str();
    return code;
}

std::vector<std::vector<double>> read_csv(const std::string& path, std::string& header)
{
    std::ifstream in(path);
    std::getline(in, header);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line))
    {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

TEST_CASE("format_number")
{
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1.0) == "1");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", -2.5e-300);
    CHECK(format_number(-2.5e-300) == buf);
    CHECK(std::stod(format_number(M_PI)) == M_PI);
    CHECK_THROWS_AS(format_number(std::numeric_limits<double>::quiet_NaN()), Error);
    CHECK_THROWS_AS(format_number(std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("dataset round trips")
{
    std::mt19937_64 rng(81);
    FrequencyResponseDataset d;
    d.frequencies = (logspace(0.1, 10.0, 4).cast<Complex>() * kI).eval();
    d.parameters = linspace(0.0, 1.0, 3).cast<Complex>();
    d.samples.resize(4, 3);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 3; ++j)
            d.samples(i, j) = uniform_c(rng);
    d.weights = MatrixR::Constant(4, 3, 0.5);
    d.real_symmetric = true;

    const std::string text = dataset_to_json(d);
    const DatasetFile f = parse_dataset(text);
    REQUIRE(f.one);
    CHECK(f.kind == "1p");
    CHECK(f.one->samples == d.samples);
    CHECK(f.one->frequencies == d.frequencies);
    CHECK(f.one->real_symmetric);
    CHECK(dataset_to_json(*f.one) == text);

    FrequencyResponseDataset2 d2;
    d2.frequencies = d.frequencies;
    d2.params_p = linspace(0.0, 1.0, 2).cast<Complex>();
    d2.params_q = linspace(-1.0, 1.0, 3).cast<Complex>();
    d2.samples.resize(4, 6);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 6; ++j)
            d2.samples(i, j) = uniform_c(rng);
    const std::string text2 = dataset_to_json(d2);
    const DatasetFile f2 = parse_dataset(text2);
    REQUIRE(f2.two);
    CHECK(f2.kind == "2p");
    CHECK(f2.two->samples == d2.samples);
    CHECK(dataset_to_json(*f2.two) == text2);
}

TEST_CASE("model round trips")
{
    std::mt19937_64 rng(82);
    const ParametricModel m(real_locals(rng, 2), ParametricBasis::bernstein(1, 0.0, 1.0), real_coeffs(rng, 2, 2), true);
    const std::string text = model_to_json(m);
    const ModelFile f = parse_model(text);
    REQUIRE(f.parametric);
    CHECK(f.kind == "parametric");
    CHECK(model_to_json(*f.parametric) == text);
    const Complex s{0.1, 1.2};
    CHECK((*f.parametric)(s, 0.3) == m(s, 0.3));

    VectorC pi(3);
    pi << 3.0, Complex{2.0, 1.0}, Complex{2.0, -1.0};
    const ParametricModel mr(real_locals(rng, 2), ParametricBasis::rational(pi, 0.0, 1.0), MatrixC::Ones(2, 3));
    const std::string tr = model_to_json(mr);
    CHECK(model_to_json(*parse_model(tr).parametric) == tr);

    IRKAConfig cfg;
    cfg.n_red = 2;
    const CompressedParametricModel cm = compress(m, cfg).model;
    const std::string tc = model_to_json(cm);
    const ModelFile fc = parse_model(tc);
    REQUIRE(fc.compressed);
    CHECK(model_to_json(*fc.compressed) == tc);
    CHECK((*fc.compressed)(s, 0.3) == cm(s, 0.3));

    const ParametricModel2 m2(real_locals(rng, 2), ParametricBasis::monomial(1, 0.0, 1.0),
                              ParametricBasis::bernstein(1, 0.0, 2.0), real_coeffs(rng, 2, 4), true);
    const std::string t2 = model_to_json(m2);
    const ModelFile f2 = parse_model(t2);
    REQUIRE(f2.parametric2);
    CHECK(model_to_json(*f2.parametric2) == t2);
}

TEST_CASE("parse errors")
{
    auto code_of = [](const std::string& text) {
        try
        {
            parse_dataset(text);
        }
        catch (const Error& e)
        {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code_of("{") == ErrorCode::Parse);
    CHECK(code_of("[]") == ErrorCode::Parse);
    CHECK(code_of(R"({"version": 2, "kind": "1p"})") == ErrorCode::Parse);
    CHECK(code_of(R"({"version": 1, "kind": "1p", "frequencies": [[0, 1]], "parameters": [0],
                      "samples": [[[1, 0], [2, 0]]], "real_symmetric": false})") == ErrorCode::Parse);
    CHECK_THROWS_AS(parse_model(R"({"version": 1, "kind": "unknown"})"), Error);
}

TEST_CASE("cli usage errors")
{
    CHECK(run({}) == kExitUsage);
    CHECK(run({"frobnicate"}) == kExitUsage);
    CHECK(run({"generate", "--model", "penzl"}) == kExitUsage);
    CHECK(run({"--help"}) == kExitOk);

    TempDir tmp;
    CHECK(run({"generate", "--model", "nothing", "--out", tmp / "x.json"}) == kExitUsage);
    CHECK(run({"fit", "--data", tmp / "missing.json", "--local-order", "2", "--basis", "monomial:1", "--out",
               tmp / "m.json"}) != kExitOk);
}

TEST_CASE("cli pipeline")
{
    TempDir tmp;
    const std::string data = tmp / "chain.json";
    REQUIRE(run({"generate", "--model", "chain", "--size", "20", "--freq-min", "1e-2", "--freq-max", "1e2",
                 "--freq-count", "60", "--param-min", "0.01", "--param-max", "0.8", "--param-count", "6", "--out",
                 data}) == kExitOk);
    const DatasetFile df = parse_dataset(read_text_file(data));
    REQUIRE(df.one);
    CHECK(df.one->samples.rows() == 60);
    CHECK(df.one->samples.cols() == 6);
    CHECK(df.one->real_symmetric);

    const std::string again = tmp / "chain2.json";
    REQUIRE(run({"generate", "--model", "chain", "--size", "20", "--freq-min", "1e-2", "--freq-max", "1e2",
                 "--freq-count", "60", "--param-min", "0.01", "--param-max", "0.8", "--param-count", "6", "--out",
                 again}) == kExitOk);
    CHECK(read_text_file(again) == read_text_file(data));

    const std::string model = tmp / "model.json";
    std::string report;
    const int fit_code = run({"fit", "--data", data, "--local-order", "8", "--basis", "bernstein:3", "--real",
                              "--out", model},
                             &report);
    CHECK((fit_code == kExitOk || fit_code == kExitNotConverged));
    CHECK(report.find("residual") != std::string::npos);
    const ModelFile mf = parse_model(read_text_file(model));
    REQUIRE(mf.parametric);
    CHECK(mf.parametric->real_flag());

    const std::string eval_csv = tmp / "eval.csv";
    REQUIRE(run({"eval", "--model", model, "--data", data, "--metrics", "rms,h2", "--out", eval_csv}) == kExitOk);
    std::string header;
    const auto rows = read_csv(eval_csv, header);
    CHECK(header == "param,rms,h2_rel,hinf_rel");
    CHECK(rows.size() == 6);

    const std::string bode_csv = tmp / "bode.csv";
    REQUIRE(run({"bode", "--model", model, "--param", "0.3", "--freq-min", "0.1", "--freq-max", "10",
                 "--freq-count", "3", "--out", bode_csv}) == kExitOk);
    const auto bode = read_csv(bode_csv, header);
    CHECK(header == "omega,abs_fit");
    REQUIRE(bode.size() == 3);
    CHECK(bode[0][0] == 0.1);
    CHECK(bode[2][0] == 10.0);
    for (const auto& row : bode)
    {
        CHECK(row[1] == std::abs((*mf.parametric)(Complex{0.0, row[0]}, 0.3)));
    }

    const std::string small = tmp / "small.json";
    const int cmp_code = run({"compress", "--model", model, "--order", "6", "--out", small});
    CHECK((cmp_code == kExitOk || cmp_code == kExitNotConverged));
    const ModelFile cf = parse_model(read_text_file(small));
    REQUIRE(cf.compressed);
    CHECK(cf.compressed->order() == 6);
}

TEST_CASE("cli eval of a model against its own samples")
{
    std::mt19937_64 rng(83);
    const ParametricModel m(real_locals(rng, 2), ParametricBasis::bernstein(1, 0.0, 1.0), real_coeffs(rng, 2, 2), true);
    FrequencyResponseDataset d;
    d.frequencies = (logspace(0.1, 10.0, 20).cast<Complex>() * kI).eval();
    d.parameters = linspace(0.0, 1.0, 4).cast<Complex>();
    d.samples.resize(20, 4);
    for (Index i = 0; i < 20; ++i)
        for (Index j = 0; j < 4; ++j)
            d.samples(i, j) = m(d.frequencies(i), d.parameters(j));
    d.real_symmetric = true;

    TempDir tmp;
    write_text_file(tmp / "m.json", model_to_json(m));
    write_text_file(tmp / "d.json", dataset_to_json(d));
    REQUIRE(run({"eval", "--model", tmp / "m.json", "--data", tmp / "d.json", "--metrics", "rms,h2,hinf", "--out",
                 tmp / "e.csv"}) == kExitOk);
    std::string header;
    const auto rows = read_csv(tmp / "e.csv", header);
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows)
    {
        CHECK(row[1] == 0.0);
        CHECK(row[2] == 0.0);
        CHECK(row[3] == 0.0);
    }
}
