// coneig: command-line front end over the C API.
//
//   coneig reduce --input f.json --delta 1e-10 --output g.json [--report r.json]
//   coneig verify-random --count 50 --size 60 --seed 1 --digits 300 --delta 0 --out v.json
//   coneig eval --input f.json --points 4096 --out f.csv
//   coneig decompose --input f.json --delta 0 --out d.json

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coneig/coneig.h"

namespace
{

constexpr int exit_ok       = 0;
constexpr int exit_io       = 1;
constexpr int exit_roots    = 2;
constexpr int exit_positive = 3;
constexpr int exit_other    = 4;
constexpr int exit_verify   = 5;

int exit_code(int status)
{
    switch (status)
    {
    case CONEIG_OK:
        return exit_ok;
    case CONEIG_ERR_ROOT_COUNT:
        return exit_roots;
    case CONEIG_ERR_NOT_POSITIVE:
        return exit_positive;
    case CONEIG_ERR_IO:
    case CONEIG_ERR_PARSE:
        return exit_io;
    default:
        return exit_other;
    }
}

int report(int status, const char* what)
{
    if (status != CONEIG_OK)
    {
        std::fprintf(stderr, "coneig %s: %s\n", what, coneig_last_error());
    }
    return exit_code(status);
}

std::string shortest(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

struct FunctionDeleter
{
    void operator()(coneig_function* f) const { coneig_function_free(f); }
};
struct ReductionDeleter
{
    void operator()(coneig_reduction* r) const { coneig_reduction_free(r); }
};
struct DecompositionDeleter
{
    void operator()(coneig_decomposition* d) const { coneig_decomposition_free(d); }
};
using FunctionPtr      = std::unique_ptr<coneig_function, FunctionDeleter>;
using ReductionPtr     = std::unique_ptr<coneig_reduction, ReductionDeleter>;
using DecompositionPtr = std::unique_ptr<coneig_decomposition, DecompositionDeleter>;

int load(const std::string& path, FunctionPtr& out)
{
    coneig_function* f = nullptr;
    const int st       = coneig_function_load(path.c_str(), &f);
    out.reset(f);
    return st;
}

struct ReduceArgs
{
    std::string input, output, report_path;
    double delta       = 0.0;
    std::size_t grid   = 0;
    bool hi_prec       = false;
};

int run_reduce(const ReduceArgs& a)
{
    FunctionPtr f;
    if (int st = load(a.input, f))
    {
        return report(st, "reduce");
    }
    coneig_reduce_options opt{a.grid, a.hi_prec ? 1 : 0};
    coneig_reduction* raw = nullptr;
    if (int st = coneig_reduce(f.get(), a.delta, &opt, &raw))
    {
        return report(st, "reduce");
    }
    ReductionPtr r(raw);
    coneig_function* graw = nullptr;
    if (int st = coneig_reduction_function(r.get(), &graw))
    {
        return report(st, "reduce");
    }
    FunctionPtr g(graw);
    if (int st = coneig_function_save(g.get(), a.output.c_str()))
    {
        return report(st, "reduce");
    }
    if (!a.report_path.empty())
    {
        if (int st = coneig_reduction_save_report(r.get(), a.report_path.c_str()))
        {
            return report(st, "reduce");
        }
    }
    std::printf("m = %zu  lambda_m = %.6e  sup_error = %.6e\n", coneig_reduction_order(r.get()),
                coneig_reduction_lambda(r.get()), coneig_reduction_sup_error(r.get()));
    return exit_ok;
}

struct VerifyArgs
{
    std::size_t count = 1, size = 2;
    std::uint64_t seed = 1;
    int digits         = 300;
    double delta       = 0.0;
    unsigned threads   = 0;
    std::string out;
};

int run_verify(const VerifyArgs& a)
{
    coneig_verify_result res{};
    const int st = coneig_verify_random(a.count, a.size, a.seed, a.digits, a.delta, 1e-10,
                                        a.threads, a.out.empty() ? nullptr : a.out.c_str(),
                                        &res);
    if (st != CONEIG_OK)
    {
        return report(st, "verify-random");
    }
    std::printf("max lambda error %.3e  max vector error %.3e  failures %zu/%zu\n",
                res.max_lambda_error, res.max_vector_error, res.failures, a.count);
    return res.failures == 0 ? exit_ok : exit_verify;
}

int run_eval(const std::string& input, std::size_t points, const std::string& out)
{
    FunctionPtr f;
    if (int st = load(input, f))
    {
        return report(st, "eval");
    }
    return report(coneig_function_write_csv(f.get(), points, out.c_str()), "eval");
}

int run_decompose(const std::string& input, double delta, const std::string& out)
{
    FunctionPtr f;
    if (int st = load(input, f))
    {
        return report(st, "decompose");
    }
    coneig_decomposition* raw = nullptr;
    if (int st = coneig_decompose(f.get(), delta, &raw))
    {
        return report(st, "decompose");
    }
    DecompositionPtr d(raw);
    const std::size_t n = coneig_decomposition_dim(d.get());
    const std::size_t k = coneig_decomposition_count(d.get());
    nlohmann::json lambdas = nlohmann::json::array();
    nlohmann::json vectors = nlohmann::json::array();
    std::vector<double> col(2 * n);
    for (std::size_t j = 0; j < k; ++j)
    {
        lambdas.push_back(shortest(coneig_decomposition_lambda(d.get(), j)));
        coneig_decomposition_vector(d.get(), j, col.data());
        nlohmann::json v = nlohmann::json::array();
        for (std::size_t i = 0; i < n; ++i)
        {
            v.push_back({{"re", shortest(col[2 * i])}, {"im", shortest(col[2 * i + 1])}});
        }
        vectors.push_back(v);
    }
    std::ofstream os(out, std::ios::binary | std::ios::trunc);
    os << nlohmann::json{{"lambdas", lambdas}, {"vectors", vectors}}.dump(2) << "\n";
    if (!os)
    {
        std::fprintf(stderr, "coneig decompose: cannot write %s\n", out.c_str());
        return exit_io;
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Con-eigenvalue decomposition of Cauchy matrices and rational reduction"};
    app.require_subcommand(1);

    ReduceArgs ra;
    auto* reduce = app.add_subcommand("reduce", "Reduce a rational function at error delta");
    reduce->add_option("--input", ra.input, "FunctionFile to reduce")->required();
    reduce->add_option("--delta", ra.delta, "Target error")->required();
    reduce->add_option("--output", ra.output, "Reduced FunctionFile")->required();
    reduce->add_option("--grid-size", ra.grid, "Uniform points of the error grid");
    reduce->add_flag("--hi-prec-residues", ra.hi_prec, "Solve for residues at 100 digits");
    reduce->add_option("--report", ra.report_path, "JSON report");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify-random", "Random ensemble against the oracle");
    verify->add_option("--count", va.count)->required()->check(CLI::PositiveNumber);
    verify->add_option("--size", va.size)->required()->check(CLI::PositiveNumber);
    verify->add_option("--seed", va.seed)->required();
    verify->add_option("--digits", va.digits)->default_val(300);
    verify->add_option("--delta", va.delta)->default_val(0.0);
    verify->add_option("--threads", va.threads, "0 = hardware concurrency");
    verify->add_option("--out", va.out, "Per-matrix JSON results");

    std::string ev_in, ev_out;
    std::size_t ev_points = 4096;
    auto* eval = app.add_subcommand("eval", "Sample f on the unit circle");
    eval->add_option("--input", ev_in)->required();
    eval->add_option("--points", ev_points)->required();
    eval->add_option("--out", ev_out)->required();

    std::string de_in, de_out;
    double de_delta = 0.0;
    auto* decompose = app.add_subcommand("decompose", "Con-eigenpairs of the Cauchy matrix of f");
    decompose->add_option("--input", de_in)->required();
    decompose->add_option("--delta", de_delta)->default_val(0.0);
    decompose->add_option("--out", de_out)->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return exit_io;
    }

    if (reduce->parsed())
    {
        return run_reduce(ra);
    }
    if (verify->parsed())
    {
        return run_verify(va);
    }
    if (eval->parsed())
    {
        return run_eval(ev_in, ev_points, ev_out);
    }
    return run_decompose(de_in, de_delta, de_out);
}
