#include "coneig/coneig.h"

#include <atomic>
#include <mutex>
#include <new>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "coneig/error.hpp"
#include "coneig/function_io.hpp"
#include "coneig/oracle.hpp"
#include "coneig/reduction.hpp"

struct coneig_function
{
    coneig::RationalFunction f;
};

struct coneig_reduction
{
    coneig::Reduction r;
};

struct coneig_decomposition
{
    coneig::ConEigDecomposition d;
};

namespace
{

thread_local std::string last_error;

int fail(int status, const std::string& msg)
{
    last_error = msg;
    return status;
}

// Runs fn and converts exceptions into status codes.
template<class F>
int guarded(F&& fn)
{
    try
    {
        last_error.clear();
        fn();
        return CONEIG_OK;
    }
    catch (const coneig::Error& e)
    {
        return fail(static_cast<int>(e.code()), e.what());
    }
    catch (const std::bad_alloc&)
    {
        return fail(CONEIG_ERR_OUT_OF_MEMORY, "out of memory");
    }
    catch (const std::exception& e)
    {
        return fail(CONEIG_ERR_INTERNAL, e.what());
    }
    catch (...)
    {
        return fail(CONEIG_ERR_INTERNAL, "unknown exception");
    }
}

int null_arg(const char* name)
{
    return fail(CONEIG_ERR_INVALID_ARGUMENT, std::string(name) + " is NULL");
}

} // namespace

extern "C" {

const char* coneig_last_error(void)
{
    return last_error.c_str();
}

const char* coneig_status_name(int status)
{
    switch (status)
    {
    case CONEIG_ERR_OUT_OF_MEMORY:
        return "OutOfMemory";
    case CONEIG_ERR_INTERNAL:
        return "Internal";
    default:
        if (status >= 0 && status <= CONEIG_ERR_PARSE)
        {
            return coneig::error_code_name(static_cast<coneig::ErrorCode>(status));
        }
        return "Unknown";
    }
}

int coneig_function_create(double alpha0_re, double alpha0_im, coneig_function** out)
{
    if (!out)
    {
        return null_arg("out");
    }
    return guarded([&] {
        auto* h     = new coneig_function;
        h->f.alpha0 = {alpha0_re, alpha0_im};
        *out        = h;
    });
}

int coneig_function_add_term(coneig_function* f, double re_tau, double im_tau, double res_re,
                             double res_im)
{
    if (!f)
    {
        return null_arg("f");
    }
    return guarded([&] {
        f->f.terms.push_back({coneig::ExponentPole{re_tau, im_tau}, {res_re, res_im}});
    });
}

int coneig_function_load(const char* path, coneig_function** out)
{
    if (!path || !out)
    {
        return null_arg(path ? "out" : "path");
    }
    return guarded([&] {
        auto f = coneig::read_function(path);
        *out   = new coneig_function{std::move(f)};
    });
}

int coneig_function_save(const coneig_function* f, const char* path)
{
    if (!f || !path)
    {
        return null_arg(f ? "path" : "f");
    }
    return guarded([&] { coneig::write_function(path, f->f); });
}

size_t coneig_function_size(const coneig_function* f)
{
    return f ? f->f.size() : 0;
}

int coneig_function_term(const coneig_function* f, size_t i, double* re_tau, double* im_tau,
                         double* res_re, double* res_im)
{
    if (!f)
    {
        return null_arg("f");
    }
    if (i >= f->f.size())
    {
        return fail(CONEIG_ERR_INVALID_ARGUMENT, "term index out of range");
    }
    const auto& t = f->f.terms[i];
    if (re_tau) *re_tau = t.pole.re_tau;
    if (im_tau) *im_tau = t.pole.im_tau;
    if (res_re) *res_re = t.residue.real();
    if (res_im) *res_im = t.residue.imag();
    return CONEIG_OK;
}

int coneig_function_validate(coneig_function* f)
{
    if (!f)
    {
        return null_arg("f");
    }
    return guarded([&] { coneig::require_valid(f->f); });
}

int coneig_function_evaluate(const coneig_function* f, double theta, double* re, double* im)
{
    if (!f || !re || !im)
    {
        return null_arg(f ? "re/im" : "f");
    }
    return guarded([&] {
        const auto v = coneig::evaluate_on_circle(f->f, theta);
        *re          = v.real();
        *im          = v.imag();
    });
}

int coneig_function_write_csv(const coneig_function* f, size_t base_points, const char* path)
{
    if (!f || !path)
    {
        return null_arg(f ? "path" : "f");
    }
    if (base_points < 2)
    {
        return fail(CONEIG_ERR_INVALID_ARGUMENT, "base_points must be at least 2");
    }
    return guarded([&] {
        coneig::RationalFunction g = f->f;
        // a constant function has nothing to validate
        if (!g.terms.empty())
        {
            coneig::require_valid(g);
        }
        coneig::write_text(path, coneig::eval_csv(g, base_points));
    });
}

void coneig_function_free(coneig_function* f)
{
    delete f;
}

int coneig_reduce(const coneig_function* f, double delta, const coneig_reduce_options* opts,
                  coneig_reduction** out)
{
    if (!f || !out)
    {
        return null_arg(f ? "out" : "f");
    }
    return guarded([&] {
        coneig::ReduceOptions o;
        if (opts)
        {
            if (opts->grid_size != 0)
            {
                o.grid_size = opts->grid_size;
            }
            o.high_precision_residues = opts->high_precision_residues != 0;
        }
        auto r = coneig::reduce(f->f, delta, o);
        *out   = new coneig_reduction{std::move(r)};
    });
}

int coneig_reduction_function(const coneig_reduction* r, coneig_function** out)
{
    if (!r || !out)
    {
        return null_arg(r ? "out" : "r");
    }
    return guarded([&] { *out = new coneig_function{r->r.g}; });
}

size_t coneig_reduction_order(const coneig_reduction* r)
{
    return r ? r->r.report.m : 0;
}

double coneig_reduction_lambda(const coneig_reduction* r)
{
    return r ? r->r.report.lambda_m : 0.0;
}

double coneig_reduction_sup_error(const coneig_reduction* r)
{
    return r ? r->r.report.sup_error : 0.0;
}

int coneig_reduction_root(const coneig_reduction* r, size_t i, double* re, double* im)
{
    if (!r || !re || !im)
    {
        return null_arg(r ? "re/im" : "r");
    }
    const auto& roots = r->r.report.root_exponents;
    if (i >= roots.size())
    {
        return fail(CONEIG_ERR_INVALID_ARGUMENT, "root index out of range");
    }
    *re = roots[i].re_tau;
    *im = roots[i].im_tau;
    return CONEIG_OK;
}

int coneig_reduction_save_report(const coneig_reduction* r, const char* path)
{
    if (!r || !path)
    {
        return null_arg(r ? "path" : "r");
    }
    return guarded([&] { coneig::write_text(path, coneig::report_to_json(r->r.report)); });
}

void coneig_reduction_free(coneig_reduction* r)
{
    delete r;
}

int coneig_decompose(const coneig_function* f, double delta, coneig_decomposition** out)
{
    if (!f || !out)
    {
        return null_arg(f ? "out" : "f");
    }
    return guarded([&] {
        coneig::RationalFunction g = f->f;
        coneig::require_valid(g);
        auto d = coneig::con_eigvector(coneig::generators_from_rational(g), delta);
        *out   = new coneig_decomposition{std::move(d)};
    });
}

size_t coneig_decomposition_count(const coneig_decomposition* d)
{
    return d ? static_cast<size_t>(d->d.lambdas.size()) : 0;
}

size_t coneig_decomposition_dim(const coneig_decomposition* d)
{
    return d ? static_cast<size_t>(d->d.Z.rows()) : 0;
}

double coneig_decomposition_lambda(const coneig_decomposition* d, size_t j)
{
    if (!d || j >= static_cast<size_t>(d->d.lambdas.size()))
    {
        return 0.0;
    }
    return d->d.lambdas(static_cast<Eigen::Index>(j));
}

int coneig_decomposition_vector(const coneig_decomposition* d, size_t j, double* out)
{
    if (!d || !out)
    {
        return null_arg(d ? "out" : "d");
    }
    if (j >= static_cast<size_t>(d->d.Z.cols()))
    {
        return fail(CONEIG_ERR_INVALID_ARGUMENT, "column index out of range");
    }
    const auto col = d->d.Z.col(static_cast<Eigen::Index>(j));
    for (Eigen::Index i = 0; i < col.size(); ++i)
    {
        out[2 * i]     = col(i).real();
        out[2 * i + 1] = col(i).imag();
    }
    return CONEIG_OK;
}

void coneig_decomposition_free(coneig_decomposition* d)
{
    delete d;
}

int coneig_verify_random(size_t count, size_t size, uint64_t seed, int digits, double delta,
                         double tolerance, unsigned threads, const char* out_path,
                         coneig_verify_result* result)
{
    if (!result)
    {
        return null_arg("result");
    }
    if (count == 0 || size == 0)
    {
        return fail(CONEIG_ERR_INVALID_ARGUMENT, "count and size must be at least 1");
    }
    if (digits < 50)
    {
        return fail(CONEIG_ERR_INVALID_ARGUMENT, "digits must be at least 50");
    }
    if (!(delta >= 0.0))
    {
        return fail(CONEIG_ERR_INVALID_ARGUMENT, "delta must be nonnegative");
    }
    return guarded([&] {
        struct Row
        {
            double lambda_err = 0.0;
            double vector_err = 0.0;
            std::size_t pairs = 0;
            std::string error;
        };
        std::vector<Row> rows(count);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t k = next++; k < count; k = next++)
            {
                Row& row = rows[k];
                try
                {
                    auto f        = coneig::oracle::random_rational(size, seed + k);
                    const auto g  = coneig::generators_from_rational(f);
                    const auto d  = coneig::con_eigvector(g, delta);
                    const auto gz = coneig::oracle::oracle_coneig(g, digits);
                    const auto st = coneig::oracle::oracle_error_stats(d, gz);
                    row.lambda_err = st.max_lambda;
                    row.vector_err = st.max_vector;
                    row.pairs      = static_cast<std::size_t>(st.lambda_err.size());
                }
                catch (const std::exception& e)
                {
                    row.error = e.what();
                }
            }
        };
        unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
        nt          = static_cast<unsigned>(std::min<std::size_t>(nt, count));
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < nt; ++t)
        {
            pool.emplace_back(worker);
        }
        worker();
        for (auto& t : pool)
        {
            t.join();
        }

        *result = {};
        nlohmann::json list = nlohmann::json::array();
        for (std::size_t k = 0; k < count; ++k)
        {
            const Row& row = rows[k];
            const bool ok  = row.error.empty() && row.lambda_err <= tolerance &&
                            row.vector_err <= tolerance;
            if (!ok)
            {
                ++result->failures;
            }
            result->max_lambda_error = std::max(result->max_lambda_error, row.lambda_err);
            result->max_vector_error = std::max(result->max_vector_error, row.vector_err);
            nlohmann::json item{{"index", k},
                                {"seed", seed + k},
                                {"pairs", row.pairs},
                                {"max_lambda_error", row.lambda_err},
                                {"max_vector_error", row.vector_err},
                                {"pass", ok}};
            if (!row.error.empty())
            {
                item["error"] = row.error;
            }
            list.push_back(item);
        }
        if (out_path)
        {
            nlohmann::json doc{{"count", count},
                               {"size", size},
                               {"seed", seed},
                               {"digits", digits},
                               {"delta", delta},
                               {"tolerance", tolerance},
                               {"max_lambda_error", result->max_lambda_error},
                               {"max_vector_error", result->max_vector_error},
                               {"failures", result->failures},
                               {"matrices", list}};
            coneig::write_text(out_path, doc.dump(2) + "\n");
        }
    });
}

} // extern "C"
