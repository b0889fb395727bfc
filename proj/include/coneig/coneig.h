/*
 * coneig.h
 *
 * C interface to the con-eigenvalue solver and rational reduction. Objects
 * are opaque handles released with the matching *_free call. Every function
 * returning int returns a coneig_status; on failure coneig_last_error()
 * holds a message for the calling thread.
 */
#ifndef CONEIG_H
#define CONEIG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CONEIG_API __declspec(dllexport)
#else
#define CONEIG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum coneig_status
{
    CONEIG_OK                     = 0,
    CONEIG_ERR_INVALID_ARGUMENT   = 1,
    CONEIG_ERR_COINCIDENT_POLES   = 2,
    CONEIG_ERR_ZERO_RESIDUE       = 3,
    CONEIG_ERR_NOT_POSITIVE       = 4,
    CONEIG_ERR_RANK_DEFICIENT     = 5,
    CONEIG_ERR_NO_CONVERGENCE     = 6,
    CONEIG_ERR_DELTA_TOO_SMALL    = 7,
    CONEIG_ERR_BREAKDOWN          = 8,
    CONEIG_ERR_ROOT_COUNT         = 9,
    CONEIG_ERR_OVERFLOW           = 10,
    CONEIG_ERR_PRECISION          = 11,
    CONEIG_ERR_IO                 = 12,
    CONEIG_ERR_PARSE              = 13,
    CONEIG_ERR_OUT_OF_MEMORY      = 98,
    CONEIG_ERR_INTERNAL           = 99
} coneig_status;

typedef struct coneig_function coneig_function;
typedef struct coneig_reduction coneig_reduction;
typedef struct coneig_decomposition coneig_decomposition;

CONEIG_API const char* coneig_last_error(void);
CONEIG_API const char* coneig_status_name(int status);

/* Rational functions. */

CONEIG_API int coneig_function_create(double alpha0_re, double alpha0_im, coneig_function** out);
/* Pole exp(-(re_tau + i im_tau)) with residue (res_re + i res_im). */
CONEIG_API int coneig_function_add_term(coneig_function* f, double re_tau, double im_tau,
                                        double res_re, double res_im);
CONEIG_API int coneig_function_load(const char* path, coneig_function** out);
CONEIG_API int coneig_function_save(const coneig_function* f, const char* path);
CONEIG_API size_t coneig_function_size(const coneig_function* f);
CONEIG_API int coneig_function_term(const coneig_function* f, size_t i, double* re_tau,
                                    double* im_tau, double* res_re, double* res_im);
/* Checks and normalizes the function in place. */
CONEIG_API int coneig_function_validate(coneig_function* f);
/* f(exp(i theta)) */
CONEIG_API int coneig_function_evaluate(const coneig_function* f, double theta, double* re,
                                        double* im);
/* CSV "x,re,im" on the adaptive grid with base_points uniform points. */
CONEIG_API int coneig_function_write_csv(const coneig_function* f, size_t base_points,
                                         const char* path);
CONEIG_API void coneig_function_free(coneig_function* f);

/* Reduction. */

typedef struct coneig_reduce_options
{
    size_t grid_size;            /* 0 selects the default */
    int high_precision_residues; /* nonzero: solve for residues at 100 digits */
} coneig_reduce_options;

/* On CONEIG_ERR_ROOT_COUNT no reduction is returned. opts may be NULL. */
CONEIG_API int coneig_reduce(const coneig_function* f, double delta,
                             const coneig_reduce_options* opts, coneig_reduction** out);
/* The reduced function, owned by the caller. */
CONEIG_API int coneig_reduction_function(const coneig_reduction* r, coneig_function** out);
CONEIG_API size_t coneig_reduction_order(const coneig_reduction* r);
CONEIG_API double coneig_reduction_lambda(const coneig_reduction* r);
CONEIG_API double coneig_reduction_sup_error(const coneig_reduction* r);
/* Exponent zeta_i of the i-th new pole. */
CONEIG_API int coneig_reduction_root(const coneig_reduction* r, size_t i, double* re,
                                     double* im);
CONEIG_API int coneig_reduction_save_report(const coneig_reduction* r, const char* path);
CONEIG_API void coneig_reduction_free(coneig_reduction* r);

/* Con-eigenvalue decomposition of the Cauchy matrix of f. */

/* delta = 0 computes every pair. */
CONEIG_API int coneig_decompose(const coneig_function* f, double delta,
                                coneig_decomposition** out);
CONEIG_API size_t coneig_decomposition_count(const coneig_decomposition* d);
CONEIG_API size_t coneig_decomposition_dim(const coneig_decomposition* d);
CONEIG_API double coneig_decomposition_lambda(const coneig_decomposition* d, size_t j);
/* Column j, written as dim interleaved (re, im) pairs. */
CONEIG_API int coneig_decomposition_vector(const coneig_decomposition* d, size_t j,
                                           double* out);
CONEIG_API void coneig_decomposition_free(coneig_decomposition* d);

/* Accuracy check against the extended-precision oracle. */

typedef struct coneig_verify_result
{
    double max_lambda_error;
    double max_vector_error;
    size_t failures; /* matrices with an error above the tolerance */
} coneig_verify_result;

/*
 * count random matrices of order size from seed, decomposed with truncation
 * delta and compared with the gauge at digits decimal digits. Per-matrix
 * results are written as JSON to out_path when it is not NULL. threads = 0
 * uses the hardware concurrency.
 */
CONEIG_API int coneig_verify_random(size_t count, size_t size, uint64_t seed, int digits,
                                    double delta, double tolerance, unsigned threads,
                                    const char* out_path, coneig_verify_result* result);

#ifdef __cplusplus
}
#endif

#endif /* CONEIG_H */
