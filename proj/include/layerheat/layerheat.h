#ifndef LAYERHEAT_H
#define LAYERHEAT_H

/* C interface to the two-layer heat kernel library.
 *
 * Handles are opaque and owned by the caller; every create call has a
 * matching destroy. Functions return LH_OK or an error status, and the
 * message of the most recent failure on the calling thread is available
 * from lh_last_error(). Points are arrays of `dim` doubles. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LH_API __declspec(dllexport)
#else
#define LH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lh_status {
    LH_OK = 0,
    LH_INVALID_ARGUMENT = 1,
    LH_NOT_SYMMETRIC = 2,
    LH_NOT_ELLIPTIC = 3,
    LH_UNSUPPORTED_DIMENSION = 4,
    LH_ON_INTERFACE = 5,
    LH_BRANCH_AMBIGUITY = 6,
    LH_DEGENERATE_DENOMINATOR = 7,
    LH_REGION_MISMATCH = 8,
    LH_QUADRATURE_NOT_CONVERGED = 9,
    LH_CONTOUR_LEAVES_DOMAIN = 10,
    LH_UNSUPPORTED_GEOMETRY = 11,
    LH_TRUNCATION_INSUFFICIENT = 12,
    LH_INTERFACE_NOT_ON_GRID = 13,
    LH_SOLVE_FAILED = 14,
    LH_NO_FINITE_CONSTANT = 15,
    LH_EXPONENT_MISMATCH = 16,
    LH_CONFIG = 17,
    LH_IO = 18,
    LH_INTERNAL = 19
} lh_status;

typedef enum lh_contour_kind { LH_CONTOUR_VERTICAL_BROMWICH = 0, LH_CONTOUR_DEFORMED_HYPERBOLIC = 1 } lh_contour_kind;

typedef struct lh_medium lh_medium;
typedef struct lh_evaluator lh_evaluator;
typedef struct lh_green lh_green;

typedef struct lh_quadrature {
    int contour_kind;            /* lh_contour_kind */
    double sigma_abscissa;
    int contour_nodes;
    double xi_truncation_radius; /* 0: adaptive */
    int xi_nodes_per_dim;
    double target_rel_tol;
    double mu;                   /* <= 0: certified automatically */
    int max_refinements;
} lh_quadrature;

typedef struct lh_kernel_value {
    double gamma;
    double grad[3];
    double est_error;
    double grad_est_error;
    double imag_residual;
} lh_kernel_value;

LH_API const char* lh_status_name(lh_status status);
LH_API const char* lh_last_error(void);

LH_API void lh_quadrature_defaults(lh_quadrature* cfg);

/* Row-major dim x dim tensors; lower may be NULL for a homogeneous medium. */
LH_API lh_status lh_medium_create(int dim, const double* upper, const double* lower, lh_medium** out);
LH_API void lh_medium_destroy(lh_medium* medium);
LH_API int lh_medium_dim(const lh_medium* medium);

/* cfg may be NULL for the defaults. */
LH_API lh_status lh_evaluator_create(const lh_medium* medium, const lh_quadrature* cfg, lh_evaluator** out);
LH_API void lh_evaluator_destroy(lh_evaluator* ev);
LH_API double lh_evaluator_mu(const lh_evaluator* ev);

LH_API lh_status lh_eval(const lh_evaluator* ev, const double* x, double t, const double* y, double s, int gradient,
                         lh_kernel_value* out);

/* xs and ys hold count * dim coordinates; ts and ss hold count times. */
LH_API lh_status lh_eval_batch(const lh_evaluator* ev, size_t count, const double* xs, const double* ts,
                               const double* ys, const double* ss, int gradient, lh_kernel_value* out);

LH_API lh_status lh_green_whole_space(const lh_evaluator* ev, lh_green** out);
/* The half-space {orientation * (x_axis - offset) > 0}; axes are 0-based. */
LH_API lh_status lh_green_half_space(const lh_evaluator* ev, int axis, double offset, int orientation,
                                     lh_green** out);
LH_API lh_status lh_green_cube(const lh_evaluator* ev, const double* center, double half_width, int depth,
                               double aronson_constant, double tail_tolerance, lh_green** out);
LH_API lh_status lh_green_adjoint(const lh_green* g, lh_green** out);
LH_API void lh_green_destroy(lh_green* g);
LH_API lh_status lh_green_eval_batch(const lh_green* g, size_t count, const double* xs, const double* ts,
                                     const double* ys, const double* ss, int gradient, lh_kernel_value* out);

LH_API lh_status lh_cube_tail_bound(int dim, const double* center, double half_width, const double* x,
                                    const double* y, double elapsed, int depth, double aronson_constant,
                                    double* out);

/* Runs a verification harness; *report_json receives a string to release
 * with lh_string_free and *passed is 1 iff every check held. cfg may be NULL. */
LH_API lh_status lh_verify(const lh_medium* medium, const lh_quadrature* cfg, const char* harness,
                           const char* params_json, uint64_t seed, double time_power, char** report_json,
                           int* passed);

/* Kernel against the finite-difference oracle over a grid refinement study. */
LH_API lh_status lh_compare_oracle(const lh_evaluator* ev, const char* spec_json, char** report_json);

LH_API void lh_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
