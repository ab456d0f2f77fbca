/*
 * expfam: divergences of exponential families under their dual subtractive
 * and divisive normalizations, with numerical-integration oracles.
 *
 * C interface to the shared library. Handles are opaque; every fallible call
 * returns an expfam_status and writes its result through out-parameters. On
 * failure expfam_last_error() carries a thread-local description.
 */
#ifndef EXPFAM_H
#define EXPFAM_H

#include <stdint.h>

#if defined(_WIN32)
#define EXPFAM_API __declspec(dllexport)
#else
#define EXPFAM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum expfam_status {
  EXPFAM_OK = 0,
  EXPFAM_ERR_ARGUMENT = 1,    /* bad argument or unknown name */
  EXPFAM_ERR_DOMAIN = 2,      /* parameter or evaluation point outside domain */
  EXPFAM_ERR_CONVERGENCE = 3, /* solver or quadrature did not converge */
  EXPFAM_ERR_NOT_CONVEX = 4,  /* deformed generator failed its certificate */
  EXPFAM_ERR_PARSE = 5,       /* malformed JSON input */
  EXPFAM_ERR_INTERNAL = 6
} expfam_status;

typedef struct expfam_family expfam_family;
typedef struct expfam_scheme expfam_scheme;

EXPFAM_API const char* expfam_version(void);
EXPFAM_API const char* expfam_status_name(expfam_status status);

/* Thread-local message describing the most recent failure. */
EXPFAM_API const char* expfam_last_error(void);

/* Frees strings returned through char** out-parameters. */
EXPFAM_API void expfam_free(char* text);

/*
 * Families. Kinds: "exponential", "poisson", "bernoulli",
 * "centered-normal-1d", "normal-1d", "centered-normal-nd". dim is the sample
 * dimension (1 except for centered-normal-nd). Natural parameters are flat
 * arrays; the matrix family packs the upper triangle row-wise.
 */
EXPFAM_API expfam_status expfam_family_create(const char* kind, int dim,
                                              expfam_family** out);
/* Descriptor document {"kind", "dim", "theta"?}; theta_out may be NULL. */
EXPFAM_API expfam_status expfam_family_from_json(const char* json, expfam_family** out,
                                                 double* theta_out, int capacity,
                                                 int* theta_len);
EXPFAM_API expfam_status expfam_family_to_json(const expfam_family* family,
                                               const double* theta, int len, char** out);
EXPFAM_API void expfam_family_destroy(expfam_family* family);

EXPFAM_API const char* expfam_family_kind(const expfam_family* family);
EXPFAM_API int expfam_family_dim(const expfam_family* family);
EXPFAM_API int expfam_family_param_len(const expfam_family* family);
EXPFAM_API int expfam_family_sample_len(const expfam_family* family);
EXPFAM_API int expfam_family_in_domain(const expfam_family* family, const double* theta,
                                       int len);

/* Natural parameters from the source parameterization (rate, success
 * probability, variance, (mean, variance), packed covariance). */
EXPFAM_API expfam_status expfam_theta_from_source(const expfam_family* family,
                                                  const double* source, int source_len,
                                                  double* theta_out, int capacity,
                                                  int* theta_len);

EXPFAM_API expfam_status expfam_cumulant(const expfam_family* family, const double* theta,
                                         int len, double* out);
EXPFAM_API expfam_status expfam_partition(const expfam_family* family, const double* theta,
                                          int len, double* out);
EXPFAM_API expfam_status expfam_grad_cumulant(const expfam_family* family,
                                              const double* theta, int len, double* grad);
EXPFAM_API expfam_status expfam_grad_partition(const expfam_family* family,
                                               const double* theta, int len, double* grad);
EXPFAM_API expfam_status expfam_density(const expfam_family* family, const double* theta,
                                        int len, const double* x, int x_len, double* out);
EXPFAM_API expfam_status expfam_unnormalized_density(const expfam_family* family,
                                                     const double* theta, int len,
                                                     const double* x, int x_len,
                                                     double* out);

/*
 * Integration schemes from a JSON document
 * {"kind", "abs_tol", "rel_tol", "max_evals", "seed", "tail_cut"}; every key
 * is optional, NULL or "" selects the defaults. Kinds: "auto",
 * "adaptive-quadrature", "tensor-quadrature", "monte-carlo", "series-sum".
 */
EXPFAM_API expfam_status expfam_scheme_create(const char* json, expfam_scheme** out);
EXPFAM_API expfam_status expfam_scheme_set_seed(expfam_scheme* scheme, uint64_t seed);
EXPFAM_API void expfam_scheme_destroy(expfam_scheme* scheme);

/*
 * Divergences between members theta1 and theta2. Closed forms come from the
 * cumulant generator (normalized densities) or the partition generator
 * (unnormalized == 1); the oracle variant integrates the density-side
 * definition instead. alpha is ignored by kinds that do not use it.
 *
 * Kinds: "kl", "rkl", "alpha", "hellinger", "bhattacharyya", "renyi",
 * "jensen", "bregman", "mixed-alpha", "mixed-bhattacharyya", "duo-kl".
 */
EXPFAM_API expfam_status expfam_divergence(const expfam_family* family, const char* kind,
                                           int unnormalized, const double* theta1,
                                           const double* theta2, int len, double alpha,
                                           int kappa_scaling, double* out);
EXPFAM_API expfam_status expfam_divergence_oracle(const expfam_family* family,
                                                  const char* kind, int unnormalized,
                                                  const double* theta1,
                                                  const double* theta2, int len,
                                                  double alpha,
                                                  const expfam_scheme* scheme,
                                                  double* out);

/*
 * Probes one deformation of the chosen generator ("F" or "Z"): certifies
 * convexity of tau o G o rho^{-1} on a grid and, when convex, evaluates the
 * induced Bregman and scaled Jensen divergences at (theta1, theta2, alpha).
 * rho/tau are mean-generator documents {"tag", "p"?}; grid may be NULL for
 * the family default. Returns a JSON report through json_out.
 */
EXPFAM_API expfam_status expfam_deform_probe(const expfam_family* family,
                                             const char* generator, const char* rho_json,
                                             const char* tau_json, const double* theta1,
                                             const double* theta2, int len, double alpha,
                                             const double* grid, int grid_len,
                                             char** json_out);

/*
 * Runs a verification suite ("convexity", "identities", "legendre",
 * "deformation", "all") over one family (NULL: all built-ins) and returns the
 * JSON summary. Identical inputs produce byte-identical output.
 */
EXPFAM_API expfam_status expfam_verify(const char* suite, const char* family,
                                       uint64_t seed, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* EXPFAM_H */
