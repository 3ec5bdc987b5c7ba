/* C interface to lensqed. Every call returns an lq_status; on failure the
 * message is available from lq_last_error() on the same thread. */
#ifndef LENSQED_H
#define LENSQED_H

#include <stddef.h>

#if defined(_WIN32)
#define LQ_API __declspec(dllexport)
#else
#define LQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lq_status {
  LQ_OK = 0,
  LQ_ERR_ARGUMENT = 1,  /* null pointer, index out of range */
  LQ_ERR_CONFIG = 2,    /* invalid configuration */
  LQ_ERR_DOMAIN = 3,    /* input outside the domain of the operation */
  LQ_ERR_NUMERICAL = 4, /* quadrature, truncation, pole or fit failure */
  LQ_ERR_IO = 5,
  LQ_ERR_INTERNAL = 6
} lq_status;

typedef struct lq_config lq_config;
typedef struct lq_table lq_table;

typedef struct lq_rates {
  double gamma11;
  double gamma22;
  double gamma12;
  double delta_omega;
} lq_rates;

typedef struct lq_populations {
  double rho22;
  double rho_ss;
  double rho_aa;
  double rho11;
} lq_populations;

LQ_API const char* lq_version(void);
LQ_API const char* lq_last_error(void);
LQ_API const char* lq_status_name(lq_status status);

/* Configuration. `experiment` may be NULL, otherwise it names the experiment
 * and the config's own experiment key becomes optional. */
LQ_API lq_status lq_config_parse(const char* text, const char* experiment, lq_config** out);
LQ_API lq_status lq_config_load(const char* path, const char* experiment, lq_config** out);
LQ_API lq_status lq_config_set_tolerance(lq_config* cfg, double rel_tol);
LQ_API lq_status lq_config_set_output(lq_config* cfg, const char* path);
/* Effective output path, "" when unset. Valid until the config changes. */
LQ_API const char* lq_config_output(const lq_config* cfg);
LQ_API const char* lq_config_experiment(const lq_config* cfg);
/* Rendered config text; release with lq_string_free. */
LQ_API lq_status lq_config_render(const lq_config* cfg, char** out);
LQ_API void lq_config_free(lq_config* cfg);
LQ_API void lq_string_free(char* s);

LQ_API lq_status lq_run(const lq_config* cfg, int threads, lq_table** out);

LQ_API size_t lq_table_rows(const lq_table* table);
LQ_API size_t lq_table_columns(const lq_table* table);
LQ_API const char* lq_table_column_name(const lq_table* table, size_t column);
LQ_API lq_status lq_table_value(const lq_table* table, size_t row, size_t column, double* out);
LQ_API lq_status lq_table_write(const lq_table* table, const char* path);
LQ_API void lq_table_free(lq_table* table);

/* Direct computations. Positions in units of c/omega0, rates in units of the
 * free-space rate. The slab is eps = mu = n_real + i n_imag, thickness d. */
LQ_API lq_status lq_decay_rates(double thickness, double n_real, double n_imag, const double position1[3],
                                const double position2[3], const double orientation[3], lq_rates* out);
LQ_API lq_status lq_free_space_cross_rate(const double separation[3], const double orientation[3], double* out);
LQ_API lq_status lq_aperture_rate_ratio(double radius, double thickness, double* out);
LQ_API lq_status lq_evolve(const lq_populations* initial, const lq_rates* rates, double t, lq_populations* out);

#ifdef __cplusplus
}
#endif

#endif /* LENSQED_H */
