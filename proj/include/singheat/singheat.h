#ifndef SINGHEAT_H
#define SINGHEAT_H

#include <stddef.h>

#if defined(SINGHEAT_BUILDING_LIBRARY)
#define SH_API __attribute__((visibility("default")))
#else
#define SH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. SH_ERR_NUMERICAL and SH_ERR_CONFIG double as CLI exit codes 1 and 2. */
typedef enum sh_status {
  SH_OK = 0,
  SH_ERR_NUMERICAL = 1,
  SH_ERR_CONFIG = 2,
  SH_ERR_DOMAIN = 3,
  SH_ERR_ARGUMENT = 4,
  SH_ERR_INTERNAL = 5
} sh_status;

typedef struct sh_config sh_config;
typedef struct sh_result sh_result;
typedef struct sh_potential sh_potential;

SH_API const char* sh_version(void);

/* Message of the last failed call on this thread; "" when none. Valid until the next call. */
SH_API const char* sh_last_error(void);

SH_API sh_status sh_config_load(const char* path, sh_config** out);
/* base_dir resolves relative file names in the text; NULL means the working directory. */
SH_API sh_status sh_config_parse(const char* text, const char* base_dir, sh_config** out);
SH_API void sh_config_free(sh_config* cfg);

/* Number of subcommands and their names (index < count). */
SH_API size_t sh_subcommand_count(void);
SH_API const char* sh_subcommand_name(size_t index);

/* Runs one subcommand. output_dir may be NULL (environment, then config). A result is produced
   whenever the run completes; its exit status reports failed or inconclusive checks. */
SH_API sh_status sh_run(const sh_config* cfg, const char* subcommand, int allow_inconclusive,
                        const char* output_dir, sh_result** out);
SH_API void sh_result_free(sh_result* result);

SH_API int sh_result_exit_status(const sh_result* result);
SH_API size_t sh_result_checks(const sh_result* result);
SH_API size_t sh_result_failures(const sh_result* result);
SH_API size_t sh_result_inconclusive(const sh_result* result);
SH_API const char* sh_result_output_dir(const sh_result* result);
SH_API size_t sh_result_file_count(const sh_result* result);
SH_API const char* sh_result_file(const sh_result* result, size_t index);
SH_API size_t sh_result_line_count(const sh_result* result);
SH_API const char* sh_result_line(const sh_result* result, size_t index);

/* Potentials from the same text syntax as the config key problem.potential. */
SH_API sh_status sh_potential_parse(const char* text, int dim, sh_potential** out);
SH_API void sh_potential_free(sh_potential* v);
SH_API sh_status sh_potential_eval(const sh_potential* v, const double* x, double t, double* out);

/* Gaussian heat kernel in dimension n at displacement x (n values) and time t > 0. */
SH_API sh_status sh_heat_kernel(const double* x, int n, double t, double* out);

#ifdef __cplusplus
}
#endif

#endif
