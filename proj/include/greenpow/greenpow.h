/* Green-PoW consensus simulator: C API.
 *
 * All entry points are exported from the shared library with C linkage.
 * Objects are opaque handles released with the matching _destroy call.
 * Functions returning pointers yield NULL on failure; functions returning
 * int yield GP_OK or an error code. gp_last_error() describes the most
 * recent failure on the calling thread.
 */
#ifndef GREENPOW_H
#define GREENPOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GP_API __declspec(dllexport)
#else
#define GP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
    GP_OK = 0,
    GP_ERR_CONFIG = 2, /* invalid configuration or input file */
    GP_ERR_RUNTIME = 3 /* failure while running */
};

typedef struct gp_sim gp_sim;
typedef struct gp_report gp_report;

GP_API int gp_version(void);
GP_API const char* gp_last_error(void);

/* Configuration is a JSON object; see docs/README for the schema. An empty
 * or NULL string selects the defaults. */
GP_API gp_sim* gp_sim_create(const char* config_json);
GP_API gp_sim* gp_sim_create_from_file(const char* path);
/* Overrides one manifest field, e.g. gp_sim_override(s, "k", "5"). */
GP_API int gp_sim_override(gp_sim* sim, const char* key, const char* value);
GP_API const char* gp_sim_config_json(gp_sim* sim);
GP_API gp_report* gp_sim_run(gp_sim* sim);
GP_API void gp_sim_destroy(gp_sim* sim);

/* The returned strings stay owned by the report. */
GP_API const char* gp_report_summary_json(gp_report* rep);
GP_API const char* gp_report_manifest_json(gp_report* rep);
GP_API int gp_report_write_artifacts(gp_report* rep, const char* dir);
/* Summary metric by name ("saving_pct", "fork_rate_first", ...); *found set
 * to 0 when the name is unknown. */
GP_API double gp_report_metric(gp_report* rep, const char* name, int* found);
GP_API void gp_report_destroy(gp_report* rep);

/* Analyses. Returned buffers are released with gp_string_free. */
GP_API char* gp_timeout_curve_csv(double lambda, const double* ps, size_t n_ps);
GP_API char* gp_share_redistribution_csv(const char* trace_csv_path, uint64_t seed,
                                         int uniform_redistribution);
GP_API char* gp_eta_study_csv(const int* ks, size_t n_ks, int miners, double lambda_per_s,
                              double top_holders_pct, double held_share_pct, uint64_t seed,
                              int64_t epochs);
GP_API double gp_fork_probability(const char* form, double param, double p_b, int* ok);
GP_API double gp_censorship_pow_window(int k, double lambda_per_s);
GP_API char* gp_censorship_csv(const char* blocks_csv_path, double lambda_per_s);
GP_API void gp_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* GREENPOW_H */
