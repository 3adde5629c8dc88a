#ifndef SPDETAYLOR_H
#define SPDETAYLOR_H

#include <stddef.h>
#include <stdint.h>

#if defined(SPT_BUILDING_LIBRARY)
#define SPT_API __attribute__((visibility("default")))
#else
#define SPT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes. */
typedef enum spt_status
{
    SPT_OK = 0,
    SPT_ERROR = 1,            /* configuration or runtime error */
    SPT_TREE_ERROR = 2,       /* invalid tree operation */
    SPT_ASSERTION_FAILED = 3  /* acceptance check failed under --assert */
} spt_status;

typedef enum spt_verdict
{
    SPT_CONVERGES = 0,
    SPT_DIVERGES = 1,
    SPT_UNKNOWN = 2
} spt_verdict;

typedef struct spt_wood spt_wood;
typedef struct spt_model spt_model;

/* Message and error kind of the last failure on this thread; never NULL. */
SPT_API const char* spt_last_error(void);
SPT_API const char* spt_last_error_kind(void);
/* 1-based failing step of the last derivation error, 0 otherwise. */
SPT_API size_t spt_last_error_step(void);

SPT_API const char* spt_version(void);
SPT_API void spt_string_free(char* s);

/* Replays "(2,1) (4,1)" from the initial wood. */
SPT_API spt_status spt_wood_derive(const char* path, spt_wood** out);
SPT_API void spt_wood_free(spt_wood* w);
SPT_API size_t spt_wood_tree_count(const spt_wood* w);
/* "{(i,j),...}" */
SPT_API spt_status spt_wood_active_nodes(const spt_wood* w, char** out);
SPT_API spt_status spt_wood_order(const spt_wood* w, double gamma, double delta, double* value,
                                  size_t* witness);
/* Symbolic order of tree `index` (1-based), e.g. "2 + g + d". */
SPT_API spt_status spt_wood_tree_order(const spt_wood* w, size_t index, char** out);
/* format: "ascii" or "dot". */
SPT_API spt_status spt_wood_render(const spt_wood* w, const char* format, char** out);

/* preset: heat1d (size = modes), trace3d (modes per axis), sode (dimension). */
SPT_API spt_status spt_model_create(const char* preset, size_t size, const char* nonlinearity,
                                    spt_model** out);
SPT_API void spt_model_free(spt_model* m);
SPT_API size_t spt_model_dim(const spt_model* m);
/* Copies min(n, dim) eigenvalues. */
SPT_API spt_status spt_model_eigenvalues(const spt_model* m, double* out, size_t n);
/* partial_sums must hold `terms` values. */
SPT_API spt_status spt_model_assumption3(const spt_model* m, double gamma, size_t terms,
                                         double* partial_sums, spt_verdict* verdict);

typedef struct spt_run_options
{
    const char* config; /* path to the JSON config */
    int has_seed;
    uint64_t seed;
    size_t threads;     /* 0 keeps the config value */
    const char* out;    /* NULL keeps the config value */
    int assert_checks;
    int identity_check;
} spt_run_options;

SPT_API spt_status spt_run_simulate(const spt_run_options* opt);
SPT_API spt_status spt_run_converge(const spt_run_options* opt);

#ifdef __cplusplus
}
#endif

#endif
