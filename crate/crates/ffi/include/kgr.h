#ifndef KGR_H
#define KGR_H

#include <stddef.h>
#include <stdint.h>

typedef enum KgrStatus {
  KGR_STATUS_OK = 0,
  KGR_STATUS_NULL_POINTER = 1,
  KGR_STATUS_INVALID_UTF8 = 2,
  KGR_STATUS_INVALID_INPUT = 3,
  KGR_STATUS_PANIC = 4,
} KgrStatus;

// A validated k-graph.
typedef struct KgrGraph KgrGraph;

// A cylinder measure on the path space of a [`KgrGraph`].
typedef struct KgrMeasure KgrMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses and validates a graph description.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum KgrStatus kgr_graph_load_json(const char *json, struct KgrGraph **out);

// # Safety
// `graph` must come from [`kgr_graph_load_json`] and not be freed twice.
void kgr_graph_free(struct KgrGraph *graph);

// Number of paths of degree `degree[0..k]`.
//
// # Safety
// `degree` must point to `k` integers.
enum KgrStatus kgr_path_count(const struct KgrGraph *graph,
                              const uint32_t *degree,
                              size_t k,
                              uint64_t *out);

// Parses a measure file for `graph`. The measure keeps the graph alive.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum KgrStatus kgr_measure_load_json(const struct KgrGraph *graph,
                                     const char *json,
                                     struct KgrMeasure **out);

// # Safety
// `measure` must come from [`kgr_measure_load_json`] and not be freed twice.
void kgr_measure_free(struct KgrMeasure *measure);

// `μ(Z(λ))` for a path written as dotted edge names, or a vertex name.
//
// # Safety
// `path` must be a NUL-terminated string.
enum KgrStatus kgr_measure_mass(const struct KgrMeasure *measure, const char *path, double *out);

// Hellinger affinity `H_N = Σ √(μ(Z(ζ))ν(Z(ζ)))` over the atoms of depth `depth`.
//
// # Safety
// Both handles must be live.
enum KgrStatus kgr_hellinger(const struct KgrMeasure *first,
                             const struct KgrMeasure *second,
                             uint32_t depth,
                             double *out);

// Runs the Cuntz-Krieger and projection-valued measure checks of the
// standard representation on `H_ambient` with cap `(cap,…,cap)`. Writes the
// check records as a JSON array to `report` and whether all passed to
// `pass`. Exact arithmetic when `exact` is nonzero.
//
// # Safety
// `report` and `pass` must be writable; free `*report` with
// [`kgr_string_free`].
enum KgrStatus kgr_run_ck(const struct KgrMeasure *measure,
                          uint32_t ambient,
                          uint32_t cap,
                          double tol,
                          int exact,
                          char **report,
                          int *pass);

// Message of the last failed call on this thread, or null. Valid until
// the next call into the library on the same thread.
const char *kgr_last_error_message(void);

// # Safety
// `s` must come from this library and not be freed twice.
void kgr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KGR_H */
