#ifndef KPKIT_H
#define KPKIT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KpkitExportFormat {
  KPKIT_EXPORT_FORMAT_DOT = 0,
  KPKIT_EXPORT_FORMAT_GRAPHML = 1,
} KpkitExportFormat;

typedef enum KpkitMethod {
  KPKIT_METHOD_NEG = 0,
  KPKIT_METHOD_POS = 1,
} KpkitMethod;

/**
 * Outcome of a call.
 */
typedef enum KpkitStatus {
  KPKIT_STATUS_OK = 0,
  KPKIT_STATUS_NULL_POINTER = 1,
  KPKIT_STATUS_INVALID_UTF8 = 2,
  KPKIT_STATUS_PARSE_ERROR = 3,
  KPKIT_STATUS_INVALID_CONFIG = 4,
  KPKIT_STATUS_UNKNOWN_NODE = 5,
  KPKIT_STATUS_DEGENERATE = 6,
  KPKIT_STATUS_INTERNAL = 7,
} KpkitStatus;

/**
 * Opaque network handle.
 */
typedef struct KpkitGraph KpkitGraph;

/**
 * Opaque key-player result handle.
 */
typedef struct KpkitResult KpkitResult;

/**
 * Fragmentation before and after removing a node set.
 */
typedef struct KpkitDelta {
  double initial;
  double final_;
  double change;
} KpkitDelta;

/**
 * Search parameters. Obtain defaults from [`kpkit_config_default`].
 */
typedef struct KpkitConfig {
  size_t k;
  size_t restarts;
  uint64_t rng_seed;
  uint32_t reach_distance_m;
  size_t max_sweeps;
} KpkitConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *kpkit_version(void);

/**
 * Message for the most recent failure on this thread. Empty if none. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *kpkit_last_error(void);

/**
 * Builds a graph from interaction-log CSV text
 * (`source,target,kind,timestamp`).
 *
 * # Safety
 * `csv` must be a valid C string and `out` a writable pointer.
 */
enum KpkitStatus kpkit_graph_from_interactions_csv(const char *csv, struct KpkitGraph **out);

/**
 * Builds a co-appearance graph from photo-log CSV text
 * (`photo_id,participant,timestamp`).
 *
 * # Safety
 * `csv` must be a valid C string and `out` a writable pointer.
 */
enum KpkitStatus kpkit_graph_from_photos_csv(const char *csv, struct KpkitGraph **out);

/**
 * Builds a graph from parallel arrays of edge endpoints. Nodes are the
 * endpoints that appear.
 *
 * # Safety
 * `sources` and `targets` must each hold `len` valid C strings.
 */
enum KpkitStatus kpkit_graph_from_edges(const char *const *sources,
                                        const char *const *targets,
                                        size_t len,
                                        struct KpkitGraph **out);

/**
 * Attaches a role table (`node_id,role` CSV) used by export coloring.
 *
 * # Safety
 * `g` must be a live graph handle and `csv` a valid C string.
 */
enum KpkitStatus kpkit_graph_set_roles_csv(struct KpkitGraph *g, const char *csv);

/**
 * Releases a graph. Null is ignored.
 *
 * # Safety
 * `g` must come from a `kpkit_graph_*` constructor and not be used again.
 */
void kpkit_graph_free(struct KpkitGraph *g);

/**
 * Node count, 0 for null.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t kpkit_graph_node_count(const struct KpkitGraph *g);

/**
 * Edge count, 0 for null.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t kpkit_graph_edge_count(const struct KpkitGraph *g);

/**
 * Share of node pairs that cannot reach each other.
 *
 * # Safety
 * `g` must be a live graph handle and `out` writable.
 */
enum KpkitStatus kpkit_graph_fragmentation(const struct KpkitGraph *g, double *out);

/**
 * Edge density.
 *
 * # Safety
 * `g` must be a live graph handle and `out` writable.
 */
enum KpkitStatus kpkit_graph_density(const struct KpkitGraph *g, double *out);

/**
 * Fragmentation change from removing `nodes`.
 *
 * # Safety
 * `g` must be a live graph handle, `nodes` must hold `len` valid C strings
 * and `out` must be writable.
 */
enum KpkitStatus kpkit_removal_impact(const struct KpkitGraph *g,
                                      const char *const *nodes,
                                      size_t len,
                                      struct KpkitDelta *out);

/**
 * Default search parameters.
 */
struct KpkitConfig kpkit_config_default(void);

/**
 * Runs the restarted greedy search.
 *
 * # Safety
 * `g` must be a live graph handle, `cfg` readable and `out` writable.
 */
enum KpkitStatus kpkit_select_key_players(const struct KpkitGraph *g,
                                          enum KpkitMethod method,
                                          const struct KpkitConfig *cfg,
                                          struct KpkitResult **out);

/**
 * Releases a result. Null is ignored.
 *
 * # Safety
 * `r` must come from [`kpkit_select_key_players`] and not be used again.
 */
void kpkit_result_free(struct KpkitResult *r);

/**
 * Fit of the chosen set, NaN for null.
 *
 * # Safety
 * `r` must be null or a live result handle.
 */
double kpkit_result_fit(const struct KpkitResult *r);

/**
 * Number of chosen nodes, 0 for null.
 *
 * # Safety
 * `r` must be null or a live result handle.
 */
size_t kpkit_result_size(const struct KpkitResult *r);

/**
 * The `i`-th chosen node in identifier order, or null if out of range. The
 * string is owned by the result.
 *
 * # Safety
 * `r` must be null or a live result handle.
 */
const char *kpkit_result_node(const struct KpkitResult *r, size_t i);

/**
 * Method the result was computed with.
 *
 * # Safety
 * `r` must be a live result handle.
 */
enum KpkitStatus kpkit_result_method(const struct KpkitResult *r, enum KpkitMethod *out);

/**
 * Renders the graph as DOT or GraphML, highlighting the chosen set of
 * `highlight` if non-null. Free the string with [`kpkit_string_free`].
 *
 * # Safety
 * `g` must be a live graph handle, `highlight` null or a live result handle,
 * and `out` writable.
 */
enum KpkitStatus kpkit_graph_export(const struct KpkitGraph *g,
                                    const struct KpkitResult *highlight,
                                    enum KpkitExportFormat format,
                                    char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from [`kpkit_graph_export`] and not be used again.
 */
void kpkit_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KPKIT_H */
