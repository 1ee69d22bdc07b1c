/*
 * tgforge: 3D hierarchical force-directed layout and filtering for typed
 * directed theory graphs.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a tgf_status; on
 * failure, tgf_last_error() describes the problem and tgf_last_error_id()
 * names the offending node, edge, kind or parameter (empty if none). Both
 * are per-thread and valid until the next failing call on that thread.
 *
 * Strings returned through char** out-parameters are UTF-8, NUL-terminated,
 * and must be released with tgf_string_free().
 */
#ifndef TGFORGE_TGFORGE_H
#define TGFORGE_TGFORGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TGFORGE_BUILDING)
#    define TGF_API __declspec(dllexport)
#  else
#    define TGF_API __declspec(dllimport)
#  endif
#else
#  define TGF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tgf_status {
  TGF_OK = 0,
  TGF_ERR_PARSE = 1,      /* malformed JSON */
  TGF_ERR_SCHEMA = 2,     /* well-formed JSON of the wrong shape */
  TGF_ERR_REFERENCE = 3,  /* dangling node/kind reference */
  TGF_ERR_DUPLICATE = 4,  /* repeated id */
  TGF_ERR_SELF_LOOP = 5,
  TGF_ERR_INPUT = 6,      /* invalid argument or parameter */
  TGF_ERR_IO = 7,         /* file or socket failure */
  TGF_ERR_INTERNAL = 8
} tgf_status;

typedef struct tgf_graph tgf_graph;
typedef struct tgf_layout tgf_layout;
typedef struct tgf_server tgf_server;

TGF_API const char *tgf_version(void);
TGF_API const char *tgf_last_error(void);
TGF_API const char *tgf_last_error_id(void);
/* Stable lower_snake_case name for a status, e.g. "reference_error". */
TGF_API const char *tgf_status_name(tgf_status status);
TGF_API void tgf_string_free(char *str);

/* ---- graphs ---------------------------------------------------------- */

TGF_API tgf_status tgf_graph_parse(const char *json, size_t length, int allow_self_loops,
                                   tgf_graph **out);
TGF_API tgf_status tgf_graph_load(const char *path, int allow_self_loops, tgf_graph **out);
TGF_API void tgf_graph_free(tgf_graph *graph);
TGF_API size_t tgf_graph_node_count(const tgf_graph *graph);
TGF_API size_t tgf_graph_edge_count(const tgf_graph *graph);
TGF_API tgf_status tgf_graph_serialize(const tgf_graph *graph, char **out_json);

/* Writes the validation report as JSON. *out_dag_ok (optional) receives 1 when
 * the acyclic-checked edge kinds form a DAG. */
TGF_API tgf_status tgf_graph_validate(const tgf_graph *graph, char **out_report_json,
                                      int *out_dag_ok);

/* ---- layout ---------------------------------------------------------- */

typedef enum tgf_repulsion {
  TGF_REPULSION_BARNES_HUT = 0,
  TGF_REPULSION_DIRECT = 1
} tgf_repulsion;

typedef struct tgf_layout_params {
  double ideal_edge_length;
  double k_repel;
  double k_attract;
  double k_hierarchy;
  double theta;
  int32_t max_iterations;
  double convergence_eps;
  double initial_temperature;
  double cooling_factor;
  uint64_t seed;
  double min_distance;
  tgf_repulsion repulsion;
} tgf_layout_params;

TGF_API void tgf_layout_params_default(tgf_layout_params *params);
/* Overlays the keys of a JSON object (camelCase names, as in layout files)
 * onto *params and validates the result. */
TGF_API tgf_status tgf_layout_params_merge_json(tgf_layout_params *params, const char *json,
                                                size_t length);
TGF_API tgf_status tgf_layout_params_validate(const tgf_layout_params *params);
TGF_API tgf_status tgf_layout_params_to_json(const tgf_layout_params *params, char **out_json);

typedef struct tgf_progress {
  int32_t iteration;
  double max_displacement;
  double mean_edge_length;
  double temperature;
} tgf_progress;

/* Called once per iteration on the calling thread. Return nonzero to stop the
 * run early; the positions reached so far are returned. */
typedef int (*tgf_progress_fn)(const tgf_progress *progress, void *user_data);

/* threads = 0 uses every core; the result does not depend on it. */
TGF_API tgf_status tgf_layout_run(const tgf_graph *graph, const tgf_layout_params *params,
                                  unsigned threads, tgf_progress_fn on_progress, void *user_data,
                                  tgf_layout **out);
TGF_API tgf_status tgf_layout_initial(const tgf_graph *graph, const tgf_layout_params *params,
                                      tgf_layout **out);
TGF_API tgf_status tgf_layout_parse(const tgf_graph *graph, const char *json, size_t length,
                                    tgf_layout **out);
TGF_API void tgf_layout_free(tgf_layout *layout);
TGF_API int tgf_layout_converged(const tgf_layout *layout);
TGF_API int32_t tgf_layout_iterations(const tgf_layout *layout);
/* Copies up to capacity xyz triples (3 doubles per node, graph node order). */
TGF_API size_t tgf_layout_positions(const tgf_layout *layout, double *xyz, size_t capacity);
TGF_API tgf_status tgf_layout_serialize(const tgf_graph *graph, const tgf_layout *layout,
                                        char **out_json);
TGF_API tgf_status tgf_layout_metrics(const tgf_graph *graph, const tgf_layout *layout,
                                      char **out_json);

/* ---- exploration ----------------------------------------------------- */

TGF_API tgf_status tgf_layout_rotate(const tgf_layout *layout, double angle, tgf_layout **out);
TGF_API tgf_status tgf_layout_scale(const tgf_layout *layout, double factor, const double pivot[3],
                                    tgf_layout **out);

/* Applies a filter spec ({"enabledKinds", "focus", "cutoff"}) and returns the
 * visible ids as {"nodes": [...], "edges": [...]}. layout may be NULL unless
 * the spec has a cutoff. */
TGF_API tgf_status tgf_filter_visible(const tgf_graph *graph, const tgf_layout *layout,
                                      const char *filter_json, size_t length, char **out_json);
/* As tgf_filter_visible, but materialises the visible part as a new graph
 * and, when layout is given and out_layout is non-NULL, a matching layout. */
TGF_API tgf_status tgf_filter_apply(const tgf_graph *graph, const tgf_layout *layout,
                                    const char *filter_json, size_t length, tgf_graph **out_graph,
                                    tgf_layout **out_layout);

/* ---- viewer service -------------------------------------------------- */

/* Binds host:port (port 0 picks a free port) without serving yet. web_root may
 * be NULL or empty. The graph is copied; the caller may free it afterwards. */
TGF_API tgf_status tgf_server_create(const tgf_graph *graph, const char *host, int port,
                                     const char *web_root, unsigned threads, tgf_server **out);
TGF_API int tgf_server_port(const tgf_server *server);
/* Blocks until tgf_server_stop() is called from another thread. */
TGF_API tgf_status tgf_server_run(tgf_server *server);
TGF_API void tgf_server_stop(tgf_server *server);
TGF_API void tgf_server_free(tgf_server *server);

#ifdef __cplusplus
}
#endif

#endif /* TGFORGE_TGFORGE_H */
