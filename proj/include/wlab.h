/* C interface to the Willmore bubble-tree laboratory. Opaque handles, status
 * codes, and UTF-8 JSON/CSV payloads; every entry point is safe to call from
 * plain C. Thread safety: handles are confined to one thread at a time; the
 * error message buffer is thread-local. */
#ifndef WLAB_H
#define WLAB_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  WLAB_OK = 0,
  WLAB_ERR_INVALID_ARGUMENT = 1,
  WLAB_ERR_IO = 2,
  WLAB_ERR_DEGENERATE_METRIC = 3,
  WLAB_ERR_NOT_CONFORMAL = 4,
  WLAB_ERR_QUADRATURE_UNDER_RESOLVED = 5,
  WLAB_ERR_OUT_OF_RANGE = 6,
  WLAB_ERR_POLE_HIT = 7,
  WLAB_ERR_CENTER_ON_SURFACE = 8,
  WLAB_ERR_NON_CONVERGENT = 9,
  WLAB_ERR_AMBIGUOUS_ORDER = 10,
  WLAB_ERR_ZERO_ORDER = 11,
  WLAB_ERR_CYCLE_DETECTED = 12,
  WLAB_ERR_MISMATCH = 13,
  WLAB_ERR_NOT_DOUBLE_TREE = 14,
  WLAB_ERR_NO_ISOMORPHISM = 15,
  WLAB_ERR_INCONSISTENT_BEHAVIOR = 16,
  WLAB_ERR_OVERLAP_COLLISION = 17,
  WLAB_ERR_UNRESOLVED = 18,
  WLAB_ERR_INCONSISTENT_ACROSS_K = 19,
  WLAB_ERR_IC_CENTER_MISCLASSIFIED = 20,
  WLAB_ERR_INTERNAL = 21
} wlab_status;

const char* wlab_status_name(wlab_status s);
/* message of the most recent failure on this thread */
const char* wlab_last_error(void);

typedef struct wlab_immersion wlab_immersion; /* a chart atlas */
typedef struct wlab_graph wlab_graph;         /* a bubble graph */
typedef struct wlab_varifold wlab_varifold;   /* an integral 2-varifold */

typedef struct {
  double willmore;
  double dirichlet;
  double area;
  double volume;
  double isoperimetric;
  double total_mean_curvature;
  double normalized_mean_curvature;
  double gauss_bonnet_residual;
} wlab_functionals;

/* ---- models and measurement ---- */

/* kind_json: {"tag":"P|S|C|IC1|IC2","scale":..,"center":[..],"axis":[..],
 *             "inversion_center":[..],"orientation":+-1}
 * nu/nv/extent 0 and rectangle_atlas 0 select the per-model defaults. */
wlab_status wlab_model_make(const char* kind_json, int nu, int nv, double extent,
                            int rectangle_atlas, wlab_immersion** out);
wlab_status wlab_immersion_load(const char* path, wlab_immersion** out);
wlab_status wlab_immersion_save(const wlab_immersion* imm, const char* path);
void wlab_immersion_free(wlab_immersion* imm);

wlab_status wlab_measure(const wlab_immersion* imm, int genus, wlab_functionals* out);

/* ---- synthesis and detection ---- */

/* family_spec_json: the FamilySpec schema, or {"standard_genus":p,...} */
wlab_status wlab_synth(const char* family_spec_json, const char* out_dir);
wlab_status wlab_analyze(const char* family_dir, double eps, const char* graph_json_out,
                         const char* diagnostics_csv_out);

/* ---- bubble graphs ---- */

wlab_status wlab_graph_load(const char* path, wlab_graph** out);
void wlab_graph_free(wlab_graph* g);
wlab_status wlab_graph_double_tree(const wlab_graph* g, int* pass, char** clause);
wlab_status wlab_graph_catenoid_count(const wlab_graph* g, int* count);
/* behavior_json: {"<vertex>":{"to_infinity":bool,"limit":[x,y,z],
 *                 "relation":"off_image|on_image|at_puncture_image"},...}
 * out_type receives 1..4. */
wlab_status wlab_invert_type(const wlab_graph* g, const char* behavior_json,
                             int* out_type);

/* ---- varifolds (Appendix-C suite) ---- */

wlab_status wlab_varifold_from_immersion(const wlab_immersion* imm, int density,
                                         wlab_varifold** out);
wlab_status wlab_varifold_load(const char* csv_path, wlab_varifold** out);
wlab_status wlab_varifold_save(const wlab_varifold* mu, const char* csv_path);
void wlab_varifold_free(wlab_varifold* mu);

/* JSON report: mass, willmore, density at x0, monotonicity identity residual,
 * Li-Yau gap, pushforward stationarity defect, density transport. Radii run
 * geometrically from r_min to r_max. Free with wlab_string_free. */
wlab_status wlab_varifold_report(const wlab_varifold* mu, const double x0[3],
                                 double r_min, double r_max, char** json_out);

void wlab_string_free(char* s);

/* ---- pipeline ---- */

/* Runs synthesize -> measure -> normalize -> detect -> verify from a key=value
 * config file. all_pass receives 1 only when every check passed. */
wlab_status wlab_pipeline_run(const char* config_path, int* all_pass);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* WLAB_H */
