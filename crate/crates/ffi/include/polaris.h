#ifndef POLARIS_H
#define POLARIS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define POLARIS_MPN_CMPN 0

#define POLARIS_MPN_DMPN 1

#define POLARIS_MPN_XMPN 2

#define POLARIS_SCORE_BIC 0

#define POLARIS_SCORE_POLARIS 1

#define POLARIS_SCORE_DIPROG 2

#define POLARIS_FILTER_DEFAULT -1

#define POLARIS_FILTER_OFF 0

#define POLARIS_FILTER_ON 1

typedef enum PolarisStatus {
  POLARIS_STATUS_OK = 0,
  POLARIS_STATUS_NULL_POINTER = 1,
  POLARIS_STATUS_INVALID_ARGUMENT = 2,
  POLARIS_STATUS_IO = 3,
  POLARIS_STATUS_PARSE = 4,
  POLARIS_STATUS_TOO_LARGE = 5,
  POLARIS_STATUS_INFEASIBLE = 6,
  POLARIS_STATUS_MISMATCH = 7,
  POLARIS_STATUS_BUFFER_TOO_SMALL = 8,
  POLARIS_STATUS_PANIC = 9,
} PolarisStatus;

/*
 Binary samples with named variables.
 */
typedef struct PolarisDataset PolarisDataset;

/*
 Outcome of [`polaris_learn`].
 */
typedef struct PolarisLearnResult PolarisLearnResult;

/*
 A monotonic progression network: structure, CPDs, type and epsilon.
 */
typedef struct PolarisNetwork PolarisNetwork;

typedef struct PolarisLearnOptions {
  /*
   One of the `POLARIS_MPN_*` constants.
   */
  uint32_t mpn_type;
  /*
   One of the `POLARIS_SCORE_*` constants.
   */
  uint32_t score;
  /*
   Noise level; required by the DiProg score, ignored otherwise.
   */
  double epsilon;
  size_t max_parents;
  double pseudocount;
  /*
   One of the `POLARIS_FILTER_*` constants.
   */
  int32_t filter;
  /*
   Threshold used when `filter` is `POLARIS_FILTER_ON`.
   */
  double alpha_threshold;
} PolarisLearnOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *polaris_version(void);

/*
 Message of the last failed call on this thread, or NULL. The pointer
 stays valid until the next call into the library on the same thread.
 */
const char *polaris_last_error(void);

/*
 Frees a string returned by this library. Accepts NULL.

 # Safety
 `s` must be NULL or a string produced by this library and not yet freed.
 */
void polaris_string_free(char *s);

/*
 Generates a random network with default CPD ranges for `epsilon`.

 # Safety
 `out` must be a valid location for a handle pointer.
 */
enum PolarisStatus polaris_network_generate(size_t n,
                                            uint32_t mpn,
                                            double epsilon,
                                            size_t max_parents,
                                            bool forbid_transitive,
                                            bool faithful,
                                            uint64_t seed,
                                            struct PolarisNetwork **out);

/*
 Parses a network from its JSON text.

 # Safety
 `json` must be NUL-terminated; `out` must be writable.
 */
enum PolarisStatus polaris_network_from_json(const char *json, struct PolarisNetwork **out);

/*
 Serializes a network to JSON; free the result with `polaris_string_free`.

 # Safety
 `network` must be a live handle; `out` must be writable.
 */
enum PolarisStatus polaris_network_to_json(const struct PolarisNetwork *network, char **out);

/*
 # Safety
 `network` must be NULL or a live handle; it is invalid afterwards.
 */
void polaris_network_free(struct PolarisNetwork *network);

/*
 Number of variables; 0 for NULL.

 # Safety
 `network` must be NULL or a live handle.
 */
size_t polaris_network_node_count(const struct PolarisNetwork *network);

/*
 Number of edges; 0 for NULL.

 # Safety
 `network` must be NULL or a live handle.
 */
size_t polaris_network_edge_count(const struct PolarisNetwork *network);

/*
 Copies the sorted edge list into `from`/`to`, each holding `capacity`
 entries. `written` receives the edge count even when the buffers are
 too small.

 # Safety
 Buffers must hold `capacity` elements; `written` must be writable.
 */
enum PolarisStatus polaris_network_edges(const struct PolarisNetwork *network,
                                         size_t *from,
                                         size_t *to,
                                         size_t capacity,
                                         size_t *written);

/*
 Draws `m` samples, seeded by `seed`.

 # Safety
 `network` must be a live handle; `out` must be writable.
 */
enum PolarisStatus polaris_network_sample(const struct PolarisNetwork *network,
                                          size_t m,
                                          uint64_t seed,
                                          struct PolarisDataset **out);

/*
 Builds a dataset from `m * n` row-major 0/1 bytes; variables are named
 `X0`, `X1`, ...

 # Safety
 `values` must point to `m * n` readable bytes; `out` must be writable.
 */
enum PolarisStatus polaris_dataset_from_values(const uint8_t *values,
                                               size_t m,
                                               size_t n,
                                               struct PolarisDataset **out);

/*
 Parses CSV text: a header of names, then rows of 0/1.

 # Safety
 `csv` must be NUL-terminated; `out` must be writable.
 */
enum PolarisStatus polaris_dataset_from_csv(const char *csv, struct PolarisDataset **out);

/*
 Serializes a dataset as CSV; free the result with `polaris_string_free`.

 # Safety
 `dataset` must be a live handle; `out` must be writable.
 */
enum PolarisStatus polaris_dataset_to_csv(const struct PolarisDataset *dataset, char **out);

/*
 Sample count; 0 for NULL.

 # Safety
 `dataset` must be NULL or a live handle.
 */
size_t polaris_dataset_sample_count(const struct PolarisDataset *dataset);

/*
 Variable count; 0 for NULL.

 # Safety
 `dataset` must be NULL or a live handle.
 */
size_t polaris_dataset_variable_count(const struct PolarisDataset *dataset);

/*
 # Safety
 `dataset` must be NULL or a live handle; it is invalid afterwards.
 */
void polaris_dataset_free(struct PolarisDataset *dataset);

/*
 Default options: three parents, pseudocount 1, alpha filter for POLARIS only.
 */
struct PolarisLearnOptions polaris_learn_options_default(uint32_t mpn_type, uint32_t score);

/*
 Learns a structure by exact search.

 # Safety
 `dataset` must be a live handle; `options` and `out` must be valid.
 */
enum PolarisStatus polaris_learn(const struct PolarisDataset *dataset,
                                 const struct PolarisLearnOptions *options,
                                 struct PolarisLearnResult **out);

/*
 Total score of the learned structure; NaN for NULL.

 # Safety
 `result` must be NULL or a live handle.
 */
double polaris_learn_result_score(const struct PolarisLearnResult *result);

/*
 Number of learned edges; 0 for NULL.

 # Safety
 `result` must be NULL or a live handle.
 */
size_t polaris_learn_result_edge_count(const struct PolarisLearnResult *result);

/*
 Learned edges with their confidence (score drop when the edge is
 removed). `confidence` may be NULL.

 # Safety
 Non-null buffers must hold `capacity` elements; `written` must be writable.
 */
enum PolarisStatus polaris_learn_result_edges(const struct PolarisLearnResult *result,
                                              size_t *from,
                                              size_t *to,
                                              double *confidence,
                                              size_t capacity,
                                              size_t *written);

/*
 Fits CPDs for the learned structure and returns a network handle.

 # Safety
 `result` and `dataset` must be live handles; `out` must be writable.
 */
enum PolarisStatus polaris_learn_result_to_network(const struct PolarisLearnResult *result,
                                                   const struct PolarisDataset *dataset,
                                                   struct PolarisNetwork **out);

/*
 # Safety
 `result` must be NULL or a live handle; it is invalid afterwards.
 */
void polaris_learn_result_free(struct PolarisLearnResult *result);

/*
 Scores the structure of `network` against `dataset`.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum PolarisStatus polaris_network_score(const struct PolarisDataset *dataset,
                                         const struct PolarisNetwork *network,
                                         uint32_t mpn,
                                         uint32_t score,
                                         double epsilon,
                                         double pseudocount,
                                         double *out);

/*
 Directed-edge precision and recall of `learned` against `truth`.

 # Safety
 Handles must be live; `precision` and `recall` must be writable.
 */
enum PolarisStatus polaris_precision_recall(const struct PolarisNetwork *truth,
                                            const struct PolarisNetwork *learned,
                                            double *precision,
                                            double *recall);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLARIS_H */
