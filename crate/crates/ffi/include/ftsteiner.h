#ifndef FTSTEINER_H
#define FTSTEINER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FtsStatus {
  FTS_STATUS_OK = 0,
  FTS_STATUS_NULL_POINTER = 1,
  FTS_STATUS_INVALID_ARGUMENT = 2,
  FTS_STATUS_PARSE = 3,
  FTS_STATUS_DECOMPOSITION = 4,
  FTS_STATUS_MALFORMED = 5,
  FTS_STATUS_LABEL_MIX = 6,
  FTS_STATUS_INTERNAL = 7,
} FtsStatus;

typedef enum FtsScheme {
  FTS_SCHEME_MAIN = 0,
  FTS_SCHEME_WARMUP = 1,
} FtsScheme;

/**
 * A graph together with its terminal set.
 */
typedef struct FtsGraph FtsGraph;

typedef struct FtsLabeling FtsLabeling;

/**
 * Bytes owned by the library; release with [`fts_buffer_free`].
 */
typedef struct FtsBuffer {
  uint8_t *data;
  size_t len;
} FtsBuffer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *fts_last_error(void);

/**
 * Parses the text instance format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out_graph` a valid pointer.
 */
enum FtsStatus fts_graph_from_text(const char *text, struct FtsGraph **out_graph);

/**
 * Builds a graph from `m` edges given as `2m` endpoint ids and `k` terminals.
 *
 * # Safety
 * `edges` must hold `2 * m` values, `terminals` `k` values, and `out_graph`
 * must be a valid pointer.
 */
enum FtsStatus fts_graph_new(size_t n,
                             const uint32_t *edges,
                             size_t m,
                             const uint32_t *terminals,
                             size_t k,
                             struct FtsGraph **out_graph);

/**
 * # Safety
 * `graph` must be null or a handle from this library, not yet freed.
 */
void fts_graph_free(struct FtsGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle and `out_n` a valid pointer.
 */
enum FtsStatus fts_graph_vertex_count(const struct FtsGraph *graph, size_t *out_n);

/**
 * Whether deleting `faults` separates two surviving terminals.
 *
 * # Safety
 * `graph` must be a live handle, `faults` must hold `len` ids and
 * `out_cut` must be a valid pointer.
 */
enum FtsStatus fts_is_steiner_cut(const struct FtsGraph *graph,
                                  const uint32_t *faults,
                                  size_t len,
                                  bool *out_cut);

/**
 * Labels every vertex for fault sets of up to `f` vertices.
 *
 * # Safety
 * `graph` must be a live handle and `out_labeling` a valid pointer.
 */
enum FtsStatus fts_labeling_build(const struct FtsGraph *graph,
                                  size_t f,
                                  enum FtsScheme scheme,
                                  struct FtsLabeling **out_labeling);

/**
 * # Safety
 * `labeling` must be null or a handle from this library, not yet freed.
 */
void fts_labeling_free(struct FtsLabeling *labeling);

/**
 * # Safety
 * `labeling` must be a live handle and `out_len` a valid pointer.
 */
enum FtsStatus fts_labeling_len(const struct FtsLabeling *labeling, size_t *out_len);

/**
 * Answers a query from the labels of `faults`.
 *
 * # Safety
 * `labeling` must be a live handle, `faults` must hold `len` ids and
 * `out_cut` must be a valid pointer.
 */
enum FtsStatus fts_labeling_query(const struct FtsLabeling *labeling,
                                  const uint32_t *faults,
                                  size_t len,
                                  bool *out_cut);

/**
 * Serialized label of `vertex`.
 *
 * # Safety
 * `labeling` must be a live handle and `out_buf` a valid pointer.
 */
enum FtsStatus fts_label_serialize(const struct FtsLabeling *labeling,
                                   uint32_t vertex,
                                   struct FtsBuffer *out_buf);

/**
 * # Safety
 * `buf` must come from [`fts_label_serialize`] and not be freed twice.
 */
void fts_buffer_free(struct FtsBuffer buf);

/**
 * Answers a query from serialized labels alone, without any graph.
 *
 * # Safety
 * `labels` and `lens` must each hold `count` entries, each `labels[i]`
 * pointing to `lens[i]` bytes; `out_cut` must be a valid pointer.
 */
enum FtsStatus fts_query_serialized(enum FtsScheme scheme,
                                    const uint8_t *const *labels,
                                    const size_t *lens,
                                    size_t count,
                                    bool *out_cut);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FTSTEINER_H */
