#ifndef SENMAP_H
#define SENMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SENMAP_OK 0

#define SENMAP_ERR_NULL 1

#define SENMAP_ERR_PANIC 2

#define SENMAP_ERR_UTF8 3

#define SENMAP_ERR_BUFFER 4

#define SENMAP_ERR_INVALID_ARCHITECTURE 10

#define SENMAP_ERR_SHAPE 11

#define SENMAP_ERR_LABEL_RANGE 12

#define SENMAP_ERR_RANGE 13

#define SENMAP_ERR_EMPTY_DATA 14

#define SENMAP_ERR_CONFIG 15

#define SENMAP_ERR_INCOMPLETE_TABLE 16

#define SENMAP_ERR_INCOMPLETE_MAP 17

#define SENMAP_ERR_DUPLICATE_ENTRY 18

#define SENMAP_ERR_INCOMPLETE_MAPSET 19

#define SENMAP_ERR_UNKNOWN_LANGUAGE 20

#define SENMAP_ERR_INVENTORY 21

#define SENMAP_ERR_FRACTION 22

#define SENMAP_ERR_SPEC 23

#define SENMAP_ERR_MISSING_BASELINE 24

#define SENMAP_ERR_PARSE 25

#define SENMAP_ERR_FORMAT 26

#define SENMAP_ERR_IO 27

/**
 * Total map between two label inventories.
 */
typedef struct SenmapLabelMap SenmapLabelMap;

/**
 * Shared hidden stack with one output head per language.
 */
typedef struct SenmapMultiHead SenmapMultiHead;

/**
 * Single-head feed-forward network.
 */
typedef struct SenmapNetwork SenmapNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *senmap_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *senmap_version(void);

/**
 * Seeded network with layer widths `dims[0..n_dims]` (input first).
 *
 * # Safety
 * `dims` must point to `n_dims` values and `out` must be writable.
 */
int32_t senmap_network_init(const size_t *dims,
                            size_t n_dims,
                            uint64_t seed,
                            struct SenmapNetwork **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
int32_t senmap_network_load(const char *path_, struct SenmapNetwork **out);

/**
 * # Safety
 * `net` must come from this library; `path` must be NUL-terminated.
 */
int32_t senmap_network_save(const struct SenmapNetwork *net, const char *path_);

/**
 * # Safety
 * `net` must come from this library and not be used afterwards. Null is ignored.
 */
void senmap_network_free(struct SenmapNetwork *net);

/**
 * Input width, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or come from this library.
 */
size_t senmap_network_input_dim(const struct SenmapNetwork *net);

/**
 * Output width, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or come from this library.
 */
size_t senmap_network_output_dim(const struct SenmapNetwork *net);

/**
 * Writes the output posterior of one frame into `probs[0..n_probs]`, which
 * must hold at least the output width.
 *
 * # Safety
 * Pointers must be valid for the given lengths.
 */
int32_t senmap_network_forward(const struct SenmapNetwork *net,
                               const double *features,
                               size_t n_features,
                               double *probs,
                               size_t n_probs);

/**
 * Most probable label of one frame (lowest index on ties).
 *
 * # Safety
 * Pointers must be valid for the given lengths; `label` writable.
 */
int32_t senmap_network_predict(const struct SenmapNetwork *net,
                               const double *features,
                               size_t n_features,
                               size_t *label);

/**
 * Frame error rate in percent over `n_frames` row-major frames of width
 * `dim` with reference `labels`.
 *
 * # Safety
 * `features` must hold `n_frames * dim` values and `labels` `n_frames`.
 */
int32_t senmap_frame_error_rate(const struct SenmapNetwork *net,
                                const double *features,
                                const size_t *labels,
                                size_t n_frames,
                                size_t dim,
                                double *out);

/**
 * # Safety
 * `path` must be NUL-terminated and `out` writable.
 */
int32_t senmap_multihead_load(const char *path_, struct SenmapMultiHead **out);

/**
 * # Safety
 * `net` must come from this library and not be used afterwards. Null is ignored.
 */
void senmap_multihead_free(struct SenmapMultiHead *net);

/**
 * Number of heads, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or come from this library.
 */
size_t senmap_multihead_num_heads(const struct SenmapMultiHead *net);

/**
 * Posterior of the head serving `language`.
 *
 * # Safety
 * Pointers must be valid for the given lengths.
 */
int32_t senmap_multihead_forward(const struct SenmapMultiHead *net,
                                 size_t language,
                                 const double *features,
                                 size_t n_features,
                                 double *probs,
                                 size_t n_probs);

/**
 * Single-head network made of the shared stack and `language`'s head.
 *
 * # Safety
 * `net` must come from this library and `out` be writable.
 */
int32_t senmap_multihead_prune(const struct SenmapMultiHead *net,
                               size_t language,
                               struct SenmapNetwork **out);

/**
 * Senone map from a row-major `n_source x n_target` count matrix.
 *
 * # Safety
 * `counts` must hold `n_source * n_target` values; `out` writable.
 */
int32_t senmap_senone_map_from_counts(const uint64_t *counts,
                                      size_t n_source,
                                      size_t n_target,
                                      size_t source_task,
                                      size_t target_task,
                                      struct SenmapLabelMap **out);

/**
 * Phone map from senone counts and the senone-to-phone tables of both
 * languages (`g_source[n_source]` with values below `source_phones`, and
 * likewise for the target).
 *
 * # Safety
 * Arrays must hold the stated number of values; `out` writable.
 */
int32_t senmap_phone_map_from_counts(const uint64_t *counts,
                                     size_t n_source,
                                     size_t n_target,
                                     const size_t *g_source,
                                     size_t source_phones,
                                     const size_t *g_target,
                                     size_t target_phones,
                                     struct SenmapLabelMap **out);

/**
 * Reads a map file between senone inventories of the given sizes.
 *
 * # Safety
 * `path` must be NUL-terminated and `out` writable.
 */
int32_t senmap_map_load(const char *path_,
                        size_t source_size,
                        size_t target_size,
                        struct SenmapLabelMap **out);

/**
 * # Safety
 * `map` must come from this library; `path` must be NUL-terminated.
 */
int32_t senmap_map_save(const struct SenmapLabelMap *map, const char *path_);

/**
 * # Safety
 * `map` must come from this library and not be used afterwards. Null is ignored.
 */
void senmap_map_free(struct SenmapLabelMap *map);

/**
 * Size of the source inventory, or 0 for a null handle.
 *
 * # Safety
 * `map` must be null or come from this library.
 */
size_t senmap_map_len(const struct SenmapLabelMap *map);

/**
 * # Safety
 * `map` must come from this library and `target` be writable.
 */
int32_t senmap_map_get(const struct SenmapLabelMap *map, size_t source, size_t *target);

/**
 * Maps `n` labels from `input` into `output`. The buffers may alias.
 *
 * # Safety
 * Both arrays must hold `n` values.
 */
int32_t senmap_map_apply(const struct SenmapLabelMap *map,
                         const size_t *input,
                         size_t *output,
                         size_t n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SENMAP_H */
