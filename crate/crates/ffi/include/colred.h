#ifndef COLRED_H
#define COLRED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ColredStatus {
  COLRED_STATUS_OK = 0,
  COLRED_STATUS_NULL_POINTER = 1,
  COLRED_STATUS_INVALID_ARGUMENT = 2,
  COLRED_STATUS_PARSE = 3,
  /**
   * A construction would exceed the configured vertex cap.
   */
  COLRED_STATUS_CAP_EXCEEDED = 4,
  /**
   * The computation ran but failed, e.g. a simulation step error.
   */
  COLRED_STATUS_FAILED = 5,
  COLRED_STATUS_PANIC = 6,
} ColredStatus;

typedef enum ColredAlgo {
  COLRED_ALGO_LINIAL = 0,
  COLRED_ALGO_LINIAL_FULL = 1,
  COLRED_ALGO_KW = 2,
  COLRED_ALGO_DELTA1 = 3,
} ColredAlgo;

typedef enum ColredDelivery {
  COLRED_DELIVERY_SET = 0,
  COLRED_DELIVERY_MULTISET = 1,
} ColredDelivery;

typedef enum ColredFamily {
  COLRED_FAMILY_NH1_MULTISET = 0,
  COLRED_FAMILY_NH1_SET = 1,
  COLRED_FAMILY_NSL = 2,
  COLRED_FAMILY_NT = 3,
  COLRED_FAMILY_NTILDE = 4,
} ColredFamily;

/**
 * Output colors of a simulation.
 */
typedef struct ColredColoring ColredColoring;

/**
 * A tree or general graph with a proper initial coloring.
 */
typedef struct ColredGraph ColredGraph;

/**
 * A neighborhood graph.
 */
typedef struct ColredNbhd ColredNbhd;

/**
 * Chromatic bracket returned by [`colred_nbhd_chi`].
 */
typedef struct ColredChi {
  size_t lower;
  size_t upper;
  bool exact;
} ColredChi;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *colred_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *colred_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void colred_string_free(char *s);

/**
 * Random tree on `n` nodes, maximum degree `delta`, proper colors from `[1, m]`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ColredStatus colred_tree_random(size_t n,
                                     size_t delta,
                                     uint32_t m,
                                     uint64_t seed,
                                     struct ColredGraph **out);

/**
 * Parses a graph from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ColredStatus colred_graph_from_json(const char *json, struct ColredGraph **out);

/**
 * Writes the JSON form of `g` to `*out`; free it with [`colred_string_free`].
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum ColredStatus colred_graph_to_json(const struct ColredGraph *g, char **out);

/**
 * Node count of `g`, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t colred_graph_node_count(const struct ColredGraph *g);

/**
 * # Safety
 * `g` must be null or a handle from this library, not freed before.
 */
void colred_graph_free(struct ColredGraph *g);

/**
 * Runs a reduction program on `g`, using the graph's own `m` and degree cap.
 * `algo` is a [`ColredAlgo`] and `delivery` a [`ColredDelivery`].
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum ColredStatus colred_color(const struct ColredGraph *g,
                               uint32_t algo,
                               uint32_t delivery,
                               struct ColredColoring **out);

/**
 * Number of colored nodes, or 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
size_t colred_coloring_len(const struct ColredColoring *c);

/**
 * Declared palette size, or 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
uint32_t colred_coloring_palette(const struct ColredColoring *c);

/**
 * Copies the colors into `buf`, which must hold `len >= colred_coloring_len(c)` entries.
 *
 * # Safety
 * `c` must be a live handle and `buf` valid for `len` writes.
 */
enum ColredStatus colred_coloring_colors(const struct ColredColoring *c, uint32_t *buf, size_t len);

/**
 * # Safety
 * `c` must be null or a handle from this library, not freed before.
 */
void colred_coloring_free(struct ColredColoring *c);

/**
 * Sets `*proper` to whether `c` is a proper coloring of `g` within its palette.
 *
 * # Safety
 * `g`, `c` must be live handles and `proper` a valid pointer.
 */
enum ColredStatus colred_validate_proper(const struct ColredGraph *g,
                                         const struct ColredColoring *c,
                                         bool *proper);

/**
 * Round lower bound for `C·Δ^(1+η)` colors.
 *
 * # Safety
 * `rounds` must be a valid pointer.
 */
enum ColredStatus colred_lower_bound_rounds(double delta, double c, double eta, uint64_t *rounds);

/**
 * Builds a neighborhood graph of the [`ColredFamily`] `family`. `bound` is Δ for NH1 and NSL, D for NT and Ñ;
 * `r` is ignored for NH1. `cap` bounds the vertex count of every level.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ColredStatus colred_nbhd_build(uint32_t family,
                                    uint32_t r,
                                    uint32_t m,
                                    size_t bound,
                                    size_t cap,
                                    struct ColredNbhd **out);

/**
 * # Safety
 * `g` must be null or a live handle.
 */
size_t colred_nbhd_vertex_count(const struct ColredNbhd *g);

/**
 * # Safety
 * `g` must be null or a live handle.
 */
size_t colred_nbhd_edge_count(const struct ColredNbhd *g);

/**
 * Writes the JSON form of `g` to `*out`; free it with [`colred_string_free`].
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum ColredStatus colred_nbhd_to_json(const struct ColredNbhd *g, char **out);

/**
 * Brackets the chromatic number with at most `budget` search expansions.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum ColredStatus colred_nbhd_chi(const struct ColredNbhd *g,
                                  uint64_t budget,
                                  struct ColredChi *out);

/**
 * # Safety
 * `g` must be null or a handle from this library, not freed before.
 */
void colred_nbhd_free(struct ColredNbhd *g);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLRED_H */
