#ifndef POLYGAP_H
#define POLYGAP_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PolygapField {
  POLYGAP_FIELD_REAL = 0,
  POLYGAP_FIELD_COMPLEX = 1,
} PolygapField;

typedef enum PolygapSpace {
  POLYGAP_SPACE_PLANAR = 0,
  POLYGAP_SPACE_SPATIAL = 1,
} PolygapSpace;

typedef enum PolygapStatus {
  POLYGAP_STATUS_OK = 0,
  POLYGAP_STATUS_NULL_POINTER = 1,
  POLYGAP_STATUS_INVALID_ARGUMENT = 2,
  POLYGAP_STATUS_VALIDATION_FAILED = 3,
  POLYGAP_STATUS_INTERNAL = 4,
} PolygapStatus;

typedef struct PolygapFrame PolygapFrame;

typedef struct PolygapPolygon PolygapPolygon;

typedef struct PolygapReport PolygapReport;

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *polygap_last_error(void);

/**
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum PolygapStatus polygap_frame_random(size_t n,
                                        enum PolygapField field,
                                        uint64_t seed,
                                        struct PolygapFrame **out);

/**
 * The `4 x 2` complex counterexample frame.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum PolygapStatus polygap_frame_counterexample(struct PolygapFrame **out);

/**
 * # Safety
 * `frame` must be null or a handle from this library not yet freed.
 */
void polygap_frame_free(struct PolygapFrame *frame);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `frame` must be null or a live handle.
 */
size_t polygap_frame_n(const struct PolygapFrame *frame);

/**
 * # Safety
 * `frame` must be a live handle and `out` valid for writing.
 */
enum PolygapStatus polygap_frame_sigma_min(const struct PolygapFrame *frame,
                                           size_t i,
                                           size_t j,
                                           double *out);

/**
 * Best-conditioned row pair and its least singular value.
 *
 * # Safety
 * `frame` must be a live handle; the out pointers must be valid for writing.
 */
enum PolygapStatus polygap_frame_best_submatrix(const struct PolygapFrame *frame,
                                                size_t *out_i,
                                                size_t *out_j,
                                                double *out_sigma_min);

/**
 * Polygon of a frame: planar for real frames, spatial for complex ones.
 *
 * # Safety
 * `frame` must be a live handle and `out` valid for writing.
 */
enum PolygapStatus polygap_frame_to_polygon(const struct PolygapFrame *frame,
                                            struct PolygapPolygon **out);

/**
 * # Safety
 * `polygon` must be null or a live handle.
 */
void polygap_polygon_free(struct PolygapPolygon *polygon);

/**
 * Number of edges, or 0 for a null handle.
 *
 * # Safety
 * `polygon` must be null or a live handle.
 */
size_t polygap_polygon_n(const struct PolygapPolygon *polygon);

/**
 * Ambient dimension (2 or 3), or 0 for a null handle.
 *
 * # Safety
 * `polygon` must be null or a live handle.
 */
size_t polygap_polygon_dim(const struct PolygapPolygon *polygon);

/**
 * # Safety
 * `polygon` must be a live handle and `out` valid for writing.
 */
enum PolygapStatus polygap_polygon_perimeter(const struct PolygapPolygon *polygon, double *out);

/**
 * Largest pair deficit and the pair attaining it.
 *
 * # Safety
 * `polygon` must be a live handle; the out pointers must be valid for writing.
 */
enum PolygapStatus polygap_polygon_max_pair_deficit(const struct PolygapPolygon *polygon,
                                                    double *out_value,
                                                    size_t *out_i,
                                                    size_t *out_j);

/**
 * Copies the edges row-major into `buf`, which must hold `n * dim` values.
 *
 * # Safety
 * `polygon` must be a live handle and `buf` valid for `len` writes.
 */
enum PolygapStatus polygap_polygon_edges(const struct PolygapPolygon *polygon,
                                         double *buf,
                                         size_t len);

/**
 * Runs the multistart estimate of `B_n^2`. `restarts` of 0 keeps the default.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum PolygapStatus polygap_estimate_bn2(size_t n,
                                        enum PolygapSpace space,
                                        size_t restarts,
                                        uint64_t seed,
                                        struct PolygapReport **out);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
void polygap_report_free(struct PolygapReport *report);

/**
 * Best max pair deficit at unit perimeter, or NaN for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double polygap_report_best_value(const struct PolygapReport *report);

/**
 * Copy of the certificate polygon, owned by the caller.
 *
 * # Safety
 * `report` must be a live handle and `out` valid for writing.
 */
enum PolygapStatus polygap_report_certificate(const struct PolygapReport *report,
                                              struct PolygapPolygon **out);

#endif  /* POLYGAP_H */
