#ifndef FLOIATION_H
#define FLOIATION_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. Values 3 to 12 match the command-line exit codes.
typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_ARGUMENT = 1,
  FL_STATUS_INVALID_UTF8 = 2,
  FL_STATUS_IO = 3,
  FL_STATUS_INPUT = 4,
  FL_STATUS_COMPLEX = 5,
  FL_STATUS_ORDER = 6,
  FL_STATUS_EMBED = 7,
  FL_STATUS_FLOATION2 = 8,
  FL_STATUS_MODEL = 9,
  FL_STATUS_STRAIGHTEN = 10,
  FL_STATUS_FLOATION3 = 11,
  FL_STATUS_RENDER = 12,
  FL_STATUS_PANIC = 13,
} FlStatus;

// Opaque complex handle.
typedef struct FlComplex FlComplex;

// Opaque order handle.
typedef struct FlOrder FlOrder;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until
// the next call on the same thread.
const char *fl_last_error(void);

// Library version as a static string.
const char *fl_version(void);

// # Safety
// `s` must be null or a string returned by this library.
void fl_string_free(char *s);

// Loads a bundled complex by name (`TOR2`, `OCT8`, `T3CUBE`).
//
// # Safety
// `name` must be a NUL-terminated string and `out` writable.
enum FlStatus fl_complex_bundled(const char *name, struct FlComplex **out);

// Parses a complex from its JSON document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum FlStatus fl_complex_from_json(const char *json, struct FlComplex **out);

// # Safety
// `c` must be null or a handle from this library, not yet freed.
void fl_complex_free(struct FlComplex *c);

// Invariant report as JSON.
//
// # Safety
// `c` must be a live handle and `out` writable.
enum FlStatus fl_complex_report(const struct FlComplex *c, char **out);

// Builds an order from its JSON specification.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum FlStatus fl_order_from_json(const char *json, uint32_t precision_bits, struct FlOrder **out);

// # Safety
// `o` must be null or a handle from this library, not yet freed.
void fl_order_free(struct FlOrder *o);

// # Safety
// `o` must be a live handle and `out` writable.
enum FlStatus fl_order_describe(const struct FlOrder *o, char **out);

// Compares two words written in the order's generator names; writes -1, 0
// or 1.
//
// # Safety
// `o` must be a live handle, `u` and `v` NUL-terminated strings, `out`
// writable.
enum FlStatus fl_order_compare(const struct FlOrder *o, const char *u, const char *v, int32_t *out);

// Audits an explicit direction given as `len` entries of +1 or -1.
//
// # Safety
// `c` must be a live handle, `direction` must point to `len` readable
// bytes, `out` writable.
enum FlStatus fl_audit3_direction(const struct FlComplex *c,
                                  const int8_t *direction,
                                  size_t len,
                                  char **out);

// Audits the direction induced by an order.
//
// # Safety
// `c` and `o` must be live handles and `out` writable.
enum FlStatus fl_audit3_order(const struct FlComplex *c, const struct FlOrder *o, char **out);

// Exhaustive audit of all edge directions.
//
// # Safety
// `c` must be a live handle and `out` writable.
enum FlStatus fl_audit3_enumerate(const struct FlComplex *c, bool valid_only, char **out);

// Closed-leaf search and Archimedean test on a torus.
//
// # Safety
// `c` and `o` must be live handles and `out` writable.
enum FlStatus fl_torus_classify(const struct FlComplex *c,
                                const struct FlOrder *o,
                                size_t radius,
                                size_t max_crossings,
                                char **out);

// Straightened lamination of sampled leaves, as JSON.
//
// # Safety
// `c` and `o` must be live handles and `out` writable.
enum FlStatus fl_straighten(const struct FlComplex *c,
                            const struct FlOrder *o,
                            size_t samples,
                            uint64_t seed,
                            double eps,
                            size_t max_crossings,
                            char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOIATION_H */
