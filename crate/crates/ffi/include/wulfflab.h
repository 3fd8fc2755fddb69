#ifndef WULFFLAB_H
#define WULFFLAB_H

#include <stdbool.h>
#include <stddef.h>

// Result codes. Zero is success.
typedef enum WlStatus {
  WL_STATUS_OK = 0,
  // A required pointer argument was null.
  WL_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  WL_STATUS_INVALID_UTF8 = 2,
  // Bad input: unknown name, malformed JSON, wrong length, invalid parameter.
  WL_STATUS_INVALID_INPUT = 3,
  // The anisotropy failed its convexity audit.
  WL_STATUS_CONVEXITY_VIOLATION = 4,
  // A curvature group was not constant where constancy was required.
  WL_STATUS_NOT_ISOPARAMETRIC = 5,
  // Any other numerical failure (rank deficiency, non-convergence, degenerate translation).
  WL_STATUS_NUMERICAL = 6,
  // An output buffer was too small; the required length has been written.
  WL_STATUS_BUFFER_TOO_SMALL = 7,
  // Internal panic caught at the boundary.
  WL_STATUS_PANIC = 8,
} WlStatus;

// An anisotropy integrand `F` on the unit sphere.
typedef struct WlAnisotropy WlAnisotropy;

// A catalog immersion patch bound to the anisotropy it was built with.
typedef struct WlEntry WlEntry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread. Empty if none. The pointer stays valid
// until the next failing call on the same thread.
const char *wl_last_error(void);

// Library version as a static NUL-terminated string.
const char *wl_version(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from a `char **` out-parameter of this library, freed once.
void wl_string_free(char *s);

// Named family on `S^{ambient_dim-1}` (`isotropic`, `quadratic-norm:1,1,4`, ...), audited
// for convexity.
//
// # Safety
// `name` must be a NUL-terminated string; `out` a writable pointer.
enum WlStatus wl_anisotropy_from_name(const char *name,
                                      size_t ambient_dim,
                                      struct WlAnisotropy **out);

// Anisotropy from its JSON description. Not audited; see [`wl_anisotropy_audit_json`].
//
// # Safety
// `json` must be a NUL-terminated string; `out` a writable pointer.
enum WlStatus wl_anisotropy_from_json(const char *json, struct WlAnisotropy **out);

// # Safety
// `f` must be null or a handle from this library, freed once.
void wl_anisotropy_free(struct WlAnisotropy *f);

// Dimension of the ambient space, or 0 for a null handle.
//
// # Safety
// `f` must be null or a live handle.
size_t wl_anisotropy_ambient_dim(const struct WlAnisotropy *f);

// JSON description of the anisotropy, loadable by [`wl_anisotropy_from_json`].
//
// # Safety
// `f` must be a live handle; `out_json` a writable pointer.
enum WlStatus wl_anisotropy_to_json(const struct WlAnisotropy *f, char **out_json);

// `F(u)` at a unit vector of length `ambient_dim`.
//
// # Safety
// `f` must be a live handle; `u` must point at `len` doubles; `out` a writable pointer.
enum WlStatus wl_anisotropy_value(const struct WlAnisotropy *f,
                                  const double *u,
                                  size_t len,
                                  double *out);

// Wulff map `φ(u)`; writes `ambient_dim` doubles to `out`.
//
// # Safety
// `f` must be a live handle; `u` and `out` must each hold `len` doubles.
enum WlStatus wl_anisotropy_phi(const struct WlAnisotropy *f,
                                const double *u,
                                size_t len,
                                double *out);

// Dual norm `F*(y)` for any nonzero `y`.
//
// # Safety
// `f` must be a live handle; `y` must point at `len` doubles; `out` a writable pointer.
enum WlStatus wl_anisotropy_dual_norm(const struct WlAnisotropy *f,
                                      const double *y,
                                      size_t len,
                                      double *out);

// Convexity audit on a sphere grid, as a JSON report. A failing audit is still `Ok`;
// inspect the `pass` field.
//
// # Safety
// `f` must be a live handle; `out_json` a writable pointer.
enum WlStatus wl_anisotropy_audit_json(const struct WlAnisotropy *f,
                                       size_t grid_resolution,
                                       char **out_json);

// Catalog patch by name (`plane`, `wulff`, `cylinder:k=1,t=0.5`, `helicoid`, ...) for `f`.
// The entry keeps its own copy of the anisotropy.
//
// # Safety
// `f` must be a live handle; `name` a NUL-terminated string; `out` a writable pointer.
enum WlStatus wl_entry_new(const struct WlAnisotropy *f, const char *name, struct WlEntry **out);

// # Safety
// `e` must be null or a handle from this library, freed once.
void wl_entry_free(struct WlEntry *e);

// Number of chart parameters `n`, or 0 for a null handle.
//
// # Safety
// `e` must be null or a live handle.
size_t wl_entry_chart_dim(const struct WlEntry *e);

// Anisotropic principal curvatures at chart point `params`, descending. Writes `n` values
// to `out` and `n` to `out_len`; if `capacity < n` returns `BufferTooSmall` with `out_len` set.
//
// # Safety
// `e` must be a live handle; `params` must point at `len` doubles; `out` must hold
// `capacity` doubles; `out_len` a writable pointer.
enum WlStatus wl_entry_curvatures(const struct WlEntry *e,
                                  const double *params,
                                  size_t len,
                                  double *out,
                                  size_t capacity,
                                  size_t *out_len);

// Classification verdict over a `grid_resolution`-per-axis chart grid, as JSON.
// `complete` asserts that the patch is a piece of a complete hypersurface.
//
// # Safety
// `e` must be a live handle; `out_json` a writable pointer.
enum WlStatus wl_entry_classify_json(const struct WlEntry *e,
                                     size_t grid_resolution,
                                     bool complete,
                                     char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WULFFLAB_H */
