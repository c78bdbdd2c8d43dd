#ifndef OTFS_DSE_H
#define OTFS_DSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum OtfsStatus {
  OTFS_STATUS_OK = 0,
  OTFS_STATUS_NULL_POINTER = 1,
  OTFS_STATUS_INVALID_ARGUMENT = 2,
  OTFS_STATUS_DIMENSION_MISMATCH = 3,
  OTFS_STATUS_WRONG_MODEL = 4,
  OTFS_STATUS_QUADRATURE_FAILED = 5,
  OTFS_STATUS_IO = 6,
  OTFS_STATUS_PANIC = 7,
} OtfsStatus;

typedef enum OtfsModel {
  OTFS_MODEL_IGNORE_DSE = 0,
  OTFS_MODEL_IDEAL_EXACT = 1,
  OTFS_MODEL_IDEAL_APPROX = 2,
  OTFS_MODEL_DD_CLOSED = 3,
  OTFS_MODEL_RECT = 4,
} OtfsModel;

typedef enum OtfsDomain {
  OTFS_DOMAIN_TIME_FREQUENCY = 0,
  OTFS_DOMAIN_DELAY_DOPPLER = 1,
} OtfsDomain;

// Opaque channel realization.
typedef struct OtfsChannelHandle OtfsChannelHandle;

// Opaque grid parameters.
typedef struct OtfsParamsHandle OtfsParamsHandle;

// Opaque sensing matrix.
typedef struct OtfsSensingHandle OtfsSensingHandle;

// Complex number with the layout of C99 `double _Complex`.
typedef struct OtfsComplex {
  double re;
  double im;
} OtfsComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none.
//
// The pointer stays valid until the next failing call on the same thread.
const char *otfs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *otfs_version(void);

// Creates a parameter set.
//
// # Safety
// `out` must be a valid pointer to writable handle storage.
enum OtfsStatus otfs_params_new(size_t subcarriers,
                                size_t slots,
                                double subcarrier_spacing_hz,
                                double carrier_frequency_hz,
                                size_t max_delay_index,
                                double max_doppler_index,
                                struct OtfsParamsHandle **out);

// # Safety
// `p` must be null or a handle from [`otfs_params_new`] not yet freed.
void otfs_params_free(struct OtfsParamsHandle *p);

// `N · M`, or 0 for a null handle.
//
// # Safety
// `p` must be null or a live parameter handle.
size_t otfs_params_grid_size(const struct OtfsParamsHandle *p);

// Forward or inverse symplectic transform of a row-major `N × M` grid.
//
// `inverse != 0` maps delay-Doppler to time-frequency.
//
// # Safety
// `input` and `output` must point to `len` elements each.
enum OtfsStatus otfs_sfft(const struct OtfsParamsHandle *params,
                          const struct OtfsComplex *input,
                          struct OtfsComplex *output,
                          size_t len,
                          int32_t inverse);

// Draws a random channel with `num_paths` paths for a user at `speed_mps`.
//
// `integer_doppler != 0` draws Doppler indices on the integer grid.
//
// # Safety
// `params` must be live and `out` writable.
enum OtfsStatus otfs_channel_draw(const struct OtfsParamsHandle *params,
                                  size_t num_paths,
                                  double speed_mps,
                                  uint64_t seed,
                                  int32_t integer_doppler,
                                  struct OtfsChannelHandle **out);

// # Safety
// `ch` must be null or a live channel handle.
void otfs_channel_free(struct OtfsChannelHandle *ch);

// Number of paths, or 0 for a null handle.
//
// # Safety
// `ch` must be null or a live channel handle.
size_t otfs_channel_num_paths(const struct OtfsChannelHandle *ch);

// Gain and delay/Doppler indices of path `index`.
//
// # Safety
// `ch` must be live and the three outputs writable.
enum OtfsStatus otfs_channel_path(const struct OtfsChannelHandle *ch,
                                  size_t index,
                                  struct OtfsComplex *gain,
                                  double *delay_index,
                                  double *doppler_index);

// Channel grid under `model` (an [`OtfsModel`] value): TF coefficients for
// `domain = OTFS_DOMAIN_TIME_FREQUENCY`, the DD kernel for
// `OTFS_DOMAIN_DELAY_DOPPLER`.
//
// # Safety
// `output` must point to `len` writable elements.
enum OtfsStatus otfs_channel_grid(const struct OtfsChannelHandle *ch,
                                  int32_t model,
                                  int32_t domain,
                                  struct OtfsComplex *output,
                                  size_t len);

// Builds a pilot-at-origin sensing matrix over Doppler bins `-k_max..=k_max`
// and delay bins `0..=l_max`. `domain` is an [`OtfsDomain`] and `model` an
// [`OtfsModel`] value; `model` is ignored for the TF domain.
//
// # Safety
// `params` must be live and `out` writable.
enum OtfsStatus otfs_sensing_build(const struct OtfsParamsHandle *params,
                                   size_t k_max,
                                   size_t l_max,
                                   struct OtfsComplex pilot,
                                   int32_t domain,
                                   int32_t model,
                                   struct OtfsSensingHandle **out);

// # Safety
// `s` must be null or a live sensing handle.
void otfs_sensing_free(struct OtfsSensingHandle *s);

// Rows and columns of the matrix.
//
// # Safety
// `s` must be live; `rows` and `cols` writable.
enum OtfsStatus otfs_sensing_shape(const struct OtfsSensingHandle *s, size_t *rows, size_t *cols);

// Doppler and delay index of column `col`.
//
// # Safety
// `s` must be live; `k` and `l` writable.
enum OtfsStatus otfs_sensing_atom(const struct OtfsSensingHandle *s,
                                  size_t col,
                                  int64_t *k,
                                  size_t *l);

// Orthogonal matching pursuit on `y` (already divided by the pilot scale).
//
// Writes up to `capacity` selected columns and gains and stores their
// number in `selected`. Stops after `max_iter` atoms or once the residual
// norm drops below `eps`.
//
// # Safety
// `y` must hold `len` elements; `support` and `gains` `capacity` elements.
enum OtfsStatus otfs_omp(const struct OtfsSensingHandle *s,
                         const struct OtfsComplex *y,
                         size_t len,
                         size_t max_iter,
                         double eps,
                         size_t *support,
                         struct OtfsComplex *gains,
                         size_t capacity,
                         size_t *selected);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OTFS_DSE_H */
