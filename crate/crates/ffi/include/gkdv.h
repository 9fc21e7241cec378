#ifndef GKDV_H
#define GKDV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Result of every fallible call. Zero is success.
 */
typedef enum GkdvStatus {
  GKDV_STATUS_OK = 0,
  GKDV_STATUS_NULL_POINTER = 1,
  GKDV_STATUS_BUFFER_TOO_SMALL = 2,
  GKDV_STATUS_INVALID_PARAMETER = 3,
  GKDV_STATUS_OVERLAP = 4,
  GKDV_STATUS_DOMAIN = 5,
  GKDV_STATUS_BLOWUP = 6,
  GKDV_STATUS_WRONG_EXPONENT = 7,
  GKDV_STATUS_NO_CONVERGENCE = 8,
  GKDV_STATUS_UNRESOLVED_SPECTRUM = 9,
  GKDV_STATUS_DIAGNOSTIC = 10,
  GKDV_STATUS_PANIC = 11,
} GkdvStatus;

/*
 One solution snapshot on a periodic grid.
 */
typedef struct GkdvField GkdvField;

/*
 Discrete spectrum of a potential with its predicted soliton and breather content.
 */
typedef struct GkdvSpectrum GkdvSpectrum;

/*
 Stored frames of a run, with its truncation cause if it ended early.
 */
typedef struct GkdvTrajectory GkdvTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Length of the last error message on this thread, excluding the terminating NUL; 0 if none.
 */
size_t gkdv_last_error_length(void);

/*
 Copies the last error message on this thread into `buf` (NUL-terminated, truncated to fit).
 Returns the number of bytes written excluding the NUL.

 # Safety
 `buf` must be null or point to `capacity` writable bytes.
 */
size_t gkdv_last_error_message(char *buf, size_t capacity);

/*
 Version of the library as a static NUL-terminated string.
 */
const char *gkdv_version(void);

/*
 Field from `n` grid values on [−L/2, L/2) for exponent `p` at time `t`.

 # Safety
 `values` must point to `n` readable doubles; `out` must be a valid pointer.
 */
enum GkdvStatus gkdv_field_new(double length,
                               size_t n,
                               double dt,
                               uint32_t p,
                               double t,
                               const double *values,
                               struct GkdvField **out);

/*
 Sum of solitons of speeds `speeds[i]` centred at `centers[i]`; overlapping or edge-touching
 layouts are refused.

 # Safety
 `speeds` and `centers` must point to `count` readable doubles; `out` must be valid.
 */
enum GkdvStatus gkdv_field_solitons(double length,
                                    size_t n,
                                    double dt,
                                    uint32_t p,
                                    const double *speeds,
                                    const double *centers,
                                    size_t count,
                                    struct GkdvField **out);

/*
 mKdV breather with parameters (α, β) and shifts (x₁, x₂) at t = 0.

 # Safety
 `out` must be a valid pointer.
 */
enum GkdvStatus gkdv_field_breather(double length,
                                    size_t n,
                                    double dt,
                                    double alpha,
                                    double beta,
                                    double x1,
                                    double x2,
                                    struct GkdvField **out);

/*
 Releases a field; null is ignored.

 # Safety
 `field` must come from this library and not be used afterwards.
 */
void gkdv_field_free(struct GkdvField *field);

/*
 Number of grid values, 0 for a null handle.

 # Safety
 `field` must be null or a live handle.
 */
size_t gkdv_field_len(const struct GkdvField *field);

/*
 Copies the grid values into `out`; `needed` (optional) receives the value count.

 # Safety
 `field` must be a live handle; `out` must hold `capacity` doubles.
 */
enum GkdvStatus gkdv_field_values(const struct GkdvField *field,
                                  double *out,
                                  size_t capacity,
                                  size_t *needed);

/*
 Time stamp, mass ∫u² and energy of a field.

 # Safety
 `field` must be a live handle; each output pointer must be valid or null.
 */
enum GkdvStatus gkdv_field_invariants(const struct GkdvField *field,
                                      double *t,
                                      double *mass,
                                      double *energy);

/*
 Evolves a field over `t_final` (a multiple of its dt), storing every `frame_stride` steps.
 A run stopped by blow-up or boundary contact still yields its partial trajectory; query
 [`gkdv_trajectory_truncated`].

 # Safety
 `field` must be a live handle; `out` must be valid.
 */
enum GkdvStatus gkdv_evolve(const struct GkdvField *field,
                            double t_final,
                            size_t frame_stride,
                            struct GkdvTrajectory **out);

/*
 Releases a trajectory; null is ignored.

 # Safety
 `traj` must come from this library and not be used afterwards.
 */
void gkdv_trajectory_free(struct GkdvTrajectory *traj);

/*
 Number of stored frames, 0 for a null handle.

 # Safety
 `traj` must be null or a live handle.
 */
size_t gkdv_trajectory_len(const struct GkdvTrajectory *traj);

/*
 Status of the cause that ended the run early, or `Ok` if it reached its final time. The
 cause's message becomes the thread's last error.

 # Safety
 `traj` must be a live handle.
 */
enum GkdvStatus gkdv_trajectory_truncated(const struct GkdvTrajectory *traj);

/*
 Copy of stored frame `index` (0-based) as a new field handle.

 # Safety
 `traj` must be a live handle; `out` must be valid.
 */
enum GkdvStatus gkdv_trajectory_frame(const struct GkdvTrajectory *traj,
                                      size_t index,
                                      struct GkdvField **out);

/*
 Largest relative mass and energy drift over the stored frames.

 # Safety
 `traj` must be a live handle; each output pointer must be valid or null.
 */
enum GkdvStatus gkdv_trajectory_drifts(const struct GkdvTrajectory *traj,
                                       double *mass,
                                       double *energy);

/*
 Discrete spectrum of a field: Schrödinger for p = 2, Zakharov–Shabat for p = 3.
 `points` = 0 uses the field's grid size.

 # Safety
 `field` must be a live handle; `out` must be valid.
 */
enum GkdvStatus gkdv_spectrum(const struct GkdvField *field,
                              size_t points,
                              struct GkdvSpectrum **out);

/*
 Releases a spectrum; null is ignored.

 # Safety
 `spec` must come from this library and not be used afterwards.
 */
void gkdv_spectrum_free(struct GkdvSpectrum *spec);

/*
 Calibrated eigenvalues as separate real and imaginary parts; `needed` receives the count.

 # Safety
 `spec` must be a live handle; `re` and `im` must each hold `capacity` doubles.
 */
enum GkdvStatus gkdv_spectrum_eigenvalues(const struct GkdvSpectrum *spec,
                                          double *re,
                                          double *im,
                                          size_t capacity,
                                          size_t *needed);

/*
 Predicted soliton speeds, ascending; `needed` receives the count.

 # Safety
 `spec` must be a live handle; `out` must hold `capacity` doubles.
 */
enum GkdvStatus gkdv_spectrum_speeds(const struct GkdvSpectrum *spec,
                                     double *out,
                                     size_t capacity,
                                     size_t *needed);

/*
 Predicted breathers as interleaved (α, β) pairs; `needed` receives the pair count.

 # Safety
 `spec` must be a live handle; `out` must hold `2 * capacity` doubles.
 */
enum GkdvStatus gkdv_spectrum_breathers(const struct GkdvSpectrum *spec,
                                        double *out,
                                        size_t capacity,
                                        size_t *needed);

/*
 1 when the spectrum is generic (distinct speeds, no soliton/breather velocity coincidence),
 0 otherwise, −1 for a null handle.

 # Safety
 `spec` must be null or a live handle.
 */
int32_t gkdv_spectrum_generic(const struct GkdvSpectrum *spec);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GKDV_H */
