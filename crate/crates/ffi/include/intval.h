#ifndef INTVAL_H
#define INTVAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum IvpStatus {
  IVP_STATUS_OK = 0,
  IVP_STATUS_INVALID_ARGUMENT = 1,
  IVP_STATUS_PARSE = 2,
  IVP_STATUS_NOT_PRIME = 3,
  IVP_STATUS_IO = 4,
  IVP_STATUS_JSON = 5,
  /*
   The computation could not be completed, for example because a
   search limit was reached.
   */
  IVP_STATUS_COMPUTATION = 6,
  /*
   `ivp_artifact_verify` found failing checks.
   */
  IVP_STATUS_VERIFICATION_FAILED = 7,
  IVP_STATUS_NULL_POINTER = 8,
  IVP_STATUS_UTF8 = 9,
  IVP_STATUS_PANIC = 10,
} IvpStatus;

/*
 A constructed or loaded artifact.
 */
typedef struct IvpArtifact IvpArtifact;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. The pointer is
 owned by the library and valid until the next call on this thread.
 */
const char *ivp_last_error_message(void);

/*
 Frees a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void ivp_string_free(char *s);

/*
 Fixed divisor of a polynomial in text form, e.g. "[0,-1,1]", written as
 a decimal string to `*out`.

 # Safety
 `poly` must be a NUL-terminated string; `out` must be writable.
 */
enum IvpStatus ivp_fixed_divisor(const char *poly, char **out);

/*
 Whether "[c0,..]/den" is integer-valued.

 # Safety
 `poly` must be a NUL-terminated string; `out` must be writable.
 */
enum IvpStatus ivp_is_member(const char *poly, bool *out);

/*
 Builds an element of Int(Z) whose set of factorization lengths is
 `lengths[0..count]` (each at least 2). `prime` selects the prime of the
 design; pass 0 for the default.

 # Safety
 `lengths` must point to `count` readable values; `out` must be writable.
 */
enum IvpStatus ivp_construct_lengths(const uint32_t *lengths,
                                     size_t count,
                                     uint64_t prime,
                                     struct IvpArtifact **out);

/*
 Builds the transfer witness for `n`. `primes` may be NULL for the first
 `n` odd primes, or point to `n` distinct odd primes.

 # Safety
 `primes` must be NULL or point to `n` readable values; `out` must be
 writable.
 */
enum IvpStatus ivp_construct_transfer(uint32_t n, const uint64_t *primes, struct IvpArtifact **out);

/*
 Parses an artifact from its JSON text.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum IvpStatus ivp_artifact_from_json(const char *json, struct IvpArtifact **out);

/*
 Serializes an artifact; free the result with `ivp_string_free`.

 # Safety
 `a` must be a live artifact; `out` must be writable.
 */
enum IvpStatus ivp_artifact_to_json(const struct IvpArtifact *a, char **out);

/*
 Runs every check. Returns `IVP_STATUS_VERIFICATION_FAILED` if any check
 fails; the number of failing checks goes to `*failed` when non-NULL.

 # Safety
 `a` must be a live artifact; `failed` must be NULL or writable.
 */
enum IvpStatus ivp_artifact_verify(const struct IvpArtifact *a, size_t *failed);

/*
 Factorization lengths: one per factorization for a prescribed-lengths
 artifact, the distinct lengths of x·H for a transfer artifact. Writes up
 to `cap` values to `buf` and the total count to `*count`.

 # Safety
 `a` must be a live artifact; `buf` must hold `cap` values (or be NULL
 with `cap == 0`); `count` must be writable.
 */
enum IvpStatus ivp_artifact_lengths(const struct IvpArtifact *a,
                                    size_t *buf,
                                    size_t cap,
                                    size_t *count);

/*
 Degree of `H`.

 # Safety
 `a` must be a live artifact; `out` must be writable.
 */
enum IvpStatus ivp_artifact_degree(const struct IvpArtifact *a, size_t *out);

/*
 Releases an artifact. NULL is ignored.

 # Safety
 `a` must come from this library and not have been freed.
 */
void ivp_artifact_free(struct IvpArtifact *a);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INTVAL_H */
