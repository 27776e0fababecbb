#ifndef FPINIT_H
#define FPINIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum FpiStatus {
  FPI_STATUS_OK = 0,
  FPI_STATUS_NULL_POINTER = 1,
  FPI_STATUS_INVALID_ARGUMENT = 2,
  FPI_STATUS_SHAPE_MISMATCH = 3,
  FPI_STATUS_PARSE_ERROR = 4,
  FPI_STATUS_UNKNOWN_ALGORITHM = 5,
  FPI_STATUS_BUFFER_TOO_SMALL = 6,
  FPI_STATUS_INTERNAL = 7,
} FpiStatus;

/*
 Opaque payoff tensor.
 */
typedef struct FpiGame FpiGame;

/*
 Opaque result of best-of-K fictitious play.
 */
typedef struct FpiSolution FpiSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. Valid until
 the next call into the library from the same thread.
 */
const char *fpi_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *fpi_version(void);

/*
 Builds a game from `players * actions^players` payoffs, player-major,
 joint profiles row-major with player 0 most significant.

 # Safety
 `payoffs` must point to `len` readable doubles; `out` must be writable.
 */
enum FpiStatus fpi_game_new(size_t players,
                            size_t actions,
                            const double *payoffs,
                            size_t len,
                            struct FpiGame **out);

/*
 Seeded game with payoffs uniform in [0, 1).

 # Safety
 `out` must be writable.
 */
enum FpiStatus fpi_game_random(size_t players, size_t actions, uint64_t seed, struct FpiGame **out);

/*
 Parses `{"players": n, "actions": m, "payoffs": [...]}`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FpiStatus fpi_game_from_json(const char *json, struct FpiGame **out);

/*
 # Safety
 `game` must come from an `fpi_game_*` constructor and not be used after.
 */
void fpi_game_free(struct FpiGame *game);

/*
 Number of players, or 0 for a null handle.

 # Safety
 `game` must be null or a live handle.
 */
size_t fpi_game_num_players(const struct FpiGame *game);

/*
 Actions per player, or 0 for a null handle.

 # Safety
 `game` must be null or a live handle.
 */
size_t fpi_game_num_actions(const struct FpiGame *game);

/*
 Largest gain any player gets from a unilateral pure deviation from the
 flat profile `probs` (`players * actions` values, one row per player).

 # Safety
 `game` must be live, `probs` must hold `len` doubles, `out` writable.
 */
enum FpiStatus fpi_epsilon(const struct FpiGame *game,
                           const double *probs,
                           size_t len,
                           double *out);

/*
 Best-of-`k` fictitious play from initializations chosen by `algorithm`
 (`classic`, `macqueen-1`, `macqueen-2`, `maximin-u`, `maximin-s`, `fp++`
 or `k-means`). `pool` is the sampled pool size for the pool-based
 algorithms.

 # Safety
 `game` must be live, `algorithm` NUL-terminated, `out` writable.
 */
enum FpiStatus fpi_solve(const struct FpiGame *game,
                         const char *algorithm,
                         size_t k,
                         size_t pool,
                         size_t iterations,
                         uint64_t seed,
                         struct FpiSolution **out);

/*
 # Safety
 `solution` must come from [`fpi_solve`] and not be used after.
 */
void fpi_solution_free(struct FpiSolution *solution);

/*
 Epsilon of the returned profile, or NaN for a null handle.

 # Safety
 `solution` must be null or a live handle.
 */
double fpi_solution_epsilon(const struct FpiSolution *solution);

/*
 Index of the winning initialization within the batch.

 # Safety
 `solution` must be null or a live handle.
 */
size_t fpi_solution_init_index(const struct FpiSolution *solution);

/*
 Number of doubles [`fpi_solution_probs`] writes (`players * actions`).

 # Safety
 `solution` must be null or a live handle.
 */
size_t fpi_solution_len(const struct FpiSolution *solution);

/*
 Copies the flat profile into `buf`, which must hold at least
 [`fpi_solution_len`] doubles.

 # Safety
 `solution` must be live and `buf` must point to `len` writable doubles.
 */
enum FpiStatus fpi_solution_probs(const struct FpiSolution *solution, double *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPINIT_H */
