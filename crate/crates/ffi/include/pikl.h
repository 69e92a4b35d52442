#ifndef PIKL_H
#define PIKL_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PiklStatus {
  PIKL_STATUS_OK = 0,
  PIKL_STATUS_NULL_POINTER = 1,
  PIKL_STATUS_INVALID_ARGUMENT = 2,
  PIKL_STATUS_INVALID_POLICY = 3,
  PIKL_STATUS_SUPPORT_VIOLATION = 4,
  PIKL_STATUS_TOO_LARGE = 5,
  PIKL_STATUS_NO_VISITED_ACTIONS = 6,
  PIKL_STATUS_BUFFER_SIZE = 7,
  PIKL_STATUS_PANIC = 8,
} PiklStatus;

typedef enum PiklLearnerKind {
  PIKL_LEARNER_KIND_PIKL = 0,
  PIKL_LEARNER_KIND_HEDGE = 1,
  PIKL_LEARNER_KIND_REGRET_MATCHING = 2,
} PiklLearnerKind;

/**
 * Opaque normal-form game.
 */
typedef struct PiklGame PiklGame;

/**
 * Opaque online learner.
 */
typedef struct PiklLearner PiklLearner;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *pikl_last_error_message(void);

/**
 * Colonel Blotto with `coins` coins over `fields` battlefields.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PiklStatus pikl_game_blotto(size_t coins, size_t fields, struct PiklGame **out);

/**
 * Rock-paper-scissors.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PiklStatus pikl_game_rps(struct PiklGame **out);

/**
 * Matching pennies.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PiklStatus pikl_game_matching_pennies(struct PiklGame **out);

/**
 * Seeded `n × n` zero-sum game with payoffs uniform in `[-1, 1]`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PiklStatus pikl_game_random_zero_sum(size_t n, uint64_t seed, struct PiklGame **out);

/**
 * Two-player zero-sum game from the row player's `rows × cols` payoff
 * matrix in row-major order, with payoffs inside `[lo, hi]`.
 *
 * # Safety
 * `payoffs` must point to `rows * cols` doubles; `out` must be valid for writes.
 */
enum PiklStatus pikl_game_from_matrix(size_t rows,
                                      size_t cols,
                                      const double *payoffs,
                                      double lo,
                                      double hi,
                                      struct PiklGame **out);

/**
 * Releases a game; null is ignored.
 *
 * # Safety
 * `game` must come from a `pikl_game_*` constructor and not be used afterwards.
 */
void pikl_game_free(struct PiklGame *game);

/**
 * # Safety
 * `game` must be a live handle; `out` must be valid for writes.
 */
enum PiklStatus pikl_game_num_players(const struct PiklGame *game, size_t *out);

/**
 * # Safety
 * `game` must be a live handle; `out` must be valid for writes.
 */
enum PiklStatus pikl_game_num_actions(const struct PiklGame *game, size_t player, size_t *out);

/**
 * Sum over players of the best-response gain against `profile`. When
 * `gaps` is non-null it receives one gain per player.
 *
 * # Safety
 * `profile` must hold `profile_len` doubles, `gaps` (if non-null) one per
 * player, and `total` must be valid for writes.
 */
enum PiklStatus pikl_game_exploitability(const struct PiklGame *game,
                                         const double *profile,
                                         size_t profile_len,
                                         double *gaps,
                                         double *total);

/**
 * `KL(p ‖ q)` over `n` actions.
 *
 * # Safety
 * `p` and `q` must hold `n` doubles; `out` must be valid for writes.
 */
enum PiklStatus pikl_kl_divergence(const double *p, const double *q, size_t n, double *out);

/**
 * Maximizer of `Σ π·Q − λ·KL(π ‖ τ)`: `τ·exp(Q/λ)` normalized.
 *
 * # Safety
 * `q`, `tau` and `out` must hold `n` doubles.
 */
enum PiklStatus pikl_softmax_anchored(const double *q,
                                      const double *tau,
                                      size_t n,
                                      double lambda,
                                      double *out);

/**
 * Maximizer of `Σ π·Q − λ·KL(τ ‖ π)`.
 *
 * # Safety
 * `q`, `tau` and `out` must hold `n` doubles.
 */
enum PiklStatus pikl_reverse_kl_opt(const double *q,
                                    const double *tau,
                                    size_t n,
                                    double lambda,
                                    double *out);

/**
 * New learner over `n` actions. `anchor` may be null for uniform (used by
 * [`PiklLearnerKind::Pikl`] only). `eta > 0` fixes the step size; `eta <= 0`
 * selects the adaptive schedule. `lambda` is ignored except for piKL.
 *
 * # Safety
 * `anchor`, if non-null, must hold `n` doubles; `out` must be valid for writes.
 */
enum PiklStatus pikl_learner_new(enum PiklLearnerKind kind,
                                 size_t n,
                                 const double *anchor,
                                 double lambda,
                                 double eta,
                                 uint64_t seed,
                                 struct PiklLearner **out);

/**
 * Releases a learner; null is ignored.
 *
 * # Safety
 * `learner` must come from [`pikl_learner_new`] and not be used afterwards.
 */
void pikl_learner_free(struct PiklLearner *learner);

/**
 * Starts the next iteration and writes its policy to `out`.
 *
 * # Safety
 * `learner` must be live; `out` must hold `n` doubles.
 */
enum PiklStatus pikl_learner_next_policy(struct PiklLearner *learner, double *out, size_t n);

/**
 * Completes the current iteration with per-action utilities.
 *
 * # Safety
 * `learner` must be live; `utilities` must hold `n` doubles.
 */
enum PiklStatus pikl_learner_observe(struct PiklLearner *learner,
                                     const double *utilities,
                                     size_t n);

/**
 * Mean of the iterates so far.
 *
 * # Safety
 * `learner` must be live; `out` must hold `n` doubles.
 */
enum PiklStatus pikl_learner_average_policy(struct PiklLearner *learner, double *out, size_t n);

/**
 * piKL self-play for `iterations` rounds; writes the average profile.
 * `anchors` may be null for uniform anchors. `eta > 0` fixes the step size,
 * `eta == 0` uses `1/(λβ + 2D)`, `eta < 0` the adaptive schedule.
 * `exact != 0` uses expected utilities instead of sampled actions.
 *
 * # Safety
 * `anchors` (if non-null) and `out` must hold `profile_len` doubles.
 */
enum PiklStatus pikl_selfplay(const struct PiklGame *game,
                              const double *anchors,
                              double lambda,
                              double eta,
                              uint64_t iterations,
                              int32_t exact,
                              uint64_t seed,
                              double *out,
                              size_t profile_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PIKL_H */
