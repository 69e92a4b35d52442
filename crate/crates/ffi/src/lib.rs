//! C ABI for the `pikl` library.
//!
//! Games and learners are opaque heap handles created by `*_new`/`pikl_game_*`
//! constructors and released with the matching `*_free`. Every fallible call
//! returns a [`PiklStatus`]; on failure [`pikl_last_error_message`] describes
//! the problem. Policies cross the boundary as `double` arrays, profiles as
//! the concatenation of the players' arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use pikl::games::{make_blotto, make_matching_pennies, make_random_zero_sum, make_rps};
use pikl::solvers::{
    run_selfplay, EtaMode, EtaSpec, HedgeState, Learner, Mode, PiklState, PlayerSpec, RmState,
    SelfplayOptions, SolverSpec, ADAPTIVE_C,
};
use pikl::{Error, NormalFormGame, Policy, Profile, RewardBounds};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiklStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidPolicy = 3,
    SupportViolation = 4,
    TooLarge = 5,
    NoVisitedActions = 6,
    BufferSize = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiklLearnerKind {
    Pikl = 0,
    Hedge = 1,
    RegretMatching = 2,
}

/// Opaque normal-form game.
pub struct PiklGame(NormalFormGame);

/// Opaque online learner.
pub struct PiklLearner(Box<dyn Learner + Send>);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: PiklStatus, msg: impl Into<String>) -> PiklStatus {
    set_error(msg);
    status
}

fn from_core(err: Error) -> PiklStatus {
    let status = match err {
        Error::InvalidPolicy(_) => PiklStatus::InvalidPolicy,
        Error::SupportViolation { .. } | Error::AnchorNotFullSupport { .. } => PiklStatus::SupportViolation,
        Error::TooLarge { .. } => PiklStatus::TooLarge,
        Error::NoVisitedActions => PiklStatus::NoVisitedActions,
        Error::InvalidArgument(_) => PiklStatus::InvalidArgument,
    };
    fail(status, err.to_string())
}

type FfiResult = Result<(), PiklStatus>;

/// Runs `f`, converting panics into [`PiklStatus::Panic`].
fn guard(f: impl FnOnce() -> FfiResult) -> PiklStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PiklStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(PiklStatus::Panic, "internal panic"),
    }
}

unsafe fn input<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], PiklStatus> {
    if ptr.is_null() {
        return Err(fail(PiklStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn output<'a>(ptr: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], PiklStatus> {
    if ptr.is_null() {
        return Err(fail(PiklStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts_mut(ptr, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> FfiResult {
    if out.is_null() {
        return Err(fail(PiklStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn game_ref<'a>(game: *const PiklGame) -> Result<&'a NormalFormGame, PiklStatus> {
    game.as_ref()
        .map(|g| &g.0)
        .ok_or_else(|| fail(PiklStatus::NullPointer, "game is null"))
}

fn policy(probs: &[f64]) -> Result<Policy, PiklStatus> {
    Policy::new(probs.to_vec()).map_err(from_core)
}

fn profile_from(game: &NormalFormGame, flat: &[f64]) -> Result<Profile, PiklStatus> {
    let counts = game.action_counts();
    if flat.len() != counts.iter().sum::<usize>() {
        return Err(fail(
            PiklStatus::BufferSize,
            format!("profile needs {} entries, got {}", counts.iter().sum::<usize>(), flat.len()),
        ));
    }
    let mut offset = 0;
    let mut policies = Vec::with_capacity(counts.len());
    for &n in counts {
        policies.push(policy(&flat[offset..offset + n])?);
        offset += n;
    }
    Ok(Profile::new(policies))
}

fn box_game(game: Result<NormalFormGame, Error>, out: *mut *mut PiklGame) -> FfiResult {
    let game = game.map_err(from_core)?;
    unsafe { write(out, Box::into_raw(Box::new(PiklGame(game))), "out") }
}

/// Message for the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pikl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Colonel Blotto with `coins` coins over `fields` battlefields.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pikl_game_blotto(coins: usize, fields: usize, out: *mut *mut PiklGame) -> PiklStatus {
    guard(|| box_game(make_blotto(coins, fields), out))
}

/// Rock-paper-scissors.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pikl_game_rps(out: *mut *mut PiklGame) -> PiklStatus {
    guard(|| box_game(Ok(make_rps()), out))
}

/// Matching pennies.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pikl_game_matching_pennies(out: *mut *mut PiklGame) -> PiklStatus {
    guard(|| box_game(Ok(make_matching_pennies()), out))
}

/// Seeded `n × n` zero-sum game with payoffs uniform in `[-1, 1]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pikl_game_random_zero_sum(n: usize, seed: u64, out: *mut *mut PiklGame) -> PiklStatus {
    guard(|| box_game(make_random_zero_sum(n, seed), out))
}

/// Two-player zero-sum game from the row player's `rows × cols` payoff
/// matrix in row-major order, with payoffs inside `[lo, hi]`.
///
/// # Safety
/// `payoffs` must point to `rows * cols` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pikl_game_from_matrix(
    rows: usize,
    cols: usize,
    payoffs: *const f64,
    lo: f64,
    hi: f64,
    out: *mut *mut PiklGame,
) -> PiklStatus {
    guard(|| {
        let Some(len) = rows.checked_mul(cols) else {
            return Err(fail(PiklStatus::InvalidArgument, "matrix too large"));
        };
        let flat = input(payoffs, len, "payoffs")?;
        let matrix: Vec<Vec<f64>> = flat.chunks(cols.max(1)).map(<[f64]>::to_vec).collect();
        box_game(
            NormalFormGame::zero_sum_matrix("matrix", matrix, RewardBounds::new(lo, hi)),
            out,
        )
    })
}

/// Releases a game; null is ignored.
///
/// # Safety
/// `game` must come from a `pikl_game_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pikl_game_free(game: *mut PiklGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// # Safety
/// `game` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pikl_game_num_players(game: *const PiklGame, out: *mut usize) -> PiklStatus {
    guard(|| write(out, game_ref(game)?.num_players(), "out"))
}

/// # Safety
/// `game` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pikl_game_num_actions(game: *const PiklGame, player: usize, out: *mut usize) -> PiklStatus {
    guard(|| {
        let g = game_ref(game)?;
        if player >= g.num_players() {
            return Err(fail(PiklStatus::InvalidArgument, format!("no player {player}")));
        }
        write(out, g.num_actions(player), "out")
    })
}

/// Sum over players of the best-response gain against `profile`. When
/// `gaps` is non-null it receives one gain per player.
///
/// # Safety
/// `profile` must hold `profile_len` doubles, `gaps` (if non-null) one per
/// player, and `total` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pikl_game_exploitability(
    game: *const PiklGame,
    profile: *const f64,
    profile_len: usize,
    gaps: *mut f64,
    total: *mut f64,
) -> PiklStatus {
    guard(|| {
        let g = game_ref(game)?;
        let profile = profile_from(g, input(profile, profile_len, "profile")?)?;
        let e = g.exploitability(&profile).map_err(from_core)?;
        if !gaps.is_null() {
            output(gaps, e.gaps.len(), "gaps")?.copy_from_slice(&e.gaps);
        }
        write(total, e.total, "total")
    })
}

/// `KL(p ‖ q)` over `n` actions.
///
/// # Safety
/// `p` and `q` must hold `n` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pikl_kl_divergence(p: *const f64, q: *const f64, n: usize, out: *mut f64) -> PiklStatus {
    guard(|| {
        let p = policy(input(p, n, "p")?)?;
        let q = policy(input(q, n, "q")?)?;
        write(out, pikl::kl_divergence(&p, &q).map_err(from_core)?, "out")
    })
}

/// Maximizer of `Σ π·Q − λ·KL(π ‖ τ)`: `τ·exp(Q/λ)` normalized.
///
/// # Safety
/// `q`, `tau` and `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn pikl_softmax_anchored(
    q: *const f64,
    tau: *const f64,
    n: usize,
    lambda: f64,
    out: *mut f64,
) -> PiklStatus {
    guard(|| {
        let tau = policy(input(tau, n, "tau")?)?;
        let p = pikl::softmax_anchored(input(q, n, "q")?, &tau, lambda).map_err(from_core)?;
        output(out, n, "out")?.copy_from_slice(p.probs());
        Ok(())
    })
}

/// Maximizer of `Σ π·Q − λ·KL(τ ‖ π)`.
///
/// # Safety
/// `q`, `tau` and `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn pikl_reverse_kl_opt(
    q: *const f64,
    tau: *const f64,
    n: usize,
    lambda: f64,
    out: *mut f64,
) -> PiklStatus {
    guard(|| {
        let tau = policy(input(tau, n, "tau")?)?;
        let s = pikl::reverse_kl_opt(input(q, n, "q")?, &tau, lambda).map_err(from_core)?;
        output(out, n, "out")?.copy_from_slice(s.policy.probs());
        Ok(())
    })
}

fn eta_mode(eta: f64) -> EtaMode {
    if eta > 0.0 {
        EtaMode::Constant(eta)
    } else {
        EtaMode::Adaptive { c: ADAPTIVE_C }
    }
}

/// New learner over `n` actions. `anchor` may be null for uniform (used by
/// [`PiklLearnerKind::Pikl`] only). `eta > 0` fixes the step size; `eta <= 0`
/// selects the adaptive schedule. `lambda` is ignored except for piKL.
///
/// # Safety
/// `anchor`, if non-null, must hold `n` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pikl_learner_new(
    kind: PiklLearnerKind,
    n: usize,
    anchor: *const f64,
    lambda: f64,
    eta: f64,
    seed: u64,
    out: *mut *mut PiklLearner,
) -> PiklStatus {
    guard(|| {
        if n == 0 {
            return Err(fail(PiklStatus::InvalidArgument, "learner needs at least one action"));
        }
        let learner: Box<dyn Learner + Send> = match kind {
            PiklLearnerKind::Pikl => {
                let anchor = if anchor.is_null() {
                    Policy::uniform(n)
                } else {
                    policy(input(anchor, n, "anchor")?)?
                };
                Box::new(PiklState::new(anchor, lambda, eta_mode(eta), seed).map_err(from_core)?)
            }
            PiklLearnerKind::Hedge => Box::new(HedgeState::new(n, eta_mode(eta), seed)),
            PiklLearnerKind::RegretMatching => Box::new(RmState::new(n, seed)),
        };
        write(out, Box::into_raw(Box::new(PiklLearner(learner))), "out")
    })
}

/// Releases a learner; null is ignored.
///
/// # Safety
/// `learner` must come from [`pikl_learner_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pikl_learner_free(learner: *mut PiklLearner) {
    if !learner.is_null() {
        drop(Box::from_raw(learner));
    }
}

unsafe fn learner_mut<'a>(learner: *mut PiklLearner) -> Result<&'a mut dyn Learner, PiklStatus> {
    match learner.as_mut() {
        Some(l) => Ok(l.0.as_mut()),
        None => Err(fail(PiklStatus::NullPointer, "learner is null")),
    }
}

fn check_len(expected: usize, got: usize) -> FfiResult {
    if expected == got {
        Ok(())
    } else {
        Err(fail(PiklStatus::BufferSize, format!("expected {expected} entries, got {got}")))
    }
}

/// Starts the next iteration and writes its policy to `out`.
///
/// # Safety
/// `learner` must be live; `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn pikl_learner_next_policy(learner: *mut PiklLearner, out: *mut f64, n: usize) -> PiklStatus {
    guard(|| {
        let l = learner_mut(learner)?;
        check_len(l.num_actions(), n)?;
        let p = l.next_policy();
        output(out, n, "out")?.copy_from_slice(p.probs());
        Ok(())
    })
}

/// Completes the current iteration with per-action utilities.
///
/// # Safety
/// `learner` must be live; `utilities` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn pikl_learner_observe(learner: *mut PiklLearner, utilities: *const f64, n: usize) -> PiklStatus {
    guard(|| {
        let l = learner_mut(learner)?;
        check_len(l.num_actions(), n)?;
        if l.iterations() == 0 {
            return Err(fail(PiklStatus::InvalidArgument, "observe called before next_policy"));
        }
        l.observe(input(utilities, n, "utilities")?);
        Ok(())
    })
}

/// Mean of the iterates so far.
///
/// # Safety
/// `learner` must be live; `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn pikl_learner_average_policy(learner: *mut PiklLearner, out: *mut f64, n: usize) -> PiklStatus {
    guard(|| {
        let l = learner_mut(learner)?;
        check_len(l.num_actions(), n)?;
        if l.iterations() == 0 {
            return Err(fail(PiklStatus::InvalidArgument, "no iterations yet"));
        }
        output(out, n, "out")?.copy_from_slice(l.average_policy().probs());
        Ok(())
    })
}

/// piKL self-play for `iterations` rounds; writes the average profile.
/// `anchors` may be null for uniform anchors. `eta > 0` fixes the step size,
/// `eta == 0` uses `1/(λβ + 2D)`, `eta < 0` the adaptive schedule.
/// `exact != 0` uses expected utilities instead of sampled actions.
///
/// # Safety
/// `anchors` (if non-null) and `out` must hold `profile_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pikl_selfplay(
    game: *const PiklGame,
    anchors: *const f64,
    lambda: f64,
    eta: f64,
    iterations: u64,
    exact: i32,
    seed: u64,
    out: *mut f64,
    profile_len: usize,
) -> PiklStatus {
    guard(|| {
        let g = game_ref(game)?;
        check_len(g.action_counts().iter().sum(), profile_len)?;
        let anchors = if anchors.is_null() {
            Profile::new(g.action_counts().iter().map(|&n| Policy::uniform(n)).collect())
        } else {
            profile_from(g, input(anchors, profile_len, "anchors")?)?
        };
        let eta = if eta > 0.0 {
            EtaSpec::Constant(eta)
        } else if eta == 0.0 {
            EtaSpec::Theory
        } else {
            EtaSpec::adaptive()
        };
        let players: Vec<PlayerSpec> = anchors
            .policies()
            .iter()
            .map(|a| PlayerSpec {
                solver: SolverSpec::Pikl { lambda, eta },
                anchor: a.clone(),
            })
            .collect();
        let options = SelfplayOptions {
            iterations,
            mode: if exact != 0 { Mode::Exact } else { Mode::Sampled },
            seed,
            record_iterates: false,
        };
        let result = run_selfplay(g, &players, options).map_err(from_core)?;
        let out = output(out, profile_len, "out")?;
        let mut offset = 0;
        for p in result.average.policies() {
            out[offset..offset + p.len()].copy_from_slice(p.probs());
            offset += p.len();
        }
        Ok(())
    })
}
