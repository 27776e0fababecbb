//! C interface to `fpinit`.
//!
//! Games and solutions are opaque heap handles released with the matching
//! `_free` function. Every fallible call returns an [`FpiStatus`]; on failure
//! [`fpi_last_error`] describes what went wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fpinit::experiments::{solve_game, SolveOptions};
use fpinit::game::game_from_json;
use fpinit::{Error, FpResult, FpRunConfig, Game, InitAlgorithm, StrategyProfile};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    ParseError = 4,
    UnknownAlgorithm = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

/// Opaque payoff tensor.
pub struct FpiGame(Game);

/// Opaque result of best-of-K fictitious play.
pub struct FpiSolution(FpResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> FpiStatus {
    match err {
        Error::ShapeMismatch(_) => FpiStatus::ShapeMismatch,
        Error::Json(_) | Error::MalformedGame { .. } | Error::Csv(_) => FpiStatus::ParseError,
        Error::UnknownAlgorithm(_) => FpiStatus::UnknownAlgorithm,
        Error::Io(_) => FpiStatus::Internal,
        _ => FpiStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and turning panics into `Internal`.
fn guard<F>(f: F) -> FpiStatus
where
    F: FnOnce() -> Result<(), (FpiStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FpiStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FpiStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (FpiStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FpiStatus, String) {
    (FpiStatus::NullPointer, format!("{what} is null"))
}

unsafe fn game_ref<'a>(game: *const FpiGame) -> Result<&'a Game, (FpiStatus, String)> {
    game.as_ref().map(|g| &g.0).ok_or_else(|| null("game"))
}

unsafe fn solution_ref<'a>(sol: *const FpiSolution) -> Result<&'a FpResult, (FpiStatus, String)> {
    sol.as_ref().map(|s| &s.0).ok_or_else(|| null("solution"))
}

unsafe fn slice_arg<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], (FpiStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), (FpiStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn fpi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fpi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a game from `players * actions^players` payoffs, player-major,
/// joint profiles row-major with player 0 most significant.
///
/// # Safety
/// `payoffs` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpi_game_new(
    players: usize,
    actions: usize,
    payoffs: *const f64,
    len: usize,
    out: *mut *mut FpiGame,
) -> FpiStatus {
    guard(|| {
        let payoffs = slice_arg(payoffs, len, "payoffs")?.to_vec();
        let game = Game::new(players, actions, payoffs).map_err(lib_err)?;
        store(out, FpiGame(game))
    })
}

/// Seeded game with payoffs uniform in [0, 1).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpi_game_random(
    players: usize,
    actions: usize,
    seed: u64,
    out: *mut *mut FpiGame,
) -> FpiStatus {
    guard(|| {
        let game = fpinit::random_game(players, actions, seed).map_err(lib_err)?;
        store(out, FpiGame(game))
    })
}

/// Parses `{"players": n, "actions": m, "payoffs": [...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpi_game_from_json(json: *const c_char, out: *mut *mut FpiGame) -> FpiStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (FpiStatus::ParseError, format!("json is not UTF-8: {e}")))?;
        let game = game_from_json(text).map_err(lib_err)?;
        store(out, FpiGame(game))
    })
}

/// # Safety
/// `game` must come from an `fpi_game_*` constructor and not be used after.
#[no_mangle]
pub unsafe extern "C" fn fpi_game_free(game: *mut FpiGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Number of players, or 0 for a null handle.
///
/// # Safety
/// `game` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpi_game_num_players(game: *const FpiGame) -> usize {
    game.as_ref().map_or(0, |g| g.0.num_players())
}

/// Actions per player, or 0 for a null handle.
///
/// # Safety
/// `game` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpi_game_num_actions(game: *const FpiGame) -> usize {
    game.as_ref().map_or(0, |g| g.0.num_actions())
}

/// Largest gain any player gets from a unilateral pure deviation from the
/// flat profile `probs` (`players * actions` values, one row per player).
///
/// # Safety
/// `game` must be live, `probs` must hold `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fpi_epsilon(
    game: *const FpiGame,
    probs: *const f64,
    len: usize,
    out: *mut f64,
) -> FpiStatus {
    guard(|| {
        let game = game_ref(game)?;
        let probs = slice_arg(probs, len, "probs")?.to_vec();
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let profile = StrategyProfile::from_flat(game.num_actions(), probs).map_err(lib_err)?;
        *out = fpinit::epsilon(game, &profile).map_err(lib_err)?.epsilon;
        Ok(())
    })
}

/// Best-of-`k` fictitious play from initializations chosen by `algorithm`
/// (`classic`, `macqueen-1`, `macqueen-2`, `maximin-u`, `maximin-s`, `fp++`
/// or `k-means`). `pool` is the sampled pool size for the pool-based
/// algorithms.
///
/// # Safety
/// `game` must be live, `algorithm` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fpi_solve(
    game: *const FpiGame,
    algorithm: *const c_char,
    k: usize,
    pool: usize,
    iterations: usize,
    seed: u64,
    out: *mut *mut FpiSolution,
) -> FpiStatus {
    guard(|| {
        let game = game_ref(game)?;
        if algorithm.is_null() {
            return Err(null("algorithm"));
        }
        let id = CStr::from_ptr(algorithm)
            .to_str()
            .map_err(|_| (FpiStatus::UnknownAlgorithm, "algorithm is not UTF-8".to_string()))?;
        let algorithm: InitAlgorithm = id.parse().map_err(lib_err)?;
        let options = SolveOptions {
            algorithm,
            k,
            pool_size: pool,
            fp: FpRunConfig::with_iterations(iterations),
            seed,
            ..SolveOptions::default()
        };
        let (_, result) = solve_game(game, &options).map_err(lib_err)?;
        store(out, FpiSolution(result))
    })
}

/// # Safety
/// `solution` must come from [`fpi_solve`] and not be used after.
#[no_mangle]
pub unsafe extern "C" fn fpi_solution_free(solution: *mut FpiSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Epsilon of the returned profile, or NaN for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpi_solution_epsilon(solution: *const FpiSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.0.epsilon())
}

/// Index of the winning initialization within the batch.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpi_solution_init_index(solution: *const FpiSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.init_index)
}

/// Number of doubles [`fpi_solution_probs`] writes (`players * actions`).
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpi_solution_len(solution: *const FpiSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.final_profile.as_slice().len())
}

/// Copies the flat profile into `buf`, which must hold at least
/// [`fpi_solution_len`] doubles.
///
/// # Safety
/// `solution` must be live and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fpi_solution_probs(solution: *const FpiSolution, buf: *mut f64, len: usize) -> FpiStatus {
    guard(|| {
        let probs = solution_ref(solution)?.final_profile.as_slice();
        if len < probs.len() {
            return Err((
                FpiStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", probs.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(probs.as_ptr(), buf, probs.len());
        Ok(())
    })
}
