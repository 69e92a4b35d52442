use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use pikl_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pikl_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn rps() -> *mut PiklGame {
    let mut game = ptr::null_mut();
    assert_eq!(unsafe { pikl_game_rps(&mut game) }, PiklStatus::Ok);
    game
}

#[test]
fn game_handles_report_shapes() {
    unsafe {
        let mut blotto = ptr::null_mut();
        assert_eq!(pikl_game_blotto(10, 3, &mut blotto), PiklStatus::Ok);
        let (mut players, mut actions) = (0usize, 0usize);
        assert_eq!(pikl_game_num_players(blotto, &mut players), PiklStatus::Ok);
        assert_eq!(pikl_game_num_actions(blotto, 1, &mut actions), PiklStatus::Ok);
        assert_eq!((players, actions), (2, 66));
        assert_eq!(pikl_game_num_actions(blotto, 2, &mut actions), PiklStatus::InvalidArgument);
        pikl_game_free(blotto);
        pikl_game_free(ptr::null_mut());
    }
}

#[test]
fn exploitability_of_pure_rock() {
    let game = rps();
    let profile = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
    let mut gaps = [0.0; 2];
    let mut total = 0.0;
    let status = unsafe { pikl_game_exploitability(game, profile.as_ptr(), 6, gaps.as_mut_ptr(), &mut total) };
    assert_eq!(status, PiklStatus::Ok);
    assert_eq!(gaps, [1.0, 1.0]);
    assert_eq!(total, 2.0);

    let status = unsafe { pikl_game_exploitability(game, profile.as_ptr(), 5, ptr::null_mut(), &mut total) };
    assert_eq!(status, PiklStatus::BufferSize);
    assert!(last_error().contains("6"));
    unsafe { pikl_game_free(game) };
}

#[test]
fn matrix_games_validate_bounds() {
    let payoffs = [0.5, -0.5, -0.5, 0.5];
    let mut game = ptr::null_mut();
    assert_eq!(unsafe { pikl_game_from_matrix(2, 2, payoffs.as_ptr(), -1.0, 1.0, &mut game) }, PiklStatus::Ok);
    unsafe { pikl_game_free(game) };
    let status = unsafe { pikl_game_from_matrix(2, 2, payoffs.as_ptr(), -0.1, 0.1, &mut game) };
    assert_eq!(status, PiklStatus::InvalidArgument);
    assert!(!last_error().is_empty());
}

#[test]
fn null_pointers_are_reported() {
    let mut out = 0.0;
    let p = [0.5, 0.5];
    assert_eq!(unsafe { pikl_kl_divergence(ptr::null(), p.as_ptr(), 2, &mut out) }, PiklStatus::NullPointer);
    assert_eq!(unsafe { pikl_game_num_players(ptr::null(), ptr::null_mut()) }, PiklStatus::NullPointer);
}

#[test]
fn kl_support_violation() {
    let p = [0.5, 0.5];
    let q = [1.0, 0.0];
    let mut out = 0.0;
    assert_eq!(unsafe { pikl_kl_divergence(p.as_ptr(), q.as_ptr(), 2, &mut out) }, PiklStatus::SupportViolation);
    assert_eq!(unsafe { pikl_kl_divergence(q.as_ptr(), p.as_ptr(), 2, &mut out) }, PiklStatus::Ok);
    assert!((out - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn anchored_responses() {
    let q = [1.0, 0.0];
    let tau = [0.5, 0.5];
    let mut out = [0.0; 2];
    assert_eq!(unsafe { pikl_softmax_anchored(q.as_ptr(), tau.as_ptr(), 2, 1.0, out.as_mut_ptr()) }, PiklStatus::Ok);
    let e = std::f64::consts::E;
    assert!((out[0] - e / (1.0 + e)).abs() < 1e-12);
    assert_eq!(
        unsafe { pikl_softmax_anchored(q.as_ptr(), tau.as_ptr(), 2, 0.0, out.as_mut_ptr()) },
        PiklStatus::InvalidArgument
    );

    let q = [0.3, 0.3, 0.3];
    let tau = [0.5, 0.3, 0.2];
    let mut out = [0.0; 3];
    assert_eq!(unsafe { pikl_reverse_kl_opt(q.as_ptr(), tau.as_ptr(), 3, 0.7, out.as_mut_ptr()) }, PiklStatus::Ok);
    for (a, b) in out.iter().zip(&tau) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn learner_round_trip() {
    unsafe {
        let mut learner = ptr::null_mut();
        let status = pikl_learner_new(PiklLearnerKind::Hedge, 2, ptr::null(), 0.0, 1.0, 7, &mut learner);
        assert_eq!(status, PiklStatus::Ok);
        let mut p = [0.0; 2];
        assert_eq!(pikl_learner_average_policy(learner, p.as_mut_ptr(), 2), PiklStatus::InvalidArgument);
        assert_eq!(pikl_learner_next_policy(learner, p.as_mut_ptr(), 2), PiklStatus::Ok);
        assert_eq!(p, [0.5, 0.5]);
        let u = [1.0, -1.0];
        assert_eq!(pikl_learner_observe(learner, u.as_ptr(), 2), PiklStatus::Ok);
        assert_eq!(pikl_learner_next_policy(learner, p.as_mut_ptr(), 2), PiklStatus::Ok);
        let e2 = (2.0f64).exp();
        assert!((p[0] - e2 / (1.0 + e2)).abs() < 1e-12);
        assert_eq!(pikl_learner_next_policy(learner, p.as_mut_ptr(), 3), PiklStatus::BufferSize);
        pikl_learner_free(learner);

        let bad_anchor = [1.0, 0.0];
        let status = pikl_learner_new(PiklLearnerKind::Pikl, 2, bad_anchor.as_ptr(), 1.0, 1.0, 0, &mut learner);
        assert_eq!(status, PiklStatus::SupportViolation);
    }
}

#[test]
fn selfplay_with_dominant_anchor() {
    let mut game = ptr::null_mut();
    assert_eq!(unsafe { pikl_game_matching_pennies(&mut game) }, PiklStatus::Ok);
    let anchors = [0.9, 0.1, 0.9, 0.1];
    let mut avg = [0.0; 4];
    let status = unsafe { pikl_selfplay(game, anchors.as_ptr(), 1e6, 0.0, 1000, 1, 0, avg.as_mut_ptr(), 4) };
    assert_eq!(status, PiklStatus::Ok);
    for (a, t) in avg.iter().zip(&anchors) {
        assert!((a - t).abs() < 0.01);
    }
    unsafe { pikl_game_free(game) };
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pikl.h");
    let text = std::fs::read_to_string(&header).expect("build script writes the header");
    for name in [
        "pikl_last_error_message",
        "pikl_game_blotto",
        "pikl_game_free",
        "pikl_game_exploitability",
        "pikl_softmax_anchored",
        "pikl_reverse_kl_opt",
        "pikl_learner_new",
        "pikl_selfplay",
        "typedef struct PiklGame PiklGame;",
        "PIKL_STATUS_OK = 0",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pikl.h");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(&src, format!("#include \"{}\"\nint main(void) {{ return PIKL_STATUS_OK; }}\n", header.display())).unwrap();
    let Ok(status) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).status() else {
        eprintln!("no C compiler available; skipping");
        return;
    };
    assert!(status.success());
}
