//! Cross-module integration: file formats, CLI behavior, and the worked
//! construction/optimization/lift path end to end at toy scale.

use absc::ab::{build_ab, extract_nested, AbMatrixSpec};
use absc::alc::{alc_mu_for_spec, alc_report};
use absc::census::{census_report, Convention};
use absc::coupling::{ScCodeSpec, SpreadingMatrix};
use absc::gf2::{from_alist, to_alist};
use absc::lift::{lift_nested_family, residual_6cycles};
use absc::optimize::{run_method1, Method, NestedPlan};
use absc::sim::{ber_sweep, ChannelConfig, DecoderConfig, SimCode, WindowCode};
use std::process::Command;

fn absc_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_absc"))
}

#[test]
fn cli_construct_matches_nested_extraction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sub.json");
    let alist = dir.path().join("sub.alist");
    let status = absc_bin()
        .args([
            "construct", "--gamma", "5", "--p", "5", "--rows", "0,1,2,3", "--out",
        ])
        .arg(&out)
        .arg("--alist")
        .arg(&alist)
        .status()
        .unwrap();
    assert!(status.success());
    let spec = ScCodeSpec::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let expected = extract_nested(&build_ab(5, 5).unwrap(), &[0, 1, 2, 3]).unwrap();
    assert_eq!(spec.base.grid(), expected);
    // The alist export round-trips to the same expanded matrix.
    let parsed = from_alist(&std::fs::read_to_string(&alist).unwrap()).unwrap();
    assert_eq!(parsed, expected.expand());
    assert_eq!(to_alist(&parsed), std::fs::read_to_string(&alist).unwrap());
}

#[test]
fn cli_usage_error_exits_two() {
    let status = absc_bin().status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = absc_bin().args(["count"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn cli_missing_file_exits_one() {
    let status = absc_bin()
        .args(["count", "--spec", "/nonexistent/spec.json"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn cli_count_check_agrees_on_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("example.json");
    let base = AbMatrixSpec::new(3, 5, vec![0, 1, 2]).unwrap();
    let b = SpreadingMatrix::from_rows(
        &[vec![1, 0, 0, 0, 1], vec![1, 1, 1, 0, 0], vec![0, 0, 1, 1, 0]],
        1,
    )
    .unwrap();
    let spec = ScCodeSpec::new(base, b, 4, None).unwrap();
    std::fs::write(&path, spec.to_json()).unwrap();
    let output = absc_bin()
        .args(["count", "--method", "both", "--check", "--spec"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("[oracle]"));
    assert!(text.contains("[alc]"));
}

#[test]
fn cli_optimize_lift_simulate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let output = absc_bin().current_dir(dir.path()).args(args).output().unwrap();
        assert!(
            output.status.success(),
            "command {args:?} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        String::from_utf8(output.stdout).unwrap()
    };
    run(&[
        "optimize", "--gamma", "5", "--p", "5", "--m", "1", "--l", "4", "--method", "1",
        "--subcodes", "0,1,2,3", "--lmax", "3000", "--seed", "3", "--out-dir", "opt",
    ]);
    for f in ["global.json", "sub1.json", "manifest.json", "trace.csv"] {
        assert!(dir.path().join("opt").join(f).exists(), "missing {f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("opt/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["codes"].as_array().unwrap().len(), 2);
    assert!(manifest["shared_rows_checksum"].as_str().unwrap().len() == 64);
    let trace = std::fs::read_to_string(dir.path().join("opt/trace.csv")).unwrap();
    assert!(trace.starts_with("search,iteration,rho\n"));

    run(&[
        "lift", "--spec", "opt/global.json,opt/sub1.json", "--j", "3", "--budget", "4000",
        "--seed", "1",
    ]);
    let global =
        ScCodeSpec::from_json(&std::fs::read_to_string(dir.path().join("opt/global.json")).unwrap())
            .unwrap();
    let sub =
        ScCodeSpec::from_json(&std::fs::read_to_string(dir.path().join("opt/sub1.json")).unwrap())
            .unwrap();
    let gl = global.lift.clone().unwrap();
    let sl = sub.lift.clone().unwrap();
    assert_eq!(gl.j, 3);
    // Shared rows carry identical shifts.
    for v in 0..2 {
        for i in 0..3 {
            assert_eq!(gl.shifts[v][i], sl.shifts[v][i]);
        }
    }

    let csv1 = run(&[
        "simulate", "--spec", "opt/global.json", "--snr", "3.0", "--seed", "7", "--max-frames",
        "64", "--min-frame-errors", "5", "--early-stop", "--out", "ber.csv",
    ]);
    let csv2 = run(&[
        "simulate", "--spec", "opt/global.json", "--snr", "3.0", "--seed", "7", "--max-frames",
        "64", "--min-frame-errors", "5", "--early-stop", "--out", "ber2.csv",
    ]);
    // Replays are byte-identical.
    assert_eq!(
        std::fs::read(dir.path().join("ber.csv")).unwrap(),
        std::fs::read(dir.path().join("ber2.csv")).unwrap()
    );
    assert_eq!(csv1, csv2);
}

#[test]
fn spec_files_round_trip_exactly() {
    let base = AbMatrixSpec::new(5, 7, vec![0, 1, 2, 4]).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
    let b = SpreadingMatrix::random(4, 7, 2, &mut rng);
    let grid = base.grid();
    let mut lift = absc::coupling::LiftAssignment::zero(&grid, 4, 3);
    lift.shifts[2][3][6] = 3;
    let spec = ScCodeSpec::new(base, b, 5, Some(lift)).unwrap();
    let text = spec.to_json();
    let back = ScCodeSpec::from_json(&text).unwrap();
    assert_eq!(back, spec);
    assert_eq!(back.to_json(), text);
}

#[test]
fn nested_pipeline_constraint_safety() {
    // Rows fixed by earlier steps stay bit-identical in every later code.
    let plan = NestedPlan {
        gamma: 6,
        p: 7,
        memory: 1,
        coupling_len: 3,
        subcode_rows: vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3, 4]],
        order: vec![0, 1],
        method: Method::One,
        lmax: 1500,
        seed: 5,
        covers: vec![],
    };
    let out = run_method1(&plan).unwrap();
    let b4 = &out.nested[0].spreading;
    let b5 = &out.nested[1].spreading;
    for i in 0..3 {
        assert_eq!(out.global.spreading.row(i), b4.row(i));
        assert_eq!(out.global.spreading.row(i), b5.row(i));
    }
    assert_eq!(b4.row(3), b5.row(3));
    // Census and line counting agree on each emitted spec.
    for spec in out.nested.iter().chain([&out.global]) {
        assert_eq!(
            alc_report(spec, Convention::Cycles).unwrap().per_block_span,
            census_report(spec, Convention::Cycles).per_block_span
        );
    }
}

#[test]
fn lifted_family_residuals_respect_constraints() {
    let plan = NestedPlan {
        gamma: 5,
        p: 5,
        memory: 1,
        coupling_len: 4,
        subcode_rows: vec![vec![0, 1, 2, 3]],
        order: vec![0],
        method: Method::One,
        lmax: 2000,
        seed: 2,
        covers: vec![],
    };
    let out = run_method1(&plan).unwrap();
    let specs = vec![out.global.clone(), out.nested[0].clone()];
    let lifted = lift_nested_family(&specs, 5, 30_000, 4).unwrap();
    // The constrained nested search still eliminates the residual cycles
    // here, matching the direct residual census.
    for (spec, outcome) in specs.iter().zip(&lifted) {
        assert_eq!(
            residual_6cycles(spec, &outcome.assign).unwrap(),
            outcome.residual
        );
    }
    assert_eq!(lifted[0].residual, 0);
}

#[test]
fn window_and_flood_agree_on_strong_signal() {
    let plan = NestedPlan {
        gamma: 3,
        p: 5,
        memory: 1,
        coupling_len: 6,
        subcode_rows: vec![],
        order: vec![],
        method: Method::One,
        lmax: 2000,
        seed: 0,
        covers: vec![],
    };
    let mut spec = run_method1(&plan).unwrap().global;
    let lift = absc::lift::search_lift(&spec, 2, 2000, 0).unwrap();
    spec.lift = Some(lift.assign);
    let code = WindowCode::from_spec(&spec).unwrap();
    let channel = ChannelConfig {
        ebn0_db: vec![6.0],
        rate: 0.4,
        seed: 3,
        max_frames: 48,
        min_bit_errors: u64::MAX,
        min_frame_errors: u64::MAX,
    };
    let window_cfg = DecoderConfig {
        window_symbols: Some(4 * spec.lifted_constraint_length()),
        ..DecoderConfig::default()
    };
    let flood = ber_sweep(
        &SimCode::Flood(code.h.clone()),
        &channel,
        &DecoderConfig::default(),
    )
    .unwrap();
    let windowed = ber_sweep(&SimCode::Window(code), &channel, &window_cfg).unwrap();
    // At high SNR both decoders clear every frame.
    assert_eq!(flood[0].bit_errors, 0);
    assert_eq!(windowed[0].bit_errors, 0);
}

#[test]
fn random_spreadings_obey_mu_scaling_against_alc() {
    // One broader seeded sample mixing base sizes, as a cross-check that
    // the persisted spec path preserves counting behavior.
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(31);
    for (gamma, rows, p, m) in [
        (3usize, vec![0usize, 1, 2], 5usize, 1usize),
        (4, vec![0, 1, 3], 7, 2),
        (5, vec![0, 2, 3, 4], 5, 1),
    ] {
        let base = AbMatrixSpec::new(gamma, p, rows.clone()).unwrap();
        let b = SpreadingMatrix::random(rows.len(), p, m, &mut rng);
        let spec = ScCodeSpec::new(base, b, m + 3, None).unwrap();
        let through_json = ScCodeSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(
            alc_mu_for_spec(&through_json).unwrap(),
            absc::census::mu_decomposition(&spec.components())
        );
    }
}
