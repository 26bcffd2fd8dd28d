//! End-to-end runs of the `stencilsmith` binary.

use std::path::Path;
use std::process::{Command, Output};

fn stencilsmith(args: &[&str]) -> Output {
    stencilsmith_env(args, &[])
}

fn stencilsmith_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stencilsmith"));
    cmd.args(args).env_remove("STENCILSMITH_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.split_whitespace()
        .find_map(|w| w.strip_prefix(key)?.strip_prefix('='))
}

#[test]
fn verify_passes_for_every_kernel() {
    for kernel in ["hdiff", "vadvc", "copy"] {
        for precision in ["f32", "f64"] {
            let o = stencilsmith(&[
                "verify",
                "--kernel",
                kernel,
                "--dims",
                "20x17x8",
                "--tile",
                "5x3x8",
                "--workers",
                "3",
                "--precision",
                precision,
            ]);
            let out = stdout(&o);
            assert_eq!(code(&o), 0, "{kernel} {precision}: {out}{}", stderr(&o));
            assert_eq!(field(&out, "max_ulp_diff"), Some("0"));
            assert_eq!(out.lines().last(), Some("PASS"));
        }
    }
}

#[test]
fn corrupt_plan_is_reported_and_fails() {
    let o = stencilsmith(&[
        "verify",
        "--kernel",
        "hdiff",
        "--dims",
        "20x20x4",
        "--tile",
        "8x8x4",
        "--corrupt-plan",
    ]);
    let out = stdout(&o);
    assert_eq!(code(&o), 1, "{out}");
    assert!(!out.contains("plan=ok"));
    assert!(field(&out, "first_mismatch").is_some(), "{out}");
    assert_eq!(out.lines().last(), Some("FAIL"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["verify"],
        &["verify", "--kernel", "fastwaves"],
        &["verify", "--kernel", "hdiff", "--dims", "4x4"],
        &[
            "verify", "--kernel", "hdiff", "--dims", "20x20x4", "--tile", "17x1x1",
        ],
        &[
            "verify", "--kernel", "vadvc", "--dims", "20x20x8", "--tile", "4x4x2",
        ],
        &["verify", "--kernel", "hdiff", "--precision", "f16"],
        &["model", "--kernel", "hdiff", "--preset", "nope"],
        &["model", "--kernel", "copy", "--preset", "hbm_ocapi"],
        &["run", "--kernel", "hdiff", "--set", "colour=blue"],
        &["bench", "--kernel", "hdiff", "--set", "reps"],
        &[
            "tune",
            "--kernel",
            "hdiff",
            "--set",
            "mode=simulated_annealing",
        ],
        &["frobnicate"],
    ];
    for args in cases {
        let o = stencilsmith(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_exits_cleanly() {
    let o = stencilsmith(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("verify"));
}

#[test]
fn threads_variable_caps_workers() {
    let args = [
        "verify",
        "--kernel",
        "hdiff",
        "--dims",
        "20x20x4",
        "--tile",
        "4x4x4",
        "--workers",
        "8",
    ];
    let capped = stencilsmith_env(&args, &[("STENCILSMITH_THREADS", "2")]);
    assert_eq!(code(&capped), 0);
    assert_eq!(field(&stdout(&capped), "workers"), Some("2"));
    let free = stencilsmith(&args);
    assert_eq!(field(&stdout(&free), "workers"), Some("8"));
}

#[test]
fn config_file_is_layered_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# hdiff at double precision\nkernel = hdiff\ndims = 16x16x4\nprecision = f64\nseed = 9\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = stencilsmith(&["verify", "--config", cfg]);
    let out = stdout(&o);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(field(&out, "kernel"), Some("hdiff"));
    assert_eq!(field(&out, "precision"), Some("f64"));

    let o = stencilsmith(&[
        "verify",
        "--config",
        cfg,
        "--set",
        "kernel=copy",
        "--precision",
        "f32",
    ]);
    let out = stdout(&o);
    assert_eq!(field(&out, "kernel"), Some("copy"));
    assert_eq!(field(&out, "precision"), Some("f32"));
    assert_eq!(field(&out, "dims"), Some("16x16x4"));

    std::fs::write(dir.path().join("bad.cfg"), "kernel hdiff\n").unwrap();
    let bad = dir.path().join("bad.cfg");
    let o = stencilsmith(&["verify", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn run_output_reloads_with_the_same_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("out.nsg");
    let grid = grid.to_str().unwrap();
    let first = stencilsmith(&[
        "run",
        "--kernel",
        "hdiff",
        "--dims",
        "12x10x3",
        "--precision",
        "f64",
        "--out",
        grid,
    ]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    assert!(Path::new(grid).exists());

    let again = stencilsmith(&["run", "--kernel", "copy", "--set", &format!("input={grid}")]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));
    assert_eq!(
        field(&stdout(&first), "checksum"),
        field(&stdout(&again), "checksum")
    );

    std::fs::write(grid, b"NSG1 but truncated").unwrap();
    let broken = stencilsmith(&["run", "--kernel", "copy", "--set", &format!("input={grid}")]);
    assert_ne!(code(&broken), 0);
}

#[test]
fn model_writes_csv_files_to_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = stencilsmith(&[
        "model",
        "--kernel",
        "vadvc",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let scaling = std::fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    let energy = std::fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    assert_eq!(
        scaling.lines().next(),
        Some("kernel,preset,n_pe,time_s,gflops,power_w,gflops_per_watt,bottleneck")
    );
    assert_eq!(scaling.lines().count(), 1 + 14);
    assert_eq!(energy.lines().count(), 1 + 14);
    let row14: Vec<&str> = scaling.lines().last().unwrap().split(',').collect();
    let gflops: f64 = row14[4].parse().unwrap();
    assert!((gflops - 157.1).abs() <= 0.1571, "{gflops}");
    assert!(stdout(&o).contains("vadvc: peak"));
}

#[test]
fn infeasible_pe_counts_are_marked() {
    let o = stencilsmith(&[
        "model",
        "--kernel",
        "hdiff",
        "--preset",
        "hbm_multi_ocapi",
        "--set",
        "pe_max=4",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let scaling: Vec<&str> = out.split("\n\n").next().unwrap().lines().collect();
    assert_eq!(scaling.len(), 5);
    assert!(scaling[3].ends_with(",compute"));
    assert_eq!(scaling[4], "hdiff,hbm_multi_ocapi,4,,,,,infeasible");
}

#[test]
fn tune_demo_picks_depend_on_precision() {
    let pick = |bytes: &str| {
        let o = stencilsmith(&[
            "tune",
            "--demo",
            "--set",
            &format!("bytes_per_elem={bytes}"),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let notes = stderr(&o);
        field(&notes, "tile").map(str::to_string)
    };
    assert_eq!(pick("4").as_deref(), Some("16x16x8"));
    assert_eq!(pick("2").as_deref(), Some("4x4x8"));
}

#[test]
fn heuristic_tuning_is_checked_against_exhaustive() {
    for mode in ["hillclimb", "random"] {
        let o = stencilsmith(&["tune", "--demo", "--set", &format!("mode={mode}")]);
        assert_eq!(code(&o), 0, "{mode}: {}", stderr(&o));
        assert!(stderr(&o).contains("dominated_by_exhaustive_front=true"));
    }
}

#[test]
fn tune_without_a_feasible_tile_fails() {
    let o = stencilsmith(&["tune", "--demo", "--set", "budget=0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn outputs_are_reproducible() {
    let runs: &[&[&str]] = &[
        &["model", "--kernel", "hdiff"],
        &["model", "--kernel", "vadvc", "--preset", "ddr4_capi2"],
        &["tune", "--demo"],
        &[
            "tune",
            "--kernel",
            "vadvc",
            "--dims",
            "20x20x8",
            "--set",
            "mode=hillclimb",
        ],
    ];
    for args in runs {
        let a = stencilsmith(args);
        let b = stencilsmith(args);
        assert_eq!(code(&a), 0, "{args:?}: {}", stderr(&a));
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn bench_checksums_are_reproducible() {
    let bench = || {
        let o = stencilsmith(&[
            "bench",
            "--dims",
            "20x20x8",
            "--seed",
            "5",
            "--workers",
            "2",
            "--set",
            "reps=1",
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
        let headers = rdr.headers().unwrap().clone();
        let keep: Vec<usize> = headers
            .iter()
            .enumerate()
            .filter(|(_, h)| !matches!(*h, "time_s" | "gflops"))
            .map(|(i, _)| i)
            .collect();
        rdr.records()
            .map(|r| {
                let r = r.unwrap();
                keep.iter().map(|&i| r[i].to_string()).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    };
    let a = bench();
    assert_eq!(a.len(), 3);
    assert_eq!(a, bench());
}
