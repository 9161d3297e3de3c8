//! End-to-end checks of the command-line binary: exit codes, output formats,
//! custom problem files, thread-cap determinism, and completion of every
//! accepted solver/scheme pairing on the full reference grid.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fraccal"));
    // Isolate from whatever the ambient environment sets.
    c.env_remove("FRACCAL_THREADS");
    c
}

/// Run the binary; return (exit code, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary spawns");
    (
        out.status.code().expect("no signal"),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

/// Scratch path that is unique per test name within this test process.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fraccal-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("scratch dir");
    dir.join(name)
}

#[test]
fn reference_invocation_emits_parsable_csv() {
    let (code, stdout, stderr) = run(&[
        "--problem",
        "example1",
        "--solver",
        "ns2",
        "--scheme",
        "gl_trunc",
        "--alpha",
        "0.5",
        "--h-start",
        "0.0125",
        "--h-steps",
        "2",
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "alpha,h,max_error,order");
    assert_eq!(lines.len(), 3, "header plus one row per step size");
    for (i, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4);
        assert_eq!(fields[0], "0.5");
        let h: f64 = fields[1].parse().unwrap();
        assert!((h - 0.0125 / (1 << i) as f64).abs() < 1e-15);
        let err: f64 = fields[2].parse().unwrap();
        assert!(err > 0.0 && err < 1e-2);
        let order: f64 = fields[3].parse().unwrap();
        assert!(
            (1.7..2.3).contains(&order),
            "second-order scheme should report order ≈ 2, got {order}"
        );
    }
}

#[test]
fn incompatible_pair_is_a_usage_error_naming_both_sides() {
    let (code, _, stderr) = run(&["--problem", "example1", "--solver", "ns1", "--scheme", "gl"]);
    assert_eq!(code, 2);
    assert!(
        stderr.contains("ns1") && stderr.contains("gl"),
        "mismatch message must name both tags: {stderr}"
    );
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        // unknown scheme tag
        &["--problem", "example1", "--solver", "ns1", "--scheme", "l2"],
        // derivative order outside (0,1)
        &[
            "--problem",
            "example1",
            "--solver",
            "ns1",
            "--scheme",
            "l1",
            "--alpha",
            "1.5",
        ],
        &[
            "--problem",
            "example1",
            "--solver",
            "ns1",
            "--scheme",
            "l1",
            "--alpha",
            "0",
        ],
        // step size not the reciprocal of an even integer ≥ 4
        &[
            "--problem",
            "example1",
            "--solver",
            "ns1",
            "--scheme",
            "l1",
            "--h-start",
            "0.013",
        ],
        &[
            "--problem",
            "example1",
            "--solver",
            "ns1",
            "--scheme",
            "l1",
            "--h-start",
            "0.2",
        ],
        // empty refinement sequence
        &[
            "--problem",
            "example1",
            "--solver",
            "ns1",
            "--scheme",
            "l1",
            "--h-steps",
            "0",
        ],
        // nonpositive tail divisor
        &[
            "--problem",
            "example1",
            "--solver",
            "ns1",
            "--scheme",
            "l1",
            "--p",
            "0",
        ],
        // unknown tail variant and format
        &[
            "--problem",
            "example1",
            "--solver",
            "ns1",
            "--scheme",
            "l1",
            "--tail-variant",
            "exact",
        ],
        &[
            "--problem",
            "example1",
            "--solver",
            "ns1",
            "--scheme",
            "l1",
            "--format",
            "tsv",
        ],
        // system solver on a scalar problem
        &["--problem", "example1", "--solver", "ns3", "--scheme", "l1"],
        // missing problem file
        &[
            "--problem",
            "/no/such/problem.txt",
            "--solver",
            "ns1",
            "--scheme",
            "l1",
        ],
        // flag rejected by the argument parser itself
        &[
            "--problem",
            "example1",
            "--solver",
            "ns1",
            "--scheme",
            "l1",
            "--bogus",
        ],
        // required flags absent entirely
        &[],
    ];
    for args in cases {
        let (code, _, stderr) = run(args);
        assert_eq!(
            code, 2,
            "args {args:?} should be a usage error; stderr: {stderr}"
        );
    }
}

#[test]
fn unwritable_output_path_exits_3() {
    let (code, _, stderr) = run(&[
        "--problem",
        "example1",
        "--solver",
        "ns1",
        "--scheme",
        "l1",
        "--alpha",
        "0.5",
        "--h-start",
        "0.25",
        "--h-steps",
        "1",
        "--out",
        "/no-such-directory-zzz/table.csv",
    ]);
    assert_eq!(code, 3, "stderr: {stderr}");
    assert!(stderr.contains("error:"), "failure is reported: {stderr}");
}

#[test]
fn constant_solution_suppresses_orders_in_both_formats() {
    let path = scratch("constant.problem");
    fs::write(
        &path,
        "# flat scalar problem\nalpha = 0.3\nl = 1.0\nsolution = constant\ny0 = 2.0\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();

    let common = [
        "--solver",
        "ns1",
        "--scheme",
        "l1",
        "--h-start",
        "0.125",
        "--h-steps",
        "2",
    ];
    let (code, csv, stderr) = run(&[&["--problem", p], &common[..]].concat());
    assert_eq!(code, 0, "stderr: {stderr}");
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4);
        let err: f64 = fields[2].parse().unwrap();
        assert!(
            err <= 1e-12,
            "a constant solution is reproduced to rounding"
        );
        assert!(
            fields[3].is_empty(),
            "order column is suppressed at the error floor"
        );
    }

    let (code, md, _) = run(&[&["--problem", p], &common[..], &["--format", "md"]].concat());
    assert_eq!(code, 0);
    assert!(
        md.contains('—'),
        "suppressed orders render as an em-dash in markdown"
    );
    assert!(md.lines().next().unwrap().starts_with("| h |"));
}

#[test]
fn problem_file_alpha_is_default_and_flag_overrides() {
    let path = scratch("filealpha.problem");
    fs::write(&path, "alpha = 0.5\nl = 2.0\nsolution = exp\n").unwrap();
    let p = path.to_str().unwrap();
    let common = [
        "--solver",
        "ns1",
        "--scheme",
        "l1_mod",
        "--h-start",
        "0.125",
        "--h-steps",
        "1",
    ];

    let (code, stdout, _) = run(&[&["--problem", p], &common[..]].concat());
    assert_eq!(code, 0);
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(
        rows[0].starts_with("0.5,"),
        "file-supplied α is the default: {stdout}"
    );

    let (code, stdout, _) =
        run(&[&["--problem", p], &common[..], &["--alpha", "0.25,0.75"]].concat());
    assert_eq!(code, 0);
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(
        rows[0].starts_with("0.25,") && rows[1].starts_with("0.75,"),
        "explicit --alpha overrides the file value: {stdout}"
    );
}

#[test]
fn malformed_problem_files_are_usage_errors() {
    let cases = [
        (
            "dup.problem",
            "alpha = 0.5\nalpha = 0.6\nl = 1\nsolution = exp\n",
        ),
        ("unknown.problem", "l = 1\nsolution = exp\nspin = 7\n"),
        (
            "mixed.problem",
            "l = 1\na = 1\nb = 0\nc = 0\nd = 1\nsolution = exp\n",
        ),
        ("nosolution.problem", "l = 1\n"),
        ("badnumber.problem", "l = one\nsolution = exp\n"),
        ("badsolution.problem", "l = 1\nsolution = cubic\n"),
        ("ic.problem", "l = 1\nsolution = exp\ny0 = 0.5\n"),
    ];
    for (name, text) in cases {
        let path = scratch(name);
        fs::write(&path, text).unwrap();
        let (code, _, stderr) = run(&[
            "--problem",
            path.to_str().unwrap(),
            "--solver",
            "ns1",
            "--scheme",
            "l1",
            "--h-start",
            "0.25",
            "--h-steps",
            "1",
        ]);
        assert_eq!(code, 2, "{name} should be rejected; stderr: {stderr}");
    }
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = [
        "--problem",
        "example2",
        "--solver",
        "ns2",
        "--scheme",
        "gl_last2",
        "--alpha",
        "0.2,0.5,0.9",
        "--h-start",
        "0.025",
        "--h-steps",
        "2",
    ];
    let run_with = |threads: &str| {
        let out = bin()
            .args(args)
            .env("FRACCAL_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let single = run_with("1");
    let four = run_with("4");
    let (code, unset, _) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(
        single, four,
        "cell results must not depend on the thread count"
    );
    assert_eq!(unset.as_bytes(), &single[..], "and not on capping at all");
}

#[test]
fn out_file_receives_exactly_the_stdout_table() {
    let args = [
        "--problem",
        "example1",
        "--solver",
        "ns2",
        "--scheme",
        "shift_2",
        "--alpha",
        "0.4",
        "--h-start",
        "0.0625",
        "--h-steps",
        "2",
    ];
    let (code, stdout, _) = run(&args);
    assert_eq!(code, 0);

    let path = scratch("table.csv");
    let path_s = path.to_str().unwrap();
    let (code, piped, _) = run(&[&args[..], &["--out", path_s]].concat());
    assert_eq!(code, 0);
    assert!(piped.is_empty(), "--out replaces stdout emission");
    assert_eq!(fs::read_to_string(&path).unwrap(), stdout);
}

#[test]
fn every_accepted_pairing_completes_the_reference_grid() {
    let grid_point = ["l1", "l1_mod", "l1_trunc", "l1_mod_trunc"];
    let shifted = [
        "gl",
        "gl_trunc",
        "shift_2ma",
        "shift_2",
        "gl_last2",
        "gl_last2_trunc",
    ];
    let mut pairings: Vec<(&str, &str, &str)> = Vec::new();
    for s in grid_point {
        pairings.push(("ns1", s, "example2"));
        pairings.push(("ns3", s, "example3"));
    }
    for s in shifted {
        pairings.push(("ns2", s, "example2"));
        pairings.push(("ns4", s, "example3"));
    }
    assert_eq!(pairings.len(), 20);

    for (solver, scheme, problem) in pairings {
        let (code, stdout, stderr) = run(&[
            "--problem",
            problem,
            "--solver",
            solver,
            "--scheme",
            scheme,
            "--alpha",
            "0.2,0.5,0.9",
            "--h-start",
            "0.00625",
            "--h-steps",
            "4",
        ]);
        assert_eq!(code, 0, "{solver}+{scheme} on {problem} failed: {stderr}");
        let rows = stdout.lines().count();
        assert_eq!(rows, 13, "{solver}+{scheme}: header plus 3α × 4 step sizes");
        for line in stdout.lines().skip(1) {
            let err: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
            assert!(err.is_finite() && err >= 0.0);
        }
    }
}
