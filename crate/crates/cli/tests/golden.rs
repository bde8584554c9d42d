use std::process::{Command, Output};

fn ko7(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ko7"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> &str {
    std::str::from_utf8(&o.stdout).unwrap()
}

#[test]
fn normalize_integrate_delta() {
    let o = ko7(&["normalize", "(integrate (delta void))"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "void\n");
}

#[test]
fn normalize_trace_shows_measures() {
    let o = ko7(&["normalize", "--trace", "(integrate (delta void))"]);
    assert_eq!(
        stdout(&o),
        "IntDelta at []: (integrate (delta void)) => void ((0, {}, 3) -> (0, {}, 1))\nvoid\n"
    );
}

#[test]
fn witness_nonjoin() {
    let o = ko7(&["witness", "nonjoin"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "fork at (eqw void void)\n\
         \x20 EqRefl => void\n\
         \x20 EqDiff => (integrate (merge void void))\n\
         normal forms under the full relation\n\
         \x20 void\n\
         \x20 (integrate void)\n\
         verdict: not joinable (budget 1000, search exhaustive)\n"
    );
}

#[test]
fn nogo_tree_depth() {
    let o = ko7(&["check", "nogo", "--family", "tree-depth"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "tree-depth: counterexample RecSucc at []: (rec void void (delta void)) => \
         (app void (rec void void void)) (3 -> 3, NoStrictDrop)\n"
    );
}

#[test]
fn nogo_polarity() {
    // every catalog family fails, which is the expected verdict
    assert_eq!(ko7(&["check", "nogo"]).status.code(), Some(0));
    // the canonical measure holding is also the expected verdict
    assert_eq!(
        ko7(&["check", "nogo", "--family", "measure3"])
            .status
            .code(),
        Some(0)
    );
    // a bound too small for the merge-cancel tie is a failed check
    let o = ko7(&[
        "check",
        "nogo",
        "--family",
        "head-precedence",
        "--max-size",
        "6",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        ko7(&["check", "nogo", "--family", "nope"]).status.code(),
        Some(2)
    );
}

#[test]
fn parse_errors_exit_2_with_offset() {
    let o = ko7(&["parse", "(merge void"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("byte 11"));
    let o = ko7(&["parse", "(delta void void)"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("arity error at byte 0"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ko7(&[]).status.code(), Some(2));
    assert_eq!(ko7(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        ko7(&["step", "void", "--relation", "sideways"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ko7(&["reaches", "void", "(eqw void void)"]).status.code(),
        Some(2)
    );
}

#[test]
fn step_lists_witnesses_in_order() {
    let o = ko7(&["step", "--relation", "full", "(merge (eqw void void) void)"]);
    assert_eq!(
        stdout(&o),
        "MergeVoidRight at []: (merge (eqw void void) void) => (eqw void void)\n\
         EqRefl at [0]: (merge (eqw void void) void) => (merge void void)\n\
         EqDiff at [0]: (merge (eqw void void) void) => (merge (integrate (merge void void)) void)\n"
    );
    assert_eq!(stdout(&ko7(&["step", "void"])), "void is safe-normal\n");
}

#[test]
fn measure_text_and_json() {
    let o = ko7(&["measure", "(rec void void (delta void))"]);
    assert_eq!(stdout(&o), "dflag 1\nkappaM {5}\ntau 5\n");
    let o = ko7(&["--json", "measure", "(rec void void (delta void))"]);
    assert_eq!(stdout(&o), "[1,[5],5]\n");
}

#[test]
fn json_round_trips_through_core_types() {
    let o = ko7(&["--json", "parse", "(app void (delta void))"]);
    let t: ko7::term::Term = serde_json::from_str(stdout(&o)).unwrap();
    assert_eq!(t.to_string(), "(app void (delta void))");

    let o = ko7(&["--json", "normalize", "(eqw void (delta void))"]);
    let tr: ko7::normalize::Trace = serde_json::from_str(stdout(&o)).unwrap();
    assert!(tr.is_well_formed());

    let o = ko7(&["--json", "witness", "nonjoin"]);
    let r: ko7::confluence::NonJoinReport = serde_json::from_str(stdout(&o)).unwrap();
    assert_eq!(r.normal_form_b.to_string(), "(integrate void)");

    let o = ko7(&["--json", "check", "decrease", "--max-size", "4"]);
    let r: ko7::measure::DecreaseReport = serde_json::from_str(stdout(&o)).unwrap();
    assert!(r.passed());
}

#[test]
fn full_normalization_and_fuel() {
    let o = ko7(&[
        "normalize",
        "--relation",
        "full",
        "(rec void void (delta (delta void)))",
    ]);
    assert_eq!(stdout(&o), "(app void (app void void))\n");
    let o = ko7(&[
        "normalize",
        "--relation",
        "full",
        "--fuel",
        "0",
        "(integrate (delta void))",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        stdout(&o),
        "fuel exhausted after 0 steps at (integrate (delta void))\n"
    );
}

#[test]
fn reaches_fixed_target() {
    assert_eq!(
        stdout(&ko7(&["reaches", "(integrate (delta void))", "void"])),
        "true\n"
    );
    assert_eq!(
        stdout(&ko7(&["reaches", "(eqw (delta void) void)", "void"])),
        "false\n"
    );
}

#[test]
fn batch_file() {
    let dir = std::env::temp_dir().join(format!("ko7-batch-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("terms.txt");
    std::fs::write(&path, "(integrate (delta void))\n\n(eqw void void)\n").unwrap();
    let o = ko7(&["normalize", "--file", path.to_str().unwrap()]);
    assert_eq!(stdout(&o), "void\nvoid\n");

    std::fs::write(&path, "void\n(merge void\n").unwrap();
    let o = ko7(&["parse", "--file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sweeps_pass_at_defaults() {
    for args in [
        &["check", "decrease"][..],
        &["check", "local-join"],
        &[
            "check",
            "local-join",
            "--relation",
            "safe-ctx",
            "--max-size",
            "5",
        ],
        &["check", "unique-nf"],
        &["check", "lpo"],
        &["check", "stress"],
        &["check", "coverage"],
        &["check", "kbo", "--bound", "2"],
        &["check", "poly", "--bound", "1"],
    ] {
        let o = ko7(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
    }
}

#[test]
fn worker_cap_does_not_change_output() {
    let run = |workers: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_ko7"))
            .args(["--json", "check", "decrease"])
            .env("KO7_WORKERS", workers)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        o.stdout
    };
    assert_eq!(run("1"), run("4"));
    let o = Command::new(env!("CARGO_BIN_EXE_ko7"))
        .args(["check", "decrease"])
        .env("KO7_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
