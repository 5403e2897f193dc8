//! End-to-end tests of the `pispan` binary: subcommands, exit codes, and
//! JSON report shapes. Exit codes are a function of verdicts: 0 for
//! pass/proven/reliable, 1 for fail/refuted/unreliable, 2 for unknown.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn pispan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pispan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in_corpus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pispan"))
        .current_dir(corpus())
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn span_reports_exact_result_as_json() {
    let out = run_in_corpus(&["span", "semaphore.pi", "--json"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["span"], 3);
    assert_eq!(v["exact"], true);
    assert!(v["states_explored"].as_u64().unwrap() > 0);
}

#[test]
fn span_exhausted_fuel_exits_2() {
    let out = run_in_corpus(&["span", "ex53.pi", "--fuel", "3", "--json"]);
    assert_eq!(code(&out), 2);
    let v = stdout_json(&out);
    assert_eq!(v["exact"], false);
}

#[test]
fn usage_verdicts_map_to_exit_codes() {
    assert_eq!(code(&run_in_corpus(&["usage", "ex31.usg"])), 0);
    let bad = run_in_corpus(&["usage", "ex32_bad.usg", "--json"]);
    assert_eq!(code(&bad), 1);
    let v = stdout_json(&bad);
    assert_eq!(v["verdict"], "unreliable");
    assert!(v["trace"].as_array().unwrap().len() >= 2);
    assert_eq!(code(&run_in_corpus(&["usage", "ex32_fixed.usg"])), 0);
}

#[test]
fn subusage_verdicts_map_to_exit_codes() {
    assert_eq!(
        code(&run_in_corpus(&["subusage", "widened.usg", "narrow.usg"])),
        0
    );
    assert_eq!(
        code(&run_in_corpus(&["subusage", "ex31.usg", "zero.usg"])),
        0
    );
    // the reverse widening is not derivable and the search gives up
    assert_eq!(
        code(&run_in_corpus(&["subusage", "narrow.usg", "widened.usg"])),
        2
    );
}

#[test]
fn typecheck_accepts_the_corpus_scripts() {
    for (p, s, want) in [
        ("semaphore.pi", "fig9.deriv", "[1,3]"),
        ("deadlock.pi", "fig11.deriv", "[0,0]"),
        ("factorial.pi", "fig10.deriv", "[0,0]"),
        ("semaphore3.pi", "fig9_three.deriv", "[1,4]"),
        ("handover.pi", "handover.deriv", "[1,1]"),
    ] {
        let out = run_in_corpus(&["typecheck", p, s, "--json"]);
        assert_eq!(
            code(&out),
            0,
            "{p} + {s}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        let v = stdout_json(&out);
        assert_eq!(v["accepted"], true);
        assert_eq!(v["complexity"], want, "{p} + {s}");
    }
}

#[test]
fn typecheck_rejects_a_mismatched_script_with_exit_1() {
    let out = run_in_corpus(&["typecheck", "deadlock.pi", "fig9.deriv", "--json"]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["accepted"], false);
}

#[test]
fn soundness_passes_on_every_committed_entry() {
    for (p, s) in [
        ("semaphore.pi", "fig9.deriv"),
        ("deadlock.pi", "fig11.deriv"),
        ("factorial_call.pi", "factorial_call.deriv"),
        ("ex53.pi", "ex53.deriv"),
        ("semaphore3.pi", "fig9_three.deriv"),
        ("handover.pi", "handover.deriv"),
    ] {
        let out = run_in_corpus(&["soundness", p, s, "--json"]);
        assert_eq!(
            code(&out),
            0,
            "{p} + {s}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v = stdout_json(&out);
        assert_eq!(v["schema"], 1);
        assert_eq!(v["pass"], true, "{p} + {s}");
        assert_eq!(v["advisory"], false, "{p} + {s}");
    }
}

#[test]
fn soundness_accepts_explicit_valuations() {
    let out = run_in_corpus(&[
        "soundness",
        "factorial_call.pi",
        "factorial_call.deriv",
        "--val",
        "i=2",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["span"], 2);
    assert_eq!(rows[0]["bound_hi"], "2");
}

#[test]
fn input_errors_exit_1() {
    let out = pispan(&["span", "does-not-exist.pi"]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
    // a syntax error carries a position
    let dir = std::env::temp_dir().join("pispan-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.pi");
    std::fs::write(&bad, "tick.\n  ?").unwrap();
    let out = pispan(&["span", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("2:"));
}

#[test]
fn symbolic_usage_flags_are_honored() {
    // the inner reply-channel usage of the factorial body is reliable under
    // i >= 1 but needs the constraint to discharge the side conditions
    let dir = std::env::temp_dir().join("pispan-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("inner.usg");
    std::fs::write(&file, "Out[i-1,i-1]<0> | In[0,0][i-1,i-1]").unwrap();
    let out = pispan(&[
        "usage",
        file.to_str().unwrap(),
        "--vars",
        "i",
        "--constraint",
        "i >= 1",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}
