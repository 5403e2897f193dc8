//! Acceptance suite. Each criterion is one test that prints a pass/fail
//! line; every tolerance is pinned here. The corpus directory can be
//! overridden with `PISPAN_CORPUS`.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use pispan::deriv::{check_script, parse_script};
use pispan::harness::run_soundness;
use pispan::index::{normalize, parse_interval, Index, Interval, Valuation};
use pispan::process::parse_process;
use pispan::registry::Registry;
use pispan::semantics::global_span;
use pispan::types::TypeConfig;
use pispan::usage::{
    ilub, iplus, parse_usage, reliable, seq_complexity, Capacity, Reliability, UsageConfig,
};

fn corpus() -> PathBuf {
    std::env::var_os("PISPAN_CORPUS")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus"))
}

fn load(name: &str) -> String {
    let path = corpus().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn report(criterion: &str, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => println!("criterion {criterion}: pass ({detail})"),
        Err(detail) => {
            println!("criterion {criterion}: FAIL ({detail})");
            panic!("criterion {criterion} failed: {detail}");
        }
    }
}

#[test]
fn criterion_1_semaphore_span_is_exactly_three() {
    let reg = Registry::standard();
    let p = parse_process(&load("semaphore.pi"), &reg).unwrap();
    let start = Instant::now();
    let r = global_span(&p, 100_000, &reg);
    let elapsed = start.elapsed();
    let outcome = if r.span == 3 && r.exact && elapsed <= Duration::from_millis(100) {
        Ok(format!(
            "span 3 exact in {elapsed:?}, {} states",
            r.states_explored
        ))
    } else {
        Err(format!("span {} exact {} in {elapsed:?}", r.span, r.exact))
    };
    report("1 (semaphore span = 3, <= 0.1 s)", outcome);
}

#[test]
fn criterion_2_motivating_example_span_equals_n() {
    let reg = Registry::standard();
    let mut details = Vec::new();
    for n in 1..=6usize {
        let body = vec!["a?().tick.a!()"; n].join(" | ");
        let p = parse_process(&format!("{body} | a!()"), &reg).unwrap();
        let start = Instant::now();
        let r = global_span(&p, 100_000, &reg);
        let elapsed = start.elapsed();
        if r.span != n as u64 || !r.exact || elapsed > Duration::from_secs(1) {
            report(
                "2 (span of P^n | a!() = n for n in 1..6)",
                Err(format!(
                    "n={n}: span {} exact {} in {elapsed:?}",
                    r.span, r.exact
                )),
            );
            return;
        }
        details.push(format!("n={n} in {elapsed:?}"));
    }
    report(
        "2 (span of P^n | a!() = n for n in 1..6)",
        Ok(details.join(", ")),
    );
}

#[test]
fn criterion_3_reliability_of_the_example_usages() {
    let phi = pispan::index::VarSet::new();
    let cs = vec![];
    let cfg = UsageConfig::default();
    let check = |name: &str| reliable(&phi, &cs, &parse_usage(&load(name)).unwrap(), &cfg);
    let outcome = (|| {
        match check("ex31.usg") {
            Reliability::Reliable => {}
            other => return Err(format!("ex31 expected Reliable, got {other:?}")),
        }
        match check("ex32_bad.usg") {
            Reliability::Unreliable { trace } if trace.len() >= 2 => {}
            other => {
                return Err(format!(
                    "ex32_bad expected Unreliable with a trace, got {other:?}"
                ))
            }
        }
        match check("ex32_fixed.usg") {
            Reliability::Reliable => {}
            other => return Err(format!("ex32_fixed expected Reliable, got {other:?}")),
        }
        Ok("reliable / unreliable-with-trace / reliable".to_string())
    })();
    report("3 (reliability of the three example usages)", outcome);
}

fn norm_iv(iv: &Interval) -> Interval {
    Interval::new(normalize(&iv.lo), normalize(&iv.hi))
}

#[test]
fn criterion_4_derivation_checker_accepts_the_committed_scripts() {
    let reg = Registry::standard();
    let cfg = TypeConfig::default();
    let run = |proc_file: &str, script_file: &str| {
        let p = parse_process(&load(proc_file), &reg).unwrap();
        let s = parse_script(&load(script_file)).unwrap();
        check_script(&s, &p, &reg, &cfg)
    };
    let outcome = (|| {
        let fig9 = run("semaphore.pi", "fig9.deriv").map_err(|e| format!("fig9: {e}"))?;
        if norm_iv(&fig9.complexity) != norm_iv(&parse_interval("[1,3]").unwrap()) {
            return Err(format!("fig9 expected [1,3], got {}", fig9.complexity));
        }
        let fig11 = run("deadlock.pi", "fig11.deriv").map_err(|e| format!("fig11: {e}"))?;
        if norm_iv(&fig11.complexity) != norm_iv(&parse_interval("[0,0]").unwrap()) {
            return Err(format!("fig11 expected [0,0], got {}", fig11.complexity));
        }
        let fig10 = run("factorial.pi", "fig10.deriv").map_err(|e| format!("fig10: {e}"))?;
        if norm_iv(&fig10.complexity) != norm_iv(&parse_interval("[0,0]").unwrap()) {
            return Err(format!("fig10 expected [0,0], got {}", fig10.complexity));
        }
        let body = fig10
            .tree
            .find("case")
            .ok_or_else(|| "fig10: no case node in the checked tree".to_string())?;
        if norm_iv(&body.complexity) != norm_iv(&parse_interval("[0,i]").unwrap()) {
            return Err(format!(
                "fig10 body expected [0,i], got {}",
                body.complexity
            ));
        }
        Ok("fig9 -> [1,3], fig11 -> [0,0], fig10 -> [0,0] with body [0,i]".to_string())
    })();
    report("4 (derivation checker on the committed scripts)", outcome);
}

#[test]
fn criterion_5_soundness_harness() {
    let reg = Registry::standard();
    let cfg = TypeConfig::default();
    let run = |proc_file: &str, script_file: &str, vals: Vec<Valuation>| {
        let p = parse_process(&load(proc_file), &reg).unwrap();
        let s = parse_script(&load(script_file)).unwrap();
        run_soundness(&p, &s, &reg, &vals, 100_000, &cfg)
    };
    let empty = vec![Valuation::new()];
    let outcome =
        (|| {
            // semaphore: n = 3 <= 3 and 1 <= 3
            let r = run("semaphore.pi", "fig9.deriv", empty.clone()).map_err(|e| e.to_string())?;
            let row = &r.rows[0];
            if !(r.pass
                && row.span == 3
                && row.bound_hi == "3"
                && row.lower_checked
                && row.bound_lo == "1")
            {
                return Err(format!("semaphore row: {row:?}"));
            }
            // deadlock: n = 0, bound [0,0], exact
            let r = run("deadlock.pi", "fig11.deriv", empty.clone()).map_err(|e| e.to_string())?;
            let row = &r.rows[0];
            if !(r.pass && row.span == 0 && row.bound_lo == "0" && row.bound_hi == "0") {
                return Err(format!("deadlock row: {row:?}"));
            }
            // factorial at i in 0..=3: span = i <= i
            let vals: Vec<Valuation> = (0..=3u64)
                .map(|i| {
                    let mut v = Valuation::new();
                    v.insert("i".into(), i);
                    v
                })
                .collect();
            let r = run("factorial_call.pi", "factorial_call.deriv", vals)
                .map_err(|e| e.to_string())?;
            if !r.pass {
                return Err("factorial harness failed".into());
            }
            for (i, row) in r.rows.iter().enumerate() {
                if row.span != i as u64 || row.bound_hi != i.to_string() || !row.exact {
                    return Err(format!("factorial row {i}: {row:?}"));
                }
            }
            // the imprecise server: span 2, typed bound [2,12] (the rule-faithful
            // bound; the call's capacity adds 2 on top of the instantiated 10)
            let r = run("ex53.pi", "ex53.deriv", empty).map_err(|e| e.to_string())?;
            let row = &r.rows[0];
            if !(r.pass && row.span == 2 && row.bound_hi == "12" && row.upper_ok && row.lower_ok) {
                return Err(format!("imprecise-server row: {row:?}"));
            }
            Ok("semaphore 3<=3 & 1<=3, deadlock 0 in [0,0], factorial i<=i for i=0..3, server 2<=12"
            .to_string())
        })();
    report("5 (soundness harness on the four corpus entries)", outcome);
}

type Suite = fn() -> Result<String, String>;

#[test]
fn criterion_6_property_suites() {
    let suites: Vec<(&str, Suite)> = vec![
        (
            "local complexity monotone under reduction",
            common::suite_local_complexity_monotone,
        ),
        (
            "delay invariance of usage reduction and reliability",
            common::suite_delay_invariance,
        ),
        (
            "delay monotonicity of proven subusage",
            common::suite_subusage_delay_monotone,
        ),
        (
            "reliability preservation under proven subusage",
            common::suite_reliability_preserved_by_subusage,
        ),
        (
            "substitution/evaluation coherence",
            common::suite_index_coherence,
        ),
        (
            "par_types commutativity/associativity",
            common::suite_par_types_laws,
        ),
    ];
    let mut failures = Vec::new();
    for (name, suite) in suites {
        match suite() {
            Ok(detail) => println!("criterion 6 [{name}]: pass ({detail})"),
            Err(detail) => {
                println!("criterion 6 [{name}]: FAIL ({detail})");
                failures.push(format!("{name}: {detail}"));
            }
        }
    }
    assert!(failures.is_empty(), "criterion 6 failed: {failures:?}");
}

#[test]
fn criterion_7_interval_algebra_pins() {
    let iv = |s: &str| parse_interval(s).unwrap();
    let cap_iv = |s: &str| Capacity::Interval(parse_interval(s).unwrap());
    let cap_up = |n: u64| Capacity::UpperOnly(Index::Const(n));
    let outcome = (|| {
        let checks: Vec<(&str, Interval, Interval)> = vec![
            (
                "[1,3](+)[5,7]",
                iplus(&iv("[1,3]"), &cap_iv("[5,7]")),
                iv("[8,8]"),
            ),
            (
                "[0,0](+)[1,1]",
                iplus(&iv("[0,0]"), &cap_iv("[1,1]")),
                iv("[1,1]"),
            ),
            ("[1,1](+)1", iplus(&iv("[1,1]"), &cap_up(1)), iv("[0,2]")),
            (
                "[1,1](+)[0,1]",
                iplus(&iv("[1,1]"), &cap_iv("[0,1]")),
                iv("[1,2]"),
            ),
            (
                "[inf,inf];K",
                seq_complexity(&cap_iv("[inf,inf]"), &iv("[3,7]")),
                iv("[0,0]"),
            ),
            (
                "[4,8]lub[5,7]",
                ilub(&iv("[4,8]"), &iv("[5,7]")),
                iv("[5,8]"),
            ),
        ];
        for (label, got, want) in checks {
            if norm_iv(&got) != norm_iv(&want) {
                return Err(format!("{label}: got {got}, want {want}"));
            }
        }
        Ok("all six paper-quoted computations pinned".to_string())
    })();
    report("7 (interval algebra pins)", outcome);
}
