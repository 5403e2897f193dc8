//! Shared generators and the acceptance-level property suites. Each suite
//! runs a fixed number of cases from a fixed seed and returns a summary on
//! success or a description of the first failure; Unknown-verdict cases are
//! skipped and counted against a 30% budget.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use pispan::index::{
    eval_index, normalize, subst_index, Index, Interval, NatInf, Valuation, VarSet, Verdict,
};
use pispan::process::{Expr, Process};
use pispan::registry::Registry;
use pispan::semantics::{annotated_step, local_complexity};
use pispan::types::{par_types, Type};
use pispan::usage::{
    congruent_usages, delay, norm, reliable, subusage, usage_step, Capacity, Polarity, Reliability,
    SubusageConfig, Usage, UsageConfig,
};

pub const CASES: usize = 220;
pub const MAX_SKIP_RATE: f64 = 0.30;

fn skip_gate(suite: &str, skipped: usize, total: usize) -> Result<(), String> {
    let rate = skipped as f64 / total as f64;
    if rate < MAX_SKIP_RATE {
        Ok(())
    } else {
        Err(format!(
            "{suite}: skip rate {rate:.2} ({skipped}/{total}) exceeds the budget"
        ))
    }
}

pub fn gen_name(rng: &mut StdRng) -> String {
    ["a", "b", "c"][rng.gen_range(0..3)].to_string()
}

pub fn gen_expr(rng: &mut StdRng, closed: bool) -> Expr {
    match rng.gen_range(0..4) {
        0 => Expr::numeral(rng.gen_range(0..3)),
        1 => Expr::Succ(Box::new(gen_expr(rng, closed))),
        2 if !closed => Expr::var(["x", "y"][rng.gen_range(0..2)]),
        _ => Expr::Zero,
    }
}

pub fn gen_process(rng: &mut StdRng, depth: u32, annotated: bool) -> Process {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => Process::Nil,
            1 => Process::output(gen_name(rng), vec![], Process::Nil),
            _ => Process::input(gen_name(rng), vec![], Process::Nil),
        };
    }
    let next = |rng: &mut StdRng| gen_process(rng, depth - 1, annotated);
    match rng.gen_range(0..10) {
        0 => Process::Nil,
        1 | 2 => {
            let l = next(rng);
            let r = next(rng);
            Process::par(l, r)
        }
        3 => Process::input(gen_name(rng), vec![], next(rng)),
        4 => {
            let payload = if rng.gen_bool(0.5) {
                vec![gen_expr(rng, true)]
            } else {
                vec![]
            };
            let chan = gen_name(rng);
            let params = if payload.len() == 1 {
                vec!["x".to_string()]
            } else {
                vec![]
            };
            if rng.gen_bool(0.5) {
                Process::Input(chan, params, Box::new(next(rng)))
            } else {
                Process::output(chan, payload, next(rng))
            }
        }
        5 => Process::tick(next(rng)),
        6 => Process::Match(
            gen_expr(rng, true),
            Box::new(next(rng)),
            "m".to_string(),
            Box::new(next(rng)),
        ),
        7 => Process::new_chan(gen_name(rng), next(rng)),
        8 if annotated => Process::annot(rng.gen_range(0..3), next(rng)),
        8 => Process::tick(next(rng)),
        _ => {
            if rng.gen_bool(0.3) {
                Process::ReplInput(gen_name(rng), vec![], Box::new(next(rng)))
            } else {
                Process::output(gen_name(rng), vec![], next(rng))
            }
        }
    }
}

pub fn gen_interval(rng: &mut StdRng) -> Interval {
    let lo = rng.gen_range(0..4u64);
    let hi = lo + rng.gen_range(0..3u64);
    Interval::new(Index::Const(lo), Index::Const(hi))
}

pub fn gen_capacity(rng: &mut StdRng) -> Capacity {
    if rng.gen_bool(0.5) {
        Capacity::UpperOnly(Index::Const(rng.gen_range(0..4)))
    } else {
        Capacity::Interval(gen_interval(rng))
    }
}

pub fn gen_usage(rng: &mut StdRng, depth: u32) -> Usage {
    if depth == 0 {
        return if rng.gen_bool(0.3) {
            Usage::Zero
        } else {
            Usage::Act(
                if rng.gen_bool(0.5) {
                    Polarity::In
                } else {
                    Polarity::Out
                },
                gen_interval(rng),
                gen_capacity(rng),
                Box::new(Usage::Zero),
            )
        };
    }
    let next = |rng: &mut StdRng| gen_usage(rng, depth - 1);
    match rng.gen_range(0..10) {
        0 => Usage::Zero,
        1..=3 => {
            let l = next(rng);
            let r = next(rng);
            Usage::par(l, r)
        }
        4..=6 => Usage::Act(
            if rng.gen_bool(0.5) {
                Polarity::In
            } else {
                Polarity::Out
            },
            gen_interval(rng),
            gen_capacity(rng),
            Box::new(next(rng)),
        ),
        7 | 8 => {
            let l = next(rng);
            let r = next(rng);
            Usage::choice(l, r)
        }
        _ => Usage::bang(next(rng)),
    }
}

pub fn eval_zero(i: &Index) -> u64 {
    match eval_index(i, &Valuation::new()).unwrap() {
        NatInf::Fin(n) => n,
        NatInf::Inf => 0,
    }
}

/// A variant of `u` weakened by up to three subusage-shaped steps.
pub fn weaken(rng: &mut StdRng, u: &Usage) -> Usage {
    let mut atoms = pispan::usage::norm_atoms_of(u);
    for _ in 0..rng.gen_range(1..=3usize) {
        if atoms.is_empty() {
            break;
        }
        let k = rng.gen_range(0..atoms.len());
        match rng.gen_range(0..4) {
            0 => {
                atoms.remove(k);
            }
            1 => {
                if let Usage::Choice(l, r) = &atoms[k] {
                    let pick = if rng.gen_bool(0.5) {
                        (**l).clone()
                    } else {
                        (**r).clone()
                    };
                    atoms.remove(k);
                    atoms.extend(pispan::usage::norm_atoms_of(&pick));
                }
            }
            2 => {
                if let Usage::Act(p, o, c, cont) = &atoms[k] {
                    let (lo, hi) = (eval_zero(&o.lo), eval_zero(&o.hi));
                    let nlo = lo + rng.gen_range(0..=(hi - lo));
                    let nhi = nlo + rng.gen_range(0..=(hi - nlo));
                    let no = Interval::new(Index::Const(nlo), Index::Const(nhi));
                    let nc = match c {
                        Capacity::UpperOnly(j) => {
                            Capacity::UpperOnly(Index::Const(eval_zero(j) + rng.gen_range(0..2)))
                        }
                        Capacity::Interval(iv) => {
                            let clo = eval_zero(&iv.lo).saturating_sub(rng.gen_range(0..2));
                            let chi = eval_zero(&iv.hi) + rng.gen_range(0..2);
                            Capacity::Interval(Interval::new(Index::Const(clo), Index::Const(chi)))
                        }
                    };
                    atoms[k] = Usage::Act(*p, no, nc, cont.clone());
                }
            }
            _ => {
                if let Usage::Bang(inner) = &atoms[k] {
                    let copy = (**inner).clone();
                    atoms.push(copy);
                }
            }
        }
    }
    pispan::usage::rebuild_atoms(atoms)
}

pub fn gen_index(rng: &mut StdRng, depth: u32, allow_inf: bool) -> Index {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => Index::Const(rng.gen_range(0..4)),
            1 => Index::var("i"),
            _ => Index::var("j"),
        };
    }
    match rng.gen_range(0..8) {
        0 => Index::Const(rng.gen_range(0..4)),
        1 => Index::var("i"),
        2 if allow_inf && rng.gen_bool(0.3) => Index::Infinity,
        2 => Index::var("j"),
        3 => Index::add(
            gen_index(rng, depth - 1, allow_inf),
            gen_index(rng, depth - 1, allow_inf),
        ),
        4 => Index::mul(
            gen_index(rng, depth - 1, allow_inf),
            gen_index(rng, depth - 1, allow_inf),
        ),
        5 => Index::sub(
            gen_index(rng, depth - 1, allow_inf),
            gen_index(rng, depth - 1, allow_inf),
        ),
        6 => Index::max_of(
            gen_index(rng, depth - 1, allow_inf),
            gen_index(rng, depth - 1, allow_inf),
        ),
        _ => Index::min_of(
            gen_index(rng, depth - 1, allow_inf),
            gen_index(rng, depth - 1, allow_inf),
        ),
    }
}

pub fn gen_type(rng: &mut StdRng, depth: u32) -> Type {
    match rng.gen_range(0..3) {
        0 => Type::Nat(gen_interval(rng)),
        1 if depth > 0 => Type::Chan(vec![gen_type(rng, depth - 1)], gen_usage(rng, 1)),
        _ => Type::Chan(vec![], gen_usage(rng, 1)),
    }
}

// ---- the six acceptance property suites ----

/// Lemma-style: local complexity never decreases along an annotated step.
pub fn suite_local_complexity_monotone() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x2401);
    let reg = Registry::standard();
    let mut steps_seen = 0usize;
    for case in 0..CASES {
        let l = gen_process(&mut rng, 3, true);
        let r = gen_process(&mut rng, 3, true);
        let p = Process::par(l, r);
        let before = local_complexity(&p);
        for q in annotated_step(&p, &reg) {
            steps_seen += 1;
            if q.max_annotation() < before {
                return Err(format!(
                    "case {case}: step of {p} drops local complexity from {before}"
                ));
            }
        }
    }
    if steps_seen <= 100 {
        return Err(format!("generator produced too few redexes ({steps_seen})"));
    }
    Ok(format!(
        "{CASES} cases, {steps_seen} reduction steps, 0 skipped"
    ))
}

/// Delaying commutes with usage reduction and preserves reliability.
pub fn suite_delay_invariance() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x3202);
    let phi = VarSet::new();
    let cs = vec![];
    let cfg = UsageConfig::default();
    let mut skipped = 0usize;
    for case in 0..CASES {
        let u = gen_usage(&mut rng, 2);
        let a = gen_interval(&mut rng);
        let du = delay(&a, &u);
        let base = usage_step(&phi, &cs, &u, &cfg);
        let shifted = usage_step(&phi, &cs, &du, &cfg);
        if !base.blocked.is_empty() || !shifted.blocked.is_empty() {
            skipped += 1;
            continue;
        }
        let mut expect: Vec<Usage> = base
            .successors
            .iter()
            .map(|(v, _)| norm(&delay(&a, v)))
            .collect();
        let mut got: Vec<Usage> = shifted.successors.iter().map(|(v, _)| v.clone()).collect();
        expect.sort();
        expect.dedup();
        got.sort();
        got.dedup();
        if got != expect {
            return Err(format!("case {case}: successors of delayed {u} diverge"));
        }
        if base.has_error() != shifted.has_error() {
            return Err(format!("case {case}: error outcomes diverge for {u}"));
        }
        let ru = reliable(&phi, &cs, &u, &cfg);
        let rdu = reliable(&phi, &cs, &du, &cfg);
        match (&ru, &rdu) {
            (Reliability::Unknown { .. }, _) | (_, Reliability::Unknown { .. }) => skipped += 1,
            _ => {
                if ru.is_reliable() != rdu.is_reliable() {
                    return Err(format!(
                        "case {case}: reliability of {u} changed under delay"
                    ));
                }
            }
        }
    }
    skip_gate("delay invariance", skipped, CASES)?;
    Ok(format!("{CASES} cases, {skipped} skipped"))
}

/// A proven subusage stays proven under delaying.
pub fn suite_subusage_delay_monotone() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x3101);
    let phi = VarSet::new();
    let cs = vec![];
    let cfg = SubusageConfig::default();
    let mut skipped = 0usize;
    let mut proven = 0usize;
    for case in 0..CASES {
        let u = gen_usage(&mut rng, 2);
        let v = weaken(&mut rng, &u);
        match subusage(&phi, &cs, &u, &v, &cfg) {
            Verdict::Proven => {
                proven += 1;
                let a = gen_interval(&mut rng);
                if subusage(&phi, &cs, &delay(&a, &u), &delay(&a, &v), &cfg) != Verdict::Proven {
                    return Err(format!(
                        "case {case}: delayed pair no longer proves ({u} vs {v})"
                    ));
                }
            }
            _ => skipped += 1,
        }
    }
    skip_gate("subusage delay monotonicity", skipped, CASES)?;
    if proven < CASES / 2 {
        return Err(format!("too few proven pairs ({proven})"));
    }
    Ok(format!(
        "{CASES} cases, {proven} proven pairs, {skipped} skipped"
    ))
}

/// Reliability is preserved along proven subusage.
pub fn suite_reliability_preserved_by_subusage() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x3103);
    let phi = VarSet::new();
    let cs = vec![];
    let ucfg = UsageConfig::default();
    let scfg = SubusageConfig::default();
    let mut skipped = 0usize;
    let mut exercised = 0usize;
    for case in 0..CASES {
        let u = gen_usage(&mut rng, 2);
        let ru = reliable(&phi, &cs, &u, &ucfg);
        if matches!(ru, Reliability::Unknown { .. }) {
            skipped += 1;
            continue;
        }
        if !ru.is_reliable() {
            continue; // vacuous
        }
        let v = weaken(&mut rng, &u);
        match subusage(&phi, &cs, &u, &v, &scfg) {
            Verdict::Proven => {
                exercised += 1;
                if matches!(
                    reliable(&phi, &cs, &v, &ucfg),
                    Reliability::Unreliable { .. }
                ) {
                    return Err(format!(
                        "case {case}: reliable {u} weakens to unreliable {v}"
                    ));
                }
            }
            _ => skipped += 1,
        }
    }
    skip_gate("reliability preservation", skipped, CASES)?;
    if exercised < CASES / 4 {
        return Err(format!("too few exercised cases ({exercised})"));
    }
    Ok(format!(
        "{CASES} cases, {exercised} exercised, {skipped} skipped"
    ))
}

/// Substitution and evaluation cohere on the index algebra.
pub fn suite_index_coherence() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x1d05eed);
    for case in 0..CASES {
        let body = gen_index(&mut rng, 3, false);
        let arg = gen_index(&mut rng, 2, false);
        let var = ["i", "j"][rng.gen_range(0..2)];
        let mut rho = Valuation::new();
        rho.insert("i".into(), rng.gen_range(0..5));
        rho.insert("j".into(), rng.gen_range(0..5));
        let substituted = subst_index(&body, var, &arg);
        let left = eval_index(&substituted, &rho).map_err(|e| e.to_string())?;
        let NatInf::Fin(argv) = eval_index(&arg, &rho).map_err(|e| e.to_string())? else {
            return Err("finite generator produced infinity".into());
        };
        let mut rho2 = rho.clone();
        rho2.insert(var.into(), argv);
        let right = eval_index(&body, &rho2).map_err(|e| e.to_string())?;
        if left != right {
            return Err(format!(
                "case {case}: {body} [{var} := {arg}] under {rho:?}"
            ));
        }
        let normed = eval_index(&normalize(&substituted), &rho).map_err(|e| e.to_string())?;
        if normed != left {
            return Err(format!(
                "case {case}: normalization changed the value of {substituted}"
            ));
        }
    }
    Ok(format!("{CASES} cases, 0 skipped"))
}

/// Parallel composition of types is commutative and associative up to usage
/// congruence.
pub fn suite_par_types_laws() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x9a62);
    let name = "x".to_string();
    let eq = |a: &Type, b: &Type| -> bool {
        a.same_skeleton(b)
            && match (a.usage(), b.usage()) {
                (None, None) => true,
                (Some(u), Some(v)) => congruent_usages(u, v),
                _ => false,
            }
    };
    for case in 0..CASES {
        let base = gen_type(&mut rng, 1);
        let variant = |rng: &mut StdRng| match &base {
            Type::Nat(_) => base.clone(),
            t => t.with_usage(gen_usage(rng, 1)),
        };
        let (t1, t2, t3) = (variant(&mut rng), variant(&mut rng), variant(&mut rng));
        let ab = par_types(&name, &t1, &t2).map_err(|e| e.to_string())?;
        let ba = par_types(&name, &t2, &t1).map_err(|e| e.to_string())?;
        if !eq(&ab, &ba) {
            return Err(format!("case {case}: commutativity failed for {t1} | {t2}"));
        }
        let ab_c = par_types(&name, &ab, &t3).map_err(|e| e.to_string())?;
        let bc = par_types(&name, &t2, &t3).map_err(|e| e.to_string())?;
        let a_bc = par_types(&name, &t1, &bc).map_err(|e| e.to_string())?;
        if !eq(&ab_c, &a_bc) {
            return Err(format!("case {case}: associativity failed"));
        }
    }
    Ok(format!("{CASES} cases, 0 skipped"))
}
