//! Acceptance suite. Prints one line per criterion and exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use ralmc::ctl::{run_nnf, Labelling};
use ralmc::model::{
    delta_con, delta_max, delta_prd, parse_formula, parse_rbm, Coalition, Endowment, RalFormula, Rbm,
};
use ralmc::oracle::{bounded_ral_flat, ctl_sandwich, outcome_trees, ral_sandwich, sandwich, OutcomeTree};
use ralmc::pushdown::Config;
use ralmc::ral::{encode, evaluate, ral_check, EncodedGame};
use ralmc::saturation::{buchi_language_with_cap, default_cap};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (0..1usize << n)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

// 1: department example, three claims at eta = 8, each under 30 s
fn department() -> Outcome {
    let m = parse_rbm(include_str!("../models/dept.rbm")).unwrap();
    let q0 = m.state_index("q0").unwrap();
    let claims = [
        ("<<p1,p2,l1,l2,l3>>F(al1 & al2 & al3)", true),
        ("<<l1,l2,l3>>F(al1 & al2 & al3)", false),
        ("<<d,p1,p2>>F(ad & ap1 & ap2 & !<<l1,l2,l3>>F(al1 & al2 & al3))", true),
    ];
    let mut ok = 0;
    let mut slowest = Duration::ZERO;
    for (text, want) in claims {
        let f = parse_formula(text).unwrap();
        let t = Instant::now();
        let got = ral_check(&m, q0, Endowment(8), &f).unwrap();
        slowest = slowest.max(t.elapsed());
        if got == want {
            ok += 1;
        }
    }
    let pass = ok == 3 && slowest < Duration::from_secs(30);
    outcome(pass, format!("{ok}/3 claims match, slowest {slowest:.2?} (limit 30s)"))
}

// 2: net effect and funding identities exhaustively on 1000 random models
fn delta_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let shape = RbmShape {
        agents: 3,
        states: 4,
        actions_per_agent: 3,
        effects: -3..=3,
        idle: false,
    };
    let start = Instant::now();
    let (mut checks, mut violations) = (0u64, 0u64);
    for _ in 0..1000 {
        let m = random_rbm(&mut rng, &shape);
        for members in subsets(m.agents.len()) {
            let a = Coalition::new(members);
            let opp = a.opponents(&m);
            for q in 0..m.states.len() {
                let dmax = delta_max(&m, &a, q);
                let opp_profiles = m.profiles(q, opp.agents());
                for alpha_a in m.profiles(q, a.agents()) {
                    let dcon = delta_con(&m, &a, q, &alpha_a);
                    for alpha_o in &opp_profiles {
                        let full = m.merge(&a, &alpha_a, alpha_o);
                        let net = m.prod(&full) as i64 - m.cons(&full) as i64;
                        let dprd = delta_prd(&m, &a, q, &alpha_a, alpha_o);
                        checks += 1;
                        if net != dprd as i64 - dcon as i64 {
                            violations += 1;
                        }
                    }
                    let own = m.cons(&alpha_a);
                    for x in 0..=2 * dmax + own + 2 {
                        let covers = opp_profiles.iter().all(|o| x >= m.cons(o) + own);
                        checks += 1;
                        if covers != (x >= dcon) {
                            violations += 1;
                        }
                    }
                }
            }
        }
    }
    let took = start.elapsed();
    let pass = violations == 0 && took < Duration::from_secs(10);
    outcome(pass, format!("{violations} violations in {checks} checks, {took:.2?} (limit 10s)"))
}

// 3: expansion preserves the accepted configurations
fn expansion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut sampled, mut decisive, mut disagree) = (0usize, 0usize, 0usize);
    for _ in 0..200 {
        let c = random_cabpds(&mut rng, 5, 3, 8);
        let b = c.expand();
        let all = stacks(&c.gamma, 8);
        for _ in 0..10 {
            let p = rng.gen_range(0..c.controls.len());
            let w = all.choose(&mut rng).unwrap().clone();
            let cfg = Config { control: p, stack: w };
            sampled += 1;
            let x = sandwich(&c, &cfg, 12).unwrap().decided();
            let y = sandwich(&b, &cfg, 12).unwrap().decided();
            if let (Some(x), Some(y)) = (x, y) {
                decisive += 1;
                if x != y {
                    disagree += 1;
                }
            }
        }
    }
    let pass = disagree == 0 && decisive * 100 >= sampled * 95;
    outcome(
        pass,
        format!("{disagree} disagreements, {decisive}/{sampled} decisive (need 95%)"),
    )
}

// 4: saturated automaton against the bounded game
fn buchi_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut decisive, mut disagree, mut capped) = (0usize, 0usize, 0usize);
    for _ in 0..200 {
        let c = random_plain(&mut rng, 4, 8);
        let lang = match buchi_language_with_cap(&c, default_cap(&c)) {
            Ok((lang, _)) => lang,
            Err(_) => {
                capped += 1;
                continue;
            }
        };
        for w in stacks(&c.gamma, 6) {
            for p in 0..c.controls.len() {
                let cfg = Config { control: p, stack: w.clone() };
                if let Some(want) = sandwich(&c, &cfg, 12).unwrap().decided() {
                    decisive += 1;
                    if lang.contains(p, &w).unwrap() != want {
                        disagree += 1;
                    }
                }
            }
        }
    }
    outcome(
        disagree == 0 && capped == 0,
        format!("{disagree} disagreements over {decisive} decisive configurations, {capped} runs hit the cap"),
    )
}

// 5: CTL product, every closure formula, against both oracles
fn ctl_pipeline() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut decisive, mut disagree) = (0usize, 0usize);
    for _ in 0..100 {
        let c = random_plain(&mut rng, 3, 6);
        let n = c.controls.len();
        let mut lab = Labelling::new();
        lab.insert("p".into(), random_labelling(&mut rng, n, &c.gamma));
        lab.insert("q".into(), random_labelling(&mut rng, n, &c.gamma));
        let f = random_nnf(&mut rng, 3);
        let run = run_nnf(&c, &lab, &f, None).unwrap();
        let expanded = run.product.system.expand();
        for (k, g) in run.product.closure.cl.iter().enumerate() {
            for w in stacks(&c.gamma, 3) {
                for p in 0..n {
                    let cfg = Config { control: p, stack: w.clone() };
                    let got = run.holds(k, &cfg).unwrap();
                    if let Some(want) = ctl_sandwich(&c, &lab, g, &cfg, 12).unwrap().decided() {
                        decisive += 1;
                        if got != want {
                            disagree += 1;
                        }
                    }
                    let pc = Config { control: run.product.control(p, k), stack: w.clone() };
                    if let Some(want) = sandwich(&expanded, &pc, 12).unwrap().decided() {
                        decisive += 1;
                        if got != want {
                            disagree += 1;
                        }
                    }
                }
            }
        }
    }
    outcome(disagree == 0, format!("{disagree} disagreements over {decisive} decisive checks"))
}

// 6: runs of the encoding versus strategy outcomes, depth 4
fn encoding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let start = Instant::now();
    let (mut compared, mut mismatches) = (0usize, 0usize);
    for _ in 0..50 {
        let m = random_rbm(&mut rng, &RbmShape::small());
        let agents: Vec<usize> = (0..m.agents.len()).filter(|_| rng.gen_bool(0.5)).collect();
        let a = Coalition::new(agents);
        let g = encode(&m, &a);
        for q in 0..m.states.len() {
            for eta in 0..=6 {
                let runs: BTreeSet<OutcomeTree> = g
                    .system
                    .run_prefixes(&EncodedGame::config(q, Endowment(eta)), 4)
                    .iter()
                    .map(OutcomeTree::from_run)
                    .collect();
                compared += 1;
                if runs != outcome_trees(&m, &a, q, Endowment(eta), 4) {
                    mismatches += 1;
                }
            }
        }
    }
    let took = start.elapsed();
    outcome(
        mismatches == 0 && took < Duration::from_secs(60),
        format!("{mismatches} mismatches in {compared} start points, {took:.2?} (limit 60s)"),
    )
}

fn points(m: &Rbm) -> Vec<(usize, u64)> {
    (0..m.states.len()).flat_map(|q| (0..=5).map(move |e| (q, e))).collect()
}

// 7: end-to-end against the endowment game
fn end_to_end() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut decisive, mut total, mut disagree) = (0usize, 0usize, 0usize);
    let mut compare = |m: &Rbm, f: &RalFormula, flat: bool| {
        let eval = evaluate(m, f, None).unwrap();
        for (q, eta) in points(m) {
            let got = eval.holds(q, Endowment(eta)).unwrap();
            let verdict = if flat {
                bounded_ral_flat(m, f, q, Endowment(eta), 16).unwrap()
            } else {
                ral_sandwich(m, f, q, Endowment(eta), 16).unwrap()
            };
            total += 1;
            if let Some(want) = verdict.decided() {
                decisive += 1;
                if got != want {
                    disagree += 1;
                }
            }
        }
    };
    for i in 0..150 {
        let shape = RbmShape {
            idle: rng.gen_bool(0.5),
            ..RbmShape::small()
        };
        let m = random_rbm(&mut rng, &shape);
        if i < 100 {
            let f = random_flat(&mut rng, &m);
            compare(&m, &f, true);
        } else {
            let f = random_nested(&mut rng, &m);
            compare(&m, &f, false);
        }
    }
    outcome(
        disagree == 0,
        format!("{disagree} disagreements, {decisive}/{total} points decisive"),
    )
}

// 8: negation flips every verdict
fn complement_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut checked, mut broken) = (0usize, 0usize);
    for _ in 0..50 {
        let m = random_rbm(&mut rng, &RbmShape::small());
        let f = if rng.gen_bool(0.5) {
            random_flat(&mut rng, &m)
        } else {
            random_nested(&mut rng, &m)
        };
        let neg = RalFormula::not(f.clone());
        for _ in 0..10 {
            let q = rng.gen_range(0..m.states.len());
            let eta = Endowment(rng.gen_range(0..=10));
            checked += 1;
            if ral_check(&m, q, eta, &neg).unwrap() == ral_check(&m, q, eta, &f).unwrap() {
                broken += 1;
            }
        }
    }
    outcome(broken == 0, format!("{broken} violations at {checked} points"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("department example", department),
        ("delta identities", delta_identities),
        ("expansion equivalence", expansion),
        ("buchi engine vs oracle", buchi_engine),
        ("ctl pipeline", ctl_pipeline),
        ("encoding at depth 4", encoding),
        ("end-to-end cross-validation", end_to_end),
        ("complement law", complement_law),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} ({}; {:.2?})",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed()
        );
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
}
