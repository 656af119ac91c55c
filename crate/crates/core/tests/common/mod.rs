#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ralmc::automata::ConfigSet;
use ralmc::ctl::Ctl;
use ralmc::model::{Action, Atom, EndowmentPredicate, Proposition, RalFormula, Rbm};
use ralmc::pushdown::Cabpds;
use ralmc::BOTTOM;

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn gamma(rng: &mut ChaCha8Rng) -> Vec<char> {
    if rng.gen_bool(0.5) {
        vec!['|']
    } else {
        vec!['a', 'b']
    }
}

fn word(rng: &mut ChaCha8Rng, gamma: &[char], max: usize) -> Vec<char> {
    (0..rng.gen_range(0..=max)).map(|_| *gamma.choose(rng).unwrap()).collect()
}

/// Compact system with reads of width 0..=r, some of them ending in `#`.
pub fn random_cabpds(rng: &mut ChaCha8Rng, max_controls: usize, max_r: usize, max_rules: usize) -> Cabpds {
    let n = rng.gen_range(1..=max_controls);
    let g = gamma(rng);
    let r = rng.gen_range(1..=max_r);
    let mut c = Cabpds::new(names("p", n), &g, r);
    for p in 0..n {
        c.finals[p] = rng.gen_bool(0.6);
    }
    for _ in 0..rng.gen_range(1..=max_rules) {
        let width = rng.gen_range(0..=r);
        let mut read: Vec<char> = (0..width).map(|_| *g.choose(rng).unwrap()).collect();
        let bottom = width > 0 && rng.gen_bool(0.2);
        if bottom {
            *read.last_mut().unwrap() = BOTTOM;
        }
        let targets = (0..rng.gen_range(1..=2))
            .map(|_| {
                let mut w = word(rng, &g, r);
                if bottom {
                    w.push(BOTTOM);
                }
                (rng.gen_range(0..n), w)
            })
            .collect();
        c.add_rule(rng.gen_range(0..n), &read, targets);
    }
    c.validate().unwrap();
    c
}

/// Width-one system.
pub fn random_plain(rng: &mut ChaCha8Rng, max_controls: usize, max_rules: usize) -> Cabpds {
    let n = rng.gen_range(1..=max_controls);
    let g = gamma(rng);
    let mut c = Cabpds::new(names("p", n), &g, 1);
    for p in 0..n {
        c.finals[p] = rng.gen_bool(0.5);
    }
    for _ in 0..rng.gen_range(1..=max_rules) {
        let bottom = rng.gen_bool(0.2);
        let read = if bottom { BOTTOM } else { *g.choose(rng).unwrap() };
        let targets = (0..rng.gen_range(1..=2))
            .map(|_| {
                let mut w = word(rng, &g, 2);
                if bottom {
                    w.push(BOTTOM);
                }
                (rng.gen_range(0..n), w)
            })
            .collect();
        c.add_rule(rng.gen_range(0..n), &[read], targets);
    }
    c.validate().unwrap();
    c
}

pub fn random_labelling(rng: &mut ChaCha8Rng, n: usize, gamma: &[char]) -> ConfigSet {
    let mut cs = ConfigSet::empty("lab", &names("p", n), gamma);
    let extra = rng.gen_range(1..=2);
    for i in 0..extra {
        let s = cs.ama.add_state(format!("s{i}"));
        cs.ama.finals[s] = rng.gen_bool(0.5);
    }
    let total = n + extra;
    let alphabet = cs.ama.alphabet.clone();
    for s in 0..total {
        for &x in &alphabet {
            for _ in 0..rng.gen_range(0..=2) {
                let t: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..total)).collect();
                cs.ama.add_transition(s, x, &t);
            }
        }
    }
    cs
}

/// Formula already in negation normal form.
pub fn random_nnf(rng: &mut ChaCha8Rng, depth: usize) -> Ctl {
    if depth == 0 || rng.gen_bool(0.2) {
        let p = Ctl::prop(if rng.gen_bool(0.5) { "p" } else { "q" });
        return match rng.gen_range(0..6) {
            0 => Ctl::True,
            1 => Ctl::False,
            2 | 3 => p,
            _ => Ctl::not(p),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_nnf(rng, depth - 1));
    match rng.gen_range(0..8) {
        0 => Ctl::And(sub(rng), sub(rng)),
        1 => Ctl::Or(sub(rng), sub(rng)),
        2 => Ctl::EX(sub(rng)),
        3 => Ctl::AX(sub(rng)),
        4 => Ctl::EU(sub(rng), sub(rng)),
        5 => Ctl::AU(sub(rng), sub(rng)),
        6 => Ctl::ER(sub(rng), sub(rng)),
        _ => Ctl::AR(sub(rng), sub(rng)),
    }
}

/// All stacks over `gamma` of height at most `max`.
pub fn stacks(gamma: &[char], max: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<char>| gamma.iter().map(move |&g| [w.clone(), vec![g]].concat()))
            .collect();
        out.extend(layer.clone());
    }
    out
}

pub struct RbmShape {
    pub agents: usize,
    pub states: usize,
    pub actions_per_agent: usize,
    pub effects: std::ops::RangeInclusive<i64>,
    pub idle: bool,
}

impl RbmShape {
    pub fn small() -> Self {
        RbmShape {
            agents: 2,
            states: 3,
            actions_per_agent: 2,
            effects: -2..=2,
            idle: false,
        }
    }
}

/// Random validated model; with `idle` every agent may always idle.
pub fn random_rbm(rng: &mut ChaCha8Rng, shape: &RbmShape) -> Rbm {
    let na = rng.gen_range(1..=shape.agents);
    let nq = rng.gen_range(1..=shape.states);
    let mut actions: Vec<Action> = Vec::new();
    let idle = if shape.idle {
        actions.push(Action {
            name: "idle".into(),
            effect: 0,
        });
        Some(0)
    } else {
        None
    };
    let pool = 2 + na;
    for i in 0..pool {
        actions.push(Action {
            name: format!("a{i}"),
            effect: rng.gen_range(shape.effects.clone()),
        });
    }
    let first = actions.len() - pool;
    let avail: Vec<Vec<Vec<usize>>> = (0..nq)
        .map(|_| {
            (0..na)
                .map(|_| {
                    let k = rng.gen_range(1..=shape.actions_per_agent);
                    let mut acts: Vec<usize> = (first..actions.len()).collect::<Vec<_>>();
                    acts.shuffle(rng);
                    acts.truncate(k);
                    if let Some(i) = idle {
                        if !acts.contains(&i) {
                            acts[0] = i;
                        }
                    }
                    acts.sort_unstable();
                    acts
                })
                .collect()
        })
        .collect();
    let mut m = Rbm {
        name: "rand".into(),
        agents: names("g", na),
        states: names("q", nq),
        init: 0,
        actions,
        avail,
        trans: BTreeMap::new(),
        props: Vec::new(),
    };
    let all: Vec<usize> = (0..na).collect();
    for q in 0..nq {
        for profile in m.profiles(q, &all) {
            let t = rng.gen_range(0..nq);
            m.trans.insert((q, profile), t);
        }
    }
    for name in ["p", "r"] {
        let chosen: Vec<usize> = (0..nq).filter(|_| rng.gen_bool(0.6)).collect();
        let atoms = chosen
            .into_iter()
            .map(|q| Atom {
                state: q,
                predicate: match rng.gen_range(0..4) {
                    0 => EndowmentPredicate::Any,
                    1 => EndowmentPredicate::AtLeast(rng.gen_range(0..=4)),
                    2 => EndowmentPredicate::Below(rng.gen_range(1..=4)),
                    _ => EndowmentPredicate::Modulo {
                        modulus: 2,
                        residue: rng.gen_range(0..2),
                    },
                },
            })
            .collect();
        m.props.push(Proposition {
            name: name.into(),
            atoms,
        });
    }
    m.validate().unwrap();
    m
}

fn random_coalition(rng: &mut ChaCha8Rng, m: &Rbm) -> Vec<String> {
    m.agents.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
}

fn random_prop_formula(rng: &mut ChaCha8Rng, depth: usize) -> RalFormula {
    if depth == 0 || rng.gen_bool(0.4) {
        let p = RalFormula::prop(if rng.gen_bool(0.5) { "p" } else { "r" });
        return match rng.gen_range(0..6) {
            0 => RalFormula::True,
            1 => RalFormula::not(p),
            _ => p,
        };
    }
    let a = random_prop_formula(rng, depth - 1);
    let b = random_prop_formula(rng, depth - 1);
    match rng.gen_range(0..3) {
        0 => RalFormula::and(a, b),
        1 => RalFormula::or(a, b),
        _ => RalFormula::not(a),
    }
}

fn modality(rng: &mut ChaCha8Rng, coalition: Vec<String>, a: RalFormula, b: RalFormula) -> RalFormula {
    match rng.gen_range(0..4) {
        0 => RalFormula::Next(coalition, Box::new(b)),
        1 => RalFormula::Until(coalition, Box::new(a), Box::new(b)),
        2 => RalFormula::eventually(coalition, b),
        _ => RalFormula::Always(coalition, Box::new(b)),
    }
}

/// One cooperation modality over propositional arguments.
pub fn random_flat(rng: &mut ChaCha8Rng, m: &Rbm) -> RalFormula {
    let coalition = random_coalition(rng, m);
    let a = random_prop_formula(rng, 2);
    let b = random_prop_formula(rng, 2);
    modality(rng, coalition, a, b)
}

/// At least two levels of cooperation modalities.
pub fn random_nested(rng: &mut ChaCha8Rng, m: &Rbm) -> RalFormula {
    let inner = random_flat(rng, m);
    let inner = if rng.gen_bool(0.3) { RalFormula::not(inner) } else { inner };
    let other = random_prop_formula(rng, 1);
    let coalition = random_coalition(rng, m);
    modality(rng, coalition, other, inner)
}
