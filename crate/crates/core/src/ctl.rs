//! CTL over (compact) alternating pushdown systems with regular labellings.

use std::collections::BTreeMap;
use std::fmt;

use crate::automata::{Ama, ConfigSet};
use crate::pushdown::{Cabpds, Config};
use crate::saturation::{buchi_language_with_cap, default_cap, Stats};
use crate::{Error, Result, BOTTOM, TOKEN};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctl {
    True,
    False,
    Prop(String),
    Not(Box<Ctl>),
    And(Box<Ctl>, Box<Ctl>),
    Or(Box<Ctl>, Box<Ctl>),
    EX(Box<Ctl>),
    AX(Box<Ctl>),
    EU(Box<Ctl>, Box<Ctl>),
    AU(Box<Ctl>, Box<Ctl>),
    ER(Box<Ctl>, Box<Ctl>),
    AR(Box<Ctl>, Box<Ctl>),
}

impl Ctl {
    pub fn prop(name: &str) -> Ctl {
        Ctl::Prop(name.to_string())
    }
    pub fn not(f: Ctl) -> Ctl {
        Ctl::Not(Box::new(f))
    }
    pub fn and(a: Ctl, b: Ctl) -> Ctl {
        Ctl::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Ctl, b: Ctl) -> Ctl {
        Ctl::Or(Box::new(a), Box::new(b))
    }
    pub fn ex(f: Ctl) -> Ctl {
        Ctl::EX(Box::new(f))
    }
    pub fn ax(f: Ctl) -> Ctl {
        Ctl::AX(Box::new(f))
    }
    pub fn eu(a: Ctl, b: Ctl) -> Ctl {
        Ctl::EU(Box::new(a), Box::new(b))
    }
    pub fn au(a: Ctl, b: Ctl) -> Ctl {
        Ctl::AU(Box::new(a), Box::new(b))
    }
    pub fn er(a: Ctl, b: Ctl) -> Ctl {
        Ctl::ER(Box::new(a), Box::new(b))
    }
    pub fn ar(a: Ctl, b: Ctl) -> Ctl {
        Ctl::AR(Box::new(a), Box::new(b))
    }
    pub fn ef(f: Ctl) -> Ctl {
        Ctl::eu(Ctl::True, f)
    }
    pub fn eg(f: Ctl) -> Ctl {
        Ctl::er(Ctl::False, f)
    }
    pub fn af(f: Ctl) -> Ctl {
        Ctl::au(Ctl::True, f)
    }
    pub fn ag(f: Ctl) -> Ctl {
        Ctl::ar(Ctl::False, f)
    }

    pub fn is_modal(&self) -> bool {
        matches!(
            self,
            Ctl::EX(_) | Ctl::AX(_) | Ctl::EU(..) | Ctl::AU(..) | Ctl::ER(..) | Ctl::AR(..)
        )
    }

    pub fn is_release(&self) -> bool {
        matches!(self, Ctl::ER(..) | Ctl::AR(..))
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Ctl::True | Ctl::False | Ctl::Prop(_) => true,
            Ctl::Not(g) => matches!(**g, Ctl::Prop(_)),
            Ctl::EX(a) | Ctl::AX(a) => a.is_nnf(),
            Ctl::And(a, b) | Ctl::Or(a, b) | Ctl::EU(a, b) | Ctl::AU(a, b) | Ctl::ER(a, b) | Ctl::AR(a, b) => {
                a.is_nnf() && b.is_nnf()
            }
        }
    }

    fn children(&self) -> Vec<&Ctl> {
        match self {
            Ctl::True | Ctl::False | Ctl::Prop(_) => vec![],
            Ctl::Not(a) | Ctl::EX(a) | Ctl::AX(a) => vec![a],
            Ctl::And(a, b) | Ctl::Or(a, b) | Ctl::EU(a, b) | Ctl::AU(a, b) | Ctl::ER(a, b) | Ctl::AR(a, b) => {
                vec![a, b]
            }
        }
    }
}

impl fmt::Display for Ctl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ctl::True => write!(f, "true"),
            Ctl::False => write!(f, "false"),
            Ctl::Prop(p) => write!(f, "{p}"),
            Ctl::Not(a) => write!(f, "!{a}"),
            Ctl::And(a, b) => write!(f, "({a} & {b})"),
            Ctl::Or(a, b) => write!(f, "({a} | {b})"),
            Ctl::EX(a) => write!(f, "EX {a}"),
            Ctl::AX(a) => write!(f, "AX {a}"),
            Ctl::EU(a, b) => write!(f, "E({a} U {b})"),
            Ctl::AU(a, b) => write!(f, "A({a} U {b})"),
            Ctl::ER(a, b) => write!(f, "E({a} R {b})"),
            Ctl::AR(a, b) => write!(f, "A({a} R {b})"),
        }
    }
}

/// Pushes negations down to propositions with the usual CTL dualities.
pub fn to_nnf(f: &Ctl) -> Ctl {
    nnf(f, false)
}

fn nnf(f: &Ctl, neg: bool) -> Ctl {
    match (f, neg) {
        (Ctl::True, false) | (Ctl::False, true) => Ctl::True,
        (Ctl::True, true) | (Ctl::False, false) => Ctl::False,
        (Ctl::Prop(_), false) => f.clone(),
        (Ctl::Prop(_), true) => Ctl::not(f.clone()),
        (Ctl::Not(g), _) => nnf(g, !neg),
        (Ctl::And(a, b), false) => Ctl::and(nnf(a, false), nnf(b, false)),
        (Ctl::And(a, b), true) => Ctl::or(nnf(a, true), nnf(b, true)),
        (Ctl::Or(a, b), false) => Ctl::or(nnf(a, false), nnf(b, false)),
        (Ctl::Or(a, b), true) => Ctl::and(nnf(a, true), nnf(b, true)),
        (Ctl::EX(a), false) => Ctl::ex(nnf(a, false)),
        (Ctl::EX(a), true) => Ctl::ax(nnf(a, true)),
        (Ctl::AX(a), false) => Ctl::ax(nnf(a, false)),
        (Ctl::AX(a), true) => Ctl::ex(nnf(a, true)),
        (Ctl::EU(a, b), false) => Ctl::eu(nnf(a, false), nnf(b, false)),
        (Ctl::EU(a, b), true) => Ctl::ar(nnf(a, true), nnf(b, true)),
        (Ctl::AU(a, b), false) => Ctl::au(nnf(a, false), nnf(b, false)),
        (Ctl::AU(a, b), true) => Ctl::er(nnf(a, true), nnf(b, true)),
        (Ctl::ER(a, b), false) => Ctl::er(nnf(a, false), nnf(b, false)),
        (Ctl::ER(a, b), true) => Ctl::au(nnf(a, true), nnf(b, true)),
        (Ctl::AR(a, b), false) => Ctl::ar(nnf(a, false), nnf(b, false)),
        (Ctl::AR(a, b), true) => Ctl::eu(nnf(a, true), nnf(b, true)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Closure {
    /// Subformulae, children before parents; the formula itself is last.
    pub cl: Vec<Ctl>,
    pub cl_r: Vec<Ctl>,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

pub fn closure(f: &Ctl) -> Closure {
    fn walk(f: &Ctl, out: &mut Closure) {
        if out.cl.contains(f) {
            return;
        }
        match f {
            Ctl::Prop(p) => {
                if !out.positive.contains(p) {
                    out.positive.push(p.clone());
                }
            }
            Ctl::Not(g) => {
                if let Ctl::Prop(p) = &**g {
                    if !out.negative.contains(p) {
                        out.negative.push(p.clone());
                    }
                    out.cl.push(f.clone());
                    return;
                }
            }
            _ => {}
        }
        for c in f.children() {
            walk(c, out);
        }
        if f.is_release() {
            out.cl_r.push(f.clone());
        }
        out.cl.push(f.clone());
    }
    let mut out = Closure::default();
    walk(f, &mut out);
    out
}

/// Regular labelling: one configuration set per proposition.
pub type Labelling = BTreeMap<String, ConfigSet>;

/// The product system together with the index maps into it.
#[derive(Debug, Clone)]
pub struct Product {
    pub system: Cabpds,
    pub closure: Closure,
    pub base_controls: usize,
}

impl Product {
    /// Control of `(p, cl[k])`.
    pub fn control(&self, p: usize, k: usize) -> usize {
        p * self.closure.cl.len() + k
    }

    pub fn index_of(&self, f: &Ctl) -> Option<usize> {
        self.closure.cl.iter().position(|g| g == f)
    }
}

fn top_words(gamma: &[char], r: usize) -> Vec<Vec<char>> {
    // every word a rule of width <= r can see: r symbols, or fewer then #
    let mut out = Vec::new();
    let mut layer: Vec<Vec<char>> = vec![Vec::new()];
    for len in 0..=r {
        for w in &layer {
            if len == r {
                out.push(w.clone());
            } else {
                let mut b = w.clone();
                b.push(BOTTOM);
                out.push(b);
            }
        }
        if len < r {
            layer = layer
                .iter()
                .flat_map(|w| {
                    gamma.iter().map(move |&g| {
                        let mut v = w.clone();
                        v.push(g);
                        v
                    })
                })
                .collect();
        }
    }
    out
}

fn is_prefix(u: &[char], v: &[char]) -> bool {
    u.len() <= v.len() && v[..u.len()] == *u
}

fn dedup(mut targets: Vec<(usize, Vec<char>)>) -> Vec<(usize, Vec<char>)> {
    targets.sort();
    targets.dedup();
    targets
}

/// Builds the product system for an NNF formula.
pub fn build_product(c: &Cabpds, lab: &Labelling, f: &Ctl) -> Result<Product> {
    if !f.is_nnf() {
        return Err(Error::Usage(format!("formula {f} is not in negation normal form")));
    }
    c.validate()?;
    let closure = closure(f);
    let n = c.controls.len();
    let m = closure.cl.len();
    let mut names = Vec::with_capacity(n * m);
    for p in 0..n {
        for k in 0..m {
            names.push(format!("{}.{k}", c.controls[p]));
        }
    }
    let mut sys = Cabpds::new(names, &c.gamma, c.r);
    for p in 0..n {
        for (k, g) in closure.cl.iter().enumerate() {
            sys.finals[p * m + k] = g.is_release();
        }
    }
    let ctrl = |p: usize, g: &Ctl| p * m + closure.cl.iter().position(|h| h == g).unwrap();

    let top = sys.add_control("top", true);
    let mut syms = c.gamma.clone();
    syms.push(BOTTOM);
    for &x in &syms {
        sys.add_rule(top, &[x], vec![(top, vec![x])]);
    }

    // Literal automata, embedded state by state.
    let mut literal_entry: BTreeMap<(String, bool), usize> = BTreeMap::new();
    let literals: Vec<(String, bool)> = closure
        .positive
        .iter()
        .map(|p| (p.clone(), true))
        .chain(closure.negative.iter().map(|p| (p.clone(), false)))
        .collect();
    for (name, positive) in &literals {
        let set = lab.get(name).ok_or_else(|| Error::UnknownProposition(name.clone()))?;
        if set.controls != n {
            return Err(Error::Usage(format!("labelling of {name} does not match the control states")));
        }
        let owned;
        let ama: &Ama = if *positive {
            &set.ama
        } else {
            owned = set.ama.complement();
            &owned
        };
        for &x in &ama.alphabet {
            if x != BOTTOM && !c.gamma.contains(&x) {
                return Err(Error::Alphabet {
                    symbol: x,
                    context: format!("the labelling of {name}"),
                });
            }
        }
        let tag = format!("lit{}", literal_entry.len());
        let base = sys.controls.len();
        for s in 0..ama.num_states() {
            sys.add_control(format!("{tag}.{s}"), false);
        }
        let end = sys.controls.len();
        for s in 0..ama.num_states() {
            let id = sys.add_control(format!("{tag}.{s}$"), ama.finals[s]);
            if ama.finals[s] {
                sys.add_rule(id, &[BOTTOM], vec![(id, vec![BOTTOM])]);
            }
        }
        for (s, x, t) in ama.triples() {
            if x == BOTTOM {
                let targets = if t.is_empty() {
                    vec![(top, vec![BOTTOM])]
                } else {
                    t.iter().map(|&u| (end + u, vec![BOTTOM])).collect()
                };
                sys.add_rule(base + s, &[BOTTOM], targets);
            } else if c.gamma.contains(&x) {
                let targets = if t.is_empty() {
                    vec![(top, vec![])]
                } else {
                    t.iter().map(|&u| (base + u, vec![])).collect()
                };
                sys.add_rule(base + s, &[x], targets);
            }
        }
        literal_entry.insert((name.clone(), *positive), base);
    }

    let words = top_words(&c.gamma, c.r);
    let rules_at = |p: usize| c.rules.iter().filter(move |r| r.control == p);
    for p in 0..n {
        for g in &closure.cl {
            let me = ctrl(p, g);
            match g {
                Ctl::True => sys.add_rule(me, &[], vec![(top, vec![])]),
                Ctl::False => {}
                Ctl::Prop(name) => {
                    let base = literal_entry[&(name.clone(), true)];
                    sys.add_rule(me, &[], vec![(base + p, vec![])]);
                }
                Ctl::Not(inner) => {
                    let Ctl::Prop(name) = &**inner else { unreachable!() };
                    let base = literal_entry[&(name.clone(), false)];
                    sys.add_rule(me, &[], vec![(base + p, vec![])]);
                }
                Ctl::And(a, b) => sys.add_rule(me, &[], vec![(ctrl(p, a), vec![]), (ctrl(p, b), vec![])]),
                Ctl::Or(a, b) => {
                    sys.add_rule(me, &[], vec![(ctrl(p, a), vec![])]);
                    sys.add_rule(me, &[], vec![(ctrl(p, b), vec![])]);
                }
                Ctl::EX(a) => {
                    for rule in rules_at(p) {
                        let t = rule.targets.iter().map(|(q, w)| (ctrl(*q, a), w.clone())).collect();
                        sys.add_rule(me, &rule.read, dedup(t));
                    }
                }
                Ctl::EU(a, b) | Ctl::ER(b, a) => {
                    // EU: discharge with b now, or keep a here and continue.
                    // ER: the roles swap and discharge needs both.
                    let until = matches!(g, Ctl::EU(..));
                    if until {
                        sys.add_rule(me, &[], vec![(ctrl(p, b), vec![])]);
                    } else {
                        sys.add_rule(me, &[], vec![(ctrl(p, a), vec![]), (ctrl(p, b), vec![])]);
                    }
                    for rule in rules_at(p) {
                        let mut t = vec![(ctrl(p, a), rule.read.clone())];
                        t.extend(rule.targets.iter().map(|(q, w)| (ctrl(*q, g), w.clone())));
                        sys.add_rule(me, &rule.read, dedup(t));
                    }
                }
                Ctl::AX(a) | Ctl::AU(_, a) | Ctl::AR(_, a) => {
                    let next = if matches!(g, Ctl::AX(_)) { a.as_ref() } else { g };
                    match g {
                        Ctl::AU(_, b) => sys.add_rule(me, &[], vec![(ctrl(p, b), vec![])]),
                        Ctl::AR(x, y) => sys.add_rule(me, &[], vec![(ctrl(p, x), vec![]), (ctrl(p, y), vec![])]),
                        _ => {}
                    }
                    for v in &words {
                        let mut t = Vec::new();
                        for rule in rules_at(p).filter(|r| is_prefix(&r.read, v)) {
                            let rest = &v[rule.read.len()..];
                            for (q, w) in &rule.targets {
                                let mut pushed = w.clone();
                                pushed.extend_from_slice(rest);
                                t.push((ctrl(*q, next), pushed));
                            }
                        }
                        if t.is_empty() {
                            continue;
                        }
                        match g {
                            Ctl::AU(x, _) => t.push((ctrl(p, x), v.clone())),
                            Ctl::AR(_, y) => t.push((ctrl(p, y), v.clone())),
                            _ => {}
                        }
                        sys.add_rule(me, v, dedup(t));
                    }
                }
            }
        }
    }
    sys.validate()?;
    Ok(Product {
        system: sys,
        closure,
        base_controls: n,
    })
}

/// The configurations of the base system satisfying `f`, read off the
/// accepting language of the expanded product.
#[derive(Debug, Clone)]
pub struct CtlRun {
    pub product: Product,
    pub lang: ConfigSet,
    pub stats: Stats,
}

impl CtlRun {
    /// Whether `((p, cl[k]), stack)` is accepted.
    pub fn holds(&self, k: usize, cfg: &Config) -> Result<bool> {
        self.lang.contains(self.product.control(cfg.control, k), &cfg.stack)
    }

    /// The set for `cl[k]`, re-exposed over the base control states.
    pub fn config_set(&self, k: usize) -> ConfigSet {
        let n = self.product.base_controls;
        let a = &self.lang.ama;
        let mut out = Ama::new(&format!("{}", self.product.closure.cl[k]), &a.alphabet);
        for p in 0..n {
            let s = out.add_state(self.product.system.controls[p * self.product.closure.cl.len()].clone());
            out.init.insert(s);
        }
        for s in 0..a.num_states() {
            let id = out.add_state(a.labels[s].clone());
            out.finals[id] = a.finals[s];
        }
        for (s, x, t) in a.triples() {
            let t: Vec<usize> = t.iter().map(|&u| u + n).collect();
            out.add_transition(s + n, x, &t);
            for p in 0..n {
                if s == self.product.control(p, k) {
                    out.add_transition(p, x, &t);
                }
            }
        }
        for p in 0..n {
            out.finals[p] = a.finals[self.product.control(p, k)];
        }
        let mut cs = ConfigSet { ama: out.trim(), controls: n };
        // trim keeps the initial states first, in order
        cs.ama.name = "ctl".into();
        cs
    }
}

/// Builds, expands and saturates the product of an NNF formula.
pub fn run_nnf(c: &Cabpds, lab: &Labelling, f: &Ctl, cap: Option<usize>) -> Result<CtlRun> {
    let product = build_product(c, lab, f)?;
    let expanded = product.system.expand();
    let cap = cap.unwrap_or_else(|| default_cap(&expanded));
    let (lang, stats) = buchi_language_with_cap(&expanded, cap)?;
    Ok(CtlRun { product, lang, stats })
}

/// Configurations satisfying `f`. Negated temporal subformulae are solved
/// first and complemented into fresh propositions, which keeps negation
/// exact on alternating systems.
pub fn check_set(c: &Cabpds, lab: &Labelling, f: &Ctl, cap: Option<usize>) -> Result<(ConfigSet, Stats)> {
    let mut lab = lab.clone();
    let mut stats = Stats::default();
    let g = eliminate_negated_modalities(c, &mut lab, f, false, cap, &mut stats)?;
    let run = run_nnf(c, &lab, &g, cap)?;
    add_stats(&mut stats, &run.stats);
    let k = run.product.closure.cl.len() - 1;
    Ok((run.config_set(k), stats))
}

fn add_stats(total: &mut Stats, s: &Stats) {
    total.outer_iterations += s.outer_iterations;
    total.saturation_rounds += s.saturation_rounds;
    total.transitions_added += s.transitions_added;
}

fn eliminate_negated_modalities(
    c: &Cabpds,
    lab: &mut Labelling,
    f: &Ctl,
    neg: bool,
    cap: Option<usize>,
    stats: &mut Stats,
) -> Result<Ctl> {
    let mut rec = |g: &Ctl, neg: bool, lab: &mut Labelling| eliminate_negated_modalities(c, lab, g, neg, cap, stats);
    Ok(match (f, neg) {
        (Ctl::True, _) | (Ctl::False, _) | (Ctl::Prop(_), _) => nnf(f, neg),
        (Ctl::Not(g), _) => rec(g, !neg, lab)?,
        (Ctl::And(a, b), false) => Ctl::and(rec(a, false, lab)?, rec(b, false, lab)?),
        (Ctl::And(a, b), true) => Ctl::or(rec(a, true, lab)?, rec(b, true, lab)?),
        (Ctl::Or(a, b), false) => Ctl::or(rec(a, false, lab)?, rec(b, false, lab)?),
        (Ctl::Or(a, b), true) => Ctl::and(rec(a, true, lab)?, rec(b, true, lab)?),
        (_, true) => {
            let (set, s) = check_set(c, lab, f, cap)?;
            add_stats(stats, &s);
            let unary = set.ama.alphabet.iter().all(|&x| x == TOKEN || x == BOTTOM);
            let set = if unary { set.normalize_unary()? } else { set };
            let name = format!("$neg{}", lab.len());
            lab.insert(name.clone(), set.complement());
            Ctl::Prop(name)
        }
        (Ctl::EX(a), false) => Ctl::ex(rec(a, false, lab)?),
        (Ctl::AX(a), false) => Ctl::ax(rec(a, false, lab)?),
        (Ctl::EU(a, b), false) => Ctl::eu(rec(a, false, lab)?, rec(b, false, lab)?),
        (Ctl::AU(a, b), false) => Ctl::au(rec(a, false, lab)?, rec(b, false, lab)?),
        (Ctl::ER(a, b), false) => Ctl::er(rec(a, false, lab)?, rec(b, false, lab)?),
        (Ctl::AR(a, b), false) => Ctl::ar(rec(a, false, lab)?, rec(b, false, lab)?),
    })
}

/// Decides `c, cfg, lab |= f`.
pub fn ctl_check(c: &Cabpds, lab: &Labelling, f: &Ctl, cfg: &Config) -> Result<bool> {
    let (set, _) = check_set(c, lab, f, None)?;
    set.contains(cfg.control, &cfg.stack)
}
