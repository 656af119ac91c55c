//! pre* saturation and the Büchi acceptance fixpoint.

use std::collections::BTreeSet;

use crate::automata::{Ama, ConfigSet};
use crate::pushdown::Cabpds;
use crate::{Error, Result, BOTTOM};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub outer_iterations: usize,
    pub saturation_rounds: usize,
    pub transitions_added: usize,
}

/// Minimal sets of states that `from` can reach reading `w`.
fn reach(ama: &Ama, from: usize, w: &[char]) -> Vec<Vec<usize>> {
    let mut cur: Vec<Vec<usize>> = vec![vec![from]];
    for &x in w {
        let mut next: Vec<Vec<usize>> = Vec::new();
        for set in &cur {
            let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
            for &s in set {
                let moves = ama.transitions(s, x);
                let mut grown = Vec::with_capacity(partial.len() * moves.len());
                for p in &partial {
                    for m in moves {
                        grown.push(union(p, m));
                    }
                }
                partial = minimize(grown);
                if partial.is_empty() {
                    break;
                }
            }
            next.extend(partial);
        }
        cur = minimize(next);
        if cur.is_empty() {
            break;
        }
    }
    cur
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(x);
    }
    out
}

fn subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn minimize(mut sets: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    sets.sort_by_key(Vec::len);
    sets.dedup();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for s in sets {
        if !out.iter().any(|o| subset(o, &s)) {
            out.push(s);
        }
    }
    out
}

fn check_alphabet(sys: &Cabpds, ama: &Ama) -> Result<()> {
    for &g in sys.gamma.iter().chain(std::iter::once(&BOTTOM)) {
        if !ama.alphabet.contains(&g) {
            return Err(Error::Alphabet {
                symbol: g,
                context: format!("the target automaton {}", ama.name),
            });
        }
    }
    for r in &sys.rules {
        if r.read.len() != 1 {
            return Err(Error::Pushdown("saturation needs a width-one system; expand it first".into()));
        }
    }
    Ok(())
}

/// Applies the saturation rule for the rules whose source satisfies
/// `active` until nothing changes. Control `p` is automaton state `state(p)`.
fn saturate(
    ama: &mut Ama,
    sys: &Cabpds,
    state: &dyn Fn(usize) -> usize,
    active: &dyn Fn(usize) -> bool,
    stats: &mut Stats,
) {
    loop {
        stats.saturation_rounds += 1;
        let mut changed = false;
        for rule in sys.rules.iter().filter(|r| active(r.control)) {
            let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
            for (t, w) in &rule.targets {
                let options = reach(ama, state(*t), w);
                let mut next = Vec::new();
                for c in &combos {
                    for o in &options {
                        next.push(union(c, o));
                    }
                }
                combos = minimize(next);
                if combos.is_empty() {
                    break;
                }
            }
            for c in combos {
                if ama.add_transition(state(rule.control), rule.read[0], &c) {
                    stats.transitions_added += 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// All configurations from which the run-builder can force a finite run
/// tree whose leaves lie in `target`.
pub fn pre_star(sys: &Cabpds, target: &ConfigSet) -> Result<ConfigSet> {
    check_alphabet(sys, &target.ama)?;
    if target.controls != sys.controls.len() {
        return Err(Error::Pushdown("target automaton does not match the control states".into()));
    }
    let mut out = target.clone();
    saturate(&mut out.ama, sys, &|p| p, &|_| true, &mut Stats::default());
    Ok(out)
}

/// Default bound on outer iterations of [`buchi_language`].
pub fn default_cap(sys: &Cabpds) -> usize {
    10 * sys.controls.len() * (sys.gamma.len() + 1) * sys.max_push().max(1) + 64
}

/// The accepting configurations of a width-one system, with statistics.
pub fn buchi_language(sys: &Cabpds) -> Result<(ConfigSet, Stats)> {
    buchi_language_with_cap(sys, default_cap(sys))
}

pub fn buchi_language_with_cap(sys: &Cabpds, cap: usize) -> Result<(ConfigSet, Stats)> {
    sys.validate()?;
    let n = sys.controls.len();
    // Every state of an estimate is a control state (plus the accept
    // state), so a target reached mid-word always means "the rest of the
    // stack is accepted from that control". Start from everything.
    let mut current = ConfigSet::empty("lang", &sys.controls, &sys.gamma);
    let done = current.ama.add_state("done");
    current.ama.finals[done] = true;
    for p in 0..n {
        for &x in sys.gamma.iter().chain(std::iter::once(&BOTTOM)) {
            current.ama.add_transition(p, x, &[]);
        }
    }
    check_alphabet(sys, &current.ama)?;
    let mut stats = Stats::default();
    let triples = |a: &Ama| -> BTreeSet<(usize, char, Vec<usize>)> { a.triples().map(|(s, x, t)| (s, x, t.clone())).collect() };
    let mut seen: Vec<BTreeSet<(usize, char, Vec<usize>)>> = vec![triples(&current.ama)];
    while stats.outer_iterations < cap {
        stats.outer_iterations += 1;
        // States 0..n: the new estimate. n: accept state. n+1..2n+1: frozen
        // copy of the previous estimate.
        let old = |p: usize| n + 1 + p;
        let mut work = ConfigSet::empty("lang", &sys.controls, &sys.gamma);
        let d = work.ama.add_state("done");
        work.ama.finals[d] = true;
        for p in 0..n {
            work.ama.add_state(format!("{}'", sys.controls[p]));
        }
        for (s, x, t) in current.ama.triples() {
            let map = |u: usize| if u < n { old(u) } else { u };
            let t: Vec<usize> = t.iter().map(|&u| map(u)).collect();
            work.ama.add_transition(map(s), x, &t);
        }
        // Seed: final controls with a move that stays inside the estimate.
        for rule in sys.rules.iter().filter(|r| sys.finals[r.control]) {
            let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
            for (t, w) in &rule.targets {
                let options = reach(&work.ama, old(*t), w);
                combos = minimize(combos.iter().flat_map(|c| options.iter().map(move |o| union(c, o))).collect());
            }
            for c in combos {
                work.ama.add_transition(rule.control, rule.read[0], &c);
            }
        }
        saturate(&mut work.ama, sys, &|p| p, &|_| true, &mut stats);
        // Collapse the frozen copy onto the new estimate.
        let mut next = ConfigSet::empty("lang", &sys.controls, &sys.gamma);
        let d = next.ama.add_state("done");
        next.ama.finals[d] = true;
        debug_assert_eq!(d, done);
        for (s, x, t) in work.ama.triples() {
            if s <= n {
                let t: Vec<usize> = t.iter().map(|&u| if u > n { u - n - 1 } else { u }).collect();
                next.ama.add_transition(s, x, &t);
            }
        }
        let key = triples(&next.ama);
        if seen.last() == Some(&key) {
            return Ok((next, stats));
        }
        if seen.contains(&key) {
            // a cycle of estimates never reaches a fixpoint
            return Err(Error::IterationCap { cap: stats.outer_iterations });
        }
        seen.push(key);
        current = next;
    }
    Err(Error::IterationCap { cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pushdown::Config;

    fn sys(rules: &[(usize, &str, &[(usize, &str)])], n: usize, finals: &[usize]) -> Cabpds {
        let mut c = Cabpds::new((0..n).map(|i| format!("p{i}")).collect(), &['|'], 1);
        for (p, u, ts) in rules {
            c.add_rule(*p, &u.chars().collect::<Vec<_>>(), ts.iter().map(|(t, w)| (*t, w.chars().collect())).collect());
        }
        for &f in finals {
            c.finals[f] = true;
        }
        c.validate().unwrap();
        c
    }

    fn stack(n: usize) -> String {
        "|".repeat(n)
    }

    /// Explicit backward search over bounded heights.
    fn explicit_pre_star(c: &Cabpds, target: &dyn Fn(&Config) -> bool, h: usize) -> BTreeSet<Config> {
        let mut all = Vec::new();
        for p in 0..c.controls.len() {
            for k in 0..=h {
                all.push(Config::new(p, &stack(k)));
            }
        }
        let mut win: BTreeSet<Config> = all.iter().filter(|c| target(c)).cloned().collect();
        loop {
            let before = win.len();
            for cfg in &all {
                if !win.contains(cfg) && c.successors(cfg).iter().any(|set| set.iter().all(|s| win.contains(s))) {
                    win.insert(cfg.clone());
                }
            }
            if win.len() == before {
                return win;
            }
        }
    }

    #[test]
    fn pop_loop_reaches_empty_stack() {
        let c = sys(&[(0, "|", &[(0, "")])], 1, &[]);
        let mut target = ConfigSet::empty("t", &c.controls, &['|']);
        let f = target.ama.add_state("f");
        target.ama.finals[f] = true;
        target.ama.add_transition(0, BOTTOM, &[f]);
        let pre = pre_star(&c, &target).unwrap();
        let explicit = explicit_pre_star(&c, &|cfg| cfg.stack.is_empty(), 10);
        for k in 0..=10 {
            assert!(pre.contains(0, &stack(k).chars().collect::<Vec<_>>()).unwrap());
            assert!(explicit.contains(&Config::new(0, &stack(k))));
        }
    }

    #[test]
    fn empty_and_universal_targets() {
        let c = sys(&[(0, "|", &[(1, "||")]), (1, "|", &[(0, "")])], 2, &[]);
        let empty = ConfigSet::empty("t", &c.controls, &['|']);
        let pre = pre_star(&c, &empty).unwrap();
        for p in 0..2 {
            for k in 0..6 {
                assert!(!pre.contains(p, &stack(k).chars().collect::<Vec<_>>()).unwrap());
            }
        }
        let all = ConfigSet::universal("t", &c.controls, &['|']);
        let pre = pre_star(&c, &all).unwrap();
        for p in 0..2 {
            for k in 0..6 {
                assert!(pre.contains(p, &stack(k).chars().collect::<Vec<_>>()).unwrap());
            }
        }
    }

    #[test]
    fn no_finals_means_empty_language() {
        let c = sys(&[(0, "|", &[(0, "|")])], 1, &[]);
        let (lang, _) = buchi_language(&c).unwrap();
        for k in 0..6 {
            assert!(!lang.contains(0, &stack(k).chars().collect::<Vec<_>>()).unwrap());
        }
    }

    #[test]
    fn stationary_loop_is_accepted_on_nonempty_stacks() {
        let c = sys(&[(0, "|", &[(0, "|")])], 1, &[0]);
        let (lang, _) = buchi_language(&c).unwrap();
        assert!(!lang.contains(0, &[]).unwrap());
        for k in 1..8 {
            assert!(lang.contains(0, &stack(k).chars().collect::<Vec<_>>()).unwrap());
        }
    }

    #[test]
    fn popping_loop_bottoms_out() {
        let c = sys(&[(0, "|", &[(0, "")])], 1, &[0]);
        let (lang, stats) = buchi_language(&c).unwrap();
        assert!(stats.outer_iterations >= 1);
        for k in 0..8 {
            assert!(!lang.contains(0, &stack(k).chars().collect::<Vec<_>>()).unwrap());
        }
    }

    #[test]
    fn universal_branching_needs_every_branch() {
        // p0 splits into a looping final branch and a dead branch
        let c = sys(&[(0, "|", &[(0, "|"), (1, "|")]), (2, "|", &[(2, "|")])], 3, &[0, 2]);
        let (lang, _) = buchi_language(&c).unwrap();
        assert!(!lang.contains(0, &['|']).unwrap());
        assert!(lang.contains(2, &['|']).unwrap());
    }
}

#[cfg(test)]
mod oracle_agreement {
    use super::*;
    use crate::oracle::sandwich;
    use crate::pushdown::Config;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(rng: &mut ChaCha8Rng) -> Cabpds {
        let n = rng.gen_range(1..=4);
        let gamma: Vec<char> = if rng.gen_bool(0.5) { vec!['|'] } else { vec!['a', 'b'] };
        let mut c = Cabpds::new((0..n).map(|i| format!("p{i}")).collect(), &gamma, 1);
        for p in 0..n {
            c.finals[p] = rng.gen_bool(0.5);
        }
        for _ in 0..rng.gen_range(1..=8) {
            let bottom = rng.gen_bool(0.2);
            let read = if bottom { BOTTOM } else { gamma[rng.gen_range(0..gamma.len())] };
            let targets = (0..rng.gen_range(1..=2))
                .map(|_| {
                    let mut w: Vec<char> = (0..rng.gen_range(0..=2)).map(|_| gamma[rng.gen_range(0..gamma.len())]).collect();
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

    fn words(gamma: &[char], max: usize) -> Vec<Vec<char>> {
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..max {
            let mut next = Vec::new();
            for w in &layer {
                for &g in gamma {
                    let mut v: Vec<char> = w.clone();
                    v.push(g);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn agrees_with_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let (mut decided, mut total) = (0, 0);
        for _ in 0..60 {
            let c = random_system(&mut rng);
            let (lang, _) = buchi_language(&c).unwrap();
            for p in 0..c.controls.len() {
                for w in words(&c.gamma, 4) {
                    total += 1;
                    let cfg = Config { control: p, stack: w.clone() };
                    let v = sandwich(&c, &cfg, 12).unwrap();
                    if let Some(expected) = v.decided() {
                        decided += 1;
                        assert_eq!(lang.contains(p, &w).unwrap(), expected, "{}\n{:?} {v:?}", c.dump(), cfg);
                    }
                }
            }
        }
        assert!(decided * 10 >= total * 8, "{decided}/{total}");
    }
}
