//! Bounded-stack games used as ground truth.
//!
//! The run-builder picks a rule, the adversary picks one of its targets.
//! Stacks are cut off at a height bound `H`; moves beyond it are settled
//! by an overflow policy. Losing on overflow under-approximates the real
//! verdict and winning on overflow over-approximates it, so whenever the
//! two agree the answer is exact.

use std::collections::{BTreeSet, HashMap};

use crate::ctl::{Ctl, Labelling};
use crate::model::{fundable, Coalition, Endowment, RalFormula, Rbm};
use crate::pushdown::{Cabpds, Config, RunTree};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overflow {
    Loses,
    Wins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    True { bound: usize },
    False { bound: usize },
    Unknown,
}

impl Verdict {
    pub fn decided(&self) -> Option<bool> {
        match self {
            Verdict::True { .. } => Some(true),
            Verdict::False { .. } => Some(false),
            Verdict::Unknown => None,
        }
    }
}

/// A finite game graph. `moves[v]` lists the builder's options at `v`;
/// each option is the list of adversary choices, where `None` stands for
/// an overflow.
#[derive(Debug, Default)]
pub struct Game {
    pub accepting: Vec<bool>,
    pub moves: Vec<Vec<Vec<Option<usize>>>>,
}

impl Game {
    /// Builder-winning positions of the Büchi game: visit accepting
    /// positions infinitely often, never get stuck.
    pub fn solve_buchi(&self, overflow: Overflow) -> Vec<bool> {
        let n = self.accepting.len();
        let ok = |target: Option<usize>, set: &[bool]| match target {
            Some(t) => set[t],
            None => overflow == Overflow::Wins,
        };
        let cpre = |v: usize, set: &[bool]| self.moves[v].iter().any(|m| m.iter().all(|&t| ok(t, set)));
        let mut z = vec![true; n];
        loop {
            let mut x = vec![false; n];
            loop {
                let mut changed = false;
                for v in 0..n {
                    if !x[v] && ((self.accepting[v] && cpre(v, &z)) || cpre(v, &x)) {
                        x[v] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            if x == z {
                return z;
            }
            z = x;
        }
    }

    /// Builder-winning positions of the reachability game towards `goal`.
    pub fn solve_reach(&self, goal: &[bool], overflow: Overflow) -> Vec<bool> {
        let n = self.accepting.len();
        let mut x = goal.to_vec();
        loop {
            let mut changed = false;
            for v in 0..n {
                if !x[v]
                    && self.moves[v].iter().any(|m| {
                        m.iter().all(|&t| match t {
                            Some(t) => x[t],
                            None => overflow == Overflow::Wins,
                        })
                    })
                {
                    x[v] = true;
                    changed = true;
                }
            }
            if !changed {
                return x;
            }
        }
    }
}

/// The configuration graph reachable from `start` with stacks of height at
/// most `bound`.
pub fn explore(system: &Cabpds, start: &[Config], bound: usize) -> (Game, HashMap<Config, usize>) {
    let mut index: HashMap<Config, usize> = HashMap::new();
    let mut order: Vec<Config> = Vec::new();
    for c in start {
        if !index.contains_key(c) {
            index.insert(c.clone(), order.len());
            order.push(c.clone());
        }
    }
    let mut game = Game::default();
    let mut i = 0;
    while i < order.len() {
        let cfg = order[i].clone();
        let mut options = Vec::new();
        for set in system.successors(&cfg) {
            let mut targets = Vec::with_capacity(set.len());
            for succ in set {
                if succ.stack.len() > bound {
                    targets.push(None);
                    continue;
                }
                let id = *index.entry(succ.clone()).or_insert_with(|| {
                    order.push(succ);
                    order.len() - 1
                });
                targets.push(Some(id));
            }
            options.push(targets);
        }
        game.accepting.push(system.finals[cfg.control]);
        game.moves.push(options);
        i += 1;
    }
    (game, index)
}

/// Büchi acceptance of `cfg` in the game cut off at height `bound`.
pub fn bounded_buchi(system: &Cabpds, cfg: &Config, bound: usize, overflow: Overflow) -> Result<bool> {
    if cfg.stack.len() > bound {
        return Err(Error::Usage(format!(
            "configuration height {} exceeds the bound {bound}",
            cfg.stack.len()
        )));
    }
    let (game, index) = explore(system, std::slice::from_ref(cfg), bound);
    Ok(game.solve_buchi(overflow)[index[cfg]])
}

/// Initial bound for a sweep from `cfg`.
pub fn first_bound(system: &Cabpds, cfg: &Config) -> usize {
    cfg.stack.len() + system.max_push() + 1
}

// never start above the budget while the start itself still fits
fn clamp_first(first: usize, floor: usize, max: usize) -> usize {
    first.min(max).max(floor)
}

/// Runs both policies at growing bounds until they agree.
pub fn sandwich(system: &Cabpds, cfg: &Config, max_bound: usize) -> Result<Verdict> {
    let first = clamp_first(first_bound(system, cfg), cfg.stack.len(), max_bound);
    sweep(first, max_bound, |h| {
        Ok((
            bounded_buchi(system, cfg, h, Overflow::Loses)?,
            bounded_buchi(system, cfg, h, Overflow::Wins)?,
        ))
    })
}

/// Doubles the bound from `first` up to `max`, evaluating `(under, over)`.
pub fn sweep(first: usize, max: usize, mut eval: impl FnMut(usize) -> Result<(bool, bool)>) -> Result<Verdict> {
    let mut h = first.max(1);
    loop {
        let bound = h.min(max);
        if bound < first {
            return Ok(Verdict::Unknown);
        }
        let (under, over) = eval(bound)?;
        if under {
            return Ok(Verdict::True { bound });
        }
        if !over {
            return Ok(Verdict::False { bound });
        }
        if bound >= max {
            return Ok(Verdict::Unknown);
        }
        h *= 2;
    }
}

fn ex(game: &Game, v: usize, set: &[bool], overflow: bool) -> bool {
    game.moves[v]
        .iter()
        .any(|m| m.iter().all(|t| t.map_or(overflow, |t| set[t])))
}

fn ax(game: &Game, v: usize, set: &[bool], overflow: bool) -> bool {
    !game.moves[v].is_empty()
        && game.moves[v]
            .iter()
            .all(|m| m.iter().all(|t| t.map_or(overflow, |t| set[t])))
}

fn fixpoint(n: usize, greatest: bool, step: impl Fn(&[bool], usize) -> bool) -> Vec<bool> {
    let mut z = vec![greatest; n];
    loop {
        let next: Vec<bool> = (0..n).map(|v| step(&z, v)).collect();
        if next == z {
            return z;
        }
        z = next;
    }
}

/// Lower and upper approximations of the CTL semantics over a bounded game.
/// Dead configurations satisfy no next-time formula.
fn eval_ctl(game: &Game, order: &[Config], lab: &Labelling, f: &Ctl) -> Result<(Vec<bool>, Vec<bool>)> {
    let n = order.len();
    let both = |lo: &[bool], hi: &[bool], op: &dyn Fn(&[bool], bool) -> Vec<bool>| (op(lo, false), op(hi, true));
    Ok(match f {
        Ctl::True => (vec![true; n], vec![true; n]),
        Ctl::False => (vec![false; n], vec![false; n]),
        Ctl::Prop(p) => {
            let set = lab.get(p).ok_or_else(|| Error::UnknownProposition(p.clone()))?;
            let v = order
                .iter()
                .map(|c| set.contains(c.control, &c.stack))
                .collect::<Result<Vec<bool>>>()?;
            (v.clone(), v)
        }
        Ctl::Not(g) => {
            let (lo, hi) = eval_ctl(game, order, lab, g)?;
            (hi.iter().map(|b| !b).collect(), lo.iter().map(|b| !b).collect())
        }
        Ctl::And(a, b) | Ctl::Or(a, b) => {
            let (al, ah) = eval_ctl(game, order, lab, a)?;
            let (bl, bh) = eval_ctl(game, order, lab, b)?;
            let and = matches!(f, Ctl::And(..));
            let zip = |x: &[bool], y: &[bool]| -> Vec<bool> {
                x.iter().zip(y).map(|(p, q)| if and { *p && *q } else { *p || *q }).collect()
            };
            (zip(&al, &bl), zip(&ah, &bh))
        }
        Ctl::EX(a) | Ctl::AX(a) => {
            let (lo, hi) = eval_ctl(game, order, lab, a)?;
            let exists = matches!(f, Ctl::EX(_));
            both(&lo, &hi, &|set, o| {
                (0..n)
                    .map(|v| if exists { ex(game, v, set, o) } else { ax(game, v, set, o) })
                    .collect()
            })
        }
        Ctl::EU(a, b) | Ctl::AU(a, b) | Ctl::ER(a, b) | Ctl::AR(a, b) => {
            let (al, ah) = eval_ctl(game, order, lab, a)?;
            let (bl, bh) = eval_ctl(game, order, lab, b)?;
            let exists = matches!(f, Ctl::EU(..) | Ctl::ER(..));
            let until = matches!(f, Ctl::EU(..) | Ctl::AU(..));
            let solve = |a: &[bool], b: &[bool], o: bool| {
                fixpoint(n, !until, |z, v| {
                    let next = if exists { ex(game, v, z, o) } else { ax(game, v, z, o) };
                    if until {
                        b[v] || (a[v] && next)
                    } else {
                        b[v] && (a[v] || next)
                    }
                })
            };
            (solve(&al, &bl, false), solve(&ah, &bh, true))
        }
    })
}

/// `(under, over)` verdicts of `f` at `cfg` with stacks cut at `bound`.
pub fn bounded_ctl(system: &Cabpds, lab: &Labelling, f: &Ctl, cfg: &Config, bound: usize) -> Result<(bool, bool)> {
    if cfg.stack.len() > bound {
        return Err(Error::Usage(format!(
            "configuration height {} exceeds the bound {bound}",
            cfg.stack.len()
        )));
    }
    let (game, index) = explore(system, std::slice::from_ref(cfg), bound);
    let mut order = vec![Config::new(0, ""); index.len()];
    for (c, &i) in &index {
        order[i] = c.clone();
    }
    let (lo, hi) = eval_ctl(&game, &order, lab, f)?;
    Ok((lo[0], hi[0]))
}

pub fn ctl_sandwich(system: &Cabpds, lab: &Labelling, f: &Ctl, cfg: &Config, max_bound: usize) -> Result<Verdict> {
    let first = clamp_first(first_bound(system, cfg), cfg.stack.len(), max_bound);
    sweep(first, max_bound, |h| bounded_ctl(system, lab, f, cfg, h))
}

/// The coalition's game on `(state, endowment)` pairs with endowments up to
/// `bound`, straight from the model: position `q * (bound + 1) + eta`.
pub fn ral_game(m: &Rbm, coalition: &Coalition, bound: u64) -> Game {
    let width = bound as usize + 1;
    let opponents = coalition.opponents(m);
    let mut game = Game::default();
    for q in 0..m.states.len() {
        let opp = m.profiles(q, opponents.agents());
        let own = m.profiles(q, coalition.agents());
        for eta in 0..=bound {
            let mut options = Vec::new();
            for a in own.iter().filter(|a| fundable(m, coalition, q, Endowment(eta), a)) {
                let mut targets: Vec<Option<usize>> = opp
                    .iter()
                    .map(|o| {
                        let full = m.merge(coalition, a, o);
                        let next = m.successor(q, &full).expect("validated model");
                        let e = eta - m.cons(&full) + m.prod(&full);
                        (e <= bound).then(|| next * width + e as usize)
                    })
                    .collect();
                targets.sort();
                targets.dedup();
                options.push(targets);
            }
            game.accepting.push(false);
            game.moves.push(options);
        }
    }
    game
}

fn eval_ral(m: &Rbm, f: &RalFormula, bound: u64) -> Result<(Vec<bool>, Vec<bool>)> {
    let width = bound as usize + 1;
    let n = m.states.len() * width;
    let coalition_game = |names: &[String]| -> Result<Game> {
        Ok(ral_game(m, &Coalition::resolve(m, names)?, bound))
    };
    Ok(match f {
        RalFormula::True => (vec![true; n], vec![true; n]),
        RalFormula::False => (vec![false; n], vec![false; n]),
        RalFormula::Prop(p) => {
            let prop = m.prop(p).ok_or_else(|| Error::UnknownProposition(p.clone()))?;
            let v: Vec<bool> = (0..n).map(|i| prop.holds(i / width, (i % width) as u64)).collect();
            (v.clone(), v)
        }
        RalFormula::Not(g) => {
            let (lo, hi) = eval_ral(m, g, bound)?;
            (hi.iter().map(|b| !b).collect(), lo.iter().map(|b| !b).collect())
        }
        RalFormula::And(a, b) | RalFormula::Or(a, b) => {
            let (al, ah) = eval_ral(m, a, bound)?;
            let (bl, bh) = eval_ral(m, b, bound)?;
            let and = matches!(f, RalFormula::And(..));
            let zip = |x: &[bool], y: &[bool]| -> Vec<bool> {
                x.iter().zip(y).map(|(p, q)| if and { *p && *q } else { *p || *q }).collect()
            };
            (zip(&al, &bl), zip(&ah, &bh))
        }
        RalFormula::Next(names, g) => {
            let game = coalition_game(names)?;
            let (lo, hi) = eval_ral(m, g, bound)?;
            (
                (0..n).map(|v| ex(&game, v, &lo, false)).collect(),
                (0..n).map(|v| ex(&game, v, &hi, true)).collect(),
            )
        }
        RalFormula::Until(names, a, b) => {
            let game = coalition_game(names)?;
            let (al, ah) = eval_ral(m, a, bound)?;
            let (bl, bh) = eval_ral(m, b, bound)?;
            let solve = |a: &[bool], b: &[bool], o: bool| fixpoint(n, false, |z, v| b[v] || (a[v] && ex(&game, v, z, o)));
            (solve(&al, &bl, false), solve(&ah, &bh, true))
        }
        RalFormula::Always(names, g) => {
            let game = coalition_game(names)?;
            let (lo, hi) = eval_ral(m, g, bound)?;
            let solve = |a: &[bool], o: bool| fixpoint(n, true, |z, v| a[v] && ex(&game, v, z, o));
            (solve(&lo, false), solve(&hi, true))
        }
    })
}

/// `(under, over)` verdicts of a RAL formula at `(q, eta)` with endowments
/// cut at `bound`. A play must stay alive forever; overflowing the bound
/// loses in the first component and wins in the second.
pub fn bounded_ral(m: &Rbm, f: &RalFormula, q: usize, eta: Endowment, bound: u64) -> Result<(bool, bool)> {
    if eta.0 > bound {
        return Err(Error::Usage(format!("endowment {} exceeds the bound {bound}", eta.0)));
    }
    m.validate()?;
    let (lo, hi) = eval_ral(m, f, bound)?;
    let i = q * (bound as usize + 1) + eta.0 as usize;
    Ok((lo[i], hi[i]))
}

/// Sandwich over endowment bounds, starting just above `eta`.
pub fn ral_sandwich(m: &Rbm, f: &RalFormula, q: usize, eta: Endowment, max_bound: u64) -> Result<Verdict> {
    let max_prod = m.actions.iter().map(|a| a.prod()).max().unwrap_or(0) * m.agents.len() as u64;
    let first = clamp_first((eta.0 + max_prod + 1) as usize, eta.0 as usize, max_bound as usize);
    sweep(first, max_bound as usize, |h| bounded_ral(m, f, q, eta, h as u64))
}

/// The direct oracle for a flat cooperation formula.
pub fn bounded_ral_flat(m: &Rbm, f: &RalFormula, q: usize, eta: Endowment, max_bound: u64) -> Result<Verdict> {
    let flat = match f {
        RalFormula::Next(_, g) | RalFormula::Always(_, g) => g.is_propositional(),
        RalFormula::Until(_, a, b) => a.is_propositional() && b.is_propositional(),
        _ => false,
    };
    if !flat {
        return Err(Error::Usage(format!("`{f}` is not a flat cooperation formula")));
    }
    ral_sandwich(m, f, q, eta, max_bound)
}

/// A depth-bounded prefix of an outcome tree: a node and the distinct
/// successor nodes fixed by one coalition choice.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OutcomeTree {
    pub state: usize,
    pub eta: u64,
    pub children: Vec<OutcomeTree>,
}

impl OutcomeTree {
    /// Reads a run tree of the encoded game as an outcome tree, taking the
    /// stack height as the endowment.
    pub fn from_run(t: &RunTree) -> OutcomeTree {
        let mut children: Vec<OutcomeTree> = t.children.iter().map(OutcomeTree::from_run).collect();
        children.sort();
        children.dedup();
        OutcomeTree {
            state: t.cfg.control,
            eta: t.cfg.stack.len() as u64,
            children,
        }
    }
}

/// Every depth-`depth` outcome-tree prefix the coalition can enforce from
/// `(q, eta)`, one per strategy prefix. Histories that reach the same pair
/// at the same depth share their choice, as they are the same history up to
/// the branch point.
pub fn outcome_trees(m: &Rbm, coalition: &Coalition, q: usize, eta: Endowment, depth: usize) -> BTreeSet<OutcomeTree> {
    let mut out = BTreeSet::new();
    let leaf = OutcomeTree {
        state: q,
        eta: eta.0,
        children: Vec::new(),
    };
    let own: Vec<_> = if depth == 0 {
        Vec::new()
    } else {
        m.profiles(q, coalition.agents())
            .into_iter()
            .filter(|a| fundable(m, coalition, q, eta, a))
            .collect()
    };
    if own.is_empty() {
        out.insert(leaf);
        return out;
    }
    let opp = m.profiles(q, coalition.opponents(m).agents());
    for a in own {
        let mut succ: Vec<(usize, u64)> = opp
            .iter()
            .map(|o| {
                let full = m.merge(coalition, &a, o);
                (m.successor(q, &full).expect("validated model"), eta.0 - m.cons(&full) + m.prod(&full))
            })
            .collect();
        succ.sort();
        succ.dedup();
        let mut partial: Vec<Vec<OutcomeTree>> = vec![Vec::new()];
        for (s, e) in succ {
            let options = outcome_trees(m, coalition, s, Endowment(e), depth - 1);
            partial = partial
                .iter()
                .flat_map(|p| {
                    options.iter().map(move |o| {
                        let mut v = p.clone();
                        v.push(o.clone());
                        v
                    })
                })
                .collect();
        }
        for mut children in partial {
            children.sort();
            children.dedup();
            out.insert(OutcomeTree {
                state: q,
                eta: eta.0,
                children,
            });
        }
    }
    out
}
