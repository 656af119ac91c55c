//! Resource-bounded models, RAL formulas and resource accounting.

mod formula;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use crate::{Error, Result};

pub use formula::{parse_formula, RalFormula};
pub use parse::{parse_rbm, serialize_rbm};

/// Amount of the single shared resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Endowment(pub u64);

impl fmt::Display for Endowment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A unary predicate over endowments, as used in proposition atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EndowmentPredicate {
    Any,
    Eq(u64),
    AtLeast(u64),
    Below(u64),
    Modulo { modulus: u64, residue: u64 },
}

impl EndowmentPredicate {
    pub fn holds(&self, eta: u64) -> bool {
        match *self {
            EndowmentPredicate::Any => true,
            EndowmentPredicate::Eq(k) => eta == k,
            EndowmentPredicate::AtLeast(k) => eta >= k,
            EndowmentPredicate::Below(k) => eta < k,
            EndowmentPredicate::Modulo { modulus, residue } => eta % modulus == residue,
        }
    }
}

impl fmt::Display for EndowmentPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EndowmentPredicate::Any => write!(f, "any"),
            EndowmentPredicate::Eq(k) => write!(f, "eta=={k}"),
            EndowmentPredicate::AtLeast(k) => write!(f, "eta>={k}"),
            EndowmentPredicate::Below(k) => write!(f, "eta<{k}"),
            EndowmentPredicate::Modulo { modulus, residue } => write!(f, "eta%{modulus}=={residue}"),
        }
    }
}

/// One `(state, predicate)` disjunct of a proposition's valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub state: usize,
    pub predicate: EndowmentPredicate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proposition {
    pub name: String,
    pub atoms: Vec<Atom>,
}

impl Proposition {
    pub fn holds(&self, state: usize, eta: u64) -> bool {
        self.atoms
            .iter()
            .any(|a| a.state == state && a.predicate.holds(eta))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    /// Net resource effect: positive produces, negative consumes.
    pub effect: i64,
}

impl Action {
    pub fn cons(&self) -> u64 {
        (-self.effect).max(0) as u64
    }

    pub fn prod(&self) -> u64 {
        self.effect.max(0) as u64
    }
}

/// A resource-bounded model over one shared resource.
///
/// Fields are public for construction; [`Rbm::validate`] must succeed
/// before the model is handed to any checking routine. [`parse_rbm`]
/// always returns validated models.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rbm {
    pub name: String,
    pub agents: Vec<String>,
    pub states: Vec<String>,
    pub init: usize,
    pub actions: Vec<Action>,
    /// `avail[state][agent]` lists the action ids available there.
    pub avail: Vec<Vec<Vec<usize>>>,
    /// Total on `d(q)`: full profiles are indexed by agent order.
    pub trans: BTreeMap<(usize, Vec<usize>), usize>,
    pub props: Vec<Proposition>,
}

/// A set of agents, kept sorted by agent index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition(Vec<usize>);

impl Coalition {
    pub fn new(mut agents: Vec<usize>) -> Self {
        agents.sort_unstable();
        agents.dedup();
        Coalition(agents)
    }

    pub fn all(m: &Rbm) -> Self {
        Coalition((0..m.agents.len()).collect())
    }

    pub fn agents(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.0.binary_search(&agent).is_ok()
    }

    pub fn opponents(&self, m: &Rbm) -> Coalition {
        Coalition((0..m.agents.len()).filter(|a| !self.contains(*a)).collect())
    }

    pub fn resolve(m: &Rbm, names: &[String]) -> Result<Self> {
        let ids = names
            .iter()
            .map(|n| m.agent_index(n).ok_or_else(|| Error::UnknownAgent(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Coalition::new(ids))
    }
}

/// Actions of the agents of some coalition, aligned with [`Coalition::agents`].
pub type ActionProfile = Vec<usize>;

impl Rbm {
    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn prop(&self, name: &str) -> Option<&Proposition> {
        self.props.iter().find(|p| p.name == name)
    }

    /// All action tuples for `agents` at `q` (the set `d_A(q)`), in
    /// lexicographic order of the avail lists.
    pub fn profiles(&self, q: usize, agents: &[usize]) -> Vec<ActionProfile> {
        let mut out = vec![Vec::with_capacity(agents.len())];
        for &a in agents {
            let mut next = Vec::with_capacity(out.len() * self.avail[q][a].len());
            for prefix in &out {
                for &act in &self.avail[q][a] {
                    let mut p = prefix.clone();
                    p.push(act);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    /// Combines a coalition profile and an opponent profile into a full profile.
    pub fn merge(&self, coalition: &Coalition, alpha_a: &[usize], alpha_opp: &[usize]) -> ActionProfile {
        let mut full = vec![0; self.agents.len()];
        let (mut i, mut j) = (0, 0);
        for (agent, slot) in full.iter_mut().enumerate() {
            if coalition.contains(agent) {
                *slot = alpha_a[i];
                i += 1;
            } else {
                *slot = alpha_opp[j];
                j += 1;
            }
        }
        full
    }

    pub fn successor(&self, q: usize, profile: &[usize]) -> Option<usize> {
        self.trans.get(&(q, profile.to_vec())).copied()
    }

    pub fn cons(&self, profile: &[usize]) -> u64 {
        profile.iter().map(|&a| self.actions[a].cons()).sum()
    }

    pub fn prod(&self, profile: &[usize]) -> u64 {
        profile.iter().map(|&a| self.actions[a].prod()).sum()
    }

    /// Checks every structural invariant of a model.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::Validation(msg));
        if self.agents.is_empty() {
            return invalid("no agents declared".into());
        }
        if self.states.is_empty() {
            return invalid("no states declared".into());
        }
        if self.init >= self.states.len() {
            return invalid("initial state out of range".into());
        }
        if self.avail.len() != self.states.len() {
            return invalid("avail table does not cover every state".into());
        }
        for (q, row) in self.avail.iter().enumerate() {
            if row.len() != self.agents.len() {
                return invalid(format!("avail table does not cover every agent at {}", self.states[q]));
            }
            for (a, acts) in row.iter().enumerate() {
                if acts.is_empty() {
                    return invalid(format!(
                        "empty avail set for agent {} at {}",
                        self.agents[a], self.states[q]
                    ));
                }
                if acts.iter().any(|&x| x >= self.actions.len()) {
                    return invalid(format!("unknown action in avail at {}", self.states[q]));
                }
            }
        }
        for q in 0..self.states.len() {
            let all: Vec<usize> = (0..self.agents.len()).collect();
            for profile in self.profiles(q, &all) {
                match self.successor(q, &profile) {
                    Some(t) if t < self.states.len() => {}
                    Some(_) => return invalid(format!("transition target out of range at {}", self.states[q])),
                    None => return invalid(format!("trans not total at {}", self.states[q])),
                }
            }
        }
        for ((q, profile), _) in &self.trans {
            let ok = *q < self.states.len()
                && profile.len() == self.agents.len()
                && profile
                    .iter()
                    .enumerate()
                    .all(|(a, act)| self.avail[*q][a].contains(act));
            if !ok {
                return invalid("transition defined for an unavailable profile".into());
            }
        }
        for p in &self.props {
            for atom in &p.atoms {
                if atom.state >= self.states.len() {
                    return invalid(format!("proposition {} refers to an unknown state", p.name));
                }
                if let EndowmentPredicate::Modulo { modulus, residue } = atom.predicate {
                    if modulus == 0 || residue >= modulus {
                        return invalid(format!("bad modulo predicate in proposition {}", p.name));
                    }
                }
            }
        }
        Ok(())
    }
}

/// True iff every agent has a zero-effect action in every state.
pub fn validate_irbm(m: &Rbm) -> bool {
    m.avail
        .iter()
        .all(|row| row.iter().all(|acts| acts.iter().any(|&a| m.actions[a].effect == 0)))
}

/// Worst-case consumption of the opponents of `coalition` at `q`.
pub fn delta_max(m: &Rbm, coalition: &Coalition, q: usize) -> u64 {
    // The sum decomposes per agent, so the max over opponent profiles is
    // the sum of per-agent maxima.
    coalition
        .opponents(m)
        .agents()
        .iter()
        .map(|&a| m.avail[q][a].iter().map(|&x| m.actions[x].cons()).max().unwrap_or(0))
        .sum()
}

/// Pessimistic consumption of `alpha_a`: its own cost plus [`delta_max`].
pub fn delta_con(m: &Rbm, coalition: &Coalition, q: usize, alpha_a: &[usize]) -> u64 {
    m.cons(alpha_a) + delta_max(m, coalition, q)
}

/// Tokens to hand back once the opponents' actual move `alpha_opp` is known.
pub fn delta_prd(m: &Rbm, coalition: &Coalition, q: usize, alpha_a: &[usize], alpha_opp: &[usize]) -> u64 {
    let full = m.merge(coalition, alpha_a, alpha_opp);
    delta_max(m, coalition, q) - m.cons(alpha_opp) + m.prod(&full)
}

/// Condition (iv): `alpha_a` can be executed at endowment `eta` whatever
/// the opponents do.
pub fn fundable(m: &Rbm, coalition: &Coalition, q: usize, eta: Endowment, alpha_a: &[usize]) -> bool {
    eta.0 >= delta_con(m, coalition, q, alpha_a)
}

/// One joint step. Returns `Ok(None)` when the endowment cannot cover the
/// profile's consumption.
pub fn step(m: &Rbm, q: usize, eta: Endowment, profile: &[usize]) -> Result<Option<(usize, Endowment)>> {
    let available = profile.len() == m.agents.len()
        && profile.iter().enumerate().all(|(a, act)| m.avail[q][a].contains(act));
    if !available {
        return Err(Error::Validation(format!("profile not available at {}", m.states[q])));
    }
    let cons = m.cons(profile);
    if eta.0 < cons {
        return Ok(None);
    }
    let next = m
        .successor(q, profile)
        .ok_or_else(|| Error::Validation(format!("trans not total at {}", m.states[q])))?;
    Ok(Some((next, Endowment(eta.0 - cons + m.prod(profile)))))
}
