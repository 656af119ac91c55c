//! Alternating word automata over stack alphabets.
//!
//! Words are read top of stack first; the bottom marker `#` comes last.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::model::{Atom, EndowmentPredicate};
use crate::{Error, Result, BOTTOM, TOKEN};

/// An alternating automaton. A triple `(s, x, T)` lets `s` read `x` and
/// continue from every state of `T` at once; distinct triples for the
/// same `(s, x)` are alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ama {
    pub name: String,
    pub labels: Vec<String>,
    pub alphabet: Vec<char>,
    pub init: BTreeSet<usize>,
    pub finals: Vec<bool>,
    delta: BTreeMap<(usize, char), Vec<Vec<usize>>>,
}

impl Ama {
    pub fn new(name: &str, alphabet: &[char]) -> Self {
        let mut alphabet = alphabet.to_vec();
        alphabet.sort_unstable();
        alphabet.dedup();
        Ama {
            name: name.to_string(),
            labels: Vec::new(),
            alphabet,
            init: BTreeSet::new(),
            finals: Vec::new(),
            delta: BTreeMap::new(),
        }
    }

    pub fn add_state(&mut self, label: impl Into<String>) -> usize {
        self.labels.push(label.into());
        self.finals.push(false);
        self.labels.len() - 1
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.values().map(Vec::len).sum()
    }

    pub fn transitions(&self, s: usize, x: char) -> &[Vec<usize>] {
        self.delta.get(&(s, x)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn triples(&self) -> impl Iterator<Item = (usize, char, &Vec<usize>)> {
        self.delta
            .iter()
            .flat_map(|(&(s, x), ts)| ts.iter().map(move |t| (s, x, t)))
    }

    /// Adds `(s, x, targets)` unless an existing triple with a subset of
    /// the targets already covers it. Returns whether the language may
    /// have grown.
    pub fn add_transition(&mut self, s: usize, x: char, targets: &[usize]) -> bool {
        let mut t = targets.to_vec();
        t.sort_unstable();
        t.dedup();
        let entry = self.delta.entry((s, x)).or_default();
        if entry.iter().any(|e| is_subset(e, &t)) {
            return false;
        }
        entry.retain(|e| !is_subset(&t, e));
        entry.push(t);
        true
    }

    pub fn check_symbol(&self, x: char) -> Result<()> {
        if self.alphabet.contains(&x) {
            Ok(())
        } else {
            Err(Error::Alphabet {
                symbol: x,
                context: format!("automaton {}", self.name),
            })
        }
    }

    /// For every state, whether it accepts `w` (ignoring `init`).
    pub fn accepting(&self, w: &[char]) -> Result<Vec<bool>> {
        for &x in w {
            self.check_symbol(x)?;
        }
        let mut val = self.finals.clone();
        for &x in w.iter().rev() {
            val = (0..self.num_states())
                .map(|s| self.transitions(s, x).iter().any(|t| t.iter().all(|&u| val[u])))
                .collect();
        }
        Ok(val)
    }

    /// Membership of `(s, w)`: `s` must be initial and have an accepting
    /// run tree on `w`.
    pub fn member(&self, s: usize, w: &[char]) -> Result<bool> {
        if s >= self.num_states() {
            return Err(Error::Usage(format!("no state {s} in automaton {}", self.name)));
        }
        if !self.init.contains(&s) {
            return Ok(false);
        }
        Ok(self.accepting(w)?[s])
    }

    /// Dualizes every transition formula and complements the final states.
    pub fn complement(&self) -> Ama {
        let mut out = Ama {
            name: format!("not_{}", self.name),
            labels: self.labels.clone(),
            alphabet: self.alphabet.clone(),
            init: self.init.clone(),
            finals: self.finals.iter().map(|f| !f).collect(),
            delta: BTreeMap::new(),
        };
        for s in 0..self.num_states() {
            for &x in &self.alphabet {
                for clause in dualize(self.transitions(s, x)) {
                    out.add_transition(s, x, &clause);
                }
            }
        }
        out
    }

    /// Restricts the automaton to the states reachable from `init`.
    pub fn trim(&self) -> Ama {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<usize> = self.init.iter().copied().collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &x in &self.alphabet {
                for t in self.transitions(s, x) {
                    for &u in t {
                        if !seen[u] {
                            seen[u] = true;
                            stack.push(u);
                        }
                    }
                }
            }
        }
        let mut map = vec![usize::MAX; self.num_states()];
        let mut out = Ama::new(&self.name, &self.alphabet);
        for s in 0..self.num_states() {
            if seen[s] {
                map[s] = out.add_state(self.labels[s].clone());
                out.finals[map[s]] = self.finals[s];
            }
        }
        out.init = self.init.iter().map(|&s| map[s]).collect();
        for (s, x, t) in self.triples() {
            if seen[s] {
                let t: Vec<usize> = t.iter().map(|&u| map[u]).collect();
                out.add_transition(map[s], x, &t);
            }
        }
        out
    }

    /// Text dump: `ama`, `states`, `init`, `final` headers and one line per
    /// triple.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let name = |s: usize| self.labels[s].clone();
        let _ = writeln!(out, "ama {}", self.name);
        let _ = writeln!(out, "alphabet {}", self.alphabet.iter().collect::<String>());
        let _ = writeln!(out, "states {}", self.labels.join(" "));
        let _ = writeln!(out, "init {}", self.init.iter().map(|&s| name(s)).collect::<Vec<_>>().join(" "));
        let finals: Vec<String> = (0..self.num_states()).filter(|&s| self.finals[s]).map(name).collect();
        let _ = writeln!(out, "final {}", finals.join(" "));
        for (s, x, t) in self.triples() {
            let t: Vec<String> = t.iter().map(|&u| name(u)).collect();
            let _ = writeln!(out, "{} -{}-> {{{}}}", name(s), x, t.join(","));
        }
        out
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    // both sorted
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// Turns a disjunction of conjunctions into the DNF of its dual.
fn dualize(dnf: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for clause in dnf {
        let mut next: Vec<Vec<usize>> = Vec::new();
        for partial in &acc {
            for &lit in clause {
                let mut c = partial.clone();
                if let Err(i) = c.binary_search(&lit) {
                    c.insert(i, lit);
                }
                next.push(c);
            }
        }
        next.sort();
        next.dedup();
        let minimal: Vec<Vec<usize>> = next
            .iter()
            .filter(|c| !next.iter().any(|d| d != *c && is_subset(d, c)))
            .cloned()
            .collect();
        acc = minimal;
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// Parses the text produced by [`Ama::dump`].
pub fn parse_ama(text: &str) -> Result<Ama> {
    let err = |line: usize, msg: &str| Error::syntax("ama", line, 1, msg);
    let mut ama: Option<Ama> = None;
    let mut names: HashMap<String, usize> = HashMap::new();
    let mut name = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(' ').unwrap_or((line, ""));
        match kw {
            "ama" => name = rest.to_string(),
            "alphabet" => ama = Some(Ama::new(&name, &rest.chars().collect::<Vec<_>>())),
            "states" => {
                let a = ama.as_mut().ok_or_else(|| err(i + 1, "`alphabet` must come first"))?;
                for s in rest.split_whitespace() {
                    names.insert(s.to_string(), a.add_state(s));
                }
            }
            "init" | "final" => {
                let a = ama.as_mut().ok_or_else(|| err(i + 1, "`alphabet` must come first"))?;
                for s in rest.split_whitespace() {
                    let id = *names.get(s).ok_or_else(|| err(i + 1, "unknown state"))?;
                    if kw == "init" {
                        a.init.insert(id);
                    } else {
                        a.finals[id] = true;
                    }
                }
            }
            _ => {
                let a = ama.as_mut().ok_or_else(|| err(i + 1, "`alphabet` must come first"))?;
                let bad = || err(i + 1, "malformed transition");
                let (x, targets) = rest.split_once("-> ").ok_or_else(bad)?;
                let x = x.strip_prefix('-').ok_or_else(bad)?;
                let mut xs = x.chars();
                let sym = xs.next().ok_or_else(bad)?;
                if xs.next().is_some() {
                    return Err(bad());
                }
                let targets = targets.trim().strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(bad)?;
                let src = *names.get(kw).ok_or_else(|| err(i + 1, "unknown state"))?;
                let mut t = Vec::new();
                for n in targets.split(',').filter(|n| !n.is_empty()) {
                    t.push(*names.get(n).ok_or_else(|| err(i + 1, "unknown state"))?);
                }
                a.check_symbol(sym)?;
                a.add_transition(src, sym, &t);
            }
        }
    }
    ama.ok_or_else(|| err(1, "empty automaton"))
}

/// A regular set of configurations: states `0..controls` of the automaton
/// stand for the pushdown control states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigSet {
    pub ama: Ama,
    pub controls: usize,
}

impl ConfigSet {
    /// Automaton with one initial state per control and nothing accepted.
    pub fn empty(name: &str, control_names: &[String], gamma: &[char]) -> Self {
        let mut alphabet = gamma.to_vec();
        alphabet.push(BOTTOM);
        let mut ama = Ama::new(name, &alphabet);
        for n in control_names {
            let s = ama.add_state(n.clone());
            ama.init.insert(s);
        }
        ConfigSet {
            ama,
            controls: control_names.len(),
        }
    }

    /// Every configuration of every control.
    pub fn universal(name: &str, control_names: &[String], gamma: &[char]) -> Self {
        let mut cs = ConfigSet::empty(name, control_names, gamma);
        let done = cs.ama.add_state("done");
        cs.ama.finals[done] = true;
        for p in 0..cs.controls {
            for &g in gamma {
                cs.ama.add_transition(p, g, &[p]);
            }
            cs.ama.add_transition(p, BOTTOM, &[done]);
        }
        cs
    }

    /// Whether `(control, stack #)` is in the set; `stack` is top-first
    /// without the bottom marker.
    pub fn contains(&self, control: usize, stack: &[char]) -> Result<bool> {
        let mut w = stack.to_vec();
        w.push(BOTTOM);
        self.ama.member(control, &w)
    }

    pub fn complement(&self) -> ConfigSet {
        ConfigSet {
            ama: self.ama.complement(),
            controls: self.controls,
        }
    }

    /// For the unary alphabet `{|, #}`: rebuilds the set as one
    /// deterministic lasso per control. The result is usually far smaller
    /// than a saturated automaton and complements cheaply.
    pub fn normalize_unary(&self) -> Result<ConfigSet> {
        let a = &self.ama;
        if a.alphabet.iter().any(|&x| x != TOKEN && x != BOTTOM) {
            return Err(Error::Alphabet {
                symbol: *a.alphabet.iter().find(|&&x| x != TOKEN && x != BOTTOM).unwrap_or(&'?'),
                context: "a unary configuration set".into(),
            });
        }
        // acc[n] = states accepting |^n #
        let mut acc: Vec<Vec<bool>> = vec![a.accepting(&[BOTTOM])?];
        let mut seen: HashMap<Vec<bool>, usize> = HashMap::new();
        seen.insert(acc[0].clone(), 0);
        let loop_start = loop {
            let prev = acc.last().unwrap();
            let next: Vec<bool> = (0..a.num_states())
                .map(|s| a.transitions(s, TOKEN).iter().any(|t| t.iter().all(|&u| prev[u])))
                .collect();
            if let Some(&k) = seen.get(&next) {
                break k;
            }
            seen.insert(next.clone(), acc.len());
            acc.push(next);
        };
        let len = acc.len();
        let control_names: Vec<String> = a.labels[..self.controls].to_vec();
        let mut out = ConfigSet::empty(&a.name, &control_names, &[TOKEN]);
        let done = out.ama.add_state("done");
        out.ama.finals[done] = true;
        for p in 0..self.controls {
            let chain: Vec<usize> = (1..len).map(|i| out.ama.add_state(format!("{}_{i}", control_names[p]))).collect();
            let node = |i: usize| if i == 0 { p } else { chain[i - 1] };
            for i in 0..len {
                let succ = if i + 1 < len { i + 1 } else { loop_start };
                out.ama.add_transition(node(i), TOKEN, &[node(succ)]);
                if acc[i][p] {
                    out.ama.add_transition(node(i), BOTTOM, &[done]);
                }
            }
        }
        Ok(out)
    }
}

/// Compiles proposition atoms into a unary configuration set over the
/// model's control states.
pub fn compile_predicate(name: &str, state_names: &[String], atoms: &[Atom]) -> ConfigSet {
    let mut cs = ConfigSet::empty(name, state_names, &[TOKEN]);
    let done = cs.ama.add_state("done");
    cs.ama.finals[done] = true;
    for (k, atom) in atoms.iter().enumerate() {
        let a = &mut cs.ama;
        let fresh = |a: &mut Ama, i: usize| a.add_state(format!("{}_{k}_{i}", state_names[atom.state]));
        let mut chain: Vec<usize> = Vec::new();
        match atom.predicate {
            EndowmentPredicate::Any => {
                chain.push(fresh(a, 0));
                a.add_transition(chain[0], TOKEN, &[chain[0]]);
                a.add_transition(chain[0], BOTTOM, &[done]);
            }
            EndowmentPredicate::Eq(n) | EndowmentPredicate::AtLeast(n) => {
                chain = (0..=n as usize).map(|i| fresh(a, i)).collect();
                for i in 0..n as usize {
                    a.add_transition(chain[i], TOKEN, &[chain[i + 1]]);
                }
                let last = chain[n as usize];
                a.add_transition(last, BOTTOM, &[done]);
                if matches!(atom.predicate, EndowmentPredicate::AtLeast(_)) {
                    a.add_transition(last, TOKEN, &[last]);
                }
            }
            EndowmentPredicate::Below(n) => {
                chain = (0..n.max(1) as usize).map(|i| fresh(a, i)).collect();
                for i in 0..n as usize {
                    a.add_transition(chain[i], BOTTOM, &[done]);
                    if i + 1 < n as usize {
                        a.add_transition(chain[i], TOKEN, &[chain[i + 1]]);
                    }
                }
            }
            EndowmentPredicate::Modulo { modulus, residue } => {
                chain = (0..modulus as usize).map(|i| fresh(a, i)).collect();
                for i in 0..modulus as usize {
                    a.add_transition(chain[i], TOKEN, &[chain[(i + 1) % modulus as usize]]);
                }
                a.add_transition(chain[residue as usize], BOTTOM, &[done]);
            }
        }
        // The control state copies the first state's moves.
        let first = chain[0];
        for x in [TOKEN, BOTTOM] {
            let moves: Vec<Vec<usize>> = cs.ama.transitions(first, x).to_vec();
            for t in moves {
                cs.ama.add_transition(atom.state, x, &t);
            }
        }
    }
    cs
}

/// Top-first stack word for an endowment, with the bottom marker.
pub fn unary_word(eta: u64) -> Vec<char> {
    let mut w = vec![TOKEN; eta as usize];
    w.push(BOTTOM);
    w
}
