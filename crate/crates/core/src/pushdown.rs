//! Compact alternating Büchi pushdown systems.
//!
//! Stacks are written top-first. The bottom marker `#` is implicit in
//! configurations: it may be read as the last symbol of a read word, in
//! which case every pushed word must end with it again.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::{Error, Result, BOTTOM};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub control: usize,
    /// Top-first; empty for an ε-read.
    pub read: Vec<char>,
    pub targets: Vec<(usize, Vec<char>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cabpds {
    pub controls: Vec<String>,
    /// Stack alphabet without the bottom marker.
    pub gamma: Vec<char>,
    pub r: usize,
    pub rules: Vec<Rule>,
    pub finals: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub control: usize,
    /// Top-first, without `#`.
    pub stack: Vec<char>,
}

impl Config {
    pub fn new(control: usize, stack: &str) -> Self {
        Config {
            control,
            stack: stack.chars().collect(),
        }
    }
}

/// A finite prefix of a run: children of a node form one successor set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunTree {
    pub cfg: Config,
    pub children: Vec<RunTree>,
}

fn show(w: &[char]) -> String {
    w.iter().collect()
}

impl Cabpds {
    pub fn new(controls: Vec<String>, gamma: &[char], r: usize) -> Self {
        let n = controls.len();
        Cabpds {
            controls,
            gamma: gamma.to_vec(),
            r: r.max(1),
            rules: Vec::new(),
            finals: vec![false; n],
        }
    }

    pub fn add_control(&mut self, name: impl Into<String>, is_final: bool) -> usize {
        self.controls.push(name.into());
        self.finals.push(is_final);
        self.controls.len() - 1
    }

    pub fn add_rule(&mut self, control: usize, read: &[char], targets: Vec<(usize, Vec<char>)>) {
        self.rules.push(Rule {
            control,
            read: read.to_vec(),
            targets,
        });
    }

    /// Plain ABPDS: width exactly one everywhere.
    pub fn is_plain(&self) -> bool {
        self.rules.iter().all(|r| r.read.len() == 1)
    }

    pub fn max_push(&self) -> usize {
        self.rules
            .iter()
            .flat_map(|r| r.targets.iter().map(|(_, w)| w.iter().filter(|&&x| x != BOTTOM).count()))
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Pushdown(msg));
        if self.finals.len() != self.controls.len() {
            return bad("finals do not cover every control".into());
        }
        if self.gamma.contains(&BOTTOM) {
            return bad("the bottom marker cannot be a stack symbol".into());
        }
        for rule in &self.rules {
            let name = self.controls.get(rule.control).cloned().unwrap_or_default();
            if rule.control >= self.controls.len() {
                return bad(format!("rule source {} out of range", rule.control));
            }
            if rule.read.len() > self.r {
                return bad(format!("rule at {name} reads {} symbols but r = {}", rule.read.len(), self.r));
            }
            if rule.targets.is_empty() {
                return bad(format!("rule at {name} has no targets"));
            }
            let reads_bottom = rule.read.last() == Some(&BOTTOM);
            for (i, &x) in rule.read.iter().enumerate() {
                let ok = if x == BOTTOM { i + 1 == rule.read.len() } else { self.gamma.contains(&x) };
                if !ok {
                    return Err(Error::Alphabet {
                        symbol: x,
                        context: format!("rule at {name}"),
                    });
                }
            }
            for (t, w) in &rule.targets {
                if *t >= self.controls.len() {
                    return bad(format!("rule at {name} targets control {t} out of range"));
                }
                for (i, &x) in w.iter().enumerate() {
                    let ok = if x == BOTTOM { reads_bottom && i + 1 == w.len() } else { self.gamma.contains(&x) };
                    if !ok {
                        return bad(format!("rule at {name} pushes `{}` illegally", show(w)));
                    }
                }
                if reads_bottom && w.last() != Some(&BOTTOM) {
                    return bad(format!("rule at {name} drops the bottom marker"));
                }
            }
        }
        Ok(())
    }

    /// The successor sets of `cfg`, one per enabled rule.
    pub fn successors(&self, cfg: &Config) -> Vec<Vec<Config>> {
        let mut out = Vec::new();
        for rule in self.rules.iter().filter(|r| r.control == cfg.control) {
            if let Some(set) = apply(rule, &cfg.stack) {
                out.push(set);
            }
        }
        out
    }

    /// Every run-tree prefix of the given depth from `cfg`.
    pub fn run_prefixes(&self, cfg: &Config, depth: usize) -> BTreeSet<RunTree> {
        let mut out = BTreeSet::new();
        let succ = if depth == 0 { Vec::new() } else { self.successors(cfg) };
        if succ.is_empty() {
            out.insert(RunTree {
                cfg: cfg.clone(),
                children: Vec::new(),
            });
            return out;
        }
        for set in succ {
            let mut partial: Vec<Vec<RunTree>> = vec![Vec::new()];
            for child in &set {
                let options = self.run_prefixes(child, depth - 1);
                let mut next = Vec::new();
                for p in &partial {
                    for o in &options {
                        let mut q = p.clone();
                        q.push(o.clone());
                        next.push(q);
                    }
                }
                partial = next;
            }
            for mut children in partial {
                children.sort();
                children.dedup();
                out.insert(RunTree {
                    cfg: cfg.clone(),
                    children,
                });
            }
        }
        out
    }

    /// Rewrites the system to width one without ε-reads. Original controls
    /// keep their indices; storage states are appended and never final.
    pub fn expand(&self) -> Cabpds {
        let mut out = Cabpds::new(self.controls.clone(), &self.gamma, 1);
        out.finals = self.finals.clone();
        let mut storage: HashMap<(usize, Vec<char>), usize> = HashMap::new();
        for rule in &self.rules {
            let u = &rule.read;
            match u.len() {
                0 => {
                    let mut syms = self.gamma.clone();
                    syms.push(BOTTOM);
                    for g in syms {
                        let targets = rule
                            .targets
                            .iter()
                            .map(|(t, w)| {
                                let mut w = w.clone();
                                w.push(g);
                                (*t, w)
                            })
                            .collect();
                        out.add_rule(rule.control, &[g], targets);
                    }
                }
                1 => out.add_rule(rule.control, u, rule.targets.clone()),
                j => {
                    // storage state (p, v): the proper prefix v of some read
                    // word has been popped at p
                    let mut state = |out: &mut Cabpds, v: &[char]| {
                        *storage.entry((rule.control, v.to_vec())).or_insert_with(|| {
                            let name = format!("{}<{}>", self.controls[rule.control], show(v));
                            out.add_control(name, false)
                        })
                    };
                    let first = state(&mut out, &u[..1]);
                    out.add_rule(rule.control, &u[..1], vec![(first, Vec::new())]);
                    for k in 1..j - 1 {
                        let from = state(&mut out, &u[..k]);
                        let to = state(&mut out, &u[..k + 1]);
                        out.add_rule(from, &u[k..k + 1], vec![(to, Vec::new())]);
                    }
                    let last = state(&mut out, &u[..j - 1]);
                    out.add_rule(last, &u[j - 1..], rule.targets.clone());
                }
            }
        }
        out.rules.sort();
        out.rules.dedup();
        out
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "cabpds r={}", self.r);
        let _ = writeln!(out, "gamma {}", show(&self.gamma));
        let _ = writeln!(out, "controls {}", self.controls.join(" "));
        let finals: Vec<&str> = (0..self.controls.len())
            .filter(|&p| self.finals[p])
            .map(|p| self.controls[p].as_str())
            .collect();
        let _ = writeln!(out, "finals {}", finals.join(" "));
        for rule in &self.rules {
            let targets: Vec<String> = rule
                .targets
                .iter()
                .map(|(t, w)| format!("{}:\"{}\"", self.controls[*t], show(w)))
                .collect();
            let _ = writeln!(
                out,
                "{} / \"{}\" -> {{ {} }}",
                self.controls[rule.control],
                show(&rule.read),
                targets.join(" ; ")
            );
        }
        out
    }
}

fn apply(rule: &Rule, stack: &[char]) -> Option<Vec<Config>> {
    let n = rule.read.len();
    let reads_bottom = rule.read.last() == Some(&BOTTOM);
    let body = if reads_bottom { n - 1 } else { n };
    if stack.len() < body || stack[..body] != rule.read[..body] {
        return None;
    }
    if reads_bottom && stack.len() != body {
        return None;
    }
    let rest = &stack[body..];
    Some(
        rule.targets
            .iter()
            .map(|(t, w)| {
                let mut s: Vec<char> = w.iter().copied().filter(|&x| x != BOTTOM).collect();
                s.extend_from_slice(rest);
                Config { control: *t, stack: s }
            })
            .collect(),
    )
}

/// Parses the text produced by [`Cabpds::dump`].
pub fn parse_cabpds(text: &str) -> Result<Cabpds> {
    let err = |line: usize, msg: &str| Error::syntax("cabpds", line, 1, msg);
    let mut r = 1;
    let mut gamma = Vec::new();
    let mut sys: Option<Cabpds> = None;
    let mut names: BTreeMap<String, usize> = BTreeMap::new();
    let quoted = |s: &str| -> Option<Vec<char>> {
        let s = s.trim();
        s.strip_prefix('"')?.strip_suffix('"').map(|x| x.chars().collect())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let no = i + 1;
        if let Some(rest) = line.strip_prefix("cabpds r=") {
            r = rest.trim().parse().map_err(|_| err(no, "bad width"))?;
        } else if let Some(rest) = line.strip_prefix("gamma") {
            gamma = rest.trim().chars().collect();
        } else if let Some(rest) = line.strip_prefix("controls") {
            let controls: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            for (k, c) in controls.iter().enumerate() {
                names.insert(c.clone(), k);
            }
            sys = Some(Cabpds::new(controls, &gamma, r));
        } else if let Some(rest) = line.strip_prefix("finals") {
            let s = sys.as_mut().ok_or_else(|| err(no, "`controls` must come first"))?;
            for c in rest.split_whitespace() {
                s.finals[*names.get(c).ok_or_else(|| err(no, "unknown control"))?] = true;
            }
        } else {
            let s = sys.as_mut().ok_or_else(|| err(no, "`controls` must come first"))?;
            let bad = || err(no, "malformed rule");
            let (src, rest) = line.split_once(" / ").ok_or_else(bad)?;
            let (read, targets) = rest.split_once(" -> ").ok_or_else(bad)?;
            let targets = targets.trim().strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(bad)?;
            let mut ts = Vec::new();
            for t in targets.split(';') {
                let (c, w) = t.trim().split_once(':').ok_or_else(bad)?;
                ts.push((*names.get(c).ok_or_else(|| err(no, "unknown control"))?, quoted(w).ok_or_else(bad)?));
            }
            let p = *names.get(src).ok_or_else(|| err(no, "unknown control"))?;
            s.add_rule(p, &quoted(read).ok_or_else(bad)?, ts);
        }
    }
    let s = sys.ok_or_else(|| err(1, "missing `controls`"))?;
    s.validate()?;
    Ok(s)
}
