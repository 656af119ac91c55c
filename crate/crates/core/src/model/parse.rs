//! The line-oriented `.rbm` model format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Action, Atom, EndowmentPredicate, Proposition, Rbm};
use crate::{Error, Result};

const FILE: &str = "rbm";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token { tok: Tok::Arrow, col: i + 1 });
            i += 2;
        } else if "(),:;".contains(c) {
            out.push(Token { tok: Tok::Punct(c), col: i + 1 });
            i += 1;
        } else {
            let start = i;
            while i < chars.len()
                && !chars[i].is_whitespace()
                && !"(),:;".contains(chars[i])
                && !(chars[i] == '-' && chars.get(i + 1) == Some(&'>'))
            {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Word(chars[start..i].iter().collect()),
                col: start + 1,
            });
        }
    }
    out
}

struct Line {
    no: usize,
    toks: Vec<Token>,
    pos: usize,
    len: usize,
}

impl Line {
    fn err(&self, col: usize, msg: impl Into<String>) -> Error {
        Error::syntax(FILE, self.no, col, msg)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.col).unwrap_or(self.len + 1)
    }

    fn word(&mut self, what: &str) -> Result<(String, usize)> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Word(w), col }) => {
                self.pos += 1;
                Ok((w.clone(), *col))
            }
            _ => Err(self.err(self.col(), format!("expected {what}"))),
        }
    }

    fn punct(&mut self, c: char) -> Result<()> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Punct(p), .. }) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(self.col(), format!("expected `{c}`"))),
        }
    }

    fn peek_punct(&self, c: char) -> bool {
        matches!(self.toks.get(self.pos), Some(Token { tok: Tok::Punct(p), .. }) if *p == c)
    }

    fn arrow(&mut self) -> Result<()> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Arrow, .. }) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(self.col(), "expected `->`")),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn end(&self) -> Result<()> {
        if self.done() {
            Ok(())
        } else {
            Err(self.err(self.col(), "unexpected trailing input"))
        }
    }

    fn rest_words(&mut self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        while let Some(Token { tok: Tok::Word(w), col }) = self.toks.get(self.pos) {
            out.push((w.clone(), *col));
            self.pos += 1;
        }
        out
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_predicate(s: &str) -> Option<EndowmentPredicate> {
    if s == "any" {
        return Some(EndowmentPredicate::Any);
    }
    let rest = s.strip_prefix("eta")?;
    if let Some(k) = rest.strip_prefix("==") {
        return k.parse().ok().map(EndowmentPredicate::Eq);
    }
    if let Some(k) = rest.strip_prefix(">=") {
        return k.parse().ok().map(EndowmentPredicate::AtLeast);
    }
    if let Some(k) = rest.strip_prefix('<') {
        return k.parse().ok().map(EndowmentPredicate::Below);
    }
    let rest = rest.strip_prefix('%')?;
    let (m, c) = rest.split_once("==")?;
    Some(EndowmentPredicate::Modulo {
        modulus: m.parse().ok()?,
        residue: c.parse().ok()?,
    })
}

struct TransRule {
    state: usize,
    pattern: Vec<Option<usize>>,
    target: usize,
}

/// Parses and validates an `.rbm` document. Wildcard transition rules are
/// expanded first-match-wins into a total transition table.
pub fn parse_rbm(text: &str) -> Result<Rbm> {
    let mut name = None;
    let mut agents: Vec<String> = Vec::new();
    let mut states: Vec<String> = Vec::new();
    let mut init = None;
    let mut actions: Vec<Action> = Vec::new();
    let mut resources = 0usize;
    let mut avail_raw: Vec<(usize, usize, usize, Vec<usize>)> = Vec::new();
    let mut props: Vec<Proposition> = Vec::new();
    let mut rules: Vec<TransRule> = Vec::new();

    let lookup = |list: &[String], n: &str| list.iter().position(|x| x == n);

    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokenize(content);
        if toks.is_empty() {
            continue;
        }
        let mut l = Line {
            no: idx + 1,
            toks,
            pos: 0,
            len: content.chars().count(),
        };
        let (kw, kw_col) = l.word("a declaration keyword")?;
        match kw.as_str() {
            "model" => {
                let (n, _) = l.word("model name")?;
                name = Some(n);
                l.end()?;
            }
            "agents" | "states" => {
                let list = l.rest_words();
                l.end()?;
                if list.is_empty() {
                    return Err(l.err(l.col(), format!("`{kw}` needs at least one name")));
                }
                let target = if kw == "agents" { &mut agents } else { &mut states };
                for (n, col) in list {
                    if !is_ident(&n) {
                        return Err(l.err(col, format!("invalid name `{n}`")));
                    }
                    if target.contains(&n) {
                        return Err(l.err(col, format!("duplicate name `{n}`")));
                    }
                    target.push(n);
                }
            }
            "init" => {
                let (s, col) = l.word("initial state")?;
                l.end()?;
                init = Some(lookup(&states, &s).ok_or_else(|| l.err(col, format!("unknown state `{s}`")))?);
            }
            "resource" => {
                l.word("resource name")?;
                l.end()?;
                resources += 1;
                if resources > 1 {
                    return Err(Error::MultipleResources);
                }
            }
            "action" => {
                let (n, col) = l.word("action name")?;
                if !is_ident(&n) {
                    return Err(l.err(col, format!("invalid action name `{n}`")));
                }
                if actions.iter().any(|a| a.name == n) {
                    return Err(l.err(col, format!("duplicate action `{n}`")));
                }
                let (kw2, col2) = l.word("`effect`")?;
                if kw2 != "effect" {
                    return Err(l.err(col2, "expected `effect`"));
                }
                let effects = l.rest_words();
                l.end()?;
                match effects.as_slice() {
                    [] => return Err(l.err(l.col(), "expected an integer effect")),
                    [(e, c)] => {
                        let effect = e.parse::<i64>().map_err(|_| l.err(*c, format!("invalid effect `{e}`")))?;
                        actions.push(Action { name: n, effect });
                    }
                    _ => return Err(Error::MultipleResources),
                }
            }
            "avail" => {
                let (s, scol) = l.word("state")?;
                let (a, acol) = l.word("agent")?;
                l.punct(':')?;
                let acts = l.rest_words();
                l.end()?;
                let q = lookup(&states, &s).ok_or_else(|| l.err(scol, format!("unknown state `{s}`")))?;
                let agent_ids: Vec<usize> = if a == "*" {
                    (0..agents.len()).collect()
                } else {
                    vec![lookup(&agents, &a).ok_or_else(|| l.err(acol, format!("unknown agent `{a}`")))?]
                };
                let mut ids = Vec::new();
                for (act, c) in acts {
                    let id = actions
                        .iter()
                        .position(|x| x.name == act)
                        .ok_or_else(|| l.err(c, format!("unknown action `{act}`")))?;
                    if !ids.contains(&id) {
                        ids.push(id);
                    }
                }
                for agent in agent_ids {
                    avail_raw.push((l.no, q, agent, ids.clone()));
                }
            }
            "prop" => {
                let (n, col) = l.word("proposition name")?;
                if !is_ident(&n) {
                    return Err(l.err(col, format!("invalid proposition name `{n}`")));
                }
                if props.iter().any(|p| p.name == n) {
                    return Err(l.err(col, format!("duplicate proposition `{n}`")));
                }
                l.punct(':')?;
                let mut atoms = Vec::new();
                while !l.done() {
                    let (s, scol) = l.word("state")?;
                    let (pred, pcol) = l.word("endowment predicate")?;
                    let state = lookup(&states, &s).ok_or_else(|| l.err(scol, format!("unknown state `{s}`")))?;
                    let predicate =
                        parse_predicate(&pred).ok_or_else(|| l.err(pcol, format!("invalid predicate `{pred}`")))?;
                    atoms.push(Atom { state, predicate });
                    if !l.done() {
                        l.punct(';')?;
                    }
                }
                props.push(Proposition { name: n, atoms });
            }
            "trans" => {
                let (s, scol) = l.word("state")?;
                let state = lookup(&states, &s).ok_or_else(|| l.err(scol, format!("unknown state `{s}`")))?;
                l.punct('(')?;
                let mut pattern = Vec::new();
                loop {
                    let (p, pcol) = l.word("action or `_`")?;
                    if p == "_" {
                        pattern.push(None);
                    } else {
                        let id = actions
                            .iter()
                            .position(|x| x.name == p)
                            .ok_or_else(|| l.err(pcol, format!("unknown action `{p}`")))?;
                        pattern.push(Some(id));
                    }
                    if l.peek_punct(',') {
                        l.punct(',')?;
                    } else {
                        break;
                    }
                }
                l.punct(')')?;
                if pattern.len() != agents.len() {
                    return Err(l.err(scol, format!("pattern has {} entries, expected {}", pattern.len(), agents.len())));
                }
                l.arrow()?;
                let (t, tcol) = l.word("target state")?;
                l.end()?;
                let target = lookup(&states, &t).ok_or_else(|| l.err(tcol, format!("unknown state `{t}`")))?;
                rules.push(TransRule { state, pattern, target });
            }
            other => return Err(l.err(kw_col, format!("unknown keyword `{other}`"))),
        }
    }

    let name = name.unwrap_or_else(|| "model".to_string());
    let init = init.ok_or_else(|| Error::Validation("missing `init` declaration".into()))?;
    let mut avail = vec![vec![Vec::new(); agents.len()]; states.len()];
    for (line, q, a, ids) in avail_raw {
        if !avail[q][a].is_empty() {
            return Err(Error::syntax(FILE, line, 1, format!("duplicate avail for {} at {}", agents[a], states[q])));
        }
        avail[q][a] = ids;
    }
    let mut m = Rbm {
        name,
        agents,
        states,
        init,
        actions,
        avail,
        trans: BTreeMap::new(),
        props,
    };
    for (q, row) in m.avail.iter().enumerate() {
        for (a, acts) in row.iter().enumerate() {
            if acts.is_empty() {
                return Err(Error::Validation(format!("empty avail set for agent {} at {}", m.agents[a], m.states[q])));
            }
        }
    }
    let all: Vec<usize> = (0..m.agents.len()).collect();
    for q in 0..m.states.len() {
        for profile in m.profiles(q, &all) {
            let hit = rules.iter().enumerate().find(|(_, r)| {
                r.state == q && r.pattern.iter().zip(&profile).all(|(p, a)| p.is_none_or(|x| x == *a))
            });
            match hit {
                Some((_, r)) => {
                    m.trans.insert((q, profile), r.target);
                }
                None => return Err(Error::Validation(format!("trans not total at {}", m.states[q]))),
            }
        }
    }
    m.validate()?;
    Ok(m)
}

/// Canonical text form: explicit avail lines and one transition per profile.
pub fn serialize_rbm(m: &Rbm) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", m.name);
    let _ = writeln!(out, "agents {}", m.agents.join(" "));
    let _ = writeln!(out, "states {}", m.states.join(" "));
    let _ = writeln!(out, "init {}", m.states[m.init]);
    for a in &m.actions {
        let _ = writeln!(out, "action {} effect {}", a.name, a.effect);
    }
    for (q, row) in m.avail.iter().enumerate() {
        for (a, acts) in row.iter().enumerate() {
            let names: Vec<&str> = acts.iter().map(|&x| m.actions[x].name.as_str()).collect();
            let _ = writeln!(out, "avail {} {} : {}", m.states[q], m.agents[a], names.join(" "));
        }
    }
    for p in &m.props {
        let atoms: Vec<String> = p
            .atoms
            .iter()
            .map(|a| format!("{} {}", m.states[a.state], a.predicate))
            .collect();
        let _ = writeln!(out, "prop {} : {}", p.name, atoms.join(" ; "));
    }
    for ((q, profile), t) in &m.trans {
        let names: Vec<&str> = profile.iter().map(|&x| m.actions[x].name.as_str()).collect();
        let _ = writeln!(out, "trans {} ({}) -> {}", m.states[*q], names.join(","), m.states[*t]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_transition_is_reported() {
        let text = "model m\nagents a b\nstates q0\ninit q0\naction idle effect 0\naction eco effect -1\n\
                    avail q0 a : idle eco\navail q0 b : idle eco\n\
                    trans q0 (idle,_) -> q0\ntrans q0 (_,idle) -> q0\n";
        let err = parse_rbm(text).unwrap_err();
        assert_eq!(err, Error::Validation("trans not total at q0".into()));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_rbm("model m\nagents a\nstates s\ninit s\naction idle effekt 0\n").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (5, 13)),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn second_resource_is_rejected() {
        let err = parse_rbm("resource money\nresource time\n").unwrap_err();
        assert_eq!(err, Error::MultipleResources);
        let err = parse_rbm("model m\naction a effect -1 -2\n").unwrap_err();
        assert_eq!(err, Error::MultipleResources);
    }

    #[test]
    fn empty_avail_is_rejected() {
        let err = parse_rbm("model m\nagents a b\nstates s\ninit s\naction idle effect 0\navail s a : idle\ntrans s (_,_) -> s\n")
            .unwrap_err();
        assert!(matches!(err, Error::Validation(msg) if msg.contains("empty avail")));
    }

    #[test]
    fn predicates_parse() {
        assert_eq!(parse_predicate("eta%3==2"), Some(EndowmentPredicate::Modulo { modulus: 3, residue: 2 }));
        assert_eq!(parse_predicate("eta<4"), Some(EndowmentPredicate::Below(4)));
        assert_eq!(parse_predicate("eta=4"), None);
    }
}
