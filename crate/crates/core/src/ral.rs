//! RAL model checking: the pushdown encoding of a coalition's game and the
//! bottom-up elimination of cooperation modalities.

use std::collections::BTreeMap;

use crate::automata::{compile_predicate, ConfigSet};
use crate::ctl::{run_nnf, Ctl, CtlRun, Labelling};
use crate::model::{delta_con, delta_prd, Coalition, Endowment, RalFormula, Rbm};
use crate::pushdown::{Cabpds, Config};
use crate::saturation::Stats;
use crate::{Error, Result, TOKEN};

/// The coalition's game as a compact pushdown system over `{|}`; the stack
/// height is the endowment.
#[derive(Debug, Clone)]
pub struct EncodedGame {
    pub system: Cabpds,
    pub coalition: Coalition,
    pub r: usize,
}

impl EncodedGame {
    pub fn config(q: usize, eta: Endowment) -> Config {
        Config {
            control: q,
            stack: vec![TOKEN; eta.0 as usize],
        }
    }

    pub fn endowment(cfg: &Config) -> Endowment {
        Endowment(cfg.stack.len() as u64)
    }
}

pub fn encode(m: &Rbm, coalition: &Coalition) -> EncodedGame {
    let opponents = coalition.opponents(m);
    let mut rules = Vec::new();
    let mut r = 1;
    for q in 0..m.states.len() {
        let opp_profiles = m.profiles(q, opponents.agents());
        for alpha_a in m.profiles(q, coalition.agents()) {
            let con = delta_con(m, coalition, q, &alpha_a) as usize;
            r = r.max(con);
            let mut targets: Vec<(usize, Vec<char>)> = Vec::new();
            for alpha_o in &opp_profiles {
                let full = m.merge(coalition, &alpha_a, alpha_o);
                let next = m.successor(q, &full).expect("validated model has total transitions");
                let prd = delta_prd(m, coalition, q, &alpha_a, alpha_o) as usize;
                r = r.max(prd);
                targets.push((next, vec![TOKEN; prd]));
            }
            targets.sort();
            targets.dedup();
            rules.push((q, vec![TOKEN; con], targets));
        }
    }
    let mut system = Cabpds::new(m.states.clone(), &[TOKEN], r);
    system.finals = vec![true; m.states.len()];
    for (q, read, targets) in rules {
        system.add_rule(q, &read, targets);
    }
    EncodedGame {
        system,
        coalition: coalition.clone(),
        r,
    }
}

/// Labelling of a model proposition as a unary configuration set.
pub fn lift_prop(m: &Rbm, name: &str) -> Result<ConfigSet> {
    let p = m.prop(name).ok_or_else(|| Error::UnknownProposition(name.to_string()))?;
    compile_predicate(name, &m.states, &p.atoms).normalize_unary()
}

fn to_ctl(f: &RalFormula) -> Result<Ctl> {
    Ok(match f {
        RalFormula::True => Ctl::True,
        RalFormula::False => Ctl::False,
        RalFormula::Prop(p) => Ctl::Prop(p.clone()),
        RalFormula::Not(g) => Ctl::not(to_ctl(g)?),
        RalFormula::And(a, b) => Ctl::and(to_ctl(a)?, to_ctl(b)?),
        RalFormula::Or(a, b) => Ctl::or(to_ctl(a)?, to_ctl(b)?),
        _ => return Err(Error::Usage(format!("`{f}` is not propositional"))),
    })
}

/// The CTL body checked on the encoded game for a flat cooperation formula.
pub fn flat_body(f: &RalFormula) -> Result<(Vec<String>, Ctl)> {
    let (coalition, body) = match f {
        RalFormula::Next(a, g) => (a, Ctl::ex(to_ctl(g)?)),
        RalFormula::Until(a, g, h) => (a, Ctl::eu(to_ctl(g)?, to_ctl(h)?)),
        RalFormula::Always(a, g) => (a, Ctl::eg(to_ctl(g)?)),
        _ => return Err(Error::Usage(format!("`{f}` is not a cooperation formula"))),
    };
    Ok((coalition.clone(), crate::ctl::to_nnf(&body)))
}

/// One solved flat subformula.
#[derive(Debug, Clone)]
pub struct FlatResult {
    pub formula: RalFormula,
    pub encoded: EncodedGame,
    pub run: CtlRun,
    pub set: ConfigSet,
}

/// Configurations `(q, |^eta)` satisfying a flat cooperation formula.
/// `lab` must resolve every proposition of the body.
pub fn check_flat(m: &Rbm, lab: &Labelling, f: &RalFormula, cap: Option<usize>) -> Result<FlatResult> {
    let (names, body) = flat_body(f)?;
    let coalition = Coalition::resolve(m, &names)?;
    let encoded = encode(m, &coalition);
    let mut used: Vec<String> = Vec::new();
    f.props(&mut used);
    let mut sub = Labelling::new();
    for p in used {
        let set = match lab.get(&p) {
            Some(s) => s.clone(),
            None => lift_prop(m, &p)?,
        };
        sub.insert(p, set);
    }
    let run = run_nnf(&encoded.system, &sub, &body, cap)?;
    let k = run.product.closure.cl.len() - 1;
    let set = run.config_set(k).normalize_unary()?;
    Ok(FlatResult {
        formula: f.clone(),
        encoded,
        run,
        set,
    })
}

/// The result of eliminating every cooperation modality of a formula.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub labelling: Labelling,
    /// The formula with every cooperation subformula replaced by its
    /// fresh proposition.
    pub residual: RalFormula,
    pub flats: Vec<FlatResult>,
}

impl Evaluation {
    pub fn holds(&self, q: usize, eta: Endowment) -> Result<bool> {
        eval_propositional(&self.residual, &self.labelling, q, eta)
    }

    pub fn stats(&self) -> Stats {
        let mut s = Stats::default();
        for f in &self.flats {
            s.outer_iterations += f.run.stats.outer_iterations;
            s.saturation_rounds += f.run.stats.saturation_rounds;
            s.transitions_added += f.run.stats.transitions_added;
        }
        s
    }
}

fn eval_propositional(f: &RalFormula, lab: &Labelling, q: usize, eta: Endowment) -> Result<bool> {
    Ok(match f {
        RalFormula::True => true,
        RalFormula::False => false,
        RalFormula::Prop(p) => {
            let set = lab.get(p).ok_or_else(|| Error::UnknownProposition(p.clone()))?;
            set.contains(q, &vec![TOKEN; eta.0 as usize])?
        }
        RalFormula::Not(g) => !eval_propositional(g, lab, q, eta)?,
        RalFormula::And(a, b) => eval_propositional(a, lab, q, eta)? && eval_propositional(b, lab, q, eta)?,
        RalFormula::Or(a, b) => eval_propositional(a, lab, q, eta)? || eval_propositional(b, lab, q, eta)?,
        _ => return Err(Error::Usage(format!("`{f}` still has a cooperation modality"))),
    })
}

/// Solves every cooperation subformula innermost first.
pub fn evaluate(m: &Rbm, f: &RalFormula, cap: Option<usize>) -> Result<Evaluation> {
    m.validate()?;
    let mut props: Vec<String> = Vec::new();
    f.props(&mut props);
    let mut labelling = Labelling::new();
    for p in props {
        if p.starts_with('$') {
            return Err(Error::UnknownProposition(p));
        }
        labelling.insert(p.clone(), lift_prop(m, &p)?);
    }
    let mut flats = Vec::new();
    let mut cache: BTreeMap<String, String> = BTreeMap::new();
    let residual = eliminate(m, f, &mut labelling, &mut flats, &mut cache, cap)?;
    Ok(Evaluation {
        labelling,
        residual,
        flats,
    })
}

fn eliminate(
    m: &Rbm,
    f: &RalFormula,
    lab: &mut Labelling,
    flats: &mut Vec<FlatResult>,
    cache: &mut BTreeMap<String, String>,
    cap: Option<usize>,
) -> Result<RalFormula> {
    let mut rec = |g: &RalFormula, lab: &mut Labelling, flats: &mut Vec<FlatResult>| {
        eliminate(m, g, lab, flats, cache, cap).map(Box::new)
    };
    let flat = match f {
        RalFormula::True | RalFormula::False | RalFormula::Prop(_) => return Ok(f.clone()),
        RalFormula::Not(g) => return Ok(RalFormula::Not(rec(g, lab, flats)?)),
        RalFormula::And(a, b) => return Ok(RalFormula::And(rec(a, lab, flats)?, rec(b, lab, flats)?)),
        RalFormula::Or(a, b) => return Ok(RalFormula::Or(rec(a, lab, flats)?, rec(b, lab, flats)?)),
        RalFormula::Next(a, g) => RalFormula::Next(a.clone(), rec(g, lab, flats)?),
        RalFormula::Always(a, g) => RalFormula::Always(a.clone(), rec(g, lab, flats)?),
        RalFormula::Until(a, g, h) => RalFormula::Until(a.clone(), rec(g, lab, flats)?, rec(h, lab, flats)?),
    };
    let key = flat.to_string();
    if let Some(name) = cache.get(&key) {
        return Ok(RalFormula::Prop(name.clone()));
    }
    let result = check_flat(m, lab, &flat, cap)?;
    let name = format!("$flat{}", flats.len());
    lab.insert(name.clone(), result.set.clone());
    cache.insert(key, name.clone());
    flats.push(result);
    Ok(RalFormula::Prop(name))
}

/// Decides `M, q, eta |= f`.
pub fn ral_check(m: &Rbm, q: usize, eta: Endowment, f: &RalFormula) -> Result<bool> {
    evaluate(m, f, None)?.holds(q, eta)
}
