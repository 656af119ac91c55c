//! RAL formula syntax.

use std::fmt;

use crate::{Error, Result};

const FILE: &str = "formula";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RalFormula {
    True,
    False,
    Prop(String),
    Not(Box<RalFormula>),
    And(Box<RalFormula>, Box<RalFormula>),
    Or(Box<RalFormula>, Box<RalFormula>),
    /// `<<A>>X f`
    Next(Vec<String>, Box<RalFormula>),
    /// `<<A>>(f U g)`; `<<A>>F g` is stored as `<<A>>(true U g)`.
    Until(Vec<String>, Box<RalFormula>, Box<RalFormula>),
    /// `<<A>>G f`
    Always(Vec<String>, Box<RalFormula>),
}

impl RalFormula {
    pub fn prop(name: &str) -> Self {
        RalFormula::Prop(name.to_string())
    }

    pub fn not(f: RalFormula) -> Self {
        RalFormula::Not(Box::new(f))
    }

    pub fn and(a: RalFormula, b: RalFormula) -> Self {
        RalFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: RalFormula, b: RalFormula) -> Self {
        RalFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn eventually(coalition: Vec<String>, f: RalFormula) -> Self {
        RalFormula::Until(coalition, Box::new(RalFormula::True), Box::new(f))
    }

    /// True if no cooperation modality occurs in the formula.
    pub fn is_propositional(&self) -> bool {
        match self {
            RalFormula::True | RalFormula::False | RalFormula::Prop(_) => true,
            RalFormula::Not(f) => f.is_propositional(),
            RalFormula::And(a, b) | RalFormula::Or(a, b) => a.is_propositional() && b.is_propositional(),
            _ => false,
        }
    }

    /// Number of nested cooperation modalities on the deepest branch.
    pub fn modal_depth(&self) -> usize {
        match self {
            RalFormula::True | RalFormula::False | RalFormula::Prop(_) => 0,
            RalFormula::Not(f) => f.modal_depth(),
            RalFormula::And(a, b) | RalFormula::Or(a, b) => a.modal_depth().max(b.modal_depth()),
            RalFormula::Next(_, f) | RalFormula::Always(_, f) => 1 + f.modal_depth(),
            RalFormula::Until(_, a, b) => 1 + a.modal_depth().max(b.modal_depth()),
        }
    }

    pub fn props(&self, out: &mut Vec<String>) {
        match self {
            RalFormula::True | RalFormula::False => {}
            RalFormula::Prop(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            RalFormula::Not(f) | RalFormula::Next(_, f) | RalFormula::Always(_, f) => f.props(out),
            RalFormula::And(a, b) | RalFormula::Or(a, b) | RalFormula::Until(_, a, b) => {
                a.props(out);
                b.props(out);
            }
        }
    }
}

impl fmt::Display for RalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RalFormula::True => write!(f, "true"),
            RalFormula::False => write!(f, "false"),
            RalFormula::Prop(p) => write!(f, "{p}"),
            RalFormula::Not(g) => write!(f, "!{g}"),
            RalFormula::And(a, b) => write!(f, "({a} & {b})"),
            RalFormula::Or(a, b) => write!(f, "({a} | {b})"),
            RalFormula::Next(c, g) => write!(f, "<<{}>>X {g}", c.join(",")),
            RalFormula::Always(c, g) => write!(f, "<<{}>>G {g}", c.join(",")),
            RalFormula::Until(c, a, b) if **a == RalFormula::True => write!(f, "<<{}>>F {b}", c.join(",")),
            RalFormula::Until(c, a, b) => write!(f, "<<{}>>({a} U {b})", c.join(",")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    LParen,
    RParen,
    Open,
    Close,
    Comma,
    End,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let two = |s: &str| chars[i..].iter().take(2).collect::<String>() == s;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if two("<<") {
            out.push((Tok::Open, col));
            i += 2;
        } else if two(">>") {
            out.push((Tok::Close, col));
            i += 2;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            let tok = match c {
                '!' => Tok::Not,
                '&' => Tok::And,
                '|' => Tok::Or,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => return Err(Error::syntax(FILE, 1, col, format!("unexpected character `{c}`"))),
            };
            out.push((tok, col));
            i += 1;
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: &str) -> Result<T> {
        Err(Error::syntax(FILE, 1, self.col(), msg))
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(&format!("expected {what}"))
        }
    }

    fn or(&mut self) -> Result<RalFormula> {
        let mut f = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = RalFormula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<RalFormula> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = RalFormula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<RalFormula> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(RalFormula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Open => self.modal(),
            Tok::Ident(name) => {
                self.bump();
                Ok(match name.as_str() {
                    "true" => RalFormula::True,
                    "false" => RalFormula::False,
                    _ => RalFormula::Prop(name),
                })
            }
            _ => self.fail("expected a formula"),
        }
    }

    fn modal(&mut self) -> Result<RalFormula> {
        self.bump();
        let mut coalition = Vec::new();
        if *self.peek() != Tok::Close {
            loop {
                match self.bump() {
                    Tok::Ident(a) => coalition.push(a),
                    _ => {
                        self.pos -= 1;
                        return self.fail("expected an agent name");
                    }
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Close, "`>>`")?;
        match self.peek().clone() {
            Tok::Ident(op) if op == "X" || op == "G" || op == "F" => {
                self.bump();
                let body = self.unary()?;
                Ok(match op.as_str() {
                    "X" => RalFormula::Next(coalition, Box::new(body)),
                    "G" => RalFormula::Always(coalition, Box::new(body)),
                    _ => RalFormula::eventually(coalition, body),
                })
            }
            Tok::LParen => {
                self.bump();
                let lhs = self.or()?;
                match self.peek() {
                    Tok::Ident(u) if u == "U" => {
                        self.bump();
                    }
                    _ => return self.fail("expected `U`"),
                }
                let rhs = self.or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(RalFormula::Until(coalition, Box::new(lhs), Box::new(rhs)))
            }
            _ => self.fail("expected `X`, `G`, `F` or `(`"),
        }
    }
}

/// Parses a formula. Agent and proposition names are resolved at check time.
pub fn parse_formula(text: &str) -> Result<RalFormula> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.or()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(f)
}
