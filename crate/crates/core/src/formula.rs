//! Quantifier-free formulas of the valued language: a small ASCII grammar,
//! a canonical printer and an evaluator over a presented group.
//!
//! ```text
//! formula := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '!' unary | '(' formula ')' | atom
//! atom    := 'true' | 'false'
//!          | term '>' '0'                      order
//!          | term '===' M K                    congruence at the m-value
//!          | term '=**' K                      k times the least positive element
//!          | term '%' M '0'                    membership in mG
//!          | val '(' term ')' op rhs           comparison of values
//!          | 'C[' name ']' '(' val '(' term ')' ')'
//! val     := 'val' M                           natural valuation when M = 0
//! rhs     := val '(' term ')' | 'inf' | JSON spine value
//! op      := '<' | '<=' | '=' | '!=' | '>' | '>='
//! term    := ['-'] mono (('+' | '-') mono)* | '0'
//! mono    := [N '*'] name
//! ```

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::group::{Elem, GroupSpec};
use crate::valuation::SpineValue;

#[derive(Debug, Error, PartialEq)]
pub enum FormulaError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("cannot evaluate: {0}")]
    Eval(String),
}

/// Integer combination of variables, merged in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Default)]
pub struct Term(pub Vec<(String, i64)>);

impl Term {
    pub fn var(name: &str) -> Term {
        Term(vec![(name.to_string(), 1)])
    }

    /// `a - c*b`.
    pub fn diff(a: &str, c: i64, b: &str) -> Term {
        Term::from_pairs(vec![(a.to_string(), 1), (b.to_string(), -c)])
    }

    pub fn from_pairs(pairs: Vec<(String, i64)>) -> Term {
        let mut out: Vec<(String, i64)> = Vec::new();
        for (n, c) in pairs {
            match out.iter_mut().find(|(m, _)| *m == n) {
                Some((_, x)) => *x += c,
                None => out.push((n, c)),
            }
        }
        out.retain(|(_, c)| *c != 0);
        Term(out)
    }

    pub fn eval(&self, env: &Env) -> Result<Elem, FormulaError> {
        let mut acc = Elem::zero();
        for (n, c) in &self.0 {
            let v = env.get(n).ok_or_else(|| FormulaError::UnboundVariable(n.clone()))?;
            acc = acc.add(&v.scale(*c));
        }
        Ok(acc)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (i, (n, c)) in self.0.iter().enumerate() {
            let (neg, a) = (*c < 0, c.unsigned_abs());
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if a == 1 {
                write!(f, "{n}")?;
            } else {
                write!(f, "{a}*{n}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl CmpOp {
    fn holds(self, o: Ordering) -> bool {
        match self {
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Ne => o != Ordering::Equal,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
        }
    }

    fn text(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Rhs {
    Val(u64, Term),
    Inf,
    Const(SpineValue),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Atom {
    Gt0(Term),
    CongM(Term, u64),
    CongBullet(Term, u64, i64),
    EqBullet(Term, i64),
    ValCmp { m: u64, term: Term, op: CmpOp, rhs: Rhs },
    Colour { name: String, m: u64, term: Term },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

pub type Env = BTreeMap<String, Elem>;

impl Formula {
    pub fn constant(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    /// Free variables in order of first appearance.
    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |t: &Term| {
            for (n, _) in &t.0 {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
        };
        fn walk(f: &Formula, push: &mut dyn FnMut(&Term)) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Atom(a) => match a {
                    Atom::Gt0(t) | Atom::CongM(t, _) | Atom::CongBullet(t, _, _) | Atom::EqBullet(t, _) | Atom::Colour { term: t, .. } => push(t),
                    Atom::ValCmp { term, rhs, .. } => {
                        push(term);
                        if let Rhs::Val(_, t) = rhs {
                            push(t);
                        }
                    }
                },
                Formula::Not(x) => walk(x, push),
                Formula::And(a, b) | Formula::Or(a, b) => {
                    walk(a, push);
                    walk(b, push);
                }
            }
        }
        walk(self, &mut push);
        out
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Or(..) => 0,
            Formula::And(..) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Gt0(t) => write!(f, "{t} > 0"),
            Atom::CongM(t, m) => write!(f, "{t} %{m} 0"),
            Atom::CongBullet(t, m, k) => write!(f, "{t} ==={m} {k}"),
            Atom::EqBullet(t, k) => write!(f, "{t} =** {k}"),
            Atom::ValCmp { m, term, op, rhs } => {
                write!(f, "val{m}({term}) {} ", op.text())?;
                match rhs {
                    Rhs::Val(m2, t2) => write!(f, "val{m2}({t2})"),
                    Rhs::Inf => f.write_str("inf"),
                    Rhs::Const(v) => write!(f, "{}", v.to_json()),
                }
            }
            Atom::Colour { name, m, term } => write!(f, "C[{name}](val{m}({term}))"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, x: &Formula, paren: bool| {
            if paren {
                write!(f, "({x})")
            } else {
                write!(f, "{x}")
            }
        };
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => {
                f.write_str("!")?;
                wrap(f, x, x.prec() < 2)
            }
            Formula::And(a, b) => {
                wrap(f, a, a.prec() < 1)?;
                f.write_str(" & ")?;
                wrap(f, b, b.prec() < 2)
            }
            Formula::Or(a, b) => {
                wrap(f, a, false)?;
                f.write_str(" | ")?;
                wrap(f, b, b.prec() < 1)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Json(String),
}

const SYMBOLS: [&str; 18] = ["===", "=**", "<=", ">=", "!=", "(", ")", "[", "]", "&", "|", "!", "+", "-", "*", ">", "<", "="];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i].parse().map_err(|_| FormulaError::Syntax { pos: start, msg: "integer too large".into() })?;
            out.push((start, Tok::Int(n)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        if c == '%' {
            out.push((i, Tok::Sym("%")));
            i += 1;
            continue;
        }
        if c == '{' {
            let start = i;
            let mut depth = 0;
            while i < bytes.len() {
                match bytes[i] {
                    b'{' => depth += 1,
                    b'}' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                i += 1;
            }
            if depth != 0 {
                return Err(FormulaError::Syntax { pos: start, msg: "unbalanced braces in a literal".into() });
            }
            i += 1;
            out.push((start, Tok::Json(text[start..i].to_string())));
            continue;
        }
        match SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            Some(s) => {
                out.push((i, Tok::Sym(s)));
                i += s.len();
            }
            None => return Err(FormulaError::Syntax { pos: i, msg: format!("unexpected character {c:?}") }),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.0).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|t| &t.1)
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), FormulaError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected {s:?}"))
        }
    }

    fn int(&mut self) -> Result<i64, FormulaError> {
        let neg = self.eat("-");
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.at += 1;
                Ok(if neg { -n } else { n })
            }
            _ => self.err("expected an integer"),
        }
    }

    fn modulus(&mut self) -> Result<u64, FormulaError> {
        let n = self.int()?;
        if n < 0 {
            return self.err("a modulus must be non-negative");
        }
        Ok(n as u64)
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.conj()?;
        while self.eat("|") {
            let right = self.conj()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn conj(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.unary()?;
        while self.eat("&") {
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        self.atom()
    }

    fn val_index(&self) -> Option<u64> {
        match (self.peek(), self.peek2()) {
            (Some(Tok::Ident(s)), Some(Tok::Sym("("))) => s.strip_prefix("val").filter(|d| !d.is_empty()).and_then(|d| d.parse().ok()),
            _ => None,
        }
    }

    fn val(&mut self) -> Result<(u64, Term), FormulaError> {
        let Some(m) = self.val_index() else {
            return self.err("expected valM(...)");
        };
        self.at += 1;
        self.expect("(")?;
        let t = self.term()?;
        self.expect(")")?;
        Ok((m, t))
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "true" => {
                self.at += 1;
                return Ok(Formula::True);
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.at += 1;
                return Ok(Formula::False);
            }
            Some(Tok::Ident(s)) if s == "C" && self.peek2() == Some(&Tok::Sym("[")) => {
                self.at += 2;
                let name = match self.peek() {
                    Some(Tok::Ident(n)) => n.clone(),
                    _ => return self.err("expected a colour name"),
                };
                self.at += 1;
                self.expect("]")?;
                self.expect("(")?;
                let (m, term) = self.val()?;
                self.expect(")")?;
                return Ok(Formula::Atom(Atom::Colour { name, m, term }));
            }
            _ => {}
        }
        if self.val_index().is_some() {
            let (m, term) = self.val()?;
            let op = match self.peek() {
                Some(Tok::Sym("<")) => CmpOp::Lt,
                Some(Tok::Sym("<=")) => CmpOp::Le,
                Some(Tok::Sym("=")) => CmpOp::Eq,
                Some(Tok::Sym("!=")) => CmpOp::Ne,
                Some(Tok::Sym(">")) => CmpOp::Gt,
                Some(Tok::Sym(">=")) => CmpOp::Ge,
                _ => return self.err("expected a comparison"),
            };
            self.at += 1;
            let rhs = match self.peek().cloned() {
                Some(Tok::Ident(s)) if s == "inf" => {
                    self.at += 1;
                    Rhs::Inf
                }
                Some(Tok::Json(j)) => {
                    let here = self.pos();
                    self.at += 1;
                    let v: serde_json::Value = serde_json::from_str(&j).map_err(|e| FormulaError::Syntax { pos: here, msg: e.to_string() })?;
                    Rhs::Const(SpineValue::from_json(&v).map_err(|e| FormulaError::Syntax { pos: here, msg: e })?)
                }
                _ => {
                    let (m2, t2) = self.val()?;
                    Rhs::Val(m2, t2)
                }
            };
            return Ok(Formula::Atom(Atom::ValCmp { m, term, op, rhs }));
        }
        let t = self.term()?;
        if self.eat(">") {
            if self.int()? != 0 {
                return self.err("order atoms compare with 0");
            }
            return Ok(Formula::Atom(Atom::Gt0(t)));
        }
        if self.eat("===") {
            let m = self.modulus()?;
            let k = self.int()?;
            return Ok(Formula::Atom(Atom::CongBullet(t, m, k)));
        }
        if self.eat("=**") {
            let k = self.int()?;
            return Ok(Formula::Atom(Atom::EqBullet(t, k)));
        }
        if self.eat("%") {
            let m = self.modulus()?;
            if self.int()? != 0 {
                return self.err("congruence atoms compare with 0");
            }
            return Ok(Formula::Atom(Atom::CongM(t, m)));
        }
        self.err("expected '>', '===', '=**' or '%'")
    }

    fn mono(&mut self, sign: i64) -> Result<(String, i64), FormulaError> {
        let mut c = 1;
        if let Some(Tok::Int(n)) = self.peek() {
            c = *n;
            self.at += 1;
            self.expect("*")?;
        }
        match self.peek() {
            Some(Tok::Ident(n)) if self.peek2() != Some(&Tok::Sym("(")) => {
                let n = n.clone();
                self.at += 1;
                Ok((n, sign * c))
            }
            _ => self.err("expected a variable"),
        }
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        if matches!(self.peek(), Some(Tok::Int(0))) && self.peek2() != Some(&Tok::Sym("*")) {
            self.at += 1;
            return Ok(Term::default());
        }
        let mut pairs = Vec::new();
        let first = if self.eat("-") { -1 } else { 1 };
        pairs.push(self.mono(first)?);
        loop {
            let sign = if self.eat("+") {
                1
            } else if self.eat("-") {
                -1
            } else {
                break;
            };
            pairs.push(self.mono(sign)?);
        }
        Ok(Term::from_pairs(pairs))
    }
}

pub fn parse(text: &str) -> Result<Formula, FormulaError> {
    let mut p = Parser { toks: lex(text)?, at: 0, end: text.len() };
    let f = p.formula()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

fn colour(g: &GroupSpec, name: &str, v: &SpineValue) -> Result<bool, FormulaError> {
    if let Some(n) = name.strip_prefix('S').and_then(|d| d.parse::<u64>().ok()) {
        let s = g.spine_m(n).map_err(|e| FormulaError::Eval(e.to_string()))?;
        return Ok(s.contains(v));
    }
    let SpineValue::At(p) = v else { return Ok(false) };
    if name == "discrete" {
        return Ok(g.rib_at(p).map(|r| r.discrete).unwrap_or(false));
    }
    if !g.spine.colours.iter().any(|c| c.name == name) {
        return Err(FormulaError::Eval(format!("unknown colour {name}")));
    }
    Ok(g.spine.has_colour(name, p))
}

fn eval_atom(g: &GroupSpec, a: &Atom, env: &Env) -> Result<bool, FormulaError> {
    Ok(match a {
        Atom::Gt0(t) => g.sign(&t.eval(env)?) > 0,
        Atom::CongM(t, m) => g.in_mg(&t.eval(env)?, *m).is_some(),
        Atom::CongBullet(t, m, k) => g.pred_cong_bullet(&t.eval(env)?, *m, *k),
        Atom::EqBullet(t, k) => {
            let e = t.eval(env)?;
            !e.is_zero() && g.pred_eq_bullet(&e, *k).unwrap_or(false)
        }
        Atom::ValCmp { m, term, op, rhs } => {
            let l = g.val_m(&term.eval(env)?, *m);
            let r = match rhs {
                Rhs::Val(m2, t2) => g.val_m(&t2.eval(env)?, *m2),
                Rhs::Inf => SpineValue::Inf,
                Rhs::Const(v) => v.bind(&g.spine),
            };
            op.holds(l.cmp(&r))
        }
        Atom::Colour { name, m, term } => colour(g, name, &g.val_m(&term.eval(env)?, *m))?,
    })
}

pub fn eval(g: &GroupSpec, f: &Formula, env: &Env) -> Result<bool, FormulaError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => eval_atom(g, a, env)?,
        Formula::Not(x) => !eval(g, x, env)?,
        Formula::And(a, b) => eval(g, a, env)? && eval(g, b, env)?,
        Formula::Or(a, b) => eval(g, a, env)? || eval(g, b, env)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Coef;
    use crate::chain::{ChainSpec, Segment};
    use crate::group::Mode;
    use crate::rib::RibSpec;

    fn h_omega() -> GroupSpec {
        GroupSpec::uniform(ChainSpec::single(Segment::Omega), RibSpec::z(), Mode::Hahn)
    }

    fn at(g: &GroupSpec, pairs: &[(i64, i64)]) -> Elem {
        Elem::from_pairs(pairs.iter().map(|(i, c)| (g.spine.pos(0, *i), Coef::int(*c))).collect(), None)
    }

    #[test]
    fn parses_atoms() {
        assert!(matches!(parse("1*x - g0 > 0").unwrap(), Formula::Atom(Atom::Gt0(_))));
        assert!(matches!(parse("val2(x) = inf").unwrap(), Formula::Atom(Atom::ValCmp { m: 2, rhs: Rhs::Inf, .. })));
        assert!(matches!(parse("x ===2 1").unwrap(), Formula::Atom(Atom::CongBullet(_, 2, 1))));
        assert_eq!(parse("1*x - g0 > 0").unwrap().to_string(), "x - g0 > 0");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(parse("x > 1"), Err(FormulaError::Syntax { pos: 5, msg: "order atoms compare with 0".into() }));
        assert!(matches!(parse("x >"), Err(FormulaError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("x ? 0"), Err(FormulaError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn precedence_and_printing() {
        let f = parse("a > 0 | b > 0 & !c > 0").unwrap();
        assert!(matches!(f, Formula::Or(..)));
        assert_eq!(f.to_string(), "a > 0 | b > 0 & !c > 0");
        let g = parse("(a > 0 | b > 0) & c > 0").unwrap();
        assert_eq!(g.to_string(), "(a > 0 | b > 0) & c > 0");
        assert_eq!(parse("!(a > 0 & b > 0)").unwrap().to_string(), "!(a > 0 & b > 0)");
        assert_eq!(parse("x + x - 3*y + y > 0").unwrap().to_string(), "2*x - 2*y > 0");
    }

    #[test]
    fn evaluation_delegates_to_the_group() {
        let g = h_omega();
        let mut env = Env::new();
        env.insert("a".into(), at(&g, &[(0, 2), (1, 3)]));
        env.insert("b".into(), at(&g, &[(1, 1)]));
        env.insert("z".into(), Elem::zero());
        let t = |s: &str| eval(&g, &parse(s).unwrap(), &env).unwrap();
        assert!(t("a > 0"));
        assert!(!t("-a > 0"));
        assert_eq!(t("a ===2 1"), g.pred_cong_bullet(&env["a"], 2, 1));
        assert!(t("val2(a) = val0(b)"));
        assert!(t("val0(a) < val0(b)"));
        assert!(t("val2(2*a) = inf"));
        assert!(t("2*b %2 0") && !t("b %2 0"));
        assert!(!t("z =** 1"));
        assert!(t("b =** 1"));
        assert!(t("C[S2](val0(b)) & C[discrete](val0(a))"));
        assert!(t(r#"val0(b) = {"pos":{"seg":0,"coord":1}}"#));
        assert_eq!(eval(&g, &parse("w > 0").unwrap(), &env), Err(FormulaError::UnboundVariable("w".into())));
    }
}
