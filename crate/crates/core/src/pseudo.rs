//! Pseudo-Cauchy sequences under `val^m`, their limits, lifting modulo
//! `mG`, and the immediate-extension test for a pair `G ⊆ H`.

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::Coef;
use crate::group::{Elem, GroupError, GroupSpec, Mode};
use crate::pair::PairSpec;
use crate::par::Exec;
use crate::typedef::{best_approx, Approx, TypedefError};
use crate::valuation::SpineValue;

#[derive(Debug, Error, PartialEq)]
pub enum PseudoError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("need at least three terms")]
    TooShort,
    #[error("the sequence is not pseudo-Cauchy: {0}")]
    NotPseudoCauchy(String),
    #[error("pseudo-limits are only computed in Hahn presentations")]
    NotHahn,
    #[error("lifting fails at step {step}: {detail}")]
    LiftObstruction { step: usize, detail: String },
    #[error("the element already lies in G")]
    ElementInG,
    #[error("{0}")]
    Malformed(String),
    #[error(transparent)]
    Typedef(#[from] TypedefError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Indicator {
    Squares,
    Primes,
}

impl Indicator {
    fn nth(self, i: usize) -> u64 {
        match self {
            Indicator::Squares => (i * i) as u64,
            Indicator::Primes => crate::arith::nth_prime(i),
        }
    }
}

/// Closed form for the terms of a sequence on the terminal ω segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rule {
    /// Term `i` is `value` at coordinates `0..=i`.
    PrefixConst { value: Coef },
    /// Term `i` is `1` at the first `i + 1` members of the set.
    PrefixIndicator { set: Indicator },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoSequence {
    pub terms: Vec<Elem>,
    pub modulus: u64,
    pub rule: Option<Rule>,
}

impl Rule {
    fn from_json(v: &Value) -> Result<Rule, String> {
        match v.get("kind").and_then(|k| k.as_str()) {
            Some("prefix_const") => Ok(Rule::PrefixConst { value: Coef::from_json(v.get("value").ok_or("prefix_const needs a value")?)? }),
            Some("prefix_indicator") => match v.get("set").and_then(|s| s.as_str()) {
                Some("squares") => Ok(Rule::PrefixIndicator { set: Indicator::Squares }),
                Some("primes") => Ok(Rule::PrefixIndicator { set: Indicator::Primes }),
                _ => Err("prefix_indicator needs set \"squares\" or \"primes\"".into()),
            },
            _ => Err(format!("unknown rule {v}")),
        }
    }

    pub fn term(&self, g: &GroupSpec, i: usize) -> Option<Elem> {
        let ts = g.tail_seg()?;
        let pairs = match *self {
            Rule::PrefixConst { value } => (0..=i).map(|j| (g.spine.pos(ts, j as i64), value)).collect(),
            Rule::PrefixIndicator { set } => (0..=i).map(|j| (g.spine.pos(ts, set.nth(j) as i64), Coef::int(1))).collect(),
        };
        Some(Elem::from_pairs(pairs, None))
    }
}

impl PseudoSequence {
    /// `{"terms": [...], "modulus": m, "rule": {...}, "length": n}`; without
    /// terms, `length` terms (default 6) are generated from the rule.
    pub fn from_json(g: &GroupSpec, v: &Value) -> Result<PseudoSequence, PseudoError> {
        let modulus = v.get("modulus").and_then(|m| m.as_u64()).unwrap_or(0);
        let rule = v.get("rule").map(Rule::from_json).transpose().map_err(PseudoError::Malformed)?;
        let mut terms = Vec::new();
        if let Some(ts) = v.get("terms") {
            for t in ts.as_array().ok_or_else(|| PseudoError::Malformed("\"terms\" must be a list".into()))? {
                let e = g.parse_elem(t)?;
                g.contains(&e)?;
                terms.push(e);
            }
        }
        if terms.is_empty() {
            if let Some(r) = &rule {
                let len = v.get("length").and_then(|n| n.as_u64()).unwrap_or(6) as usize;
                terms = (0..len).map(|i| r.term(g, i).ok_or_else(|| PseudoError::Malformed("rules need a terminal ω segment".into()))).collect::<Result<_, _>>()?;
            }
        }
        Ok(PseudoSequence { terms, modulus, rule })
    }

    pub fn to_json(&self, g: &GroupSpec) -> Value {
        let mut v = json!({ "terms": self.terms.iter().map(|t| g.elem_to_json(t)).collect::<Vec<_>>(), "modulus": self.modulus });
        if let Some(r) = &self.rule {
            v["rule"] = serde_json::to_value(r).expect("rule serializes");
        }
        v
    }

    /// The given terms, continued by the rule for `extra` more.
    pub fn extended(&self, g: &GroupSpec, extra: usize) -> Vec<Elem> {
        let mut out = self.terms.clone();
        if let Some(r) = &self.rule {
            for i in self.terms.len()..self.terms.len() + extra {
                if let Some(t) = r.term(g, i) {
                    out.push(t);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyReport {
    pub holds: bool,
    /// Index from which every triple `i < j < k` satisfies
    /// `val(a_j - a_i) < val(a_k - a_j)`.
    pub threshold: usize,
    pub violation: Option<(usize, usize, usize)>,
    /// All terms equal.
    pub degenerate: bool,
    /// `val^m(a_{i+1} - a_i)`.
    pub gaps: Vec<SpineValue>,
}

/// Decides the pseudo-Cauchy condition on the presented prefix: from some
/// index on, with at least three terms past it, values of consecutive
/// differences strictly increase across all triples.
pub fn pseudo_cauchy_report(g: &GroupSpec, terms: &[Elem], m: u64) -> Result<CauchyReport, PseudoError> {
    let n = terms.len();
    if n < 3 {
        return Err(PseudoError::TooShort);
    }
    let degenerate = terms.iter().all(|t| *t == terms[0]);
    let rows: Vec<usize> = (0..n).collect();
    let vals: Vec<Vec<SpineValue>> = Exec::default().map(&rows, |&i| (0..n).map(|j| if j > i { g.val_m(&terms[j].sub(&terms[i]), m) } else { SpineValue::Inf }).collect());
    let bad: Vec<Option<(usize, usize, usize)>> = Exec::default().map(&rows, |&i| {
        let mut last = None;
        for j in i + 1..n {
            for k in j + 1..n {
                if vals[i][j] >= vals[j][k] {
                    last = Some((i, j, k));
                }
            }
        }
        last
    });
    let violation = bad.into_iter().flatten().last();
    let threshold = violation.map(|(i, _, _)| i + 1).unwrap_or(0);
    let gaps = (0..n - 1).map(|i| vals[i][i + 1]).collect();
    Ok(CauchyReport { holds: !degenerate && threshold + 3 <= n, threshold, violation, degenerate, gaps })
}

pub fn is_pseudo_cauchy(g: &GroupSpec, s: &PseudoSequence) -> Result<CauchyReport, PseudoError> {
    pseudo_cauchy_report(g, &s.terms, s.modulus)
}

/// Whether `a` is a pseudo-limit: `val^m(a_i - a) = val^m(a_i - a_j)` for
/// all `threshold ≤ i < j`, with the rule supplying four extra terms.
pub fn is_pseudo_limit(g: &GroupSpec, s: &PseudoSequence, a: &Elem) -> Result<bool, PseudoError> {
    let terms = s.extended(g, 4);
    let rep = pseudo_cauchy_report(g, &terms, s.modulus)?;
    if !rep.holds {
        return Err(PseudoError::NotPseudoCauchy(format!("violating triple {:?}", rep.violation)));
    }
    let m = s.modulus;
    Ok((rep.threshold..terms.len()).all(|i| {
        let to_a = g.val_m(&terms[i].sub(a), m);
        (i + 1..terms.len()).all(|j| to_a == g.val_m(&terms[i].sub(&terms[j]), m))
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Limit {
    Elem(Elem),
    NotRepresentable(String),
}

/// A pseudo-limit in a Hahn presentation, read off the rule when there is
/// one; without a rule the last term is returned, which is a pseudo-limit
/// of the presented prefix.
pub fn hahn_pseudo_limit(g: &GroupSpec, s: &PseudoSequence) -> Result<Limit, PseudoError> {
    if g.mode != Mode::Hahn {
        return Err(PseudoError::NotHahn);
    }
    let n = s.terms.len();
    if n >= 2 && s.terms[n - 1] == s.terms[n - 2] {
        return Ok(Limit::Elem(s.terms[n - 1].clone()));
    }
    let rep = is_pseudo_cauchy(g, s)?;
    if !rep.holds {
        return Err(PseudoError::NotPseudoCauchy(format!("violating triple {:?}", rep.violation)));
    }
    match s.rule {
        Some(Rule::PrefixConst { value }) => {
            let ts = g.tail_seg().ok_or_else(|| PseudoError::Malformed("rules need a terminal ω segment".into()))?;
            let e = Elem::from_pairs(vec![], Some((ts, value)));
            match g.contains(&e) {
                Ok(()) => Ok(Limit::Elem(e)),
                Err(err) => Ok(Limit::NotRepresentable(err.to_string())),
            }
        }
        Some(Rule::PrefixIndicator { set }) => {
            Ok(Limit::NotRepresentable(format!("the indicator of the {set:?} is not eventually constant").to_lowercase()))
        }
        None => Ok(Limit::Elem(s.terms[n - 1].clone())),
    }
}

/// Replaces a sequence pseudo-Cauchy under `val^m` by one pseudo-Cauchy
/// under the natural valuation with the same differences modulo `mG`.
/// Only successor steps are handled; the output has modulus 0.
pub fn lift_mod_m(g: &GroupSpec, s: &PseudoSequence) -> Result<PseudoSequence, PseudoError> {
    let m = s.modulus;
    if m < 2 {
        return Err(PseudoError::Malformed("lifting needs a modulus of at least 2".into()));
    }
    let rep = is_pseudo_cauchy(g, s)?;
    if !rep.holds {
        return Err(PseudoError::NotPseudoCauchy(format!("violating triple {:?}", rep.violation)));
    }
    let mut out = vec![s.terms[0].clone()];
    for k in 0..s.terms.len() - 1 {
        let d = s.terms[k + 1].sub(&s.terms[k]);
        let step = match g.val_m(&d, m) {
            SpineValue::Inf => Elem::zero(),
            SpineValue::Limit(seg) => {
                return Err(PseudoError::LiftObstruction { step: k, detail: format!("the difference has value the limit above segment {seg}") })
            }
            SpineValue::At(p) => {
                let head = d.prefix_below(&p);
                if g.in_mg(&head, m).is_none() || !g.is_member(&head) {
                    return Err(PseudoError::LiftObstruction { step: k, detail: format!("the part of the difference below {p} is not in {m}G") });
                }
                d.truncate_below(&p)
            }
        };
        let next = out[k].add(&step);
        out.push(next);
    }
    Ok(PseudoSequence { terms: out, modulus: 0, rule: None })
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeltaMax {
    /// `γ = val^m(e)` is attained by `e - m·g_star`.
    Attained { gamma: SpineValue, g_star: Elem },
    NoMaximum(String),
}

/// `max { val(e - m g) : g ∈ G }` and an element attaining it.
pub fn delta_max(g: &GroupSpec, e: &Elem, m: u64) -> Result<DeltaMax, PseudoError> {
    g.contains(e)?;
    match m {
        0 => return Ok(DeltaMax::Attained { gamma: g.nat_val(e), g_star: Elem::zero() }),
        1 => return Ok(DeltaMax::Attained { gamma: SpineValue::Inf, g_star: e.clone() }),
        _ => {}
    }
    let gamma = g.val_m(e, m);
    let g_star = match gamma {
        SpineValue::Inf => g.in_mg(e, m).expect("val^m is ∞ exactly on mG"),
        SpineValue::At(p) => e.prefix_below(&p).div(m as i64),
        SpineValue::Limit(seg) => return Ok(DeltaMax::NoMaximum(format!("values approach the limit above segment {seg}"))),
    };
    if !g.is_member(&g_star) {
        return Ok(DeltaMax::NoMaximum("the absorbable prefix is not divisible inside G".into()));
    }
    Ok(DeltaMax::Attained { gamma, g_star })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Immediacy {
    /// `h` has a best approximation from `G`, at value `β`.
    NotImmediate { beta: SpineValue },
    /// A pseudo-Cauchy sequence in `G` with pseudo-limit `h` in `H` and no
    /// pseudo-limit attained in `G`.
    NoMaximumDetected { sequence: Vec<Elem>, certificate: Value },
}

/// Pseudo-Cauchy sequence in `G` under `val^m` converging to `h` in `H`,
/// when `h` has no best approximation mod `mG`.
pub fn approximation_witness(pair: &PairSpec, h: &Elem, m: u64) -> Result<Immediacy, PseudoError> {
    match best_approx(pair, h, 1, m)? {
        Approx::Best(b) => Ok(Immediacy::NotImmediate { beta: b.beta }),
        Approx::NoMaximum(c) => {
            let seq = c.sequence(&pair.g, 6);
            let rep = pseudo_cauchy_report(&pair.g, &seq, m)?;
            if !rep.holds {
                return Err(PseudoError::NotPseudoCauchy("approximation sequence".into()));
            }
            // The values of h - g_j in H follow the gaps of the sequence.
            let ok = seq.iter().enumerate().all(|(j, x)| {
                let here = pair.h.val_m(&h.sub(&pair.embed(x)), m);
                j + 1 >= seq.len() || here == pair.embed_value(&rep.gaps[j])
            });
            if !ok {
                return Err(PseudoError::NotPseudoCauchy("h is not a pseudo-limit of the approximation sequence".into()));
            }
            Ok(Immediacy::NoMaximumDetected { sequence: seq, certificate: c.to_json(&pair.g) })
        }
    }
}

/// Whether `h ∈ H \ G` witnesses that `G ⊆ H` is not immediate-free: a
/// pseudo-Cauchy sequence in `G` converging to `h` without limit in `G`.
pub fn immediate_ext_check(pair: &PairSpec, h: &Elem) -> Result<Immediacy, PseudoError> {
    if pair.pull_back(h).is_some() {
        return Err(PseudoError::ElementInG);
    }
    approximation_witness(pair, h, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;
    use crate::chain::{ChainSpec, Pos, Segment};
    use crate::rib::RibSpec;

    fn hahn() -> GroupSpec {
        GroupSpec::uniform(ChainSpec::single(Segment::Omega), RibSpec::z(), Mode::Hahn)
    }

    fn seq(rule: Rule, len: usize, m: u64) -> PseudoSequence {
        let g = hahn();
        PseudoSequence { terms: (0..len).map(|i| rule.term(&g, i).unwrap()).collect(), modulus: m, rule: Some(rule) }
    }

    #[test]
    fn prefix_sums_converge_to_the_ones_vector() {
        let g = hahn();
        let s = seq(Rule::PrefixConst { value: Coef::int(1) }, 5, 0);
        assert!(is_pseudo_cauchy(&g, &s).unwrap().holds);
        let Limit::Elem(a) = hahn_pseudo_limit(&g, &s).unwrap() else { panic!() };
        assert_eq!(a.tail, Some((0, Coef::int(1))));
        assert!(is_pseudo_limit(&g, &s, &a).unwrap());
        // The last presented term is not a limit of the continued sequence.
        assert!(!is_pseudo_limit(&g, &s, &s.terms[4]).unwrap());
    }

    #[test]
    fn indicator_limits_are_not_representable() {
        let g = hahn();
        let s = seq(Rule::PrefixIndicator { set: Indicator::Squares }, 5, 0);
        assert!(matches!(hahn_pseudo_limit(&g, &s).unwrap(), Limit::NotRepresentable(_)));
    }

    #[test]
    fn violations_move_the_threshold() {
        let g = hahn();
        let e = |c: i64| Elem::single(Pos::at(0, c), Coef::int(1));
        // a0 = a1 makes every triple starting at 0 fail.
        let terms = vec![e(0), e(0), e(0).add(&e(1)), e(0).add(&e(1)).add(&e(2)), e(0).add(&e(1)).add(&e(2)).add(&e(3))];
        let rep = pseudo_cauchy_report(&g, &terms, 0).unwrap();
        assert_eq!(rep.threshold, 1);
        assert!(rep.holds);
        assert_eq!(pseudo_cauchy_report(&g, &terms[..2], 0), Err(PseudoError::TooShort));
        let constant = vec![e(0); 4];
        assert!(pseudo_cauchy_report(&g, &constant, 0).unwrap().degenerate);
    }

    #[test]
    fn lifting_keeps_differences_modulo_mg() {
        let g = hahn();
        let e = |c: i64, v: i64| Elem::single(Pos::at(0, c), Coef::int(v));
        // Differences carry 2-divisible junk below their 2-values.
        let d = [e(0, 2).add(&e(1, 1)), e(0, 4).add(&e(2, 3)), e(1, 6).add(&e(3, 1))];
        let mut terms = vec![Elem::zero()];
        for x in &d {
            let next = terms.last().unwrap().add(x);
            terms.push(next);
        }
        let s = PseudoSequence { terms, modulus: 2, rule: None };
        assert!(is_pseudo_cauchy(&g, &s).unwrap().holds);
        let lifted = lift_mod_m(&g, &s).unwrap();
        assert!(is_pseudo_cauchy(&g, &lifted).unwrap().holds);
        for k in 0..s.terms.len() {
            assert!(g.in_mg(&lifted.terms[k].sub(&s.terms[k]), 2).is_some());
        }
    }

    #[test]
    fn delta_max_attains_the_value() {
        let g = hahn();
        let e = Elem::from_pairs(vec![(Pos::at(0, 0), Coef::int(4)), (Pos::at(0, 1), Coef::int(3))], None);
        let DeltaMax::Attained { gamma, g_star } = delta_max(&g, &e, 2).unwrap() else { panic!() };
        assert_eq!(gamma, SpineValue::At(Pos::new(0, q(1))));
        assert_eq!(g.nat_val(&e.sub(&g_star.scale(2))), gamma);
    }

    #[test]
    fn sum_inside_hahn_is_immediate_at_the_ones_vector() {
        let spine = ChainSpec::single(Segment::Omega);
        let pair = PairSpec::new(GroupSpec::uniform(spine.clone(), RibSpec::z(), Mode::Sum), GroupSpec::uniform(spine, RibSpec::z(), Mode::Hahn));
        let ones = Elem::from_pairs(vec![], Some((0, Coef::int(1))));
        assert!(matches!(immediate_ext_check(&pair, &ones).unwrap(), Immediacy::NoMaximumDetected { .. }));
        assert_eq!(immediate_ext_check(&pair, &Elem::single(Pos::at(0, 2), Coef::int(1))), Err(PseudoError::ElementInG));
    }
}
