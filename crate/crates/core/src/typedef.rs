//! Best approximations from `G` to elements of `H`, and the resulting
//! quantifier-free definitions of one-variable sets `{x ∈ G : φ(na - x)}`.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{q, Coef};
use crate::chain::Pos;
use crate::formula::{self, Atom, Env, Formula, FormulaError, Term};
use crate::group::{Elem, GroupError, GroupSpec, Mode};
use crate::pair::PairSpec;
use crate::rib::rib_elem_equiv;
use crate::valuation::{SpineValue, DEFAULT_BOUND};

#[derive(Debug, Error, PartialEq)]
pub enum TypedefError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("no best approximation: {}", .0.detail)]
    NoMaximum(Box<NoMaximum>),
    #[error("the rib cut at {0} has no definition")]
    RibCutNotDefinable(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("x falls in no guard")]
    GuardGap,
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestApproximation {
    pub n: i64,
    pub m: u64,
    /// `a_{m,n}`, an element of `G`.
    #[serde(skip)]
    pub a_mn: Elem,
    /// `val^m(na - a_{m,n})`, computed in `H`.
    pub beta: SpineValue,
}

/// Certificate that no best approximation exists: past `start` every tail
/// coordinate of the residue can be cancelled one position at a time by
/// `step`, never all at once.
#[derive(Clone, Debug, PartialEq)]
pub struct NoMaximum {
    pub h_seg: usize,
    pub g_seg: usize,
    pub start: u64,
    pub step: Coef,
    pub base: Elem,
    pub m: u64,
    pub detail: String,
}

impl NoMaximum {
    /// `base + step·(e_start + … + e_{start+j-1})` for `j < len`; an
    /// approximation sequence in `G` with strictly increasing values.
    pub fn sequence(&self, g: &GroupSpec, len: usize) -> Vec<Elem> {
        let mut out = Vec::with_capacity(len);
        let mut acc = self.base.clone();
        for j in 0..len as u64 {
            out.push(acc.clone());
            acc = acc.add(&Elem::single(g.spine.pos(self.g_seg, (self.start + j) as i64), self.step));
        }
        out
    }

    pub fn to_json(&self, g: &GroupSpec) -> Value {
        json!({
            "m": self.m,
            "segment": self.h_seg,
            "from": self.start,
            "step": self.step.to_json(),
            "base": g.elem_to_json(&self.base),
            "detail": self.detail,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Approx {
    Best(BestApproximation),
    NoMaximum(Box<NoMaximum>),
}

impl Approx {
    pub fn best(self) -> Result<BestApproximation, TypedefError> {
        match self {
            Approx::Best(b) => Ok(b),
            Approx::NoMaximum(c) => Err(TypedefError::NoMaximum(c)),
        }
    }
}

fn fine(h: &GroupSpec, p: &Pos, c: &Coef, m: u64) -> bool {
    match m {
        0 => c.is_zero(),
        1 => true,
        _ => h.rib_at(p).map(|r| r.divisible(c, m).is_some()).unwrap_or(false),
    }
}

fn candidates(c: &Coef, m: u64) -> Vec<Coef> {
    if m == 0 {
        return vec![*c];
    }
    let mut out = vec![*c, Coef::std(c.s)];
    out.extend((0..m as i64).map(Coef::int));
    out
}

/// A coordinate `v` placeable at `gp` in `G` with `c - v` fine at `hp`.
fn absorb(pair: &PairSpec, gp: &Pos, hp: &Pos, c: &Coef, m: u64) -> Option<Coef> {
    candidates(c, m).into_iter().find(|v| fine(&pair.h, hp, &(*c - *v), m) && (v.is_zero() || pair.g.is_member(&Elem::single(*gp, *v))))
}

fn gen_combo(gs: &GroupSpec, cs: &[i64]) -> Elem {
    gs.generators().iter().zip(cs).fold(Elem::zero(), |acc, (g, c)| acc.add(&gs.generator_elem(g).scale(*c)))
}

/// Cancels as much of the tail of `b` as a single element of `G` can.
/// Returns that element and, when the leftover tail can still be cancelled
/// coordinate by coordinate, the step doing so.
fn absorb_tail(pair: &PairSpec, b: &Elem, m: u64) -> (Elem, Option<(usize, usize, Coef)>) {
    let (g, h) = (&pair.g, &pair.h);
    let Some((hs, t)) = b.tail else { return (Elem::zero(), None) };
    let Some(gs) = pair.g_tail_seg(hs) else { return (Elem::zero(), None) };
    if m == 1 {
        return (Elem::zero(), None);
    }
    let far = h.horizon(b, m) + g.base_horizon() + 8;
    let far_h = h.tail_pos(far).expect("tail segment");
    let far_g = g.tail_pos(far).expect("tail segment");
    let mut x = Elem::zero();
    match &g.mode {
        Mode::Hahn => {
            if let Some(v) = absorb(pair, &far_g, &far_h, &t, m) {
                x = Elem::from_pairs(vec![], Some((gs, v)));
            }
        }
        Mode::Generators(gens) => {
            let tails: Vec<Coef> = gens.iter().map(|x| x.tail).collect();
            if m == 0 {
                if let Some(cs) = g.tail_lattice().combination(&tails, &t, DEFAULT_BOUND as i64) {
                    x = gen_combo(g, &cs);
                }
            } else {
                let k = gens.len();
                let mut cs = vec![0i64; k];
                'search: loop {
                    let tt = tails.iter().zip(&cs).fold(Coef::zero(), |acc, (a, c)| acc + *a * *c);
                    if fine(h, &far_h, &(t - tt), m) {
                        x = gen_combo(g, &cs);
                        break;
                    }
                    let mut i = 0;
                    loop {
                        if i == k {
                            break 'search;
                        }
                        cs[i] += 1;
                        if cs[i] < m as i64 {
                            break;
                        }
                        cs[i] = 0;
                        i += 1;
                    }
                }
            }
        }
        Mode::Sum => {}
    }
    let left = t - x.tail_value();
    if left.is_zero() || fine(h, &far_h, &left, m) {
        return (x, None);
    }
    let step = absorb(pair, &far_g, &far_h, &left, m).filter(|v| !v.is_zero());
    (x, step.map(|v| (hs, gs, v)))
}

/// `a_{m,n}` and `β = val^m(na - a_{m,n})`, or a certificate that
/// `{val^m(na - g) : g ∈ G}` has no maximum.
pub fn best_approx(pair: &PairSpec, a: &Elem, n: i64, m: u64) -> Result<Approx, TypedefError> {
    let (g, h) = (&pair.g, &pair.h);
    h.contains(a)?;
    let b = a.scale(n);
    let (mut x, pending) = absorb_tail(pair, &b, m);
    let r = b.sub(&pair.embed(&x));
    let horizon = h.horizon(&r, m.max(1)).max(h.horizon(&b, m.max(1))).max(g.horizon(&x, 1));
    let mut blocked = false;
    for (p, c) in r.entries(horizon) {
        if fine(h, &p, &c, m) {
            continue;
        }
        match pair.g_pos(&p).and_then(|gp| absorb(pair, &gp, &p, &c, m).map(|v| (gp, v))) {
            Some((gp, v)) => x = x.add(&Elem::single(gp, v)),
            None => {
                blocked = true;
                break;
            }
        }
    }
    if let (false, Some((hs, gs, step))) = (blocked, pending) {
        let detail = format!("past coordinate {horizon} the residue can be cancelled one coordinate at a time by {step}, never by one element");
        return Ok(Approx::NoMaximum(Box::new(NoMaximum { h_seg: hs, g_seg: gs, start: horizon, step, base: x, m, detail })));
    }
    let beta = h.val_m(&b.sub(&pair.embed(&x)), m);
    Ok(Approx::Best(BestApproximation { n, m, a_mn: x, beta }))
}

/// The predicate a scheme defines: `φ(na - x)` for `x` ranging over `G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// `na - x > 0`.
    Sign { n: i64 },
    /// `na - x ≡_{•m} k_•`.
    CongBullet { n: i64, m: u64, k: i64 },
    /// `na - x =_• k_•`.
    EqBullet { n: i64, k: i64 },
}

impl Target {
    pub fn n(&self) -> i64 {
        match *self {
            Target::Sign { n } | Target::CongBullet { n, .. } | Target::EqBullet { n, .. } => n,
        }
    }

    /// Modulus of the valuation the scheme splits on.
    pub fn modulus(&self) -> u64 {
        match *self {
            Target::CongBullet { m, .. } => m,
            _ => 0,
        }
    }

    pub fn from_json(v: &Value) -> Result<Target, String> {
        let n = v.get("n").and_then(|x| x.as_i64()).unwrap_or(1);
        let k = v.get("k").and_then(|x| x.as_i64());
        match v.get("kind").and_then(|x| x.as_str()) {
            Some("sign") => Ok(Target::Sign { n }),
            Some("cong_bullet") => {
                let m = v.get("m").and_then(|x| x.as_u64()).ok_or("cong_bullet needs m")?;
                if m < 2 {
                    return Err("cong_bullet needs m >= 2".into());
                }
                Ok(Target::CongBullet { n, m, k: k.ok_or("cong_bullet needs k")? })
            }
            Some("eq_bullet") => Ok(Target::EqBullet { n, k: k.ok_or("eq_bullet needs k")? }),
            _ => Err(format!("unknown target {v}")),
        }
    }

    /// Truth of the target predicate at `y = na - x`, computed in `H`.
    pub fn holds_in(&self, h: &GroupSpec, y: &Elem) -> bool {
        match *self {
            Target::Sign { .. } => h.sign(y) > 0,
            Target::CongBullet { m, k, .. } => h.pred_cong_bullet(y, m, k),
            Target::EqBullet { k, .. } => !y.is_zero() && h.pred_eq_bullet(y, k).unwrap_or(false),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Guard {
    Lt,
    Eq,
    Gt,
}

impl Guard {
    fn of(o: Ordering) -> Guard {
        match o {
            Ordering::Less => Guard::Lt,
            Ordering::Equal => Guard::Eq,
            Ordering::Greater => Guard::Gt,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Formula(Formula),
    /// The case is not covered by the construction.
    Unknown(String),
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Formula(x) => write!(f, "{x}"),
            Payload::Unknown(why) => write!(f, "unknown ({why})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub guard: Guard,
    pub payload: Payload,
}

/// Three cases on how `val^m(a_{m,n} - x)` compares with `β`, each with a
/// quantifier-free formula in `x` and the parameters `g0`, `g1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DefiningScheme {
    pub target: Target,
    pub approx: BestApproximation,
    pub cases: Vec<Case>,
    /// Parameters from `G`; `g0` is always `a_{m,n}`.
    pub params: Vec<(String, Elem)>,
}

impl DefiningScheme {
    pub fn case(&self, g: Guard) -> &Case {
        self.cases.iter().find(|c| c.guard == g).expect("every guard has a case")
    }

    pub fn to_json(&self, pair: &PairSpec) -> Value {
        json!({
            "target": self.target,
            "n": self.approx.n,
            "m": self.approx.m,
            "a_mn": pair.g.elem_to_json(&self.approx.a_mn),
            "beta": self.approx.beta.to_json(),
            "params": self.params.iter().map(|(k, v)| (k.clone(), pair.g.elem_to_json(v))).collect::<serde_json::Map<_, _>>(),
            "cases": self.cases.iter().map(|c| json!({ "guard": c.guard, "payload": c.payload.to_string() })).collect::<Vec<_>>(),
        })
    }
}

/// Whether each rib of `G` sits purely inside the rib of `H` it lands in:
/// the two are elementarily equivalent, so residues modulo `m` agree.
pub fn ribs_pure(pair: &PairSpec) -> Result<(), String> {
    for p in crate::valuation::sample_positions(&pair.g.spine) {
        let (Some(a), Some(b)) = (pair.g.rib_at(&p), pair.h.rib_at(&pair.embed_pos(&p))) else { continue };
        if !rib_elem_equiv(&a, &b) {
            return Err(format!("rib {} at {p} is not elementary in {}", a.label(), b.label()));
        }
    }
    Ok(())
}

fn atom(a: Atom) -> Payload {
    Payload::Formula(Formula::Atom(a))
}

fn konst(b: bool) -> Payload {
    Payload::Formula(Formula::constant(b))
}

pub fn scheme(pair: &PairSpec, a: &Elem, target: Target) -> Result<DefiningScheme, TypedefError> {
    if !matches!(target, Target::Sign { .. }) {
        ribs_pure(pair).map_err(TypedefError::HypothesisViolated)?;
    }
    let (g, h) = (&pair.g, &pair.h);
    let n = target.n();
    let m = target.modulus();
    let best = best_approx(pair, a, n, m)?.best()?;
    let b = a.scale(n);
    let a0 = best.a_mn.clone();
    let rest = b.sub(&pair.embed(&a0));
    let mut params = vec![("g0".to_string(), a0.clone())];
    let u = Term::diff("g0", 1, "x");
    // β as a position of G, if it is one.
    let at_g = match best.beta {
        SpineValue::At(p) => pair.g_pos(&p).map(|gp| (p, gp)),
        _ => None,
    };
    let (lt, gt, eq) = match target {
        Target::Sign { .. } => {
            let lt = atom(Atom::Gt0(u.clone()));
            let gt = konst(best.beta != SpineValue::Inf && h.sign(&rest) > 0);
            let eq = match at_g {
                None => konst(false),
                Some((hp, gp)) => {
                    let sigma = rest.value_at(&hp);
                    match sigma.d.cmp(&q(0)) {
                        Ordering::Greater => konst(true),
                        Ordering::Less => konst(false),
                        Ordering::Equal => {
                            let (r, s) = (*sigma.s.numer(), *sigma.s.denom());
                            let g1 = a0.scale(s).add(&Elem::single(gp, Coef::int(r)));
                            g.contains(&g1).map_err(|_| TypedefError::RibCutNotDefinable(hp.to_string()))?;
                            params.push(("g1".to_string(), g1));
                            atom(Atom::Gt0(Term::diff("g1", s, "x")))
                        }
                    }
                }
            };
            (lt, gt, eq)
        }
        Target::CongBullet { m, k, .. } => {
            let lt = atom(Atom::CongBullet(u.clone(), m, k));
            let gt = konst(best.beta != SpineValue::Inf && h.pred_cong_bullet(&rest, m, k));
            let eq = match at_g {
                None => konst(false),
                Some((hp, _)) if !h.rib_at(&hp).map(|r| r.discrete).unwrap_or(false) => konst(false),
                Some((hp, _)) => {
                    let a1 = rest.truncate_below(&hp);
                    let sigma = rest.value_at(&hp);
                    if !h.is_member(&a1) || h.val_m(&a1, m) != best.beta || !sigma.is_standard() || !sigma.s.is_integer() {
                        Payload::Unknown(format!("no element of H with value {hp} carrying the residue of na was exhibited"))
                    } else {
                        let k1 = (k - sigma.s.to_integer()).rem_euclid(m as i64);
                        if k1 == 0 {
                            konst(false)
                        } else {
                            atom(Atom::CongBullet(u.clone(), m, k1))
                        }
                    }
                }
            };
            (lt, gt, eq)
        }
        Target::EqBullet { k, .. } => {
            let lt = atom(Atom::EqBullet(u.clone(), k));
            let gt = konst(best.beta != SpineValue::Inf && h.pred_eq_bullet(&rest, k).unwrap_or(false));
            let eq = match at_g {
                None => konst(false),
                Some((hp, _)) => {
                    let sigma = rest.value_at(&hp);
                    let discrete = h.rib_at(&hp).map(|r| r.discrete).unwrap_or(false);
                    if !discrete || !sigma.is_standard() || !sigma.s.is_integer() {
                        konst(false)
                    } else {
                        let k1 = k - sigma.s.to_integer();
                        if k1 == 0 {
                            konst(false)
                        } else {
                            atom(Atom::EqBullet(u.clone(), k1))
                        }
                    }
                }
            };
            (lt, gt, eq)
        }
    };
    let cases = vec![Case { guard: Guard::Lt, payload: lt }, Case { guard: Guard::Eq, payload: eq }, Case { guard: Guard::Gt, payload: gt }];
    Ok(DefiningScheme { target, approx: best, cases, params })
}

/// The guard `x` falls in.
pub fn guard_of(pair: &PairSpec, s: &DefiningScheme, x: &Elem) -> Guard {
    let gamma = pair.embed_value(&pair.g.val_m(&s.approx.a_mn.sub(x), s.approx.m));
    Guard::of(gamma.cmp(&s.approx.beta))
}

/// Evaluates the scheme at `x ∈ G`, entirely inside `G`.
pub fn scheme_eval(pair: &PairSpec, s: &DefiningScheme, x: &Elem) -> Result<bool, TypedefError> {
    let guard = guard_of(pair, s, x);
    let case = s.cases.iter().find(|c| c.guard == guard).ok_or(TypedefError::GuardGap)?;
    let Payload::Formula(f) = &case.payload else {
        return Err(TypedefError::HypothesisViolated(case.payload.to_string()));
    };
    let mut env = Env::new();
    env.insert("x".into(), x.clone());
    for (k, v) in &s.params {
        env.insert(k.clone(), v.clone());
    }
    Ok(formula::eval(&pair.g, f, &env)?)
}

/// `min(val^m(a_{m,n} - x), β)`, which equals `val^m(na - x)` in `H`.
pub fn decompose_val(pair: &PairSpec, s: &DefiningScheme, x: &Elem) -> SpineValue {
    let gamma = pair.embed_value(&pair.g.val_m(&s.approx.a_mn.sub(x), s.approx.m));
    gamma.min(s.approx.beta)
}
