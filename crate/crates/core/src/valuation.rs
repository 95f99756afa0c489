//! Natural and mod-m valuations, the value sets Γ^m, the quotients of the
//! spine they induce, the unary predicates of the valued language, and the
//! (M) and (UR) checks.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{fmt_q, nth_prime, prime_factors, q, Coef, Q};
use crate::chain::{ChainSpec, ColourRule, Membership, Part, Pos, SegRule, Segment};
use crate::group::{Elem, GroupSpec, Mode, RibSource};
use crate::rib::RibSpec;

#[derive(Debug, Error, PartialEq)]
pub enum ValuationError {
    #[error("the predicate needs a non-zero argument")]
    ZeroArgument,
    #[error("unsupported value-set shape on segment {0}: {1}")]
    Unsupported(usize, String),
}

/// A value of `val` or `val^m`: a spine position, the cut just above a
/// whole segment, or ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpineValue {
    At(Pos),
    Limit(usize),
    Inf,
}

impl SpineValue {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            SpineValue::At(p) => Some(*p),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SpineValue::At(p) => json!({ "pos": p.to_json() }),
            SpineValue::Limit(s) => json!({ "limit": { "seg": s } }),
            SpineValue::Inf => json!("inf"),
        }
    }

    pub fn from_json(v: &Value) -> Result<SpineValue, String> {
        if v.as_str() == Some("inf") {
            return Ok(SpineValue::Inf);
        }
        if let Some(p) = v.get("pos") {
            return Pos::from_json(p).map(SpineValue::At);
        }
        if let Some(s) = v.get("limit").and_then(|l| l.get("seg")).and_then(|s| s.as_u64()) {
            return Ok(SpineValue::Limit(s as usize));
        }
        if v.get("seg").is_some() {
            return Pos::from_json(v).map(SpineValue::At);
        }
        Err(format!("not a spine value: {v}"))
    }

    pub fn bind(self, chain: &ChainSpec) -> SpineValue {
        match self {
            SpineValue::At(p) => SpineValue::At(chain.bind(p)),
            other => other,
        }
    }
}

impl Ord for SpineValue {
    fn cmp(&self, o: &Self) -> Ordering {
        use SpineValue::*;
        match (self, o) {
            (Inf, Inf) => Ordering::Equal,
            (Inf, _) => Ordering::Greater,
            (_, Inf) => Ordering::Less,
            (At(a), At(b)) => a.cmp(b),
            (At(a), Limit(s)) => {
                if a.seg <= *s {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (Limit(_), At(_)) => o.cmp(self).reverse(),
            (Limit(a), Limit(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for SpineValue {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for SpineValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpineValue::At(p) => write!(f, "{p}"),
            SpineValue::Limit(s) => write!(f, "lim{s}"),
            SpineValue::Inf => f.write_str("inf"),
        }
    }
}

impl Serialize for SpineValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpineValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        SpineValue::from_json(&v).map_err(D::Error::custom)
    }
}

/// Γ^m as a colour class of the spine plus limit points contributed by
/// generator tails; ∞ is always included.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueSet {
    pub m: u64,
    pub chain: ChainSpec,
    pub members: Vec<Membership>,
    pub limit: Option<usize>,
}

impl ValueSet {
    pub fn contains(&self, v: &SpineValue) -> bool {
        match v {
            SpineValue::Inf => true,
            SpineValue::Limit(s) => self.limit == Some(*s),
            SpineValue::At(p) => self.members.get(p.seg).map(|m| m.contains(&p.coord)).unwrap_or(false),
        }
    }

    /// Every value, when the set is finite.
    pub fn points(&self) -> Option<Vec<SpineValue>> {
        let mut out = Vec::new();
        for (i, m) in self.members.iter().enumerate() {
            match m {
                Membership::None => {}
                Membership::Finite { coords } => {
                    let mut ps: Vec<Pos> = coords.iter().map(|c| self.chain.bind(Pos::new(i, *c))).collect();
                    ps.sort();
                    out.extend(ps.into_iter().map(SpineValue::At));
                }
                _ => return None,
            }
        }
        if self.limit.is_some() {
            return None;
        }
        out.push(SpineValue::Inf);
        Some(out)
    }

    /// Order type, e.g. `ω+1∪{∞}`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut finite = 0usize;
        let flush = |parts: &mut Vec<String>, finite: &mut usize| {
            if *finite > 0 {
                parts.push(finite.to_string());
                *finite = 0;
            }
        };
        for (i, m) in self.members.iter().enumerate() {
            let seg = self.chain.segments[i];
            match m {
                Membership::None => {}
                Membership::Finite { coords } => finite += coords.len(),
                Membership::All | Membership::Cofinite { .. } if seg.is_finite() => {
                    finite += match seg {
                        Segment::Fin { k } => k as usize,
                        _ => 0,
                    }
                }
                Membership::DenseCodense { part } => {
                    flush(&mut parts, &mut finite);
                    parts.push(match part {
                        Part::Rational => "Q".into(),
                        Part::Irrational => format!("{}\\Q", seg.name()),
                    });
                }
                _ => {
                    flush(&mut parts, &mut finite);
                    parts.push(seg.name());
                }
            }
            if self.limit == Some(i) {
                finite += 1;
            }
        }
        flush(&mut parts, &mut finite);
        if parts.is_empty() {
            "{∞}".into()
        } else {
            format!("{}∪{{∞}}", parts.join("+"))
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "m": self.m,
            "describe": self.describe(),
            "members": self.members,
            "limits": self.limit.iter().map(|s| json!({ "seg": s })).collect::<Vec<_>>(),
        });
        if let Some(ps) = self.points() {
            v["points"] = Value::Array(ps.iter().map(|p| p.to_json()).collect());
        }
        v
    }
}

fn membership_from(seg: Segment, generic: bool, irrational: Option<bool>, exceptions: &BTreeSet<Q>, idx: usize) -> Result<Membership, ValuationError> {
    let mut ex: Vec<Q> = exceptions.iter().copied().collect();
    if let Segment::Fin { k } = seg {
        let coords: Vec<Q> = (0..k as i64).map(q).filter(|c| generic != ex.contains(c)).collect();
        return Ok(Membership::Finite { coords });
    }
    ex.sort();
    match irrational {
        Some(irr) if irr != generic => {
            if !ex.is_empty() {
                return Err(ValuationError::Unsupported(idx, "exceptions on a dense-codense class".into()));
            }
            Ok(Membership::DenseCodense { part: if generic { Part::Rational } else { Part::Irrational } })
        }
        _ => Ok(match (generic, ex.is_empty()) {
            (false, true) => Membership::None,
            (true, true) => Membership::All,
            (false, false) => Membership::Finite { coords: ex },
            (true, false) => Membership::Cofinite { coords: ex },
        }),
    }
}

/// How many prime-family coordinates are inspected when a predicate of the
/// family has to be tabulated; enough for every modulus below 300.
const FAMILY_SCAN: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Holds,
    HoldsBounded,
    Fails,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub status: CheckStatus,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Check {
    pub fn holds(&self) -> bool {
        self.status != CheckStatus::Fails
    }

    pub fn exit_code(&self) -> i32 {
        if self.holds() {
            0
        } else {
            2
        }
    }
}

pub const DEFAULT_BOUND: u64 = 12;

impl GroupSpec {
    pub fn nat_val(&self, e: &Elem) -> SpineValue {
        self.leading(e).map(|(p, _)| SpineValue::At(p)).unwrap_or(SpineValue::Inf)
    }

    /// `min { γ : e ∉ V_γ + mG }`: the first coordinate not absorbable into
    /// `mG`, or the limit above the tail segment when only the tail
    /// obstructs.
    pub fn val_m(&self, e: &Elem, m: u64) -> SpineValue {
        match m {
            0 => return self.nat_val(e),
            1 => return SpineValue::Inf,
            _ => {}
        }
        let h = self.horizon(e, m);
        for (p, c) in e.entries(h) {
            let ok = self.rib_at(&p).map(|r| r.divisible(&c, m).is_some()).unwrap_or(false);
            if !ok {
                return SpineValue::At(p);
            }
        }
        let Some((_, t)) = e.tail else {
            return SpineValue::Inf;
        };
        let far = self.tail_pos(h).expect("tail segment");
        if !self.rib_at(&far).map(|r| r.divisible(&t, m).is_some()).unwrap_or(false) {
            return SpineValue::At(far);
        }
        if self.in_mg(e, m).is_some() {
            SpineValue::Inf
        } else {
            SpineValue::Limit(far.seg)
        }
    }

    /// `e =_• k_•`: the quotient by the ball below `val(e)` is discrete and
    /// `e` is `k` times its least positive element there.
    pub fn pred_eq_bullet(&self, e: &Elem, k: i64) -> Result<bool, ValuationError> {
        let (p, c) = self.leading(e).ok_or(ValuationError::ZeroArgument)?;
        Ok(self.rib_at(&p).map(|r| r.discrete).unwrap_or(false) && c == Coef::int(k))
    }

    /// `e ≡_{•m} k_•`; false when `val^m(e)` is ∞ or a limit value.
    pub fn pred_cong_bullet(&self, e: &Elem, m: u64, k: i64) -> bool {
        let SpineValue::At(p) = self.val_m(e, m) else {
            return false;
        };
        let Some(rib) = self.rib_at(&p) else {
            return false;
        };
        rib.discrete && rib.divisible(&(e.value_at(&p) - Coef::int(k)), m).is_some()
    }

    fn family_table(&self, pred: &dyn Fn(&RibSpec) -> bool, cut_complete: bool) -> (bool, BTreeSet<Q>) {
        let hits: Vec<bool> = (0..FAMILY_SCAN).map(|n| pred(&RibSpec::z_loc(nth_prime(n), cut_complete))).collect();
        if hits.iter().all(|h| *h) {
            return (true, BTreeSet::new());
        }
        (false, hits.iter().enumerate().filter(|(_, h)| **h).map(|(n, _)| q(n as i64)).collect())
    }

    /// The colour class `{γ : pred(rib at γ)}`, one membership per segment.
    pub fn rib_class(&self, pred: &dyn Fn(&RibSpec) -> bool) -> Result<Vec<Membership>, ValuationError> {
        if self.spine.is_trivial() {
            return Ok(vec![Membership::None]);
        }
        let mut out = Vec::new();
        for (i, seg) in self.spine.segments.iter().enumerate() {
            let prof = self.profile(i);
            let eval = |src: &RibSource| -> (bool, BTreeSet<Q>) {
                match src {
                    RibSource::Fixed(r) => (pred(r), BTreeSet::new()),
                    RibSource::Family { cut_complete } => self.family_table(pred, *cut_complete),
                }
            };
            let (generic, mut flips) = eval(&prof.generic);
            let irrational = prof.irrational.as_ref().map(|s| eval(s).0);
            for (c, src) in &prof.exceptions {
                let at = match src {
                    RibSource::Fixed(r) => pred(r),
                    RibSource::Family { cut_complete } => pred(&RibSpec::z_loc(nth_prime(c.to_integer() as usize), *cut_complete)),
                };
                if at != generic {
                    flips.insert(*c);
                } else {
                    flips.remove(c);
                }
            }
            out.push(membership_from(*seg, generic, irrational, &flips, i)?);
        }
        Ok(out)
    }

    /// Whether some element has `val^m` equal to the limit above the tail
    /// segment: a combination `T` of generator tails with `T ∈ mR` but
    /// `T/m` outside the tail lattice.
    pub fn tail_limit_witness(&self, m: u64) -> Option<(Vec<i64>, Coef)> {
        let Mode::Generators(gens) = &self.mode else { return None };
        if m < 2 {
            return None;
        }
        let lattice = self.tail_lattice();
        let far = self.tail_pos(self.base_horizon() + FAMILY_SCAN as u64)?;
        let rib = self.rib_at(&far)?;
        let k = gens.len();
        let mut cs = vec![0i64; k];
        loop {
            let t = gens.iter().zip(&cs).fold(Coef::zero(), |acc, (g, c)| acc + g.tail * *c);
            if !t.is_zero() && rib.divisible(&t, m).is_some() && !lattice.contains(&t.div_int(m as i64)) {
                return Some((cs, t));
            }
            let mut i = 0;
            loop {
                if i == k {
                    return None;
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

    pub fn spine_m(&self, m: u64) -> Result<ValueSet, ValuationError> {
        let members = if m == 1 {
            vec![Membership::None; self.spine.segments.len()]
        } else if m == 0 {
            vec![Membership::All; self.spine.segments.len()]
        } else {
            self.rib_class(&|r: &RibSpec| !r.m_divisible(m))?
        };
        let limit = self.tail_limit_witness(m).and(self.tail_seg());
        Ok(ValueSet { m, chain: self.spine.clone(), members, limit })
    }

    /// Primes the regular spine depends on.
    pub fn relevant_primes(&self) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        for p in self.profiles() {
            for src in p.sources() {
                match src {
                    RibSource::Fixed(r) if r.discrete => {
                        out.insert(2);
                    }
                    RibSource::Fixed(r) => out.extend(r.non_divisible_primes()),
                    RibSource::Family { .. } => {}
                }
            }
        }
        out
    }

    pub fn has_family(&self) -> bool {
        self.profiles().iter().any(|p| p.sources().iter().any(|s| matches!(s, RibSource::Family { .. })))
    }

    /// Positions whose rib fails to be divisible by some prime.
    pub fn regular_class(&self) -> Result<Vec<Membership>, ValuationError> {
        self.rib_class(&|r: &RibSpec| r.discrete || !r.non_divisible_primes().is_empty())
    }

    pub fn t_spine(&self, m: u64) -> Result<Quotient, ValuationError> {
        let s = self.spine_m(m)?;
        let colour = ColourRule {
            name: format!("S{m}"),
            rules: s.members.iter().enumerate().map(|(seg, member)| SegRule { seg, member: member.clone() }).collect(),
        };
        Quotient::build(&self.spine, &s.members, &[colour])
    }

    /// Regular spine: the quotient by "no point of any Γ^p in between",
    /// coloured by the images of the Γ^p, discreteness of ribs and the
    /// prime family.
    pub fn regular_spine(&self) -> Result<Quotient, ValuationError> {
        let s = self.regular_class()?;
        let mut colours = Vec::new();
        for p in self.relevant_primes() {
            let members = self.rib_class(&|r: &RibSpec| !r.m_divisible(p))?;
            colours.push(ColourRule {
                name: format!("S{p}"),
                rules: members.into_iter().enumerate().map(|(seg, member)| SegRule { seg, member }).collect(),
            });
        }
        let discrete = self.rib_class(&|r: &RibSpec| r.discrete)?;
        colours.push(ColourRule {
            name: "discrete".into(),
            rules: discrete.into_iter().enumerate().map(|(seg, member)| SegRule { seg, member }).collect(),
        });
        let fam: Vec<SegRule> = self
            .profiles()
            .iter()
            .filter(|p| matches!(p.generic, RibSource::Family { .. }))
            .map(|p| SegRule { seg: p.seg, member: Membership::Schematic { family: "p".into() } })
            .collect();
        if !fam.is_empty() {
            colours.push(ColourRule { name: "p_n".into(), rules: fam });
        }
        Quotient::build(&self.spine, &s, &colours)
    }

    pub fn check_m(&self, bound: u64) -> Check {
        match &self.mode {
            Mode::Hahn => Check {
                status: CheckStatus::Holds,
                detail: "Hahn products are maximal, and maximal valued groups satisfy (M)".into(),
                n: None,
                witness: None,
            },
            Mode::Sum => Check {
                status: CheckStatus::Holds,
                detail: "(M) is first order and the lexicographic sum is elementary in the Hahn product".into(),
                n: None,
                witness: None,
            },
            Mode::Generators(gens) => {
                for m in 2..=bound.max(2) {
                    if let Some((cs, t)) = self.tail_limit_witness(m) {
                        let ts = self.tail_seg().expect("tail segment");
                        let mut x = Elem::zero();
                        for (g, c) in gens.iter().zip(&cs) {
                            x = x.add(&self.generator_elem(g).scale(*c));
                        }
                        let x = x.truncate_below(&self.spine.pos(ts, self.base_horizon() as i64));
                        debug_assert_eq!(x.tail_value(), t);
                        return Check {
                            status: CheckStatus::Fails,
                            detail: format!(
                                "val^{m} of x is the limit above segment {ts}, which is the natural value of no element congruent to x mod {m}G"
                            ),
                            n: Some(m),
                            witness: Some(json!({ "m": m, "x": self.elem_to_json(&x), "val_m": self.val_m(&x, m).to_json() })),
                        };
                    }
                }
                Check {
                    status: CheckStatus::HoldsBounded,
                    detail: format!("no tail obstruction for any modulus up to {}", bound.max(2)),
                    n: None,
                    witness: None,
                }
            }
        }
    }

    pub fn check_ur(&self) -> Result<Check, ValuationError> {
        if self.has_family() {
            return Ok(Check {
                status: CheckStatus::Fails,
                detail: "the prime family makes each Γ^p a single point per block, so no finite N yields the regular valuation".into(),
                n: None,
                witness: Some(json!({ "family_segments": self.profiles().iter().filter(|p| matches!(p.generic, RibSource::Family { .. })).map(|p| p.seg).collect::<Vec<_>>() })),
            });
        }
        let reg = self.regular_spine()?;
        let primes: Vec<u64> = self.relevant_primes().into_iter().collect();
        let mut candidates: Vec<u64> = (0..(1u64 << primes.len()))
            .map(|mask| primes.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, p)| *p).product())
            .collect();
        candidates.sort();
        for n in candidates {
            let s = if n == 1 { vec![Membership::None; self.spine.segments.len()] } else { self.spine_m(n)?.members };
            let quo = Quotient::build(&self.spine, &s, &[])?;
            if quo.same_partition(&reg, &self.spine) {
                return Ok(Check {
                    status: CheckStatus::Holds,
                    detail: format!("the level-{n} spine separates exactly the regular classes"),
                    n: Some(n),
                    witness: None,
                });
            }
        }
        Ok(Check { status: CheckStatus::Fails, detail: "no product of relevant primes separates the regular classes".into(), n: None, witness: None })
    }
}

pub fn nat_val(g: &GroupSpec, a: &Elem) -> SpineValue {
    g.nat_val(a)
}

pub fn val_m(g: &GroupSpec, a: &Elem, m: u64) -> SpineValue {
    g.val_m(a, m)
}

pub fn spine_m(g: &GroupSpec, m: u64) -> Result<ValueSet, ValuationError> {
    g.spine_m(m)
}

/// Where the points of one original segment go in the quotient.
#[derive(Clone, Debug, PartialEq)]
enum SegMap {
    Identity { raw: usize },
    Collapse { to: (usize, Q) },
    /// Finitely many separating points, listed in chain order; each class
    /// ends at its separating point. `top` receives the points above the
    /// last one, if any.
    Classes { raw: usize, points: Vec<Q>, top: Option<(usize, Q)> },
    /// Co-finitely many separating points; the others move up to the next
    /// separating point.
    CofiniteUp { raw: usize, kind: Segment, exceptions: Vec<Q>, top: Option<(usize, Q)> },
}

/// A quotient of a chain by the relation "no separating point in `[γ, γ')`";
/// ∞ stays its own class.
#[derive(Clone, Debug, PartialEq)]
pub struct Quotient {
    pub chain: ChainSpec,
    maps: Vec<SegMap>,
    norm: Vec<(usize, i64)>,
    /// Classes with more than one position, described.
    pub multi: Vec<String>,
}

impl Quotient {
    pub fn build(spine: &ChainSpec, sep: &[Membership], colours: &[ColourRule]) -> Result<Quotient, ValuationError> {
        if spine.is_trivial() {
            return Ok(Quotient { chain: ChainSpec::trivial(), maps: vec![], norm: vec![], multi: vec![] });
        }
        let n = spine.segments.len();
        let mut raw_rev: Vec<Segment> = Vec::new();
        let mut maps_rev: Vec<SegMap> = Vec::new();
        let mut multi = Vec::new();
        let mut least: Option<(usize, Q)> = None;
        // Raw indices are assigned in right-to-left order and flipped at the end.
        for i in (0..n).rev() {
            let seg = spine.segments[i];
            let mem = match (&sep[i], seg) {
                (Membership::Cofinite { coords }, Segment::Fin { k }) => {
                    Membership::Finite { coords: (0..k as i64).map(q).filter(|c| !coords.contains(c)).collect() }
                }
                (Membership::All, Segment::Fin { k }) => Membership::Finite { coords: (0..k as i64).map(q).collect() },
                (m, _) => m.clone(),
            };
            let empty = mem == Membership::None || matches!(&mem, Membership::Finite { coords } if coords.is_empty());
            match mem {
                _ if empty => {
                    let single = seg == Segment::Fin { k: 1 };
                    let to = match least {
                        Some(p) => {
                            multi.push(format!("segment {i} joins the class above it"));
                            p
                        }
                        None => {
                            raw_rev.push(Segment::Fin { k: 1 });
                            if !single {
                                multi.push(format!("segment {i} forms one class"));
                            }
                            (raw_rev.len() - 1, Q::zero())
                        }
                    };
                    maps_rev.push(SegMap::Collapse { to });
                    least = Some(to);
                }
                Membership::None => unreachable!(),
                Membership::All => {
                    raw_rev.push(seg);
                    let raw = raw_rev.len() - 1;
                    maps_rev.push(SegMap::Identity { raw });
                    least = seg.min_coord().map(|c| (raw, c));
                }
                Membership::DenseCodense { .. } => {
                    raw_rev.push(seg);
                    maps_rev.push(SegMap::Identity { raw: raw_rev.len() - 1 });
                    least = None;
                }
                Membership::Finite { coords } => {
                    let mut pts: Vec<Pos> = coords.iter().map(|c| spine.bind(Pos::new(i, *c))).collect();
                    pts.sort();
                    let points: Vec<Q> = pts.iter().map(|p| p.coord).collect();
                    let last = *pts.last().expect("non-empty");
                    let above = match seg {
                        Segment::Fin { k } => last.coord < q(k as i64 - 1),
                        Segment::OmegaStar => last.coord > Q::zero(),
                        _ => true,
                    };
                    let k = points.len();
                    let raw = raw_rev.len();
                    let top = if above {
                        match least {
                            Some(p) => {
                                multi.push(format!("points of segment {i} above its last separating point join the class above"));
                                Some(p)
                            }
                            None => {
                                let many = match seg {
                                    Segment::Fin { k } => last.coord < q(k as i64 - 2),
                                    _ => true,
                                };
                                if many {
                                    multi.push(format!("points of segment {i} above its last separating point form one class"));
                                }
                                None
                            }
                        }
                    } else {
                        None
                    };
                    let size = if above && top.is_none() { k + 1 } else { k };
                    raw_rev.push(Segment::Fin { k: size as u32 });
                    let mut prev: Option<Q> = None;
                    for (j, c) in points.iter().enumerate() {
                        let grouped = match seg {
                            Segment::Fin { .. } | Segment::Omega => match prev {
                                None => *c > Q::zero(),
                                Some(p) => *c - p > q(1),
                            },
                            Segment::OmegaStar if j > 0 => prev.map(|p| p - *c > q(1)).unwrap_or(false),
                            _ => true,
                        };
                        if grouped {
                            multi.push(format!("positions of segment {i} below coordinate {} share its class", fmt_q(c)));
                        }
                        prev = Some(*c);
                    }
                    maps_rev.push(SegMap::Classes { raw, points, top });
                    least = Some((raw, Q::zero()));
                }
                Membership::Cofinite { coords } => {
                    let mut exceptions = coords.clone();
                    exceptions.sort();
                    let top = match seg {
                        Segment::Omega | Segment::Int => None,
                        Segment::OmegaStar => {
                            let gap = (0..).map(q).take_while(|c| exceptions.contains(c)).count();
                            if gap == 0 {
                                None
                            } else {
                                Some(match least {
                                    Some(p) => {
                                        multi.push(format!("top points of segment {i} join the class above"));
                                        p
                                    }
                                    None => {
                                        raw_rev.push(Segment::Fin { k: 1 });
                                        if gap > 1 {
                                            multi.push(format!("top points of segment {i} form one class"));
                                        }
                                        (raw_rev.len() - 1, Q::zero())
                                    }
                                })
                            }
                        }
                        _ => return Err(ValuationError::Unsupported(i, "co-finite class on a dense segment".into())),
                    };
                    if !exceptions.is_empty() {
                        multi.push(format!("non-separating positions of segment {i} join the next separating position"));
                    }
                    raw_rev.push(seg);
                    let raw = raw_rev.len() - 1;
                    maps_rev.push(SegMap::CofiniteUp { raw, kind: seg, exceptions, top });
                    least = if seg == Segment::Omega { Some((raw, Q::zero())) } else { None };
                }
                Membership::Schematic { .. } => return Err(ValuationError::Unsupported(i, "schematic separating class".into())),
            }
        }
        let r = raw_rev.len();
        let flip = |x: usize| r - 1 - x;
        let fix = |p: Option<(usize, Q)>| p.map(|(s, c)| (flip(s), c));
        let mut maps: Vec<SegMap> = maps_rev
            .into_iter()
            .map(|m| match m {
                SegMap::Identity { raw } => SegMap::Identity { raw: flip(raw) },
                SegMap::Collapse { to } => SegMap::Collapse { to: (flip(to.0), to.1) },
                SegMap::Classes { raw, points, top } => SegMap::Classes { raw: flip(raw), points, top: fix(top) },
                SegMap::CofiniteUp { raw, kind, exceptions, top } => SegMap::CofiniteUp { raw: flip(raw), kind, exceptions, top: fix(top) },
            })
            .collect();
        maps.reverse();
        raw_rev.reverse();
        let raw_segments = raw_rev;
        let mut raw_colours = Vec::new();
        for c in colours {
            let mut rules = Vec::new();
            for (i, m) in maps.iter().enumerate() {
                let member = c.on(i);
                match m {
                    SegMap::Identity { raw } => rules.push(SegRule { seg: *raw, member }),
                    SegMap::Classes { raw, points, .. } => {
                        let coords = points.iter().enumerate().filter(|(_, p)| member.contains(p)).map(|(j, _)| q(j as i64)).collect();
                        rules.push(SegRule { seg: *raw, member: Membership::Finite { coords } });
                    }
                    SegMap::CofiniteUp { raw, .. } => {
                        let generic = matches!(member, Membership::All | Membership::Cofinite { .. } | Membership::Schematic { .. });
                        rules.push(SegRule { seg: *raw, member: if generic { Membership::All } else { Membership::None } });
                    }
                    SegMap::Collapse { .. } => {}
                }
            }
            raw_colours.push(ColourRule { name: c.name.clone(), rules });
        }
        let raw_chain = ChainSpec { segments: raw_segments, colours: raw_colours };
        let (chain, norm) = raw_chain.normalize();
        Ok(Quotient { chain, maps, norm, multi })
    }

    fn raw_point(&self, p: &Pos) -> (usize, Q) {
        match &self.maps[p.seg] {
            SegMap::Identity { raw } => (*raw, p.coord),
            SegMap::Collapse { to } => *to,
            SegMap::Classes { raw, points, top } => {
                let rev = p.rev;
                let ge = |c: &Q| if rev { *c <= p.coord } else { *c >= p.coord };
                match points.iter().position(ge) {
                    Some(j) => (*raw, q(j as i64)),
                    None => top.unwrap_or((*raw, q(points.len() as i64))),
                }
            }
            SegMap::CofiniteUp { raw, kind, exceptions, top } => {
                let below = |y: Q| exceptions.iter().filter(|e| **e < y && (**e >= Q::zero() || *kind == Segment::Int && **e >= y)).count() as i64;
                match kind {
                    Segment::OmegaStar => {
                        let mut y = p.coord;
                        while exceptions.contains(&y) && y > Q::zero() {
                            y -= q(1);
                        }
                        if exceptions.contains(&y) {
                            return top.expect("top class of ω*");
                        }
                        (*raw, y - q(below(y)))
                    }
                    _ => {
                        let mut y = p.coord;
                        while exceptions.contains(&y) {
                            y += q(1);
                        }
                        if y.is_negative() {
                            let skipped = exceptions.iter().filter(|e| **e > y && e.is_negative()).count() as i64;
                            (*raw, y + q(skipped))
                        } else {
                            (*raw, y - q(below(y)))
                        }
                    }
                }
            }
        }
    }

    pub fn project(&self, p: &Pos) -> Pos {
        let (raw, c) = self.raw_point(p);
        let (seg, off) = self.norm[raw];
        self.chain.bind(Pos::new(seg, c + q(off)))
    }

    pub fn project_value(&self, v: &SpineValue) -> SpineValue {
        match v {
            SpineValue::At(p) => SpineValue::At(self.project(p)),
            SpineValue::Limit(s) => match &self.maps[*s] {
                SegMap::Identity { raw } => SpineValue::Limit(self.norm[*raw].0),
                _ => SpineValue::Limit(self.norm.last().map(|x| x.0).unwrap_or(0)),
            },
            SpineValue::Inf => SpineValue::Inf,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.multi.is_empty()
    }

    pub fn is_all_finite(&self) -> bool {
        self.chain.is_finite()
    }

    /// Same partition of `spine` as `other`, checked on every coordinate the
    /// presentation singles out plus nearby samples.
    pub fn same_partition(&self, other: &Quotient, spine: &ChainSpec) -> bool {
        let sample = sample_positions(spine);
        let a: Vec<Pos> = sample.iter().map(|p| self.project(p)).collect();
        let b: Vec<Pos> = sample.iter().map(|p| other.project(p)).collect();
        for i in 0..sample.len() {
            for j in i + 1..sample.len() {
                if (a[i] == a[j]) != (b[i] == b[j]) {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> Value {
        json!({ "chain": self.chain, "multi_classes": self.multi })
    }
}

/// Representative positions of a chain: small coordinates of every segment,
/// every coordinate named by a colour, and neighbours of those.
pub fn sample_positions(spine: &ChainSpec) -> Vec<Pos> {
    let mut out = Vec::new();
    for (i, seg) in spine.segments.iter().enumerate() {
        let mut cs: BTreeSet<Q> = BTreeSet::new();
        for c in &spine.colours {
            if let Membership::Finite { coords } | Membership::Cofinite { coords } = c.on(i) {
                for x in coords {
                    cs.insert(x);
                    cs.insert(x + q(1));
                    cs.insert(x - q(1));
                }
            }
        }
        for j in -3..8 {
            cs.insert(q(j));
        }
        if seg.is_dense() {
            for j in -4..8 {
                cs.insert(Q::new(j, 2));
            }
        }
        for c in cs {
            if seg.admits(&c) {
                out.push(spine.bind(Pos::new(i, c)));
            }
        }
    }
    out
}

/// Prime factors helper re-exported for callers that enumerate moduli.
pub fn moduli_for(primes: &BTreeSet<u64>) -> Vec<u64> {
    let mut out: Vec<u64> = vec![0];
    out.extend(primes.iter().copied());
    out.extend((2..=6).filter(|m| prime_factors(*m).iter().all(|p| primes.contains(p)) && !primes.contains(m)));
    out.sort();
    out.dedup();
    out
}
