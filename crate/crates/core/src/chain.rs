//! Catalogued coloured chains: ordered sums of primitive segments carrying
//! unary colour predicates, with a rule table deciding cut definability.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::json;
use thiserror::Error;

use crate::arith::{fmt_q, q, q_serde, q_vec, Q};
use crate::verdict::{Outcome, Reason, Status, Verdict};

#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    #[error("position {0} lies outside its segment's coordinate domain")]
    PositionOutOfDomain(String),
    #[error("malformed cut: {0}")]
    MalformedCut(String),
    #[error("malformed chain: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Segment {
    Fin { k: u32 },
    Omega,
    OmegaStar,
    Int,
    DenseQ,
    DenseComplete,
}

impl Segment {
    pub fn has_min(self) -> bool {
        matches!(self, Segment::Fin { k } if k > 0) || self == Segment::Omega
    }

    pub fn has_max(self) -> bool {
        matches!(self, Segment::Fin { k } if k > 0) || self == Segment::OmegaStar
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, Segment::Fin { .. } | Segment::Omega | Segment::OmegaStar | Segment::Int)
    }

    pub fn is_dense(self) -> bool {
        !self.is_discrete()
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Segment::Fin { .. })
    }

    /// Coordinates run against the order on ω*.
    pub fn reversed(self) -> bool {
        self == Segment::OmegaStar
    }

    pub fn min_coord(self) -> Option<Q> {
        self.has_min().then(Q::zero)
    }

    pub fn max_coord(self) -> Option<Q> {
        match self {
            Segment::Fin { k } if k > 0 => Some(q(k as i64 - 1)),
            Segment::OmegaStar => Some(Q::zero()),
            _ => None,
        }
    }

    pub fn admits(self, c: &Q) -> bool {
        match self {
            Segment::Fin { k } => c.is_integer() && !c.is_negative() && *c < q(k as i64),
            Segment::Omega | Segment::OmegaStar => c.is_integer() && !c.is_negative(),
            Segment::Int => c.is_integer(),
            Segment::DenseQ | Segment::DenseComplete => true,
        }
    }

    pub fn name(self) -> String {
        match self {
            Segment::Fin { k } => format!("Fin({k})"),
            Segment::Omega => "ω".into(),
            Segment::OmegaStar => "ω*".into(),
            Segment::Int => "Z".into(),
            Segment::DenseQ => "Q".into(),
            Segment::DenseComplete => "R".into(),
        }
    }
}

/// A point of a segment. `rev` mirrors the segment's orientation so that
/// positions order correctly without consulting the chain.
#[derive(Clone, Copy, Debug)]
pub struct Pos {
    pub seg: usize,
    pub coord: Q,
    pub rev: bool,
}

impl Pos {
    pub fn new(seg: usize, coord: Q) -> Pos {
        Pos { seg, coord, rev: false }
    }

    pub fn at(seg: usize, coord: i64) -> Pos {
        Pos::new(seg, q(coord))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "seg": self.seg, "coord": q_serde::to_json(&self.coord) })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Pos, String> {
        let seg = v.get("seg").and_then(|s| s.as_u64()).ok_or("position needs an integer \"seg\"")? as usize;
        let coord = q_serde::from_json(v.get("coord").ok_or("position needs \"coord\"")?)?;
        Ok(Pos::new(seg, coord))
    }
}

impl PartialEq for Pos {
    fn eq(&self, o: &Self) -> bool {
        self.seg == o.seg && self.coord == o.coord
    }
}

impl Eq for Pos {}

impl Hash for Pos {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.seg.hash(h);
        self.coord.hash(h);
    }
}

impl Ord for Pos {
    fn cmp(&self, o: &Self) -> Ordering {
        self.seg.cmp(&o.seg).then_with(|| {
            if self.rev {
                o.coord.cmp(&self.coord)
            } else {
                self.coord.cmp(&o.coord)
            }
        })
    }
}

impl PartialOrd for Pos {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}{}", self.seg, fmt_q(&self.coord), if self.rev { "*" } else { "" })
    }
}

impl Serialize for Pos {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pos {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Pos::from_json(&v).map_err(D::Error::custom)
    }
}

/// A chain point: a position or the top element ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    At(Pos),
    Inf,
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Point::At(p) => p.serialize(s),
            Point::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        if v.as_str() == Some("inf") {
            return Ok(Point::Inf);
        }
        Pos::from_json(&v).map(Point::At).map_err(D::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Rational,
    Irrational,
}

/// Membership of one colour inside one segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Membership {
    None,
    All,
    Finite {
        #[serde(with = "q_vec")]
        coords: Vec<Q>,
    },
    Cofinite {
        #[serde(with = "q_vec")]
        coords: Vec<Q>,
    },
    /// One colour per index: position n carries the n-th colour of `family`.
    Schematic { family: String },
    /// Two complementary dense classes on a dense segment; element-bearing
    /// positions (exact rationals) always lie in the rational part.
    DenseCodense { part: Part },
}

impl Membership {
    /// Membership of an element-bearing coordinate.
    pub fn contains(&self, c: &Q) -> bool {
        match self {
            Membership::None => false,
            Membership::All => true,
            Membership::Finite { coords } => coords.contains(c),
            Membership::Cofinite { coords } => !coords.contains(c),
            Membership::Schematic { .. } => true,
            Membership::DenseCodense { part } => *part == Part::Rational,
        }
    }

    /// Behaviour near a limit end of the segment, as seen by one formula.
    pub fn germ(&self) -> Germ {
        match self {
            Membership::None | Membership::Finite { .. } | Membership::Schematic { .. } => Germ::Empty,
            Membership::All | Membership::Cofinite { .. } => Germ::Full,
            Membership::DenseCodense { .. } => Germ::Mixed,
        }
    }

    fn supported_on(&self, seg: Segment) -> bool {
        match self {
            Membership::DenseCodense { .. } => seg.is_dense(),
            Membership::Cofinite { .. } => seg.is_discrete(),
            Membership::Finite { coords } => coords.iter().all(|c| seg.admits(c)),
            _ => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Germ {
    Empty,
    Full,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegRule {
    pub seg: usize,
    pub member: Membership,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourRule {
    pub name: String,
    pub rules: Vec<SegRule>,
}

impl ColourRule {
    pub fn on(&self, seg: usize) -> Membership {
        self.rules.iter().rev().find(|r| r.seg == seg).map(|r| r.member.clone()).unwrap_or(Membership::None)
    }

    pub fn is_schematic(&self) -> bool {
        self.rules.iter().any(|r| matches!(r.member, Membership::Schematic { .. }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub colours: Vec<ColourRule>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
    Interior,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CutKind {
    MinusInf,
    PlusInf,
    PrincipalPlus { pos: Pos },
    PrincipalMinus { pos: Pos },
    /// Between segment `after` and segment `after + 1`.
    SegmentBoundary { after: usize },
    LimitOfSegment { seg: usize, side: Side },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum Definability {
    Definable { rule: String, witness: String },
    NotDefinable { rule: String, reason: String },
    Unknown { reason: String },
}

impl Definability {
    pub fn is_definable(&self) -> bool {
        matches!(self, Definability::Definable { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub kind: CutKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub definable: Option<Definability>,
}

impl Cut {
    pub fn new(kind: CutKind) -> Cut {
        Cut { kind, definable: None }
    }
}

impl ChainSpec {
    pub fn new(segments: Vec<Segment>) -> ChainSpec {
        ChainSpec { segments, colours: Vec::new() }
    }

    pub fn single(seg: Segment) -> ChainSpec {
        ChainSpec::new(vec![seg])
    }

    pub fn with_colour(mut self, name: &str, rules: Vec<(usize, Membership)>) -> ChainSpec {
        self.colours.push(ColourRule {
            name: name.to_string(),
            rules: rules.into_iter().map(|(seg, member)| SegRule { seg, member }).collect(),
        });
        self
    }

    /// The spine of the trivial group: only ∞.
    pub fn trivial() -> ChainSpec {
        ChainSpec::new(vec![Segment::Fin { k: 0 }])
    }

    pub fn is_trivial(&self) -> bool {
        self.segments.iter().all(|s| *s == Segment::Fin { k: 0 })
    }

    pub fn is_finite(&self) -> bool {
        self.segments.iter().all(|s| s.is_finite())
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        if self.segments.is_empty() {
            return Err(ChainError::Malformed("empty segment list".into()));
        }
        if self.segments.len() > 1 && self.segments.contains(&Segment::Fin { k: 0 }) {
            return Err(ChainError::Malformed("Fin(0) is reserved for the trivial spine".into()));
        }
        for c in &self.colours {
            for r in &c.rules {
                let seg = *self
                    .segments
                    .get(r.seg)
                    .ok_or_else(|| ChainError::Malformed(format!("colour {} names missing segment {}", c.name, r.seg)))?;
                if !r.member.supported_on(seg) {
                    return Err(ChainError::Malformed(format!("colour {} has an invalid rule on segment {}", c.name, r.seg)));
                }
            }
        }
        Ok(())
    }

    pub fn bind(&self, mut p: Pos) -> Pos {
        p.rev = self.segments.get(p.seg).map(|s| s.reversed()).unwrap_or(false);
        p
    }

    pub fn pos(&self, seg: usize, coord: i64) -> Pos {
        self.bind(Pos::at(seg, coord))
    }

    pub fn check(&self, p: &Pos) -> Result<Pos, ChainError> {
        match self.segments.get(p.seg) {
            Some(s) if s.admits(&p.coord) => Ok(self.bind(*p)),
            _ => Err(ChainError::PositionOutOfDomain(p.to_string())),
        }
    }

    pub fn compare_positions(&self, a: &Point, b: &Point) -> Result<Ordering, ChainError> {
        match (a, b) {
            (Point::Inf, Point::Inf) => Ok(Ordering::Equal),
            (Point::Inf, Point::At(p)) => self.check(p).map(|_| Ordering::Greater),
            (Point::At(p), Point::Inf) => self.check(p).map(|_| Ordering::Less),
            (Point::At(p), Point::At(r)) => Ok(self.check(p)?.cmp(&self.check(r)?)),
        }
    }

    /// Whether `p` carries colour `name`.
    pub fn has_colour(&self, name: &str, p: &Pos) -> bool {
        self.colours.iter().filter(|c| c.name == name).any(|c| c.on(p.seg).contains(&p.coord))
    }

    pub fn first_position(&self) -> Option<Pos> {
        let (i, s) = self.segments.iter().enumerate().find(|(_, s)| **s != Segment::Fin { k: 0 })?;
        let coord = match s {
            Segment::Omega | Segment::Fin { .. } => Q::zero(),
            _ => q(1),
        };
        Some(self.bind(Pos::new(i, coord)))
    }

    /// One representative of every cut class the rule table distinguishes.
    pub fn enumerate_cuts(&self) -> Vec<Cut> {
        let mut cuts = vec![Cut::new(CutKind::MinusInf)];
        if let Some(p) = self.first_position() {
            cuts.push(Cut::new(CutKind::PrincipalPlus { pos: p }));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if *s == Segment::DenseQ {
                cuts.push(Cut::new(CutKind::LimitOfSegment { seg: i, side: Side::Interior }));
            }
            if i + 1 < self.segments.len() {
                cuts.push(Cut::new(CutKind::SegmentBoundary { after: i }));
            }
        }
        cuts.push(Cut::new(CutKind::PlusInf));
        cuts
    }

    pub fn classify_cut(&self, cut: &Cut) -> Result<Cut, ChainError> {
        let definable = match &cut.kind {
            CutKind::MinusInf | CutKind::PlusInf => Definability::Definable {
                rule: "end-cut".into(),
                witness: "defined by x = x or x != x".into(),
            },
            CutKind::PrincipalPlus { pos } | CutKind::PrincipalMinus { pos } => {
                self.check(pos)?;
                Definability::Definable { rule: "principal".into(), witness: format!("x <= {pos} or x < {pos}") }
            }
            CutKind::SegmentBoundary { after } => self.boundary(*after)?,
            CutKind::LimitOfSegment { seg, side } => {
                let s = *self.segments.get(*seg).ok_or_else(|| ChainError::MalformedCut(format!("no segment {seg}")))?;
                match side {
                    Side::Interior if s == Segment::DenseQ => Definability::NotDefinable {
                        rule: "irrational-cut".into(),
                        reason: format!("a gap inside the dense segment {seg} has no endpoint, and colour classes cannot pin it down"),
                    },
                    Side::Interior => {
                        return Err(ChainError::MalformedCut(format!("segment {} has no interior non-principal cuts", s.name())))
                    }
                    Side::Lower if *seg == 0 => return self.classify_cut(&Cut::new(CutKind::MinusInf)).map(|c| Cut { kind: cut.kind.clone(), ..c }),
                    Side::Lower => self.boundary(seg - 1)?,
                    Side::Upper if seg + 1 == self.segments.len() => {
                        return self.classify_cut(&Cut::new(CutKind::PlusInf)).map(|c| Cut { kind: cut.kind.clone(), ..c })
                    }
                    Side::Upper => self.boundary(*seg)?,
                }
            }
        };
        Ok(Cut { kind: cut.kind.clone(), definable: Some(definable) })
    }

    fn boundary(&self, after: usize) -> Result<Definability, ChainError> {
        if after + 1 >= self.segments.len() {
            return Err(ChainError::MalformedCut(format!("no boundary after segment {after}")));
        }
        let (l, r) = (self.segments[after], self.segments[after + 1]);
        if l.has_max() {
            return Ok(Definability::Definable {
                rule: "principal".into(),
                witness: format!("x <= max of segment {after}"),
            });
        }
        if r.has_min() {
            return Ok(Definability::Definable {
                rule: "principal".into(),
                witness: format!("x < min of segment {}", after + 1),
            });
        }
        for c in &self.colours {
            let (ml, mr) = (c.on(after), c.on(after + 1));
            if !ml.supported_on(l) || !mr.supported_on(r) {
                return Ok(Definability::Unknown { reason: format!("colour {} has a shape outside the rule table", c.name) });
            }
            if c.is_schematic() {
                continue;
            }
            let (gl, gr) = (ml.germ(), mr.germ());
            if gl != gr {
                return Ok(Definability::Definable {
                    rule: "colour-separation".into(),
                    witness: format!("colour {} is {:?} below the gap and {:?} above it", c.name, gl, gr).to_lowercase(),
                });
            }
        }
        if l.is_discrete() != r.is_discrete() {
            return Ok(Definability::Definable {
                rule: "local-order-type".into(),
                witness: format!("{} and {} differ in having immediate successors", l.name(), r.name()),
            });
        }
        let schematic = self.colours.iter().any(|c| c.is_schematic());
        Ok(Definability::NotDefinable {
            rule: "homogeneous-gap".into(),
            reason: if schematic {
                format!(
                    "{} + {}: one formula uses finitely many colours of the schematic family, none of which separates the sides near the gap",
                    l.name(),
                    r.name()
                )
            } else {
                format!("{} + {}: no colour and no order property separates the sides near the gap", l.name(), r.name())
            },
        })
    }

    pub fn chain_stably_embedded(&self) -> Verdict {
        let mut reasons: Vec<Reason> = Vec::new();
        let mut unknown = None;
        for cut in self.enumerate_cuts() {
            let classified = match self.classify_cut(&cut) {
                Ok(c) => c,
                Err(e) => return Verdict::new(Status::Unknown, vec![Reason::new("spine.malformed", Outcome::Unknown, e.to_string())]),
            };
            match classified.definable.clone().unwrap() {
                Definability::NotDefinable { rule, reason } => {
                    let witness = serde_json::to_value(&classified).unwrap();
                    return Verdict::new(
                        Status::NotStablyEmbedded,
                        vec![Reason::new(&format!("spine.{rule}"), Outcome::Fail, reason).with_witness(witness)],
                    );
                }
                Definability::Unknown { reason } => {
                    unknown.get_or_insert((classified, reason));
                }
                Definability::Definable { rule, witness } => {
                    let name = format!("spine.{rule}");
                    if !reasons.iter().any(|r| r.rule == name) {
                        reasons.push(Reason::new(&name, Outcome::Pass, witness));
                    }
                }
            }
        }
        if let Some((cut, reason)) = unknown {
            return Verdict::new(
                Status::Unknown,
                vec![Reason::new("spine.outside-rule-table", Outcome::Unknown, reason).with_witness(serde_json::to_value(&cut).unwrap())],
            );
        }
        for (i, s) in self.segments.iter().enumerate() {
            if *s == Segment::DenseComplete {
                let codense = self.colours.iter().any(|c| matches!(c.on(i), Membership::DenseCodense { .. }));
                let detail = if codense {
                    format!("segment {i} is complete and dense; its dense-codense colours add no non-principal cut")
                } else {
                    format!("segment {i} is complete and dense; every interior cut is principal")
                };
                reasons.push(Reason::new(if codense { "spine.dense-codense" } else { "spine.complete-dense" }, Outcome::Pass, detail));
            }
        }
        Verdict::new(Status::StablyEmbedded, reasons)
    }

    /// Concatenation; colours with equal names are merged.
    pub fn ordered_sum(&self, other: &ChainSpec) -> ChainSpec {
        let shift = self.segments.len();
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().copied());
        let mut colours = self.colours.clone();
        for c in &other.colours {
            let moved: Vec<SegRule> = c.rules.iter().map(|r| SegRule { seg: r.seg + shift, member: r.member.clone() }).collect();
            match colours.iter_mut().find(|x| x.name == c.name) {
                Some(x) => x.rules.extend(moved),
                None => colours.push(ColourRule { name: c.name.clone(), rules: moved }),
            }
        }
        ChainSpec { segments, colours }.normalize().0
    }

    /// Drops `Fin(0)` segments and fuses adjacent finite segments. Returns
    /// the normalized chain and the old-to-new position map data.
    pub fn normalize(&self) -> (ChainSpec, Vec<(usize, i64)>) {
        let mut segments: Vec<Segment> = Vec::new();
        let mut map = Vec::new();
        for s in &self.segments {
            let n = segments.len();
            match (s, segments.last_mut()) {
                (Segment::Fin { k: 0 }, _) => map.push((n.saturating_sub(1), 0)),
                (Segment::Fin { k }, Some(Segment::Fin { k: prev })) => {
                    map.push((n - 1, *prev as i64));
                    *prev += k;
                }
                _ => {
                    map.push((segments.len(), 0));
                    segments.push(*s);
                }
            }
        }
        if segments.is_empty() {
            return (ChainSpec::trivial(), map);
        }
        let mut colours: Vec<ColourRule> = Vec::new();
        for c in &self.colours {
            let mut rules: Vec<SegRule> = Vec::new();
            for r in &c.rules {
                let (ns, off) = map[r.seg];
                let old = self.segments[r.seg];
                let member = match (&r.member, old) {
                    (m, Segment::Fin { k }) => {
                        let coords: Vec<Q> = (0..k as i64).filter(|i| m.contains(&q(*i))).map(|i| q(i + off)).collect();
                        Membership::Finite { coords }
                    }
                    (m, _) => m.clone(),
                };
                match rules.iter_mut().find(|x| x.seg == ns) {
                    Some(SegRule { member: Membership::Finite { coords }, .. }) => {
                        if let Membership::Finite { coords: more } = member {
                            coords.extend(more);
                        }
                    }
                    _ => rules.push(SegRule { seg: ns, member }),
                }
            }
            colours.push(ColourRule { name: c.name.clone(), rules });
        }
        (ChainSpec { segments, colours }, map)
    }

    /// Image of a position of `self` in `self.normalize().0`.
    pub fn normalized_position(&self, p: &Pos) -> Pos {
        let (n, map) = self.normalize();
        let (seg, off) = map[p.seg];
        n.bind(Pos::new(seg, p.coord + q(off)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega_plus_omega_star() -> ChainSpec {
        ChainSpec::new(vec![Segment::Omega, Segment::OmegaStar])
    }

    #[test]
    fn compare_basic() {
        let c = ChainSpec::single(Segment::Omega);
        let a = Point::At(Pos::at(0, 2));
        let b = Point::At(Pos::at(0, 5));
        assert_eq!(c.compare_positions(&a, &b), Ok(Ordering::Less));
        assert_eq!(c.compare_positions(&a, &Point::Inf), Ok(Ordering::Less));
        assert!(c.compare_positions(&Point::At(Pos::at(0, -1)), &a).is_err());
    }

    #[test]
    fn compare_across_omega_plus_omega_star() {
        // Brute-force order on a prefix of ω + ω*: every ω point precedes
        // every ω* point, and ω* coordinates count down from the top.
        let c = omega_plus_omega_star();
        let mut sample = Vec::new();
        for n in 0..8 {
            sample.push((0usize, n as i64, n as i64));
        }
        for n in 0..8 {
            sample.push((1usize, n as i64, 1000 - n as i64));
        }
        for (sa, ca, ra) in &sample {
            for (sb, cb, rb) in &sample {
                let got = c.compare_positions(&Point::At(Pos::at(*sa, *ca)), &Point::At(Pos::at(*sb, *cb))).unwrap();
                assert_eq!(got, ra.cmp(rb));
            }
        }
        let got = c.compare_positions(&Point::At(Pos::at(0, 7)), &Point::At(Pos::at(1, 3))).unwrap();
        assert_eq!(got, Ordering::Less);
    }

    #[test]
    fn cuts_on_catalogue_chains() {
        let omega = ChainSpec::single(Segment::Omega);
        let plus = omega.classify_cut(&Cut::new(CutKind::PlusInf)).unwrap();
        assert!(plus.definable.unwrap().is_definable());

        let c = omega_plus_omega_star();
        let mid = c.classify_cut(&Cut::new(CutKind::SegmentBoundary { after: 0 })).unwrap();
        assert!(matches!(mid.definable, Some(Definability::NotDefinable { .. })));

        let coloured = c.clone().with_colour("P", vec![(0, Membership::All)]);
        let mid = coloured.classify_cut(&Cut::new(CutKind::SegmentBoundary { after: 0 })).unwrap();
        assert!(mid.definable.unwrap().is_definable());
    }

    #[test]
    fn stable_embeddedness_of_chains() {
        assert_eq!(ChainSpec::single(Segment::Omega).chain_stably_embedded().status, Status::StablyEmbedded);
        let g3 = omega_plus_omega_star().with_colour(
            "p_n",
            vec![(0, Membership::Schematic { family: "p".into() }), (1, Membership::Schematic { family: "p".into() })],
        );
        let v = g3.chain_stably_embedded();
        assert_eq!(v.status, Status::NotStablyEmbedded);
        assert_eq!(v.reasons[0].witness.as_ref().unwrap()["kind"]["kind"], "SegmentBoundary");
        let reals = ChainSpec::single(Segment::DenseComplete)
            .with_colour("A", vec![(0, Membership::DenseCodense { part: Part::Rational })])
            .with_colour("B", vec![(0, Membership::DenseCodense { part: Part::Irrational })]);
        assert_eq!(reals.chain_stably_embedded().status, Status::StablyEmbedded);
        assert_eq!(ChainSpec::single(Segment::DenseQ).chain_stably_embedded().status, Status::NotStablyEmbedded);
    }

    #[test]
    fn sums() {
        let w = ChainSpec::single(Segment::Omega);
        let ws = ChainSpec::single(Segment::OmegaStar);
        assert_eq!(w.ordered_sum(&ws).segments, vec![Segment::Omega, Segment::OmegaStar]);
        assert_eq!(w.ordered_sum(&ChainSpec::trivial()), w);
        let f = ChainSpec::single(Segment::Fin { k: 2 }).ordered_sum(&ChainSpec::single(Segment::Fin { k: 3 }));
        assert_eq!(f.segments, vec![Segment::Fin { k: 5 }]);
    }

    #[test]
    fn finite_sum_is_order_isomorphic_to_fin5() {
        let raw = ChainSpec::new(vec![Segment::Fin { k: 2 }, Segment::Fin { k: 3 }]);
        let pts: Vec<Pos> = (0..2).map(|i| raw.pos(0, i)).chain((0..3).map(|i| raw.pos(1, i))).collect();
        let images: Vec<Pos> = pts.iter().map(|p| raw.normalized_position(p)).collect();
        for (i, a) in pts.iter().enumerate() {
            for (j, b) in pts.iter().enumerate() {
                assert_eq!(a.cmp(b), images[i].cmp(&images[j]));
            }
        }
        assert_eq!(images.iter().map(|p| p.coord).collect::<Vec<_>>(), (0..5).map(q).collect::<Vec<_>>());
    }
}
