//! Presentations of ordered abelian groups inside Hahn products, and exact
//! element arithmetic.
//!
//! An element is a finite list of non-zero coordinates plus an optional
//! constant tail on the terminal ω segment: the coordinate at tail position
//! `j` is `fin(j) + tail`. The representation is canonical, so equality is
//! syntactic.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{nth_prime, prime_factors, prime_index, q, q_serde, Coef, TailLattice, Q};
use crate::chain::{ChainError, ChainSpec, Membership, Part, Pos, Segment};
use crate::rib::RibSpec;

#[derive(Debug, Error, PartialEq)]
pub enum GroupError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("malformed presentation: {0}")]
    Malformed(String),
    #[error("malformed element: {0}")]
    BadElement(String),
    #[error("element is not in the group: {0}")]
    NotMember(String),
    #[error("no rib assigned at position {0}")]
    NoRib(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selector {
    All,
    Seg(usize),
    At(usize, Q),
    Colour(String),
}

impl Serialize for Selector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Selector::All => s.serialize_str("all"),
            Selector::Seg(i) => json!({ "seg": i }).serialize(s),
            Selector::At(i, c) => json!({ "seg": i, "coord": q_serde::to_json(c) }).serialize(s),
            Selector::Colour(n) => json!({ "colour": n }).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Selector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        if v.as_str() == Some("all") {
            return Ok(Selector::All);
        }
        if let Some(c) = v.get("colour").and_then(|c| c.as_str()) {
            return Ok(Selector::Colour(c.to_string()));
        }
        let seg = v.get("seg").and_then(|s| s.as_u64()).ok_or_else(|| D::Error::custom("selector must be \"all\", {\"seg\"}, {\"seg\",\"coord\"} or {\"colour\"}"))?;
        match v.get("coord") {
            Some(c) => Ok(Selector::At(seg as usize, q_serde::from_json(c).map_err(D::Error::custom)?)),
            None => Ok(Selector::Seg(seg as usize)),
        }
    }
}

/// A rib, or the prime-indexed family `n ↦ Z_(p_n)` on ω or ω* coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RibSource {
    Fixed(RibSpec),
    Family { cut_complete: bool },
}

impl RibSource {
    fn label(&self) -> String {
        match self {
            RibSource::Fixed(r) => r.label(),
            RibSource::Family { .. } => "Z_(p_n)".into(),
        }
    }
}

impl Serialize for RibSource {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RibSource::Fixed(r) => r.serialize(s),
            RibSource::Family { cut_complete } => json!({ "family": { "kind": "prime_index", "cut_complete": cut_complete } }).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for RibSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        if let Some(f) = v.get("family") {
            if f.get("kind").and_then(|k| k.as_str()) != Some("prime_index") {
                return Err(D::Error::custom("only the prime_index family is catalogued"));
            }
            let cut_complete = f.get("cut_complete").and_then(|c| c.as_bool()).unwrap_or(true);
            return Ok(RibSource::Family { cut_complete });
        }
        serde_json::from_value(v).map(RibSource::Fixed).map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RibAssign {
    pub on: Selector,
    pub rib: RibSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    #[serde(default)]
    pub prefix: Vec<Coef>,
    pub tail: Coef,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Hahn,
    Sum,
    Generators(Vec<Generator>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub spine: ChainSpec,
    pub ribs: Vec<RibAssign>,
    pub mode: Mode,
}

/// Rib data of one segment: the rib at a generic point of the rational
/// part, at a generic irrational point (dense segments), and at explicitly
/// mentioned coordinates where it differs.
#[derive(Clone, Debug, PartialEq)]
pub struct SegProfile {
    pub seg: usize,
    pub generic: RibSource,
    pub irrational: Option<RibSource>,
    pub exceptions: Vec<(Q, RibSource)>,
}

impl SegProfile {
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "seg": self.seg, "generic": self.generic.label() });
        if let Some(i) = &self.irrational {
            v["irrational"] = json!(i.label());
        }
        if !self.exceptions.is_empty() {
            v["exceptions"] = Value::Array(self.exceptions.iter().map(|(c, r)| json!([q_serde::to_json(c), r.label()])).collect());
        }
        v
    }

    /// Every rib occurring on the segment; families list their first terms.
    pub fn sources(&self) -> Vec<&RibSource> {
        let mut out = vec![&self.generic];
        out.extend(self.irrational.iter());
        out.extend(self.exceptions.iter().map(|(_, r)| r));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Elem {
    pub fin: Vec<(Pos, Coef)>,
    /// Constant tail on segment `.0`, never zero.
    pub tail: Option<(usize, Coef)>,
}

impl Elem {
    pub fn zero() -> Elem {
        Elem::default()
    }

    pub fn single(p: Pos, c: Coef) -> Elem {
        Elem::from_pairs(vec![(p, c)], None)
    }

    pub fn from_pairs(mut pairs: Vec<(Pos, Coef)>, tail: Option<(usize, Coef)>) -> Elem {
        pairs.sort_by_key(|a| a.0);
        let mut fin: Vec<(Pos, Coef)> = Vec::with_capacity(pairs.len());
        for (p, c) in pairs {
            match fin.last_mut() {
                Some((lp, lc)) if *lp == p => *lc = *lc + c,
                _ => fin.push((p, c)),
            }
        }
        fin.retain(|(_, c)| !c.is_zero());
        Elem { fin, tail: tail.filter(|(_, t)| !t.is_zero()) }
    }

    pub fn is_zero(&self) -> bool {
        self.fin.is_empty() && self.tail.is_none()
    }

    pub fn tail_value(&self) -> Coef {
        self.tail.map(|t| t.1).unwrap_or_else(Coef::zero)
    }

    pub fn value_at(&self, p: &Pos) -> Coef {
        let f = self.fin.binary_search_by(|(x, _)| x.cmp(p)).map(|i| self.fin[i].1).unwrap_or_else(|_| Coef::zero());
        match self.tail {
            Some((s, t)) if s == p.seg && !p.coord.is_negative() => f + t,
            _ => f,
        }
    }

    fn merge(&self, other: &Elem, k: i64) -> Elem {
        let mut out: Vec<(Pos, Coef)> = Vec::with_capacity(self.fin.len() + other.fin.len());
        let (mut i, mut j) = (0, 0);
        while i < self.fin.len() || j < other.fin.len() {
            let ord = match (self.fin.get(i), other.fin.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(self.fin[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((other.fin[j].0, other.fin[j].1 * k));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = self.fin[i].1 + other.fin[j].1 * k;
                    if !c.is_zero() {
                        out.push((self.fin[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        let tail = match (self.tail, other.tail) {
            (None, None) => None,
            (Some(t), None) => Some(t),
            (None, Some((s, t))) => Some((s, t * k)),
            (Some((s, a)), Some((_, b))) => Some((s, a + b * k)),
        };
        Elem { fin: out, tail: tail.filter(|(_, t)| !t.is_zero()) }
    }

    pub fn add(&self, other: &Elem) -> Elem {
        self.merge(other, 1)
    }

    pub fn sub(&self, other: &Elem) -> Elem {
        self.merge(other, -1)
    }

    pub fn neg(&self) -> Elem {
        self.scale(-1)
    }

    pub fn scale(&self, n: i64) -> Elem {
        if n == 0 {
            return Elem::zero();
        }
        Elem { fin: self.fin.iter().map(|(p, c)| (*p, *c * n)).collect(), tail: self.tail.map(|(s, t)| (s, t * n)) }
    }

    pub fn div(&self, m: i64) -> Elem {
        Elem { fin: self.fin.iter().map(|(p, c)| (*p, c.div_int(m))).collect(), tail: self.tail.map(|(s, t)| (s, t.div_int(m))) }
    }

    /// The element with every coordinate strictly below `p` removed.
    pub fn truncate_below(&self, p: &Pos) -> Elem {
        let mut fin: Vec<(Pos, Coef)> = self.fin.iter().filter(|(x, _)| x >= p).copied().collect();
        if let Some((s, t)) = self.tail {
            if s == p.seg {
                let upto = p.coord.ceil().to_integer().max(0);
                for j in 0..upto {
                    let at = Pos { seg: s, coord: q(j), rev: false };
                    fin.push((at, -t));
                }
            } else if s < p.seg {
                return Elem::from_pairs(fin, None);
            }
        }
        Elem::from_pairs(fin, self.tail)
    }

    /// The coordinates strictly below `p`, as an element.
    pub fn prefix_below(&self, p: &Pos) -> Elem {
        self.sub(&self.truncate_below(p))
    }

    /// Rewrites segment indices (for embedding `G` into `H`).
    pub fn map_segments(&self, f: impl Fn(usize) -> usize, rev: impl Fn(usize) -> bool) -> Elem {
        let fin = self.fin.iter().map(|(p, c)| (Pos { seg: f(p.seg), coord: p.coord, rev: rev(f(p.seg)) }, *c)).collect();
        Elem::from_pairs(fin, self.tail.map(|(s, t)| (f(s), t)))
    }

    /// Coordinates at every listed position of the finite part, then at
    /// tail positions `0..horizon`; only non-zero entries are returned.
    pub fn entries(&self, horizon: u64) -> Vec<(Pos, Coef)> {
        let Some((ts, t)) = self.tail else {
            return self.fin.clone();
        };
        let mut out: Vec<(Pos, Coef)> = self.fin.iter().filter(|(p, _)| p.seg < ts).copied().collect();
        let on_tail: Vec<&(Pos, Coef)> = self.fin.iter().filter(|(p, _)| p.seg == ts).collect();
        let mut k = 0;
        for j in 0..horizon {
            let mut v = t;
            while k < on_tail.len() && on_tail[k].0.coord < q(j as i64) {
                k += 1;
            }
            if k < on_tail.len() && on_tail[k].0.coord == q(j as i64) {
                v = v + on_tail[k].1;
            }
            if !v.is_zero() {
                out.push((Pos { seg: ts, coord: q(j as i64), rev: false }, v));
            }
        }
        out
    }

    pub fn max_tail_coord(&self) -> u64 {
        match self.tail {
            Some((ts, _)) => self.fin.iter().filter(|(p, _)| p.seg == ts).map(|(p, _)| p.coord.to_integer() as u64 + 1).max().unwrap_or(0),
            None => 0,
        }
    }
}

fn generic_member(m: &Membership, part: Part) -> bool {
    match m {
        Membership::None | Membership::Finite { .. } => false,
        Membership::All | Membership::Cofinite { .. } | Membership::Schematic { .. } => true,
        Membership::DenseCodense { part: p } => *p == part,
    }
}

impl GroupSpec {
    pub fn new(spine: ChainSpec, ribs: Vec<RibAssign>, mode: Mode) -> Result<GroupSpec, GroupError> {
        let g = GroupSpec { spine, ribs, mode };
        g.validate()?;
        Ok(g)
    }

    /// One rib everywhere.
    pub fn uniform(spine: ChainSpec, rib: RibSpec, mode: Mode) -> GroupSpec {
        GroupSpec::new(spine, vec![RibAssign { on: Selector::All, rib: RibSource::Fixed(rib) }], mode).expect("uniform presentation")
    }

    /// `Fin(k)` spine with the listed ribs, one per position.
    pub fn finite(ribs: Vec<RibSpec>, mode: Mode) -> GroupSpec {
        let spine = if ribs.is_empty() { ChainSpec::trivial() } else { ChainSpec::single(Segment::Fin { k: ribs.len() as u32 }) };
        let assigns = ribs
            .into_iter()
            .enumerate()
            .map(|(i, r)| RibAssign { on: Selector::At(0, q(i as i64)), rib: RibSource::Fixed(r) })
            .collect();
        GroupSpec::new(spine, assigns, mode).expect("finite presentation")
    }

    pub fn from_json(v: &Value) -> Result<GroupSpec, GroupError> {
        let g: GroupSpec = serde_json::from_value(v.clone()).map_err(|e| GroupError::Malformed(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("presentation serializes")
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        self.spine.validate()?;
        let nseg = self.spine.segments.len();
        for a in &self.ribs {
            match &a.on {
                Selector::Seg(i) | Selector::At(i, _) if *i >= nseg => {
                    return Err(GroupError::Malformed(format!("rib selector names missing segment {i}")))
                }
                Selector::Colour(n) if !self.spine.colours.iter().any(|c| &c.name == n) => {
                    return Err(GroupError::Malformed(format!("rib selector names unknown colour {n}")))
                }
                _ => {}
            }
            if let RibSource::Fixed(r) = &a.rib {
                r.validate().map_err(GroupError::Malformed)?;
            }
        }
        if self.spine.is_trivial() {
            return Ok(());
        }
        for (i, seg) in self.spine.segments.iter().enumerate() {
            let p = self.profile(i);
            let family = p.sources().iter().any(|s| matches!(s, RibSource::Family { .. }));
            if family && !matches!(seg, Segment::Omega | Segment::OmegaStar) {
                return Err(GroupError::Malformed(format!("the prime family needs an ω or ω* segment, not {}", seg.name())));
            }
            let sample = if seg.has_min() { q(0) } else { q(1) };
            if self.source_at(&self.spine.bind(Pos::new(i, sample))).is_none() {
                return Err(GroupError::NoRib(format!("segment {i}")));
            }
            for (c, _) in &p.exceptions {
                if !seg.admits(c) {
                    return Err(GroupError::Malformed(format!("rib selector coordinate outside segment {i}")));
                }
            }
        }
        if let Mode::Generators(gens) = &self.mode {
            let ts = self.tail_seg().ok_or_else(|| GroupError::Malformed("generators need a terminal ω segment".into()))?;
            for gen in gens {
                if gen.tail.is_zero() {
                    return Err(GroupError::Malformed(format!("generator {} has a zero tail", gen.name)));
                }
                let far = self.spine.bind(Pos::at(ts, (self.base_horizon() + 64) as i64));
                let rib = self.rib_at(&far).ok_or_else(|| GroupError::NoRib(far.to_string()))?;
                if !rib.contains(&gen.tail) {
                    return Err(GroupError::Malformed(format!("tail of generator {} lies outside the rib", gen.name)));
                }
                if gen.prefix.iter().any(|c| c.d != gen.tail.d) {
                    return Err(GroupError::Malformed(format!("prefix of generator {} must share the infinite part of its tail", gen.name)));
                }
                for (j, c) in gen.prefix.iter().enumerate() {
                    let p = self.spine.pos(ts, j as i64);
                    let rib = self.rib_at(&p).ok_or_else(|| GroupError::NoRib(p.to_string()))?;
                    if !rib.contains(c) {
                        return Err(GroupError::Malformed(format!("prefix of generator {} leaves the rib at {p}", gen.name)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn generators(&self) -> &[Generator] {
        match &self.mode {
            Mode::Generators(g) => g,
            _ => &[],
        }
    }

    pub fn tail_lattice(&self) -> TailLattice {
        let tails: Vec<Coef> = self.generators().iter().map(|g| g.tail).collect();
        TailLattice::new(&tails)
    }

    /// The terminal ω segment, which carries tails.
    pub fn tail_seg(&self) -> Option<usize> {
        let n = self.spine.segments.len();
        (n > 0 && self.spine.segments[n - 1] == Segment::Omega).then(|| n - 1)
    }

    fn matches(&self, sel: &Selector, p: &Pos) -> bool {
        match sel {
            Selector::All => true,
            Selector::Seg(i) => p.seg == *i,
            Selector::At(i, c) => p.seg == *i && p.coord == *c,
            Selector::Colour(n) => self.spine.has_colour(n, p),
        }
    }

    fn matches_generic(&self, sel: &Selector, seg: usize, part: Part) -> bool {
        match sel {
            Selector::All => true,
            Selector::Seg(i) => seg == *i,
            Selector::At(..) => false,
            Selector::Colour(n) => self.spine.colours.iter().filter(|c| &c.name == n).any(|c| generic_member(&c.on(seg), part)),
        }
    }

    pub fn source_at(&self, p: &Pos) -> Option<&RibSource> {
        self.ribs.iter().rev().find(|a| self.matches(&a.on, p)).map(|a| &a.rib)
    }

    pub fn rib_at(&self, p: &Pos) -> Option<Cow<'_, RibSpec>> {
        match self.source_at(p)? {
            RibSource::Fixed(r) => Some(Cow::Borrowed(r)),
            RibSource::Family { cut_complete } => {
                let n = p.coord.to_integer().max(0) as usize;
                Some(Cow::Owned(RibSpec::z_loc(nth_prime(n), *cut_complete)))
            }
        }
    }

    pub fn rib(&self, p: &Pos) -> Result<Cow<'_, RibSpec>, GroupError> {
        self.rib_at(p).ok_or_else(|| GroupError::NoRib(p.to_string()))
    }

    fn generic_source(&self, seg: usize, part: Part) -> Option<&RibSource> {
        self.ribs.iter().rev().find(|a| self.matches_generic(&a.on, seg, part)).map(|a| &a.rib)
    }

    /// Coordinates on `seg` named explicitly by selectors or colour rules.
    fn mentioned(&self, seg: usize) -> BTreeSet<Q> {
        let mut out = BTreeSet::new();
        for a in &self.ribs {
            if let Selector::At(i, c) = &a.on {
                if *i == seg {
                    out.insert(*c);
                }
            }
        }
        for c in &self.spine.colours {
            if let Membership::Finite { coords } | Membership::Cofinite { coords } = c.on(seg) {
                out.extend(coords);
            }
        }
        out
    }

    pub fn profile(&self, seg: usize) -> SegProfile {
        let s = self.spine.segments[seg];
        let fallback = RibSource::Fixed(RibSpec::z());
        let generic = self.generic_source(seg, Part::Rational).cloned().unwrap_or_else(|| fallback.clone());
        let irrational = if s.is_dense() {
            self.generic_source(seg, Part::Irrational).filter(|r| **r != generic).cloned()
        } else {
            None
        };
        let exceptions = self
            .mentioned(seg)
            .into_iter()
            .filter_map(|c| {
                let r = self.source_at(&self.spine.bind(Pos::new(seg, c)))?;
                (*r != generic).then(|| (c, r.clone()))
            })
            .collect();
        SegProfile { seg, generic, irrational, exceptions }
    }

    pub fn profiles(&self) -> Vec<SegProfile> {
        if self.spine.is_trivial() {
            return Vec::new();
        }
        (0..self.spine.segments.len()).map(|i| self.profile(i)).collect()
    }

    /// Tail coordinate from which ribs and generator prefixes are constant
    /// (families aside).
    pub fn base_horizon(&self) -> u64 {
        let Some(ts) = self.tail_seg() else { return 0 };
        let mentioned = self.mentioned(ts).iter().map(|c| c.to_integer() as u64 + 1).max().unwrap_or(0);
        let prefixes = self.generators().iter().map(|g| g.prefix.len() as u64).max().unwrap_or(0);
        mentioned.max(prefixes)
    }

    fn tail_family(&self) -> bool {
        self.tail_seg().map(|ts| matches!(self.profile(ts).generic, RibSource::Family { .. })).unwrap_or(false)
    }

    /// Scan horizon for `e` and modulus `m`: past it every tail coordinate of
    /// `e` behaves alike with respect to membership and `m`-divisibility.
    pub fn horizon(&self, e: &Elem, m: u64) -> u64 {
        let mut h = self.base_horizon().max(e.max_tail_coord());
        if self.tail_family() {
            let t = e.tail_value();
            let mut primes = prime_factors(m.max(1));
            for x in [t.s, t.d] {
                primes.extend(prime_factors(x.denom().unsigned_abs()));
            }
            if let Some(top) = primes.into_iter().filter_map(prime_index).max() {
                h = h.max(top as u64 + 1);
            }
        }
        h
    }

    pub fn tail_pos(&self, j: u64) -> Option<Pos> {
        self.tail_seg().map(|ts| self.spine.pos(ts, j as i64))
    }

    pub fn parse_elem(&self, v: &Value) -> Result<Elem, GroupError> {
        let bad = |m: &str| GroupError::BadElement(m.to_string());
        let obj = v.as_object().ok_or_else(|| bad("elements are JSON objects"))?;
        if let Some(k) = obj.keys().find(|k| !["finite", "tail", "gens"].contains(&k.as_str())) {
            return Err(bad(&format!("unknown element key {k:?}")));
        }
        let mut pairs = Vec::new();
        if let Some(fin) = v.get("finite") {
            for item in fin.as_array().ok_or_else(|| bad("\"finite\" must be a list"))? {
                let pair = item.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("finite entries are [position, value] pairs"))?;
                let p = Pos::from_json(&pair[0]).map_err(GroupError::BadElement)?;
                let p = self.spine.check(&p)?;
                let c = Coef::from_json(&pair[1]).map_err(GroupError::BadElement)?;
                pairs.push((p, c));
            }
        }
        let mut tail = Coef::zero();
        if let Some(t) = v.get("tail") {
            tail = tail + Coef::from_json(t).map_err(GroupError::BadElement)?;
        }
        if let Some(gens) = v.get("gens") {
            let obj = gens.as_object().ok_or_else(|| bad("\"gens\" must map generator names to integers"))?;
            for (name, c) in obj {
                let c = c.as_i64().ok_or_else(|| bad("generator coefficients must be integers"))?;
                let g = self.generators().iter().find(|g| &g.name == name).ok_or_else(|| GroupError::BadElement(format!("unknown generator {name}")))?;
                let e = self.generator_elem(g).scale(c);
                tail = tail + e.tail_value();
                pairs.extend(e.fin);
            }
        }
        if !tail.is_zero() && self.tail_seg().is_none() {
            return Err(bad("a tail needs a terminal ω segment"));
        }
        Ok(Elem::from_pairs(pairs, self.tail_seg().map(|s| (s, tail))))
    }

    pub fn elem(&self, v: Value) -> Elem {
        self.parse_elem(&v).expect("catalogue element")
    }

    pub fn generator_elem(&self, g: &Generator) -> Elem {
        let ts = self.tail_seg().expect("generators live on a terminal ω segment");
        let pairs = g.prefix.iter().enumerate().map(|(j, c)| (self.spine.pos(ts, j as i64), *c - g.tail)).collect();
        Elem::from_pairs(pairs, Some((ts, g.tail)))
    }

    /// JSON form; in generator mode tails are written through generators
    /// whenever a small combination exists.
    pub fn elem_to_json(&self, e: &Elem) -> Value {
        let mut base = e.clone();
        let mut gens = serde_json::Map::new();
        if let (Some((_, t)), Mode::Generators(list)) = (e.tail, &self.mode) {
            let tails: Vec<Coef> = list.iter().map(|g| g.tail).collect();
            if let Some(cs) = self.tail_lattice().combination(&tails, &t, 8) {
                for (g, c) in list.iter().zip(cs) {
                    if c != 0 {
                        base = base.sub(&self.generator_elem(g).scale(c));
                        gens.insert(g.name.clone(), json!(c));
                    }
                }
            }
        }
        let mut v = json!({ "finite": base.fin.iter().map(|(p, c)| json!([p.to_json(), c.to_json()])).collect::<Vec<_>>() });
        if !gens.is_empty() {
            v["gens"] = Value::Object(gens);
        }
        if let Some((_, t)) = base.tail {
            v["tail"] = t.to_json();
        }
        v
    }

    /// Whether `e` is an element of the presented group.
    pub fn contains(&self, e: &Elem) -> Result<(), GroupError> {
        for (p, _) in &e.fin {
            self.spine.check(p)?;
        }
        if let Some((ts, t)) = e.tail {
            if Some(ts) != self.tail_seg() {
                return Err(GroupError::NotMember("tail off the terminal ω segment".into()));
            }
            match &self.mode {
                Mode::Sum => return Err(GroupError::NotMember("infinite support in a lexicographic sum".into())),
                Mode::Hahn => {}
                Mode::Generators(_) => {
                    if !self.tail_lattice().contains(&t) {
                        return Err(GroupError::NotMember(format!("tail {t} is not an integer combination of generator tails")));
                    }
                }
            }
        }
        // Infinite parts enter a generated group only through generator tails.
        if matches!(self.mode, Mode::Generators(_)) {
            if let Some((p, c)) = e.fin.iter().find(|(_, c)| !c.d.is_zero()) {
                return Err(GroupError::NotMember(format!("coordinate {c} at {p} has an infinite part off the generators")));
            }
        }
        let h = self.horizon(e, 1);
        for (p, c) in e.entries(h) {
            if !self.rib(&p)?.contains(&c) {
                return Err(GroupError::NotMember(format!("coordinate {c} at {p} lies outside the rib")));
            }
        }
        if let Some((_, t)) = e.tail {
            let far = self.tail_pos(h).expect("tail segment");
            if !self.rib(&far)?.contains(&t) {
                return Err(GroupError::NotMember(format!("tail {t} lies outside the rib")));
            }
        }
        Ok(())
    }

    pub fn is_member(&self, e: &Elem) -> bool {
        self.contains(e).is_ok()
    }

    /// `Some(h)` with `e = m h` and `h` in the group.
    pub fn in_mg(&self, e: &Elem, m: u64) -> Option<Elem> {
        if m == 0 {
            return e.is_zero().then(Elem::zero);
        }
        let h = e.div(m as i64);
        self.is_member(&h).then_some(h)
    }

    /// Leading position and coefficient.
    pub fn leading(&self, e: &Elem) -> Option<(Pos, Coef)> {
        let h = self.horizon(e, 1);
        if let Some(first) = e.entries(h).into_iter().next() {
            return Some(first);
        }
        e.tail.map(|(_, t)| (self.tail_pos(h).expect("tail segment"), t))
    }

    pub fn sign(&self, e: &Elem) -> i32 {
        self.leading(e).map(|(_, c)| c.signum()).unwrap_or(0)
    }

    pub fn compare(&self, a: &Elem, b: &Elem) -> Ordering {
        self.sign(&a.sub(b)).cmp(&0)
    }

    pub fn is_finite_chain(&self) -> bool {
        self.spine.is_finite()
    }
}

pub fn g_add(_g: &GroupSpec, a: &Elem, b: &Elem) -> Elem {
    a.add(b)
}

pub fn g_compare(g: &GroupSpec, a: &Elem, b: &Elem) -> Ordering {
    g.compare(a, b)
}

pub fn g_in_mg(g: &GroupSpec, a: &Elem, m: u64) -> Option<Elem> {
    g.in_mg(a, m)
}

/// The archimedean skeleton: index chain and rib assignment.
pub fn skeleton(g: &GroupSpec) -> Value {
    json!({
        "chain": g.spine,
        "top": "inf",
        "ribs": g.profiles().iter().map(|p| p.to_json()).collect::<Vec<_>>(),
    })
}

/// Integer coordinate helper for callers that enumerate tail positions.
pub fn coord_u64(p: &Pos) -> u64 {
    p.coord.to_integer().to_u64().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qr;

    fn h_omega() -> GroupSpec {
        GroupSpec::uniform(ChainSpec::single(Segment::Omega), RibSpec::z(), Mode::Hahn)
    }

    pub(crate) fn g4() -> GroupSpec {
        let mode = Mode::Generators(vec![Generator { name: "a".into(), prefix: vec![], tail: Coef::int(2) }]);
        GroupSpec::uniform(ChainSpec::single(Segment::Omega), RibSpec::z(), mode)
    }

    fn at(g: &GroupSpec, pairs: &[(i64, i64)]) -> Elem {
        Elem::from_pairs(pairs.iter().map(|(i, c)| (g.spine.pos(0, *i), Coef::int(*c))).collect(), None)
    }

    #[test]
    fn addition_cancels() {
        let g = h_omega();
        assert!(at(&g, &[(0, 1)]).add(&at(&g, &[(0, -1)])).is_zero());
        assert_eq!(at(&g, &[(2, 4), (5, 1)]).add(&at(&g, &[(2, -4)])), at(&g, &[(5, 1)]));
    }

    #[test]
    fn g4_folding() {
        let g = g4();
        let a = g.elem(json!({"gens":{"a":1}}));
        let b = a.add(&at(&g, &[(0, -2)]));
        for j in 0..4 {
            let want = if j == 0 { 0 } else { 2 };
            assert_eq!(b.value_at(&g.spine.pos(0, j)), Coef::int(want));
        }
        assert_eq!(g.elem_to_json(&b), json!({"finite":[[{"seg":0,"coord":0},-2]],"gens":{"a":1}}));
        assert!(g.is_member(&b));
    }

    #[test]
    fn lexicographic_order() {
        let g = h_omega();
        assert_eq!(g_compare(&g, &at(&g, &[(0, 1)]), &at(&g, &[(1, 100)])), Ordering::Greater);
        let a = at(&g, &[(3, 7)]);
        assert_eq!(g_compare(&g, &a, &a), Ordering::Equal);
        let g4 = g4();
        let a = g4.elem(json!({"gens":{"a":1}}));
        assert_eq!(g_compare(&g4, &a, &at(&g4, &[(0, 3)])), Ordering::Less);
    }

    #[test]
    fn divisibility_in_group() {
        let g = h_omega();
        assert_eq!(g_in_mg(&g, &at(&g, &[(3, 6)]), 3), Some(at(&g, &[(3, 2)])));
        let g4 = g4();
        let a = g4.elem(json!({"gens":{"a":1}}));
        assert_eq!(g_in_mg(&g4, &a, 2), None);
        assert_eq!(g_in_mg(&g4, &a.scale(2), 2), Some(a));
    }

    #[test]
    fn membership() {
        let sum = GroupSpec::uniform(ChainSpec::single(Segment::Omega), RibSpec::z(), Mode::Sum);
        let ones = Elem::from_pairs(vec![], Some((0, Coef::int(1))));
        assert!(!sum.is_member(&ones));
        assert!(h_omega().is_member(&ones));
        assert!(!h_omega().is_member(&at(&h_omega(), &[])
            .add(&Elem::single(h_omega().spine.pos(0, 1), Coef::std(qr(1, 2))))));
        assert!(!g4().is_member(&ones));
    }

    #[test]
    fn skeletons() {
        let sum = GroupSpec::uniform(ChainSpec::single(Segment::Omega), RibSpec::z(), Mode::Sum);
        let s = skeleton(&sum);
        assert_eq!(s["ribs"][0]["generic"], "Z");
        let trivial = GroupSpec::new(ChainSpec::trivial(), vec![], Mode::Hahn).unwrap();
        assert_eq!(skeleton(&trivial)["ribs"], json!([]));
    }

    #[test]
    fn json_round_trip() {
        let g = g4();
        let back = GroupSpec::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        let e = g.elem(json!({"finite":[[{"seg":0,"coord":3},5]],"gens":{"a":-2}}));
        assert_eq!(g.parse_elem(&g.elem_to_json(&e)).unwrap(), e);
    }
}
