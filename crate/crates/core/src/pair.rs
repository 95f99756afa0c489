//! A group `G` sitting inside a group `H` through an order embedding of
//! spines that keeps coordinates and ribs.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chain::{Pos, Segment};
use crate::group::{Elem, GroupError, GroupSpec};
use crate::valuation::SpineValue;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub g: GroupSpec,
    pub h: GroupSpec,
    /// Segment `i` of `G` lands on segment `embedding[i]` of `H`; identity
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<usize>>,
    /// Elements of `H` to test the extension on.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<Value>,
}

impl PairSpec {
    pub fn new(g: GroupSpec, h: GroupSpec) -> PairSpec {
        PairSpec { g, h, embedding: None, probes: Vec::new() }
    }

    pub fn from_json(v: &Value) -> Result<PairSpec, GroupError> {
        let p: PairSpec = serde_json::from_value(v.clone()).map_err(|e| GroupError::Malformed(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("pair serializes")
    }

    pub fn seg(&self, i: usize) -> usize {
        self.embedding.as_ref().map(|e| e[i]).unwrap_or(i)
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        self.g.validate()?;
        self.h.validate()?;
        let (gs, hs) = (&self.g.spine.segments, &self.h.spine.segments);
        if let Some(e) = &self.embedding {
            if e.len() != gs.len() {
                return Err(GroupError::Malformed("the embedding needs one target per segment of G".into()));
            }
        }
        let mut last: Option<usize> = None;
        for (i, s) in gs.iter().enumerate() {
            let t = self.seg(i);
            let Some(target) = hs.get(t) else {
                return Err(GroupError::Malformed(format!("segment {i} of G maps past the end of H")));
            };
            if last.is_some_and(|l| l >= t) {
                return Err(GroupError::Malformed("the segment map must be strictly increasing".into()));
            }
            last = Some(t);
            let ok = match (s, target) {
                (Segment::Fin { k }, Segment::Fin { k: k2 }) => k <= k2,
                (a, b) => a == b,
            };
            if !ok {
                return Err(GroupError::Malformed(format!("segment {i} of G ({}) cannot land on {}", s.name(), target.name())));
            }
        }
        if let Some(ts) = self.g.tail_seg() {
            if self.h.tail_seg() != Some(self.seg(ts)) {
                return Err(GroupError::Malformed("the terminal ω of G must land on the terminal ω of H".into()));
            }
        }
        for (i, p) in self.probes.iter().enumerate() {
            self.h.parse_elem(p).and_then(|e| self.h.contains(&e).map(|_| e)).map_err(|e| GroupError::Malformed(format!("probe {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn probe_elems(&self) -> Vec<Elem> {
        self.probes.iter().filter_map(|p| self.h.parse_elem(p).ok()).collect()
    }

    /// Whether every segment of `H` is hit and keeps its size.
    pub fn spine_is_identity(&self) -> bool {
        let (gs, hs) = (&self.g.spine.segments, &self.h.spine.segments);
        gs.len() == hs.len() && (0..gs.len()).all(|i| self.seg(i) == i && gs[i] == hs[i])
    }

    pub fn embed_pos(&self, p: &Pos) -> Pos {
        self.h.spine.bind(Pos::new(self.seg(p.seg), p.coord))
    }

    pub fn embed(&self, e: &Elem) -> Elem {
        let h = &self.h;
        e.map_segments(|s| self.seg(s), |t| h.spine.segments[t].reversed())
    }

    pub fn embed_value(&self, v: &SpineValue) -> SpineValue {
        match v {
            SpineValue::At(p) => SpineValue::At(self.embed_pos(p)),
            SpineValue::Limit(s) => SpineValue::Limit(self.seg(*s)),
            SpineValue::Inf => SpineValue::Inf,
        }
    }

    /// The position of `G` landing on `p`, if any.
    pub fn g_pos(&self, p: &Pos) -> Option<Pos> {
        let i = (0..self.g.spine.segments.len()).find(|i| self.seg(*i) == p.seg)?;
        self.g.spine.segments[i].admits(&p.coord).then(|| self.g.spine.bind(Pos::new(i, p.coord)))
    }

    /// The segment of `G` carrying tails that land on `H` segment `hs`.
    pub fn g_tail_seg(&self, hs: usize) -> Option<usize> {
        self.g.tail_seg().filter(|s| self.seg(*s) == hs)
    }

    /// The element of `G` whose image is `e`.
    pub fn pull_back(&self, e: &Elem) -> Option<Elem> {
        let mut pairs = Vec::with_capacity(e.fin.len());
        for (p, c) in &e.fin {
            pairs.push((self.g_pos(p)?, *c));
        }
        let tail = match e.tail {
            Some((hs, t)) => Some((self.g_tail_seg(hs)?, t)),
            None => None,
        };
        let x = Elem::from_pairs(pairs, tail);
        self.g.is_member(&x).then_some(x)
    }

    pub fn describe(&self) -> Value {
        json!({ "g": self.g, "h": self.h, "embedding": (0..self.g.spine.segments.len()).map(|i| self.seg(i)).collect::<Vec<_>>() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Coef;
    use crate::chain::ChainSpec;
    use crate::group::Mode;
    use crate::rib::RibSpec;

    #[test]
    fn sum_into_hahn_round_trips() {
        let spine = ChainSpec::single(Segment::Omega);
        let p = PairSpec::new(GroupSpec::uniform(spine.clone(), RibSpec::z(), Mode::Sum), GroupSpec::uniform(spine, RibSpec::z(), Mode::Hahn));
        p.validate().unwrap();
        let x = Elem::single(Pos::at(0, 3), Coef::int(2));
        assert_eq!(p.pull_back(&p.embed(&x)), Some(x));
        let tail = Elem::from_pairs(vec![], Some((0, Coef::int(1))));
        assert_eq!(p.pull_back(&tail), None);
        let back = PairSpec::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn new_points_have_no_preimage() {
        let g = GroupSpec::finite(vec![RibSpec::z()], Mode::Hahn);
        let h = GroupSpec::finite(vec![RibSpec::z(), RibSpec::z()], Mode::Hahn);
        let p = PairSpec::new(g, h);
        p.validate().unwrap();
        assert!(p.g_pos(&Pos::at(0, 0)).is_some());
        assert!(p.g_pos(&Pos::at(0, 1)).is_none());
        assert!(!p.spine_is_identity());
    }
}
