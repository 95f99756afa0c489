//! Stable-embeddedness verdicts for presented groups and for pairs.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::Coef;
use crate::chain::Segment;
use crate::group::{Elem, GroupSpec, Mode, RibSource};
use crate::pseudo::{approximation_witness, immediate_ext_check, Immediacy};
use crate::rib::{rib_elem_equiv, RibSpec};
use crate::valuation::{sample_positions, CheckStatus, ValuationError, DEFAULT_BOUND};

pub use crate::pair::PairSpec;
pub use crate::verdict::{Outcome, Reason, Status, Verdict};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("not a regular group: {0}")]
    NotRegular(String),
    #[error("regular rank is infinite")]
    NotFRR,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Finite(u64),
    Infinite,
}

/// Number of regular convex subgroups, `{0}` included.
pub fn regular_rank(g: &GroupSpec) -> Result<Rank, ClassifyError> {
    let quo = g.regular_spine()?;
    if !quo.is_all_finite() {
        return Ok(Rank::Infinite);
    }
    let points: u64 = quo.chain.segments.iter().map(|s| if let Segment::Fin { k } = s { *k as u64 } else { 0 }).sum();
    Ok(Rank::Finite(points + 1))
}

fn rib_verdict(r: &RibSpec) -> Verdict {
    let mut v = r.stably_embedded();
    if r.uniformly_stably_embedded() {
        v.status = Status::UniformlyStablyEmbedded;
    }
    v
}

fn all_divisible(g: &GroupSpec) -> bool {
    g.profiles().iter().all(|p| p.sources().iter().all(|s| matches!(s, RibSource::Fixed(r) if !r.discrete && r.non_divisible_primes().is_empty())))
}

/// Regular groups: archimedean ones by their rib, divisible ones by the
/// cut above their least archimedean class.
pub fn classify_regular(g: &GroupSpec) -> Result<Verdict, ClassifyError> {
    if g.spine.segments == [Segment::Fin { k: 1 }] {
        let p = g.spine.pos(0, 0);
        let r = g.rib_at(&p).ok_or_else(|| ClassifyError::NotRegular("no rib".into()))?;
        return Ok(rib_verdict(&r));
    }
    if g.spine.is_trivial() {
        return Ok(Verdict::new(Status::UniformlyStablyEmbedded, vec![Reason::new("regular.trivial", Outcome::Pass, "the trivial group")]));
    }
    if all_divisible(g) {
        return Ok(Verdict::new(
            Status::NotStablyEmbedded,
            vec![Reason::new("regular.divisible", Outcome::Fail, "a non-archimedean divisible group leaves the cut above its least archimedean class undefined")
                .with_witness(json!({ "cut": "above the first archimedean class" }))],
        ));
    }
    Err(ClassifyError::NotRegular("neither archimedean nor divisible".into()))
}

/// Groups of finite regular rank: stably embedded exactly when each regular
/// class is one archimedean class whose rib is.
pub fn classify_frr(g: &GroupSpec) -> Result<Verdict, ClassifyError> {
    if regular_rank(g)? == Rank::Infinite {
        return Err(ClassifyError::NotFRR);
    }
    let quo = g.regular_spine()?;
    if let Some(first) = quo.multi.first() {
        return Ok(Verdict::new(
            Status::NotStablyEmbedded,
            vec![Reason::new("frr.regular-class", Outcome::Fail, format!("the regular class {first} holds several archimedean classes"))
                .with_witness(json!({ "class": first }))],
        ));
    }
    let mut reasons = Vec::new();
    let mut status = Status::UniformlyStablyEmbedded;
    for p in sample_positions(&g.spine) {
        let r = g.rib_at(&p).ok_or_else(|| ClassifyError::NotRegular(format!("no rib at {p}")))?;
        let v = rib_verdict(&r);
        status = match (status, v.status) {
            (_, Status::NotStablyEmbedded) | (Status::NotStablyEmbedded, _) => Status::NotStablyEmbedded,
            (Status::UniformlyStablyEmbedded, Status::UniformlyStablyEmbedded) => Status::UniformlyStablyEmbedded,
            _ => Status::StablyEmbedded,
        };
        for mut reason in v.reasons {
            reason.detail = format!("{p}: {}", reason.detail);
            reasons.push(reason);
        }
    }
    Ok(Verdict::new(status, reasons))
}

fn combine(reasons: Vec<Reason>) -> Verdict {
    let status = if reasons.iter().any(|r| r.outcome == Outcome::Fail) {
        Status::NotStablyEmbedded
    } else if reasons.iter().any(|r| r.outcome == Outcome::Unknown) {
        Status::Unknown
    } else {
        Status::StablyEmbedded
    };
    Verdict::new(status, reasons)
}

/// The Hahn product over the same spine and ribs.
fn hahn_hull(g: &GroupSpec) -> GroupSpec {
    GroupSpec { mode: Mode::Hahn, ..g.clone() }
}

fn maximality(g: &GroupSpec) -> Reason {
    match &g.mode {
        Mode::Hahn => Reason::new("max.hahn", Outcome::Pass, "Hahn products are maximally valued"),
        Mode::Sum => {
            let Some(i) = g.spine.segments.iter().position(|s| !matches!(s, Segment::Fin { .. } | Segment::OmegaStar)) else {
                return Reason::new("max.sum-reverse-well-ordered", Outcome::Pass, "every well-ordered subset of the spine is finite, so the sum is the Hahn product");
            };
            let detail = format!("segment {i} holds a copy of ω, so the Hahn product is an immediate extension");
            if let Some(ts) = g.tail_seg() {
                let pair = PairSpec::new(g.clone(), hahn_hull(g));
                let ones = Elem::from_pairs(vec![], Some((ts, Coef::int(1))));
                if let Ok(Immediacy::NoMaximumDetected { certificate, .. }) = immediate_ext_check(&pair, &ones) {
                    return Reason::new("max.sum-not-maximal", Outcome::Fail, detail)
                        .with_witness(json!({ "pseudo_limit": pair.h.elem_to_json(&ones), "certificate": certificate }));
                }
            }
            Reason::new("max.sum-not-maximal", Outcome::Fail, detail).with_witness(json!({ "sequence": format!("unit coordinates along segment {i}") }))
        }
        Mode::Generators(gens) => {
            // A tail the rib allows but the generators do not reach is the
            // limit of its own prefixes, with no best approximation in G.
            let Some(ts) = g.tail_seg() else {
                return Reason::new("max.generated", Outcome::Unknown, "no terminal segment to probe");
            };
            let pair = PairSpec::new(g.clone(), hahn_hull(g));
            let mut tails: Vec<Coef> = (1..=DEFAULT_BOUND as i64).map(Coef::int).collect();
            tails.extend(gens.iter().map(|x| Coef::std(x.tail.s)));
            for t in tails {
                let probe = Elem::from_pairs(vec![], Some((ts, t)));
                if !pair.h.is_member(&probe) || pair.pull_back(&probe).is_some() {
                    continue;
                }
                if let Ok(Immediacy::NoMaximumDetected { certificate, .. }) = immediate_ext_check(&pair, &probe) {
                    return Reason::new("max.generated-not-maximal", Outcome::Fail, format!("the constant tail {t} is a pseudo-limit of elements of G but not in G"))
                        .with_witness(json!({ "pseudo_limit": pair.h.elem_to_json(&probe), "certificate": certificate }));
                }
            }
            Reason::new("max.generated", Outcome::Unknown, "no pseudo-limit outside G was found among constant tails")
        }
    }
}

fn distinct_ribs(g: &GroupSpec) -> Vec<RibSource> {
    let mut out: Vec<RibSource> = Vec::new();
    for p in g.profiles() {
        for s in p.sources() {
            if !out.contains(s) {
                out.push(s.clone());
            }
        }
    }
    out
}

fn rib_reasons(g: &GroupSpec) -> Result<Vec<Reason>, ClassifyError> {
    let quo = g.regular_spine()?;
    if let Some(first) = quo.multi.first() {
        return Ok(vec![Reason::new("rib.regular-class", Outcome::Fail, format!("the regular class {first} holds several archimedean classes, so its rib is not archimedean"))
            .with_witness(json!({ "class": first, "cut": "between archimedean classes inside one regular class" }))]);
    }
    let mut out = Vec::new();
    for src in distinct_ribs(g) {
        match src {
            RibSource::Fixed(r) => out.extend(r.stably_embedded().reasons),
            RibSource::Family { cut_complete } => {
                let outcome = if cut_complete { Outcome::Pass } else { Outcome::Fail };
                out.push(Reason::new("rib.family", outcome, format!("ribs Z_(p_n) with cut_complete = {cut_complete}")));
            }
        }
    }
    Ok(out)
}

/// Full verdict for a presented group.
pub fn classify_main(g: &GroupSpec, bound: u64) -> Verdict {
    match classify_main_inner(g, bound) {
        Ok(v) => v,
        Err(e) => Verdict::new(Status::Unknown, vec![Reason::new("input.unsupported", Outcome::Unknown, e.to_string())]),
    }
}

fn classify_main_inner(g: &GroupSpec, bound: u64) -> Result<Verdict, ClassifyError> {
    let ur = g.check_ur()?;
    if ur.status == CheckStatus::Fails {
        let mut reasons = vec![Reason::new("hyp.ur", Outcome::Fail, ur.detail.clone())];
        let spine = g.regular_spine()?.chain.chain_stably_embedded();
        if spine.status == Status::NotStablyEmbedded {
            reasons.extend(spine.reasons);
            return Ok(Verdict::new(Status::NotStablyEmbedded, reasons));
        }
        reasons.push(Reason::new("hyp.ur-fallback", Outcome::Unknown, "every spine cut is definable; without uniform regularity nothing more is decided"));
        return Ok(Verdict::new(Status::Unknown, reasons));
    }
    let mut reasons = vec![Reason::new("hyp.ur", Outcome::Pass, ur.detail)];
    let m = g.check_m(bound);
    if m.status == CheckStatus::Fails {
        let mut r = Reason::new("hyp.m", Outcome::Unknown, format!("{}; groups failing (M) are not covered", m.detail));
        r.witness = m.witness;
        reasons.push(r);
        return Ok(Verdict::new(Status::Unknown, reasons));
    }
    reasons.push(Reason::new("hyp.m", Outcome::Pass, m.detail));
    reasons.push(maximality(g));
    reasons.extend(rib_reasons(g)?);
    reasons.extend(g.regular_spine()?.chain.chain_stably_embedded().reasons);
    Ok(combine(reasons))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutReport {
    /// `None` when some cut is outside the rules.
    pub all_definable: Option<bool>,
    pub cuts: Vec<Reason>,
}

/// Definability of every cut, sorted by where the cut lives: the regular
/// spine, a rib, or the gap a pseudo-Cauchy sequence leaves.
pub fn all_cuts_definable(g: &GroupSpec, bound: u64) -> Result<CutReport, ClassifyError> {
    if g.check_ur()?.status == CheckStatus::Fails {
        return Err(ClassifyError::HypothesisViolated("uniform regularity fails".into()));
    }
    let m = g.check_m(bound);
    if m.status == CheckStatus::Fails {
        return Err(ClassifyError::HypothesisViolated(m.detail));
    }
    let quo = g.regular_spine()?;
    let mut cuts = Vec::new();
    for cut in quo.chain.enumerate_cuts() {
        let c = quo.chain.classify_cut(&cut).map_err(|e| ClassifyError::NotRegular(e.to_string()))?;
        let (outcome, detail) = match c.definable.clone().expect("classified") {
            crate::chain::Definability::Definable { witness, .. } => (Outcome::Pass, witness),
            crate::chain::Definability::NotDefinable { reason, .. } => (Outcome::Fail, reason),
            crate::chain::Definability::Unknown { reason } => (Outcome::Unknown, reason),
        };
        cuts.push(Reason::new("cut.spine", outcome, detail).with_witness(serde_json::to_value(&c.kind).expect("cut serializes")));
    }
    for r in rib_reasons(g)? {
        cuts.push(Reason { rule: format!("cut.{}", r.rule), ..r });
    }
    let max = maximality(g);
    cuts.push(Reason { rule: format!("cut.{}", max.rule), ..max });
    let all_definable = if cuts.iter().any(|r| r.outcome == Outcome::Fail) {
        Some(false)
    } else if cuts.iter().any(|r| r.outcome == Outcome::Unknown) {
        None
    } else {
        Some(true)
    };
    Ok(CutReport { all_definable, cuts })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Elementarity {
    Elementary,
    NotElementary,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCheck {
    pub status: Elementarity,
    pub reasons: Vec<Reason>,
}

/// Whether `G ≼ H`, decided from spine, ribs and presentation mode.
pub fn check_elementary_pair(pair: &PairSpec) -> PairCheck {
    let mut reasons = Vec::new();
    if let Err(e) = pair.validate() {
        return PairCheck { status: Elementarity::NotElementary, reasons: vec![Reason::new("pair.malformed", Outcome::Fail, e.to_string())] };
    }
    if pair.spine_is_identity() {
        reasons.push(Reason::new("elem.spine-identity", Outcome::Pass, "the spines coincide"));
    } else if pair.g.spine.is_finite() || pair.h.spine.is_finite() {
        reasons.push(Reason::new("elem.spine-new-points", Outcome::Fail, "a finite spine gains points, so the number of archimedean classes changes"));
    } else {
        reasons.push(Reason::new("elem.spine-extension", Outcome::Unknown, "the spine grows; elementarity of the chain extension is not decided"));
    }
    let mut rib_fail = None;
    let mut rib_ok = true;
    for p in sample_positions(&pair.g.spine) {
        let (Some(a), Some(b)) = (pair.g.rib_at(&p), pair.h.rib_at(&pair.embed_pos(&p))) else { continue };
        if !rib_elem_equiv(&a, &b) {
            rib_fail.get_or_insert(format!("rib {} at {p} sits in {}, which is not elementarily equivalent", a.label(), b.label()));
        } else if a.standard() != b.standard() && !(a.domain == b.domain && !a.discrete) {
            rib_ok = false;
        }
    }
    match (rib_fail, rib_ok) {
        (Some(why), _) => reasons.push(Reason::new("elem.rib", Outcome::Fail, why)),
        (None, true) => reasons.push(Reason::new("elem.rib", Outcome::Pass, "each rib is an elementary substructure of its image")),
        (None, false) => reasons.push(Reason::new("elem.rib", Outcome::Unknown, "ribs are equivalent but differ as structures")),
    }
    let nonstandard_gens = pair.h.generators().iter().any(|g| !g.tail.is_standard());
    let mode = match (&pair.g.mode, &pair.h.mode) {
        (Mode::Generators(_), _) => Reason::new("elem.mode", Outcome::Unknown, "G is given by generators"),
        (_, Mode::Generators(_)) if nonstandard_gens => {
            Reason::new("elem.mode", Outcome::Unknown, "H adds a generator with a nonstandard tail; the extension is not shown elementary")
        }
        (_, Mode::Generators(_)) => Reason::new("elem.mode", Outcome::Unknown, "H is given by generators"),
        (Mode::Sum, Mode::Hahn) => Reason::new("elem.mode", Outcome::Pass, "the lexicographic sum is elementary in the Hahn product over the same data"),
        (a, b) if std::mem::discriminant(a) == std::mem::discriminant(b) => Reason::new("elem.mode", Outcome::Pass, "same presentation mode"),
        _ => Reason::new("elem.mode", Outcome::Unknown, "presentation modes differ"),
    };
    reasons.push(mode);
    let status = if reasons.iter().any(|r| r.outcome == Outcome::Fail) {
        Elementarity::NotElementary
    } else if reasons.iter().any(|r| r.outcome == Outcome::Unknown) {
        Elementarity::Unknown
    } else {
        Elementarity::Elementary
    };
    PairCheck { status, reasons }
}

/// The probes of the pair plus, when `H` carries tails, the unit tail and
/// the generators of `H`.
pub fn probes(pair: &PairSpec) -> Vec<Elem> {
    let mut out = pair.probe_elems();
    if let Some(ts) = pair.h.tail_seg() {
        let mut auto = vec![Elem::from_pairs(vec![], Some((ts, Coef::int(1))))];
        auto.extend(pair.h.generators().iter().map(|x| pair.h.generator_elem(x)));
        for e in auto {
            if pair.h.is_member(&e) && !out.contains(&e) {
                out.push(e);
            }
        }
    }
    out
}

/// Verdict for `G ⊆ H` from four clauses: (a) no probe is a pseudo-limit of
/// a sequence from `G` without limit in `G`; (b) the same modulo `pG` for
/// each relevant prime; (c) the ribs and (d) the regular spine of `G` are
/// stably embedded in those of `H`.
pub fn classify_pair(pair: &PairSpec) -> Verdict {
    if let Err(e) = pair.validate() {
        return Verdict::new(Status::Unknown, vec![Reason::new("pair.malformed", Outcome::Unknown, e.to_string())]);
    }
    let elem = check_elementary_pair(pair);
    let mut reasons = elem.reasons.clone();
    let hyp_ok = match (pair.g.check_ur(), pair.g.check_m(DEFAULT_BOUND)) {
        (Ok(ur), m) if ur.holds() && m.holds() => true,
        (ur, m) => {
            let d = ur.map(|c| c.detail).unwrap_or_else(|e| e.to_string());
            reasons.push(Reason::new("pair.hypotheses", Outcome::Unknown, format!("G: {d}; {}", m.detail)));
            false
        }
    };
    let probes = probes(pair);
    let mut a = Reason::new("pair.a", Outcome::Pass, format!("{} probes have best approximations from G", probes.len()));
    for h in &probes {
        if let Ok(Immediacy::NoMaximumDetected { certificate, .. }) = immediate_ext_check(pair, h) {
            a = Reason::new("pair.a", Outcome::Fail, "a probe is the pseudo-limit of a sequence from G with no limit in G")
                .with_witness(json!({ "probe": pair.h.elem_to_json(h), "certificate": certificate }));
            break;
        }
    }
    reasons.push(a);
    let primes: BTreeSet<u64> = pair.g.relevant_primes();
    let mut b = Reason::new("pair.b", Outcome::Pass, format!("every probe has a best approximation modulo pG for p in {primes:?}"));
    'outer: for p in &primes {
        for h in &probes {
            if pair.pull_back(h).is_some() {
                continue;
            }
            if let Ok(Immediacy::NoMaximumDetected { certificate, .. }) = approximation_witness(pair, h, *p) {
                b = Reason::new("pair.b", Outcome::Fail, format!("modulo {p}G a probe has no best approximation"))
                    .with_witness(json!({ "p": p, "probe": pair.h.elem_to_json(h), "certificate": certificate }));
                break 'outer;
            }
        }
    }
    reasons.push(b);
    let mut c = Reason::new("pair.c", Outcome::Pass, "every rib pair is stably embedded");
    for pos in sample_positions(&pair.g.spine) {
        let (Some(ra), Some(rb)) = (pair.g.rib_at(&pos), pair.h.rib_at(&pair.embed_pos(&pos))) else { continue };
        if *ra == *rb || ra.stably_embedded().status.is_stably_embedded() {
            continue;
        }
        c = Reason::new("pair.c", Outcome::Fail, format!("the rib {} at {pos} is not stably embedded in {}", ra.label(), rb.label()));
        break;
    }
    reasons.push(c);
    let d = if pair.spine_is_identity() {
        Reason::new("pair.d", Outcome::Pass, "the spine pair is the identity")
    } else {
        match pair.g.regular_spine().map(|q| q.chain.chain_stably_embedded()) {
            Ok(v) if v.status.is_stably_embedded() => Reason::new("pair.d", Outcome::Pass, "every cut of the regular spine of G is definable"),
            Ok(v) if v.status == Status::NotStablyEmbedded => Reason::new("pair.d", Outcome::Fail, "the regular spine of G has an undefinable cut"),
            Ok(_) => Reason::new("pair.d", Outcome::Unknown, "spine cuts outside the rules"),
            Err(e) => Reason::new("pair.d", Outcome::Unknown, e.to_string()),
        }
    };
    reasons.push(d);
    let clauses_fail = reasons.iter().any(|r| r.rule.starts_with("pair.") && r.outcome == Outcome::Fail);
    let clauses_unknown = reasons.iter().any(|r| r.rule.starts_with("pair.") && r.outcome == Outcome::Unknown);
    let status = if elem.status != Elementarity::Elementary || !hyp_ok || clauses_unknown {
        Status::Unknown
    } else if clauses_fail {
        Status::NotStablyEmbedded
    } else {
        Status::StablyEmbedded
    };
    Verdict::new(status, reasons)
}

pub fn verdict_json(v: &Verdict, trace: bool) -> Value {
    if trace {
        serde_json::to_value(v).expect("verdict serializes")
    } else {
        json!({ "status": v.status, "witnesses": v.witnesses().collect::<Vec<_>>() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainSpec;
    use crate::group::Generator;

    fn omega() -> ChainSpec {
        ChainSpec::single(Segment::Omega)
    }

    #[test]
    fn ranks() {
        assert_eq!(regular_rank(&GroupSpec::finite(vec![RibSpec::z(), RibSpec::r()], Mode::Hahn)).unwrap(), Rank::Finite(3));
        assert_eq!(regular_rank(&GroupSpec::finite(vec![RibSpec::q()], Mode::Hahn)).unwrap(), Rank::Finite(2));
        assert_eq!(regular_rank(&GroupSpec::uniform(omega(), RibSpec::z(), Mode::Hahn)).unwrap(), Rank::Infinite);
    }

    #[test]
    fn archimedean_groups() {
        let st = |r: RibSpec| classify_regular(&GroupSpec::finite(vec![r], Mode::Hahn)).unwrap().status;
        assert_eq!(st(RibSpec::z()), Status::UniformlyStablyEmbedded);
        assert_eq!(st(RibSpec::r()), Status::UniformlyStablyEmbedded);
        assert_eq!(st(RibSpec::q()), Status::NotStablyEmbedded);
        assert_eq!(st(RibSpec::z_loc(3, true)), Status::StablyEmbedded);
        assert!(matches!(classify_regular(&GroupSpec::uniform(omega(), RibSpec::z(), Mode::Hahn)), Err(ClassifyError::NotRegular(_))));
    }

    #[test]
    fn finite_rank_products() {
        let st = |rs: Vec<RibSpec>| classify_frr(&GroupSpec::finite(rs, Mode::Hahn)).unwrap().status;
        assert_eq!(st(vec![RibSpec::z(), RibSpec::r()]), Status::UniformlyStablyEmbedded);
        assert_eq!(st(vec![RibSpec::q(), RibSpec::z()]), Status::NotStablyEmbedded);
        assert_eq!(st(vec![RibSpec::z(), RibSpec::q()]), Status::NotStablyEmbedded);
        assert_eq!(classify_frr(&GroupSpec::uniform(omega(), RibSpec::z(), Mode::Hahn)), Err(ClassifyError::NotFRR));
    }

    #[test]
    fn main_verdicts() {
        let hahn = GroupSpec::uniform(omega(), RibSpec::z(), Mode::Hahn);
        assert_eq!(classify_main(&hahn, DEFAULT_BOUND).status, Status::StablyEmbedded);
        let sum = GroupSpec::uniform(omega(), RibSpec::z(), Mode::Sum);
        let v = classify_main(&sum, DEFAULT_BOUND);
        assert_eq!(v.status, Status::NotStablyEmbedded);
        assert!(v.witnesses().any(|r| r.rule == "max.sum-not-maximal" && r.witness.is_some()));
        let reverse = GroupSpec::uniform(ChainSpec::single(Segment::OmegaStar), RibSpec::z(), Mode::Sum);
        assert!(classify_main(&reverse, DEFAULT_BOUND).cites("max.sum-reverse-well-ordered"));
        let g4 = GroupSpec::uniform(omega(), RibSpec::z(), Mode::Generators(vec![Generator { name: "a".into(), prefix: vec![], tail: Coef::int(2) }]));
        assert_eq!(classify_main(&g4, DEFAULT_BOUND).status, Status::Unknown);
        assert!(matches!(all_cuts_definable(&g4, DEFAULT_BOUND), Err(ClassifyError::HypothesisViolated(_))));
    }

    #[test]
    fn pair_clauses() {
        let sum = PairSpec::new(GroupSpec::uniform(omega(), RibSpec::z(), Mode::Sum), GroupSpec::uniform(omega(), RibSpec::z(), Mode::Hahn));
        let v = classify_pair(&sum);
        assert_eq!(v.status, Status::NotStablyEmbedded);
        assert!(v.reasons.iter().any(|r| r.rule == "pair.a" && r.outcome == Outcome::Fail));
        let ident = PairSpec::new(GroupSpec::uniform(omega(), RibSpec::z(), Mode::Hahn), GroupSpec::uniform(omega(), RibSpec::z(), Mode::Hahn));
        assert_eq!(classify_pair(&ident).status, Status::StablyEmbedded);
        let zq = PairSpec::new(GroupSpec::finite(vec![RibSpec::z()], Mode::Hahn), GroupSpec::finite(vec![RibSpec::q()], Mode::Hahn));
        assert_eq!(check_elementary_pair(&zq).status, Elementarity::NotElementary);
    }
}
