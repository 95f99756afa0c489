//! Named presentations, pairs and the reproducibility corpus.

use serde::Serialize;
use num_traits::Signed;
use serde_json::{json, Value};

use crate::arith::{q, qr, Coef};
use crate::chain::{ChainSpec, Membership, Part, Pos, Segment};
use crate::classify::{classify_frr, classify_main, classify_pair, Outcome, Status};
use crate::group::{Elem, Generator, GroupSpec, Mode, RibAssign, RibSource, Selector};
use crate::pair::PairSpec;
use crate::par::Exec;
use crate::pseudo::{approximation_witness, immediate_ext_check, Immediacy};
use crate::rib::RibSpec;
use crate::typedef::{best_approx, decompose_val, scheme, scheme_eval, Approx, Target, TypedefError};
use crate::valuation::{SpineValue, DEFAULT_BOUND};

fn omega() -> ChainSpec {
    ChainSpec::single(Segment::Omega)
}

/// `H_ω ℤ`.
pub fn g1() -> GroupSpec {
    GroupSpec::uniform(omega(), RibSpec::z(), Mode::Hahn)
}

/// `Σ_ω ℤ`.
pub fn g0() -> GroupSpec {
    GroupSpec::uniform(omega(), RibSpec::z(), Mode::Sum)
}

/// Hahn product over the reals: `ℤ` at rational indices, `ℝ` elsewhere.
pub fn g2() -> GroupSpec {
    let spine = ChainSpec::single(Segment::DenseComplete)
        .with_colour("rat", vec![(0, Membership::DenseCodense { part: Part::Rational })])
        .with_colour("irr", vec![(0, Membership::DenseCodense { part: Part::Irrational })]);
    let ribs = vec![
        RibAssign { on: Selector::Colour("irr".into()), rib: RibSource::Fixed(RibSpec::r()) },
        RibAssign { on: Selector::Colour("rat".into()), rib: RibSource::Fixed(RibSpec::z()) },
    ];
    GroupSpec::new(spine, ribs, Mode::Hahn).expect("catalogue presentation")
}

/// `H_ω Z_(p_n) ⊕ H_ω* Z_(p_n)`.
pub fn g3() -> GroupSpec {
    let spine = ChainSpec::new(vec![Segment::Omega, Segment::OmegaStar]);
    GroupSpec::new(spine, vec![RibAssign { on: Selector::All, rib: RibSource::Family { cut_complete: true } }], Mode::Hahn).expect("catalogue presentation")
}

/// `Σ_ω ℤ + ℤ(2,2,…)`.
pub fn g4() -> GroupSpec {
    let mode = Mode::Generators(vec![Generator { name: "a".into(), prefix: vec![], tail: Coef::int(2) }]);
    GroupSpec::uniform(omega(), RibSpec::z(), mode)
}

/// `Z_(2) × Z_(3) × Z_(5)`, lexicographic.
pub fn h235() -> GroupSpec {
    GroupSpec::finite(vec![RibSpec::z_loc(2, true), RibSpec::z_loc(3, true), RibSpec::z_loc(5, true)], Mode::Hahn)
}

pub fn groups() -> Vec<(&'static str, GroupSpec)> {
    vec![("g0", g0()), ("g1", g1()), ("g2", g2()), ("g3", g3()), ("g4", g4()), ("h235", h235())]
}

pub fn frr_uniform() -> Vec<(&'static str, GroupSpec)> {
    let z = RibSpec::z;
    vec![
        ("z", GroupSpec::finite(vec![z()], Mode::Hahn)),
        ("z2", GroupSpec::finite(vec![z(), z()], Mode::Hahn)),
        ("z3", GroupSpec::finite(vec![z(), z(), z()], Mode::Hahn)),
        ("z2r", GroupSpec::finite(vec![z(), z(), RibSpec::r()], Mode::Hahn)),
    ]
}

pub fn chains() -> Vec<(&'static str, ChainSpec, Status)> {
    let ws = ChainSpec::new(vec![Segment::Omega, Segment::OmegaStar]);
    let reals = ChainSpec::single(Segment::DenseComplete)
        .with_colour("A", vec![(0, Membership::DenseCodense { part: Part::Rational })])
        .with_colour("B", vec![(0, Membership::Finite { coords: vec![q(0), q(1)] })]);
    vec![
        ("omega", omega(), Status::StablyEmbedded),
        ("omega_star", ChainSpec::single(Segment::OmegaStar), Status::StablyEmbedded),
        ("integers", ChainSpec::single(Segment::Int), Status::StablyEmbedded),
        ("reals_coloured", reals, Status::StablyEmbedded),
        ("omega_omega_star", ws.clone(), Status::NotStablyEmbedded),
        ("omega_omega_star_marked", ws.with_colour("P", vec![(0, Membership::All)]), Status::StablyEmbedded),
    ]
}

/// `H` of the mod-2 example: `Σ_ω ℤ` plus the constant sequence `1 + δ`
/// with `δ` infinite and divisible, inside the Hahn product of a nonstandard
/// model of `ℤ`.
pub fn mod2_pair() -> PairSpec {
    let h = GroupSpec::uniform(omega(), RibSpec::z().extended(), Mode::Generators(vec![Generator { name: "h".into(), prefix: vec![], tail: Coef::new(q(1), q(1)) }]));
    let mut p = PairSpec::new(g0(), h);
    p.probes = vec![json!({ "gens": { "h": 1 } })];
    p
}

pub fn mod2_generator(p: &PairSpec) -> Elem {
    p.h.elem(json!({ "gens": { "h": 1 } }))
}

#[derive(Clone, Debug)]
pub struct PairCase {
    pub name: &'static str,
    pub pair: PairSpec,
    pub elems: Vec<Elem>,
    pub targets: Vec<Target>,
}

fn fin(ribs: Vec<RibSpec>) -> GroupSpec {
    GroupSpec::finite(ribs, Mode::Hahn)
}

fn vec_elem(cs: &[Coef]) -> Elem {
    Elem::from_pairs(cs.iter().enumerate().map(|(i, c)| (Pos::at(0, i as i64), *c)).collect(), None)
}

fn c(s: i64, d: i64) -> Coef {
    Coef::new(q(s), q(d))
}

fn tail(t: Coef, pairs: &[(i64, i64)]) -> Elem {
    Elem::from_pairs(pairs.iter().map(|(i, v)| (Pos::at(0, *i), Coef::int(*v))).collect(), Some((0, t)))
}

/// Ten pairs `G ⊆ H` with elements of `H` and target predicates.
pub fn pairs() -> Vec<PairCase> {
    use Target::*;
    let z = RibSpec::z;
    let zx = || RibSpec::z().extended();
    let all3 = |n: i64| vec![Sign { n }, CongBullet { n, m: 2, k: 1 }, EqBullet { n, k: 1 }];
    let mut out = vec![
        PairCase {
            name: "hahn-identity",
            pair: PairSpec::new(g1(), g1()),
            elems: vec![vec_elem(&[Coef::int(3), Coef::zero(), Coef::int(-1)]), tail(Coef::int(1), &[(1, 2)])],
            targets: vec![Sign { n: 1 }, Sign { n: 2 }, CongBullet { n: 1, m: 3, k: 1 }, EqBullet { n: 1, k: 3 }],
        },
        PairCase {
            name: "sum-in-hahn",
            pair: PairSpec::new(g0(), g1()),
            elems: vec![tail(Coef::int(1), &[]), tail(Coef::int(2), &[(0, 1)]), vec_elem(&[Coef::zero(), Coef::int(5)])],
            targets: all3(1),
        },
        PairCase {
            name: "z-in-nonstandard-z",
            pair: PairSpec::new(fin(vec![z()]), fin(vec![zx()])),
            elems: vec![vec_elem(&[c(3, 1)]), vec_elem(&[Coef::new(q(1), qr(-1, 2))]), vec_elem(&[c(0, 1)])],
            targets: vec![Sign { n: 1 }, Sign { n: 3 }, CongBullet { n: 1, m: 2, k: 1 }, EqBullet { n: 1, k: 1 }],
        },
        PairCase {
            name: "z2-in-z-nonstandard-z",
            pair: PairSpec::new(fin(vec![z(), z()]), fin(vec![z(), zx()])),
            elems: vec![vec_elem(&[Coef::int(1), c(3, 1)]), vec_elem(&[Coef::int(2), c(0, -1)])],
            targets: vec![Sign { n: 1 }, CongBullet { n: 1, m: 3, k: 2 }, EqBullet { n: 2, k: 1 }],
        },
        PairCase {
            name: "z-in-z2",
            pair: PairSpec::new(fin(vec![z()]), fin(vec![z(), z()])),
            elems: vec![vec_elem(&[Coef::int(2), Coef::int(1)]), vec_elem(&[Coef::int(-1), Coef::int(-3)])],
            targets: vec![Sign { n: 1 }, CongBullet { n: 1, m: 2, k: 1 }, EqBullet { n: 1, k: 2 }],
        },
        PairCase { name: "mod2", pair: mod2_pair(), elems: vec![], targets: all3(1) },
        PairCase {
            name: "hahn-in-nonstandard-hahn",
            pair: PairSpec::new(g1(), GroupSpec::uniform(omega(), zx(), Mode::Hahn)),
            elems: vec![tail(c(0, 1), &[(1, 2)]), tail(c(0, -1), &[(0, 1)])],
            targets: all3(1),
        },
        PairCase {
            name: "mixed-fin3",
            pair: PairSpec::new(fin(vec![z(), RibSpec::q(), RibSpec::z_loc(3, true)]), fin(vec![zx(), RibSpec::q().extended(), RibSpec::z_loc(3, true).extended()])),
            elems: vec![vec_elem(&[Coef::int(2), Coef::new(qr(1, 3), q(1)), Coef::int(5)]), vec_elem(&[Coef::int(1), c(0, 1), Coef::new(qr(1, 2), q(1))])],
            targets: vec![Sign { n: 1 }, CongBullet { n: 1, m: 3, k: 1 }, EqBullet { n: 1, k: 2 }],
        },
        PairCase {
            name: "g4-in-hahn",
            pair: PairSpec::new(g4(), g1()),
            elems: vec![tail(Coef::int(1), &[]), tail(Coef::int(3), &[(0, 1)])],
            targets: vec![Sign { n: 1 }, CongBullet { n: 1, m: 2, k: 1 }, CongBullet { n: 1, m: 3, k: 1 }],
        },
        PairCase {
            name: "z-in-q",
            pair: PairSpec::new(fin(vec![z()]), fin(vec![RibSpec::q()])),
            elems: vec![vec_elem(&[Coef::std(qr(1, 2))]), vec_elem(&[Coef::std(qr(-7, 3))])],
            targets: vec![Sign { n: 1 }, Sign { n: 3 }],
        },
    ];
    let m2 = out.iter_mut().find(|p| p.name == "mod2").expect("mod2 case");
    let h = mod2_generator(&m2.pair);
    m2.elems = vec![h.clone(), h.scale(2), h.add(&Elem::single(Pos::at(0, 1), Coef::int(3)))];
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

fn case(name: &str, pass: bool, detail: Value) -> CaseResult {
    CaseResult { name: name.to_string(), pass, detail }
}

type Check = fn() -> CaseResult;

fn spine_values() -> CaseResult {
    let g = h235();
    let got: Vec<Value> = [2u64, 3, 5].iter().map(|p| g.spine_m(*p).map(|s| s.to_json()).unwrap_or(Value::Null)).collect();
    let ok = [2u64, 3, 5].iter().enumerate().all(|(i, p)| {
        g.spine_m(*p).ok().and_then(|s| s.points()) == Some(vec![SpineValue::At(g.spine.pos(0, i as i64)), SpineValue::Inf])
    });
    case("value-sets-235", ok, json!(got))
}

fn g1_g0() -> CaseResult {
    let a = classify_main(&g1(), DEFAULT_BOUND);
    let b = classify_main(&g0(), DEFAULT_BOUND);
    let ok = a.status == Status::StablyEmbedded && b.status == Status::NotStablyEmbedded && b.witnesses().any(|r| r.rule.starts_with("max.") && r.witness.is_some());
    case("g1-and-sum", ok, json!({ "g1": a.status, "g0": b.status }))
}

fn g2_case() -> CaseResult {
    let v = classify_main(&g2(), DEFAULT_BOUND);
    let ok = v.status == Status::StablyEmbedded && v.cites("rib.presburger") && v.cites("rib.complete-hull") && v.cites("spine.dense-codense");
    case("g2", ok, json!({ "status": v.status, "rules": v.reasons.iter().map(|r| r.rule.clone()).collect::<Vec<_>>() }))
}

fn g3_case() -> CaseResult {
    let v = classify_main(&g3(), DEFAULT_BOUND);
    let mid = v.witnesses().any(|r| r.witness.as_ref().is_some_and(|w| w["kind"] == json!({ "kind": "SegmentBoundary", "after": 0 })));
    case("g3", v.status == Status::NotStablyEmbedded && mid, json!({ "status": v.status }))
}

fn g4_case() -> CaseResult {
    let g = g4();
    let a = g.elem(json!({ "gens": { "a": 1 } }));
    let spine = g.spine_m(2).map(|s| s.describe()).unwrap_or_default();
    let val = g.val_m(&a, 2);
    let m = g.check_m(DEFAULT_BOUND);
    let v = classify_main(&g, DEFAULT_BOUND);
    let ok = spine == "ω+1∪{∞}" && val == SpineValue::Limit(0) && !m.holds() && v.status == Status::Unknown;
    case("g4", ok, json!({ "spine_2": spine, "val_2": val.to_json(), "check_m": m.status, "status": v.status }))
}

fn frr_case() -> CaseResult {
    let mut ok = true;
    let mut out = serde_json::Map::new();
    for (name, g) in frr_uniform() {
        let s = classify_frr(&g).map(|v| v.status);
        ok &= s == Ok(Status::UniformlyStablyEmbedded);
        out.insert(name.into(), json!(format!("{s:?}")));
    }
    let zq = classify_frr(&fin(vec![RibSpec::z(), RibSpec::q()])).map(|v| v.status);
    ok &= zq == Ok(Status::NotStablyEmbedded);
    out.insert("zq".into(), json!(format!("{zq:?}")));
    case("frr", ok, Value::Object(out))
}

fn chain_case() -> CaseResult {
    let mut ok = true;
    let mut out = serde_json::Map::new();
    for (name, c, want) in chains() {
        let got = c.chain_stably_embedded().status;
        ok &= got == want;
        out.insert(name.into(), json!(got));
    }
    case("chains", ok, Value::Object(out))
}

fn mod2_case() -> CaseResult {
    let p = mod2_pair();
    let h = mod2_generator(&p);
    let imm = immediate_ext_check(&p, &h);
    let not_imm = matches!(imm, Ok(Immediacy::NotImmediate { beta: SpineValue::At(ref b) }) if *b == p.h.spine.pos(0, 0));
    let v = classify_pair(&p);
    let b_fails = v.reasons.iter().any(|r| r.rule == "pair.b" && r.outcome == Outcome::Fail);
    case("mod2", not_imm && b_fails, json!({ "pair_status": v.status, "clause_b_fails": b_fails }))
}

pub fn corpus_checks() -> Vec<(&'static str, Check)> {
    vec![
        ("value-sets-235", spine_values as Check),
        ("g1-and-sum", g1_g0),
        ("g2", g2_case),
        ("g3", g3_case),
        ("g4", g4_case),
        ("frr", frr_case),
        ("chains", chain_case),
        ("mod2", mod2_case),
    ]
}

/// Runs every corpus check; output order follows the list whatever the
/// executor.
pub fn corpus(exec: Exec) -> Vec<CaseResult> {
    exec.map(&corpus_checks(), |(_, f)| f())
}

/// Every element of `g` supported on `positions` with coefficients in
/// `-bound..=bound`.
pub fn sample_elems(g: &GroupSpec, positions: &[Pos], bound: i64) -> Vec<Elem> {
    let mut out = Vec::new();
    let mut cs = vec![-bound; positions.len()];
    loop {
        let e = Elem::from_pairs(positions.iter().zip(&cs).map(|(p, c)| (*p, Coef::int(*c))).collect(), None);
        if g.is_member(&e) {
            out.push(e);
        }
        let mut i = 0;
        loop {
            if i == cs.len() {
                return out;
            }
            cs[i] += 1;
            if cs[i] <= bound {
                break;
            }
            cs[i] = -bound;
            i += 1;
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepReport {
    pub pair: String,
    pub schemes: usize,
    pub no_maximum: usize,
    pub evaluations: usize,
    pub failures: Vec<String>,
}

/// Checks every scheme of a catalogued pair against direct evaluation in
/// `H` on all sampled `x ∈ G`, together with the value decomposition and
/// the agreement of `NoMaximum` with the immediate-extension witnesses.
pub fn sweep(case: &PairCase, positions: usize, bound: i64, exec: Exec) -> SweepReport {
    let pair = &case.pair;
    let (g, h) = (&pair.g, &pair.h);
    let pos: Vec<Pos> = crate::valuation::sample_positions(&g.spine).into_iter().filter(|p| !p.coord.is_negative() || !g.spine.segments[p.seg].has_min()).take(positions).collect();
    let xs = sample_elems(g, &pos, bound);
    let mut rep = SweepReport { pair: case.name.to_string(), ..SweepReport::default() };
    for (ai, a) in case.elems.iter().enumerate() {
        for t in &case.targets {
            let tag = format!("{}[{ai}] {t:?}", case.name);
            let (n, m) = (t.n(), t.modulus());
            let b = a.scale(n);
            let approx = match best_approx(pair, a, n, m) {
                Ok(x) => x,
                Err(e) => {
                    rep.failures.push(format!("{tag}: best_approx failed: {e}"));
                    continue;
                }
            };
            let witness = approximation_witness(pair, &b, m);
            let nomax = matches!(approx, Approx::NoMaximum(_));
            if nomax != matches!(witness, Ok(Immediacy::NoMaximumDetected { .. })) {
                rep.failures.push(format!("{tag}: best_approx and the pseudo-limit witness disagree"));
            }
            if m == 0 && pair.pull_back(&b).is_none() && nomax != matches!(immediate_ext_check(pair, &b), Ok(Immediacy::NoMaximumDetected { .. })) {
                rep.failures.push(format!("{tag}: immediate_ext_check disagrees"));
            }
            let s = match scheme(pair, a, *t) {
                Ok(s) if !nomax => s,
                Err(TypedefError::NoMaximum(_)) if nomax => {
                    rep.no_maximum += 1;
                    continue;
                }
                other => {
                    rep.failures.push(format!("{tag}: unexpected scheme result {:?}", other.map(|s| s.approx.beta)));
                    continue;
                }
            };
            rep.schemes += 1;
            let bad: Vec<String> = exec
                .map(&xs, |x| {
                    let y = b.sub(&pair.embed(x));
                    let v = h.val_m(&y, m);
                    if v > s.approx.beta {
                        return Some(format!("{tag}: x = {x:?} beats β"));
                    }
                    if decompose_val(pair, &s, x) != v {
                        return Some(format!("{tag}: decomposition fails at x = {x:?}"));
                    }
                    match scheme_eval(pair, &s, x) {
                        Ok(got) if got == t.holds_in(h, &y) => None,
                        Ok(_) => Some(format!("{tag}: scheme disagrees at x = {x:?}")),
                        Err(e) => Some(format!("{tag}: {e} at x = {x:?}")),
                    }
                })
                .into_iter()
                .flatten()
                .collect();
            rep.evaluations += xs.len();
            rep.failures.extend(bad.into_iter().take(3));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_validates() {
        for (_, g) in groups() {
            g.validate().unwrap();
        }
        for p in pairs() {
            p.pair.validate().unwrap();
            for e in &p.elems {
                p.pair.h.contains(e).unwrap();
            }
        }
        assert_eq!(pairs().len(), 10);
    }

    #[test]
    fn corpus_passes_in_order() {
        let seq = corpus(Exec::Sequential);
        assert!(seq.iter().all(|c| c.pass), "{seq:#?}");
        let names: Vec<String> = corpus(Exec::Parallel).into_iter().map(|c| c.name).collect();
        assert_eq!(names, seq.into_iter().map(|c| c.name).collect::<Vec<_>>());
    }
}
