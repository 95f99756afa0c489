use proptest::prelude::*;
use proptest::strategy::ValueTree;

use oagkit::arith::{nth_prime, Coef, Q};
use oagkit::catalogue::{chains, g0, g1, g4, groups, h235, pairs};
use oagkit::chain::{ChainSpec, Cut, CutKind, Definability, Point, Pos, Segment};
use oagkit::classify::{all_cuts_definable, classify_frr, classify_main, Status};
use oagkit::formula::{self, Atom, CmpOp, Formula, Rhs, Term};
use oagkit::group::{Elem, GroupSpec, Mode};
use oagkit::pseudo::{delta_max, hahn_pseudo_limit, is_pseudo_limit, DeltaMax, Limit, PseudoSequence};
use oagkit::rib::{self, rib_elem_equiv, RibSpec};
use oagkit::typedef::scheme;
use oagkit::valuation::{sample_positions, SpineValue, DEFAULT_BOUND};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 96, ..ProptestConfig::default() }
}

fn omega_pos(i: i64) -> Pos {
    Pos::at(0, i)
}

/// Finite support in the first six coordinates of an ω spine, optional
/// constant tail.
fn omega_elem(tail: bool) -> impl Strategy<Value = Elem> {
    (prop::collection::vec(-8i64..=8, 6), if tail { (-3i64..=3).boxed() } else { Just(0i64).boxed() }).prop_map(|(cs, t)| {
        let pairs = cs.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, c)| (omega_pos(i as i64), Coef::int(*c))).collect();
        Elem::from_pairs(pairs, (t != 0).then_some((0, Coef::int(t))))
    })
}

fn dense(cs: &[i64]) -> Vec<i64> {
    (0..8).map(|i| cs.get(i).copied().unwrap_or(0)).collect()
}

fn coords(e: &Elem) -> Vec<i64> {
    let mut out = vec![0; 8];
    for (p, c) in &e.fin {
        out[p.coord.to_integer() as usize] = c.s.to_integer();
    }
    out
}

fn modulus() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![0u64, 2, 3, 4])
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn positions_are_totally_ordered(ci in 0usize..6, picks in prop::collection::vec(any::<prop::sample::Index>(), 3..=6)) {
        let c = chains()[ci].1.clone();
        let all = sample_positions(&c);
        let ps: Vec<Point> = picks.iter().map(|i| Point::At(*i.get(&all))).chain([Point::Inf]).collect();
        for a in &ps {
            for b in &ps {
                let ab = c.compare_positions(a, b).unwrap();
                prop_assert_eq!(ab, c.compare_positions(b, a).unwrap().reverse());
                prop_assert_eq!(ab == std::cmp::Ordering::Equal, a == b);
                for d in &ps {
                    if ab.is_le() && c.compare_positions(b, d).unwrap().is_le() {
                        prop_assert!(c.compare_positions(a, d).unwrap().is_le());
                    }
                }
            }
        }
    }

    #[test]
    fn rib_division_round_trips(ri in 0usize..7, k in -40i64..=40, d in 1i64..=6, m in 1u64..=12) {
        let r = &rib::catalogue()[ri];
        let b = Coef::std(Q::new(k, d));
        prop_assume!(r.contains(&b));
        let w = r.divisible(&b.scale(m as i64), m);
        prop_assert!(w.is_some_and(|w| w.scale(m as i64) == b.scale(m as i64) && r.contains(&w)));
    }

    #[test]
    fn ordered_group_axioms(a in omega_elem(true), b in omega_elem(true), c in omega_elem(true)) {
        let g = g1();
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.sub(&a), Elem::zero());
        if g.compare(&a, &b).is_lt() {
            prop_assert!(g.compare(&a.add(&c), &b.add(&c)).is_lt());
        }
    }

    #[test]
    fn multiples_lie_in_mg(h in omega_elem(true), m in 1u64..=8, k in -3i64..=3) {
        prop_assert!(g1().in_mg(&h.scale(m as i64), m).is_some());
        let g = g4();
        let x = h.add(&g.elem(serde_json::json!({ "gens": { "a": k } })));
        let x = Elem::from_pairs(x.fin.clone(), x.tail.filter(|(_, t)| *t == Coef::int(2 * k)));
        if g.is_member(&x) {
            prop_assert!(g.in_mg(&x.scale(m as i64), m).is_some());
        }
    }

    #[test]
    fn sign_is_the_leading_coordinate(a in omega_elem(false)) {
        let v = dense(&coords(&a));
        let want = v.iter().find(|c| **c != 0).map(|c| c.signum() as i32).unwrap_or(0);
        prop_assert_eq!(g1().sign(&a), want);
        prop_assert_eq!(g1().compare(&a, &Elem::zero()) as i32, want);
    }

    #[test]
    fn sum_and_hahn_agree_on_finite_support(a in omega_elem(false), b in omega_elem(false), m in modulus()) {
        let (s, h) = (g0(), g1());
        prop_assert_eq!(s.val_m(&a, m), h.val_m(&a, m));
        prop_assert_eq!(s.compare(&a, &b), h.compare(&a, &b));
        prop_assert_eq!(s.in_mg(&a, m.max(1)), h.in_mg(&a, m.max(1)));
        prop_assert_eq!(s.pred_cong_bullet(&a, m.max(2), 1), h.pred_cong_bullet(&a, m.max(2), 1));
    }

    #[test]
    fn valuation_axioms(a in omega_elem(true), b in omega_elem(true), m in modulus(), n in 1i64..=6) {
        let g = g1();
        let (va, vb) = (g.val_m(&a, m), g.val_m(&b, m));
        let vd = g.val_m(&a.sub(&b), m);
        prop_assert!(vd >= va.min(vb));
        if va != vb {
            prop_assert_eq!(vd, va.min(vb));
        }
        prop_assert_eq!(g.val_m(&a.neg(), m), va);
        prop_assert_eq!(g.nat_val(&a.scale(n)), g.nat_val(&a));
    }

    #[test]
    fn cong_bullet_by_truncation(a in omega_elem(true), m in 2u64..=5, k in -2i64..=2) {
        let g = g1();
        let want = match g.val_m(&a, m) {
            SpineValue::At(p) => g.val_m(&a.sub(&Elem::single(p, Coef::int(k))), m) > SpineValue::At(p),
            _ => false,
        };
        prop_assert_eq!(g.pred_cong_bullet(&a, m, k), want);
    }

    #[test]
    fn delta_max_matches_val_m(a in omega_elem(true), m in modulus()) {
        let g = g1();
        match delta_max(&g, &a, m).unwrap() {
            DeltaMax::Attained { gamma, g_star } => {
                prop_assert_eq!(gamma, g.val_m(&a, m));
                if m > 0 {
                    prop_assert_eq!(g.nat_val(&a.sub(&g_star.scale(m as i64))), gamma);
                }
            }
            DeltaMax::NoMaximum(why) => prop_assert!(false, "Hahn product has no maximum: {}", why),
        }
    }

    #[test]
    fn rule_limits_are_pseudo_limits(which in 0usize..4, len in 4u64..=8, m in prop::sample::select(vec![0u64, 2]), shift in 0i64..6, c in -3i64..=3) {
        let g = g1();
        let rule = match which {
            0 => serde_json::json!({ "kind": "prefix_const", "value": 1 }),
            1 => serde_json::json!({ "kind": "prefix_const", "value": 3 }),
            2 => serde_json::json!({ "kind": "prefix_indicator", "set": "squares" }),
            _ => serde_json::json!({ "kind": "prefix_indicator", "set": "primes" }),
        };
        let s = PseudoSequence::from_json(&g, &serde_json::json!({ "rule": rule, "modulus": m, "length": len })).unwrap();
        let l = match hahn_pseudo_limit(&g, &s).unwrap() {
            Limit::Elem(l) => l,
            Limit::NotRepresentable(_) => {
                prop_assert!(which >= 2, "constant tails are representable");
                return Ok(());
            }
        };
        prop_assert!(is_pseudo_limit(&g, &s, &l).unwrap());
        // Another limit differs from `l` beyond every presented gap.
        let other = l.add(&Elem::single(omega_pos(shift), Coef::int(c)));
        if m == 0 && is_pseudo_limit(&g, &s, &other).unwrap() {
            for w in s.terms.windows(2) {
                prop_assert!(g.nat_val(&l.sub(&other)) > g.nat_val(&w[1].sub(&w[0])));
            }
        }
    }
}

#[test]
fn principal_cuts_are_definable() {
    for (name, c, _) in chains() {
        for p in sample_positions(&c) {
            let cut = c.classify_cut(&Cut::new(CutKind::PrincipalPlus { pos: p })).unwrap();
            assert!(cut.definable.as_ref().is_some_and(Definability::is_definable), "{name} {p:?}");
        }
    }
}

/// Each NotStablyEmbedded chain verdict names a cut that classifies as
/// NotDefinable when replayed.
#[test]
fn chain_witnesses_replay() {
    for (name, c, _) in chains() {
        let v = c.chain_stably_embedded();
        if v.status != Status::NotStablyEmbedded {
            continue;
        }
        let mut replayed = 0;
        for r in v.witnesses() {
            let w = r.witness.as_ref().expect("failing chain reasons carry a cut");
            let cut: Cut = serde_json::from_value(w.clone()).unwrap();
            let again = c.classify_cut(&Cut::new(cut.kind)).unwrap();
            assert!(matches!(again.definable, Some(Definability::NotDefinable { .. })), "{name}");
            replayed += 1;
        }
        assert!(replayed > 0, "{name}");
    }
}

#[test]
fn ordered_sum_is_associative() {
    let cs: Vec<ChainSpec> = chains().into_iter().map(|(_, c, _)| c).chain([ChainSpec::new(vec![Segment::Fin { k: 2 }])]).collect();
    for a in &cs {
        for b in &cs {
            for c in &cs {
                let l = a.ordered_sum(b).ordered_sum(c);
                let r = a.ordered_sum(&b.ordered_sum(c));
                assert_eq!(l.normalize().0, r.normalize().0);
                for p in sample_positions(&l).into_iter().take(12) {
                    assert_eq!(l.normalized_position(&p), r.normalized_position(&p));
                }
            }
        }
    }
}

#[test]
fn rib_equivalence_is_an_equivalence() {
    let cat = rib::catalogue();
    for a in &cat {
        assert!(rib_elem_equiv(a, a));
        for b in &cat {
            assert_eq!(rib_elem_equiv(a, b), rib_elem_equiv(b, a));
            for c in &cat {
                if rib_elem_equiv(a, b) && rib_elem_equiv(b, c) {
                    assert!(rib_elem_equiv(a, c));
                }
            }
        }
    }
}

#[test]
fn value_sets_follow_unit_divisibility() {
    let mixed = GroupSpec::finite(vec![RibSpec::z(), RibSpec::q(), RibSpec::z_loc(3, true), RibSpec::r(), RibSpec::z_loc(2, false)], Mode::Hahn);
    for g in [g0(), g1(), h235(), mixed] {
        for m in 2..=6 {
            let vs = g.spine_m(m).unwrap();
            assert!(vs.contains(&SpineValue::Inf));
            for p in sample_positions(&g.spine) {
                let unit = g.rib(&p).unwrap().min_positive().unwrap_or(Coef::int(1));
                assert_eq!(vs.contains(&SpineValue::At(p)), g.rib(&p).unwrap().divisible(&unit, m).is_none(), "m = {m}, {p:?}");
            }
        }
    }
}

#[test]
fn main_pipeline_agrees_with_finite_rank() {
    let (z, r, qq) = (RibSpec::z, RibSpec::r, RibSpec::q);
    let cases = vec![vec![z()], vec![z(), z()], vec![z(), z(), z()], vec![z(), z(), r()], vec![z(), qq()], vec![qq(), z()], vec![z(), z_loc(3)]];
    for ribs in cases {
        let g = GroupSpec::finite(ribs.clone(), Mode::Hahn);
        let a = classify_main(&g, DEFAULT_BOUND).status;
        let b = classify_frr(&g).unwrap().status;
        if a != Status::Unknown {
            assert_eq!(a.is_stably_embedded(), b.is_stably_embedded(), "{ribs:?}: {a:?} vs {b:?}");
        }
    }
}

fn z_loc(p: u64) -> RibSpec {
    RibSpec::z_loc(p, true)
}

#[test]
fn main_pipeline_agrees_with_cut_definability() {
    for (name, g) in groups() {
        let v = classify_main(&g, DEFAULT_BOUND);
        let Ok(report) = all_cuts_definable(&g, DEFAULT_BOUND) else { continue };
        match (v.status, report.all_definable) {
            (Status::Unknown, _) | (_, None) => {}
            (s, Some(all)) => assert_eq!(s.is_stably_embedded(), all, "{name}"),
        }
    }
}

#[test]
fn scheme_parameters_lie_in_g() {
    for c in pairs() {
        for a in &c.elems {
            for t in &c.targets {
                if let Ok(s) = scheme(&c.pair, a, *t) {
                    for (name, x) in &s.params {
                        assert!(c.pair.g.is_member(x), "{} {name}", c.name);
                    }
                }
            }
        }
    }
}

fn term() -> impl Strategy<Value = Term> {
    prop::collection::vec((prop::sample::select(vec!["x", "y", "z"]), -3i64..=3), 1..=3)
        .prop_map(|ps| Term::from_pairs(ps.into_iter().map(|(v, c)| (v.to_string(), c)).collect()))
        .prop_filter("nonzero term", |t| !t.0.is_empty())
}

fn atom() -> impl Strategy<Value = Atom> {
    let op = prop::sample::select(vec![CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Ge]);
    prop_oneof![
        term().prop_map(Atom::Gt0),
        (term(), 2u64..=5).prop_map(|(t, m)| Atom::CongM(t, m)),
        (term(), 2u64..=5, 0i64..=4).prop_map(|(t, m, k)| Atom::CongBullet(t, m, k)),
        (term(), -2i64..=2).prop_map(|(t, k)| Atom::EqBullet(t, k)),
        (modulus(), term(), op.clone(), modulus(), term()).prop_map(|(m, t, op, m2, t2)| Atom::ValCmp { m, term: t, op, rhs: Rhs::Val(m2, t2) }),
        (modulus(), term(), op.clone()).prop_map(|(m, t, op)| Atom::ValCmp { m, term: t, op, rhs: Rhs::Inf }),
        (modulus(), term(), op, 0i64..5).prop_map(|(m, t, op, c)| Atom::ValCmp { m, term: t, op, rhs: Rhs::Const(SpineValue::At(omega_pos(c))) }),
        (prop::sample::select(vec!["discrete", "S2", "rat"]), modulus(), term()).prop_map(|(n, m, t)| Atom::Colour { name: n.to_string(), m, term: t }),
    ]
}

fn formula_tree() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![Just(Formula::True), Just(Formula::False), atom().prop_map(Formula::Atom)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn printing_and_parsing_round_trip(f in formula_tree()) {
        let text = f.to_string();
        let back = formula::parse(&text).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        prop_assert_eq!(formula::parse(&back.to_string()).unwrap(), back);
    }

    #[test]
    fn atoms_evaluate_through_the_valuation(a in omega_elem(true), m in 2u64..=4, k in 0i64..=2) {
        let g = g1();
        let env = [("x".to_string(), a.clone())].into_iter().collect();
        let ev = |s: String| formula::eval(&g, &formula::parse(&s).unwrap(), &env).unwrap();
        prop_assert_eq!(ev("x > 0".into()), g.sign(&a) > 0);
        prop_assert_eq!(ev(format!("x ==={m} {k}")), g.pred_cong_bullet(&a, m, k));
        prop_assert_eq!(ev(format!("x %{m} 0")), g.in_mg(&a, m).is_some());
        prop_assert_eq!(ev(format!("val{m}(x) = inf")), g.val_m(&a, m) == SpineValue::Inf);
    }
}

#[test]
fn formula_corpus_round_trips() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let tree = formula_tree();
    for _ in 0..30 {
        let f = tree.new_tree(&mut runner).unwrap().current();
        let text = f.to_string();
        assert_eq!(formula::parse(&text).unwrap().to_string(), text);
    }
}

#[test]
fn prime_family_ribs_are_distinct() {
    let a: Vec<RibSpec> = (0..5).map(|n| RibSpec::z_loc(nth_prime(n), true)).collect();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in a.iter().enumerate() {
            assert_eq!(rib_elem_equiv(x, y), i == j);
        }
    }
}
