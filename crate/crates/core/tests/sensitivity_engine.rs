//! Spread-set engine against independent oracles, plus classifier verdicts
//! on the catalog exemplars.

use topodyn::angle::AlphaSpec;
use topodyn::point::{NatPoint, PointRef, Sides, SymbolRule};
use topodyn::sensitivity::{
    classify, eq_point_test, multi_sensitivity_witness, multi_to_thick_replay, referee_slice,
    sensitivity_times, stability_times, syndetic_eq_point_test, SensitivityQuery, Verdict,
};
use topodyn::space::{OpenSetDescriptor, SetKind};
use topodyn::systems::{
    make_full_shift, make_product, make_referee_example, make_rotation, make_sturmian,
    make_toeplitz_odometer_pair, SystemKind,
};
use topodyn::timeset::TimeSetMode;

/// Brute-force spread oracle for one-sided full-shift cylinders, reasoning
/// over explicit finite words only: for n below the enumeration length it
/// maximizes over all pairs of 12-symbol words with the cylinder prefix; for
/// larger n it uses the pair that first differs exactly at position n.
fn shift_cylinder_spread_oracle(word: &[u8], n: u64, wlen: usize) -> f64 {
    let l = word.len();
    assert!(l <= wlen);
    if (n as usize) >= wlen {
        // x = word·0^∞ and y = word·0^(n-l)·1·0^∞ differ first at n
        return 1.0;
    }
    let n = n as usize;
    let free = l.max(n); // positions ≥ wlen are unconstrained: pairs differ at wlen
    let mut best = 2f64.powi(-((wlen - n) as i32));
    let suffix_bits = wlen - l;
    for a in 0..(1u32 << suffix_bits) {
        for b in 0..(1u32 << suffix_bits) {
            let sym = |bits: u32, i: usize| -> u8 {
                if i < l {
                    word[i]
                } else {
                    ((bits >> (i - l)) & 1) as u8
                }
            };
            let mut first = None;
            for i in n..wlen {
                if sym(a, i) != sym(b, i) {
                    first = Some(i);
                    break;
                }
            }
            if let Some(p) = first {
                best = best.max(2f64.powi(-((p - n) as i32)));
            }
        }
    }
    let _ = free;
    best
}

#[test]
fn full_shift_cylinder_spread_matches_word_oracle() {
    let shift = make_full_shift(Sides::One);
    let set = OpenSetDescriptor::cylinder(&shift.id, vec![0, 1], 0);
    // engine diam_exact vs oracle for small n
    for n in 0..=14u64 {
        let oracle = shift_cylinder_spread_oracle(&[0, 1], n, 12);
        let engine = shift.diam_exact(&set, n).unwrap();
        assert_eq!(engine, oracle, "n={n}");
    }
}

#[test]
fn full_shift_s_t_is_two_to_thousand() {
    let shift = make_full_shift(Sides::One);
    let set = OpenSetDescriptor::cylinder(&shift.id, vec![0, 1], 0);
    let s = sensitivity_times(&shift, &set, 0.5, 1000).unwrap();
    assert_eq!(s.mode, TimeSetMode::Exact);
    // oracle set: {n : oracle diam > 0.5}
    let expected: Vec<u64> =
        (1..=1000).filter(|&n| shift_cylinder_spread_oracle(&[0, 1], n, 12) > 0.5).collect();
    assert_eq!(s.members().collect::<Vec<_>>(), expected);
    assert_eq!(expected, (2..=1000).collect::<Vec<_>>(), "S = {{2,…,1000}}");
    // boundary strictness: diam(σ¹[01]) = 0.5 is not > 0.5
    assert!(!s.contains(1));

    // complement
    let j = stability_times(&shift, &set, 0.5, 1000).unwrap();
    assert_eq!(j.members().collect::<Vec<_>>(), vec![1]);

    // thick at every k ≤ 100
    for k in [1u64, 10, 50, 100] {
        let cert = s.is_thick_up_to(k).unwrap().expect("thick window");
        cert.revalidate(&s).unwrap();
    }
}

#[test]
fn rotation_arcs_never_spread() {
    let rot = make_rotation(&AlphaSpec::Golden).unwrap();
    for set in rot.basis(4).unwrap() {
        // arc diameter is 2·2^-4 = 2^-3; δ at or above it ⇒ empty, exactly
        let s = sensitivity_times(&rot, &set, 2f64.powi(-3), 100_000).unwrap();
        assert_eq!(s.mode, TimeSetMode::Exact);
        assert!(s.is_empty());
        // δ below the arc diameter ⇒ the isometry spreads it at every n
        let s2 = sensitivity_times(&rot, &set, 2f64.powi(-5), 1000).unwrap();
        assert_eq!(s2.count(), 1000);
    }
}

#[test]
fn referee_slice_spread_empty_iff_p_large() {
    let referee = make_referee_example();
    let SystemKind::Quotient { base, .. } = &referee.kind else { panic!() };
    let delta = 0.25; // 2/δ = 8
    for p in [9u64, 16, 100] {
        let slice = referee_slice(&referee, base, p);
        let s = sensitivity_times(&referee, &slice, delta, 5000).unwrap();
        assert_eq!(s.mode, TimeSetMode::Exact);
        assert!(s.is_empty(), "p={p} > 2/δ");
    }
    // p = 8 exactly: diam = 2/8 = δ, strict > fails, still empty
    let slice = referee_slice(&referee, base, 8);
    assert!(sensitivity_times(&referee, &slice, delta, 5000).unwrap().is_empty());
    // p < 2/δ: full
    let slice = referee_slice(&referee, base, 7);
    let s = sensitivity_times(&referee, &slice, delta, 5000).unwrap();
    assert_eq!(s.count(), 5000);
}

#[test]
fn multi_witness_is_max_cylinder_length() {
    let shift = make_full_shift(Sides::One);
    let words: Vec<Vec<u8>> = vec![
        vec![0, 1],
        vec![1, 1, 0],
        vec![0, 0, 0, 0, 1],
        vec![1, 0, 1, 0, 1, 0, 1],
        vec![0, 1, 1, 0, 1, 1, 0, 1],
    ];
    let sets: Vec<OpenSetDescriptor> = words
        .iter()
        .map(|w| OpenSetDescriptor::cylinder(&shift.id, w.clone(), 0))
        .collect();
    let w = multi_sensitivity_witness(&shift, 0.5, &sets, 1000, 7).unwrap().expect("witness");
    assert_eq!(w.n, 8, "least common spread time = max cylinder length");
    assert_eq!(w.pairs.len(), sets.len());
    for pair in &w.pairs {
        assert!(pair.distance > 0.5);
    }

    // k = 1 reduces to the least element of S_T
    let single = multi_sensitivity_witness(&shift, 0.5, &sets[..1], 1000, 7).unwrap().unwrap();
    let s = sensitivity_times(&shift, &sets[0], 0.5, 1000).unwrap();
    assert_eq!(Some(single.n), s.min_member());

    // rotation: any sets, small δ → none, certified (exact empties)
    let rot = make_rotation(&AlphaSpec::Golden).unwrap();
    let arcs = rot.basis(3).unwrap();
    assert!(multi_sensitivity_witness(&rot, 0.25, &arcs[..3], 1000, 7).unwrap().is_none());
}

#[test]
fn classifier_full_shift_all_yes() {
    let shift = make_full_shift(Sides::One);
    let query = SensitivityQuery::defaults(2000, 4, 11);
    let report = classify(&shift, &query).unwrap();
    assert!(report.sensitive.is_yes(), "{:?}", report.sensitive);
    assert!(report.thickly_sensitive.is_yes(), "{:?}", report.thickly_sensitive);
    assert!(report.multi_sensitive.is_yes(), "{:?}", report.multi_sensitive);
    assert!(!report.spread_witnesses.is_empty());
    assert!(!report.thick_certificates.is_empty());
}

#[test]
fn classifier_rotation_certified_no() {
    let rot = make_rotation(&AlphaSpec::Golden).unwrap();
    let query = SensitivityQuery::defaults(2000, 4, 11);
    let report = classify(&rot, &query).unwrap();
    assert!(report.sensitive.is_certified_no(), "{:?}", report.sensitive);
    assert!(report.thickly_sensitive.is_certified_no());
    assert!(report.multi_sensitive.is_certified_no());
    // coherence: derived flags propagate
    let Verdict::CertifiedNoAtScale { derived, .. } = report.thickly_sensitive else { panic!() };
    assert!(derived);
}

#[test]
fn classifier_sturmian_sensitive_but_not_thick() {
    let (sturmian, _) = make_sturmian(&AlphaSpec::Golden, 0.0, Sides::One).unwrap();
    let query = SensitivityQuery::defaults(10_000, 4, 11);
    let report = classify(&sturmian, &query).unwrap();
    assert!(report.sensitive.is_yes(), "{:?}", report.sensitive);
    assert!(report.thickly_sensitive.is_certified_no(), "{:?}", report.thickly_sensitive);
    assert!(report.multi_sensitive.is_certified_no(), "{:?}", report.multi_sensitive);
    let Verdict::CertifiedNoAtScale { derived, .. } = report.multi_sensitive else { panic!() };
    assert!(derived, "multi certified_no is derived from the thick counterexample");
}

#[test]
fn sturmian_stability_is_syndetic() {
    let (sturmian, _) = make_sturmian(&AlphaSpec::Golden, 0.0, Sides::One).unwrap();
    // a length-4 cylinder: J_T(U, 2^-3) syndetic up to 10^4
    let basis = sturmian.basis(4).unwrap();
    let mut found = false;
    for set in &basis {
        let j = stability_times(&sturmian, set, 2f64.powi(-3), 10_000).unwrap();
        assert_eq!(j.mode, TimeSetMode::Exact);
        let gap = j.max_gap();
        if gap <= 100 {
            let cert = j.is_syndetic_up_to(gap).unwrap().unwrap();
            cert.revalidate(&j).unwrap();
            found = true;
        }
    }
    assert!(found, "some cylinder has a tightly syndetic stability set");
}

#[test]
fn multi_to_thick_replay_on_shift_and_product() {
    let shift = make_full_shift(Sides::One);
    let set = OpenSetDescriptor::cylinder(&shift.id, vec![0, 1, 1], 0);
    for k in [4u64, 16, 64] {
        let cert = multi_to_thick_replay(&shift, &set, 0.5, k, 2000, 3)
            .unwrap()
            .expect("window found");
        let s = sensitivity_times(&shift, &set, 0.5, 2000).unwrap();
        cert.revalidate(&s).unwrap();
    }

    let prod = make_product(make_full_shift(Sides::Two), make_full_shift(Sides::Two));
    let SystemKind::Product { left, right } = &prod.kind else { panic!() };
    let pset = OpenSetDescriptor {
        system_id: prod.id.clone(),
        kind: SetKind::Product {
            parts: vec![
                OpenSetDescriptor::cylinder(&left.id, vec![1, 0], -1),
                OpenSetDescriptor::cylinder(&right.id, vec![0, 1], 0),
            ],
        },
    };
    let cert = multi_to_thick_replay(&prod, &pset, 0.5, 32, 2000, 3)
        .unwrap()
        .expect("window found on the product");
    let s = sensitivity_times(&prod, &pset, 0.5, 2000).unwrap();
    cert.revalidate(&s).unwrap();
}

#[test]
fn eq_point_tests_on_rotation_and_shift() {
    let rot = make_rotation(&AlphaSpec::Golden).unwrap();
    let x = PointRef::circle(topodyn::angle::Angle::from_f64(0.25));
    // isometry: diam(B(x,r)) = 2r ≤ ε at r = ε/2
    let eps = 2f64.powi(-4);
    let r = eq_point_test(&rot, &x, eps, 10_000).unwrap().expect("equicontinuity point");
    assert!(r.exact);
    assert_eq!(r.radius, eps / 2.0);

    // full shift: every ball eventually stretches to diameter 1
    let shift = make_full_shift(Sides::One);
    let y = PointRef::word(SymbolRule::Periodic { word: vec![0, 1] });
    assert!(eq_point_test(&shift, &y, 0.5, 200).unwrap().is_none());

    // Eq ⊆ Eq_syn: rotation passes the syndetic test with the full set
    let syn = syndetic_eq_point_test(&rot, &x, eps, 8, 10_000, 0).unwrap().expect("syndetic");
    assert_eq!(syn.radius, eps / 2.0);
}

#[test]
fn toeplitz_point_is_syndetically_equicontinuous() {
    let (toeplitz, _, _) = make_toeplitz_odometer_pair(vec![2, 4, 8]).unwrap();
    let x = toeplitz.sample_points(1, 0).remove(0);
    for e in 2..=6u32 {
        let eps = 2f64.powi(-(e as i32));
        let res = syndetic_eq_point_test(&toeplitz, &x, eps, 256, 10_000, 0)
            .unwrap()
            .unwrap_or_else(|| panic!("syndetic certificate at ε=2^-{e}"));
        assert!(res.exact);
    }
    // plain equicontinuity fails at small ε (minimal non-equicontinuous)
    assert!(eq_point_test(&toeplitz, &x, 2f64.powi(-4), 10_000).unwrap().is_none());
}

#[test]
fn referee_eq_tests_fail_for_non_collapsed_points() {
    let referee = make_referee_example();
    for q in [2u64, 3, 5] {
        let x = PointRef::class(PointRef::pair(
            PointRef::word(SymbolRule::Periodic { word: vec![1, 0] }),
            PointRef::Nat { value: NatPoint::Fin(q) },
        ));
        // δ_x = ½·diam(Y₁×{q}) = min(½, 1/q); any ε < δ_x must fail
        let eps = 1.0 / q as f64 / 4.0;
        assert!(
            eq_point_test(&referee, &x, eps, 400).unwrap().is_none(),
            "eq must fail at q={q}"
        );
        assert!(
            syndetic_eq_point_test(&referee, &x, eps, 64, 400, 0).unwrap().is_none(),
            "syndetic eq must fail at q={q}"
        );
    }
}

#[test]
fn delta_at_or_above_diameter_warns_empty() {
    let shift = make_full_shift(Sides::One);
    let set = OpenSetDescriptor::cylinder(&shift.id, vec![0], 0);
    let s = sensitivity_times(&shift, &set, 1.0, 100).unwrap();
    assert!(s.is_empty());
    assert!(s.provenance.contains("empty"));
}
