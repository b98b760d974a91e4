//! Property-based invariants: metric axioms, iterate laws, spread-set
//! monotonicity, complement coherence, certificate soundness under fuzzing,
//! and mode arithmetic.

use proptest::prelude::*;

use topodyn::angle::{Angle, AlphaSpec};
use topodyn::point::{PointRef, Sides, SymbolRule};
use topodyn::sensitivity::{sensitivity_times, stability_times};
use topodyn::space::OpenSetDescriptor;
use topodyn::systems::{make_full_shift, make_referee_example, make_rotation, make_sturmian};
use topodyn::timeset::{SetCertificate, TimeSet, TimeSetMode};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms_on_sampled_triples(seed in 0u64..1000) {
        let systems = vec![
            make_rotation(&AlphaSpec::Golden).unwrap(),
            make_full_shift(Sides::Two),
            make_sturmian(&AlphaSpec::Golden, 0.0, Sides::Two).unwrap().0,
            make_referee_example(),
        ];
        for sys in &systems {
            let pts = sys.sample_points(3, seed);
            prop_assume!(pts.len() == 3);
            let prec = 40u32;
            let d01 = sys.distance(&pts[0], &pts[1], prec).unwrap();
            let d10 = sys.distance(&pts[1], &pts[0], prec).unwrap();
            prop_assert_eq!(d01, d10, "symmetry is exact");
            let d12 = sys.distance(&pts[1], &pts[2], prec).unwrap();
            let d02 = sys.distance(&pts[0], &pts[2], prec).unwrap();
            let slack = 2.0 * 2f64.powi(-(prec as i32));
            prop_assert!(d02 <= d01 + d12 + slack, "triangle on {}", sys.id);
            prop_assert!(d01 >= 0.0 && d01 <= sys.diam() + 1e-12);
            prop_assert_eq!(sys.distance(&pts[0], &pts[0], prec).unwrap(), 0.0);
        }
    }

    #[test]
    fn iterate_additivity(seed in 0u64..500, n in 0i64..200, m in 0i64..200) {
        let systems = vec![
            make_rotation(&AlphaSpec::Golden).unwrap(),
            make_full_shift(Sides::One),
            make_sturmian(&AlphaSpec::Golden, 0.0, Sides::One).unwrap().0,
        ];
        for sys in &systems {
            let x = sys.sample_points(1, seed).remove(0);
            let a = sys.iterate(&x, n + m).unwrap();
            let b = sys.iterate(&sys.iterate(&x, n).unwrap(), m).unwrap();
            prop_assert_eq!(sys.distance(&a, &b, 48).unwrap(), 0.0);
        }
    }

    #[test]
    fn spread_sets_monotone_in_delta_and_set(word_bits in 0u8..8, j1 in 1i32..8, j2 in 1i32..8) {
        let shift = make_full_shift(Sides::One);
        let word: Vec<u8> = (0..3).map(|b| (word_bits >> b) & 1).collect();
        let horizon = 300;
        let (da, db) = (2f64.powi(-j1.min(j2)), 2f64.powi(-j1.max(j2)));
        // da ≥ db ⇒ S(U, da) ⊆ S(U, db)
        let set = OpenSetDescriptor::cylinder(&shift.id, word.clone(), 0);
        let s_big = sensitivity_times(&shift, &set, da, horizon).unwrap();
        let s_small = sensitivity_times(&shift, &set, db, horizon).unwrap();
        for n in s_big.members() {
            prop_assert!(s_small.contains(n), "δ-monotonicity at n={}", n);
        }
        // U′ ⊆ U (longer word) ⇒ S(U′, δ) ⊆ S(U, δ)
        let mut longer = word.clone();
        longer.push(1);
        let sub = OpenSetDescriptor::cylinder(&shift.id, longer, 0);
        let s_sub = sensitivity_times(&shift, &sub, da, horizon).unwrap();
        for n in s_sub.members() {
            prop_assert!(s_big.contains(n), "U-monotonicity at n={}", n);
        }
    }

    #[test]
    fn complement_coherence_exact(word_bits in 0u8..16, j in 1i32..6) {
        let shift = make_full_shift(Sides::One);
        let word: Vec<u8> = (0..4).map(|b| (word_bits >> b) & 1).collect();
        let set = OpenSetDescriptor::cylinder(&shift.id, word, 0);
        let delta = 2f64.powi(-j);
        let s = sensitivity_times(&shift, &set, delta, 200).unwrap();
        let jset = stability_times(&shift, &set, delta, 200).unwrap();
        prop_assert_eq!(s.mode, TimeSetMode::Exact);
        for n in 1..=200u64 {
            prop_assert!(s.contains(n) != jset.contains(n), "bit-exact complement at {}", n);
        }
    }

    #[test]
    fn certificate_fuzzing_rejected(members in prop::collection::btree_set(1u64..400, 5..60), k in 1u64..12) {
        let s = TimeSet::from_members(400, TimeSetMode::Exact, "fuzz", members.iter().copied());
        if let Some(cert) = s.is_thick_up_to(k).unwrap() {
            cert.revalidate(&s).unwrap();
            let SetCertificate::ThickWindow { k, location, horizon } = cert else { unreachable!() };
            // move the window to the first gap: must be rejected
            if let Some(gap_at) = (1..=400u64).find(|&n| !s.contains(n)) {
                let bad = SetCertificate::ThickWindow {
                    k,
                    location: gap_at.saturating_sub(k).max(1),
                    horizon,
                };
                prop_assert!(bad.revalidate(&s).is_err());
            }
            prop_assert!(
                SetCertificate::ThickWindow { k, location, horizon: horizon + 1 }
                    .revalidate(&s)
                    .is_err(),
                "horizon mismatch rejected"
            );
        }
        let gap = s.max_gap();
        if gap < 400 {
            let good = s.is_syndetic_up_to(gap).unwrap().unwrap();
            good.revalidate(&s).unwrap();
            if gap > 0 {
                let bad = SetCertificate::SyndeticGap { gap: gap - 1, horizon: 400 };
                prop_assert!(bad.revalidate(&s).is_err());
            }
        }
    }

    #[test]
    fn thick_window_excludes_complement_syndetic_at_same_scale(
        members in prop::collection::btree_set(1u64..300, 1..200),
        k in 1u64..10,
    ) {
        let s = TimeSet::from_members(300, TimeSetMode::Exact, "x", members.iter().copied());
        if s.is_thick_up_to(k).unwrap().is_some() {
            // a full window of k+1 members is a k+1 hole of the complement
            prop_assert!(s.complement().is_syndetic_up_to(k).unwrap().is_none());
        }
    }

    #[test]
    fn rle_roundtrip(members in prop::collection::btree_set(1u64..2000, 0..300)) {
        let s = TimeSet::from_members(2000, TimeSetMode::CertifiedMembers, "rle", members.iter().copied());
        let rle = s.to_rle();
        let back = TimeSet::from_rle(2000, s.mode, s.provenance.clone(), &rle).unwrap();
        prop_assert_eq!(s, back);
    }

    #[test]
    fn two_sided_metric_matches_symbol_scan(flips in prop::collection::btree_set(-40i64..40, 0..6)) {
        let shift = make_full_shift(Sides::Two);
        let base = PointRef::word(SymbolRule::Periodic { word: vec![0, 1, 1] });
        let flipped = PointRef::word(SymbolRule::Flips {
            base: Box::new(SymbolRule::Periodic { word: vec![0, 1, 1] }),
            flips: flips.iter().copied().collect(),
            tail_from: None,
        });
        let d = shift.distance(&base, &flipped, 60).unwrap();
        let expected = flips.iter().map(|f| f.abs()).min().map_or(0.0, |k| 2f64.powi(-k as i32));
        prop_assert_eq!(d, expected, "distance is 2^-min|i| over flipped indices");
    }
}
