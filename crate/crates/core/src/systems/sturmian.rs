//! Exact Sturmian subshift machinery via the rotation representation.
//!
//! A cylinder [w] at offset o corresponds to the arc of starting angles whose
//! coding realizes w, i.e. ⋂_j R^{-(o+j)} P_{w_j} where P_0, P_1 is the
//! two-arc partition with boundary points {0, 1−α}. All admissibility,
//! language-enumeration, and set-diameter questions reduce to exact u128 arc
//! arithmetic: the coding of σⁿ[w] spreads at relative index c exactly when a
//! boundary preimage at time n+c cuts the interior of the cylinder arc.

use crate::angle::{mechanical_symbol, Angle, Arc};

/// The two coding arcs: P_0 = [0, 1−α), P_1 = [1−α, 1).
pub fn partition(alpha: Angle) -> (Arc, Arc) {
    let boundary = alpha.0.wrapping_neg(); // 1 − α
    (Arc { start: 0, len: boundary }, Arc { start: boundary, len: alpha.0 })
}

/// Arc of angles θ with coding(θ)_{offset+j} = word[j] for all j.
/// Empty iff the word is not in the language.
pub fn cylinder_arc(alpha: Angle, word: &[u8], offset: i64) -> Arc {
    let (p0, p1) = partition(alpha);
    if word.is_empty() {
        // whole circle; representable as two halves is unnecessary — callers
        // treat the empty word specially. Return a near-full arc marker.
        return Arc { start: 0, len: u128::MAX };
    }
    let mut acc: Option<Arc> = None;
    for (j, &s) in word.iter().enumerate() {
        let base = if s == 0 { p0 } else { p1 };
        let shifted = base.translate(Angle(alpha.mul_int(offset + j as i64).0.wrapping_neg()));
        acc = Some(match acc {
            None => shifted,
            Some(a) => a.intersect_connected(shifted),
        });
        if acc.unwrap().is_empty() {
            return Arc::EMPTY;
        }
    }
    acc.unwrap()
}

/// All admissible words of the given length at the given offset, with their
/// arcs, sorted lexicographically. There are exactly length+1 of them.
pub fn language(alpha: Angle, length: u32, offset: i64) -> Vec<(Vec<u8>, Arc)> {
    assert!(length >= 1);
    let mut cuts: Vec<u128> = (0..=length as i64)
        .map(|j| alpha.mul_int(offset + j).0.wrapping_neg())
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut out: Vec<(Vec<u8>, Arc)> = Vec::with_capacity(cuts.len());
    for (i, &start) in cuts.iter().enumerate() {
        let end = cuts[(i + 1) % cuts.len()];
        let len = end.wrapping_sub(start);
        if len < 2 {
            continue;
        }
        let arc = Arc { start, len };
        let mid = arc.midpoint();
        let word: Vec<u8> = (0..length as i64)
            .map(|j| mechanical_symbol(alpha, mid, offset + j, false))
            .collect();
        out.push((word, arc));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// True iff a partition boundary preimage at time t cuts the arc interior:
/// ∃ b ∈ {0, 1−α} with b − tα ∈ int(I).
pub fn cut_at(alpha: Angle, arc: Arc, t: i64) -> bool {
    let shift = Angle(alpha.mul_int(t).0.wrapping_neg());
    let b0 = Angle::ZERO.add(shift);
    let b1 = Angle(alpha.0.wrapping_neg()).add(shift);
    arc.contains_interior(b0) || arc.contains_interior(b1)
}

/// Exact diameter exponent of σⁿ(cylinder): diam = 2^-c with
/// c = min{|i| : cut at time n+i}, i ≥ 0 for one-sided systems and i ∈ ℤ for
/// two-sided ones. Returns None if no cut is found within the cap (cannot
/// happen for nonempty arcs at catalog parameters; the boundary orbit visits
/// any arc of length ℓ within O(1/ℓ) steps).
pub fn spread_exponent(
    alpha: Angle,
    arc: Arc,
    n: i64,
    two_sided: bool,
    cap: u32,
) -> Option<u32> {
    for c in 0..=cap as i64 {
        if cut_at(alpha, arc, n + c) {
            return Some(c as u32);
        }
        if two_sided && c > 0 && cut_at(alpha, arc, n - c) {
            return Some(c as u32);
        }
    }
    None
}

/// Bitset of cut times over t ∈ [lo, hi]: bit (t − lo) set iff `cut_at(t)`.
pub fn cut_times(alpha: Angle, arc: Arc, lo: i64, hi: i64) -> Vec<u64> {
    let len = (hi - lo + 1) as usize;
    let mut bits = vec![0u64; len.div_ceil(64)];
    // walk both boundary orbits incrementally: b − tα
    let step = Angle(alpha.0.wrapping_neg());
    let mut b0 = Angle::ZERO.add(Angle(alpha.mul_int(lo).0.wrapping_neg()));
    let mut b1 = Angle(alpha.0.wrapping_neg()).add(Angle(alpha.mul_int(lo).0.wrapping_neg()));
    for idx in 0..len {
        if arc.contains_interior(b0) || arc.contains_interior(b1) {
            bits[idx / 64] |= 1u64 << (idx % 64);
        }
        b0 = b0.add(step);
        b1 = b1.add(step);
    }
    bits
}
