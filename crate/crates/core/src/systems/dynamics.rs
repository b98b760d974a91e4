//! Iteration and metric evaluation for every catalog system.

use crate::error::{Error, Result};
use crate::point::{NatPoint, PointRef, Sides, SymbolRule, WordPoint};
use crate::space::{ClosedSet, System};
use crate::systems::SystemKind;

impl SystemKind {
    pub fn step(&self, x: &PointRef) -> Result<PointRef> {
        self.iterate(x, 1)
    }

    pub fn step_inverse(&self, x: &PointRef) -> Result<PointRef> {
        self.iterate(x, -1)
    }

    /// Tⁿx. O(1) for rotations (fused multiply-add) and word systems
    /// (offset bump); callers gate negative n on invertibility.
    pub fn iterate(&self, x: &PointRef, n: i64) -> Result<PointRef> {
        Ok(match (self, x) {
            (SystemKind::Rotation { alpha }, PointRef::Circle { angle }) => {
                PointRef::Circle { angle: angle.add(alpha.mul_int(n)) }
            }
            (
                SystemKind::Shift { .. } | SystemKind::Sturmian { .. } | SystemKind::Toeplitz { .. },
                PointRef::Word { point },
            ) => PointRef::Word { point: point.shifted(n) },
            (SystemKind::Odometer { periods }, PointRef::Odometer { phase }) => {
                PointRef::Odometer { phase: phase.add(periods, n) }
            }
            (SystemKind::NatCompact, p @ PointRef::Nat { .. }) => p.clone(),
            (SystemKind::Product { left, right }, PointRef::Pair { left: a, right: b }) => {
                PointRef::pair(left.kind.iterate(a, n)?, right.kind.iterate(b, n)?)
            }
            (SystemKind::Quotient { base, .. }, PointRef::Class { rep }) => {
                PointRef::class(base.kind.iterate(rep, n)?)
            }
            (SystemKind::NaturalExtension { base, depth }, PointRef::Tower { levels }) => {
                let mut levels = levels.clone();
                let steps = n.unsigned_abs();
                for _ in 0..steps {
                    if n > 0 {
                        let top = base.kind.step(&levels[0])?;
                        levels.pop();
                        levels.insert(0, top);
                    } else {
                        levels.remove(0);
                        let last = preimage(base, levels.last().expect("depth ≥ 1"))?;
                        levels.push(last);
                    }
                }
                debug_assert_eq!(levels.len(), *depth);
                PointRef::Tower { levels }
            }
            _ => return Err(Error::DomainMismatch(format!("{x:?}"), "iterate".into())),
        })
    }

    /// Distance with |result − ϱ(x,y)| ≤ 2^-precision (f64-capped).
    pub fn distance(&self, x: &PointRef, y: &PointRef, precision: u32) -> f64 {
        match (self, x, y) {
            (SystemKind::Rotation { .. }, PointRef::Circle { angle: a }, PointRef::Circle { angle: b }) => {
                a.circle_dist_f64(*b)
            }
            (SystemKind::Shift { sides }, PointRef::Word { point: a }, PointRef::Word { point: b })
            | (SystemKind::Sturmian { sides, .. }, PointRef::Word { point: a }, PointRef::Word { point: b }) => {
                word_distance(a, b, *sides, precision)
            }
            (SystemKind::Toeplitz { .. }, PointRef::Word { point: a }, PointRef::Word { point: b }) => {
                word_distance(a, b, Sides::Two, precision)
            }
            (SystemKind::Odometer { periods }, PointRef::Odometer { phase: a }, PointRef::Odometer { phase: b }) => {
                for k in 1..=precision as usize {
                    if a.residue(periods, k) != b.residue(periods, k) {
                        return 2f64.powi(-(k as i32));
                    }
                }
                0.0
            }
            (SystemKind::NatCompact, PointRef::Nat { value: a }, PointRef::Nat { value: b }) => {
                (a.recip() - b.recip()).abs()
            }
            (SystemKind::Product { left, right }, PointRef::Pair { left: a1, right: a2 }, PointRef::Pair { left: b1, right: b2 }) => {
                left.kind.distance(a1, b1, precision).max(right.kind.distance(a2, b2, precision))
            }
            (SystemKind::Quotient { base, collapsed }, PointRef::Class { rep: a }, PointRef::Class { rep: b }) => {
                let direct = base.kind.distance(a, b, precision);
                let through = dist_to_collapsed(base, collapsed, a, precision)
                    + dist_to_collapsed(base, collapsed, b, precision);
                direct.min(through)
            }
            (SystemKind::NaturalExtension { base, .. }, PointRef::Tower { levels: a }, PointRef::Tower { levels: b }) => {
                let m = base.diam() + 1.0;
                let mut sum = 0.0;
                for (i, (xa, xb)) in a.iter().zip(b.iter()).enumerate() {
                    sum += base.kind.distance(xa, xb, precision) / (2f64.powi(i as i32 + 1) * m);
                }
                sum
            }
            _ => panic!("distance on mismatched shapes (validated upstream)"),
        }
    }
}

/// 2^-(first disagreement index) with |i| minimized for two-sided words;
/// 0 when the scanned windows agree (the true distance is then < 2^-precision).
pub fn word_distance(a: &WordPoint, b: &WordPoint, sides: Sides, precision: u32) -> f64 {
    match a.first_disagreement(b, sides, precision) {
        Some(k) => 2f64.powi(-(k as i32)),
        None => 0.0,
    }
}

/// d(x, C) for the collapse quotient metric.
pub fn dist_to_collapsed(
    base: &System,
    collapsed: &ClosedSet,
    rep: &PointRef,
    precision: u32,
) -> f64 {
    match collapsed {
        ClosedSet::SinglePoint { point } => base.kind.distance(rep, point, precision),
        ClosedSet::CrossAtInfinity => {
            let PointRef::Pair { left: word, right: nat } = rep else {
                panic!("cross-at-infinity collapse lives in shift × nat-compact");
            };
            let (PointRef::Word { point }, PointRef::Nat { value }) = (&**word, &**nat) else {
                panic!("cross-at-infinity collapse lives in shift × nat-compact");
            };
            // d(x, Y₁×{∞}) = 1/q and d(x, {0^∞}×Y₂) = d₁(u, 0^∞)
            let to_infinity = value.recip();
            let to_zero_word = dist_to_zero_word(point, precision);
            to_infinity.min(to_zero_word)
        }
    }
}

/// 2^-(index of the first 1, two-sided); 0 when none is found in scan range.
pub fn dist_to_zero_word(w: &WordPoint, precision: u32) -> f64 {
    for k in 0..=precision as i64 {
        if w.symbol_at(k) == 1 || w.symbol_at(-k) == 1 {
            return 2f64.powi(-(k as i32));
        }
    }
    0.0
}

/// Deterministic preimage rule. Invertible systems use T⁻¹; the one-sided
/// full shift prepends 0 (the lexicographically least extension); one-sided
/// Sturmian points extend along their own coding rule.
pub fn preimage(sys: &System, x: &PointRef) -> Result<PointRef> {
    if sys.flags.invertible {
        return sys.kind.step_inverse(x);
    }
    match (&sys.kind, x) {
        (SystemKind::Shift { sides: Sides::One }, PointRef::Word { point }) => {
            let rule = SymbolRule::Splice {
                neg: Box::new(SymbolRule::Periodic { word: vec![0] }),
                neg_offset: 0,
                pos: Box::new(point.rule.clone()),
                pos_offset: point.offset,
            };
            Ok(PointRef::Word { point: WordPoint { rule, offset: -1 } })
        }
        (SystemKind::Sturmian { sides: Sides::One, .. }, PointRef::Word { point }) => {
            Ok(PointRef::Word { point: point.shifted(-1) })
        }
        _ => Err(Error::Unsupported(sys.id.clone(), "no preimage rule".into())),
    }
}

/// Does this point lie in the collapsed set? Exact where decidable; `None`
/// means "all-zero to scan depth but not syntactically e₁" (boundary
/// uncertainty, reported rather than coerced).
pub fn in_collapsed(
    base: &System,
    collapsed: &ClosedSet,
    rep: &PointRef,
    precision: u32,
) -> Option<bool> {
    match collapsed {
        ClosedSet::SinglePoint { point } => {
            let d = base.kind.distance(rep, point, precision);
            if d > 0.0 {
                Some(false)
            } else if rep == point {
                Some(true)
            } else {
                None
            }
        }
        ClosedSet::CrossAtInfinity => {
            let PointRef::Pair { left: word, right: nat } = rep else {
                return Some(false);
            };
            if matches!(&**nat, PointRef::Nat { value: NatPoint::Infinity }) {
                return Some(true);
            }
            let PointRef::Word { point } = &**word else {
                return Some(false);
            };
            if is_syntactically_zero(&point.rule) {
                return Some(true);
            }
            if dist_to_zero_word(point, precision) > 0.0 {
                Some(false)
            } else {
                None
            }
        }
    }
}

fn is_syntactically_zero(rule: &SymbolRule) -> bool {
    match rule {
        SymbolRule::Periodic { word } => word.iter().all(|&s| s == 0),
        _ => false,
    }
}
