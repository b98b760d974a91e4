//! Points of catalog systems.
//!
//! Symbolic points are never materialized as arrays: a word point carries a
//! deterministic index→symbol rule plus an integer offset, so shifting is an
//! offset bump and querying index i twice always yields the same symbol.

use serde::{Deserialize, Serialize};

use crate::angle::{mechanical_symbol, Angle};

/// Which side(s) of ℤ a word point / shift system lives on.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sides {
    One,
    Two,
}

/// Divisible period structure p_1 | p_2 | … for Toeplitz/odometer systems.
/// Finitely many explicit levels; deeper levels continue geometrically with
/// the last ratio, so every position acquires a fill level.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Periods {
    pub explicit: Vec<u64>,
}

impl Periods {
    pub fn new(explicit: Vec<u64>) -> crate::Result<Self> {
        if explicit.is_empty() || explicit[0] < 2 {
            return Err(crate::Error::Precondition("period structure needs p_1 ≥ 2".into()));
        }
        for w in explicit.windows(2) {
            if w[1] % w[0] != 0 || w[1] == w[0] {
                return Err(crate::Error::Precondition(format!(
                    "periods must strictly divide: {} ∤ {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Periods { explicit })
    }

    fn ratio(&self) -> u64 {
        let n = self.explicit.len();
        if n >= 2 { self.explicit[n - 1] / self.explicit[n - 2] } else { self.explicit[0] }
    }

    /// p_k (1-based); geometric continuation beyond the explicit list.
    /// Saturates near u64::MAX/4 to keep arithmetic safe.
    pub fn period(&self, k: usize) -> u64 {
        if k == 0 {
            return 1;
        }
        if k <= self.explicit.len() {
            return self.explicit[k - 1];
        }
        let mut p = *self.explicit.last().unwrap() as u128;
        let r = self.ratio() as u128;
        for _ in self.explicit.len()..k {
            p = p.saturating_mul(r);
            if p > (u64::MAX / 4) as u128 {
                return u64::MAX / 4;
            }
        }
        p as u64
    }

    /// Fill level of absolute position u: min k ≥ 1 with u ≢ −1 (mod p_k).
    /// None for u = −1, the one position every level leaves open.
    pub fn level_of(&self, u: i64) -> Option<usize> {
        if u == -1 {
            return None;
        }
        let mut k = 1;
        loop {
            let p = self.period(k) as i64;
            if u.rem_euclid(p) != p - 1 {
                return Some(k);
            }
            k += 1;
            // |u + 1| is divisible by p_k for all failing levels, so this
            // terminates well before the saturation plateau for any i64.
            assert!(k < 130, "level_of failed to terminate");
        }
    }

    /// Toeplitz symbol of absolute position u; alternating fill per level.
    pub fn symbol_at(&self, u: i64, hole_fill: u8) -> u8 {
        match self.level_of(u) {
            Some(k) => ((k - 1) % 2) as u8,
            None => hole_fill,
        }
    }
}

/// Deterministic index→symbol rule over ℤ.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolRule {
    /// word[i mod len], defined on all of ℤ.
    Periodic { word: Vec<u8> },
    /// Sturmian coding of ρ + iα against the length-α top arc; `upper`
    /// selects the right-continuous coding.
    Mechanical { alpha: Angle, rho: Angle, upper: bool },
    /// Regular Toeplitz word with integer phase folded into the offset.
    Toeplitz { periods: Periods, hole_fill: u8 },
    /// Toeplitz point over a limit odometer phase (residue tower, truncated).
    /// The truncation limits the certified window: positions whose fill level
    /// exceeds the stored depth fall back to `hole_fill`.
    ToeplitzTower { periods: Periods, residues: Vec<u64>, hole_fill: u8 },
    /// Word surgery: `pos` rule right of 0, `neg` rule left of it.
    Splice {
        neg: Box<SymbolRule>,
        neg_offset: i64,
        pos: Box<SymbolRule>,
        pos_offset: i64,
    },
    /// Concatenation of all binary words in length-lex order (0-padded to ℤ<0);
    /// every finite word occurs infinitely often in the positive tail.
    Champernowne,
    /// XOR-modifications of a base rule: single flips plus an optional
    /// flipped tail from some index on.
    Flips {
        base: Box<SymbolRule>,
        flips: Vec<i64>,
        tail_from: Option<i64>,
    },
    /// 1 exactly on the blocks [base^k − k, base^k), k ≥ 1; 0 elsewhere.
    /// A word engineered to converge along n_k = base^k to a different
    /// one-sided limit than it returns to.
    LacunaryBlocks { base: u64 },
}

impl SymbolRule {
    pub fn symbol(&self, i: i64) -> u8 {
        match self {
            SymbolRule::Periodic { word } => {
                let len = word.len() as i64;
                word[i.rem_euclid(len) as usize]
            }
            SymbolRule::Mechanical { alpha, rho, upper } => {
                mechanical_symbol(*alpha, *rho, i, *upper)
            }
            SymbolRule::Toeplitz { periods, hole_fill } => periods.symbol_at(i, *hole_fill),
            SymbolRule::ToeplitzTower { periods, residues, hole_fill } => {
                for (idx, &r) in residues.iter().enumerate() {
                    let k = idx + 1;
                    let p = periods.period(k) as i64;
                    let u = (r as i64 + i).rem_euclid(p);
                    if u != p - 1 {
                        return ((k - 1) % 2) as u8;
                    }
                }
                *hole_fill
            }
            SymbolRule::Splice { neg, neg_offset, pos, pos_offset } => {
                if i >= 0 {
                    pos.symbol(pos_offset + i)
                } else {
                    neg.symbol(neg_offset + i)
                }
            }
            SymbolRule::Champernowne => champernowne_symbol(i),
            SymbolRule::Flips { base, flips, tail_from } => {
                let mut s = base.symbol(i);
                if flips.contains(&i) {
                    s ^= 1;
                }
                if let Some(m) = tail_from {
                    if i >= *m {
                        s ^= 1;
                    }
                }
                s
            }
            SymbolRule::LacunaryBlocks { base } => {
                if i < 0 {
                    return 0;
                }
                let mut pw = *base as i64;
                let mut k = 1i64;
                while pw - k <= i {
                    if i < pw {
                        return 1;
                    }
                    pw = pw.saturating_mul(*base as i64);
                    k += 1;
                }
                0
            }
        }
    }
}

/// Binary Champernowne-style word: 0 1 00 01 10 11 000 001 …
fn champernowne_symbol(i: i64) -> u8 {
    if i < 0 {
        return 0;
    }
    let mut i = i as u64;
    let mut len = 1u64;
    loop {
        let block = len * (1u64 << len); // total symbols from words of this length
        if i < block {
            let word_idx = i / len;
            let pos = i % len;
            return ((word_idx >> (len - 1 - pos)) & 1) as u8;
        }
        i -= block;
        len += 1;
    }
}

/// A symbolic point: rule plus offset; shifting bumps the offset.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct WordPoint {
    pub rule: SymbolRule,
    pub offset: i64,
}

impl WordPoint {
    pub fn new(rule: SymbolRule) -> Self {
        WordPoint { rule, offset: 0 }
    }

    pub fn symbol_at(&self, i: i64) -> u8 {
        self.rule.symbol(self.offset + i)
    }

    pub fn shifted(&self, by: i64) -> Self {
        WordPoint { rule: self.rule.clone(), offset: self.offset + by }
    }

    /// First index of disagreement scanning i = 0..depth (one-sided) or
    /// |i| = 0..depth (two-sided, ties broken toward ≥ 0); None if the
    /// scanned windows agree.
    pub fn first_disagreement(&self, other: &WordPoint, sides: Sides, depth: u32) -> Option<u32> {
        for k in 0..=depth {
            match sides {
                Sides::One => {
                    if self.symbol_at(k as i64) != other.symbol_at(k as i64) {
                        return Some(k);
                    }
                }
                Sides::Two => {
                    if self.symbol_at(k as i64) != other.symbol_at(k as i64)
                        || self.symbol_at(-(k as i64)) != other.symbol_at(-(k as i64))
                    {
                        return Some(k);
                    }
                }
            }
        }
        None
    }
}

/// Element of the one-point compactification ℕ ∪ {∞} (ℕ starts at 1),
/// metrized by |1/m − 1/n| with 1/∞ = 0.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NatPoint {
    Fin(u64),
    Infinity,
}

impl NatPoint {
    pub fn recip(self) -> f64 {
        match self {
            NatPoint::Fin(m) => 1.0 / m as f64,
            NatPoint::Infinity => 0.0,
        }
    }
}

/// Odometer phase: either an integer (the dense ℤ-orbit of 0) or a residue
/// tower truncated at its stored depth.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdoPhase {
    Int(i64),
    Tower(Vec<u64>),
}

impl OdoPhase {
    pub fn residue(&self, periods: &Periods, level: usize) -> u64 {
        match self {
            OdoPhase::Int(z) => z.rem_euclid(periods.period(level) as i64) as u64,
            OdoPhase::Tower(rs) => {
                if level <= rs.len() {
                    rs[level - 1]
                } else {
                    // beyond the stored depth the tower is extended by its
                    // deepest residue (a fixed deterministic completion)
                    let deep = *rs.last().unwrap();
                    deep % periods.period(level).min(u64::MAX)
                }
            }
        }
    }

    pub fn add(&self, periods: &Periods, k: i64) -> OdoPhase {
        match self {
            OdoPhase::Int(z) => OdoPhase::Int(z + k),
            OdoPhase::Tower(rs) => OdoPhase::Tower(
                rs.iter()
                    .enumerate()
                    .map(|(i, &r)| {
                        let p = periods.period(i + 1) as i64;
                        (r as i64 + k).rem_euclid(p) as u64
                    })
                    .collect(),
            ),
        }
    }
}

/// A point of some catalog system.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum PointRef {
    Circle { angle: Angle },
    Word { point: WordPoint },
    Nat { value: NatPoint },
    Odometer { phase: OdoPhase },
    Pair { left: Box<PointRef>, right: Box<PointRef> },
    /// Class representative in a collapse quotient.
    Class { rep: Box<PointRef> },
    /// Depth-K tower (x_1, …, x_K) with T(x_{i+1}) = x_i.
    Tower { levels: Vec<PointRef> },
}

impl PointRef {
    pub fn circle(a: Angle) -> Self {
        PointRef::Circle { angle: a }
    }
    pub fn word(rule: SymbolRule) -> Self {
        PointRef::Word { point: WordPoint::new(rule) }
    }
    pub fn pair(a: PointRef, b: PointRef) -> Self {
        PointRef::Pair { left: Box::new(a), right: Box::new(b) }
    }
    pub fn class(rep: PointRef) -> Self {
        PointRef::Class { rep: Box::new(rep) }
    }

    pub fn as_word(&self) -> Option<&WordPoint> {
        match self {
            PointRef::Word { point } => Some(point),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_rule_two_sided() {
        let r = SymbolRule::Periodic { word: vec![0, 1] };
        assert_eq!(r.symbol(0), 0);
        assert_eq!(r.symbol(1), 1);
        assert_eq!(r.symbol(-1), 1);
        assert_eq!(r.symbol(-2), 0);
    }

    #[test]
    fn champernowne_lists_words_in_order() {
        // 0 1 00 01 10 11 ...
        let want = [0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 0];
        for (i, &w) in want.iter().enumerate() {
            assert_eq!(champernowne_symbol(i as i64), w, "index {i}");
        }
        // every 4-word occurs somewhere in the first 200 symbols
        let prefix: Vec<u8> = (0..200).map(champernowne_symbol).collect();
        for w in 0u8..16 {
            let pattern: Vec<u8> = (0..4).map(|b| (w >> (3 - b)) & 1).collect();
            assert!(
                prefix.windows(4).any(|win| win == pattern.as_slice()),
                "missing 4-word {w:04b}"
            );
        }
    }

    #[test]
    fn toeplitz_doubling_is_period_doubling_sequence() {
        // fill level of n is ν₂(n+1)+1, so the symbol is ν₂(n+1) mod 2
        let periods = Periods::new(vec![2, 4, 8]).unwrap();
        for n in 0i64..4096 {
            let v2 = (n + 1).trailing_zeros();
            assert_eq!(periods.symbol_at(n, 0), (v2 % 2) as u8, "n={n}");
        }
    }

    #[test]
    fn toeplitz_position_periods_hold() {
        // position u filled at level k repeats with period p_k
        let periods = Periods::new(vec![2, 4, 8]).unwrap();
        for u in 0i64..512 {
            if let Some(k) = periods.level_of(u) {
                let p = periods.period(k) as i64;
                for j in 1..4 {
                    assert_eq!(periods.symbol_at(u, 0), periods.symbol_at(u + j * p, 0));
                }
            }
        }
    }

    #[test]
    fn nondividing_periods_rejected() {
        assert!(Periods::new(vec![2, 6, 9]).is_err());
        assert!(Periods::new(vec![2, 2]).is_err());
        assert!(Periods::new(vec![3, 6, 12]).is_ok());
    }

    #[test]
    fn lacunary_blocks_layout() {
        let r = SymbolRule::LacunaryBlocks { base: 4 };
        // blocks [3,4), [14,16), [61,64)
        let ones: Vec<i64> = (0..70).filter(|&i| r.symbol(i) == 1).collect();
        assert_eq!(ones, vec![3, 14, 15, 61, 62, 63]);
        assert_eq!(r.symbol(-5), 0);
    }

    #[test]
    fn splice_and_flips() {
        let base = SymbolRule::Periodic { word: vec![0] };
        let spliced = SymbolRule::Splice {
            neg: Box::new(SymbolRule::Periodic { word: vec![1] }),
            neg_offset: 0,
            pos: Box::new(base.clone()),
            pos_offset: 0,
        };
        assert_eq!(spliced.symbol(-1), 1);
        assert_eq!(spliced.symbol(0), 0);
        let flipped = SymbolRule::Flips {
            base: Box::new(base),
            flips: vec![5],
            tail_from: Some(10),
        };
        assert_eq!(flipped.symbol(5), 1);
        assert_eq!(flipped.symbol(6), 0);
        assert_eq!(flipped.symbol(11), 1);
    }
}
