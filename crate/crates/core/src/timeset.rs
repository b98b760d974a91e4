//! Finite-horizon subsets of ℕ with evidence semantics, plus certifiers for
//! thick / syndetic / Δ / IP structure.
//!
//! A TimeSet is a bitset over {1,…,N} together with a mode describing what
//! the bits certify. Window scans are word-parallel (64-bit words, doubling
//! shift-AND), so horizons up to 10^7 stay interactive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSetMode {
    /// n ∈ members ⇔ n is in the mathematical set, for all n ≤ N.
    Exact,
    /// every listed n is witnessed in the set; absences unverified.
    CertifiedMembers,
    /// every unlisted n is witnessed absent; memberships unverified.
    CertifiedAbsences,
}

impl std::fmt::Display for TimeSetMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TimeSetMode::Exact => "exact",
            TimeSetMode::CertifiedMembers => "certified_members",
            TimeSetMode::CertifiedAbsences => "certified_absences",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TimeSet {
    horizon: u64,
    words: Vec<u64>,
    pub mode: TimeSetMode,
    pub provenance: String,
}

impl TimeSet {
    pub fn new(horizon: u64, mode: TimeSetMode, provenance: impl Into<String>) -> Self {
        let words = vec![0u64; (horizon as usize).div_ceil(64)];
        TimeSet { horizon, words, mode, provenance: provenance.into() }
    }

    pub fn full(horizon: u64, mode: TimeSetMode, provenance: impl Into<String>) -> Self {
        let mut s = Self::new(horizon, mode, provenance);
        for n in 1..=horizon {
            s.insert(n);
        }
        s
    }

    pub fn from_members<I: IntoIterator<Item = u64>>(
        horizon: u64,
        mode: TimeSetMode,
        provenance: impl Into<String>,
        members: I,
    ) -> Self {
        let mut s = Self::new(horizon, mode, provenance);
        for n in members {
            s.insert(n);
        }
        s
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn insert(&mut self, n: u64) {
        assert!((1..=self.horizon).contains(&n), "member {n} outside 1..={}", self.horizon);
        let i = (n - 1) as usize;
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    pub fn contains(&self, n: u64) -> bool {
        if !(1..=self.horizon).contains(&n) {
            return false;
        }
        let i = (n - 1) as usize;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros();
                    bits &= bits - 1;
                    Some(wi as u64 * 64 + b as u64 + 1)
                }
            })
        })
    }

    pub fn min_member(&self) -> Option<u64> {
        self.members().next()
    }

    pub fn max_member(&self) -> Option<u64> {
        for (wi, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(wi as u64 * 64 + 63 - w.leading_zeros() as u64 + 1);
            }
        }
        None
    }

    /// {1..N} \ members, with the dual mode.
    pub fn complement(&self) -> TimeSet {
        let mode = match self.mode {
            TimeSetMode::Exact => TimeSetMode::Exact,
            TimeSetMode::CertifiedMembers => TimeSetMode::CertifiedAbsences,
            TimeSetMode::CertifiedAbsences => TimeSetMode::CertifiedMembers,
        };
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        mask_tail(&mut words, self.horizon);
        TimeSet {
            horizon: self.horizon,
            words,
            mode,
            provenance: format!("complement({})", self.provenance),
        }
    }

    /// Bitwise intersection; the result mode is the weakest of the two.
    pub fn intersect(&self, other: &TimeSet) -> Result<TimeSet> {
        if self.horizon != other.horizon {
            return Err(Error::HorizonMismatch(self.horizon as usize, other.horizon as usize));
        }
        let words: Vec<u64> =
            self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        let (mode, note) = match (self.mode, other.mode) {
            (TimeSetMode::Exact, TimeSetMode::Exact) => (TimeSetMode::Exact, ""),
            (TimeSetMode::CertifiedMembers, TimeSetMode::CertifiedMembers)
            | (TimeSetMode::Exact, TimeSetMode::CertifiedMembers)
            | (TimeSetMode::CertifiedMembers, TimeSetMode::Exact) => {
                (TimeSetMode::CertifiedMembers, "")
            }
            _ => (TimeSetMode::CertifiedMembers, " [mode degraded: absence-certified operand]"),
        };
        Ok(TimeSet {
            horizon: self.horizon,
            words,
            mode,
            provenance: format!("({}) ∩ ({}){note}", self.provenance, other.provenance),
        })
    }

    /// Smallest n with {n, …, n+k} ⊆ members; a None under exact mode
    /// certifies "not thick at scale k up to N".
    pub fn is_thick_up_to(&self, k: u64) -> Result<Option<SetCertificate>> {
        if self.mode == TimeSetMode::CertifiedAbsences {
            return Err(Error::BadMode(self.mode.to_string()));
        }
        if k + 1 > self.horizon {
            return Err(Error::Precondition("window scale exceeds horizon".into()));
        }
        let mut run = self.words.clone();
        let mut have = 1u64;
        let want = k + 1;
        while have < want {
            let s = have.min(want - have);
            shift_right_and(&mut run, s as u32);
            have += s;
        }
        Ok(first_set_bit(&run).map(|i| SetCertificate::ThickWindow {
            k,
            location: i + 1,
            horizon: self.horizon,
        }))
    }

    /// Certificate iff every full window {n,…,n+g} ⊆ {1,…,N} meets members.
    pub fn is_syndetic_up_to(&self, g: u64) -> Result<Option<SetCertificate>> {
        if self.mode == TimeSetMode::CertifiedAbsences {
            return Err(Error::BadMode(self.mode.to_string()));
        }
        if g >= self.horizon {
            return Err(Error::Precondition("gap scale must be < horizon".into()));
        }
        if self.max_gap() <= g {
            Ok(Some(SetCertificate::SyndeticGap { gap: g, horizon: self.horizon }))
        } else {
            Ok(None)
        }
    }

    /// Largest zero-run length that breaks some full window: leading and
    /// trailing runs count (windows at the edges are required to be met).
    pub fn max_gap(&self) -> u64 {
        let mut max_run = 0u64;
        let mut prev = 0u64; // position of previous member (0 = none yet)
        for n in self.members() {
            max_run = max_run.max(n - prev - 1);
            prev = n;
        }
        max_run.max(self.horizon - prev)
    }

    /// Depth-d fragment of a Δ-set inside members: 1 = s₁ < … < s_d with all
    /// pairwise differences in members. Deterministic smallest-lex search.
    pub fn delta_tower_search(&self, depth: usize) -> Result<Option<SetCertificate>> {
        if self.mode == TimeSetMode::CertifiedAbsences {
            return Err(Error::BadMode(self.mode.to_string()));
        }
        if depth < 2 {
            return Err(Error::Precondition("tower depth must be ≥ 2".into()));
        }
        let members: Vec<u64> = self.members().collect();
        if members.is_empty() {
            return Ok(None);
        }
        let mut budget = 4_000_000u64;
        let mut tower = vec![1u64];
        if self.dfs_tower(&members, &mut tower, depth, &mut budget)? {
            Ok(Some(SetCertificate::DeltaTower { tower, horizon: self.horizon }))
        } else {
            Ok(None)
        }
    }

    fn dfs_tower(
        &self,
        members: &[u64],
        tower: &mut Vec<u64>,
        depth: usize,
        budget: &mut u64,
    ) -> Result<bool> {
        if tower.len() == depth {
            return Ok(true);
        }
        let last = *tower.last().unwrap();
        for &m in members {
            if *budget == 0 {
                return Err(Error::Precondition("Δ-tower search budget exhausted".into()));
            }
            *budget -= 1;
            let cand = last + m;
            if cand > self.horizon {
                break;
            }
            if tower.iter().all(|&t| self.contains(cand - t)) {
                tower.push(cand);
                if self.dfs_tower(members, tower, depth, budget)? {
                    return Ok(true);
                }
                tower.pop();
            }
        }
        Ok(false)
    }

    /// True iff every nonempty finite subset sum of the generators is a member.
    pub fn ip_fragment_check(&self, generators: &[u64]) -> Result<bool> {
        if generators.is_empty() || generators.len() > 20 {
            return Err(Error::Precondition("need 1..=20 generators".into()));
        }
        let total: u64 = generators.iter().sum();
        if total > self.horizon {
            return Err(Error::Precondition("subset sums overflow the horizon".into()));
        }
        for mask in 1u32..(1 << generators.len()) {
            let sum: u64 = generators
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &g)| g)
                .sum();
            if !self.contains(sum) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Greedy extraction of k IP generators from the set (all subset sums
    /// verified); None if the greedy choice dead-ends.
    pub fn greedy_ip_extract(&self, k: usize) -> Option<Vec<u64>> {
        fn extend(s: &TimeSet, gens: &mut Vec<u64>, k: usize, from: u64) -> bool {
            if gens.len() == k {
                return true;
            }
            let mut cand = from;
            while cand <= s.horizon {
                if s.contains(cand) {
                    gens.push(cand);
                    if s.ip_fragment_check(gens).unwrap_or(false)
                        && extend(s, gens, k, cand + 1)
                    {
                        return true;
                    }
                    gens.pop();
                }
                cand += 1;
            }
            false
        }
        let mut gens = Vec::new();
        if extend(self, &mut gens, k, 1) {
            Some(gens)
        } else {
            None
        }
    }

    /// A point of a ∩ b found inside a's thick window: a full window of
    /// length g must meet a g-syndetic set.
    pub fn thick_meets_syndetic(
        a: &TimeSet,
        a_cert: &SetCertificate,
        b: &TimeSet,
        b_cert: &SetCertificate,
    ) -> Result<u64> {
        if a.horizon != b.horizon {
            return Err(Error::HorizonMismatch(a.horizon as usize, b.horizon as usize));
        }
        let SetCertificate::ThickWindow { k, location, .. } = a_cert else {
            return Err(Error::CertificateInvalid("expected a thick-window certificate".into()));
        };
        let SetCertificate::SyndeticGap { gap, .. } = b_cert else {
            return Err(Error::CertificateInvalid("expected a syndetic-gap certificate".into()));
        };
        if k != gap {
            return Err(Error::Precondition("certificates must share the scale g".into()));
        }
        a_cert.revalidate(a)?;
        b_cert.revalidate(b)?;
        (*location..=*location + *k)
            .find(|&n| b.contains(n))
            .ok_or_else(|| Error::CertificateInvalid("window failed to meet the syndetic set".into()))
    }

    /// Run-length encoding of the member bits: [start, length] runs.
    pub fn to_rle(&self) -> Vec<[u64; 2]> {
        let mut runs = Vec::new();
        let mut cur: Option<[u64; 2]> = None;
        for n in self.members() {
            match cur.as_mut() {
                Some(r) if r[0] + r[1] == n => r[1] += 1,
                _ => {
                    if let Some(r) = cur.take() {
                        runs.push(r);
                    }
                    cur = Some([n, 1]);
                }
            }
        }
        if let Some(r) = cur {
            runs.push(r);
        }
        runs
    }

    pub fn from_rle(
        horizon: u64,
        mode: TimeSetMode,
        provenance: impl Into<String>,
        rle: &[[u64; 2]],
    ) -> Result<Self> {
        let mut s = TimeSet::new(horizon, mode, provenance);
        for &[start, len] in rle {
            if start == 0 || start + len - 1 > horizon {
                return Err(Error::Precondition("RLE run outside 1..=horizon".into()));
            }
            for n in start..start + len {
                s.insert(n);
            }
        }
        Ok(s)
    }
}

fn mask_tail(words: &mut [u64], horizon: u64) {
    let bits = horizon as usize;
    if bits % 64 != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << (bits % 64)) - 1;
        }
    }
}

/// words &= words >> s, across word boundaries.
fn shift_right_and(words: &mut [u64], s: u32) {
    let word_shift = (s / 64) as usize;
    let bit_shift = s % 64;
    let n = words.len();
    for i in 0..n {
        let lo = i + word_shift;
        let hi = lo + 1;
        let mut v = if lo < n { words[lo] >> bit_shift } else { 0 };
        if bit_shift > 0 && hi < n {
            v |= words[hi] << (64 - bit_shift);
        }
        words[i] &= v;
    }
}

fn first_set_bit(words: &[u64]) -> Option<u64> {
    for (wi, &w) in words.iter().enumerate() {
        if w != 0 {
            return Some(wi as u64 * 64 + w.trailing_zeros() as u64);
        }
    }
    None
}

/// A re-validatable combinatorial certificate about a TimeSet.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetCertificate {
    /// {location, …, location+k} ⊆ members.
    ThickWindow { k: u64, location: u64, horizon: u64 },
    /// every full window of length gap+1 inside {1..N} meets members.
    SyndeticGap { gap: u64, horizon: u64 },
    /// all pairwise differences of the tower lie in members.
    DeltaTower { tower: Vec<u64>, horizon: u64 },
    /// all nonempty finite subset sums of the generators lie in members.
    IpGenerators { generators: Vec<u64>, horizon: u64 },
}

impl SetCertificate {
    /// Re-validate against the TimeSet in O(N) or better.
    pub fn revalidate(&self, s: &TimeSet) -> Result<()> {
        let fail = |msg: String| Err(Error::CertificateInvalid(msg));
        match self {
            SetCertificate::ThickWindow { k, location, horizon } => {
                if *horizon != s.horizon() {
                    return fail("horizon mismatch".into());
                }
                if s.mode == TimeSetMode::CertifiedAbsences {
                    return fail("presence certificate over absence-certified set".into());
                }
                if location + k > s.horizon() {
                    return fail("window exceeds horizon".into());
                }
                for n in *location..=location + k {
                    if !s.contains(n) {
                        return fail(format!("window member {n} absent"));
                    }
                }
                Ok(())
            }
            SetCertificate::SyndeticGap { gap, horizon } => {
                if *horizon != s.horizon() {
                    return fail("horizon mismatch".into());
                }
                if s.mode == TimeSetMode::CertifiedAbsences {
                    return fail("presence certificate over absence-certified set".into());
                }
                if s.max_gap() > *gap {
                    return fail(format!("a window of length {} is unmet", gap + 1));
                }
                Ok(())
            }
            SetCertificate::DeltaTower { tower, horizon } => {
                if *horizon != s.horizon() {
                    return fail("horizon mismatch".into());
                }
                if tower.len() < 2 || tower.windows(2).any(|w| w[0] >= w[1]) {
                    return fail("tower must be strictly increasing with ≥ 2 elements".into());
                }
                for (i, &a) in tower.iter().enumerate() {
                    for &b in &tower[i + 1..] {
                        if !s.contains(b - a) {
                            return fail(format!("difference {} absent", b - a));
                        }
                    }
                }
                Ok(())
            }
            SetCertificate::IpGenerators { generators, horizon } => {
                if *horizon != s.horizon() {
                    return fail("horizon mismatch".into());
                }
                match s.ip_fragment_check(generators) {
                    Ok(true) => Ok(()),
                    Ok(false) => fail("a subset sum is absent".into()),
                    Err(e) => Err(e),
                }
            }
        }
    }
}

impl Serialize for TimeSet {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("TimeSet", 4)?;
        st.serialize_field("horizon", &self.horizon)?;
        st.serialize_field("mode", &self.mode)?;
        st.serialize_field("provenance", &self.provenance)?;
        st.serialize_field("members_rle", &self.to_rle())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for TimeSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            horizon: u64,
            mode: TimeSetMode,
            provenance: String,
            members_rle: Vec<[u64; 2]>,
        }
        let raw = Raw::deserialize(d)?;
        TimeSet::from_rle(raw.horizon, raw.mode, raw.provenance, &raw.members_rle)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(horizon: u64, members: Vec<u64>) -> TimeSet {
        TimeSet::from_members(horizon, TimeSetMode::Exact, "test", members)
    }

    #[test]
    fn intersect_basic_and_modes() {
        let a = exact(10, (2..=10).collect());
        let b = exact(10, (5..=10).collect());
        let c = a.intersect(&b).unwrap();
        assert_eq!(c.members().collect::<Vec<_>>(), (5..=10).collect::<Vec<_>>());
        assert_eq!(c.mode, TimeSetMode::Exact);

        let empty = TimeSet::new(10, TimeSetMode::Exact, "∅");
        assert!(a.intersect(&empty).unwrap().is_empty());

        let mut cm = TimeSet::new(10, TimeSetMode::CertifiedMembers, "w");
        cm.insert(4);
        let d = exact(10, vec![2, 4, 6]).intersect(&cm).unwrap();
        assert_eq!(d.members().collect::<Vec<_>>(), vec![4]);
        assert_eq!(d.mode, TimeSetMode::CertifiedMembers);

        let ca = exact(10, vec![2, 4]).complement();
        assert_eq!(ca.mode, TimeSetMode::Exact);
        let mixed = cm.intersect(&cm.complement()).unwrap();
        assert_eq!(mixed.mode, TimeSetMode::CertifiedMembers);
        assert!(mixed.provenance.contains("degraded"));

        assert!(a.intersect(&exact(11, vec![])).is_err());
    }

    #[test]
    fn thick_window_scan() {
        let s = exact(2000, (2..=1000).collect());
        let c = s.is_thick_up_to(100).unwrap().expect("window exists");
        assert_eq!(c, SetCertificate::ThickWindow { k: 100, location: 2, horizon: 2000 });
        c.revalidate(&s).unwrap();

        let evens = exact(1000, (1..=500).map(|k| 2 * k).collect());
        assert!(evens.is_thick_up_to(1).unwrap().is_none(), "no two consecutive evens");

        let absences = TimeSet::new(10, TimeSetMode::CertifiedAbsences, "x");
        assert!(absences.is_thick_up_to(1).is_err());
    }

    #[test]
    fn thick_window_against_naive_scan() {
        // word-parallel doubling vs direct run scan on irregular data
        let members: Vec<u64> = (1..=3000u64).filter(|n| n % 7 != 0 && n % 11 != 3).collect();
        let s = exact(3000, members.clone());
        for k in [1u64, 2, 3, 5, 8, 13] {
            let got = s.is_thick_up_to(k).unwrap();
            let naive = (1..=3000 - k)
                .find(|&n| (n..=n + k).all(|m| s.contains(m)));
            match (got, naive) {
                (Some(SetCertificate::ThickWindow { location, .. }), Some(n)) => {
                    assert_eq!(location, n, "k={k}")
                }
                (None, None) => {}
                (g, n) => panic!("k={k}: engine {g:?} vs naive {n:?}"),
            }
        }
    }

    #[test]
    fn syndetic_gap_scan() {
        let all = TimeSet::full(100, TimeSetMode::Exact, "full");
        assert!(all.is_syndetic_up_to(1).unwrap().is_some());

        // squares have gaps growing past 50: between 99² and 100² sit 198
        // consecutive non-members
        let squares = exact(10_000, (1..=100u64).map(|k| k * k).collect());
        assert!(squares.is_syndetic_up_to(50).unwrap().is_none());
        assert!(squares.is_syndetic_up_to(198).unwrap().is_some());
        assert!(squares.is_syndetic_up_to(197).unwrap().is_none());
    }

    #[test]
    fn syndetic_edge_windows_required() {
        // trailing gap breaks syndeticity even though internal gaps are small
        let s = exact(100, (1..=80).collect());
        assert!(s.is_syndetic_up_to(10).unwrap().is_none());
        assert!(s.is_syndetic_up_to(20).unwrap().is_some());
        // leading gap
        let t = exact(100, (30..=100).collect());
        assert!(t.is_syndetic_up_to(10).unwrap().is_none());
        assert!(t.is_syndetic_up_to(29).unwrap().is_some());
    }

    #[test]
    fn difference_sets() {
        let d = difference_set(&[1, 3, 6]).unwrap();
        assert_eq!(d.members().collect::<Vec<_>>(), vec![2, 3, 5]);
        assert_eq!(d.horizon(), 5);
        let d2 = difference_set(&[1, 2]).unwrap();
        assert_eq!(d2.members().collect::<Vec<_>>(), vec![1]);
        let d3 = difference_set(&[1, 2, 4, 8]).unwrap();
        assert_eq!(d3.members().collect::<Vec<_>>(), vec![1, 2, 3, 4, 6, 7]);
        assert!(difference_set(&[3, 3]).is_err());
        assert!(difference_set(&[5]).is_err());
    }

    #[test]
    fn delta_tower_cases() {
        let full = TimeSet::full(100, TimeSetMode::Exact, "full");
        for d in [2usize, 3, 5, 8] {
            let c = full.delta_tower_search(d).unwrap().expect("tower in full set");
            c.revalidate(&full).unwrap();
        }

        // parity obstruction: difference of two odds is even
        let odds = exact(1001, (0..=500).map(|k| 2 * k + 1).collect());
        assert!(odds.delta_tower_search(3).unwrap().is_none());

        // differences of a geometric-ish sequence contain a tower
        let seq = [7u64, 14, 28, 56, 112];
        let d = difference_set(&seq).unwrap();
        let c = d.delta_tower_search(3).unwrap().expect("tower");
        c.revalidate(&d).unwrap();
    }

    #[test]
    fn ip_fragments() {
        let full = TimeSet::full(100, TimeSetMode::Exact, "full");
        assert!(full.ip_fragment_check(&[1, 2, 4]).unwrap());

        let mut missing3 = TimeSet::full(100, TimeSetMode::Exact, "no3");
        missing3 = {
            let members: Vec<u64> = missing3.members().filter(|&n| n != 3).collect();
            TimeSet::from_members(100, TimeSetMode::Exact, "no3", members)
        };
        assert!(!missing3.ip_fragment_check(&[1, 2]).unwrap(), "1+2=3 absent");

        assert!(full.ip_fragment_check(&[60, 70]).is_err(), "sums overflow horizon");

        let gens = full.greedy_ip_extract(4).expect("greedy finds generators");
        assert!(full.ip_fragment_check(&gens).unwrap());
    }

    #[test]
    fn thick_meets_syndetic_witness() {
        let a = exact(300, (100..=200).collect());
        let b = exact(300, (1..=42u64).map(|k| 7 * k).collect());
        let ca = a.is_thick_up_to(7).unwrap().unwrap();
        let cb = b.is_syndetic_up_to(7).unwrap().unwrap();
        let w = TimeSet::thick_meets_syndetic(&a, &ca, &b, &cb).unwrap();
        assert_eq!(w, 105, "first multiple of 7 in the window at 100");
        assert!(a.contains(w) && b.contains(w));

        let full = TimeSet::full(50, TimeSetMode::Exact, "f");
        let ca = full.is_thick_up_to(1).unwrap().unwrap();
        let cb = full.is_syndetic_up_to(1).unwrap().unwrap();
        assert_eq!(TimeSet::thick_meets_syndetic(&full, &ca, &full, &cb).unwrap(), 1);
    }

    #[test]
    fn corrupted_certificates_rejected() {
        let s = exact(100, (10..=60).collect());
        let c = s.is_thick_up_to(20).unwrap().unwrap();
        let SetCertificate::ThickWindow { k, horizon, .. } = c else { panic!() };
        let bad = SetCertificate::ThickWindow { k, location: 55, horizon };
        assert!(bad.revalidate(&s).is_err(), "window sticks out of members");

        let good_gap = s.is_syndetic_up_to(40).unwrap().unwrap();
        good_gap.revalidate(&s).unwrap();
        let bad_gap = SetCertificate::SyndeticGap { gap: 5, horizon: 100 };
        assert!(bad_gap.revalidate(&s).is_err());

        let ok_tower = SetCertificate::DeltaTower { tower: vec![1, 11, 21], horizon: 100 };
        ok_tower.revalidate(&s).unwrap(); // differences 10, 10, 20 all in members
        let bad_tower = SetCertificate::DeltaTower { tower: vec![1, 2, 12], horizon: 100 };
        assert!(bad_tower.revalidate(&s).is_err(), "difference 1 is not a member");
    }

    #[test]
    fn rle_roundtrip() {
        let s = exact(1000, (1..=1000u64).filter(|n| n % 3 == 0 || (400..450).contains(n)).collect());
        let rle = s.to_rle();
        let back = TimeSet::from_rle(1000, s.mode, s.provenance.clone(), &rle).unwrap();
        assert_eq!(s, back);
    }
}

/// Exact TimeSet of all pairwise later-minus-earlier differences.
pub fn difference_set(seq: &[u64]) -> Result<TimeSet> {
    if seq.len() < 2 {
        return Err(Error::Precondition("need at least two elements".into()));
    }
    if seq.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("sequence must be strictly increasing".into()));
    }
    let horizon = seq[seq.len() - 1] - seq[0];
    let mut s = TimeSet::new(horizon, TimeSetMode::Exact, format!("Δ({} elems)", seq.len()));
    for (i, &a) in seq.iter().enumerate() {
        for &b in &seq[i + 1..] {
            s.insert(b - a);
        }
    }
    Ok(s)
}
