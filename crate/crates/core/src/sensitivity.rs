//! Computation of the spread time sets S_T(U,δ) / J_T(U,δ), sensitivity
//! classification with certificates, and (syndetic) equicontinuity testing.
//!
//! Membership in S_T(U,δ) uses the strict inequality diam(TⁿU) > δ; boundary
//! equality counts as non-membership. Exact-mode systems decide each n from
//! a closed form or an exact scan; everything else produces certified
//! members from witness pairs drawn off a deterministic net, never an
//! unqualified negative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{NatPoint, PointRef, Sides};
use crate::space::{ClosedSet, OpenSetDescriptor, SetKind, System};
use crate::systems::{sturmian, toeplitz, SystemKind};
use crate::timeset::{SetCertificate, TimeSet, TimeSetMode};

/// Largest c ≥ 0 with 2^-c > δ; None when δ ≥ 1 (no dyadic spread exceeds it).
fn spread_exponent_budget(delta: f64) -> Option<u32> {
    if delta >= 1.0 {
        return None;
    }
    let mut c = 0u32;
    let mut v = 1.0f64;
    while v / 2.0 > delta && c < 1100 {
        c += 1;
        v /= 2.0;
    }
    Some(c)
}

fn dyadic_spread_gt(c_exponent: u32, delta: f64) -> bool {
    match spread_exponent_budget(delta) {
        None => false,
        Some(budget) => c_exponent <= budget,
    }
}

/// A re-validatable spread witness: x₁, x₂ ∈ U with ϱ(Tⁿx₁, Tⁿx₂) > δ.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SpreadWitness {
    pub n: u64,
    pub x1: PointRef,
    pub x2: PointRef,
    pub distance: f64,
}

/// S_T(U, δ) up to the horizon. Exact when the system supports exact spread
/// for this set shape; otherwise certified members with embedded witnesses.
pub fn sensitivity_times(
    system: &System,
    set: &OpenSetDescriptor,
    delta: f64,
    horizon: u64,
) -> Result<TimeSet> {
    let (ts, _) = sensitivity_times_with_witnesses(system, set, delta, horizon, 0)?;
    Ok(ts)
}

pub fn sensitivity_times_with_witnesses(
    system: &System,
    set: &OpenSetDescriptor,
    delta: f64,
    horizon: u64,
    seed: u64,
) -> Result<(TimeSet, Vec<SpreadWitness>)> {
    if delta <= 0.0 {
        return Err(Error::Precondition("δ must be positive".into()));
    }
    system.validate_set(set)?;
    let label = format!("S_T({}, δ={delta})", short_label(set));
    if delta >= system.diam() {
        // always empty: no pair can exceed the space diameter (warning, not error)
        let ts = TimeSet::new(horizon, TimeSetMode::Exact, format!("{label} [δ ≥ diam: empty]"));
        return Ok((ts, vec![]));
    }
    if let Some(ts) = exact_spread_times(system, &set.kind, delta, horizon, &label)? {
        return Ok((ts, vec![]));
    }
    witnessed_spread_times(system, set, delta, horizon, seed, &label)
}

/// J_T(U, δ): complement of S_T within {1..N}; mode dual.
pub fn stability_times(
    system: &System,
    set: &OpenSetDescriptor,
    delta: f64,
    horizon: u64,
) -> Result<TimeSet> {
    Ok(sensitivity_times(system, set, delta, horizon)?.complement())
}

/// S_T(U, δ) only when an exact sweep exists for this set shape.
pub fn sensitivity_times_exact_only(
    system: &System,
    set: &OpenSetDescriptor,
    delta: f64,
    horizon: u64,
) -> Result<Option<TimeSet>> {
    if delta <= 0.0 {
        return Err(Error::Precondition("δ must be positive".into()));
    }
    system.validate_set(set)?;
    let label = format!("S_T({}, δ={delta})", short_label(set));
    if delta >= system.diam() {
        return Ok(Some(TimeSet::new(horizon, TimeSetMode::Exact, format!("{label} [δ ≥ diam: empty]"))));
    }
    exact_spread_times(system, &set.kind, delta, horizon, &label)
}

/// First witnessed spread time (early exit), for fail-fast negative tests.
pub fn first_spread_witness(
    system: &System,
    set: &OpenSetDescriptor,
    delta: f64,
    horizon: u64,
    seed: u64,
) -> Result<Option<SpreadWitness>> {
    let net = system.sample_in_set(set, 8, seed);
    if net.len() < 2 {
        return Ok(None);
    }
    let prec = spread_exponent_budget(delta).unwrap_or(1) + 8;
    let mut orbit: Vec<PointRef> = net.clone();
    for n in 1..=horizon {
        for p in orbit.iter_mut() {
            *p = system.step(p)?;
        }
        for i in 0..orbit.len() {
            for j in i + 1..orbit.len() {
                let d = system.distance(&orbit[i], &orbit[j], prec)?;
                if d > delta {
                    return Ok(Some(SpreadWitness {
                        n,
                        x1: net[i].clone(),
                        x2: net[j].clone(),
                        distance: d,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Exact per-step spread decisions where the catalog supports them.
fn exact_spread_times(
    system: &System,
    set: &SetKind,
    delta: f64,
    horizon: u64,
    label: &str,
) -> Result<Option<TimeSet>> {
    let kind = &system.kind;
    // constant-diameter sets (isometries and invariant slices): one decision
    if let Some(d0) = constant_spread(kind, set) {
        let mut ts = TimeSet::new(horizon, TimeSetMode::Exact, label);
        if d0 > delta {
            ts = TimeSet::full(horizon, TimeSetMode::Exact, label);
        }
        return Ok(Some(ts));
    }
    match kind {
        SystemKind::Shift { sides } => {
            let Some((len, offset)) = shift_window(kind, set, *sides) else {
                return Ok(None);
            };
            let mut ts = TimeSet::new(horizon, TimeSetMode::Exact, label);
            for n in 1..=horizon {
                let c = shift_spread_exponent(*sides, offset - n as i64, len);
                if match c {
                    None => delta < 1.0, // diam 1
                    Some(c) => dyadic_spread_gt(c, delta),
                } {
                    ts.insert(n);
                }
            }
            Ok(Some(ts))
        }
        SystemKind::Sturmian { alpha, sides, .. } => {
            let Some((word, offset)) = word_view(set, *sides) else { return Ok(None) };
            let arc = sturmian::cylinder_arc(*alpha, &word, offset);
            if arc.is_empty() {
                return Err(Error::InadmissibleWord(format!("{word:?}"), system.id.clone()));
            }
            let Some(budget) = spread_exponent_budget(delta) else {
                return Ok(Some(TimeSet::new(horizon, TimeSetMode::Exact, label)));
            };
            let two = *sides == Sides::Two;
            let lo = if two { 1 - budget as i64 } else { 1 };
            let hi = horizon as i64 + budget as i64;
            let cuts = sturmian::cut_times(*alpha, arc, lo, hi);
            Ok(Some(window_or(&cuts, lo, hi, horizon, budget, two, label)))
        }
        SystemKind::Toeplitz { periods } => {
            let Some((word, offset)) = word_view(set, Sides::Two) else { return Ok(None) };
            let cover = toeplitz::covering_level(periods, word.len() as u64);
            let phases = toeplitz::compatible_phases(periods, cover, &word, offset);
            if phases.is_empty() {
                return Err(Error::InadmissibleWord(format!("{word:?}"), system.id.clone()));
            }
            let Some(budget) = spread_exponent_budget(delta) else {
                return Ok(Some(TimeSet::new(horizon, TimeSetMode::Exact, label)));
            };
            let lo = 1 - budget as i64;
            let hi = horizon as i64 + budget as i64;
            let len = (hi - lo + 1) as usize;
            let mut splits = vec![0u64; len.div_ceil(64)];
            for (idx, u) in (lo..=hi).enumerate() {
                if toeplitz::position_splits(periods, cover, &phases, u) {
                    splits[idx / 64] |= 1 << (idx % 64);
                }
            }
            Ok(Some(window_or(&splits, lo, hi, horizon, budget, true, label)))
        }
        SystemKind::Product { left, right } => {
            let SetKind::Product { parts } = set else { return Ok(None) };
            let a = exact_spread_times(left, &parts[0].kind, delta, horizon, label)?;
            let b = exact_spread_times(right, &parts[1].kind, delta, horizon, label)?;
            match (a, b) {
                (Some(sa), Some(sb)) => Ok(Some(union_exact(sa, sb, label))),
                _ => Ok(None),
            }
        }
        SystemKind::Quotient { base, collapsed } => match collapsed {
            ClosedSet::SinglePoint { .. } => match set {
                SetKind::QuotientImage { inner } => {
                    exact_spread_times(base, &inner.kind, delta, horizon, label)
                }
                SetKind::Ball { center: PointRef::Class { rep }, radius } => exact_spread_times(
                    base,
                    &SetKind::Ball { center: (**rep).clone(), radius: *radius },
                    delta,
                    horizon,
                    label,
                ),
                _ => Ok(None),
            },
            ClosedSet::CrossAtInfinity => {
                // e-balls have an exact closed-form profile; slices were
                // handled as constant-diameter sets above
                let mut ts = TimeSet::new(horizon, TimeSetMode::Exact, label);
                let mut any = false;
                for n in 1..=horizon {
                    match kind.diam_exact(set, n) {
                        Some(d) => {
                            any = true;
                            if d > delta {
                                ts.insert(n);
                            }
                        }
                        None => return Ok(None),
                    }
                }
                Ok(any.then_some(ts))
            }
        },
        _ => Ok(None),
    }
}

/// Sets whose image diameter is n-independent (isometries, invariant slices).
fn constant_spread(kind: &SystemKind, set: &SetKind) -> Option<f64> {
    match kind {
        SystemKind::Rotation { .. } | SystemKind::Odometer { .. } | SystemKind::NatCompact => {
            kind.diam_exact(set, 0)
        }
        SystemKind::Quotient { collapsed: ClosedSet::CrossAtInfinity, .. } => {
            // slices Y₁×{q} are invariant; e-balls are not constant
            if matches!(set, SetKind::QuotientImage { .. }) {
                kind.diam_exact(set, 0)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// S bits from a cut/split bitset: n ∈ S iff a cut lies within the spread
/// window around n ([n, n+budget] one-sided, [n−budget, n+budget] two-sided).
fn window_or(
    cuts: &[u64],
    lo: i64,
    hi: i64,
    horizon: u64,
    budget: u32,
    two_sided: bool,
    label: &str,
) -> TimeSet {
    let len = (hi - lo + 1) as usize;
    // next_cut[i] = smallest index ≥ i with a cut, else len
    let mut next = vec![len as u32; len + 1];
    for i in (0..len).rev() {
        next[i] = if cuts[i / 64] >> (i % 64) & 1 == 1 { i as u32 } else { next[i + 1] };
    }
    let mut ts = TimeSet::new(horizon, TimeSetMode::Exact, label);
    for n in 1..=horizon as i64 {
        let w_lo = if two_sided { n - budget as i64 } else { n };
        let w_hi = n + budget as i64;
        let a = (w_lo.max(lo) - lo) as usize;
        let b = (w_hi.min(hi) - lo) as usize;
        if a < len && next[a] as usize <= b {
            ts.insert(n as u64);
        }
    }
    ts
}

fn union_exact(a: TimeSet, b: TimeSet, label: &str) -> TimeSet {
    let mut out = TimeSet::new(a.horizon(), TimeSetMode::Exact, label);
    for n in a.members() {
        out.insert(n);
    }
    for n in b.members() {
        out.insert(n);
    }
    out
}

fn shift_window(kind: &SystemKind, set: &SetKind, sides: Sides) -> Option<(u32, i64)> {
    let _ = kind;
    match set {
        SetKind::Cylinder { word, offset } => Some((word.len() as u32, *offset)),
        SetKind::Ball { .. } => word_view(set, sides).map(|(w, o)| (w.len() as u32, o)),
        _ => None,
    }
}

fn word_view(set: &SetKind, sides: Sides) -> Option<(Vec<u8>, i64)> {
    match set {
        SetKind::Cylinder { word, offset } => Some((word.clone(), *offset)),
        SetKind::Ball { center: PointRef::Word { point }, radius } => {
            let mut depth = 0u32;
            let mut pow = 1.0f64;
            while pow >= *radius {
                depth += 1;
                pow /= 2.0;
            }
            let k = depth as i64 - 1;
            match sides {
                Sides::One => Some(((0..=k).map(|j| point.symbol_at(j)).collect(), 0)),
                Sides::Two => Some(((-k..=k).map(|j| point.symbol_at(j)).collect(), -k)),
            }
        }
        _ => None,
    }
}

/// Spread exponent of a full-shift window at [start, start+len): diam = 2^-c,
/// None meaning diam = 1 (free index at 0).
fn shift_spread_exponent(sides: Sides, start: i64, len: u32) -> Option<u32> {
    let end = start + len as i64;
    match sides {
        Sides::One => {
            if start > 0 || end <= 0 {
                None
            } else {
                Some(end as u32)
            }
        }
        Sides::Two => {
            if start > 0 || end <= 0 {
                None
            } else {
                Some(((1 - start).min(end)) as u32)
            }
        }
    }
}

/// Witnessed (sampled) mode: net radius δ/4, so a separated pair survives
/// net rounding with margin δ/2.
fn witnessed_spread_times(
    system: &System,
    set: &OpenSetDescriptor,
    delta: f64,
    horizon: u64,
    seed: u64,
    label: &str,
) -> Result<(TimeSet, Vec<SpreadWitness>)> {
    let net = system.sample_in_set(set, 8, seed);
    let mut ts = TimeSet::new(horizon, TimeSetMode::CertifiedMembers, format!("{label} [witnessed]"));
    let mut witnesses: Vec<SpreadWitness> = Vec::new();
    if net.len() < 2 {
        return Ok((ts, witnesses));
    }
    let prec = spread_exponent_budget(delta).unwrap_or(1) + 8;
    let mut orbit: Vec<PointRef> = net.clone();
    for n in 1..=horizon {
        for p in orbit.iter_mut() {
            *p = system.step(p)?;
        }
        let mut found: Option<(usize, usize, f64)> = None;
        'outer: for i in 0..orbit.len() {
            for j in i + 1..orbit.len() {
                let d = system.distance(&orbit[i], &orbit[j], prec)?;
                if d > delta {
                    found = Some((i, j, d));
                    break 'outer;
                }
            }
        }
        if let Some((i, j, d)) = found {
            ts.insert(n);
            if witnesses.len() < 64 {
                witnesses.push(SpreadWitness { n, x1: net[i].clone(), x2: net[j].clone(), distance: d });
            }
        }
    }
    Ok((ts, witnesses))
}

/// Per-set witnesses for an exact verdict (used when reports embed
/// re-validatable evidence): a pair in U separated beyond δ at time n.
pub fn witness_pair_at(
    system: &System,
    set: &OpenSetDescriptor,
    delta: f64,
    n: u64,
    seed: u64,
) -> Result<Option<SpreadWitness>> {
    let net = system.sample_in_set(set, 8, seed);
    let prec = spread_exponent_budget(delta).unwrap_or(1) + 8;
    for i in 0..net.len() {
        for j in i + 1..net.len() {
            let a = system.iterate(&net[i], n as i64)?;
            let b = system.iterate(&net[j], n as i64)?;
            let d = system.distance(&a, &b, prec)?;
            if d > delta {
                return Ok(Some(SpreadWitness { n, x1: net[i].clone(), x2: net[j].clone(), distance: d }));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct MultiWitness {
    pub n: u64,
    pub delta: f64,
    pub set_labels: Vec<String>,
    pub pairs: Vec<SpreadWitness>,
}

/// Least n in ⋂ S_T(U_i, δ) within the horizon, with per-set witness pairs.
/// None means empty intersection up to N (certified only when all components
/// were exact).
pub fn multi_sensitivity_witness(
    system: &System,
    delta: f64,
    sets: &[OpenSetDescriptor],
    horizon: u64,
    seed: u64,
) -> Result<Option<MultiWitness>> {
    if sets.is_empty() {
        return Err(Error::Precondition("need at least one set".into()));
    }
    let mut inter: Option<TimeSet> = None;
    for set in sets {
        let s = sensitivity_times(system, set, delta, horizon)?;
        inter = Some(match inter {
            None => s,
            Some(acc) => acc.intersect(&s)?,
        });
    }
    let inter = inter.unwrap();
    let Some(n) = inter.min_member() else { return Ok(None) };
    let mut pairs = Vec::new();
    for set in sets {
        if let Some(w) = witness_pair_at(system, set, delta, n, seed)? {
            pairs.push(w);
        }
    }
    Ok(Some(MultiWitness {
        n,
        delta,
        set_labels: sets.iter().map(|s| short_label(s)).collect(),
        pairs,
    }))
}

/// The pullback witness transform behind "multi ⇒ thick": given U and a
/// scale k, refine each T^{-i}U (i = 0..k) to a set U_i whose first k images
/// stay below δ, take a common spread time n of the U_i, and return the
/// window {n−k, …, n} ⊆ S_T(U, δ) it certifies.
pub fn multi_to_thick_replay(
    system: &System,
    set: &OpenSetDescriptor,
    delta: f64,
    k: u64,
    horizon: u64,
    seed: u64,
) -> Result<Option<SetCertificate>> {
    let budget = spread_exponent_budget(delta)
        .ok_or_else(|| Error::Precondition("δ ≥ 1 spreads nothing".into()))?;
    let pullbacks: Vec<OpenSetDescriptor> = (0..=k)
        .map(|i| pullback_refinement(system, set, i, k, budget))
        .collect::<Result<Vec<_>>>()?;
    let Some(w) = multi_sensitivity_witness(system, delta, &pullbacks, horizon, seed)? else {
        return Ok(None);
    };
    if w.n <= k {
        return Err(Error::CertificateInvalid(
            "pullback spread time must exceed the window scale".into(),
        ));
    }
    // re-validate the transformed window against the exact S_T(U, δ)
    let s_u = sensitivity_times(system, set, delta, horizon)?;
    let cert = SetCertificate::ThickWindow { k, location: w.n - k, horizon };
    cert.revalidate(&s_u)?;
    Ok(Some(cert))
}

/// U_i ⊆ T^{-i}U with max_{j≤k} diam(T^j U_i) < δ, built by symbol padding
/// (full shifts and their products).
fn pullback_refinement(
    system: &System,
    set: &OpenSetDescriptor,
    i: u64,
    k: u64,
    budget: u32,
) -> Result<OpenSetDescriptor> {
    match (&system.kind, &set.kind) {
        (SystemKind::Shift { sides }, SetKind::Cylinder { word, offset }) => {
            let (word, offset) = (word.clone(), *offset);
            match sides {
                Sides::One => {
                    // window [offset+i, offset+i+L) padded to [0, B)
                    let b = (offset + i as i64 + word.len() as i64)
                        .max(k as i64 + budget as i64 + 2);
                    let mut w = vec![0u8; b as usize];
                    for (j, &s) in word.iter().enumerate() {
                        w[(offset + i as i64) as usize + j] = s;
                    }
                    Ok(OpenSetDescriptor::cylinder(&system.id, w, 0))
                }
                Sides::Two => {
                    let b = (offset.abs() + i as i64 + word.len() as i64)
                        .max(k as i64 + budget as i64 + 2);
                    let lo = -b;
                    let hi = b + i as i64 + word.len() as i64;
                    let mut w = vec![0u8; (hi - lo) as usize];
                    for (j, &s) in word.iter().enumerate() {
                        w[(offset + i as i64 - lo) as usize + j] = s;
                    }
                    Ok(OpenSetDescriptor::cylinder(&system.id, w, lo))
                }
            }
        }
        (SystemKind::Product { left, right }, SetKind::Product { parts }) => {
            let a = pullback_refinement(left, &parts[0], i, k, budget)?;
            let b = pullback_refinement(right, &parts[1], i, k, budget)?;
            Ok(OpenSetDescriptor {
                system_id: system.id.clone(),
                kind: SetKind::Product { parts: vec![a, b] },
            })
        }
        _ => Err(Error::Unsupported(
            system.id.clone(),
            "pullback refinement implemented for full shifts and their products".into(),
        )),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeRequest {
    ExactIfAvailable,
    Sampled,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityQuery {
    #[serde(default)]
    pub delta_grid: Vec<f64>,
    pub resolution: u32,
    pub horizon: u64,
    /// scale for thick-window evidence
    pub thick_scale: u64,
    /// multi-sensitivity: all subsets of size ≤ 3 of the capped basis plus
    /// this many seeded random subsets of size ≤ k_max
    pub k_max: usize,
    pub random_subsets: usize,
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: ModeRequest,
}

fn default_mode() -> ModeRequest {
    ModeRequest::ExactIfAvailable
}

impl SensitivityQuery {
    pub fn defaults(horizon: u64, resolution: u32, seed: u64) -> Self {
        SensitivityQuery {
            delta_grid: vec![],
            resolution,
            horizon,
            thick_scale: 64,
            k_max: 8,
            random_subsets: 64,
            seed,
            mode: default_mode(),
        }
    }

    /// δ-grid default: {2^-j : j = 1..12} scaled by the space diameter.
    pub fn grid_for(&self, diam: f64) -> Vec<f64> {
        if !self.delta_grid.is_empty() {
            return self.delta_grid.clone();
        }
        (1..=12).map(|j| diam * 2f64.powi(-j)).collect()
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    EvidenceYes { delta: f64, detail: String },
    CertifiedNoAtScale { scale: String, detail: String, derived: bool },
    Inconclusive { detail: String },
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::EvidenceYes { .. })
    }
    pub fn is_certified_no(&self) -> bool {
        matches!(self, Verdict::CertifiedNoAtScale { .. })
    }
}

/// A TimeSet embedded with its certificate for re-validation.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CertifiedSet {
    pub set_label: String,
    pub timeset: TimeSet,
    pub certificate: SetCertificate,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct DeltaOutcome {
    pub delta: f64,
    /// every basis set spread beyond δ with a member past N/2
    pub sensitive_all: bool,
    /// an exact-mode basis/probe set with S_T = ∅ (label)
    pub sensitive_counterexample: Option<String>,
    pub thick_all: bool,
    /// an exact-mode set whose J_T carries a syndetic certificate
    pub thick_counterexample: Option<CertifiedSet>,
    pub multi_all: bool,
    pub all_exact: bool,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub system_id: String,
    pub basis_size: usize,
    pub query: SensitivityQuery,
    pub per_delta: Vec<DeltaOutcome>,
    pub sensitive: Verdict,
    pub thickly_sensitive: Verdict,
    pub multi_sensitive: Verdict,
    /// spread witnesses at the certifying δ (re-validatable)
    pub spread_witnesses: Vec<SpreadWitness>,
    /// thick-window certificates at the certifying δ (capped)
    pub thick_certificates: Vec<CertifiedSet>,
    /// multi-sensitivity witnesses at the certifying δ (capped)
    pub multi_witnesses: Vec<MultiWitness>,
}

/// Classify over the δ-grid and basis. Sensitive-evidence is a finite proxy
/// (nonempty S_T with a member past N/2 for every basis set); every verdict
/// carries its basis resolution and horizon via the query echo.
pub fn classify(system: &System, query: &SensitivityQuery) -> Result<SensitivityReport> {
    let basis = system.basis(query.resolution)?;
    let grid = query.grid_for(system.diam());
    let horizon = query.horizon;
    let cap: usize = 24; // multi-sensitivity works over a capped basis
    let capped: Vec<&OpenSetDescriptor> = basis.iter().take(cap).collect();

    let per_delta: Vec<DeltaOutcome> = grid
        .par_iter()
        .map(|&delta| classify_at_delta(system, query, &basis, &capped, delta, horizon))
        .collect::<Result<Vec<_>>>()?;

    // aggregate
    let sensitive = aggregate_sensitive(&per_delta);
    let thickly = aggregate_thick(&per_delta, &sensitive);
    let multi = aggregate_multi(&per_delta, &thickly);

    // embed re-validatable evidence at the certifying δ
    let mut spread_witnesses = Vec::new();
    let mut thick_certificates = Vec::new();
    let mut multi_witnesses = Vec::new();
    if let Verdict::EvidenceYes { delta, .. } = &sensitive {
        for set in basis.iter().take(8) {
            let s = sensitivity_times(system, set, *delta, horizon)?;
            if let Some(n) = s.max_member() {
                if let Some(w) = witness_pair_at(system, set, *delta, n, query.seed)? {
                    spread_witnesses.push(w);
                }
            }
        }
    }
    if let Verdict::EvidenceYes { delta, .. } = &thickly {
        for set in basis.iter().take(8) {
            let s = sensitivity_times(system, set, *delta, horizon)?;
            if let Ok(Some(cert)) = s.is_thick_up_to(query.thick_scale) {
                thick_certificates.push(CertifiedSet {
                    set_label: short_label(set),
                    timeset: s,
                    certificate: cert,
                });
            }
        }
    }
    if let Verdict::EvidenceYes { delta, .. } = &multi {
        let sets: Vec<OpenSetDescriptor> =
            capped.iter().take(3).map(|s| (*s).clone()).collect();
        if let Some(w) = multi_sensitivity_witness(system, *delta, &sets, horizon, query.seed)? {
            multi_witnesses.push(w);
        }
    }

    Ok(SensitivityReport {
        system_id: system.id.clone(),
        basis_size: basis.len(),
        query: query.clone(),
        per_delta,
        sensitive,
        thickly_sensitive: thickly,
        multi_sensitive: multi,
        spread_witnesses,
        thick_certificates,
        multi_witnesses,
    })
}

fn classify_at_delta(
    system: &System,
    query: &SensitivityQuery,
    basis: &[OpenSetDescriptor],
    capped: &[&OpenSetDescriptor],
    delta: f64,
    horizon: u64,
) -> Result<DeltaOutcome> {
    use rand::{Rng, SeedableRng};
    let mut sensitive_all = true;
    let mut sensitive_counterexample = None;
    let mut thick_all = true;
    let mut thick_counterexample: Option<CertifiedSet> = None;
    let mut all_exact = true;

    for set in basis {
        let s = sensitivity_times(system, set, delta, horizon)?;
        let exact = s.mode == TimeSetMode::Exact;
        all_exact &= exact;
        let spreads = s.max_member().is_some_and(|m| m > horizon / 2);
        if !spreads {
            sensitive_all = false;
            if exact && s.is_empty() && sensitive_counterexample.is_none() {
                sensitive_counterexample = Some(short_label(set));
            }
        }
        let thick_here = match s.is_thick_up_to(query.thick_scale.min(horizon - 1)) {
            Ok(Some(_)) => true,
            _ => false,
        };
        if !thick_here {
            thick_all = false;
            if exact && thick_counterexample.is_none() {
                let j = s.complement();
                let gap = j.max_gap();
                if gap < horizon {
                    if let Ok(Some(cert)) = j.is_syndetic_up_to(gap) {
                        thick_counterexample = Some(CertifiedSet {
                            set_label: short_label(set),
                            timeset: j,
                            certificate: cert,
                        });
                    }
                }
            }
        }
    }

    // targeted exact-empty probe (isometries, slices) for a per-δ counterexample
    if sensitive_counterexample.is_none() {
        if let Some(probe) = null_probe(system, delta) {
            let s = sensitivity_times(system, &probe, delta, horizon)?;
            if s.mode == TimeSetMode::Exact && s.is_empty() {
                sensitive_counterexample = Some(format!("probe:{}", short_label(&probe)));
                sensitive_all = false;
            }
        }
    }

    // thick counterexamples may need sets finer than the basis resolution
    // (the stabilizing neighborhood shrinks with δ): probe such sets too
    if thick_counterexample.is_none() {
        let probes = [null_probe(system, delta), thick_probe(system, delta)];
        for probe in probes.into_iter().flatten() {
            let s = sensitivity_times(system, &probe, delta, horizon)?;
            if s.mode != TimeSetMode::Exact {
                continue;
            }
            let not_thick = matches!(s.is_thick_up_to(query.thick_scale.min(horizon - 1)), Ok(None));
            if !not_thick {
                continue;
            }
            let j = s.complement();
            let gap = j.max_gap();
            if gap < horizon / 2 {
                if let Ok(Some(cert)) = j.is_syndetic_up_to(gap) {
                    thick_counterexample = Some(CertifiedSet {
                        set_label: format!("probe:{}", short_label(&probe)),
                        timeset: j,
                        certificate: cert,
                    });
                    break;
                }
            }
        }
    }

    // multi-sensitivity over sampled subset collections, on cached sweeps
    let cached: Vec<TimeSet> = capped
        .iter()
        .map(|set| sensitivity_times(system, set, delta, horizon))
        .collect::<Result<Vec<_>>>()?;
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for i in 0..cached.len() {
        subsets.push(vec![i]);
        for j in i + 1..cached.len() {
            subsets.push(vec![i, j]);
            for l in j + 1..cached.len() {
                if subsets.len() > 600 {
                    break;
                }
                subsets.push(vec![i, j, l]);
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(query.seed ^ 0x317);
    for _ in 0..query.random_subsets {
        let k = rng.gen_range(1..=query.k_max.max(1));
        let pick: Vec<usize> =
            (0..k).filter_map(|_| (!cached.is_empty()).then(|| rng.gen_range(0..cached.len()))).collect();
        if !pick.is_empty() {
            subsets.push(pick);
        }
    }
    let mut multi_all = !cached.is_empty();
    'subsets: for subset in &subsets {
        let mut inter = cached[subset[0]].clone();
        for &i in &subset[1..] {
            inter = inter.intersect(&cached[i])?;
        }
        if inter.is_empty() {
            multi_all = false;
            break 'subsets;
        }
    }

    Ok(DeltaOutcome {
        delta,
        sensitive_all,
        sensitive_counterexample,
        thick_all,
        thick_counterexample,
        multi_all,
        all_exact,
    })
}

/// A set with provably empty exact S_T at this δ, when the geometry offers
/// one (isometry arcs/cylinders, invariant slices).
fn null_probe(system: &System, delta: f64) -> Option<OpenSetDescriptor> {
    match &system.kind {
        SystemKind::Rotation { .. } => {
            // arc with diameter δ/2 ≤ δ
            let radius = delta / 4.0;
            Some(OpenSetDescriptor::ball(
                &system.id,
                PointRef::circle(crate::angle::Angle::ZERO),
                radius,
            ))
        }
        SystemKind::Odometer { .. } => {
            let budget = spread_exponent_budget(delta)?;
            Some(OpenSetDescriptor::ball(
                &system.id,
                PointRef::Odometer { phase: crate::point::OdoPhase::Int(0) },
                2f64.powi(-(budget as i32 + 1)),
            ))
        }
        SystemKind::NatCompact => Some(OpenSetDescriptor::ball(
            &system.id,
            PointRef::Nat { value: NatPoint::Fin(1) },
            isolating(1),
        )),
        SystemKind::Quotient { base, collapsed: ClosedSet::CrossAtInfinity } => {
            let q = (2.0 / delta).ceil() as u64;
            Some(referee_slice(system, base, q))
        }
        SystemKind::Quotient { base, collapsed: ClosedSet::SinglePoint { .. } } => {
            let inner = null_probe(base, delta)?;
            Some(OpenSetDescriptor {
                system_id: system.id.clone(),
                kind: SetKind::QuotientImage { inner: Box::new(inner) },
            })
        }
        SystemKind::Product { left, right } => {
            let a = null_probe(left, delta)?;
            let b = null_probe(right, delta)?;
            Some(OpenSetDescriptor {
                system_id: system.id.clone(),
                kind: SetKind::Product { parts: vec![a, b] },
            })
        }
        _ => None,
    }
}

/// A cylinder fine enough that its spread times (cut visits smeared by the
/// δ-window) leave a syndetic complement: the return time to the cylinder's
/// arc must exceed the smear width, which a long enough window of the
/// canonical point guarantees.
fn thick_probe(system: &System, delta: f64) -> Option<OpenSetDescriptor> {
    let budget = spread_exponent_budget(delta)?;
    match &system.kind {
        SystemKind::Sturmian { alpha, rho, sides } => {
            let len = (16 * (2 * budget as usize + 2)).clamp(8, 4096);
            let word: Vec<u8> = (0..len as i64)
                .map(|j| crate::angle::mechanical_symbol(*alpha, *rho, j, false))
                .collect();
            let _ = sides;
            Some(OpenSetDescriptor::cylinder(&system.id, word, 0))
        }
        SystemKind::Toeplitz { periods } => {
            // window pinning the phase modulo a period beyond the smear width
            let mut k = 1;
            while periods.period(k) <= 2 * (2 * budget as u64 + 2) {
                k += 1;
            }
            let len = (2 * periods.period(k)).min(1 << 14) as i64;
            let word: Vec<u8> = (0..len).map(|i| periods.symbol_at(i, 0)).collect();
            Some(OpenSetDescriptor::cylinder(&system.id, word, 0))
        }
        _ => None,
    }
}

fn isolating(m: u64) -> f64 {
    let mut r = 1.0f64;
    let gap = 1.0 / (m as f64 * (m as f64 + 1.0));
    while r >= gap {
        r /= 2.0;
    }
    r
}

/// The open invariant slice Y₁×{q} of the referee example.
pub fn referee_slice(system: &System, base: &System, q: u64) -> OpenSetDescriptor {
    let SystemKind::Product { left, .. } = &base.kind else {
        panic!("referee base is a product");
    };
    OpenSetDescriptor {
        system_id: system.id.clone(),
        kind: SetKind::QuotientImage {
            inner: Box::new(OpenSetDescriptor {
                system_id: base.id.clone(),
                kind: SetKind::Product {
                    parts: vec![
                        OpenSetDescriptor::whole(&left.id),
                        OpenSetDescriptor::ball(
                            "nat-compact",
                            PointRef::Nat { value: NatPoint::Fin(q) },
                            isolating(q),
                        ),
                    ],
                },
            }),
        },
    }
}

fn aggregate_sensitive(per_delta: &[DeltaOutcome]) -> Verdict {
    if let Some(o) = per_delta.iter().find(|o| o.sensitive_all) {
        return Verdict::EvidenceYes {
            delta: o.delta,
            detail: "every basis set spreads past δ with a late member (finite proxy for infinite S_T)".into(),
        };
    }
    if per_delta.iter().all(|o| o.sensitive_counterexample.is_some()) {
        return Verdict::CertifiedNoAtScale {
            scale: "every grid δ".into(),
            detail: format!(
                "per-δ exact-empty witness sets, e.g. {}",
                per_delta[0].sensitive_counterexample.as_deref().unwrap_or("-")
            ),
            derived: false,
        };
    }
    Verdict::Inconclusive { detail: "no exact counterexample and no uniform spread".into() }
}

fn aggregate_thick(per_delta: &[DeltaOutcome], sensitive: &Verdict) -> Verdict {
    // certified negatives dominate sampled evidence
    if sensitive.is_certified_no() {
        return Verdict::CertifiedNoAtScale {
            scale: "every grid δ".into(),
            detail: "not sensitive at any grid δ, hence not thickly sensitive".into(),
            derived: true,
        };
    }
    if per_delta.iter().all(|o| o.thick_counterexample.is_some()) {
        return Verdict::CertifiedNoAtScale {
            scale: "every grid δ".into(),
            detail: "per-δ basis set with exact syndetic J_T certificate".into(),
            derived: false,
        };
    }
    if let Some(o) = per_delta.iter().find(|o| o.thick_all) {
        return Verdict::EvidenceYes {
            delta: o.delta,
            detail: "thick windows at the tested scale for every basis set".into(),
        };
    }
    Verdict::Inconclusive { detail: "mixed thick evidence".into() }
}

fn aggregate_multi(per_delta: &[DeltaOutcome], thick: &Verdict) -> Verdict {
    // an exact thick counterexample refutes multi-sensitivity outright
    if thick.is_certified_no() {
        return Verdict::CertifiedNoAtScale {
            scale: "every grid δ".into(),
            detail: "not thickly sensitive, and multi-sensitivity forces thick sensitivity".into(),
            derived: true,
        };
    }
    if let Some(o) = per_delta.iter().find(|o| o.multi_all) {
        return Verdict::EvidenceYes {
            delta: o.delta,
            detail: "common spread time for every sampled finite collection".into(),
        };
    }
    Verdict::Inconclusive { detail: "mixed multi evidence".into() }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct EqPointResult {
    pub radius: f64,
    pub exact: bool,
}

/// Largest dyadic r such that every n ≤ N has diameter evidence ≤ ε for
/// Tⁿ(B(x,r)); None when the grid is exhausted.
pub fn eq_point_test(
    system: &System,
    x: &PointRef,
    eps: f64,
    horizon: u64,
) -> Result<Option<EqPointResult>> {
    if eps <= 0.0 {
        return Err(Error::Precondition("ε must be positive".into()));
    }
    for j in 1..=30u32 {
        let r = 2f64.powi(-(j as i32));
        let ball = OpenSetDescriptor::ball(&system.id, x.clone(), r);
        if system.validate_set(&ball).is_err() {
            continue;
        }
        match sensitivity_times_exact_only(system, &ball, eps, horizon)? {
            Some(s) => {
                if s.is_empty() {
                    return Ok(Some(EqPointResult { radius: r, exact: true }));
                }
            }
            None => {
                // sampled-sup evidence only: a witness fails this radius
                // fast; an all-quiet net at the finest radius is weak evidence
                let w = first_spread_witness(system, &ball, eps, horizon, 1)?;
                if w.is_none() && j == 30 {
                    return Ok(Some(EqPointResult { radius: r, exact: false }));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SyndeticEqResult {
    pub radius: f64,
    pub entry_time: u64,
    pub certificate: SetCertificate,
    pub exact: bool,
}

/// Radius r with a certified syndetic J_T(B(x,r), ε); supports the entry-time
/// trick (certificate over m + 𝒩 via times past m).
pub fn syndetic_eq_point_test(
    system: &System,
    x: &PointRef,
    eps: f64,
    gap: u64,
    horizon: u64,
    entry_time: u64,
) -> Result<Option<SyndeticEqResult>> {
    if eps <= 0.0 {
        return Err(Error::Precondition("ε must be positive".into()));
    }
    if gap >= horizon {
        return Err(Error::Precondition("gap must be below the horizon".into()));
    }
    for j in 1..=30u32 {
        let r = 2f64.powi(-(j as i32));
        let ball = OpenSetDescriptor::ball(&system.id, x.clone(), r);
        if system.validate_set(&ball).is_err() {
            continue;
        }
        // only exact sweeps can certify the syndetic complement
        let Some(s) = sensitivity_times_exact_only(system, &ball, eps, horizon)? else {
            continue;
        };
        let j_set = s.complement();
        let shifted = if entry_time == 0 {
            j_set
        } else {
            let inner: Vec<u64> = j_set
                .members()
                .filter(|&n| n > entry_time)
                .map(|n| n - entry_time)
                .collect();
            TimeSet::from_members(
                horizon - entry_time,
                TimeSetMode::Exact,
                format!("{} shifted by {entry_time}", j_set.provenance),
                inner,
            )
        };
        if let Ok(Some(cert)) = shifted.is_syndetic_up_to(gap) {
            return Ok(Some(SyndeticEqResult {
                radius: r,
                entry_time,
                certificate: cert,
                exact: true,
            }));
        }
    }
    Ok(None)
}

/// diam(TⁿU) profile for plot data; None where no exact diameter exists.
pub fn diam_profile(
    system: &System,
    set: &OpenSetDescriptor,
    horizon: u64,
) -> Option<Vec<f64>> {
    (1..=horizon).map(|n| system.diam_exact(set, n)).collect()
}

pub fn short_label(set: &OpenSetDescriptor) -> String {
    match &set.kind {
        SetKind::Ball { radius, center } => match center {
            PointRef::Nat { value: NatPoint::Fin(m) } => format!("ball({m},r={radius})"),
            PointRef::Nat { value: NatPoint::Infinity } => format!("ball(∞,r={radius})"),
            _ => format!("ball(r={radius})"),
        },
        SetKind::Cylinder { word, offset } => {
            let w: String = word.iter().map(|s| char::from(b'0' + s)).collect();
            format!("[{w}]@{offset}")
        }
        SetKind::Product { parts } => {
            let inner: Vec<String> = parts.iter().map(short_label).collect();
            format!("({})", inner.join("×"))
        }
        SetKind::QuotientImage { inner } => format!("π({})", short_label(inner)),
    }
}
