//! Proximality, the regionally proximal relation via the single-orbit
//! criterion, Δ-set characterization, minimality evidence, and factor-map
//! fiber analysis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{OdoPhase, PointRef, SymbolRule, WordPoint};
use crate::space::{Membership, OpenSetDescriptor, SetKind, System};
use crate::systems::SystemKind;
use crate::timeset::{TimeSet, TimeSetMode};

/// A system-to-system projection with constructive fiber sampling.
#[derive(Clone, Debug)]
pub struct FactorMap {
    pub source: System,
    pub target: System,
    pub kind: FactorKind,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    /// Coding points of the Sturmian subshift project to their angle.
    SturmianToRotation,
    /// Toeplitz points project to their odometer phase.
    ToeplitzToOdometer,
    /// Tower (x₁, x₂, …) ↦ x₁.
    NatExtProjection,
    Identity,
    /// (x, y) ↦ x.
    ProductFirst,
}

impl FactorMap {
    pub fn new(source: System, target: System, kind: FactorKind) -> Self {
        FactorMap { source, target, kind }
    }

    pub fn project(&self, x: &PointRef) -> Result<PointRef> {
        match self.kind {
            FactorKind::SturmianToRotation => {
                let SystemKind::Sturmian { alpha, .. } = &self.source.kind else {
                    return Err(Error::Unsupported(self.source.id.clone(), "not sturmian".into()));
                };
                let PointRef::Word { point } = x else {
                    return Err(Error::Precondition("expected a word point".into()));
                };
                let SymbolRule::Mechanical { rho, .. } = &point.rule else {
                    return Err(Error::Unsupported(
                        self.source.id.clone(),
                        "projection needs coding-rule points".into(),
                    ));
                };
                Ok(PointRef::circle(rho.add(alpha.mul_int(point.offset))))
            }
            FactorKind::ToeplitzToOdometer => {
                let PointRef::Word { point } = x else {
                    return Err(Error::Precondition("expected a word point".into()));
                };
                match &point.rule {
                    SymbolRule::Toeplitz { .. } => {
                        Ok(PointRef::Odometer { phase: OdoPhase::Int(point.offset) })
                    }
                    SymbolRule::ToeplitzTower { periods, residues, .. } => {
                        let phase = OdoPhase::Tower(residues.clone()).add(periods, point.offset);
                        Ok(PointRef::Odometer { phase })
                    }
                    _ => Err(Error::Unsupported(
                        self.source.id.clone(),
                        "projection needs Toeplitz-rule points".into(),
                    )),
                }
            }
            FactorKind::NatExtProjection => {
                let PointRef::Tower { levels } = x else {
                    return Err(Error::Precondition("expected a tower point".into()));
                };
                Ok(levels[0].clone())
            }
            FactorKind::Identity => Ok(x.clone()),
            FactorKind::ProductFirst => {
                let PointRef::Pair { left, .. } = x else {
                    return Err(Error::Precondition("expected a pair point".into()));
                };
                Ok((**left).clone())
            }
        }
    }

    /// Constructive sample of π⁻¹(y) to the stated resolution. For coding
    /// maps this enumerates codings rather than inverting by search.
    pub fn fiber_sample(&self, y: &PointRef, count: usize, _resolution: u32) -> Result<Vec<PointRef>> {
        match self.kind {
            FactorKind::SturmianToRotation => {
                let SystemKind::Sturmian { alpha, .. } = &self.source.kind else {
                    return Err(Error::Unsupported(self.source.id.clone(), "not sturmian".into()));
                };
                let PointRef::Circle { angle } = y else {
                    return Err(Error::Precondition("expected an angle".into()));
                };
                Ok(vec![
                    PointRef::word(SymbolRule::Mechanical { alpha: *alpha, rho: *angle, upper: false }),
                    PointRef::word(SymbolRule::Mechanical { alpha: *alpha, rho: *angle, upper: true }),
                ])
            }
            FactorKind::ToeplitzToOdometer => {
                let SystemKind::Toeplitz { periods } = &self.source.kind else {
                    return Err(Error::Unsupported(self.source.id.clone(), "not toeplitz".into()));
                };
                let PointRef::Odometer { phase } = y else {
                    return Err(Error::Precondition("expected an odometer phase".into()));
                };
                let mk = |fill: u8| match phase {
                    OdoPhase::Int(z) => PointRef::Word {
                        point: WordPoint {
                            rule: SymbolRule::Toeplitz { periods: periods.clone(), hole_fill: fill },
                            offset: *z,
                        },
                    },
                    OdoPhase::Tower(rs) => PointRef::Word {
                        point: WordPoint {
                            rule: SymbolRule::ToeplitzTower {
                                periods: periods.clone(),
                                residues: rs.clone(),
                                hole_fill: fill,
                            },
                            offset: 0,
                        },
                    },
                };
                Ok(vec![mk(0), mk(1)])
            }
            FactorKind::NatExtProjection => {
                let SystemKind::NaturalExtension { base, depth } = &self.source.kind else {
                    return Err(Error::Unsupported(self.source.id.clone(), "not an extension".into()));
                };
                let mut out = Vec::new();
                for variant in 0..count.max(1) as u64 {
                    let mut levels = vec![y.clone()];
                    let mut ok = true;
                    for lvl in 1..*depth {
                        let prev = levels.last().unwrap();
                        let next = if variant >> (lvl.min(60)) & 1 == 0 {
                            crate::systems::dynamics::preimage(base, prev)
                        } else {
                            preimage_variant(base, prev)
                        };
                        match next {
                            Ok(p) => levels.push(p),
                            Err(_) => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        let t = PointRef::Tower { levels };
                        if !out.contains(&t) {
                            out.push(t);
                        }
                    }
                }
                Ok(out)
            }
            FactorKind::Identity => Ok(vec![y.clone()]),
            FactorKind::ProductFirst => {
                let SystemKind::Product { right, .. } = &self.source.kind else {
                    return Err(Error::Unsupported(self.source.id.clone(), "not a product".into()));
                };
                Ok(right
                    .sample_points(count, 13)
                    .into_iter()
                    .map(|s| PointRef::pair(y.clone(), s))
                    .collect())
            }
        }
    }

    /// π∘T = S∘π check on one point (distance of the two routes).
    pub fn commutation_defect(&self, x: &PointRef, precision: u32) -> Result<f64> {
        let a = self.project(&self.source.step(x)?)?;
        let b = self.target.step(&self.project(x)?)?;
        self.target.distance(&a, &b, precision)
    }
}

/// Second preimage branch where one exists (used to spread fiber samples).
fn preimage_variant(sys: &System, x: &PointRef) -> Result<PointRef> {
    match (&sys.kind, x) {
        (SystemKind::Shift { sides: crate::point::Sides::One }, PointRef::Word { point }) => {
            let rule = SymbolRule::Splice {
                neg: Box::new(SymbolRule::Periodic { word: vec![1] }),
                neg_offset: 0,
                pos: Box::new(point.rule.clone()),
                pos_offset: point.offset,
            };
            Ok(PointRef::Word { point: WordPoint { rule, offset: -1 } })
        }
        _ => crate::systems::dynamics::preimage(sys, x),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Proximal,
    RegionallyProximal,
    DeltaReturn,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RelationStatus {
    ProximalWitness { n: u64, distance: f64 },
    VeechWitness { n: u64, m: u64 },
    DeltaTowerWitness { tower: Vec<u64> },
    NoWitnessUpTo { horizon: u64, params: String },
}

/// Verdict for a pair of points under one of the relations.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RelationVerdict {
    pub relation: RelationKind,
    pub status: RelationStatus,
    /// Negative readings (no witness) are meaningful only under the
    /// minimality hypothesis; witnesses are sound regardless.
    pub hypothesis_minimal: bool,
    /// Sets were shrunk and rescanned after boundary-uncertain memberships.
    pub shrunk_retry: bool,
}

impl RelationVerdict {
    pub fn witnessed(&self) -> bool {
        !matches!(self.status, RelationStatus::NoWitnessUpTo { .. })
    }
}

/// Least n ≤ N with ϱ(Tⁿx, Tⁿy) < ε.
pub fn proximal_test(
    system: &System,
    x: &PointRef,
    y: &PointRef,
    eps: f64,
    horizon: u64,
) -> Result<RelationVerdict> {
    if eps <= 0.0 {
        return Err(Error::Precondition("ε must be positive".into()));
    }
    let precision = prec_for(eps);
    let mut cx = x.clone();
    let mut cy = y.clone();
    for n in 1..=horizon {
        cx = system.step(&cx)?;
        cy = system.step(&cy)?;
        let d = system.distance(&cx, &cy, precision)?;
        if d < eps {
            return Ok(RelationVerdict {
                relation: RelationKind::Proximal,
                status: RelationStatus::ProximalWitness { n, distance: d },
                hypothesis_minimal: system.flags.minimal_expected,
                shrunk_retry: false,
            });
        }
    }
    Ok(RelationVerdict {
        relation: RelationKind::Proximal,
        status: RelationStatus::NoWitnessUpTo { horizon, params: format!("ε={eps}") },
        hypothesis_minimal: system.flags.minimal_expected,
        shrunk_retry: false,
    })
}

/// N_T(x, U) up to N by orbit scan. Exact mode when every membership query
/// is certain; degrades to certified members otherwise.
pub fn return_times(
    system: &System,
    x: &PointRef,
    set: &OpenSetDescriptor,
    horizon: u64,
) -> Result<TimeSet> {
    let mut uncertain = 0u64;
    let mut s = TimeSet::new(
        horizon,
        TimeSetMode::Exact,
        format!("N_T(x, {}⊂{})", set_label(set), system.id),
    );
    let mut cur = x.clone();
    for n in 1..=horizon {
        cur = system.step(&cur)?;
        match system.membership(set, &cur)? {
            Membership::Inside => s.insert(n),
            Membership::Outside => {}
            Membership::Uncertain => uncertain += 1,
        }
    }
    if uncertain > 0 {
        s.mode = TimeSetMode::CertifiedMembers;
        s.provenance = format!("{} [{} boundary-uncertain times]", s.provenance, uncertain);
    }
    Ok(s)
}

/// N_T(U, V) = {n : U ∩ T⁻ⁿV ≠ ∅} via a net sample of U (certified members).
pub fn return_times_pair(
    system: &System,
    u: &OpenSetDescriptor,
    v: &OpenSetDescriptor,
    horizon: u64,
    seed: u64,
) -> Result<TimeSet> {
    let net = system.sample_in_set(u, 8, seed);
    let mut s = TimeSet::new(
        horizon,
        TimeSetMode::CertifiedMembers,
        format!("N_T({}, {})", set_label(u), set_label(v)),
    );
    for p in net {
        let mut cur = p;
        for n in 1..=horizon {
            cur = system.step(&cur)?;
            if system.membership(v, &cur)?.certified_inside() {
                s.insert(n);
            }
        }
    }
    Ok(s)
}

/// Single-orbit regionally-proximal probe: find n ∈ N(x,U), m ∈ N(x,V) with
/// n+m ∈ N(x,U) (word-parallel intersection scan over the return bitsets).
pub fn rp_veech_test(
    system: &System,
    x: &PointRef,
    y: &PointRef,
    set_u: &OpenSetDescriptor,
    set_v: &OpenSetDescriptor,
    horizon: u64,
) -> Result<RelationVerdict> {
    if !system.membership(set_u, x)?.certified_inside() {
        return Err(Error::Precondition("U must contain x".into()));
    }
    if !system.membership(set_v, y)?.certified_inside() {
        return Err(Error::Precondition("V must contain y".into()));
    }
    let (verdict, shrunk) = veech_scan(system, x, set_u, set_v, horizon)?;
    match verdict {
        Some((n, m)) => Ok(RelationVerdict {
            relation: RelationKind::RegionallyProximal,
            status: RelationStatus::VeechWitness { n, m },
            hypothesis_minimal: system.flags.minimal_expected,
            shrunk_retry: shrunk,
        }),
        None => Ok(RelationVerdict {
            relation: RelationKind::RegionallyProximal,
            status: RelationStatus::NoWitnessUpTo {
                horizon,
                params: format!("U={}, V={}", set_label(set_u), set_label(set_v)),
            },
            hypothesis_minimal: system.flags.minimal_expected,
            shrunk_retry: shrunk,
        }),
    }
}

fn veech_scan(
    system: &System,
    x: &PointRef,
    set_u: &OpenSetDescriptor,
    set_v: &OpenSetDescriptor,
    horizon: u64,
) -> Result<(Option<(u64, u64)>, bool)> {
    let mut u = set_u.clone();
    let mut v = set_v.clone();
    for attempt in 0..2 {
        let mut uncertain = false;
        let mut in_u = TimeSet::new(horizon, TimeSetMode::Exact, "N(x,U)");
        let mut in_v = TimeSet::new(horizon, TimeSetMode::Exact, "N(x,V)");
        let mut cur = x.clone();
        for n in 1..=horizon {
            cur = system.step(&cur)?;
            match system.membership(&u, &cur)? {
                Membership::Inside => in_u.insert(n),
                Membership::Uncertain => uncertain = true,
                Membership::Outside => {}
            }
            match system.membership(&v, &cur)? {
                Membership::Inside => in_v.insert(n),
                Membership::Uncertain => uncertain = true,
                Membership::Outside => {}
            }
        }
        // scan m ∈ N(x,V): witness iff N(x,U) ∩ (N(x,U) − m) ≠ ∅
        for m in in_v.members() {
            if let Some(n) = shifted_intersection_min(&in_u, m) {
                return Ok((Some((n, m)), attempt > 0));
            }
        }
        if uncertain && attempt == 0 {
            u = shrink(&u);
            v = shrink(&v);
            continue;
        }
        return Ok((None, attempt > 0));
    }
    Ok((None, true))
}

/// Least n with n ∈ s and n + m ∈ s.
fn shifted_intersection_min(s: &TimeSet, m: u64) -> Option<u64> {
    s.members().find(|&n| n + m <= s.horizon() && s.contains(n + m))
}

fn shrink(set: &OpenSetDescriptor) -> OpenSetDescriptor {
    let mut out = set.clone();
    if let SetKind::Ball { radius, .. } = &mut out.kind {
        *radius /= 2.0;
    }
    out
}

/// Δ-set probe of the regionally proximal relation: a depth-d tower whose
/// differences all land in N_T(x, V).
pub fn rp_delta_test(
    system: &System,
    x: &PointRef,
    y: &PointRef,
    set_v: &OpenSetDescriptor,
    horizon: u64,
    depth: usize,
) -> Result<RelationVerdict> {
    if !system.membership(set_v, y)?.certified_inside() {
        return Err(Error::Precondition("V must contain y".into()));
    }
    let returns = return_times(system, x, set_v, horizon)?;
    let tower = returns.delta_tower_search(depth)?;
    Ok(RelationVerdict {
        relation: RelationKind::DeltaReturn,
        status: match tower {
            Some(crate::timeset::SetCertificate::DeltaTower { tower, .. }) => {
                RelationStatus::DeltaTowerWitness { tower }
            }
            _ => RelationStatus::NoWitnessUpTo {
                horizon,
                params: format!("depth={depth}, V={}", set_label(set_v)),
            },
        },
        hypothesis_minimal: system.flags.minimal_expected,
        shrunk_retry: false,
    })
}

/// Gottschalk-style evidence: N_T(x, U) syndetic for every sampled point and
/// every basis set at resolution ≤ r.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub system_id: String,
    pub horizon: u64,
    pub resolution: u32,
    pub max_gap: u64,
    pub failures: Vec<MinimalityFailure>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct MinimalityFailure {
    pub point_index: usize,
    pub set_index: usize,
    pub observed_gap: u64,
}

pub fn minimality_evidence(
    system: &System,
    points: &[PointRef],
    resolution: u32,
    horizon: u64,
) -> Result<MinimalityReport> {
    let mut max_gap = 0;
    let mut failures = Vec::new();
    let basis = system.basis(resolution)?;
    for (pi, x) in points.iter().enumerate() {
        for (si, set) in basis.iter().enumerate() {
            let rt = return_times(system, x, set, horizon)?;
            let gap = rt.max_gap();
            if gap >= horizon {
                failures.push(MinimalityFailure { point_index: pi, set_index: si, observed_gap: gap });
            } else {
                max_gap = max_gap.max(gap);
            }
        }
    }
    Ok(MinimalityReport { system_id: system.id.clone(), horizon, resolution, max_gap, failures })
}

/// Estimate of ψ(y) = diam(π⁻¹y): max pairwise distance over the sampled
/// fiber (a lower bound), with a singleton flag when it stays below the
/// resolution.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct FiberEstimate {
    pub lower_bound: f64,
    pub singleton_evidence: bool,
}

pub fn fiber_diameter(
    map: &FactorMap,
    y: &PointRef,
    count: usize,
    resolution: u32,
) -> Result<FiberEstimate> {
    let fiber = map.fiber_sample(y, count, resolution)?;
    let mut lower = 0.0f64;
    for (i, a) in fiber.iter().enumerate() {
        for b in &fiber[i + 1..] {
            lower = lower.max(map.source.distance(a, b, resolution + 2)?);
        }
    }
    Ok(FiberEstimate {
        lower_bound: lower,
        singleton_evidence: lower < 2f64.powi(-(resolution as i32)),
    })
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct AlmostOneToOneReport {
    pub grid_size: usize,
    pub singleton_fraction: f64,
    pub min_psi: f64,
    pub max_psi: f64,
    /// For a minimal invertible target either singleton fibers are dense or
    /// inf ψ > 0; this states which side the evidence supports.
    pub dichotomy_note: String,
}

pub fn almost_one_to_one_evidence(
    map: &FactorMap,
    grid: &[PointRef],
    resolution: u32,
) -> Result<AlmostOneToOneReport> {
    let mut singletons = 0usize;
    let mut min_psi = f64::INFINITY;
    let mut max_psi: f64 = 0.0;
    for y in grid {
        let est = fiber_diameter(map, y, 8, resolution)?;
        if est.singleton_evidence {
            singletons += 1;
        }
        min_psi = min_psi.min(est.lower_bound);
        max_psi = max_psi.max(est.lower_bound);
    }
    let frac = singletons as f64 / grid.len().max(1) as f64;
    let note = if frac > 0.5 {
        format!(
            "singleton fibers on {singletons}/{} grid points: evidence for the almost one-to-one side",
            grid.len()
        )
    } else {
        format!(
            "min observed ψ = {min_psi:.6}: evidence for inf ψ > 0 (never almost one-to-one)"
        )
    };
    Ok(AlmostOneToOneReport {
        grid_size: grid.len(),
        singleton_fraction: frac,
        min_psi,
        max_psi,
        dichotomy_note: note,
    })
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ProductProximalReport {
    pub pairs_tested: usize,
    pub witnessed: usize,
    pub verdicts: Vec<RelationVerdict>,
}

/// Fiber pairs of two proximal-candidate maps, tested for proximality in the
/// product system.
pub fn product_proximal_check(
    map1: &FactorMap,
    map2: &FactorMap,
    targets: &[(PointRef, PointRef)],
    eps: f64,
    horizon: u64,
) -> Result<ProductProximalReport> {
    let product =
        crate::systems::make_product(map1.source.clone(), map2.source.clone());
    let mut verdicts = Vec::new();
    let mut witnessed = 0;
    for (y1, y2) in targets {
        let f1 = map1.fiber_sample(y1, 2, 30)?;
        let f2 = map2.fiber_sample(y2, 2, 30)?;
        if f1.is_empty() || f2.is_empty() {
            continue;
        }
        let a = PointRef::pair(f1[0].clone(), f2[0].clone());
        let b = PointRef::pair(
            f1.last().unwrap().clone(),
            f2.last().unwrap().clone(),
        );
        let v = proximal_test(&product, &a, &b, eps, horizon)?;
        if v.witnessed() {
            witnessed += 1;
        }
        verdicts.push(v);
    }
    Ok(ProductProximalReport { pairs_tested: verdicts.len(), witnessed, verdicts })
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct AlmostAutomorphyLevel {
    pub depth: u32,
    pub anchor: u64,
    pub partner: u64,
    pub forward_distance: f64,
    pub back_distance: f64,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct AlmostAutomorphyReport {
    pub pass: bool,
    pub precision: u32,
    pub levels: Vec<AlmostAutomorphyLevel>,
}

/// Almost-automorphy probe: extract near-return pairs T^{n₁}x ≈ T^{n₂}x at
/// dyadic depths (deterministic first pair per depth), anchor x′ = T^{n₁}x,
/// and check that pulling back by the return time lands near x again.
/// Passes when some achieved depth drives the back distance below 2^-p.
pub fn almost_automorphic_test(
    system: &System,
    x: &PointRef,
    precision: u32,
    horizon: u64,
) -> Result<AlmostAutomorphyReport> {
    if !system.flags.invertible {
        return Err(Error::NotInvertible(system.id.clone()));
    }
    let mut levels = Vec::new();
    let mut pass = false;
    for depth in 3..=(3 * precision.max(3) + 10) {
        let Some((n1, n2)) = first_cluster_pair(system, x, depth, horizon)? else {
            break;
        };
        let p1 = system.iterate(x, n1 as i64)?;
        let p2 = system.iterate(x, n2 as i64)?;
        let fwd = system.distance(&p1, &p2, precision + 8)?;
        // x′ ≈ T^{n1}x; the pullback by the deeper return n2: T^{n1−n2}x vs x
        let back_pt = system.iterate(x, n1 as i64 - n2 as i64)?;
        let back = system.distance(&back_pt, x, precision + 8)?;
        levels.push(AlmostAutomorphyLevel {
            depth,
            anchor: n1,
            partner: n2,
            forward_distance: fwd,
            back_distance: back,
        });
        if back <= 2f64.powi(-(precision as i32)) {
            pass = true;
            break;
        }
    }
    Ok(AlmostAutomorphyReport { pass, precision, levels })
}

/// First (lexicographic) pair n₁ < n₂ ≤ N whose orbit points share the
/// depth-j fingerprint (same dyadic bucket / window / residue), so their
/// distance is certified < 2^-j.
fn first_cluster_pair(
    system: &System,
    x: &PointRef,
    depth: u32,
    horizon: u64,
) -> Result<Option<(u64, u64)>> {
    use std::collections::HashMap;
    let mut seen: HashMap<Vec<u8>, u64> = HashMap::new();
    let mut cur = x.clone();
    for n in 1..=horizon {
        cur = system.step(&cur)?;
        let Some(key) = fingerprint(system, &cur, depth) else {
            return Ok(None);
        };
        if let Some(&prev) = seen.get(&key) {
            // first collision in scan order: deterministic
            return Ok(Some((prev, n)));
        }
        seen.insert(key, n);
    }
    Ok(None)
}

/// Depth-j fingerprint: equal fingerprints certify distance < 2^-j.
fn fingerprint(system: &System, p: &PointRef, depth: u32) -> Option<Vec<u8>> {
    match (&system.kind, p) {
        (SystemKind::Rotation { .. }, PointRef::Circle { angle }) => {
            // same 2^-(j+1) bucket ⇒ |Δ| < 2^-j... bucket width 2^-(j+1)
            let bucket = angle.0 >> (128 - (depth + 1).min(127));
            Some(bucket.to_le_bytes().to_vec())
        }
        (
            SystemKind::Shift { .. } | SystemKind::Sturmian { .. } | SystemKind::Toeplitz { .. },
            PointRef::Word { point },
        ) => {
            // window [−j, j]: agreement ⇒ distance ≤ 2^-(j+1)
            let mut key = Vec::with_capacity(2 * depth as usize + 1);
            for i in -(depth as i64)..=depth as i64 {
                key.push(point.symbol_at(i));
            }
            Some(key)
        }
        (SystemKind::Odometer { periods }, PointRef::Odometer { phase }) => {
            let mut key = Vec::new();
            for k in 1..=depth as usize {
                key.extend_from_slice(&phase.residue(periods, k).to_le_bytes());
            }
            Some(key)
        }
        _ => None,
    }
}

fn prec_for(eps: f64) -> u32 {
    let mut p = 4u32;
    let mut v = 2f64.powi(-4);
    while v >= eps && p < 120 {
        p += 1;
        v /= 2.0;
    }
    p + 8
}

fn set_label(set: &OpenSetDescriptor) -> String {
    match &set.kind {
        SetKind::Ball { radius, .. } => format!("ball(r={radius})"),
        SetKind::Cylinder { word, offset } => {
            let w: String = word.iter().map(|s| char::from(b'0' + s)).collect();
            format!("[{w}]@{offset}")
        }
        SetKind::Product { parts } => format!("product({})", parts.len()),
        SetKind::QuotientImage { .. } => "quotient-image".into(),
    }
}
