//! Versioned JSON run reports: self-contained, digest-protected, and
//! re-validatable without recomputing sweeps.
//!
//! Every embedded witness carries the points and parameters needed to
//! recompute its defining inequality; every combinatorial certificate is
//! stored next to the (RLE-encoded) TimeSet it certifies. A content digest
//! over the canonical payload (wall-clock excluded) makes any single-bit
//! tamper detectable even where a mutation would leave a claim semantically
//! valid.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::relations::{
    AlmostAutomorphyReport, AlmostOneToOneReport, FiberEstimate, MinimalityReport,
    ProductProximalReport, RelationStatus, RelationVerdict,
};
use crate::sensitivity::{
    EqPointResult, MultiWitness, SensitivityReport, SpreadWitness, SyndeticEqResult,
};
use crate::space::{Membership, OpenSetDescriptor, System};
use crate::systems::SystemSpec;
use crate::timeset::TimeSet;

pub const SCHEMA_VERSION: u32 = 1;

pub fn tool_version() -> String {
    format!("topodyn {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OpResult {
    Classify {
        report: SensitivityReport,
    },
    TimeSetDump {
        label: String,
        set: OpenSetDescriptor,
        delta: f64,
        complemented: bool,
        timeset: TimeSet,
        witnesses: Vec<SpreadWitness>,
    },
    MultiWitnessOp {
        delta: f64,
        sets: Vec<OpenSetDescriptor>,
        witness: Option<MultiWitness>,
    },
    EqTest {
        point: PointRef,
        eps: f64,
        result: Option<EqPointResult>,
    },
    SyndeticEqTest {
        point: PointRef,
        eps: f64,
        gap: u64,
        entry_time: u64,
        result: Option<SyndeticEqResult>,
        stability_set: Option<TimeSet>,
    },
    ReturnTimes {
        point: PointRef,
        set: OpenSetDescriptor,
        timeset: TimeSet,
        max_gap: u64,
    },
    Proximal {
        x: PointRef,
        y: PointRef,
        eps: f64,
        verdict: RelationVerdict,
    },
    RpVeech {
        x: PointRef,
        y: PointRef,
        set_u: OpenSetDescriptor,
        set_v: OpenSetDescriptor,
        verdict: RelationVerdict,
    },
    RpDelta {
        x: PointRef,
        y: PointRef,
        set_v: OpenSetDescriptor,
        depth: usize,
        verdict: RelationVerdict,
    },
    Minimality {
        report: MinimalityReport,
    },
    FiberDiameter {
        target_point: PointRef,
        estimate: FiberEstimate,
    },
    AlmostOneToOne {
        report: AlmostOneToOneReport,
    },
    ProductProximal {
        report: ProductProximalReport,
    },
    AlmostAutomorphic {
        point: PointRef,
        report: AlmostAutomorphyReport,
    },
    DiamProfile {
        set: OpenSetDescriptor,
        values: Vec<f64>,
    },
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct PredictionRow {
    pub system: String,
    pub property: String,
    pub predicted: String,
    pub computed: String,
    pub rationale: String,
    pub pass: bool,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub run_name: String,
    pub system: SystemSpec,
    pub seed: u64,
    pub horizon: u64,
    pub results: Vec<OpResult>,
    pub prediction_matrix: Vec<PredictionRow>,
    /// sha-256 over the canonical payload (digest and wall-clock zeroed)
    pub digest: String,
    /// excluded from the digest
    pub wall_clock_ms: u64,
}

impl RunReport {
    pub fn finalize(mut self, wall_clock_ms: u64) -> Result<RunReport> {
        self.digest = String::new();
        self.wall_clock_ms = 0;
        let canon = serde_json::to_vec(&self)?;
        let mut h = Sha256::new();
        h.update(&canon);
        self.digest = hex::encode(h.finalize());
        self.wall_clock_ms = wall_clock_ms;
        Ok(self)
    }

    pub fn recompute_digest(&self) -> Result<String> {
        let mut clone = self.clone();
        clone.digest = String::new();
        clone.wall_clock_ms = 0;
        let canon = serde_json::to_vec(&clone)?;
        let mut h = Sha256::new();
        h.update(&canon);
        Ok(hex::encode(h.finalize()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl ValidationSummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-validate a report: schema version, content digest, then every embedded
/// certificate and witness (single inequalities and cert-vs-bitset checks;
/// no sweep is recomputed).
pub fn validate_report(report: &RunReport) -> Result<ValidationSummary> {
    let mut checks = 0usize;
    let mut failures: Vec<String> = Vec::new();
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::ReportInvalid(format!(
            "schema version {} unsupported (expected {})",
            report.schema_version, SCHEMA_VERSION
        )));
    }
    checks += 1;
    match report.recompute_digest() {
        Ok(d) if d == report.digest => {}
        Ok(d) => failures.push(format!("digest mismatch: stored {} vs {}", report.digest, d)),
        Err(e) => failures.push(format!("digest recompute failed: {e}")),
    }
    let system = match report.system.build() {
        Ok(s) => s,
        Err(e) => {
            failures.push(format!("system rebuild failed: {e}"));
            return Ok(ValidationSummary { checks, failures });
        }
    };
    for (i, op) in report.results.iter().enumerate() {
        let mut fail = |msg: String| failures.push(format!("result[{i}]: {msg}"));
        match op {
            OpResult::Classify { report: r } => {
                // witnesses in classify are stored per basis set at the
                // certifying δ; re-check the separation inequality
                if let crate::sensitivity::Verdict::EvidenceYes { delta, .. } = &r.sensitive {
                    for w in &r.spread_witnesses {
                        checks += 1;
                        if let Err(e) = check_spread(&system, None, w, *delta) {
                            fail(format!("classify spread witness: {e}"));
                        }
                    }
                }
                for cs in &r.thick_certificates {
                    checks += 1;
                    if let Err(e) = cs.certificate.revalidate(&cs.timeset) {
                        fail(format!("thick certificate: {e}"));
                    }
                }
                for mw in &r.multi_witnesses {
                    for w in &mw.pairs {
                        checks += 1;
                        if let Err(e) = check_spread(&system, None, w, mw.delta) {
                            fail(format!("multi witness: {e}"));
                        }
                    }
                }
            }
            OpResult::TimeSetDump { set, delta, witnesses, timeset, complemented, .. } => {
                for w in witnesses {
                    checks += 1;
                    if let Err(e) = check_spread(&system, Some(set), w, *delta) {
                        fail(format!("timeset witness: {e}"));
                    }
                    if !*complemented && !timeset.contains(w.n) {
                        fail(format!("witnessed time {} missing from the set", w.n));
                    }
                }
            }
            OpResult::MultiWitnessOp { delta, sets, witness } => {
                if let Some(mw) = witness {
                    for (w, set) in mw.pairs.iter().zip(sets.iter()) {
                        checks += 1;
                        if let Err(e) = check_spread(&system, Some(set), w, *delta) {
                            fail(format!("multi witness: {e}"));
                        }
                    }
                }
            }
            OpResult::SyndeticEqTest { result, stability_set, .. } => {
                if let (Some(res), Some(j)) = (result, stability_set) {
                    checks += 1;
                    if let Err(e) = res.certificate.revalidate(j) {
                        fail(format!("syndetic-eq certificate: {e}"));
                    }
                }
            }
            OpResult::ReturnTimes { timeset, max_gap, .. } => {
                checks += 1;
                if timeset.max_gap() != *max_gap {
                    fail("stored max gap disagrees with the stored set".into());
                }
            }
            OpResult::Proximal { x, y, eps, verdict } => {
                if let RelationStatus::ProximalWitness { n, distance } = &verdict.status {
                    checks += 1;
                    match recompute_pair_distance(&system, x, y, *n) {
                        Ok(d) => {
                            if !(d < *eps) || (d - distance).abs() > 1e-9 {
                                fail(format!("proximal witness: d={d} vs stored {distance}, ε={eps}"));
                            }
                        }
                        Err(e) => fail(format!("proximal witness: {e}")),
                    }
                }
            }
            OpResult::RpVeech { x, set_u, set_v, verdict, .. } => {
                if let RelationStatus::VeechWitness { n, m } = &verdict.status {
                    checks += 1;
                    if let Err(e) = check_veech(&system, x, set_u, set_v, *n, *m) {
                        fail(format!("veech witness: {e}"));
                    }
                }
            }
            OpResult::RpDelta { x, set_v, verdict, .. } => {
                if let RelationStatus::DeltaTowerWitness { tower } = &verdict.status {
                    checks += 1;
                    if let Err(e) = check_delta_tower(&system, x, set_v, tower) {
                        fail(format!("Δ-tower witness: {e}"));
                    }
                }
            }
            _ => {}
        }
    }
    Ok(ValidationSummary { checks, failures })
}

fn check_spread(
    system: &System,
    set: Option<&OpenSetDescriptor>,
    w: &SpreadWitness,
    delta: f64,
) -> Result<()> {
    if let Some(set) = set {
        for p in [&w.x1, &w.x2] {
            if system.membership(set, p)? != Membership::Inside {
                return Err(Error::CertificateInvalid("witness point outside the set".into()));
            }
        }
    }
    let a = system.iterate(&w.x1, w.n as i64)?;
    let b = system.iterate(&w.x2, w.n as i64)?;
    let d = system.distance(&a, &b, 60)?;
    if d > delta && (d - w.distance).abs() <= 1e-9 {
        Ok(())
    } else {
        Err(Error::CertificateInvalid(format!(
            "recomputed separation {d} (stored {}) vs δ={delta}",
            w.distance
        )))
    }
}

fn recompute_pair_distance(system: &System, x: &PointRef, y: &PointRef, n: u64) -> Result<f64> {
    let a = system.iterate(x, n as i64)?;
    let b = system.iterate(y, n as i64)?;
    system.distance(&a, &b, 60)
}

fn check_veech(
    system: &System,
    x: &PointRef,
    set_u: &OpenSetDescriptor,
    set_v: &OpenSetDescriptor,
    n: u64,
    m: u64,
) -> Result<()> {
    let at = |k: u64| -> Result<PointRef> { system.iterate(x, k as i64) };
    let checks = [
        (at(n)?, set_u, "Tⁿx ∈ U"),
        (at(n + m)?, set_u, "T^{n+m}x ∈ U"),
        (at(m)?, set_v, "T^m x ∈ V"),
    ];
    for (p, set, what) in checks {
        if system.membership(set, &p)? != Membership::Inside {
            return Err(Error::CertificateInvalid(format!("{what} fails")));
        }
    }
    Ok(())
}

fn check_delta_tower(
    system: &System,
    x: &PointRef,
    set_v: &OpenSetDescriptor,
    tower: &[u64],
) -> Result<()> {
    if tower.len() < 2 {
        return Err(Error::CertificateInvalid("tower too short".into()));
    }
    for (i, &a) in tower.iter().enumerate() {
        for &b in &tower[i + 1..] {
            let p = system.iterate(x, (b - a) as i64)?;
            if system.membership(set_v, &p)? != Membership::Inside {
                return Err(Error::CertificateInvalid(format!(
                    "difference {} does not return to V",
                    b - a
                )));
            }
        }
    }
    Ok(())
}

/// NDJSON line for a TimeSet dump.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeSetRecord {
    pub provenance: String,
    pub horizon: u64,
    pub mode: crate::timeset::TimeSetMode,
    pub members_rle: Vec<[u64; 2]>,
    pub certificates: Vec<crate::timeset::SetCertificate>,
}

impl TimeSetRecord {
    pub fn from_timeset(ts: &TimeSet, certificates: Vec<crate::timeset::SetCertificate>) -> Self {
        TimeSetRecord {
            provenance: ts.provenance.clone(),
            horizon: ts.horizon(),
            mode: ts.mode,
            members_rle: ts.to_rle(),
            certificates,
        }
    }
}
