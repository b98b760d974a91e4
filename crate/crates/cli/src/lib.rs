//! Declarative experiment ingestion, batch execution, report persistence,
//! and plot-data emission for the topodyn library.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use topodyn::angle::{Angle, AlphaSpec};
use topodyn::point::{NatPoint, OdoPhase, Periods, PointRef, SymbolRule, WordPoint};
use topodyn::relations::{self, FactorKind, FactorMap};
use topodyn::report::{
    validate_report, OpResult, PredictionRow, RunReport, TimeSetRecord, SCHEMA_VERSION,
};
use topodyn::sensitivity::{self, SensitivityQuery, Verdict};
use topodyn::space::{OpenSetDescriptor, SetKind, System};
use topodyn::systems::{catalog, SensClass, SystemKind, SystemSpec};
use topodyn::timeset::TimeSet;

pub mod exit_codes {
    pub const OK: i32 = 0;
    pub const EXECUTION: i32 = 1;
    pub const SCHEMA: i32 = 2;
    pub const PREDICTION: i32 = 3;
}

/// Top-level experiment file: a list of runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: Vec<RunConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub output: PathBuf,
    pub system: SystemSpec,
    pub query: QueryConfig,
    pub ops: Vec<OpConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryConfig {
    pub horizon: u64,
    pub resolution: u32,
    /// mandatory: every sampled mode derives its determinism from it
    pub seed: u64,
    #[serde(default)]
    pub delta_grid: Vec<f64>,
    #[serde(default = "default_thick_scale")]
    pub thick_scale: u64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_random_subsets")]
    pub random_subsets: usize,
}

fn default_thick_scale() -> u64 {
    64
}
fn default_k_max() -> usize {
    8
}
fn default_random_subsets() -> usize {
    64
}

impl QueryConfig {
    fn to_query(&self) -> SensitivityQuery {
        SensitivityQuery {
            delta_grid: self.delta_grid.clone(),
            resolution: self.resolution,
            horizon: self.horizon,
            thick_scale: self.thick_scale,
            k_max: self.k_max,
            random_subsets: self.random_subsets,
            seed: self.seed,
            mode: sensitivity::ModeRequest::ExactIfAvailable,
        }
    }
}

/// Friendly point grammar resolved against the run's system.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointConfig {
    Circle { angle: f64 },
    Mechanical { alpha: AlphaSpec, intercept: f64, #[serde(default)] upper: bool },
    Periodic { word: String },
    Champernowne,
    LacunaryBlocks { base: u64 },
    ToeplitzPhase { phase: i64, #[serde(default)] hole_fill: u8 },
    Nat { value: u64 },
    NatInfinity,
    OdometerInt { phase: i64 },
    Pair { left: Box<PointConfig>, right: Box<PointConfig> },
    Class { rep: Box<PointConfig> },
    /// deterministic sample point of the run's system
    Sample { index: usize },
}

fn parse_word(word: &str) -> anyhow::Result<Vec<u8>> {
    word.chars()
        .map(|c| match c {
            '0' => Ok(0u8),
            '1' => Ok(1u8),
            _ => Err(anyhow::anyhow!("word symbols must be 0/1, got {c:?}")),
        })
        .collect()
}

impl PointConfig {
    pub fn build(&self, system: &System, seed: u64) -> anyhow::Result<PointRef> {
        Ok(match self {
            PointConfig::Circle { angle } => PointRef::circle(Angle::from_f64(*angle)),
            PointConfig::Mechanical { alpha, intercept, upper } => {
                PointRef::word(SymbolRule::Mechanical {
                    alpha: alpha.to_angle()?,
                    rho: Angle::from_f64(*intercept),
                    upper: *upper,
                })
            }
            PointConfig::Periodic { word } => {
                PointRef::word(SymbolRule::Periodic { word: parse_word(word)? })
            }
            PointConfig::Champernowne => PointRef::word(SymbolRule::Champernowne),
            PointConfig::LacunaryBlocks { base } => {
                PointRef::word(SymbolRule::LacunaryBlocks { base: *base })
            }
            PointConfig::ToeplitzPhase { phase, hole_fill } => {
                let periods = toeplitz_periods(system)?;
                PointRef::Word {
                    point: WordPoint {
                        rule: SymbolRule::Toeplitz { periods, hole_fill: *hole_fill },
                        offset: *phase,
                    },
                }
            }
            PointConfig::Nat { value } => PointRef::Nat { value: NatPoint::Fin(*value) },
            PointConfig::NatInfinity => PointRef::Nat { value: NatPoint::Infinity },
            PointConfig::OdometerInt { phase } => {
                PointRef::Odometer { phase: OdoPhase::Int(*phase) }
            }
            PointConfig::Pair { left, right } => {
                let (l, r) = component_systems(system)?;
                PointRef::pair(left.build(l, seed)?, right.build(r, seed)?)
            }
            PointConfig::Class { rep } => {
                let base = quotient_base(system)?;
                PointRef::class(rep.build(base, seed)?)
            }
            PointConfig::Sample { index } => {
                let pts = system.sample_points(index + 1, seed);
                pts.into_iter()
                    .nth(*index)
                    .ok_or_else(|| anyhow::anyhow!("sample index {index} out of range"))?
            }
        })
    }
}

fn toeplitz_periods(system: &System) -> anyhow::Result<Periods> {
    match &system.kind {
        SystemKind::Toeplitz { periods } => Ok(periods.clone()),
        SystemKind::Product { left, .. } => toeplitz_periods(left),
        SystemKind::Quotient { base, .. } => toeplitz_periods(base),
        _ => Err(anyhow::anyhow!("{} has no Toeplitz period structure", system.id)),
    }
}

fn component_systems(system: &System) -> anyhow::Result<(&System, &System)> {
    match &system.kind {
        SystemKind::Product { left, right } => Ok((left, right)),
        SystemKind::Quotient { base, .. } => component_systems(base),
        _ => Err(anyhow::anyhow!("{} is not a product", system.id)),
    }
}

fn quotient_base(system: &System) -> anyhow::Result<&System> {
    match &system.kind {
        SystemKind::Quotient { base, .. } => Ok(base),
        _ => Err(anyhow::anyhow!("{} is not a quotient", system.id)),
    }
}

/// Friendly open-set grammar; system ids are filled from the run's system.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetConfig {
    Ball { center: Box<PointConfig>, radius: f64 },
    Cylinder { word: String, offset: i64 },
    Whole,
    Product { parts: Vec<SetConfig> },
    QuotientImage { inner: Box<SetConfig> },
    /// the open invariant slice Y₁×{p} of the referee example
    RefereeSlice { p: u64 },
}

impl SetConfig {
    pub fn build(&self, system: &System, seed: u64) -> anyhow::Result<OpenSetDescriptor> {
        Ok(match self {
            SetConfig::Ball { center, radius } => {
                OpenSetDescriptor::ball(&system.id, center.build(system, seed)?, *radius)
            }
            SetConfig::Cylinder { word, offset } => {
                OpenSetDescriptor::cylinder(&system.id, parse_word(word)?, *offset)
            }
            SetConfig::Whole => OpenSetDescriptor::whole(&system.id),
            SetConfig::Product { parts } => {
                if parts.len() != 2 {
                    anyhow::bail!("product sets take exactly two parts");
                }
                let (l, r) = component_systems(system)?;
                OpenSetDescriptor {
                    system_id: system.id.clone(),
                    kind: SetKind::Product {
                        parts: vec![parts[0].build(l, seed)?, parts[1].build(r, seed)?],
                    },
                }
            }
            SetConfig::QuotientImage { inner } => {
                let base = quotient_base(system)?;
                OpenSetDescriptor {
                    system_id: system.id.clone(),
                    kind: SetKind::QuotientImage { inner: Box::new(inner.build(base, seed)?) },
                }
            }
            SetConfig::RefereeSlice { p } => {
                let base = quotient_base(system)?;
                sensitivity::referee_slice(system, base, *p)
            }
        })
    }
}

/// Factor maps constructible for a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapConfig {
    SturmianToRotation { alpha: AlphaSpec, intercept: f64 },
    ToeplitzToOdometer { periods: Vec<u64> },
    Identity,
    ProductFirst,
}

impl MapConfig {
    pub fn build(&self, system: &System) -> anyhow::Result<FactorMap> {
        Ok(match self {
            MapConfig::SturmianToRotation { alpha, intercept } => {
                let sides = match &system.kind {
                    SystemKind::Sturmian { sides, .. } => *sides,
                    _ => anyhow::bail!("{} is not a Sturmian system", system.id),
                };
                let (_, map) = topodyn::systems::make_sturmian(alpha, *intercept, sides)?;
                map
            }
            MapConfig::ToeplitzToOdometer { periods } => {
                let (_, _, map) = topodyn::systems::make_toeplitz_odometer_pair(periods.clone())?;
                map
            }
            MapConfig::Identity => {
                FactorMap::new(system.clone(), system.clone(), FactorKind::Identity)
            }
            MapConfig::ProductFirst => {
                let (l, _) = component_systems(system)?;
                FactorMap::new(system.clone(), l.clone(), FactorKind::ProductFirst)
            }
        })
    }
}

/// One operation to execute against the run's system.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpConfig {
    Classify,
    SensitivityTimes { set: SetConfig, delta: f64, #[serde(default)] complement: bool },
    MultiWitness { sets: Vec<SetConfig>, delta: f64 },
    EqTest { point: PointConfig, eps: f64 },
    SyndeticEqTest {
        point: PointConfig,
        eps: f64,
        gap: u64,
        #[serde(default)]
        entry_time: u64,
    },
    ReturnTimes { point: PointConfig, set: SetConfig },
    Proximal { x: PointConfig, y: PointConfig, eps: f64 },
    RpVeech { x: PointConfig, y: PointConfig, set_u: SetConfig, set_v: SetConfig },
    RpDelta { x: PointConfig, y: PointConfig, set_v: SetConfig, depth: usize },
    Minimality { points: usize },
    FiberDiameter { map: MapConfig, target: PointConfig, count: usize, resolution: u32 },
    AlmostOneToOne { map: MapConfig, grid: usize, resolution: u32 },
    ProductProximal { map1: MapConfig, map2: MapConfig, targets: usize, eps: f64 },
    AlmostAutomorphic { point: PointConfig, precision: u32 },
    DiamProfile { set: SetConfig },
}

pub fn parse_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let raw = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    let cfg: ExperimentConfig = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&raw)?,
        _ => toml::from_str(&raw)?,
    };
    if cfg.run.is_empty() {
        anyhow::bail!("config declares no runs");
    }
    Ok(cfg)
}

/// Execute one run: build the system, run each op, check predictions.
pub fn execute_run(run: &RunConfig) -> anyhow::Result<RunReport> {
    let started = Instant::now();
    let system = run.system.build()?;
    let seed = run.query.seed;
    let horizon = run.query.horizon;
    let query = run.query.to_query();
    let mut results = Vec::with_capacity(run.ops.len());
    let mut classify_report = None;
    let mut minimality_ok: Option<bool> = None;
    let mut syndetic_eq_ok: Option<bool> = None;
    let mut aa_pass: Option<bool> = None;

    for op in &run.ops {
        let result = match op {
            OpConfig::Classify => {
                let report = sensitivity::classify(&system, &query)?;
                classify_report = Some(report.clone());
                OpResult::Classify { report }
            }
            OpConfig::SensitivityTimes { set, delta, complement } => {
                let set = set.build(&system, seed)?;
                let (mut ts, witnesses) = sensitivity::sensitivity_times_with_witnesses(
                    &system, &set, *delta, horizon, seed,
                )?;
                if *complement {
                    ts = ts.complement();
                }
                OpResult::TimeSetDump {
                    label: ts.provenance.clone(),
                    set,
                    delta: *delta,
                    complemented: *complement,
                    timeset: ts,
                    witnesses,
                }
            }
            OpConfig::MultiWitness { sets, delta } => {
                let sets: Vec<OpenSetDescriptor> =
                    sets.iter().map(|s| s.build(&system, seed)).collect::<anyhow::Result<_>>()?;
                let witness =
                    sensitivity::multi_sensitivity_witness(&system, *delta, &sets, horizon, seed)?;
                OpResult::MultiWitnessOp { delta: *delta, sets, witness }
            }
            OpConfig::EqTest { point, eps } => {
                let point = point.build(&system, seed)?;
                let result = sensitivity::eq_point_test(&system, &point, *eps, horizon)?;
                OpResult::EqTest { point, eps: *eps, result }
            }
            OpConfig::SyndeticEqTest { point, eps, gap, entry_time } => {
                let point = point.build(&system, seed)?;
                let result = sensitivity::syndetic_eq_point_test(
                    &system, &point, *eps, *gap, horizon, *entry_time,
                )?;
                syndetic_eq_ok = Some(syndetic_eq_ok.unwrap_or(true) && result.is_some());
                // embed the stability set the certificate talks about
                let stability_set = match &result {
                    Some(res) => {
                        let ball = OpenSetDescriptor::ball(&system.id, point.clone(), res.radius);
                        sensitivity::sensitivity_times_exact_only(&system, &ball, *eps, horizon)?
                            .map(|s| shift_complement(&s, res.entry_time, horizon))
                    }
                    None => None,
                };
                OpResult::SyndeticEqTest {
                    point,
                    eps: *eps,
                    gap: *gap,
                    entry_time: *entry_time,
                    result,
                    stability_set,
                }
            }
            OpConfig::ReturnTimes { point, set } => {
                let point = point.build(&system, seed)?;
                let set = set.build(&system, seed)?;
                let ts = relations::return_times(&system, &point, &set, horizon)?;
                let max_gap = ts.max_gap();
                OpResult::ReturnTimes { point, set, timeset: ts, max_gap }
            }
            OpConfig::Proximal { x, y, eps } => {
                let x = x.build(&system, seed)?;
                let y = y.build(&system, seed)?;
                let verdict = relations::proximal_test(&system, &x, &y, *eps, horizon)?;
                OpResult::Proximal { x, y, eps: *eps, verdict }
            }
            OpConfig::RpVeech { x, y, set_u, set_v } => {
                let x = x.build(&system, seed)?;
                let y = y.build(&system, seed)?;
                let set_u = set_u.build(&system, seed)?;
                let set_v = set_v.build(&system, seed)?;
                let verdict = relations::rp_veech_test(&system, &x, &y, &set_u, &set_v, horizon)?;
                OpResult::RpVeech { x, y, set_u, set_v, verdict }
            }
            OpConfig::RpDelta { x, y, set_v, depth } => {
                let x = x.build(&system, seed)?;
                let y = y.build(&system, seed)?;
                let set_v = set_v.build(&system, seed)?;
                let verdict = relations::rp_delta_test(&system, &x, &y, &set_v, horizon, *depth)?;
                OpResult::RpDelta { x, y, set_v, depth: *depth, verdict }
            }
            OpConfig::Minimality { points } => {
                let pts = system.sample_points(*points, seed);
                let report =
                    relations::minimality_evidence(&system, &pts, query.resolution, horizon)?;
                minimality_ok = Some(report.failures.is_empty());
                OpResult::Minimality { report }
            }
            OpConfig::FiberDiameter { map, target, count, resolution } => {
                let map = map.build(&system)?;
                let target_point = target.build(&map.target, seed)?;
                let estimate = relations::fiber_diameter(&map, &target_point, *count, *resolution)?;
                OpResult::FiberDiameter { target_point, estimate }
            }
            OpConfig::AlmostOneToOne { map, grid, resolution } => {
                let map = map.build(&system)?;
                let grid_pts = map.target.sample_points(*grid, seed);
                let report = relations::almost_one_to_one_evidence(&map, &grid_pts, *resolution)?;
                OpResult::AlmostOneToOne { report }
            }
            OpConfig::ProductProximal { map1, map2, targets, eps } => {
                let map1 = map1.build(&system)?;
                let map2 = map2.build(&system)?;
                let t1 = map1.target.sample_points(*targets, seed);
                let t2 = map2.target.sample_points(*targets, seed.wrapping_add(1));
                let pairs: Vec<(PointRef, PointRef)> = t1.into_iter().zip(t2).collect();
                let report =
                    relations::product_proximal_check(&map1, &map2, &pairs, *eps, horizon)?;
                OpResult::ProductProximal { report }
            }
            OpConfig::AlmostAutomorphic { point, precision } => {
                let point = point.build(&system, seed)?;
                let report =
                    relations::almost_automorphic_test(&system, &point, *precision, horizon)?;
                aa_pass = Some(report.pass);
                OpResult::AlmostAutomorphic { point, report }
            }
            OpConfig::DiamProfile { set } => {
                let set = set.build(&system, seed)?;
                let values = sensitivity::diam_profile(&system, &set, horizon.min(4096))
                    .ok_or_else(|| anyhow::anyhow!("no exact diameter profile for this set"))?;
                OpResult::DiamProfile { set, values }
            }
        };
        results.push(result);
    }

    let prediction_matrix = prediction_rows(
        &run.system,
        &system,
        classify_report.as_ref(),
        minimality_ok,
        syndetic_eq_ok,
        aa_pass,
    );

    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: topodyn::report::tool_version(),
        run_name: run.name.clone(),
        system: run.system.clone(),
        seed,
        horizon,
        results,
        prediction_matrix,
        digest: String::new(),
        wall_clock_ms: 0,
    };
    Ok(report.finalize(started.elapsed().as_millis() as u64)?)
}

fn shift_complement(s: &TimeSet, entry: u64, horizon: u64) -> TimeSet {
    let j = s.complement();
    if entry == 0 {
        return j;
    }
    let members: Vec<u64> = j.members().filter(|&n| n > entry).map(|n| n - entry).collect();
    TimeSet::from_members(
        horizon - entry,
        j.mode,
        format!("{} shifted by {entry}", j.provenance),
        members,
    )
}

/// Prediction-vs-verdict rows for properties the run actually computed,
/// plus the always-cheap invertibility flag.
fn prediction_rows(
    spec: &SystemSpec,
    system: &System,
    classify: Option<&topodyn::sensitivity::SensitivityReport>,
    minimality_ok: Option<bool>,
    syndetic_eq_ok: Option<bool>,
    aa_pass: Option<bool>,
) -> Vec<PredictionRow> {
    let Some(entry) = catalog().into_iter().find(|e| &e.spec == spec) else {
        return vec![];
    };
    let p = &entry.predictions;
    let mut rows = vec![PredictionRow {
        system: entry.name.clone(),
        property: "invertible".into(),
        predicted: p.invertible.to_string(),
        computed: system.flags.invertible.to_string(),
        rationale: p.rationale.clone(),
        pass: p.invertible == system.flags.invertible,
    }];
    if let Some(rep) = classify {
        let computed = classify_class(rep);
        let predicted = p.sensitivity;
        rows.push(PredictionRow {
            system: entry.name.clone(),
            property: "sensitivity_class".into(),
            predicted: format!("{predicted:?}"),
            computed: format!("{computed:?}"),
            rationale: p.rationale.clone(),
            pass: computed == Some(predicted),
        });
    }
    if let (Some(ok), Some(pred)) = (minimality_ok, p.minimal) {
        rows.push(PredictionRow {
            system: entry.name.clone(),
            property: "minimal (return-time evidence)".into(),
            predicted: pred.to_string(),
            computed: ok.to_string(),
            rationale: p.rationale.clone(),
            pass: ok == pred,
        });
    }
    if let (Some(ok), Some(pred)) = (syndetic_eq_ok, p.syndetically_equicontinuous) {
        rows.push(PredictionRow {
            system: entry.name.clone(),
            property: "syndetically_equicontinuous (sampled points)".into(),
            predicted: pred.to_string(),
            computed: ok.to_string(),
            rationale: p.rationale.clone(),
            pass: ok == pred,
        });
    }
    if let (Some(ok), Some(pred)) = (aa_pass, p.almost_automorphic) {
        rows.push(PredictionRow {
            system: entry.name.clone(),
            property: "almost_automorphic (probe point)".into(),
            predicted: pred.to_string(),
            computed: ok.to_string(),
            rationale: p.rationale.clone(),
            pass: ok == pred,
        });
    }
    rows
}

fn classify_class(rep: &topodyn::sensitivity::SensitivityReport) -> Option<SensClass> {
    match (&rep.sensitive, &rep.thickly_sensitive, &rep.multi_sensitive) {
        (Verdict::CertifiedNoAtScale { .. }, _, _) => Some(SensClass::NotSensitive),
        (Verdict::EvidenceYes { .. }, t, m) if t.is_yes() && m.is_yes() => {
            Some(SensClass::MultiSensitive)
        }
        (Verdict::EvidenceYes { .. }, t, m) if t.is_certified_no() && m.is_certified_no() => {
            Some(SensClass::SensitiveNotThick)
        }
        _ => None,
    }
}

/// Execute every run of a config; write one JSON report per run plus an
/// NDJSON TimeSet dump; exit 0 iff all prediction rows pass.
pub fn run(config_path: &Path, workers: Option<usize>) -> i32 {
    let cfg = match parse_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return exit_codes::SCHEMA;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers.or_else(env_workers) {
        builder = builder.num_threads(w);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("worker pool: {e}");
            return exit_codes::EXECUTION;
        }
    };
    let outcomes: Vec<anyhow::Result<(PathBuf, RunReport)>> = pool.install(|| {
        use rayon::prelude::*;
        cfg.run
            .par_iter()
            .map(|r| execute_run(r).map(|rep| (r.output.clone(), rep)))
            .collect()
    });
    let mut code = exit_codes::OK;
    for (run_cfg, outcome) in cfg.run.iter().zip(outcomes) {
        match outcome {
            Err(e) => {
                eprintln!("run {}: execution error: {e}", run_cfg.name);
                code = code.max(exit_codes::EXECUTION);
            }
            Ok((path, report)) => {
                let failures: Vec<&PredictionRow> =
                    report.prediction_matrix.iter().filter(|r| !r.pass).collect();
                for f in &failures {
                    eprintln!(
                        "run {}: prediction mismatch: {} {} predicted {} computed {}",
                        run_cfg.name, f.system, f.property, f.predicted, f.computed
                    );
                }
                let had_failures = !failures.is_empty();
                if let Err(e) = write_report(&path, &report) {
                    eprintln!("run {}: write error: {e}", run_cfg.name);
                    code = code.max(exit_codes::EXECUTION);
                } else {
                    println!(
                        "run {}: {} results, {} prediction rows, wrote {}",
                        run_cfg.name,
                        report.results.len(),
                        report.prediction_matrix.len(),
                        path.display()
                    );
                }
                if had_failures {
                    code = code.max(exit_codes::PREDICTION);
                }
            }
        }
    }
    code
}

fn env_workers() -> Option<usize> {
    std::env::var("TOPODYN_WORKERS").ok().and_then(|v| v.parse().ok())
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_report(path: &Path, report: &RunReport) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let json = serde_json::to_string_pretty(report)?;
    let tmp = path.with_extension("json.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(json.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;

    // NDJSON TimeSet dump next to the report
    let nd_path = path.with_extension("ndjson");
    let mut lines = Vec::new();
    for r in &report.results {
        let record = match r {
            OpResult::TimeSetDump { timeset, .. } => {
                Some(TimeSetRecord::from_timeset(timeset, vec![]))
            }
            OpResult::ReturnTimes { timeset, .. } => {
                Some(TimeSetRecord::from_timeset(timeset, vec![]))
            }
            OpResult::SyndeticEqTest { stability_set: Some(s), result: Some(res), .. } => {
                Some(TimeSetRecord::from_timeset(s, vec![res.certificate.clone()]))
            }
            _ => None,
        };
        if let Some(rec) = record {
            lines.push(serde_json::to_string(&rec)?);
        }
    }
    if !lines.is_empty() {
        let tmp = nd_path.with_extension("ndjson.tmp");
        fs::write(&tmp, lines.join("\n") + "\n")?;
        fs::rename(&tmp, nd_path)?;
    }
    Ok(())
}

/// Re-validate an existing report file.
pub fn validate(report_path: &Path) -> i32 {
    let raw = match fs::read_to_string(report_path) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("cannot read report: {e}");
            return exit_codes::SCHEMA;
        }
    };
    let report: RunReport = match serde_json::from_str(&raw) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("malformed report: {e}");
            return exit_codes::SCHEMA;
        }
    };
    match validate_report(&report) {
        Ok(summary) if summary.ok() => {
            println!("report ok: {} checks passed", summary.checks);
            exit_codes::OK
        }
        Ok(summary) => {
            for f in &summary.failures {
                eprintln!("validation failure: {f}");
            }
            exit_codes::EXECUTION
        }
        Err(e) => {
            eprintln!("validation error: {e}");
            exit_codes::SCHEMA
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotSeries {
    Timeset,
    Gaps,
    DiamProfile,
}

impl std::str::FromStr for PlotSeries {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "timeset" => Ok(PlotSeries::Timeset),
            "gaps" => Ok(PlotSeries::Gaps),
            "diam-profile" => Ok(PlotSeries::DiamProfile),
            other => Err(format!("unknown series {other:?} (timeset|gaps|diam-profile)")),
        }
    }
}

/// CSV emission for a stored series.
pub fn plotdata(report_path: &Path, what: PlotSeries, index: usize, out: &mut dyn Write) -> i32 {
    let raw = match fs::read_to_string(report_path) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("cannot read report: {e}");
            return exit_codes::SCHEMA;
        }
    };
    let report: RunReport = match serde_json::from_str(&raw) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("malformed report: {e}");
            return exit_codes::SCHEMA;
        }
    };
    let timesets: Vec<&TimeSet> = report
        .results
        .iter()
        .filter_map(|r| match r {
            OpResult::TimeSetDump { timeset, .. } => Some(timeset),
            OpResult::ReturnTimes { timeset, .. } => Some(timeset),
            _ => None,
        })
        .collect();
    match what {
        PlotSeries::Timeset => {
            let Some(ts) = timesets.get(index) else {
                eprintln!("missing series: no timeset at index {index}");
                return exit_codes::EXECUTION;
            };
            writeln!(out, "n,member").unwrap();
            for n in 1..=ts.horizon() {
                writeln!(out, "{n},{}", u8::from(ts.contains(n))).unwrap();
            }
            exit_codes::OK
        }
        PlotSeries::Gaps => {
            let Some(ts) = timesets.get(index) else {
                eprintln!("missing series: no timeset at index {index}");
                return exit_codes::EXECUTION;
            };
            writeln!(out, "k,gap").unwrap();
            let members: Vec<u64> = ts.members().collect();
            for (k, w) in members.windows(2).enumerate() {
                writeln!(out, "{k},{}", w[1] - w[0]).unwrap();
            }
            exit_codes::OK
        }
        PlotSeries::DiamProfile => {
            let profiles: Vec<&Vec<f64>> = report
                .results
                .iter()
                .filter_map(|r| match r {
                    OpResult::DiamProfile { values, .. } => Some(values),
                    _ => None,
                })
                .collect();
            let Some(vals) = profiles.get(index) else {
                eprintln!("missing series: no diameter profile at index {index}");
                return exit_codes::EXECUTION;
            };
            writeln!(out, "n,diam").unwrap();
            for (i, v) in vals.iter().enumerate() {
                writeln!(out, "{},{v}", i + 1).unwrap();
            }
            exit_codes::OK
        }
    }
}

/// Human-readable catalog listing with predictions and rationales.
pub fn print_catalog(out: &mut dyn Write) {
    for entry in catalog() {
        let p = &entry.predictions;
        writeln!(out, "{}", entry.name).unwrap();
        writeln!(
            out,
            "  minimal: {:?}  invertible: {}  equicontinuous: {:?}",
            p.minimal, p.invertible, p.equicontinuous
        )
        .unwrap();
        writeln!(
            out,
            "  almost automorphic: {:?}  syndetically equicontinuous: {:?}",
            p.almost_automorphic, p.syndetically_equicontinuous
        )
        .unwrap();
        writeln!(out, "  expected sensitivity class: {:?}", p.sensitivity).unwrap();
        writeln!(out, "  rationale: {}", p.rationale).unwrap();
        writeln!(out).unwrap();
    }
}
