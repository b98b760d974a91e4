//! The catalog of concrete systems and system combinators.

pub mod dynamics;
pub mod sets;
pub mod sturmian;
pub mod toeplitz;

use serde::{Deserialize, Serialize};

use crate::angle::{AlphaSpec, Angle};
use crate::error::{Error, Result};
use crate::point::{NatPoint, Periods, PointRef, Sides, SymbolRule};
use crate::relations::{FactorKind, FactorMap};
use crate::space::{ClosedSet, System, SystemFlags};

/// Concrete dynamics of a catalog system.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemKind {
    /// Circle rotation by a fixed irrational (stored correctly rounded).
    Rotation { alpha: Angle },
    /// Full shift on {0,1}.
    Shift { sides: Sides },
    /// Sturmian subshift: orbit closure of the mechanical word.
    Sturmian { alpha: Angle, rho: Angle, sides: Sides },
    /// Regular Toeplitz subshift (two-sided).
    Toeplitz { periods: Periods },
    /// Adding machine on ⨅ ℤ/p_kℤ.
    Odometer { periods: Periods },
    /// Identity on the one-point compactification of ℕ.
    NatCompact,
    Product { left: Box<System>, right: Box<System> },
    /// Collapse of a closed invariant set to a single point, with metric
    /// d̄(a,b) = min(d(a,b), d(a,C) + d(C,b)).
    Quotient { base: Box<System>, collapsed: ClosedSet },
    /// Depth-K inverse-limit tower with the summed metric Σ ϱ(x_n,y_n)/(2ⁿM).
    NaturalExtension { base: Box<System>, depth: usize },
}

impl SystemKind {
    pub fn diam(&self) -> f64 {
        match self {
            SystemKind::Rotation { .. } | SystemKind::Odometer { .. } => 0.5,
            SystemKind::Shift { .. }
            | SystemKind::Sturmian { .. }
            | SystemKind::Toeplitz { .. }
            | SystemKind::NatCompact => 1.0,
            SystemKind::Product { left, right } => left.diam().max(right.diam()),
            SystemKind::Quotient { base, .. } => base.diam(),
            SystemKind::NaturalExtension { base, depth } => {
                let d = base.diam();
                let m = d + 1.0;
                d / m * (1.0 - 2f64.powi(-(*depth as i32)))
            }
        }
    }

    pub fn point_shape_ok(&self, x: &PointRef) -> bool {
        match (self, x) {
            (SystemKind::Rotation { .. }, PointRef::Circle { .. }) => true,
            (
                SystemKind::Shift { .. } | SystemKind::Sturmian { .. } | SystemKind::Toeplitz { .. },
                PointRef::Word { .. },
            ) => true,
            (SystemKind::Odometer { .. }, PointRef::Odometer { .. }) => true,
            (SystemKind::NatCompact, PointRef::Nat { .. }) => true,
            (SystemKind::Product { left, right }, PointRef::Pair { left: a, right: b }) => {
                left.kind.point_shape_ok(a) && right.kind.point_shape_ok(b)
            }
            (SystemKind::Quotient { base, .. }, PointRef::Class { rep }) => {
                base.kind.point_shape_ok(rep)
            }
            (SystemKind::NaturalExtension { base, depth }, PointRef::Tower { levels }) => {
                levels.len() == *depth && levels.iter().all(|l| base.kind.point_shape_ok(l))
            }
            _ => false,
        }
    }
}

fn flags_for(kind: &SystemKind) -> SystemFlags {
    match kind {
        SystemKind::Rotation { .. } => SystemFlags {
            invertible: true,
            minimal_expected: true,
            exact_mode: true,
        },
        SystemKind::Shift { sides } => SystemFlags {
            invertible: *sides == Sides::Two,
            minimal_expected: false,
            exact_mode: true,
        },
        SystemKind::Sturmian { sides, .. } => SystemFlags {
            invertible: *sides == Sides::Two,
            minimal_expected: true,
            exact_mode: true,
        },
        SystemKind::Toeplitz { .. } | SystemKind::Odometer { .. } => SystemFlags {
            invertible: true,
            minimal_expected: true,
            exact_mode: true,
        },
        SystemKind::NatCompact => SystemFlags {
            invertible: true,
            minimal_expected: false,
            exact_mode: true,
        },
        SystemKind::Product { left, right } => SystemFlags {
            invertible: left.flags.invertible && right.flags.invertible,
            minimal_expected: false,
            exact_mode: left.flags.exact_mode && right.flags.exact_mode,
        },
        SystemKind::Quotient { base, .. } => SystemFlags {
            invertible: base.flags.invertible,
            minimal_expected: false,
            exact_mode: base.flags.exact_mode,
        },
        SystemKind::NaturalExtension { base, .. } => SystemFlags {
            invertible: true,
            minimal_expected: base.flags.minimal_expected,
            exact_mode: false,
        },
    }
}

fn system(id: String, kind: SystemKind) -> System {
    let flags = flags_for(&kind);
    System { id, kind, flags }
}

/// Minimal equicontinuous exemplar: isometric circle rotation.
pub fn make_rotation(alpha: &AlphaSpec) -> Result<System> {
    let a = alpha.to_angle()?;
    Ok(system(format!("rotation-{}", alpha.label()), SystemKind::Rotation { alpha: a }))
}

pub fn make_full_shift(sides: Sides) -> System {
    let id = match sides {
        Sides::One => "shift1",
        Sides::Two => "shift2",
    };
    system(id.into(), SystemKind::Shift { sides })
}

/// Sturmian subshift plus its coding factor map onto the rotation.
pub fn make_sturmian(alpha: &AlphaSpec, intercept: f64, sides: Sides) -> Result<(System, FactorMap)> {
    let a = alpha.to_angle()?;
    let rho = Angle::from_f64(intercept);
    let tag = match sides {
        Sides::One => "1",
        Sides::Two => "2",
    };
    let sys = system(
        format!("sturmian{tag}-{}", alpha.label()),
        SystemKind::Sturmian { alpha: a, rho, sides },
    );
    let rot = make_rotation(alpha)?;
    let map = FactorMap::new(sys.clone(), rot, FactorKind::SturmianToRotation);
    Ok((sys, map))
}

/// Regular Toeplitz subshift over its odometer factor, with the canonical
/// phase map.
pub fn make_toeplitz_odometer_pair(periods: Vec<u64>) -> Result<(System, System, FactorMap)> {
    let p = Periods::new(periods)?;
    let top = system(
        format!("toeplitz-{:?}", p.explicit),
        SystemKind::Toeplitz { periods: p.clone() },
    );
    let odo = system(format!("odometer-{:?}", p.explicit), SystemKind::Odometer { periods: p });
    let map = FactorMap::new(top.clone(), odo.clone(), FactorKind::ToeplitzToOdometer);
    Ok((top, odo, map))
}

pub fn make_nat_compact() -> System {
    system("nat-compact".into(), SystemKind::NatCompact)
}

pub fn make_product(a: System, b: System) -> System {
    let id = format!("prod({},{})", a.id, b.id);
    system(id, SystemKind::Product { left: Box::new(a), right: Box::new(b) })
}

/// Quotient of (two-sided shift) × (ℕ ∪ {∞}, id) collapsing
/// (Y₁×{∞}) ∪ ({0^∞}×Y₂) to a fixed point e. Slices Y₁×{p} are open and
/// invariant with exact diameter min(1, 2/p).
pub fn make_referee_example() -> System {
    let base = make_product(make_full_shift(Sides::Two), make_nat_compact());
    system(
        "referee".into(),
        SystemKind::Quotient { base: Box::new(base), collapsed: ClosedSet::CrossAtInfinity },
    )
}

/// The collapsed fixed point e of the referee example.
pub fn referee_fixed_point() -> PointRef {
    PointRef::class(PointRef::pair(
        PointRef::word(SymbolRule::Periodic { word: vec![0] }),
        PointRef::Nat { value: NatPoint::Infinity },
    ))
}

pub fn make_collapse_quotient(base: System, collapsed: ClosedSet) -> Result<System> {
    match &collapsed {
        ClosedSet::SinglePoint { point } => {
            let image = base.step(point)?;
            let d = base.distance(&image, point, 48)?;
            if d != 0.0 {
                return Err(Error::Precondition(
                    "collapsed set must be invariant: the point is not fixed".into(),
                ));
            }
        }
        ClosedSet::CrossAtInfinity => {
            let ok = matches!(
                &base.kind,
                SystemKind::Product { left, right }
                    if matches!(left.kind, SystemKind::Shift { sides: Sides::Two })
                        && matches!(right.kind, SystemKind::NatCompact)
            );
            if !ok {
                return Err(Error::Precondition(
                    "cross-at-infinity collapse requires shift2 × nat-compact".into(),
                ));
            }
        }
    }
    let id = format!("quot({})", base.id);
    Ok(system(id, SystemKind::Quotient { base: Box::new(base), collapsed }))
}

/// Depth-K natural extension; preimages beyond stored levels come from the
/// base system's deterministic preimage rule.
pub fn make_natural_extension(base: System, depth: usize) -> Result<System> {
    if depth == 0 {
        return Err(Error::Precondition("natural extension depth must be ≥ 1".into()));
    }
    // probe that a preimage rule exists
    let sample = base.sample_points(1, 0);
    let x = sample.first().ok_or_else(|| {
        Error::Unsupported(base.id.clone(), "no sample points to probe preimages".into())
    })?;
    dynamics::preimage(&base, x)?;
    let id = format!("natext{}({})", depth, base.id);
    Ok(system(id, SystemKind::NaturalExtension { base: Box::new(base), depth }))
}

/// Lift a base-system point to its depth-K tower via the preimage rule.
pub fn lift_to_tower(natext: &System, x1: &PointRef) -> Result<PointRef> {
    let SystemKind::NaturalExtension { base, depth } = &natext.kind else {
        return Err(Error::Unsupported(natext.id.clone(), "not a natural extension".into()));
    };
    let mut levels = vec![x1.clone()];
    for _ in 1..*depth {
        let prev = levels.last().unwrap();
        levels.push(dynamics::preimage(base, prev)?);
    }
    Ok(PointRef::Tower { levels })
}

/// Declarative constructor grammar (the config-file surface).
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Rotation { alpha: AlphaSpec },
    FullShift { sides: Sides },
    Sturmian { alpha: AlphaSpec, intercept: f64, sides: Sides },
    Toeplitz { periods: Vec<u64> },
    Odometer { periods: Vec<u64> },
    NatCompact,
    RefereeExample,
    Product { left: Box<SystemSpec>, right: Box<SystemSpec> },
    NaturalExtension { base: Box<SystemSpec>, depth: usize },
    CollapseFixedPoint { base: Box<SystemSpec>, point: PointRef },
}

impl SystemSpec {
    pub fn build(&self) -> Result<System> {
        match self {
            SystemSpec::Rotation { alpha } => make_rotation(alpha),
            SystemSpec::FullShift { sides } => Ok(make_full_shift(*sides)),
            SystemSpec::Sturmian { alpha, intercept, sides } => {
                make_sturmian(alpha, *intercept, *sides).map(|(s, _)| s)
            }
            SystemSpec::Toeplitz { periods } => {
                make_toeplitz_odometer_pair(periods.clone()).map(|(t, _, _)| t)
            }
            SystemSpec::Odometer { periods } => {
                make_toeplitz_odometer_pair(periods.clone()).map(|(_, o, _)| o)
            }
            SystemSpec::NatCompact => Ok(make_nat_compact()),
            SystemSpec::RefereeExample => Ok(make_referee_example()),
            SystemSpec::Product { left, right } => {
                Ok(make_product(left.build()?, right.build()?))
            }
            SystemSpec::NaturalExtension { base, depth } => {
                make_natural_extension(base.build()?, *depth)
            }
            SystemSpec::CollapseFixedPoint { base, point } => {
                make_collapse_quotient(base.build()?, ClosedSet::SinglePoint { point: point.clone() })
            }
        }
    }
}

/// Expected sensitivity class of a catalog system.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensClass {
    NotSensitive,
    SensitiveNotThick,
    MultiSensitive,
}

/// Predicted properties checked by the run harness against computed verdicts.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Predictions {
    pub minimal: Option<bool>,
    pub invertible: bool,
    pub equicontinuous: Option<bool>,
    pub almost_automorphic: Option<bool>,
    pub syndetically_equicontinuous: Option<bool>,
    pub sensitivity: SensClass,
    /// Self-contained mathematical justification for the prediction.
    pub rationale: String,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub spec: SystemSpec,
    pub predictions: Predictions,
}

/// The built-in catalog with predicted properties.
pub fn catalog() -> Vec<CatalogEntry> {
    let golden = AlphaSpec::Golden;
    vec![
        CatalogEntry {
            name: "rotation-golden".into(),
            spec: SystemSpec::Rotation { alpha: golden.clone() },
            predictions: Predictions {
                minimal: Some(true),
                invertible: true,
                equicontinuous: Some(true),
                almost_automorphic: Some(true),
                syndetically_equicontinuous: Some(true),
                sensitivity: SensClass::NotSensitive,
                rationale: "an irrational rotation is a minimal isometry; iterates move sets rigidly, so no ball ever spreads".into(),
            },
        },
        CatalogEntry {
            name: "shift1".into(),
            spec: SystemSpec::FullShift { sides: Sides::One },
            predictions: Predictions {
                minimal: Some(false),
                invertible: false,
                equicontinuous: Some(false),
                almost_automorphic: None,
                syndetically_equicontinuous: Some(false),
                sensitivity: SensClass::MultiSensitive,
                rationale: "every cylinder spreads to the whole space after its own length, simultaneously for any finite family".into(),
            },
        },
        CatalogEntry {
            name: "shift2".into(),
            spec: SystemSpec::FullShift { sides: Sides::Two },
            predictions: Predictions {
                minimal: Some(false),
                invertible: true,
                equicontinuous: Some(false),
                almost_automorphic: Some(false),
                syndetically_equicontinuous: Some(false),
                sensitivity: SensClass::MultiSensitive,
                rationale: "same spreading as the one-sided shift; invertibility adds nothing to the collision of cylinders".into(),
            },
        },
        CatalogEntry {
            name: "sturmian-golden".into(),
            spec: SystemSpec::Sturmian { alpha: golden.clone(), intercept: 0.0, sides: Sides::Two },
            predictions: Predictions {
                minimal: Some(true),
                invertible: true,
                equicontinuous: Some(false),
                almost_automorphic: Some(true),
                syndetically_equicontinuous: Some(true),
                sensitivity: SensClass::SensitiveNotThick,
                rationale: "an almost one-to-one symbolic extension of a rotation: sensitive (double codings split) but spread times avoid a syndetic set of return times".into(),
            },
        },
        CatalogEntry {
            name: "toeplitz-2-4-8".into(),
            spec: SystemSpec::Toeplitz { periods: vec![2, 4, 8] },
            predictions: Predictions {
                minimal: Some(true),
                invertible: true,
                equicontinuous: Some(false),
                almost_automorphic: Some(true),
                syndetically_equicontinuous: Some(true),
                sensitivity: SensClass::SensitiveNotThick,
                rationale: "a regular Toeplitz flow is an almost one-to-one extension of its odometer; periodic skeleton positions pin windows on a syndetic set of times".into(),
            },
        },
        CatalogEntry {
            name: "odometer-2-4-8".into(),
            spec: SystemSpec::Odometer { periods: vec![2, 4, 8] },
            predictions: Predictions {
                minimal: Some(true),
                invertible: true,
                equicontinuous: Some(true),
                almost_automorphic: Some(true),
                syndetically_equicontinuous: Some(true),
                sensitivity: SensClass::NotSensitive,
                rationale: "the adding machine is an isometry for the 2^-k tower metric".into(),
            },
        },
        CatalogEntry {
            name: "referee".into(),
            spec: SystemSpec::RefereeExample,
            predictions: Predictions {
                minimal: Some(false),
                invertible: true,
                equicontinuous: Some(false),
                almost_automorphic: None,
                syndetically_equicontinuous: Some(false),
                sensitivity: SensClass::NotSensitive,
                rationale: "slices Y₁×{p} are invariant with diameter 2/p → no single δ works for all open sets; yet every point sees nearby slices spread past δ_x eventually, emptying the syndetic-stability set".into(),
            },
        },
        CatalogEntry {
            name: "shift2-squared".into(),
            spec: SystemSpec::Product {
                left: Box::new(SystemSpec::FullShift { sides: Sides::Two }),
                right: Box::new(SystemSpec::FullShift { sides: Sides::Two }),
            },
            predictions: Predictions {
                minimal: Some(false),
                invertible: true,
                equicontinuous: Some(false),
                almost_automorphic: None,
                syndetically_equicontinuous: Some(false),
                sensitivity: SensClass::MultiSensitive,
                rationale: "a product of multi-sensitive shifts spreads in the max metric whenever either factor does".into(),
            },
        },
    ]
}
