//! System, open-set, and membership abstractions consumed by every engine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::PointRef;
use crate::systems::SystemKind;

/// Three-valued membership: inside/outside are certified at the set's
/// resolution; uncertain is reported only when the point sits within metric
/// resolution of the boundary and is never silently coerced.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    Uncertain,
}

impl Membership {
    /// Conservative collapse for certifying presence (uncertain → outside).
    pub fn certified_inside(self) -> bool {
        self == Membership::Inside
    }
    /// Conservative collapse for certifying absence (uncertain → inside).
    pub fn possibly_inside(self) -> bool {
        self != Membership::Outside
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SystemFlags {
    pub invertible: bool,
    pub minimal_expected: bool,
    /// Exact-mode systems support exact set diameters / exact sweeps.
    pub exact_mode: bool,
}

/// A basis open set of some catalog system.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct OpenSetDescriptor {
    pub system_id: String,
    pub kind: SetKind,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetKind {
    /// Open metric ball. On symbolic systems this coincides with a cylinder.
    Ball { center: PointRef, radius: f64 },
    /// Symbolic cylinder: word at offset. The empty word is the whole space.
    Cylinder {
        word: Vec<u8>,
        offset: i64,
    },
    /// Product of component sets (component systems in order).
    Product { parts: Vec<OpenSetDescriptor> },
    /// Classes of the non-collapsed points of the inner set: π(W ∖ C).
    /// Open for any open W because C is closed.
    QuotientImage { inner: Box<OpenSetDescriptor> },
}

impl OpenSetDescriptor {
    pub fn ball(system_id: &str, center: PointRef, radius: f64) -> Self {
        OpenSetDescriptor {
            system_id: system_id.into(),
            kind: SetKind::Ball { center, radius },
        }
    }

    pub fn cylinder(system_id: &str, word: Vec<u8>, offset: i64) -> Self {
        OpenSetDescriptor { system_id: system_id.into(), kind: SetKind::Cylinder { word, offset } }
    }

    pub fn whole(system_id: &str) -> Self {
        Self::cylinder(system_id, vec![], 0)
    }
}

/// A closed invariant set to be collapsed by a quotient combinator.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedSet {
    /// A single fixed point of the base system.
    SinglePoint { point: PointRef },
    /// (Y₁ × {∞}) ∪ ({0^∞} × Y₂) inside shift × compactification.
    CrossAtInfinity,
}

/// A concretely representable compact system from the catalog.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct System {
    pub id: String,
    pub kind: SystemKind,
    pub flags: SystemFlags,
}

impl System {
    /// Diameter of the space (exact small rational, exactly representable).
    pub fn diam(&self) -> f64 {
        self.kind.diam()
    }

    pub fn step(&self, x: &PointRef) -> Result<PointRef> {
        self.check_point(x)?;
        self.kind.step(x)
    }

    pub fn step_inverse(&self, x: &PointRef) -> Result<PointRef> {
        if !self.flags.invertible {
            return Err(Error::NotInvertible(self.id.clone()));
        }
        self.check_point(x)?;
        self.kind.step_inverse(x)
    }

    /// Tⁿx; n < 0 requires invertibility.
    pub fn iterate(&self, x: &PointRef, n: i64) -> Result<PointRef> {
        self.check_point(x)?;
        if n < 0 && !self.flags.invertible {
            return Err(Error::NotInvertible(self.id.clone()));
        }
        self.kind.iterate(x, n)
    }

    /// Distance with |result − ϱ(x,y)| ≤ 2^-precision (capped by f64 at 53
    /// for non-dyadic values; every exact-mode comparison is done upstream
    /// in integer arithmetic).
    pub fn distance(&self, x: &PointRef, y: &PointRef, precision: u32) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.kind.distance(x, y, precision))
    }

    pub fn membership(&self, set: &OpenSetDescriptor, x: &PointRef) -> Result<Membership> {
        if set.system_id != self.id {
            return Err(Error::DomainMismatch(set.system_id.clone(), self.id.clone()));
        }
        self.check_point(x)?;
        self.kind.membership(&set.kind, x)
    }

    /// Finite cover by basis sets of diameter ≤ 2^(−resolution+1), in a
    /// deterministic order.
    pub fn basis(&self, resolution: u32) -> Result<Vec<OpenSetDescriptor>> {
        if resolution == 0 {
            return Err(Error::Precondition("resolution must be ≥ 1".into()));
        }
        self.kind.basis(&self.id, resolution)
    }

    /// Exact diameter of TⁿU when this system supports it for U's shape.
    pub fn diam_exact(&self, set: &OpenSetDescriptor, n: u64) -> Option<f64> {
        if set.system_id != self.id {
            return None;
        }
        self.kind.diam_exact(&set.kind, n)
    }

    /// Deterministic representative points, seeded for variety.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<PointRef> {
        self.kind.sample_points(count, seed)
    }

    /// Deterministic net of points certified inside the set; used by the
    /// witnessed (non-exact) sensitivity mode and by relation probes.
    pub fn sample_in_set(&self, set: &OpenSetDescriptor, count: usize, seed: u64) -> Vec<PointRef> {
        let candidates = self.kind.sample_in_set(&set.kind, count, seed);
        candidates
            .into_iter()
            .filter(|p| {
                self.kind
                    .membership(&set.kind, p)
                    .map(|m| m.certified_inside())
                    .unwrap_or(false)
            })
            .take(count)
            .collect()
    }

    /// Check the word/cylinder is realizable in this system's language.
    pub fn validate_set(&self, set: &OpenSetDescriptor) -> Result<()> {
        if set.system_id != self.id {
            return Err(Error::DomainMismatch(set.system_id.clone(), self.id.clone()));
        }
        self.kind.validate_set(&self.id, &set.kind)
    }

    fn check_point(&self, x: &PointRef) -> Result<()> {
        if self.kind.point_shape_ok(x) {
            Ok(())
        } else {
            Err(Error::DomainMismatch(format!("{x:?}"), self.id.clone()))
        }
    }
}
