//! Open-set semantics: membership, basis covers, exact set diameters, and
//! deterministic sampling, per system kind.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angle::{frac_to_u128, Angle};
use crate::error::{Error, Result};
use crate::point::{NatPoint, OdoPhase, PointRef, Sides, SymbolRule, WordPoint};
use crate::space::{ClosedSet, Membership, OpenSetDescriptor, SetKind, System};
use crate::systems::{dynamics, sturmian, toeplitz, SystemKind};

/// Smallest depth D with 2^-D < radius; the agreement window certifying
/// ball membership on 2^-k metrics.
fn ball_depth(radius: f64) -> u32 {
    assert!(radius > 0.0, "ball radius must be positive");
    let mut d = 0u32;
    let mut pow = 1.0f64;
    while pow >= radius {
        d += 1;
        pow /= 2.0;
        assert!(d < 1100, "radius underflows f64");
    }
    d
}

impl SystemKind {
    pub fn membership(&self, set: &SetKind, x: &PointRef) -> Result<Membership> {
        // the empty cylinder is the whole space of any system
        if let SetKind::Cylinder { word, .. } = set {
            if word.is_empty() {
                return Ok(Membership::Inside);
            }
        }
        match (self, set) {
            (SystemKind::Rotation { .. }, SetKind::Ball { center, radius }) => {
                let PointRef::Circle { angle: c } = center else {
                    return Err(Error::Precondition("rotation ball center must be an angle".into()));
                };
                let PointRef::Circle { angle } = x else { unreachable!() };
                let d = angle.circle_dist_u128(*c);
                Ok(if d < frac_to_u128(*radius) { Membership::Inside } else { Membership::Outside })
            }
            (
                SystemKind::Shift { .. } | SystemKind::Sturmian { .. } | SystemKind::Toeplitz { .. },
                SetKind::Cylinder { word, offset },
            ) => {
                let PointRef::Word { point } = x else { unreachable!() };
                let ok = word
                    .iter()
                    .enumerate()
                    .all(|(j, &s)| point.symbol_at(offset + j as i64) == s);
                Ok(if ok { Membership::Inside } else { Membership::Outside })
            }
            (
                SystemKind::Shift { sides } | SystemKind::Sturmian { sides, .. },
                SetKind::Ball { center, radius },
            ) => {
                let (word, offset) = word_ball_window(center, *sides, *radius)?;
                self.membership(&SetKind::Cylinder { word, offset }, x)
            }
            (SystemKind::Toeplitz { .. }, SetKind::Ball { center, radius }) => {
                let (word, offset) = word_ball_window(center, Sides::Two, *radius)?;
                self.membership(&SetKind::Cylinder { word, offset }, x)
            }
            (SystemKind::Odometer { periods }, SetKind::Ball { center, radius }) => {
                let PointRef::Odometer { phase: c } = center else {
                    return Err(Error::Precondition("odometer ball center must be a phase".into()));
                };
                let PointRef::Odometer { phase } = x else { unreachable!() };
                let depth = ball_depth(*radius);
                for k in 1..=depth as usize {
                    let (a, b) = (phase.residue(periods, k), c.residue(periods, k));
                    if a != b {
                        let d = 2f64.powi(-(k as i32));
                        return Ok(if d < *radius { Membership::Inside } else { Membership::Outside });
                    }
                }
                Ok(Membership::Inside)
            }
            (SystemKind::NatCompact, SetKind::Ball { center, radius }) => {
                let PointRef::Nat { value: c } = center else {
                    return Err(Error::Precondition("nat ball center must be a nat point".into()));
                };
                let PointRef::Nat { value } = x else { unreachable!() };
                let d = (value.recip() - c.recip()).abs();
                Ok(if d < *radius { Membership::Inside } else { Membership::Outside })
            }
            (SystemKind::Product { left, right }, SetKind::Product { parts }) => {
                if parts.len() != 2 {
                    return Err(Error::Precondition("product set needs two parts".into()));
                }
                let PointRef::Pair { left: a, right: b } = x else { unreachable!() };
                let ma = left.membership(&parts[0], a)?;
                let mb = right.membership(&parts[1], b)?;
                Ok(combine_all([ma, mb]))
            }
            (SystemKind::Product { left, right }, SetKind::Ball { center, radius }) => {
                // max metric: the ball is the product of component balls
                let PointRef::Pair { left: ca, right: cb } = center else {
                    return Err(Error::Precondition("product ball center must be a pair".into()));
                };
                let PointRef::Pair { left: a, right: b } = x else { unreachable!() };
                let ma = left.kind.membership(
                    &SetKind::Ball { center: (**ca).clone(), radius: *radius },
                    a,
                )?;
                let mb = right.kind.membership(
                    &SetKind::Ball { center: (**cb).clone(), radius: *radius },
                    b,
                )?;
                Ok(combine_all([ma, mb]))
            }
            (SystemKind::Quotient { base, collapsed }, SetKind::QuotientImage { inner }) => {
                let PointRef::Class { rep } = x else { unreachable!() };
                match dynamics::in_collapsed(base, collapsed, rep, 96) {
                    Some(true) => Ok(Membership::Outside),
                    None => Ok(Membership::Uncertain),
                    Some(false) => base.membership(inner, rep),
                }
            }
            (SystemKind::Quotient { base, collapsed }, SetKind::Ball { center, radius }) => {
                let PointRef::Class { rep: crep } = center else {
                    return Err(Error::Precondition("quotient ball center must be a class".into()));
                };
                let PointRef::Class { rep } = x else { unreachable!() };
                let prec = ball_depth(*radius) + 16;
                let direct = base.kind.distance(crep, rep, prec);
                let through = dynamics::dist_to_collapsed(base, collapsed, crep, prec)
                    + dynamics::dist_to_collapsed(base, collapsed, rep, prec);
                let d = direct.min(through);
                // pieces carry ≤ 2^-prec scan slack each
                let slack = 2f64.powi(-(prec as i32 - 2));
                if (d - radius).abs() < slack {
                    return Ok(Membership::Uncertain);
                }
                Ok(if d < *radius { Membership::Inside } else { Membership::Outside })
            }
            (SystemKind::NaturalExtension { base, depth }, SetKind::Product { parts }) => {
                if parts.len() > *depth {
                    return Err(Error::Precondition("more parts than tower levels".into()));
                }
                let PointRef::Tower { levels } = x else { unreachable!() };
                let mut ms = Vec::with_capacity(parts.len());
                for (lvl, part) in levels.iter().zip(parts.iter()) {
                    ms.push(base.membership(part, lvl)?);
                }
                Ok(combine_all(ms))
            }
            (SystemKind::NaturalExtension { base, depth }, SetKind::Ball { center, radius }) => {
                let PointRef::Tower { .. } = x else { unreachable!() };
                let m = base.diam() + 1.0;
                let d = self.distance(center, x, 64);
                // truncation: unseen levels contribute ≤ diam/M · 2^-K
                let slack = 2f64.powi(-(*depth as i32)) * base.diam() / m;
                if (d - radius).abs() <= slack {
                    return Ok(Membership::Uncertain);
                }
                Ok(if d < *radius { Membership::Inside } else { Membership::Outside })
            }
            _ => Err(Error::Precondition(format!(
                "set shape {set:?} unsupported on this system"
            ))),
        }
    }

    pub fn validate_set(&self, id: &str, set: &SetKind) -> Result<()> {
        match set {
            SetKind::Ball { radius, .. } => {
                if *radius <= 0.0 {
                    return Err(Error::Precondition("ball radius must be > 0".into()));
                }
                Ok(())
            }
            SetKind::Cylinder { word, offset } => {
                if word.is_empty() {
                    return Ok(());
                }
                match self {
                    SystemKind::Shift { sides } => {
                        if *sides == Sides::One && *offset < 0 {
                            return Err(Error::Precondition(
                                "one-sided cylinder offset must be ≥ 0".into(),
                            ));
                        }
                        Ok(())
                    }
                    SystemKind::Sturmian { alpha, sides, .. } => {
                        if *sides == Sides::One && *offset < 0 {
                            return Err(Error::Precondition(
                                "one-sided cylinder offset must be ≥ 0".into(),
                            ));
                        }
                        if sturmian::cylinder_arc(*alpha, word, *offset).is_empty() {
                            return Err(Error::InadmissibleWord(format!("{word:?}"), id.into()));
                        }
                        Ok(())
                    }
                    SystemKind::Toeplitz { periods } => {
                        let cover = toeplitz::covering_level(periods, word.len() as u64);
                        if toeplitz::compatible_phases(periods, cover, word, *offset).is_empty() {
                            return Err(Error::InadmissibleWord(format!("{word:?}"), id.into()));
                        }
                        Ok(())
                    }
                    _ => Err(Error::Precondition("cylinders live on symbolic systems".into())),
                }
            }
            SetKind::Product { parts } => {
                match self {
                    SystemKind::Product { left, right } => {
                        if parts.len() != 2 {
                            return Err(Error::Precondition("product set needs two parts".into()));
                        }
                        left.validate_set(&parts[0])?;
                        right.validate_set(&parts[1])
                    }
                    SystemKind::NaturalExtension { base, depth } => {
                        if parts.len() > *depth {
                            return Err(Error::Precondition("more parts than tower levels".into()));
                        }
                        for p in parts {
                            base.validate_set(p)?;
                        }
                        Ok(())
                    }
                    _ => Err(Error::Precondition("product sets live on product systems".into())),
                }
            }
            SetKind::QuotientImage { inner } => match self {
                SystemKind::Quotient { base, .. } => base.validate_set(inner),
                _ => Err(Error::Precondition("quotient images live on quotient systems".into())),
            },
        }
    }

    pub fn basis(&self, id: &str, resolution: u32) -> Result<Vec<OpenSetDescriptor>> {
        const CAP: u64 = 1 << 20;
        let r = resolution;
        let mk = |kind: SetKind| OpenSetDescriptor { system_id: id.into(), kind };
        match self {
            SystemKind::Rotation { .. } => {
                if r > 120 {
                    return Err(Error::ResolutionTooFine(r, 120));
                }
                let n = 1u64 << r.min(63);
                if n > CAP {
                    return Err(Error::ResolutionTooFine(r, 20));
                }
                Ok((0..n)
                    .map(|i| {
                        let center = Angle((i as u128) << (128 - r));
                        mk(SetKind::Ball {
                            center: PointRef::circle(center),
                            radius: 2f64.powi(-(r as i32)),
                        })
                    })
                    .collect())
            }
            SystemKind::Shift { sides } => {
                let (len, offset) = word_basis_shape(*sides, r);
                if 1u64.checked_shl(len).map_or(true, |c| c > CAP) {
                    return Err(Error::ResolutionTooFine(r, 9));
                }
                Ok(all_words(len)
                    .into_iter()
                    .map(|word| mk(SetKind::Cylinder { word, offset }))
                    .collect())
            }
            SystemKind::Sturmian { alpha, sides, .. } => {
                let (len, offset) = word_basis_shape(*sides, r);
                Ok(sturmian::language(*alpha, len, offset)
                    .into_iter()
                    .map(|(word, _)| mk(SetKind::Cylinder { word, offset }))
                    .collect())
            }
            SystemKind::Toeplitz { periods } => {
                let (len, offset) = word_basis_shape(Sides::Two, r);
                Ok(toeplitz::language(periods, len, offset)
                    .into_iter()
                    .map(|word| mk(SetKind::Cylinder { word, offset }))
                    .collect())
            }
            SystemKind::Odometer { periods } => {
                let p = periods.period(r as usize);
                if p > CAP {
                    return Err(Error::ResolutionTooFine(r, 20));
                }
                Ok((0..p)
                    .map(|z| {
                        mk(SetKind::Ball {
                            center: PointRef::Odometer { phase: OdoPhase::Int(z as i64) },
                            radius: 2f64.powi(-(r as i32)),
                        })
                    })
                    .collect())
            }
            SystemKind::NatCompact => {
                if r > 20 {
                    return Err(Error::ResolutionTooFine(r, 20));
                }
                let top = 1u64 << r;
                let mut out: Vec<OpenSetDescriptor> = (1..=top)
                    .map(|m| {
                        mk(SetKind::Ball {
                            center: PointRef::Nat { value: NatPoint::Fin(m) },
                            radius: isolating_radius(m),
                        })
                    })
                    .collect();
                out.push(mk(SetKind::Ball {
                    center: PointRef::Nat { value: NatPoint::Infinity },
                    radius: 2f64.powi(-(r as i32)),
                }));
                Ok(out)
            }
            SystemKind::Product { left, right } => {
                let bl = left.basis(r)?;
                let br = right.basis(r)?;
                if (bl.len() as u64).saturating_mul(br.len() as u64) > CAP {
                    return Err(Error::ResolutionTooFine(r, 9));
                }
                let mut out = Vec::with_capacity(bl.len() * br.len());
                for a in &bl {
                    for b in &br {
                        out.push(mk(SetKind::Product { parts: vec![a.clone(), b.clone()] }));
                    }
                }
                Ok(out)
            }
            SystemKind::Quotient { base, collapsed } => match collapsed {
                ClosedSet::SinglePoint { point } => {
                    let mut out = vec![mk(SetKind::Ball {
                        center: PointRef::class(point.clone()),
                        radius: 2f64.powi(-(r as i32)),
                    })];
                    for b in base.basis(r)? {
                        out.push(mk(SetKind::QuotientImage { inner: Box::new(b) }));
                    }
                    Ok(out)
                }
                ClosedSet::CrossAtInfinity => referee_basis(id, base, r),
            },
            SystemKind::NaturalExtension { base, depth } => {
                let levels = (*depth).min(r as usize);
                let bb = base.basis(r)?;
                let total = (bb.len() as u64).checked_pow(levels as u32).unwrap_or(u64::MAX);
                if total > CAP {
                    return Err(Error::ResolutionTooFine(r, 4));
                }
                let mut out: Vec<Vec<OpenSetDescriptor>> = vec![vec![]];
                for _ in 0..levels {
                    let mut next = Vec::new();
                    for partial in &out {
                        for b in &bb {
                            let mut p = partial.clone();
                            p.push(b.clone());
                            next.push(p);
                        }
                    }
                    out = next;
                }
                Ok(out.into_iter().map(|parts| mk(SetKind::Product { parts })).collect())
            }
        }
    }

    /// Exact diameter of TⁿU where a closed form or exact scan exists.
    pub fn diam_exact(&self, set: &SetKind, n: u64) -> Option<f64> {
        if let SetKind::Cylinder { word, .. } = set {
            if word.is_empty() {
                return Some(self.diam());
            }
        }
        match (self, set) {
            (SystemKind::Rotation { .. }, SetKind::Ball { radius, .. }) => {
                Some((2.0 * radius).min(0.5))
            }
            (SystemKind::Shift { sides }, _) => {
                let (word_len, offset) = self.normalized_window(set, *sides)?;
                Some(shift_window_diam(*sides, offset - n as i64, word_len))
            }
            (SystemKind::Sturmian { alpha, sides, .. }, _) => {
                let (word, offset) = set_as_word(self, set, *sides)?;
                let arc = sturmian::cylinder_arc(*alpha, &word, offset);
                if arc.is_empty() {
                    return None;
                }
                let c = sturmian::spread_exponent(
                    *alpha,
                    arc,
                    n as i64,
                    *sides == Sides::Two,
                    1 << 22,
                )?;
                Some(2f64.powi(-(c as i32)))
            }
            (SystemKind::Toeplitz { periods }, _) => {
                let (word, offset) = set_as_word(self, set, Sides::Two)?;
                let cover = toeplitz::covering_level(periods, word.len() as u64);
                let phases = toeplitz::compatible_phases(periods, cover, &word, offset);
                if phases.is_empty() {
                    return None;
                }
                let c = toeplitz::spread_exponent(periods, cover, &phases, n as i64, 1 << 22)?;
                Some(2f64.powi(-(c as i32)))
            }
            (SystemKind::Odometer { .. }, SetKind::Ball { radius, .. }) => {
                let k = ball_depth(*radius) - 1; // agreement depth
                Some(2f64.powi(-(k as i32 + 1)))
            }
            (SystemKind::NatCompact, SetKind::Ball { center, radius }) => match center {
                PointRef::Nat { value: NatPoint::Fin(_) } => {
                    if *radius <= isolating_radius_bound(center) {
                        Some(0.0)
                    } else {
                        None
                    }
                }
                PointRef::Nat { value: NatPoint::Infinity } => {
                    let q_star = (1.0 / radius).floor() as u64 + 1;
                    Some(1.0 / q_star as f64)
                }
                _ => None,
            },
            (SystemKind::Product { left, right }, SetKind::Product { parts }) => {
                let a = left.kind.diam_exact(&parts[0].kind, n)?;
                let b = right.kind.diam_exact(&parts[1].kind, n)?;
                Some(a.max(b))
            }
            (SystemKind::Quotient { base, collapsed }, set) => match collapsed {
                ClosedSet::SinglePoint { .. } => match set {
                    SetKind::QuotientImage { inner } => base.kind.diam_exact(&inner.kind, n),
                    SetKind::Ball { center: PointRef::Class { rep }, radius } => {
                        base.kind.diam_exact(
                            &SetKind::Ball { center: (**rep).clone(), radius: *radius },
                            n,
                        )
                    }
                    _ => None,
                },
                ClosedSet::CrossAtInfinity => referee_diam_exact(base, set, n),
            },
            _ => None,
        }
    }

    /// Normalize ball/cylinder on a full shift to (word length, offset).
    fn normalized_window(&self, set: &SetKind, sides: Sides) -> Option<(u32, i64)> {
        match set {
            SetKind::Cylinder { word, offset } => Some((word.len() as u32, *offset)),
            SetKind::Ball { center, radius } => {
                let PointRef::Word { .. } = center else { return None };
                let depth = ball_depth(*radius) - 1;
                match sides {
                    Sides::One => Some((depth + 1, 0)),
                    Sides::Two => Some((2 * depth + 1, -(depth as i64))),
                }
            }
            _ => None,
        }
    }

    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<PointRef> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut out = Vec::with_capacity(count);
        match self {
            SystemKind::Rotation { alpha } => {
                let named = [Angle::ZERO, *alpha, Angle::from_f64(0.25)];
                for i in 0..count {
                    let a = if i < named.len() {
                        named[i]
                    } else {
                        Angle(rng.gen::<u128>())
                    };
                    out.push(PointRef::circle(a));
                }
            }
            SystemKind::Shift { .. } => {
                let named = [
                    SymbolRule::Periodic { word: vec![0] },
                    SymbolRule::Periodic { word: vec![1] },
                    SymbolRule::Periodic { word: vec![0, 1] },
                    SymbolRule::Champernowne,
                ];
                for i in 0..count {
                    let rule = if i < named.len() {
                        named[i].clone()
                    } else {
                        let len = 3 + (i % 6);
                        let word: Vec<u8> = (0..len).map(|_| rng.gen_range(0..2u8)).collect();
                        SymbolRule::Periodic { word }
                    };
                    out.push(PointRef::word(rule));
                }
            }
            SystemKind::Sturmian { alpha, rho, .. } => {
                for i in 0..count {
                    let r = if i == 0 {
                        *rho
                    } else if i == 1 {
                        rho.add(*alpha)
                    } else {
                        Angle(rng.gen::<u128>())
                    };
                    out.push(PointRef::word(SymbolRule::Mechanical {
                        alpha: *alpha,
                        rho: r,
                        upper: false,
                    }));
                }
            }
            SystemKind::Toeplitz { periods } => {
                for i in 0..count {
                    let phase = if i < 4 { i as i64 } else { rng.gen_range(0..1 << 20) };
                    out.push(PointRef::Word {
                        point: WordPoint {
                            rule: SymbolRule::Toeplitz { periods: periods.clone(), hole_fill: 0 },
                            offset: phase,
                        },
                    });
                }
            }
            SystemKind::Odometer { .. } => {
                for i in 0..count {
                    let z = if i < 4 { i as i64 } else { rng.gen_range(0..1 << 20) };
                    out.push(PointRef::Odometer { phase: OdoPhase::Int(z) });
                }
            }
            SystemKind::NatCompact => {
                for i in 0..count {
                    let v = match i {
                        0 => NatPoint::Infinity,
                        k if k <= 4 => NatPoint::Fin(k as u64),
                        _ => NatPoint::Fin(rng.gen_range(1..200)),
                    };
                    out.push(PointRef::Nat { value: v });
                }
            }
            SystemKind::Product { left, right } => {
                let a = left.sample_points(count, seed.wrapping_add(1));
                let b = right.sample_points(count, seed.wrapping_add(2));
                for (x, y) in a.into_iter().zip(b) {
                    out.push(PointRef::pair(x, y));
                }
            }
            SystemKind::Quotient { base, collapsed } => {
                let mut cands = base.sample_points(3 * count + 8, seed);
                cands.retain(|p| {
                    dynamics::in_collapsed(base, collapsed, p, 64) == Some(false)
                });
                out.extend(cands.into_iter().take(count).map(PointRef::class));
            }
            SystemKind::NaturalExtension { base, depth } => {
                for x1 in base.sample_points(count, seed) {
                    let mut levels = vec![x1];
                    for _ in 1..*depth {
                        match dynamics::preimage(base, levels.last().unwrap()) {
                            Ok(p) => levels.push(p),
                            Err(_) => break,
                        }
                    }
                    if levels.len() == *depth {
                        out.push(PointRef::Tower { levels });
                    }
                }
            }
        }
        out
    }

    /// Candidate points for a deterministic net inside the set. Callers
    /// filter through `membership`, so candidates may overshoot.
    pub fn sample_in_set(&self, set: &SetKind, count: usize, seed: u64) -> Vec<PointRef> {
        match (self, set) {
            (SystemKind::Rotation { .. }, SetKind::Ball { center, radius }) => {
                let PointRef::Circle { angle: c } = center else { return vec![] };
                let r = frac_to_u128(*radius);
                let mut out = vec![center.clone()];
                for i in 1..count as u128 + 1 {
                    let off = r / (i + 1);
                    out.push(PointRef::circle(Angle(c.0.wrapping_add(off))));
                    out.push(PointRef::circle(Angle(c.0.wrapping_sub(off))));
                }
                out
            }
            (SystemKind::Shift { sides }, _) => {
                let Some((word, offset)) = set_as_word(self, set, *sides) else { return vec![] };
                shift_net(&word, offset, *sides, count, seed)
            }
            (SystemKind::Sturmian { alpha, sides, .. }, _) => {
                let Some((word, offset)) = set_as_word(self, set, *sides) else { return vec![] };
                let arc = sturmian::cylinder_arc(*alpha, &word, offset);
                if arc.is_empty() {
                    return vec![];
                }
                (0..count as u128)
                    .map(|i| {
                        let t = Angle(arc.start.wrapping_add(arc.len / (count as u128 + 1) * (i + 1)));
                        PointRef::word(SymbolRule::Mechanical { alpha: *alpha, rho: t, upper: false })
                    })
                    .collect()
            }
            (SystemKind::Toeplitz { periods }, _) => {
                let Some((word, offset)) = set_as_word(self, set, Sides::Two) else {
                    return vec![];
                };
                let cover = toeplitz::covering_level(periods, word.len() as u64);
                let phases = toeplitz::compatible_phases(periods, cover, &word, offset);
                let p = periods.period(cover) as i64;
                let mut out = Vec::new();
                for (i, &rho) in phases.iter().enumerate().take(count) {
                    for fill in 0..2u8 {
                        out.push(PointRef::Word {
                            point: WordPoint {
                                rule: SymbolRule::Toeplitz { periods: periods.clone(), hole_fill: fill },
                                offset: rho as i64 + p * (i as i64 % 3),
                            },
                        });
                    }
                }
                out
            }
            (SystemKind::Odometer { periods }, SetKind::Ball { center, radius }) => {
                let PointRef::Odometer { phase } = center else { return vec![] };
                let depth = ball_depth(*radius) as usize;
                let p = periods.period(depth.saturating_sub(1).max(1)) as i64;
                (0..count as i64).map(|i| PointRef::Odometer { phase: phase.add(periods, i * p) }).collect()
            }
            (SystemKind::NatCompact, SetKind::Ball { center, radius }) => {
                let mut out = vec![center.clone()];
                if matches!(center, PointRef::Nat { value: NatPoint::Infinity }) {
                    let q = (1.0 / radius).floor() as u64 + 1;
                    for i in 0..count as u64 {
                        out.push(PointRef::Nat { value: NatPoint::Fin(q + i) });
                    }
                }
                out
            }
            (SystemKind::Product { left, right }, SetKind::Product { parts }) => {
                let a = left.kind.sample_in_set(&parts[0].kind, count, seed);
                let b = right.kind.sample_in_set(&parts[1].kind, count, seed.wrapping_add(1));
                // diagonal order so both components vary within any prefix
                let mut out = Vec::new();
                for s in 0..a.len() + b.len() {
                    for i in 0..=s.min(a.len().saturating_sub(1)) {
                        let j = s - i;
                        if j < b.len() {
                            out.push(PointRef::pair(a[i].clone(), b[j].clone()));
                        }
                    }
                    if out.len() > 2 * count + 8 {
                        break;
                    }
                }
                out
            }
            (SystemKind::Product { left, right }, SetKind::Ball { center, radius }) => {
                let PointRef::Pair { left: ca, right: cb } = center else { return vec![] };
                let a = left.kind.sample_in_set(
                    &SetKind::Ball { center: (**ca).clone(), radius: *radius },
                    count,
                    seed,
                );
                let b = right.kind.sample_in_set(
                    &SetKind::Ball { center: (**cb).clone(), radius: *radius },
                    count,
                    seed.wrapping_add(1),
                );
                a.into_iter().zip(b).map(|(x, y)| PointRef::pair(x, y)).collect()
            }
            (SystemKind::Quotient { base, .. }, SetKind::QuotientImage { inner }) => base
                .kind
                .sample_in_set(&inner.kind, count, seed)
                .into_iter()
                .map(PointRef::class)
                .collect(),
            (SystemKind::Quotient { base, collapsed }, SetKind::Ball { center, radius }) => {
                quotient_ball_net(base, collapsed, center, *radius, count)
            }
            (SystemKind::NaturalExtension { base, depth }, SetKind::Product { parts }) => {
                // seed towers from points of the deepest constrained level
                let lvl = parts.len();
                if lvl == 0 {
                    return self.sample_points(count, seed);
                }
                let deep = base.kind.sample_in_set(&parts[lvl - 1].kind, count, seed);
                let mut out = Vec::new();
                for mut x in deep {
                    // climb up to level 1, then complete downward
                    let mut levels = vec![x.clone()];
                    let mut ok = true;
                    for _ in 1..lvl {
                        match base.step(&x) {
                            Ok(up) => {
                                x = up.clone();
                                levels.insert(0, up);
                            }
                            Err(_) => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    while levels.len() < *depth {
                        match dynamics::preimage(base, levels.last().unwrap()) {
                            Ok(p) => levels.push(p),
                            Err(_) => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        out.push(PointRef::Tower { levels });
                    }
                }
                out
            }
            (SystemKind::NaturalExtension { base, depth }, SetKind::Ball { center, .. }) => {
                let PointRef::Tower { levels } = center else { return vec![] };
                let mut out = vec![center.clone()];
                // vary deep levels only: preimage branches at the bottom
                if let Ok(p) = dynamics::preimage(base, levels.last().unwrap()) {
                    let mut l2 = levels.clone();
                    l2.pop();
                    l2.push(p);
                    if l2.len() == *depth {
                        out.push(PointRef::Tower { levels: l2 });
                    }
                }
                out
            }
            _ => vec![],
        }
    }
}

fn combine_all<I: IntoIterator<Item = Membership>>(ms: I) -> Membership {
    let mut acc = Membership::Inside;
    for m in ms {
        match m {
            Membership::Outside => return Membership::Outside,
            Membership::Uncertain => acc = Membership::Uncertain,
            Membership::Inside => {}
        }
    }
    acc
}

fn word_basis_shape(sides: Sides, r: u32) -> (u32, i64) {
    match sides {
        Sides::One => (r, 0),
        Sides::Two => (2 * r + 1, -(r as i64)),
    }
}

fn all_words(len: u32) -> Vec<Vec<u8>> {
    (0..(1u64 << len))
        .map(|bits| (0..len).map(|j| ((bits >> (len - 1 - j)) & 1) as u8).collect())
        .collect()
}

/// Ball on a word system as an agreement window around the center.
fn word_ball_window(center: &PointRef, sides: Sides, radius: f64) -> Result<(Vec<u8>, i64)> {
    let PointRef::Word { point } = center else {
        return Err(Error::Precondition("word ball center must be a word point".into()));
    };
    let k = ball_depth(radius) as i64 - 1;
    match sides {
        Sides::One => Ok(((0..=k).map(|j| point.symbol_at(j)).collect(), 0)),
        Sides::Two => Ok(((-k..=k).map(|j| point.symbol_at(j)).collect(), -k)),
    }
}

/// View any supported set on a word system as (word, offset).
fn set_as_word(kind: &SystemKind, set: &SetKind, sides: Sides) -> Option<(Vec<u8>, i64)> {
    match set {
        SetKind::Cylinder { word, offset } => Some((word.clone(), *offset)),
        SetKind::Ball { center, radius } => word_ball_window(center, sides, *radius).ok(),
        _ => {
            let _ = kind;
            None
        }
    }
}

/// Exact diameter of a (possibly shifted) full-shift window cylinder whose
/// constrained indices are [start, start+len).
fn shift_window_diam(sides: Sides, start: i64, len: u32) -> f64 {
    let end = start + len as i64;
    match sides {
        Sides::One => {
            if start > 0 || end <= 0 {
                1.0
            } else {
                2f64.powi(-(end as i32))
            }
        }
        Sides::Two => {
            if start > 0 || end <= 0 {
                1.0
            } else {
                let c = (1 - start).min(end);
                2f64.powi(-(c as i32))
            }
        }
    }
}

/// Isolating radius for the singleton {m} in ℕ ∪ {∞}: a dyadic below the
/// gap 1/(m(m+1)) to the nearest neighbor.
fn isolating_radius(m: u64) -> f64 {
    let mut r = 1.0f64;
    let gap = 1.0 / (m as f64 * (m as f64 + 1.0));
    while r >= gap {
        r /= 2.0;
    }
    r
}

fn isolating_radius_bound(center: &PointRef) -> f64 {
    match center {
        PointRef::Nat { value: NatPoint::Fin(m) } => 1.0 / (*m as f64 * (*m as f64 + 1.0)),
        _ => 0.0,
    }
}

/// Deterministic net inside a full-shift window: varied admissible tails.
fn shift_net(word: &[u8], offset: i64, _sides: Sides, count: usize, seed: u64) -> Vec<PointRef> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0e7);
    let base_rules: Vec<SymbolRule> = vec![
        SymbolRule::Periodic { word: vec![0] },
        SymbolRule::Periodic { word: vec![1] },
        SymbolRule::Periodic { word: vec![0, 1] },
        SymbolRule::Champernowne,
    ];
    let mut out = Vec::new();
    for tail in base_rules {
        if out.len() >= count + 4 {
            break;
        }
        out.push(window_point(word, offset, tail));
    }
    while out.len() < count + 4 {
        let len = 2 + (rng.gen::<usize>() % 5);
        let w: Vec<u8> = (0..len).map(|_| rng.gen_range(0..2u8)).collect();
        out.push(window_point(word, offset, SymbolRule::Periodic { word: w }));
    }
    out
}

/// The point reading `word` on [offset, offset+len) and `tail` elsewhere.
pub fn window_point(word: &[u8], offset: i64, tail: SymbolRule) -> PointRef {
    let len = word.len() as i64;
    if len == 0 {
        return PointRef::word(tail);
    }
    let end = offset + len;
    // split at the window's right edge: indices below it read the word
    // (periodically indexed, but only the final period is reachable),
    // indices at or above it read the tail
    let upper = SymbolRule::Splice {
        neg: Box::new(SymbolRule::Periodic { word: word.to_vec() }),
        neg_offset: len,
        pos: Box::new(tail.clone()),
        pos_offset: end,
    };
    // split at the window's left edge: below it the tail, above it `upper`
    let rule = SymbolRule::Splice {
        neg: Box::new(tail),
        neg_offset: offset,
        pos: Box::new(upper),
        pos_offset: -len,
    };
    PointRef::Word { point: WordPoint { rule, offset: -offset } }
}

/// Net inside a quotient-metric ball (referee example): the center, deep
/// word modifications of it in both slice directions, and whole slices that
/// sit inside the ball via the collapsed point.
fn quotient_ball_net(
    base: &System,
    collapsed: &ClosedSet,
    center: &PointRef,
    radius: f64,
    count: usize,
) -> Vec<PointRef> {
    let PointRef::Class { rep } = center else { return vec![] };
    let mut out = vec![center.clone()];
    if let ClosedSet::CrossAtInfinity = collapsed {
        let PointRef::Pair { left: wl, right: nr } = &**rep else { return vec![] };
        if let (PointRef::Word { point }, PointRef::Nat { value }) = (&**wl, &**nr) {
            let jr = ball_depth(radius) as i64;
            let q_star = (1.0 / radius).floor() as u64 + 1;
            if *value == NatPoint::Infinity {
                // ball around the collapsed point: its members are points
                // close to the cross — sparse words at small q (whose first 1
                // sits at depth ≥ jr) and whole slices at q ≥ q*
                for q in [1u64, 2, q_star, q_star + 1] {
                    for (flips, tail) in [
                        (vec![jr], None),
                        (vec![], Some(jr)),
                        (vec![jr + 1], None),
                        (vec![], Some(jr + 1)),
                    ] {
                        let rule = SymbolRule::Flips {
                            base: Box::new(SymbolRule::Periodic { word: vec![0] }),
                            flips,
                            tail_from: tail,
                        };
                        out.push(PointRef::class(PointRef::pair(
                            PointRef::word(rule),
                            PointRef::Nat { value: NatPoint::Fin(q) },
                        )));
                    }
                }
            } else {
                // same-slice deep modifications: flip one position / the
                // whole tail beyond the agreement window in both directions
                for (flips, tail) in [
                    (vec![jr + 1], None),
                    (vec![], Some(jr + 1)),
                    (vec![-(jr + 1)], None),
                    (vec![jr + 2], None),
                ] {
                    let rule = SymbolRule::Flips {
                        base: Box::new(point.rule.clone()),
                        flips: flips.iter().map(|f| point.offset + f).collect(),
                        tail_from: tail.map(|t| point.offset + t),
                    };
                    out.push(PointRef::class(PointRef::pair(
                        PointRef::Word { point: WordPoint { rule, offset: point.offset } },
                        PointRef::Nat { value: *value },
                    )));
                }
            }
            // slices within radius of the collapsed point
            for (i, rule) in [
                SymbolRule::Periodic { word: vec![1] },
                SymbolRule::Periodic { word: vec![0, 1] },
                SymbolRule::Champernowne,
            ]
            .into_iter()
            .enumerate()
            {
                if out.len() >= count + 16 {
                    break;
                }
                out.push(PointRef::class(PointRef::pair(
                    PointRef::word(rule),
                    PointRef::Nat { value: NatPoint::Fin(q_star + i as u64) },
                )));
            }
        }
    } else if let ClosedSet::SinglePoint { .. } = collapsed {
        // d̄ = d here; reuse base ball net
        if let SetKind::Ball { .. } = (SetKind::Ball { center: (**rep).clone(), radius }) {
            for p in base.kind.sample_in_set(
                &SetKind::Ball { center: (**rep).clone(), radius },
                count,
                11,
            ) {
                out.push(PointRef::class(p));
            }
        }
    }
    out
}

/// Basis for the referee example: a ball around e plus window×singleton
/// slices for every finite q up to 2^r (deeper slices live inside the e-ball).
fn referee_basis(id: &str, base: &System, r: u32) -> Result<Vec<OpenSetDescriptor>> {
    const CAP: usize = 1 << 20;
    let SystemKind::Product { left, right: _ } = &base.kind else {
        return Err(Error::Precondition("referee base must be a product".into()));
    };
    let mk = |kind: SetKind| OpenSetDescriptor { system_id: id.into(), kind };
    let mut out = vec![mk(SetKind::Ball {
        center: crate::systems::referee_fixed_point(),
        radius: 2f64.powi(-(r as i32)),
    })];
    let h = r.saturating_sub(2).max(1);
    let words = all_words(2 * h + 1);
    let q_top = 1u64 << r;
    if words.len() * q_top as usize > CAP {
        return Err(Error::ResolutionTooFine(r, 8));
    }
    for q in 1..=q_top {
        for w in &words {
            let inner = OpenSetDescriptor {
                system_id: base.id.clone(),
                kind: SetKind::Product {
                    parts: vec![
                        OpenSetDescriptor {
                            system_id: left.id.clone(),
                            kind: SetKind::Cylinder { word: w.clone(), offset: -(h as i64) },
                        },
                        OpenSetDescriptor {
                            system_id: "nat-compact".into(),
                            kind: SetKind::Ball {
                                center: PointRef::Nat { value: NatPoint::Fin(q) },
                                radius: isolating_radius(q),
                            },
                        },
                    ],
                },
            };
            out.push(mk(SetKind::QuotientImage { inner: Box::new(inner) }));
        }
    }
    Ok(out)
}

/// Exact diameters for referee-example set shapes: full slices and e-balls.
fn referee_diam_exact(base: &System, set: &SetKind, n: u64) -> Option<f64> {
    match set {
        SetKind::QuotientImage { inner } => {
            let SetKind::Product { parts } = &inner.kind else { return None };
            // slice Y₁×{q}: word part unconstrained, nat part an isolated singleton
            let word_free = matches!(&parts[0].kind, SetKind::Cylinder { word, .. } if word.is_empty());
            let SetKind::Ball { center: PointRef::Nat { value: NatPoint::Fin(q) }, radius } =
                &parts[1].kind
            else {
                return None;
            };
            let gap = 1.0 / (*q as f64 * (*q as f64 + 1.0));
            if !word_free || *radius > gap {
                return None;
            }
            let _ = base;
            let _ = n; // slices are invariant
            Some((2.0 / *q as f64).min(1.0))
        }
        SetKind::Ball { center, radius } => {
            let PointRef::Class { rep } = center else { return None };
            let is_e = dynamics::in_collapsed(
                base,
                &ClosedSet::CrossAtInfinity,
                rep,
                96,
            ) == Some(true);
            if !is_e {
                return None;
            }
            // B(e, r) ⊇ the whole slice q* (least q with 1/q < r) at all times,
            // and its small-q points spread as their sparse 1s reach the
            // origin: diam = min(1, max(2/q*, 2·min(1/2, 2^(n−jr)))).
            let q_star = (1.0 / radius).floor() + 1.0;
            let jr = ball_depth(*radius) as i64;
            let drift = 2f64.powi((n as i64 - jr).min(0) as i32).min(0.5);
            Some((2.0 / q_star).max(2.0 * drift).min(1.0))
        }
        _ => None,
    }
}
