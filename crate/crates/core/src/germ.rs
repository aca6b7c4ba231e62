//! Admissibility germs: catalog predicates, finite sampling, and the germ
//! algebra (L1-dissipativity check, dual, closure, definiteness and
//! completeness probes, remainder term, germ distance).
//!
//! A germ is a set of stationary interface pairs (u_l, u_r) satisfying the
//! Rankine-Hugoniot condition f_l(u_l) = f_r(u_r). Germs are dual-represented:
//! a [`GermSpec`] is an exact catalog predicate with parameters, a
//! [`GermSample`] is a finite pair list at a stated level resolution. Set
//! operators (dual, closure, completeness) act on samples; predicates are
//! exact where closed forms exist.
//!
//! Catalog sign conventions: the one-sided signs used by the connection duals
//! are the nonnegative indicators sign+(z) = 1 for z > 0 (else 0) and
//! sign-(z) = 1 for z < 0 (else 0).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flux::{FluxError, FluxPair, PiecewiseLinearFlux};
use crate::riemann::{self, Side};
use crate::{RH_TOL, SPEED_TOL, STATE_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GermError {
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error("flux pair does not match the germ kind: {0}")]
    FluxShapeMismatch(String),
    #[error("flux ranges are disjoint; no weak interface coupling exists")]
    EmptyRange,
    #[error("samples were built over different flux pairs")]
    FluxMismatch,
    #[error("pair ({ul}, {ur}) violates Rankine-Hugoniot: f_l = {fl}, f_r = {fr}")]
    RhViolation { ul: f64, ur: f64, fl: f64, fr: f64 },
    #[error("level resolution must be at least 2, got {0}")]
    BadResolution(usize),
    #[error("operation requires a nonempty sample")]
    EmptySample,
}

/// One elementary interface pair: the stationary solution equal to `ul` on
/// x < 0 and `ur` on x > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatePair {
    pub ul: f64,
    pub ur: f64,
}

impl StatePair {
    pub fn new(ul: f64, ur: f64) -> Self {
        Self { ul, ur }
    }

    pub fn close_to(&self, other: &StatePair, tol: f64) -> bool {
        (self.ul - other.ul).abs() <= tol && (self.ur - other.ur).abs() <= tol
    }
}

/// Catalog of interface admissibility criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GermKind {
    /// All constants (c, c); requires identical fluxes.
    VolpertKruzhkov,
    /// Standing-wave admissible jumps of a single flux (strict inequalities);
    /// requires identical fluxes.
    Gelfand,
    /// Every Rankine-Hugoniot pair.
    RankineHugoniot,
    /// The singleton {(A, B)}.
    Connection { a: f64, b: f64 },
    /// Adapted-entropy pairs for valley-shaped fluxes: both states on the
    /// same side of their respective flux minimizers.
    AudussePerthame,
    /// Maximal extension of a connection for valley-shaped fluxes.
    ConnectionApDual { a: f64, b: f64 },
    /// Maximal extension of a connection for bell-shaped fluxes.
    AbDual { a: f64, b: f64 },
    /// Karlsen-Risebro-Towers pairs.
    Krt,
    /// Standing-wave vanishing-viscosity pairs, strict form.
    VvOpen,
    /// Vanishing-viscosity pairs (closure of the strict form).
    Vv,
    /// An explicit finite pair list.
    Explicit(Vec<StatePair>),
}

impl GermKind {
    pub fn name(&self) -> &'static str {
        match self {
            GermKind::VolpertKruzhkov => "volpert_kruzhkov",
            GermKind::Gelfand => "gelfand",
            GermKind::RankineHugoniot => "rankine_hugoniot",
            GermKind::Connection { .. } => "connection",
            GermKind::AudussePerthame => "audusse_perthame",
            GermKind::ConnectionApDual { .. } => "connection_ap_dual",
            GermKind::AbDual { .. } => "ab_dual",
            GermKind::Krt => "krt",
            GermKind::VvOpen => "vv_open",
            GermKind::Vv => "vv",
            GermKind::Explicit(_) => "explicit",
        }
    }
}

/// Nonnegative one-sided signs.
fn semi_pos(z: f64) -> f64 {
    if z > STATE_TOL {
        1.0
    } else {
        0.0
    }
}

fn semi_neg(z: f64) -> f64 {
    if z < -STATE_TOL {
        1.0
    } else {
        0.0
    }
}

/// Side of `u` relative to an extremum plateau: -1 below, 0 on it, +1 above.
fn side_of(u: f64, plateau: crate::flux::Interval) -> i8 {
    if u < plateau.lo - STATE_TOL {
        -1
    } else if u > plateau.hi + STATE_TOL {
        1
    } else {
        0
    }
}

/// A germ as an exact predicate over a fixed flux pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GermSpec {
    pub kind: GermKind,
    pub fluxes: FluxPair,
    pub rh_tol: f64,
}

impl GermSpec {
    pub fn new(kind: GermKind, fluxes: FluxPair) -> Result<Self, GermError> {
        Self::with_tol(kind, fluxes, RH_TOL)
    }

    pub fn with_tol(kind: GermKind, fluxes: FluxPair, rh_tol: f64) -> Result<Self, GermError> {
        let spec = Self { kind, fluxes, rh_tol };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), GermError> {
        let fp = &self.fluxes;
        let rh = |a: f64, b: f64| -> Result<(), GermError> {
            let fl = fp.left.eval(a)?;
            let fr = fp.right.eval(b)?;
            if (fl - fr).abs() > self.rh_tol {
                return Err(GermError::RhViolation { ul: a, ur: b, fl, fr });
            }
            Ok(())
        };
        match &self.kind {
            GermKind::VolpertKruzhkov | GermKind::Gelfand => {
                if !fp.is_homogeneous() {
                    return Err(GermError::FluxShapeMismatch(format!(
                        "{} requires identical left and right fluxes",
                        self.kind.name()
                    )));
                }
            }
            GermKind::Connection { a, b } => rh(*a, *b)?,
            GermKind::AudussePerthame => {
                if !fp.left.is_valley() || !fp.right.is_valley() {
                    return Err(GermError::FluxShapeMismatch(
                        "adapted entropies need valley-shaped fluxes".into(),
                    ));
                }
            }
            GermKind::ConnectionApDual { a, b } => {
                if !fp.left.is_valley() || !fp.right.is_valley() {
                    return Err(GermError::FluxShapeMismatch(
                        "connection duals of this form need valley-shaped fluxes".into(),
                    ));
                }
                rh(*a, *b)?;
            }
            GermKind::AbDual { a, b } => {
                Self::check_bell_pair(fp)?;
                rh(*a, *b)?;
            }
            GermKind::Explicit(pairs) => {
                for p in pairs {
                    rh(p.ul, p.ur)?;
                }
            }
            GermKind::RankineHugoniot | GermKind::Krt | GermKind::VvOpen | GermKind::Vv => {}
        }
        Ok(())
    }

    fn check_bell_pair(fp: &FluxPair) -> Result<(), GermError> {
        if !fp.left.is_bell() || !fp.right.is_bell() {
            return Err(GermError::FluxShapeMismatch(
                "connection duals of this form need bell-shaped fluxes".into(),
            ));
        }
        let dom = fp.domain();
        let interior: Vec<f64> = fp
            .crossings()
            .into_iter()
            .map(|(u, _)| u)
            .filter(|&u| u > dom.lo + STATE_TOL && u < dom.hi - STATE_TOL)
            .collect();
        if interior.len() > 1 {
            return Err(GermError::FluxShapeMismatch(format!(
                "bell fluxes must have at most one interior crossing, found {}",
                interior.len()
            )));
        }
        if let Some(&u_chi) = interior.first() {
            let pl = fp.left.argmax_interval();
            let pr = fp.right.argmax_interval();
            let lo = pl.lo.min(pr.lo) - STATE_TOL;
            let hi = pl.hi.max(pr.hi) + STATE_TOL;
            if u_chi < lo || u_chi > hi {
                return Err(GermError::FluxShapeMismatch(
                    "the flux crossing must lie between the two maximizers".into(),
                ));
            }
        }
        Ok(())
    }

    /// Common flux value of a Rankine-Hugoniot pair.
    fn rh_level(&self, p: StatePair) -> Result<Option<f64>, GermError> {
        let fl = self.fluxes.left.eval(p.ul)?;
        let fr = self.fluxes.right.eval(p.ur)?;
        if (fl - fr).abs() > self.rh_tol {
            return Ok(None);
        }
        Ok(Some(0.5 * (fl + fr)))
    }

    /// Exact membership test. The Rankine-Hugoniot condition is checked
    /// first; interval conditions are evaluated by exact node scans.
    /// Strict-inequality germs treat boundary equalities as failure, closed
    /// germs as success.
    pub fn contains(&self, p: StatePair) -> Result<bool, GermError> {
        let s = match self.rh_level(p)? {
            Some(s) => s,
            None => return Ok(false),
        };
        let (a, b) = (p.ul, p.ur);
        let fl = &self.fluxes.left;
        let fr = &self.fluxes.right;
        let same = (a - b).abs() <= STATE_TOL;
        Ok(match &self.kind {
            GermKind::VolpertKruzhkov => same,
            GermKind::Gelfand => {
                same || if a < b {
                    fl.strictly_above(s, a, b, false, false)
                } else {
                    fl.strictly_below(s, b, a, false, false)
                }
            }
            GermKind::RankineHugoniot => true,
            GermKind::Connection { a: ca, b: cb } => {
                (a - ca).abs() <= STATE_TOL && (b - cb).abs() <= STATE_TOL
            }
            GermKind::AudussePerthame => {
                side_of(a, fl.argmin_interval()) == side_of(b, fr.argmin_interval())
            }
            GermKind::ConnectionApDual { a: ca, b: cb } => {
                let s_ab = 0.5 * (fl.eval(*ca)? + fr.eval(*cb)?);
                s >= s_ab - self.rh_tol && semi_neg(a - ca) * semi_pos(b - cb) <= 0.0 + f64::EPSILON
            }
            GermKind::AbDual { a: ca, b: cb } => {
                let s_ab = 0.5 * (fl.eval(*ca)? + fr.eval(*cb)?);
                s <= s_ab + self.rh_tol && semi_pos(a - ca) * semi_neg(b - cb) <= 0.0 + f64::EPSILON
            }
            GermKind::Krt => {
                same || if a < b {
                    scan_max_ge(fl, fr, s - self.rh_tol, a, b)
                } else {
                    scan_min_le(fl, fr, s + self.rh_tol, b, a)
                }
            }
            GermKind::VvOpen => {
                same || if a < b {
                    fl.strictly_above(s, a, b, false, true)
                        || fr.strictly_above(s, a, b, true, false)
                } else {
                    fl.strictly_below(s, b, a, true, false)
                        || fr.strictly_below(s, b, a, false, true)
                }
            }
            GermKind::Vv => {
                same || if a < b {
                    // largest reach of f_l >= s from the left vs. the smallest
                    // start of f_r >= s ending at the right
                    let zl = fl.extent_holding(a, b, s, true, self.rh_tol);
                    let zr = fr.extent_holding_back(b, a, s, true, self.rh_tol);
                    zl >= zr - STATE_TOL
                } else {
                    let zr = fr.extent_holding(b, a, s, false, self.rh_tol);
                    let zl = fl.extent_holding_back(a, b, s, false, self.rh_tol);
                    zr >= zl - STATE_TOL
                }
            }
            GermKind::Explicit(pairs) => pairs.iter().any(|q| p.close_to(q, STATE_TOL)),
        })
    }

    /// Flux levels that pin the germ's structure (connection levels, valley
    /// or peak levels, flux crossings). Injected into every enumeration so
    /// that coarse level grids cannot miss the distinguished pairs.
    pub fn structural_levels(&self) -> Vec<f64> {
        let mut levels = Vec::new();
        match &self.kind {
            GermKind::Connection { a, b }
            | GermKind::ConnectionApDual { a, b }
            | GermKind::AbDual { a, b } => {
                if let (Ok(fa), Ok(fb)) = (self.fluxes.left.eval(*a), self.fluxes.right.eval(*b)) {
                    levels.push(0.5 * (fa + fb));
                }
            }
            GermKind::Explicit(pairs) => {
                for p in pairs {
                    if let Ok(Some(s)) = self.rh_level(*p) {
                        levels.push(s);
                    }
                }
            }
            _ => {}
        }
        levels.extend(self.fluxes.left.critical_levels());
        levels.extend(self.fluxes.right.critical_levels());
        if !self.fluxes.is_homogeneous() {
            levels.extend(self.fluxes.crossings().into_iter().map(|(_, s)| s));
        }
        levels
    }

    /// The closed predicate the interface Riemann solver matches against:
    /// the germ's maximal dissipative extension where a closed form is known.
    /// Riemann trace pairs live in the dual germ, so matching a definite but
    /// incomplete germ (a single connection, the constants) against its own
    /// pair list would spuriously report incompleteness.
    pub fn matching_spec(&self) -> GermSpec {
        let kind = match &self.kind {
            // for a single flux the constants and the strict standing-wave
            // pairs share the vanishing-viscosity closure as their unique
            // maximal extension
            GermKind::VolpertKruzhkov | GermKind::Gelfand => GermKind::Vv,
            GermKind::VvOpen => GermKind::Vv,
            GermKind::Connection { a, b } => {
                if self.fluxes.left.is_bell() && self.fluxes.right.is_bell() {
                    GermKind::AbDual { a: *a, b: *b }
                } else if self.fluxes.left.is_valley() && self.fluxes.right.is_valley() {
                    GermKind::ConnectionApDual { a: *a, b: *b }
                } else {
                    GermKind::Connection { a: *a, b: *b }
                }
            }
            other => other.clone(),
        };
        GermSpec {
            kind,
            fluxes: self.fluxes.clone(),
            rh_tol: self.rh_tol,
        }
    }

    /// Enumerate the germ at a finite level resolution: `resolution` flux
    /// levels spanning the common range, each paired through the exact level
    /// sets of both fluxes, filtered by [`GermSpec::contains`]. Plateau
    /// preimages contribute endpoints and a midpoint.
    pub fn sample(&self, resolution: usize) -> Result<GermSample, GermError> {
        if resolution < 2 {
            return Err(GermError::BadResolution(resolution));
        }
        let levels = enumeration_levels(&self.fluxes, resolution, &self.structural_levels())?;
        let mut pairs: Vec<StatePair> = Vec::new();
        for &s in &levels {
            for ul in level_candidates(&self.fluxes.left, s) {
                for ur in level_candidates(&self.fluxes.right, s) {
                    let p = StatePair::new(ul, ur);
                    if self.contains(p)? {
                        pairs.push(p);
                    }
                }
            }
        }
        dedupe_pairs(&mut pairs);
        GermSample::with_origin(pairs, resolution, self.fluxes.clone(), Some(self.clone()))
    }
}

/// Level grid used by sampling, duals and completeness probes.
pub(crate) fn enumeration_levels(
    fluxes: &FluxPair,
    resolution: usize,
    extra: &[f64],
) -> Result<Vec<f64>, GermError> {
    let common = fluxes.common_range().ok_or(GermError::EmptyRange)?;
    let mut levels: Vec<f64> = (0..resolution)
        .map(|i| common.lo + (common.hi - common.lo) * (i as f64) / ((resolution - 1) as f64))
        .collect();
    for &s in extra {
        if s >= common.lo - STATE_TOL && s <= common.hi + STATE_TOL {
            levels.push(s.clamp(common.lo, common.hi));
        }
    }
    levels.sort_by(|x, y| x.partial_cmp(y).unwrap());
    levels.dedup_by(|x, y| (*x - *y).abs() <= STATE_TOL);
    Ok(levels)
}

/// Representative states of a flux level set (plateaus give endpoints plus a
/// midpoint).
pub(crate) fn level_candidates(flux: &PiecewiseLinearFlux, s: f64) -> Vec<f64> {
    flux.level_set(s)
        .iter()
        .flat_map(|it| it.representatives())
        .collect()
}

fn dedupe_pairs(pairs: &mut Vec<StatePair>) {
    pairs.sort_by(|p, q| {
        p.ul.partial_cmp(&q.ul)
            .unwrap()
            .then(p.ur.partial_cmp(&q.ur).unwrap())
    });
    pairs.dedup_by(|p, q| p.close_to(q, STATE_TOL));
}

/// True when max(f_l, f_r) >= c everywhere on [a, b]. The pointwise max of
/// two linear pieces dips lowest at their crossing, so endpoints and
/// crossings of each common-linearity piece decide the scan.
fn scan_max_ge(fl: &PiecewiseLinearFlux, fr: &PiecewiseLinearFlux, c: f64, a: f64, b: f64) -> bool {
    scan_pair(fl, fr, a, b, |vl, vr| vl.max(vr) >= c)
}

/// True when min(f_l, f_r) <= c everywhere on [a, b].
fn scan_min_le(fl: &PiecewiseLinearFlux, fr: &PiecewiseLinearFlux, c: f64, a: f64, b: f64) -> bool {
    scan_pair(fl, fr, a, b, |vl, vr| vl.min(vr) <= c)
}

fn scan_pair(
    fl: &PiecewiseLinearFlux,
    fr: &PiecewiseLinearFlux,
    a: f64,
    b: f64,
    ok: impl Fn(f64, f64) -> bool,
) -> bool {
    let mut breaks: Vec<f64> = vec![a, b];
    for &(u, _) in fl.nodes().iter().chain(fr.nodes()) {
        if u > a && u < b {
            breaks.push(u);
        }
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup_by(|x, y| (*x - *y).abs() <= STATE_TOL);
    let ev = |f: &PiecewiseLinearFlux, u: f64| f.eval(u).expect("scan point in domain");
    for w in breaks.windows(2) {
        let (p, q) = (w[0], w[1]);
        if !ok(ev(fl, p), ev(fr, p)) || !ok(ev(fl, q), ev(fr, q)) {
            return false;
        }
        // check the interior crossing of the two linear pieces
        let dp = ev(fl, p) - ev(fr, p);
        let dq = ev(fl, q) - ev(fr, q);
        if dp * dq < 0.0 {
            let t = dp / (dp - dq);
            let u = p + t * (q - p);
            if !ok(ev(fl, u), ev(fr, u)) {
                return false;
            }
        }
    }
    true
}

/// A germ enumerated at finite resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GermSample {
    pairs: Vec<StatePair>,
    pub resolution: usize,
    pub fluxes: FluxPair,
    origin: Option<GermSpec>,
}

impl GermSample {
    /// Build from raw pairs; every pair must satisfy Rankine-Hugoniot within
    /// the default tolerance.
    pub fn new(pairs: Vec<StatePair>, resolution: usize, fluxes: FluxPair) -> Result<Self, GermError> {
        Self::with_origin(pairs, resolution, fluxes, None)
    }

    fn with_origin(
        pairs: Vec<StatePair>,
        resolution: usize,
        fluxes: FluxPair,
        origin: Option<GermSpec>,
    ) -> Result<Self, GermError> {
        let rh_tol = origin.as_ref().map_or(RH_TOL, |s| s.rh_tol);
        for p in &pairs {
            let fl = fluxes.left.eval(p.ul)?;
            let fr = fluxes.right.eval(p.ur)?;
            if (fl - fr).abs() > rh_tol {
                return Err(GermError::RhViolation {
                    ul: p.ul,
                    ur: p.ur,
                    fl,
                    fr,
                });
            }
        }
        Ok(Self {
            pairs,
            resolution,
            fluxes,
            origin,
        })
    }

    pub fn pairs(&self) -> &[StatePair] {
        &self.pairs
    }

    pub fn origin(&self) -> Option<&GermSpec> {
        self.origin.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Pointwise membership: exact predicate when the sample has a catalog
    /// origin, otherwise list lookup.
    pub fn member(&self, p: StatePair) -> Result<bool, GermError> {
        match &self.origin {
            Some(spec) => spec.contains(p),
            None => Ok(self.pairs.iter().any(|q| p.close_to(q, STATE_TOL))),
        }
    }

    pub fn rh_tol(&self) -> f64 {
        self.origin.as_ref().map_or(RH_TOL, |s| s.rh_tol)
    }
}

/// Outcome of the pairwise L1-dissipativity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1dReport {
    pub ok: bool,
    /// First violating quadruple `(p, q)` with the violation margin
    /// `q_r - q_l > 0`.
    pub witness: Option<(StatePair, StatePair, f64)>,
}

/// True iff every two sample pairs satisfy the interface entropy-flux
/// inequality q_l(p.ul, q.ul) >= q_r(p.ur, q.ur).
pub fn is_l1d(sample: &GermSample) -> Result<L1dReport, GermError> {
    let slack = 4.0 * sample.rh_tol();
    let fl = &sample.fluxes.left;
    let fr = &sample.fluxes.right;
    for (i, p) in sample.pairs.iter().enumerate() {
        for q in &sample.pairs[i..] {
            let ql = fl.entropy_flux(p.ul, q.ul)?;
            let qr = fr.entropy_flux(p.ur, q.ur)?;
            if ql < qr - slack {
                return Ok(L1dReport {
                    ok: false,
                    witness: Some((*p, *q, qr - ql)),
                });
            }
        }
    }
    Ok(L1dReport {
        ok: true,
        witness: None,
    })
}

/// Dual germ at finite resolution: all Rankine-Hugoniot candidates from the
/// level enumeration that satisfy the dissipativity inequality against every
/// sample pair.
pub fn dual(sample: &GermSample, resolution: usize) -> Result<GermSample, GermError> {
    if resolution < 2 {
        return Err(GermError::BadResolution(resolution));
    }
    let slack = 4.0 * sample.rh_tol();
    let fl = &sample.fluxes.left;
    let fr = &sample.fluxes.right;
    let mut extra: Vec<f64> = sample
        .origin
        .as_ref()
        .map(|s| s.structural_levels())
        .unwrap_or_default();
    for p in &sample.pairs {
        extra.push(0.5 * (fl.eval(p.ul)? + fr.eval(p.ur)?));
    }
    let levels = enumeration_levels(&sample.fluxes, resolution, &extra)?;
    let mut out: Vec<StatePair> = Vec::new();
    for &s in &levels {
        for ul in level_candidates(fl, s) {
            'cand: for ur in level_candidates(fr, s) {
                for p in &sample.pairs {
                    let ql = fl.entropy_flux(p.ul, ul)?;
                    let qr = fr.entropy_flux(p.ur, ur)?;
                    if ql < qr - slack {
                        continue 'cand;
                    }
                }
                out.push(StatePair::new(ul, ur));
            }
        }
    }
    dedupe_pairs(&mut out);
    GermSample::with_origin(out, resolution, sample.fluxes.clone(), None)
}

/// Closure: adjoin, for every sample pair, all pairs reachable through left
/// and right contact shocks (stationary single-flux jumps admissible for the
/// one-sided Riemann problem).
pub fn closure(sample: &GermSample) -> Result<GermSample, GermError> {
    let fl = &sample.fluxes.left;
    let fr = &sample.fluxes.right;
    let mut out = sample.pairs.clone();
    for p in &sample.pairs {
        let lefts = contact_partners(fl, p.ul, Side::Left)?;
        let rights = contact_partners(fr, p.ur, Side::Right)?;
        for &um in &lefts {
            for &up in &rights {
                out.push(StatePair::new(um, up));
            }
        }
    }
    dedupe_pairs(&mut out);
    GermSample::with_origin(out, sample.resolution, sample.fluxes.clone(), None)
}

/// States forming a contact shock with `ustar`: equal flux value and
/// membership in the one-sided wave-speed domain.
fn contact_partners(
    flux: &PiecewiseLinearFlux,
    ustar: f64,
    side: Side,
) -> Result<Vec<f64>, GermError> {
    let s = flux.eval(ustar)?;
    let theta = riemann::theta_domain(flux, side, ustar)?;
    let mut out = vec![ustar];
    for cand in level_candidates(flux, s) {
        if theta.iter().any(|iv| iv.contains(cand, SPEED_TOL)) {
            out.push(cand);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() <= STATE_TOL);
    Ok(out)
}

/// Verdict of the finite-resolution definiteness probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Definiteness {
    DefiniteAtResolution,
    NotDefinite {
        witness: (StatePair, StatePair, f64),
    },
    Inconclusive,
}

/// Probe definiteness: sample the germ, build its dual, and check the dual
/// for L1-dissipativity. A germ whose dual is dissipative is definite; a
/// solid interior violation (inside the germ itself or inside its dual)
/// refutes definiteness; anything else is inconclusive.
pub fn definiteness_probe(spec: &GermSpec, resolution: usize) -> Result<Definiteness, GermError> {
    let sample = spec.sample(resolution)?;
    let margin_floor = 10.0 * spec.rh_tol;
    let dom = spec.fluxes.domain();
    let interior = |w: &(StatePair, StatePair, f64)| {
        [w.0.ul, w.0.ur, w.1.ul, w.1.ur].iter().all(|&u| {
            (u - dom.lo).abs() > 1e-9 && (u - dom.hi).abs() > 1e-9
        })
    };
    // A germ that is itself not dissipative has no dissipative extension.
    let own = is_l1d(&sample)?;
    if let Some(w) = own.witness {
        return Ok(if w.2 > margin_floor && interior(&w) {
            Definiteness::NotDefinite { witness: w }
        } else {
            Definiteness::Inconclusive
        });
    }
    let d = dual(&sample, resolution)?;
    let dual_check = is_l1d(&d)?;
    Ok(match dual_check.witness {
        None => Definiteness::DefiniteAtResolution,
        Some(w) if w.2 > margin_floor && interior(&w) => Definiteness::NotDefinite { witness: w },
        Some(_) => Definiteness::Inconclusive,
    })
}

/// Coverage report of the completeness probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub fraction: f64,
    pub probed: usize,
    pub covered: usize,
    pub uncovered: Vec<(f64, f64)>,
}

/// Probe completeness: every Riemann datum on the probe grid must fall into
/// the one-sided wave-speed domain product of some sample pair. The probe
/// grid is built from the same level-set machinery as the enumeration, so a
/// complete germ scores exactly 1.0 at matching resolution.
pub fn completeness_check(
    sample: &GermSample,
    resolution: usize,
) -> Result<CoverageReport, GermError> {
    if sample.is_empty() {
        return Err(GermError::EmptySample);
    }
    let fl = &sample.fluxes.left;
    let fr = &sample.fluxes.right;
    let probe = |flux: &PiecewiseLinearFlux| -> Vec<f64> {
        let r = flux.range();
        let mut states = vec![flux.domain().lo, flux.domain().hi];
        for i in 0..resolution {
            let s = r.lo + (r.hi - r.lo) * (i as f64) / ((resolution - 1) as f64);
            states.extend(level_candidates(flux, s));
        }
        states.sort_by(|a, b| a.partial_cmp(b).unwrap());
        states.dedup_by(|a, b| (*a - *b).abs() <= STATE_TOL);
        states
    };
    let states_l = probe(fl);
    let states_r = probe(fr);

    let mut theta_products = Vec::with_capacity(sample.pairs.len());
    for p in &sample.pairs {
        let tl = riemann::theta_domain(fl, Side::Left, p.ul)?;
        let tr = riemann::theta_domain(fr, Side::Right, p.ur)?;
        theta_products.push((tl, tr));
    }

    let mut covered = 0usize;
    let mut uncovered = Vec::new();
    for &um in &states_l {
        for &up in &states_r {
            let hit = theta_products.iter().any(|(tl, tr)| {
                tl.iter().any(|iv| iv.contains(um, SPEED_TOL))
                    && tr.iter().any(|iv| iv.contains(up, SPEED_TOL))
            });
            if hit {
                covered += 1;
            } else if uncovered.len() < 10 {
                uncovered.push((um, up));
            }
        }
    }
    let probed = states_l.len() * states_r.len();
    Ok(CoverageReport {
        fraction: covered as f64 / probed as f64,
        probed,
        covered,
        uncovered,
    })
}

/// Remainder term of the up-to-the-interface entropy inequality:
/// twice the smallest combined flux oscillation from `(cl, cr)` to a sample
/// pair. Zero exactly on the germ.
pub fn remainder(sample: &GermSample, cl: f64, cr: f64) -> Result<f64, GermError> {
    if sample.is_empty() {
        return Err(GermError::EmptySample);
    }
    let mut best = f64::INFINITY;
    for p in &sample.pairs {
        let o = sample.fluxes.left.osc(cl, p.ul)? + sample.fluxes.right.osc(cr, p.ur)?;
        best = best.min(o);
    }
    Ok(2.0 * best)
}

/// Distance between two germs over the same flux pair:
/// max(0, sup q_r(b_r, b'_r) - q_l(b_l, b'_l)). Zero between two maximal
/// dissipative germs forces them to coincide.
pub fn germ_distance(g1: &GermSample, g2: &GermSample) -> Result<f64, GermError> {
    if g1.fluxes != g2.fluxes {
        return Err(GermError::FluxMismatch);
    }
    if g1.is_empty() || g2.is_empty() {
        return Err(GermError::EmptySample);
    }
    let fl = &g1.fluxes.left;
    let fr = &g1.fluxes.right;
    let mut sup = f64::NEG_INFINITY;
    for p in &g1.pairs {
        for q in &g2.pairs {
            let d = fr.entropy_flux(p.ur, q.ur)? - fl.entropy_flux(p.ul, q.ul)?;
            sup = sup.max(d);
        }
    }
    Ok(sup.max(0.0))
}
