//! Piecewise-linear fluxes and exact queries on them.
//!
//! Every flux in this crate is a continuous piecewise-linear function on a
//! closed state interval, stored as an ordered breakpoint list. Evaluation is
//! linear interpolation; minima, maxima, oscillations, level sets and Godunov
//! fluxes are exact node scans. Analytic fluxes enter via [`PiecewiseLinearFlux::sample`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::STATE_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluxError {
    #[error("state {u} outside the flux domain [{lo}, {hi}]")]
    OutOfDomain { u: f64, lo: f64, hi: f64 },
    #[error("invalid breakpoints: {0}")]
    InvalidNodes(String),
    #[error("flux pair domains differ: [{0}, {1}] vs [{2}, {3}]")]
    DomainMismatch(f64, f64, f64, f64),
}

/// Closed state interval. Domain intervals are non-degenerate; envelopes and
/// level-set segments may be points (`lo == hi`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Non-degenerate interval (`lo < hi`).
    pub fn new(lo: f64, hi: f64) -> Result<Self, FluxError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(FluxError::InvalidNodes(format!(
                "interval bounds must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate single-point interval.
    pub fn point(c: f64) -> Self {
        Self { lo: c, hi: c }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, u: f64, tol: f64) -> bool {
        u >= self.lo - tol && u <= self.hi + tol
    }

    /// Clamp a state into the interval.
    pub fn clamp(&self, u: f64) -> f64 {
        u.max(self.lo).min(self.hi)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

/// One element of an exact level-set preimage: an isolated crossing or a
/// plateau segment on which the flux equals the level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelSetItem {
    Point(f64),
    Segment(Interval),
}

impl LevelSetItem {
    /// Representative states used by enumeration: the point itself, or a
    /// plateau's endpoints plus its midpoint.
    pub fn representatives(&self) -> Vec<f64> {
        match *self {
            LevelSetItem::Point(u) => vec![u],
            LevelSetItem::Segment(iv) => vec![iv.lo, 0.5 * (iv.lo + iv.hi), iv.hi],
        }
    }
}

/// Continuous piecewise-linear flux on a closed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearFlux {
    nodes: Vec<(f64, f64)>,
    domain: Interval,
}

impl PiecewiseLinearFlux {
    /// Build from an ordered breakpoint list `(u_i, f_i)`; the `u_i` must be
    /// strictly increasing and span the domain.
    pub fn from_nodes(nodes: Vec<(f64, f64)>) -> Result<Self, FluxError> {
        if nodes.len() < 2 {
            return Err(FluxError::InvalidNodes("need at least two nodes".into()));
        }
        for w in nodes.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(FluxError::InvalidNodes(format!(
                    "breakpoints not strictly increasing at u = {}",
                    w[1].0
                )));
            }
        }
        if nodes.iter().any(|&(u, f)| !u.is_finite() || !f.is_finite()) {
            return Err(FluxError::InvalidNodes("non-finite node".into()));
        }
        let domain = Interval::new(nodes[0].0, nodes[nodes.len() - 1].0)?;
        Ok(Self { nodes, domain })
    }

    /// Chord interpolation of `f` at `n` uniformly spaced nodes.
    pub fn sample(f: impl Fn(f64) -> f64, domain: Interval, n: usize) -> Result<Self, FluxError> {
        if n < 2 {
            return Err(FluxError::InvalidNodes("need at least two nodes".into()));
        }
        let nodes = (0..n)
            .map(|i| {
                let u = domain.lo + (domain.hi - domain.lo) * (i as f64) / ((n - 1) as f64);
                let u = if i == n - 1 { domain.hi } else { u };
                (u, f(u))
            })
            .collect();
        Self::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    fn check_domain(&self, u: f64) -> Result<(), FluxError> {
        if self.domain.contains(u, STATE_TOL) {
            Ok(())
        } else {
            Err(FluxError::OutOfDomain {
                u,
                lo: self.domain.lo,
                hi: self.domain.hi,
            })
        }
    }

    /// Index of the segment `[u_k, u_{k+1}]` containing `u` (clamped).
    fn segment_of(&self, u: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|&(x, _)| x.partial_cmp(&u).unwrap())
        {
            Ok(k) => k.min(self.nodes.len() - 2),
            Err(k) => k.saturating_sub(1).min(self.nodes.len() - 2),
        }
    }

    fn slope(&self, seg: usize) -> f64 {
        let (u0, f0) = self.nodes[seg];
        let (u1, f1) = self.nodes[seg + 1];
        (f1 - f0) / (u1 - u0)
    }

    /// Linear interpolation; exact at nodes.
    pub fn eval(&self, u: f64) -> Result<f64, FluxError> {
        self.check_domain(u)?;
        let u = self.domain.clamp(u);
        let k = self.segment_of(u);
        let (u0, f0) = self.nodes[k];
        if u == u0 {
            return Ok(f0);
        }
        let (u1, f1) = self.nodes[k + 1];
        if u == u1 {
            return Ok(f1);
        }
        Ok(f0 + (f1 - f0) / (u1 - u0) * (u - u0))
    }

    /// Exact minimum of the flux over the closed interval between `a` and `b`.
    pub fn min_on(&self, a: f64, b: f64) -> Result<f64, FluxError> {
        self.extremum_on(a, b, false)
    }

    /// Exact maximum of the flux over the closed interval between `a` and `b`.
    pub fn max_on(&self, a: f64, b: f64) -> Result<f64, FluxError> {
        self.extremum_on(a, b, true)
    }

    fn extremum_on(&self, a: f64, b: f64, want_max: bool) -> Result<f64, FluxError> {
        self.check_domain(a)?;
        self.check_domain(b)?;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut best = self.eval(lo)?;
        let fhi = self.eval(hi)?;
        best = if want_max { best.max(fhi) } else { best.min(fhi) };
        for &(u, f) in &self.nodes {
            if u > lo && u < hi {
                best = if want_max { best.max(f) } else { best.min(f) };
            }
        }
        Ok(best)
    }

    /// Oscillation of the flux between `a` and `b`: max f - min f on the
    /// closed interval between them.
    pub fn osc(&self, a: f64, b: f64) -> Result<f64, FluxError> {
        Ok(self.max_on(a, b)? - self.min_on(a, b)?)
    }

    /// Range of the flux over the whole domain.
    pub fn range(&self) -> Interval {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(_, f) in &self.nodes {
            lo = lo.min(f);
            hi = hi.max(f);
        }
        Interval { lo, hi }
    }

    /// Kruzhkov entropy flux q(z, k) = sign(z-k) (f(z) - f(k)), with
    /// sign(0) = 0.
    pub fn entropy_flux(&self, z: f64, k: f64) -> Result<f64, FluxError> {
        let fz = self.eval(z)?;
        let fk = self.eval(k)?;
        Ok(if z > k {
            fz - fk
        } else if z < k {
            fk - fz
        } else {
            0.0
        })
    }

    /// Godunov numerical flux: min over [uL, uR] when uL <= uR, else max
    /// over [uR, uL].
    pub fn godunov(&self, u_left: f64, u_right: f64) -> Result<f64, FluxError> {
        if u_left <= u_right {
            self.min_on(u_left, u_right)
        } else {
            self.max_on(u_right, u_left)
        }
    }

    /// Signed variation integral `int_a^b |f'(s)| ds` (negative when b < a),
    /// used by the Engquist-Osher flux.
    pub fn variation_between(&self, a: f64, b: f64) -> Result<f64, FluxError> {
        self.check_domain(a)?;
        self.check_domain(b)?;
        let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut tot = 0.0;
        for k in 0..self.nodes.len() - 1 {
            let (u0, _) = self.nodes[k];
            let (u1, _) = self.nodes[k + 1];
            let l = lo.max(u0);
            let h = hi.min(u1);
            if h > l {
                tot += self.slope(k).abs() * (h - l);
            }
        }
        Ok(sign * tot)
    }

    /// Maximum absolute slope over segments intersecting `sub`.
    pub fn lipschitz_bound(&self, sub: Interval) -> Result<f64, FluxError> {
        self.check_domain(sub.lo)?;
        self.check_domain(sub.hi)?;
        let mut best: f64 = 0.0;
        for k in 0..self.nodes.len() - 1 {
            let (u0, _) = self.nodes[k];
            let (u1, _) = self.nodes[k + 1];
            // A degenerate sub-interval still picks up its carrier segments.
            if u1 >= sub.lo - STATE_TOL && u0 <= sub.hi + STATE_TOL {
                best = best.max(self.slope(k).abs());
            }
        }
        Ok(best)
    }

    /// Singular mapping V(u): primitive of the indicator of the set where
    /// the flux is non-constant, integrated from the left domain endpoint.
    /// Nondecreasing, 1-Lipschitz, flat exactly on flux plateaus.
    pub fn singular_map(&self, u: f64) -> Result<f64, FluxError> {
        self.check_domain(u)?;
        let u = self.domain.clamp(u);
        let mut v = 0.0;
        for k in 0..self.nodes.len() - 1 {
            let (u0, f0) = self.nodes[k];
            let (u1, f1) = self.nodes[k + 1];
            if u <= u0 {
                break;
            }
            if f1 != f0 {
                v += u.min(u1) - u0;
            }
        }
        Ok(v)
    }

    /// Exact preimage f^{-1}({s}) as an ordered list of points and plateau
    /// segments. Empty when `s` is outside the range.
    pub fn level_set(&self, s: f64) -> Vec<LevelSetItem> {
        let mut items: Vec<LevelSetItem> = Vec::new();
        let push_point = |items: &mut Vec<LevelSetItem>, u: f64| {
            match items.last() {
                Some(LevelSetItem::Point(p)) if (p - u).abs() <= STATE_TOL => return,
                Some(LevelSetItem::Segment(iv)) if u <= iv.hi + STATE_TOL => return,
                _ => {}
            }
            items.push(LevelSetItem::Point(u));
        };
        for k in 0..self.nodes.len() - 1 {
            let (u0, f0) = self.nodes[k];
            let (u1, f1) = self.nodes[k + 1];
            let flat = f0 == f1;
            if flat {
                if (f0 - s).abs() <= STATE_TOL {
                    // Merge plateaus that continue a previous touch.
                    match items.last_mut() {
                        Some(LevelSetItem::Segment(iv)) if (iv.hi - u0).abs() <= STATE_TOL => {
                            iv.hi = u1;
                        }
                        Some(LevelSetItem::Point(p)) if (*p - u0).abs() <= STATE_TOL => {
                            *items.last_mut().unwrap() =
                                LevelSetItem::Segment(Interval { lo: u0, hi: u1 });
                        }
                        _ => items.push(LevelSetItem::Segment(Interval { lo: u0, hi: u1 })),
                    }
                }
                continue;
            }
            let (fl, fh) = (f0.min(f1), f0.max(f1));
            if s < fl - STATE_TOL || s > fh + STATE_TOL {
                continue;
            }
            let root = if (f0 - s).abs() <= STATE_TOL {
                u0
            } else if (f1 - s).abs() <= STATE_TOL {
                u1
            } else {
                u0 + (s - f0) / (f1 - f0) * (u1 - u0)
            };
            push_point(&mut items, root.clamp(u0, u1));
        }
        items
    }

    /// True on `[a, b]` (or the open/half-open variant) of `f(z) > s`.
    /// Exact for piecewise-linear fluxes.
    pub fn strictly_above(&self, s: f64, a: f64, b: f64, incl_a: bool, incl_b: bool) -> bool {
        self.strict_compare(s, a, b, incl_a, incl_b, true)
    }

    /// True on `[a, b]` (or the open/half-open variant) of `f(z) < s`.
    pub fn strictly_below(&self, s: f64, a: f64, b: f64, incl_a: bool, incl_b: bool) -> bool {
        self.strict_compare(s, a, b, incl_a, incl_b, false)
    }

    fn strict_compare(&self, s: f64, a: f64, b: f64, incl_a: bool, incl_b: bool, above: bool) -> bool {
        debug_assert!(a <= b);
        let cmp = |f: f64| if above { f > s } else { f < s };
        let f = |u: f64| self.eval(u).expect("scan endpoint in domain");
        if a == b {
            return !(incl_a || incl_b) || cmp(f(a));
        }
        if incl_a && !cmp(f(a)) {
            return false;
        }
        if incl_b && !cmp(f(b)) {
            return false;
        }
        // Walk the linear pieces; on each piece strict comparison on the open
        // part holds iff both endpoint values pass weakly and the piece is not
        // flat at the level.
        let mut breaks: Vec<f64> = vec![a];
        for &(u, _) in &self.nodes {
            if u > a && u < b {
                breaks.push(u);
            }
        }
        breaks.push(b);
        for (i, w) in breaks.windows(2).enumerate() {
            let (p, q) = (w[0], w[1]);
            let (fp, fq) = (f(p), f(q));
            // Interior breakpoints must pass strictly.
            if i > 0 && !cmp(fp) {
                return false;
            }
            let weak = |v: f64| if above { v >= s } else { v <= s };
            if !(weak(fp) && weak(fq)) {
                return false;
            }
            if fp == s && fq == s {
                return false; // flat at the level
            }
            let _ = q;
        }
        true
    }

    /// Largest `z` in `[from, cap]` such that `f >= c` holds on all of
    /// `[from, z]` (smaller-side variant with `f <= c` when `above` is false).
    /// Returns `from` itself when the condition fails immediately.
    pub fn extent_holding(&self, from: f64, cap: f64, c: f64, above: bool, tol: f64) -> f64 {
        debug_assert!(from <= cap);
        let ok = |v: f64| if above { v >= c - tol } else { v <= c + tol };
        let f = |u: f64| self.eval(u).expect("scan endpoint in domain");
        if !ok(f(from)) {
            return from;
        }
        let mut z = from;
        let mut breaks: Vec<f64> = vec![from];
        for &(u, _) in &self.nodes {
            if u > from && u < cap {
                breaks.push(u);
            }
        }
        breaks.push(cap);
        for w in breaks.windows(2) {
            let (p, q) = (w[0], w[1]);
            let (fp, fq) = (f(p), f(q));
            if ok(fq) {
                z = q;
                continue;
            }
            // Linear crossing of the threshold inside (p, q).
            let thresh = if above { c - tol } else { c + tol };
            let t = (thresh - fp) / (fq - fp);
            z = p + t.clamp(0.0, 1.0) * (q - p);
            return z;
        }
        z
    }

    /// Mirror of [`extent_holding`]: smallest `z` in `[cap, to]` such that the
    /// condition holds on all of `[z, to]`.
    pub fn extent_holding_back(&self, to: f64, cap: f64, c: f64, above: bool, tol: f64) -> f64 {
        debug_assert!(cap <= to);
        let ok = |v: f64| if above { v >= c - tol } else { v <= c + tol };
        let f = |u: f64| self.eval(u).expect("scan endpoint in domain");
        if !ok(f(to)) {
            return to;
        }
        let mut z = to;
        let mut breaks: Vec<f64> = vec![cap];
        for &(u, _) in &self.nodes {
            if u > cap && u < to {
                breaks.push(u);
            }
        }
        breaks.push(to);
        for w in breaks.windows(2).rev() {
            let (p, q) = (w[0], w[1]);
            let (fp, fq) = (f(p), f(q));
            if ok(fp) {
                z = p;
                continue;
            }
            let thresh = if above { c - tol } else { c + tol };
            let t = (thresh - fq) / (fp - fq);
            z = q + t.clamp(0.0, 1.0) * (p - q);
            return z;
        }
        z
    }

    /// Flux values at local extrema (slope sign changes) and domain
    /// endpoints. These are the only levels at which Riemann fans can change
    /// structure.
    pub fn critical_levels(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut levels = vec![self.nodes[0].1, self.nodes[n - 1].1];
        for k in 1..n - 1 {
            let sl = self.slope(k - 1);
            let sr = self.slope(k);
            if sl.signum() != sr.signum() || sl == 0.0 || sr == 0.0 {
                levels.push(self.nodes[k].1);
            }
        }
        levels
    }

    /// Interval of arguments attaining the global minimum (a plateau when the
    /// minimum is flat).
    pub fn argmin_interval(&self) -> Interval {
        self.arg_extremum(false)
    }

    /// Interval of arguments attaining the global maximum.
    pub fn argmax_interval(&self) -> Interval {
        self.arg_extremum(true)
    }

    fn arg_extremum(&self, want_max: bool) -> Interval {
        let best = self
            .nodes
            .iter()
            .map(|&(_, f)| f)
            .fold(if want_max { f64::NEG_INFINITY } else { f64::INFINITY }, |a, b| {
                if want_max {
                    a.max(b)
                } else {
                    a.min(b)
                }
            });
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(u, f) in &self.nodes {
            if (f - best).abs() <= STATE_TOL {
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
        Interval { lo, hi }
    }

    /// Nonincreasing-then-nondecreasing shape test (valley).
    pub fn is_valley(&self) -> bool {
        self.is_single_switch(false)
    }

    /// Nondecreasing-then-nonincreasing shape test (bell).
    pub fn is_bell(&self) -> bool {
        self.is_single_switch(true)
    }

    fn is_single_switch(&self, up_first: bool) -> bool {
        let mut phase = 0; // 0: first branch, 1: second branch
        for k in 0..self.nodes.len() - 1 {
            let s = self.slope(k);
            let (first_ok, second_ok) = if up_first {
                (s >= 0.0, s <= 0.0)
            } else {
                (s <= 0.0, s >= 0.0)
            };
            match phase {
                0 if first_ok => {}
                0 if second_ok => phase = 1,
                1 if second_ok => {}
                _ => return false,
            }
        }
        true
    }

    /// True when the flux has no plateau segment.
    pub fn strictly_nonflat(&self) -> bool {
        (0..self.nodes.len() - 1).all(|k| self.slope(k) != 0.0)
    }
}

/// The discontinuous composite flux: `left` for x < 0, `right` for x > 0,
/// sharing one state domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxPair {
    pub left: PiecewiseLinearFlux,
    pub right: PiecewiseLinearFlux,
}

impl FluxPair {
    pub fn new(left: PiecewiseLinearFlux, right: PiecewiseLinearFlux) -> Result<Self, FluxError> {
        let (dl, dr) = (left.domain(), right.domain());
        if (dl.lo - dr.lo).abs() > STATE_TOL || (dl.hi - dr.hi).abs() > STATE_TOL {
            return Err(FluxError::DomainMismatch(dl.lo, dl.hi, dr.lo, dr.hi));
        }
        Ok(Self { left, right })
    }

    /// Same flux on both sides.
    pub fn homogeneous(f: PiecewiseLinearFlux) -> Self {
        Self {
            left: f.clone(),
            right: f,
        }
    }

    pub fn domain(&self) -> Interval {
        self.left.domain()
    }

    /// Node-identical left and right fluxes (no interface discontinuity).
    pub fn is_homogeneous(&self) -> bool {
        self.left == self.right
    }

    /// Composite flux at a point: the side is chosen by the sign of `x`.
    pub fn eval_at(&self, x: f64, u: f64) -> Result<f64, FluxError> {
        if x < 0.0 {
            self.left.eval(u)
        } else {
            self.right.eval(u)
        }
    }

    /// States where the two flux graphs cross, with the common value.
    pub fn crossings(&self) -> Vec<(f64, f64)> {
        let mut breaks: Vec<f64> = self
            .left
            .nodes()
            .iter()
            .chain(self.right.nodes())
            .map(|&(u, _)| u)
            .collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a - *b).abs() <= STATE_TOL);
        let mut out: Vec<(f64, f64)> = Vec::new();
        let push = |out: &mut Vec<(f64, f64)>, u: f64, s: f64| {
            if out
                .last()
                .map_or(true, |&(p, _)| (p - u).abs() > STATE_TOL)
            {
                out.push((u, s));
            }
        };
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let da = self.left.eval(a).unwrap() - self.right.eval(a).unwrap();
            let db = self.left.eval(b).unwrap() - self.right.eval(b).unwrap();
            if da.abs() <= STATE_TOL {
                push(&mut out, a, self.left.eval(a).unwrap());
            }
            if da * db < 0.0 {
                let t = da / (da - db);
                let u = a + t * (b - a);
                push(&mut out, u, self.left.eval(u).unwrap());
            }
            if db.abs() <= STATE_TOL && (b - breaks[breaks.len() - 1]).abs() <= STATE_TOL {
                push(&mut out, b, self.left.eval(b).unwrap());
            }
        }
        out
    }

    /// Intersection of the two flux ranges; `None` when disjoint (then no
    /// weak interface coupling exists at all).
    pub fn common_range(&self) -> Option<Interval> {
        self.left.range().intersect(&self.right.range())
    }
}
