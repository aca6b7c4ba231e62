//! Exact Riemann solvers.
//!
//! The classical one-flux solver builds the self-similar entropy solution
//! from the convex (data increasing) or concave (data decreasing) envelope of
//! the piecewise-linear flux between the data; the construction is exact.
//! The interface solver resolves a Riemann datum across the flux
//! discontinuity by matching one-sided wave fans against an admissibility
//! germ: a left fan of nonpositive speeds into a germ pair, then a right fan
//! of nonnegative speeds out of it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flux::{FluxError, FluxPair, Interval, PiecewiseLinearFlux};
use crate::germ::{GermSample, StatePair};
use crate::{SPEED_TOL, STATE_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiemannError {
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error(transparent)]
    Germ(#[from] crate::germ::GermError),
    #[error(
        "no germ pair resolves the datum ({u_minus}, {u_plus}) at resolution {resolution}; \
         the germ is incomplete there or the sample is under-resolved"
    )]
    Incomplete {
        u_minus: f64,
        u_plus: f64,
        resolution: usize,
    },
    #[error("germ pairs resolve ({u_minus}, {u_plus}) with conflicting interface fluxes {values:?}")]
    AmbiguousFlux {
        u_minus: f64,
        u_plus: f64,
        values: Vec<f64>,
    },
}

/// Interface side selector for one-sided wave-speed domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveKind {
    Shock,
    Rarefaction,
    Contact,
}

/// One wave of a self-similar fan. `states` runs from the value left of the
/// wave to the value right of it; `speeds` are the jump speeds in between
/// (a single entry for shocks and contacts, the envelope kink speeds for
/// rarefactions through a piecewise-linear flux).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub kind: WaveKind,
    pub states: Vec<f64>,
    pub speeds: Vec<f64>,
}

impl Wave {
    pub fn speed_lo(&self) -> f64 {
        self.speeds[0]
    }

    pub fn speed_hi(&self) -> f64 {
        *self.speeds.last().unwrap()
    }

    pub fn value_left(&self) -> f64 {
        self.states[0]
    }

    pub fn value_right(&self) -> f64 {
        *self.states.last().unwrap()
    }
}

/// Self-similar solution of a classical Riemann problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannFan {
    pub left: f64,
    pub right: f64,
    pub waves: Vec<Wave>,
}

impl RiemannFan {
    /// Evaluate at similarity variable `xi = x / t`; at a jump speed exactly,
    /// the value right of the jump is returned.
    pub fn eval(&self, xi: f64) -> f64 {
        eval_fan_biased(self, xi, true)
    }

    /// Evaluate at `(t, x)`, `t > 0`.
    pub fn eval_at(&self, t: f64, x: f64) -> f64 {
        debug_assert!(t > 0.0);
        self.eval(x / t)
    }

    pub fn speed_lo(&self) -> f64 {
        self.waves.first().map_or(f64::INFINITY, Wave::speed_lo)
    }

    pub fn speed_hi(&self) -> f64 {
        self.waves.last().map_or(f64::NEG_INFINITY, Wave::speed_hi)
    }
}

fn eval_fan_biased(fan: &RiemannFan, xi: f64, right_bias: bool) -> f64 {
    let mut cur = fan.left;
    for w in &fan.waves {
        if xi < w.speed_lo() || (!right_bias && xi == w.speed_lo()) {
            return cur;
        }
        if xi <= w.speed_hi() {
            let crossed = if right_bias {
                w.speeds.iter().filter(|&&s| s <= xi).count()
            } else {
                w.speeds.iter().filter(|&&s| s < xi).count()
            };
            return w.states[crossed];
        }
        cur = w.value_right();
    }
    cur
}

/// Exact classical Riemann solver for a piecewise-linear flux.
///
/// Data `u_minus < u_plus` use the lower convex envelope of the flux on
/// `[u_minus, u_plus]`, decreasing data the upper concave envelope; wave
/// speeds are the envelope slopes, so the fan is monotone in `x / t`.
pub fn solve_classical(
    flux: &PiecewiseLinearFlux,
    u_minus: f64,
    u_plus: f64,
) -> Result<RiemannFan, FluxError> {
    let fm = flux.eval(u_minus)?;
    let fp = flux.eval(u_plus)?;
    let _ = (fm, fp);
    if (u_minus - u_plus).abs() <= STATE_TOL {
        return Ok(RiemannFan {
            left: u_minus,
            right: u_plus,
            waves: Vec::new(),
        });
    }
    let increasing = u_minus < u_plus;
    let (a, b) = if increasing {
        (u_minus, u_plus)
    } else {
        (u_plus, u_minus)
    };

    // graph points of the flux restricted to [a, b]
    let mut pts: Vec<(f64, f64)> = vec![(a, flux.eval(a)?)];
    for &(u, f) in flux.nodes() {
        if u > a + STATE_TOL && u < b - STATE_TOL {
            pts.push((u, f));
        }
    }
    pts.push((b, flux.eval(b)?));

    // envelope by slope-monotone stack
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let s1 = slope(hull[hull.len() - 2], hull[hull.len() - 1]);
            let s2 = slope(hull[hull.len() - 1], p);
            let pop = if increasing { s1 >= s2 } else { s1 <= s2 };
            if pop {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    // classify envelope edges: an edge coinciding with the flux graph carries
    // characteristics (contact / rarefaction fan), a strictly separated chord
    // is a shock
    let coincident: Vec<bool> = hull
        .windows(2)
        .map(|e| edge_on_flux(flux, e[0], e[1]))
        .collect();

    let mut waves: Vec<Wave> = Vec::new();
    // traverse in xi order: hull order for increasing data, reversed otherwise
    let edge_order: Vec<usize> = if increasing {
        (0..coincident.len()).collect()
    } else {
        (0..coincident.len()).rev().collect()
    };
    let mut i = 0usize;
    while i < edge_order.len() {
        let k = edge_order[i];
        if !coincident[k] {
            let (p, q) = (hull[k], hull[k + 1]);
            let (lv, rv) = if increasing { (p, q) } else { (q, p) };
            waves.push(Wave {
                kind: WaveKind::Shock,
                states: vec![lv.0, rv.0],
                speeds: vec![slope(p, q)],
            });
            i += 1;
            continue;
        }
        // merge a maximal run of flux-coincident edges into one fan
        let mut j = i;
        while j + 1 < edge_order.len() && coincident[edge_order[j + 1]] {
            j += 1;
        }
        let (k_first, k_last) = if increasing {
            (edge_order[i], edge_order[j])
        } else {
            (edge_order[j], edge_order[i])
        };
        let (u_lo, u_hi) = (hull[k_first].0, hull[k_last + 1].0);
        // the flux polyline between u_lo and u_hi
        let mut states: Vec<f64> = vec![u_lo];
        for &(u, _) in flux.nodes() {
            if u > u_lo + STATE_TOL && u < u_hi - STATE_TOL {
                states.push(u);
            }
        }
        states.push(u_hi);
        if !increasing {
            states.reverse();
        }
        let mut speeds: Vec<f64> = Vec::with_capacity(states.len() - 1);
        for w in states.windows(2) {
            let (ua, ub) = (w[0], w[1]);
            let fa = flux.eval(ua)?;
            let fb = flux.eval(ub)?;
            speeds.push((fb - fa) / (ub - ua));
        }
        let kind = if speeds.len() == 1 {
            WaveKind::Contact
        } else {
            WaveKind::Rarefaction
        };
        waves.push(Wave { kind, states, speeds });
        i = j + 1;
    }

    Ok(RiemannFan {
        left: u_minus,
        right: u_plus,
        waves,
    })
}

fn slope(p: (f64, f64), q: (f64, f64)) -> f64 {
    (q.1 - p.1) / (q.0 - p.0)
}

fn edge_on_flux(flux: &PiecewiseLinearFlux, p: (f64, f64), q: (f64, f64)) -> bool {
    let scale = 1.0 + p.1.abs().max(q.1.abs());
    for &(u, f) in flux.nodes() {
        if u > p.0 + STATE_TOL && u < q.0 - STATE_TOL {
            let chord = p.1 + (q.1 - p.1) / (q.0 - p.0) * (u - p.0);
            if (f - chord).abs() > 1e-12 * scale {
                return false;
            }
        }
    }
    true
}

/// One-sided wave-speed domain: the states joinable to `ustar` by a fan of
/// nonpositive (left) / nonnegative (right) speeds. For a piecewise-linear
/// flux this is a single closed interval around `ustar`, widened by the
/// speed tolerance so zero-speed shocks stay inside the fans.
pub fn theta_domain(
    flux: &PiecewiseLinearFlux,
    side: Side,
    ustar: f64,
) -> Result<Vec<Interval>, FluxError> {
    let s = flux.eval(ustar)?;
    let dom = flux.domain();
    let (lo, hi) = match side {
        Side::Left => (
            // u < ustar joins with speeds <= 0 iff f >= f(ustar) up to ustar
            flux.extent_holding_back(ustar, dom.lo, s, true, SPEED_TOL),
            // u > ustar joins with speeds <= 0 iff f <= f(ustar) from ustar
            flux.extent_holding(ustar, dom.hi, s, false, SPEED_TOL),
        ),
        Side::Right => (
            flux.extent_holding_back(ustar, dom.lo, s, false, SPEED_TOL),
            flux.extent_holding(ustar, dom.hi, s, true, SPEED_TOL),
        ),
    };
    Ok(vec![Interval { lo, hi }])
}

/// The interface resolution of a Riemann datum: germ pair, one-sided fans
/// and the single interface flux value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSolution {
    pub ul: f64,
    pub ur: f64,
    pub left_fan: RiemannFan,
    pub right_fan: RiemannFan,
    pub interface_flux: f64,
}

impl InterfaceSolution {
    pub fn pair(&self) -> StatePair {
        StatePair::new(self.ul, self.ur)
    }

    /// Evaluate at `(t, x)`, `t > 0`; the interface itself reports the right
    /// trace.
    pub fn eval_at(&self, t: f64, x: f64) -> f64 {
        debug_assert!(t > 0.0);
        if x < 0.0 {
            self.left_fan.eval(x / t)
        } else {
            self.right_fan.eval(x / t)
        }
    }
}

/// Solve the interface Riemann problem against a germ.
///
/// Candidate trace pairs come from the sample itself and, when the sample has
/// a catalog origin, from the exact level-set geometry of the fluxes (data
/// levels, extremum levels, flux crossings and connection levels). A
/// candidate matches when the datum lies in both one-sided wave-speed
/// domains and the pair belongs to the germ's maximal extension (Riemann
/// trace pairs live in the dual germ); all matches must agree on the
/// interface flux.
pub fn solve_interface(
    sample: &GermSample,
    u_minus: f64,
    u_plus: f64,
) -> Result<InterfaceSolution, RiemannError> {
    let fl = &sample.fluxes.left;
    let fr = &sample.fluxes.right;
    let rh_tol = sample.rh_tol();
    let f_um = fl.eval(u_minus)?;
    let f_up = fr.eval(u_plus)?;
    let matcher = sample.origin().map(|s| s.matching_spec());

    let mut candidates: Vec<StatePair> = Vec::new();
    // sample pairs are always candidates
    candidates.extend(sample.pairs().iter().copied());
    // structural candidates from the exact geometry
    if matcher.is_some() {
        let mut levels = vec![f_um, f_up];
        levels.extend(fl.critical_levels());
        levels.extend(fr.critical_levels());
        if !sample.fluxes.is_homogeneous() {
            levels.extend(sample.fluxes.crossings().into_iter().map(|(_, s)| s));
        }
        if let Some(spec) = &matcher {
            levels.extend(spec.structural_levels());
        }
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup_by(|a, b| (*a - *b).abs() <= STATE_TOL);
        for &s in &levels {
            let mut ls = crate::germ::level_candidates(fl, s);
            if (f_um - s).abs() <= rh_tol {
                ls.push(u_minus);
            }
            let mut rs = crate::germ::level_candidates(fr, s);
            if (f_up - s).abs() <= rh_tol {
                rs.push(u_plus);
            }
            for &ul in &ls {
                for &ur in &rs {
                    candidates.push(StatePair::new(ul, ur));
                }
            }
        }
    }

    let mut matches: Vec<(StatePair, f64)> = Vec::new();
    for p in candidates {
        if matches.iter().any(|(q, _)| q.close_to(&p, STATE_TOL)) {
            continue;
        }
        let tl = theta_domain(fl, Side::Left, p.ul)?;
        if !tl.iter().any(|iv| iv.contains(u_minus, SPEED_TOL)) {
            continue;
        }
        let tr = theta_domain(fr, Side::Right, p.ur)?;
        if !tr.iter().any(|iv| iv.contains(u_plus, SPEED_TOL)) {
            continue;
        }
        let admissible = match &matcher {
            Some(spec) => spec.contains(p)?,
            None => sample.member(p)?,
        };
        if !admissible {
            continue;
        }
        let flux_val = 0.5 * (fl.eval(p.ul)? + fr.eval(p.ur)?);
        matches.push((p, flux_val));
    }

    if matches.is_empty() {
        return Err(RiemannError::Incomplete {
            u_minus,
            u_plus,
            resolution: sample.resolution,
        });
    }
    let fmin = matches.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
    let fmax = matches
        .iter()
        .map(|&(_, s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    if fmax - fmin > 10.0 * rh_tol {
        let mut values: Vec<f64> = matches.iter().map(|&(_, s)| s).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup_by(|a, b| (*a - *b).abs() <= 10.0 * rh_tol);
        return Err(RiemannError::AmbiguousFlux {
            u_minus,
            u_plus,
            values,
        });
    }

    // deterministic representative: the closest pair to the datum whose
    // one-sided fans satisfy the speed-sign conditions (the tolerance in the
    // theta containment can admit pairs differing from the datum by a
    // negligible jump at a non-negligible speed; prefer a clean witness)
    matches.sort_by(|(p, _), (q, _)| {
        let dp = (p.ul - u_minus).abs() + (p.ur - u_plus).abs();
        let dq = (q.ul - u_minus).abs() + (q.ur - u_plus).abs();
        dp.partial_cmp(&dq)
            .unwrap()
            .then(p.ul.partial_cmp(&q.ul).unwrap())
            .then(p.ur.partial_cmp(&q.ur).unwrap())
    });
    let mut chosen: Option<(StatePair, f64, RiemannFan, RiemannFan)> = None;
    for (p, s) in &matches {
        let left_fan = solve_classical(fl, u_minus, p.ul)?;
        let right_fan = solve_classical(fr, p.ur, u_plus)?;
        let clean = (left_fan.waves.is_empty() || left_fan.speed_hi() <= SPEED_TOL)
            && (right_fan.waves.is_empty() || right_fan.speed_lo() >= -SPEED_TOL);
        if clean {
            chosen = Some((*p, *s, left_fan, right_fan));
            break;
        }
        if chosen.is_none() {
            chosen = Some((*p, *s, left_fan, right_fan));
        }
    }
    let (pair, flux_value, left_fan, right_fan) = chosen.unwrap();

    Ok(InterfaceSolution {
        ul: pair.ul,
        ur: pair.ur,
        left_fan,
        right_fan,
        interface_flux: flux_value,
    })
}

/// Traces at the interface of the classical (single-flux) Riemann solution:
/// values just left and just right of `xi = 0`, with zero-speed jumps kept
/// between them.
pub fn classical_interface_pair(
    flux: &PiecewiseLinearFlux,
    u_minus: f64,
    u_plus: f64,
) -> Result<(f64, f64), FluxError> {
    let fan = solve_classical(flux, u_minus, u_plus)?;
    let ul = eval_fan_biased(&fan, 0.0, false);
    let ur = eval_fan_biased(&fan, 0.0, true);
    Ok((ul, ur))
}

/// Rankine-Hugoniot partner of a connection endpoint for bell-shaped right
/// fluxes: the preimage of `f_l(a)` on the increasing branch of `f_r`.
pub fn connection_partner(fluxes: &FluxPair, a: f64) -> Result<f64, FluxError> {
    let s = fluxes.left.eval(a)?;
    let cands = crate::germ::level_candidates(&fluxes.right, s);
    cands
        .first()
        .copied()
        .ok_or(FluxError::OutOfDomain {
            u: s,
            lo: fluxes.right.range().lo,
            hi: fluxes.right.range().hi,
        })
}

/// Valley-flux variant of [`connection_partner`]: the preimage on the
/// increasing branch is the largest one.
pub fn connection_partner_valley(fluxes: &FluxPair, a: f64) -> Result<f64, FluxError> {
    let s = fluxes.left.eval(a)?;
    let cands = crate::germ::level_candidates(&fluxes.right, s);
    cands
        .last()
        .copied()
        .ok_or(FluxError::OutOfDomain {
            u: s,
            lo: fluxes.right.range().lo,
            hi: fluxes.right.range().hi,
        })
}
