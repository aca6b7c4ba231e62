//! Viscous regularizations of the interface problem.
//!
//! Standing-wave profiles decide membership in the vanishing-viscosity germ
//! by integrating the autonomous profile equation W' = f(W) - s between the
//! two trace states; smoothed-flux profiles do the same for a continuous
//! interpolation of the flux discontinuity. The adapted viscosity builds the
//! piecewise-affine diffusion a(x, u) whose steady state is a prescribed
//! connection, and the explicit parabolic solver marches
//! u_t + f(x,u)_x = eps a(x,u)_xx with the scheme's convective fluxes plus a
//! central second difference of a.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flux::{FluxError, FluxPair, Interval, PiecewiseLinearFlux};
use crate::germ::{GermError, GermKind, GermSpec, StatePair};
use crate::scheme::{self, BulkFlux, GridSolution, InitialData, MeshConfig, SchemeError};
use crate::{RH_TOL, STATE_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ViscousError {
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("pair ({ul}, {ur}) violates Rankine-Hugoniot: f_l = {fl}, f_r = {fr}")]
    RhViolation { ul: f64, ur: f64, fl: f64, fr: f64 },
    #[error("smoothing ratio delta/eps = {ratio} exceeds the profile bound 2/L = {bound}")]
    CflRatioViolated { ratio: f64, bound: f64 },
    #[error("connection endpoint {a} makes a viscosity segment flat; perturb kappa")]
    DegenerateSlope { a: f64 },
    #[error("explicit march rejected: {0}")]
    StabilityViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileVerdict {
    Connects,
    Diverges,
    Inconclusive,
}

/// A computed profile trace with its verdict. `limits` holds the values at
/// the left and right ends of the stored abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub xi: Vec<f64>,
    pub w: Vec<f64>,
    pub verdict: ProfileVerdict,
    pub limits: (f64, f64),
}

/// Fixed-step profile integration; work per profile is bounded by the stated
/// step count regardless of span.
const ODE_STEPS: usize = 100_000;
const ODE_SAMPLES: usize = 2_001;

enum OrientationStatus {
    Connected,
    Diverged,
    Stalled(f64), // final distance to the target state
}

struct OrientationResult {
    xi: Vec<f64>,
    w: Vec<f64>,
    status: OrientationStatus,
}

/// Integrate w' = rhs(x, w) from `x0` over a span of `len` in direction
/// `dir` (+1/-1), clamping evaluation into `interval` and declaring
/// divergence when the state leaves it by more than `tol`.
fn integrate_profile(
    rhs: impl Fn(f64, f64) -> f64,
    x0: f64,
    len: f64,
    dir: f64,
    w0: f64,
    target: f64,
    interval: Interval,
    tol: f64,
) -> OrientationResult {
    let h = dir * len / ODE_STEPS as f64;
    let stride = (ODE_STEPS / (ODE_SAMPLES - 1)).max(1);
    let clamp = |w: f64| interval.clamp(w);
    let mut w = w0;
    let mut x = x0;
    let mut xi = vec![x];
    let mut ws = vec![clamp(w)];
    let mut diverged = false;
    for k in 0..ODE_STEPS {
        let k1 = rhs(x, clamp(w));
        let k2 = rhs(x + 0.5 * h, clamp(w + 0.5 * h * k1));
        let k3 = rhs(x + 0.5 * h, clamp(w + 0.5 * h * k2));
        let k4 = rhs(x + h, clamp(w + h * k3));
        w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        x = x0 + dir * len * ((k + 1) as f64) / ODE_STEPS as f64;
        if (w - clamp(w)).abs() > tol {
            diverged = true;
            xi.push(x);
            ws.push(clamp(w));
            break;
        }
        if (k + 1) % stride == 0 || k + 1 == ODE_STEPS {
            xi.push(x);
            ws.push(clamp(w));
        }
    }
    if dir < 0.0 {
        xi.reverse();
        ws.reverse();
    }
    let status = if diverged {
        OrientationStatus::Diverged
    } else if (w - target).abs() <= tol {
        OrientationStatus::Connected
    } else {
        OrientationStatus::Stalled((w - target).abs())
    };
    OrientationResult { xi, w: ws, status }
}

fn combine_orientations(results: Vec<OrientationResult>) -> Profile {
    let mut best: Option<(usize, f64)> = None;
    let mut all_diverged = true;
    let mut connected: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        match r.status {
            OrientationStatus::Connected => {
                if connected.is_none() {
                    connected = Some(i);
                }
                all_diverged = false;
            }
            OrientationStatus::Stalled(d) => {
                all_diverged = false;
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            OrientationStatus::Diverged => {}
        }
    }
    let (idx, verdict) = match connected {
        Some(i) => (i, ProfileVerdict::Connects),
        None if all_diverged => (0, ProfileVerdict::Diverges),
        None => (best.map_or(0, |(i, _)| i), ProfileVerdict::Inconclusive),
    };
    let r = &results[idx];
    Profile {
        xi: r.xi.clone(),
        w: r.w.clone(),
        verdict,
        limits: (*r.w.first().unwrap(), *r.w.last().unwrap()),
    }
}

fn check_rh(fluxes: &FluxPair, pair: StatePair) -> Result<f64, ViscousError> {
    let fl = fluxes.left.eval(pair.ul)?;
    let fr = fluxes.right.eval(pair.ur)?;
    if (fl - fr).abs() > RH_TOL {
        return Err(ViscousError::RhViolation {
            ul: pair.ul,
            ur: pair.ur,
            fl,
            fr,
        });
    }
    Ok(0.5 * (fl + fr))
}

/// The trace states are equilibria of the profile equation, so seeds are
/// nudged slightly into the interior; a connecting orbit is translation
/// invariant and unaffected, a non-connecting one still fails.
const SEED_NUDGE: f64 = 0.01;

/// Standing-wave profile for a trace pair: integrate W' = f_l(W) - s
/// backward from W(0) = u_r on xi < 0, and the right-side variant
/// W' = f_r(W) - s forward from W(0) = u_l; the pair connects when either
/// orientation reaches the opposite state within `profile_tol` at the end of
/// the span. Profiles are clamped to the pair interval.
pub fn standing_wave(
    fluxes: &FluxPair,
    pair: StatePair,
    x_span: f64,
    profile_tol: f64,
) -> Result<Profile, ViscousError> {
    let s = check_rh(fluxes, pair)?;
    if (pair.ul - pair.ur).abs() <= STATE_TOL {
        let xi = vec![-x_span, 0.0, x_span];
        let w = vec![pair.ul; 3];
        return Ok(Profile {
            xi,
            w,
            verdict: ProfileVerdict::Connects,
            limits: (pair.ul, pair.ur),
        });
    }
    let interval = Interval {
        lo: pair.ul.min(pair.ur),
        hi: pair.ul.max(pair.ur),
    };
    let dom = fluxes.domain();
    let fl = fluxes.left.clone();
    let fr = fluxes.right.clone();
    let nudge = SEED_NUDGE * (pair.ul - pair.ur);
    let left = integrate_profile(
        |_, w| fl.eval(dom.clamp(w)).unwrap() - s,
        0.0,
        x_span,
        -1.0,
        pair.ur + nudge,
        pair.ul,
        interval,
        profile_tol,
    );
    let right = integrate_profile(
        |_, w| fr.eval(dom.clamp(w)).unwrap() - s,
        0.0,
        x_span,
        1.0,
        pair.ul - nudge,
        pair.ur,
        interval,
        profile_tol,
    );
    Ok(combine_orientations(vec![left, right]))
}

/// Stationary profile of the smoothed-flux regularization: solve
/// eps U' = delta (F(y, U) - s) with the linear blend
/// F(y, .) = alpha(y) f_l + (1 - alpha(y)) f_r, alpha(y) = clamp((1-y)/2, 0, 1),
/// backward from U(1) = u_r (and the mirrored variant). Requires
/// delta/eps <= 2/L with L the Lipschitz bound on the pair interval.
/// Reported abscissae are rescaled by delta/eps so they are comparable with
/// [`standing_wave`] profiles.
pub fn smoothed_profile(
    fluxes: &FluxPair,
    pair: StatePair,
    eps: f64,
    delta: f64,
    x_span: f64,
    profile_tol: f64,
) -> Result<Profile, ViscousError> {
    let s = check_rh(fluxes, pair)?;
    let interval = Interval {
        lo: pair.ul.min(pair.ur),
        hi: pair.ul.max(pair.ur),
    };
    let l = fluxes
        .left
        .lipschitz_bound(interval)?
        .max(fluxes.right.lipschitz_bound(interval)?);
    let ratio = delta / eps;
    if l > 0.0 && ratio > 2.0 / l + 1e-12 {
        return Err(ViscousError::CflRatioViolated {
            ratio,
            bound: 2.0 / l,
        });
    }
    let dom = fluxes.domain();
    let fl = fluxes.left.clone();
    let fr = fluxes.right.clone();
    let blend = move |y: f64, w: f64| -> f64 {
        let a = ((1.0 - y) / 2.0).clamp(0.0, 1.0);
        let wl = dom.clamp(w);
        a * fl.eval(wl).unwrap() + (1.0 - a) * fr.eval(wl).unwrap()
    };
    let b1 = blend.clone();
    let nudge = SEED_NUDGE * (pair.ul - pair.ur);
    let left = integrate_profile(
        move |y, w| ratio * (b1(y, w) - s),
        1.0,
        1.0 + x_span,
        -1.0,
        pair.ur + nudge,
        pair.ul,
        interval,
        profile_tol,
    );
    let right = integrate_profile(
        move |y, w| ratio * (blend(y, w) - s),
        -1.0,
        1.0 + x_span,
        1.0,
        pair.ul - nudge,
        pair.ur,
        interval,
        profile_tol,
    );
    let mut profile = combine_orientations(vec![left, right]);
    for x in &mut profile.xi {
        *x *= ratio;
    }
    Ok(profile)
}

/// Adapted viscosity a(x, u) for a connection (A, B): strictly increasing
/// piecewise-affine functions through (lo, 0), (A, kappa), (hi, 1) on the
/// left and (lo, 0), (B, kappa), (hi, 1) on the right, so that the
/// connection datum is an exact steady state of the regularized equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViscosityPair {
    pub a_left: PiecewiseLinearFlux,
    pub a_right: PiecewiseLinearFlux,
    pub kappa: f64,
}

impl ViscosityPair {
    /// Connection states encoded by the viscosity: the kappa-preimages.
    pub fn connection(&self) -> (f64, f64) {
        let a = self
            .a_left
            .level_set(self.kappa)
            .first()
            .map(|it| it.representatives()[0])
            .unwrap_or(self.a_left.domain().lo);
        let b = self
            .a_right
            .level_set(self.kappa)
            .first()
            .map(|it| it.representatives()[0])
            .unwrap_or(self.a_right.domain().lo);
        (a, b)
    }

    pub fn max_slope(&self) -> f64 {
        let dom = self.a_left.domain();
        self.a_left
            .lipschitz_bound(dom)
            .unwrap()
            .max(self.a_right.lipschitz_bound(dom).unwrap())
    }
}

pub fn adapted_viscosity(
    fluxes: &FluxPair,
    a: f64,
    b: f64,
    kappa: f64,
) -> Result<ViscosityPair, ViscousError> {
    check_rh(fluxes, StatePair::new(a, b))?;
    let dom = fluxes.domain();
    // the extremal connection (hi, lo) takes kappa = 0 with identity-shaped a
    if kappa.abs() <= STATE_TOL {
        if (a - dom.hi).abs() > STATE_TOL || (b - dom.lo).abs() > STATE_TOL {
            return Err(ViscousError::DegenerateSlope { a });
        }
        let ident =
            PiecewiseLinearFlux::from_nodes(vec![(dom.lo, 0.0), (dom.hi, 1.0)]).map_err(FluxError::from)?;
        return Ok(ViscosityPair {
            a_left: ident.clone(),
            a_right: ident,
            kappa: 0.0,
        });
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(ViscousError::StabilityViolation(format!(
            "kappa = {kappa} outside (0, 1)"
        )));
    }
    let build = |mid: f64| -> Result<PiecewiseLinearFlux, ViscousError> {
        if mid <= dom.lo + STATE_TOL || mid >= dom.hi - STATE_TOL {
            return Err(ViscousError::DegenerateSlope { a: mid });
        }
        Ok(PiecewiseLinearFlux::from_nodes(vec![
            (dom.lo, 0.0),
            (mid, kappa),
            (dom.hi, 1.0),
        ])
        .map_err(FluxError::from)?)
    };
    let a_left = build(a)?;
    let a_right = build(b)?;
    debug_assert!(a_left.strictly_nonflat() && a_right.strictly_nonflat());
    Ok(ViscosityPair {
        a_left,
        a_right,
        kappa,
    })
}

/// Explicit conservative march of u_t + f(x,u)_x = eps a(x,u)_xx: the
/// convective part uses the scheme's Godunov fluxes (the interface face
/// resolves against the germ the viscosity encodes: the vanishing-viscosity
/// germ for the pure regularization, the connection germ for an adapted
/// pair); the diffusive part is the central second difference of a(x, u)
/// with one-sided values at the shared interface node. States are clamped to
/// the flux domain with a logged count.
pub fn run_parabolic(
    fluxes: &FluxPair,
    visc: Option<&ViscosityPair>,
    eps: f64,
    mesh: &MeshConfig,
    u0: &InitialData,
) -> Result<GridSolution, ViscousError> {
    if eps < 0.0 {
        return Err(ViscousError::StabilityViolation("negative viscosity".into()));
    }
    let n_side = mesh.validate()?;
    u0.validate()?;
    let spec = match visc {
        None => GermSpec::new(GermKind::Vv, fluxes.clone())?,
        Some(vp) => {
            let (a, b) = vp.connection();
            GermSpec::new(GermKind::Connection { a, b }, fluxes.clone())?
        }
    };
    let g = spec.sample(33)?;

    let n = 2 * n_side;
    let x_centers: Vec<f64> = (0..n)
        .map(|i| (i as f64 - n_side as f64 + 0.5) * mesh.dx)
        .collect();
    let mut state: Vec<f64> = x_centers
        .iter()
        .map(|&xc| u0.cell_average(xc - 0.5 * mesh.dx, xc + 0.5 * mesh.dx))
        .collect();

    let m = state.iter().cloned().fold(f64::INFINITY, f64::min);
    let big_m = state.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let envelope = scheme::linfty_envelope(&g, m, big_m)?;
    let dt_conv = scheme::cfl_timestep(fluxes, envelope, mesh.dx, mesh.cfl_fraction)?;
    let a_max = visc.map_or(1.0, ViscosityPair::max_slope);
    let dt_diff = if eps * a_max > 0.0 {
        mesh.cfl_fraction * mesh.dx * mesh.dx / (2.0 * eps * a_max)
    } else {
        f64::INFINITY
    };
    let dt = dt_conv.min(dt_diff).min(mesh.t_end);
    let n_steps = (mesh.t_end / dt).ceil() as usize;
    let stride = (n_steps / 200).max(1);
    let dom = fluxes.domain();

    let w_of = |u: &[f64]| -> Vec<f64> {
        match visc {
            None => u.to_vec(),
            Some(vp) => u
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let a = if i < n_side { &vp.a_left } else { &vp.a_right };
                    a.eval(dom.clamp(v)).unwrap()
                })
                .collect(),
        }
    };

    let mut sol = GridSolution {
        dx: mesh.dx,
        dt,
        n_left: n_side,
        x_centers,
        times: vec![0.0],
        field: vec![state.clone()],
        step_times: vec![0.0],
        trace_left: vec![state[n_side - 1]],
        trace_right: vec![state[n_side]],
        interface_flux_series: Vec::new(),
        boundary_flux_series: Vec::new(),
        envelope,
        conservation_defect: 0.0,
        clamp_count: 0,
    };

    let mut t = 0.0;
    let mut k = 0usize;
    while t < mesh.t_end - 1e-14 {
        let dt_k = dt.min(mesh.t_end - t);
        let (conv, rec) = scheme::step(&state, &g, n_side, mesh.dx, dt_k, BulkFlux::Godunov, 0.0)?;
        let mut next = conv;
        if eps > 0.0 {
            let w = w_of(&state);
            let mu = eps * dt_k / (mesh.dx * mesh.dx);
            for i in 0..n {
                let wl = if i == 0 { w[0] } else { w[i - 1] };
                let wr = if i == n - 1 { w[n - 1] } else { w[i + 1] };
                next[i] += mu * (wr - 2.0 * w[i] + wl);
            }
        }
        for v in &mut next {
            let c = dom.clamp(*v);
            if c != *v {
                sol.clamp_count += 1;
                *v = c;
            }
        }
        state = next;
        t += dt_k;
        k += 1;
        sol.step_times.push(t);
        sol.trace_left.push(state[n_side - 1]);
        sol.trace_right.push(state[n_side]);
        sol.interface_flux_series.push(rec.interface_flux);
        sol.boundary_flux_series.push(rec.boundary_flux);
        if k % stride == 0 || t >= mesh.t_end - 1e-14 {
            sol.times.push(t);
            sol.field.push(state.clone());
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn burgers_pair() -> FluxPair {
        let f = PiecewiseLinearFlux::sample(
            |u| 0.5 * u * u,
            Interval::new(-1.0, 1.0).unwrap(),
            201,
        )
        .unwrap();
        FluxPair::homogeneous(f)
    }

    fn bell_pair() -> FluxPair {
        let dom = Interval::new(0.0, 1.0).unwrap();
        let fl = PiecewiseLinearFlux::sample(|u| u * (1.0 - u), dom, 201).unwrap();
        let fr = PiecewiseLinearFlux::sample(|u| 2.0 * u * (1.0 - u), dom, 201).unwrap();
        FluxPair::new(fl, fr).unwrap()
    }

    #[test]
    fn standing_wave_shock_connects() {
        let fp = burgers_pair();
        let p = standing_wave(&fp, StatePair::new(1.0, -1.0), 60.0, 1e-6).unwrap();
        assert_eq!(p.verdict, ProfileVerdict::Connects);
        // monotone profile
        for w in p.w.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn standing_wave_rarefaction_data_never_connect() {
        let fp = burgers_pair();
        let p = standing_wave(&fp, StatePair::new(-1.0, 1.0), 60.0, 1e-6).unwrap();
        assert_ne!(p.verdict, ProfileVerdict::Connects);
    }

    #[test]
    fn standing_wave_constant_pair() {
        let fp = burgers_pair();
        let p = standing_wave(&fp, StatePair::new(0.3, 0.3), 10.0, 1e-6).unwrap();
        assert_eq!(p.verdict, ProfileVerdict::Connects);
        assert!(p.w.iter().all(|&w| (w - 0.3).abs() <= 1e-12));
    }

    #[test]
    fn smoothed_profile_ratio_guard() {
        let fp = burgers_pair();
        let p = StatePair::new(1.0, -1.0);
        // L = 1 near the endpoints, so delta/eps must stay below 2
        assert!(matches!(
            smoothed_profile(&fp, p, 0.1, 0.5, 40.0, 1e-6),
            Err(ViscousError::CflRatioViolated { .. })
        ));
        let prof = smoothed_profile(&fp, p, 0.1, 0.05, 120.0, 1e-6).unwrap();
        assert_eq!(prof.verdict, ProfileVerdict::Connects);
    }

    #[test]
    fn smoothed_profile_small_delta_matches_standing_wave() {
        let fp = burgers_pair();
        let p = StatePair::new(0.8, -0.8);
        let sw = standing_wave(&fp, p, 80.0, 1e-6).unwrap();
        let sm = smoothed_profile(&fp, p, 1.0, 1e-3, 80.0 / 1e-3, 1e-6).unwrap();
        assert_eq!(sm.verdict, ProfileVerdict::Connects);
        // compare on the shared abscissae range by interpolation
        let interp = |xs: &[f64], ws: &[f64], x: f64| -> f64 {
            let k = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
            let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
            ws[k - 1] + t * (ws[k] - ws[k - 1])
        };
        for &x in &[-20.0, -5.0, -1.0, -0.2] {
            let a = interp(&sw.xi, &sw.w, x);
            let b = interp(&sm.xi, &sm.w, x);
            assert_abs_diff_eq!(a, b, epsilon = 5e-3);
        }
    }

    #[test]
    fn adapted_viscosity_examples() {
        let fp = bell_pair();
        let b = crate::riemann::connection_partner(&fp, 0.5).unwrap();
        let vp = adapted_viscosity(&fp, 0.5, b, 0.5).unwrap();
        // left side is the identity through (0,0), (0.5,0.5), (1,1)
        assert_abs_diff_eq!(vp.a_left.eval(0.25).unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(vp.a_right.eval(b).unwrap(), 0.5, epsilon = 1e-12);
        let (ca, cb) = vp.connection();
        assert_abs_diff_eq!(ca, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cb, b, epsilon = 1e-12);

        // extremal connection: identity viscosity with kappa = 0
        let dom = Interval::new(0.0, 1.0).unwrap();
        let f = PiecewiseLinearFlux::sample(|u| u * (1.0 - u), dom, 41).unwrap();
        let fp1 = FluxPair::homogeneous(f);
        let vp0 = adapted_viscosity(&fp1, 1.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(vp0.a_left.eval(0.7).unwrap(), 0.7, epsilon = 1e-12);
    }

    #[test]
    fn parabolic_preserves_connection_steady_state() {
        let fp = bell_pair();
        let b = crate::riemann::connection_partner(&fp, 0.5).unwrap();
        let vp = adapted_viscosity(&fp, 0.5, b, 0.5).unwrap();
        let mesh = MeshConfig {
            dx: 0.05,
            x_extent: 0.5,
            t_end: 0.02,
            cfl_fraction: 0.45,
            num_flux: BulkFlux::Godunov,
        };
        let u0 = InitialData::Riemann { left: 0.5, right: b };
        let sol = run_parabolic(&fp, Some(&vp), 0.05, &mesh, &u0).unwrap();
        for (a, c) in sol.field[0].iter().zip(sol.final_snapshot()) {
            assert_abs_diff_eq!(a, c, epsilon = 1e-12);
        }
    }

    #[test]
    fn parabolic_preserves_bell_constants() {
        let fp = bell_pair();
        let mesh = MeshConfig {
            dx: 0.1,
            x_extent: 0.5,
            t_end: 0.05,
            cfl_fraction: 0.45,
            num_flux: BulkFlux::Godunov,
        };
        for c in [0.0, 1.0] {
            let sol = run_parabolic(&fp, None, 0.05, &mesh, &InitialData::Constant(c)).unwrap();
            for v in sol.final_snapshot() {
                assert_abs_diff_eq!(*v, c, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn zero_viscosity_reduces_to_the_scheme() {
        let fp = burgers_pair();
        let spec = GermSpec::new(GermKind::Vv, fp.clone()).unwrap();
        let g = spec.sample(33).unwrap();
        let mesh = MeshConfig {
            dx: 0.05,
            x_extent: 1.0,
            t_end: 0.3,
            cfl_fraction: 0.9,
            num_flux: BulkFlux::Godunov,
        };
        let u0 = InitialData::Riemann {
            left: 1.0,
            right: -1.0,
        };
        let fv = scheme::run(&mesh, &g, &u0, 0).unwrap();
        let pb = run_parabolic(&fp, None, 0.0, &mesh, &u0).unwrap();
        assert_eq!(fv.times.len(), pb.times.len());
        for (a, b) in fv.final_snapshot().iter().zip(pb.final_snapshot()) {
            assert_eq!(a, b, "zero-viscosity march must reproduce the scheme");
        }
    }
}
