//! Explicit monotone finite-volume scheme with a germ-based Godunov flux at
//! the interface.
//!
//! The mesh is uniform with the interface x = 0 on a cell boundary; cells
//! left of it carry the left flux, cells right of it the right flux. Bulk
//! faces use a configurable consistent monotone flux, the interface face uses
//! the flux value of the exact germ Riemann solution, so every sampled germ
//! pair is preserved as stationary data. Under the CFL bound
//! `dt <= dx / (2 L)` the update is monotone, hence L1-contractive and
//! order-preserving.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flux::{FluxError, FluxPair, Interval, PiecewiseLinearFlux};
use crate::germ::{GermError, GermKind, GermSample};
use crate::riemann::{self, RiemannError};
use crate::RH_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Riemann(#[from] RiemannError),
    #[error("invalid mesh: {0}")]
    BadMesh(String),
    #[error("state {value} at t = {t}, cell {cell} leaves the predicted envelope by {excess}")]
    EnvelopeViolation {
        t: f64,
        cell: usize,
        value: f64,
        excess: f64,
    },
}

/// Bulk numerical flux (the interface face always uses the germ flux).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BulkFlux {
    Godunov,
    EngquistOsher,
    LaxFriedrichs,
}

impl Default for BulkFlux {
    fn default() -> Self {
        BulkFlux::Godunov
    }
}

impl BulkFlux {
    /// Evaluate the two-point flux; `alpha` is the Lax-Friedrichs diffusion
    /// coefficient (ignored by the others).
    pub fn eval(
        &self,
        flux: &PiecewiseLinearFlux,
        a: f64,
        b: f64,
        alpha: f64,
    ) -> Result<f64, FluxError> {
        match self {
            BulkFlux::Godunov => flux.godunov(a, b),
            BulkFlux::EngquistOsher => {
                Ok(0.5 * (flux.eval(a)? + flux.eval(b)?) - 0.5 * flux.variation_between(a, b)?)
            }
            BulkFlux::LaxFriedrichs => {
                Ok(0.5 * (flux.eval(a)? + flux.eval(b)?) - 0.5 * alpha * (b - a))
            }
        }
    }
}

/// Mesh and march configuration. The interface x = 0 is a cell boundary;
/// cell indices are counted so that the cells adjacent to the interface are
/// the last left cell and the first right cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub dx: f64,
    /// Half-width of the truncated domain (cells span [-x_extent, x_extent]).
    pub x_extent: f64,
    pub t_end: f64,
    pub cfl_fraction: f64,
    pub num_flux: BulkFlux,
}

impl MeshConfig {
    pub fn validate(&self) -> Result<usize, SchemeError> {
        if !(self.dx > 0.0) || !(self.x_extent > 0.0) || !(self.t_end > 0.0) {
            return Err(SchemeError::BadMesh(
                "dx, x_extent and t_end must be positive".into(),
            ));
        }
        if !(self.cfl_fraction > 0.0 && self.cfl_fraction <= 1.0) {
            return Err(SchemeError::BadMesh("cfl_fraction must be in (0, 1]".into()));
        }
        let n_side = (self.x_extent / self.dx).round();
        if (n_side * self.dx - self.x_extent).abs() > 1e-9 * self.x_extent || n_side < 1.0 {
            return Err(SchemeError::BadMesh(
                "x_extent must be an integer multiple of dx".into(),
            ));
        }
        Ok(n_side as usize)
    }
}

/// Initial datum, given in forms whose cell averages are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialData {
    Constant(f64),
    Riemann { left: f64, right: f64 },
    /// `values[k]` on the interval `(xs[k-1], xs[k])`, with `values[0]` left
    /// of `xs[0]` and the final entry right of the last breakpoint.
    Piecewise { xs: Vec<f64>, values: Vec<f64> },
}

impl InitialData {
    pub fn validate(&self) -> Result<(), SchemeError> {
        if let InitialData::Piecewise { xs, values } = self {
            if values.len() != xs.len() + 1 {
                return Err(SchemeError::BadMesh(
                    "piecewise datum needs one more value than breakpoints".into(),
                ));
            }
            if xs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SchemeError::BadMesh(
                    "piecewise breakpoints must increase".into(),
                ));
            }
        }
        Ok(())
    }

    /// Exact average over the cell `[a, b]`.
    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        match self {
            InitialData::Constant(c) => *c,
            InitialData::Riemann { left, right } => {
                let xs = [0.0];
                let values = [*left, *right];
                piecewise_average(&xs, &values, a, b)
            }
            InitialData::Piecewise { xs, values } => piecewise_average(xs, values, a, b),
        }
    }
}

fn piecewise_average(xs: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    let mut lo = a;
    for (k, &x) in xs.iter().enumerate() {
        if x <= a {
            continue;
        }
        if x >= b {
            break;
        }
        acc += values[k] * (x - lo);
        lo = x;
    }
    let last = xs.iter().filter(|&&x| x < b).count();
    acc += values[last.min(values.len() - 1)] * (b - lo);
    acc / (b - a)
}

/// Space-time field produced by a run, with interface-aligned cells and
/// one-sided trace series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub dx: f64,
    pub dt: f64,
    /// Number of cells left of the interface; the interface face sits between
    /// cells `n_left - 1` and `n_left`.
    pub n_left: usize,
    pub x_centers: Vec<f64>,
    /// Recorded snapshot times (always includes the initial and final time).
    pub times: Vec<f64>,
    pub field: Vec<Vec<f64>>,
    /// Per-step time levels.
    pub step_times: Vec<f64>,
    /// Per-step values of the cells adjacent to the interface.
    pub trace_left: Vec<f64>,
    pub trace_right: Vec<f64>,
    /// Interface flux used in each step.
    pub interface_flux_series: Vec<f64>,
    /// Outer boundary fluxes (left edge, right edge) used in each step.
    pub boundary_flux_series: Vec<(f64, f64)>,
    pub envelope: (Interval, Interval),
    /// Largest per-step conservation defect relative to the boundary fluxes.
    pub conservation_defect: f64,
    pub clamp_count: usize,
}

impl GridSolution {
    pub fn n_cells(&self) -> usize {
        self.x_centers.len()
    }

    pub fn final_snapshot(&self) -> &[f64] {
        self.field.last().unwrap()
    }

    /// Total mass of snapshot `k`.
    pub fn mass(&self, k: usize) -> f64 {
        self.field[k].iter().sum::<f64>() * self.dx
    }

    /// L1 distance between snapshots `k` of two runs on the same mesh.
    pub fn l1_distance(&self, other: &GridSolution, k: usize) -> f64 {
        self.field[k]
            .iter()
            .zip(&other.field[k])
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.dx
    }

    /// L1 distance of the final snapshots, allowing different resolutions;
    /// both fields are treated as piecewise constant on their own meshes and
    /// integrated over the overlap of the domains.
    pub fn l1_distance_final(&self, other: &GridSolution) -> f64 {
        let lo = self.x_centers[0] - 0.5 * self.dx;
        let hi = self.x_centers[self.n_cells() - 1] + 0.5 * self.dx;
        let olo = other.x_centers[0] - 0.5 * other.dx;
        let ohi = other.x_centers[other.n_cells() - 1] + 0.5 * other.dx;
        let (lo, hi) = (lo.max(olo), hi.min(ohi));
        let u = self.final_snapshot();
        let v = other.final_snapshot();
        let cell_of = |g: &GridSolution, x: f64| -> usize {
            let i = ((x - (g.x_centers[0] - 0.5 * g.dx)) / g.dx).floor() as isize;
            i.clamp(0, g.n_cells() as isize - 1) as usize
        };
        let mut breaks: Vec<f64> = vec![lo, hi];
        for g in [self, other] {
            let mut x = g.x_centers[0] - 0.5 * g.dx;
            while x < hi {
                if x > lo {
                    breaks.push(x);
                }
                x += g.dx;
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
        let mut acc = 0.0;
        for w in breaks.windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            acc += (u[cell_of(self, m)] - v[cell_of(other, m)]).abs() * (w[1] - w[0]);
        }
        acc
    }

    /// Project an exact interface Riemann solution onto a grid, with exact
    /// cell averages at each requested time.
    pub fn from_interface_solution(
        sol: &riemann::InterfaceSolution,
        fluxes: &FluxPair,
        mesh: &MeshConfig,
        times: &[f64],
    ) -> Result<GridSolution, SchemeError> {
        let n_side = mesh.validate()?;
        let n = 2 * n_side;
        let x_centers: Vec<f64> = (0..n)
            .map(|i| (i as f64 - n_side as f64 + 0.5) * mesh.dx)
            .collect();
        let u_minus = sol.left_fan.left;
        let u_plus = sol.right_fan.right;
        let mut field = Vec::with_capacity(times.len());
        for &t in times {
            let mut row = Vec::with_capacity(n);
            for &xc in &x_centers {
                let (a, b) = (xc - 0.5 * mesh.dx, xc + 0.5 * mesh.dx);
                if t <= 0.0 {
                    let xs = [0.0];
                    let vals = [u_minus, u_plus];
                    row.push(piecewise_average(&xs, &vals, a, b));
                    continue;
                }
                // jump abscissae of the self-similar profile at time t
                let mut xs: Vec<f64> = vec![0.0];
                for w in sol.left_fan.waves.iter().chain(&sol.right_fan.waves) {
                    for &s in &w.speeds {
                        xs.push(s * t);
                    }
                }
                xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
                xs.dedup_by(|p, q| (*p - *q).abs() <= 1e-15);
                let mut breaks: Vec<f64> = vec![a];
                breaks.extend(xs.iter().copied().filter(|&x| x > a && x < b));
                breaks.push(b);
                let mut acc = 0.0;
                for w in breaks.windows(2) {
                    let m = 0.5 * (w[0] + w[1]);
                    acc += sol.eval_at(t, m) * (w[1] - w[0]);
                }
                row.push(acc / (b - a));
            }
            field.push(row);
        }
        let traces_l: Vec<f64> = field.iter().map(|r| r[n_side - 1]).collect();
        let traces_r: Vec<f64> = field.iter().map(|r| r[n_side]).collect();
        let lo = field
            .iter()
            .flatten()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        let hi = field
            .iter()
            .flatten()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let bl = fluxes.left.eval(field[0][0])?;
        let br = fluxes.right.eval(field[0][n - 1])?;
        Ok(GridSolution {
            dx: mesh.dx,
            dt: if times.len() > 1 { times[1] - times[0] } else { mesh.t_end },
            n_left: n_side,
            x_centers,
            times: times.to_vec(),
            field,
            step_times: times.to_vec(),
            trace_left: traces_l,
            trace_right: traces_r,
            interface_flux_series: vec![sol.interface_flux; times.len().saturating_sub(1)],
            boundary_flux_series: vec![(bl, br); times.len().saturating_sub(1)],
            envelope: (Interval { lo, hi }, Interval { lo, hi }),
            conservation_defect: 0.0,
            clamp_count: 0,
        })
    }
}

/// CFL time step `cfl_fraction * dx / (2 L)`, `L` the Lipschitz bound of the
/// two fluxes over the per-side envelope. Constant fluxes give an unbounded
/// step; callers cap at the final time.
pub fn cfl_timestep(
    fluxes: &FluxPair,
    envelope: (Interval, Interval),
    dx: f64,
    cfl_fraction: f64,
) -> Result<f64, FluxError> {
    let l = fluxes
        .left
        .lipschitz_bound(envelope.0)?
        .max(fluxes.right.lipschitz_bound(envelope.1)?);
    Ok(if l <= 0.0 {
        f64::INFINITY
    } else {
        cfl_fraction * dx / (2.0 * l)
    })
}

/// Interface Godunov flux: the flux value of the exact germ Riemann solution
/// at the interface. Catalog germs with closed-form resolutions take a fast
/// path that is cross-checked against the generic solver in debug builds.
pub fn interface_flux(g: &GermSample, u_left: f64, u_right: f64) -> Result<f64, SchemeError> {
    let fl = &g.fluxes.left;
    let fr = &g.fluxes.right;
    let fast: Option<f64> = match g.origin().map(|s| &s.kind) {
        Some(
            GermKind::VolpertKruzhkov | GermKind::Gelfand | GermKind::Vv | GermKind::VvOpen
            | GermKind::Krt,
        ) if g.fluxes.is_homogeneous() => Some(fl.godunov(u_left, u_right)?),
        Some(GermKind::Connection { a, b } | GermKind::AbDual { a, b }) => {
            Some(fl.godunov(u_left, *a)?.min(fr.godunov(*b, u_right)?))
        }
        Some(GermKind::ConnectionApDual { a, b }) => {
            Some(fl.godunov(u_left, *a)?.max(fr.godunov(*b, u_right)?))
        }
        Some(GermKind::AudussePerthame) => {
            let a = 0.5 * (fl.argmin_interval().lo + fl.argmin_interval().hi);
            let b = 0.5 * (fr.argmin_interval().lo + fr.argmin_interval().hi);
            Some(fl.godunov(u_left, a)?.max(fr.godunov(b, u_right)?))
        }
        _ => None,
    };
    match fast {
        Some(value) => {
            #[cfg(debug_assertions)]
            {
                if let Ok(sol) = riemann::solve_interface(g, u_left, u_right) {
                    debug_assert!(
                        (sol.interface_flux - value).abs() <= 10.0 * RH_TOL,
                        "interface fast path {} disagrees with generic solver {}",
                        value,
                        sol.interface_flux
                    );
                }
            }
            Ok(value)
        }
        None => Ok(riemann::solve_interface(g, u_left, u_right)?.interface_flux),
    }
}

/// Fluxes and bookkeeping of one conservative update.
pub struct StepRecord {
    pub interface_flux: f64,
    pub boundary_flux: (f64, f64),
}

/// One explicit conservative update with copy (outflow) boundaries. The
/// caller guarantees the CFL bound for the current envelope.
pub fn step(
    state: &[f64],
    g: &GermSample,
    n_left: usize,
    dx: f64,
    dt: f64,
    bulk: BulkFlux,
    alpha: f64,
) -> Result<(Vec<f64>, StepRecord), SchemeError> {
    let n = state.len();
    debug_assert!(n >= 2 && n_left >= 1 && n_left < n);
    let fl = &g.fluxes.left;
    let fr = &g.fluxes.right;
    // faces[k] sits between cells k-1 and k; faces[0] and faces[n] are the
    // outer boundaries with copied ghost cells
    let mut faces = vec![0.0; n + 1];
    faces[0] = fl.eval(state[0])?;
    faces[n] = fr.eval(state[n - 1])?;
    let mut iface = 0.0;
    for k in 1..n {
        faces[k] = if k == n_left {
            iface = interface_flux(g, state[k - 1], state[k])?;
            iface
        } else if k < n_left {
            bulk.eval(fl, state[k - 1], state[k], alpha)?
        } else {
            bulk.eval(fr, state[k - 1], state[k], alpha)?
        };
    }
    let lam = dt / dx;
    let next: Vec<f64> = (0..n)
        .map(|i| state[i] - lam * (faces[i + 1] - faces[i]))
        .collect();
    Ok((
        next,
        StepRecord {
            interface_flux: iface,
            boundary_flux: (faces[0], faces[n]),
        },
    ))
}

/// Uniform bound on the scheme: the per-side envelope spanned by the data
/// bounds together with the interface traces of the Riemann solutions at the
/// constant data `(m, m)` and `(M, M)`.
pub fn linfty_envelope(
    g: &GermSample,
    m: f64,
    big_m: f64,
) -> Result<(Interval, Interval), SchemeError> {
    let low = riemann::solve_interface(g, m, m)?;
    let high = riemann::solve_interface(g, big_m, big_m)?;
    let left = Interval {
        lo: low.ul.min(m),
        hi: high.ul.max(big_m),
    };
    let right = Interval {
        lo: low.ur.min(m),
        hi: high.ur.max(big_m),
    };
    Ok((left, right))
}

/// March the scheme to `t_end`. The time step is fixed once from the initial
/// envelope (which the scheme preserves); snapshots are recorded every
/// `record_every` steps (0 picks a stride capping storage near 200 rows).
pub fn run(
    mesh: &MeshConfig,
    g: &GermSample,
    u0: &InitialData,
    record_every: usize,
) -> Result<GridSolution, SchemeError> {
    run_with(mesh, g, u0, record_every, None)
}

/// [`run`] with an externally prescribed time step, so that runs from
/// different data share one time grid for pairwise comparisons. The step
/// must still satisfy the CFL bound of the run's own envelope.
pub fn run_with(
    mesh: &MeshConfig,
    g: &GermSample,
    u0: &InitialData,
    record_every: usize,
    dt_override: Option<f64>,
) -> Result<GridSolution, SchemeError> {
    let n_side = mesh.validate()?;
    u0.validate()?;
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
    let envelope = linfty_envelope(g, m, big_m)?;
    let dt_cfl = cfl_timestep(&g.fluxes, envelope, mesh.dx, mesh.cfl_fraction)?;
    let dt = match dt_override {
        Some(dt) => {
            if dt > dt_cfl * (1.0 + 1e-12) {
                return Err(SchemeError::BadMesh(format!(
                    "prescribed dt {dt} violates the CFL bound {dt_cfl}"
                )));
            }
            dt
        }
        None => dt_cfl,
    }
    .min(mesh.t_end);
    let n_steps = (mesh.t_end / dt).ceil() as usize;
    let alpha = g
        .fluxes
        .left
        .lipschitz_bound(envelope.0)?
        .max(g.fluxes.right.lipschitz_bound(envelope.1)?);
    let stride = if record_every > 0 {
        record_every
    } else {
        (n_steps / 200).max(1)
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
        let mass_before: f64 = state.iter().sum::<f64>() * mesh.dx;
        let (next, rec) = step(&state, g, n_side, mesh.dx, dt_k, mesh.num_flux, alpha)?;
        state = next;
        t += dt_k;
        k += 1;

        let mass_after: f64 = state.iter().sum::<f64>() * mesh.dx;
        let expected = mass_before - dt_k * (rec.boundary_flux.1 - rec.boundary_flux.0);
        let scale = 1.0 + mass_before.abs();
        let defect = (mass_after - expected).abs() / scale;
        sol.conservation_defect = sol.conservation_defect.max(defect);
        debug_assert!(defect <= 1e-10, "conservation defect {defect}");

        for (i, &v) in state.iter().enumerate() {
            let iv = if i < n_side { envelope.0 } else { envelope.1 };
            let excess = (iv.lo - v).max(v - iv.hi);
            if excess > 1e-10 {
                return Err(SchemeError::EnvelopeViolation {
                    t,
                    cell: i,
                    value: v,
                    excess,
                });
            }
        }

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
