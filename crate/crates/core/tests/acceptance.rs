//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! The criteria reproduce the qualitative claims of the interface-germ
//! framework at desk scale: exact preservation of connection data, discrete
//! contraction and comparison, non-uniqueness under the bad-crossing
//! single-constant criterion, the equivalences between the viscous and the
//! algebraic membership tests, vanishing-viscosity convergence, and the
//! closed-form interface fluxes.

use germ_core::flux::{FluxPair, Interval, PiecewiseLinearFlux};
use germ_core::germ::{self, Definiteness, GermKind, GermSpec, StatePair};
use germ_core::riemann::{self, InterfaceSolution};
use germ_core::scheme::{self, BulkFlux, GridSolution, InitialData, MeshConfig};
use germ_core::verify::{self, BumpProfile, TestBump};
use germ_core::viscous::{self, ProfileVerdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool) {
    println!(
        "acceptance criterion {:02} ({}): {}",
        id,
        name,
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {id} ({name}) failed");
}

fn burgers_pair(n: usize) -> FluxPair {
    let f = PiecewiseLinearFlux::sample(|u| 0.5 * u * u, Interval::new(-1.0, 1.0).unwrap(), n)
        .unwrap();
    FluxPair::homogeneous(f)
}

fn bell_pair() -> FluxPair {
    let dom = Interval::new(0.0, 1.0).unwrap();
    let fl = PiecewiseLinearFlux::sample(|u| u * (1.0 - u), dom, 201).unwrap();
    let fr = PiecewiseLinearFlux::sample(|u| 2.0 * u * (1.0 - u), dom, 201).unwrap();
    FluxPair::new(fl, fr).unwrap()
}

fn tent_pair(n: usize) -> FluxPair {
    let dom = Interval::new(-1.0, 2.0).unwrap();
    let fl = PiecewiseLinearFlux::sample(|u| u.abs(), dom, n).unwrap();
    let fr = PiecewiseLinearFlux::sample(|u| (u - 1.0).abs(), dom, n).unwrap();
    FluxPair::new(fl, fr).unwrap()
}

/// 1. The scheme preserves the stationary connection datum exactly.
#[test]
fn acceptance_01_germ_preservation() {
    let fp = bell_pair();
    let b = riemann::connection_partner(&fp, 0.5).unwrap();
    assert!((b - 0.146447).abs() < 2e-5, "connection endpoint {b}");
    let spec = GermSpec::new(GermKind::Connection { a: 0.5, b }, fp.clone()).unwrap();
    let g = spec.sample(11).unwrap();

    let dx = 1.0 / 400.0;
    let n_side = 200; // half-width 0.5
    let n = 2 * n_side;
    let state0: Vec<f64> = (0..n)
        .map(|i| if i < n_side { 0.5 } else { b })
        .collect();
    let l = fp
        .left
        .lipschitz_bound(fp.domain())
        .unwrap()
        .max(fp.right.lipschitz_bound(fp.domain()).unwrap());
    let dt = 0.9 * dx / (2.0 * l);
    let mut state = state0.clone();
    for _ in 0..1000 {
        let (next, _) = scheme::step(&state, &g, n_side, dx, dt, BulkFlux::Godunov, l).unwrap();
        state = next;
    }
    let drift = state
        .iter()
        .zip(&state0)
        .map(|(a, c)| (a - c).abs())
        .fold(0.0, f64::max);
    report(1, "germ preservation", drift <= 1e-12);
}

fn random_piecewise(rng: &mut ChaCha8Rng, pieces: usize, amp: f64) -> InitialData {
    let mut xs: Vec<f64> = vec![-0.6, 0.6];
    for _ in 0..pieces - 1 {
        xs.push(rng.gen_range(-0.6..0.6));
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut values = vec![0.0];
    for _ in 1..xs.len() {
        values.push(rng.gen_range(-amp..amp));
    }
    values.push(0.0);
    InitialData::Piecewise { xs, values }
}

/// 2. Discrete L1 contraction for random data pairs, exact order
/// preservation for ordered pairs.
#[test]
fn acceptance_02_contraction_and_comparison() {
    let fp = burgers_pair(201);
    let g = GermSpec::new(GermKind::Vv, fp.clone())
        .unwrap()
        .sample(21)
        .unwrap();
    let mesh = MeshConfig {
        dx: 1.0 / 100.0,
        x_extent: 1.0,
        t_end: 0.25,
        cfl_fraction: 0.9,
        num_flux: BulkFlux::Godunov,
    };
    let dom = fp.domain();
    let dt = scheme::cfl_timestep(&fp, (dom, dom), mesh.dx, mesh.cfl_fraction).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut pass = true;

    for trial in 0..20 {
        let u0 = random_piecewise(&mut rng, 6, 0.85);
        let (v0, ordered) = if trial % 2 == 0 {
            (random_piecewise(&mut rng, 6, 0.85), false)
        } else {
            // ordered partner: add a nonnegative piecewise bump
            let bump = random_piecewise(&mut rng, 4, 0.05);
            let lift = |x: f64| match (&u0, &bump) {
                (InitialData::Piecewise { .. }, InitialData::Piecewise { .. }) => {
                    u0.cell_average(x - 1e-9, x + 1e-9)
                        + bump.cell_average(x - 1e-9, x + 1e-9).abs()
                }
                _ => unreachable!(),
            };
            let mut xs = vec![];
            if let (InitialData::Piecewise { xs: xa, .. }, InitialData::Piecewise { xs: xb, .. }) =
                (&u0, &bump)
            {
                xs.extend(xa.iter().chain(xb.iter()).copied());
            }
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let mut values = Vec::with_capacity(xs.len() + 1);
            values.push(lift(xs[0] - 1.0));
            for w in xs.windows(2) {
                values.push(lift(0.5 * (w[0] + w[1])));
            }
            values.push(lift(xs[xs.len() - 1] + 1.0));
            (InitialData::Piecewise { xs, values }, true)
        };
        let u = scheme::run_with(&mesh, &g, &u0, 1, Some(dt)).unwrap();
        let v = scheme::run_with(&mesh, &g, &v0, 1, Some(dt)).unwrap();
        let contraction = verify::l1_contraction_report(&u, &v, false).unwrap();
        pass &= contraction.pass;
        if ordered {
            for k in 0..u.times.len() {
                for (a, b) in u.field[k].iter().zip(&v.field[k]) {
                    pass &= a <= b;
                }
            }
        }
    }
    report(2, "discrete contraction and comparison", pass);
}

/// 3. Bad-crossing tent fluxes: the single-constant criterion is not
/// definite, and two distinct solutions of one Riemann problem pass all its
/// residuals.
#[test]
fn acceptance_03_krt_non_definiteness() {
    let fp = tent_pair(13);
    let spec = GermSpec::new(GermKind::Krt, fp.clone()).unwrap();
    let verdict = germ::definiteness_probe(&spec, 9).unwrap();
    let part_a = matches!(verdict, Definiteness::NotDefinite { .. });

    // two resolutions of the Riemann datum (-0.25, 1.25)
    let mesh = MeshConfig {
        dx: 1.0 / 400.0,
        x_extent: 2.0,
        t_end: 0.5,
        cfl_fraction: 0.9,
        num_flux: BulkFlux::Godunov,
    };
    let times: Vec<f64> = (0..=100).map(|k| 0.5 * k as f64 / 100.0).collect();
    let stationary = InterfaceSolution {
        ul: -0.25,
        ur: 1.25,
        left_fan: riemann::solve_classical(&fp.left, -0.25, -0.25).unwrap(),
        right_fan: riemann::solve_classical(&fp.right, 1.25, 1.25).unwrap(),
        interface_flux: 0.25,
    };
    let routed = InterfaceSolution {
        ul: 0.0,
        ur: 1.0,
        left_fan: riemann::solve_classical(&fp.left, -0.25, 0.0).unwrap(),
        right_fan: riemann::solve_classical(&fp.right, 1.0, 1.25).unwrap(),
        interface_flux: 0.0,
    };
    let u = GridSolution::from_interface_solution(&stationary, &fp, &mesh, &times).unwrap();
    let v = GridSolution::from_interface_solution(&routed, &fp, &mesh, &times).unwrap();

    let bumps = [
        TestBump::new(BumpProfile::hat(0.0, 0.25, 0.5), BumpProfile::hat(-1.5, 0.0, 1.5)),
        TestBump::new(BumpProfile::hat(0.0, 0.25, 0.5), BumpProfile::hat(-1.8, -0.9, 0.0)),
        TestBump::new(BumpProfile::hat(0.0, 0.25, 0.5), BumpProfile::hat(0.0, 0.9, 1.8)),
    ];
    let mut residual_pass = true;
    let mut worst = 0.0f64;
    for c_idx in 0..=100 {
        let c = -1.0 + 3.0 * c_idx as f64 / 100.0;
        for xi in &bumps {
            for sol in [&u, &v] {
                let rep = verify::entropy_residual_krt(sol, &fp, c, xi).unwrap();
                worst = worst.min(rep.value);
                residual_pass &= rep.value >= -5e-3;
            }
        }
    }
    let distance = u.l1_distance(&v, times.len() - 1);
    let part_b = residual_pass && distance > 0.1;
    println!("  worst KRT residual {worst:.2e}, final L1 distance {distance:.3}");
    report(3, "KRT non-definiteness and non-uniqueness", part_a && part_b);
}

/// 4. Under the crossing condition the vanishing-viscosity and the
/// single-constant criteria select the same pairs.
#[test]
fn acceptance_04_vv_equals_krt_under_crossing() {
    let fp = bell_pair();
    let vv = GermSpec::new(GermKind::Vv, fp.clone()).unwrap();
    let krt = GermSpec::new(GermKind::Krt, fp.clone()).unwrap();
    let n = 101;
    let dom = fp.domain();
    let grid = |i: usize| dom.lo + (dom.hi - dom.lo) * i as f64 / (n - 1) as f64;
    let mut vv_mem = vec![vec![false; n]; n];
    let mut krt_mem = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            let p = StatePair::new(grid(i), grid(j));
            vv_mem[i][j] = vv.contains(p).unwrap();
            krt_mem[i][j] = krt.contains(p).unwrap();
        }
    }
    let boundary = |mem: &Vec<Vec<bool>>, i: usize, j: usize| -> bool {
        let r = 2isize;
        let v = mem[i][j];
        for di in -r..=r {
            for dj in -r..=r {
                let (a, b) = (i as isize + di, j as isize + dj);
                if a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n
                    && mem[a as usize][b as usize] != v
                {
                    return true;
                }
            }
        }
        false
    };
    let mut disagreements = 0usize;
    let mut outside_band = 0usize;
    for i in 0..n {
        for j in 0..n {
            if vv_mem[i][j] != krt_mem[i][j] {
                disagreements += 1;
                if !boundary(&vv_mem, i, j) && !boundary(&krt_mem, i, j) {
                    outside_band += 1;
                }
            }
        }
    }
    println!("  {disagreements} disagreements, {outside_band} outside the boundary band");
    report(4, "VV = KRT under the crossing condition", outside_band == 0);
}

/// 5. Standing-wave verdicts sandwich between the strict and the closed
/// viscous membership.
#[test]
fn acceptance_05_standing_wave_sandwich() {
    let fp = burgers_pair(201);
    let open = GermSpec::new(GermKind::VvOpen, fp.clone()).unwrap();
    let closed = GermSpec::new(GermKind::Vv, fp.clone()).unwrap();
    let n = 41;
    let dom = fp.domain();
    let grid = |i: usize| dom.lo + (dom.hi - dom.lo) * i as f64 / (n - 1) as f64;
    let h = (dom.hi - dom.lo) / (n - 1) as f64;

    let mut feasible = 0usize;
    let mut mismatches = 0usize;
    let mut outside_band = 0usize;
    for i in 0..n {
        for j in 0..n {
            let p = StatePair::new(grid(i), grid(j));
            let fl = fp.left.eval(p.ul).unwrap();
            let fr = fp.right.eval(p.ur).unwrap();
            if (fl - fr).abs() > 1e-9 {
                continue;
            }
            feasible += 1;
            let verdict = viscous::standing_wave(&fp, p, 60.0, 1e-6).unwrap().verdict;
            let in_open = open.contains(p).unwrap();
            let in_closed = closed.contains(p).unwrap();
            let mismatch = (in_open && verdict != ProfileVerdict::Connects)
                || (!in_closed && verdict == ProfileVerdict::Connects);
            if mismatch {
                mismatches += 1;
                // excused only near a membership boundary
                let mut near_boundary = false;
                for (da, db) in [(2.0 * h, 0.0), (-2.0 * h, 0.0), (0.0, 2.0 * h), (0.0, -2.0 * h)] {
                    let q = StatePair::new(
                        (p.ul + da).clamp(dom.lo, dom.hi),
                        (p.ur + db).clamp(dom.lo, dom.hi),
                    );
                    if closed.contains(q).unwrap() != in_closed {
                        near_boundary = true;
                    }
                }
                if !near_boundary {
                    outside_band += 1;
                }
            }
        }
    }
    let frac = mismatches as f64 / feasible as f64;
    println!("  {feasible} feasible pairs, {mismatches} mismatches ({frac:.3}), {outside_band} outside the band");
    report(
        5,
        "standing-wave sandwich",
        outside_band == 0 && frac <= 0.03,
    );
}

/// 6. Vanishing-viscosity runs approach the finite-volume reference as the
/// viscosity shrinks: strictly decreasing distances for both Riemann data.
///
/// The 0.05 endpoint bound can only hold for the shock datum: the exact
/// Cole-Hopf solution of the viscous equation is itself 0.088 away from the
/// rarefaction at eps = 0.0125 (the corner layers decay like eps log eps),
/// so the rarefaction endpoint is checked against an oracle-anchored 0.10.
#[test]
fn acceptance_06_vanishing_viscosity_convergence() {
    let fp = burgers_pair(201);
    let g = GermSpec::new(GermKind::Vv, fp.clone())
        .unwrap()
        .sample(21)
        .unwrap();
    let reference_mesh = MeshConfig {
        dx: 1.0 / 800.0,
        x_extent: 2.0,
        t_end: 0.5,
        cfl_fraction: 0.9,
        num_flux: BulkFlux::Godunov,
    };
    let eps_list = [0.1, 0.05, 0.025, 0.0125];
    let dx_list = [1.0 / 100.0, 1.0 / 200.0, 1.0 / 200.0, 1.0 / 400.0];
    let mut pass = true;
    for (left, right, endpoint_bound) in [(1.0, -1.0, 0.05), (-1.0, 1.0, 0.10)] {
        let u0 = InitialData::Riemann { left, right };
        let reference = scheme::run(&reference_mesh, &g, &u0, 0).unwrap();
        let mut prev = f64::INFINITY;
        let mut final_distance = f64::INFINITY;
        for (&eps, &dx) in eps_list.iter().zip(&dx_list) {
            let mesh = MeshConfig {
                dx,
                x_extent: 2.0,
                t_end: 0.5,
                cfl_fraction: 0.45,
                num_flux: BulkFlux::Godunov,
            };
            let visc = viscous::run_parabolic(&fp, None, eps, &mesh, &u0).unwrap();
            let d = visc.l1_distance_final(&reference);
            println!("  data ({left}, {right}), eps {eps}: L1 distance {d:.4}");
            pass &= d < prev;
            prev = d;
            final_distance = d;
        }
        pass &= final_distance < endpoint_bound;
    }
    report(6, "vanishing-viscosity convergence", pass);
}

/// 7. The adapted viscosity keeps its connection datum steady.
#[test]
fn acceptance_07_adapted_viscosity_steady_state() {
    let fp = bell_pair();
    let b = riemann::connection_partner(&fp, 0.5).unwrap();
    let vp = viscous::adapted_viscosity(&fp, 0.5, b, 0.5).unwrap();
    let dx = 1.0 / 100.0;
    let l = 2.0;
    let dt_conv = 0.45 * dx / (2.0 * l);
    let dt_diff = 0.45 * dx * dx / (2.0 * 0.05 * vp.max_slope());
    let dt = dt_conv.min(dt_diff);
    let mesh = MeshConfig {
        dx,
        x_extent: 0.5,
        t_end: 1000.0 * dt,
        cfl_fraction: 0.45,
        num_flux: BulkFlux::Godunov,
    };
    let u0 = InitialData::Riemann { left: 0.5, right: b };
    let sol = viscous::run_parabolic(&fp, Some(&vp), 0.05, &mesh, &u0).unwrap();
    let drift = sol.field[0]
        .iter()
        .zip(sol.final_snapshot())
        .map(|(a, c)| (a - c).abs())
        .fold(0.0, f64::max);
    println!("  drift over {} steps: {drift:.2e}", sol.step_times.len() - 1);
    report(7, "adapted-viscosity steady state", drift <= 1e-8);
}

/// 8. The dual of the constants equals the vanishing-viscosity membership
/// for a single flux.
#[test]
fn acceptance_08_dual_of_constants_is_vv() {
    let fp = burgers_pair(201);
    let vkr = GermSpec::new(GermKind::VolpertKruzhkov, fp.clone()).unwrap();
    let vv = GermSpec::new(GermKind::Vv, fp.clone()).unwrap();
    let g = vkr.sample(101).unwrap();
    let d = germ::dual(&g, 101).unwrap();

    // candidate universe of the dual enumeration at the same resolution
    let dom = fp.domain();
    let h = (dom.hi - dom.lo) / 100.0;
    let mut disagreements = 0usize;
    let mut checked = 0usize;
    let common = fp.common_range().unwrap();
    for k in 0..=100 {
        let s = common.lo + (common.hi - common.lo) * k as f64 / 100.0;
        for ul in fp.left.level_set(s).iter().flat_map(|it| it.representatives()) {
            for ur in fp
                .right
                .level_set(s)
                .iter()
                .flat_map(|it| it.representatives())
            {
                let p = StatePair::new(ul, ur);
                checked += 1;
                let in_dual = d.pairs().iter().any(|q| q.close_to(&p, 1e-9));
                let in_vv = vv.contains(p).unwrap();
                if in_dual != in_vv {
                    // excused only near a membership boundary
                    let mut near = false;
                    for (da, db) in [(2.0 * h, 0.0), (-2.0 * h, 0.0), (0.0, 2.0 * h), (0.0, -2.0 * h)] {
                        let q = StatePair::new(
                            (p.ul + da).clamp(dom.lo, dom.hi),
                            (p.ur + db).clamp(dom.lo, dom.hi),
                        );
                        if vv.contains(q).unwrap() != in_vv {
                            near = true;
                        }
                    }
                    if !near {
                        disagreements += 1;
                    }
                }
            }
        }
    }
    println!("  {checked} candidates checked, {disagreements} disagreements outside the band");
    report(8, "dual of the constants is the VV germ", disagreements == 0);
}

/// 9. Completeness coverage across the three reference configurations.
#[test]
fn acceptance_09_completeness_reports() {
    let dom = Interval::new(0.0, 1.0).unwrap();
    // two increasing chords onto the same range
    let fl = PiecewiseLinearFlux::sample(|u| u, dom, 101).unwrap();
    let fr = PiecewiseLinearFlux::sample(|u| u * u, dom, 101).unwrap();
    let fp = FluxPair::new(fl.clone(), fr).unwrap();
    let rh = GermSpec::new(GermKind::RankineHugoniot, fp).unwrap();
    let g = rh.sample(101).unwrap();
    let complete = germ::completeness_check(&g, 101).unwrap();

    // increasing against decreasing: no fan can cross the interface
    let fr_dec = PiecewiseLinearFlux::sample(|u| 1.0 - u, dom, 101).unwrap();
    let fp_dec = FluxPair::new(fl, fr_dec).unwrap();
    let rh_dec = GermSpec::new(GermKind::RankineHugoniot, fp_dec).unwrap();
    let g_dec = rh_dec.sample(101).unwrap();
    let incomplete = germ::completeness_check(&g_dec, 101).unwrap();

    let vv = GermSpec::new(GermKind::Vv, bell_pair()).unwrap();
    let g_vv = vv.sample(101).unwrap();
    let vv_cov = germ::completeness_check(&g_vv, 101).unwrap();

    println!(
        "  increasing pair {:.4}, anti-monotone pair {:.4} ({} witnesses), bell VV {:.4}",
        complete.fraction,
        incomplete.fraction,
        incomplete.uncovered.len(),
        vv_cov.fraction
    );
    report(
        9,
        "completeness coverage",
        (complete.fraction - 1.0).abs() < 1e-12
            && incomplete.fraction < 1.0
            && !incomplete.uncovered.is_empty()
            && (vv_cov.fraction - 1.0).abs() < 1e-12,
    );
}

/// 10. The closed-form connection flux agrees with the generic interface
/// solver on random data.
#[test]
fn acceptance_10_interface_flux_closed_form() {
    let fp = bell_pair();
    let a = 0.5;
    let b = riemann::connection_partner(&fp, a).unwrap();
    let spec = GermSpec::new(GermKind::AbDual { a, b }, fp.clone()).unwrap();
    let g = spec.sample(33).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let ul = rng.gen_range(0.0..1.0);
        let ur = rng.gen_range(0.0..1.0);
        let fast = fp
            .left
            .godunov(ul, a)
            .unwrap()
            .min(fp.right.godunov(b, ur).unwrap());
        let generic = riemann::solve_interface(&g, ul, ur).unwrap().interface_flux;
        worst = worst.max((fast - generic).abs());
    }
    println!("  worst fast-path deviation {worst:.2e}");
    report(10, "interface flux closed form", worst <= 1e-8);
}

/// 11. Continuous dependence on the germ: nearby connections produce nearby
/// solutions, linearly in the germ distance.
#[test]
fn acceptance_11_continuous_dependence() {
    let fp = bell_pair();
    let partner_at = |s: f64| -> (f64, f64) {
        // connection endpoints at flux level s: decreasing branch left,
        // increasing branch right
        let a = fp
            .left
            .level_set(s)
            .iter()
            .flat_map(|it| it.representatives())
            .fold(f64::NEG_INFINITY, f64::max);
        let b = fp
            .right
            .level_set(s)
            .iter()
            .flat_map(|it| it.representatives())
            .fold(f64::INFINITY, f64::min);
        (a, b)
    };
    let (a1, b1) = partner_at(0.20);
    let (a2, b2) = partner_at(0.21);
    let g1 = GermSpec::new(GermKind::Connection { a: a1, b: b1 }, fp.clone())
        .unwrap()
        .sample(11)
        .unwrap();
    let g2 = GermSpec::new(GermKind::Connection { a: a2, b: b2 }, fp.clone())
        .unwrap()
        .sample(11)
        .unwrap();
    let rho = germ::germ_distance(&g1, &g2).unwrap();

    let mesh = MeshConfig {
        dx: 1.0 / 200.0,
        x_extent: 1.0,
        t_end: 1.0,
        cfl_fraction: 0.9,
        num_flux: BulkFlux::Godunov,
    };
    let dom = fp.domain();
    let dt = scheme::cfl_timestep(&fp, (dom, dom), mesh.dx, mesh.cfl_fraction).unwrap();
    let u0 = InitialData::Riemann { left: 0.8, right: 0.1 };
    let u = scheme::run_with(&mesh, &g1, &u0, 1, Some(dt)).unwrap();
    let v = scheme::run_with(&mesh, &g2, &u0, 1, Some(dt)).unwrap();
    let rep = verify::continuous_dependence_report(&u, &v, rho, 0.02).unwrap();
    println!("  germ distance {rho:.4}, worst margin {:.4}", rep.value);
    report(11, "continuous dependence on the germ", rep.pass);
}
