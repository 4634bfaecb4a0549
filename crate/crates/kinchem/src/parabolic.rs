//! Drift-diffusion limit: the parabolically scaled kinetic model, the radial
//! Keller-Segel limit solver, and convergence studies over the scaling
//! parameter.
//!
//! The scaled model advances
//! `eps df/dt + v . grad f = (1/eps)(rho F - f + eps chi0 (v.grad S)_+ rho - eps chi0 omega |grad S| f)`.
//! Transport runs with velocity `v / eps`; relaxation and turning are applied
//! per cell by an exact exponential toward the local balance, so the `1/eps^2`
//! stiffness never enters the CFL. The formal limit is
//! `d rho/dt = div(D grad rho) - chi~ div(rho grad S)` with
//! `D = (1/2) int |v|^2 F dv` and `chi~ = chi0 pi R^4 / 8`.

use rayon::prelude::*;

use crate::chemfield::{self, RadialDensity};
use crate::error::{KinchemError, Result};
use crate::kinsolver::{transport_step_bc, OuterBc, PhaseGrid, PhaseState};
use crate::real::{pairwise_sum, Real};
use crate::velocity::{VelocityKind, VelocitySet};

/// Relaxation equilibrium in velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumDist {
    /// `F = 1/|V|` on the ball.
    UniformBall,
    /// Normalized uniform measure on the sphere `|v| = R`.
    SphereDelta,
}

/// Parameters of a parabolically scaled kinetic run.
#[derive(Debug, Clone)]
pub struct ScaledParams<R> {
    pub epsilon: R,
    pub f_dist: EquilibriumDist,
    pub chi0: R,
    pub cfl: R,
    /// Weight of the relaxation part of the kernel. `1` is the scaled model;
    /// `0` removes relaxation entirely (with `epsilon = 1` the dynamics then
    /// reduce to the unscaled solver).
    pub relax_weight: R,
}

pub type ScaledParams64 = ScaledParams<f64>;

impl<R: Real> ScaledParams<R> {
    pub fn new(epsilon: R, f_dist: EquilibriumDist, chi0: R, cfl: R) -> Result<Self> {
        if epsilon <= R::zero() || epsilon > R::one() {
            return Err(KinchemError::InvalidConfig(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            f_dist,
            chi0,
            cfl,
            relax_weight: R::one(),
        })
    }
}

/// Discrete equilibrium table per velocity node, normalized so that its
/// velocity quadrature is exactly one.
pub fn equilibrium_table<R: Real>(
    vset: &VelocitySet<R>,
    dist: EquilibriumDist,
) -> Result<Vec<R>> {
    match (dist, vset.kind) {
        (EquilibriumDist::UniformBall, VelocityKind::Ball)
        | (EquilibriumDist::SphereDelta, VelocityKind::Sphere) => {
            let inv = R::one() / vset.measure();
            Ok(vec![inv; vset.n_nodes()])
        }
        (EquilibriumDist::SphereDelta, VelocityKind::Ball) => Err(KinchemError::Unsupported(
            "a sphere-concentrated equilibrium is not representable on the ball quadrature; \
             run it on the sphere velocity set or use the closed-form diffusion tensor"
                .into(),
        )),
        (EquilibriumDist::UniformBall, VelocityKind::Sphere) => Err(KinchemError::Unsupported(
            "uniform-ball equilibrium requires the ball velocity set".into(),
        )),
    }
}

/// `int |v|^2 F dv`.
pub fn mean_square_speed<R: Real>(dist: EquilibriumDist, radius: R) -> R {
    match dist {
        EquilibriumDist::UniformBall => radius * radius / R::two(),
        EquilibriumDist::SphereDelta => radius * radius,
    }
}

/// Diffusion tensor of the limit: `(1/2)(int |v|^2 F dv) Id`.
/// Rotational symmetry of `F` is built into the enum.
pub fn effective_diffusion<R: Real>(dist: EquilibriumDist, radius: R) -> [[R; 2]; 2] {
    let d = mean_square_speed(dist, radius).half();
    [[d, R::zero()], [R::zero(), d]]
}

/// Chemotactic coefficient of the limit, `chi0 |V|^2 / 8 pi = chi0 pi R^4 / 8`
/// (the turning bias integrates over the ball velocity set).
pub fn chemotactic_coefficient<R: Real>(chi0: R, radius: R) -> R {
    chi0 * R::PI() * radius.powi(4) / R::of(8.0)
}

/// One scaled step: Strang composition of `v/eps` transport and the exact
/// exponential relaxation + turning update at rate `1/eps^2` and `chi0/eps`.
pub fn scaled_kinetic_step<R: Real>(
    state: &mut PhaseState<R>,
    params: &ScaledParams<R>,
    f_table: &[R],
    dt: R,
) -> Result<()> {
    let eps = params.epsilon;
    if params.relax_weight > R::zero() {
        let relax_limit = R::of(0.5) * eps * eps;
        if dt > relax_limit * (R::one() + R::of(1e-12)) {
            return Err(KinchemError::CflViolation {
                dt: dt.to_f64x(),
                limit: relax_limit.to_f64x(),
                context: "scaled step: relaxation-resolving bound dt <= eps^2 / 2".into(),
            });
        }
    }
    let grid = state.grid.clone();
    let scale = R::one() / eps;
    transport_step_bc(state, dt.half(), OuterBc::Outflow, scale, params.cfl)?;
    let rho = state.rho_of();
    let field = chemfield::solve_radial_alpha0(&rho)?;
    scaled_collision(state, &grid, &rho.rho, &field.sprime, params, f_table, dt);
    transport_step_bc(state, dt.half(), OuterBc::Outflow, scale, params.cfl)?;
    state.t += dt;
    Ok(())
}

fn scaled_collision<R: Real>(
    state: &mut PhaseState<R>,
    grid: &PhaseGrid<R>,
    rho: &[R],
    sprime: &[R],
    params: &ScaledParams<R>,
    f_table: &[R],
    dt: R,
) {
    let nr = grid.nr;
    let nphi = grid.nphi();
    let eps = params.epsilon;
    let omega_d = grid.vset.omega_discrete();
    let relax_rate = params.relax_weight / (eps * eps);
    let bias_rate = params.chi0 / eps;
    state
        .g
        .par_chunks_mut(nr)
        .enumerate()
        .for_each(|(slice, g)| {
            let iw = slice / nphi;
            let iphi = slice % nphi;
            let w = grid.vset.speeds[iw].w;
            let incoming = (-grid.vset.angles.cos_c[iphi]).max(R::zero());
            let f_eq = f_table[slice];
            for i in 0..nr {
                let s_abs = sprime[i].abs();
                let lam = relax_rate + bias_rate * omega_d * s_abs;
                if lam == R::zero() {
                    continue;
                }
                // balance value: (relax_rate F + bias_rate w |S'| (cos phi)_-) rho / lam
                let target =
                    (relax_rate * f_eq + bias_rate * w * s_abs * incoming) * rho[i] / lam;
                let e = (-lam * dt).exp();
                g[i] = target * (R::one() - e) + g[i] * e;
            }
        });
}

/// Drift/diffusion stability limits of the radial limit solver.
pub fn parabolic_dt_limit<R: Real>(rho: &RadialDensity<R>, diffusion: R, chi_tilde: R) -> R {
    let dr = rho.dr;
    let diff_limit = R::of(0.4) * dr * dr / diffusion;
    // worst drift speed from the gradient bound M / (2 pi r_min)
    let mass = rho.mass();
    let umax = chi_tilde * mass / (R::two() * R::PI() * rho.r_centers[0]);
    if umax > R::zero() {
        diff_limit.min(R::of(0.5) * dr / umax)
    } else {
        diff_limit
    }
}

/// One explicit conservative step of
/// `d rho/dt = (1/r) d_r (r D d_r rho) - (chi~/r) d_r (r rho S')`
/// with central diffusion and upwind drift. No-flux outer boundary.
pub fn parabolic_step<R: Real>(
    rho: &mut RadialDensity<R>,
    dt: R,
    chi0: R,
    radius: R,
    dist: EquilibriumDist,
) -> Result<()> {
    let diffusion = mean_square_speed(dist, radius).half();
    let chi_tilde = chemotactic_coefficient(chi0, radius);
    parabolic_step_coeffs(rho, dt, diffusion, chi_tilde)
}

pub fn parabolic_step_coeffs<R: Real>(
    rho: &mut RadialDensity<R>,
    dt: R,
    diffusion: R,
    chi_tilde: R,
) -> Result<()> {
    let dr = rho.dr;
    let diff_limit = R::of(0.4) * dr * dr / diffusion;
    if dt > diff_limit * (R::one() + R::of(1e-12)) {
        return Err(KinchemError::CflViolation {
            dt: dt.to_f64x(),
            limit: diff_limit.to_f64x(),
            context: "parabolic step: diffusion bound dt <= 0.4 dr^2 / D".into(),
        });
    }
    let nr = rho.rho.len();
    let c = rho.line_masses();
    // interface gradients of the chemical: |S'|(i dr) = prefix(c) / (i dr)
    let mut prefix = R::zero();
    let mut flux = vec![R::zero(); nr + 1];
    for k in 1..nr {
        prefix += c[k - 1];
        let r_if = R::of_usize(k) * dr;
        let sprime_if = -prefix / r_if;
        let grad = (rho.rho[k] - rho.rho[k - 1]) / dr;
        let u = chi_tilde * sprime_if;
        let donor = if u > R::zero() { rho.rho[k - 1] } else { rho.rho[k] };
        flux[k] = r_if * (diffusion * grad - u * donor);
    }
    // flux[0] and flux[nr] stay zero: regularity at the axis, no-flux outer
    for i in 0..nr {
        rho.rho[i] = rho.rho[i] + dt * (flux[i + 1] - flux[i]) / (rho.r_centers[i] * dr);
    }
    Ok(())
}

/// Run the limit solver to `t_end` with automatic sub-stepping.
pub fn parabolic_run<R: Real>(
    rho: &mut RadialDensity<R>,
    t_end: R,
    chi0: R,
    radius: R,
    dist: EquilibriumDist,
) -> Result<()> {
    let diffusion = mean_square_speed(dist, radius).half();
    let chi_tilde = chemotactic_coefficient(chi0, radius);
    let mut t = R::zero();
    while t < t_end {
        let dt_max = parabolic_dt_limit(rho, diffusion, chi_tilde);
        let dt = dt_max.min(t_end - t);
        parabolic_step_coeffs(rho, dt, diffusion, chi_tilde)?;
        t += dt;
    }
    Ok(())
}

/// `L^1` distance of two densities in the `2 pi r dr` measure.
pub fn l1_distance<R: Real>(a: &RadialDensity<R>, b: &RadialDensity<R>) -> R {
    let terms: Vec<R> = a
        .r_centers
        .iter()
        .zip(a.rho.iter().zip(&b.rho))
        .map(|(&r, (&x, &y))| (x - y).abs() * r * a.dr)
        .collect();
    R::two() * R::PI() * pairwise_sum(&terms)
}

#[derive(Debug, Clone)]
pub struct LimitStudyEntry {
    pub epsilon: f64,
    pub l1_error: f64,
    pub kinetic_mass: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct LimitStudyReport {
    pub entries: Vec<LimitStudyEntry>,
    pub monotone_nonincreasing: bool,
    pub parabolic_mass: f64,
}

/// Grid and model inputs of a limit study.
#[derive(Debug, Clone)]
pub struct LimitStudyConfig {
    pub chi0: f64,
    pub radius: f64,
    pub mass: f64,
    pub sigma: f64,
    pub t_end: f64,
    pub nr: usize,
    pub nw: usize,
    pub nphi: usize,
    pub r_max: f64,
    pub cfl: f64,
}

impl Default for LimitStudyConfig {
    fn default() -> Self {
        Self {
            chi0: 1.0,
            radius: 1.0,
            mass: 8.0,
            sigma: 0.8,
            t_end: 0.6,
            nr: 192,
            nw: 6,
            nphi: 32,
            r_max: 4.0,
            cfl: 0.5,
        }
    }
}

/// Run the scaled kinetic solver for each `epsilon` from the shared
/// well-prepared data `f0 = rho0 F`, run the limit solver once, and report
/// the `L^1` distances at `t_end`.
pub fn limit_study(cfg: &LimitStudyConfig, epsilons: &[f64]) -> Result<LimitStudyReport> {
    let mut rho_par = RadialDensity::<f64>::gaussian(cfg.nr, cfg.r_max, cfg.mass, cfg.sigma)?;
    let rho0 = rho_par.clone();
    parabolic_run(
        &mut rho_par,
        cfg.t_end,
        cfg.chi0,
        cfg.radius,
        EquilibriumDist::UniformBall,
    )?;

    let mut entries = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let vset = VelocitySet::<f64>::ball(cfg.radius, cfg.nw, cfg.nphi)?;
        let grid = PhaseGrid::new(cfg.nr, cfg.r_max, vset)?;
        let params = ScaledParams::new(eps, EquilibriumDist::UniformBall, cfg.chi0, cfg.cfl)?;
        let f_table = equilibrium_table(&grid.vset, params.f_dist)?;
        let mut state = PhaseState::zero(grid.clone());
        // f0 = rho0 F per node
        for (slice, &f_eq) in f_table.iter().enumerate() {
            for ir in 0..cfg.nr {
                state.g[slice * cfg.nr + ir] = rho0.rho[ir] * f_eq;
            }
        }
        let dt_transport = grid.suggested_dt(cfg.cfl) * eps;
        let dt_relax = 0.5 * eps * eps;
        let dt = dt_transport.min(dt_relax);
        let mut steps = 0usize;
        let mut t = 0.0;
        while t < cfg.t_end - 1e-12 {
            let step_dt = dt.min(cfg.t_end - t);
            scaled_kinetic_step(&mut state, &params, &f_table, step_dt)?;
            t += step_dt;
            steps += 1;
        }
        let rho_eps = state.rho_of();
        entries.push(LimitStudyEntry {
            epsilon: eps,
            l1_error: l1_distance(&rho_eps, &rho_par),
            kinetic_mass: rho_eps.mass(),
            steps,
        });
    }
    let monotone = entries
        .windows(2)
        .all(|w| w[0].epsilon <= w[1].epsilon || w[1].l1_error <= w[0].l1_error * (1.0 + 1e-9));
    Ok(LimitStudyReport {
        entries,
        monotone_nonincreasing: monotone,
        parabolic_mass: rho_par.mass(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::second_moment_density;
    use approx::assert_relative_eq;

    #[test]
    fn equilibrium_tables_normalize() {
        let ball = VelocitySet::<f64>::ball(1.0, 8, 32).unwrap();
        let f = equilibrium_table(&ball, EquilibriumDist::UniformBall).unwrap();
        let total: f64 = ball
            .nodes()
            .zip(f.iter())
            .map(|((_, _, wgt), &fv)| fv * wgt)
            .sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-13);
        assert!(equilibrium_table(&ball, EquilibriumDist::SphereDelta).is_err());

        let sphere = VelocitySet::<f64>::sphere(1.0, 32).unwrap();
        let fs = equilibrium_table(&sphere, EquilibriumDist::SphereDelta).unwrap();
        let total_s: f64 = sphere
            .nodes()
            .zip(fs.iter())
            .map(|((_, _, wgt), &fv)| fv * wgt)
            .sum();
        assert_relative_eq!(total_s, 1.0, max_relative = 1e-13);
    }

    #[test]
    fn effective_diffusion_values() {
        let d = effective_diffusion::<f64>(EquilibriumDist::UniformBall, 1.0);
        assert_relative_eq!(d[0][0], 0.25);
        assert_eq!(d[0][1], 0.0);
        assert_eq!(d[1][0], 0.0);
        let ds = effective_diffusion::<f64>(EquilibriumDist::SphereDelta, 1.0);
        assert_relative_eq!(ds[1][1], 0.5);
    }

    #[test]
    fn scaled_step_fixed_point_at_equilibrium() {
        let vset = VelocitySet::<f64>::ball(1.0, 6, 32).unwrap();
        let grid = PhaseGrid::new(64, 6.0, vset).unwrap();
        let params = ScaledParams::new(0.5, EquilibriumDist::UniformBall, 0.0, 0.5).unwrap();
        let f_table = equilibrium_table(&grid.vset, params.f_dist).unwrap();
        // spatially uniform equilibrium: fixed point of the relaxation substep
        let mut st = PhaseState::from_fn(grid.clone(), |_, _, _| 1.0 / grid.vset.measure());
        let before = st.g.clone();
        let dt = (grid.suggested_dt(0.5) * 0.5).min(0.5 * 0.25);
        scaled_kinetic_step(&mut st, &params, &f_table, dt).unwrap();
        // interior unchanged up to the outflow boundary cells
        let nr = grid.nr;
        for (k, (&a, &b)) in st.g.iter().zip(&before).enumerate() {
            let ir = k % nr;
            if ir < nr - 2 {
                assert!((a - b).abs() < 1e-12, "cell {k} moved {a} vs {b}");
            }
        }
    }

    #[test]
    fn scaled_step_conserves_mass() {
        let vset = VelocitySet::<f64>::ball(1.0, 6, 32).unwrap();
        let grid = PhaseGrid::new(96, 8.0, vset).unwrap();
        let params = ScaledParams::new(0.4, EquilibriumDist::UniformBall, 1.0, 0.5).unwrap();
        let f_table = equilibrium_table(&grid.vset, params.f_dist).unwrap();
        let mut st = PhaseState::from_fn(grid.clone(), |r, w, phi| {
            (-(r * r) / 2.0).exp() * (1.0 + 0.2 * (phi + w).cos()) / grid.vset.measure()
        });
        let m0 = st.mass();
        let dt = (grid.suggested_dt(0.5) * 0.4).min(0.5 * 0.16);
        for _ in 0..20 {
            scaled_kinetic_step(&mut st, &params, &f_table, dt).unwrap();
        }
        assert_relative_eq!(st.mass() + st.outflow, m0, max_relative = 1e-11);
    }

    #[test]
    fn scaled_step_rejects_unresolved_relaxation() {
        let vset = VelocitySet::<f64>::ball(1.0, 6, 32).unwrap();
        let grid = PhaseGrid::new(32, 2.0, vset).unwrap();
        let params = ScaledParams::new(0.05, EquilibriumDist::UniformBall, 1.0, 0.5).unwrap();
        let f_table = equilibrium_table(&grid.vset, params.f_dist).unwrap();
        let mut st = PhaseState::zero(grid);
        // dt above eps^2/2 = 1.25e-3
        assert!(scaled_kinetic_step(&mut st, &params, &f_table, 2e-3).is_err());
    }

    #[test]
    fn velocity_marginal_relaxes_to_equilibrium() {
        let vset = VelocitySet::<f64>::ball(1.0, 6, 32).unwrap();
        let grid = PhaseGrid::new(64, 8.0, vset).unwrap();
        let eps = 0.1;
        let params = ScaledParams::new(eps, EquilibriumDist::UniformBall, 0.0, 0.5).unwrap();
        let f_table = equilibrium_table(&grid.vset, params.f_dist).unwrap();
        let sigma = 4.0;
        // start off-equilibrium: an angular bump on top of the density
        let measure = grid.vset.measure();
        let mut st = PhaseState::from_fn(grid.clone(), |r, _, phi| {
            (-(r * r) / (2.0 * sigma * sigma)).exp() * (1.0 + 0.5 * phi.cos()) / measure
        });
        let t_end = 5.0 * eps * eps;
        let dt = (grid.suggested_dt(0.5) * eps).min(0.5 * eps * eps);
        let mut t = 0.0;
        while t < t_end {
            let d = dt.min(t_end - t);
            scaled_kinetic_step(&mut st, &params, &f_table, d).unwrap();
            t += d;
        }
        let rho = st.rho_of();
        // check the marginal shape at small radii where the gradient correction is negligible
        let f_eq = f_table[0];
        for ir in 0..6 {
            for slice in 0..grid.nw() * grid.nphi() {
                let marginal = st.g[slice * grid.nr + ir] / rho.rho[ir];
                assert!(
                    (marginal - f_eq).abs() <= 0.01 * f_eq,
                    "marginal off by {:e} at slice {slice}, ir {ir}",
                    (marginal - f_eq).abs() / f_eq
                );
            }
        }
    }

    #[test]
    fn scaled_with_unit_epsilon_and_no_relaxation_matches_kinsolver() {
        use crate::kinsolver::{step, SolverParams};
        let vset = VelocitySet::<f64>::ball(1.0, 6, 32).unwrap();
        let grid = PhaseGrid::new(48, 3.0, vset).unwrap();
        let init = |r: f64, w: f64, phi: f64| (2.0 - r).max(0.0) * (1.0 + 0.3 * (phi - 0.2).cos()) * w;
        let mut a = PhaseState::from_fn(grid.clone(), init);
        let mut b = PhaseState::from_fn(grid.clone(), init);
        let mut params = ScaledParams::new(1.0, EquilibriumDist::UniformBall, 1.2, 0.5).unwrap();
        params.relax_weight = 0.0;
        let f_table = equilibrium_table(&grid.vset, params.f_dist).unwrap();
        let kin = SolverParams::new(1.2, 0.0, 0.5).unwrap();
        let dt = grid.suggested_dt(0.5);
        for _ in 0..10 {
            scaled_kinetic_step(&mut a, &params, &f_table, dt).unwrap();
            step(&mut b, &kin, dt).unwrap();
        }
        let scale = b.max_value();
        for (x, y) in a.g.iter().zip(&b.g) {
            assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
        }
    }

    #[test]
    fn parabolic_heat_identity() {
        // chi~ = 0: d/dt int |x|^2 rho = 4 D M, i.e. dI/dt = 2 D M
        let mut rho = RadialDensity::<f64>::gaussian(256, 8.0, 3.0, 1.0).unwrap();
        let d = 0.25;
        let dt = 0.3 * rho.dr * rho.dr / d;
        let i0 = second_moment_density(&rho);
        let steps = 200;
        for _ in 0..steps {
            parabolic_step_coeffs(&mut rho, dt, d, 0.0).unwrap();
        }
        let i1 = second_moment_density(&rho);
        let rate = (i1 - i0) / (dt * steps as f64);
        assert_relative_eq!(rate, 2.0 * d * rho.mass(), max_relative = 1e-3);
    }

    #[test]
    fn parabolic_zero_density_stays_zero() {
        let mut rho = RadialDensity::<f64>::on_grid(64, 2.0, |_| 0.0).unwrap();
        parabolic_step(&mut rho, 1e-4, 1.0, 1.0, EquilibriumDist::UniformBall).unwrap();
        assert!(rho.rho.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn parabolic_rejects_large_dt() {
        let mut rho = RadialDensity::<f64>::gaussian(64, 4.0, 1.0, 1.0).unwrap();
        let dr = rho.dr;
        assert!(parabolic_step_coeffs(&mut rho, dr * dr, 0.25, 0.0).is_err());
    }

    #[test]
    fn parabolic_mass_conserved() {
        let mut rho = RadialDensity::<f64>::gaussian(128, 6.0, 24.0, 0.8).unwrap();
        let m0 = rho.mass();
        parabolic_run(&mut rho, 0.05, 1.0, 1.0, EquilibriumDist::UniformBall).unwrap();
        assert_relative_eq!(rho.mass(), m0, max_relative = 1e-10);
    }

    #[test]
    fn parabolic_dichotomy_at_desk_scale() {
        // supercritical mass concentrates, subcritical spreads
        let run = |mass: f64| -> (f64, f64) {
            let mut rho = RadialDensity::<f64>::gaussian(192, 6.0, mass, 1.0).unwrap();
            let max0 = rho.rho.iter().cloned().fold(0.0, f64::max);
            parabolic_run(&mut rho, 1.0, 1.0, 1.0, EquilibriumDist::UniformBall).unwrap();
            let max1 = rho.rho.iter().cloned().fold(0.0, f64::max);
            (max0, max1)
        };
        let (m0_sub, m1_sub) = run(8.0);
        assert!(m1_sub < m0_sub, "subcritical peak should decay");
        let (m0_sup, m1_sup) = run(24.0);
        assert!(m1_sup > 2.0 * m0_sup, "supercritical peak should grow");
    }

    #[test]
    fn matched_threshold_identity() {
        use crate::thresholds::{kinetic_sharp_threshold, parabolic_threshold_from};
        for &radius in &[0.5_f64, 1.0, 2.0] {
            for &chi0 in &[0.3_f64, 1.0, 2.5] {
                for dist in [EquilibriumDist::UniformBall, EquilibriumDist::SphereDelta] {
                    let msq = mean_square_speed(dist, radius);
                    let kinetic = kinetic_sharp_threshold(msq, chi0, radius);
                    let d = mean_square_speed(dist, radius) / 2.0;
                    let parabolic = parabolic_threshold_from(d, chemotactic_coefficient(chi0, radius));
                    assert_relative_eq!(kinetic, parabolic, max_relative = 1e-13);
                }
            }
        }
    }
}
