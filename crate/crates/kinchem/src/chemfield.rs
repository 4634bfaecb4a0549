//! Radial chemical field: `-lap S + alpha S = rho` under radial symmetry,
//! plus the kernel-difference machinery used when `alpha > 0`.
//!
//! For `alpha = 0` the gradient comes from the cumulative mass,
//! `r |S'(r)| = int_0^r lambda rho(lambda) dlambda`; the discrete cumulative
//! uses the same midpoint cell masses as the mass functional with a half-cell
//! contribution at the cell's own center, which makes the virial coupling
//! `int x . grad S rho dx = -M^2 / 4 pi` an exact identity of the scheme.

use crate::error::{KinchemError, Result};
use crate::quadrature::adaptive_simpson;
use crate::real::{pairwise_sum, Real};

/// Radial cell-centered density (per unit area).
#[derive(Debug, Clone)]
pub struct RadialDensity<R> {
    pub r_centers: Vec<R>,
    pub dr: R,
    pub rho: Vec<R>,
}

pub type RadialDensity64 = RadialDensity<f64>;

impl<R: Real> RadialDensity<R> {
    pub fn new(r_centers: Vec<R>, dr: R, rho: Vec<R>) -> Result<Self> {
        if r_centers.is_empty() || r_centers.len() != rho.len() {
            return Err(KinchemError::InvalidConfig(
                "radial density grids must be nonempty and consistent".into(),
            ));
        }
        if r_centers[0] <= R::zero() {
            return Err(KinchemError::InvalidConfig(
                "first radial center must be positive".into(),
            ));
        }
        for w in r_centers.windows(2) {
            if w[1] <= w[0] {
                return Err(KinchemError::InvalidConfig(
                    "radial centers must be strictly increasing".into(),
                ));
            }
        }
        if rho.iter().any(|&x| x < R::zero()) {
            return Err(KinchemError::InvalidConfig(
                "density must be nonnegative".into(),
            ));
        }
        Ok(Self { r_centers, dr, rho })
    }

    /// Uniform cell-centered grid on `(0, r_max]` with centers `(i + 1/2) dr`.
    pub fn on_grid(nr: usize, r_max: R, f: impl Fn(R) -> R) -> Result<Self> {
        let dr = r_max / R::of_usize(nr);
        let r_centers: Vec<R> = (0..nr)
            .map(|i| (R::of_usize(i) + R::of(0.5)) * dr)
            .collect();
        let rho = r_centers.iter().map(|&r| f(r)).collect();
        Self::new(r_centers, dr, rho)
    }

    /// Uniform disk of radius `a`, rescaled so the grid mass equals `mass`
    /// exactly.
    pub fn uniform_disk(nr: usize, r_max: R, mass: R, a: R) -> Result<Self> {
        let mut d = Self::on_grid(nr, r_max, |r| if r <= a { R::one() } else { R::zero() })?;
        d.rescale_mass(mass);
        Ok(d)
    }

    /// Radial Gaussian `exp(-r^2 / 2 sigma^2)` rescaled to the target mass.
    pub fn gaussian(nr: usize, r_max: R, mass: R, sigma: R) -> Result<Self> {
        let mut d = Self::on_grid(nr, r_max, |r| (-(r * r) / (R::two() * sigma * sigma)).exp())?;
        d.rescale_mass(mass);
        Ok(d)
    }

    pub fn rescale_mass(&mut self, mass: R) {
        let m0 = self.mass();
        if m0 > R::zero() {
            let s = mass / m0;
            for x in &mut self.rho {
                *x = *x * s;
            }
        }
    }

    /// Line masses `c_i = r_i rho_i dr`; the total mass is `2 pi sum c_i`.
    pub fn line_masses(&self) -> Vec<R> {
        self.r_centers
            .iter()
            .zip(&self.rho)
            .map(|(&r, &q)| r * q * self.dr)
            .collect()
    }

    pub fn mass(&self) -> R {
        R::two() * R::PI() * pairwise_sum(&self.line_masses())
    }

    /// Cumulative line mass at each cell center: prefix cells plus half of
    /// the cell's own contribution.
    pub fn cumulative_line_mass(&self) -> Vec<R> {
        let c = self.line_masses();
        let mut out = Vec::with_capacity(c.len());
        let mut prefix = R::zero();
        for &ci in &c {
            out.push(prefix + ci.half());
            prefix += ci;
        }
        out
    }

    /// Tail line mass `T_i = int_{r_i}^inf lambda rho dlambda` with the same
    /// half-cell convention, so `T_i + cum_i = M / 2 pi` exactly.
    pub fn tail_line_mass(&self) -> Vec<R> {
        let c = self.line_masses();
        let mut out = vec![R::zero(); c.len()];
        let mut suffix = R::zero();
        for i in (0..c.len()).rev() {
            out[i] = suffix + c[i].half();
            suffix += c[i];
        }
        out
    }
}

/// Radial derivative of the chemical concentration.
#[derive(Debug, Clone)]
pub struct ChemField<R> {
    pub r_centers: Vec<R>,
    pub dr: R,
    pub sprime: Vec<R>,
    pub alpha: R,
}

pub type ChemField64 = ChemField<f64>;

impl<R: Real> ChemField<R> {
    pub fn zero_like(rho: &RadialDensity<R>) -> Self {
        Self {
            r_centers: rho.r_centers.clone(),
            dr: rho.dr,
            sprime: vec![R::zero(); rho.rho.len()],
            alpha: R::zero(),
        }
    }
}

/// Field gradient for `alpha = 0`: `S'(r) = -(1/r) int_0^r lambda rho dlambda`.
pub fn solve_radial_alpha0<R: Real>(rho: &RadialDensity<R>) -> Result<ChemField<R>> {
    let cum = rho.cumulative_line_mass();
    let sprime = rho
        .r_centers
        .iter()
        .zip(&cum)
        .map(|(&r, &c)| -c / r)
        .collect();
    Ok(ChemField {
        r_centers: rho.r_centers.clone(),
        dr: rho.dr,
        sprime,
        alpha: R::zero(),
    })
}

/// `|grad B_alpha|(z)` from the integral representation
/// `B_alpha(z) = (1/4pi) int_0^inf t^{-1} exp(-z^2/4t - alpha t) dt`,
/// differentiated under the integral and evaluated with the substitution
/// `t = e^u` (the integrand then decays doubly exponentially both ways).
pub fn bessel_gradient_kernel<R: Real>(z: R, alpha: R) -> Result<R> {
    if z <= R::zero() {
        return Err(KinchemError::Singularity(
            "bessel gradient kernel: z must be positive".into(),
        ));
    }
    if alpha <= R::zero() {
        return Err(KinchemError::InvalidConfig(
            "bessel gradient kernel: alpha must be positive (use the 1/(2 pi z) kernel at alpha = 0)"
                .into(),
        ));
    }
    let q = z * z / R::of(4.0);
    let u_lo = q.ln() - R::of(20.0);
    let u_hi = (R::of(750.0) / alpha).ln() + R::of(5.0);
    let f = move |u: R| {
        let t_inv = (-u).exp();
        (-u - q * t_inv - alpha * u.exp()).exp()
    };
    let raw = adaptive_simpson(&f, u_lo, u_hi, R::of(1e-10), "bessel gradient kernel")?;
    Ok(z / (R::of(8.0) * R::PI()) * raw)
}

/// Pointwise deficit `1/(2 pi z) - |grad B_alpha|(z) >= 0`, evaluated from a
/// cancellation-free integral: `(z/8pi) int t^{-2} e^{-z^2/4t}(1 - e^{-alpha t}) dt`.
pub fn kernel_gradient_deficit<R: Real>(z: R, alpha: R) -> Result<R> {
    if z <= R::zero() {
        return Err(KinchemError::Singularity(
            "kernel deficit: z must be positive".into(),
        ));
    }
    if alpha <= R::zero() {
        return Ok(R::zero());
    }
    let q = z * z / R::of(4.0);
    let u_lo = q.ln() - R::of(20.0);
    let u_hi = (R::one() / alpha).ln().max(R::zero()) + R::of(25.0);
    let f = move |u: R| {
        let t_inv = (-u).exp();
        let base = (-u - q * t_inv).exp();
        base * (-(-alpha * u.exp()).exp_m1())
    };
    let raw = adaptive_simpson(&f, u_lo, u_hi, R::of(1e-12), "kernel gradient deficit")?;
    Ok(z / (R::of(8.0) * R::PI()) * raw)
}

/// The universal constant bounding `|grad B_alpha - grad B_0| / sqrt(alpha)`:
/// `(1/2pi) int_{R^2} dzeta / (|zeta| (1 + |zeta|^2))`. In radial form this is
/// `int_0^inf dr / (1 + r^2)`; the tail maps onto `(0, 1]` by `r -> 1/r`.
pub fn kernel_constant<R: Real>() -> Result<R> {
    let inner = adaptive_simpson(
        &|r: R| R::one() / (R::one() + r * r),
        R::zero(),
        R::one(),
        R::of(1e-12),
        "kernel constant",
    )?;
    Ok(R::two() * inner)
}

/// Tabulated kernel deficit with linear interpolation in `ln z`, anchored at
/// `(0, 0)`. Used by the `alpha > 0` field solve where the deficit is needed
/// at every pair distance.
#[derive(Debug, Clone)]
pub struct DeficitTable<R> {
    alpha: R,
    ln_z_min: R,
    ln_step: R,
    z_min: R,
    values: Vec<R>,
}

impl<R: Real> DeficitTable<R> {
    pub fn build(alpha: R, z_min: R, z_max: R, n: usize) -> Result<Self> {
        assert!(n >= 8 && z_min > R::zero() && z_max > z_min);
        let ln_z_min = z_min.ln();
        let ln_step = (z_max.ln() - ln_z_min) / R::of_usize(n - 1);
        let mut values = Vec::with_capacity(n);
        for k in 0..n {
            let z = (ln_z_min + R::of_usize(k) * ln_step).exp();
            values.push(kernel_gradient_deficit(z, alpha)?);
        }
        Ok(Self {
            alpha,
            ln_z_min,
            ln_step,
            z_min,
            values,
        })
    }

    pub fn eval(&self, z: R) -> R {
        if z <= R::zero() {
            return R::zero();
        }
        if z < self.z_min {
            // linear ramp from the origin anchor
            return self.values[0] * z / self.z_min;
        }
        let s = (z.ln() - self.ln_z_min) / self.ln_step;
        let k = s
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.values.len() - 2);
        let frac = s - R::of_usize(k);
        self.values[k] + (self.values[k + 1] - self.values[k]) * frac.max(R::zero()).min(R::one())
    }

    pub fn alpha(&self) -> R {
        self.alpha
    }
}

/// Field gradient for `alpha > 0` via the deficit correction on top of the
/// `alpha = 0` cumulative solve. The correction kernel is bounded by
/// `sqrt(alpha) C`, so the convolution needs no special treatment near the
/// diagonal.
pub fn solve_radial_alpha_pos<R: Real>(
    rho: &RadialDensity<R>,
    alpha: R,
    n_theta: usize,
) -> Result<ChemField<R>> {
    if alpha <= R::zero() {
        return Err(KinchemError::InvalidConfig(
            "alpha must be positive here; use the alpha = 0 solver".into(),
        ));
    }
    let r_max = *rho.r_centers.last().unwrap() + rho.dr;
    let table = DeficitTable::build(alpha, rho.dr * R::of(1e-3), R::two() * r_max, 512)?;
    solve_radial_alpha_pos_with_table(rho, &table, n_theta)
}

pub fn solve_radial_alpha_pos_with_table<R: Real>(
    rho: &RadialDensity<R>,
    table: &DeficitTable<R>,
    n_theta: usize,
) -> Result<ChemField<R>> {
    let base = solve_radial_alpha0(rho)?;
    let nt = n_theta.max(16);
    let dtheta = R::two() * R::PI() / R::of_usize(nt);
    let thetas: Vec<(R, R)> = (0..nt)
        .map(|k| {
            let th = (R::of_usize(k) + R::of(0.5)) * dtheta;
            (th.cos(), dtheta)
        })
        .collect();
    let c = rho.line_masses();
    let mut sprime = base.sprime.clone();
    for (i, &r) in rho.r_centers.iter().enumerate() {
        let mut corr = R::zero();
        for (j, &lam) in rho.r_centers.iter().enumerate() {
            if c[j] == R::zero() {
                continue;
            }
            let mut ang = R::zero();
            for &(cos_th, w_th) in &thetas {
                let d2 = r * r + lam * lam - R::two() * r * lam * cos_th;
                if d2 <= R::of(1e-30) {
                    continue;
                }
                let d = d2.sqrt();
                ang += w_th * table.eval(d) * (r - lam * cos_th) / d;
            }
            corr += c[j] * ang;
        }
        // Degradation weakens the attraction; quadrature noise may leave a
        // tiny positive residue near the axis.
        sprime[i] = (sprime[i] + corr).min(R::zero());
    }
    Ok(ChemField {
        r_centers: rho.r_centers.clone(),
        dr: rho.dr,
        sprime,
        alpha: table.alpha(),
    })
}

/// `int x . grad S rho dx = 2 pi int r S'(r) rho(r) r dr` with the `alpha = 0`
/// field; equals `-M^2 / 4 pi` for every radial density.
pub fn virial_coupling<R: Real>(rho: &RadialDensity<R>) -> R {
    let c = rho.line_masses();
    let cum = rho.cumulative_line_mass();
    let terms: Vec<R> = c.iter().zip(&cum).map(|(&ci, &cu)| cu * ci).collect();
    -R::two() * R::PI() * pairwise_sum(&terms)
}

/// Report of the elliptic gradient bound.
#[derive(Debug, Clone)]
pub struct EllipticReport<R> {
    pub sup_abs_sprime: R,
    /// `||rho||_1^{1 - p'/2} ||rho||_p^{p'/2}` (the interpolation product the
    /// sup-norm bound scales with).
    pub interpolation_product: R,
    pub sup_r_abs_sprime: R,
    pub mass_over_2pi: R,
    /// Whether `sup_r r |S'(r)| <= M / 2 pi` held at every grid point.
    pub radial_bound_ok: bool,
}

pub fn elliptic_bound_check<R: Real>(rho: &RadialDensity<R>, p: R) -> Result<EllipticReport<R>> {
    if p <= R::two() {
        return Err(KinchemError::InadmissibleExponents(format!(
            "elliptic bound requires p > 2, got {p}"
        )));
    }
    let field = solve_radial_alpha0(rho)?;
    let mut sup = R::zero();
    let mut sup_r = R::zero();
    for (&r, &s) in rho.r_centers.iter().zip(&field.sprime) {
        sup = sup.max(s.abs());
        sup_r = sup_r.max(r * s.abs());
    }
    let mass = rho.mass();
    let p_prime = p / (p - R::one());
    let lp_terms: Vec<R> = rho
        .r_centers
        .iter()
        .zip(&rho.rho)
        .map(|(&r, &q)| r * q.powf(p) * rho.dr)
        .collect();
    let lp = (R::two() * R::PI() * pairwise_sum(&lp_terms)).powf(R::one() / p);
    let product = mass.powf(R::one() - p_prime.half()) * lp.powf(p_prime.half());
    let m2pi = mass / (R::two() * R::PI());
    Ok(EllipticReport {
        sup_abs_sprime: sup,
        interpolation_product: product,
        sup_r_abs_sprime: sup_r,
        mass_over_2pi: m2pi,
        radial_bound_ok: sup_r <= m2pi * (R::one() + R::of(1e-12)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn uniform_disk_field_matches_analytic() {
        let m = 3.0;
        let a = 1.0;
        let rho = RadialDensity::<f64>::uniform_disk(512, 2.0, m, a).unwrap();
        let f = solve_radial_alpha0(&rho).unwrap();
        for (&r, &s) in rho.r_centers.iter().zip(&f.sprime) {
            let expect = if r <= a {
                -m * r / (2.0 * PI * a * a)
            } else {
                -m / (2.0 * PI * r)
            };
            assert_relative_eq!(s, expect, max_relative = 2e-3, epsilon = 1e-6);
        }
    }

    #[test]
    fn zero_density_gives_zero_field() {
        let rho = RadialDensity::<f64>::on_grid(64, 2.0, |_| 0.0).unwrap();
        let f = solve_radial_alpha0(&rho).unwrap();
        assert!(f.sprime.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn nonpositive_grid_radii_rejected() {
        let err = RadialDensity::<f64>::new(vec![0.0, 0.5], 0.5, vec![1.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn virial_coupling_identity_exact() {
        for mass in [1.0, 2.0 * PI, 10.0] {
            let rho = RadialDensity::<f64>::gaussian(128, 6.0, mass, 0.9).unwrap();
            let m = rho.mass();
            assert_relative_eq!(
                virial_coupling(&rho),
                -m * m / (4.0 * PI),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn virial_coupling_zero_density() {
        let rho = RadialDensity::<f64>::on_grid(32, 1.0, |_| 0.0).unwrap();
        assert_eq!(virial_coupling(&rho), 0.0);
    }

    #[test]
    fn cumulative_mass_monotone_and_bounded() {
        let rho = RadialDensity::<f64>::gaussian(200, 8.0, 5.0, 1.3).unwrap();
        let cum = rho.cumulative_line_mass();
        for w in cum.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let f = solve_radial_alpha0(&rho).unwrap();
        let bound = rho.mass() / (2.0 * PI);
        for (&r, &s) in rho.r_centers.iter().zip(&f.sprime) {
            assert!(s <= 0.0);
            assert!(r * s.abs() <= bound * (1.0 + 1e-12));
        }
        // r |S'| is nondecreasing
        let rs: Vec<f64> = rho
            .r_centers
            .iter()
            .zip(&f.sprime)
            .map(|(&r, &s)| r * s.abs())
            .collect();
        for w in rs.windows(2) {
            assert!(w[1] >= w[0] - 1e-15);
        }
    }

    #[test]
    fn kernel_constant_is_pi_over_two() {
        let c = kernel_constant::<f64>().unwrap();
        assert_relative_eq!(c, PI / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn bessel_kernel_poisson_limit() {
        // alpha -> 0+: |grad B_alpha|(1) -> 1/(2 pi)
        let g = bessel_gradient_kernel(1.0_f64, 1e-12).unwrap();
        assert_relative_eq!(g, 1.0 / (2.0 * PI), max_relative = 1e-5);
    }

    #[test]
    fn bessel_kernel_rejects_singular_point() {
        assert!(bessel_gradient_kernel(0.0_f64, 0.5).is_err());
        assert!(bessel_gradient_kernel(1.0_f64, 0.0).is_err());
    }

    #[test]
    fn kernel_deficit_bounded_by_sqrt_alpha_c() {
        let c = PI / 2.0;
        for alpha in [0.01_f64, 0.1, 1.0] {
            for k in 0..100 {
                let z = 0.02 + 0.25 * k as f64;
                let d = kernel_gradient_deficit(z, alpha).unwrap();
                assert!(d >= 0.0);
                assert!(
                    d <= alpha.sqrt() * c * (1.0 + 1e-6),
                    "alpha={alpha} z={z} d={d}"
                );
            }
        }
    }

    #[test]
    fn deficit_agrees_with_direct_difference() {
        for alpha in [0.05_f64, 0.7] {
            for z in [0.3_f64, 1.0, 3.0] {
                let direct = 1.0 / (2.0 * PI * z) - bessel_gradient_kernel(z, alpha).unwrap();
                let d = kernel_gradient_deficit(z, alpha).unwrap();
                assert_relative_eq!(d, direct, max_relative = 1e-6, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn alpha_pos_solver_contract() {
        let rho = RadialDensity::<f64>::uniform_disk(96, 3.0, 2.0, 1.0).unwrap();
        assert!(solve_radial_alpha_pos(&rho, 0.0, 64).is_err());

        let zero = RadialDensity::<f64>::on_grid(32, 2.0, |_| 0.0).unwrap();
        let fz = solve_radial_alpha_pos(&zero, 0.5, 32).unwrap();
        assert!(fz.sprime.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn alpha_pos_stays_near_alpha0_within_kernel_bound() {
        let mass = 1.0;
        let rho = RadialDensity::<f64>::uniform_disk(96, 3.0, mass, 1.0).unwrap();
        let f0 = solve_radial_alpha0(&rho).unwrap();
        let alpha = 0.01;
        let fa = solve_radial_alpha_pos(&rho, alpha, 128).unwrap();
        let bound = alpha.sqrt() * (PI / 2.0) * mass * (1.0 + 1e-3);
        for (sa, s0) in fa.sprime.iter().zip(&f0.sprime) {
            assert!((sa - s0).abs() <= bound, "|{sa} - {s0}| > {bound}");
        }
    }

    #[test]
    fn elliptic_bound_report() {
        let rho = RadialDensity::<f64>::uniform_disk(256, 2.0, 1.0, 1.0).unwrap();
        let rep = elliptic_bound_check(&rho, 3.0).unwrap();
        assert!(rep.radial_bound_ok);
        assert_relative_eq!(rep.sup_r_abs_sprime, 1.0 / (2.0 * PI), max_relative = 1e-2);
        assert!(elliptic_bound_check(&rho, 2.0).is_err());

        let zero = RadialDensity::<f64>::on_grid(32, 2.0, |_| 0.0).unwrap();
        let rep0 = elliptic_bound_check(&zero, 4.0).unwrap();
        assert_eq!(rep0.sup_abs_sprime, 0.0);
        assert_eq!(rep0.interpolation_product, 0.0);
    }

    #[test]
    fn gaussian_profile_radial_bound_everywhere() {
        let rho = RadialDensity::<f64>::gaussian(128, 6.0, 4.0, 1.0).unwrap();
        let rep = elliptic_bound_check(&rho, 3.0).unwrap();
        assert!(rep.radial_bound_ok);
    }
}
