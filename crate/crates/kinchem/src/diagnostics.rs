//! Moment functionals, mixed norms, virial-inequality tracking and blow-up
//! detection.
//!
//! The second moment `I = (1/2) int |x|^2 f`, its derivative
//! `dI/dt = int (x . v) f = 2 pi int r^2 j_par dr`, and the tail functional
//! `K = M int T dr - pi int T^2 dr` with `T(r) = int_r^inf lambda rho dlambda`
//! are the quantities entering the virial inequality
//! `dI/dt(t) <= dI/dt(0) - delta t + chi0 omega K(0)`.
//! `K` is computed from backward partial sums of the same cell masses as the
//! mass functional, which keeps its two algebraically equal forms identical
//! and makes `K >= 0` hold discretely.

use crate::chemfield::RadialDensity;
use crate::comparison::{comparison_excess, Supersolution};
use crate::error::{KinchemError, Result};
use crate::kinsolver::PhaseState;
use crate::real::{pairwise_sum, Real};

/// `I = pi sum r^3 rho dr` (radial reduction of `(1/2) int |x|^2 rho`).
pub fn second_moment_density<R: Real>(rho: &RadialDensity<R>) -> R {
    let terms: Vec<R> = rho
        .r_centers
        .iter()
        .zip(&rho.rho)
        .map(|(&r, &q)| r * r * r * q * rho.dr)
        .collect();
    R::PI() * pairwise_sum(&terms)
}

pub fn second_moment<R: Real>(state: &PhaseState<R>) -> R {
    second_moment_density(&state.rho_of())
}

/// `dI/dt = int int (x . v) f = 2 pi sum r^2 j_par dr`.
pub fn current_moment<R: Real>(state: &PhaseState<R>) -> R {
    let (jpar, _) = state.current_of();
    let terms: Vec<R> = state
        .grid
        .r_centers
        .iter()
        .zip(&jpar)
        .map(|(&r, &j)| r * r * j * state.grid.dr)
        .collect();
    R::two() * R::PI() * pairwise_sum(&terms)
}

/// `K = M int T dr - pi int T^2 dr` from backward cumulative cell masses.
pub fn k_functional<R: Real>(rho: &RadialDensity<R>, mass: R) -> R {
    let tails = rho.tail_line_mass();
    let terms: Vec<R> = tails
        .iter()
        .map(|&t| t * (mass - R::PI() * t) * rho.dr)
        .collect();
    pairwise_sum(&terms)
}

/// The "M/2" rewrite of `K`; used to cross-check the primary form.
pub fn k_functional_alt_form<R: Real>(rho: &RadialDensity<R>, mass: R) -> R {
    let tails = rho.tail_line_mass();
    let half_m = mass.half();
    let two_pi = R::two() * R::PI();
    let terms: Vec<R> = tails
        .iter()
        .map(|&t| (half_m * t + R::PI() * (mass / two_pi - t) * t) * rho.dr)
        .collect();
    pairwise_sum(&terms)
}

/// Cauchy-Schwarz bound `K <= (1/2pi) M^{3/2} sqrt(2 I)`.
pub fn k_upper_bound<R: Real>(mass: R, i2: R) -> R {
    mass.powf(R::of(1.5)) * (R::two() * i2).sqrt() / (R::two() * R::PI())
}

/// Exponent admissibility for the blow-up norms: `2 < p`, `1 < q`,
/// `0 <= 1/q - 1/p < 1/2`.
pub fn check_admissible_exponents<R: Real>(p: R, q: R) -> Result<()> {
    if !(p > R::two()) {
        return Err(KinchemError::InadmissibleExponents(format!(
            "p must exceed 2, got {p}"
        )));
    }
    if !(q > R::one()) {
        return Err(KinchemError::InadmissibleExponents(format!(
            "q must exceed 1, got {q}"
        )));
    }
    let gap = R::one() / q - R::one() / p;
    if gap < R::zero() {
        return Err(KinchemError::InadmissibleExponents(format!(
            "need q <= p so that 1/q - 1/p >= 0 (p = {p}, q = {q})"
        )));
    }
    if !(gap < R::of(0.5)) {
        return Err(KinchemError::InadmissibleExponents(format!(
            "need 1/q - 1/p < 1/2, got {}",
            gap
        )));
    }
    Ok(())
}

/// Discrete mixed norm: per radial cell the `L^q` velocity-quadrature norm,
/// then the weighted `L^p` norm over space.
pub fn lplq_norm<R: Real>(state: &PhaseState<R>, p: R, q: R) -> Result<R> {
    check_admissible_exponents(p, q)?;
    Ok(mixed_norm_unchecked(state, p, q))
}

pub(crate) fn mixed_norm_unchecked<R: Real>(state: &PhaseState<R>, p: R, q: R) -> R {
    let grid = &state.grid;
    let nr = grid.nr;
    let nphi = grid.nphi();
    let dphi = grid.vset.angles.dphi;
    let two_pi = R::two() * R::PI();
    let mut spatial = vec![R::zero(); nr];
    for (ir, s) in spatial.iter_mut().enumerate() {
        let mut vq = R::zero();
        for (iw, sp) in grid.vset.speeds.iter().enumerate() {
            let w_weight = sp.weight * dphi;
            for iphi in 0..nphi {
                let v = state.g[(iw * nphi + iphi) * nr + ir].abs();
                vq += v.powf(q) * w_weight;
            }
        }
        let vnorm = vq.powf(R::one() / q);
        *s = vnorm.powf(p) * two_pi * grid.r_centers[ir] * grid.dr;
    }
    pairwise_sum(&spatial).powf(R::one() / p)
}

/// One sampled row of the run diagnostics.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord<R> {
    pub t: R,
    pub mass: R,
    pub i2: R,
    pub didt: R,
    pub k: R,
    /// Parallel to the monitored exponent list of the run.
    pub norms: Vec<R>,
    pub excess: Option<R>,
}

pub type DiagnosticsRecord64 = DiagnosticsRecord<f64>;

/// Collect a diagnostics record from a state.
pub fn record<R: Real>(
    state: &PhaseState<R>,
    monitored: &[(R, R)],
    supersolution: Option<&Supersolution<R>>,
) -> Result<DiagnosticsRecord<R>> {
    let rho = state.rho_of();
    let mass = rho.mass();
    let i2 = second_moment_density(&rho);
    let didt = current_moment(state);
    let k = k_functional(&rho, mass);
    let mut norms = Vec::with_capacity(monitored.len());
    for &(p, q) in monitored {
        norms.push(lplq_norm(state, p, q)?);
    }
    let excess = supersolution.map(|s| comparison_excess(state, s));
    Ok(DiagnosticsRecord {
        t: state.t,
        mass,
        i2,
        didt,
        k,
        norms,
        excess,
    })
}

/// Check the structural invariants of a record (nonnegativity and the
/// Cauchy-Schwarz bound on `K`).
pub fn validate_record<R: Real>(rec: &DiagnosticsRecord<R>) -> Result<()> {
    if rec.mass < R::zero() || rec.i2 < R::zero() || rec.k < R::zero() {
        return Err(KinchemError::InvalidConfig(format!(
            "diagnostics invariant violated at t = {}: M = {}, I = {}, K = {}",
            rec.t, rec.mass, rec.i2, rec.k
        )));
    }
    let bound = k_upper_bound(rec.mass, rec.i2);
    if rec.k > bound * (R::one() + R::of(1e-9)) + R::of(1e-300) {
        return Err(KinchemError::InvalidConfig(format!(
            "K = {} exceeds its Cauchy-Schwarz bound {} at t = {}",
            rec.k, bound, rec.t
        )));
    }
    Ok(())
}

/// Inputs of the virial inequality check.
#[derive(Debug, Clone)]
pub struct VirialSetup<R> {
    /// `delta` for the model at the run mass (positive iff supercritical).
    pub delta: R,
    /// `chi0 * omega * K(0)` with the model's `omega`.
    pub chi_omega_k0: R,
    pub didt0: R,
    pub i0: R,
    /// Additive slack: the inequality is checked as
    /// `dI/dt(t) <= dI/dt(0) - delta t + chi_omega_k0 + tol (1 + t)`.
    pub tol: R,
}

impl<R: Real> VirialSetup<R> {
    /// Default tolerance: `1e-6` of the initial scale plus a discretization
    /// allowance `10 dr^2`.
    pub fn with_default_tol(delta: R, chi_omega_k0: R, didt0: R, i0: R, dr: R) -> Self {
        let scale = R::one().max(didt0.abs()).max(chi_omega_k0.abs());
        Self {
            delta,
            chi_omega_k0,
            didt0,
            i0,
            tol: R::of(1e-6) * scale + R::of(10.0) * dr * dr,
        }
    }

    /// Affine upper bound for `dI/dt` at time `t` (without slack).
    pub fn didt_bound(&self, t: R) -> R {
        self.didt0 - self.delta * t + self.chi_omega_k0
    }

    /// Zero of the integrated bound `I(0) + b0 t - delta t^2 / 2`, i.e. the
    /// time by which the second moment is forced to vanish.
    pub fn projected_vanishing_time(&self) -> Option<R> {
        if self.delta <= R::zero() {
            return None;
        }
        let b0 = self.didt0 + self.chi_omega_k0;
        let disc = b0 * b0 + R::two() * self.delta * self.i0;
        Some((b0 + disc.sqrt()) / self.delta)
    }
}

#[derive(Debug, Clone)]
pub struct VirialReport<R> {
    pub ok: bool,
    pub first_violation: Option<(R, R)>,
    /// Largest value of `dI/dt(t) - bound(t)` seen (negative when the
    /// inequality holds with margin).
    pub max_excess: R,
    pub projected_vanishing_time: Option<R>,
}

/// Check the integrated virial inequality on every sampled record.
pub fn virial_tracker<R: Real>(
    records: &[DiagnosticsRecord<R>],
    setup: &VirialSetup<R>,
) -> VirialReport<R> {
    let mut first_violation = None;
    let mut max_excess = R::neg_infinity();
    for rec in records {
        let slack = setup.tol * (R::one() + rec.t);
        let excess = rec.didt - setup.didt_bound(rec.t);
        max_excess = max_excess.max(excess);
        if excess > slack && first_violation.is_none() {
            first_violation = Some((rec.t, excess));
        }
    }
    VirialReport {
        ok: first_violation.is_none(),
        first_violation,
        max_excess,
        projected_vanishing_time: setup.projected_vanishing_time(),
    }
}

/// Detector thresholds.
#[derive(Debug, Clone)]
pub struct DetectorSetup<R> {
    pub virial: VirialSetup<R>,
    /// Norm-growth trigger: any monitored norm exceeding
    /// `growth_factor * initial value`.
    pub growth_factor: R,
    /// Boundedness envelope reported for "global-looking" runs.
    pub envelope_factor: R,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<R> {
    BlowupSuspected { t: R, reason: String },
    GlobalLooking { envelope_ok: bool },
}

impl<R: Real> Verdict<R> {
    pub fn is_blowup(&self) -> bool {
        matches!(self, Verdict::BlowupSuspected { .. })
    }
}

/// Advisory blow-up verdict over a diagnostics series.
///
/// Fires on monitored-norm growth past the growth factor, or, for a
/// supercritical mass, once the affine upper bound for `dI/dt` has crossed
/// zero and the measured `dI/dt` is itself negative (the contraction forced
/// by the virial inequality is underway). Never a proof either way.
pub fn blowup_detector<R: Real>(
    records: &[DiagnosticsRecord<R>],
    setup: &DetectorSetup<R>,
) -> Verdict<R> {
    if records.is_empty() {
        return Verdict::GlobalLooking { envelope_ok: true };
    }
    let initial = &records[0];
    let tiny = R::of(1e-300);
    for rec in records.iter().skip(1) {
        for (k, &n) in rec.norms.iter().enumerate() {
            let n0 = initial.norms[k];
            if n0 > tiny && n > setup.growth_factor * n0 {
                return Verdict::BlowupSuspected {
                    t: rec.t,
                    reason: format!(
                        "monitored norm {k} grew by {:.3e} (threshold {:.1e})",
                        (n / n0).to_f64x(),
                        setup.growth_factor.to_f64x()
                    ),
                };
            }
        }
        if setup.virial.delta > R::zero() {
            let b0 = setup.virial.didt0 + setup.virial.chi_omega_k0;
            let t_neg = (b0 / setup.virial.delta).max(R::zero());
            if rec.t >= t_neg && rec.didt < R::zero() {
                return Verdict::BlowupSuspected {
                    t: rec.t,
                    reason: format!(
                        "dI/dt bound crossed zero at t = {:.4} and measured dI/dt = {:.4e} < 0",
                        t_neg.to_f64x(),
                        rec.didt.to_f64x()
                    ),
                };
            }
        }
    }
    let last = records.last().unwrap();
    let envelope_ok = last
        .norms
        .iter()
        .enumerate()
        .all(|(k, &n)| initial.norms[k] <= tiny && n <= tiny || n <= setup.envelope_factor * initial.norms[k]);
    Verdict::GlobalLooking { envelope_ok }
}
