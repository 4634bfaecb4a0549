//! Shared 1D quadrature machinery: adaptive Simpson rules and
//! Gauss–Legendre node generation.

use crate::error::{KinchemError, Result};
use crate::real::Real;

/// Adaptive Simpson integration of `f` on `[a, b]`.
///
/// Splits intervals until the local Richardson error estimate drops below the
/// tolerance share assigned to the interval. Fails if the recursion depth is
/// exhausted before the estimate converges.
pub fn adaptive_simpson<R: Real>(
    f: &dyn Fn(R) -> R,
    a: R,
    b: R,
    tol: R,
    context: &str,
) -> Result<R> {
    let m = (a + b).half();
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    let mut worst = R::zero();
    let v = simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60, &mut worst);
    match v {
        Some(v) => Ok(v),
        None => Err(KinchemError::QuadratureNonConvergence {
            context: context.to_string(),
            err_est: worst.to_f64x(),
        }),
    }
}

fn simpson<R: Real>(a: R, b: R, fa: R, fm: R, fb: R) -> R {
    (b - a) / R::of(6.0) * (fa + R::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<R: Real>(
    f: &dyn Fn(R) -> R,
    a: R,
    b: R,
    fa: R,
    fm: R,
    fb: R,
    whole: R,
    tol: R,
    depth: u32,
    worst: &mut R,
) -> Option<R> {
    let m = (a + b).half();
    let lm = (a + m).half();
    let rm = (m + b).half();
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = (left + right - whole).abs();
    if err <= R::of(15.0) * tol {
        return Some(left + right + (left + right - whole) / R::of(15.0));
    }
    if depth == 0 {
        *worst = worst.max(err);
        return None;
    }
    let half_tol = tol.half();
    let l = simpson_rec(f, a, m, fa, flm, fm, left, half_tol, depth - 1, worst)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, half_tol, depth - 1, worst)?;
    Some(l + r)
}

/// Adaptive Simpson with a relative tolerance: integrates once at a coarse
/// absolute tolerance to fix the scale, then refines.
pub fn adaptive_simpson_rel<R: Real>(
    f: &dyn Fn(R) -> R,
    a: R,
    b: R,
    rel_tol: R,
    context: &str,
) -> Result<R> {
    let coarse = adaptive_simpson(f, a, b, R::of(1e-4), context)?;
    let scale = coarse.abs().max(R::of(1e-30));
    adaptive_simpson(f, a, b, rel_tol * scale, context)
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
///
/// Nodes are found by Newton iteration on the Legendre recurrence; `n` up to
/// a few hundred is accurate to machine precision.
pub fn gauss_legendre<R: Real>(n: usize, a: R, b: R) -> Vec<(R, R)> {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut out = Vec::with_capacity(n);
    let nf = R::of_usize(n);
    for i in 0..n {
        // Chebyshev-like initial guess.
        let theta = R::PI() * (R::of_usize(i) + R::of(0.75)) / (nf + R::of(0.5));
        let mut x = theta.cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x = x - dx;
            if dx.abs() <= R::of(1e-16) {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = R::two() / ((R::one() - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap());
    let mid = (a + b).half();
    let halfwidth = (b - a).half();
    out.into_iter()
        .map(|(x, w)| (mid + halfwidth * x, halfwidth * w))
        .collect()
}

fn legendre_and_derivative<R: Real>(n: usize, x: R) -> (R, R) {
    let mut p0 = R::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = R::of_usize(k);
        let p2 = ((R::two() * kf - R::one()) * x * p1 - (kf - R::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = R::of_usize(n) * (x * p1 - p0) / (x * x - R::one());
    if n == 1 {
        (x, R::one())
    } else {
        (p1, dp)
    }
}
