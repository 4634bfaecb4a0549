//! Velocity-set geometry, quadrature and the closed-form averaged quantities
//! of the turning operator.
//!
//! The admissible velocities are either the disk `B(0,R)` with Lebesgue
//! measure or the circle `S(0,R)` with arclength measure. Directions are
//! parameterized by the angle `phi` between the position vector and the
//! velocity, which is the variable the reduced solver transports in.

use crate::error::{KinchemError, Result};
use crate::geom::{dot, Vec2};
use crate::quadrature::gauss_legendre;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityKind {
    Ball,
    Sphere,
}

/// One speed shell of the quadrature. `weight` carries the radial part of the
/// velocity measure (`w_gl * w` for the ball, `R` for the sphere) so that a
/// full node weight is `weight * dphi`.
#[derive(Debug, Clone, Copy)]
pub struct SpeedNode<R> {
    pub w: R,
    pub weight: R,
}

/// Uniform cell-centered angular grid on `[-pi, pi)`.
///
/// Centers and trigonometric tables are built for the lower half-plane and
/// mirrored, so the grid is odd-symmetric in `phi` to the last bit. The
/// interface table `sin_if` is scaled by `(dphi/2)/sin(dphi/2)` which makes
/// the discrete angular divergence of the transport field cancel the radial
/// one exactly on constant states.
#[derive(Debug, Clone)]
pub struct AngleGrid<R> {
    pub n: usize,
    pub dphi: R,
    pub centers: Vec<R>,
    pub cos_c: Vec<R>,
    pub sin_c: Vec<R>,
    /// Corrected sine at the `n + 1` interfaces `-pi + k dphi`; exact zeros at
    /// `-pi`, `0` and `pi`, odd under `k -> n - k`.
    pub sin_if: Vec<R>,
}

impl<R: Real> AngleGrid<R> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(KinchemError::InvalidConfig(format!(
                "angular grid size must be even and at least 4, got {n}"
            )));
        }
        let dphi = R::two() * R::PI() / R::of_usize(n);
        let half = n / 2;
        let mut interfaces = vec![R::zero(); n + 1];
        for (k, v) in interfaces.iter_mut().enumerate().take(half) {
            *v = -R::PI() + R::of_usize(k) * dphi;
        }
        interfaces[half] = R::zero();
        for k in half + 1..=n {
            interfaces[k] = -interfaces[n - k];
        }

        let mut centers = vec![R::zero(); n];
        for j in 0..half {
            centers[j] = (interfaces[j] + interfaces[j + 1]).half();
        }
        for j in half..n {
            centers[j] = -centers[n - 1 - j];
        }

        let mut cos_c = vec![R::zero(); n];
        let mut sin_c = vec![R::zero(); n];
        for j in 0..half {
            cos_c[j] = centers[j].cos();
            sin_c[j] = centers[j].sin();
        }
        for j in half..n {
            cos_c[j] = cos_c[n - 1 - j];
            sin_c[j] = -sin_c[n - 1 - j];
        }

        let kappa = dphi.half() / dphi.half().sin();
        let mut sin_if = vec![R::zero(); n + 1];
        for (k, v) in sin_if.iter_mut().enumerate().take(half).skip(1) {
            *v = kappa * interfaces[k].sin();
        }
        sin_if[0] = R::zero();
        sin_if[half] = R::zero();
        for k in half + 1..=n {
            sin_if[k] = -sin_if[n - k];
        }

        Ok(Self {
            n,
            dphi,
            centers,
            cos_c,
            sin_c,
            sin_if,
        })
    }
}

/// Velocity set with quadrature nodes and closed-form turning-operator
/// averages.
#[derive(Debug, Clone)]
pub struct VelocitySet<R> {
    pub kind: VelocityKind,
    pub radius: R,
    pub speeds: Vec<SpeedNode<R>>,
    pub angles: AngleGrid<R>,
}

pub type VelocitySet64 = VelocitySet<f64>;

impl<R: Real> VelocitySet<R> {
    /// Disk of radius `radius`: Gauss–Legendre in speed, uniform angles.
    pub fn ball(radius: R, n_speeds: usize, n_angles: usize) -> Result<Self> {
        if radius <= R::zero() {
            return Err(KinchemError::InvalidConfig(
                "velocity radius must be positive".into(),
            ));
        }
        if n_speeds < 1 {
            return Err(KinchemError::InvalidConfig(
                "ball velocity set needs at least one speed node".into(),
            ));
        }
        let speeds = gauss_legendre(n_speeds, R::zero(), radius)
            .into_iter()
            .map(|(w, gw)| SpeedNode { w, weight: gw * w })
            .collect();
        let set = Self {
            kind: VelocityKind::Ball,
            radius,
            speeds,
            angles: AngleGrid::new(n_angles)?,
        };
        set.validate()?;
        Ok(set)
    }

    /// Circle of radius `radius` with arclength measure.
    pub fn sphere(radius: R, n_angles: usize) -> Result<Self> {
        if radius <= R::zero() {
            return Err(KinchemError::InvalidConfig(
                "velocity radius must be positive".into(),
            ));
        }
        let set = Self {
            kind: VelocityKind::Sphere,
            radius,
            speeds: vec![SpeedNode {
                w: radius,
                weight: radius,
            }],
            angles: AngleGrid::new(n_angles)?,
        };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        let measure = self.measure().to_f64x();
        let target = self.measure_closed_form().to_f64x();
        if ((measure - target) / target).abs() > 1e-12 {
            return Err(KinchemError::InvalidConfig(format!(
                "velocity quadrature weights sum to {measure:e}, expected {target:e}"
            )));
        }
        for s in &self.speeds {
            let ok = match self.kind {
                VelocityKind::Ball => s.w > R::zero() && s.w <= self.radius,
                VelocityKind::Sphere => s.w == self.radius,
            };
            if !ok || s.weight <= R::zero() {
                return Err(KinchemError::InvalidConfig(
                    "velocity speed node outside the admissible set".into(),
                ));
            }
        }
        Ok(())
    }

    /// `|V|`: total quadrature weight.
    pub fn measure(&self) -> R {
        let per_speed: R = self.speeds.iter().map(|s| s.weight).sum();
        per_speed * self.angles.dphi * R::of_usize(self.angles.n)
    }

    /// `|V|` in closed form: `pi R^2` (ball) or `2 pi R` (sphere).
    pub fn measure_closed_form(&self) -> R {
        match self.kind {
            VelocityKind::Ball => R::PI() * self.radius * self.radius,
            VelocityKind::Sphere => R::two() * R::PI() * self.radius,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.speeds.len() * self.angles.n
    }

    /// Flat iteration over the `(w, phi, weight)` nodes, speeds outer.
    pub fn nodes(&self) -> impl Iterator<Item = (R, R, R)> + '_ {
        self.speeds.iter().flat_map(move |s| {
            self.angles
                .centers
                .iter()
                .map(move |&phi| (s.w, phi, s.weight * self.angles.dphi))
        })
    }

    /// `omega = int_V (v' . e)_+ dv'` for any unit vector `e`.
    pub fn omega(&self) -> R {
        let r = self.radius;
        match self.kind {
            VelocityKind::Ball => R::two() * r * r * r / R::of(3.0),
            VelocityKind::Sphere => R::two() * r * r,
        }
    }

    /// Same average evaluated on the discrete nodes. The collision step uses
    /// this value so the discrete gain/loss balance is exact.
    pub fn omega_discrete(&self) -> R {
        let ang: R = self
            .angles
            .cos_c
            .iter()
            .map(|&c| c.max(R::zero()) * self.angles.dphi)
            .sum();
        let spd: R = self.speeds.iter().map(|s| s.w * s.weight).sum();
        spd * ang
    }

    /// `J(p, q) = int_V (p . v)(v . q)_+ dv`, bilinear in `(p, q)`.
    pub fn directional_first_moment(&self, p: Vec2<R>, q: Vec2<R>) -> R {
        self.directional_coefficient() * dot(p, q)
    }

    /// The scalar `c` with `J(p, q) = c (p . q)`.
    pub fn directional_coefficient(&self) -> R {
        let r = self.radius;
        match self.kind {
            VelocityKind::Ball => R::PI() * r.powi(4) / R::of(8.0),
            VelocityKind::Sphere => R::PI() * r.powi(3) / R::two(),
        }
    }

    /// `int_V v (x) v dv = c Id` by isotropy.
    pub fn second_moment_tensor(&self) -> [[R; 2]; 2] {
        let c = self.second_moment_coefficient();
        [[c, R::zero()], [R::zero(), c]]
    }

    pub fn second_moment_coefficient(&self) -> R {
        let r = self.radius;
        match self.kind {
            VelocityKind::Ball => R::PI() * r.powi(4) / R::of(4.0),
            VelocityKind::Sphere => R::PI() * r.powi(3),
        }
    }
}
