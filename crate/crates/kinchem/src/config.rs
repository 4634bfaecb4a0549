//! Run configuration: a strict JSON document with sections
//! `model / grid / time / initial / output`. Unknown keys are rejected so a
//! typo cannot silently change a threshold experiment.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::comparison::{self, Supersolution};
use crate::error::{KinchemError, Result};
use crate::kinsolver::{PhaseGrid, PhaseState, SolverParams};
use crate::thresholds::ThresholdModel;
use crate::velocity::VelocitySet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocitySetKind {
    Ball,
    Sphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub chi0: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(default)]
    pub alpha: f64,
    pub velocity_set: VelocitySetKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nr: usize,
    pub nw: usize,
    pub nphi: usize,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    /// CFL number in (0, 1]; the step is derived from the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    /// Explicit step; validated against the CFL limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformDisk {
    pub mass: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialGaussian {
    pub mass: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonDominated {
    pub gamma: f64,
    pub k0: f64,
    pub r_supp: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialFamily {
    UniformDisk(UniformDisk),
    RadialGaussian(RadialGaussian),
    ComparisonDominated(ComparisonDominated),
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamProfile {
    pub phi0: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityProfile {
    UniformOnV,
    Beam(BeamProfile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub family: InitialFamily,
    pub velocity: VelocityProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcessMonitor {
    pub gamma: f64,
    pub k0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Diagnostics are sampled every this many steps (and at t = 0 and the
    /// final time).
    pub cadence_steps: usize,
    /// Monitored mixed-norm exponent pairs.
    pub monitored_norms: Vec<(f64, f64)>,
    #[serde(default = "default_growth_factor")]
    pub growth_factor: f64,
    #[serde(default = "default_envelope_factor")]
    pub envelope_factor: f64,
    #[serde(default)]
    pub checkpoints: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excess_monitor: Option<ExcessMonitor>,
}

fn default_growth_factor() -> f64 {
    1e3
}

fn default_envelope_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    pub output: OutputSection,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| {
            KinchemError::InvalidConfig(format!(
                "line {}, column {}: {}",
                e.line(),
                e.column(),
                e
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.chi0 < 0.0 || m.radius <= 0.0 || m.alpha < 0.0 {
            return Err(KinchemError::InvalidConfig(
                "model: need chi0 >= 0, R > 0, alpha >= 0".into(),
            ));
        }
        let g = &self.grid;
        if g.nr < 4 || g.nphi < 4 || g.nphi % 2 != 0 {
            return Err(KinchemError::InvalidConfig(
                "grid: nr >= 4 and nphi even and >= 4 required".into(),
            ));
        }
        if self.model.velocity_set == VelocitySetKind::Ball && g.nw < 4 {
            return Err(KinchemError::InvalidConfig(
                "grid: nw >= 4 required for the ball velocity set".into(),
            ));
        }
        if g.r_max <= 0.0 {
            return Err(KinchemError::InvalidConfig("grid: r_max > 0 required".into()));
        }
        let t = &self.time;
        if let Some(cfl) = t.cfl {
            if cfl <= 0.0 || cfl > 1.0 {
                return Err(KinchemError::InvalidConfig(format!(
                    "time: CFL must lie in (0, 1], got {cfl}"
                )));
            }
        }
        if t.cfl.is_none() && t.dt.is_none() {
            return Err(KinchemError::InvalidConfig(
                "time: either cfl or dt must be given".into(),
            ));
        }
        if t.t_end <= 0.0 {
            return Err(KinchemError::InvalidConfig("time: t_end > 0 required".into()));
        }
        match &self.initial.family {
            InitialFamily::UniformDisk(f) => {
                if f.mass < 0.0 || f.a <= 0.0 {
                    return Err(KinchemError::InvalidConfig(
                        "initial: uniform disk needs mass >= 0 and a > 0".into(),
                    ));
                }
            }
            InitialFamily::RadialGaussian(f) => {
                if f.mass < 0.0 || f.sigma <= 0.0 {
                    return Err(KinchemError::InvalidConfig(
                        "initial: gaussian needs mass >= 0 and sigma > 0".into(),
                    ));
                }
            }
            InitialFamily::ComparisonDominated(f) => {
                if !(0.0 < f.gamma && f.gamma < 1.0) || f.k0 <= 0.0 || f.r_supp <= 0.0 || f.mass < 0.0
                {
                    return Err(KinchemError::InvalidConfig(
                        "initial: comparison family needs 0 < gamma < 1, k0 > 0, r_supp > 0".into(),
                    ));
                }
            }
            InitialFamily::Empty => {}
        }
        if self.output.cadence_steps == 0 {
            return Err(KinchemError::InvalidConfig(
                "output: cadence_steps must be positive".into(),
            ));
        }
        for &(p, q) in &self.output.monitored_norms {
            crate::diagnostics::check_admissible_exponents(p, q)?;
        }
        if let Some(em) = &self.output.excess_monitor {
            Supersolution::new(em.k0, em.gamma)?;
        }
        Ok(())
    }

    pub fn threshold_model(&self) -> ThresholdModel {
        match self.model.velocity_set {
            VelocitySetKind::Ball => ThresholdModel::BallKinetic,
            VelocitySetKind::Sphere => ThresholdModel::SphereKinetic,
        }
    }

    pub fn build_velocity_set(&self) -> Result<VelocitySet<f64>> {
        match self.model.velocity_set {
            VelocitySetKind::Ball => {
                VelocitySet::ball(self.model.radius, self.grid.nw, self.grid.nphi)
            }
            VelocitySetKind::Sphere => VelocitySet::sphere(self.model.radius, self.grid.nphi),
        }
    }

    pub fn build_grid(&self) -> Result<Arc<PhaseGrid<f64>>> {
        PhaseGrid::new(self.grid.nr, self.grid.r_max, self.build_velocity_set()?)
    }

    pub fn solver_params(&self) -> Result<SolverParams<f64>> {
        SolverParams::new(self.model.chi0, self.model.alpha, self.time.cfl.unwrap_or(0.5))
    }

    /// Time step: explicit `dt` if given (validated by the stepper),
    /// otherwise the grid-derived conservative step.
    pub fn step_size(&self, grid: &PhaseGrid<f64>) -> f64 {
        match self.time.dt {
            Some(dt) => dt,
            None => grid.suggested_dt(self.time.cfl.unwrap_or(0.5)),
        }
    }

    /// Construct the initial phase-space state. Masses are hit exactly on
    /// the discrete grid by rescaling.
    pub fn build_state(&self, grid: Arc<PhaseGrid<f64>>) -> Result<PhaseState<f64>> {
        let spatial: Box<dyn Fn(f64) -> f64> = match &self.initial.family {
            InitialFamily::UniformDisk(f) => {
                let a = f.a;
                Box::new(move |r| if r <= a { 1.0 } else { 0.0 })
            }
            InitialFamily::RadialGaussian(f) => {
                let s2 = f.sigma * f.sigma;
                Box::new(move |r| (-(r * r) / (2.0 * s2)).exp())
            }
            InitialFamily::Empty => Box::new(|_| 0.0),
            InitialFamily::ComparisonDominated(_) => Box::new(|_| 0.0), // handled below
        };

        let mut state = match &self.initial.family {
            InitialFamily::ComparisonDominated(f) => {
                let s = Supersolution::new(f.k0, f.gamma)?;
                // cap at the value of the incoming branch on the first cell
                let cap = f.k0 * grid.r_centers[0].powf(-f.gamma);
                let r_supp = f.r_supp;
                PhaseState::from_fn(grid.clone(), |r, _, phi| {
                    if r > r_supp {
                        return 0.0;
                    }
                    comparison::k_eval_radial(r, phi, &s)
                        .map(|k| 0.5 * k.min(cap))
                        .unwrap_or(0.5 * cap)
                })
            }
            _ => {
                let profile = self.velocity_weights(&grid)?;
                let mut st = PhaseState::zero(grid.clone());
                for (slice, &pv) in profile.iter().enumerate() {
                    for (ir, &r) in grid.r_centers.iter().enumerate() {
                        st.g[slice * grid.nr + ir] = spatial(r) * pv;
                    }
                }
                st
            }
        };

        let target_mass = match &self.initial.family {
            InitialFamily::UniformDisk(UniformDisk { mass, .. })
            | InitialFamily::RadialGaussian(RadialGaussian { mass, .. })
            | InitialFamily::ComparisonDominated(ComparisonDominated { mass, .. }) => *mass,
            InitialFamily::Empty => 0.0,
        };
        let m0 = state.mass();
        if m0 > 0.0 && target_mass > 0.0 {
            let scale = target_mass / m0;
            if let InitialFamily::ComparisonDominated(_) = self.initial.family {
                if scale > 1.0 {
                    return Err(KinchemError::InvalidConfig(format!(
                        "comparison-dominated data cannot reach mass {target_mass} while \
                         staying below the reference function (max factor {:.4})",
                        m0 / 0.5
                    )));
                }
            }
            for v in &mut state.g {
                *v *= scale;
            }
        } else if target_mass == 0.0 {
            for v in &mut state.g {
                *v = 0.0;
            }
        }
        Ok(state)
    }

    /// Velocity-profile weights per `(w, phi)` node, normalized so the
    /// velocity quadrature equals one.
    fn velocity_weights(&self, grid: &PhaseGrid<f64>) -> Result<Vec<f64>> {
        let vset = &grid.vset;
        let nphi = vset.angles.n;
        let mut raw = vec![0.0; vset.speeds.len() * nphi];
        match &self.initial.velocity {
            VelocityProfile::UniformOnV => raw.fill(1.0),
            VelocityProfile::Beam(beam) => {
                if beam.width <= 0.0 {
                    return Err(KinchemError::InvalidConfig(
                        "beam width must be positive".into(),
                    ));
                }
                for (iw, _) in vset.speeds.iter().enumerate() {
                    for (iphi, &phi) in vset.angles.centers.iter().enumerate() {
                        let mut d = phi - beam.phi0;
                        while d > std::f64::consts::PI {
                            d -= 2.0 * std::f64::consts::PI;
                        }
                        while d < -std::f64::consts::PI {
                            d += 2.0 * std::f64::consts::PI;
                        }
                        raw[iw * nphi + iphi] =
                            (-(d * d) / (2.0 * beam.width * beam.width)).exp();
                    }
                }
            }
        }
        let mut total = 0.0;
        for (iw, s) in vset.speeds.iter().enumerate() {
            for iphi in 0..nphi {
                total += raw[iw * nphi + iphi] * s.weight * vset.angles.dphi;
            }
        }
        if total <= 0.0 {
            return Err(KinchemError::InvalidConfig(
                "velocity profile integrates to zero".into(),
            ));
        }
        for v in &mut raw {
            *v /= total;
        }
        Ok(raw)
    }

    pub fn supersolution(&self) -> Result<Option<Supersolution<f64>>> {
        match &self.output.excess_monitor {
            Some(em) => Ok(Some(Supersolution::new(em.k0, em.gamma)?)),
            None => {
                if let InitialFamily::ComparisonDominated(f) = self.initial.family {
                    Ok(Some(Supersolution::new(f.k0, f.gamma)?))
                } else {
                    Ok(None)
                }
            }
        }
    }
}

/// Built-in experiment presets.
pub fn preset(name: &str) -> Result<Config> {
    match name {
        "supercritical" => Ok(Config {
            model: ModelSection {
                chi0: 1.0,
                radius: 1.0,
                alpha: 0.0,
                velocity_set: VelocitySetKind::Ball,
            },
            grid: GridSection {
                nr: 256,
                nw: 8,
                nphi: 64,
                r_max: 8.0,
            },
            time: TimeSection {
                cfl: Some(0.5),
                dt: None,
                t_end: 5.0,
            },
            initial: InitialSection {
                family: InitialFamily::UniformDisk(UniformDisk { mass: 64.0, a: 1.0 }),
                velocity: VelocityProfile::UniformOnV,
            },
            output: OutputSection {
                cadence_steps: 50,
                monitored_norms: vec![(3.0, 1.5), (4.0, 2.0)],
                growth_factor: 1e3,
                envelope_factor: 10.0,
                checkpoints: false,
                excess_monitor: None,
            },
        }),
        "subcritical-comparison" => {
            // mass exactly at the small-mass bound 4 pi gamma / (chi0 |V| Omega)
            let gamma = 0.5;
            let omega = comparison::omega_gamma(gamma)?;
            let mass = 4.0 * std::f64::consts::PI * gamma
                / (std::f64::consts::PI * omega); // chi0 = 1, |V| = pi
            Ok(Config {
                model: ModelSection {
                    chi0: 1.0,
                    radius: 1.0,
                    alpha: 0.0,
                    velocity_set: VelocitySetKind::Ball,
                },
                grid: GridSection {
                    nr: 256,
                    nw: 8,
                    nphi: 64,
                    r_max: 10.0,
                },
                time: TimeSection {
                    cfl: Some(0.5),
                    dt: None,
                    t_end: 5.0,
                },
                initial: InitialSection {
                    family: InitialFamily::ComparisonDominated(ComparisonDominated {
                        gamma,
                        k0: 1.0,
                        r_supp: 4.0,
                        mass,
                    }),
                    velocity: VelocityProfile::UniformOnV,
                },
                output: OutputSection {
                    cadence_steps: 50,
                    monitored_norms: vec![(3.0, 1.5), (4.0, 2.0)],
                    growth_factor: 1e3,
                    envelope_factor: 10.0,
                    checkpoints: false,
                    excess_monitor: Some(ExcessMonitor { gamma, k0: 1.0 }),
                },
            })
        }
        "gaussian-subcritical" => Ok(Config {
            model: ModelSection {
                chi0: 1.0,
                radius: 1.0,
                alpha: 0.0,
                velocity_set: VelocitySetKind::Ball,
            },
            grid: GridSection {
                nr: 192,
                nw: 6,
                nphi: 32,
                r_max: 6.0,
            },
            time: TimeSection {
                cfl: Some(0.5),
                dt: None,
                t_end: 2.0,
            },
            initial: InitialSection {
                family: InitialFamily::RadialGaussian(RadialGaussian { mass: 8.0, sigma: 1.0 }),
                velocity: VelocityProfile::UniformOnV,
            },
            output: OutputSection {
                cadence_steps: 50,
                monitored_norms: vec![(3.0, 1.5), (4.0, 2.0)],
                growth_factor: 1e3,
                envelope_factor: 10.0,
                checkpoints: false,
                excess_monitor: None,
            },
        }),
        "empty" => Ok(Config {
            model: ModelSection {
                chi0: 1.0,
                radius: 1.0,
                alpha: 0.0,
                velocity_set: VelocitySetKind::Ball,
            },
            grid: GridSection {
                nr: 64,
                nw: 4,
                nphi: 16,
                r_max: 4.0,
            },
            time: TimeSection {
                cfl: Some(0.5),
                dt: None,
                t_end: 0.5,
            },
            initial: InitialSection {
                family: InitialFamily::Empty,
                velocity: VelocityProfile::UniformOnV,
            },
            output: OutputSection {
                cadence_steps: 20,
                monitored_norms: vec![(3.0, 1.5), (4.0, 2.0)],
                growth_factor: 1e3,
                envelope_factor: 10.0,
                checkpoints: false,
                excess_monitor: None,
            },
        }),
        other => Err(KinchemError::InvalidConfig(format!(
            "unknown preset '{other}' (available: supercritical, subcritical-comparison, \
             gaussian-subcritical, empty)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in [
            "supercritical",
            "subcritical-comparison",
            "gaussian-subcritical",
            "empty",
        ] {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            let text = cfg.to_json();
            let back = Config::from_json(&text).unwrap();
            assert_eq!(cfg, back, "round trip failed for preset {name}");
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let cfg = preset("empty").unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&cfg.to_json()).unwrap();
        v["grid"]["typo_key"] = serde_json::json!(3);
        let err = Config::from_json(&v.to_string());
        assert!(err.is_err());
        let msg = format!("{}", err.unwrap_err());
        assert!(msg.contains("line"), "error should be line-anchored: {msg}");
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = preset("empty").unwrap();
        cfg.time.cfl = Some(1.5);
        assert!(cfg.validate().is_err());
        let mut cfg = preset("empty").unwrap();
        cfg.grid.nphi = 7;
        assert!(cfg.validate().is_err());
        let mut cfg = preset("empty").unwrap();
        cfg.output.monitored_norms = vec![(2.0, 1.5)];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn initial_masses_are_exact_on_the_grid() {
        for name in ["supercritical", "subcritical-comparison", "gaussian-subcritical"] {
            let cfg = preset(name).unwrap();
            let grid = cfg.build_grid().unwrap();
            let st = cfg.build_state(grid).unwrap();
            let target = match cfg.initial.family {
                InitialFamily::UniformDisk(UniformDisk { mass, .. })
                | InitialFamily::RadialGaussian(RadialGaussian { mass, .. })
                | InitialFamily::ComparisonDominated(ComparisonDominated { mass, .. }) => mass,
                InitialFamily::Empty => 0.0,
            };
            assert_relative_eq!(st.mass(), target, max_relative = 1e-12);
        }
    }

    #[test]
    fn comparison_dominated_data_stay_below_reference() {
        let cfg = preset("subcritical-comparison").unwrap();
        let grid = cfg.build_grid().unwrap();
        let st = cfg.build_state(grid.clone()).unwrap();
        let s = cfg.supersolution().unwrap().unwrap();
        let excess = crate::comparison::comparison_excess(&st, &s);
        assert_eq!(excess, 0.0);
    }

    #[test]
    fn beam_profile_normalizes() {
        let mut cfg = preset("gaussian-subcritical").unwrap();
        cfg.initial.velocity = VelocityProfile::Beam(BeamProfile { phi0: 0.3, width: 0.4 });
        let grid = cfg.build_grid().unwrap();
        let st = cfg.build_state(grid).unwrap();
        assert_relative_eq!(st.mass(), 8.0, max_relative = 1e-12);
    }
}
