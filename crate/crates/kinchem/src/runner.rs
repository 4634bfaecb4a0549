//! Run orchestration: the simulation loop with diagnostics cadence, verdict
//! evaluation, early termination, and deterministic report assembly.

use serde_json::json;

use crate::chemfield;
use crate::config::Config;
use crate::diagnostics::{
    self, blowup_detector, virial_tracker, DetectorSetup, DiagnosticsRecord, Verdict, VirialReport,
    VirialSetup,
};
use crate::error::Result;
use crate::io;
use crate::kinsolver::{self, PhaseState};
use crate::thresholds;

#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticsRecord<f64>>,
    pub verdict: Verdict<f64>,
    pub virial: VirialReport<f64>,
    pub setup: VirialSetup<f64>,
    pub csv: String,
    pub final_state: PhaseState<f64>,
    pub checkpoints: Vec<(f64, String)>,
    /// Time at which the run stopped (early when the detector fired).
    pub t_stop: f64,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.verdict.is_blowup() {
            2
        } else {
            0
        }
    }
}

/// Execute a configured run. Deterministic for a fixed config; thread count
/// only changes scheduling, not results.
pub fn run_simulation(config: &Config) -> Result<RunOutcome> {
    config.validate()?;
    let grid = config.build_grid()?;
    let params = config.solver_params()?;
    let mut state = config.build_state(grid.clone())?;
    let supersolution = config.supersolution()?;
    let monitored = config.output.monitored_norms.clone();
    let dt = config.step_size(&grid);
    let deficit_table = if params.alpha > 0.0 {
        Some(chemfield::DeficitTable::build(
            params.alpha,
            grid.dr * 1e-3,
            2.0 * grid.r_max,
            512,
        )?)
    } else {
        None
    };

    // initial diagnostics fix the virial setup
    let first = diagnostics::record(&state, &monitored, supersolution.as_ref())?;
    diagnostics::validate_record(&first)?;
    let model = config.threshold_model();
    let delta = thresholds::delta(model, first.mass, config.model.chi0, config.model.radius);
    let omega = grid.vset.omega();
    let setup = VirialSetup::with_default_tol(
        delta,
        config.model.chi0 * omega * first.k,
        first.didt,
        first.i2,
        grid.dr,
    );
    let detector = DetectorSetup {
        virial: setup.clone(),
        growth_factor: config.output.growth_factor,
        envelope_factor: config.output.envelope_factor,
    };

    let mut records = vec![first];
    let mut checkpoints = Vec::new();
    if config.output.checkpoints {
        checkpoints.push((
            0.0,
            io::emit_checkpoint(&state, velocity_kind(config), params.chi0, params.alpha),
        ));
    }

    let steps_total = (config.time.t_end / dt).ceil() as usize;
    let mut verdict = Verdict::GlobalLooking { envelope_ok: true };
    let mut stopped_early = false;
    for step_idx in 1..=steps_total {
        let step_dt = dt.min(config.time.t_end - state.t).max(0.0);
        if step_dt <= 0.0 {
            break;
        }
        kinsolver::step_with_deficit_table(&mut state, &params, deficit_table.as_ref(), step_dt)?;
        let at_end = step_idx == steps_total || state.t >= config.time.t_end - 1e-12;
        if step_idx % config.output.cadence_steps == 0 || at_end {
            let rec = diagnostics::record(&state, &monitored, supersolution.as_ref())?;
            diagnostics::validate_record(&rec)?;
            records.push(rec);
            if config.output.checkpoints {
                checkpoints.push((
                    state.t,
                    io::emit_checkpoint(&state, velocity_kind(config), params.chi0, params.alpha),
                ));
            }
            let v = blowup_detector(&records, &detector);
            if v.is_blowup() {
                verdict = v;
                stopped_early = true;
                break;
            }
        }
    }
    if !stopped_early {
        verdict = blowup_detector(&records, &detector);
    }

    let virial = virial_tracker(&records, &setup);
    let csv = io::csv_document(&monitored, &records);
    Ok(RunOutcome {
        t_stop: state.t,
        records,
        verdict,
        virial,
        setup,
        csv,
        final_state: state,
        checkpoints,
    })
}

fn velocity_kind(config: &Config) -> crate::config::VelocitySetKind {
    config.model.velocity_set
}

/// Assemble the versioned run manifest.
pub fn manifest_json(
    config: &Config,
    outcome: &RunOutcome,
    wall_clock_s: f64,
    csv_path: Option<&str>,
    checkpoint_paths: &[String],
) -> serde_json::Value {
    let verdict_str = match &outcome.verdict {
        Verdict::BlowupSuspected { .. } => "blow-up suspected",
        Verdict::GlobalLooking { .. } => "global-looking",
    };
    let verdict_detail = match &outcome.verdict {
        Verdict::BlowupSuspected { t, reason } => json!({"t": t, "reason": reason}),
        Verdict::GlobalLooking { envelope_ok } => json!({"envelope_ok": envelope_ok}),
    };
    json!({
        "schema": "kinchem/1",
        "code_version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(config).expect("config serializes"),
        "wall_clock_s": wall_clock_s,
        "t_stop": outcome.t_stop,
        "verdict": verdict_str,
        "verdict_detail": verdict_detail,
        "virial": {
            "ok": outcome.virial.ok,
            "max_excess": outcome.virial.max_excess,
            "delta": outcome.setup.delta,
            "projected_vanishing_time": outcome.virial.projected_vanishing_time,
            "first_violation": outcome.virial.first_violation.map(|(t, e)| json!({"t": t, "excess": e})),
        },
        "csv_path": csv_path,
        "checkpoint_paths": checkpoint_paths,
        "exit_code": outcome.exit_code(),
    })
}
