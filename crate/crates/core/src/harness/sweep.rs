use std::path::Path;
use std::time::Instant;

use log::info;
use rayon::prelude::*;

use super::report::{write_text, SweepReport, SweepRow};
use crate::ansatz::{assemble_v, assemble_with_correction, solve_a1};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::fields::{sup_norm_diff, FieldGrid};
use crate::recovery::{config_path, reconstruct_alpha_1d, recover_from_field, Reconstruction1d, RecoveryResult};
use crate::solver::{check_times, evolve_with, steps_for_times, Evolution, StepPolicy};

pub const DEFAULT_H_LIST: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Sup errors against the solution at one check time; `err_u1` is NaN when not assembled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckError {
    pub t: f64,
    pub err_v: f64,
    pub err_u1: f64,
}

/// Compare `ev` with `v` (and `u₁`) at the check times `{-Th, 0, Th/2, Th}`.
pub fn compare_at_check_times(
    cfg: &ExperimentConfig,
    ev: &Evolution,
    grid: &FieldGrid,
    policy: &StepPolicy,
    with_correction: bool,
) -> Result<Vec<CheckError>> {
    let steps = steps_for_times(cfg, policy, &check_times(cfg));
    let snaps = steps
        .iter()
        .map(|s| {
            ev.snapshot_at(*s)
                .ok_or_else(|| Error::Config(format!("no snapshot at step {s}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let correction = if with_correction {
        Some(solve_a1(cfg, grid, &times)?)
    } else {
        None
    };
    snaps
        .iter()
        .map(|snap| {
            let err_v = sup_norm_diff(&snap.field, &assemble_v(cfg, snap.t, grid)?)?;
            let err_u1 = match &correction {
                Some(c) => sup_norm_diff(&snap.field, &assemble_with_correction(cfg, snap.t, grid, c)?)?,
                None => f64::NAN,
            };
            Ok(CheckError {
                t: snap.t,
                err_v,
                err_u1,
            })
        })
        .collect()
}

fn is_unwrap_abort(e: &Error) -> bool {
    matches!(
        e,
        Error::SamplingTooCoarse { .. } | Error::SignalLost { .. } | Error::BadAnchor(_)
    )
}

/// One full entry: evolve, compare at the check times, and optionally recover Xα
/// from the final field. Unwrap failures are recorded in the row, not raised.
pub fn sweep_entry(
    cfg: &ExperimentConfig,
    with_correction: bool,
    with_recovery: bool,
) -> Result<(SweepRow, Option<RecoveryResult>)> {
    let start = Instant::now();
    let grid = cfg.grid()?;
    let policy = StepPolicy::from_config(cfg);
    let ev = evolve_with(cfg, &grid, &policy)?;
    let checks = compare_at_check_times(cfg, &ev, &grid, &policy, with_correction)?;
    let err_v = checks.iter().fold(0.0f64, |m, c| m.max(c.err_v));
    let err_u1 = if with_correction {
        checks.iter().fold(0.0f64, |m, c| m.max(c.err_u1))
    } else {
        f64::NAN
    };

    let mut row = SweepRow {
        h: cfg.h,
        err_v,
        err_u1,
        err_xalpha: f64::NAN,
        unwrap_abort: None,
        g_max_abs: 0,
        mass_drift: ev.mass_drift,
        energy_drift: ev.energy_drift,
        wall_s: 0.0,
    };
    let mut result = None;
    if with_recovery {
        match recover_from_field(cfg, &ev.final_state.u, &config_path(cfg)?) {
            Ok(r) => {
                row.err_xalpha = r.sup_error();
                row.g_max_abs = r.g.iter().map(|g| g.abs()).max().unwrap_or(0);
                result = Some(r);
            }
            Err(e) if is_unwrap_abort(&e) => row.unwrap_abort = Some(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    row.wall_s = start.elapsed().as_secs_f64();
    info!(
        "h = {}: err_v {:e}, err_u1 {:e}, err_xalpha {:e}, {:.2} s",
        row.h, row.err_v, row.err_u1, row.err_xalpha, row.wall_s
    );
    Ok((row, result))
}

fn check_h_list(h_list: &[f64], min_len: usize) -> Result<()> {
    if h_list.len() < min_len {
        return Err(Error::TooFewSamples {
            needed: min_len,
            found: h_list.len(),
        });
    }
    if h_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("h list must be strictly decreasing".into()));
    }
    Ok(())
}

fn run_entries(
    cfg: &ExperimentConfig,
    h_list: &[f64],
    with_correction: bool,
) -> Result<Vec<(SweepRow, Option<RecoveryResult>)>> {
    let cfgs = h_list.iter().map(|h| cfg.with_h(*h)).collect::<Result<Vec<_>>>()?;
    cfgs.par_iter().map(|c| sweep_entry(c, with_correction, true)).collect()
}

/// Errors of `v` and `u₁` against the solver plus end-to-end Xα recovery, per `h`.
pub fn run_convergence_sweep(cfg: &ExperimentConfig, h_list: &[f64]) -> Result<SweepReport> {
    check_h_list(h_list, 3)?;
    let rows = run_entries(cfg, h_list, true)?.into_iter().map(|(r, _)| r).collect();
    Ok(SweepReport::new(rows, cfg.alpha.amplitude() == 0.0))
}

#[derive(Debug, Clone)]
pub struct RecoveryExperiment {
    pub report: SweepReport,
    /// One entry per row; `None` where the unwrap aborted.
    pub results: Vec<Option<RecoveryResult>>,
    /// 1D α reconstructions along `ξ = +1`.
    pub reconstructions: Vec<Option<Reconstruction1d>>,
}

impl RecoveryExperiment {
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        self.report.write_to(dir)?;
        for (row, (res, rec)) in self
            .report
            .rows
            .iter()
            .zip(self.results.iter().zip(&self.reconstructions))
        {
            if let Some(r) = res {
                write_text(&dir.join(format!("recovery_h{}.csv", row.h)), &r.to_csv())?;
            }
            if let Some(a) = rec {
                write_text(&dir.join(format!("alpha_h{}.csv", row.h)), &a.to_csv())?;
            }
        }
        Ok(())
    }
}

/// End-to-end recovery at each `h` (default: the configured `h`), without the
/// correction term.
pub fn run_recovery_experiment(cfg: &ExperimentConfig, h_list: Option<&[f64]>) -> Result<RecoveryExperiment> {
    let own = [cfg.h];
    let h_list = h_list.unwrap_or(&own);
    check_h_list(h_list, 1)?;
    let entries = run_entries(cfg, h_list, false)?;
    let mut rows = Vec::with_capacity(entries.len());
    let mut results = Vec::with_capacity(entries.len());
    let mut reconstructions = Vec::with_capacity(entries.len());
    for (row, res) in entries {
        let rec = match &res {
            Some(r) if cfg.dim == 1 && cfg.xi[0] > 0.0 => Some(reconstruct_alpha_1d(&r.s, &r.xalpha, &cfg.alpha)?),
            _ => None,
        };
        rows.push(row);
        results.push(res);
        reconstructions.push(rec);
    }
    Ok(RecoveryExperiment {
        report: SweepReport::new(rows, cfg.alpha.amplitude() == 0.0),
        results,
        reconstructions,
    })
}
