use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use super::report::{ensure_dir, write_text};
use super::sweep::{compare_at_check_times, run_convergence_sweep, run_recovery_experiment, DEFAULT_H_LIST};
use crate::ansatz::{a1_diagnostics_csv, a1_residual, assemble_v, assemble_with_correction, solve_a1, Coupling};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::fields::{dump_field, make_grid, FieldGrid};
use crate::recovery::{
    config_path, reconstruct_alpha_2d, recover_scan_2d, relative_l2_on_ball, synthetic_reconstruction_1d,
    synthetic_scans, synthetic_xalpha, DirectionalScan,
};
use crate::solver::{check_times, evolve_with, rescaled_time, StepPolicy};
use crate::xray::{pray_transform, uniform_angles, uniform_offsets, Sinogram};

#[derive(Debug, Parser)]
#[command(
    name = "nlslab",
    version,
    about = "Wave-packet experiments for the cubic NLS with variable nonlinearity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config file; the canonical config when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Semiclassical parameter; a comma-separated list for `sweep` and `recover`.
    #[arg(long, value_delimiter = ',')]
    h: Vec<f64>,
    /// Dimension of the canonical config, or a check against the config file.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve from -Th to Th; write the final field and diagnostics.
    Solve(Common),
    /// Assemble v and u1 at Th; write fields and a1 diagnostics.
    Ansatz(Common),
    /// Solver against v and u1 at the check times.
    Compare(Common),
    /// Forward transforms by quadrature along the configured path or sinogram.
    Xray(Common),
    /// Recover X alpha and alpha.
    Recover {
        #[command(flatten)]
        common: Common,
        /// Take X alpha from quadrature instead of the solver.
        #[arg(long)]
        synthetic: bool,
    },
    /// Convergence sweep over h.
    Sweep(Common),
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            1
        }
    }
}

struct Setup {
    cfg: ExperimentConfig,
    out: PathBuf,
    h_list: Vec<f64>,
}

fn setup(c: &Common) -> Result<Setup> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::canonical(c.dim.unwrap_or(1))?,
    };
    if let Some(d) = c.dim {
        if d != cfg.dim {
            return Err(Error::DimensionMismatch {
                expected: cfg.dim,
                found: d,
            });
        }
    }
    if let Some(h) = c.h.first() {
        cfg = cfg.with_h(*h)?;
    }
    let out = c.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    ensure_dir(&out)?;
    Ok(Setup {
        cfg,
        out,
        h_list: c.h.clone(),
    })
}

fn single_h(s: &Setup) -> Result<()> {
    if s.h_list.len() > 1 {
        return Err(Error::Config("this subcommand takes a single --h".into()));
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Solve(c) => solve(&setup(&c)?),
        Command::Ansatz(c) => ansatz(&setup(&c)?),
        Command::Compare(c) => compare(&setup(&c)?),
        Command::Xray(c) => xray(&setup(&c)?),
        Command::Recover { common, synthetic } => {
            let s = setup(&common)?;
            if synthetic {
                recover_synthetic(&s)
            } else {
                recover(&s)
            }
        }
        Command::Sweep(c) => sweep(&setup(&c)?),
    }
}

fn solve(s: &Setup) -> Result<()> {
    single_h(s)?;
    let cfg = &s.cfg;
    let grid = cfg.grid()?;
    let policy = StepPolicy::from_config(cfg);
    let ev = evolve_with(cfg, &grid, &policy)?;
    dump_field(&ev.final_state.u, s.out.join("final.nlsf"))?;
    write_text(&s.out.join("diagnostics.csv"), &ev.diagnostics_csv())?;
    if cfg.time.snapshot_stride > 0 {
        for snap in ev.snapshots.iter().filter(|sn| sn.step % cfg.time.snapshot_stride == 0) {
            dump_field(&snap.field, s.out.join(format!("snap_{:06}.nlsf", snap.step)))?;
        }
    }
    info!("mass drift {:e}, energy drift {:e}", ev.mass_drift, ev.energy_drift);
    Ok(())
}

fn ansatz(s: &Setup) -> Result<()> {
    single_h(s)?;
    let cfg = &s.cfg;
    let grid = cfg.grid()?;
    let times = check_times(cfg);
    let th = times[times.len() - 1];
    let correction = solve_a1(cfg, &grid, &times)?;
    dump_field(&assemble_v(cfg, th, &grid)?, s.out.join("v_final.nlsf"))?;
    dump_field(
        &assemble_with_correction(cfg, th, &grid, &correction)?,
        s.out.join("u1_final.nlsf"),
    )?;
    // Interior times only: the residual stencil needs room on both sides.
    let delta = 1e-3 * cfg.horizon;
    let mut rows = Vec::new();
    for (t, a1) in times.iter().zip(&correction.fields) {
        let tp = rescaled_time(cfg, *t);
        let res = if tp.abs() + 2.0 * delta < cfg.horizon {
            a1_residual(cfg, *t, &grid, delta, Coupling::default())?.max_abs()
        } else {
            f64::NAN
        };
        rows.push((tp, a1.max_abs(), res));
    }
    write_text(&s.out.join("a1_diagnostics.csv"), &a1_diagnostics_csv(&rows))
}

fn compare(s: &Setup) -> Result<()> {
    single_h(s)?;
    let cfg = &s.cfg;
    let grid = cfg.grid()?;
    let policy = StepPolicy::from_config(cfg);
    let ev = evolve_with(cfg, &grid, &policy)?;
    let checks = compare_at_check_times(cfg, &ev, &grid, &policy, true)?;
    let mut csv = String::from("t,err_v,err_u1\n");
    for c in &checks {
        let _ = writeln!(csv, "{:e},{:e},{:e}", c.t, c.err_v, c.err_u1);
    }
    write_text(&s.out.join("compare.csv"), &csv)?;
    write_text(&s.out.join("diagnostics.csv"), &ev.diagnostics_csv())
}

fn planar_sampling(cfg: &ExperimentConfig) -> (Vec<f64>, Vec<f64>) {
    let m = &cfg.measure;
    (uniform_angles(m.angles), uniform_offsets(m.s_min, m.s_max, m.offsets))
}

fn xray(s: &Setup) -> Result<()> {
    let cfg = &s.cfg;
    match cfg.dim {
        1 => {
            let path = config_path(cfg)?;
            let xa = synthetic_xalpha(&cfg.alpha, &path.points, &cfg.xi)?;
            let mut csv = String::from("s,xalpha\n");
            for (v, x) in path.s.iter().zip(&xa) {
                let _ = writeln!(csv, "{v:e},{x:e}");
            }
            write_text(&s.out.join("xray.csv"), &csv)
        }
        2 => {
            let (thetas, offsets) = planar_sampling(cfg);
            let mut values = Vec::with_capacity(thetas.len() * offsets.len());
            for th in &thetas {
                let xi = crate::xray::direction(*th);
                let nrm = crate::xray::normal(*th);
                for t in &offsets {
                    values.push(pray_transform(&cfg.alpha, &[t * nrm[0], t * nrm[1]], &xi)?);
                }
            }
            Sinogram::new(thetas, offsets, values)?.write_csv(s.out.join("sinogram.csv"))
        }
        d => Err(Error::Config(format!("xray supports dim 1 or 2, got {d}"))),
    }
}

fn recover(s: &Setup) -> Result<()> {
    let cfg = &s.cfg;
    match cfg.dim {
        1 => {
            let h_list = if s.h_list.len() > 1 {
                Some(s.h_list.as_slice())
            } else {
                None
            };
            run_recovery_experiment(cfg, h_list)?.write_to(&s.out)
        }
        2 => {
            single_h(s)?;
            let (thetas, offsets) = planar_sampling(cfg);
            let scans = thetas
                .iter()
                .map(|th| recover_scan_2d(cfg, *th, &offsets))
                .collect::<Result<Vec<_>>>()?;
            planar_report(s, &scans)
        }
        d => Err(Error::Config(format!("recover supports dim 1 or 2, got {d}"))),
    }
}

fn recover_synthetic(s: &Setup) -> Result<()> {
    let cfg = &s.cfg;
    match cfg.dim {
        1 => {
            let rec = synthetic_reconstruction_1d(&cfg.alpha, cfg.measure.s_min, cfg.measure.s_max, 0.01)?;
            write_text(&s.out.join("alpha_synthetic.csv"), &rec.to_csv())?;
            let report = format!(
                "alpha sup error {:e}\nalpha l2 error {:e}\n",
                rec.sup_error(),
                rec.l2_error()
            );
            write_text(&s.out.join("reconstruction.txt"), &report)
        }
        2 => {
            let (thetas, offsets) = planar_sampling(cfg);
            planar_report(s, &synthetic_scans(&cfg.alpha, &thetas, &offsets)?)
        }
        d => Err(Error::Config(format!("recover supports dim 1 or 2, got {d}"))),
    }
}

/// Reconstruction grid covering the measurement offsets at spacing <= 0.02.
fn planar_grid(cfg: &ExperimentConfig) -> Result<FieldGrid> {
    let r = cfg.measure.s_min.abs().max(cfg.measure.s_max.abs());
    let n = ((2.0 * r / 0.02).ceil() as usize).next_power_of_two().max(8);
    make_grid(2, &[(-r, r), (-r, r)], &[n, n])
}

fn planar_report(s: &Setup, scans: &[DirectionalScan]) -> Result<()> {
    let cfg = &s.cfg;
    let grid = planar_grid(cfg)?;
    let alpha = reconstruct_alpha_2d(scans, &grid)?;
    dump_field(&alpha, s.out.join("alpha_fbp.nlsf"))?;
    crate::recovery::sinogram_from_scans(scans)?.write_csv(s.out.join("sinogram.csv"))?;
    let radius = 1.5 * cfg.alpha.support_radius();
    let err = relative_l2_on_ball(&alpha, &cfg.alpha, radius);
    let report = format!(
        "angles {}\noffsets {}\nrelative l2 error on ball of radius {radius} {err:e}\n",
        scans.len(),
        scans.first().map_or(0, |sc| sc.offsets.len())
    );
    write_text(&s.out.join("fbp_report.txt"), &report)
}

fn sweep(s: &Setup) -> Result<()> {
    let h_list = if s.h_list.is_empty() {
        DEFAULT_H_LIST.to_vec()
    } else {
        s.h_list.clone()
    };
    let report = run_convergence_sweep(&s.cfg, &h_list)?;
    report.write_to(&s.out)?;
    info!("wrote {}", s.out.display());
    print!("{}", report.summary());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn run(args: &[&str]) -> i32 {
        cli_main(std::iter::once("nlslab").chain(args.iter().copied()))
    }

    fn out_arg(dir: &std::path::Path) -> String {
        dir.to_str().unwrap().to_string()
    }

    #[test]
    fn solve_writes_field_and_diagnostics() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("run1");
        assert_eq!(run(&["solve", "--h", "0.2", "--out", &out_arg(&out)]), 0);
        let f = crate::fields::load_field(out.join("final.nlsf")).unwrap();
        assert_eq!(f.grid().len(), 512);
        let diag = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
        assert!(diag.starts_with("step,t,mass,energy,max_abs,boundary_leak\n"));
    }

    #[test]
    fn solve_from_config_file() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::canonical(1).unwrap().with_h(0.2).unwrap();
        let path = tmp.path().join("c.cfg");
        fs::write(&path, cfg.emit()).unwrap();
        let out = tmp.path().join("o");
        assert_eq!(
            run(&["solve", "--config", path.to_str().unwrap(), "--out", &out_arg(&out)]),
            0
        );
        assert!(out.join("final.nlsf").exists());
    }

    #[test]
    fn sweep_writes_csv_summary_and_curves() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("s");
        assert_eq!(run(&["sweep", "--h", "0.2,0.1,0.05", "--out", &out_arg(&out)]), 0);
        let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("h,err_v,err_u1,err_xalpha,slope_v_running,mass_drift,energy_drift,wall_s\n"));
        let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
        assert!(summary.contains("err_v: slope"));
        for f in ["err_v.dat", "err_u1.dat", "err_xalpha.dat"] {
            assert_eq!(fs::read_to_string(out.join(f)).unwrap().lines().count(), 4);
        }
    }

    #[test]
    fn ansatz_compare_xray_recover() {
        let tmp = tempfile::tempdir().unwrap();
        let out = out_arg(tmp.path());
        for sub in ["ansatz", "compare", "xray", "recover"] {
            assert_eq!(run(&[sub, "--h", "0.2", "--out", &out]), 0, "{sub}");
        }
        assert_eq!(run(&["recover", "--synthetic", "--out", &out]), 0);
        for f in [
            "v_final.nlsf",
            "u1_final.nlsf",
            "a1_diagnostics.csv",
            "compare.csv",
            "xray.csv",
            "recovery_h0.2.csv",
            "alpha_h0.2.csv",
            "alpha_synthetic.csv",
            "reconstruction.txt",
        ] {
            assert!(tmp.path().join(f).exists(), "{f}");
        }
        assert_eq!(
            fs::read_to_string(tmp.path().join("compare.csv"))
                .unwrap()
                .lines()
                .count(),
            5
        );
    }

    #[test]
    fn planar_synthetic_recovery() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::canonical(2).unwrap();
        cfg.measure.angles = 16;
        cfg.measure.offsets = 101;
        let path = tmp.path().join("p.cfg");
        fs::write(&path, cfg.emit()).unwrap();
        let out = out_arg(tmp.path());
        assert_eq!(
            run(&[
                "recover",
                "--synthetic",
                "--config",
                path.to_str().unwrap(),
                "--out",
                &out
            ]),
            0
        );
        assert_eq!(run(&["xray", "--config", path.to_str().unwrap(), "--out", &out]), 0);
        let report = fs::read_to_string(tmp.path().join("fbp_report.txt")).unwrap();
        assert!(report.starts_with("angles 16\noffsets 101\n"));
        assert!(tmp.path().join("alpha_fbp.nlsf").exists());
        assert!(tmp.path().join("sinogram.csv").exists());
    }

    #[test]
    fn runtime_errors_exit_one() {
        let tmp = tempfile::tempdir().unwrap();
        let out = out_arg(tmp.path());
        let missing = tmp.path().join("missing.cfg");
        assert_eq!(
            run(&["recover", "--config", missing.to_str().unwrap(), "--out", &out]),
            1
        );
        assert_eq!(run(&["solve", "--h", "1.5", "--out", &out]), 1);
        assert_eq!(run(&["sweep", "--h", "0.2,0.1", "--out", &out]), 1);
        assert_eq!(run(&["solve", "--h", "0.2,0.1", "--out", &out]), 1);
        assert_eq!(run(&["solve", "--dim", "3", "--out", &out]), 1);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(&["frobnicate"]), 2);
        assert_eq!(run(&["solve", "--bogus"]), 2);
        assert_eq!(run(&["solve", "--h", "abc"]), 2);
        assert_eq!(run(&[]), 2);
        assert_eq!(run(&["--help"]), 0);
    }
}
