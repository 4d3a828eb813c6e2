//! One PASS/FAIL line per acceptance criterion, then a single assertion over all of them.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use nls_inverse::ansatz::{a0_at, a0_residual, a1_at, solve_a1, Coupling};
use nls_inverse::config::ExperimentConfig;
use nls_inverse::fields::{make_grid, sup_norm_diff, ComplexField};
use nls_inverse::harness::{
    cli_main, fit_loglog, run_convergence_sweep, run_recovery_experiment, SweepReport, DEFAULT_H_LIST,
};
use nls_inverse::recovery::{reconstruct_alpha_2d, relative_l2_on_ball, synthetic_reconstruction_1d, synthetic_scans};
use nls_inverse::solver::{evolve, run, strang_step, Propagator, RunOptions, SolverState};
use nls_inverse::xray::{uniform_angles, uniform_offsets};
use num_complex::Complex64;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn canonical() -> ExperimentConfig {
    ExperimentConfig::canonical(1).unwrap()
}

fn rate_of_v(rep: &SweepReport) -> Outcome {
    let f = rep.fit_v.expect("v fit");
    let errs: Vec<String> = rep.rows.iter().map(|r| format!("{:.3e}", r.err_v)).collect();
    Outcome {
        id: 1,
        name: "rate of |u - v|",
        pass: f.slope >= 0.45 && f.residual < 0.3,
        detail: format!(
            "slope {:.4} (need >= 0.45), residual {:.4} (need < 0.3), errors [{}]",
            f.slope,
            f.residual,
            errs.join(", ")
        ),
    }
}

fn correction_improves(rep: &SweepReport) -> Outcome {
    let pairs: Vec<String> = rep
        .rows
        .iter()
        .map(|r| format!("h={}: {:.3e} vs {:.3e}", r.h, r.err_u1, r.err_v))
        .collect();
    Outcome {
        id: 2,
        name: "|u - u1| < |u - v| at every h",
        pass: rep.rows.iter().all(|r| r.err_u1 < r.err_v),
        detail: pairs.join("; "),
    }
}

fn rate_of_xalpha(rep: &SweepReport) -> Outcome {
    let errs: Vec<String> = rep.rows.iter().map(|r| format!("{:.3e}", r.err_xalpha)).collect();
    let aborts = rep.unwrap_aborts();
    let g = rep.rows.iter().map(|r| r.g_max_abs).max().unwrap_or(0);
    match rep.fit_xalpha {
        Some(f) => Outcome {
            id: 3,
            name: "rate of recovered X alpha",
            pass: f.slope >= 0.8 && aborts == 0,
            detail: format!(
                "slope {:.4} (need >= 0.8), constant {:.4e}, unwrap aborts {aborts}, max |g| {g}, errors [{}]",
                f.slope,
                f.constant,
                errs.join(", ")
            ),
        },
        None => Outcome {
            id: 3,
            name: "rate of recovered X alpha",
            pass: false,
            detail: format!("no fit, unwrap aborts {aborts}"),
        },
    }
}

fn alpha_1d(rep: &SweepReport) -> Outcome {
    let cfg = canonical();
    let synth = synthetic_reconstruction_1d(&cfg.alpha, -2.0, 2.0, 0.01)
        .unwrap()
        .sup_error();
    let h = 0.025;
    let exp = run_recovery_experiment(&cfg, Some(&[h])).unwrap();
    let e2e = exp.reconstructions[0].as_ref().map_or(f64::INFINITY, |r| r.sup_error());
    let bound = rep.fit_xalpha.map_or(f64::NAN, |f| 10.0 * f.constant * h);
    Outcome {
        id: 4,
        name: "1D alpha reconstruction",
        pass: synth < 1e-5 && e2e <= bound,
        detail: format!("synthetic sup error {synth:.3e} (need < 1e-5); end-to-end at h = {h}: {e2e:.3e} (need <= 10 C h = {bound:.3e})"),
    }
}

fn alpha_2d() -> Outcome {
    let alpha = ExperimentConfig::canonical(2).unwrap().alpha;
    let thetas = uniform_angles(90);
    let offsets = uniform_offsets(-2.0, 2.0, 401);
    let scans = synthetic_scans(&alpha, &thetas, &offsets).unwrap();
    let grid = make_grid(2, &[(-2.0, 2.0), (-2.0, 2.0)], &[256, 256]).unwrap();
    let rec = reconstruct_alpha_2d(&scans, &grid).unwrap();
    let err = relative_l2_on_ball(&rec, &alpha, 1.5 * alpha.support_radius());
    Outcome {
        id: 5,
        name: "2D filtered back-projection",
        pass: err <= 0.05,
        detail: format!("relative L2 error {err:.4e} on B(0, 1.5 r), 90 angles, 401 offsets (need <= 5e-2)"),
    }
}

fn conservation(rep: &SweepReport) -> Outcome {
    let mass = rep.rows.iter().fold(0.0f64, |m, r| m.max(r.mass_drift));
    let energy = rep.rows.iter().fold(0.0f64, |m, r| m.max(r.energy_drift));
    let base = canonical();
    let factors = [1.0 / 250.0, 1.0 / 500.0, 1.0 / 1000.0, 1.0 / 2000.0];
    let (dts, drifts): (Vec<f64>, Vec<f64>) = factors
        .iter()
        .map(|f| {
            let mut c = base.clone();
            c.time.dt_factor = *f;
            c.time.diag_stride = 1;
            (c.dt(), evolve(&c).unwrap().energy_drift)
        })
        .unzip();
    let order = fit_loglog(&dts, &drifts).unwrap().slope;
    Outcome {
        id: 6,
        name: "solver conservation",
        pass: mass < 1e-10 && energy < 1e-6 && order >= 1.9,
        detail: format!(
            "max mass drift {mass:.3e} (need < 1e-10), max energy drift {energy:.3e} (need < 1e-6), energy drift order {order:.3} (need >= 1.9)"
        ),
    }
}

fn exact_solutions() -> Outcome {
    let n = 64;
    let grid = make_grid(1, &[(0.0, 2.0 * PI)], &[n]).unwrap();
    let k = 5.0;
    let dt = 0.013;
    let u = ComplexField::from_fn(grid.clone(), |x| Complex64::from_polar(1.0, k * x[0])).unwrap();
    let prop = Propagator::with_alpha_values(&grid, vec![0.0; n], dt).unwrap();
    let s = strang_step(SolverState { t: 0.0, step: 0, u }, &prop).unwrap();
    let exact = ComplexField::from_fn(grid.clone(), |x| Complex64::from_polar(1.0, k * x[0] - k * k * dt)).unwrap();
    let linear = sup_norm_diff(&s.u, &exact).unwrap();

    let (k, c, amp, dt, steps) = (3.0, 0.7, 1.3, 0.01, 50);
    let u = ComplexField::from_fn(grid.clone(), |x| Complex64::from_polar(amp, k * x[0])).unwrap();
    let prop = Propagator::with_alpha_values(&grid, vec![c; n], dt).unwrap();
    let opts = RunOptions {
        mass_tol: 1e-10,
        diag_stride: 10,
        keep_steps: vec![],
    };
    let ev = run(u, 0.0, &prop, steps, &opts).unwrap();
    let tau = steps as f64 * dt;
    let exact = ComplexField::from_fn(grid, |x| {
        Complex64::from_polar(amp, k * x[0] - (k * k + c * amp * amp) * tau)
    })
    .unwrap();
    let plane = sup_norm_diff(&ev.final_state.u, &exact).unwrap();
    Outcome {
        id: 7,
        name: "exact single-mode and plane-wave evolution",
        pass: linear <= 1e-12 && plane <= 1e-12,
        detail: format!("single mode {linear:.3e}, constant-alpha plane wave {plane:.3e} (need <= 1e-12)"),
    }
}

fn ansatz_residuals() -> Outcome {
    let c = canonical();
    let grid = c.grid().unwrap();
    let r: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|d| a0_residual(&c, 0.0, &grid, *d).unwrap().max_abs())
        .collect();
    let a0_order = r.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);

    let mut invariance = 0.0f64;
    for i in 0..200 {
        let x0 = -6.0 + 12.0 * i as f64 / 199.0;
        let z = c.psi.eval(&[x0 - 2.0 * c.horizon]).abs();
        for t in [-1.0, -0.4, 0.0, 0.3, 1.0] {
            invariance = invariance.max((a0_at(&c, t, &[x0 + 2.0 * t]).norm() - z).abs());
        }
    }

    let xs: Vec<f64> = (0..41).map(|i| -1.0 + 0.25 * i as f64).collect();
    let sols: Vec<Vec<Complex64>> = [50usize, 100, 200, 400]
        .iter()
        .map(|&n| {
            xs.iter()
                .map(|&x| a1_at(&c, c.horizon, &[x], n, Coupling::Expansion))
                .collect()
        })
        .collect();
    let diffs: Vec<f64> = sols
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).fold(0.0f64, |m, (a, b)| m.max((a - b).norm())))
        .collect();
    let a1_order = diffs
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min);

    let mut z = c.clone();
    z.alpha = z.alpha.with_amplitude(0.0);
    let times = [-0.1, -0.05, 0.0, 0.1];
    let corr = solve_a1(&z, &grid, &times).unwrap();
    let mut closed = 0.0f64;
    for (t, f) in times.iter().zip(&corr.fields) {
        let tp = t / z.h;
        let exact = ComplexField::from_fn(grid.clone(), |x| {
            Complex64::i() * (tp + z.horizon) * z.psi.laplacian(&[x[0] - 2.0 * tp - 2.0 * z.horizon])
        })
        .unwrap();
        closed = closed.max(sup_norm_diff(f, &exact).unwrap());
    }
    Outcome {
        id: 8,
        name: "ansatz residuals",
        pass: a0_order >= 1.9 && invariance <= 1e-13 && a1_order >= 3.7 && closed <= 1e-6,
        detail: format!(
            "a0 residual order {a0_order:.3} (need >= 1.9), |a0| invariance {invariance:.3e} (need <= 1e-13), a1 order {a1_order:.3} (need >= 3.7), alpha = 0 closed form {closed:.3e} (need <= 1e-6)"
        ),
    }
}

/// Every file in `dir`, with the wall-clock column of `sweep.csv` removed.
fn masked_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let mut bytes = fs::read(&p).unwrap();
            if name == "sweep.csv" {
                let text = String::from_utf8(bytes).unwrap();
                let masked: Vec<String> = text
                    .lines()
                    .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
                    .collect();
                bytes = masked.join("\n").into_bytes();
            }
            (name, bytes)
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for i in 0..2 {
        let sweep = tmp.path().join(format!("sweep{i}"));
        let solve = tmp.path().join(format!("solve{i}"));
        let a = cli_main([
            "nlslab",
            "sweep",
            "--h",
            "0.2,0.1,0.05",
            "--out",
            sweep.to_str().unwrap(),
        ]);
        let b = cli_main(["nlslab", "solve", "--h", "0.1", "--out", solve.to_str().unwrap()]);
        assert_eq!((a, b), (0, 0));
        runs.push((masked_outputs(&sweep), masked_outputs(&solve)));
    }
    let files = runs[0].0.len() + runs[0].1.len();
    Outcome {
        id: 9,
        name: "determinism",
        pass: runs[0] == runs[1],
        detail: format!("{files} output files compared byte for byte, sweep wall_s column masked"),
    }
}

#[test]
fn acceptance() {
    let sweep = run_convergence_sweep(&canonical(), &DEFAULT_H_LIST).unwrap();
    let outcomes = vec![
        rate_of_v(&sweep),
        correction_improves(&sweep),
        rate_of_xalpha(&sweep),
        alpha_1d(&sweep),
        alpha_2d(),
        conservation(&sweep),
        exact_solutions(),
        ansatz_residuals(),
        determinism(),
    ];
    for o in &outcomes {
        println!(
            "criterion {} {}: {} | {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
